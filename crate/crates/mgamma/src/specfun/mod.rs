//! Special functions: hypergeometric series, the `c_α` expansion, densities
//! and conditional Laplace transforms.

mod cond_lt;
mod expansion;
mod pdf;
mod series;

pub use cond_lt::{conditional_lt_closed, conditional_lt_exchangeable};
pub use expansion::{c_alpha_expansion, c_alpha_r2_closed, c_alpha_r3_closed, CoefficientExpansion, MAX_EXPANSION_CELLS};
pub use pdf::{
    pdf_bgd, pdf_bivariate_mfgd, pdf_exchangeable, pdf_general, pdf_multisensor, pdf_tgd, reg_lower_incomplete_gamma,
    GeneralDensity,
};

pub(crate) use pdf::require_id;
pub use series::{
    horn_phi3, hyper_pfm, lauricella_1f3, lauricella_fi, lauricella_fii, pochhammer, CompensatedSum, SeriesParams,
};
