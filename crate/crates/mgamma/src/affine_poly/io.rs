//! JSON specification files.
//!
//! ```json
//! {"n": 2, "lambda": 2.0, "Lambda": [3.0, 4.0], "coeffs": {"1": 3, "2": 3, "1,2": 1}}
//! ```
//!
//! Subset keys are comma-joined 1-based labels; `p_∅ = 1` is implicit and
//! unlisted coefficients are 0. `Lambda` is optional and holds either the
//! per-margin shapes `(λ_1, …, λ_n)` or the full `(λ, λ_1, …, λ_n)`.

use super::{AffinePolynomial, MfgdSpec, MgdSpec, Spec};
use crate::combinat::{mask_label, SubsetIndex, MAX_DIM};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub n: usize,
    pub lambda: f64,
    #[serde(rename = "Lambda", default, skip_serializing_if = "Option::is_none")]
    pub big_lambda: Option<Vec<f64>>,
    pub coeffs: BTreeMap<String, f64>,
}

impl SpecFile {
    pub fn into_spec(self) -> Result<Spec> {
        let n = self.n;
        if !(1..=MAX_DIM).contains(&n) {
            return Err(Error::Parse(format!("field \"n\": {n} is outside 1..={MAX_DIM}")));
        }
        let mut coeff = vec![0.0; 1 << n];
        coeff[0] = 1.0;
        for (key, &v) in &self.coeffs {
            let s = SubsetIndex::parse_label(n, key)
                .map_err(|e| Error::Parse(format!("field \"coeffs\" key {key:?}: {e}")))?;
            if s.is_empty() {
                if v != 1.0 {
                    return Err(Error::Parse(format!("field \"coeffs\" key {key:?}: constant term must be 1")));
                }
                continue;
            }
            if !v.is_finite() {
                return Err(Error::Parse(format!("field \"coeffs\" key {key:?}: value is not finite")));
            }
            coeff[s.bits() as usize] = v;
        }
        let p = AffinePolynomial::from_coeffs(n, coeff)?;
        let lambda = self.lambda;
        match self.big_lambda {
            None => Ok(Spec::Mgd(
                MgdSpec::new(p, lambda).map_err(|e| Error::Parse(format!("field \"lambda\": {e}")))?,
            )),
            Some(l) => {
                let shapes = if l.len() == n + 1 {
                    if (l[0] - lambda).abs() > 1e-12 * lambda.abs().max(1.0) {
                        return Err(Error::Parse(format!(
                            "field \"Lambda\": first entry {} differs from lambda {lambda}",
                            l[0]
                        )));
                    }
                    l[1..].to_vec()
                } else if l.len() == n {
                    l
                } else {
                    return Err(Error::Parse(format!(
                        "field \"Lambda\": expected {n} or {} entries, got {}",
                        n + 1,
                        l.len()
                    )));
                };
                Ok(Spec::Mfgd(
                    MfgdSpec::new(p, lambda, shapes).map_err(|e| Error::Parse(format!("field \"Lambda\": {e}")))?,
                ))
            }
        }
    }

    pub fn from_spec(spec: &Spec) -> SpecFile {
        let p = spec.polynomial();
        let coeffs = (1..=p.full_mask()).map(|m| (mask_label(m), p.coeff(m))).collect();
        let big_lambda = match spec {
            Spec::Mgd(_) => None,
            Spec::Mfgd(s) => Some(s.lambdas.clone()),
        };
        SpecFile { n: p.n(), lambda: spec.lambda(), big_lambda, coeffs }
    }
}

/// Parses a specification from JSON text. Syntax errors carry line and column.
pub fn parse_spec(text: &str) -> Result<Spec> {
    let file: SpecFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    file.into_spec()
}

pub fn read_spec(path: &Path) -> Result<Spec> {
    let text = std::fs::read_to_string(path)?;
    parse_spec(&text).map_err(|e| match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn spec_to_json(spec: &Spec) -> String {
    serde_json::to_string_pretty(&SpecFile::from_spec(spec)).expect("spec files always serialize")
}
