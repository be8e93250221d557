//! Gauss–Legendre quadrature on boxes, used to integrate densities over bins
//! and as a normalization oracle.

/// Nodes and weights of the `m`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(m > 0, "rule needs at least one node");
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    let mf = m as f64;
    for i in 0..m.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_m
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(m, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if m == 0 {
        return (1.0, 0.0);
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite rule on `[lo, hi]`: `panels` equal panels with `order` nodes each.
pub fn composite_rule(lo: f64, hi: f64, panels: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    let (t, w) = gauss_legendre(order);
    let h = (hi - lo) / panels as f64;
    let mut xs = Vec::with_capacity(panels * order);
    let mut ws = Vec::with_capacity(panels * order);
    for k in 0..panels {
        let a = lo + k as f64 * h;
        for (ti, wi) in t.iter().zip(&w) {
            xs.push(a + 0.5 * h * (ti + 1.0));
            ws.push(0.5 * h * wi);
        }
    }
    (xs, ws)
}

/// Tensor-product integral of `f` over the box with the given per-axis rules.
///
/// The outermost axis is split across `threads` scoped threads.
pub fn integrate_tensor<F>(f: F, rules: &[(Vec<f64>, Vec<f64>)], threads: usize) -> f64
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let dim = rules.len();
    assert!(dim > 0);
    let outer = rules[0].0.len();
    let threads = threads.clamp(1, outer.max(1));
    let chunk = outer.div_ceil(threads);
    let inner = |range: std::ops::Range<usize>| {
        let mut x = vec![0.0; dim];
        let mut total = 0.0;
        for i0 in range {
            x[0] = rules[0].0[i0];
            total += rules[0].1[i0] * inner_sum(&f, rules, 1, &mut x);
        }
        total
    };
    if threads == 1 {
        return inner(0..outer);
    }
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..threads)
            .map(|t| {
                let r = (t * chunk).min(outer)..((t + 1) * chunk).min(outer);
                let inner = &inner;
                s.spawn(move || inner(r))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("quadrature worker panicked")).sum()
    })
}

fn inner_sum<F: Fn(&[f64]) -> f64>(f: &F, rules: &[(Vec<f64>, Vec<f64>)], axis: usize, x: &mut [f64]) -> f64 {
    if axis == rules.len() {
        return f(x);
    }
    let (xs, ws) = &rules[axis];
    let mut total = 0.0;
    for (xi, wi) in xs.iter().zip(ws) {
        x[axis] = *xi;
        total += wi * inner_sum(f, rules, axis + 1, x);
    }
    total
}
