//! Deterministic composite Gauss-Legendre quadrature on [-1, 1].
//!
//! Used to evaluate the one-dimensional cosine integrals behind the
//! closed-form second moments of the ridge-sum test function. Nodes are
//! computed once by Newton iteration on the Legendre polynomial; the
//! composite rule keeps the per-panel argument small so the fixed order
//! reaches ~1e-15 even for fast oscillations.

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    // Roots come in +/- pairs; iterate on the upper half.
    for i in 0..n.div_ceil(2) {
        // Chebyshev-based initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Evaluate P_n and P_n' by the three-term recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            // n == 1 leaves p1 = x, p0 = 1; the formula below still holds.
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Composite Gauss-Legendre integral of `f` over [-1, 1], splitting into
/// `panels` equal panels of `order` points each.
pub fn integrate(f: impl Fn(f64) -> f64, order: usize, panels: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(order);
    let h = 2.0 / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let a = -1.0 + p as f64 * h;
        let mid = a + 0.5 * h;
        let half = 0.5 * h;
        let mut panel = 0.0;
        for (x, w) in nodes.iter().zip(&weights) {
            panel += w * f(mid + half * x);
        }
        total += half * panel;
    }
    total
}

/// Mean of cos(w·t) for t uniform on [-1, 1]: the building block of every
/// ridge-sum moment. Closed form is sin(w)/w; this evaluates it by
/// quadrature so the cached ground truth never shares a code path with
/// anything it is checked against.
pub fn mean_cos(w: f64) -> f64 {
    // Panel count grows with the oscillation count; 16 points per panel
    // then resolves each oscillation far below 1e-12.
    let panels = (2 + (w.abs() / 2.0) as usize).min(512);
    0.5 * integrate(|t| (w * t).cos(), 16, panels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        // 16-point rule is exact through degree 31.
        let val = integrate(|t| t * t * t * t, 16, 1);
        assert!((val - 2.0 / 5.0).abs() < 1e-14);
    }

    #[test]
    fn mean_cos_matches_closed_form() {
        for &w in &[0.0f64, 0.1, 1.0, 2.5, 7.0, 19.3, 55.0] {
            let expected = if w == 0.0 { 1.0 } else { w.sin() / w };
            let got = mean_cos(w);
            assert!(
                (got - expected).abs() < 1e-13,
                "w={w}: got {got}, expected {expected}"
            );
        }
    }

    #[test]
    fn node_symmetry() {
        let (nodes, weights) = gauss_legendre(7);
        for i in 0..7 {
            assert!((nodes[i] + nodes[6 - i]).abs() < 1e-15);
            assert!((weights[i] - weights[6 - i]).abs() < 1e-15);
        }
        assert!((weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }
}
