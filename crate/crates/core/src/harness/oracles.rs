//! Slow, independent reference computations used to cross-check the fast
//! paths.

/// Adaptive Simpson quadrature of `f` on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// `E1(x)` by quadrature of `exp(-e^u)` over `u` from `ln x`, which is
/// `int_x^inf e^{-t}/t dt` after substituting `t = e^u`.
pub fn e1_quadrature(x: f64) -> f64 {
    let f = |u: f64| (-u.exp()).exp();
    let lo = x.ln();
    // integrand is below 1e-300 past t = 700
    let hi = 700f64.ln().max(lo + 1.0);
    // scale the tolerance to the size of the answer
    let rough = adaptive_simpson(&f, lo, hi, 1e-8 * f(lo));
    adaptive_simpson(&f, lo, hi, 1e-15 * rough)
}

/// Power split from assigning each cell of a uniform grid on `[0, P]` to the
/// user with the largest marginal weighted rate `phi_k h_k / (1 + h_k z)` at
/// the cell midpoint. `cells` sets the resolution.
pub fn grid_allocation(phi: &[f64], h_sorted: &[f64], power: f64, cells: usize) -> Vec<f64> {
    let step = power / cells as f64;
    let mut count = vec![0usize; phi.len()];
    for i in 0..cells {
        let z = (i as f64 + 0.5) * step;
        let mut best = (0usize, f64::NEG_INFINITY);
        for (k, (&w, &h)) in phi.iter().zip(h_sorted).enumerate() {
            let v = w * h / (1.0 + h * z);
            if v > best.1 {
                best = (k, v);
            }
        }
        count[best.0] += 1;
    }
    count.iter().map(|&c| c as f64 / cells as f64).collect()
}
