//! Special functions and closed-form rate expressions for symmetric fading
//! (`gamma_k = 1` for every user).

use serde::Serialize;

use crate::caching::{effective_weight, Placement};
use crate::channel::Power;
use crate::error::{domain, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_533;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Validity {
    Exact,
    LargeK,
    HighSnr,
}

/// A closed-form or limiting value. Every expression here assumes unit-mean
/// i.i.d. fading.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClosedForm {
    pub value: f64,
    pub validity: Validity,
    pub symmetric_only: bool,
}

impl ClosedForm {
    fn new(value: f64, validity: Validity) -> Self {
        Self {
            value,
            validity,
            symmetric_only: true,
        }
    }
}

/// Rejects fading profiles the closed forms do not cover.
pub fn check_symmetric(gamma: &[f64]) -> Result<()> {
    if gamma.iter().any(|&g| g != 1.0) {
        return domain("closed-form rates assume unit-mean symmetric fading");
    }
    Ok(())
}

fn e1_series(x: f64) -> f64 {
    // E1(x) = -gamma - ln x - sum_{n>=1} (-x)^n / (n n!)
    let mut term = 1.0;
    let mut sum = 0.0;
    for n in 1..200 {
        let nf = n as f64;
        term *= -x / nf;
        let add = term / nf;
        sum += add;
        if add.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    -EULER_GAMMA - x.ln() - sum
}

/// `e^x E1(x)` by modified Lentz evaluation of the continued fraction.
fn e1_scaled_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let a = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// Exponential integral `E1(x) = int_1^inf e^{-x t} / t dt` for `x > 0`.
pub fn exp_integral_e1(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return domain(format!("E1 needs x > 0, got {x}"));
    }
    Ok(if x <= 1.0 {
        e1_series(x)
    } else {
        e1_scaled_fraction(x) * (-x).exp()
    })
}

/// `e^x E1(x)`, finite for large `x` where `e^x` alone overflows.
pub fn exp_scaled_e1(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return domain(format!("E1 needs x > 0, got {x}"));
    }
    Ok(if x <= 1.0 {
        x.exp() * e1_series(x)
    } else {
        e1_scaled_fraction(x)
    })
}

/// Principal branch of the Lambert W function for `x >= 0`.
pub fn lambert_w(x: f64) -> Result<f64> {
    if !(x >= 0.0 && x.is_finite()) {
        return domain(format!("Lambert W needs finite x >= 0, got {x}"));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let mut w = if x < std::f64::consts::E {
        x.ln_1p()
    } else {
        let l = x.ln();
        l - l.ln()
    };
    // Halley's iteration
    for _ in 0..100 {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        w -= step;
        if step.abs() <= 1e-14 * w.abs().max(1e-300) {
            break;
        }
    }
    Ok(w)
}

/// `E[ln(1 + P h_min)]` for the minimum of `K` unit exponentials:
/// `e^{K/P} E1(K/P)`.
pub fn mean_multicast_rate(users: usize, power: Power) -> Result<f64> {
    if users < 1 {
        return domain("need at least one user");
    }
    exp_scaled_e1(users as f64 / power.value())
}

/// Average baseline rate `phi_K e^{K/P} E1(K/P)`.
pub fn baseline_exact(users: usize, power: Power, m: f64, placement: Placement) -> Result<ClosedForm> {
    let phi = effective_weight(m, users, placement)?;
    Ok(ClosedForm::new(phi * mean_multicast_rate(users, power)?, Validity::Exact))
}

/// Large-`K` limit of the baseline rate, `P m / (1 - m)`.
pub fn baseline_large_k(power: Power, m: f64) -> Result<ClosedForm> {
    check_fraction(m)?;
    Ok(ClosedForm::new(power.value() * m / (1.0 - m), Validity::LargeK))
}

/// Large-`K` equivalent of the selection rate,
/// `K m/(1-m) e^{1/P - 1/W(P)} W(P)`.
pub fn selection_large_k(users: usize, power: Power, m: f64) -> Result<ClosedForm> {
    check_fraction(m)?;
    let p = power.value();
    let w = lambert_w(p)?;
    let value = users as f64 * m / (1.0 - m) * (1.0 / p - 1.0 / w).exp() * w;
    Ok(ClosedForm::new(value, Validity::LargeK))
}

/// High-SNR pre-log `phi_K` shared by the baseline and selection schemes.
pub fn high_snr_prelog(users: usize, m: f64, placement: Placement) -> Result<f64> {
    effective_weight(m, users, placement)
}

/// `g(z) = m/(1-m) e^{-z} ln(1 + P z)`: per-user selection rate when every
/// user above `z` is served at `ln(1 + P z)`.
pub fn g_function(z: f64, power: f64, m: f64) -> Result<f64> {
    check_fraction(m)?;
    if !(z >= 0.0) {
        return domain(format!("g needs z >= 0, got {z}"));
    }
    if !(power > 0.0) {
        return domain("power must be positive");
    }
    Ok(m / (1.0 - m) * (-z).exp() * (power * z).ln_1p())
}

/// Maximiser of `g`: `z* = 1/W(P) - 1/P`.
pub fn z_star(power: f64) -> Result<f64> {
    if !(power > 0.0) {
        return domain("power must be positive");
    }
    Ok(1.0 / lambert_w(power)? - 1.0 / power)
}

fn check_fraction(m: f64) -> Result<()> {
    if !(0.0..1.0).contains(&m) {
        return domain(format!("cache fraction must lie in [0, 1), got {m}"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn e1_reference_values() {
        // Abramowitz & Stegun table values
        assert!(rel(exp_integral_e1(1.0).unwrap(), 0.219_383_934_395_520_3) < 1e-14);
        assert!(rel(exp_integral_e1(0.1).unwrap(), 1.822_923_958_419_390_6) < 1e-14);
        assert!(rel(exp_integral_e1(2.0).unwrap(), 0.048_900_510_708_061_12) < 1e-13);
        assert!(rel(exp_integral_e1(10.0).unwrap(), 4.156_968_929_685_324e-6) < 1e-13);
        assert!(rel(exp_integral_e1(0.001).unwrap(), 6.331_539_364_136_149) < 1e-14);
        assert!((exp_integral_e1(0.01).unwrap() - 4.0379).abs() < 1e-4);
    }

    #[test]
    fn e1_series_and_fraction_meet_at_one() {
        let below = e1_series(1.0);
        let above = e1_scaled_fraction(1.0) * (-1.0f64).exp();
        assert!(rel(below, above) < 1e-13);
    }

    #[test]
    fn e1_bracketing_and_tail() {
        let mut x = 1e-3;
        while x < 600.0 {
            let v = exp_integral_e1(x).unwrap();
            let s = exp_scaled_e1(x).unwrap();
            assert!(s > 1.0 / (x + 1.0) && s < 1.0 / x, "x={x}");
            if x < 700.0 && v > 0.0 {
                assert!(v > (-x).exp() / (x + 1.0) && v < (-x).exp() / x, "x={x}");
            }
            x *= 1.3;
        }
        let t = exp_integral_e1(10.0).unwrap() * 10.0 * 10f64.exp();
        assert!(t > 0.9 && t < 1.0);
        assert!(exp_integral_e1(0.0).is_err());
        assert!(exp_integral_e1(-1.0).is_err());
    }

    #[test]
    fn lambert_w_values() {
        assert_eq!(lambert_w(0.0).unwrap(), 0.0);
        assert!((lambert_w(std::f64::consts::E).unwrap() - 1.0).abs() < 1e-15);
        // Newton on w e^w - 10 from an unrelated start
        let mut w: f64 = 1.0;
        for _ in 0..100 {
            w -= (w * w.exp() - 10.0) / ((w + 1.0) * w.exp());
        }
        assert!((lambert_w(10.0).unwrap() - w).abs() < 1e-14);
        assert!((w - 1.745_528).abs() < 1e-6);
        assert!(lambert_w(-0.1).is_err());
        assert!(lambert_w(f64::INFINITY).is_err());
    }

    #[test]
    fn lambert_w_inverse_identity() {
        let mut x = 1e-6;
        while x <= 1e6 {
            let w = lambert_w(x).unwrap();
            assert!((w * w.exp() - x).abs() <= 1e-10 * x.max(1.0), "x={x}");
            x *= 1.1;
        }
    }

    #[test]
    fn baseline_closed_forms() {
        let p = Power::linear(5.0).unwrap();
        let v = baseline_exact(5, p, 0.1, Placement::Centralized).unwrap();
        let phi = effective_weight(0.1, 5, Placement::Centralized).unwrap();
        assert!(rel(v.value, phi * 1f64.exp() * 0.219_383_934_395_520_3) < 1e-13);
        assert_eq!(v.validity, Validity::Exact);
        assert!(baseline_exact(5, p, 1.0, Placement::Centralized).is_err());

        let lim = baseline_large_k(Power::linear(10.0).unwrap(), 0.1).unwrap();
        assert!((lim.value - 10.0 / 9.0).abs() < 1e-14);
        assert_eq!(baseline_large_k(p, 0.0).unwrap().value, 0.0);

        let big = baseline_exact(500, Power::linear(10.0).unwrap(), 0.1, Placement::Centralized).unwrap();
        assert!(rel(big.value, lim.value) < 0.05);

        // prelog: K = 1, P = 1e6
        let hi = Power::linear(1e6).unwrap();
        let v = baseline_exact(1, hi, 0.1, Placement::Centralized).unwrap().value;
        let phi1 = effective_weight(0.1, 1, Placement::Centralized).unwrap();
        assert!((v / (phi1 * 1e6f64.ln()) - 1.0).abs() < 0.1);
    }

    #[test]
    fn prelog_values() {
        assert!((high_snr_prelog(10, 0.1, Placement::Centralized).unwrap() - 2.2222).abs() < 1e-4);
        let d = high_snr_prelog(10, 0.1, Placement::Decentralized).unwrap();
        assert!((d - 1.0 / (0.9 * (1.0 - 0.9f64.powi(10)))).abs() < 1e-12);
        assert!((d - 1.70593).abs() < 1e-5);
    }

    #[test]
    fn selection_limit() {
        let p = Power::linear(10.0).unwrap();
        let w = lambert_w(10.0).unwrap();
        let per_user = selection_large_k(1, p, 0.1).unwrap().value;
        assert!(rel(per_user, (0.1 / 0.9) * (0.1 - 1.0 / w).exp() * w) < 1e-15);
        assert_eq!(selection_large_k(100, p, 0.0).unwrap().value, 0.0);
        // K g(z*) is the same quantity
        for &(k, pp, m) in &[(1usize, 10.0, 0.1), (50, 2.0, 0.3), (700, 1000.0, 0.05)] {
            let direct = selection_large_k(k, Power::linear(pp).unwrap(), m).unwrap().value;
            let via_g = k as f64 * g_function(z_star(pp).unwrap(), pp, m).unwrap();
            assert!(rel(direct, via_g) < 1e-12);
        }
    }

    #[test]
    fn g_and_z_star() {
        assert_eq!(g_function(0.0, 10.0, 0.1).unwrap(), 0.0);
        assert!(g_function(800.0, 10.0, 0.1).unwrap() < 1e-300);
        let e = std::f64::consts::E;
        assert!((z_star(e).unwrap() - (1.0 - 1.0 / e)).abs() < 1e-15);
        assert!((z_star(e).unwrap() - 0.6321).abs() < 1e-4);

        let best = g_function(z_star(10.0).unwrap(), 10.0, 0.1).unwrap();
        let mut grid_max = 0.0f64;
        for i in 0..=200_000 {
            grid_max = grid_max.max(g_function(i as f64 * 1e-4, 10.0, 0.1).unwrap());
        }
        assert!(best >= grid_max);
        assert!(best - grid_max <= 1e-6);
    }

    #[test]
    fn z_star_is_critical() {
        for p in [0.5, 1.0, 10.0, 100.0, 1e4] {
            let z = z_star(p).unwrap();
            let h = 1e-6;
            let d = (g_function(z + h, p, 0.1).unwrap() - g_function(z - h, p, 0.1).unwrap()) / (2.0 * h);
            assert!(d.abs() < 1e-6, "P={p}: {d}");
        }
    }

    #[test]
    fn z_star_decreases_with_power() {
        let mut prev = f64::INFINITY;
        for i in -30..60 {
            let z = z_star(10f64.powf(i as f64 / 10.0)).unwrap();
            assert!(z < prev);
            prev = z;
        }
    }

    #[test]
    fn symmetric_guard() {
        assert!(check_symmetric(&[1.0, 1.0]).is_ok());
        assert!(check_symmetric(&[1.0, 2.0]).is_err());
    }
}
