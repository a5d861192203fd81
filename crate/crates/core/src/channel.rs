//! Quasi-static Rayleigh fading: exponential power gains, seeded per-trial
//! substreams and the multicast (common message) rate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Transmit power budget on the linear scale.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Power(f64);

impl Power {
    pub fn linear(p: f64) -> Result<Self> {
        if !(p > 0.0 && p.is_finite()) {
            return domain(format!("power must be positive and finite, got {p}"));
        }
        Ok(Power(p))
    }

    /// `P = 10^(dB / 10)`.
    pub fn from_db(db: f64) -> Result<Self> {
        Self::linear(10f64.powf(db / 10.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn db(self) -> f64 {
        10.0 * self.0.log10()
    }
}

/// One fading realization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelDraw {
    h: Vec<f64>,
    gamma: Vec<f64>,
    order: Vec<usize>,
}

impl ChannelDraw {
    /// Builds a draw from known gains; `gamma` defaults to all ones.
    pub fn from_gains(h: Vec<f64>, gamma: Option<Vec<f64>>) -> Result<Self> {
        if h.is_empty() {
            return domain("channel draw needs at least one user");
        }
        if let Some(bad) = h.iter().find(|x| !(**x >= 0.0 && x.is_finite())) {
            return domain(format!("fading gain {bad} is not a finite non-negative value"));
        }
        let gamma = gamma.unwrap_or_else(|| vec![1.0; h.len()]);
        check_gamma(&gamma)?;
        if gamma.len() != h.len() {
            return domain("gamma and h have different lengths");
        }
        let order = strongest_first(&h);
        Ok(Self { h, gamma, order })
    }

    pub fn users(&self) -> usize {
        self.h.len()
    }

    /// Gains in original user order.
    pub fn gains(&self) -> &[f64] {
        &self.h
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    /// `order[r]` is the user with the r-th largest gain (ties by index).
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Gains sorted strongest first.
    pub fn sorted_gains(&self) -> Vec<f64> {
        self.order.iter().map(|&u| self.h[u]).collect()
    }

    pub fn min_gain(&self) -> f64 {
        self.h[*self.order.last().expect("non-empty")]
    }
}

fn check_gamma(gamma: &[f64]) -> Result<()> {
    if gamma.is_empty() {
        return domain("need at least one user");
    }
    if let Some(g) = gamma.iter().find(|g| !(**g > 0.0 && g.is_finite())) {
        return domain(format!("mean gain {g} must be positive"));
    }
    Ok(())
}

fn strongest_first(h: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..h.len()).collect();
    // stable: equal gains keep index order
    order.sort_by(|&a, &b| h[b].total_cmp(&h[a]));
    order
}

/// Independent generator for trial `trial` under master seed `seed`.
///
/// Each trial gets its own ChaCha stream, so results do not depend on the
/// order in which trials are evaluated.
pub fn substream(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Draws `h_k ~ Exp(mean gamma_k)` by inverting the CDF of a uniform.
pub fn sample<R: Rng + ?Sized>(gamma: &[f64], rng: &mut R) -> Result<ChannelDraw> {
    check_gamma(gamma)?;
    let h = gamma
        .iter()
        .map(|&g| {
            let u: f64 = rng.random();
            -g * (-u).ln_1p()
        })
        .collect::<Vec<_>>();
    let order = strongest_first(&h);
    Ok(ChannelDraw {
        h,
        gamma: gamma.to_vec(),
        order,
    })
}

/// `ln(1 + P min_{j in users} h_j)`: the rate every member of `users` can decode.
pub fn multicast_rate(draw: &ChannelDraw, power: Power, users: &[usize]) -> Result<f64> {
    if users.is_empty() {
        return domain("multicast rate of an empty subset");
    }
    let mut weakest = f64::INFINITY;
    for &u in users {
        let Some(&g) = draw.h.get(u) else {
            return domain(format!("user {u} out of range"));
        };
        weakest = weakest.min(g);
    }
    Ok((power.value() * weakest).ln_1p())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn power_conversions() {
        assert_eq!(Power::from_db(10.0).unwrap().value(), 10.0);
        assert!((Power::from_db(0.0).unwrap().value() - 1.0).abs() < 1e-15);
        assert!((Power::linear(100.0).unwrap().db() - 20.0).abs() < 1e-12);
        assert!(Power::linear(0.0).is_err());
        assert!(Power::linear(-1.0).is_err());
        assert!(Power::linear(f64::NAN).is_err());
    }

    #[test]
    fn sample_is_reproducible() {
        let gamma = vec![1.0, 2.0, 0.5];
        let a = sample(&gamma, &mut substream(42, 7)).unwrap();
        let b = sample(&gamma, &mut substream(42, 7)).unwrap();
        let c = sample(&gamma, &mut substream(42, 8)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn sample_rejects_bad_gamma() {
        let mut rng = substream(0, 0);
        assert!(sample(&[1.0, 0.0], &mut rng).is_err());
        assert!(sample(&[-1.0], &mut rng).is_err());
        assert!(sample(&[], &mut rng).is_err());
    }

    #[test]
    fn exponential_statistics() {
        let n = 1_000_000usize;
        let mut rng = substream(1, 0);
        let mut sum = [0.0f64; 2];
        let mut tail = [0usize; 3];
        for _ in 0..n {
            let d = sample(&[2.0, 1.0], &mut rng).unwrap();
            sum[0] += d.gains()[0];
            sum[1] += d.gains()[1];
            for (t, z) in tail.iter_mut().zip([0.5, 1.0, 2.0]) {
                if d.gains()[1] >= z {
                    *t += 1;
                }
            }
        }
        let mean1 = sum[1] / n as f64;
        assert!((mean1 - 1.0).abs() < 0.01, "{mean1}");
        let ratio = sum[0] / sum[1];
        assert!((ratio - 2.0).abs() < 0.04, "{ratio}");
        for (t, z) in tail.iter().zip([0.5f64, 1.0, 2.0]) {
            let p = *t as f64 / n as f64;
            let e = (-z).exp();
            assert!((p - e).abs() < 0.01 * e, "z={z}: {p} vs {e}");
        }
    }

    #[test]
    fn minimum_of_k_exponentials() {
        // min of K unit exponentials is Exp(rate K)
        let (k, n) = (8usize, 100_000u64);
        let gamma = vec![1.0; k];
        let mins: Vec<f64> = (0..n)
            .map(|t| sample(&gamma, &mut substream(3, t)).unwrap().min_gain())
            .collect();
        let mean = mins.iter().sum::<f64>() / n as f64;
        let var = mins.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        assert!((mean - 1.0 / k as f64).abs() <= 3.0 * se);
    }

    #[test]
    fn multicast_examples() {
        let d = ChannelDraw::from_gains(vec![3.0, 1.0, 2.0], None).unwrap();
        let p1 = Power::linear(1.0).unwrap();
        assert!((multicast_rate(&d, p1, &[0, 2]).unwrap() - 3f64.ln()).abs() < 1e-15);
        let tiny = Power::linear(1e-300).unwrap();
        assert!(multicast_rate(&d, tiny, &[0, 1, 2]).unwrap() < 1e-299);
        let single = ChannelDraw::from_gains(vec![0.5], None).unwrap();
        let r = multicast_rate(&single, Power::linear(10.0).unwrap(), &[0]).unwrap();
        assert!((r - 6f64.ln()).abs() < 1e-15);
        assert!(multicast_rate(&d, p1, &[]).is_err());
        assert!(multicast_rate(&d, p1, &[3]).is_err());
    }

    #[test]
    fn order_is_stable_on_ties() {
        let d = ChannelDraw::from_gains(vec![1.0, 2.0, 1.0, 2.0], None).unwrap();
        assert_eq!(d.order(), &[1, 3, 0, 2]);
        assert_eq!(d.sorted_gains(), vec![2.0, 2.0, 1.0, 1.0]);
    }

    proptest! {
        #[test]
        fn multicast_shrinks_with_larger_subsets(
            h in proptest::collection::vec(0.0f64..10.0, 1..10),
            mask in 1u32..1024,
            extra in 0u32..1024,
            p in 0.01f64..1e4,
        ) {
            let k = h.len();
            let d = ChannelDraw::from_gains(h, None).unwrap();
            let a: Vec<usize> = (0..k).filter(|i| mask >> i & 1 == 1).collect();
            prop_assume!(!a.is_empty());
            let b: Vec<usize> = (0..k).filter(|i| (mask | extra) >> i & 1 == 1).collect();
            let power = Power::linear(p).unwrap();
            prop_assert!(multicast_rate(&d, power, &b).unwrap() <= multicast_rate(&d, power, &a).unwrap());
        }

        #[test]
        fn multicast_increases_with_power(
            h in proptest::collection::vec(0.001f64..10.0, 1..8),
            p in 0.01f64..1e4,
            scale in 1.01f64..10.0,
        ) {
            let k = h.len();
            let d = ChannelDraw::from_gains(h, None).unwrap();
            let all: Vec<usize> = (0..k).collect();
            let lo = multicast_rate(&d, Power::linear(p).unwrap(), &all).unwrap();
            let hi = multicast_rate(&d, Power::linear(p * scale).unwrap(), &all).unwrap();
            prop_assert!(hi > lo);
        }

        #[test]
        fn order_sorts_descending(h in proptest::collection::vec(0.0f64..5.0, 1..20)) {
            let d = ChannelDraw::from_gains(h, None).unwrap();
            let s = d.sorted_gains();
            prop_assert!(s.windows(2).all(|w| w[0] >= w[1]));
            let mut seen = d.order().to_vec();
            seen.sort_unstable();
            prop_assert_eq!(seen, (0..d.users()).collect::<Vec<_>>());
        }
    }
}
