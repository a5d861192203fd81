//! Monte Carlo estimation of long-term average delivery rates, parameter
//! sweeps and the acceptance runner.
//!
//! Trial `t` under master seed `s` always sees the channel drawn from
//! [`substream(s, t)`](crate::channel::substream). Trials are reduced in
//! fixed-size chunks whose partial sums are merged in chunk order, so the
//! result is bit-identical for any number of worker threads.

pub mod accept;
pub mod oracles;
mod sweep;

use rayon::prelude::*;
use serde::Serialize;

use crate::caching::Placement;
use crate::channel::{sample, substream, Power};
use crate::error::{domain, Result};
use crate::schemes::{Scheme, WeightProfile};

pub use sweep::{sweep, write_csv, write_csv_file, Axis, SweepSpec, CSV_HEADER};

pub const DEFAULT_TRIALS: u64 = 100_000;

const CHUNK: u64 = 2048;

/// System configuration for one estimate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Scenario {
    pub users: usize,
    pub snr_db: f64,
    pub m: f64,
    pub placement: Placement,
    /// Per-user mean gains; `None` means unit means.
    pub gamma: Option<Vec<f64>>,
}

impl Scenario {
    pub fn new(users: usize, snr_db: f64, m: f64, placement: Placement) -> Self {
        Self {
            users,
            snr_db,
            m,
            placement,
            gamma: None,
        }
    }

    pub fn with_gamma(mut self, gamma: Vec<f64>) -> Self {
        self.gamma = Some(gamma);
        self
    }

    pub fn power(&self) -> Result<Power> {
        Power::from_db(self.snr_db)
    }

    pub fn gamma_vec(&self) -> Result<Vec<f64>> {
        match &self.gamma {
            Some(g) if g.len() != self.users => domain(format!(
                "gamma has {} entries for {} users",
                g.len(),
                self.users
            )),
            Some(g) => Ok(g.clone()),
            None => Ok(vec![1.0; self.users]),
        }
    }
}

/// Sample mean of a scheme's per-draw rate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateEstimate {
    pub scheme: Scheme,
    pub scenario: Scenario,
    pub trials: u64,
    pub seed: u64,
    pub mean: f64,
    /// Sample standard deviation over `sqrt(trials)`; zero for one trial.
    pub stderr: f64,
}

/// Running sums of one statistic. Merging is associative.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Accumulator {
    pub count: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Accumulator {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(&mut self, other: &Accumulator) {
        self.count += other.count;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }

    pub fn stderr(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        let var = ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }
}

/// Runs `trials` independent trials of `f`, each writing `width` values, and
/// returns one accumulator per value slot.
pub fn run_trials<F>(trials: u64, seed: u64, width: usize, f: F) -> Result<Vec<Accumulator>>
where
    F: Fn(&mut rand_chacha::ChaCha8Rng, &mut [f64]) -> Result<()> + Sync,
{
    if trials < 1 {
        return domain("need at least one trial");
    }
    let chunks = trials.div_ceil(CHUNK);
    let partial: Vec<Vec<Accumulator>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![Accumulator::default(); width];
            let mut out = vec![0.0; width];
            for t in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                f(&mut substream(seed, t), &mut out)?;
                for (a, &x) in acc.iter_mut().zip(&out) {
                    a.push(x);
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut total = vec![Accumulator::default(); width];
    for acc in &partial {
        for (t, a) in total.iter_mut().zip(acc) {
            t.merge(a);
        }
    }
    Ok(total)
}

/// Estimates several schemes on the same channel draws.
pub fn estimate_many(
    schemes: &[Scheme],
    scenario: &Scenario,
    trials: u64,
    seed: u64,
) -> Result<Vec<RateEstimate>> {
    if schemes.is_empty() {
        return domain("no schemes requested");
    }
    let power = scenario.power()?;
    let gamma = scenario.gamma_vec()?;
    let profile = WeightProfile::caching(scenario.m, scenario.users, scenario.placement)?;
    let acc = run_trials(trials, seed, schemes.len(), |rng, out| {
        let draw = sample(&gamma, rng)?;
        for (slot, &s) in out.iter_mut().zip(schemes) {
            *slot = profile.evaluate(s, &draw, power)?.rate;
        }
        Ok(())
    })?;
    Ok(schemes
        .iter()
        .zip(acc)
        .map(|(&scheme, a)| RateEstimate {
            scheme,
            scenario: scenario.clone(),
            trials,
            seed,
            mean: a.mean(),
            stderr: a.stderr(),
        })
        .collect())
}

/// Estimates the long-term average rate of one scheme.
pub fn estimate(scheme: Scheme, scenario: &Scenario, trials: u64, seed: u64) -> Result<RateEstimate> {
    Ok(estimate_many(&[scheme], scenario, trials, seed)?.remove(0))
}
