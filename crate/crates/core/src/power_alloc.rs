//! Weighted sum rate maximisation over the degraded Gaussian broadcast
//! channel.
//!
//! Users are indexed in decreasing channel order (`h[0] >= h[1] >= ...`).
//! Allocating power fraction `alpha_k` to user `k` places it on the
//! interference interval `[S_{k-1}, S_k]` with `S_k = P sum_{j<=k} alpha_j`,
//! where its marginal weighted rate is `phi_k / (1/h_k + z)`. The optimal
//! split gives each `z` in `[0, P]` to the user with the largest marginal
//! rate, i.e. it follows the upper envelope of these hyperbolas.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::channel::{ChannelDraw, Power};
use crate::error::{domain, Error, Result};
use crate::subset::UserSet;

/// Relative tolerance for capacity-region membership.
pub const FEASIBILITY_RTOL: f64 = 1e-12;

/// Interval of interference levels owned by one user on the utility envelope.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub user: usize,
}

impl Segment {
    pub fn len(&self) -> f64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerAllocation {
    /// Power fractions in decreasing channel order.
    pub alpha: Vec<f64>,
    /// Lagrange level of the power constraint.
    pub lambda: f64,
    pub segments: Vec<Segment>,
}

/// Rates of the per-subset messages, keyed by subsets of channel ranks.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RateTuple(BTreeMap<UserSet, f64>);

impl RateTuple {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, subset: UserSet, rate: f64) -> &mut Self {
        self.0.insert(subset, rate);
        self
    }

    pub fn get(&self, subset: UserSet) -> f64 {
        self.0.get(&subset).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (UserSet, f64)> + '_ {
        self.0.iter().map(|(&s, &r)| (s, r))
    }
}

impl FromIterator<(UserSet, f64)> for RateTuple {
    fn from_iter<I: IntoIterator<Item = (UserSet, f64)>>(iter: I) -> Self {
        RateTuple(iter.into_iter().collect())
    }
}

fn check_profile(phi: &[f64], h_sorted: &[f64]) -> Result<()> {
    if phi.len() != h_sorted.len() {
        return domain(format!(
            "{} weights for {} channel gains",
            phi.len(),
            h_sorted.len()
        ));
    }
    if phi.is_empty() {
        return domain("need at least one user");
    }
    if let Some(w) = phi.iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
        return domain(format!("weight {w} is not finite and non-negative"));
    }
    if let Some(g) = h_sorted.iter().find(|g| !(**g >= 0.0 && g.is_finite())) {
        return domain(format!("gain {g} is not finite and non-negative"));
    }
    if h_sorted.windows(2).any(|w| w[0] < w[1]) {
        return domain("channel gains must be sorted strongest first");
    }
    Ok(())
}

/// `u_k(z) = phi_k / (1/h_k + z) - lambda`.
pub fn utility(k: usize, z: f64, lambda: f64, phi: &[f64], h_sorted: &[f64]) -> Result<f64> {
    let (Some(&w), Some(&h)) = (phi.get(k), h_sorted.get(k)) else {
        return domain(format!("user {k} out of range"));
    };
    if h <= 0.0 {
        return domain(format!("utility of user {k} undefined for zero gain"));
    }
    if z < 0.0 {
        return domain("interference level must be non-negative");
    }
    Ok(w / (1.0 / h + z) - lambda)
}

/// Interference level at which the utilities of two users coincide,
/// `(phi_k/h_j - phi_j/h_k) / (phi_j - phi_k)`. `None` for equal weights.
/// The result may be negative (no crossing on `z >= 0`).
pub fn crossing(phi_j: f64, h_j: f64, phi_k: f64, h_k: f64) -> Option<f64> {
    if phi_j == phi_k {
        return None;
    }
    Some((phi_k / h_j - phi_j / h_k) / (phi_j - phi_k))
}

/// Users that can own part of the envelope: positive weight and gain, and not
/// dominated by a user with at least the same gain and weight.
///
/// Survivors come back in channel order with strictly increasing weights.
fn undominated(phi: &[f64], h_sorted: &[f64]) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    for k in 0..phi.len() {
        if phi[k] <= 0.0 || h_sorted[k] <= 0.0 {
            continue;
        }
        // users before k are at least as strong; pop those with the same
        // gain but a lower weight, they are dominated by k
        while let Some(&j) = out.last() {
            if h_sorted[j] == h_sorted[k] && phi[j] < phi[k] {
                out.pop();
            } else {
                break;
            }
        }
        if out.iter().all(|&j| phi[j] < phi[k]) {
            out.push(k);
        }
    }
    out
}

/// Walks the upper envelope on `[0, limit]`, stopping early where it drops
/// below `lambda`.
fn walk_envelope(phi: &[f64], h_sorted: &[f64], limit: f64, lambda: Option<f64>) -> Vec<Segment> {
    let cand = undominated(phi, h_sorted);
    if cand.is_empty() || limit <= 0.0 {
        return Vec::new();
    }
    let a = |k: usize| 1.0 / h_sorted[k];
    let zero_of = |k: usize| match lambda {
        Some(l) if l > 0.0 => phi[k] / l - a(k),
        _ => f64::INFINITY,
    };

    // at z = 0 the largest phi*h wins; ties go to the larger weight, which
    // decays more slowly
    let mut pos = 0;
    for (i, &k) in cand.iter().enumerate() {
        let best = cand[pos];
        if phi[k] * h_sorted[k] >= phi[best] * h_sorted[best] {
            pos = i;
        }
    }

    let mut segments = Vec::new();
    let mut z = 0.0;
    loop {
        let cur = cand[pos];
        let mut next: Option<(usize, f64)> = None;
        for (i, &k) in cand.iter().enumerate().skip(pos + 1) {
            let zc = crossing(phi[cur], h_sorted[cur], phi[k], h_sorted[k])
                .expect("candidate weights strictly increase")
                .max(z);
            if next.is_none_or(|(_, best)| zc <= best) {
                next = Some((i, zc));
            }
        }
        let stop = zero_of(cur).min(limit);
        match next {
            Some((i, zc)) if zc < stop => {
                if zc > z {
                    segments.push(Segment {
                        start: z,
                        end: zc,
                        user: cur,
                    });
                }
                z = zc;
                pos = i;
            }
            _ => {
                if stop > z {
                    segments.push(Segment {
                        start: z,
                        end: stop,
                        user: cur,
                    });
                }
                break;
            }
        }
    }
    segments
}

/// Upper envelope of the rate utilities restricted to where it is
/// non-negative and to `[0, P]`, as a list of owner intervals.
pub fn envelope(phi: &[f64], h_sorted: &[f64], power: Power, lambda: f64) -> Result<Vec<Segment>> {
    check_profile(phi, h_sorted)?;
    Ok(walk_envelope(phi, h_sorted, power.value(), Some(lambda)))
}

/// Lagrange level `lambda = max_k phi_k / (P + 1/h_k)`: the envelope reaches
/// zero exactly at `z = P`.
pub fn solve_lambda(phi: &[f64], h_sorted: &[f64], power: Power) -> Result<f64> {
    check_profile(phi, h_sorted)?;
    let p = power.value();
    phi.iter()
        .zip(h_sorted)
        .filter(|(&w, &h)| w > 0.0 && h > 0.0)
        .map(|(&w, &h)| w * h / (1.0 + h * p))
        .reduce(f64::max)
        .ok_or_else(|| Error::Domain("no user with positive weight and gain".into()))
}

/// Optimal power split: `alpha_k` is the share of `[0, P]` that user `k`
/// owns on the envelope.
pub fn optimal_alloc(phi: &[f64], h_sorted: &[f64], power: Power) -> Result<PowerAllocation> {
    let lambda = solve_lambda(phi, h_sorted, power)?;
    let p = power.value();
    let segments = walk_envelope(phi, h_sorted, p, None);
    let mut alpha = vec![0.0; phi.len()];
    let mut assigned = 0.0;
    let last = segments.len() - 1;
    for (i, s) in segments.iter().enumerate() {
        let share = if i == last { 1.0 - assigned } else { s.len() / p };
        alpha[s.user] += share;
        assigned += share;
    }
    Ok(PowerAllocation {
        alpha,
        lambda,
        segments,
    })
}

fn check_alpha(alpha: &[f64], users: usize) -> Result<()> {
    if alpha.len() != users {
        return domain(format!("{} power fractions for {users} users", alpha.len()));
    }
    if alpha.iter().any(|a| !(*a >= 0.0 && a.is_finite())) {
        return domain("power fractions must be non-negative");
    }
    if alpha.iter().sum::<f64>() > 1.0 + 1e-12 {
        return domain("power fractions sum above one");
    }
    Ok(())
}

/// Per-user rate bound `C_k = ln((1 + h_k S_k) / (1 + h_k S_{k-1}))` of the
/// superposition layers.
pub fn layer_capacities(alpha: &[f64], h_sorted: &[f64], power: Power) -> Vec<f64> {
    let p = power.value();
    let mut before = 0.0;
    alpha
        .iter()
        .zip(h_sorted)
        .map(|(&a, &h)| {
            let c = (h * a * p / (1.0 + h * before * p)).ln_1p();
            before += a;
            c
        })
        .collect()
}

/// `f(alpha) = sum_k phi_k C_k(alpha)`.
pub fn weighted_sum_rate(alpha: &[f64], phi: &[f64], h_sorted: &[f64], power: Power) -> Result<f64> {
    check_profile(phi, h_sorted)?;
    check_alpha(alpha, phi.len())?;
    Ok(layer_capacities(alpha, h_sorted, power)
        .iter()
        .zip(phi)
        .map(|(c, w)| c * w)
        .sum())
}

/// Capacity-region membership: for every rank `k`, the messages whose
/// weakest recipient is `k` must fit within `C_k`.
pub fn feasible(tuple: &RateTuple, alpha: &[f64], draw: &ChannelDraw, power: Power) -> Result<bool> {
    let users = draw.users();
    check_alpha(alpha, users)?;
    let mut load = vec![0.0; users];
    for (subset, rate) in tuple.iter() {
        let Some(weakest) = subset.max_member() else {
            return Err(Error::MalformedTuple("empty subset".into()));
        };
        if weakest >= users {
            return Err(Error::MalformedTuple(format!(
                "subset {subset} exceeds {users} users"
            )));
        }
        if !(rate >= 0.0 && rate.is_finite()) {
            return Err(Error::MalformedTuple(format!("rate {rate} for {subset}")));
        }
        load[weakest] += rate;
    }
    let caps = layer_capacities(alpha, &draw.sorted_gains(), power);
    Ok(load
        .iter()
        .zip(&caps)
        .all(|(&l, &c)| l <= c * (1.0 + FEASIBILITY_RTOL)))
}
