//! Per-realization sum content delivery rate of the delivery schemes.
//!
//! Weight vectors `phi` are indexed by channel rank (strongest user first);
//! for coded caching they come from [`crate::caching::weight_profile`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::asymptotics::z_star;
use crate::caching::Placement;
use crate::channel::{multicast_rate, ChannelDraw, Power};
use crate::error::{domain, Error, Result};
use crate::power_alloc::{optimal_alloc, weighted_sum_rate};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Baseline,
    Selection,
    Superposition,
    Threshold,
    Uncoded,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::Baseline,
        Scheme::Selection,
        Scheme::Superposition,
        Scheme::Threshold,
        Scheme::Uncoded,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Baseline => "baseline",
            Scheme::Selection => "selection",
            Scheme::Superposition => "superposition",
            Scheme::Threshold => "threshold",
            Scheme::Uncoded => "uncoded",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|x| x.as_str() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::Domain(format!("unknown scheme '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SchemeDetail {
    None,
    /// Number of strongest users served (1-based count).
    Selected { k: usize },
    Superposed { alpha: Vec<f64>, lambda: f64 },
    /// Users at or above the feedback threshold.
    Thresholded { served: usize, threshold: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SchemeOutcome {
    pub scheme: Scheme,
    pub rate: f64,
    pub detail: SchemeDetail,
}

fn check_weights(draw: &ChannelDraw, phi: &[f64]) -> Result<()> {
    if phi.len() != draw.users() {
        return domain(format!("{} weights for {} users", phi.len(), draw.users()));
    }
    Ok(())
}

/// Coded caching to all `K` users at the multicast rate:
/// `phi_K ln(1 + P min_k h_k)`.
pub fn baseline(draw: &ChannelDraw, power: Power, phi: &[f64]) -> Result<SchemeOutcome> {
    check_weights(draw, phi)?;
    let everyone: Vec<usize> = (0..draw.users()).collect();
    let rate = phi[phi.len() - 1] * multicast_rate(draw, power, &everyone)?;
    Ok(SchemeOutcome {
        scheme: Scheme::Baseline,
        rate,
        detail: SchemeDetail::None,
    })
}

/// Serves the `k*` strongest users at full power, with
/// `k* = argmax_k phi_k ln(1 + h_(k) P)`; equal rates go to the larger `k`.
pub fn selection(draw: &ChannelDraw, power: Power, phi: &[f64]) -> Result<SchemeOutcome> {
    check_weights(draw, phi)?;
    let p = power.value();
    let mut best = (0usize, f64::NEG_INFINITY);
    for (k, &u) in draw.order().iter().enumerate() {
        let r = phi[k] * (draw.gains()[u] * p).ln_1p();
        if r >= best.1 {
            best = (k, r);
        }
    }
    Ok(SchemeOutcome {
        scheme: Scheme::Selection,
        rate: best.1,
        detail: SchemeDetail::Selected { k: best.0 + 1 },
    })
}

/// Superposition coding with the optimal power split across the `K`
/// weighted layers.
pub fn superposition(draw: &ChannelDraw, power: Power, phi: &[f64]) -> Result<SchemeOutcome> {
    check_weights(draw, phi)?;
    let h = draw.sorted_gains();
    if h[0] == 0.0 {
        return Ok(SchemeOutcome {
            scheme: Scheme::Superposition,
            rate: 0.0,
            detail: SchemeDetail::None,
        });
    }
    let alloc = optimal_alloc(phi, &h, power)?;
    let rate = weighted_sum_rate(&alloc.alpha, phi, &h, power)?;
    Ok(SchemeOutcome {
        scheme: Scheme::Superposition,
        rate,
        detail: SchemeDetail::Superposed {
            alpha: alloc.alpha,
            lambda: alloc.lambda,
        },
    })
}

/// One-bit feedback: the `U` users with `h_k >= z*` are served together at
/// `ln(1 + P z*)`; the slot is lost when nobody is above the threshold.
pub fn threshold(draw: &ChannelDraw, power: Power, phi: &[f64]) -> Result<SchemeOutcome> {
    check_weights(draw, phi)?;
    let z = z_star(power.value())?;
    let served = draw.gains().iter().filter(|&&h| h >= z).count();
    let rate = if served == 0 {
        0.0
    } else {
        phi[served - 1] * (power.value() * z).ln_1p()
    };
    Ok(SchemeOutcome {
        scheme: Scheme::Threshold,
        rate,
        detail: SchemeDetail::Thresholded {
            served,
            threshold: z,
        },
    })
}

/// Each user gets its missing `(1 - m) F` bits by unicast at its own rate:
/// `K / sum_k ((1 - m) / ln(1 + P h_k))`. Zero if any gain is zero.
pub fn uncoded(draw: &ChannelDraw, power: Power, m: f64) -> Result<SchemeOutcome> {
    if !(0.0..1.0).contains(&m) {
        return domain(format!("uncoded delivery needs 0 <= m < 1, got {m}"));
    }
    let p = power.value();
    let rate = if draw.gains().iter().any(|&h| h <= 0.0) {
        0.0
    } else {
        let time: f64 = draw.gains().iter().map(|&h| (1.0 - m) / (h * p).ln_1p()).sum();
        draw.users() as f64 / time
    };
    Ok(SchemeOutcome {
        scheme: Scheme::Uncoded,
        rate,
        detail: SchemeDetail::None,
    })
}

/// Caching weight profile bundled with the cache fraction, so any scheme can
/// be evaluated from a draw alone.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightProfile {
    m: f64,
    placement: Placement,
    phi: Vec<f64>,
}

impl WeightProfile {
    pub fn caching(m: f64, users: usize, placement: Placement) -> Result<Self> {
        Ok(Self {
            m,
            placement,
            phi: crate::caching::weight_profile(m, users, placement)?,
        })
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn placement(&self) -> Placement {
        self.placement
    }

    pub fn users(&self) -> usize {
        self.phi.len()
    }

    pub fn evaluate(&self, scheme: Scheme, draw: &ChannelDraw, power: Power) -> Result<SchemeOutcome> {
        match scheme {
            Scheme::Baseline => baseline(draw, power, &self.phi),
            Scheme::Selection => selection(draw, power, &self.phi),
            Scheme::Superposition => superposition(draw, power, &self.phi),
            Scheme::Threshold => threshold(draw, power, &self.phi),
            Scheme::Uncoded => uncoded(draw, power, self.m),
        }
    }
}
