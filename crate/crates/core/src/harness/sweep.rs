use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{estimate_many, RateEstimate, Scenario};
use crate::caching::Placement;
use crate::error::{domain, Error, Result};
use crate::schemes::Scheme;

pub const CSV_HEADER: [&str; 9] = [
    "scheme",
    "placement",
    "K",
    "P_dB",
    "m",
    "trials",
    "seed",
    "mean_nats",
    "stderr_nats",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    /// Number of users.
    K,
    /// Transmit SNR in dB.
    Snr,
}

/// A one-dimensional sweep. Every point reuses the same master seed, so
/// neighbouring points share channel draws.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub axis: Axis,
    pub values: Vec<f64>,
    pub base: Scenario,
    pub placements: Vec<Placement>,
    pub schemes: Vec<Scheme>,
    pub trials: u64,
    pub seed: u64,
}

impl SweepSpec {
    fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return domain("sweep has no axis values");
        }
        if self.values.windows(2).any(|w| !(w[0] < w[1])) {
            return domain("sweep values must be strictly increasing");
        }
        if self.schemes.is_empty() {
            return domain("sweep has no schemes");
        }
        if self.placements.is_empty() {
            return domain("sweep has no placements");
        }
        if self.axis == Axis::K {
            if let Some(v) = self.values.iter().find(|v| !(v.fract() == 0.0 && **v >= 1.0)) {
                return domain(format!("user count {v} is not a positive integer"));
            }
            if self.base.gamma.as_ref().is_some_and(|g| g.iter().any(|&x| x != 1.0)) {
                return domain("a K sweep needs symmetric unit-mean channels");
            }
        }
        Ok(())
    }

    fn scenario(&self, value: f64, placement: Placement) -> Scenario {
        let mut sc = self.base.clone();
        sc.placement = placement;
        match self.axis {
            Axis::K => {
                sc.users = value as usize;
                sc.gamma = None;
            }
            Axis::Snr => sc.snr_db = value,
        }
        sc
    }
}

/// Rows ordered by axis value, then placement, then scheme.
pub fn sweep(spec: &SweepSpec) -> Result<Vec<RateEstimate>> {
    spec.validate()?;
    let mut rows = Vec::with_capacity(spec.values.len() * spec.placements.len() * spec.schemes.len());
    for &v in &spec.values {
        for &pl in &spec.placements {
            rows.extend(estimate_many(&spec.schemes, &spec.scenario(v, pl), spec.trials, spec.seed)?);
        }
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(rows: &[RateEstimate], out: W) -> Result<()> {
    let io = |e: csv::Error| Error::Io(e.to_string());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in rows {
        let sc = &r.scenario;
        w.write_record([
            r.scheme.to_string(),
            sc.placement.to_string(),
            sc.users.to_string(),
            sc.snr_db.to_string(),
            sc.m.to_string(),
            r.trials.to_string(),
            r.seed.to_string(),
            r.mean.to_string(),
            r.stderr.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}

pub fn write_csv_file(rows: &[RateEstimate], path: &Path) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    write_csv(rows, f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> SweepSpec {
        SweepSpec {
            axis: Axis::K,
            values: vec![2.0, 4.0, 8.0],
            base: Scenario::new(1, 10.0, 0.1, Placement::Centralized),
            placements: Placement::ALL.to_vec(),
            schemes: vec![Scheme::Baseline, Scheme::Selection],
            trials: 500,
            seed: 5,
        }
    }

    fn csv_of(spec: &SweepSpec) -> Vec<u8> {
        let mut buf = Vec::new();
        write_csv(&sweep(spec).unwrap(), &mut buf).unwrap();
        buf
    }

    #[test]
    fn row_order_and_header() {
        let rows = sweep(&spec()).unwrap();
        assert_eq!(rows.len(), 12);
        assert_eq!(rows[0].scenario.users, 2);
        assert_eq!(rows[0].scenario.placement, Placement::Centralized);
        assert_eq!(rows[1].scheme, Scheme::Selection);
        assert_eq!(rows[2].scenario.placement, Placement::Decentralized);
        assert_eq!(rows[11].scenario.users, 8);
        let text = String::from_utf8(csv_of(&spec())).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "scheme,placement,K,P_dB,m,trials,seed,mean_nats,stderr_nats"
        );
        assert_eq!(text.lines().count(), 13);
    }

    #[test]
    fn output_is_byte_identical() {
        assert_eq!(csv_of(&spec()), csv_of(&spec()));
    }

    #[test]
    fn snr_axis() {
        let mut s = spec();
        s.axis = Axis::Snr;
        s.values = vec![0.0, 20.0];
        s.base.users = 3;
        let rows = sweep(&s).unwrap();
        assert!(rows.iter().all(|r| r.scenario.users == 3));
        assert!(rows[4].mean > rows[0].mean);
    }

    #[test]
    fn rejects_bad_specs() {
        let mut s = spec();
        s.schemes.clear();
        assert!(sweep(&s).is_err());
        let mut s = spec();
        s.values = vec![4.0, 2.0];
        assert!(sweep(&s).is_err());
        let mut s = spec();
        s.values = vec![2.5];
        assert!(sweep(&s).is_err());
        let mut s = spec();
        s.values.clear();
        assert!(sweep(&s).is_err());
    }
}
