//! Acceptance criteria, grouped into suites.
//!
//! Monte Carlo checks are reported as inconclusive rather than failed when
//! the caller reduced the trial count below what the criterion asks for.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::oracles::{e1_quadrature, grid_allocation};
use super::{estimate, estimate_many, sweep, Axis, RateEstimate, Scenario, SweepSpec};
use crate::asymptotics::{
    baseline_exact, baseline_large_k, exp_integral_e1, lambert_w, selection_large_k,
};
use crate::caching::{
    build_codewords, centralized_place, decentralized_place, decode, effective_weight, load,
    Demand, Library, Placement, SystemParams,
};
use crate::channel::{sample, substream, ChannelDraw, Power};
use crate::error::{Error, Result};
use crate::power_alloc::{optimal_alloc, weighted_sum_rate};
use crate::schemes::{selection, Scheme, SchemeDetail, WeightProfile};
use crate::subset::binomial;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Unit,
    Oracle,
    Asymptotic,
    Figures,
    All,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Unit, Suite::Oracle, Suite::Asymptotic, Suite::Figures, Suite::All];

    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Unit => "unit",
            Suite::Oracle => "oracle",
            Suite::Asymptotic => "asymptotic",
            Suite::Figures => "figures",
            Suite::All => "all",
        }
    }

    pub fn checks(self) -> Vec<Check> {
        use Check::*;
        match self {
            Suite::Unit => vec![DominanceChain, BitExactCaching, SelectionGolden],
            Suite::Oracle => vec![AllocationOracle, SpecialFunctions],
            Suite::Asymptotic => vec![BaselineClosedForm, BaselineLargeK, HighSnrPrelog, SelectionScaling, ThresholdLargeK],
            Suite::Figures => vec![FigureShape],
            Suite::All => Check::ALL.to_vec(),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.as_str() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::Domain(format!("unknown suite '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Check {
    BaselineClosedForm,
    BaselineLargeK,
    HighSnrPrelog,
    SelectionScaling,
    ThresholdLargeK,
    DominanceChain,
    AllocationOracle,
    BitExactCaching,
    SpecialFunctions,
    FigureShape,
    SelectionGolden,
}

impl Check {
    pub const ALL: [Check; 11] = [
        Check::BaselineClosedForm,
        Check::BaselineLargeK,
        Check::HighSnrPrelog,
        Check::SelectionScaling,
        Check::ThresholdLargeK,
        Check::DominanceChain,
        Check::AllocationOracle,
        Check::BitExactCaching,
        Check::SpecialFunctions,
        Check::FigureShape,
        Check::SelectionGolden,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Check::BaselineClosedForm => "AC1",
            Check::BaselineLargeK => "AC2",
            Check::HighSnrPrelog => "AC3",
            Check::SelectionScaling => "AC4",
            Check::ThresholdLargeK => "AC5",
            Check::DominanceChain => "AC6",
            Check::AllocationOracle => "AC7",
            Check::BitExactCaching => "AC8",
            Check::SpecialFunctions => "AC9",
            Check::FigureShape => "AC10",
            Check::SelectionGolden => "golden",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Check::BaselineClosedForm => "baseline closed form vs Monte Carlo",
            Check::BaselineLargeK => "large-K baseline limit",
            Check::HighSnrPrelog => "high-SNR pre-log",
            Check::SelectionScaling => "selection linear scaling",
            Check::ThresholdLargeK => "threshold matches selection at large K",
            Check::DominanceChain => "per-draw dominance chain",
            Check::AllocationOracle => "power allocation vs grid oracle",
            Check::BitExactCaching => "bit-exact coded caching",
            Check::SpecialFunctions => "Lambert W and E1",
            Check::FigureShape => "figure shapes",
            Check::SelectionGolden => "selection golden outcomes",
        }
    }

    pub fn run(self, opts: &AcceptOptions) -> Report {
        let start = Instant::now();
        let mut gate = Gate::default();
        let result = match self {
            Check::BaselineClosedForm => baseline_closed_form(opts, &mut gate),
            Check::BaselineLargeK => baseline_large_k_check(opts, &mut gate),
            Check::HighSnrPrelog => high_snr_prelog(opts, &mut gate),
            Check::SelectionScaling => selection_scaling(opts, &mut gate),
            Check::ThresholdLargeK => threshold_large_k(opts, &mut gate),
            Check::DominanceChain => dominance_chain(opts, &mut gate),
            Check::AllocationOracle => allocation_oracle(opts, &mut gate),
            Check::BitExactCaching => bit_exact_caching(&mut gate),
            Check::SpecialFunctions => special_functions(&mut gate),
            Check::FigureShape => figure_shape(opts, &mut gate),
            Check::SelectionGolden => selection_golden(&mut gate),
        };
        if let Err(e) = result {
            gate.fail(format!("execution error: {e}"));
        }
        Report {
            id: self.id(),
            title: self.title(),
            status: gate.status(),
            details: gate.lines,
            seconds: start.elapsed().as_secs_f64(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Inconclusive => "INCONCLUSIVE",
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub id: &'static str,
    pub title: &'static str,
    pub status: Status,
    pub details: Vec<String>,
    pub seconds: f64,
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} ({:.1} s)", self.status, self.id, self.title, self.seconds)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub suite: Suite,
    pub passed: usize,
    pub failed: usize,
    pub inconclusive: usize,
    pub reports: Vec<Report>,
}

impl Summary {
    pub fn ok(&self) -> bool {
        self.failed == 0
    }
}

#[derive(Clone, Debug, Default)]
pub struct AcceptOptions {
    /// Replaces every Monte Carlo trial count.
    pub trials: Option<u64>,
    pub seed: u64,
}

impl AcceptOptions {
    fn trials(&self, required: u64) -> (u64, bool) {
        match self.trials {
            Some(t) => (t.max(1), t < required),
            None => (required, false),
        }
    }
}

pub fn run_suite(suite: Suite, opts: &AcceptOptions) -> Summary {
    let reports: Vec<Report> = suite.checks().into_iter().map(|c| c.run(opts)).collect();
    let count = |s| reports.iter().filter(|r| r.status == s).count();
    Summary {
        suite,
        passed: count(Status::Pass),
        failed: count(Status::Fail),
        inconclusive: count(Status::Inconclusive),
        reports,
    }
}

#[derive(Default)]
struct Gate {
    lines: Vec<String>,
    failed: bool,
    weak: bool,
}

impl Gate {
    fn note(&mut self, line: String) {
        self.lines.push(line);
    }

    fn fail(&mut self, line: String) {
        self.failed = true;
        self.lines.push(format!("FAIL {line}"));
    }

    fn check(&mut self, ok: bool, line: String) {
        if ok {
            self.lines.push(format!("ok   {line}"));
        } else {
            self.fail(line);
        }
    }

    /// A statistical check run with fewer trials than required.
    fn reduced(&mut self, reduced: bool) {
        self.weak |= reduced;
    }

    fn status(&self) -> Status {
        match (self.failed, self.weak) {
            (false, _) => Status::Pass,
            (true, true) => Status::Inconclusive,
            (true, false) => Status::Fail,
        }
    }
}

fn within_sigma(est: &RateEstimate, exact: f64, sigmas: f64) -> bool {
    (est.mean - exact).abs() <= sigmas * est.stderr
}

fn baseline_closed_form(opts: &AcceptOptions, gate: &mut Gate) -> Result<()> {
    let (trials, reduced) = opts.trials(100_000);
    gate.reduced(reduced);
    for k in [1usize, 2, 5, 10, 50] {
        for p in [1.0, 10.0, 100.0] {
            for m in [0.05, 0.1, 0.3] {
                for pl in Placement::ALL {
                    let power = Power::linear(p)?;
                    let sc = Scenario::new(k, power.db(), m, pl);
                    let est = estimate(Scheme::Baseline, &sc, trials, opts.seed)?;
                    let exact = baseline_exact(k, power, m, pl)?.value;
                    gate.check(
                        within_sigma(&est, exact, 3.0),
                        format!(
                            "K={k} P={p} m={m} {pl}: mc {:.6} +- {:.2e}, exact {exact:.6}",
                            est.mean, est.stderr
                        ),
                    );
                }
            }
        }
    }
    Ok(())
}

fn baseline_large_k_check(opts: &AcceptOptions, gate: &mut Gate) -> Result<()> {
    let (trials, reduced) = opts.trials(100_000);
    gate.reduced(reduced);
    let power = Power::linear(10.0)?;
    let limit = baseline_large_k(power, 0.1)?.value;
    for pl in Placement::ALL {
        let exact = baseline_exact(500, power, 0.1, pl)?.value;
        let rel = (exact - limit).abs() / limit;
        gate.check(rel <= 0.05, format!("{pl}: exact {exact:.6} vs limit {limit:.6}, rel {rel:.4}"));
        let est = estimate(Scheme::Baseline, &Scenario::new(500, 10.0, 0.1, pl), trials, opts.seed)?;
        gate.check(
            within_sigma(&est, exact, 3.0),
            format!("{pl}: mc {:.6} +- {:.2e} vs exact {exact:.6}", est.mean, est.stderr),
        );
    }
    Ok(())
}

fn high_snr_prelog(opts: &AcceptOptions, gate: &mut Gate) -> Result<()> {
    let (trials, reduced) = opts.trials(100_000);
    gate.reduced(reduced);
    let (k, m) = (10usize, 0.1);
    let p = Power::linear(1e6)?;
    for pl in Placement::ALL {
        let norm = effective_weight(m, k, pl)? * p.value().ln();
        let exact = baseline_exact(k, p, m, pl)?.value / norm;
        gate.check(
            (0.85..=1.05).contains(&exact),
            format!("{pl}: baseline_exact / (phi_K ln P) = {exact:.4} at 60 dB"),
        );
        let sel = estimate(Scheme::Selection, &Scenario::new(k, 60.0, m, pl), trials, opts.seed)?;
        let r = sel.mean / norm;
        gate.check(
            (0.85..=1.05).contains(&r),
            format!("{pl}: selection / (phi_K ln P) = {r:.4} at 60 dB"),
        );
        let both = estimate_many(
            &[Scheme::Baseline, Scheme::Selection],
            &Scenario::new(k, 40.0, m, pl),
            trials,
            opts.seed,
        )?;
        let ratio = both[0].mean / both[1].mean;
        gate.check(
            (0.9..=1.1).contains(&ratio),
            format!("{pl}: baseline / selection = {ratio:.4} at 40 dB"),
        );
    }
    Ok(())
}

fn selection_scaling(opts: &AcceptOptions, gate: &mut Gate) -> Result<()> {
    let (trials, reduced) = opts.trials(10_000);
    gate.reduced(reduced);
    let m = 0.1;
    let p = Power::linear(10.0)?;
    let target = selection_large_k(1, p, m)?.value;
    for pl in Placement::ALL {
        let mut gaps = Vec::new();
        for k in [100usize, 200, 500] {
            let est = estimate(Scheme::Selection, &Scenario::new(k, 10.0, m, pl), trials, opts.seed)?;
            let per_user = est.mean / k as f64;
            let rel = (per_user - target).abs() / target;
            gaps.push(rel);
            let line = format!("{pl}: K={k} per-user {per_user:.5} vs {target:.5}, rel {rel:.4}");
            match pl {
                Placement::Decentralized => gate.check(rel <= 0.1, line),
                Placement::Centralized => gate.note(format!("info {line}")),
            }
        }
        let monotone = gaps.windows(2).all(|w| w[1] <= w[0]);
        let line = format!("{pl}: gaps shrink with K: {monotone}");
        match pl {
            Placement::Decentralized => gate.check(monotone, line),
            Placement::Centralized => gate.note(format!("info {line}")),
        }
    }
    Ok(())
}

fn threshold_large_k(opts: &AcceptOptions, gate: &mut Gate) -> Result<()> {
    let (trials, reduced) = opts.trials(10_000);
    gate.reduced(reduced);
    for pl in Placement::ALL {
        let est = estimate_many(
            &[Scheme::Threshold, Scheme::Selection],
            &Scenario::new(1000, 10.0, 0.1, pl),
            trials,
            opts.seed,
        )?;
        let ratio = est[0].mean / est[1].mean;
        gate.check(
            (0.9..=1.02).contains(&ratio),
            format!("{pl}: threshold / selection = {ratio:.4} at K=1000"),
        );
    }
    Ok(())
}

fn dominance_chain(opts: &AcceptOptions, gate: &mut Gate) -> Result<()> {
    let (draws, _) = opts.trials(10_000);
    for k in 2..=8usize {
        for pl in Placement::ALL {
            let prof = WeightProfile::caching(0.1, k, pl)?;
            let (mut worst, mut thr_above) = (f64::INFINITY, 0u64);
            for t in 0..draws {
                let d = sample(&vec![1.0; k], &mut substream(opts.seed, t))?;
                let p = Power::from_db(10.0 * (t % 3) as f64)?;
                let r = |s| prof.evaluate(s, &d, p).map(|o| o.rate);
                let (sp, sc, bl) = (r(Scheme::Superposition)?, r(Scheme::Selection)?, r(Scheme::Baseline)?);
                worst = worst.min(sp - sc).min(sc - bl);
                if r(Scheme::Threshold)? > sc {
                    thr_above += 1;
                }
            }
            gate.check(
                worst >= -1e-9,
                format!("K={k} {pl}: min slack {worst:.3e} over {draws} draws"),
            );
            gate.note(format!("info K={k} {pl}: threshold above selection in {thr_above} draws"));
        }
    }
    Ok(())
}

fn random_instance(rng: &mut ChaCha8Rng, k: usize) -> Result<(Vec<f64>, Vec<f64>, Power)> {
    let phi = if rng.random::<bool>() {
        let m = rng.random_range(0.02..0.6);
        let pl = if rng.random::<bool>() { Placement::Centralized } else { Placement::Decentralized };
        crate::caching::weight_profile(m, k, pl)?
    } else {
        let mut w: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..5.0)).collect();
        w.sort_by(f64::total_cmp);
        w
    };
    let draw = sample(&vec![1.0; k], rng)?;
    let power = Power::linear(10f64.powf(rng.random_range(-1.0..3.0)))?;
    Ok((phi, draw.sorted_gains(), power))
}

fn allocation_oracle(opts: &AcceptOptions, gate: &mut Gate) -> Result<()> {
    const CELLS: usize = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0xA110C);
    for k in 2..=5usize {
        let (mut worst_grid, mut worst_simplex) = (0.0f64, f64::INFINITY);
        for _ in 0..100 {
            let (phi, h, power) = random_instance(&mut rng, k)?;
            let alloc = optimal_alloc(&phi, &h, power)?;
            let grid = grid_allocation(&phi, &h, power.value(), CELLS);
            let steps = alloc
                .alpha
                .iter()
                .zip(&grid)
                .map(|(a, g)| (a - g).abs() * CELLS as f64)
                .fold(0.0, f64::max);
            worst_grid = worst_grid.max(steps);
            let best = weighted_sum_rate(&alloc.alpha, &phi, &h, power)?;
            for _ in 0..1000 {
                // normalised exponentials are uniform on the simplex
                let e: Vec<f64> = (0..k).map(|_| -(-rng.random::<f64>()).ln_1p()).collect();
                let s: f64 = e.iter().sum();
                let alpha: Vec<f64> = e.iter().map(|x| x / s).collect();
                let f = weighted_sum_rate(&alpha, &phi, &h, power)?;
                worst_simplex = worst_simplex.min((best - f) / best.abs().max(f64::MIN_POSITIVE));
            }
        }
        gate.check(worst_grid <= 2.0, format!("K={k}: max deviation {worst_grid:.3} grid steps"));
        gate.check(
            worst_simplex >= -1e-12,
            format!("K={k}: optimum minus simplex points, relative min {worst_simplex:.3e}"),
        );
    }
    Ok(())
}

/// Places, delivers and decodes once; returns transmitted bits.
fn round_trip(params: &SystemParams, seed: u64, gate: &mut Gate) -> Result<usize> {
    let lib = Library::random(params.files(), params.file_bits(), seed);
    let cache = match params.placement() {
        Placement::Centralized => centralized_place(params, lib)?,
        Placement::Decentralized => decentralized_place(params, lib, seed)?,
    };
    let demand = Demand::identity(params.users());
    let batch = build_codewords(&cache, &demand)?;
    for u in 0..params.users() {
        let got = decode(u, &cache, &batch)?;
        if got != *cache.server_file(demand.file_of(u)) {
            gate.fail(format!("seed {seed}: user {u} decoded the wrong bits"));
        }
    }
    Ok(batch.total_payload_bits())
}

fn bit_exact_caching(gate: &mut Gate) -> Result<()> {
    for k in [2usize, 3, 4] {
        for b in [1usize, 2] {
            if b > k {
                continue;
            }
            let parts = binomial(k, b).expect("small");
            let f = parts * 24;
            let m = b as f64 / k as f64;
            let params = SystemParams::new(k, k, m, f, Placement::Centralized)?;
            let sent = round_trip(&params, 11, gate)?;
            let want = f * (k - b) / (b + 1);
            let t = load(m, k, Placement::Centralized)?;
            gate.check(
                sent == want && (sent as f64 - t * f as f64).abs() <= 1e-9 * f as f64,
                format!("centralized K={k} b={b} F={f}: sent {sent}, T*F = {}", t * f as f64),
            );
        }
    }
    let (k, m, f) = (3usize, 0.3, 10_000usize);
    let params = SystemParams::new(k, k, m, f, Placement::Decentralized)?;
    let mut total = 0usize;
    for seed in 0..100 {
        total += round_trip(&params, seed, gate)?;
    }
    let mean = total as f64 / 100.0 / f as f64;
    let t = load(m, k, Placement::Decentralized)?;
    gate.check(
        (mean - t).abs() <= 0.02 * t,
        format!("decentralized K=3 m=0.3 F=1e4: mean sent/F {mean:.5} vs T {t:.5}"),
    );
    if !gate.failed {
        gate.note("ok   every user decoded its file bit-exactly".into());
    }
    Ok(())
}

fn special_functions(gate: &mut Gate) -> Result<()> {
    let mut worst = 0.0f64;
    for i in 0..=240 {
        let x = 10f64.powf(-6.0 + i as f64 * 0.05);
        let w = lambert_w(x)?;
        worst = worst.max((w * w.exp() - x).abs() / x.max(1.0));
    }
    gate.check(worst <= 1e-10, format!("W(x) e^W(x) residual {worst:.2e} on 1e-6..1e6"));
    for x in [0.01, 0.1, 1.0, 10.0] {
        let e = exp_integral_e1(x)?;
        let lo = 0.5 * (-x).exp() * (1.0 + 2.0 / x).ln();
        let hi = (-x).exp() * (1.0 + 1.0 / x).ln();
        let q = e1_quadrature(x);
        let rel = (e - q).abs() / q;
        gate.check(
            lo < e && e < hi && rel <= 1e-10,
            format!("E1({x}) = {e:.15e}, quadrature rel {rel:.2e}, bounds [{lo:.6e}, {hi:.6e}]"),
        );
    }
    Ok(())
}

fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, sxy * sxy / (sxx * syy))
}

fn mean_of(rows: &[RateEstimate], scheme: Scheme, pl: Placement, pick: impl Fn(&Scenario) -> bool) -> Vec<f64> {
    rows.iter()
        .filter(|r| r.scheme == scheme && r.scenario.placement == pl && pick(&r.scenario))
        .map(|r| r.mean)
        .collect()
}

fn figure_shape(opts: &AcceptOptions, gate: &mut Gate) -> Result<()> {
    let (trials, reduced) = opts.trials(10_000);
    gate.reduced(reduced);
    let fig1 = SweepSpec {
        axis: Axis::K,
        values: vec![2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0],
        base: Scenario::new(2, 10.0, 0.1, Placement::Centralized),
        placements: Placement::ALL.to_vec(),
        schemes: Scheme::ALL.to_vec(),
        trials,
        seed: opts.seed,
    };
    let rows = sweep(&fig1)?;
    let limit = baseline_large_k(Power::from_db(10.0)?, 0.1)?.value;
    for pl in Placement::ALL {
        let ks = [20.0, 50.0, 100.0, 200.0];
        for s in [Scheme::Selection, Scheme::Superposition] {
            let y = mean_of(&rows, s, pl, |sc| sc.users >= 20);
            let (slope, r2) = linear_fit(&ks, &y);
            gate.check(
                r2 >= 0.99 && slope > 0.0,
                format!("fig1 {pl} {s}: slope {slope:.4}, R^2 {r2:.5}"),
            );
        }
        let bl = mean_of(&rows, Scheme::Baseline, pl, |sc| sc.users == 200)[0];
        gate.check(bl <= 1.3 * limit, format!("fig1 {pl}: baseline(K=200) {bl:.4} vs limit {limit:.4}"));
        let sp = mean_of(&rows, Scheme::Superposition, pl, |_| true);
        let sc = mean_of(&rows, Scheme::Selection, pl, |_| true);
        let b = mean_of(&rows, Scheme::Baseline, pl, |_| true);
        let chain = (0..sp.len()).all(|i| sp[i] >= sc[i] && sc[i] >= b[i]);
        gate.check(chain, format!("fig1 {pl}: superposition >= selection >= baseline at all K"));
    }
    let fig2 = SweepSpec {
        axis: Axis::Snr,
        values: (0..=8).map(|i| 5.0 * i as f64).collect(),
        base: Scenario::new(10, 0.0, 0.1, Placement::Centralized),
        placements: Placement::ALL.to_vec(),
        schemes: vec![Scheme::Baseline, Scheme::Selection, Scheme::Uncoded],
        trials,
        seed: opts.seed,
    };
    let rows = sweep(&fig2)?;
    for pl in Placement::ALL {
        let b = mean_of(&rows, Scheme::Baseline, pl, |_| true);
        let u = mean_of(&rows, Scheme::Uncoded, pl, |_| true);
        let s = mean_of(&rows, Scheme::Selection, pl, |_| true);
        // first index from which the baseline stays above uncoded
        let cross = (0..b.len()).find(|&i| (i..b.len()).all(|j| b[j] > u[j]));
        let ok = matches!(cross, Some(i) if i > 0);
        let at = cross.map(|i| fig2.values[i]);
        gate.check(ok, format!("fig2 {pl}: baseline overtakes uncoded from {at:?} dB"));
        let ratios: Vec<String> = b.iter().zip(&s).map(|(x, y)| format!("{:.3}", x / y)).collect();
        gate.note(format!("info fig2 {pl}: baseline/selection by SNR [{}]", ratios.join(", ")));
    }
    Ok(())
}

/// Recorded selection outcomes: `seed,trial,K,placement,snr_db,k_star`.
const SELECTION_GOLDEN: &str = include_str!("selection_golden.csv");

/// Exact ties between served-set sizes: `(h, phi, P, k*)`.
fn tie_cases() -> Vec<(Vec<f64>, Vec<f64>, f64, usize)> {
    vec![
        (vec![3.0, 1.0], vec![1.0, 2.0], 1.0, 2),
        (vec![7.0, 1.0], vec![1.0, 3.0], 1.0, 2),
        (vec![15.0, 3.0, 1.0], vec![1.0, 2.0, 4.0], 1.0, 3),
        (vec![15.0, 3.0, 0.5], vec![1.0, 2.0, 4.0], 1.0, 2),
    ]
}

/// Selection outcomes for the golden grid under the current build.
pub fn selection_golden_rows() -> Result<Vec<String>> {
    let mut rows = Vec::new();
    for seed in [0u64, 1, 2] {
        for k in [3usize, 8] {
            for pl in Placement::ALL {
                for db in [0.0, 10.0, 20.0] {
                    let prof = WeightProfile::caching(0.1, k, pl)?;
                    for trial in 0..4u64 {
                        let d = sample(&vec![1.0; k], &mut substream(seed, trial))?;
                        let out = selection(&d, Power::from_db(db)?, prof.phi())?;
                        let SchemeDetail::Selected { k: ks } = out.detail else {
                            unreachable!("selection reports its served count")
                        };
                        rows.push(format!("{seed},{trial},{k},{pl},{db},{ks}"));
                    }
                }
            }
        }
    }
    Ok(rows)
}

fn selection_golden(gate: &mut Gate) -> Result<()> {
    let want: Vec<&str> = SELECTION_GOLDEN.lines().skip(1).filter(|l| !l.is_empty()).collect();
    let got = selection_golden_rows()?;
    let mismatched: Vec<_> = want.iter().zip(&got).filter(|(w, g)| **w != g.as_str()).collect();
    gate.check(
        want.len() == got.len() && mismatched.is_empty(),
        format!("{} recorded draws, {} mismatched", want.len(), mismatched.len()),
    );
    for (w, g) in mismatched.iter().take(5) {
        gate.note(format!("     recorded {w}, now {g}"));
    }
    for (h, phi, p, want) in tie_cases() {
        let d = ChannelDraw::from_gains(h.clone(), None)?;
        let out = selection(&d, Power::linear(p)?, &phi)?;
        let got = match out.detail {
            SchemeDetail::Selected { k } => k,
            _ => 0,
        };
        gate.check(got == want, format!("tie h={h:?} phi={phi:?}: k* {got}, recorded {want}"));
    }
    Ok(())
}
