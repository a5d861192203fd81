//! `opcache`: per-draw rates, power allocation, Monte Carlo estimates,
//! sweeps, closed forms, a bit-level caching demo and the acceptance runner.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use opcache::asymptotics::{
    baseline_exact, baseline_large_k, check_symmetric, g_function, high_snr_prelog,
    selection_large_k, z_star,
};
use opcache::caching::{
    build_codewords, centralized_place, decentralized_place, decode, load, Demand, Library,
};
use opcache::harness::accept::{run_suite, AcceptOptions, Suite};
use opcache::harness::{
    estimate, sweep, write_csv, write_csv_file, Axis, RateEstimate, Scenario, SweepSpec,
    DEFAULT_TRIALS,
};
use opcache::power_alloc::optimal_alloc;
use opcache::schemes::{SchemeDetail, WeightProfile};
use opcache::{ChannelDraw, Placement, Power, Scheme, SystemParams};

#[derive(Parser)]
#[command(name = "opcache", version, about = "Opportunistic coded-caching delivery over fading broadcast channels")]
struct Cli {
    /// Worker threads for Monte Carlo work (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Report rates in bits instead of nats
    #[arg(long, global = true)]
    bits: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rates of one channel realization
    Rate(RateArgs),
    /// Optimal superposition power split for one realization
    Alloc(AllocArgs),
    /// Monte Carlo estimate of one scheme's average rate
    Simulate(SimulateArgs),
    /// Sweep over K or SNR, written as CSV
    Sweep(SweepArgs),
    /// Closed-form and limiting expressions
    Asymptotic(AsymptoticArgs),
    /// Bit-level placement and delivery with decode verification
    PlacementDemo(DemoArgs),
    /// Run an acceptance suite
    Accept(AcceptArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Baseline,
    Selection,
    Superposition,
    Threshold,
    Uncoded,
    All,
}

impl SchemeArg {
    fn schemes(self) -> Vec<Scheme> {
        match self {
            SchemeArg::Baseline => vec![Scheme::Baseline],
            SchemeArg::Selection => vec![Scheme::Selection],
            SchemeArg::Superposition => vec![Scheme::Superposition],
            SchemeArg::Threshold => vec![Scheme::Threshold],
            SchemeArg::Uncoded => vec![Scheme::Uncoded],
            SchemeArg::All => Scheme::ALL.to_vec(),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    K,
    Snr,
}

#[derive(Args)]
struct SystemArgs {
    /// Transmit SNR in dB
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    snr_db: f64,
    /// Cache fraction m
    #[arg(long, default_value_t = 0.1)]
    m: f64,
    /// Placement: c[entralized] or d[ecentralized]
    #[arg(long, default_value = "centralized")]
    placement: Placement,
}

#[derive(Args)]
struct RateArgs {
    /// Fading gains, comma separated
    #[arg(long, value_delimiter = ',', required = true)]
    h: Vec<f64>,
    /// Number of users; must match the gain count if given
    #[arg(long)]
    k: Option<usize>,
    #[command(flatten)]
    system: SystemArgs,
    #[arg(long, value_enum, default_value = "all")]
    scheme: SchemeArg,
}

#[derive(Args)]
struct AllocArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    h: Vec<f64>,
    #[command(flatten)]
    system: SystemArgs,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    scheme: SchemeArg,
    #[arg(long)]
    k: usize,
    #[command(flatten)]
    system: SystemArgs,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Per-user mean gains, comma separated (default: all ones)
    #[arg(long, value_delimiter = ',')]
    gamma: Option<Vec<f64>>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    axis: AxisArg,
    /// Axis values, strictly increasing
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    values: Vec<f64>,
    /// Users, when sweeping SNR
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// SNR in dB, when sweeping K
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    snr_db: f64,
    #[arg(long, default_value_t = 0.1)]
    m: f64,
    /// Placements, comma separated
    #[arg(long, value_delimiter = ',', default_value = "centralized,decentralized")]
    placement: Vec<Placement>,
    #[arg(long, value_enum, default_value = "all")]
    scheme: SchemeArg,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file (default: stdout)
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct AsymptoticArgs {
    #[arg(long)]
    k: usize,
    #[command(flatten)]
    system: SystemArgs,
    /// Per-user mean gains; the closed forms need them all equal to one
    #[arg(long, value_delimiter = ',')]
    gamma: Option<Vec<f64>>,
}

#[derive(Args)]
struct DemoArgs {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    m: f64,
    /// Bits per file
    #[arg(long)]
    f: usize,
    /// Library size (default: K)
    #[arg(long)]
    files: Option<usize>,
    #[arg(long, default_value = "centralized")]
    placement: Placement,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Zero-pad files that do not split evenly
    #[arg(long)]
    pad: bool,
    /// Codewords to list in the trace
    #[arg(long, default_value_t = 16)]
    show: usize,
}

#[derive(Args)]
struct AcceptArgs {
    #[arg(long, default_value = "all")]
    suite: Suite,
    /// Override every Monte Carlo trial count
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Print the summary as JSON
    #[arg(long)]
    json: bool,
}

struct Unit {
    bits: bool,
}

impl Unit {
    fn name(&self) -> &'static str {
        if self.bits {
            "bits"
        } else {
            "nats"
        }
    }

    fn show(&self, nats: f64) -> f64 {
        if self.bits {
            nats / std::f64::consts::LN_2
        } else {
            nats
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    let unit = Unit { bits: cli.bits };
    let result = match cli.command {
        Command::Rate(a) => rate(a, &unit),
        Command::Alloc(a) => alloc(a),
        Command::Simulate(a) => simulate(a, &unit),
        Command::Sweep(a) => run_sweep(a),
        Command::Asymptotic(a) => asymptotic(a, &unit),
        Command::PlacementDemo(a) => placement_demo(a),
        Command::Accept(a) => return accept(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn describe(detail: &SchemeDetail) -> String {
    match detail {
        SchemeDetail::None => "-".into(),
        SchemeDetail::Selected { k } => format!("k*={k}"),
        SchemeDetail::Superposed { alpha, lambda } => {
            let a: Vec<String> = alpha.iter().map(|x| format!("{x:.4}")).collect();
            format!("alpha=[{}] lambda={lambda:.4e}", a.join(","))
        }
        SchemeDetail::Thresholded { served, threshold } => format!("served={served} z*={threshold:.6}"),
    }
}

fn rate(a: RateArgs, unit: &Unit) -> Result<()> {
    if let Some(k) = a.k {
        if k != a.h.len() {
            bail!("--k {k} but {} gains given", a.h.len());
        }
    }
    let draw = ChannelDraw::from_gains(a.h, None)?;
    let power = Power::from_db(a.system.snr_db)?;
    let prof = WeightProfile::caching(a.system.m, draw.users(), a.system.placement)?;
    println!("{:<14} {:>14}  detail", "scheme", format!("rate [{}]", unit.name()));
    for s in a.scheme.schemes() {
        let out = prof.evaluate(s, &draw, power)?;
        println!("{:<14} {:>14.6}  {}", s.as_str(), unit.show(out.rate), describe(&out.detail));
    }
    Ok(())
}

fn alloc(a: AllocArgs) -> Result<()> {
    let draw = ChannelDraw::from_gains(a.h, None)?;
    let power = Power::from_db(a.system.snr_db)?;
    let prof = WeightProfile::caching(a.system.m, draw.users(), a.system.placement)?;
    let h = draw.sorted_gains();
    let res = optimal_alloc(prof.phi(), &h, power)?;
    println!("{:>4} {:>5} {:>12} {:>10} {:>10}", "rank", "user", "h", "phi", "alpha");
    for (r, &u) in draw.order().iter().enumerate() {
        println!(
            "{:>4} {:>5} {:>12.6} {:>10.4} {:>10.6}",
            r + 1,
            u,
            h[r],
            prof.phi()[r],
            res.alpha[r]
        );
    }
    println!("lambda = {:.6e}", res.lambda);
    for s in &res.segments {
        println!("segment [{:.6}, {:.6}] -> rank {}", s.start, s.end, s.user + 1);
    }
    Ok(())
}

fn print_estimate(e: &RateEstimate, unit: &Unit) {
    let sc = &e.scenario;
    println!("scheme,placement,K,P_dB,m,trials,seed,mean_{0},stderr_{0}", unit.name());
    println!(
        "{},{},{},{},{},{},{},{},{}",
        e.scheme,
        sc.placement,
        sc.users,
        sc.snr_db,
        sc.m,
        e.trials,
        e.seed,
        unit.show(e.mean),
        unit.show(e.stderr)
    );
}

fn simulate(a: SimulateArgs, unit: &Unit) -> Result<()> {
    let schemes = a.scheme.schemes();
    if schemes.len() != 1 {
        bail!("simulate takes a single scheme; use sweep for several");
    }
    let mut sc = Scenario::new(a.k, a.system.snr_db, a.system.m, a.system.placement);
    if let Some(g) = a.gamma {
        sc = sc.with_gamma(g);
    }
    let est = estimate(schemes[0], &sc, a.trials, a.seed)?;
    print_estimate(&est, unit);
    Ok(())
}

fn run_sweep(a: SweepArgs) -> Result<()> {
    let spec = SweepSpec {
        axis: match a.axis {
            AxisArg::K => Axis::K,
            AxisArg::Snr => Axis::Snr,
        },
        values: a.values,
        base: Scenario::new(a.k, a.snr_db, a.m, Placement::Centralized),
        placements: a.placement,
        schemes: a.scheme.schemes(),
        trials: a.trials,
        seed: a.seed,
    };
    let rows = sweep(&spec)?;
    match a.output {
        Some(path) => write_csv_file(&rows, &path)?,
        None => {
            let stdout = std::io::stdout();
            write_csv(&rows, stdout.lock())?;
        }
    }
    Ok(())
}

fn asymptotic(a: AsymptoticArgs, unit: &Unit) -> Result<()> {
    if let Some(g) = &a.gamma {
        if g.len() != a.k {
            bail!("--gamma has {} entries for {} users", g.len(), a.k);
        }
        check_symmetric(g)?;
    }
    let (k, m, pl) = (a.k, a.system.m, a.system.placement);
    let power = Power::from_db(a.system.snr_db)?;
    let p = power.value();
    let prelog = high_snr_prelog(k, m, pl)?;
    let z = z_star(p)?;
    let rows: Vec<(&str, f64, &str)> = vec![
        ("baseline average", baseline_exact(k, power, m, pl)?.value, "exact"),
        ("baseline limit", baseline_large_k(power, m)?.value, "large K"),
        ("baseline high SNR", prelog * p.ln(), "high SNR"),
        ("selection", selection_large_k(k, power, m)?.value, "large K"),
        ("selection high SNR", prelog * p.ln(), "high SNR"),
        ("threshold", k as f64 * g_function(z, p, m)?, "large K"),
    ];
    println!("K={k} P={:.4} ({} dB) m={m} {pl}", p, a.system.snr_db);
    println!("{:<20} {:>14}  validity", "quantity", format!("[{}]", unit.name()));
    for (name, v, validity) in rows {
        println!("{name:<20} {:>14.6}  {validity}", unit.show(v));
    }
    println!("{:<20} {:>14.6}", "pre-log phi_K", prelog);
    println!("{:<20} {:>14.6}", "z*", z);
    println!("{:<20} {:>14.4}  dB", "threshold SNR", 10.0 * (p * z).log10());
    Ok(())
}

fn placement_demo(a: DemoArgs) -> Result<()> {
    let files = a.files.unwrap_or(a.k);
    let params = if a.pad {
        SystemParams::new_padded(a.k, files, a.m, a.f, a.placement)?
    } else {
        SystemParams::new(a.k, files, a.m, a.f, a.placement)?
    };
    let library = Library::random(files, a.f, a.seed);
    let cache = match a.placement {
        Placement::Centralized => centralized_place(&params, library.clone())?,
        Placement::Decentralized => decentralized_place(&params, library.clone(), a.seed)?,
    };
    let summary = cache.summary();
    println!(
        "placement {} K={} N={} m={} F={} (effective {})",
        a.placement, a.k, files, a.m, a.f, summary.effective_file_bits
    );
    println!("sub-files per file: {:?}", summary.subfiles_per_file);
    println!("cached bits per user: {:?}", summary.cached_bits_per_user);

    let demand = Demand::identity(a.k);
    let batch = build_codewords(&cache, &demand)?;
    println!("demand: {:?}", demand.as_slice());
    for c in batch.codewords().iter().take(a.show) {
        let parts: Vec<String> = c.lengths.iter().map(|(u, n)| format!("u{u}:{n}")).collect();
        println!("  V{} {} bits [{}]", c.subset, c.payload.len(), parts.join(" "));
    }
    if batch.codewords().len() > a.show {
        println!("  ... {} more codewords", batch.codewords().len() - a.show);
    }
    let mut all_ok = true;
    for u in 0..a.k {
        let ok = decode(u, &cache, &batch)
            .map(|bits| bits == *library.file(demand.file_of(u)))
            .unwrap_or(false);
        all_ok &= ok;
        println!("user {u}: {}", if ok { "decoded bit-exact" } else { "DECODE FAILED" });
    }
    let sent = batch.total_payload_bits();
    let t = load(a.m, a.k, a.placement)?;
    println!(
        "transmitted {sent} bits = {:.6} F; T(m,K) = {t:.6}",
        sent as f64 / a.f as f64
    );
    if !all_ok {
        bail!("decode verification failed");
    }
    Ok(())
}

fn accept(a: AcceptArgs) -> ExitCode {
    let opts = AcceptOptions {
        trials: a.trials,
        seed: a.seed,
    };
    let summary = run_suite(a.suite, &opts);
    if a.json {
        match serde_json::to_string_pretty(&summary) {
            Ok(s) => println!("{s}"),
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::FAILURE;
            }
        }
    } else {
        let mut out = std::io::stdout().lock();
        for r in &summary.reports {
            let _ = writeln!(out, "{r}");
            for d in &r.details {
                let _ = writeln!(out, "    {d}");
            }
        }
        let _ = writeln!(
            out,
            "suite {}: {} passed, {} failed, {} inconclusive",
            summary.suite, summary.passed, summary.failed, summary.inconclusive
        );
    }
    if summary.ok() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn unit_conversion() {
        let u = Unit { bits: true };
        assert!((u.show(std::f64::consts::LN_2) - 1.0).abs() < 1e-15);
        assert_eq!(Unit { bits: false }.show(2.5), 2.5);
    }
}
