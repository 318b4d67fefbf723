use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ransac_cs::experiment::{realize, run_experiment, BoundRule, ExperimentScenario};
use ransac_cs::format::{
    parse_signal_csv, write_experiment_csv, write_mask_csv, write_plot_data, write_sidecar_csv, write_signal_csv,
    GroundTruth,
};
use ransac_cs::metrics::{
    classic_ransac_trials, clean_subset_probability, predicted_snr_out, snr_improvement_over_subset,
};
use ransac_cs::ransac::{
    default_consensus_threshold, inlier_bound, ransac_denoise, robust_sigma, RansacConfig, DEFAULT_BOUND_MULTIPLIER,
    DEFAULT_MAX_TRIALS,
};

const EXIT_USAGE: u8 = 1;
const EXIT_NO_CONSENSUS: u8 = 2;

/// Sparse-signal denoising by random sample consensus.
#[derive(Parser)]
#[command(name = "ransac-cs", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Denoise a signal CSV.
    Denoise(DenoiseArgs),
    /// Run a seeded Monte-Carlo experiment and write per-run records.
    Experiment(ExperimentArgs),
    /// Write one noisy realization and its ground truth.
    Generate(GenerateArgs),
    /// Print trial-count and SNR predictions.
    Predict(PredictArgs),
}

#[derive(Args)]
struct DenoiseArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Inlier mask CSV [default: <output stem>.mask.csv]
    #[arg(long)]
    mask: Option<PathBuf>,
    /// Text report [default: <output stem>.report.txt]
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    m: usize,
    /// Inlier bound: `auto` or a number.
    #[arg(long, default_value = "auto")]
    d: String,
    /// Known per-part noise deviation; used by `--d auto` instead of the MAD estimate.
    #[arg(long)]
    sigma: Option<f64>,
    /// Consensus threshold: `auto` or a count.
    #[arg(long, default_value = "auto")]
    t: String,
    #[arg(long, default_value_t = DEFAULT_MAX_TRIALS)]
    nmax: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Scenario fields; each overrides the scenario file.
#[derive(Args, Default)]
struct ScenarioArgs {
    /// `key = value` scenario file.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    /// Number of impulsive outliers.
    #[arg(long)]
    i: Option<usize>,
    /// Gaussian deviation per real/imaginary part.
    #[arg(long)]
    sigma: Option<String>,
    #[arg(long)]
    offset_real: Option<String>,
    #[arg(long)]
    offset_imag: Option<String>,
    #[arg(long)]
    cauchy_scale: Option<String>,
    #[arg(long)]
    amplitude_low: Option<String>,
    #[arg(long)]
    amplitude_high: Option<String>,
    /// Inlier bound: `auto`, `sigma` or a number.
    #[arg(long)]
    d: Option<String>,
    /// Consensus threshold: `auto` or a count.
    #[arg(long)]
    t: Option<String>,
    #[arg(long)]
    nmax: Option<usize>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Experiment CSV [default: stdout]
    #[arg(long)]
    output: Option<PathBuf>,
    /// Directory for per-run scatter data.
    #[arg(long)]
    emit_plot: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long)]
    output: PathBuf,
    /// Ground-truth CSV [default: <output stem>.truth.csv]
    #[arg(long)]
    sidecar: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    /// Subset size.
    m: usize,
    /// Signal length.
    n: usize,
    /// Outlier count.
    i: usize,
    #[arg(long, default_value_t = 0.99)]
    confidence: f64,
    /// Consensus size for the SNR gain lines.
    #[arg(long)]
    d: Option<f64>,
    /// Sparsity for the SNR gain lines.
    #[arg(long)]
    k: Option<f64>,
}

type CliResult = Result<ExitCode, String>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Denoise(a) => denoise(a),
        Command::Experiment(a) => experiment(a),
        Command::Generate(a) => generate(a),
        Command::Predict(a) => predict(a),
    };
    result.unwrap_or_else(|msg| {
        eprintln!("error: {msg}");
        ExitCode::from(EXIT_USAGE)
    })
}

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<(), String> {
    fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

/// `dir/name.csv` with `suffix` → `dir/name.<suffix>`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map_or_else(|| "out".into(), |s| s.to_string_lossy().into_owned());
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn denoise(a: DenoiseArgs) -> CliResult {
    let text = read(&a.input)?;
    let noisy = parse_signal_csv(&text).map_err(|e| format!("{}: {e}", a.input.display()))?;
    let n = noisy.len();
    let estimate = robust_sigma(&noisy);
    let d = match (a.d.as_str(), a.sigma) {
        ("auto", Some(s)) => inlier_bound(s, DEFAULT_BOUND_MULTIPLIER, true),
        ("auto", None) => inlier_bound(estimate.combined_sigma, DEFAULT_BOUND_MULTIPLIER, true),
        (v, _) => match v.parse::<BoundRule>().map_err(|e| e.to_string())? {
            BoundRule::Fixed(d) => d,
            _ => return Err(format!("--d must be auto or a number, got {v:?}")),
        },
    };
    let t = match a.t.as_str() {
        "auto" => default_consensus_threshold(n),
        v => v.parse().map_err(|_| format!("--t must be auto or a count, got {v:?}"))?,
    };
    let cfg = RansacConfig {
        subset_size: a.m,
        inlier_bound: d,
        consensus_threshold: t,
        max_trials: a.nmax,
        sparsity: a.k,
        rng_seed: a.seed,
    };
    for w in cfg.validate(n).map_err(|e| e.to_string())? {
        eprintln!("warning: {w}");
    }
    let out = ransac_denoise(&noisy, &cfg).map_err(|e| e.to_string())?;

    write(&a.output, &write_signal_csv(&out.reconstructed))?;
    let mask_path = a.mask.unwrap_or_else(|| sibling(&a.output, "mask.csv"));
    write(&mask_path, &write_mask_csv(&out.inlier_mask()))?;
    let mut report = String::new();
    let _ = writeln!(report, "samples N        {n}");
    let _ = writeln!(report, "sparsity K       {}", a.k);
    let _ = writeln!(report, "subset size M    {}", a.m);
    let _ = writeln!(report, "inlier bound d   {d}");
    let _ = writeln!(
        report,
        "MAD sigma        {} (re {}, im {})",
        estimate.combined_sigma, estimate.sigma_real, estimate.sigma_imag
    );
    let _ = writeln!(report, "threshold T      {t}");
    let _ = writeln!(report, "trials N_it      {}", out.trials_used);
    let _ = writeln!(report, "consensus D      {}", out.consensus_size());
    let _ = writeln!(report, "consensus        {}", if out.reached_consensus { "reached" } else { "not reached" });
    let _ = writeln!(report, "final model      {:?}", out.source);
    let _ = writeln!(report, "support          {:?}", out.final_sparse.support());
    let report_path = a.report.unwrap_or_else(|| sibling(&a.output, "report.txt"));
    write(&report_path, &report)?;
    print!("{report}");

    if out.reached_consensus {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!(
            "warning: consensus of {t} samples not reached in {} trials; best set has {}",
            out.trials_used,
            out.consensus_size()
        );
        Ok(ExitCode::from(EXIT_NO_CONSENSUS))
    }
}

fn scenario_from(a: &ScenarioArgs) -> Result<ExperimentScenario, String> {
    let mut s = match &a.scenario {
        Some(p) => ExperimentScenario::parse(&read(p)?).map_err(|e| format!("{}: {e}", p.display()))?,
        None => ExperimentScenario::default(),
    };
    let numbers = [
        ("n", a.n.map(|v| v.to_string())),
        ("k", a.k.map(|v| v.to_string())),
        ("m", a.m.map(|v| v.to_string())),
        ("i", a.i.map(|v| v.to_string())),
        ("nmax", a.nmax.map(|v| v.to_string())),
        ("runs", a.runs.map(|v| v.to_string())),
        ("seed", a.seed.map(|v| v.to_string())),
    ];
    let texts = [
        ("sigma", &a.sigma),
        ("offset_real", &a.offset_real),
        ("offset_imag", &a.offset_imag),
        ("cauchy_scale", &a.cauchy_scale),
        ("amplitude_low", &a.amplitude_low),
        ("amplitude_high", &a.amplitude_high),
        ("d", &a.d),
        ("t", &a.t),
    ];
    let pairs = numbers
        .into_iter()
        .chain(texts.into_iter().map(|(k, v)| (k, v.clone())));
    for (key, value) in pairs {
        if let Some(v) = value {
            s.set(key, &v).map_err(|e| format!("--{}: {e}", key.replace('_', "-")))?;
        }
    }
    Ok(s)
}

fn experiment(a: ExperimentArgs) -> CliResult {
    let s = scenario_from(&a.scenario)?;
    let report = run_experiment(&s).map_err(|e| e.to_string())?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let csv = write_experiment_csv(&report.records, &report.summary);
    match &a.output {
        Some(p) => write(p, &csv)?,
        None => print!("{csv}"),
    }
    if let Some(dir) = &a.emit_plot {
        write_plot_data(dir, &report).map_err(|e| format!("{}: {e}", dir.display()))?;
    }
    let sm = &report.summary;
    eprintln!(
        "{} runs: N_it {:.2}, SNR_in {:.2}, SNR_in0 {:.2}, SNR_out0 {:.2}, SNR_out {:.2}, D {:.2}, consensus in {:.0}%",
        report.records.len(),
        sm.trials,
        sm.snr_in,
        sm.snr_in0,
        sm.snr_out0,
        sm.snr_out,
        sm.consensus_size,
        100.0 * sm.consensus_rate
    );
    Ok(ExitCode::SUCCESS)
}

fn generate(a: GenerateArgs) -> CliResult {
    let s = scenario_from(&a.scenario)?;
    s.signal_spec(0).validate().map_err(|e| e.to_string())?;
    s.noise_spec().validate(s.n).map_err(|e| e.to_string())?;
    let r = realize(&s, 0).map_err(|e| e.to_string())?;
    let truth = GroundTruth::new(&r.truth, &r.impulsive, &r.outlier_positions);
    write(&a.output, &write_signal_csv(&r.noisy))?;
    let sidecar = a.sidecar.unwrap_or_else(|| sibling(&a.output, "truth.csv"));
    write(&sidecar, &write_sidecar_csv(&truth))?;
    Ok(ExitCode::SUCCESS)
}

fn predict(a: PredictArgs) -> CliResult {
    let p = clean_subset_probability(a.m, a.n, a.i).map_err(|e| e.to_string())?;
    println!("M={} N={} I={}", a.m, a.n, a.i);
    if p == 0.0 {
        println!(
            "infeasible: every subset of {} samples contains an outlier ({} clean samples)",
            a.m,
            a.n - a.i
        );
        return Ok(ExitCode::SUCCESS);
    }
    println!("P(M,N,I)          {p:.6}");
    println!("expected N_it     {:.4}", 1.0 / p);
    let classic = classic_ransac_trials(a.m, a.n, a.i, a.confidence).map_err(|e| e.to_string())?;
    println!("classic N_it      {classic:.4} (confidence {})", a.confidence);
    if a.k.is_some() || a.d.is_some() {
        let (Some(d), Some(k)) = (a.d, a.k) else {
            return Err("--d and --k must be given together".into());
        };
        let m = a.m as f64;
        let consensus = predicted_snr_out(0.0, d, k).map_err(|e| e.to_string())?;
        let subset = predicted_snr_out(0.0, m, k).map_err(|e| e.to_string())?;
        let over = snr_improvement_over_subset(d, m).map_err(|e| e.to_string())?;
        println!("SNR_out - SNR_in0  {consensus:.4} dB");
        println!("SNR_out0 - SNR_in0 {subset:.4} dB");
        println!("SNR_out - SNR_out0 {over:.4} dB");
    }
    Ok(ExitCode::SUCCESS)
}
