//! `squeezetap` command-line driver.
//!
//! Exit codes: 0 success, 1 failed validation or I/O error, 2 usage or
//! configuration error, 3 unsupported configuration, 4 a required ratio is
//! undefined (`--strict`).

mod config;
mod output;

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use squeezetap::experiment::{
    closed_form_shot_noise, closed_form_variance, noise_result, noise_spectrum, phase_scan, to_db,
    ScanResult,
};
use squeezetap::montecarlo::{
    sample_iterated_bounce, sample_operator, EstimateReport, SamplerConfig,
};
use squeezetap::reservoir::{
    analytic_propagator, integrate_propagator, single_bounce, BounceChannel, Propagator,
    ReservoirSystem,
};
use squeezetap::{
    experiment, ExperimentConfig, FluctuationOperator, ModeId, PairSource, Phases, SqueezeParam,
};

use crate::config::{ConfigError, RunConfig};
use crate::output::{exact, exact_or_undefined, human, human_or_undefined, RunManifest};

const DEFAULT_SEED: u64 = 20_100;

#[derive(Debug, Parser)]
#[command(
    name = "squeezetap",
    version,
    about = "EPR squeezing under beamsplitter loss"
)]
struct Cli {
    /// Write CSV output to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed for stochastic commands.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Suppress human-readable summaries.
    #[arg(long, global = true)]
    quiet: bool,

    /// Print the resolved configuration and exit.
    #[arg(long, global = true)]
    dump_config: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Noise variance, shot noise and squeezing ratio of one configuration.
    Variance {
        config: PathBuf,
        /// Use the closed-form variance (EPR inputs only) instead of the operator engine.
        #[arg(long)]
        closed_form: bool,
        #[command(flatten)]
        strict: Strict,
    },
    /// Scan phi14 = -phi23 = phi.
    Scan {
        config: PathBuf,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        phi_min: String,
        #[arg(long, default_value = "6.283185307179586", allow_hyphen_values = true)]
        phi_max: String,
        #[arg(long, default_value_t = 101)]
        steps: usize,
        #[command(flatten)]
        strict: Strict,
    },
    /// Squeezing ratio versus analysis frequency behind a cavity of bandwidth gamma.
    Spectrum {
        config: PathBuf,
        /// Cavity bandwidth in Hz; defaults to `gamma_cavity` from the config.
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        f_min: f64,
        #[arg(long)]
        f_max: Option<f64>,
        #[arg(long, default_value_t = 201)]
        points: usize,
    },
    /// Compare integrated and analytic reservoir propagators.
    Reservoir {
        /// Number of reservoir modes (uniform coupling).
        #[arg(long, default_value_t = 64)]
        n: usize,
        /// Rotation angle g*t in radians (`deg` suffix allowed).
        #[arg(long, default_value = "1.5707963267948966", allow_hyphen_values = true)]
        gt: String,
        /// Integration step in seconds; defaults to 0.005/g.
        #[arg(long)]
        dt: Option<f64>,
        /// Per-mode coupling rate.
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
    },
    /// Run the Monte Carlo cross-check suite.
    Validate {
        #[arg(long, default_value_t = 200_000)]
        samples: usize,
    },
}

#[derive(Debug, Args)]
struct Strict {
    /// Exit with code 4 if a ratio is undefined (dark fringe).
    #[arg(long)]
    strict: bool,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Config(ConfigError),
    Unsupported(String),
    Guard(String),
    Validation(String),
    Io(std::io::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) | Failure::Io(_) => 1,
            Failure::Usage(_) | Failure::Config(_) => 2,
            Failure::Unsupported(_) => 3,
            Failure::Guard(_) => 4,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(msg) => write!(f, "usage error: {msg}"),
            Failure::Config(err) => write!(f, "config error: {err}"),
            Failure::Unsupported(msg) => write!(f, "unsupported configuration: {msg}"),
            Failure::Guard(msg) => write!(f, "numerical guard: {msg}"),
            Failure::Validation(msg) => write!(f, "validation failed: {msg}"),
            Failure::Io(err) => write!(f, "i/o error: {err}"),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(err: std::io::Error) -> Self {
        Failure::Io(err)
    }
}

impl From<ConfigError> for Failure {
    fn from(err: ConfigError) -> Self {
        Failure::Config(err)
    }
}

impl From<squeezetap::Error> for Failure {
    fn from(err: squeezetap::Error) -> Self {
        match err {
            squeezetap::Error::Unsupported(msg) => Failure::Unsupported(msg),
            other => Failure::Usage(other.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("squeezetap: {failure}");
            ExitCode::from(failure.code())
        }
    }
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Variance {
            config,
            closed_form,
            strict,
        } => cmd_variance(cli, config, *closed_form, strict.strict),
        Command::Scan {
            config,
            phi_min,
            phi_max,
            steps,
            strict,
        } => {
            let phi_min = angle_arg("phi-min", phi_min)?;
            let phi_max = angle_arg("phi-max", phi_max)?;
            cmd_scan(cli, config, phi_min, phi_max, *steps, strict.strict)
        }
        Command::Spectrum {
            config,
            gamma,
            f_min,
            f_max,
            points,
        } => cmd_spectrum(cli, config, *gamma, *f_min, *f_max, *points),
        Command::Reservoir { n, gt, dt, kappa } => {
            let gt = angle_arg("gt", gt)?;
            cmd_reservoir(cli, *n, gt, *dt, *kappa)
        }
        Command::Validate { samples } => cmd_validate(cli, *samples),
    }
}

fn angle_arg(name: &str, text: &str) -> Result<f64, Failure> {
    config::parse_number(text, true).map_err(|msg| Failure::Usage(format!("--{name}: {msg}")))
}

/// Loads the config; with `--dump-config` prints it and reports `true`.
fn load_config(cli: &Cli, path: &Path) -> Result<(RunConfig, bool), Failure> {
    let cfg = config::load(path)?;
    if cli.dump_config {
        let text = config::dump(&cfg);
        match &cli.out {
            Some(out) => std::fs::write(out, text)?,
            None => print!("{text}"),
        }
        return Ok((cfg, true));
    }
    Ok((cfg, false))
}

fn manifest(
    cli: &Cli,
    command: &'static str,
    cfg: Option<&RunConfig>,
    args: Vec<String>,
) -> RunManifest {
    RunManifest {
        command,
        output: cli.out.clone(),
        seed: None,
        config: cfg.map(config::dump_lines).unwrap_or_default(),
        args,
    }
}

fn summary(cli: &Cli, to_stderr: bool, text: &str) {
    if cli.quiet {
        return;
    }
    if to_stderr {
        eprintln!("{text}");
    } else {
        println!("{text}");
    }
}

fn cmd_variance(cli: &Cli, path: &Path, closed_form: bool, strict: bool) -> Outcome {
    let (cfg, dumped) = load_config(cli, path)?;
    if dumped {
        return Ok(());
    }
    let exp = &cfg.experiment;
    let mut result = noise_result(exp);
    if closed_form {
        let v = closed_form_variance(exp)?;
        result.variance = v;
        result.ratio = result.ratio.map(|_| v / result.shot_noise);
        result.db = result.ratio.map(to_db);
    }
    summary(
        cli,
        false,
        &format!(
            "V={}, V_SN={}, ratio={}, dB={}",
            human(result.variance),
            human(result.shot_noise),
            human_or_undefined(result.ratio),
            human_or_undefined(result.db)
        ),
    );
    if let Some(out) = &cli.out {
        let m = manifest(
            cli,
            "variance",
            Some(&cfg),
            vec![format!("closed_form = {closed_form}")],
        );
        let row = vec![
            exact(result.variance),
            exact(result.shot_noise),
            exact_or_undefined(result.ratio),
            exact_or_undefined(result.db),
        ];
        output::write_csv(
            Some(out),
            &m,
            &["variance", "shot_noise", "ratio", "db"],
            &[row],
        )?;
    }
    if strict && result.ratio.is_none() {
        return Err(Failure::Guard(
            "shot noise below the dark-fringe guard".into(),
        ));
    }
    Ok(())
}

fn check_strict(strict: bool, scan: &ScanResult) -> Outcome {
    if strict {
        if let Some(rec) = scan.records.iter().find(|rec| rec.ratio.is_none()) {
            return Err(Failure::Guard(format!("ratio undefined at {}", rec.value)));
        }
    }
    Ok(())
}

fn ratio_span(scan: &ScanResult) -> String {
    let ratios: Vec<f64> = scan.records.iter().filter_map(|r| r.ratio).collect();
    if ratios.is_empty() {
        return "no defined ratios".into();
    }
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    format!(
        "ratio in [{}, {}] over {} defined points",
        human(lo),
        human(hi),
        ratios.len()
    )
}

fn cmd_scan(
    cli: &Cli,
    path: &Path,
    phi_min: f64,
    phi_max: f64,
    steps: usize,
    strict: bool,
) -> Outcome {
    let (cfg, dumped) = load_config(cli, path)?;
    if dumped {
        return Ok(());
    }
    let scan = phase_scan(&cfg.experiment, phi_min, phi_max, steps)?;
    let m = manifest(
        cli,
        "scan",
        Some(&cfg),
        vec![
            format!("phi_min = {}", exact(phi_min)),
            format!("phi_max = {}", exact(phi_max)),
            format!("steps = {steps}"),
        ],
    );
    output::write_csv(
        cli.out.as_deref(),
        &m,
        &output::SCAN_HEADER,
        &output::scan_rows(&scan),
    )?;
    summary(
        cli,
        cli.out.is_none(),
        &format!("scan: {}", ratio_span(&scan)),
    );
    check_strict(strict, &scan)
}

fn cmd_spectrum(
    cli: &Cli,
    path: &Path,
    gamma: Option<f64>,
    f_min: f64,
    f_max: Option<f64>,
    points: usize,
) -> Outcome {
    let (cfg, dumped) = load_config(cli, path)?;
    if dumped {
        return Ok(());
    }
    let gamma = gamma.or(cfg.gamma_cavity).ok_or_else(|| {
        Failure::Usage("no cavity bandwidth: pass --gamma or set gamma_cavity".into())
    })?;
    let f_max = f_max.unwrap_or(10.0 * gamma);
    if points < 2 {
        return Err(Failure::Usage(format!(
            "--points must be >= 2, got {points}"
        )));
    }
    if !(f_min.is_finite() && f_max.is_finite() && f_min >= 0.0 && f_max > f_min) {
        return Err(Failure::Usage(format!(
            "need 0 <= f-min < f-max, got {f_min}..{f_max}"
        )));
    }
    let step = (f_max - f_min) / (points - 1) as f64;
    let freqs: Vec<f64> = (0..points)
        .map(|i| {
            if i == points - 1 {
                f_max
            } else {
                f_min + step * i as f64
            }
        })
        .collect();
    let spectrum = noise_spectrum(&cfg.experiment, gamma, &freqs)?;
    let m = manifest(
        cli,
        "spectrum",
        Some(&cfg),
        vec![
            format!("gamma = {}", exact(gamma)),
            format!("f_min = {}", exact(f_min)),
            format!("f_max = {}", exact(f_max)),
            format!("points = {points}"),
        ],
    );
    output::write_csv(
        cli.out.as_deref(),
        &m,
        &output::SPECTRUM_HEADER,
        &output::scan_rows(&spectrum),
    )?;
    summary(
        cli,
        cli.out.is_none(),
        &format!("spectrum: {}", ratio_span(&spectrum)),
    );
    Ok(())
}

fn cmd_reservoir(cli: &Cli, n: usize, gt: f64, dt: Option<f64>, kappa: f64) -> Outcome {
    if cli.dump_config {
        return Err(Failure::Usage(
            "--dump-config needs a command that reads a config file".into(),
        ));
    }
    if n == 0 {
        return Err(Failure::Usage("--n must be >= 1".into()));
    }
    let sys = ReservoirSystem::uniform(kappa, n)?;
    let g = sys.g();
    if g == 0.0 {
        return Err(Failure::Usage("--kappa must be nonzero".into()));
    }
    if gt < 0.0 {
        return Err(Failure::Usage(format!("--gt must be >= 0, got {gt}")));
    }
    let t = gt / g;
    let dt = dt.unwrap_or(0.005 / g);
    let integrated = integrate_propagator(&sys, t, dt)?;
    let analytic = analytic_propagator(&sys, t)?;
    let identity = Propagator::identity(n + 1);

    let mut rows = vec![
        (
            "orthogonality_defect_integrated",
            integrated.orthogonality_defect(),
        ),
        (
            "orthogonality_defect_analytic",
            analytic.orthogonality_defect(),
        ),
        (
            "max_integrated_vs_analytic",
            integrated.max_deviation(&analytic),
        ),
        (
            "max_integrated_vs_identity",
            integrated.max_deviation(&identity),
        ),
    ];
    if n == 1 {
        // Heisenberg coupling equals the beamsplitter rotation with kappa -> -kappa
        let oracle = single_bounce(kappa * t).transpose();
        let defect = (integrated.matrix() - oracle).amax();
        rows.push(("max_integrated_vs_beamsplitter", defect));
    }

    let mut text = format!(
        "N={n}, g={}, gt={}, dt={}, steps={}",
        human(g),
        human(gt),
        exact(dt),
        (t / dt).ceil().max(1.0)
    );
    for (name, value) in &rows {
        text.push_str(&format!("\n{name} = {}", exact(*value)));
    }
    summary(cli, false, &text);
    if let Some(out) = &cli.out {
        let m = manifest(
            cli,
            "reservoir",
            None,
            vec![
                format!("n = {n}"),
                format!("gt = {}", exact(gt)),
                format!("dt = {}", exact(dt)),
                format!("kappa = {}", exact(kappa)),
            ],
        );
        let rows: Vec<Vec<String>> = rows
            .iter()
            .map(|(name, value)| vec![(*name).to_owned(), exact(*value)])
            .collect();
        output::write_csv(Some(out), &m, &["quantity", "value"], &rows)?;
    }
    Ok(())
}

struct Check {
    name: &'static str,
    report: EstimateReport,
}

fn validation_suite(samples: usize, seed: u64) -> Result<Vec<Check>, Failure> {
    let sampler = |offset: u64| SamplerConfig::new(samples, seed.wrapping_add(offset));
    let q = FluctuationOperator::quadrature;
    let (a1, a2) = (ModeId(1), ModeId(2));
    let half = SqueezeParam::new(0.5)?;

    let mut operators: Vec<(&'static str, FluctuationOperator)> = vec![
        ("vacuum quadrature", q(a1, 0.0)),
        (
            "independent quadrature difference",
            &q(a1, 0.0) - &q(a2, 0.0),
        ),
        (
            "epr amplitude difference r=0.5",
            (&q(a1, 0.0) - &q(a2, 0.0)).two_mode_squeeze((a1, a2), half)?,
        ),
        (
            "antisqueezed phase quadrature r=0.5",
            q(a1, FRAC_PI_2).single_mode_squeeze(a1, half, PI),
        ),
    ];
    let configs: [(&'static str, ExperimentConfig); 4] = [
        (
            "dN restored r=s=0.5 phi=0.7",
            ExperimentConfig::epr(0.5, 0.5, 1.0, 1.0, 0.7, -0.7)?,
        ),
        (
            "dN antisqueezed (0,pi)",
            ExperimentConfig::epr(0.5, 0.5, 1.0, 1.0, 0.0, PI)?,
        ),
        (
            "dN vacuum partner r=0.8",
            ExperimentConfig::new(
                PairSource::epr(0.8, 1.3)?,
                PairSource::vacuum(),
                Phases::default(),
            )?,
        ),
        (
            "dN single-mode (pi/2,-pi/2)",
            ExperimentConfig::new(
                PairSource::single_mode(0.5, 1.0)?,
                PairSource::single_mode(0.5, 1.0)?,
                Phases::from_differences(FRAC_PI_2, -FRAC_PI_2),
            )?,
        ),
    ];
    for (name, cfg) in &configs {
        let op = experiment::build_number_difference(cfg);
        if cfg.kind_12() == squeezetap::InputKind::Epr
            && cfg.kind_34() == squeezetap::InputKind::Epr
        {
            let closed = closed_form_variance(cfg)?;
            if (closed - op.variance()).abs() > 1e-9 * (1.0 + closed) {
                return Err(Failure::Validation(format!(
                    "{name}: engine and closed form disagree"
                )));
            }
        }
        debug_assert!(closed_form_shot_noise(cfg) > 0.0);
        operators.push((name, op));
    }

    let mut checks = Vec::new();
    for (i, (name, op)) in operators.iter().enumerate() {
        checks.push(Check {
            name,
            report: sample_operator(op, &sampler(i as u64)?),
        });
    }
    let channel = BounceChannel::new(0.1, 1e-9)?;
    let input_std = (0.5 * (-2.0f64).exp()).sqrt();
    let bounce_samples = SamplerConfig::new(samples.min(100_000), seed.wrapping_add(99))?;
    checks.push(Check {
        name: "iterated bounce theta=0.1 m=200",
        report: sample_iterated_bounce(&channel, 200, input_std, &bounce_samples)?,
    });
    Ok(checks)
}

fn cmd_validate(cli: &Cli, samples: usize) -> Outcome {
    if cli.dump_config {
        return Err(Failure::Usage(
            "--dump-config needs a command that reads a config file".into(),
        ));
    }
    if samples == 0 {
        return Err(Failure::Usage("--samples must be >= 1".into()));
    }
    let seed = cli.seed.unwrap_or(DEFAULT_SEED);
    let checks = validation_suite(samples, seed)?;
    let worst = checks
        .iter()
        .map(|c| c.report.z_score.abs())
        .fold(0.0f64, f64::max);

    let mut text = format!(
        "{:<36} {:>14} {:>14} {:>12} {:>8}",
        "check", "analytic", "sampled", "std_err", "z"
    );
    for c in &checks {
        text.push_str(&format!(
            "\n{:<36} {:>14.8} {:>14.8} {:>12.3e} {:>8.3}",
            c.name,
            c.report.analytic_variance,
            c.report.sample_variance,
            c.report.standard_error,
            c.report.z_score
        ));
    }
    text.push_str(&format!(
        "\nworst |z| = {worst:.3} (samples={samples}, seed={seed})"
    ));
    summary(cli, false, &text);

    if let Some(out) = &cli.out {
        let mut m = manifest(cli, "validate", None, vec![format!("samples = {samples}")]);
        m.seed = Some(seed);
        let rows: Vec<Vec<String>> = checks
            .iter()
            .map(|c| {
                vec![
                    c.name.to_owned(),
                    exact(c.report.analytic_variance),
                    exact(c.report.sample_variance),
                    exact(c.report.standard_error),
                    exact(c.report.z_score),
                    c.report.n_samples.to_string(),
                ]
            })
            .collect();
        output::write_csv(
            Some(out),
            &m,
            &[
                "check",
                "analytic",
                "sampled",
                "standard_error",
                "z",
                "samples",
            ],
            &rows,
        )?;
    }
    if worst >= 5.0 {
        return Err(Failure::Validation(format!("worst |z| = {worst:.3} >= 5")));
    }
    Ok(())
}
