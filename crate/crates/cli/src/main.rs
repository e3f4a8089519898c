//! jitterlab command line: discretize, perceive, simulate, bode, pid,
//! recover.
//!
//! Every subcommand parses and validates all of its inputs before any
//! numerics run, and writes output files only after the computation
//! finished, so a failed run never leaves partial results behind. Exit
//! codes: 0 success, 2 unreadable or malformed input, 3 numerical
//! failure, 4 violated model assumption, 5 operation not applicable to
//! the given system shape.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use jitterlab::analysis::{
    effective_case_b, perceive_case_a, pid_under_jitter, recover_perceived_from_data, scale_tf,
    JitterCase, PidParams,
};
use jitterlab::io;
use jitterlab::jitter::{self, JitterModel, JitterSequence, Policy};
use jitterlab::lti::{c2d, freq_response, ss2tf, validate_sampling, ContinuousStateSpace};
use jitterlab::sim::{equivalence_run, InputSignal, Vector};
use jitterlab::{Error, Result};

#[derive(Parser)]
#[command(
    name = "jitterlab",
    version,
    about = "Sampled LTI systems under sampling-time jitter",
    long_about = "Discretize, transform, and simulate LTI systems whose sample clock \
                  jitters. A system observed through a clock running (1+e) too slow is \
                  indistinguishable from the same system with A and B scaled by (1+e); \
                  every subcommand is a view of that equivalence."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact zero-order-hold discretization, with a sampling-bound report
    Discretize {
        /// System JSON file: {"A", "B", "C", "D", optional "ts"}
        #[arg(long)]
        system: PathBuf,
        /// Sampling time in seconds; falls back to "ts" from the file
        #[arg(long)]
        ts: Option<f64>,
        /// Output path for the discrete system JSON
        #[arg(long)]
        out: PathBuf,
    },
    /// The scaled system a jittery clock turns a nominal one into
    Perceive {
        #[arg(long)]
        system: PathBuf,
        /// a: the measurement clock jitters; b: the implementation clock does
        #[arg(long, value_enum)]
        case: CaseArg,
        /// Constant jitter fraction (> -1)
        #[arg(
            long,
            conflicts_with = "jitter",
            required_unless_present = "jitter",
            allow_negative_numbers = true
        )]
        epsilon: Option<f64>,
        /// Jitter descriptor (constant:c | uniform:w | uniform:lo,hi |
        /// gauss:s,bounds=lo,hi) or a jitter JSON file path
        #[arg(long)]
        jitter: Option<String>,
        /// Samples to draw when --jitter names a generator
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = PolicyArg::Recommended)]
        policy: PolicyArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Step the true system on the jittery clock and its scaled replica on
    /// the nominal clock; report how far apart the outputs land
    Simulate {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        ts: Option<f64>,
        /// Jitter descriptor or jitter JSON file path
        #[arg(long)]
        jitter: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Horizon in samples (default 100, or the jitter file's length)
        #[arg(long)]
        steps: Option<usize>,
        /// step | pulse | sin:FREQ (rad/s) | file:PATH
        #[arg(long, default_value = "step")]
        input: String,
        /// Output base path; csv writes BASE.jittered.csv and
        /// BASE.nominal.csv, json writes a single file
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
        #[arg(long, value_enum, default_value_t = PolicyArg::Recommended)]
        policy: PolicyArg,
    },
    /// Frequency response of a SISO system next to its jitter-scaled one
    Bode {
        #[arg(long)]
        system: PathBuf,
        /// Constant jitter fraction applied to the scaled column
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        epsilon: f64,
        #[arg(long, value_enum, default_value_t = CaseArg::A)]
        case: CaseArg,
        /// Log-spaced grid size over three decades around the largest pole
        #[arg(long, default_value_t = 100)]
        points: usize,
        /// Output CSV: omega,mag,phase,mag_scaled,phase_scaled
        #[arg(long)]
        out: PathBuf,
    },
    /// How a filtered-derivative PID shifts when its clock runs (1+e) slow
    Pid {
        #[arg(long, allow_negative_numbers = true)]
        kp: f64,
        #[arg(long, allow_negative_numbers = true)]
        ki: f64,
        #[arg(long, allow_negative_numbers = true)]
        kd: f64,
        /// Derivative filter time constant (> 0)
        #[arg(long)]
        taud: f64,
        #[arg(long, allow_negative_numbers = true)]
        epsilon: f64,
        /// Optional JSON output with nominal and effective parameter sets
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Continuous system behind measured discrete data, assuming the clock
    /// was believed to tick at the given nominal period
    Recover {
        /// Discrete system JSON file: {"A_d", "B_d", "C", "D", "dt"}
        #[arg(long)]
        system: PathBuf,
        /// Nominal period override; defaults to "dt" from the file
        #[arg(long)]
        ts: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CaseArg {
    A,
    B,
}

impl From<CaseArg> for JitterCase {
    fn from(c: CaseArg) -> Self {
        match c {
            CaseArg::A => JitterCase::PlantMeasurement,
            CaseArg::B => JitterCase::ControllerImplementation,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Recommended,
    Permissive,
}

impl From<PolicyArg> for Policy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Recommended => Policy::Recommended,
            PolicyArg::Permissive => Policy::Permissive,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_)
        | Error::Io { .. }
        | Error::DimensionMismatch { .. }
        | Error::NonFinite { .. }
        | Error::NonPositiveTimestep { .. }
        | Error::EmptyHorizon { .. }
        | Error::InvalidSigma { .. } => 2,
        Error::ExpOverflow
        | Error::SolveFailed { .. }
        | Error::IllConditionedIntegral { .. }
        | Error::SingularInput { .. }
        | Error::PoleOnAxis { .. }
        | Error::InvalidTransferFunction { .. } => 3,
        Error::AssumptionViolation { .. }
        | Error::InvalidBounds { .. }
        | Error::AliasingRisk { .. }
        | Error::BranchViolation { .. }
        | Error::RangeViolation { .. }
        | Error::InvalidRange { .. }
        | Error::RejectionLimit { .. } => 4,
        Error::NotSiso { .. } => 5,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Discretize { system, ts, out } => cmd_discretize(&system, ts, &out),
        Command::Perceive {
            system,
            case,
            epsilon,
            jitter,
            steps,
            seed,
            policy,
            out,
        } => cmd_perceive(
            &system,
            case.into(),
            epsilon,
            jitter.as_deref(),
            steps,
            seed,
            policy.into(),
            &out,
        ),
        Command::Simulate {
            system,
            ts,
            jitter,
            seed,
            steps,
            input,
            out,
            format,
            policy,
        } => cmd_simulate(
            &system,
            ts,
            &jitter,
            seed,
            steps,
            &input,
            &out,
            format,
            policy.into(),
        ),
        Command::Bode {
            system,
            epsilon,
            case,
            points,
            out,
        } => cmd_bode(&system, epsilon, case.into(), points, &out),
        Command::Pid {
            kp,
            ki,
            kd,
            taud,
            epsilon,
            out,
        } => cmd_pid(kp, ki, kd, taud, epsilon, out.as_deref()),
        Command::Recover { system, ts, out } => cmd_recover(&system, ts, &out),
    }
}

/// --ts wins over the file's "ts"; having neither is an input error.
fn resolve_ts(flag: Option<f64>, from_file: Option<f64>) -> Result<f64> {
    let ts = flag.or(from_file).ok_or_else(|| {
        Error::Parse("no sampling time: pass --ts or put \"ts\" in the system file".to_string())
    })?;
    if ts <= 0.0 || !ts.is_finite() {
        return Err(Error::NonPositiveTimestep { dt: ts });
    }
    Ok(ts)
}

fn parse_input(spec: &str) -> Result<InputSignal> {
    if spec == "step" {
        Ok(InputSignal::Step { amplitude: 1.0 })
    } else if spec == "pulse" {
        Ok(InputSignal::Pulse { amplitude: 1.0 })
    } else if let Some(freq) = spec.strip_prefix("sin:") {
        let omega: f64 = freq
            .parse()
            .map_err(|_| Error::Parse(format!("bad sinusoid frequency '{freq}'")))?;
        if !omega.is_finite() {
            return Err(Error::Parse(format!("bad sinusoid frequency '{freq}'")));
        }
        Ok(InputSignal::Sinusoid {
            amplitude: 1.0,
            omega,
        })
    } else if let Some(path) = spec.strip_prefix("file:") {
        Ok(InputSignal::Samples(io::read_input_samples(Path::new(
            path,
        ))?))
    } else {
        Err(Error::Parse(format!(
            "unknown input '{spec}' (expected step, pulse, sin:<rad/s>, or file:<path>)"
        )))
    }
}

/// A --jitter value is a generator descriptor when it starts with a known
/// model name; anything else is a file path. Explicit step counts must be
/// consistent with a file's length (truncating is fine, inventing samples
/// is not).
fn resolve_jitter(spec: &str, steps: Option<usize>, seed: u64) -> Result<JitterSequence> {
    let kind = spec.split(':').next().unwrap_or("");
    if matches!(kind, "constant" | "uniform" | "gauss") {
        let model: JitterModel = spec.parse()?;
        return jitter::generate(model, steps.unwrap_or(100), seed);
    }
    let seq = io::read_jitter(Path::new(spec))?;
    match steps {
        None => Ok(seq),
        Some(m) if m == seq.len() => Ok(seq),
        Some(m) if m < seq.len() => {
            log::warn!("jitter file holds {} samples; using the first {m}", seq.len());
            JitterSequence::from_parts(
                seq.epsilons()[..m].to_vec(),
                seq.model(),
                seq.seed(),
                seq.bounds(),
            )
        }
        Some(m) => Err(Error::Parse(format!(
            "jitter file holds {} samples but --steps asks for {m}",
            seq.len()
        ))),
    }
}

fn report_sampling(sys: &ContinuousStateSpace, ts: f64) {
    let spec = validate_sampling(sys, ts);
    if spec.omega_max == 0.0 {
        println!("sampling: ts = {ts}, no oscillatory modes, any period is safe");
        return;
    }
    let bound = std::f64::consts::PI / spec.omega_max;
    if !spec.is_compliant() {
        println!(
            "sampling: ts = {ts} exceeds pi/omega_max = {bound:.6}: NON-COMPLIANT \
             (forward results hold; recovering continuous dynamics from this rate will alias)"
        );
    } else if spec.is_boundary_fragile() {
        println!(
            "sampling: ts = {ts} is within 1% of pi/omega_max = {bound:.6}: \
             compliant but fragile under round-off"
        );
    } else {
        println!("sampling: ts = {ts} <= pi/omega_max = {bound:.6}: compliant");
    }
}

fn report_flagged(seq: &JitterSequence, policy: Policy) -> Result<()> {
    let report = jitter::validate(seq, policy)?;
    for (k, e) in &report.flagged {
        log::warn!(
            "epsilon[{k}] = {e} is a full extra period or more; \
             the scaling equivalence still holds but consider a delay model"
        );
    }
    Ok(())
}

fn confirm_written(path: &Path) {
    println!("wrote {}", path.display());
}

fn cmd_discretize(system: &Path, ts_flag: Option<f64>, out: &Path) -> Result<()> {
    let (sys, ts_file) = io::read_system(system)?;
    let ts = resolve_ts(ts_flag, ts_file)?;

    let dsys = c2d(&sys, ts)?;

    report_sampling(&sys, ts);
    io::write_discrete(out, &dsys)?;
    confirm_written(out);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_perceive(
    system: &Path,
    case: JitterCase,
    epsilon: Option<f64>,
    jitter_spec: Option<&str>,
    steps: Option<usize>,
    seed: u64,
    policy: Policy,
    out: &Path,
) -> Result<()> {
    let (sys, ts_file) = io::read_system(system)?;
    let case_name = match case {
        JitterCase::PlantMeasurement => "a",
        JitterCase::ControllerImplementation => "b",
    };

    if let Some(eps) = epsilon {
        // Constant jitter: one scaled system, plus its transfer function
        // when the shape allows one.
        let seq = JitterSequence::from_samples(vec![eps])?;
        let tv = match case {
            JitterCase::PlantMeasurement => perceive_case_a(&sys, &seq)?,
            JitterCase::ControllerImplementation => effective_case_b(&sys, &seq)?,
        };
        let (a, b) = tv.pair(0);
        let scaled =
            ContinuousStateSpace::new(a.clone(), b.clone(), sys.c().clone(), sys.d().clone())?;

        let mut obj = json!({
            "case": case_name,
            "epsilon": eps,
            "system": io::system_to_json(&scaled, ts_file),
        });
        println!(
            "case {case_name}: matrices {} by (1 + epsilon) = {}",
            match case {
                JitterCase::PlantMeasurement => "multiplied",
                JitterCase::ControllerImplementation => "divided",
            },
            1.0 + eps
        );
        if sys.is_siso() {
            let tf = scale_tf(&ss2tf(&sys)?, eps, case)?;
            obj["transfer_function"] = json!({ "num": tf.num(), "den": tf.den() });
            println!("scaled transfer function: {tf}");
        }
        io::write_json(out, &obj)?;
        confirm_written(out);
        return Ok(());
    }

    // Sequence path: a per-sample pair list.
    let spec = jitter_spec.expect("clap enforces one of --epsilon/--jitter");
    let seq = resolve_jitter(spec, steps, seed)?;
    report_flagged(&seq, policy)?;
    let tv = match case {
        JitterCase::PlantMeasurement => perceive_case_a(&sys, &seq)?,
        JitterCase::ControllerImplementation => effective_case_b(&sys, &seq)?,
    };

    let obj = json!({
        "case": case_name,
        "jitter": io::jitter_to_json(&seq),
        "system": io::time_varying_to_json(&tv),
    });
    println!(
        "case {case_name}: {} per-sample pairs from {} jitter",
        tv.len(),
        seq.model().kind()
    );
    io::write_json(out, &obj)?;
    confirm_written(out);
    Ok(())
}

/// csv output goes to <base>.jittered.csv / <base>.nominal.csv so the two
/// trajectories stay separate files with identical layouts.
fn csv_base(out: &Path) -> PathBuf {
    if out.extension().is_some_and(|e| e == "csv") {
        out.with_extension("")
    } else {
        out.to_path_buf()
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    system: &Path,
    ts_flag: Option<f64>,
    jitter_spec: &str,
    seed: u64,
    steps: Option<usize>,
    input_spec: &str,
    out: &Path,
    format: FormatArg,
    policy: Policy,
) -> Result<()> {
    let (sys, ts_file) = io::read_system(system)?;
    let ts = resolve_ts(ts_flag, ts_file)?;
    let input = parse_input(input_spec)?;
    let seq = resolve_jitter(jitter_spec, steps, seed)?;
    report_flagged(&seq, policy)?;
    report_sampling(&sys, ts);

    let x0 = Vector::zeros(sys.n_states());
    let run = equivalence_run(&sys, ts, &seq, &input, &x0)?;

    println!(
        "simulated {} samples at ts = {ts} under {} jitter",
        seq.len(),
        seq.model().kind()
    );
    println!(
        "max relative output error (jittered vs scaled nominal): {:e}",
        run.max_rel_error
    );

    match format {
        FormatArg::Csv => {
            let base = csv_base(out);
            let jit_path = PathBuf::from(format!("{}.jittered.csv", base.display()));
            let nom_path = PathBuf::from(format!("{}.nominal.csv", base.display()));
            io::write_trajectory_csv_file(&jit_path, &run.jittered)?;
            io::write_trajectory_csv_file(&nom_path, &run.nominal)?;
            confirm_written(&jit_path);
            confirm_written(&nom_path);
        }
        FormatArg::Json => {
            let obj = json!({
                "ts": ts,
                "jitter": io::jitter_to_json(&seq),
                "max_rel_error": run.max_rel_error,
                "jittered": io::trajectory_to_json(&run.jittered),
                "nominal": io::trajectory_to_json(&run.nominal),
            });
            io::write_json(out, &obj)?;
            confirm_written(out);
        }
    }
    Ok(())
}

fn cmd_bode(system: &Path, epsilon: f64, case: JitterCase, points: usize, out: &Path) -> Result<()> {
    if points < 2 {
        return Err(Error::Parse(format!(
            "--points must be at least 2, got {points}"
        )));
    }
    let (sys, _) = io::read_system(system)?;
    let tf = ss2tf(&sys)?;
    let scaled = scale_tf(&tf, epsilon, case)?;

    // Three decades centered on the fastest pole; unit center for a pure
    // gain or chain of integrators.
    let rho = sys
        .a()
        .complex_eigenvalues()
        .iter()
        .map(|l| l.norm())
        .fold(0.0_f64, f64::max);
    let center = if rho > 0.0 { rho } else { 1.0 };
    let (lo, hi) = (center * 10f64.powf(-1.5), center * 10f64.powf(1.5));
    let omegas: Vec<f64> = (0..points)
        .map(|i| lo * (hi / lo).powf(i as f64 / (points - 1) as f64))
        .collect();

    let base_resp = freq_response(&tf, &omegas)?;
    let scaled_resp = freq_response(&scaled, &omegas)?;

    let mut text = String::from("omega,mag,phase,mag_scaled,phase_scaled\n");
    for i in 0..points {
        let _ = writeln!(
            text,
            "{},{},{},{},{}",
            io::sig17(omegas[i]),
            io::sig17(base_resp[i].norm()),
            io::sig17(base_resp[i].arg()),
            io::sig17(scaled_resp[i].norm()),
            io::sig17(scaled_resp[i].arg()),
        );
    }
    fs::write(out, text).map_err(|e| Error::Io {
        path: out.display().to_string(),
        message: e.to_string(),
    })?;

    println!("base: {tf}");
    println!("scaled (epsilon = {epsilon}): {scaled}");
    println!("grid: {points} points, {:.6e} .. {:.6e} rad/s", lo, hi);
    confirm_written(out);
    Ok(())
}

fn percent_change(nominal: f64, effective: f64) -> String {
    if nominal == 0.0 {
        return "n/a".to_string();
    }
    format!("{:+.2}%", (effective / nominal - 1.0) * 100.0)
}

fn cmd_pid(kp: f64, ki: f64, kd: f64, taud: f64, epsilon: f64, out: Option<&Path>) -> Result<()> {
    let nominal = PidParams::new(kp, ki, kd, taud)?;
    let effective = pid_under_jitter(&nominal, epsilon)?;

    println!("clock runs (1 + {epsilon}) slow; the loop effectively applies:");
    println!("{:<8} {:>14} {:>14} {:>9}", "param", "nominal", "effective", "change");
    for (name, n, e) in [
        ("Kp", nominal.kp, effective.kp),
        ("Ki", nominal.ki, effective.ki),
        ("Kd", nominal.kd, effective.kd),
        ("tau_d", nominal.tau_d, effective.tau_d),
    ] {
        println!(
            "{name:<8} {n:>14.6} {e:>14.6} {:>9}",
            percent_change(n, e)
        );
    }

    if let Some(path) = out {
        let obj = json!({
            "epsilon": epsilon,
            "nominal":   { "kp": nominal.kp,   "ki": nominal.ki,   "kd": nominal.kd,   "tau_d": nominal.tau_d },
            "effective": { "kp": effective.kp, "ki": effective.ki, "kd": effective.kd, "tau_d": effective.tau_d },
        });
        io::write_json(path, &obj)?;
        confirm_written(path);
    }
    Ok(())
}

fn cmd_recover(system: &Path, ts_flag: Option<f64>, out: &Path) -> Result<()> {
    let dsys = io::read_discrete(system)?;
    let ts = resolve_ts(ts_flag, Some(dsys.dt()))?;

    let (a, b) = recover_perceived_from_data(dsys.a_d(), dsys.b_d(), ts)?;
    let sys = ContinuousStateSpace::new(a, b, dsys.c().clone(), dsys.d().clone())?;

    let eigs = sys.a().complex_eigenvalues();
    let listed: Vec<String> = eigs
        .iter()
        .map(|l| {
            if l.im == 0.0 {
                format!("{:.6}", l.re)
            } else {
                format!("{:.6} {} {:.6}i", l.re, if l.im < 0.0 { "-" } else { "+" }, l.im.abs())
            }
        })
        .collect();
    println!("recovered poles: {}", listed.join(", "));
    report_sampling(&sys, ts);

    io::write_system(out, &sys, Some(ts))?;
    confirm_written(out);
    Ok(())
}
