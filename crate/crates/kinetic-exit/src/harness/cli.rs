//! Command-line driver. Subcommands map one-to-one onto the estimator and
//! QSD entry points; every run resolves its settings (flag > config file >
//! default), digests them, and writes a manifest next to each output file.
//!
//! Exit codes: 0 success, 1 assertion-suite failure or runtime error,
//! 2 usage/config error.

use super::config::Settings;
use super::records::{
    fmt_f64, read_jsonl, write_csv, write_jsonl, write_manifest, ResultRecord, RunManifest,
};
use crate::dynamics::{ProcessKind, SimConfig};
use crate::error::{Error, Result};
use crate::estimators::{
    exit_prob_girsanov, exit_prob_mc, exit_side_right_fraction, girsanov_normalization_check,
    holder_exponent_fit, identity_reflection, identity_sigma_rescale, identity_time_scaling,
    martingale_check, ratio_scan, standard_grid, Estimate,
};
use crate::qsd::{
    conditional_tv_decay, fleming_viot_run, lambda0_regression, qsd_density_estimate, tv_decay_fit,
    FvConfig, HistGrid, Init,
};
use crate::specfun::{
    envelope_h_full, envelope_h_strip, exit_right_first_prob_at_rest, g, ModelParams, PhaseState,
};
use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Parser)]
#[command(name = "kinetic-exit", version, about = "Exit-time statistics for the killed kinetic Langevin process")]
struct Cli {
    /// Flat key=value config file supplying defaults for unset flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug)]
struct ModelArgs {
    /// Model: `ibm` (alpha=beta=gamma=0) or `linear`.
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    paths: Option<u64>,
    #[arg(long)]
    dt: Option<f64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Tabulate a closed-form function over a grid into a CSV file.
    Eval {
        /// One of: g, lachal-right, envelope, envelope-full.
        #[arg(long = "fn")]
        func: String,
        #[arg(long, allow_hyphen_values = true)]
        from: f64,
        #[arg(long, allow_hyphen_values = true)]
        to: f64,
        #[arg(long)]
        step: f64,
        /// Fixed velocity for the envelope slices.
        #[arg(long, allow_hyphen_values = true)]
        p: Option<f64>,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Single-point survival estimate, direct or Girsanov-reweighted.
    ExitProb {
        #[arg(long)]
        q: f64,
        #[arg(long, allow_hyphen_values = true)]
        p: f64,
        #[arg(long)]
        t: f64,
        /// `direct` or `girsanov`.
        #[arg(long)]
        method: Option<String>,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a named verification suite; prints one pass/fail line per check.
    Verify {
        /// One of: identities, closed-form, girsanov, ratios, holder.
        #[arg(long)]
        suite: String,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fleming–Viot run: kill-rate series, lambda0 reconciliation, QSD shape.
    Qsd {
        #[arg(long)]
        particles: Option<u64>,
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long)]
        macro_dt: Option<f64>,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Binned TV distance between two conditioned laws over checkpoints.
    TvDecay {
        #[arg(long, default_value = "0.2")]
        q1: f64,
        #[arg(long, default_value = "0.0", allow_hyphen_values = true)]
        p1: f64,
        #[arg(long, default_value = "0.8")]
        q2: f64,
        #[arg(long, default_value = "0.0", allow_hyphen_values = true)]
        p2: f64,
        /// Comma-separated checkpoint times.
        #[arg(long, default_value = "1,2,3,4,5")]
        checkpoints: String,
        #[arg(long, default_value = "10")]
        bins_q: usize,
        #[arg(long, default_value = "10")]
        bins_p: usize,
        #[arg(long, default_value = "4.0")]
        p_max: f64,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Merge JSONL result files into one summary table.
    Report {
        /// Result files produced by the other subcommands.
        files: Vec<PathBuf>,
    },
}

/// Entry point used by the binary; never panics on bad input.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    init_workers();
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let settings = match load_settings(cli.config.as_deref()) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{e}");
            return 2;
        }
    };
    match dispatch(cli.cmd, settings) {
        Ok(failures) => {
            if failures == 0 {
                0
            } else {
                1
            }
        }
        Err(e @ (Error::Usage(_) | Error::Config(_))) => {
            eprintln!("{e}");
            2
        }
        Err(e) => {
            eprintln!("{e}");
            1
        }
    }
}

fn init_workers() {
    if let Ok(v) = std::env::var("KINETIC_EXIT_WORKERS") {
        if let Ok(n) = v.parse::<usize>() {
            // ignore the error if a global pool already exists
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn load_settings(path: Option<&Path>) -> Result<Settings> {
    match path {
        Some(p) => Settings::load(p),
        None => Ok(Settings::new()),
    }
}

/// Resolve a value: explicit flag, then config key, then default.
macro_rules! resolve {
    ($resolved:expr, $settings:expr, $key:literal, $flag:expr, $default:expr, $getter:ident) => {{
        let v = match $flag {
            Some(x) => x,
            None => $settings.$getter($key)?.unwrap_or($default),
        };
        $resolved.set($key, v);
        v
    }};
}

struct Run {
    seed: u64,
    config: SimConfig,
    kind: ProcessKind,
    resolved: Settings,
}

fn resolve_run(
    settings: &Settings,
    model: &ModelArgs,
    run: &RunArgs,
    default_paths: u64,
    t_horizon: f64,
) -> Result<Run> {
    let mut resolved = Settings::new();
    let seed = resolve!(resolved, settings, "seed", run.seed, 0, get_u64);
    let paths = resolve!(resolved, settings, "paths", run.paths, default_paths, get_u64);
    let dt = resolve!(resolved, settings, "dt", run.dt, 0.01, get_f64);
    let sigma = resolve!(resolved, settings, "sigma", model.sigma, 1.0, get_f64);
    let model_name = match &model.model {
        Some(m) => m.clone(),
        None => settings.get("model").unwrap_or("ibm").to_string(),
    };
    resolved.set("model", &model_name);
    let kind = match model_name.as_str() {
        "ibm" => ProcessKind::Ibm { sigma },
        "linear" => {
            let alpha = resolve!(resolved, settings, "alpha", model.alpha, 0.0, get_f64);
            let beta = resolve!(resolved, settings, "beta", model.beta, 0.0, get_f64);
            let gamma = resolve!(resolved, settings, "gamma", model.gamma, 0.0, get_f64);
            ProcessKind::Linear(ModelParams::new(alpha, beta, gamma, sigma)?)
        }
        other => return Err(Error::Usage(format!("unknown model `{other}` (ibm|linear)"))),
    };
    kind.validate()?;
    let config = SimConfig::new(dt, t_horizon, paths, seed)?;
    Ok(Run { seed, config, kind, resolved })
}

fn record(
    suite: &str,
    op: &str,
    inputs: serde_json::Value,
    est: &Estimate,
    seed: u64,
    digest: u64,
) -> ResultRecord {
    ResultRecord {
        suite: suite.to_string(),
        op: op.to_string(),
        inputs,
        estimate: est.mean,
        stderr: est.std_err,
        ci: (est.ci_lo, est.ci_hi),
        n: est.n_paths,
        seed,
        manifest_digest: format!("{digest:016x}"),
    }
}

fn finish_outputs(
    command: &str,
    digest: u64,
    seed: u64,
    started: Instant,
    out: Option<&Path>,
    records: &[ResultRecord],
) -> Result<()> {
    if let Some(out) = out {
        write_jsonl(out, records)?;
        let manifest = RunManifest {
            command: command.to_string(),
            config_digest: format!("{digest:016x}"),
            seed,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time: started.elapsed().as_secs_f64(),
            outputs: vec![out.display().to_string()],
        };
        write_manifest(&out.with_extension("manifest.json"), &manifest)?;
    }
    Ok(())
}

/// Returns the number of failed assertions (0 ⇒ exit code 0).
fn dispatch(cmd: Cmd, settings: Settings) -> Result<u32> {
    match cmd {
        Cmd::Eval { func, from, to, step, p, model, out } => {
            cmd_eval(&settings, &func, from, to, step, p, &model, &out)
        }
        Cmd::ExitProb { q, p, t, method, model, run, out } => {
            cmd_exit_prob(&settings, q, p, t, method.as_deref(), &model, &run, out.as_deref())
        }
        Cmd::Verify { suite, run, out } => cmd_verify(&settings, &suite, &run, out.as_deref()),
        Cmd::Qsd { particles, t_max, macro_dt, model, run, out } => {
            cmd_qsd(&settings, particles, t_max, macro_dt, &model, &run, out.as_deref())
        }
        Cmd::TvDecay {
            q1, p1, q2, p2, checkpoints, bins_q, bins_p, p_max, model, run, out,
        } => cmd_tv_decay(
            &settings, q1, p1, q2, p2, &checkpoints, bins_q, bins_p, p_max, &model, &run,
            out.as_deref(),
        ),
        Cmd::Report { files } => cmd_report(&files),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_eval(
    settings: &Settings,
    func: &str,
    from: f64,
    to: f64,
    step: f64,
    p: Option<f64>,
    model: &ModelArgs,
    out: &Path,
) -> Result<u32> {
    if !(step > 0.0 && from <= to) {
        return Err(Error::Usage(format!("need from <= to and step > 0, got [{from}, {to}] step {step}")));
    }
    let started = Instant::now();
    let p_fixed = p.unwrap_or(0.0);
    let n = ((to - from) / step).floor() as usize + 1;
    let xs = (0..n).map(|i| from + i as f64 * step);
    let (header, rows): (Vec<&str>, Vec<Vec<String>>) = match func {
        "g" => (
            vec!["z", "g"],
            xs.map(|z| vec![fmt_f64(z), fmt_f64(g(z))]).collect(),
        ),
        "lachal-right" => (
            vec!["q", "p_right"],
            xs.map(|q| Ok(vec![fmt_f64(q), fmt_f64(exit_right_first_prob_at_rest(q)?)]))
                .collect::<Result<_>>()?,
        ),
        "envelope" => (
            vec!["q", "p", "H"],
            xs.map(|q| {
                Ok(vec![fmt_f64(q), fmt_f64(p_fixed), fmt_f64(envelope_h_strip(q, p_fixed)?)])
            })
            .collect::<Result<_>>()?,
        ),
        "envelope-full" => {
            let params = ModelParams::new(
                model.alpha.unwrap_or(0.0),
                model.beta.unwrap_or(0.0),
                model.gamma.unwrap_or(0.0),
                model.sigma.unwrap_or(1.0),
            )?;
            (
                vec!["q", "p", "H_full"],
                xs.map(|q| {
                    Ok(vec![
                        fmt_f64(q),
                        fmt_f64(p_fixed),
                        fmt_f64(envelope_h_full(&params, q, p_fixed)?),
                    ])
                })
                .collect::<Result<_>>()?,
            )
        }
        other => {
            return Err(Error::Usage(format!(
                "unknown function `{other}` (g|lachal-right|envelope|envelope-full)"
            )))
        }
    };
    write_csv(out, &header, &rows)?;
    let mut resolved = settings.clone();
    resolved.set("fn", func);
    resolved.set("from", from);
    resolved.set("to", to);
    resolved.set("step", step);
    let manifest = RunManifest {
        command: "eval".into(),
        config_digest: format!("{:016x}", resolved.digest()),
        seed: 0,
        code_version: env!("CARGO_PKG_VERSION").into(),
        wall_time: started.elapsed().as_secs_f64(),
        outputs: vec![out.display().to_string()],
    };
    write_manifest(&out.with_extension("manifest.json"), &manifest)?;
    println!("wrote {} rows to {}", rows.len(), out.display());
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_exit_prob(
    settings: &Settings,
    q: f64,
    p: f64,
    t: f64,
    method: Option<&str>,
    model: &ModelArgs,
    run: &RunArgs,
    out: Option<&Path>,
) -> Result<u32> {
    let started = Instant::now();
    let mut r = resolve_run(settings, model, run, 100_000, t)?;
    let method = method.unwrap_or("direct");
    r.resolved.set("method", method);
    r.resolved.set("q", q);
    r.resolved.set("p", p);
    r.resolved.set("t", t);
    let digest = r.resolved.digest();
    let start = PhaseState::new(q, p);
    let inputs = serde_json::json!({"q": q, "p": p, "t": t, "method": method});
    let rec = match method {
        "direct" => {
            let est = exit_prob_mc(r.kind, start, t, &r.config)?;
            println!(
                "P(tau > {t}) = {:.6} +- {:.6}  (99% CI [{:.6}, {:.6}], n={})",
                est.mean, est.std_err, est.ci_lo, est.ci_hi, est.n_paths
            );
            record("exit-prob", "survival", inputs, &est, r.seed, digest)
        }
        "girsanov" => {
            let params = match r.kind {
                ProcessKind::Linear(p) => p,
                ProcessKind::Ibm { .. } => {
                    return Err(Error::Usage(
                        "girsanov reweighting needs --model linear".into(),
                    ))
                }
            };
            let gest = exit_prob_girsanov(&params, start, t, &r.config)?;
            println!(
                "P(tau > {t}) = {:.6} +- {:.6}  (ess={:.0}{})",
                gest.estimate.mean,
                gest.estimate.std_err,
                gest.ess,
                if gest.degenerate { ", DEGENERATE" } else { "" }
            );
            record("exit-prob", "survival-girsanov", inputs, &gest.estimate, r.seed, digest)
        }
        other => return Err(Error::Usage(format!("unknown method `{other}` (direct|girsanov)"))),
    };
    finish_outputs("exit-prob", digest, r.seed, started, out, &[rec])?;
    Ok(0)
}

fn check(name: &str, pass: bool, detail: String, failures: &mut u32) {
    if pass {
        println!("pass  {name}: {detail}");
    } else {
        println!("FAIL  {name}: {detail}");
        *failures += 1;
    }
}

fn cmd_verify(settings: &Settings, suite: &str, run: &RunArgs, out: Option<&Path>) -> Result<u32> {
    let started = Instant::now();
    let empty = ModelArgs { model: None, alpha: None, beta: None, gamma: None, sigma: None };
    let r = resolve_run(settings, &empty, run, 200_000, 1.0)?;
    let mut resolved = r.resolved.clone();
    resolved.set("suite", suite);
    let digest = resolved.digest();
    let mut failures = 0u32;
    let mut records = Vec::new();
    let mut push = |op: &str, inputs: serde_json::Value, est: &Estimate| {
        records.push(record("verify", op, inputs, est, r.seed, digest));
    };
    match suite {
        "identities" => {
            let cfg = r.config;
            let checks = [
                identity_time_scaling(1.3, PhaseState::new(0.3, 0.2), 1.0, &cfg)?,
                identity_reflection(PhaseState::new(0.3, 0.5), 1.0, &cfg)?,
                identity_sigma_rescale(1.7, PhaseState::new(0.5, 0.0), 1.0, &cfg)?,
                martingale_check(1.0, PhaseState::new(0.5, 0.0), 1.0, &cfg, false)?,
                martingale_check(1.0, PhaseState::new(0.5, 0.0), 1.0, &cfg, true)?,
            ];
            for c in checks {
                check(
                    &c.name,
                    c.pass,
                    format!("{:.6} vs {:.6} ({:.2} SE)", c.lhs.mean, c.rhs.mean, c.se_distance),
                    &mut failures,
                );
                push(&c.name.clone(), serde_json::json!({"rhs": c.rhs.mean}), &c.lhs);
            }
        }
        "closed-form" => {
            for q in [0.1, 0.3] {
                let mut cfg = r.config;
                cfg.t_horizon = 60.0;
                let est = exit_side_right_fraction(q, &cfg)?;
                let exact = exit_right_first_prob_at_rest(q)?;
                let d = (est.mean - exact).abs() / est.std_err.max(f64::MIN_POSITIVE);
                check(
                    &format!("exit-side q={q}"),
                    d <= 3.0,
                    format!("{:.6} vs exact {:.6} ({:.2} SE)", est.mean, exact, d),
                    &mut failures,
                );
                push("exit-side", serde_json::json!({"q": q, "exact": exact}), &est);
            }
        }
        "girsanov" => {
            for (a, b, c) in [(1.0, 0.5, 0.5), (0.5, 0.0, -0.5), (2.0, -0.3, 1.0)] {
                let params = ModelParams::new(a, b, c, 1.0)?;
                let start = PhaseState::new(0.5, 0.0);
                let direct =
                    exit_prob_mc(ProcessKind::Linear(params), start, 1.0, &r.config)?;
                let rew = exit_prob_girsanov(&params, start, 1.0, &r.config)?;
                let d = direct.combined_se_distance(&rew.estimate);
                check(
                    &format!("girsanov ({a},{b},{c})"),
                    d <= 3.0 && !rew.degenerate,
                    format!("direct {:.5} vs reweighted {:.5} ({:.2} SE)", direct.mean, rew.estimate.mean, d),
                    &mut failures,
                );
                push("girsanov", serde_json::json!({"alpha": a, "beta": b, "gamma": c}), &rew.estimate);
                let norm = girsanov_normalization_check(&params, start, 1.0, &r.config)?;
                let dn = (norm.mean - 1.0).abs() / norm.std_err.max(f64::MIN_POSITIVE);
                check(
                    &format!("E[Z] ({a},{b},{c})"),
                    dn <= 3.0,
                    format!("{:.5} ({:.2} SE from 1)", norm.mean, dn),
                    &mut failures,
                );
                push("normalization", serde_json::json!({"alpha": a, "beta": b, "gamma": c}), &norm);
            }
        }
        "ratios" => {
            let grid = standard_grid(5, 5, 2.0);
            let table = ratio_scan(r.kind, 1.0, &grid, &r.config)?;
            let ok = table.ratio_min > 0.0 && table.ratio_max.is_finite();
            check(
                "ratio extremes",
                ok,
                format!("min {:.4}, max {:.4}", table.ratio_min, table.ratio_max),
                &mut failures,
            );
            for row in &table.rows {
                push(
                    "ratio",
                    serde_json::json!({"q": row.q, "p": row.p, "envelope": row.envelope, "ratio": row.ratio}),
                    &row.survival,
                );
            }
        }
        "holder" => {
            let fit = holder_exponent_fit(1.0, 1.0, &[1e-3, 3e-3, 1e-2, 3e-2, 1e-1], &r.config)?;
            let ok = (fit.slope - 1.0 / 6.0).abs() <= 0.03;
            check(
                "boundary exponent",
                ok,
                format!("slope {:.4} (target 1/6 = 0.1667), r2 {:.4}", fit.slope, fit.r2),
                &mut failures,
            );
        }
        other => {
            return Err(Error::Usage(format!(
                "unknown suite `{other}` (identities|closed-form|girsanov|ratios|holder)"
            )))
        }
    }
    finish_outputs("verify", digest, r.seed, started, out, &records)?;
    println!("suite `{suite}`: {failures} failure(s)");
    Ok(failures)
}

#[allow(clippy::too_many_arguments)]
fn cmd_qsd(
    settings: &Settings,
    particles: Option<u64>,
    t_max: Option<f64>,
    macro_dt: Option<f64>,
    model: &ModelArgs,
    run: &RunArgs,
    out: Option<&Path>,
) -> Result<u32> {
    let started = Instant::now();
    let mut r = resolve_run(settings, model, run, 200_000, 1.0)?;
    let particles = match particles {
        Some(n) => n,
        None => settings.get_u64("particles")?.unwrap_or(2_000),
    } as usize;
    let t_max = match t_max {
        Some(t) => t,
        None => settings.get_f64("t_max")?.unwrap_or(20.0),
    };
    let macro_dt = match macro_dt {
        Some(m) => m,
        None => settings.get_f64("macro_dt")?.unwrap_or(0.1),
    };
    r.resolved.set("particles", particles);
    r.resolved.set("t_max", t_max);
    r.resolved.set("macro_dt", macro_dt);
    let digest = r.resolved.digest();

    let fv = FvConfig::new(particles, t_max, macro_dt, r.config.dt, r.seed)?;
    let init = Init::Point(PhaseState::new(0.5, 0.0));
    let series = fleming_viot_run(r.kind, &init, &fv)?;
    let fv_rate = series.final_quarter_rate();
    println!(
        "Fleming-Viot: kill rate {:.4} over the last quarter (drift {:.1}%)",
        fv_rate,
        100.0 * series.final_quarter_drift()
    );
    let window = (0.25 * t_max, 0.5 * t_max);
    let fit = lambda0_regression(r.kind, PhaseState::new(0.5, 0.0), window, 5, &r.config)?;
    let gap = (fit.lambda0_hat - fv_rate).abs() / fit.lambda0_hat;
    println!(
        "lambda0: regression {:.4} +- {:.4} (r2 {:.4}) vs FV rate {:.4}  [gap {:.1}%]",
        fit.lambda0_hat,
        fit.stderr,
        fit.r2,
        fv_rate,
        100.0 * gap
    );
    let grid = HistGrid::new(8, 8, 4.0)?;
    let shape = qsd_density_estimate(&series, &r.kind, grid, 200)?;
    println!(
        "QSD shape: ratio extremes [{:.3}, {:.3}] over {} bins",
        shape.ratio_min, shape.ratio_max, shape.n_bins_used
    );
    let records = vec![
        record(
            "qsd",
            "lambda0-regression",
            serde_json::json!({"window": window, "r2": fit.r2}),
            &Estimate::from_moments(fit.lambda0_hat, fit.stderr * fit.stderr * r.config.n_paths as f64, r.config.n_paths, 0.99),
            r.seed,
            digest,
        ),
        record(
            "qsd",
            "fv-kill-rate",
            serde_json::json!({"particles": particles, "t_max": t_max, "ratio_min": shape.ratio_min, "ratio_max": shape.ratio_max}),
            &Estimate::from_moments(fv_rate, 0.0, particles as u64, 0.99),
            r.seed,
            digest,
        ),
    ];
    finish_outputs("qsd", digest, r.seed, started, out, &records)?;
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_tv_decay(
    settings: &Settings,
    q1: f64,
    p1: f64,
    q2: f64,
    p2: f64,
    checkpoints: &str,
    bins_q: usize,
    bins_p: usize,
    p_max: f64,
    model: &ModelArgs,
    run: &RunArgs,
    out: Option<&Path>,
) -> Result<u32> {
    let started = Instant::now();
    let ts: Vec<f64> = checkpoints
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Usage(format!("bad checkpoint `{s}`")))
        })
        .collect::<Result<_>>()?;
    let horizon = ts.last().copied().unwrap_or(1.0);
    let mut r = resolve_run(settings, model, run, 500_000, horizon)?;
    r.resolved.set("checkpoints", checkpoints);
    r.resolved.set("bins", format!("{bins_q}x{bins_p}"));
    let digest = r.resolved.digest();
    let grid = HistGrid::new(bins_q, bins_p, p_max)?;
    let points = conditional_tv_decay(
        r.kind,
        &Init::Point(PhaseState::new(q1, p1)),
        &Init::Point(PhaseState::new(q2, p2)),
        &ts,
        grid,
        &r.config,
        1_000,
    )?;
    let decay = tv_decay_fit(&points);
    let mut rows = Vec::new();
    let mut records = Vec::new();
    for pt in &decay.points {
        println!(
            "t = {:>6.2}   TV = {:.5}   noise floor = {:.5}   survivors = {}/{}",
            pt.t, pt.tv, pt.noise_floor, pt.survivors.0, pt.survivors.1
        );
        rows.push(vec![
            fmt_f64(pt.t),
            fmt_f64(pt.tv),
            fmt_f64(pt.noise_floor),
            pt.survivors.0.to_string(),
            pt.survivors.1.to_string(),
        ]);
        records.push(record(
            "tv-decay",
            "tv",
            serde_json::json!({"t": pt.t, "noise_floor": pt.noise_floor}),
            &Estimate::from_moments(pt.tv, 0.0, pt.survivors.0.min(pt.survivors.1), 0.99),
            r.seed,
            digest,
        ));
    }
    println!(
        "log-linear fit: slope {:.4}, r2 {:.4}",
        decay.fit.slope, decay.fit.r2
    );
    if let Some(out) = out {
        let csv_path = out.with_extension("csv");
        write_csv(&csv_path, &["t", "tv", "noise_floor", "survivors_1", "survivors_2"], &rows)?;
        println!("wrote {}", csv_path.display());
    }
    finish_outputs("tv-decay", digest, r.seed, started, out, &records)?;
    Ok(0)
}

fn cmd_report(files: &[PathBuf]) -> Result<u32> {
    if files.is_empty() {
        return Err(Error::Usage("report needs at least one result file".into()));
    }
    let mut by_suite: std::collections::BTreeMap<String, Vec<ResultRecord>> = Default::default();
    for f in files {
        for rec in read_jsonl(f)? {
            let bucket = by_suite.entry(rec.suite.clone()).or_default();
            if let Some(first) = bucket.first() {
                if first.manifest_digest != rec.manifest_digest {
                    return Err(Error::Usage(format!(
                        "refusing to merge suite `{}`: config digests {} and {} conflict",
                        rec.suite, first.manifest_digest, rec.manifest_digest
                    )));
                }
            }
            bucket.push(rec);
        }
    }
    println!(
        "{:<12} {:<24} {:>14} {:>12} {:>26} {:>10}",
        "suite", "op", "estimate", "stderr", "ci(99%)", "n"
    );
    for (suite, recs) in &by_suite {
        for r in recs {
            println!(
                "{:<12} {:<24} {:>14.6} {:>12.6} [{:>11.6}, {:>11.6}] {:>10}",
                suite, r.op, r.estimate, r.stderr, r.ci.0, r.ci.1, r.n
            );
        }
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(cli_main(["kinetic-exit", "bogus-subcommand"]), 2);
        assert_eq!(
            cli_main(["kinetic-exit", "eval", "--fn", "nope", "--from", "0", "--to", "1", "--step", "0.5", "--out", "/tmp/x.csv"]),
            2
        );
    }

    #[test]
    fn eval_writes_csv_and_manifest() {
        let dir = std::env::temp_dir().join("kinetic-exit-test-cli");
        std::fs::create_dir_all(&dir).unwrap();
        let out = dir.join("g.csv");
        let code = cli_main([
            "kinetic-exit", "eval", "--fn", "g", "--from", "-1", "--to", "1", "--step", "0.5",
            "--out", out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        let text = std::fs::read_to_string(&out).unwrap();
        assert!(text.starts_with("z,g\r\n"));
        assert_eq!(text.lines().count(), 6); // header + 5 rows
        assert!(out.with_extension("manifest.json").exists());
    }

    #[test]
    fn exit_prob_runs_are_reproducible() {
        let dir = std::env::temp_dir().join("kinetic-exit-test-cli");
        std::fs::create_dir_all(&dir).unwrap();
        let (a, b) = (dir.join("a.jsonl"), dir.join("b.jsonl"));
        for out in [&a, &b] {
            let code = cli_main([
                "kinetic-exit", "exit-prob", "--q", "0.5", "--p", "0", "--t", "0.5", "--paths",
                "2000", "--seed", "9", "--out", out.to_str().unwrap(),
            ]);
            assert_eq!(code, 0);
        }
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }
}
