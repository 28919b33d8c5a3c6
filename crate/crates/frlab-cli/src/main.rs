//! `frlab`: boundedness checks, closed-form-vs-Monte-Carlo identity
//! verification, probe scaling scans, Schur certificates, duality and
//! reproducing-identity checks, and the distance-bound fit, with
//! reproducible seeds and machine-readable reports.
//!
//! Exit codes: 0 all checks passed, 1 a verification failed, 2 usage or
//! configuration error.

mod output;

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use frlab::closed_forms::Eval;
use frlab::criteria::{check_bounded, sum_condition, Outcome};
use frlab::experiments::{
    choose_st, scaling_scan, verify_distance_bound, verify_duality, verify_identity,
    verify_reproducing, DualityOp, IdentityKind, ProbeSpec,
};
use frlab::mixed_norm::{mixed_norm_separable, Factor, NormMethod, SeparableFn};
use frlab::operators::{apply_s, apply_s_dist, apply_t, apply_t_adjoint, DistParams, Engine};
use frlab::sampler::{calibrate, default_suite};
use frlab::schur::{build_certificate, schur_case, verify_certificate_algebra, verify_certificate_integrals, CertificateError};
use frlab::{
    Complex64, ExponentPair64, FrParams64, ProposalConfig64, Setting64, SiegelPoint64,
    WeightPair64,
};

use output::{csv_document, flatten_rows, fmt_sig12, json_document, RunMeta};

const DEFAULT_SEED: u64 = 42;
const DEFAULT_BUDGET: u64 = 1_000_000;
const SEED_ENV: &str = "FRLAB_SEED";

#[derive(Parser)]
#[command(name = "frlab", version, about = "Forelli-Rudin operator laboratory on the Siegel upper half-space")]
struct Cli {
    /// Flat `key = value` configuration file; flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// RNG seed (default: the FRLAB_SEED environment variable, then 42).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte-Carlo sample budget.
    #[arg(long, global = true)]
    budget: Option<u64>,
    /// Dimension of the half-space.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Output format: json (stdout) or csv.
    #[arg(long, global = true)]
    format: Option<String>,
    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct SettingOpts {
    /// Source exponents, e.g. `2,2` (entries in [1, inf], `inf` allowed).
    #[arg(long)]
    p: Option<String>,
    /// Target exponents.
    #[arg(long)]
    q: Option<String>,
    /// Source weights, each > -1.
    #[arg(long)]
    alpha: Option<String>,
    /// Target weights.
    #[arg(long)]
    beta: Option<String>,
}

#[derive(Args, Default)]
struct ParamOpts {
    /// Prefactor powers, e.g. `0,0`.
    #[arg(long)]
    a: Option<String>,
    /// Source-height powers.
    #[arg(long)]
    b: Option<String>,
    /// Kernel powers.
    #[arg(long)]
    c: Option<String>,
}

#[derive(Args, Default)]
struct ProbeOpts {
    /// Probe kernel power.
    #[arg(long)]
    s: Option<String>,
    /// Probe height power.
    #[arg(long)]
    t: Option<String>,
    /// First-slot anchor height.
    #[arg(long)]
    theta: Option<String>,
    /// Second-slot anchor height.
    #[arg(long)]
    delta: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Boundedness verdict for a parameter set.
    Check {
        #[command(flatten)]
        setting: SettingOpts,
        #[command(flatten)]
        params: ParamOpts,
    },
    /// Monte Carlo against the closed forms on the default grids.
    Identity {
        /// `key` (one-kernel) or `pair` (two-kernel).
        #[arg(long)]
        kind: Option<String>,
    },
    /// Sampler self-calibration on the default suite.
    Calibrate,
    /// Weighted mixed norm of the probe function.
    Norm {
        #[command(flatten)]
        setting: SettingOpts,
        #[command(flatten)]
        probe: ProbeOpts,
        /// `closed` or `mc`.
        #[arg(long)]
        method: Option<String>,
    },
    /// Apply an operator to the probe at a point.
    Apply {
        /// `t`, `s`, `t-adjoint`, or `s-dist`.
        #[arg(long)]
        op: Option<String>,
        #[command(flatten)]
        setting: SettingOpts,
        #[command(flatten)]
        params: ParamOpts,
        #[command(flatten)]
        probe: ProbeOpts,
        /// `closed` or `mc`.
        #[arg(long)]
        engine: Option<String>,
        /// Evaluation point, coordinates `re,im` separated by `;`.
        #[arg(long)]
        z: Option<String>,
        /// Second evaluation point.
        #[arg(long)]
        w: Option<String>,
        /// Distance powers for `s-dist`.
        #[arg(long)]
        d: Option<String>,
        /// Shift size for `s-dist`.
        #[arg(long)]
        eps: Option<String>,
    },
    /// Probe scaling scan with fitted log-log slopes.
    Scan {
        #[command(flatten)]
        setting: SettingOpts,
        #[command(flatten)]
        params: ParamOpts,
        #[command(flatten)]
        probe: ProbeOpts,
        /// Smallest grid exponent (anchors are powers of two).
        #[arg(long, allow_hyphen_values = true)]
        grid_min_exp: Option<String>,
        /// Largest grid exponent.
        #[arg(long, allow_hyphen_values = true)]
        grid_max_exp: Option<String>,
    },
    /// Build and verify a Schur certificate.
    Schur {
        #[command(flatten)]
        setting: SettingOpts,
        #[command(flatten)]
        params: ParamOpts,
        /// Sample points for the integral ratio checks.
        #[arg(long)]
        points: Option<String>,
        /// Sampled pairs for the supremum-side checks.
        #[arg(long)]
        pair_budget: Option<String>,
    },
    /// Adjoint identity check by independent Monte-Carlo runs.
    Duality {
        #[command(flatten)]
        setting: SettingOpts,
        #[command(flatten)]
        params: ParamOpts,
        #[command(flatten)]
        probe: ProbeOpts,
        /// `t` (holomorphic kernels) or `s` (modulus kernels).
        #[arg(long)]
        op: Option<String>,
        /// Second probe kernel power.
        #[arg(long)]
        s2: Option<String>,
        /// Second probe height power.
        #[arg(long)]
        t2: Option<String>,
        /// Second probe anchors.
        #[arg(long)]
        theta2: Option<String>,
        #[arg(long)]
        delta2: Option<String>,
    },
    /// Reproducing identity on the anchored kernel family.
    Reproduce {
        /// Reproducing weights, e.g. `0,0`.
        #[arg(long)]
        gamma: Option<String>,
        /// First-slot kernel power of the test kernel.
        #[arg(long)]
        s1: Option<String>,
        /// Second-slot kernel power (defaults to s1).
        #[arg(long)]
        s2: Option<String>,
        #[arg(long)]
        theta: Option<String>,
        #[arg(long)]
        delta: Option<String>,
        #[arg(long)]
        z: Option<String>,
        #[arg(long)]
        w: Option<String>,
    },
    /// Distance log-bound fit over sampled pairs.
    Distance {
        /// Comma-separated exponents, e.g. `0.1,0.5`.
        #[arg(long)]
        eps: Option<String>,
        /// Sampled pairs per fit.
        #[arg(long)]
        pairs: Option<String>,
    },
}

#[derive(Debug)]
struct CliError(String);

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

impl<E: std::error::Error> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError(e.to_string())
    }
}

/// Flag / config-file / default resolution. Every resolved value is
/// recorded so the report can embed the fully-resolved configuration.
struct Ctx {
    file: toml::Table,
    resolved: BTreeMap<String, String>,
}

impl Ctx {
    fn load(path: &Option<PathBuf>) -> Result<Self, CliError> {
        let file = match path {
            None => toml::Table::new(),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError(format!("cannot read config {}: {e}", p.display())))?;
                text.parse::<toml::Table>()
                    .map_err(|e| CliError(format!("invalid config {}: {e}", p.display())))?
            }
        };
        Ok(Self { file, resolved: BTreeMap::new() })
    }

    fn file_value(&self, key: &str) -> Option<String> {
        self.file.get(key).map(|v| match v {
            toml::Value::String(s) => s.clone(),
            other => other.to_string(),
        })
    }

    fn optional(&mut self, flag: &Option<String>, key: &str) -> Option<String> {
        let value = flag.clone().or_else(|| self.file_value(key))?;
        self.resolved.insert(key.to_string(), value.clone());
        Some(value)
    }

    fn with_default(&mut self, flag: &Option<String>, key: &str, default: &str) -> String {
        let value = flag
            .clone()
            .or_else(|| self.file_value(key))
            .unwrap_or_else(|| default.to_string());
        self.resolved.insert(key.to_string(), value.clone());
        value
    }

    fn required(&mut self, flag: &Option<String>, key: &str) -> Result<String, CliError> {
        self.optional(flag, key)
            .ok_or_else(|| CliError(format!("missing required parameter --{key}")))
    }

    fn record(&mut self, key: &str, value: impl ToString) {
        self.resolved.insert(key.to_string(), value.to_string());
    }
}

fn parse_extended(s: &str) -> Result<f64, CliError> {
    let trimmed = s.trim();
    if trimmed.eq_ignore_ascii_case("inf") {
        return Ok(f64::INFINITY);
    }
    trimmed
        .parse::<f64>()
        .map_err(|_| CliError(format!("cannot parse number `{trimmed}`")))
}

fn parse_pair(s: &str) -> Result<[f64; 2], CliError> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(CliError(format!("expected a comma pair, got `{s}`")));
    }
    Ok([parse_extended(parts[0])?, parse_extended(parts[1])?])
}

fn parse_list(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',').map(parse_extended).collect()
}

/// Renders a point back into the flag syntax, for the resolved-config echo.
fn format_point(z: &SiegelPoint64) -> String {
    let mut parts: Vec<String> = z
        .zprime()
        .iter()
        .map(|c| format!("{},{}", c.re, c.im))
        .collect();
    parts.push(format!("{},{}", z.zn().re, z.zn().im));
    parts.join(";")
}

fn parse_point(s: &str, n: usize) -> Result<SiegelPoint64, CliError> {
    let coords: Vec<[f64; 2]> = s
        .split(';')
        .map(parse_pair)
        .collect::<Result<_, _>>()?;
    if coords.len() != n {
        return Err(CliError(format!(
            "point `{s}` has {} coordinates, expected n = {n}",
            coords.len()
        )));
    }
    let zn = coords[n - 1];
    let zprime = coords[..n - 1]
        .iter()
        .map(|c| Complex64::new(c[0], c[1]))
        .collect();
    Ok(SiegelPoint64::new(zprime, Complex64::new(zn[0], zn[1])))
}

fn build_setting(ctx: &mut Ctx, n: usize, opts: &SettingOpts) -> Result<Setting64, CliError> {
    let p = parse_pair(&ctx.required(&opts.p, "p")?)?;
    let q = parse_pair(&ctx.required(&opts.q, "q")?)?;
    let alpha = parse_pair(&ctx.required(&opts.alpha, "alpha")?)?;
    let beta = parse_pair(&ctx.required(&opts.beta, "beta")?)?;
    Ok(Setting64::new(
        n,
        ExponentPair64::new(p[0], p[1])?,
        ExponentPair64::new(q[0], q[1])?,
        WeightPair64::new(alpha[0], alpha[1])?,
        WeightPair64::new(beta[0], beta[1])?,
    )?)
}

fn build_params(ctx: &mut Ctx, opts: &ParamOpts) -> Result<FrParams64, CliError> {
    let a = parse_pair(&ctx.required(&opts.a, "a")?)?;
    let b = parse_pair(&ctx.required(&opts.b, "b")?)?;
    let c = parse_pair(&ctx.required(&opts.c, "c")?)?;
    Ok(FrParams64::new(a, b, c))
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let mut ctx = Ctx::load(&cli.config)?;

    let seed_flag = cli.seed.map(|v| v.to_string());
    let env_seed = std::env::var(SEED_ENV).ok();
    let seed: u64 = seed_flag
        .or_else(|| ctx.file_value("seed"))
        .or(env_seed)
        .unwrap_or_else(|| DEFAULT_SEED.to_string())
        .parse()
        .map_err(|_| CliError("seed must be a 64-bit unsigned integer".into()))?;
    ctx.record("seed", seed);

    let budget: u64 = cli
        .budget
        .map(|v| v.to_string())
        .or_else(|| ctx.file_value("budget"))
        .unwrap_or_else(|| DEFAULT_BUDGET.to_string())
        .parse()
        .map_err(|_| CliError("budget must be a positive integer".into()))?;
    ctx.record("budget", budget);

    let n: usize = cli
        .n
        .map(|v| v.to_string())
        .or_else(|| ctx.file_value("n"))
        .unwrap_or_else(|| "1".to_string())
        .parse()
        .map_err(|_| CliError("n must be a positive integer".into()))?;
    if n == 0 {
        return Err(CliError("n must be at least 1".into()));
    }
    ctx.record("n", n);

    let format = cli
        .format
        .clone()
        .or_else(|| ctx.file_value("format"))
        .unwrap_or_else(|| "json".to_string());
    if format != "json" && format != "csv" {
        return Err(CliError(format!("unknown format `{format}`")));
    }
    ctx.record("format", &format);

    let config = ProposalConfig64::default();
    let (name, report, pass, table) = dispatch(&cli.command, &mut ctx, n, budget, seed, &config)?;

    let meta = RunMeta {
        command: name.to_string(),
        seed,
        budget,
        config: ctx.resolved.clone(),
    };
    let text = if format == "json" {
        json_document(&meta, report, pass)
    } else {
        let (header, rows) = table;
        csv_document(&meta, &header.iter().map(|s| s.as_str()).collect::<Vec<_>>(), &rows)
    };
    match &cli.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(if pass { 0 } else { 1 })
}

type Table = (Vec<String>, Vec<Vec<String>>);

fn kv_table(report: &Value) -> Table {
    (
        vec!["key".to_string(), "value".to_string()],
        flatten_rows(report),
    )
}

#[allow(clippy::too_many_lines)]
fn dispatch(
    command: &Command,
    ctx: &mut Ctx,
    n: usize,
    budget: u64,
    seed: u64,
    config: &ProposalConfig64,
) -> Result<(&'static str, Value, bool, Table), CliError> {
    match command {
        Command::Check { setting, params } => {
            let setting = build_setting(ctx, n, setting)?;
            let params = build_params(ctx, params)?;
            let verdict = check_bounded(&setting, &params);
            let sum = sum_condition(&setting, &params);
            let pass = matches!(verdict.outcome, Outcome::Bounded | Outcome::BoundaryEquality);
            let report = json!({
                "verdict": serde_json::to_value(&verdict)?,
                "sum_condition": sum.map(|s| serde_json::to_value(s).unwrap()),
            });
            let header = vec![
                "name".into(), "relation".into(), "lhs".into(), "rhs".into(),
                "margin".into(), "pass".into(),
            ];
            let rows = verdict
                .conditions
                .iter()
                .map(|c| {
                    vec![
                        c.name.clone(),
                        format!("{:?}", c.relation),
                        fmt_sig12(c.lhs),
                        fmt_sig12(c.rhs),
                        fmt_sig12(c.margin),
                        c.pass.to_string(),
                    ]
                })
                .collect();
            Ok(("check", report, pass, (header, rows)))
        }
        Command::Identity { kind } => {
            let kind_str = ctx.with_default(kind, "kind", "key");
            let kind = match kind_str.as_str() {
                "key" => IdentityKind::Key,
                "pair" => IdentityKind::Pair,
                other => return Err(CliError(format!("unknown identity kind `{other}`"))),
            };
            let report = verify_identity::<f64>(kind, n, config, budget, seed)?;
            let pass = report.pass;
            let header = vec![
                "r".into(), "s".into(), "t".into(), "base_point".into(),
                "mc_re".into(), "mc_im".into(), "mc_stderr".into(),
                "oracle_re".into(), "oracle_im".into(),
                "z_score".into(), "rel_err".into(), "arg_err".into(), "pass".into(),
            ];
            let rows = report
                .rows
                .iter()
                .map(|r| {
                    vec![
                        r.r.map(fmt_sig12).unwrap_or_default(),
                        fmt_sig12(r.s),
                        fmt_sig12(r.t),
                        r.base_point.clone(),
                        fmt_sig12(r.mc_value.re),
                        fmt_sig12(r.mc_value.im),
                        fmt_sig12(r.mc_stderr),
                        fmt_sig12(r.oracle.re),
                        fmt_sig12(r.oracle.im),
                        fmt_sig12(r.z_score),
                        fmt_sig12(r.rel_err),
                        r.arg_err.map(fmt_sig12).unwrap_or_default(),
                        r.pass.to_string(),
                    ]
                })
                .collect();
            Ok(("identity", serde_json::to_value(&report)?, pass, (header, rows)))
        }
        Command::Calibrate => {
            let report = calibrate(n, config, &default_suite::<f64>(n), budget, seed)?;
            let pass = report.pass;
            let header = vec![
                "s".into(), "t".into(), "height".into(), "mc_value".into(),
                "mc_stderr".into(), "oracle".into(), "z_score".into(),
                "rel_err".into(), "pass".into(),
            ];
            let rows = report
                .rows
                .iter()
                .map(|r| {
                    vec![
                        fmt_sig12(r.s),
                        fmt_sig12(r.t),
                        fmt_sig12(r.height),
                        fmt_sig12(r.mc_value),
                        fmt_sig12(r.mc_stderr),
                        fmt_sig12(r.oracle),
                        fmt_sig12(r.z_score),
                        fmt_sig12(r.rel_err),
                        r.pass.to_string(),
                    ]
                })
                .collect();
            Ok(("calibrate", serde_json::to_value(&report)?, pass, (header, rows)))
        }
        Command::Norm { setting, probe, method } => {
            let p = parse_pair(&ctx.required(&setting.p, "p")?)?;
            let alpha = parse_pair(&ctx.required(&setting.alpha, "alpha")?)?;
            let p = ExponentPair64::new(p[0], p[1])?;
            let alpha = WeightPair64::new(alpha[0], alpha[1])?;
            let s: f64 = parse_extended(&ctx.required(&probe.s, "s")?)?;
            let t: f64 = parse_extended(&ctx.required(&probe.t, "t")?)?;
            let theta: f64 = parse_extended(&ctx.with_default(&probe.theta, "theta", "1"))?;
            let delta: f64 = parse_extended(&ctx.with_default(&probe.delta, "delta", "1"))?;
            let method = match ctx.with_default(method, "method", "closed").as_str() {
                "closed" => NormMethod::Closed,
                "mc" => NormMethod::Mc,
                other => return Err(CliError(format!("unknown norm method `{other}`"))),
            };
            let f = SeparableFn::probe(s, t, theta, delta);
            let norm = mixed_norm_separable(&f, n, &p, &alpha, method, config, budget, seed)?;
            let mut report = match &norm {
                Eval::Value(v) => json!({ "norm": v }),
                Eval::Divergent(d) => json!({ "divergent": serde_json::to_value(d)? }),
            };
            if method == NormMethod::Mc && (p.at(0).is_infinite() || p.at(1).is_infinite()) {
                report["note"] = json!(
                    "infinite-exponent factors report a refined lower-bound estimate \
                     of the essential supremum"
                );
            }
            let table = kv_table(&report);
            Ok(("norm", report, true, table))
        }
        Command::Apply { op, setting, params, probe, engine, z, w, d, eps } => {
            let op_str = ctx.with_default(op, "op", "t");
            let params = build_params(ctx, params)?;
            let s: f64 = parse_extended(&ctx.required(&probe.s, "s")?)?;
            let t: f64 = parse_extended(&ctx.required(&probe.t, "t")?)?;
            let theta: f64 = parse_extended(&ctx.with_default(&probe.theta, "theta", "1"))?;
            let delta: f64 = parse_extended(&ctx.with_default(&probe.delta, "delta", "1"))?;
            let z = match ctx.optional(z, "z") {
                Some(text) => parse_point(&text, n)?,
                None => {
                    let point = SiegelPoint64::axis(n, 1.0);
                    ctx.record("z", format_point(&point));
                    point
                }
            };
            let w = match ctx.optional(w, "w") {
                Some(text) => parse_point(&text, n)?,
                None => {
                    let point = SiegelPoint64::axis(n, 1.0);
                    ctx.record("w", format_point(&point));
                    point
                }
            };
            let engine = match ctx.with_default(engine, "engine", "closed").as_str() {
                "closed" => Engine::Closed,
                "mc" => Engine::Mc { budget, seed },
                other => return Err(CliError(format!("unknown engine `{other}`"))),
            };
            let holomorphic = SeparableFn::probe(s, t, theta, delta);
            let modulus = SeparableFn::new(
                Factor::PowerKernel { t, s, anchor: theta, modulus: true },
                Factor::PowerKernel { t, s, anchor: delta, modulus: true },
            );
            let outcome = match op_str.as_str() {
                "t" => apply_t(&params, &holomorphic, &z, &w, engine, config)?,
                "s" => apply_s(&params, &modulus, &z, &w, engine, config)?,
                "t-adjoint" => {
                    let setting = build_setting(ctx, n, setting)?;
                    apply_t_adjoint(&setting, &params, &holomorphic, &z, &w, engine, config)?
                }
                "s-dist" => {
                    let d = parse_pair(&ctx.required(d, "d")?)?;
                    let eps: f64 = parse_extended(&ctx.required(eps, "eps")?)?;
                    let dist = DistParams::new(params, d, eps);
                    let est = apply_s_dist(&dist, &modulus, &z, &w, config, budget, seed)?;
                    let report = json!({
                        "value": est.value,
                        "stderr": est.stderr,
                        "n_samples": est.n_samples,
                    });
                    let table = kv_table(&report);
                    return Ok(("apply", report, true, table));
                }
                other => return Err(CliError(format!("unknown operator `{other}`"))),
            };
            let report = match outcome {
                Eval::Value(v) => json!({
                    "value": v.value,
                    "stderr": v.stderr,
                }),
                Eval::Divergent(d) => json!({ "divergent": serde_json::to_value(d)? }),
            };
            let table = kv_table(&report);
            Ok(("apply", report, true, table))
        }
        Command::Scan { setting, params, probe, grid_min_exp, grid_max_exp } => {
            let setting = build_setting(ctx, n, setting)?;
            let params = build_params(ctx, params)?;
            let (auto_s, auto_t) = choose_st(&setting, &params);
            let s: f64 = match ctx.optional(&probe.s, "s") {
                Some(v) => parse_extended(&v)?,
                None => {
                    ctx.record("s", auto_s);
                    auto_s
                }
            };
            let t: f64 = match ctx.optional(&probe.t, "t") {
                Some(v) => parse_extended(&v)?,
                None => {
                    ctx.record("t", auto_t);
                    auto_t
                }
            };
            let min_exp: i32 = ctx
                .with_default(grid_min_exp, "grid-min-exp", "-6")
                .parse()
                .map_err(|_| CliError("grid-min-exp must be an integer".into()))?;
            let max_exp: i32 = ctx
                .with_default(grid_max_exp, "grid-max-exp", "6")
                .parse()
                .map_err(|_| CliError("grid-max-exp must be an integer".into()))?;
            if min_exp >= max_exp {
                return Err(CliError("grid-min-exp must be below grid-max-exp".into()));
            }
            let grid: Vec<f64> = (min_exp..=max_exp).map(|k| 2.0f64.powi(k)).collect();
            let result = match scaling_scan(&setting, &params, s, t, &grid, &grid) {
                Eval::Value(v) => v,
                Eval::Divergent(d) => {
                    return Err(CliError(format!("scan diverges: {d}")));
                }
            };
            let tol = 1e-9;
            let pass = [&result.theta_axis, &result.delta_axis].iter().all(|axis| {
                (axis.f.slope - axis.f.analytic).abs() <= tol
                    && (axis.tf.slope - axis.tf.analytic).abs() <= tol
                    && (axis.ratio.slope - axis.ratio.analytic).abs() <= tol
            });
            let header = vec![
                "theta".into(), "delta".into(), "f_norm".into(), "Tf_norm".into(), "ratio".into(),
            ];
            let rows = result
                .rows
                .iter()
                .map(|r| {
                    vec![
                        fmt_sig12(r.theta),
                        fmt_sig12(r.delta),
                        fmt_sig12(r.f_norm),
                        fmt_sig12(r.tf_norm),
                        fmt_sig12(r.ratio),
                    ]
                })
                .collect();
            Ok(("scan", serde_json::to_value(&result)?, pass, (header, rows)))
        }
        Command::Schur { setting, params, points, pair_budget } => {
            let setting = build_setting(ctx, n, setting)?;
            let params = build_params(ctx, params)?;
            let points: usize = ctx
                .with_default(points, "points", "20")
                .parse()
                .map_err(|_| CliError("points must be a positive integer".into()))?;
            let pair_budget: usize = ctx
                .with_default(pair_budget, "pair-budget", "1000")
                .parse()
                .map_err(|_| CliError("pair-budget must be a positive integer".into()))?;
            let case = schur_case(&setting)
                .ok_or_else(|| CliError("no certificate for infinite exponents".into()))?;
            match build_certificate(&setting, &params, case) {
                Err(CertificateError::UnsupportedCase(msg)) => Err(CliError(msg)),
                Err(e @ (CertificateError::NotBounded(_) | CertificateError::Infeasible(_))) => {
                    let report = json!({ "error": e.to_string() });
                    let table = kv_table(&report);
                    Ok(("schur", report, false, table))
                }
                Ok(cert) => {
                    let algebra = verify_certificate_algebra(&cert, &setting, &params);
                    let integrals =
                        verify_certificate_integrals(&cert, &setting, &params, points, pair_budget, seed)
                            .map_err(|e| CliError(e.to_string()))?;
                    let pass = algebra.pass && integrals.pass;
                    let report = json!({
                        "certificate": serde_json::to_value(&cert)?,
                        "algebra": serde_json::to_value(&algebra)?,
                        "integrals": serde_json::to_value(&integrals)?,
                    });
                    let table = kv_table(&report);
                    Ok(("schur", report, pass, table))
                }
            }
        }
        Command::Duality { setting, params, probe, op, s2, t2, theta2, delta2 } => {
            let setting = build_setting(ctx, n, setting)?;
            let params = build_params(ctx, params)?;
            let (auto_s, auto_t) = choose_st(&setting, &params);
            let fs: f64 = match ctx.optional(&probe.s, "s") {
                Some(v) => parse_extended(&v)?,
                None => { ctx.record("s", auto_s); auto_s }
            };
            let ft: f64 = match ctx.optional(&probe.t, "t") {
                Some(v) => parse_extended(&v)?,
                None => { ctx.record("t", auto_t); auto_t }
            };
            let f = ProbeSpec {
                s: fs,
                t: ft,
                theta: parse_extended(&ctx.with_default(&probe.theta, "theta", "1"))?,
                delta: parse_extended(&ctx.with_default(&probe.delta, "delta", "1"))?,
            };
            let g = ProbeSpec {
                s: match ctx.optional(s2, "s2") {
                    Some(v) => parse_extended(&v)?,
                    None => { ctx.record("s2", fs); fs }
                },
                t: match ctx.optional(t2, "t2") {
                    Some(v) => parse_extended(&v)?,
                    None => { ctx.record("t2", ft); ft }
                },
                theta: parse_extended(&ctx.with_default(theta2, "theta2", "1.3"))?,
                delta: parse_extended(&ctx.with_default(delta2, "delta2", "0.7"))?,
            };
            let op = match ctx.with_default(op, "op", "t").as_str() {
                "t" => DualityOp::HolomorphicKernel,
                "s" => DualityOp::ModulusKernel,
                other => return Err(CliError(format!("unknown duality operator `{other}`"))),
            };
            let report = verify_duality(&setting, &params, f, g, op, config, budget, seed)
                .map_err(|e| CliError(e.to_string()))?;
            let pass = report.pass;
            let value = serde_json::to_value(&report)?;
            let table = kv_table(&value);
            Ok(("duality", value, pass, table))
        }
        Command::Reproduce { gamma, s1, s2, theta, delta, z, w } => {
            let gamma = parse_pair(&ctx.with_default(gamma, "gamma", "0,0"))?;
            let s1: f64 = parse_extended(&ctx.with_default(s1, "s1", "2"))?;
            let s2: f64 = match ctx.optional(s2, "s2") {
                Some(v) => parse_extended(&v)?,
                None => { ctx.record("s2", s1); s1 }
            };
            let theta: f64 = parse_extended(&ctx.with_default(theta, "theta", "1"))?;
            let delta: f64 = parse_extended(&ctx.with_default(delta, "delta", "1.4"))?;
            let z = match ctx.optional(z, "z") {
                Some(text) => parse_point(&text, n)?,
                None => {
                    let point = SiegelPoint64::axis(n, 1.3);
                    ctx.record("z", format_point(&point));
                    point
                }
            };
            let w = match ctx.optional(w, "w") {
                Some(text) => parse_point(&text, n)?,
                None => {
                    let point = SiegelPoint64::axis(n, 0.8);
                    ctx.record("w", format_point(&point));
                    point
                }
            };
            if gamma[0] <= -1.0 || gamma[1] <= -1.0 {
                return Err(CliError("gamma entries must exceed -1".into()));
            }
            match verify_reproducing(n, gamma, [s1, s2], theta, delta, &z, &w)
                .map_err(|e| CliError(e.to_string()))?
            {
                Eval::Divergent(d) => Err(CliError(format!("reproducing kernel diverges: {d}"))),
                Eval::Value(report) => {
                    let pass = report.pass;
                    let value = serde_json::to_value(&report)?;
                    let table = kv_table(&value);
                    Ok(("reproduce", value, pass, table))
                }
            }
        }
        Command::Distance { eps, pairs } => {
            let eps = parse_list(&ctx.with_default(eps, "eps", "0.1,0.5"))?;
            let pairs: usize = ctx
                .with_default(pairs, "pairs", "100000")
                .parse()
                .map_err(|_| CliError("pairs must be a positive integer".into()))?;
            let report = verify_distance_bound::<f64>(n, &eps, pairs, config, seed);
            let pass = report.pass;
            let header = vec![
                "eps".into(), "c_fit".into(), "c_fit_doubled".into(), "stable".into(),
            ];
            let rows = report
                .per_eps
                .iter()
                .map(|e| {
                    vec![
                        fmt_sig12(e.eps),
                        fmt_sig12(e.c_fit),
                        fmt_sig12(e.c_fit_doubled),
                        e.stable.to_string(),
                    ]
                })
                .collect();
            Ok(("distance", serde_json::to_value(&report)?, pass, (header, rows)))
        }
    }
}
