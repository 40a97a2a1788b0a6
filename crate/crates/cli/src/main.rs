//! `urp`: payload allocation, parameter sweeps, simulation and validation.
//!
//! Exit codes: 0 success, 1 a validation check failed, 2 some requested
//! allocation is infeasible, 64 usage error, 65 invalid configuration or
//! input, 70 internal numerical failure.

mod args;

use args::*;
use clap::Parser;
use std::fs;
use std::io::Write;
use std::process::ExitCode;
use urp_core::sir_model::PathLosses;
use urp_core::{
    allocate, Axis, LinkConfig, Method, MonteCarloOptions, Preset, Scheme, Semantics, SimSpec, SirDistribution,
    SweepSpec, Table, TopologyFile,
};

const EXIT_VALIDATION_FAILED: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_CONFIG: u8 = 65;
const EXIT_SOFTWARE: u8 = 70;

#[derive(Debug)]
enum CliError {
    Usage(String),
    Core(urp_core::Error),
}

impl From<urp_core::Error> for CliError {
    fn from(e: urp_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(e.into())
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use urp_core::Error as E;
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(E::NonConvergence { .. } | E::BracketGrowth { .. } | E::InvalidBracket { .. }) => {
                EXIT_SOFTWARE
            }
            CliError::Core(_) => EXIT_CONFIG,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.command {
        Command::Rate(a) => cmd_rate(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Validate(a) => cmd_validate(&a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("urp: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn scheme_of(s: SchemeArg) -> Scheme {
    match s {
        SchemeArg::Sc => Scheme::Sc,
        SchemeArg::Mrc => Scheme::Mrc,
    }
}

/// Topology file (when given) and the distribution it induces.
fn resolve_topology(t: &TopologyArgs) -> CliResult<(SirDistribution, Option<TopologyFile>)> {
    match (&t.topology, t.beta, t.eta) {
        (Some(path), _, _) => {
            let file = TopologyFile::load(path)?;
            Ok((file.sir_distribution()?, Some(file)))
        }
        (None, Some(beta), Some(eta)) => Ok((SirDistribution::from_params(eta, beta)?, None)),
        _ => Err(CliError::Usage("give --topology PATH or both --beta and --eta".into())),
    }
}

fn require<T: Copy>(v: Option<T>, flag: &str) -> CliResult<T> {
    v.ok_or_else(|| CliError::Usage(format!("--{flag} is required")))
}

/// The swept field may be omitted; its placeholder is overwritten per row.
fn pick<T: Copy>(axis: Axis, v: Option<T>, this: Axis, flag: &str, placeholder: T) -> CliResult<T> {
    if axis == this {
        Ok(v.unwrap_or(placeholder))
    } else {
        require(v, flag)
    }
}

fn method_for(scheme: Scheme, m: MethodArg) -> CliResult<Method> {
    Ok(match (scheme, m) {
        (Scheme::Sc, MethodArg::Exact) => Method::ScExact,
        (Scheme::Sc, MethodArg::Approx) => Method::ScApprox,
        (Scheme::Sc, MethodArg::Fb) => Method::FbSc,
        (Scheme::Mrc, MethodArg::Approx | MethodArg::Numeric) => Method::MrcApproxNumeric,
        (Scheme::Mrc, MethodArg::Closed) => Method::MrcApproxClosed,
        (Scheme::Mrc, MethodArg::Fb) => Method::FbMrc,
        (scheme, m) => {
            return Err(CliError::Core(urp_core::Error::InvalidConfig(format!(
                "method `{}` is not available for {scheme}",
                format!("{m:?}").to_lowercase()
            ))))
        }
    })
}

fn resolve_methods(scheme: Scheme, requested: &[MethodArg], dist: &SirDistribution) -> CliResult<Vec<Method>> {
    if requested.is_empty() {
        return Ok(match scheme {
            Scheme::Sc if dist.has_exact() => vec![Method::ScExact, Method::ScApprox, Method::FbSc],
            Scheme::Sc => vec![Method::ScApprox, Method::FbSc],
            Scheme::Mrc => vec![Method::MrcApproxNumeric, Method::MrcApproxClosed, Method::FbMrc],
        });
    }
    let mut out = Vec::new();
    for &m in requested {
        let method = method_for(scheme, m)?;
        if !out.contains(&method) {
            out.push(method);
        }
    }
    Ok(out)
}

fn cmd_rate(a: &RateArgs) -> CliResult<u8> {
    let (dist, _) = resolve_topology(&a.topology)?;
    let scheme = scheme_of(a.link.scheme);
    let cfg = LinkConfig::new(
        require(a.link.antennas, "M")?,
        require(a.link.blocklength, "n")?,
        require(a.link.eps, "eps")?,
        scheme,
    )?;
    let methods = resolve_methods(scheme, &a.method, &dist)?;
    let mut solutions = Vec::new();
    for m in methods {
        solutions.push(allocate(m, &dist, &cfg)?);
    }
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for s in &solutions {
        if a.json {
            writeln!(out, "{}", serde_json::to_string(s).map_err(urp_core::Error::from)?)?;
        } else {
            writeln!(
                out,
                "{:<12} k*={:<6} k_real={:<12.6} rate={:.6} theta={:.6e} predicted_eps={:.6e}{}",
                s.method.as_str(),
                s.k_star,
                s.k_real,
                s.rate,
                s.theta,
                s.predicted_epsilon,
                if s.feasible { "" } else { "  infeasible (k*=0)" }
            )?;
        }
    }
    Ok(if solutions.iter().all(|s| s.feasible) {
        0
    } else {
        EXIT_INFEASIBLE
    })
}

fn write_output(path: Option<&std::path::Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn cmd_sweep(a: &SweepArgs) -> CliResult<u8> {
    if a.workers == 0 {
        return Err(urp_core::Error::InvalidConfig("workers must be at least 1".into()).into());
    }
    let table = if let Some(name) = &a.preset {
        let preset: Preset = name.parse().map_err(|_| {
            CliError::Usage(format!("unknown preset `{name}` (expected fig2, fig2pp, fig3, fig4, fig5 or fig6)"))
        })?;
        preset.run(a.workers)?
    } else {
        let axis = match a.axis {
            Some(AxisArg::Eps) => Axis::EpsilonTh,
            Some(AxisArg::Beta) => Axis::Beta,
            Some(AxisArg::M) => Axis::M,
            Some(AxisArg::N) => Axis::N,
            None => return Err(CliError::Usage("give --preset NAME or --axis with --values".into())),
        };
        let (dist, _) = resolve_topology(&a.topology)?;
        let scheme = scheme_of(a.link.scheme);
        let fixed = LinkConfig {
            antennas: pick(axis, a.link.antennas, Axis::M, "M", 1)?,
            blocklength: pick(axis, a.link.blocklength, Axis::N, "n", 1)?,
            epsilon_th: pick(axis, a.link.eps, Axis::EpsilonTh, "eps", 0.5)?,
            scheme,
        };
        let spec = SweepSpec {
            axis,
            values: a.values.clone(),
            fixed,
            methods: resolve_methods(scheme, &a.method, &dist)?,
            dist,
        };
        let rows = spec.run(a.workers)?;
        let mut fixed_fields = Vec::new();
        if axis != Axis::M {
            fixed_fields.push(format!("M={}", fixed.antennas));
        }
        if axis != Axis::N {
            fixed_fields.push(format!("n={}", fixed.blocklength));
        }
        if axis != Axis::EpsilonTh {
            fixed_fields.push(format!("epsilon_th={}", fixed.epsilon_th));
        }
        fixed_fields.push(format!("eta={}", spec.dist.eta));
        if axis != Axis::Beta {
            fixed_fields.push(format!("beta={}", spec.dist.beta));
        }
        let comments = vec![format!("sweep: axis={axis}"), format!("fixed: {}", fixed_fields.join(" "))];
        Table::from_rows(comments, &rows)
    };
    write_output(a.out.as_deref(), &table.to_csv_string()?)?;
    Ok(0)
}

fn build_sim_spec(a: &SimulateArgs) -> CliResult<SimSpec> {
    if let Some(path) = &a.spec {
        let text = fs::read_to_string(path)?;
        return Ok(serde_json::from_str(&text).map_err(urp_core::Error::from)?);
    }
    let topology = match (&a.topology.topology, a.topology.beta, a.topology.eta) {
        (Some(path), _, _) => TopologyFile::load(path)?,
        // an equidistant profile realizes (η, β) exactly
        (None, Some(beta), Some(eta)) => {
            if eta == 0 {
                return Err(urp_core::Error::InvalidConfig("eta must be at least 1".into()).into());
            }
            TopologyFile {
                path_losses: Some(PathLosses::new(1.0, vec![beta / f64::from(eta); eta as usize])?),
                ..TopologyFile::default()
            }
        }
        _ => return Err(CliError::Usage("give --spec, --topology PATH or both --beta and --eta".into())),
    };
    Ok(SimSpec {
        topology,
        antennas: require(a.link.antennas, "M")?,
        scheme: scheme_of(a.link.scheme),
        threshold_bits: require(a.k, "k")?,
        blocklength: require(a.link.blocklength, "n")?,
        semantics: match a.semantics {
            SemanticsArg::Asymptotic => Semantics::Asymptotic,
            SemanticsArg::Fb => Semantics::FiniteBlocklength,
        },
        trials: a.trials,
        seed: a.seed,
        workers: a.workers,
        eps_target: a.link.eps,
        allow_underpowered: a.allow_underpowered,
        variance_reduced: a.variance_reduced,
    })
}

fn cmd_simulate(a: &SimulateArgs) -> CliResult<u8> {
    let spec = build_sim_spec(a)?;
    let report = urp_core::run_sim(&spec)?;
    let line = report.to_json_line();
    println!("{line}");
    if let Some(p) = &a.out {
        fs::write(p, format!("{line}\n"))?;
    }
    eprintln!("elapsed: {:.3}s", report.elapsed);
    Ok(0)
}

fn cmd_validate(a: &ValidateArgs) -> CliResult<u8> {
    let scope = match a.scope {
        ScopeArg::Tails => urp_core::Scope::Tails,
        ScopeArg::Bounds => urp_core::Scope::Bounds,
        ScopeArg::Montecarlo => urp_core::Scope::Montecarlo,
        ScopeArg::All => urp_core::Scope::All,
    };
    let mc = MonteCarloOptions {
        trials: a.trials,
        seed: a.seed,
        workers: a.workers,
        allow_underpowered: a.allow_underpowered,
    };
    let checks = urp_core::validate::run(scope, &mc)?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for c in &checks {
        writeln!(out, "{}", c.to_json_line())?;
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    eprintln!("{} checks, {} failed", checks.len(), failed);
    Ok(if failed == 0 { 0 } else { EXIT_VALIDATION_FAILED })
}
