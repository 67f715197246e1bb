//! Command-line front end. Every subcommand writes a manifest echoing its
//! fully resolved configuration; rerunning the manifest's `argv` reproduces
//! the artifacts byte for byte. Exit codes: 0 success, 1 validation error,
//! 2 numerical failure (divergence or an inconclusive randomized check).

mod expr;
mod io;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use eigentrace::barrier::{
    build, log_spaced_nodes, random_property_sweep, verify_properties, BarrierParams,
};
use eigentrace::counterexample::{
    concavity_check, holder_blowup, supersolution_spotcheck, viscosity_residual_away_from_plane,
};
use eigentrace::grid::{solve, Grid, GridFunction, SolveConfig, StencilSet};
use eigentrace::holder::{estimate_exponent, holder_seminorm, Region};
use eigentrace::operators::{degenerate_ellipticity_check, Hamiltonian, WeightVector};
use eigentrace::regularity::{
    beta, build_theta, seminorm_bound_surrogate, theorem_constants, theta_spectrum_sweep,
    verify_doubling_inequalities, ProblemData,
};

#[derive(Parser, Debug)]
#[command(
    name = "eigentrace",
    version,
    about = "Weighted partial-trace operators, barrier functions, a monotone 2D solver and Holder diagnostics"
)]
struct Cli {
    /// Seed for every randomized routine.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Manifest path (defaults to `<primary output>.manifest.json`, or
    /// `eigentrace-<subcommand>.manifest.json` when nothing is written).
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Explicit Holder exponent lower bound from the extreme weights.
    Beta {
        #[arg(long)]
        a1: f64,
        #[arg(long = "aN")]
        a_n: f64,
        /// Also write the JSON result here.
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Exponent plus the constant ledger (L, D, C, B) for given problem data.
    Constants {
        /// Comma-separated weights, e.g. `1,0,1`.
        #[arg(long)]
        weights: String,
        /// Gradient growth constant C_H.
        #[arg(long, default_value_t = 0.0)]
        ch: f64,
        /// Sup norm of the solution on the larger subdomain.
        #[arg(long)]
        usup: f64,
        /// Sup norm of the right-hand side on the larger subdomain.
        #[arg(long)]
        fsup: f64,
        /// Localization radius.
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Build the radial barrier, optionally verify its properties and export
    /// sampled values.
    Barrier {
        #[arg(long = "A")]
        a: f64,
        #[arg(long = "B", default_value_t = 0.0)]
        b: f64,
        #[arg(long = "C")]
        c: f64,
        #[arg(long = "D", default_value_t = 0.0)]
        d: f64,
        #[arg(long)]
        delta: f64,
        /// Run the node-wise property verification.
        #[arg(long)]
        verify: bool,
        /// Node count for verification and export grids.
        #[arg(long, default_value_t = 200)]
        nodes: usize,
        /// Write `r,phi,phi_prime,phi_double_prime` samples here.
        #[arg(long)]
        export: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Solve a1 l1(D^2 u) + a2 l2(D^2 u) + H(grad u) = f on a rectangle.
    Solve {
        #[arg(long)]
        a1: f64,
        #[arg(long)]
        a2: f64,
        #[arg(long)]
        nx: usize,
        #[arg(long)]
        ny: usize,
        /// Grid spacing; defaults to 1/(nx-1).
        #[arg(long)]
        h: Option<f64>,
        /// Lower-left corner, e.g. `0,0`.
        #[arg(long, default_value = "0,0")]
        origin: String,
        #[arg(long, default_value_t = 1)]
        stencil_width: usize,
        /// Pseudo-time step; defaults to h^2 / (4 |a|_1 w^2).
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 200_000)]
        max_iter: usize,
        /// Right-hand side: an expression in x, y or a path to an `x,y,u` CSV.
        #[arg(long)]
        f: String,
        /// Dirichlet boundary data: expression or CSV path (paths win when a
        /// file with that name exists).
        #[arg(long)]
        g: String,
        /// Gradient term: `zero` or `power:A,B,tau` for A|p|^2 + B|p|^tau.
        #[arg(long = "H", default_value = "zero")]
        hamiltonian: String,
        /// Solution CSV path; the run summary lands next to it.
        #[arg(long)]
        out: PathBuf,
    },

    /// Holder seminorm and empirical exponent of a gridded function.
    Holder {
        /// `x,y,u` CSV over a full uniform grid.
        #[arg(long)]
        input: PathBuf,
        /// Exponent for the seminorm; defaults to the fitted alpha_hat.
        #[arg(long)]
        beta: Option<f64>,
        /// `interior` (default) or `full`.
        #[arg(long, default_value = "interior")]
        region: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// The logarithmic profile: blow-up table, concavity report,
    /// supersolution spot-check, off-plane operator residual.
    Counterexample {
        /// Tabulate the Holder quotient blow-up (CSV `alpha,k,t,ratio`).
        #[arg(long)]
        blowup: bool,
        /// Check f'' < 0 on a sampled grid (JSON report).
        #[arg(long)]
        concavity: bool,
        /// Rejection-sample touching quadratics and check the middle
        /// eigenvalue sign (JSON report).
        #[arg(long)]
        supersolution: bool,
        /// Evaluate the middle-weight operator off the singular plane
        /// (JSON report).
        #[arg(long)]
        offplane: bool,
        /// Comma-separated alphas for --blowup.
        #[arg(long, default_value = "0.5,1.0")]
        alphas: String,
        #[arg(long, default_value_t = 12)]
        kmax: usize,
        /// Sample count for --concavity / --offplane.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Trial count for --supersolution.
        #[arg(long, default_value_t = 10)]
        trials: usize,
        /// Ambient dimension for --supersolution.
        #[arg(long, default_value_t = 3)]
        dim: usize,
        /// Comma-separated weights for --offplane (extremes must be zero).
        #[arg(long, default_value = "0,1,1,0")]
        weights: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Randomized verification bundle: Theta spectrum, block inequality
    /// consequences, operator monotonicity and a barrier sweep.
    Proofcheck {
        #[arg(long, default_value_t = 10_000)]
        draws: usize,
        #[arg(long, default_value_t = 500)]
        pairs: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 100)]
        sweep: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum CliError {
    Validation(String),
    Numerical(String),
}

impl From<eigentrace::Error> for CliError {
    fn from(e: eigentrace::Error) -> Self {
        use eigentrace::Error::*;
        match e {
            Diverged { .. } | Numerical(_) | ExponentUndefined(_) => {
                CliError::Numerical(e.to_string())
            }
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

fn validation(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

/// What a subcommand hands back to the shared runner.
struct RunOutput {
    stdout_text: Option<String>,
    outputs: Vec<PathBuf>,
    parameters: BTreeMap<String, serde_json::Value>,
    /// Resolved artifact format recorded in the manifest.
    format: &'static str,
    /// Nonzero exit reported through the numerical-failure channel even when
    /// artifacts were written (e.g. an inconclusive randomized check).
    numerical_failure: Option<String>,
}

fn parse_f64_list(text: &str, what: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| validation(format!("bad {what} entry `{s}`")))
        })
        .collect()
}

fn parse_hamiltonian(text: &str) -> CliResult<Hamiltonian> {
    if text == "zero" {
        return Ok(Hamiltonian::Zero);
    }
    if let Some(rest) = text.strip_prefix("power:") {
        let parts = parse_f64_list(rest, "Hamiltonian coefficient")?;
        if parts.len() != 3 {
            return Err(validation("power law needs `power:A,B,tau`"));
        }
        return Ok(Hamiltonian::power_law(parts[0], parts[1], parts[2])?);
    }
    Err(validation(format!(
        "unknown Hamiltonian `{text}` (use `zero` or `power:A,B,tau`)"
    )))
}

/// Expression text or a CSV of node values, resolved against a target grid.
enum ScalarInput {
    Expression(expr::Expr),
    NodeValues(Vec<f64>),
}

fn load_scalar_input(text: &str, grid: &Grid) -> CliResult<ScalarInput> {
    let path = Path::new(text);
    if path.exists() {
        let loaded = io::read_grid_csv(path).map_err(validation)?;
        let lg = loaded.grid();
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * (1.0 + a.abs());
        if lg.nx() != grid.nx()
            || lg.ny() != grid.ny()
            || !close(lg.h(), grid.h())
            || !close(lg.origin().0, grid.origin().0)
            || !close(lg.origin().1, grid.origin().1)
        {
            return Err(validation(format!(
                "{}: grid layout does not match the requested grid",
                path.display()
            )));
        }
        return Ok(ScalarInput::NodeValues(loaded.values().to_vec()));
    }
    let parsed = expr::parse(text)
        .map_err(|e| validation(format!("`{text}` is not a file and {e}")))?;
    Ok(ScalarInput::Expression(parsed))
}

fn run(cli: &Cli, argv: &[String]) -> CliResult<()> {
    let seed = cli.seed;
    let out = match &cli.command {
        Command::Beta { a1, a_n, out } => cmd_beta(*a1, *a_n, out.as_deref())?,
        Command::Constants {
            weights,
            ch,
            usup,
            fsup,
            delta,
            out,
        } => cmd_constants(weights, *ch, *usup, *fsup, *delta, out.as_deref())?,
        Command::Barrier {
            a,
            b,
            c,
            d,
            delta,
            verify,
            nodes,
            export,
            out,
        } => cmd_barrier(
            *a,
            *b,
            *c,
            *d,
            *delta,
            *verify,
            *nodes,
            export.as_deref(),
            out.as_deref(),
        )?,
        Command::Solve {
            a1,
            a2,
            nx,
            ny,
            h,
            origin,
            stencil_width,
            tau,
            tol,
            max_iter,
            f,
            g,
            hamiltonian,
            out,
        } => cmd_solve(SolveArgs {
            a1: *a1,
            a2: *a2,
            nx: *nx,
            ny: *ny,
            h: *h,
            origin,
            stencil_width: *stencil_width,
            tau: *tau,
            tol: *tol,
            max_iter: *max_iter,
            f,
            g,
            hamiltonian,
            out,
        })?,
        Command::Holder {
            input,
            beta,
            region,
            out,
        } => cmd_holder(input, *beta, region, out.as_deref())?,
        Command::Counterexample {
            blowup,
            concavity,
            supersolution,
            offplane,
            alphas,
            kmax,
            samples,
            trials,
            dim,
            weights,
            out,
        } => cmd_counterexample(CounterexampleArgs {
            blowup: *blowup,
            concavity: *concavity,
            supersolution: *supersolution,
            offplane: *offplane,
            alphas,
            kmax: *kmax,
            samples: *samples,
            trials: *trials,
            dim: *dim,
            weights,
            seed,
            out: out.as_deref(),
        })?,
        Command::Proofcheck {
            draws,
            pairs,
            trials,
            sweep,
            out,
        } => cmd_proofcheck(*draws, *pairs, *trials, *sweep, seed, out.as_deref())?,
    };

    let subcommand = match &cli.command {
        Command::Beta { .. } => "beta",
        Command::Constants { .. } => "constants",
        Command::Barrier { .. } => "barrier",
        Command::Solve { .. } => "solve",
        Command::Holder { .. } => "holder",
        Command::Counterexample { .. } => "counterexample",
        Command::Proofcheck { .. } => "proofcheck",
    };

    let manifest_path = cli.manifest.clone().unwrap_or_else(|| match out.outputs.first() {
        Some(first) => {
            let mut name = first.as_os_str().to_owned();
            name.push(".manifest.json");
            PathBuf::from(name)
        }
        None => PathBuf::from(format!("eigentrace-{subcommand}.manifest.json")),
    });
    let manifest = io::Manifest {
        subcommand: subcommand.to_string(),
        argv: argv.to_vec(),
        seed,
        format: out.format.to_string(),
        parameters: out.parameters,
        outputs: out
            .outputs
            .iter()
            .map(|p| p.display().to_string())
            .collect(),
    };
    io::write_atomic(&manifest_path, io::to_pretty_json(&manifest).as_bytes())?;

    if let Some(text) = out.stdout_text {
        print!("{text}");
    }
    if let Some(reason) = out.numerical_failure {
        return Err(CliError::Numerical(reason));
    }
    Ok(())
}

fn emit_json<T: Serialize>(
    value: &T,
    out: Option<&Path>,
) -> CliResult<(Option<String>, Vec<PathBuf>)> {
    let text = io::to_pretty_json(value);
    let mut outputs = Vec::new();
    if let Some(path) = out {
        io::write_atomic(path, text.as_bytes())?;
        outputs.push(path.to_path_buf());
    }
    Ok((Some(text), outputs))
}

fn cmd_beta(a1: f64, a_n: f64, out: Option<&Path>) -> CliResult<RunOutput> {
    let value = beta(a1, a_n)?;
    let (stdout_text, outputs) = emit_json(&json!({ "beta": value }), out)?;
    let mut parameters = BTreeMap::new();
    parameters.insert("a1".into(), json!(a1));
    parameters.insert("aN".into(), json!(a_n));
    Ok(RunOutput {
        stdout_text,
        outputs,
        parameters,
        format: "json",
        numerical_failure: None,
    })
}

#[derive(Serialize)]
struct ConstantsOut {
    beta: f64,
    #[serde(rename = "L")]
    l: f64,
    #[serde(rename = "D")]
    d: f64,
    #[serde(rename = "C")]
    c: f64,
    #[serde(rename = "B")]
    b: f64,
    /// Computable stand-in for the non-explicit constant of the final
    /// seminorm estimate: the barrier growth coefficient K / (1 - A).
    seminorm_bound_surrogate: f64,
}

fn cmd_constants(
    weights: &str,
    ch: f64,
    usup: f64,
    fsup: f64,
    delta: f64,
    out: Option<&Path>,
) -> CliResult<RunOutput> {
    let w = WeightVector::new(parse_f64_list(weights, "weight")?)?;
    let data = ProblemData::new(w, ch, usup, fsup, delta)?;
    let tc = theorem_constants(&data);
    let payload = ConstantsOut {
        beta: data.beta(),
        l: tc.l,
        d: tc.d,
        c: tc.c,
        b: tc.b,
        seminorm_bound_surrogate: seminorm_bound_surrogate(&data)?,
    };
    let (stdout_text, outputs) = emit_json(&payload, out)?;
    let mut parameters = BTreeMap::new();
    parameters.insert("weights".into(), json!(weights));
    parameters.insert("ch".into(), json!(ch));
    parameters.insert("usup".into(), json!(usup));
    parameters.insert("fsup".into(), json!(fsup));
    parameters.insert("delta".into(), json!(delta));
    Ok(RunOutput {
        stdout_text,
        outputs,
        parameters,
        format: "json",
        numerical_failure: None,
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_barrier(
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    delta: f64,
    verify: bool,
    nodes: usize,
    export: Option<&Path>,
    out: Option<&Path>,
) -> CliResult<RunOutput> {
    let params = BarrierParams::new(a, b, c, d, delta)?;
    let barrier = build(params)?;
    let mut outputs = Vec::new();

    if let Some(path) = export {
        let mut csv = String::from("r,phi,phi_prime,phi_double_prime\n");
        for &r in &log_spaced_nodes(delta, nodes.max(2)) {
            csv.push_str(&format!(
                "{},{},{},{}\n",
                io::fmt_f64(r),
                io::fmt_f64(barrier.phi(r)?),
                io::fmt_f64(barrier.phi_prime(r)?),
                io::fmt_f64(barrier.phi_double_prime(r)?),
            ));
        }
        io::write_atomic(path, csv.as_bytes())?;
        outputs.push(path.to_path_buf());
    }

    let report = if verify {
        Some(verify_properties(&barrier, nodes.max(2))?)
    } else {
        None
    };
    let all_passed = report.as_ref().map(|r| r.all_passed());
    let payload = json!({
        "K": barrier.normalization(),
        "params": params,
        "report": report,
    });
    let (stdout_text, mut json_outputs) = emit_json(&payload, out)?;
    outputs.append(&mut json_outputs);

    let mut parameters = BTreeMap::new();
    parameters.insert("A".into(), json!(a));
    parameters.insert("B".into(), json!(b));
    parameters.insert("C".into(), json!(c));
    parameters.insert("D".into(), json!(d));
    parameters.insert("delta".into(), json!(delta));
    parameters.insert("verify".into(), json!(verify));
    parameters.insert("nodes".into(), json!(nodes));
    Ok(RunOutput {
        stdout_text,
        outputs,
        parameters,
        format: if export.is_some() { "csv+json" } else { "json" },
        numerical_failure: match all_passed {
            Some(false) => Some("barrier property verification failed".into()),
            _ => None,
        },
    })
}

struct SolveArgs<'a> {
    a1: f64,
    a2: f64,
    nx: usize,
    ny: usize,
    h: Option<f64>,
    origin: &'a str,
    stencil_width: usize,
    tau: Option<f64>,
    tol: f64,
    max_iter: usize,
    f: &'a str,
    g: &'a str,
    hamiltonian: &'a str,
    out: &'a Path,
}

#[derive(Serialize)]
struct SolveSummary {
    iterations: usize,
    residual: f64,
    alpha_hat: Option<f64>,
    seminorm: Option<f64>,
}

fn cmd_solve(args: SolveArgs<'_>) -> CliResult<RunOutput> {
    let origin_parts = parse_f64_list(args.origin, "origin coordinate")?;
    if origin_parts.len() != 2 {
        return Err(validation("origin must be `x0,y0`"));
    }
    if args.nx < 3 {
        return Err(validation("nx must be >= 3"));
    }
    let h = args.h.unwrap_or(1.0 / (args.nx - 1) as f64);
    let origin = (origin_parts[0], origin_parts[1]);
    let a = WeightVector::new(vec![args.a1, args.a2])?;
    let ham = parse_hamiltonian(args.hamiltonian)?;
    let stencil = StencilSet::new(args.stencil_width)?;

    // Probe layout used to resolve expression-vs-file inputs.
    let probe = Grid::new(args.nx, args.ny, h, origin, |_, _| 0.0)?;
    let g_input = load_scalar_input(args.g, &probe)?;
    let f_input = load_scalar_input(args.f, &probe)?;

    let grid = match g_input {
        ScalarInput::Expression(e) => {
            Grid::new(args.nx, args.ny, h, origin, move |x, y| e.eval(x, y))?
        }
        ScalarInput::NodeValues(values) => {
            let (nx, h0, o) = (args.nx, h, origin);
            Grid::new(args.nx, args.ny, h, origin, move |x, y| {
                let i = ((x - o.0) / h0).round() as usize;
                let j = ((y - o.1) / h0).round() as usize;
                values[j * nx + i]
            })?
        }
    };
    let f = match f_input {
        ScalarInput::Expression(e) => GridFunction::from_fn(&grid, |x, y| e.eval(x, y)),
        ScalarInput::NodeValues(values) => GridFunction::from_values(&grid, values)?,
    };

    let config = SolveConfig {
        tau: args.tau,
        tol: args.tol,
        max_iter: args.max_iter,
    };
    let outcome = solve(&grid, &a, &ham, &f, &stencil, &config)?;

    io::write_atomic(args.out, io::grid_csv(&outcome.u).as_bytes())?;

    let region = Region::interior_default(&grid);
    let alpha_hat = estimate_exponent(&outcome.u, &region).ok().map(|e| e.alpha_hat);
    let seminorm_exponent = beta(args.a1, args.a2)?;
    let seminorm = holder_seminorm(&outcome.u, seminorm_exponent, &region).ok();
    let summary = SolveSummary {
        iterations: outcome.iterations,
        residual: outcome.final_residual,
        alpha_hat,
        seminorm,
    };
    let summary_text = io::to_pretty_json(&summary);
    let mut summary_path = args.out.as_os_str().to_owned();
    summary_path.push(".summary.json");
    let summary_path = PathBuf::from(summary_path);
    io::write_atomic(&summary_path, summary_text.as_bytes())?;

    let mut parameters = BTreeMap::new();
    parameters.insert("a1".into(), json!(args.a1));
    parameters.insert("a2".into(), json!(args.a2));
    parameters.insert("nx".into(), json!(args.nx));
    parameters.insert("ny".into(), json!(args.ny));
    parameters.insert("h".into(), json!(h));
    parameters.insert("origin".into(), json!(args.origin));
    parameters.insert("stencil_width".into(), json!(args.stencil_width));
    parameters.insert("tau".into(), json!(outcome.tau));
    parameters.insert("tol".into(), json!(args.tol));
    parameters.insert("max_iter".into(), json!(args.max_iter));
    parameters.insert("f".into(), json!(args.f));
    parameters.insert("g".into(), json!(args.g));
    parameters.insert("H".into(), json!(args.hamiltonian));
    parameters.insert(
        "gradient_dominated".into(),
        json!(outcome.diagnostics.gradient_dominated),
    );
    Ok(RunOutput {
        stdout_text: Some(summary_text),
        outputs: vec![args.out.to_path_buf(), summary_path],
        parameters,
        format: "csv+json",
        numerical_failure: None,
    })
}

fn cmd_holder(
    input: &Path,
    beta_arg: Option<f64>,
    region_arg: &str,
    out: Option<&Path>,
) -> CliResult<RunOutput> {
    let u = io::read_grid_csv(input).map_err(validation)?;
    let region = match region_arg {
        "interior" => Region::interior_default(u.grid()),
        "full" => Region::full(u.grid()),
        other => return Err(validation(format!("unknown region `{other}`"))),
    };
    // The fit needs four dyadic scales; with an explicit --beta the seminorm
    // is still meaningful on grids too small for the fit.
    let estimate = estimate_exponent(&u, &region);
    let exponent = match (beta_arg, &estimate) {
        (Some(b), _) => b,
        (None, Ok(e)) => e.alpha_hat.clamp(0.01, 1.0),
        (None, Err(e)) => return Err(e.clone().into()),
    };
    let (alpha_hat, fit_r2) = match &estimate {
        Ok(e) => (Some(e.alpha_hat), Some(e.fit_r2)),
        Err(_) => (None, None),
    };
    let seminorm = holder_seminorm(&u, exponent, &region)?;
    let payload = json!({
        "alpha_hat": alpha_hat,
        "fit_r2": fit_r2,
        "beta": exponent,
        "seminorm": seminorm,
    });
    let (stdout_text, outputs) = emit_json(&payload, out)?;
    let mut parameters = BTreeMap::new();
    parameters.insert("input".into(), json!(input.display().to_string()));
    parameters.insert("beta".into(), json!(exponent));
    parameters.insert("region".into(), json!(region_arg));
    Ok(RunOutput {
        stdout_text,
        outputs,
        parameters,
        format: "json",
        numerical_failure: None,
    })
}

struct CounterexampleArgs<'a> {
    blowup: bool,
    concavity: bool,
    supersolution: bool,
    offplane: bool,
    alphas: &'a str,
    kmax: usize,
    samples: usize,
    trials: usize,
    dim: usize,
    weights: &'a str,
    seed: u64,
    out: Option<&'a Path>,
}

fn cmd_counterexample(args: CounterexampleArgs<'_>) -> CliResult<RunOutput> {
    let modes =
        [args.blowup, args.concavity, args.supersolution, args.offplane].iter().filter(|m| **m).count();
    if modes != 1 {
        return Err(validation(
            "pick exactly one of --blowup, --concavity, --supersolution, --offplane",
        ));
    }
    let mut parameters = BTreeMap::new();
    parameters.insert("seed".into(), json!(args.seed));

    if args.blowup {
        let alphas = parse_f64_list(args.alphas, "alpha")?;
        let table = holder_blowup(&alphas, args.kmax)?;
        let mut csv = String::from("alpha,k,t,ratio\n");
        for row in &table.rows {
            csv.push_str(&format!(
                "{},{},{},{}\n",
                io::fmt_f64(row.alpha),
                row.k,
                io::fmt_f64(row.t),
                io::fmt_f64(row.ratio),
            ));
        }
        parameters.insert("alphas".into(), json!(args.alphas));
        parameters.insert("kmax".into(), json!(args.kmax));
        let mut outputs = Vec::new();
        let stdout_text = if let Some(path) = args.out {
            io::write_atomic(path, csv.as_bytes())?;
            outputs.push(path.to_path_buf());
            None
        } else {
            Some(csv)
        };
        return Ok(RunOutput {
            stdout_text,
            outputs,
            parameters,
            format: "csv",
            numerical_failure: None,
        });
    }

    if args.concavity {
        let report = concavity_check(args.samples)?;
        parameters.insert("samples".into(), json!(args.samples));
        let (stdout_text, outputs) = emit_json(&report, args.out)?;
        return Ok(RunOutput {
            stdout_text,
            outputs,
            parameters,
            format: "json",
            numerical_failure: (!report.passed()).then(|| "concavity violations found".into()),
        });
    }

    if args.supersolution {
        let report = supersolution_spotcheck(args.trials, args.seed, args.dim)?;
        parameters.insert("trials".into(), json!(args.trials));
        parameters.insert("dim".into(), json!(args.dim));
        let failure = if report.inconclusive {
            Some("no touching quadratic was accepted".to_string())
        } else if report.violations > 0 {
            Some(format!("{} middle-eigenvalue violations", report.violations))
        } else {
            None
        };
        let (stdout_text, outputs) = emit_json(&report, args.out)?;
        return Ok(RunOutput {
            stdout_text,
            outputs,
            parameters,
            format: "json",
            numerical_failure: failure,
        });
    }

    let weights = WeightVector::new(parse_f64_list(args.weights, "weight")?)?;
    let report = viscosity_residual_away_from_plane(&weights, args.samples, args.seed)?;
    parameters.insert("weights".into(), json!(args.weights));
    parameters.insert("samples".into(), json!(args.samples));
    let failure = (!report.passed()).then(|| "off-plane operator value exceeded tolerance".into());
    let (stdout_text, outputs) = emit_json(&report, args.out)?;
    Ok(RunOutput {
        stdout_text,
        outputs,
        parameters,
        format: "json",
        numerical_failure: failure,
    })
}

fn cmd_proofcheck(
    draws: usize,
    pairs: usize,
    trials: usize,
    sweep: usize,
    seed: u64,
    out: Option<&Path>,
) -> CliResult<RunOutput> {
    let theta_report = theta_spectrum_sweep(draws.max(1), seed)?;

    let anchor = vec![1.0, 0.0, 0.0];
    let (theta, _) = build_theta(2.0, -1.0, 1.0, 0.1, &anchor)?;
    let doubling = verify_doubling_inequalities(&theta, 1.0, 1.0, &anchor, pairs.max(1), seed)?;

    let isaacs_weights = WeightVector::new(vec![1.0, 0.0, 1.0])?;
    let monotonicity = degenerate_ellipticity_check(&isaacs_weights, trials.max(1), seed)?;

    let barrier_sweep = random_property_sweep(sweep.max(1), 200, seed)?;

    let passed = theta_report.passed()
        && doubling.passed()
        && monotonicity.passed()
        && barrier_sweep.passed();
    let payload = json!({
        "theta_spectrum": theta_report,
        "doubling": doubling,
        "monotonicity": monotonicity,
        "barrier_sweep": barrier_sweep,
        "passed": passed,
    });
    let (stdout_text, outputs) = emit_json(&payload, out)?;
    let mut parameters = BTreeMap::new();
    parameters.insert("draws".into(), json!(draws));
    parameters.insert("pairs".into(), json!(pairs));
    parameters.insert("trials".into(), json!(trials));
    parameters.insert("sweep".into(), json!(sweep));
    Ok(RunOutput {
        stdout_text,
        outputs,
        parameters,
        format: "json",
        numerical_failure: (!passed).then(|| "proofcheck found violations".into()),
    })
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let matches = match Cli::command().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(&cli, &argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(2)
        }
    }
}
