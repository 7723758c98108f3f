//! Command-line front end. Every command prints one JSON object: a
//! [`RunReport`] on success, a diagnostic record on failure.
//!
//! Exit codes: 0 on success, 2 for usage and input errors, 3 for numerical
//! failures (see [`Error::is_numerical`]).

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::gausslike::{self, SigmaForm};
use crate::integrate::{
    nongauss_integral, sublevel_integral_direct, QuadratureConfig, QuadratureMethod, DEFAULT_MC_SAMPLES,
};
use crate::levelset::{identity_suite, integrate_h_on_sublevel, volume_sublevel};
use crate::minvol::{kkt_check, solve_inner, solve_outer, ContactOptions, MinVolProblem, Multiplier};
use crate::moments::{body_to_string, lebesgue_moments, parse_body, BodyK};
use crate::phf::{check_sublevel_bounded, parse_poly, poly_to_string, Boundedness, HomoPoly, Phf, PolyRecord};
use crate::polarity::{conjugate_phf, polar_volume_mc, polar_volume_with};

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "HOMOLEVEL_THREADS";

#[derive(Parser, Debug)]
#[command(name = "homolevel", version, about = "Sublevel volumes, non-Gaussian integrals and minimum-volume sublevel sets")]
struct Cli {
    #[command(flatten)]
    quad: QuadArgs,
    /// Also write the report to this path.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct QuadArgs {
    /// sphere-product-gauss (gauss) or monte-carlo (mc).
    #[arg(long, global = true)]
    method: Option<String>,
    /// Azimuthal nodes for the product rule, samples for Monte Carlo.
    #[arg(long, global = true)]
    nodes: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Value and gradient of g at a point, and a boundedness check.
    Eval {
        #[arg(long)]
        g: PathBuf,
        /// Comma-separated coordinates.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Vec<f64>,
    },
    /// Volume of {g <= y}.
    Vol {
        #[arg(long)]
        g: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        y: f64,
    },
    /// ∫ over {g <= y} of h, by the closed form and by direct radial quadrature.
    Integrate {
        #[arg(long)]
        g: PathBuf,
        #[arg(long)]
        h: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        y: f64,
    },
    /// ∫ h exp(-g) over ℝⁿ.
    Nongauss {
        #[arg(long)]
        g: PathBuf,
        #[arg(long)]
        h: Option<PathBuf>,
    },
    /// The four Euler and incomplete-gamma identities.
    Identities {
        #[arg(long)]
        g: PathBuf,
        #[arg(long)]
        h: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        y: f64,
    },
    /// Minimum-volume sublevel set containing a body: inner or outer bound.
    Minvol {
        #[arg(value_enum)]
        bound: Bound,
        #[arg(long)]
        k: u32,
        #[arg(long = "two-d")]
        two_d: u32,
        #[arg(long)]
        body: PathBuf,
        /// Write the optimal g as a polynomial file.
        #[arg(long)]
        emit_g: Option<PathBuf>,
        /// Run the KKT contact-point check on the optimum.
        #[arg(long)]
        kkt: bool,
    },
    /// Conjugate of g and the volume of the polar of {g <= 1/d}.
    Polar {
        #[arg(long)]
        g: PathBuf,
        /// Number of conjugate table entries to print.
        #[arg(long, default_value_t = 8)]
        samples: usize,
        /// Also estimate the polar volume by support-function Monte Carlo.
        #[arg(long)]
        mc_samples: Option<usize>,
    },
    /// θ_d at Σ = I, the trace identity, and optionally a critical Σ.
    Gausslike {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        find_critical: bool,
        #[arg(long, default_value_t = 200)]
        max_iters: usize,
    },
    /// Lebesgue moments of a body up to a degree.
    Moments {
        #[arg(long)]
        body: PathBuf,
        #[arg(long)]
        degree: u32,
        /// Write the canonical body file.
        #[arg(long)]
        emit_body: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Bound {
    Inner,
    Outer,
}

#[derive(Clone, Debug, Serialize)]
pub struct QuadratureRecord {
    pub method: String,
    pub nodes: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Timings {
    pub wall_ms: f64,
}

/// The single object a successful command prints.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    /// SHA-256 of the canonicalized inputs.
    pub inputs_digest: String,
    pub results: Value,
    pub quadrature: QuadratureRecord,
    pub timings: Timings,
    pub warnings: Vec<String>,
}

/// What a run produced: the exit code and the text for each stream.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Builds the global rayon pool from `HOMOLEVEL_THREADS` when it is set.
pub fn configure_threads() -> std::result::Result<(), String> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => {
            let n: usize = v.trim().parse().map_err(|_| format!("{THREADS_ENV} must be a positive integer, got {v:?}"))?;
            if n == 0 {
                return Err(format!("{THREADS_ENV} must be a positive integer, got 0"));
            }
            rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
        }
        Err(_) => Ok(()),
    }
}

/// Parses `args` (including the program name) and runs one command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let name = command_name(&cli.command);
    let start = Instant::now();
    match execute(&cli) {
        Ok(done) => {
            let report = RunReport {
                command: name.to_string(),
                inputs_digest: digest(&done.inputs),
                results: done.results,
                quadrature: QuadratureRecord { method: done.cfg.method.name().to_string(), nodes: done.cfg.nodes, seed: done.cfg.seed },
                timings: Timings { wall_ms: start.elapsed().as_secs_f64() * 1e3 },
                warnings: done.warnings,
            };
            let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
            if let Some(path) = &cli.out {
                if let Err(e) = std::fs::write(path, &text) {
                    return failure(name, &Error::InvalidInput(format!("cannot write {}: {e}", path.display())));
                }
            }
            Outcome { code: 0, stdout: text, stderr: String::new() }
        }
        Err(e) => failure(name, &e),
    }
}

fn failure(command: &str, e: &Error) -> Outcome {
    let record = json!({
        "command": command,
        "error": { "kind": e.kind(), "message": e.to_string() },
    });
    Outcome {
        code: if e.is_numerical() { 3 } else { 2 },
        stdout: serde_json::to_string_pretty(&record).expect("record serializes") + "\n",
        stderr: format!("error: {e}\n"),
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Eval { .. } => "eval",
        Command::Vol { .. } => "vol",
        Command::Integrate { .. } => "integrate",
        Command::Nongauss { .. } => "nongauss",
        Command::Identities { .. } => "identities",
        Command::Minvol { bound: Bound::Inner, .. } => "minvol inner",
        Command::Minvol { bound: Bound::Outer, .. } => "minvol outer",
        Command::Polar { .. } => "polar",
        Command::Gausslike { .. } => "gausslike",
        Command::Moments { .. } => "moments",
    }
}

fn digest(inputs: &Value) -> String {
    let bytes = serde_json::to_vec(inputs).expect("inputs serialize");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

struct Done {
    inputs: Value,
    results: Value,
    cfg: QuadratureConfig,
    warnings: Vec<String>,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))
}

fn load_poly(path: &Path) -> Result<HomoPoly> {
    parse_poly(&read(path)?)
}

fn load_body(path: &Path) -> Result<BodyK> {
    parse_body(&read(path)?)
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display())))
}

fn quad_config(q: &QuadArgs, n: usize) -> Result<QuadratureConfig> {
    let mut cfg = QuadratureConfig::default_for(n);
    if let Some(m) = &q.method {
        let method: QuadratureMethod = m.parse()?;
        if method != cfg.method {
            cfg.method = method;
            cfg.nodes = match method {
                QuadratureMethod::MonteCarlo => DEFAULT_MC_SAMPLES,
                QuadratureMethod::SphereProductGauss => QuadratureConfig::default_for(n.min(4)).nodes,
            };
        }
    }
    if let Some(nodes) = q.nodes {
        cfg.nodes = nodes;
    }
    if let Some(seed) = q.seed {
        cfg.seed = seed;
    }
    if let Some(tol) = q.tol {
        cfg.tol = tol;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn record(p: &HomoPoly) -> Value {
    serde_json::to_value(PolyRecord::from_poly(p)).expect("record serializes")
}

fn weight(h: &Option<PathBuf>, n: usize) -> Result<(Phf, Value)> {
    match h {
        Some(path) => {
            let p = load_poly(path)?;
            if p.n() != n {
                return Err(Error::DimensionMismatch { expected: n, got: p.n() });
            }
            let v = record(&p);
            Ok((Phf::polynomial(p), v))
        }
        None => Ok((Phf::constant(n, 1.0), json!("1"))),
    }
}

fn boundedness_warning(g: &Phf, warnings: &mut Vec<String>) -> Result<()> {
    match check_sublevel_bounded(g, 2048)? {
        Boundedness::Bounded { .. } => {}
        Boundedness::Indeterminate { min } => {
            warnings.push(format!("boundedness indeterminate: min of g on the sampled sphere is {min:e}"))
        }
        Boundedness::Unbounded { value, .. } => {
            warnings.push(format!("sublevel set is unbounded: g takes the value {value:e} on the sphere"))
        }
    }
    Ok(())
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("result serializes")
}

fn execute(cli: &Cli) -> Result<Done> {
    let mut warnings = Vec::new();
    let quad_inputs = |cfg: &QuadratureConfig| json!({"method": cfg.method.name(), "nodes": cfg.nodes, "seed": cfg.seed, "tol": cfg.tol});
    match &cli.command {
        Command::Eval { g, x } => {
            let p = load_poly(g)?;
            let cfg = quad_config(&cli.quad, p.n())?;
            let value = p.eval(x)?;
            let grad = p.grad(x)?;
            let gp = Phf::polynomial(p.clone());
            let bounded = check_sublevel_bounded(&gp, 2048)?;
            let (status, min) = match bounded {
                Boundedness::Bounded { min } => ("bounded", min),
                Boundedness::Indeterminate { min } => ("indeterminate", min),
                Boundedness::Unbounded { value, .. } => ("unbounded", value),
            };
            boundedness_warning(&gp, &mut warnings)?;
            Ok(Done {
                inputs: json!({"command": "eval", "g": record(&p), "x": x}),
                results: json!({"value": value, "gradient": grad, "degree": p.degree(), "boundedness": status, "sphere_min": min}),
                cfg,
                warnings,
            })
        }
        Command::Vol { g, y } => {
            let p = load_poly(g)?;
            let cfg = quad_config(&cli.quad, p.n())?;
            let gp = Phf::polynomial(p.clone());
            boundedness_warning(&gp, &mut warnings)?;
            let rep = volume_sublevel(&gp, *y, &cfg)?;
            Ok(Done {
                inputs: json!({"command": "vol", "g": record(&p), "y": y, "quadrature": quad_inputs(&cfg)}),
                results: json!({"volume": rep.value, "std_error": rep.std_error, "report": to_value(&rep)}),
                cfg,
                warnings,
            })
        }
        Command::Integrate { g, h, y } => {
            let p = load_poly(g)?;
            let cfg = quad_config(&cli.quad, p.n())?;
            let gp = Phf::polynomial(p.clone());
            let (hp, hrec) = weight(h, p.n())?;
            boundedness_warning(&gp, &mut warnings)?;
            let rep = integrate_h_on_sublevel(&hp, &gp, *y, &cfg)?;
            let direct = sublevel_integral_direct(&hp, &gp, *y, &cfg)?;
            Ok(Done {
                inputs: json!({"command": "integrate", "g": record(&p), "h": hrec, "y": y, "quadrature": quad_inputs(&cfg)}),
                results: json!({
                    "value": rep.value,
                    "std_error": rep.std_error,
                    "direct_radial": direct.value,
                    "report": to_value(&rep),
                }),
                cfg,
                warnings,
            })
        }
        Command::Nongauss { g, h } => {
            let p = load_poly(g)?;
            let cfg = quad_config(&cli.quad, p.n())?;
            let (hp, hrec) = weight(h, p.n())?;
            let est = nongauss_integral(&hp, &Phf::polynomial(p.clone()), &cfg)?;
            Ok(Done {
                inputs: json!({"command": "nongauss", "g": record(&p), "h": hrec, "quadrature": quad_inputs(&cfg)}),
                results: to_value(&est),
                cfg,
                warnings,
            })
        }
        Command::Identities { g, h, y } => {
            let p = load_poly(g)?;
            let cfg = quad_config(&cli.quad, p.n())?;
            let (hp, hrec) = weight(h, p.n())?;
            let reports = identity_suite(&Phf::polynomial(p.clone()), &hp, *y, &cfg)?;
            for r in reports.iter().filter(|r| !r.pass) {
                warnings.push(format!("identity {} residual {:e} above {:e}", r.name, r.rel_residual, r.tolerance));
            }
            Ok(Done {
                inputs: json!({"command": "identities", "g": record(&p), "h": hrec, "y": y, "quadrature": quad_inputs(&cfg)}),
                results: json!({"identities": to_value(&reports), "all_pass": reports.iter().all(|r| r.pass)}),
                cfg,
                warnings,
            })
        }
        Command::Minvol { bound, k, two_d, body, emit_g, kkt } => {
            let body = load_body(body)?;
            let n = body.n();
            let cfg = quad_config(&cli.quad, n)?;
            let prob = MinVolProblem::new(body.clone(), *two_d)?;
            let inputs = json!({
                "command": command_name(&cli.command),
                "body": to_value(&body),
                "k": k,
                "two_d": two_d,
                "kkt": kkt,
                "quadrature": quad_inputs(&cfg),
            });
            let (mut results, g, wall_hit) = match bound {
                Bound::Inner => {
                    let sol = solve_inner(&prob, *k, &cfg)?;
                    (to_value(&sol.summary()), sol.g.clone(), sol.wall_hit)
                }
                Bound::Outer => {
                    let sol = solve_outer(&prob, *k, &cfg)?;
                    (to_value(&sol.summary()), sol.g.clone(), sol.wall_hit)
                }
            };
            if wall_hit {
                warnings.push("a coefficient reached the coefficient wall".into());
            }
            if *kkt {
                let rep = kkt_check(&g, &prob, &Multiplier::FitOnContacts, &cfg, &ContactOptions::for_dimension(n))?;
                results["kkt"] = to_value(&rep);
            }
            if let Some(path) = emit_g {
                write(path, &poly_to_string(&g))?;
            }
            Ok(Done { inputs, results, cfg, warnings })
        }
        Command::Polar { g, samples, mc_samples } => {
            let p = load_poly(g)?;
            let cfg = quad_config(&cli.quad, p.n())?;
            let gp = Phf::polynomial(p.clone());
            let table = std::sync::Arc::new(conjugate_phf(&gp, None)?);
            let vol = polar_volume_with(&table, &cfg)?;
            if vol.infinite_directions > 0 {
                warnings.push(format!("{} directions with infinite conjugate were excluded", vol.infinite_directions));
            }
            let mut results = json!({
                "q": table.degree_q(),
                "conjugate_sample": to_value(&table.sample(*samples)),
                "polar_volume": to_value(&vol),
            });
            if let Some(m) = mc_samples {
                let (v, se) = polar_volume_mc(&gp, *m, cfg.seed)?;
                results["support_function_mc"] = json!({"volume": v, "std_error": se, "samples": m});
            }
            Ok(Done {
                inputs: json!({"command": "polar", "g": record(&p), "samples": samples, "mc_samples": mc_samples, "quadrature": quad_inputs(&cfg)}),
                results,
                cfg,
                warnings,
            })
        }
        Command::Gausslike { d, n, find_critical, max_iters } => {
            let cfg = quad_config(&cli.quad, *n)?;
            let sf = SigmaForm::identity(*n, *d)?;
            let theta = gausslike::theta_d(&sf, &cfg)?;
            let trace = gausslike::trace_identity_residual(&sf, &cfg)?;
            let mut results = json!({
                "theta": theta,
                "k": sf.k_const(),
                "ell": sf.ell(),
                "trace_identity_residual": trace,
                "critical_residual": gausslike::critical_residual(&sf, &cfg)?,
                "iterations": 0,
            });
            if *find_critical {
                let found = gausslike::find_critical_sigma(&sf, *max_iters, &cfg)?;
                if !found.converged {
                    warnings.push(format!("critical search stopped at residual {:e}", found.residual));
                }
                results["critical_residual"] = json!(found.residual);
                results["iterations"] = json!(found.iterations);
                results["critical"] = to_value(&found.summary());
                results["theta_at_critical"] = json!(gausslike::theta_d(&found.sigma, &cfg)?);
            }
            Ok(Done {
                inputs: json!({"command": "gausslike", "d": d, "n": n, "find_critical": find_critical, "max_iters": max_iters, "quadrature": quad_inputs(&cfg)}),
                results,
                cfg,
                warnings,
            })
        }
        Command::Moments { body, degree, emit_body } => {
            let body = load_body(body)?;
            let cfg = quad_config(&cli.quad, body.n())?;
            let z = lebesgue_moments(&body, *degree, &cfg)?;
            if let Some(path) = emit_body {
                write(path, &body_to_string(&body))?;
            }
            Ok(Done {
                inputs: json!({"command": "moments", "body": to_value(&body), "degree": degree, "quadrature": quad_inputs(&cfg)}),
                results: json!({"provenance": to_value(z.provenance()), "moments": to_value(&z.records())}),
                cfg,
                warnings,
            })
        }
    }
}
