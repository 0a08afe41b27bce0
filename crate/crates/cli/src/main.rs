//! `trikernel`: command-line front end.
//!
//! Every command prints JSON (or CSV for `curve`) on stdout. Failures print
//! `{"error": kind, "message": ...}` on stderr and exit with 2 (invalid input
//! or configuration) or 3 (a numeric check missed its tolerance).

mod verify;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64 as C64;
use serde_json::{json, Value};

use trikernel::bvp::{theorem2_D0_series, ContourKind, DiagonalSolver, Method, SolverSettings};
use trikernel::conformal::{
    anti_tutte_pair, check_w_ode, decoupling_residuals, gluing_for, gluing_residual, ode_data, ode_samples, GluingKind,
};
use trikernel::enumerate::{count_walks, layer_json, Domain};
use trikernel::geometry::{trace_curve, CurveParam};
use trikernel::kernel::{build_kernel, KernelData};
use trikernel::model::{group_order, phi_transform, preset, validate, StepSet, DEFAULT_MAX_ITER};
use trikernel::rational::{self, to_f64};
use trikernel::{Error, Q};

#[derive(Parser)]
#[command(name = "trikernel", version, about = "Walks in the three-quadrant cone: enumeration and the analytic diagonal")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ModelArg {
    /// Preset name or path to a JSON model file `{"name": .., "steps": [[i, j], ..]}`.
    #[arg(long)]
    model: String,
}

#[derive(Args, Clone)]
struct TArg {
    /// Value of `t`, as a decimal or a fraction such as `1/10`.
    #[arg(long, allow_hyphen_values = true)]
    t: String,
}

#[derive(Subcommand)]
enum Command {
    /// Count walks and write the layer of length `n`.
    Enumerate {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long, default_value = "3q")]
        domain: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Kernel coefficients of the transformed model and its branch points.
    Kernel {
        #[command(flatten)]
        model: ModelArg,
        #[command(flatten)]
        t: TArg,
        #[arg(long)]
        json: bool,
    },
    /// Samples of the curve `ℒ` as CSV rows `x_param,re_y,im_y`.
    Curve {
        #[command(flatten)]
        model: ModelArg,
        #[command(flatten)]
        t: TArg,
        #[arg(long, default_value_t = 512)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Residuals of the gluing function and the anti-Tutte pair.
    Gluing {
        #[command(flatten)]
        model: ModelArg,
        #[command(flatten)]
        t: TArg,
        /// `all`, `symmetry`, `ode` or `decoupling`.
        #[arg(long, default_value = "all")]
        check: String,
    },
    /// Evaluates the diagonal `D(y)`.
    Solve {
        #[command(flatten)]
        model: ModelArg,
        /// `thm1`, `thm2` or `series`.
        #[arg(long, default_value = "thm2")]
        method: String,
        #[command(flatten)]
        t: TArg,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        y: f64,
        /// Imaginary part of `y`.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        y_im: f64,
        /// `curve` or `circle` (theorem 2 only).
        #[arg(long, default_value = "curve")]
        contour: String,
        /// Trapezoidal nodes on the closed contour.
        #[arg(long, default_value_t = 256)]
        nodes: usize,
        /// Relative tolerance on the mesh-halving estimate.
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
        #[arg(long)]
        json: bool,
    },
    /// Exact series of `D(0)` for the reverse Kreweras model.
    D0Series {
        /// `D(0)` is printed modulo `t^order`.
        #[arg(long, default_value_t = 24)]
        order: i64,
        #[arg(long)]
        json: bool,
    },
    /// Runs the exact checks (and with `--all` the numeric ones) on a model.
    Verify {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        all: bool,
        #[arg(long, default_value = "1/10")]
        t: String,
    },
    /// Order of the group of the model.
    Group {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: u32,
    },
    /// The change of variables `(i, j) -> (i - j, i)` applied to the steps.
    Phi {
        #[command(flatten)]
        model: ModelArg,
    },
}

pub enum Failure {
    Invalid(String, String),
    Tolerance(Value),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let dbg = format!("{:?}", e);
        let kind = dbg.split(['(', ' ', '{']).next().unwrap_or("Error").to_string();
        match e {
            Error::NoConvergence(_)
            | Error::QuadratureNotConverged(_)
            | Error::TruncationInsufficient(_)
            | Error::PhaseJumpTooLarge(_)
            | Error::BranchDiscontinuity(_)
            | Error::ClassificationFailure(_) => Failure::Tolerance(json!({ "error": kind, "message": e.to_string() })),
            _ => Failure::Invalid(kind, e.to_string()),
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Invalid("InvalidInput".into(), msg.into())
}

pub fn load_model(spec: &str) -> std::result::Result<StepSet, Failure> {
    if let Ok(m) = preset(spec) {
        return Ok(m);
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(invalid(format!("{} is neither a preset nor a model file", spec)));
    }
    let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {}", spec, e)))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {}", spec, e)))?;
    Ok(StepSet::from_json(&v)?)
}

/// Parses `t` and checks `0 < t < 1/|S|` exactly.
pub fn parse_t(s: &str, hat: &StepSet) -> std::result::Result<f64, Failure> {
    let t: Q = rational::parse(s)
        .or_else(|| s.parse::<f64>().ok().and_then(Q::from_float))
        .ok_or_else(|| invalid(format!("cannot read t = {}", s)))?;
    let size = Q::from_integer((hat.len() as i64).into());
    if t <= Q::from_integer(0.into()) || &t * &size >= Q::from_integer(1.into()) {
        return Err(invalid(format!("t = {} is outside (0, 1/{})", s, hat.len())));
    }
    Ok(to_f64(&t))
}

pub fn image_kernel(hat: &StepSet) -> std::result::Result<KernelData, Failure> {
    Ok(build_kernel(&phi_transform(hat))?)
}

fn emit(v: &Value, out: Option<&Path>) -> Outcome {
    let text = serde_json::to_string_pretty(v).expect("JSON values serialise");
    write_out(&(text + "\n"), out)
}

fn write_out(text: &str, out: Option<&Path>) -> Outcome {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| invalid(format!("{}: {}", p.display(), e))),
        None => {
            print!("{}", text);
            Ok(())
        }
    }
}

fn steps_json(s: &StepSet) -> Value {
    s.to_json()["steps"].clone()
}

fn complex(z: C64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

fn run(cmd: Command) -> Outcome {
    match cmd {
        Command::Enumerate { model, domain, n, out } => {
            let hat = load_model(&model.model)?;
            let table = count_walks(&hat, Domain::parse(&domain)?, (0, 0), n)?;
            emit(&layer_json(&table, n), out.as_deref())
        }
        Command::Kernel { model, t, json } => {
            let hat = load_model(&model.model)?;
            let t = parse_t(&t.t, &hat)?;
            let kd = image_kernel(&hat)?;
            let bp = kd.at(t)?.branch_points()?;
            if json {
                let mut v = kd.to_json();
                v["t"] = json!(t);
                v["branch_points"] = serde_json::to_value(bp).expect("branch points serialise");
                emit(&v, None)
            } else {
                let v = kd.to_json();
                let mut s = format!("steps {}\n", phi_transform(&hat));
                for key in ["a", "b", "c", "a_tilde", "b_tilde", "c_tilde", "d", "d_tilde"] {
                    s.push_str(&format!("{:8} {}\n", key, v[key].as_str().unwrap_or("")));
                }
                let inf = |o: Option<f64>| o.map(|v| format!("{:.15e}", v)).unwrap_or_else(|| "inf".into());
                s.push_str(&format!(
                    "x1..x4  {:.15e} {:.15e} {:.15e} {}\ny1..y4  {:.15e} {:.15e} {:.15e} {}\n",
                    bp.x1, bp.x2, bp.x3, inf(bp.x4), bp.y1, bp.y2, bp.y3, inf(bp.y4)
                ));
                write_out(&s, None)
            }
        }
        Command::Curve { model, t, n, out } => {
            let hat = load_model(&model.model)?;
            let t = parse_t(&t.t, &hat)?;
            let contour = trace_curve(&image_kernel(&hat)?.at(t)?, n)?;
            write_out(&contour.to_csv(), out.as_deref())
        }
        Command::Gluing { model, t, check } => gluing(&model.model, &t.t, &check),
        Command::Solve { model, method, t, y, y_im, contour, nodes, tolerance, json } => {
            let settings = SolverSettings { n_decoupled: nodes, tolerance, ..SolverSettings::default() };
            solve(&model.model, &method, &t.t, C64::new(y, y_im), &contour, settings, json)
        }
        Command::D0Series { order, json } => {
            if order < 1 {
                return Err(invalid("order must be positive"));
            }
            let s = theorem2_D0_series(order)?;
            if json {
                emit(&json!({ "order": order, "series": serde_json::to_value(s.to_serial()).expect("series serialise"), "text": s.to_string() }), None)
            } else {
                write_out(&format!("{}\n", s), None)
            }
        }
        Command::Verify { model, all, t } => verify::run(&model.model, all, &t),
        Command::Group { model, max_iter } => {
            let hat = load_model(&model.model)?;
            let order = group_order(&hat, max_iter)?;
            emit(&json!({ "model": hat.to_json(), "order": order.to_string(), "finite": matches!(order, trikernel::GroupOrder::Finite(_)) }), None)
        }
        Command::Phi { model } => {
            let hat = load_model(&model.model)?;
            let image = phi_transform(&hat);
            emit(
                &json!({
                    "model": hat.to_json(),
                    "validation": serde_json::to_value(validate(&hat)).expect("validation serialises"),
                    "phi": steps_json(&image),
                    "phi_text": image.to_string(),
                    "small": image.is_small(),
                }),
                None,
            )
        }
    }
}

fn gluing(model: &str, t: &str, check: &str) -> Outcome {
    if !["all", "symmetry", "ode", "decoupling"].contains(&check) {
        return Err(invalid(format!("unknown check {}", check)));
    }
    let hat = load_model(model)?;
    let t = parse_t(t, &hat)?;
    let kd = image_kernel(&hat)?;
    let k = kd.at(t)?;
    let w = gluing_for(&kd, t)?;
    let kind = w.kind();
    let explicit = !matches!(kind, GluingKind::WeierstrassComposite);
    let mut checks = Vec::new();
    let bounded = CurveParam::new(&k)?.bounded;
    if !bounded && check != "symmetry" {
        checks.push(json!({ "name": check, "skipped": "the curve is unbounded" }));
    }
    let mut push = |name: &str, value: f64, tol: f64| {
        checks.push(json!({ "name": name, "value": value, "tolerance": tol, "pass": value < tol }));
    };
    if check == "all" || check == "symmetry" {
        push("symmetry", gluing_residual(&w, &k, 50)?, if explicit { 1e-8 } else { 1e-6 });
    }
    if bounded && (check == "all" || check == "ode") {
        let samples = ode_samples(&k, 20)?;
        push("ode", check_w_ode(&w, &k, &samples)?, if explicit { 1e-7 } else { 1e-5 });
    }
    if bounded && (check == "all" || check == "decoupling") {
        let (wp, _) = ode_data(&w, &k)?;
        let (anti, ratio) = decoupling_residuals(&anti_tutte_pair(&wp, &k)?, &k, 50)?;
        push("anti_tutte", anti, 1e-6);
        push("decoupling_ratio", ratio, 1e-6);
    }
    let pass = checks.iter().all(|c| c["pass"] != json!(false));
    let report = json!({ "model": hat.to_json(), "t": t, "gluing": kind, "checks": checks, "pass": pass });
    emit(&report, None)?;
    if pass {
        Ok(())
    } else {
        Err(Failure::Tolerance(json!({ "error": "ToleranceExceeded", "message": "gluing residuals above tolerance" })))
    }
}

fn solve(model: &str, method: &str, t: &str, y: C64, contour: &str, settings: SolverSettings, as_json: bool) -> Outcome {
    let method = Method::parse(method)?;
    let kind = match contour {
        "curve" => ContourKind::Curve,
        "circle" | "unit-circle" => ContourKind::UnitCircle,
        _ => return Err(invalid(format!("unknown contour {}", contour))),
    };
    let hat = load_model(model)?;
    let t = parse_t(t, &hat)?;
    let solver = DiagonalSolver::new(&hat, t, settings)?;
    let mut v = json!({
        "model": hat.to_json(),
        "method": method,
        "t": t,
        "y": complex(y),
        "indices": serde_json::to_value(solver.indices).expect("indices serialise"),
        "gluing": solver.w.kind(),
    });
    let converged = match method {
        Method::Theorem2 => {
            let r = solver.theorem2_on(y, kind)?;
            v["value"] = complex(r.value);
            v["error_estimate"] = json!(r.error);
            v["contour"] = json!({ "kind": r.contour, "nodes": r.nodes });
            v["converged"] = json!(r.converged);
            r.converged
        }
        Method::Theorem1 => {
            let d = solver.theorem1_D(y)?;
            // The decoupled formula serves as the error estimate.
            let other = solver.theorem2_on(y, ContourKind::Curve)?;
            let err = (d - other.value).norm();
            v["value"] = complex(d);
            v["error_estimate"] = json!(err);
            v["contour"] = json!({ "kind": "slit", "nodes": solver.settings.n_index });
            let ok = err <= 1e-4 * other.value.norm().max(1.0);
            v["converged"] = json!(ok);
            ok
        }
        Method::Theorem2SeriesAtZero => {
            let d = solver.evaluate(method, y)?;
            let s = theorem2_D0_series(24)?;
            let last = s.iter().last().map(|(e, c)| to_f64(c).abs() * t.powf(*e.numer() as f64 / *e.denom() as f64));
            v["value"] = complex(d);
            v["error_estimate"] = json!(last.unwrap_or(0.0));
            v["contour"] = json!({ "kind": "series", "order": 24 });
            v["converged"] = json!(true);
            true
        }
    };
    if as_json {
        emit(&v, None)?;
    } else {
        write_out(&format!("D({}) = {}\n", y, C64::new(v["value"]["re"].as_f64().unwrap_or(f64::NAN), v["value"]["im"].as_f64().unwrap_or(f64::NAN))), None)?;
    }
    if converged {
        Ok(())
    } else {
        Err(Failure::Tolerance(json!({ "error": "ToleranceExceeded", "message": "error estimate above tolerance" })))
    }
}

fn init_threads() -> Outcome {
    if let Ok(s) = std::env::var("TRIKERNEL_THREADS") {
        let n: usize = s.parse().map_err(|_| invalid(format!("TRIKERNEL_THREADS = {} is not a count", s)))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| invalid(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match init_threads().and_then(|_| run(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(kind, message)) => {
            eprintln!("{}", json!({ "error": kind, "message": message }));
            ExitCode::from(2)
        }
        Err(Failure::Tolerance(v)) => {
            eprintln!("{}", v);
            ExitCode::from(3)
        }
    }
}
