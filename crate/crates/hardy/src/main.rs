//! `hardy` — run the weighted-inequality scenario catalog and the individual
//! tools (weight derivation, identity checks, shooting, eigensolver) from the
//! command line. Exit codes: 0 all PASS, 1 any FAIL, 2 usage/config error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use hardy::bench::{catalog, emit_report, find_scenario, list_scenarios, run_scenario, RunConfig};
use hardy::calculus::ScalarFieldExpr;
use hardy::constants::{bessel_threshold, sl_min, BesselProblem, BoundaryCondition, SturmLiouvilleProblem};
use hardy::geometry::{FramePoint, GeometryContext};
use hardy::quadrature::build_grid;
use hardy::verify::{check_identity, check_identity_lp, make_bump_checked};
use hardy::weights::{FrameVector, WeightProblem};

#[derive(Parser)]
#[command(name = "hardy", version, about = "weighted Hardy inequality workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List catalog scenarios with their anchors.
    List,
    /// Run one scenario (or `all`), printing PASS/FAIL per scenario.
    Run {
        /// Scenario id or `all`.
        id: String,
        /// Override nodes per axis for identity checks.
        #[arg(long)]
        nodes: Option<usize>,
        /// Bumps per identity check.
        #[arg(long, default_value_t = 20)]
        seeds: usize,
        /// Relative identity residual tolerance.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Base seed.
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Write the JSON report(s) to this path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Derive the weight W at a point from (V, f).
    Derive {
        /// Geometry spec, e.g. `heisenberg:n=1`, `grushin:d=3,k=1,gamma=1`.
        #[arg(long)]
        ctx: String,
        #[arg(long = "V", value_name = "EXPR")]
        v: String,
        #[arg(long = "f", value_name = "EXPR")]
        f: String,
        /// Exponent p (p = 2 is the quadratic identity).
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// Evaluation point, comma-separated.
        #[arg(long)]
        at: String,
    },
    /// Check the integral identity on a random bump.
    Identity {
        #[arg(long)]
        ctx: String,
        #[arg(long = "V", value_name = "EXPR")]
        v: String,
        /// Positive potential f (field source alternative: --F).
        #[arg(long = "f", value_name = "EXPR", conflicts_with = "field")]
        f: Option<String>,
        /// Frame components of F, separated by `;`.
        #[arg(long = "F", value_name = "EXPRS")]
        field: Option<String>,
        /// Support box, axes separated by `;`, bounds by `,`: `1,2;1,2;1,2`.
        #[arg(long)]
        support: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 24)]
        nodes: usize,
    },
    /// Bisect the best constant of a radial Bessel pair.
    Bessel {
        #[arg(long)]
        n: usize,
        #[arg(long = "V", value_name = "EXPR")]
        v: String,
        #[arg(long = "W", value_name = "EXPR")]
        w: String,
        /// Initial bracket `lo,hi`.
        #[arg(long)]
        bracket: String,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
    },
    /// Smallest Sturm-Liouville eigenvalue.
    Sl {
        /// Interval `a,b`.
        #[arg(long)]
        interval: String,
        #[arg(long = "P", value_name = "EXPR")]
        p: String,
        #[arg(long = "Q", value_name = "EXPR")]
        q: String,
        #[arg(long = "R", value_name = "EXPR")]
        r: String,
        /// Boundary conditions `d|n,d|n`.
        #[arg(long, default_value = "n,n")]
        bc: String,
        #[arg(long, default_value_t = 1024)]
        mesh: usize,
    },
}

fn parse_point(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("bad coordinate `{p}`: {e}")))
        .collect()
}

fn parse_box(s: &str) -> Result<Vec<[f64; 2]>, String> {
    s.split(';')
        .map(|axis| {
            let v = parse_point(axis)?;
            if v.len() != 2 {
                return Err(format!("axis `{axis}` needs `lo,hi`"));
            }
            Ok([v[0], v[1]])
        })
        .collect()
}

fn parse_expr(s: &str) -> Result<ScalarFieldExpr, String> {
    ScalarFieldExpr::parse(s).map_err(|e| e.to_string())
}

fn run() -> Result<ExitCode, String> {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            for s in list_scenarios() {
                let anchors: Vec<&str> = s.anchors.iter().map(|a| a.reference.as_str()).collect();
                println!("{:<26} {}  [{}]", s.id, s.description, anchors.join(", "));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Run { id, nodes, seeds, tol, seed, out } => {
            let config =
                RunConfig { nodes_override: nodes, seeds, tol_identity: tol, base_seed: seed };
            let scenarios: Vec<&hardy::bench::Scenario> = if id == "all" {
                catalog().iter().collect()
            } else {
                vec![find_scenario(&id).ok_or_else(|| format!("unknown scenario `{id}`"))?]
            };
            let reports: Result<Vec<_>, _> =
                scenarios.par_iter().map(|s| run_scenario(s, &config)).collect();
            let reports = reports.map_err(|e| e.to_string())?;
            let mut all_pass = true;
            for r in &reports {
                let mark = if r.passed() { "PASS" } else { "FAIL" };
                all_pass &= r.passed();
                println!("{mark}  {:<26} ({} checks)", r.scenario_id, r.checks.len());
            }
            if let Some(path) = out {
                if reports.len() == 1 {
                    emit_report(&reports[0], &path).map_err(|e| e.to_string())?;
                } else {
                    let json = serde_json::to_string_pretty(&reports).map_err(|e| e.to_string())?;
                    std::fs::write(&path, json).map_err(|e| e.to_string())?;
                }
                eprintln!("wrote {}", path.display());
            }
            Ok(if all_pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Derive { ctx, v, f, p, at } => {
            let ctx = GeometryContext::parse(&ctx).map_err(|e| e.to_string())?;
            let point = parse_point(&at)?;
            let prob = if p == 2.0 {
                WeightProblem::potential(ctx.clone(), parse_expr(&v)?, parse_expr(&f)?)
            } else {
                WeightProblem::field(
                    ctx.clone(),
                    parse_expr(&v)?,
                    FrameVector::NegLogGrad(parse_expr(&f)?),
                )
                .with_p(p)
            };
            let fp = FramePoint::new(&ctx, &point).map_err(|e| e.to_string())?;
            let w = prob.derived_weight(&fp).map_err(|e| e.to_string())?;
            println!("{w:.15e}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Identity { ctx, v, f, field, support, seed, p, nodes } => {
            let ctx = GeometryContext::parse(&ctx).map_err(|e| e.to_string())?;
            let bx = parse_box(&support)?;
            let source = match (f, field) {
                (Some(f), None) if p == 2.0 => {
                    hardy::weights::WeightSource::Potential(parse_expr(&f)?)
                }
                (Some(f), None) => {
                    hardy::weights::WeightSource::Field(FrameVector::NegLogGrad(parse_expr(&f)?))
                }
                (None, Some(comps)) => {
                    let parts: Result<Vec<_>, String> =
                        comps.split(';').map(|c| parse_expr(c.trim())).collect();
                    hardy::weights::WeightSource::Field(FrameVector::Components(
                        hardy::calculus::VectorFieldExpr::new(parts?),
                    ))
                }
                _ => return Err("provide exactly one of --f or --F".into()),
            };
            let mut prob =
                WeightProblem::potential(ctx.clone(), parse_expr(&v)?, ScalarFieldExpr::constant(1.0));
            prob.source = source;
            prob.p_exponent = p;
            let u = make_bump_checked(&ctx, &bx, seed).map_err(|e| e.to_string())?;
            let grid = build_grid(&bx, nodes).map_err(|e| e.to_string())?;
            let rep = if p == 2.0 {
                check_identity(&prob, &u, &grid).map_err(|e| e.to_string())?
            } else {
                check_identity_lp(&prob, &u, &grid).map_err(|e| e.to_string())?
            };
            println!(
                "{}",
                serde_json::json!({
                    "resolutions": [rep.grid_resolutions.0, rep.grid_resolutions.1],
                    "coarse": {
                        "lhs": rep.coarse.lhs,
                        "weight_term": rep.coarse.weight_term,
                        "remainder_term": rep.coarse.remainder_term,
                        "relative_residual": rep.coarse.relative_residual,
                    },
                    "fine": {
                        "lhs": rep.fine.lhs,
                        "weight_term": rep.fine.weight_term,
                        "remainder_term": rep.fine.remainder_term,
                        "relative_residual": rep.fine.relative_residual,
                    },
                    "pointwise_remainder_min": rep.pointwise_remainder_min,
                })
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Bessel { n, v, w, bracket, tol } => {
            let b = parse_point(&bracket)?;
            if b.len() != 2 {
                return Err("--bracket needs `lo,hi`".into());
            }
            let prob = BesselProblem::new(n, parse_expr(&v)?, parse_expr(&w)?, 0.0);
            let thr = bessel_threshold(&prob, (b[0], b[1]), tol).map_err(|e| e.to_string())?;
            println!("{thr:.6}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Sl { interval, p, q, r, bc, mesh } => {
            let iv = parse_point(&interval)?;
            if iv.len() != 2 {
                return Err("--interval needs `a,b`".into());
            }
            let bcs: Vec<&str> = bc.split(',').collect();
            if bcs.len() != 2 {
                return Err("--bc needs `d|n,d|n`".into());
            }
            let parse_bc = |s: &str| {
                BoundaryCondition::parse(s.trim()).ok_or_else(|| format!("bad boundary `{s}`"))
            };
            let prob = SturmLiouvilleProblem {
                interval: (iv[0], iv[1]),
                p: parse_expr(&p)?,
                q: parse_expr(&q)?,
                r: parse_expr(&r)?,
                bc: (parse_bc(bcs[0])?, parse_bc(bcs[1])?),
                mesh,
            };
            let res = sl_min(&prob).map_err(|e| e.to_string())?;
            println!(
                "{:.8}  (mesh {}); {:.8}  (mesh {})",
                res.coarse,
                prob.mesh,
                res.fine,
                2 * prob.mesh
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
