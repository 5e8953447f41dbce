use hardy::calculus::{parse_expression, ScalarFieldExpr};
use hardy::geometry::GeometryContext;
use hardy::quadrature::{build_grid, TestFunction};
use hardy::verify::{check_identity_batch, check_identity_lp, make_bump_checked};
use hardy::weights::{FrameVector, WeightProblem};
use std::time::Instant;

fn sign_definite(u: &TestFunction) -> bool {
    let bx = u.support();
    let d = bx.len();
    let per = 9usize;
    let total: usize = per.pow(d as u32);
    let mut point = vec![0.0; d];
    let mut pos = 0;
    let mut neg = 0;
    for idx in 0..total {
        let mut rem = idx;
        for a in (0..d).rev() {
            let i = rem % per;
            rem /= per;
            let t = (i as f64 + 1.0) / (per as f64 + 1.0);
            point[a] = bx[a][0] + t * (bx[a][1] - bx[a][0]);
        }
        let v = u.value(&point);
        if v > 0.0 { pos += 1 } else if v < 0.0 { neg += 1 }
    }
    pos == 0 || neg == 0
}

fn main() {
    let ctx = GeometryContext::euclidean(3);
    let f = parse_expression("pow(norm(x1,x2,x3), -1)").unwrap();
    let prob = WeightProblem::field(
        ctx.clone(),
        ScalarFieldExpr::constant(1.0),
        FrameVector::NegLogGrad(f.clone()),
    )
    .with_p(1.5);
    let bx = [[1.0, 2.0], [1.0, 2.0], [1.0, 2.0]];
    // collect 8 sign-definite bumps
    let mut bumps = Vec::new();
    let mut seed = 0u64;
    while bumps.len() < 8 {
        let u = make_bump_checked(&ctx, &bx, seed).unwrap();
        if sign_definite(&u) {
            bumps.push(u);
        }
        seed += 1;
    }
    println!("scanned {} seeds for 8 sign-definite bumps", seed);
    for n in [24usize, 32, 40] {
        let grid = build_grid(&bx, n).unwrap();
        let mut worst_c = 0.0f64;
        let mut worst_f = 0.0f64;
        let t0 = Instant::now();
        for u in &bumps {
            let rep = check_identity_lp(&prob, u, &grid).unwrap();
            worst_c = worst_c.max(rep.coarse.relative_residual);
            worst_f = worst_f.max(rep.fine.relative_residual);
        }
        println!("lp15-signdef N={n:3}  coarse {worst_c:.3e}  fine {worst_f:.3e}  [{:?}]", t0.elapsed());
    }

    // grushin at N=24, 26
    let d = 3usize;
    let ctxg = GeometryContext::grushin(d, 1, 1.0);
    let sx = "x1*x1 + x2*x2 + x3*x3";
    let rho224 = format!("pow({sx}, 2) + 4*(y1*y1)");
    let fexpr = format!("pow({sx}, {}) * pow({rho224}, {})", (2.0 - d as f64) / 4.0, -1.0 / 4.0);
    let fg = parse_expression(&fexpr).unwrap();
    let probg = WeightProblem::potential(ctxg.clone(), ScalarFieldExpr::constant(1.0), fg);
    let bxg = [[0.3, 1.0], [0.3, 1.0], [0.3, 1.0], [0.3, 1.0]];
    for n in [24usize, 26] {
        let grid = build_grid(&bxg, n).unwrap();
        let t0 = Instant::now();
        let bumps: Vec<_> = (0..6).map(|s| make_bump_checked(&ctxg, &bxg, s).unwrap()).collect();
        let reps = check_identity_batch(&probg, &bumps, &grid).unwrap();
        let worst_c = reps.iter().map(|r| r.coarse.relative_residual).fold(0.0f64, f64::max);
        let worst_f = reps.iter().map(|r| r.fine.relative_residual).fold(0.0f64, f64::max);
        println!("grushin4d N={n:3}  coarse {worst_c:.3e}  fine {worst_f:.3e}  [{:?}]", t0.elapsed());
    }

    // edge at N=28, 30 with budget raised
    let ctxe = GeometryContext::edge(2, 1);
    let fe = parse_expression("pow(t, 0.5)").unwrap();
    let probe = WeightProblem::potential(ctxe.clone(), ScalarFieldExpr::constant(1.0), fe);
    let bxe = [[0.15, 0.85], [-1.0, 1.0], [-1.0, 1.0], [-1.0, 1.0]];
    for n in [28usize, 30] {
        let grid = hardy::quadrature::build_grid_with_budget(&bxe, n, 14_000_000).unwrap();
        let t0 = Instant::now();
        let bumps: Vec<_> = (0..6).map(|s| make_bump_checked(&ctxe, &bxe, s).unwrap()).collect();
        let reps = check_identity_batch(&probe, &bumps, &grid).unwrap();
        let worst_c = reps.iter().map(|r| r.coarse.relative_residual).fold(0.0f64, f64::max);
        let worst_f = reps.iter().map(|r| r.fine.relative_residual).fold(0.0f64, f64::max);
        println!("edge4d N={n:3}  coarse {worst_c:.3e}  fine {worst_f:.3e}  [{:?}]", t0.elapsed());
    }
}
