//! Identity and inequality checks on test functions.
//!
//! For a weight problem the master identity says
//! `∫V‖∇_g u‖² dg = ∫W u² dg + ∫V‖∇_g u + uF‖² dg` exactly; jets are exact, so
//! the reported residual is pure quadrature error. Every report carries the
//! values at two resolutions (N and 2N nodes per axis) as a defense against
//! silent under-resolution: acceptance reads the finer one.

use rayon::prelude::*;

use crate::calculus::EvalError;
use crate::geometry::{FramePoint, GeometryError};
use crate::quadrature::{make_bump, QuadratureError, QuadratureGrid, TestFunction};
use crate::weights::{WeightError, WeightEvaluator, WeightProblem, WeightSource};

#[derive(Debug, Clone, thiserror::Error)]
pub enum VerifyError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("operation requires p = 2, problem has p = {0}")]
    NeedsPTwo(f64),
    #[error("test function support {support:?} is not inside the grid box {grid:?}")]
    SupportOutsideGrid { support: Vec<[f64; 2]>, grid: Vec<[f64; 2]> },
    #[error("problem has no target weight")]
    MissingTarget,
    #[error(
        "pointwise remainder R(u,F) = {value} < -1e-12 at {node:?}; the identity algebra is violated"
    )]
    NegativePointwiseRemainder { value: f64, node: Vec<f64> },
}

/// Integral values of one identity check at one resolution.
#[derive(Debug, Clone)]
pub struct IdentityValues {
    /// `∫ V ‖∇_g u‖^p dg`
    pub lhs: f64,
    /// `∫ W |u|^p dg`
    pub weight_term: f64,
    /// `∫ V ‖∇_g u + uF‖^p dg` (or the `L^p` remainder integral)
    pub remainder_term: f64,
    /// `lhs - weight_term - remainder_term`
    pub residual: f64,
    /// `|residual| / max(|lhs|, 1e-300)`
    pub relative_residual: f64,
    /// `lhs - weight_term`, the inequality margin
    pub margin: f64,
    /// Second algebraic form of the potential remainder `f²‖∇_g(u/f)‖²`,
    /// when the source is a potential.
    pub remainder_alt: Option<f64>,
}

impl IdentityValues {
    fn from_sums(lhs: f64, weight_term: f64, remainder_term: f64, alt: Option<f64>) -> Self {
        let residual = lhs - weight_term - remainder_term;
        IdentityValues {
            lhs,
            weight_term,
            remainder_term,
            residual,
            relative_residual: residual.abs() / lhs.abs().max(1e-300),
            margin: lhs - weight_term,
            remainder_alt: alt,
        }
    }
}

/// Identity check result at the requested and doubled resolutions.
#[derive(Debug, Clone)]
pub struct IdentityReport {
    pub grid_resolutions: (usize, usize),
    pub coarse: IdentityValues,
    pub fine: IdentityValues,
    /// Minimum over all nodes of the pointwise `L^p` remainder integrand
    /// (only populated by the `L^p` check; must be ≥ -1e-12).
    pub pointwise_remainder_min: Option<f64>,
}

impl IdentityReport {
    /// The values acceptance reads: the finer resolution.
    pub fn values(&self) -> &IdentityValues {
        &self.fine
    }
}

/// Inequality margin report: `∫V‖∇u‖^p dg - c ∫ target·|u|^p dg` at two
/// resolutions.
#[derive(Debug, Clone)]
pub struct MarginReport {
    pub grid_resolutions: (usize, usize),
    pub claimed: f64,
    pub lhs: (f64, f64),
    pub target_term: (f64, f64),
    pub margin: (f64, f64),
}

impl MarginReport {
    pub fn pass(&self, tol: f64) -> bool {
        self.margin.1 >= -tol
    }
}

/// Build a bump after validating the support against the context's chart
/// domain and singular margin.
pub fn make_bump_checked(
    ctx: &crate::geometry::GeometryContext,
    support_box: &[[f64; 2]],
    seed: u64,
) -> Result<TestFunction, GeometryError> {
    ctx.validate_support(support_box)?;
    Ok(make_bump(support_box, seed))
}

fn check_support(u: &TestFunction, grid: &QuadratureGrid) -> Result<(), VerifyError> {
    let inside = u.support().len() == grid.bounds().len()
        && u.support()
            .iter()
            .zip(grid.bounds())
            .all(|(s, g)| s[0] >= g[0] - 1e-12 && s[1] <= g[1] + 1e-12);
    if !inside {
        return Err(VerifyError::SupportOutsideGrid {
            support: u.support().to_vec(),
            grid: grid.bounds().to_vec(),
        });
    }
    Ok(())
}

/// One fused quadrature pass for a batch of bumps at one resolution.
///
/// Geometry and weight data are evaluated once per node and shared across all
/// bumps; only the cheap test-function jets vary.
fn identity_pass(
    evaluator: &WeightEvaluator<'_>,
    bumps: &[TestFunction],
    grid: &QuadratureGrid,
    potential_source: bool,
) -> Result<Vec<IdentityValues>, VerifyError> {
    let ctx = &evaluator.problem().ctx;
    let nb = bumps.len();
    let dims = 4 * nb;
    let m = ctx.ambient_dim();
    let k = ctx.frame_size();
    let sums = grid.par_sum_vec(dims, |point, out| -> Result<(), VerifyError> {
        out.fill(0.0);
        // geometry/weight data is evaluated lazily on the first bump that is
        // alive at this node, then shared
        let mut shared: Option<(FramePoint<'_>, crate::weights::WeightNode)> = None;
        let mut ugrad = [0.0f64; crate::quadrature::MAX_DIM];
        let mut gu = [0.0f64; crate::quadrature::MAX_DIM];
        for (b, bump) in bumps.iter().enumerate() {
            let u = bump.value_grad(point, &mut ugrad[..m]);
            if u == 0.0 && ugrad[..m].iter().all(|g| *g == 0.0) {
                continue;
            }
            if shared.is_none() {
                let fp = FramePoint::new_unvalidated(ctx, point)?;
                let node = evaluator.node(&fp)?;
                shared = Some((fp, node));
            }
            let (fp, node) = shared.as_ref().unwrap();
            let omega = fp.omega();
            fp.gradient_values_into(&ugrad[..m], &mut gu[..k]);
            let gsq: f64 = gu[..k].iter().map(|g| g * g).sum();
            out[4 * b] = node.v * gsq * omega;
            out[4 * b + 1] = node.w * u * u * omega;
            let rem: f64 = gu[..k]
                .iter()
                .zip(&node.f_frame)
                .map(|(g, f)| (g + u * f) * (g + u * f))
                .sum();
            out[4 * b + 2] = node.v * rem * omega;
            if let Some((fval, fgrad)) = &node.potential {
                // f²‖∇_g(u/f)‖² assembled through the quotient rule
                let alt: f64 = gu[..k]
                    .iter()
                    .zip(fgrad)
                    .map(|(g, gf)| {
                        let d = (g * fval - u * gf) / (fval * fval);
                        fval * fval * d * d
                    })
                    .sum();
                out[4 * b + 3] = node.v * alt * omega;
            }
        }
        Ok(())
    })?;
    Ok((0..nb)
        .map(|b| {
            let alt = if potential_source { Some(sums[4 * b + 3]) } else { None };
            IdentityValues::from_sums(sums[4 * b], sums[4 * b + 1], sums[4 * b + 2], alt)
        })
        .collect())
}

/// Check the p = 2 master identity for a batch of bumps on one grid,
/// reporting each bump at the grid resolution and its double.
pub fn check_identity_batch(
    prob: &WeightProblem,
    bumps: &[TestFunction],
    grid: &QuadratureGrid,
) -> Result<Vec<IdentityReport>, VerifyError> {
    if prob.p_exponent != 2.0 {
        return Err(VerifyError::NeedsPTwo(prob.p_exponent));
    }
    prob.ctx.validate_support(grid.bounds())?;
    for u in bumps {
        check_support(u, grid)?;
    }
    let evaluator = prob.evaluator()?;
    let potential = matches!(prob.source, WeightSource::Potential(_));
    let fine_grid = grid.with_nodes(2 * grid.nodes_per_axis())?;
    let coarse = identity_pass(&evaluator, bumps, grid, potential)?;
    let fine = identity_pass(&evaluator, bumps, &fine_grid, potential)?;
    Ok(coarse
        .into_iter()
        .zip(fine)
        .map(|(c, f)| IdentityReport {
            grid_resolutions: (grid.nodes_per_axis(), fine_grid.nodes_per_axis()),
            coarse: c,
            fine: f,
            pointwise_remainder_min: None,
        })
        .collect())
}

/// Check the p = 2 master identity for one bump.
pub fn check_identity(
    prob: &WeightProblem,
    u: &TestFunction,
    grid: &QuadratureGrid,
) -> Result<IdentityReport, VerifyError> {
    Ok(check_identity_batch(prob, std::slice::from_ref(u), grid)?.remove(0))
}

/// One `L^p` pass, accumulating the three integrals and the pointwise minimum
/// of the remainder integrand `R(u, F)`.
fn lp_pass(
    evaluator: &WeightEvaluator<'_>,
    u: &TestFunction,
    grid: &QuadratureGrid,
    p: f64,
) -> Result<(IdentityValues, f64), VerifyError> {
    let ctx = &evaluator.problem().ctx;
    const CHUNK: usize = 4096;
    let n_chunks = grid.len().div_ceil(CHUNK);
    let partials: Result<Vec<([f64; 3], f64)>, VerifyError> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let end = ((c + 1) * CHUNK).min(grid.len());
            let m = ctx.ambient_dim();
            let k = ctx.frame_size();
            let mut point = vec![0.0; grid.dim()];
            let mut ugrad = [0.0f64; crate::quadrature::MAX_DIM];
            let mut gu = [0.0f64; crate::quadrature::MAX_DIM];
            let mut sums = [0.0f64; 3];
            let mut comp = [0.0f64; 3];
            let mut rmin = f64::INFINITY;
            for idx in start..end {
                let w_quad = grid.node_into(idx, &mut point);
                let uval = u.value_grad(&point, &mut ugrad[..m]);
                if uval == 0.0 && ugrad[..m].iter().all(|g| *g == 0.0) {
                    rmin = rmin.min(0.0);
                    continue;
                }
                let fp = FramePoint::new_unvalidated(ctx, &point)?;
                let node = evaluator.node(&fp)?;
                let omega = fp.omega();
                fp.gradient_values_into(&ugrad[..m], &mut gu[..k]);
                let gsq: f64 = gu[..k].iter().map(|g| g * g).sum();
                let fsq: f64 = node.f_frame.iter().map(|f| f * f).sum();
                let u_abs = uval.abs();
                let inner: f64 = node.f_frame.iter().zip(&gu[..k]).map(|(f, g)| f * g).sum();
                // R = (p-1)‖F‖^p|u|^p + ‖∇u‖^p + p‖F‖^{p-2}|u|^{p-2}u⟨F,∇u⟩
                let r_point = (p - 1.0) * fsq.powf(p / 2.0) * u_abs.powf(p)
                    + gsq.powf(p / 2.0)
                    + p * fsq.powf((p - 2.0) / 2.0)
                        * if u_abs > 0.0 {
                            u_abs.powf(p - 1.0) * uval.signum() * inner
                        } else {
                            0.0
                        };
                rmin = rmin.min(r_point);
                if r_point < -1e-12 {
                    return Err(VerifyError::NegativePointwiseRemainder {
                        value: r_point,
                        node: point.clone(),
                    });
                }
                let vals = [
                    node.v * gsq.powf(p / 2.0) * omega,
                    node.w * u_abs.powf(p) * omega,
                    node.v * r_point * omega,
                ];
                for d in 0..3 {
                    let y = w_quad * vals[d] - comp[d];
                    let t = sums[d] + y;
                    comp[d] = (t - sums[d]) - y;
                    sums[d] = t;
                }
            }
            Ok((sums, rmin))
        })
        .collect();
    let partials = partials?;
    let mut total = [0.0f64; 3];
    let mut comp = [0.0f64; 3];
    let mut rmin = f64::INFINITY;
    for (part, pmin) in partials {
        rmin = rmin.min(pmin);
        for d in 0..3 {
            let y = part[d] - comp[d];
            let t = total[d] + y;
            comp[d] = (t - total[d]) - y;
            total[d] = t;
        }
    }
    Ok((IdentityValues::from_sums(total[0], total[1], total[2], None), rmin))
}

/// Check the `L^p` identity (`p > 1`); asserts the pointwise nonnegativity of
/// the remainder integrand at every node.
pub fn check_identity_lp(
    prob: &WeightProblem,
    u: &TestFunction,
    grid: &QuadratureGrid,
) -> Result<IdentityReport, VerifyError> {
    prob.ctx.validate_support(grid.bounds())?;
    check_support(u, grid)?;
    let evaluator = prob.evaluator()?;
    let p = prob.p_exponent;
    let fine_grid = grid.with_nodes(2 * grid.nodes_per_axis())?;
    let (coarse, rmin_c) = lp_pass(&evaluator, u, grid, p)?;
    let (fine, rmin_f) = lp_pass(&evaluator, u, &fine_grid, p)?;
    Ok(IdentityReport {
        grid_resolutions: (grid.nodes_per_axis(), fine_grid.nodes_per_axis()),
        coarse,
        fine,
        pointwise_remainder_min: Some(rmin_c.min(rmin_f)),
    })
}

/// Check the inequality `∫V‖∇u‖^p dg ≥ c ∫ target·|u|^p dg` against the
/// problem's target weight and claimed constant.
pub fn check_inequality(
    prob: &WeightProblem,
    u: &TestFunction,
    grid: &QuadratureGrid,
) -> Result<MarginReport, VerifyError> {
    let target = prob.target_w.as_ref().ok_or(VerifyError::MissingTarget)?;
    let claimed = target.claimed.unwrap_or(1.0);
    prob.ctx.validate_support(grid.bounds())?;
    check_support(u, grid)?;
    let ctx = &prob.ctx;
    let p = prob.p_exponent;
    let v = ctx.bind_field(&prob.v, &prob.params)?;
    let t = ctx.bind_field(&target.expr, &prob.params)?;
    let fine_grid = grid.with_nodes(2 * grid.nodes_per_axis())?;
    let mut lhs = [0.0; 2];
    let mut tgt = [0.0; 2];
    let m = ctx.ambient_dim();
    let k = ctx.frame_size();
    for (i, g) in [grid, &fine_grid].into_iter().enumerate() {
        let sums = g.par_sum_vec(2, |point, out| -> Result<(), VerifyError> {
            out.fill(0.0);
            let mut ugrad = [0.0f64; crate::quadrature::MAX_DIM];
            let mut gu = [0.0f64; crate::quadrature::MAX_DIM];
            let uval = u.value_grad(point, &mut ugrad[..m]);
            if uval == 0.0 && ugrad[..m].iter().all(|g| *g == 0.0) {
                return Ok(());
            }
            let fp = FramePoint::new_unvalidated(ctx, point)?;
            let omega = fp.omega();
            fp.gradient_values_into(&ugrad[..m], &mut gu[..k]);
            let gsq: f64 = gu[..k].iter().map(|g| g * g).sum();
            out[0] = v.jet(point)?.value * gsq.powf(p / 2.0) * omega;
            out[1] = t.jet(point)?.value * uval.abs().powf(p) * omega;
            Ok(())
        })?;
        lhs[i] = sums[0];
        tgt[i] = sums[1];
    }
    Ok(MarginReport {
        grid_resolutions: (grid.nodes_per_axis(), fine_grid.nodes_per_axis()),
        claimed,
        lhs: (lhs[0], lhs[1]),
        target_term: (tgt[0], tgt[1]),
        margin: (lhs[0] - claimed * tgt[0], lhs[1] - claimed * tgt[1]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{parse_expression, ScalarFieldExpr};
    use crate::geometry::GeometryContext;
    use crate::quadrature::build_grid;
    use crate::weights::FrameVector;

    #[test]
    fn zero_function_gives_zero_report() {
        let ctx = GeometryContext::euclidean(3);
        let f = parse_expression("pow(norm(x1,x2,x3), -0.5)").unwrap();
        let prob = WeightProblem::potential(ctx, ScalarFieldExpr::constant(1.0), f);
        let bx = [[1.0, 2.0], [1.0, 2.0], [1.0, 2.0]];
        let grid = build_grid(&bx, 8).unwrap();
        let u = TestFunction::zero(&bx);
        let rep = check_identity(&prob, &u, &grid).unwrap();
        assert_eq!(rep.fine.lhs, 0.0);
        assert_eq!(rep.fine.weight_term, 0.0);
        assert_eq!(rep.fine.remainder_term, 0.0);
        assert_eq!(rep.fine.residual, 0.0);
    }

    #[test]
    fn classical_identity_residual_small() {
        // V=1, f=|x|^{-1/2}, bump in [1,2]³: tiny residual at both resolutions
        let ctx = GeometryContext::euclidean(3);
        let f = parse_expression("pow(norm(x1,x2,x3), -0.5)").unwrap();
        let prob = WeightProblem::potential(ctx.clone(), ScalarFieldExpr::constant(1.0), f);
        let bx = [[1.0, 2.0], [1.0, 2.0], [1.0, 2.0]];
        let u = make_bump_checked(&ctx, &bx, 11).unwrap();
        let grid = build_grid(&bx, 16).unwrap();
        let rep = check_identity(&prob, &u, &grid).unwrap();
        assert!(rep.coarse.relative_residual < 1e-8, "coarse {}", rep.coarse.relative_residual);
        assert!(rep.fine.relative_residual < 1e-8, "fine {}", rep.fine.relative_residual);
        assert!(rep.fine.remainder_term >= 0.0);
        assert!(rep.fine.margin >= 0.0);
        // the two potential remainder forms agree
        let alt = rep.fine.remainder_alt.unwrap();
        assert!(
            (alt - rep.fine.remainder_term).abs()
                <= 1e-10 * rep.fine.remainder_term.abs().max(1e-300)
        );
    }

    #[test]
    fn lp_reduces_to_l2_at_p_two() {
        let ctx = GeometryContext::euclidean(3);
        let f = parse_expression("pow(norm(x1,x2,x3), -0.5)").unwrap();
        let prob_pot =
            WeightProblem::potential(ctx.clone(), ScalarFieldExpr::constant(1.0), f.clone());
        let prob_lp = WeightProblem::field(
            ctx.clone(),
            ScalarFieldExpr::constant(1.0),
            FrameVector::NegLogGrad(f),
        )
        .with_p(2.0);
        let bx = [[1.0, 2.0], [1.0, 2.0], [1.0, 2.0]];
        let u = make_bump_checked(&ctx, &bx, 5).unwrap();
        let grid = build_grid(&bx, 12).unwrap();
        let a = check_identity(&prob_pot, &u, &grid).unwrap();
        let b = check_identity_lp(&prob_lp, &u, &grid).unwrap();
        assert!((a.fine.lhs - b.fine.lhs).abs() <= 1e-11 * a.fine.lhs.abs());
        assert!((a.fine.weight_term - b.fine.weight_term).abs() <= 1e-11 * a.fine.lhs.abs());
        assert!((a.fine.remainder_term - b.fine.remainder_term).abs() <= 1e-11 * a.fine.lhs.abs());
        assert!(b.pointwise_remainder_min.unwrap() >= -1e-12);
    }

    #[test]
    fn inequality_margin_nonnegative_for_classical_constant() {
        let ctx = GeometryContext::euclidean(3);
        let f = parse_expression("pow(norm(x1,x2,x3), -0.5)").unwrap();
        let target = parse_expression("pow(norm(x1,x2,x3), -2)").unwrap();
        let prob = WeightProblem::potential(ctx.clone(), ScalarFieldExpr::constant(1.0), f)
            .with_target(target, Some(0.25));
        let bx = [[0.5, 2.0], [0.5, 2.0], [0.5, 2.0]];
        let u = make_bump_checked(&ctx, &bx, 3).unwrap();
        let grid = build_grid(&bx, 14).unwrap();
        let rep = check_inequality(&prob, &u, &grid).unwrap();
        assert!(rep.pass(1e-10), "margin {:?}", rep.margin);
    }

    #[test]
    fn support_outside_grid_is_rejected() {
        let ctx = GeometryContext::euclidean(2);
        let f = parse_expression("pow(norm(x1,x2), -1)").unwrap();
        let prob = WeightProblem::potential(ctx, ScalarFieldExpr::constant(1.0), f);
        let u = make_bump(&[[1.0, 3.0], [1.0, 2.0]], 0);
        let grid = build_grid(&[[1.0, 2.0], [1.0, 2.0]], 8).unwrap();
        assert!(matches!(
            check_identity(&prob, &u, &grid),
            Err(VerifyError::SupportOutsideGrid { .. })
        ));
    }
}
