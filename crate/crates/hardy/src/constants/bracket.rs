//! Sampled lower bounds and trial-family upper bounds for best constants.
//!
//! The lower bound is the sampled infimum of `(derived W)/(target W)` over
//! low-discrepancy box points plus a geometric radial ladder toward the
//! singular set and toward infinity — ratio infima often sit at `r → 0` or
//! `r → ∞`. The upper bound is the minimum Rayleigh quotient over a small
//! parameterized family of radial trial functions; any admissible trial
//! bounds the best constant from above by definition.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use super::ConstantsError;
use crate::calculus::ScalarFieldExpr;
use crate::geometry::FramePoint;
use crate::quadrature::gauss_legendre;
use crate::weights::WeightProblem;
use crate::Params;

/// Certified interval around a best constant: `lower` from pointwise weight
/// domination on samples, `upper` from a trial function's Rayleigh quotient.
#[derive(Debug, Clone)]
pub struct ConstantBracket {
    pub lower: f64,
    pub upper: f64,
    pub claimed: Option<f64>,
}

impl ConstantBracket {
    /// `lower ≤ upper + tol`, and the claimed constant (when present) sits
    /// inside the bracket up to `tol`.
    pub fn is_consistent(&self, tol: f64) -> bool {
        self.lower <= self.upper + tol
            && self
                .claimed
                .map(|c| self.lower <= c + tol && c <= self.upper + tol)
                .unwrap_or(true)
    }
}

/// Radial ladder: `directions` seeded unit vectors, radii geometric from
/// `r_min` to `r_max` with `per_decade` points per decade.
#[derive(Debug, Clone)]
pub struct RadialLadder {
    pub directions: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub per_decade: usize,
}

/// Sampling plan for the lower-bound certificate.
#[derive(Debug, Clone)]
pub struct SamplePlan {
    pub bounds: Vec<[f64; 2]>,
    pub count: usize,
    pub seed: u64,
    pub ladder: Option<RadialLadder>,
}

fn halton(mut index: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while index > 0 {
        f /= base as f64;
        r += f * (index % base) as f64;
        index /= base;
    }
    r
}

const HALTON_BASES: [usize; 6] = [2, 3, 5, 7, 11, 13];

/// Sampled certificate: `min_samples (derived W)/(target W)`, a lower bound
/// for the constant with which the derived inequality holds on the samples.
pub fn certify_lower_bound(
    prob: &WeightProblem,
    plan: &SamplePlan,
) -> Result<f64, ConstantsError> {
    let target = prob
        .target_w
        .as_ref()
        .ok_or(ConstantsError::EmptySample)?;
    let ctx = &prob.ctx;
    let evaluator = prob.evaluator()?;
    let tb = ctx.bind_field(&target.expr, &prob.params)?;
    let dim = ctx.ambient_dim();

    let mut points: Vec<Vec<f64>> = Vec::with_capacity(plan.count);
    for i in 0..plan.count {
        let x: Vec<f64> = (0..dim)
            .map(|a| {
                let u = halton(i + 1, HALTON_BASES[a % HALTON_BASES.len()]);
                plan.bounds[a][0] + u * (plan.bounds[a][1] - plan.bounds[a][0])
            })
            .collect();
        points.push(x);
    }
    if let Some(ladder) = &plan.ladder {
        let mut rng = ChaCha12Rng::seed_from_u64(plan.seed);
        let mut dirs = Vec::with_capacity(ladder.directions);
        while dirs.len() < ladder.directions {
            let d: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 1e-3 {
                dirs.push(d.iter().map(|v| v / norm).collect::<Vec<f64>>());
            }
        }
        let decades = (ladder.r_max / ladder.r_min).log10();
        let steps = ((decades * ladder.per_decade as f64).ceil() as usize).max(1);
        for dir in &dirs {
            for k in 0..=steps {
                let r = ladder.r_min * 10f64.powf(k as f64 / ladder.per_decade as f64);
                if r > ladder.r_max * (1.0 + 1e-12) {
                    break;
                }
                points.push(dir.iter().map(|d| d * r).collect());
            }
        }
    }

    let delta = ctx.delta_sing();
    let mut best = f64::INFINITY;
    let mut used = 0usize;
    for x in &points {
        if !ctx.chart().contains_point(x) || ctx.singular_set().distance_point(x) < delta {
            continue;
        }
        let fp = FramePoint::new(ctx, x)?;
        let t = tb.jet(x)?.value;
        if t <= 0.0 {
            return Err(ConstantsError::TargetNotPositive { at: x.clone() });
        }
        let node = evaluator.node(&fp)?;
        let ratio = node.w / t;
        if ratio < best {
            best = ratio;
        }
        used += 1;
    }
    if used == 0 {
        return Err(ConstantsError::EmptySample);
    }
    Ok(best)
}

/// A parameterized family of radial trial functions `u(r)`, compactly
/// supported away from the origin.
pub trait RadialTrialFamily: Sync {
    fn parameter_bounds(&self) -> Vec<(f64, f64)>;
    /// `(u, u')` at radius `r` for the given parameters.
    fn eval(&self, params: &[f64], r: f64) -> (f64, f64);
    /// Open support interval `(lo, hi)`, with `lo > 0`.
    fn support(&self, params: &[f64]) -> (f64, f64);
}

/// `u = r^a · cos(π ln r / (2L))` supported on `e^{-L} < r < e^{L}`;
/// the single parameter is the logarithmic half-width `L`.
///
/// With `a = -(n-2)/2` this is the standard family whose Rayleigh quotient
/// against the inverse-square weight approaches `(n-2)²/4` as `L` grows.
#[derive(Debug, Clone)]
pub struct PowerLogBump {
    pub radial_exponent: f64,
    pub max_log_halfwidth: f64,
}

impl RadialTrialFamily for PowerLogBump {
    fn parameter_bounds(&self) -> Vec<(f64, f64)> {
        vec![(1.5, self.max_log_halfwidth)]
    }

    fn eval(&self, params: &[f64], r: f64) -> (f64, f64) {
        let l = params[0];
        let tau = r.ln() / l;
        if tau.abs() >= 1.0 {
            return (0.0, 0.0);
        }
        let a = self.radial_exponent;
        let g = (std::f64::consts::FRAC_PI_2 * tau).cos();
        let gp = -std::f64::consts::FRAC_PI_2 * (std::f64::consts::FRAC_PI_2 * tau).sin();
        let u = r.powf(a) * g;
        let du = r.powf(a - 1.0) * (a * g + gp / l);
        (u, du)
    }

    fn support(&self, params: &[f64]) -> (f64, f64) {
        ((-params[0]).exp(), params[0].exp())
    }
}

/// A fixed radial profile times a cosine taper that cuts off over
/// `[R/2, R]`; the parameter is `ln R`.
pub struct TruncatedProfile {
    profile: crate::calculus::BoundField,
    pub min_cut: f64,
    pub max_cut: f64,
    pub inner: f64,
}

impl TruncatedProfile {
    /// `profile` is an expression in `r`, smooth on `(0, ∞)`.
    pub fn new(profile: &ScalarFieldExpr, min_cut: f64, max_cut: f64) -> Result<Self, ConstantsError> {
        let coords = vec!["r".to_string()];
        Ok(TruncatedProfile {
            profile: profile.bind(&coords, &Params::new())?,
            min_cut,
            max_cut,
            inner: 1e-6,
        })
    }
}

impl RadialTrialFamily for TruncatedProfile {
    fn parameter_bounds(&self) -> Vec<(f64, f64)> {
        vec![(self.min_cut.ln(), self.max_cut.ln())]
    }

    fn eval(&self, params: &[f64], r: f64) -> (f64, f64) {
        let cut = params[0].exp();
        if r >= cut {
            return (0.0, 0.0);
        }
        let jet = match self.profile.jet(&[r]) {
            Ok(j) => j,
            Err(_) => return (0.0, 0.0),
        };
        let (chi, dchi) = if r <= 0.5 * cut {
            (1.0, 0.0)
        } else {
            let t = 2.0 * r / cut - 1.0; // in (0,1)
            let chi = 0.5 * (1.0 + (std::f64::consts::PI * t).cos());
            let dchi = -std::f64::consts::PI / cut * (std::f64::consts::PI * t).sin();
            (chi, dchi)
        };
        (jet.value * chi, jet.grad[0] * chi + jet.value * dchi)
    }

    fn support(&self, params: &[f64]) -> (f64, f64) {
        (self.inner, params[0].exp())
    }
}

/// Piecewise-linear interpolant through given radial nodes (no parameters);
/// used to feed an eigensolver's discrete eigenvector back through the
/// quadrature route.
#[derive(Debug, Clone)]
pub struct InterpolantTrial {
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
}

impl RadialTrialFamily for InterpolantTrial {
    fn parameter_bounds(&self) -> Vec<(f64, f64)> {
        Vec::new()
    }

    fn eval(&self, _params: &[f64], r: f64) -> (f64, f64) {
        let n = self.nodes.len();
        if r <= self.nodes[0] || r >= self.nodes[n - 1] {
            return (0.0, 0.0);
        }
        let mut i = match self.nodes.binary_search_by(|x| x.total_cmp(&r)) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        i = i.min(n - 2);
        let (x0, x1) = (self.nodes[i], self.nodes[i + 1]);
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let slope = (y1 - y0) / (x1 - x0);
        (y0 + slope * (r - x0), slope)
    }

    fn support(&self, _params: &[f64]) -> (f64, f64) {
        (self.nodes[0].max(1e-12), *self.nodes.last().unwrap())
    }
}

/// Rayleigh quotient `∫V u'² r^{n-1} dr / ∫ target u² r^{n-1} dr` by
/// panel-wise Gauss quadrature in the logarithmic radius.
fn radial_quotient(
    n: usize,
    v: &crate::calculus::BoundField,
    target: &crate::calculus::BoundField,
    family: &dyn RadialTrialFamily,
    params: &[f64],
) -> Result<f64, ConstantsError> {
    let (lo, hi) = family.support(params);
    let (glx, glw) = gauss_legendre(8);
    let panels = 360usize;
    let (la, lb) = (lo.ln(), hi.ln());
    let dh = (lb - la) / panels as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for p in 0..panels {
        let a = la + p as f64 * dh;
        for (x, w) in glx.iter().zip(&glw) {
            let g = a + 0.5 * dh * (x + 1.0);
            let wq = 0.5 * dh * w;
            let r = g.exp();
            let (u, du) = family.eval(params, r);
            if u == 0.0 && du == 0.0 {
                continue;
            }
            let meas = r.powi(n as i32); // r^{n-1} dr = r^n d(ln r)
            num += wq * v.value(&[r])? * du * du * meas;
            den += wq * target.value(&[r])? * u * u * meas;
        }
    }
    if den.abs() < 1e-14 {
        return Err(ConstantsError::DegenerateTrial { denominator: den });
    }
    Ok(num / den)
}

fn golden_section<F>(mut lo: f64, mut hi: f64, budget: usize, mut f: F) -> Result<(f64, f64), ConstantsError>
where
    F: FnMut(f64) -> Result<f64, ConstantsError>,
{
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for _ in 0..budget {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = f(x2)?;
        }
    }
    if f1 <= f2 {
        Ok((x1, f1))
    } else {
        Ok((x2, f2))
    }
}

/// Minimize the Rayleigh quotient over the family by coordinate descent with
/// golden-section line searches (≤ 3 parameters). Returns an upper bound for
/// the best constant of `∫V‖∇u‖² ≥ c∫ target u²` over radial functions.
pub fn trial_upper_bound(
    n: usize,
    v: &ScalarFieldExpr,
    target: &ScalarFieldExpr,
    family: &dyn RadialTrialFamily,
    budget: usize,
) -> Result<f64, ConstantsError> {
    let coords = vec!["r".to_string()];
    let none = Params::new();
    let vb = v.bind(&coords, &none)?;
    let tb = target.bind(&coords, &none)?;
    let bounds = family.parameter_bounds();
    if bounds.is_empty() {
        return radial_quotient(n, &vb, &tb, family, &[]);
    }
    let mut params: Vec<f64> = bounds.iter().map(|(a, b)| 0.5 * (a + b)).collect();
    let mut best = radial_quotient(n, &vb, &tb, family, &params)?;
    let per_search = (budget / (2 * bounds.len()).max(1)).clamp(12, 60);
    for _sweep in 0..2 {
        for (i, (blo, bhi)) in bounds.iter().enumerate() {
            let (x, fx) = golden_section(*blo, *bhi, per_search, |x| {
                let mut p = params.clone();
                p[i] = x;
                radial_quotient(n, &vb, &tb, family, &p)
            })?;
            if fx < best {
                best = fx;
                params[i] = x;
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::parse_expression;
    use crate::geometry::GeometryContext;
    use crate::weights::WeightProblem;

    #[test]
    fn classical_ratio_is_exactly_a_quarter() {
        // derived W for f = |x|^{-1/2} is (1/4)/|x|²; ratio to 1/|x|² is 1/4
        let ctx = GeometryContext::euclidean(3);
        let f = parse_expression("pow(norm(x1,x2,x3), -0.5)").unwrap();
        let target = parse_expression("pow(norm(x1,x2,x3), -2)").unwrap();
        let prob = WeightProblem::potential(ctx, crate::calculus::ScalarFieldExpr::constant(1.0), f)
            .with_target(target, Some(0.25));
        let plan = SamplePlan {
            bounds: vec![[-2.0, 2.0], [-2.0, 2.0], [-2.0, 2.0]],
            count: 2000,
            seed: 7,
            ladder: Some(RadialLadder { directions: 4, r_min: 0.05, r_max: 1e3, per_decade: 8 }),
        };
        let lower = certify_lower_bound(&prob, &plan).unwrap();
        assert!((lower - 0.25).abs() < 1e-12, "got {lower}");
    }

    #[test]
    fn trivial_potential_certifies_zero() {
        let ctx = GeometryContext::euclidean(3);
        let prob = WeightProblem::potential(
            ctx,
            crate::calculus::ScalarFieldExpr::constant(1.0),
            crate::calculus::ScalarFieldExpr::constant(1.0),
        )
        .with_target(parse_expression("pow(norm(x1,x2,x3), -2)").unwrap(), None);
        let plan = SamplePlan {
            bounds: vec![[0.5, 2.0], [0.5, 2.0], [0.5, 2.0]],
            count: 100,
            seed: 0,
            ladder: None,
        };
        let lower = certify_lower_bound(&prob, &plan).unwrap();
        assert_eq!(lower, 0.0);
    }

    #[test]
    fn log_bump_quotient_approaches_quarter() {
        // quotient = 1/4 + (π/(2L))², minimized at the largest allowed L
        let family = PowerLogBump { radial_exponent: -0.5, max_log_halfwidth: 13.5 };
        let v = parse_expression("1").unwrap();
        let target = parse_expression("pow(r, -2)").unwrap();
        let q = trial_upper_bound(3, &v, &target, &family, 60).unwrap();
        assert!(q > 0.25 && q <= 0.27, "got {q}");
        let expect = 0.25 + (std::f64::consts::PI / (2.0 * 13.5)).powi(2);
        assert!((q - expect).abs() < 2e-3, "got {q}, expect ≈ {expect}");
    }
}
