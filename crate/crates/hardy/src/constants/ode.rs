//! Radial ODE shooting for Bessel pairs.
//!
//! The pair `(V, W)` admits the inequality with constant `c` exactly when
//! `y'' + ((n-1)/r + V'/V) y' + (cW/V) y = 0` has a positive solution on
//! `(0, 1)`. We integrate in the logarithmic radius `s = ln r`, where the ODE
//! becomes `y'' + (n-2 + h(s)) y' + q(s) y = 0` with
//! `h(s) = d/ds ln V(e^s)` and `q(s) = c e^{2s} W(e^s)/V(e^s)`:
//!
//! * the regular singular point at `r = 0` turns into an asymptotically
//!   constant-coefficient problem, so the admissible branch is a plain
//!   exponential seed `y = e^{σs}` with `σ` from the indicial equation;
//! * weights singular at `r = 1` (logarithmic pairs) keep their zeros at
//!   representable distances from the endpoint in `s`, which direct
//!   integration in `r` cannot resolve past `1 - 1e-16`.
//!
//! Composing `W(e^s)` symbolically (with `log(exp(s)) → s` cancellation)
//! keeps logarithmic weights evaluable arbitrarily close to `s = 0`.

use super::ConstantsError;
use crate::calculus::{BoundField, Expr, ScalarFieldExpr, UnaryFn};
use crate::Params;

/// Shooting verdict: either a positive solution exists across `(0, 1)` or the
/// first vanishing point is reported.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BesselVerdict {
    PositiveOn01,
    /// First sign change at this radius. Reported as `r_start` when the
    /// indicial roots at the origin are complex (zeros accumulate at 0).
    VanishesAt(f64),
}

/// Radial Bessel-pair problem on `(0, 1)`. `V` and `W` are expressions in the
/// variable `r`; `V > 0` on `(0, 1)` is assumed.
///
/// The integrability hypothesis `∫ dr/(r^{n-1}V) + ∫ r^{n-1}V dr < ∞`, which
/// extends the resulting inequality from compactly supported functions to the
/// full Sobolev space, is metadata here: it is not checked numerically.
#[derive(Debug, Clone)]
pub struct BesselProblem {
    pub n: usize,
    pub v: ScalarFieldExpr,
    pub w: ScalarFieldExpr,
    pub c: f64,
    pub r_start: f64,
    pub rel_tol: f64,
}

impl BesselProblem {
    pub fn new(n: usize, v: ScalarFieldExpr, w: ScalarFieldExpr, c: f64) -> Self {
        BesselProblem { n, v, w, c, r_start: 1e-6, rel_tol: 1e-10 }
    }

    pub fn with_c(&self, c: f64) -> Self {
        let mut p = self.clone();
        p.c = c;
        p
    }
}

/// Coefficients of the log-radius form, name-resolved once per problem.
struct LogForm {
    v: BoundField,
    w: BoundField,
    drift: f64, // n - 2
}

impl LogForm {
    fn build(prob: &BesselProblem) -> Result<Self, ConstantsError> {
        let coords = vec!["s".to_string()];
        let exp_s = Expr::Unary(UnaryFn::Exp, Box::new(Expr::Var("s".into())));
        let v_s = prob.v.substitute_var("r", &exp_s).simplify_log_exp();
        let w_s = prob.w.substitute_var("r", &exp_s).simplify_log_exp();
        let none = Params::new();
        Ok(LogForm {
            v: v_s.bind(&coords, &none)?,
            w: w_s.bind(&coords, &none)?,
            drift: prob.n as f64 - 2.0,
        })
    }

    /// `h(s) = d/ds ln V(e^s) = r V'(r)/V(r)`.
    fn h(&self, s: f64) -> Result<f64, ConstantsError> {
        let j = self.v.jet(&[s])?;
        Ok(j.grad[0] / j.value)
    }

    /// `q(s) = c e^{2s} W(e^s)/V(e^s)`.
    fn q(&self, s: f64, c: f64) -> Result<f64, ConstantsError> {
        Ok(c * (2.0 * s).exp() * self.w.value(&[s])? / self.v.value(&[s])?)
    }
}

/// Estimate the limit of a coefficient as `s → -∞` from probes at
/// geometrically deeper radii. Stabilized values win; magnitudes decaying
/// toward zero are read as zero; otherwise the shallowest probe is used.
fn probe_limit(vals: &[f64]) -> f64 {
    let k = vals.len();
    if k >= 2 {
        let last = vals[k - 1];
        let prev = vals[k - 2];
        if (last - prev).abs() <= 1e-9 * last.abs().max(1.0) {
            return last;
        }
        let decaying = vals.windows(2).all(|w| w[1].abs() <= w[0].abs() + 1e-300);
        if decaying && last.abs() < 0.25 * vals[0].abs().max(1e-300) {
            return 0.0;
        }
    }
    vals[0]
}

const DOPRI_A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DOPRI_E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

type State = [f64; 2];

/// Integrate with an adaptive Dormand–Prince 5(4) pair; on each accepted step
/// report `(s0, y0, f0, s1, y1, f1)` to the inspector, which may stop the run.
fn integrate<F, G>(
    mut s: f64,
    s_end: f64,
    mut y: State,
    rhs: F,
    rel_tol: f64,
    mut inspect: G,
) -> Result<Option<f64>, ConstantsError>
where
    F: Fn(f64, &State) -> Result<State, ConstantsError>,
    G: FnMut(f64, &State, &State, f64, &State, &State) -> Option<f64>,
{
    let mut h = ((s_end - s) / 100.0).min(0.01).max(1e-12);
    let mut f0 = rhs(s, &y)?;
    let mut steps = 0usize;
    // Once this close to the right endpoint no resolvable zero can remain:
    // squared log-radii underflow below |s| ≈ 1e-154, so coefficient
    // evaluation necessarily gives out slightly before that.
    let endpoint_grace = -1e-150;
    while s < s_end {
        if s_end == 0.0 && s > endpoint_grace {
            return Ok(None);
        }
        steps += 1;
        if steps > 500_000 {
            return Err(ConstantsError::NonConvergence);
        }
        if s + h > s_end {
            h = s_end - s;
        }
        let stalled = |h: f64, s: f64| h < 1e-13 * s.abs().max(1e-250);
        // stage computation (the 7th stage is the FSAL evaluation at s + h)
        let mut k = [[0.0; 2]; 7];
        k[0] = f0;
        let mut failed_eval = false;
        for stage in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(stage) {
                let a = DOPRI_A[stage - 1][j];
                if a != 0.0 {
                    ys[0] += h * a * kj[0];
                    ys[1] += h * a * kj[1];
                }
            }
            match rhs(s + h * stage_c(stage), &ys) {
                Ok(v) => k[stage] = v,
                Err(_) => {
                    failed_eval = true;
                    break;
                }
            }
        }
        if failed_eval {
            h *= 0.25;
            if stalled(h, s) {
                if s > endpoint_grace {
                    return Ok(None);
                }
                return Err(ConstantsError::StepUnderflow { location: s.exp() });
            }
            continue;
        }
        let mut y1 = y;
        for (j, kj) in k.iter().enumerate().take(6) {
            let b = DOPRI_A[5][j];
            if b != 0.0 {
                y1[0] += h * b * kj[0];
                y1[1] += h * b * kj[1];
            }
        }
        let f1 = k[6];
        // embedded error estimate
        let mut err = [0.0; 2];
        for (j, kj) in k.iter().enumerate() {
            let e = DOPRI_E[j];
            err[0] += h * e * kj[0];
            err[1] += h * e * kj[1];
        }
        let scale = 1e-300 + rel_tol * y[0].abs().max(y[1].abs()).max(y1[0].abs().max(y1[1].abs()));
        let err_norm = (err[0].abs().max(err[1].abs())) / scale;
        if err_norm <= 1.0 {
            if let Some(root) = inspect(s, &y, &f0, s + h, &y1, &f1) {
                return Ok(Some(root));
            }
            s += h;
            y = y1;
            f0 = f1;
            // renormalize the linear solution to dodge overflow
            let mag = y[0].abs().max(y[1].abs());
            if mag > 1e200 {
                y[0] /= mag;
                y[1] /= mag;
                f0 = rhs(s, &y)?;
            }
            let fac = (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0);
            h = (h * fac).min((s_end - s).abs().max(1e-300));
        } else {
            h *= (0.9 * err_norm.powf(-0.2)).clamp(0.1, 0.9);
        }
        if s < s_end && stalled(h, s) {
            if s > endpoint_grace {
                return Ok(None);
            }
            return Err(ConstantsError::StepUnderflow { location: s.exp() });
        }
    }
    Ok(None)
}

fn stage_c(stage: usize) -> f64 {
    [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0][stage]
}

/// Root of the cubic Hermite interpolant of `y` on `[s0, s1]`, polished by
/// bisection. Assumes a sign change between the endpoint values.
fn hermite_root(s0: f64, y0: f64, d0: f64, s1: f64, y1: f64, d1: f64) -> f64 {
    let h = s1 - s0;
    let eval = |t: f64| -> f64 {
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * h * d0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * h * d1
    };
    let (mut a, mut b) = (0.0, 1.0);
    let (fa, _fb) = (eval(a), eval(b));
    for _ in 0..80 {
        let m = 0.5 * (a + b);
        let fm = eval(m);
        if (fa <= 0.0) == (fm <= 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    s0 + 0.5 * (a + b) * h
}

/// Shoot the Bessel ODE across `(r_start, 1]` and report positivity.
///
/// With weights singular at the origin the admissible branch is selected by
/// the indicial equation `σ² + (n-2+a₀)σ + q₀ = 0`; complex roots mean every
/// solution oscillates near 0, so the verdict is immediate.
pub fn bessel_shoot(prob: &BesselProblem) -> Result<BesselVerdict, ConstantsError> {
    let form = LogForm::build(prob)?;
    let s0 = prob.r_start.ln();

    // probe the s → -∞ limits of the coefficients
    let mut hs = Vec::new();
    let mut qs = Vec::new();
    for k in 0..7 {
        let s = s0 - (k as f64) * std::f64::consts::LN_10;
        match (form.h(s), form.q(s, prob.c)) {
            (Ok(h), Ok(q)) => {
                hs.push(h);
                qs.push(q);
            }
            _ => break,
        }
    }
    if hs.is_empty() {
        // coefficients not evaluable at the start radius
        return Err(ConstantsError::StepUnderflow { location: prob.r_start });
    }
    let a0 = probe_limit(&hs);
    let q0 = probe_limit(&qs);
    let b = form.drift + a0;
    let disc = b * b - 4.0 * q0;
    if disc < -1e-12 {
        // complex indicial exponents: oscillation accumulates at the origin
        return Ok(BesselVerdict::VanishesAt(prob.r_start));
    }
    let sigma = 0.5 * (-b + disc.max(0.0).sqrt());
    let y0: State = if sigma.abs() > 1e-8 { [1.0, sigma] } else { [1.0, 0.0] };

    let rhs = |s: f64, y: &State| -> Result<State, ConstantsError> {
        let h = form.h(s)?;
        let q = form.q(s, prob.c)?;
        Ok([y[1], -(form.drift + h) * y[1] - q * y[0]])
    };
    let mut root: Option<f64> = None;
    let res = integrate(s0, 0.0, y0, rhs, prob.rel_tol, |sa, ya, fa, sb, yb, fb| {
        // strict sign change; a boundary zero at s = 0 keeps positivity on the
        // open interval
        if ya[0] > 0.0 && (yb[0] < 0.0 || (yb[0] == 0.0 && sb < 0.0)) {
            let r = hermite_root(sa, ya[0], fa[0], sb, yb[0], fb[0]);
            root = Some(r);
            return Some(r);
        }
        None
    })?;
    match res.or(root) {
        Some(s_zero) => Ok(BesselVerdict::VanishesAt(s_zero.exp().min(1.0))),
        None => Ok(BesselVerdict::PositiveOn01),
    }
}

/// Bisect the best constant: the supremum of `c` for which the pair still has
/// a positive solution. Verdict monotonicity is re-verified near the result.
pub fn bessel_threshold(
    prob: &BesselProblem,
    bracket: (f64, f64),
    tol: f64,
) -> Result<f64, ConstantsError> {
    let (mut lo, mut hi) = bracket;
    if !(lo < hi) || tol <= 0.0 {
        return Err(ConstantsError::InvalidBracket { lo, hi });
    }
    let v_lo = bessel_shoot(&prob.with_c(lo))?;
    let v_hi = bessel_shoot(&prob.with_c(hi))?;
    if v_lo != BesselVerdict::PositiveOn01 || v_hi == BesselVerdict::PositiveOn01 {
        return Err(ConstantsError::InvalidBracket { lo, hi });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        match bessel_shoot(&prob.with_c(mid))? {
            BesselVerdict::PositiveOn01 => lo = mid,
            BesselVerdict::VanishesAt(_) => hi = mid,
        }
    }
    let thr = 0.5 * (lo + hi);
    // monotonicity spot checks just outside the final bracket
    let below = thr - 3.0 * tol;
    if below > bracket.0 && bessel_shoot(&prob.with_c(below))? != BesselVerdict::PositiveOn01 {
        return Err(ConstantsError::NonMonotone { c: below });
    }
    let above = thr + 3.0 * tol;
    if above < bracket.1 && bessel_shoot(&prob.with_c(above))? == BesselVerdict::PositiveOn01 {
        return Err(ConstantsError::NonMonotone { c: above });
    }
    Ok(thr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::parse_expression;

    fn classical(n: usize, c: f64) -> BesselProblem {
        BesselProblem::new(
            n,
            parse_expression("1").unwrap(),
            parse_expression("pow(r, -2)").unwrap(),
            c,
        )
    }

    #[test]
    fn zero_constant_is_positive() {
        assert_eq!(bessel_shoot(&classical(3, 0.0)).unwrap(), BesselVerdict::PositiveOn01);
    }

    #[test]
    fn classical_verdicts_flip_at_quarter() {
        // threshold (n-2)²/4 = 1/4 for n = 3; explicit solutions r^{-1/2±√(1/4-c)}
        assert_eq!(bessel_shoot(&classical(3, 0.2499)).unwrap(), BesselVerdict::PositiveOn01);
        assert!(matches!(
            bessel_shoot(&classical(3, 0.2501)).unwrap(),
            BesselVerdict::VanishesAt(r) if r <= 1.0
        ));
    }

    #[test]
    fn classical_threshold() {
        let thr = bessel_threshold(&classical(3, 0.0), (0.0, 1.0), 1e-4).unwrap();
        assert!((thr - 0.25).abs() <= 1e-4, "got {thr}");
    }

    #[test]
    fn disc_threshold_is_first_bessel_zero_squared() {
        let prob = BesselProblem::new(
            2,
            parse_expression("1").unwrap(),
            parse_expression("1").unwrap(),
            0.0,
        );
        assert_eq!(bessel_shoot(&prob.with_c(5.0)).unwrap(), BesselVerdict::PositiveOn01);
        let thr = bessel_threshold(&prob, (1.0, 10.0), 1e-3).unwrap();
        let j01_sq = 5.783185962946785;
        assert!((thr - j01_sq).abs() <= 5e-3, "got {thr}");
    }

    #[test]
    fn logarithmic_pair_threshold() {
        // (1, 1/(r² ln² r)) on (0,1) in dimension 2: threshold 1/4 with
        // explicit positive solution |ln r|^{1/2} at the endpoint
        let prob = BesselProblem::new(
            2,
            parse_expression("1").unwrap(),
            parse_expression("1 / (pow(r, 2) * pow(log(r), 2))").unwrap(),
            0.0,
        );
        let thr = bessel_threshold(&prob, (0.0, 1.0), 1e-3).unwrap();
        assert!((thr - 0.25).abs() <= 1e-3, "got {thr}");
    }
}
