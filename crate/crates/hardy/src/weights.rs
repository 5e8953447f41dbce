//! Derived Hardy weights.
//!
//! The core move: given a positive weight `V` and either a frame vector field
//! `F` or a positive potential `f` (with `F = -∇_g f / f`), the weight
//!
//! ```text
//! W = div_g(V F) - V ‖F‖²            (field form)
//! W = -div_g(V ∇_g f) / f            (potential form)
//! W = div_g(V ‖F‖^{p-2} F) - (p-1) V ‖F‖^p     (L^p form, p > 1)
//! ```
//!
//! makes `∫ V‖∇_g u‖^p dg ≥ ∫ W |u|^p dg` exact up to an explicit nonnegative
//! remainder. Everything is computed pointwise from jets; there is no global
//! symbolic form.

use crate::calculus::{BoundField, Dual, EvalError, ScalarFieldExpr, VectorFieldExpr};
use crate::geometry::{FramePoint, GeometryContext, GeometryError};
use crate::Params;

#[derive(Debug, Clone, thiserror::Error)]
pub enum WeightError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("V is not positive at {at:?} (value {value})")]
    NonPositiveV { at: Vec<f64>, value: f64 },
    #[error("potential f vanishes at {at:?}")]
    VanishingPotential { at: Vec<f64> },
    #[error("field norm vanishes at {at:?} with p = {p} (p ≠ 2 requires ‖F‖ > 0)")]
    DegenerateField { at: Vec<f64>, p: f64 },
    #[error("operation requires a {expected} source")]
    WrongSource { expected: &'static str },
    #[error("p exponent must exceed 1, got {0}")]
    BadExponent(f64),
    #[error("pole configuration invalid: {0}")]
    PoleConstraint(String),
}

/// A frame vector field for weight derivation: either explicit components or
/// the logarithmic gradient `-∇_g f / f` of a positive potential.
#[derive(Debug, Clone)]
pub enum FrameVector {
    Components(VectorFieldExpr),
    NegLogGrad(ScalarFieldExpr),
}

/// Source of the derived weight.
#[derive(Debug, Clone)]
pub enum WeightSource {
    /// `W = -div_g(V ∇_g f)/f` with positive `f`.
    Potential(ScalarFieldExpr),
    /// `W = div_g(V F) - V‖F‖²` (or its `L^p` variant).
    Field(FrameVector),
}

/// Optional inequality target: a weight expression with a claimed constant,
/// so that `∫V‖∇u‖^p ≥ c ∫ target |u|^p` is the checked statement.
#[derive(Debug, Clone)]
pub struct TargetWeight {
    pub expr: ScalarFieldExpr,
    pub claimed: Option<f64>,
}

/// A weight-derivation problem on a geometry context.
#[derive(Debug, Clone)]
pub struct WeightProblem {
    pub ctx: GeometryContext,
    pub v: ScalarFieldExpr,
    pub source: WeightSource,
    pub p_exponent: f64,
    pub params: Params,
    /// Closed form the derived weight should reproduce, when one is known.
    pub closed_form_w: Option<ScalarFieldExpr>,
    /// One-sided check: the derived weight dominates the closed form instead
    /// of matching it (proofs that discard positive terms).
    pub closed_form_one_sided: bool,
    pub target_w: Option<TargetWeight>,
}

impl WeightProblem {
    pub fn potential(ctx: GeometryContext, v: ScalarFieldExpr, f: ScalarFieldExpr) -> Self {
        WeightProblem {
            ctx,
            v,
            source: WeightSource::Potential(f),
            p_exponent: 2.0,
            params: Params::new(),
            closed_form_w: None,
            closed_form_one_sided: false,
            target_w: None,
        }
    }

    pub fn field(ctx: GeometryContext, v: ScalarFieldExpr, field: FrameVector) -> Self {
        WeightProblem {
            ctx,
            v,
            source: WeightSource::Field(field),
            p_exponent: 2.0,
            params: Params::new(),
            closed_form_w: None,
            closed_form_one_sided: false,
            target_w: None,
        }
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p_exponent = p;
        self
    }

    pub fn with_params(mut self, params: Params) -> Self {
        self.params = params;
        self
    }

    pub fn with_closed_form(mut self, w: ScalarFieldExpr) -> Self {
        self.closed_form_w = Some(w);
        self
    }

    pub fn with_one_sided_closed_form(mut self, w: ScalarFieldExpr) -> Self {
        self.closed_form_w = Some(w);
        self.closed_form_one_sided = true;
        self
    }

    pub fn with_target(mut self, expr: ScalarFieldExpr, claimed: Option<f64>) -> Self {
        self.target_w = Some(TargetWeight { expr, claimed });
        self
    }

    /// Bind all expressions once for repeated pointwise evaluation.
    pub fn evaluator(&self) -> Result<WeightEvaluator<'_>, WeightError> {
        WeightEvaluator::new(self)
    }

    /// Derived weight at a point (dispatches on source and p).
    pub fn derived_weight(&self, pt: &FramePoint<'_>) -> Result<f64, WeightError> {
        Ok(self.evaluator()?.node(pt)?.w)
    }
}

enum SourceEval {
    Potential { f: BoundField },
    Field { comps: Vec<BoundField> },
    FieldLogGrad { f: BoundField },
}

/// Pointwise data the verifier needs at a quadrature node.
#[derive(Debug, Clone)]
pub struct WeightNode {
    pub v: f64,
    pub w: f64,
    /// Frame components of the vector field `F` (for Potential sources this
    /// is `-∇_g f / f`).
    pub f_frame: Vec<f64>,
    /// `(f, (X_i f)_i)` when the source is a potential.
    pub potential: Option<(f64, Vec<f64>)>,
}

/// Name-resolved weight problem, cheap to evaluate per node.
pub struct WeightEvaluator<'p> {
    prob: &'p WeightProblem,
    v: BoundField,
    source: SourceEval,
}

impl<'p> WeightEvaluator<'p> {
    fn new(prob: &'p WeightProblem) -> Result<Self, WeightError> {
        if prob.p_exponent <= 1.0 {
            return Err(WeightError::BadExponent(prob.p_exponent));
        }
        let v = prob.ctx.bind_field(&prob.v, &prob.params)?;
        let source = match &prob.source {
            WeightSource::Potential(f) => {
                SourceEval::Potential { f: prob.ctx.bind_field(f, &prob.params)? }
            }
            WeightSource::Field(FrameVector::Components(field)) => {
                SourceEval::Field { comps: prob.ctx.bind_vector(field, &prob.params)? }
            }
            WeightSource::Field(FrameVector::NegLogGrad(f)) => {
                SourceEval::FieldLogGrad { f: prob.ctx.bind_field(f, &prob.params)? }
            }
        };
        Ok(WeightEvaluator { prob, v, source })
    }

    pub fn problem(&self) -> &WeightProblem {
        self.prob
    }

    /// Frame components of `F` as first-order jets.
    fn field_duals(&self, pt: &FramePoint<'_>) -> Result<Vec<Dual>, WeightError> {
        match &self.source {
            SourceEval::Field { comps } => Ok(pt.vector_duals(comps)?),
            SourceEval::FieldLogGrad { f } | SourceEval::Potential { f } => {
                let fj = f.jet(pt.ambient())?;
                if fj.value == 0.0 {
                    return Err(WeightError::VanishingPotential { at: pt.ambient().to_vec() });
                }
                let grads = pt.gradient_duals(&fj);
                let inv = Dual::from_jet(&fj).recip();
                Ok(grads.iter().map(|g| g.mul(&inv).scale(-1.0)).collect())
            }
        }
    }

    /// Evaluate `(V, W, F, potential data)` at a frame point.
    pub fn node(&self, pt: &FramePoint<'_>) -> Result<WeightNode, WeightError> {
        let vj = self.v.jet(pt.ambient())?;
        if vj.value <= 0.0 {
            return Err(WeightError::NonPositiveV {
                at: pt.ambient().to_vec(),
                value: vj.value,
            });
        }
        let vd = Dual::from_jet(&vj);
        let p = self.prob.p_exponent;

        if let SourceEval::Potential { f } = &self.source {
            // W = -div_g(V ∇_g f) / f, evaluated without forming F
            let fj = f.jet(pt.ambient())?;
            if fj.value == 0.0 {
                return Err(WeightError::VanishingPotential { at: pt.ambient().to_vec() });
            }
            let grads = pt.gradient_duals(&fj);
            let comps: Vec<Dual> = grads.iter().map(|g| vd.mul(g)).collect();
            let w = -pt.divergence_duals(&comps) / fj.value;
            let grad_vals: Vec<f64> = grads.iter().map(|g| g.v).collect();
            let f_frame = grad_vals.iter().map(|g| -g / fj.value).collect();
            return Ok(WeightNode {
                v: vj.value,
                w,
                f_frame,
                potential: Some((fj.value, grad_vals)),
            });
        }

        let fd = self.field_duals(pt)?;
        let f_frame: Vec<f64> = fd.iter().map(|c| c.v).collect();
        let norm_sq = fd
            .iter()
            .fold(Dual::constant(pt.ambient().len(), 0.0), |acc, c| acc.add(&c.mul(c)));
        let w = if p == 2.0 {
            // W = div_g(V F) - V ‖F‖²
            let comps: Vec<Dual> = fd.iter().map(|c| vd.mul(c)).collect();
            pt.divergence_duals(&comps) - vj.value * norm_sq.v
        } else if norm_sq.v <= 0.0 {
            // ‖F‖^{p-2}F extends by 0 through zeros of F when p > 2; below
            // that the expression is genuinely singular
            if p > 2.0 {
                0.0
            } else {
                return Err(WeightError::DegenerateField { at: pt.ambient().to_vec(), p });
            }
        } else {
            // W = div_g(V ‖F‖^{p-2} F) - (p-1) V ‖F‖^p
            let fac = vd.mul(&norm_sq.powf((p - 2.0) / 2.0));
            let comps: Vec<Dual> = fd.iter().map(|c| fac.mul(c)).collect();
            pt.divergence_duals(&comps) - (p - 1.0) * vj.value * norm_sq.v.powf(p / 2.0)
        };
        Ok(WeightNode { v: vj.value, w, f_frame, potential: None })
    }
}

/// `W = div_g(V F) - V‖F‖²` at a point. Requires a Field source and `p = 2`.
pub fn derive_weight_field(prob: &WeightProblem, pt: &FramePoint<'_>) -> Result<f64, WeightError> {
    if !matches!(prob.source, WeightSource::Field(_)) {
        return Err(WeightError::WrongSource { expected: "Field" });
    }
    if prob.p_exponent != 2.0 {
        return Err(WeightError::BadExponent(prob.p_exponent));
    }
    Ok(prob.evaluator()?.node(pt)?.w)
}

/// `W = -div_g(V ∇_g f)/f` at a point. Requires a Potential source and `p = 2`.
pub fn derive_weight_potential(
    prob: &WeightProblem,
    pt: &FramePoint<'_>,
) -> Result<f64, WeightError> {
    if !matches!(prob.source, WeightSource::Potential(_)) {
        return Err(WeightError::WrongSource { expected: "Potential" });
    }
    if prob.p_exponent != 2.0 {
        return Err(WeightError::BadExponent(prob.p_exponent));
    }
    Ok(prob.evaluator()?.node(pt)?.w)
}

/// `W = div_g(V‖F‖^{p-2}F) - (p-1)V‖F‖^p` at a point; coincides with
/// [`derive_weight_field`] at `p = 2`.
pub fn derive_weight_lp(prob: &WeightProblem, pt: &FramePoint<'_>) -> Result<f64, WeightError> {
    if !matches!(prob.source, WeightSource::Field(_)) {
        return Err(WeightError::WrongSource { expected: "Field" });
    }
    Ok(prob.evaluator()?.node(pt)?.w)
}

/// Coefficient regime of a multipolar configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoleRegime {
    /// Coefficients `λ_i > 0` with `Σ λ_i = (n-2)²/4`; the derived weight has
    /// inverse-square terms at each pole plus pairwise interactions.
    SelfAndInteraction,
    /// Coefficients `μ_i > 0` with `Σ μ_i = n-2`; the derived weight is the
    /// pairwise interaction sum only.
    InteractionOnly,
}

/// Distinct poles in `ℝ^n` with regime-constrained coefficients.
#[derive(Debug, Clone)]
pub struct PoleConfiguration {
    poles: Vec<Vec<f64>>,
    coefficients: Vec<f64>,
    regime: PoleRegime,
}

impl PoleConfiguration {
    pub fn new(
        poles: Vec<Vec<f64>>,
        coefficients: Vec<f64>,
        regime: PoleRegime,
    ) -> Result<Self, WeightError> {
        if poles.is_empty() || poles.len() != coefficients.len() {
            return Err(WeightError::PoleConstraint("need one coefficient per pole".into()));
        }
        let n = poles[0].len();
        if n < 3 {
            return Err(WeightError::PoleConstraint("ambient dimension must be ≥ 3".into()));
        }
        if poles.iter().any(|p| p.len() != n) {
            return Err(WeightError::PoleConstraint("poles have mixed dimensions".into()));
        }
        for i in 0..poles.len() {
            for j in i + 1..poles.len() {
                let d2: f64 = poles[i]
                    .iter()
                    .zip(&poles[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                if d2 == 0.0 {
                    return Err(WeightError::PoleConstraint(format!(
                        "poles {i} and {j} coincide"
                    )));
                }
            }
        }
        if coefficients.iter().any(|c| *c <= 0.0) {
            return Err(WeightError::PoleConstraint("coefficients must be positive".into()));
        }
        let sum: f64 = coefficients.iter().sum();
        let want = match regime {
            PoleRegime::SelfAndInteraction => ((n as f64) - 2.0).powi(2) / 4.0,
            PoleRegime::InteractionOnly => (n as f64) - 2.0,
        };
        if (sum - want).abs() > 1e-12 * want.max(1.0) {
            return Err(WeightError::PoleConstraint(format!(
                "coefficient sum {sum} must equal {want}"
            )));
        }
        Ok(PoleConfiguration { poles, coefficients, regime })
    }

    pub fn dim(&self) -> usize {
        self.poles[0].len()
    }

    pub fn poles(&self) -> &[Vec<f64>] {
        &self.poles
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn regime(&self) -> PoleRegime {
        self.regime
    }

    /// Field coefficients `α_i`: `2λ_i/(n-2)` in the self-and-interaction
    /// regime, `μ_i` in the interaction-only regime.
    pub fn alphas(&self) -> Vec<f64> {
        let n = self.dim() as f64;
        match self.regime {
            PoleRegime::SelfAndInteraction => {
                self.coefficients.iter().map(|l| 2.0 * l / (n - 2.0)).collect()
            }
            PoleRegime::InteractionOnly => self.coefficients.clone(),
        }
    }

    /// The weight the derived field must reproduce pointwise:
    /// `Σ λ_i/r_i² + (4/(n-2)²) Σ_{i<j} λ_iλ_j |a_i-a_j|²/(r_i²r_j²)` or the
    /// interaction sum `Σ_{i<j} μ_iμ_j |a_i-a_j|²/(r_i²r_j²)`.
    pub fn closed_form_weight(&self, x: &[f64]) -> f64 {
        let n = self.dim() as f64;
        let m = self.poles.len();
        let r2: Vec<f64> = self
            .poles
            .iter()
            .map(|a| x.iter().zip(a).map(|(xi, ai)| (xi - ai) * (xi - ai)).sum())
            .collect();
        let mut w = 0.0;
        match self.regime {
            PoleRegime::SelfAndInteraction => {
                for i in 0..m {
                    w += self.coefficients[i] / r2[i];
                }
                let scale = 4.0 / ((n - 2.0) * (n - 2.0));
                for i in 0..m {
                    for j in i + 1..m {
                        let d2: f64 = self.poles[i]
                            .iter()
                            .zip(&self.poles[j])
                            .map(|(a, b)| (a - b) * (a - b))
                            .sum();
                        w += scale * self.coefficients[i] * self.coefficients[j] * d2
                            / (r2[i] * r2[j]);
                    }
                }
            }
            PoleRegime::InteractionOnly => {
                for i in 0..m {
                    for j in i + 1..m {
                        let d2: f64 = self.poles[i]
                            .iter()
                            .zip(&self.poles[j])
                            .map(|(a, b)| (a - b) * (a - b))
                            .sum();
                        w += self.coefficients[i] * self.coefficients[j] * d2 / (r2[i] * r2[j]);
                    }
                }
            }
        }
        w
    }
}

/// The multipolar field `F(x) = Σ_i α_i (x - a_i)/|x - a_i|²` as frame
/// components on Euclidean space.
pub fn multipolar_field(cfg: &PoleConfiguration) -> VectorFieldExpr {
    let n = cfg.dim();
    let alphas = cfg.alphas();
    let mut comps = Vec::with_capacity(n);
    for j in 1..=n {
        let mut terms = Vec::new();
        for (a, alpha) in cfg.poles().iter().zip(&alphas) {
            let r2 = (1..=n)
                .map(|l| format!("(x{l} - ({}))*(x{l} - ({}))", a[l - 1], a[l - 1]))
                .collect::<Vec<_>>()
                .join(" + ");
            terms.push(format!("({alpha}) * (x{j} - ({})) / ({r2})", a[j - 1]));
        }
        comps.push(ScalarFieldExpr::parse(&terms.join(" + ")).expect("multipolar component"));
    }
    VectorFieldExpr::new(comps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::parse_expression;
    use crate::geometry::GeometryContext;

    fn pt<'c>(ctx: &'c GeometryContext, x: &[f64]) -> FramePoint<'c> {
        FramePoint::new(ctx, x).unwrap()
    }

    #[test]
    fn classical_field_weight() {
        // V=1, F = -∇f/f with f=|x|^{-1/2} on R^3: W = 1/(4|x|²) = 1/16 at (2,0,0)
        let ctx = GeometryContext::euclidean(3);
        let f = parse_expression("pow(norm(x1,x2,x3), -0.5)").unwrap();
        let prob = WeightProblem::field(
            ctx.clone(),
            ScalarFieldExpr::constant(1.0),
            FrameVector::NegLogGrad(f),
        );
        let w = derive_weight_field(&prob, &pt(&ctx, &[2.0, 0.0, 0.0])).unwrap();
        assert!((w - 1.0 / 16.0).abs() < 1e-14);
    }

    #[test]
    fn zero_field_gives_zero_weight() {
        let ctx = GeometryContext::euclidean(3);
        let zero = VectorFieldExpr::new(vec![
            ScalarFieldExpr::constant(0.0),
            ScalarFieldExpr::constant(0.0),
            ScalarFieldExpr::constant(0.0),
        ]);
        let prob = WeightProblem::field(
            ctx.clone(),
            ScalarFieldExpr::constant(1.0),
            FrameVector::Components(zero),
        );
        let w = derive_weight_field(&prob, &pt(&ctx, &[0.4, 0.2, -0.7])).unwrap();
        assert_eq!(w, 0.0);
    }

    #[test]
    fn mazya_half_space_field() {
        // n=2, V=x_n, F=(b x_{n-1}/ρ², a/ρ + b x_n/ρ²), a=1/8, b=3/8:
        // W = 1/(8ρ) + (7/32) x_n(ρ-x_n)/ρ³ = 1/8 at (0,1)
        let ctx = GeometryContext::half_space(2);
        let rho2 = "x1*x1 + x2*x2";
        let field = VectorFieldExpr::new(vec![
            parse_expression(&format!("0.375 * x1 / ({rho2})")).unwrap(),
            parse_expression(&format!("0.125 / norm(x1, x2) + 0.375 * x2 / ({rho2})")).unwrap(),
        ]);
        let prob = WeightProblem::field(
            ctx.clone(),
            parse_expression("x2").unwrap(),
            FrameVector::Components(field),
        );
        let w = derive_weight_field(&prob, &pt(&ctx, &[0.0, 1.0])).unwrap();
        assert!((w - 0.125).abs() < 1e-13, "got {w}");
    }

    #[test]
    fn leray_potential_weight() {
        // n=2, V=1, f=|ln|x||^{1/2} at |x|=1/e: W = 1/(4|x|² ln²|x|) = e²/4
        let ctx = GeometryContext::euclidean(2);
        let f = parse_expression("pow(abs(log(norm(x1,x2))), 0.5)").unwrap();
        let prob = WeightProblem::potential(ctx.clone(), ScalarFieldExpr::constant(1.0), f);
        let x = (-1.0f64).exp();
        let w = derive_weight_potential(&prob, &pt(&ctx, &[x, 0.0])).unwrap();
        let expected = std::f64::consts::E * std::f64::consts::E / 4.0;
        assert!((w - expected).abs() / expected < 1e-12, "got {w}, want {expected}");
    }

    #[test]
    fn heisenberg_potential_example() {
        // n=1 (Q=4), f = ρ^{-2} t^{1/2}, V=1 at (1,0,1):
        // W = (Q²/4) r²/ρ⁴ + r²/t² = 4·(1/2) + 1 = 3
        let ctx = GeometryContext::heisenberg(1);
        let f = parse_expression(
            "pow((x1*x1 + y1*y1)*(x1*x1 + y1*y1) + t*t, -0.5) * pow(t, 0.5)",
        )
        .unwrap();
        let prob = WeightProblem::potential(ctx.clone(), ScalarFieldExpr::constant(1.0), f);
        let w = derive_weight_potential(&prob, &pt(&ctx, &[1.0, 0.0, 1.0])).unwrap();
        assert!((w - 3.0).abs() < 1e-12, "got {w}");
    }

    #[test]
    fn unit_potential_gives_zero() {
        let ctx = GeometryContext::grushin(3, 1, 1.0);
        let prob = WeightProblem::potential(
            ctx.clone(),
            ScalarFieldExpr::constant(1.0),
            ScalarFieldExpr::constant(1.0),
        );
        let w = derive_weight_potential(&prob, &pt(&ctx, &[0.5, 0.1, -0.3, 0.8])).unwrap();
        assert_eq!(w, 0.0);
    }

    #[test]
    fn potential_equals_neg_log_grad_field() {
        // the two derivation routes of the same identity agree
        let ctx = GeometryContext::euclidean(3);
        let f = parse_expression("pow(norm(x1,x2,x3), -0.5) * exp(0.1*x1)").unwrap();
        let v = parse_expression("1 + x2*x2").unwrap();
        let pot = WeightProblem::potential(ctx.clone(), v.clone(), f.clone());
        let fld = WeightProblem::field(ctx.clone(), v, FrameVector::NegLogGrad(f));
        for x in [[1.2, 0.3, -0.5], [0.4, -1.0, 2.0], [2.0, 2.0, 2.0]] {
            let p = pt(&ctx, &x);
            let a = derive_weight_potential(&pot, &p).unwrap();
            let b = derive_weight_field(&fld, &p).unwrap();
            assert!((a - b).abs() <= 1e-11 * a.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn weight_is_linear_in_v_and_scale_invariant_in_f() {
        let ctx = GeometryContext::euclidean(3);
        let f = parse_expression("pow(norm(x1,x2,x3), -1)").unwrap();
        let v = parse_expression("exp(0.2 * x1)").unwrap();
        let x = [0.9, -0.4, 0.6];
        let base = WeightProblem::potential(ctx.clone(), v.clone(), f.clone());
        let w0 = derive_weight_potential(&base, &pt(&ctx, &x)).unwrap();
        // W(cV) = c W(V)
        let scaled_v = WeightProblem::potential(
            ctx.clone(),
            ScalarFieldExpr::parse("3 * exp(0.2 * x1)").unwrap(),
            f.clone(),
        );
        let w1 = derive_weight_potential(&scaled_v, &pt(&ctx, &x)).unwrap();
        assert!((w1 - 3.0 * w0).abs() <= 1e-12 * w0.abs().max(1.0));
        // W(V, cf) = W(V, f)
        let scaled_f = WeightProblem::potential(
            ctx.clone(),
            v,
            ScalarFieldExpr::parse("7 * pow(norm(x1,x2,x3), -1)").unwrap(),
        );
        let w2 = derive_weight_potential(&scaled_f, &pt(&ctx, &x)).unwrap();
        assert!((w2 - w0).abs() <= 1e-12 * w0.abs().max(1.0));
    }

    #[test]
    fn lp_reduces_to_field_at_p_two() {
        let ctx = GeometryContext::euclidean(4);
        let f = parse_expression("pow(norm(x1,x2,x3,x4), -1)").unwrap();
        let prob = WeightProblem::field(
            ctx.clone(),
            ScalarFieldExpr::constant(1.0),
            FrameVector::NegLogGrad(f),
        )
        .with_p(2.0);
        let p = pt(&ctx, &[1.0, 0.0, 0.0, 0.0]);
        let a = derive_weight_lp(&prob, &p).unwrap();
        let b = derive_weight_field(&prob, &p).unwrap();
        // inverse-square constant (n-2)²/4 = 1 for n = 4 at |x| = 1
        assert!((a - 1.0).abs() < 1e-12);
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn lp_euclidean_closed_form() {
        // V=1, p=1.5, f = |x|^{(p-n)/p} = |x|^{-1} on R^3: W = |(n-p)/p|^p |x|^{-p}
        let ctx = GeometryContext::euclidean(3);
        let p_exp = 1.5;
        let f = parse_expression("pow(norm(x1,x2,x3), -1)").unwrap();
        let prob = WeightProblem::field(
            ctx.clone(),
            ScalarFieldExpr::constant(1.0),
            FrameVector::NegLogGrad(f),
        )
        .with_p(p_exp);
        let x = [0.8, 0.5, -0.3];
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let w = derive_weight_lp(&prob, &pt(&ctx, &x)).unwrap();
        let expected = ((3.0 - p_exp) / p_exp).powf(p_exp) * r.powf(-p_exp);
        assert!((w - expected).abs() / expected < 1e-12, "got {w}, want {expected}");
    }

    #[test]
    fn multipolar_examples() {
        // self-and-interaction regime, two poles
        let cfg = PoleConfiguration::new(
            vec![vec![0.0, 0.0, 0.0], vec![2.0, 0.0, 0.0]],
            vec![0.125, 0.125],
            PoleRegime::SelfAndInteraction,
        )
        .unwrap();
        let ctx = GeometryContext::euclidean(3)
            .with_singular_set(crate::geometry::SingularSet::Points(cfg.poles().to_vec()));
        let field = multipolar_field(&cfg);
        let prob = WeightProblem::field(
            ctx.clone(),
            ScalarFieldExpr::constant(1.0),
            FrameVector::Components(field),
        );
        let x = [1.0, 0.0, 0.0];
        let w = derive_weight_field(&prob, &pt(&ctx, &x)).unwrap();
        assert!((w - 0.5).abs() < 1e-13, "got {w}");
        assert!((cfg.closed_form_weight(&x) - 0.5).abs() < 1e-15);

        // single pole degenerates to the classical inverse-square weight
        let single = PoleConfiguration::new(
            vec![vec![0.0, 0.0, 0.0]],
            vec![0.25],
            PoleRegime::SelfAndInteraction,
        )
        .unwrap();
        let field1 = multipolar_field(&single);
        let ctx1 = GeometryContext::euclidean(3);
        let prob1 = WeightProblem::field(
            ctx1.clone(),
            ScalarFieldExpr::constant(1.0),
            FrameVector::Components(field1),
        );
        let p1 = pt(&ctx1, &[0.0, 1.5, 0.0]);
        let w1 = derive_weight_field(&prob1, &p1).unwrap();
        assert!((w1 - 0.25 / 2.25).abs() < 1e-14);

        // interaction-only regime
        let mu = PoleConfiguration::new(
            vec![vec![0.0, 0.0, 0.0], vec![2.0, 0.0, 0.0]],
            vec![0.5, 0.5],
            PoleRegime::InteractionOnly,
        )
        .unwrap();
        let fieldm = multipolar_field(&mu);
        let probm = WeightProblem::field(
            ctx.clone(),
            ScalarFieldExpr::constant(1.0),
            FrameVector::Components(fieldm),
        );
        let xm = [1.0, 1.0, 0.0];
        let wm = derive_weight_field(&probm, &pt(&ctx, &xm)).unwrap();
        assert!((wm - 0.25).abs() < 1e-13, "got {wm}");
        assert!((mu.closed_form_weight(&xm) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn pole_constraint_enforced() {
        assert!(PoleConfiguration::new(
            vec![vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]],
            vec![0.2, 0.2],
            PoleRegime::SelfAndInteraction,
        )
        .is_err());
        assert!(PoleConfiguration::new(
            vec![vec![0.0, 0.0, 0.0], vec![0.0, 0.0, 0.0]],
            vec![0.125, 0.125],
            PoleRegime::SelfAndInteraction,
        )
        .is_err());
    }
}
