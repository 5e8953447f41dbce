//! Geometries presented by frame fields.
//!
//! Every geometry is a list of vector fields `X_1..X_k` (each given by `m`
//! ambient coefficients) together with a positive volume density `ω`, on a
//! chart domain with a known singular set. The three derived operators are
//! computed identically for every catalog entry:
//!
//! * gradient: `∇_g f = (X_1 f, .., X_k f)`;
//! * divergence of a frame vector field `F = Σ F_i X_i`:
//!   `div_g F = ω^{-1} Σ_j ∂_j(ω (Σ_i F_i X_i)^j)`, which is the adjoint of
//!   the gradient against `∫ · ω dx` — the only property the integral
//!   identities need, and the one the tests pin down;
//! * Laplace–Beltrami: `Δ_g f = div_g(∇_g f)`.

use crate::calculus::{BoundField, Dual, EvalError, Jet2, ScalarFieldExpr, VectorFieldExpr};
use crate::Params;

#[derive(Debug, Clone, thiserror::Error)]
pub enum GeometryError {
    #[error("point lies outside the chart domain")]
    OutsideChart,
    #[error("point lies on the singular set")]
    OnSingularSet,
    #[error("support box violates the chart domain or the singular margin {margin}")]
    SupportViolation { margin: f64 },
    #[error("vector field has {got} components but the frame has {expected}")]
    FrameSizeMismatch { expected: usize, got: usize },
    #[error("cannot parse context spec `{0}`")]
    BadSpec(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Named catalog geometries with their parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum ContextKind {
    EuclideanWeighted { n: usize },
    /// Euclidean space with the single radial frame field `∂_r`.
    EuclideanRadial { n: usize },
    HalfSpace { n: usize },
    HyperbolicBall { n: usize },
    Heisenberg { n: usize },
    Grushin { d: usize, k: usize, gamma: f64 },
    Edge { n: usize, q: usize },
}

/// Chart domains used by the catalog.
#[derive(Debug, Clone, PartialEq)]
pub enum ChartDomain {
    All,
    /// `|x| < 1`.
    UnitBall,
    /// `x_axis > 0`.
    HalfSpace { axis: usize },
    /// `lo < x_axis < hi`.
    Slab { axis: usize, lo: f64, hi: f64 },
}

impl ChartDomain {
    pub fn contains_point(&self, p: &[f64]) -> bool {
        match self {
            ChartDomain::All => true,
            ChartDomain::UnitBall => p.iter().map(|x| x * x).sum::<f64>() < 1.0,
            ChartDomain::HalfSpace { axis } => p[*axis] > 0.0,
            ChartDomain::Slab { axis, lo, hi } => p[*axis] > *lo && p[*axis] < *hi,
        }
    }

    /// Does the closed box sit inside the domain with `margin` to spare?
    pub fn contains_box(&self, bx: &[[f64; 2]], margin: f64) -> bool {
        match self {
            ChartDomain::All => true,
            ChartDomain::UnitBall => {
                let far: f64 = bx.iter().map(|[lo, hi]| lo.abs().max(hi.abs()).powi(2)).sum();
                far.sqrt() < 1.0 - margin
            }
            ChartDomain::HalfSpace { axis } => bx[*axis][0] >= margin,
            ChartDomain::Slab { axis, lo, hi } => {
                bx[*axis][0] >= lo + margin && bx[*axis][1] <= hi - margin
            }
        }
    }
}

/// Loci excluded from test-function supports.
#[derive(Debug, Clone, PartialEq)]
pub enum SingularSet {
    Empty,
    /// Isolated points (origin, multipolar poles, ...).
    Points(Vec<Vec<f64>>),
    /// Subspace where all listed coordinates vanish (e.g. `r = 0`).
    CoordsZero(Vec<usize>),
    /// Hyperplane `x_axis = value` (e.g. `t = 0`).
    Hyperplane { axis: usize, value: f64 },
    Union(Vec<SingularSet>),
}

impl SingularSet {
    pub fn distance_point(&self, p: &[f64]) -> f64 {
        match self {
            SingularSet::Empty => f64::INFINITY,
            SingularSet::Points(pts) => pts
                .iter()
                .map(|a| {
                    p.iter()
                        .zip(a)
                        .map(|(x, y)| (x - y) * (x - y))
                        .sum::<f64>()
                        .sqrt()
                })
                .fold(f64::INFINITY, f64::min),
            SingularSet::CoordsZero(axes) => {
                axes.iter().map(|a| p[*a] * p[*a]).sum::<f64>().sqrt()
            }
            SingularSet::Hyperplane { axis, value } => (p[*axis] - value).abs(),
            SingularSet::Union(sets) => sets
                .iter()
                .map(|s| s.distance_point(p))
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Lower bound on the distance from any point of the box to the set.
    pub fn distance_box(&self, bx: &[[f64; 2]]) -> f64 {
        fn axis_dist(iv: [f64; 2], v: f64) -> f64 {
            if iv[0] <= v && v <= iv[1] {
                0.0
            } else if v < iv[0] {
                iv[0] - v
            } else {
                v - iv[1]
            }
        }
        match self {
            SingularSet::Empty => f64::INFINITY,
            SingularSet::Points(pts) => pts
                .iter()
                .map(|a| {
                    bx.iter()
                        .zip(a)
                        .map(|(iv, v)| axis_dist(*iv, *v).powi(2))
                        .sum::<f64>()
                        .sqrt()
                })
                .fold(f64::INFINITY, f64::min),
            SingularSet::CoordsZero(axes) => axes
                .iter()
                .map(|a| axis_dist(bx[*a], 0.0).powi(2))
                .sum::<f64>()
                .sqrt(),
            SingularSet::Hyperplane { axis, value } => axis_dist(bx[*axis], *value),
            SingularSet::Union(sets) => sets
                .iter()
                .map(|s| s.distance_box(bx))
                .fold(f64::INFINITY, f64::min),
        }
    }
}

/// A frame coefficient, specialized for the common constant case so that
/// per-node evaluation touches only the genuinely varying entries.
#[derive(Debug, Clone)]
enum CoeffPlan {
    Const(f64),
    Eval(BoundField),
}

/// A frame-field geometry: `X_1..X_k`, volume density, chart and singular set.
///
/// Contexts are immutable after construction; the frame coefficients and the
/// density are name-resolved once, so per-point evaluation does no string
/// work.
#[derive(Debug, Clone)]
pub struct GeometryContext {
    kind: ContextKind,
    id: String,
    ambient_dim: usize,
    frame_size: usize,
    coord_names: Vec<String>,
    frame_exprs: Vec<Vec<ScalarFieldExpr>>,
    omega_expr: ScalarFieldExpr,
    /// Flattened `k*m` coefficient plans, row-major by frame field.
    frame_plan: Vec<CoeffPlan>,
    omega_plan: CoeffPlan,
    chart: ChartDomain,
    singular: SingularSet,
    delta_sing: f64,
}

/// Default exclusion margin around singular sets.
pub const DELTA_SING: f64 = 1e-2;

fn ssq(names: &[String]) -> String {
    names
        .iter()
        .map(|n| format!("{n}*{n}"))
        .collect::<Vec<_>>()
        .join(" + ")
}

impl GeometryContext {
    fn build(
        kind: ContextKind,
        id: String,
        coord_names: Vec<String>,
        frame_sources: Vec<Vec<String>>,
        omega_source: String,
        chart: ChartDomain,
        singular: SingularSet,
    ) -> Self {
        let ambient_dim = coord_names.len();
        let none = Params::new();
        let frame_exprs: Vec<Vec<ScalarFieldExpr>> = frame_sources
            .iter()
            .map(|row| {
                row.iter()
                    .map(|s| ScalarFieldExpr::parse(s).expect("catalog frame expression"))
                    .collect()
            })
            .collect();
        let omega_expr = ScalarFieldExpr::parse(&omega_source).expect("catalog density expression");
        let plan_of = |e: &ScalarFieldExpr| -> CoeffPlan {
            match e.ast {
                crate::calculus::Expr::Const(c) => CoeffPlan::Const(c),
                _ => CoeffPlan::Eval(e.bind(&coord_names, &none).expect("catalog frame binds")),
            }
        };
        let frame_plan: Vec<CoeffPlan> =
            frame_exprs.iter().flat_map(|row| row.iter().map(plan_of)).collect();
        let omega_plan = plan_of(&omega_expr);
        GeometryContext {
            kind,
            id,
            ambient_dim,
            frame_size: frame_exprs.len(),
            coord_names,
            frame_exprs,
            omega_expr,
            frame_plan,
            omega_plan,
            chart,
            singular,
            delta_sing: DELTA_SING,
        }
    }

    /// Flat `ℝ^n` with the coordinate frame, Lebesgue density.
    pub fn euclidean(n: usize) -> Self {
        let names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        let frame = (0..n)
            .map(|i| (0..n).map(|j| if i == j { "1" } else { "0" }.to_string()).collect())
            .collect();
        Self::build(
            ContextKind::EuclideanWeighted { n },
            format!("euclidean:n={n}"),
            names,
            frame,
            "1".into(),
            ChartDomain::All,
            SingularSet::Points(vec![vec![0.0; n]]),
        )
    }

    /// `ℝ^n` with the single unit radial field `∂_r = (x/r)·∇`.
    pub fn euclidean_radial(n: usize) -> Self {
        let names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        let all = names.join(", ");
        let frame = vec![(1..=n).map(|j| format!("x{j} / norm({all})")).collect()];
        Self::build(
            ContextKind::EuclideanRadial { n },
            format!("radial:n={n}"),
            names,
            frame,
            "1".into(),
            ChartDomain::All,
            SingularSet::Points(vec![vec![0.0; n]]),
        )
    }

    /// Upper half-space `x_n > 0` with the coordinate frame.
    pub fn half_space(n: usize) -> Self {
        let names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        let frame = (0..n)
            .map(|i| (0..n).map(|j| if i == j { "1" } else { "0" }.to_string()).collect())
            .collect();
        Self::build(
            ContextKind::HalfSpace { n },
            format!("halfspace:n={n}"),
            names,
            frame,
            "1".into(),
            ChartDomain::HalfSpace { axis: n - 1 },
            SingularSet::Hyperplane { axis: n - 1, value: 0.0 },
        )
    }

    /// Poincaré ball: frame `((1-r²)/2)∂_i`, density `2^n/(1-r²)^n`.
    pub fn hyperbolic_ball(n: usize) -> Self {
        let names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        let s = ssq(&names);
        let coeff = format!("(1 - ({s})) / 2");
        let frame = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { coeff.clone() } else { "0".to_string() })
                    .collect()
            })
            .collect();
        let omega = format!("pow(2, {n}) * pow(1 - ({s}), -{n})");
        Self::build(
            ContextKind::HyperbolicBall { n },
            format!("hyperbolic:n={n}"),
            names,
            frame,
            omega,
            ChartDomain::UnitBall,
            SingularSet::Points(vec![vec![0.0; n]]),
        )
    }

    /// Heisenberg group `ℍ_n` on `ℝ^{2n+1}` with coordinates
    /// `x1..xn, y1..yn, t` and frame `X_i = ∂_{x_i} + 2y_i ∂_t`,
    /// `Y_i = ∂_{y_i} - 2x_i ∂_t`.
    pub fn heisenberg(n: usize) -> Self {
        let mut names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        names.extend((1..=n).map(|i| format!("y{i}")));
        names.push("t".into());
        let m = 2 * n + 1;
        let mut frame: Vec<Vec<String>> = Vec::with_capacity(2 * n);
        for i in 0..n {
            let mut row = vec!["0".to_string(); m];
            row[i] = "1".into();
            row[m - 1] = format!("2*y{}", i + 1);
            frame.push(row);
        }
        for i in 0..n {
            let mut row = vec!["0".to_string(); m];
            row[n + i] = "1".into();
            row[m - 1] = format!("-2*x{}", i + 1);
            frame.push(row);
        }
        Self::build(
            ContextKind::Heisenberg { n },
            format!("heisenberg:n={n}"),
            names,
            frame,
            "1".into(),
            ChartDomain::All,
            SingularSet::Points(vec![vec![0.0; m]]),
        )
    }

    /// Grushin plane `ℝ^d × ℝ^k` with frame `∂_{x_i}`, `|x|^γ ∂_{y_j}`.
    pub fn grushin(d: usize, k: usize, gamma: f64) -> Self {
        let mut names: Vec<String> = (1..=d).map(|i| format!("x{i}")).collect();
        names.extend((1..=k).map(|j| format!("y{j}")));
        let m = d + k;
        let sx = ssq(&names[..d].to_vec());
        let ycoeff = format!("pow({sx}, {})", gamma / 2.0);
        let mut frame: Vec<Vec<String>> = Vec::with_capacity(m);
        for i in 0..d {
            let mut row = vec!["0".to_string(); m];
            row[i] = "1".into();
            frame.push(row);
        }
        for j in 0..k {
            let mut row = vec!["0".to_string(); m];
            row[d + j] = ycoeff.clone();
            frame.push(row);
        }
        Self::build(
            ContextKind::Grushin { d, k, gamma },
            format!("grushin:d={d},k={k},gamma={gamma}"),
            names,
            frame,
            "1".into(),
            ChartDomain::All,
            SingularSet::CoordsZero((0..d).collect()),
        )
    }

    /// Edge model `(0,1) × ℝ^n × ℝ^q` with frame `t∂_t, ∂_{x_i}, t∂_{y_j}`
    /// and density `t^{-1-q}`.
    pub fn edge(n: usize, q: usize) -> Self {
        let mut names: Vec<String> = vec!["t".into()];
        names.extend((1..=n).map(|i| format!("x{i}")));
        names.extend((1..=q).map(|j| format!("y{j}")));
        let m = 1 + n + q;
        let mut frame: Vec<Vec<String>> = Vec::with_capacity(m);
        let mut trow = vec!["0".to_string(); m];
        trow[0] = "t".into();
        frame.push(trow);
        for i in 0..n {
            let mut row = vec!["0".to_string(); m];
            row[1 + i] = "1".into();
            frame.push(row);
        }
        for j in 0..q {
            let mut row = vec!["0".to_string(); m];
            row[1 + n + j] = "t".into();
            frame.push(row);
        }
        let omega = format!("pow(t, {})", -(1.0 + q as f64));
        Self::build(
            ContextKind::Edge { n, q },
            format!("edge:n={n},q={q}"),
            names,
            frame,
            omega,
            ChartDomain::Slab { axis: 0, lo: 0.0, hi: 1.0 },
            SingularSet::Hyperplane { axis: 0, value: 0.0 },
        )
    }

    /// Parse a catalog spec such as `heisenberg:n=1`, `grushin:d=3,k=1,gamma=1`,
    /// `edge:n=2,q=1`, `euclidean:n=3`, `radial:n=3`, `halfspace:n=2`,
    /// `hyperbolic:n=3`.
    pub fn parse(spec: &str) -> Result<Self, GeometryError> {
        let bad = || GeometryError::BadSpec(spec.to_string());
        let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
        let mut kv = std::collections::BTreeMap::new();
        for part in rest.split(',').filter(|s| !s.is_empty()) {
            let (k, v) = part.split_once('=').ok_or_else(bad)?;
            let v: f64 = v.trim().parse().map_err(|_| bad())?;
            kv.insert(k.trim().to_string(), v);
        }
        let get_usize = |key: &str| -> Result<usize, GeometryError> {
            let v = *kv.get(key).ok_or_else(bad)?;
            if v.fract() != 0.0 || v < 1.0 {
                return Err(bad());
            }
            Ok(v as usize)
        };
        Ok(match name {
            "euclidean" => Self::euclidean(get_usize("n")?),
            "radial" | "euclidean-radial" => Self::euclidean_radial(get_usize("n")?),
            "halfspace" => Self::half_space(get_usize("n")?),
            "hyperbolic" => Self::hyperbolic_ball(get_usize("n")?),
            "heisenberg" => Self::heisenberg(get_usize("n")?),
            "grushin" => {
                Self::grushin(get_usize("d")?, get_usize("k")?, *kv.get("gamma").ok_or_else(bad)?)
            }
            "edge" => Self::edge(get_usize("n")?, get_usize("q")?),
            _ => return Err(bad()),
        })
    }

    /// Replace the singular set (scenarios pick the locus their weights need).
    pub fn with_singular_set(mut self, singular: SingularSet) -> Self {
        self.singular = singular;
        self
    }

    /// Replace the exclusion margin around singular sets.
    pub fn with_delta_sing(mut self, delta: f64) -> Self {
        self.delta_sing = delta;
        self
    }

    pub fn kind(&self) -> &ContextKind {
        &self.kind
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn frame_size(&self) -> usize {
        self.frame_size
    }

    pub fn coord_names(&self) -> &[String] {
        &self.coord_names
    }

    pub fn chart(&self) -> &ChartDomain {
        &self.chart
    }

    pub fn singular_set(&self) -> &SingularSet {
        &self.singular
    }

    pub fn delta_sing(&self) -> f64 {
        self.delta_sing
    }

    pub fn omega_expr(&self) -> &ScalarFieldExpr {
        &self.omega_expr
    }

    pub fn frame_exprs(&self) -> &[Vec<ScalarFieldExpr>] {
        &self.frame_exprs
    }

    /// Bind a scalar field to this context's coordinate names.
    pub fn bind_field(
        &self,
        f: &ScalarFieldExpr,
        params: &Params,
    ) -> Result<BoundField, EvalError> {
        f.bind(&self.coord_names, params)
    }

    /// Bind a frame vector field, checking the component count.
    pub fn bind_vector(
        &self,
        field: &VectorFieldExpr,
        params: &Params,
    ) -> Result<Vec<BoundField>, GeometryError> {
        if field.len() != self.frame_size() {
            return Err(GeometryError::FrameSizeMismatch {
                expected: self.frame_size(),
                got: field.len(),
            });
        }
        Ok(field
            .components
            .iter()
            .map(|c| self.bind_field(c, params))
            .collect::<Result<_, _>>()?)
    }

    /// Validate that a support box lies in the chart with the singular margin.
    pub fn validate_support(&self, bx: &[[f64; 2]]) -> Result<(), GeometryError> {
        if bx.len() != self.ambient_dim {
            return Err(GeometryError::SupportViolation { margin: self.delta_sing });
        }
        if !self.chart.contains_box(bx, self.delta_sing)
            || self.singular.distance_box(bx) < self.delta_sing
        {
            return Err(GeometryError::SupportViolation { margin: self.delta_sing });
        }
        Ok(())
    }
}

/// A point with cached frame-coefficient values and first derivatives.
///
/// Storage is flat: `coeff_val[i*m + j] = X_i^j(p)` and
/// `coeff_grad[(i*m + j)*m + l] = ∂_l X_i^j(p)`. Constant coefficients carry
/// zero derivatives and skip evaluation entirely.
#[derive(Debug, Clone)]
pub struct FramePoint<'c> {
    ctx: &'c GeometryContext,
    ambient: Vec<f64>,
    coeff_val: Vec<f64>,
    coeff_grad: Vec<f64>,
    omega_val: f64,
    omega_grad: Vec<f64>,
}

impl<'c> FramePoint<'c> {
    pub fn new(ctx: &'c GeometryContext, ambient: &[f64]) -> Result<Self, GeometryError> {
        if ambient.len() != ctx.ambient_dim {
            return Err(GeometryError::OutsideChart);
        }
        if !ctx.chart.contains_point(ambient) {
            return Err(GeometryError::OutsideChart);
        }
        if ctx.singular.distance_point(ambient) == 0.0 {
            return Err(GeometryError::OnSingularSet);
        }
        Self::new_unvalidated(ctx, ambient).map_err(GeometryError::from)
    }

    /// Construct without chart/singular checks; used on quadrature nodes that
    /// come from an already-validated support box.
    pub(crate) fn new_unvalidated(
        ctx: &'c GeometryContext,
        ambient: &[f64],
    ) -> Result<Self, EvalError> {
        let m = ctx.ambient_dim;
        let k = ctx.frame_size;
        let mut coeff_val = vec![0.0; k * m];
        let mut coeff_grad = vec![0.0; k * m * m];
        for (idx, plan) in ctx.frame_plan.iter().enumerate() {
            match plan {
                CoeffPlan::Const(c) => coeff_val[idx] = *c,
                CoeffPlan::Eval(b) => {
                    let jet = b.jet(ambient)?;
                    coeff_val[idx] = jet.value;
                    coeff_grad[idx * m..(idx + 1) * m].copy_from_slice(&jet.grad);
                }
            }
        }
        let (omega_val, omega_grad) = match &ctx.omega_plan {
            CoeffPlan::Const(c) => (*c, vec![0.0; m]),
            CoeffPlan::Eval(b) => {
                let jet = b.jet(ambient)?;
                (jet.value, jet.grad)
            }
        };
        Ok(FramePoint { ctx, ambient: ambient.to_vec(), coeff_val, coeff_grad, omega_val, omega_grad })
    }

    pub fn ambient(&self) -> &[f64] {
        &self.ambient
    }

    pub fn ctx(&self) -> &'c GeometryContext {
        self.ctx
    }

    pub fn omega(&self) -> f64 {
        self.omega_val
    }

    /// Frame gradient components `(X_i f)(p)` from an ambient gradient,
    /// written into `out` (length `k`) without allocating.
    pub fn gradient_values_into(&self, ambient_grad: &[f64], out: &mut [f64]) {
        let m = self.ctx.ambient_dim;
        for (i, slot) in out.iter_mut().enumerate() {
            let row = &self.coeff_val[i * m..(i + 1) * m];
            *slot = row.iter().zip(ambient_grad).map(|(c, g)| c * g).sum();
        }
    }

    /// Frame gradient components `(X_i f)(p)` from the jet of `f`.
    pub fn gradient_from_jet(&self, fj: &Jet2) -> Vec<f64> {
        let mut out = vec![0.0; self.ctx.frame_size];
        self.gradient_values_into(&fj.grad, &mut out);
        out
    }

    /// Frame gradient components with their ambient first derivatives.
    /// Needs the full 2-jet of `f` and 1-jets of the frame coefficients.
    pub(crate) fn gradient_duals(&self, fj: &Jet2) -> Vec<Dual> {
        let m = self.ctx.ambient_dim;
        (0..self.ctx.frame_size)
            .map(|i| {
                let row = &self.coeff_val[i * m..(i + 1) * m];
                let v = row.iter().zip(&fj.grad).map(|(c, g)| c * g).sum();
                let g = (0..m)
                    .map(|j| {
                        (0..m)
                            .map(|l| {
                                self.coeff_grad[(i * m + l) * m + j] * fj.grad[l]
                                    + row[l] * fj.hess_at(l, j)
                            })
                            .sum()
                    })
                    .collect();
                Dual { v, g }
            })
            .collect()
    }

    /// `div_g F = ω^{-1} Σ_j ∂_j(ω Σ_i F_i X_i^j)` for frame components given
    /// as first-order jets.
    pub(crate) fn divergence_duals(&self, comps: &[Dual]) -> f64 {
        let m = self.ctx.ambient_dim;
        let k = self.ctx.frame_size;
        debug_assert_eq!(comps.len(), k);
        let mut acc = 0.0;
        for j in 0..m {
            let mut gj = 0.0;
            let mut dgj = 0.0;
            for (i, ci) in comps.iter().enumerate() {
                let xij = self.coeff_val[i * m + j];
                gj += ci.v * xij;
                dgj += ci.g[j] * xij + ci.v * self.coeff_grad[(i * m + j) * m + j];
            }
            acc += self.omega_grad[j] * gj + self.omega_val * dgj;
        }
        acc / self.omega_val
    }

    /// `Δ_g f` from the 2-jet of `f`.
    pub fn laplacian_from_jet(&self, fj: &Jet2) -> f64 {
        let comps = self.gradient_duals(fj);
        self.divergence_duals(&comps)
    }

    /// Evaluate bound frame components into first-order jets.
    pub(crate) fn vector_duals(&self, comps: &[BoundField]) -> Result<Vec<Dual>, EvalError> {
        comps
            .iter()
            .map(|b| b.jet(&self.ambient).map(|j| Dual::from_jet(&j)))
            .collect()
    }
}

/// `∇_g f` at `p`: component `i` is `(X_i f)(p)`.
pub fn frame_gradient(
    ctx: &GeometryContext,
    f: &ScalarFieldExpr,
    params: &Params,
    p: &FramePoint<'_>,
) -> Result<Vec<f64>, GeometryError> {
    let fj = ctx.bind_field(f, params)?.jet(p.ambient())?;
    Ok(p.gradient_from_jet(&fj))
}

/// `div_g F` at `p` for a frame vector field.
pub fn frame_divergence(
    ctx: &GeometryContext,
    field: &VectorFieldExpr,
    params: &Params,
    p: &FramePoint<'_>,
) -> Result<f64, GeometryError> {
    let bound = ctx.bind_vector(field, params)?;
    let comps = p.vector_duals(&bound)?;
    Ok(p.divergence_duals(&comps))
}

/// `Δ_g f = div_g(∇_g f)` at `p`.
pub fn laplace_beltrami(
    ctx: &GeometryContext,
    f: &ScalarFieldExpr,
    params: &Params,
    p: &FramePoint<'_>,
) -> Result<f64, GeometryError> {
    let fj = ctx.bind_field(f, params)?.jet(p.ambient())?;
    Ok(p.laplacian_from_jet(&fj))
}

/// Homogeneous Heisenberg norm `ρ = (r⁴ + t²)^{1/4}`, `r² = |x|² + |y|²`.
pub fn heisenberg_norm(n: usize) -> ScalarFieldExpr {
    let mut names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    names.extend((1..=n).map(|i| format!("y{i}")));
    let s = ssq(&names);
    ScalarFieldExpr::parse(&format!("pow(({s})*({s}) + t*t, 0.25)")).unwrap()
}

/// Squared horizontal radius `r² = |x|² + |y|²` on the Heisenberg group.
pub fn heisenberg_r2(n: usize) -> ScalarFieldExpr {
    let mut names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    names.extend((1..=n).map(|i| format!("y{i}")));
    ScalarFieldExpr::parse(&ssq(&names)).unwrap()
}

/// Grushin gauge `ρ = [|x|^{2+2γ} + (1+γ)²|y|²]^{1/(2+2γ)}`.
pub fn grushin_norm(d: usize, k: usize, gamma: f64) -> ScalarFieldExpr {
    let xs: Vec<String> = (1..=d).map(|i| format!("x{i}")).collect();
    let ys: Vec<String> = (1..=k).map(|j| format!("y{j}")).collect();
    let sx = ssq(&xs);
    let sy = ssq(&ys);
    let c = (1.0 + gamma) * (1.0 + gamma);
    let e = 1.0 / (2.0 + 2.0 * gamma);
    ScalarFieldExpr::parse(&format!("pow(pow({sx}, {}) + {c}*({sy}), {e})", 1.0 + gamma)).unwrap()
}

/// Hyperbolic distance from the origin in the ball chart,
/// `ρ = ln((1+r)/(1-r))`, normalized so that `‖∇_g ρ‖ = 1` and radial
/// functions satisfy `Δ_g φ(ρ) = φ'' + (n-1) coth(ρ) φ'`.
pub fn hyperbolic_rho(n: usize) -> ScalarFieldExpr {
    let names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    let r = format!("norm({})", names.join(", "));
    ScalarFieldExpr::parse(&format!("log((1 + {r}) / (1 - {r}))")).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::parse_expression;

    fn no_params() -> Params {
        Params::new()
    }

    #[test]
    fn hyperbolic_frame_gradient_example() {
        // n=2, f = x1 at (1/2, 0): X_1 f = (1 - 1/4)/2 = 3/8
        let ctx = GeometryContext::hyperbolic_ball(2);
        let p = FramePoint::new(&ctx, &[0.5, 0.0]).unwrap();
        let f = parse_expression("x1").unwrap();
        let g = frame_gradient(&ctx, &f, &no_params(), &p).unwrap();
        assert!((g[0] - 0.375).abs() < 1e-15);
        assert!(g[1].abs() < 1e-15);
    }

    #[test]
    fn constant_has_zero_gradient() {
        let ctx = GeometryContext::edge(2, 1);
        let p = FramePoint::new(&ctx, &[0.5, 0.3, -0.2, 0.4]).unwrap();
        let f = parse_expression("7").unwrap();
        let g = frame_gradient(&ctx, &f, &no_params(), &p).unwrap();
        assert!(g.iter().all(|c| *c == 0.0));
    }

    #[test]
    fn heisenberg_gradient_of_t() {
        // f = t at (x,y,t)=(1,0,1): (X f, Y f) = (2y, -2x) = (0, -2)
        let ctx = GeometryContext::heisenberg(1);
        let p = FramePoint::new(&ctx, &[1.0, 0.0, 1.0]).unwrap();
        let f = parse_expression("t").unwrap();
        let g = frame_gradient(&ctx, &f, &no_params(), &p).unwrap();
        assert_eq!(g, vec![0.0, -2.0]);
    }

    #[test]
    fn euclidean_divergence_of_identity_field() {
        let ctx = GeometryContext::euclidean(3);
        let p = FramePoint::new(&ctx, &[0.3, -0.8, 1.1]).unwrap();
        let field = VectorFieldExpr::new(vec![
            parse_expression("x1").unwrap(),
            parse_expression("x2").unwrap(),
            parse_expression("x3").unwrap(),
        ]);
        let d = frame_divergence(&ctx, &field, &no_params(), &p).unwrap();
        assert!((d - 3.0).abs() < 1e-13);
    }

    #[test]
    fn euclidean_divergence_of_inverse_square_field() {
        // div(x/|x|^2) = (n-2)/|x|^2 = 1 at (1,0,0) in R^3
        let ctx = GeometryContext::euclidean(3);
        let p = FramePoint::new(&ctx, &[1.0, 0.0, 0.0]).unwrap();
        let s = "x1*x1 + x2*x2 + x3*x3";
        let field = VectorFieldExpr::new(vec![
            parse_expression(&format!("x1 / ({s})")).unwrap(),
            parse_expression(&format!("x2 / ({s})")).unwrap(),
            parse_expression(&format!("x3 / ({s})")).unwrap(),
        ]);
        let d = frame_divergence(&ctx, &field, &no_params(), &p).unwrap();
        assert!((d - 1.0).abs() < 1e-13);
    }

    #[test]
    fn edge_divergence_cross_checked_against_laplacian_of_t_squared() {
        // Δ_E t² = 4t² - 2qt²; ∇_E t² has frame components (2t², 0, 0, 0)
        let ctx = GeometryContext::edge(2, 1);
        let p = FramePoint::new(&ctx, &[0.5, 0.2, -0.4, 0.3]).unwrap();
        let field = VectorFieldExpr::new(vec![
            parse_expression("2*t*t").unwrap(),
            parse_expression("0").unwrap(),
            parse_expression("0").unwrap(),
            parse_expression("0").unwrap(),
        ]);
        let d = frame_divergence(&ctx, &field, &no_params(), &p).unwrap();
        let q = 1.0;
        let t = 0.5f64;
        let expected = 4.0 * t * t - 2.0 * q * t * t;
        assert!((d - expected).abs() < 1e-13);
        let f = parse_expression("t*t").unwrap();
        let lb = laplace_beltrami(&ctx, &f, &no_params(), &p).unwrap();
        assert!((lb - expected).abs() < 1e-13);
    }

    #[test]
    fn euclidean_fundamental_solution_is_harmonic() {
        let ctx = GeometryContext::euclidean(3);
        let p = FramePoint::new(&ctx, &[2.0, 0.0, 0.0]).unwrap();
        let f = parse_expression("pow(norm(x1,x2,x3), -1)").unwrap();
        let lb = laplace_beltrami(&ctx, &f, &no_params(), &p).unwrap();
        assert!(lb.abs() < 1e-13);
    }

    #[test]
    fn hyperbolic_radial_laplacian_of_rho_squared() {
        // Δ_H ρ² = 2 + 2(n-1) ρ coth ρ; at ρ=1, n=3: 2 + 4 coth 1
        let n = 3;
        let ctx = GeometryContext::hyperbolic_ball(n);
        let r = (0.5f64).tanh(); // point at hyperbolic distance 1
        let p = FramePoint::new(&ctx, &[r, 0.0, 0.0]).unwrap();
        let rho = hyperbolic_rho(n);
        let f = ScalarFieldExpr::new(crate::calculus::Expr::Mul(
            rho.ast.clone().into(),
            rho.ast.clone().into(),
        ));
        let lb = laplace_beltrami(&ctx, &f, &no_params(), &p).unwrap();
        let expected = 2.0 + 4.0 / 1.0f64.tanh();
        assert!((lb - expected).abs() < 1e-10, "got {lb}, expected {expected}");
    }

    #[test]
    fn heisenberg_laplacian_of_gauge_fourth_power() {
        // Δ_H (r⁴ + t²) = 16r² + 8r² = 24r² for n=1 (independent operator form)
        let ctx = GeometryContext::heisenberg(1);
        let p = FramePoint::new(&ctx, &[1.0, 0.0, 0.5]).unwrap();
        let f = parse_expression("(x1*x1 + y1*y1)*(x1*x1 + y1*y1) + t*t").unwrap();
        let lb = laplace_beltrami(&ctx, &f, &no_params(), &p).unwrap();
        assert!((lb - 24.0).abs() < 1e-12);
    }

    #[test]
    fn laplacian_agrees_with_divergence_of_symbolic_gradient() {
        // independent route: differentiate a polynomial symbolically, form the
        // frame components X_i f = sum_j X_i^j d_j f as expressions, and push
        // them through frame_divergence
        use crate::calculus::Expr;
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(31);
        let contexts = vec![
            (GeometryContext::euclidean(3), vec![0.7, -0.4, 1.1]),
            (GeometryContext::euclidean_radial(3), vec![0.8, 0.5, -0.6]),
            (GeometryContext::half_space(2), vec![0.4, 0.9]),
            (GeometryContext::hyperbolic_ball(2), vec![0.3, -0.2]),
            (GeometryContext::heisenberg(1), vec![0.6, -0.8, 0.5]),
            (GeometryContext::grushin(2, 1, 1.0), vec![0.7, 0.4, -0.3]),
            (GeometryContext::edge(2, 1), vec![0.5, 0.4, -0.6, 0.2]),
        ];
        for (ctx, point) in contexts {
            let m = ctx.ambient_dim();
            let poly = crate::testpoly::Poly::random(&mut rng, m, 3, 5);
            // coordinate names in the context's own aliases
            let rename = |e: &crate::calculus::ScalarFieldExpr| {
                let mut out = e.clone();
                for (axis, name) in ctx.coord_names().iter().enumerate() {
                    out = out.substitute_var(&format!("x{}", axis + 1), &Expr::Var(name.clone()));
                }
                out
            };
            let f = rename(&poly.to_expr());
            let grads: Vec<_> = (0..m).map(|j| rename(&poly.diff(j).to_expr())).collect();
            let comps: Vec<crate::calculus::ScalarFieldExpr> = (0..ctx.frame_size())
                .map(|i| {
                    let mut acc: Option<Expr> = None;
                    for j in 0..m {
                        let term = Expr::Mul(
                            ctx.frame_exprs()[i][j].ast.clone().into(),
                            grads[j].ast.clone().into(),
                        );
                        acc = Some(match acc {
                            None => term,
                            Some(prev) => Expr::Add(prev.into(), term.into()),
                        });
                    }
                    crate::calculus::ScalarFieldExpr::new(acc.unwrap())
                })
                .collect();
            let field = VectorFieldExpr::new(comps);
            let p = FramePoint::new(&ctx, &point).unwrap();
            let none = Params::new();
            let via_div = frame_divergence(&ctx, &field, &none, &p).unwrap();
            let direct = laplace_beltrami(&ctx, &f, &none, &p).unwrap();
            assert!(
                (via_div - direct).abs() <= 1e-12 * direct.abs().max(1.0),
                "{}: {via_div} vs {direct}",
                ctx.id()
            );
        }
    }

    #[test]
    fn support_validation() {
        let ctx = GeometryContext::euclidean(2);
        assert!(ctx.validate_support(&[[1.0, 2.0], [1.0, 2.0]]).is_ok());
        // box containing the origin violates the singular margin
        assert!(ctx.validate_support(&[[-0.5, 0.5], [-0.5, 0.5]]).is_err());
        let edge = GeometryContext::edge(1, 1);
        assert!(edge.validate_support(&[[0.2, 0.8], [-1.0, 1.0], [-1.0, 1.0]]).is_ok());
        assert!(edge.validate_support(&[[0.2, 1.2], [-1.0, 1.0], [-1.0, 1.0]]).is_err());
    }

    #[test]
    fn parse_specs() {
        assert_eq!(GeometryContext::parse("heisenberg:n=1").unwrap().ambient_dim(), 3);
        assert_eq!(GeometryContext::parse("grushin:d=3,k=1,gamma=1").unwrap().frame_size(), 4);
        assert_eq!(GeometryContext::parse("edge:n=2,q=1").unwrap().ambient_dim(), 4);
        assert!(GeometryContext::parse("torus:n=2").is_err());
    }
}
