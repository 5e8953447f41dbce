//! Scalar-field expressions: AST, binding, evaluation and printing.
//!
//! Expressions are trees over named coordinates and parameters with the
//! builtins `pow, exp, log, sqrt, sinh, cosh, tanh, coth, abs, sin, cos,
//! norm`. Evaluation produces an exact [`Jet2`] via truncated Taylor
//! arithmetic. Binding (name resolution plus constant-folding of `pow`
//! exponents) is separated from evaluation so hot loops resolve names once.

use std::fmt;

use super::jet::Jet2;
use crate::Params;

/// Built-in univariate functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryFn {
    Exp,
    Log,
    Sqrt,
    Sinh,
    Cosh,
    Tanh,
    Coth,
    Abs,
    Sin,
    Cos,
}

impl UnaryFn {
    pub fn name(self) -> &'static str {
        match self {
            UnaryFn::Exp => "exp",
            UnaryFn::Log => "log",
            UnaryFn::Sqrt => "sqrt",
            UnaryFn::Sinh => "sinh",
            UnaryFn::Cosh => "cosh",
            UnaryFn::Tanh => "tanh",
            UnaryFn::Coth => "coth",
            UnaryFn::Abs => "abs",
            UnaryFn::Sin => "sin",
            UnaryFn::Cos => "cos",
        }
    }

    pub fn from_name(s: &str) -> Option<UnaryFn> {
        Some(match s {
            "exp" => UnaryFn::Exp,
            "log" => UnaryFn::Log,
            "sqrt" => UnaryFn::Sqrt,
            "sinh" => UnaryFn::Sinh,
            "cosh" => UnaryFn::Cosh,
            "tanh" => UnaryFn::Tanh,
            "coth" => UnaryFn::Coth,
            "abs" => UnaryFn::Abs,
            "sin" => UnaryFn::Sin,
            "cos" => UnaryFn::Cos,
            _ => return None,
        })
    }
}

/// Expression tree over named coordinates and parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(String),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    /// `pow(base, exponent)`; the exponent must be coordinate-free.
    Pow(Box<Expr>, Box<Expr>),
    Unary(UnaryFn, Box<Expr>),
    /// `norm(e1, .., ek)` = sqrt(e1² + .. + ek²).
    Norm(Vec<Expr>),
}

/// Errors raised while binding or evaluating an expression.
#[derive(Debug, Clone, thiserror::Error)]
pub enum EvalError {
    #[error("unknown identifier `{name}` (not a coordinate or bound parameter)")]
    UnknownIdentifier { name: String },
    #[error("exponent of `{expr}` depends on a coordinate; pow exponents must be constant")]
    NonConstantExponent { expr: String },
    #[error("domain violation in `{expr}`: {reason}")]
    DomainViolation { expr: String, reason: String },
    #[error("non-finite result while evaluating `{expr}`")]
    NonFinite { expr: String },
    #[error("point dimension {got} does not match expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// A scalar field: an expression evaluated over named coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarFieldExpr {
    pub ast: Expr,
}

/// A vector field given componentwise in the frame of a geometry context.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorFieldExpr {
    pub components: Vec<ScalarFieldExpr>,
}

impl VectorFieldExpr {
    pub fn new(components: Vec<ScalarFieldExpr>) -> Self {
        VectorFieldExpr { components }
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
}

impl ScalarFieldExpr {
    pub fn new(ast: Expr) -> Self {
        ScalarFieldExpr { ast }
    }

    /// Parse from the expression grammar. See [`crate::calculus::parse_expression`].
    pub fn parse(src: &str) -> Result<Self, super::parser::ParseError> {
        super::parser::parse(src).map(ScalarFieldExpr::new)
    }

    pub fn constant(c: f64) -> Self {
        ScalarFieldExpr::new(Expr::Const(c))
    }

    pub fn var(name: &str) -> Self {
        ScalarFieldExpr::new(Expr::Var(name.to_string()))
    }

    /// Replace parameter names by constants. Coordinates are untouched, so
    /// substitution commutes with evaluation.
    pub fn substitute(&self, params: &Params) -> ScalarFieldExpr {
        fn go(e: &Expr, params: &Params) -> Expr {
            match e {
                Expr::Const(c) => Expr::Const(*c),
                Expr::Var(n) => match params.get(n) {
                    Some(v) => Expr::Const(*v),
                    None => Expr::Var(n.clone()),
                },
                Expr::Add(a, b) => Expr::Add(go(a, params).into(), go(b, params).into()),
                Expr::Sub(a, b) => Expr::Sub(go(a, params).into(), go(b, params).into()),
                Expr::Mul(a, b) => Expr::Mul(go(a, params).into(), go(b, params).into()),
                Expr::Div(a, b) => Expr::Div(go(a, params).into(), go(b, params).into()),
                Expr::Neg(a) => Expr::Neg(go(a, params).into()),
                Expr::Pow(a, b) => Expr::Pow(go(a, params).into(), go(b, params).into()),
                Expr::Unary(f, a) => Expr::Unary(*f, go(a, params).into()),
                Expr::Norm(v) => Expr::Norm(v.iter().map(|a| go(a, params)).collect()),
            }
        }
        ScalarFieldExpr::new(go(&self.ast, params))
    }

    /// Replace every occurrence of the variable `name` by an expression.
    pub fn substitute_var(&self, name: &str, with: &Expr) -> ScalarFieldExpr {
        fn go(e: &Expr, name: &str, with: &Expr) -> Expr {
            match e {
                Expr::Const(c) => Expr::Const(*c),
                Expr::Var(n) if n == name => with.clone(),
                Expr::Var(n) => Expr::Var(n.clone()),
                Expr::Add(a, b) => Expr::Add(go(a, name, with).into(), go(b, name, with).into()),
                Expr::Sub(a, b) => Expr::Sub(go(a, name, with).into(), go(b, name, with).into()),
                Expr::Mul(a, b) => Expr::Mul(go(a, name, with).into(), go(b, name, with).into()),
                Expr::Div(a, b) => Expr::Div(go(a, name, with).into(), go(b, name, with).into()),
                Expr::Neg(a) => Expr::Neg(go(a, name, with).into()),
                Expr::Pow(a, b) => Expr::Pow(go(a, name, with).into(), go(b, name, with).into()),
                Expr::Unary(f, a) => Expr::Unary(*f, go(a, name, with).into()),
                Expr::Norm(v) => Expr::Norm(v.iter().map(|a| go(a, name, with)).collect()),
            }
        }
        ScalarFieldExpr::new(go(&self.ast, name, with))
    }

    /// Collapse `log(exp(e))` to `e`. Composing fields with `r := exp(s)`
    /// produces such pairs, and cancelling them symbolically keeps logarithmic
    /// weights evaluable when `exp(s)` rounds to 1.
    pub fn simplify_log_exp(&self) -> ScalarFieldExpr {
        fn go(e: &Expr) -> Expr {
            match e {
                Expr::Const(c) => Expr::Const(*c),
                Expr::Var(n) => Expr::Var(n.clone()),
                Expr::Add(a, b) => Expr::Add(go(a).into(), go(b).into()),
                Expr::Sub(a, b) => Expr::Sub(go(a).into(), go(b).into()),
                Expr::Mul(a, b) => Expr::Mul(go(a).into(), go(b).into()),
                Expr::Div(a, b) => Expr::Div(go(a).into(), go(b).into()),
                Expr::Neg(a) => Expr::Neg(go(a).into()),
                Expr::Pow(a, b) => Expr::Pow(go(a).into(), go(b).into()),
                Expr::Unary(UnaryFn::Log, a) => {
                    let inner = go(a);
                    if let Expr::Unary(UnaryFn::Exp, x) = inner {
                        *x
                    } else {
                        Expr::Unary(UnaryFn::Log, inner.into())
                    }
                }
                Expr::Unary(f, a) => Expr::Unary(*f, go(a).into()),
                Expr::Norm(v) => Expr::Norm(v.iter().map(go).collect()),
            }
        }
        ScalarFieldExpr::new(go(&self.ast))
    }

    /// Resolve names against coordinates/parameters and fold `pow` exponents.
    pub fn bind(&self, coords: &[String], params: &Params) -> Result<BoundField, EvalError> {
        Ok(BoundField {
            dim: coords.len(),
            bound: bind_expr(&self.ast, coords, params)?,
        })
    }

    /// Evaluate the exact 2-jet at a point.
    pub fn eval_jet(
        &self,
        point: &[f64],
        coords: &[String],
        params: &Params,
    ) -> Result<Jet2, EvalError> {
        self.bind(coords, params)?.jet(point)
    }
}

impl fmt::Display for ScalarFieldExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.ast)
    }
}

// Precedence: Add/Sub = 1, Mul/Div = 2, Neg = 3, atoms/calls = 4.
fn fmt_prec(e: &Expr, parent: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let prec = match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) | Expr::Div(..) => 2,
        Expr::Neg(..) => 3,
        _ => 4,
    };
    let paren = prec < parent;
    if paren {
        write!(f, "(")?;
    }
    match e {
        Expr::Const(c) => write!(f, "{}", c)?,
        Expr::Var(n) => write!(f, "{}", n)?,
        Expr::Add(a, b) => {
            fmt_prec(a, 1, f)?;
            write!(f, " + ")?;
            fmt_prec(b, 2, f)?;
        }
        Expr::Sub(a, b) => {
            fmt_prec(a, 1, f)?;
            write!(f, " - ")?;
            fmt_prec(b, 2, f)?;
        }
        Expr::Mul(a, b) => {
            fmt_prec(a, 2, f)?;
            write!(f, " * ")?;
            fmt_prec(b, 3, f)?;
        }
        Expr::Div(a, b) => {
            fmt_prec(a, 2, f)?;
            write!(f, " / ")?;
            fmt_prec(b, 3, f)?;
        }
        Expr::Neg(a) => {
            write!(f, "-")?;
            fmt_prec(a, 3, f)?;
        }
        Expr::Pow(a, b) => {
            write!(f, "pow(")?;
            fmt_prec(a, 0, f)?;
            write!(f, ", ")?;
            fmt_prec(b, 0, f)?;
            write!(f, ")")?;
        }
        Expr::Unary(func, a) => {
            write!(f, "{}(", func.name())?;
            fmt_prec(a, 0, f)?;
            write!(f, ")")?;
        }
        Expr::Norm(v) => {
            write!(f, "norm(")?;
            for (i, a) in v.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                fmt_prec(a, 0, f)?;
            }
            write!(f, ")")?;
        }
    }
    if paren {
        write!(f, ")")?;
    }
    Ok(())
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_prec(self, 0, f)
    }
}

/// A name-resolved expression ready for repeated evaluation.
#[derive(Debug, Clone)]
pub struct BoundField {
    dim: usize,
    bound: Bound,
}

#[derive(Debug, Clone)]
enum PowKind {
    Int(i32),
    Real(f64),
}

#[derive(Debug, Clone)]
enum Bound {
    Const(f64),
    Coord(usize, String),
    Add(Box<Bound>, Box<Bound>),
    Sub(Box<Bound>, Box<Bound>),
    Mul(Box<Bound>, Box<Bound>),
    Div(Box<Bound>, Box<Bound>),
    Neg(Box<Bound>),
    Pow(Box<Bound>, PowKind),
    Unary(UnaryFn, Box<Bound>),
    Norm(Vec<Bound>),
}

fn render(b: &Bound) -> String {
    fn go(b: &Bound, out: &mut String) {
        match b {
            Bound::Const(c) => out.push_str(&format!("{}", c)),
            Bound::Coord(_, n) => out.push_str(n),
            Bound::Add(a, b) => {
                out.push('(');
                go(a, out);
                out.push_str(" + ");
                go(b, out);
                out.push(')');
            }
            Bound::Sub(a, b) => {
                out.push('(');
                go(a, out);
                out.push_str(" - ");
                go(b, out);
                out.push(')');
            }
            Bound::Mul(a, b) => {
                out.push('(');
                go(a, out);
                out.push_str(" * ");
                go(b, out);
                out.push(')');
            }
            Bound::Div(a, b) => {
                out.push('(');
                go(a, out);
                out.push_str(" / ");
                go(b, out);
                out.push(')');
            }
            Bound::Neg(a) => {
                out.push_str("-(");
                go(a, out);
                out.push(')');
            }
            Bound::Pow(a, k) => {
                out.push_str("pow(");
                go(a, out);
                match k {
                    PowKind::Int(i) => out.push_str(&format!(", {}", i)),
                    PowKind::Real(e) => out.push_str(&format!(", {}", e)),
                }
                out.push(')');
            }
            Bound::Unary(f, a) => {
                out.push_str(f.name());
                out.push('(');
                go(a, out);
                out.push(')');
            }
            Bound::Norm(v) => {
                out.push_str("norm(");
                for (i, a) in v.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    go(a, out);
                }
                out.push(')');
            }
        }
    }
    let mut s = String::new();
    go(b, &mut s);
    s
}

/// Evaluate an expression that must not reference coordinates.
fn const_eval(e: &Expr, coords: &[String], params: &Params) -> Result<f64, EvalError> {
    match e {
        Expr::Const(c) => Ok(*c),
        Expr::Var(n) => {
            if coords.iter().any(|c| c == n) {
                Err(EvalError::NonConstantExponent { expr: n.clone() })
            } else {
                params
                    .get(n)
                    .copied()
                    .ok_or_else(|| EvalError::UnknownIdentifier { name: n.clone() })
            }
        }
        Expr::Add(a, b) => Ok(const_eval(a, coords, params)? + const_eval(b, coords, params)?),
        Expr::Sub(a, b) => Ok(const_eval(a, coords, params)? - const_eval(b, coords, params)?),
        Expr::Mul(a, b) => Ok(const_eval(a, coords, params)? * const_eval(b, coords, params)?),
        Expr::Div(a, b) => Ok(const_eval(a, coords, params)? / const_eval(b, coords, params)?),
        Expr::Neg(a) => Ok(-const_eval(a, coords, params)?),
        Expr::Pow(a, b) => {
            Ok(const_eval(a, coords, params)?.powf(const_eval(b, coords, params)?))
        }
        Expr::Unary(f, a) => {
            let v = const_eval(a, coords, params)?;
            Ok(match f {
                UnaryFn::Exp => v.exp(),
                UnaryFn::Log => v.ln(),
                UnaryFn::Sqrt => v.sqrt(),
                UnaryFn::Sinh => v.sinh(),
                UnaryFn::Cosh => v.cosh(),
                UnaryFn::Tanh => v.tanh(),
                UnaryFn::Coth => 1.0 / v.tanh(),
                UnaryFn::Abs => v.abs(),
                UnaryFn::Sin => v.sin(),
                UnaryFn::Cos => v.cos(),
            })
        }
        Expr::Norm(v) => {
            let mut s = 0.0;
            for a in v {
                let x = const_eval(a, coords, params)?;
                s += x * x;
            }
            Ok(s.sqrt())
        }
    }
}

fn bind_expr(e: &Expr, coords: &[String], params: &Params) -> Result<Bound, EvalError> {
    Ok(match e {
        Expr::Const(c) => Bound::Const(*c),
        Expr::Var(n) => {
            if let Some(i) = coords.iter().position(|c| c == n) {
                Bound::Coord(i, n.clone())
            } else if let Some(v) = params.get(n) {
                Bound::Const(*v)
            } else {
                return Err(EvalError::UnknownIdentifier { name: n.clone() });
            }
        }
        Expr::Add(a, b) => Bound::Add(
            bind_expr(a, coords, params)?.into(),
            bind_expr(b, coords, params)?.into(),
        ),
        Expr::Sub(a, b) => Bound::Sub(
            bind_expr(a, coords, params)?.into(),
            bind_expr(b, coords, params)?.into(),
        ),
        Expr::Mul(a, b) => Bound::Mul(
            bind_expr(a, coords, params)?.into(),
            bind_expr(b, coords, params)?.into(),
        ),
        Expr::Div(a, b) => Bound::Div(
            bind_expr(a, coords, params)?.into(),
            bind_expr(b, coords, params)?.into(),
        ),
        Expr::Neg(a) => Bound::Neg(bind_expr(a, coords, params)?.into()),
        Expr::Pow(a, b) => {
            let expo = const_eval(b, coords, params).map_err(|err| match err {
                EvalError::NonConstantExponent { .. } => {
                    EvalError::NonConstantExponent { expr: format!("{}", e) }
                }
                other => other,
            })?;
            let kind = if expo.fract() == 0.0 && expo.abs() <= 1e6 {
                PowKind::Int(expo as i32)
            } else {
                PowKind::Real(expo)
            };
            Bound::Pow(bind_expr(a, coords, params)?.into(), kind)
        }
        Expr::Unary(f, a) => Bound::Unary(*f, bind_expr(a, coords, params)?.into()),
        Expr::Norm(v) => {
            let parts: Result<Vec<_>, _> =
                v.iter().map(|a| bind_expr(a, coords, params)).collect();
            Bound::Norm(parts?)
        }
    })
}

fn domain_err(b: &Bound, reason: &str) -> EvalError {
    EvalError::DomainViolation { expr: render(b), reason: reason.to_string() }
}

impl Bound {
    fn jet(&self, dim: usize, point: &[f64]) -> Result<Jet2, EvalError> {
        Ok(match self {
            Bound::Const(c) => Jet2::constant(dim, *c),
            Bound::Coord(i, _) => Jet2::coordinate(dim, *i, point[*i]),
            Bound::Add(a, b) => a.jet(dim, point)?.add(&b.jet(dim, point)?),
            Bound::Sub(a, b) => a.jet(dim, point)?.sub(&b.jet(dim, point)?),
            Bound::Mul(a, b) => a.jet(dim, point)?.mul(&b.jet(dim, point)?),
            Bound::Div(a, b) => {
                let den = b.jet(dim, point)?;
                if den.value == 0.0 {
                    return Err(domain_err(self, "division by zero"));
                }
                a.jet(dim, point)?.mul(&den.recip())
            }
            Bound::Neg(a) => a.jet(dim, point)?.neg(),
            Bound::Pow(a, kind) => {
                let base = a.jet(dim, point)?;
                match kind {
                    PowKind::Int(k) => {
                        if *k < 0 && base.value == 0.0 {
                            return Err(domain_err(self, "zero base with negative exponent"));
                        }
                        base.powi(*k)
                    }
                    PowKind::Real(e) => {
                        if base.value <= 0.0 {
                            return Err(domain_err(
                                self,
                                "non-positive base with non-integer exponent",
                            ));
                        }
                        base.powf(*e)
                    }
                }
            }
            Bound::Unary(f, a) => {
                let x = a.jet(dim, point)?;
                match f {
                    UnaryFn::Exp => x.exp(),
                    UnaryFn::Log => {
                        if x.value <= 0.0 {
                            return Err(domain_err(self, "log of non-positive value"));
                        }
                        x.ln()
                    }
                    UnaryFn::Sqrt => {
                        if x.value <= 0.0 {
                            return Err(domain_err(self, "sqrt of non-positive value"));
                        }
                        x.sqrt()
                    }
                    UnaryFn::Sinh => x.sinh(),
                    UnaryFn::Cosh => x.cosh(),
                    UnaryFn::Tanh => x.tanh(),
                    UnaryFn::Coth => {
                        if x.value == 0.0 {
                            return Err(domain_err(self, "coth at zero"));
                        }
                        x.coth()
                    }
                    UnaryFn::Abs => {
                        if x.value == 0.0 {
                            return Err(domain_err(self, "abs is not differentiable at zero"));
                        }
                        x.abs()
                    }
                    UnaryFn::Sin => x.sin(),
                    UnaryFn::Cos => x.cos(),
                }
            }
            Bound::Norm(v) => {
                let mut sum = Jet2::constant(dim, 0.0);
                for a in v {
                    let x = a.jet(dim, point)?;
                    sum = sum.add(&x.mul(&x));
                }
                if sum.value <= 0.0 {
                    return Err(domain_err(self, "norm vanishes"));
                }
                sum.sqrt()
            }
        })
    }

    fn value(&self, point: &[f64]) -> Result<f64, EvalError> {
        Ok(match self {
            Bound::Const(c) => *c,
            Bound::Coord(i, _) => point[*i],
            Bound::Add(a, b) => a.value(point)? + b.value(point)?,
            Bound::Sub(a, b) => a.value(point)? - b.value(point)?,
            Bound::Mul(a, b) => a.value(point)? * b.value(point)?,
            Bound::Div(a, b) => {
                let den = b.value(point)?;
                if den == 0.0 {
                    return Err(domain_err(self, "division by zero"));
                }
                a.value(point)? / den
            }
            Bound::Neg(a) => -a.value(point)?,
            Bound::Pow(a, kind) => {
                let base = a.value(point)?;
                match kind {
                    PowKind::Int(k) => {
                        if *k < 0 && base == 0.0 {
                            return Err(domain_err(self, "zero base with negative exponent"));
                        }
                        base.powi(*k)
                    }
                    PowKind::Real(e) => {
                        if base <= 0.0 {
                            return Err(domain_err(
                                self,
                                "non-positive base with non-integer exponent",
                            ));
                        }
                        base.powf(*e)
                    }
                }
            }
            Bound::Unary(f, a) => {
                let v = a.value(point)?;
                match f {
                    UnaryFn::Exp => v.exp(),
                    UnaryFn::Log => {
                        if v <= 0.0 {
                            return Err(domain_err(self, "log of non-positive value"));
                        }
                        v.ln()
                    }
                    UnaryFn::Sqrt => {
                        if v < 0.0 {
                            return Err(domain_err(self, "sqrt of negative value"));
                        }
                        v.sqrt()
                    }
                    UnaryFn::Sinh => v.sinh(),
                    UnaryFn::Cosh => v.cosh(),
                    UnaryFn::Tanh => v.tanh(),
                    UnaryFn::Coth => {
                        if v == 0.0 {
                            return Err(domain_err(self, "coth at zero"));
                        }
                        1.0 / v.tanh()
                    }
                    UnaryFn::Abs => v.abs(),
                    UnaryFn::Sin => v.sin(),
                    UnaryFn::Cos => v.cos(),
                }
            }
            Bound::Norm(v) => {
                let mut s = 0.0;
                for a in v {
                    let x = a.value(point)?;
                    s += x * x;
                }
                s.sqrt()
            }
        })
    }
}

/// Fixed-capacity jet used internally by expression evaluation, so that no
/// AST node allocates. Converted to a [`Jet2`] once per evaluation.
#[derive(Clone, Copy)]
pub(crate) struct JetBuf {
    pub v: f64,
    pub g: [f64; JET_BUF_DIM],
    pub h: [f64; JET_BUF_TRI],
}

pub(crate) const JET_BUF_DIM: usize = 6;
pub(crate) const JET_BUF_TRI: usize = JET_BUF_DIM * (JET_BUF_DIM + 1) / 2;

impl JetBuf {
    #[inline]
    fn constant(v: f64) -> Self {
        JetBuf { v, g: [0.0; JET_BUF_DIM], h: [0.0; JET_BUF_TRI] }
    }

    #[inline]
    fn coordinate(axis: usize, v: f64) -> Self {
        let mut j = JetBuf::constant(v);
        j.g[axis] = 1.0;
        j
    }

    #[inline]
    fn add(&self, o: &JetBuf) -> JetBuf {
        let mut r = *self;
        r.v += o.v;
        for i in 0..JET_BUF_DIM {
            r.g[i] += o.g[i];
        }
        for i in 0..JET_BUF_TRI {
            r.h[i] += o.h[i];
        }
        r
    }

    #[inline]
    fn sub(&self, o: &JetBuf) -> JetBuf {
        let mut r = *self;
        r.v -= o.v;
        for i in 0..JET_BUF_DIM {
            r.g[i] -= o.g[i];
        }
        for i in 0..JET_BUF_TRI {
            r.h[i] -= o.h[i];
        }
        r
    }

    #[inline]
    fn neg(&self) -> JetBuf {
        let mut r = *self;
        r.v = -r.v;
        for i in 0..JET_BUF_DIM {
            r.g[i] = -r.g[i];
        }
        for i in 0..JET_BUF_TRI {
            r.h[i] = -r.h[i];
        }
        r
    }

    #[inline]
    fn mul(&self, o: &JetBuf, m: usize) -> JetBuf {
        let mut r = JetBuf::constant(self.v * o.v);
        for i in 0..m {
            r.g[i] = self.g[i] * o.v + self.v * o.g[i];
        }
        let mut k = 0;
        for i in 0..m {
            for j in i..m {
                r.h[k] = self.h[k] * o.v
                    + self.g[i] * o.g[j]
                    + self.g[j] * o.g[i]
                    + self.v * o.h[k];
                k += 1;
            }
        }
        r
    }

    /// Chain rule for `(g, g', g'')` at `self.v`.
    #[inline]
    fn compose(&self, g0: f64, g1: f64, g2: f64, m: usize) -> JetBuf {
        let mut r = JetBuf::constant(g0);
        for i in 0..m {
            r.g[i] = g1 * self.g[i];
        }
        let mut k = 0;
        for i in 0..m {
            for j in i..m {
                r.h[k] = g1 * self.h[k] + g2 * self.g[i] * self.g[j];
                k += 1;
            }
        }
        r
    }

    fn is_finite(&self, m: usize) -> bool {
        let tri = m * (m + 1) / 2;
        self.v.is_finite()
            && self.g[..m].iter().all(|x| x.is_finite())
            && self.h[..tri].iter().all(|x| x.is_finite())
    }
}

impl Bound {
    fn jet_buf(&self, m: usize, point: &[f64]) -> Result<JetBuf, EvalError> {
        Ok(match self {
            Bound::Const(c) => JetBuf::constant(*c),
            Bound::Coord(i, _) => JetBuf::coordinate(*i, point[*i]),
            Bound::Add(a, b) => a.jet_buf(m, point)?.add(&b.jet_buf(m, point)?),
            Bound::Sub(a, b) => a.jet_buf(m, point)?.sub(&b.jet_buf(m, point)?),
            Bound::Mul(a, b) => a.jet_buf(m, point)?.mul(&b.jet_buf(m, point)?, m),
            Bound::Div(a, b) => {
                let den = b.jet_buf(m, point)?;
                if den.v == 0.0 {
                    return Err(domain_err(self, "division by zero"));
                }
                let inv = den.compose(1.0 / den.v, -1.0 / (den.v * den.v), 2.0 / (den.v * den.v * den.v), m);
                a.jet_buf(m, point)?.mul(&inv, m)
            }
            Bound::Neg(a) => a.jet_buf(m, point)?.neg(),
            Bound::Pow(a, kind) => {
                let base = a.jet_buf(m, point)?;
                let v = base.v;
                match kind {
                    PowKind::Int(k) => {
                        if *k < 0 && v == 0.0 {
                            return Err(domain_err(self, "zero base with negative exponent"));
                        }
                        match *k {
                            0 => JetBuf::constant(1.0),
                            1 => base,
                            k => base.compose(
                                v.powi(k),
                                f64::from(k) * v.powi(k - 1),
                                f64::from(k) * f64::from(k - 1) * v.powi(k - 2),
                                m,
                            ),
                        }
                    }
                    PowKind::Real(e) => {
                        if v <= 0.0 {
                            return Err(domain_err(
                                self,
                                "non-positive base with non-integer exponent",
                            ));
                        }
                        base.compose(
                            v.powf(*e),
                            e * v.powf(e - 1.0),
                            e * (e - 1.0) * v.powf(e - 2.0),
                            m,
                        )
                    }
                }
            }
            Bound::Unary(f, a) => {
                let x = a.jet_buf(m, point)?;
                let v = x.v;
                match f {
                    UnaryFn::Exp => {
                        let e = v.exp();
                        x.compose(e, e, e, m)
                    }
                    UnaryFn::Log => {
                        if v <= 0.0 {
                            return Err(domain_err(self, "log of non-positive value"));
                        }
                        x.compose(v.ln(), 1.0 / v, -1.0 / (v * v), m)
                    }
                    UnaryFn::Sqrt => {
                        if v <= 0.0 {
                            return Err(domain_err(self, "sqrt of non-positive value"));
                        }
                        let s = v.sqrt();
                        x.compose(s, 0.5 / s, -0.25 / (s * s * s), m)
                    }
                    UnaryFn::Sinh => x.compose(v.sinh(), v.cosh(), v.sinh(), m),
                    UnaryFn::Cosh => x.compose(v.cosh(), v.sinh(), v.cosh(), m),
                    UnaryFn::Tanh => {
                        let t = v.tanh();
                        let sech2 = 1.0 - t * t;
                        x.compose(t, sech2, -2.0 * t * sech2, m)
                    }
                    UnaryFn::Coth => {
                        if v == 0.0 {
                            return Err(domain_err(self, "coth at zero"));
                        }
                        let c = 1.0 / v.tanh();
                        let csch2 = c * c - 1.0;
                        x.compose(c, -csch2, 2.0 * c * csch2, m)
                    }
                    UnaryFn::Abs => {
                        if v == 0.0 {
                            return Err(domain_err(self, "abs is not differentiable at zero"));
                        }
                        if v > 0.0 {
                            x
                        } else {
                            x.neg()
                        }
                    }
                    UnaryFn::Sin => {
                        let (s, c) = v.sin_cos();
                        x.compose(s, c, -s, m)
                    }
                    UnaryFn::Cos => {
                        let (s, c) = v.sin_cos();
                        x.compose(c, -s, -c, m)
                    }
                }
            }
            Bound::Norm(vexprs) => {
                let mut sum = JetBuf::constant(0.0);
                for a in vexprs {
                    let x = a.jet_buf(m, point)?;
                    sum = sum.add(&x.mul(&x, m));
                }
                if sum.v <= 0.0 {
                    return Err(domain_err(self, "norm vanishes"));
                }
                let s = sum.v.sqrt();
                sum.compose(s, 0.5 / s, -0.25 / (s * s * s), m)
            }
        })
    }
}

impl BoundField {
    /// Exact 2-jet at `point`.
    pub fn jet(&self, point: &[f64]) -> Result<Jet2, EvalError> {
        if point.len() != self.dim {
            return Err(EvalError::DimensionMismatch { expected: self.dim, got: point.len() });
        }
        let m = self.dim;
        if m <= JET_BUF_DIM {
            let buf = self.bound.jet_buf(m, point)?;
            if !buf.is_finite(m) {
                return Err(EvalError::NonFinite { expr: render(&self.bound) });
            }
            let tri = m * (m + 1) / 2;
            return Ok(Jet2 {
                dim: m,
                value: buf.v,
                grad: buf.g[..m].to_vec(),
                hess: buf.h[..tri].to_vec(),
            });
        }
        let j = self.bound.jet(self.dim, point)?;
        if !j.is_finite() {
            return Err(EvalError::NonFinite { expr: render(&self.bound) });
        }
        Ok(j)
    }

    /// Value only, skipping derivative work (used by ODE integration).
    pub fn value(&self, point: &[f64]) -> Result<f64, EvalError> {
        if point.len() != self.dim {
            return Err(EvalError::DimensionMismatch { expected: self.dim, got: point.len() });
        }
        let v = self.bound.value(point)?;
        if !v.is_finite() {
            return Err(EvalError::NonFinite { expr: render(&self.bound) });
        }
        Ok(v)
    }
}

/// Default coordinate names `x1..xm`.
pub fn default_coords(m: usize) -> Vec<String> {
    (1..=m).map(|i| format!("x{}", i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substitute_commutes_with_eval() {
        let f = ScalarFieldExpr::parse("pow(x1, a) + b * x2").unwrap();
        let p = crate::params(&[("a", 2.0), ("b", -3.5)]);
        let coords = default_coords(2);
        let pt = [1.7, 0.4];
        let direct = f.eval_jet(&pt, &coords, &p).unwrap();
        let substituted = f.substitute(&p).eval_jet(&pt, &coords, &Params::new()).unwrap();
        assert_eq!(direct, substituted);
    }

    #[test]
    fn log_exp_cancellation() {
        let f = ScalarFieldExpr::parse("pow(log(r), -2)").unwrap();
        let g = f.substitute_var("r", &Expr::Unary(UnaryFn::Exp, Expr::Var("s".into()).into()));
        let g = g.simplify_log_exp();
        // At s = -1e-30, exp(s) rounds to 1.0 and log would die; the
        // simplified form evaluates to s^-2 directly.
        let coords = vec!["s".to_string()];
        let v = g.bind(&coords, &Params::new()).unwrap().value(&[-1e-30]).unwrap();
        assert_eq!(v, 1e60);
    }

    #[test]
    fn domain_violation_reports_subexpression() {
        let f = ScalarFieldExpr::parse("x1 / log(x2)").unwrap();
        let err = f.eval_jet(&[1.0, 1.0], &default_coords(2), &Params::new()).unwrap_err();
        match err {
            EvalError::DomainViolation { expr, .. } => assert!(expr.contains("log")),
            other => panic!("unexpected error {other:?}"),
        }
    }
}
