//! Exact pointwise differential calculus: an expression mini-language for
//! scalar fields and second-order jet arithmetic.
//!
//! Derivatives come from order-2 truncated Taylor arithmetic, one pass per
//! point — never finite differences — so downstream identity checks carry
//! quadrature error only.

mod expr;
mod jet;
pub mod parser;

pub use expr::{default_coords, BoundField, EvalError, Expr, ScalarFieldExpr, UnaryFn, VectorFieldExpr};
pub use jet::Jet2;
pub use parser::ParseError;

pub(crate) use jet::Dual;

use crate::Params;

/// Parse a source string into a scalar field.
///
/// Grammar (EBNF sketch):
/// ```text
/// expr   := term (("+"|"-") term)*
/// term   := factor (("*"|"/") factor)*
/// factor := number | ident | ident "(" args ")" | "(" expr ")" | "-" factor
/// ```
/// with builtins `pow, exp, log, sqrt, sinh, cosh, tanh, coth, abs, sin, cos,
/// norm`. Coordinates are `x1..xm` or the aliases a geometry context declares
/// (`t`, `y1..`, `r`, `s`, ...).
pub fn parse_expression(source: &str) -> Result<ScalarFieldExpr, ParseError> {
    ScalarFieldExpr::parse(source)
}

/// Evaluate `field` at `point` with coordinates named `x1..xm` and the given
/// parameter bindings, returning value, gradient and Hessian exactly.
pub fn jet2_eval(field: &ScalarFieldExpr, point: &[f64], params: &Params) -> Result<Jet2, EvalError> {
    let coords = default_coords(point.len());
    field.eval_jet(point, &coords, params)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_field() {
        let one = parse_expression("1").unwrap();
        let j = jet2_eval(&one, &[0.3, -0.7], &Params::new()).unwrap();
        assert_eq!(j.value, 1.0);
        assert!(j.grad.iter().all(|g| *g == 0.0));
        assert!(j.hess.iter().all(|h| *h == 0.0));
    }

    #[test]
    fn inverse_sqrt_norm_on_r3() {
        // |x|^{-1/2} at (2,0,0): value 2^{-1/2}, grad (-2^{-5/2}, 0, 0)
        let f = parse_expression("pow(norm(x1,x2,x3), -0.5)").unwrap();
        let j = jet2_eval(&f, &[2.0, 0.0, 0.0], &Params::new()).unwrap();
        assert!((j.value - 2.0f64.powf(-0.5)).abs() < 1e-15);
        assert!((j.grad[0] + 2.0f64.powf(-2.5)).abs() < 1e-15);
        assert_eq!(j.grad[1], 0.0);
        assert_eq!(j.grad[2], 0.0);
    }

    #[test]
    fn bilinear_field() {
        let f = parse_expression("x1 * x2").unwrap();
        let j = jet2_eval(&f, &[3.0, 5.0], &Params::new()).unwrap();
        assert_eq!(j.value, 15.0);
        assert_eq!(j.grad, vec![5.0, 3.0]);
        assert_eq!(j.hess_at(0, 1), 1.0);
    }

    #[test]
    fn jets_match_symbolic_differentiation_on_random_polynomials() {
        // oracle: independent symbolic differentiation of the polynomial terms
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(1702);
        for trial in 0..100 {
            let dim = rng.gen_range(1..=4);
            let poly = crate::testpoly::Poly::random(&mut rng, dim, 4, 6);
            let f = poly.to_expr();
            let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.5..1.5)).collect();
            let jet = jet2_eval(&f, &x, &Params::new()).unwrap();
            let scale = jet.value.abs().max(1.0);
            assert!(
                (jet.value - poly.eval(&x)).abs() <= 1e-13 * scale,
                "trial {trial}: value mismatch"
            );
            for i in 0..dim {
                let di = poly.diff(i);
                let expect = di.eval(&x);
                assert!(
                    (jet.grad[i] - expect).abs() <= 1e-13 * expect.abs().max(scale),
                    "trial {trial}: grad[{i}] {} vs {expect}",
                    jet.grad[i]
                );
                for j in i..dim {
                    let expect2 = di.diff(j).eval(&x);
                    assert!(
                        (jet.hess_at(i, j) - expect2).abs() <= 1e-13 * expect2.abs().max(scale),
                        "trial {trial}: hess[{i},{j}] {} vs {expect2}",
                        jet.hess_at(i, j)
                    );
                }
            }
        }
    }

    #[test]
    fn product_rule_is_exact_on_jets() {
        // jet(f*g) must equal jet(f)*jet(g) under Jet2 multiplication
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(99);
        for _ in 0..50 {
            let dim = rng.gen_range(1..=3);
            let pf = crate::testpoly::Poly::random(&mut rng, dim, 3, 4);
            let pg = crate::testpoly::Poly::random(&mut rng, dim, 3, 4);
            let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let none = Params::new();
            let jf = jet2_eval(&pf.to_expr(), &x, &none).unwrap();
            let jg = jet2_eval(&pg.to_expr(), &x, &none).unwrap();
            let product_expr = ScalarFieldExpr::new(Expr::Mul(
                pf.to_expr().ast.into(),
                pg.to_expr().ast.into(),
            ));
            let direct = jet2_eval(&product_expr, &x, &none).unwrap();
            let composed = jf.mul(&jg);
            let scale = direct.value.abs().max(1.0);
            assert!((direct.value - composed.value).abs() <= 1e-13 * scale);
            for i in 0..dim {
                assert!((direct.grad[i] - composed.grad[i]).abs() <= 1e-12 * scale);
                for j in i..dim {
                    assert!(
                        (direct.hess_at(i, j) - composed.hess_at(i, j)).abs() <= 1e-12 * scale
                    );
                }
            }
        }
    }

    #[test]
    fn chain_rule_exp_assembly() {
        // jet(exp(f)) must equal exp(f)·(1, ∇f, ∇f∇fᵀ + Hess f) assembled by hand
        let f = parse_expression("x1*x1*x2 + x2*x2 - 0.5*x1").unwrap();
        let ef = parse_expression("exp(x1*x1*x2 + x2*x2 - 0.5*x1)").unwrap();
        let p = [0.8, -0.6];
        let jf = jet2_eval(&f, &p, &Params::new()).unwrap();
        let je = jet2_eval(&ef, &p, &Params::new()).unwrap();
        let e = jf.value.exp();
        assert!((je.value - e).abs() / e.abs() < 1e-13);
        for i in 0..2 {
            assert!((je.grad[i] - e * jf.grad[i]).abs() <= 1e-13 * e.abs().max(1.0));
            for j in i..2 {
                let expect = e * (jf.grad[i] * jf.grad[j] + jf.hess_at(i, j));
                assert!((je.hess_at(i, j) - expect).abs() <= 1e-13 * e.abs().max(1.0));
            }
        }
    }
}
