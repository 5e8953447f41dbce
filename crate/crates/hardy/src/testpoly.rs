//! Test-only polynomial oracle: exact symbolic differentiation of random
//! multivariate polynomials, independent of the jet arithmetic it checks.

use rand::Rng;

use crate::calculus::{Expr, ScalarFieldExpr};

#[derive(Debug, Clone)]
pub(crate) struct Poly {
    pub dim: usize,
    /// `(coefficient, exponents per axis)`
    pub terms: Vec<(f64, Vec<u8>)>,
}

impl Poly {
    pub fn random<R: Rng>(rng: &mut R, dim: usize, max_deg: u8, n_terms: usize) -> Poly {
        let mut terms = Vec::with_capacity(n_terms);
        for _ in 0..n_terms {
            let mut pows = vec![0u8; dim];
            let mut budget = max_deg;
            for p in pows.iter_mut() {
                let d = rng.gen_range(0..=budget);
                *p = d;
                budget -= d;
            }
            terms.push((rng.gen_range(-2.0..2.0), pows));
        }
        Poly { dim, terms }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, pows)| {
                c * pows
                    .iter()
                    .zip(x)
                    .map(|(p, xi)| xi.powi(*p as i32))
                    .product::<f64>()
            })
            .sum()
    }

    pub fn diff(&self, axis: usize) -> Poly {
        let terms = self
            .terms
            .iter()
            .filter(|(_, pows)| pows[axis] > 0)
            .map(|(c, pows)| {
                let mut p = pows.clone();
                p[axis] -= 1;
                (c * pows[axis] as f64, p)
            })
            .collect();
        Poly { dim: self.dim, terms }
    }

    /// Build an expression AST for the polynomial (coordinates `x1..xm`).
    pub fn to_expr(&self) -> ScalarFieldExpr {
        let mut acc: Option<Expr> = None;
        for (c, pows) in &self.terms {
            let mut term = Expr::Const(*c);
            for (axis, p) in pows.iter().enumerate() {
                if *p > 0 {
                    let var = Expr::Var(format!("x{}", axis + 1));
                    let factor = if *p == 1 {
                        var
                    } else {
                        Expr::Pow(var.into(), Expr::Const(*p as f64).into())
                    };
                    term = Expr::Mul(term.into(), factor.into());
                }
            }
            acc = Some(match acc {
                None => term,
                Some(prev) => Expr::Add(prev.into(), term.into()),
            });
        }
        ScalarFieldExpr::new(acc.unwrap_or(Expr::Const(0.0)))
    }
}
