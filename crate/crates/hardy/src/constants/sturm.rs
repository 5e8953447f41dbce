//! 1-D Sturm–Liouville eigensolver.
//!
//! Minimizes `∫(P y'² + Q y²) dt / ∫ R y² dt` over the interval with Dirichlet
//! or natural conditions per endpoint. Discretization: second-order central
//! finite differences on a uniform mesh (midpoint values of `P`, lumped mass),
//! giving a symmetric tridiagonal generalized eigenproblem solved by inverse
//! iteration with tridiagonal `LDLᵀ` solves. Results are reported at mesh `N`
//! and `2N`; the mesh-ladder monotonicity of the difference is the
//! convergence witness.

use super::ConstantsError;
use crate::calculus::ScalarFieldExpr;
use crate::Params;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryCondition {
    Dirichlet,
    Natural,
}

impl BoundaryCondition {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "d" | "dirichlet" => Some(BoundaryCondition::Dirichlet),
            "n" | "natural" => Some(BoundaryCondition::Natural),
            _ => None,
        }
    }
}

/// Coefficients are expressions in the variable `t`; `P > 0` and `R > 0` on
/// the open interval (they may degenerate at the endpoints).
#[derive(Debug, Clone)]
pub struct SturmLiouvilleProblem {
    pub interval: (f64, f64),
    pub p: ScalarFieldExpr,
    pub q: ScalarFieldExpr,
    pub r: ScalarFieldExpr,
    pub bc: (BoundaryCondition, BoundaryCondition),
    /// Mesh intervals at the coarse resolution; must be ≥ 64.
    pub mesh: usize,
}

/// Smallest eigenvalue at the coarse and doubled mesh, with the fine-mesh
/// eigenvector for downstream Rayleigh-quotient cross-checks.
#[derive(Debug, Clone)]
pub struct SlResult {
    pub mesh: usize,
    pub coarse: f64,
    pub fine: f64,
    pub nodes_fine: Vec<f64>,
    pub eigenvector_fine: Vec<f64>,
}

impl SlResult {
    /// The refined estimate.
    pub fn value(&self) -> f64 {
        self.fine
    }
}

struct Tridiag {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl Tridiag {
    /// LDLᵀ factorization; fails on a non-positive pivot.
    fn factor(&self) -> Result<(Vec<f64>, Vec<f64>), ConstantsError> {
        let n = self.diag.len();
        let mut d = vec![0.0; n];
        let mut l = vec![0.0; n.saturating_sub(1)];
        d[0] = self.diag[0];
        if d[0] <= 0.0 {
            return Err(ConstantsError::Factorization);
        }
        for i in 1..n {
            l[i - 1] = self.off[i - 1] / d[i - 1];
            d[i] = self.diag[i] - l[i - 1] * self.off[i - 1];
            if d[i] <= 0.0 {
                return Err(ConstantsError::Factorization);
            }
        }
        Ok((d, l))
    }
}

fn solve_ldlt(d: &[f64], l: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = d.len();
    let mut x = rhs.to_vec();
    for i in 1..n {
        x[i] -= l[i - 1] * x[i - 1];
    }
    for i in 0..n {
        x[i] /= d[i];
    }
    for i in (0..n - 1).rev() {
        x[i] -= l[i] * x[i + 1];
    }
    x
}

/// Assemble and solve at one mesh; returns (eigenvalue, nodes, eigenvector).
fn solve_mesh(
    prob: &SturmLiouvilleProblem,
    n_intervals: usize,
) -> Result<(f64, Vec<f64>, Vec<f64>), ConstantsError> {
    let (a, b) = prob.interval;
    let h = (b - a) / n_intervals as f64;
    let coords = vec!["t".to_string()];
    let none = Params::new();
    let pb = prob.p.bind(&coords, &none)?;
    let qb = prob.q.bind(&coords, &none)?;
    let rb = prob.r.bind(&coords, &none)?;

    let nodes: Vec<f64> = (0..=n_intervals).map(|i| a + h * i as f64).collect();
    let p_mid: Vec<f64> = (0..n_intervals)
        .map(|i| pb.value(&[a + h * (i as f64 + 0.5)]))
        .collect::<Result<_, _>>()?;
    let q_node: Vec<f64> = nodes.iter().map(|t| qb.value(&[*t])).collect::<Result<_, _>>()?;
    let r_node: Vec<f64> = nodes.iter().map(|t| rb.value(&[*t])).collect::<Result<_, _>>()?;

    // stiffness K and lumped mass M on all nodes; endpoint rows carry half
    // cells (the natural-condition discretization)
    let nn = n_intervals + 1;
    let mut kd = vec![0.0; nn];
    let mut ko = vec![0.0; nn - 1];
    let mut m = vec![0.0; nn];
    for i in 0..n_intervals {
        kd[i] += p_mid[i] / h;
        kd[i + 1] += p_mid[i] / h;
        ko[i] -= p_mid[i] / h;
    }
    for i in 0..nn {
        let w = if i == 0 || i == nn - 1 { 0.5 * h } else { h };
        kd[i] += q_node[i] * w;
        m[i] += r_node[i] * w;
    }

    // apply Dirichlet conditions by dropping rows/columns
    let lo = usize::from(prob.bc.0 == BoundaryCondition::Dirichlet);
    let hi = nn - usize::from(prob.bc.1 == BoundaryCondition::Dirichlet);
    let kept: Vec<usize> = (lo..hi).collect();
    let k = Tridiag {
        diag: kept.iter().map(|&i| kd[i]).collect(),
        off: kept.windows(2).map(|w| ko[w[0]]).collect(),
    };
    let mass: Vec<f64> = kept.iter().map(|&i| m[i]).collect();

    // inverse iteration on the pencil (K, M)
    let (d, l) = k.factor()?;
    let nred = kept.len();
    let mut v = vec![1.0; nred];
    let mut lambda_prev = f64::INFINITY;
    let mut lambda = f64::INFINITY;
    for it in 0..500 {
        let rhs: Vec<f64> = v.iter().zip(&mass).map(|(vi, mi)| vi * mi).collect();
        let mut z = solve_ldlt(&d, &l, &rhs);
        let norm = z.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(ConstantsError::NonConvergence);
        }
        for x in &mut z {
            *x /= norm;
        }
        // Rayleigh quotient vᵀKv / vᵀMv
        let mut kv = vec![0.0; nred];
        for i in 0..nred {
            kv[i] = k.diag[i] * z[i];
            if i > 0 {
                kv[i] += k.off[i - 1] * z[i - 1];
            }
            if i + 1 < nred {
                kv[i] += k.off[i] * z[i + 1];
            }
        }
        let num: f64 = z.iter().zip(&kv).map(|(a, b)| a * b).sum();
        let den: f64 = z.iter().zip(&mass).map(|(a, b)| a * a * b).sum();
        lambda = num / den;
        v = z;
        if it > 3 && (lambda - lambda_prev).abs() <= 1e-14 * lambda.abs().max(1e-300) {
            lambda_prev = lambda;
            break;
        }
        lambda_prev = lambda;
    }
    if !lambda_prev.is_finite() {
        return Err(ConstantsError::NonConvergence);
    }

    // re-embed the eigenvector on all nodes (zeros at Dirichlet ends)
    let mut full = vec![0.0; nn];
    for (slot, &i) in kept.iter().enumerate() {
        full[i] = v[slot];
    }
    let maxabs = full.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if maxabs > 0.0 {
        for x in &mut full {
            *x /= maxabs;
        }
    }
    Ok((lambda, nodes, full))
}

/// Smallest generalized eigenvalue at the problem mesh and its double.
pub fn sl_min(prob: &SturmLiouvilleProblem) -> Result<SlResult, ConstantsError> {
    if prob.mesh < 64 {
        return Err(ConstantsError::BadMesh(prob.mesh));
    }
    let (coarse, _, _) = solve_mesh(prob, prob.mesh)?;
    let (fine, nodes, vec_fine) = solve_mesh(prob, 2 * prob.mesh)?;
    Ok(SlResult {
        mesh: prob.mesh,
        coarse,
        fine,
        nodes_fine: nodes,
        eigenvector_fine: vec_fine,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::parse_expression;

    #[test]
    fn dirichlet_laplacian_on_zero_pi() {
        // -y'' = λ y on [0, π], Dirichlet: λ₁ = 1
        let prob = SturmLiouvilleProblem {
            interval: (0.0, std::f64::consts::PI),
            p: parse_expression("1").unwrap(),
            q: parse_expression("0").unwrap(),
            r: parse_expression("1").unwrap(),
            bc: (BoundaryCondition::Dirichlet, BoundaryCondition::Dirichlet),
            mesh: 512,
        };
        let res = sl_min(&prob).unwrap();
        assert!((res.value() - 1.0).abs() < 1e-6, "got {}", res.value());
    }

    #[test]
    fn radial_disc_eigenvalue() {
        // P = r, Q = 0, R = r on [0,1], natural at 0, Dirichlet at 1: j01²
        let prob = SturmLiouvilleProblem {
            interval: (0.0, 1.0),
            p: parse_expression("t").unwrap(),
            q: parse_expression("0").unwrap(),
            r: parse_expression("t").unwrap(),
            bc: (BoundaryCondition::Natural, BoundaryCondition::Dirichlet),
            mesh: 1024,
        };
        let res = sl_min(&prob).unwrap();
        let j01_sq = 5.783185962946785;
        assert!((res.value() - j01_sq).abs() < 5e-3, "got {}", res.value());
    }

    #[test]
    fn weighted_angular_problem() {
        // P = sin t, Q = sin(t)/4, R = 1, natural ends: λ ≈ 0.1564
        let prob = SturmLiouvilleProblem {
            interval: (0.0, std::f64::consts::PI),
            p: parse_expression("sin(t)").unwrap(),
            q: parse_expression("sin(t)/4").unwrap(),
            r: parse_expression("1").unwrap(),
            bc: (BoundaryCondition::Natural, BoundaryCondition::Natural),
            mesh: 1024,
        };
        let res = sl_min(&prob).unwrap();
        assert!((res.value() - 0.1564).abs() < 1e-3, "got {}", res.value());
    }

    #[test]
    fn mesh_ladder_is_monotone() {
        let mk = |mesh| SturmLiouvilleProblem {
            interval: (0.0, 1.0),
            p: parse_expression("t").unwrap(),
            q: parse_expression("0").unwrap(),
            r: parse_expression("t").unwrap(),
            bc: (BoundaryCondition::Natural, BoundaryCondition::Dirichlet),
            mesh,
        };
        let a = sl_min(&mk(128)).unwrap();
        let b = sl_min(&mk(256)).unwrap();
        // |λ(2N) - λ(4N)| ≤ |λ(N) - λ(2N)|
        assert!((b.coarse - b.fine).abs() <= (a.coarse - a.fine).abs());
    }

    #[test]
    fn small_mesh_rejected() {
        let prob = SturmLiouvilleProblem {
            interval: (0.0, 1.0),
            p: parse_expression("1").unwrap(),
            q: parse_expression("0").unwrap(),
            r: parse_expression("1").unwrap(),
            bc: (BoundaryCondition::Dirichlet, BoundaryCondition::Dirichlet),
            mesh: 32,
        };
        assert!(matches!(sl_min(&prob), Err(ConstantsError::BadMesh(32))));
    }
}
