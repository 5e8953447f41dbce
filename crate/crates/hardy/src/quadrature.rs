//! Tensor-product Gauss–Legendre quadrature and smooth compactly supported
//! test functions with exact jets.
//!
//! All integrands in this crate are analytic on closed support boxes, so a
//! spectral tensor rule at modest node counts reaches the identity tolerances
//! cheaply. Singularities are handled by support exclusion, never by singular
//! rules. Node summation is chunked and compensated so parallel runs are
//! bitwise reproducible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::calculus::Jet2;

/// Default cap on total tensor nodes.
pub const DEFAULT_NODE_BUDGET: usize = 10_000_000;

const CHUNK: usize = 4096;

#[derive(Debug, Clone, thiserror::Error)]
pub enum QuadratureError {
    #[error("grid of {requested} nodes exceeds the budget of {budget}")]
    BudgetExceeded { requested: usize, budget: usize },
    #[error("degenerate box or fewer than 2 nodes per axis")]
    BadGrid,
    #[error("non-finite integrand value at node {node:?}")]
    NonFinite { node: Vec<f64> },
    #[error("integrand error at node {node:?}: {message}")]
    Integrand { node: Vec<f64>, message: String },
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
///
/// Newton iteration on the Legendre recurrence; standard and accurate to
/// machine precision for the node counts used here.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j as f64 + 1.0) * x * p1 - j as f64 * p2) / (j as f64 + 1.0);
            }
            pp = n as f64 * (x * p0 - p1) / (x * x - 1.0);
            let dx = p0 / pp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * pp * pp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Tensor Gauss–Legendre grid over an axis-aligned box.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    bounds: Vec<[f64; 2]>,
    nodes_per_axis: usize,
    axis_nodes: Vec<Vec<f64>>,
    axis_weights: Vec<Vec<f64>>,
    total: usize,
    budget: usize,
}

/// Build a tensor Gauss–Legendre grid with the default node budget.
pub fn build_grid(bounds: &[[f64; 2]], nodes_per_axis: usize) -> Result<QuadratureGrid, QuadratureError> {
    build_grid_with_budget(bounds, nodes_per_axis, DEFAULT_NODE_BUDGET)
}

/// Build a tensor Gauss–Legendre grid with an explicit node budget.
pub fn build_grid_with_budget(
    bounds: &[[f64; 2]],
    nodes_per_axis: usize,
    budget: usize,
) -> Result<QuadratureGrid, QuadratureError> {
    if nodes_per_axis < 2 || bounds.is_empty() || bounds.iter().any(|[lo, hi]| !(lo < hi)) {
        return Err(QuadratureError::BadGrid);
    }
    let total = nodes_per_axis
        .checked_pow(bounds.len() as u32)
        .ok_or(QuadratureError::BudgetExceeded { requested: usize::MAX, budget })?;
    if total > budget {
        return Err(QuadratureError::BudgetExceeded { requested: total, budget });
    }
    let (nodes, weights) = gauss_legendre(nodes_per_axis);
    let mut axis_nodes = Vec::with_capacity(bounds.len());
    let mut axis_weights = Vec::with_capacity(bounds.len());
    for [lo, hi] in bounds {
        let c = 0.5 * (lo + hi);
        let h = 0.5 * (hi - lo);
        axis_nodes.push(nodes.iter().map(|x| c + h * x).collect());
        axis_weights.push(weights.iter().map(|w| h * w).collect());
    }
    Ok(QuadratureGrid {
        bounds: bounds.to_vec(),
        nodes_per_axis,
        axis_nodes,
        axis_weights,
        total,
        budget,
    })
}

impl QuadratureGrid {
    pub fn bounds(&self) -> &[[f64; 2]] {
        &self.bounds
    }

    pub fn nodes_per_axis(&self) -> usize {
        self.nodes_per_axis
    }

    pub fn len(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    /// Same box at a different resolution, keeping the node budget.
    pub fn with_nodes(&self, nodes_per_axis: usize) -> Result<QuadratureGrid, QuadratureError> {
        build_grid_with_budget(&self.bounds, nodes_per_axis, self.budget)
    }

    /// Fill `point` with the coordinates of flat node `idx`; returns its weight.
    #[inline]
    pub fn node_into(&self, idx: usize, point: &mut [f64]) -> f64 {
        let mut rem = idx;
        let mut w = 1.0;
        for axis in (0..self.dim()).rev() {
            let i = rem % self.nodes_per_axis;
            rem /= self.nodes_per_axis;
            point[axis] = self.axis_nodes[axis][i];
            w *= self.axis_weights[axis][i];
        }
        w
    }

    /// Sum `w_i * f_i` for a vector-valued integrand evaluated per node.
    ///
    /// `eval` fills `out` (length `dims`) at the given node. Summation is
    /// per-chunk compensated and merged in fixed chunk order, so the result
    /// does not depend on thread scheduling.
    pub fn par_sum_vec<E, F>(&self, dims: usize, eval: F) -> Result<Vec<f64>, E>
    where
        F: Fn(&[f64], &mut [f64]) -> Result<(), E> + Sync,
        E: Send,
    {
        let n_chunks = self.total.div_ceil(CHUNK);
        let partials: Result<Vec<Vec<f64>>, E> = (0..n_chunks)
            .into_par_iter()
            .map(|c| {
                let start = c * CHUNK;
                let end = ((c + 1) * CHUNK).min(self.total);
                let mut point = vec![0.0; self.dim()];
                let mut out = vec![0.0; dims];
                let mut sum = vec![0.0; dims];
                let mut comp = vec![0.0; dims];
                for idx in start..end {
                    let w = self.node_into(idx, &mut point);
                    eval(&point, &mut out)?;
                    for d in 0..dims {
                        // Kahan compensated accumulation
                        let y = w * out[d] - comp[d];
                        let t = sum[d] + y;
                        comp[d] = (t - sum[d]) - y;
                        sum[d] = t;
                    }
                }
                Ok(sum)
            })
            .collect();
        let partials = partials?;
        let mut total = vec![0.0; dims];
        let mut comp = vec![0.0; dims];
        for part in partials {
            for d in 0..dims {
                let y = part[d] - comp[d];
                let t = total[d] + y;
                comp[d] = (t - total[d]) - y;
                total[d] = t;
            }
        }
        Ok(total)
    }
}

/// Integrate a scalar integrand over the grid. Deterministic for a fixed grid.
pub fn integrate<F>(grid: &QuadratureGrid, integrand: F) -> Result<f64, QuadratureError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let sums = grid.par_sum_vec(1, |p, out| {
        let v = integrand(p);
        if !v.is_finite() {
            return Err(QuadratureError::NonFinite { node: p.to_vec() });
        }
        out[0] = v;
        Ok(())
    })?;
    Ok(sums[0])
}

/// Smooth compactly supported test function with exact jets.
///
/// Product of per-axis bumps `b(s) = exp(-1/(1-s²))` composed with the affine
/// map of the support box onto `[-1,1]`, modulated by a random polynomial of
/// total degree ≤ 3 with coefficients in `[-1,1]`, then rescaled so
/// `max |u| = 1`. Reproducible from the seed.
#[derive(Debug, Clone)]
pub struct TestFunction {
    support: Vec<[f64; 2]>,
    center: Vec<f64>,
    halfwidth: Vec<f64>,
    /// Monomials of the modulation polynomial in scaled coordinates.
    poly: Vec<(f64, Vec<u8>)>,
    scale: f64,
    seed: u64,
}

fn monomials(dim: usize, max_deg: u8) -> Vec<Vec<u8>> {
    let mut out = vec![vec![0u8; dim]];
    for _ in 0..max_deg {
        let mut next = Vec::new();
        for m in &out {
            let deg: u8 = m.iter().sum();
            if deg < max_deg {
                for a in 0..dim {
                    let mut mm = m.clone();
                    mm[a] += 1;
                    next.push(mm);
                }
            }
        }
        out.extend(next);
        out.sort();
        out.dedup();
    }
    out
}

/// Per-axis bump value and first two derivatives in the scaled variable.
/// Exactly zero (with zero jets) outside the open interval, underflow-safe.
#[inline]
fn bump1(s: f64) -> (f64, f64, f64) {
    if s.abs() >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let q = 1.0 - s * s;
    let b = (-1.0 / q).exp();
    if b == 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let phi1 = -2.0 * s / (q * q);
    let phi2 = -2.0 / (q * q) - 8.0 * s * s / (q * q * q);
    (b, phi1 * b, (phi2 + phi1 * phi1) * b)
}

impl TestFunction {
    /// The zero function on a support box (degenerate-path checks).
    pub fn zero(support_box: &[[f64; 2]]) -> TestFunction {
        let center = support_box.iter().map(|[lo, hi]| 0.5 * (lo + hi)).collect();
        let halfwidth = support_box.iter().map(|[lo, hi]| 0.5 * (hi - lo)).collect();
        TestFunction {
            support: support_box.to_vec(),
            center,
            halfwidth,
            poly: vec![(0.0, vec![0u8; support_box.len()])],
            scale: 0.0,
            seed: 0,
        }
    }

    pub fn support(&self) -> &[[f64; 2]] {
        &self.support
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dim(&self) -> usize {
        self.support.len()
    }

    /// Exact 2-jet of the test function; identically zero outside the support.
    pub fn jet(&self, point: &[f64]) -> Jet2 {
        let d = self.dim();
        debug_assert_eq!(point.len(), d);
        // scaled coordinates and per-axis bump jets (in the scaled variable)
        let mut s = vec![0.0; d];
        let mut b = vec![(0.0, 0.0, 0.0); d];
        for a in 0..d {
            s[a] = (point[a] - self.center[a]) / self.halfwidth[a];
            b[a] = bump1(s[a]);
            if b[a].0 == 0.0 {
                return Jet2::constant(d, 0.0);
            }
        }
        // product of bumps: value, grad, hess in scaled coordinates
        let prod: f64 = b.iter().map(|x| x.0).product();
        let mut bump = Jet2::constant(d, prod);
        for i in 0..d {
            bump.grad[i] = prod / b[i].0 * b[i].1;
        }
        for i in 0..d {
            for j in i..d {
                let v = if i == j {
                    prod / b[i].0 * b[i].2
                } else {
                    prod / (b[i].0 * b[j].0) * b[i].1 * b[j].1
                };
                let k = i * (2 * d - i + 1) / 2 + (j - i);
                bump.hess[k] = v;
            }
        }
        // modulation polynomial jet in scaled coordinates
        let mut pv = 0.0;
        let mut pg = vec![0.0; d];
        let mut ph = vec![0.0; d * (d + 1) / 2];
        for (c, pows) in &self.poly {
            let mut mv = *c;
            for a in 0..d {
                mv *= s[a].powi(pows[a] as i32);
            }
            pv += mv;
            for i in 0..d {
                let pi = pows[i] as f64;
                if pi > 0.0 {
                    let gi = *c
                        * (0..d)
                            .map(|a| {
                                let p = pows[a] as i32;
                                if a == i {
                                    pi * s[a].powi(p - 1)
                                } else {
                                    s[a].powi(p)
                                }
                            })
                            .product::<f64>();
                    pg[i] += gi;
                }
                for j in i..d {
                    let k = i * (2 * d - i + 1) / 2 + (j - i);
                    let hij = if i == j {
                        let p = pows[i] as f64;
                        if p >= 2.0 {
                            *c * (0..d)
                                .map(|a| {
                                    let pa = pows[a] as i32;
                                    if a == i {
                                        p * (p - 1.0) * s[a].powi(pa - 2)
                                    } else {
                                        s[a].powi(pa)
                                    }
                                })
                                .product::<f64>()
                        } else {
                            0.0
                        }
                    } else {
                        let pi_ = pows[i] as f64;
                        let pj_ = pows[j] as f64;
                        if pi_ >= 1.0 && pj_ >= 1.0 {
                            *c * (0..d)
                                .map(|a| {
                                    let pa = pows[a] as i32;
                                    if a == i {
                                        pi_ * s[a].powi(pa - 1)
                                    } else if a == j {
                                        pj_ * s[a].powi(pa - 1)
                                    } else {
                                        s[a].powi(pa)
                                    }
                                })
                                .product::<f64>()
                        } else {
                            0.0
                        }
                    };
                    ph[k] += hij;
                }
            }
        }
        let modu = Jet2 { dim: d, value: pv, grad: pg, hess: ph };
        let mut u = bump.mul(&modu);
        // chain rule for the affine map and the overall normalization
        u.value *= self.scale;
        for i in 0..d {
            u.grad[i] *= self.scale / self.halfwidth[i];
        }
        for i in 0..d {
            for j in i..d {
                let k = i * (2 * d - i + 1) / 2 + (j - i);
                u.hess[k] *= self.scale / (self.halfwidth[i] * self.halfwidth[j]);
            }
        }
        u
    }

    pub fn value(&self, point: &[f64]) -> f64 {
        self.jet(point).value
    }

    /// Value and ambient gradient without Hessian work or allocation;
    /// `grad` must have length `dim()`. The integral checks only need first
    /// derivatives of the test function, and this is their hot path.
    pub fn value_grad(&self, point: &[f64], grad: &mut [f64]) -> f64 {
        let d = self.dim();
        debug_assert!(d <= MAX_DIM && grad.len() == d);
        grad.fill(0.0);
        let mut s = [0.0f64; MAX_DIM];
        let mut bv = [0.0f64; MAX_DIM];
        let mut bd = [0.0f64; MAX_DIM];
        for a in 0..d {
            s[a] = (point[a] - self.center[a]) / self.halfwidth[a];
            let (v, dv, _) = bump1(s[a]);
            if v == 0.0 {
                return 0.0;
            }
            bv[a] = v;
            bd[a] = dv;
        }
        let prod: f64 = bv[..d].iter().product();
        let mut pv = 0.0;
        let mut pg = [0.0f64; MAX_DIM];
        for (c, pows) in &self.poly {
            let mut mv = *c;
            for a in 0..d {
                mv *= powi_u8(s[a], pows[a]);
            }
            pv += mv;
            for a in 0..d {
                if pows[a] > 0 {
                    let mut gv = *c * pows[a] as f64;
                    for b in 0..d {
                        let pw = if b == a { pows[b] - 1 } else { pows[b] };
                        gv *= powi_u8(s[b], pw);
                    }
                    pg[a] += gv;
                }
            }
        }
        for a in 0..d {
            grad[a] =
                self.scale * (prod / bv[a] * bd[a] * pv + prod * pg[a]) / self.halfwidth[a];
        }
        self.scale * prod * pv
    }
}

/// Dimension cap for the stack buffers of [`TestFunction::value_grad`].
pub const MAX_DIM: usize = 8;

#[inline]
fn powi_u8(x: f64, p: u8) -> f64 {
    match p {
        0 => 1.0,
        1 => x,
        2 => x * x,
        3 => x * x * x,
        _ => x.powi(p as i32),
    }
}

/// Locate `max |u_raw|` by coarse scan plus Newton ascent, for normalization.
fn find_max_abs(tf: &TestFunction) -> f64 {
    let d = tf.dim();
    let per_axis = match d {
        1 => 2048,
        2 => 64,
        3 => 24,
        4 => 13,
        _ => 8,
    };
    let mut best: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut point = vec![0.0; d];
    let total = per_axis_pow(per_axis, d);
    for idx in 0..total {
        let mut rem = idx;
        for a in (0..d).rev() {
            let i = rem % per_axis;
            rem /= per_axis;
            let t = (i as f64 + 0.5) / per_axis as f64;
            point[a] = tf.support[a][0] + t * (tf.support[a][1] - tf.support[a][0]);
        }
        let v = tf.value(&point);
        let a = v.abs();
        if best.len() < 4 {
            best.push((a, point.clone()));
            best.sort_by(|x, y| y.0.total_cmp(&x.0));
        } else if a > best.last().unwrap().0 {
            best.pop();
            best.push((a, point.clone()));
            best.sort_by(|x, y| y.0.total_cmp(&x.0));
        }
    }
    let mut overall: f64 = 0.0;
    for (_, start) in &best {
        let mut x = start.clone();
        let sgn = tf.value(&x).signum();
        // gradient ascent with backtracking, then Newton polish
        let mut fx = sgn * tf.value(&x);
        for _ in 0..200 {
            let j = tf.jet(&x);
            let g: Vec<f64> = j.grad.iter().map(|v| sgn * v).collect();
            let gnorm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            if gnorm < 1e-14 {
                break;
            }
            let mut step = 0.25
                * tf.halfwidth
                    .iter()
                    .cloned()
                    .fold(f64::INFINITY, f64::min);
            let mut moved = false;
            while step > 1e-18 {
                let cand: Vec<f64> = x
                    .iter()
                    .zip(&g)
                    .enumerate()
                    .map(|(a, (xi, gi))| {
                        (xi + step * gi / gnorm)
                            .clamp(tf.support[a][0], tf.support[a][1])
                    })
                    .collect();
                let fc = sgn * tf.value(&cand);
                if fc > fx {
                    x = cand;
                    fx = fc;
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if !moved {
                break;
            }
        }
        // Newton polish on the (smooth) interior optimum
        for _ in 0..12 {
            let j = tf.jet(&x);
            let g: Vec<f64> = j.grad.iter().map(|v| sgn * v).collect();
            let mut h = vec![vec![0.0; d]; d];
            for i in 0..d {
                for k in 0..d {
                    h[i][k] = sgn * j.hess_at(i, k);
                }
            }
            if let Some(delta) = solve_dense(&mut h, &g) {
                let cand: Vec<f64> = x
                    .iter()
                    .zip(&delta)
                    .enumerate()
                    .map(|(a, (xi, di))| {
                        (xi - di).clamp(tf.support[a][0], tf.support[a][1])
                    })
                    .collect();
                let fc = sgn * tf.value(&cand);
                if fc >= fx {
                    x = cand;
                    fx = fc;
                } else {
                    break;
                }
            } else {
                break;
            }
        }
        overall = overall.max(fx.abs());
    }
    overall
}

fn per_axis_pow(b: usize, e: usize) -> usize {
    (0..e).fold(1usize, |acc, _| acc * b)
}

fn solve_dense(a: &mut [Vec<f64>], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = rhs.len();
    let mut b = rhs.to_vec();
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if a[r][col].abs() > a[piv][col].abs() {
                piv = r;
            }
        }
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut s = b[r];
        for c in r + 1..n {
            s -= a[r][c] * x[c];
        }
        x[r] = s / a[r][r];
    }
    Some(x)
}

/// Build a reproducible bump supported in the given box.
///
/// Not identically zero, `max |u| = 1`, jets vanish outside the support.
pub fn make_bump(support_box: &[[f64; 2]], seed: u64) -> TestFunction {
    assert!(
        !support_box.is_empty() && support_box.iter().all(|[lo, hi]| lo < hi),
        "support box must be nondegenerate"
    );
    let d = support_box.len();
    let center: Vec<f64> = support_box.iter().map(|[lo, hi]| 0.5 * (lo + hi)).collect();
    let halfwidth: Vec<f64> = support_box.iter().map(|[lo, hi]| 0.5 * (hi - lo)).collect();
    let monos = monomials(d, 3);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    loop {
        let poly: Vec<(f64, Vec<u8>)> = monos
            .iter()
            .map(|m| (rng.gen_range(-1.0..=1.0), m.clone()))
            .collect();
        let mut tf = TestFunction {
            support: support_box.to_vec(),
            center: center.clone(),
            halfwidth: halfwidth.clone(),
            poly,
            scale: 1.0,
            seed,
        };
        let max = find_max_abs(&tf);
        if max > 1e-9 {
            tf.scale = 1.0 / max;
            return tf;
        }
        // essentially-zero modulation: re-roll deterministically
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_rule_on_unit_interval() {
        let g = build_grid(&[[0.0, 1.0]], 2).unwrap();
        let mut p = [0.0];
        let w0 = g.node_into(0, &mut p);
        let lo = p[0];
        let w1 = g.node_into(1, &mut p);
        let hi = p[0];
        let d = 1.0 / (2.0 * 3.0f64.sqrt());
        assert!((lo - (0.5 - d)).abs() < 1e-15);
        assert!((hi - (0.5 + d)).abs() < 1e-15);
        assert!((w0 - 0.5).abs() < 1e-15);
        assert!((w1 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn weights_sum_to_box_volume() {
        let g = build_grid(&[[-1.0, 1.0], [-1.0, 1.0]], 3).unwrap();
        assert_eq!(g.len(), 9);
        let vol = integrate(&g, |_| 1.0).unwrap();
        assert!((vol - 4.0).abs() < 1e-12);
        let g3 = build_grid(&[[0.0, 2.0]; 3], 5).unwrap();
        let vol3 = integrate(&g3, |_| 1.0).unwrap();
        assert!((vol3 - 8.0).abs() < 1e-12);
    }

    #[test]
    fn cubic_exactness_of_two_point_rule() {
        let g = build_grid(&[[0.0, 1.0]], 2).unwrap();
        let v = integrate(&g, |p| p[0] * p[0] * p[0]).unwrap();
        assert!((v - 0.25).abs() < 1e-15);
    }

    #[test]
    fn budget_enforced() {
        assert!(matches!(
            build_grid(&[[0.0, 1.0]; 4], 100),
            Err(QuadratureError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn nan_integrand_reports_node() {
        let g = build_grid(&[[0.0, 1.0]], 8).unwrap();
        let err = integrate(&g, |p| if p[0] > 0.5 { f64::NAN } else { 1.0 }).unwrap_err();
        assert!(matches!(err, QuadratureError::NonFinite { .. }));
    }

    #[test]
    fn gaussian_integral_matches_refined_oracle() {
        let g = build_grid(&[[-1.0, 1.0]; 3], 16).unwrap();
        let f = |p: &[f64]| (-p.iter().map(|x| x * x).sum::<f64>()).exp();
        let v = integrate(&g, f).unwrap();
        // refinement oracle at more than double the nodes
        let fine = build_grid(&[[-1.0, 1.0]; 3], 40).unwrap();
        let oracle = integrate(&fine, f).unwrap();
        assert!((v - oracle).abs() < 1e-10, "got {v}, oracle {oracle}");
    }

    #[test]
    fn refinement_ladder_is_monotone() {
        let f = |p: &[f64]| (p[0] * 3.0).sin() * (-p[1] * p[1]).exp() + 0.3 * p[0] * p[1];
        let bx = [[-1.0, 1.5], [0.2, 2.0]];
        let vals: Vec<f64> = [6, 12, 24, 48]
            .iter()
            .map(|&n| integrate(&build_grid(&bx, n).unwrap(), f).unwrap())
            .collect();
        let e1 = (vals[1] - vals[0]).abs();
        let e2 = (vals[2] - vals[1]).abs();
        let e3 = (vals[3] - vals[2]).abs();
        assert!(e2 <= e1 && e3 <= e2, "errors not decaying: {e1} {e2} {e3}");
    }

    #[test]
    fn bump_support_and_normalization_contract() {
        let tf = make_bump(&[[1.0, 2.0]], 0);
        assert_eq!(tf.value(&[1.0]), 0.0);
        assert_eq!(tf.value(&[2.0]), 0.0);
        let mut max = 0.0f64;
        for i in 0..=1000 {
            let x = 1.0 + i as f64 / 1000.0;
            max = max.max(tf.value(&[x]).abs());
        }
        assert!((max - 1.0).abs() < 1e-6, "sampled max {max}");
    }

    #[test]
    fn bump_jets_vanish_at_boundary() {
        let tf = make_bump(&[[0.0, 1.0], [0.0, 1.0]], 3);
        let j = tf.jet(&[1.0, 0.5]);
        assert_eq!(j.value, 0.0);
        assert!(j.grad.iter().all(|g| *g == 0.0));
        assert!(j.hess.iter().all(|h| *h == 0.0));
        // just inside the edge the underflow keeps everything at exact zero
        let j2 = tf.jet(&[1.0 - 1e-9, 0.5]);
        assert_eq!(j2.value, 0.0);
    }

    #[test]
    fn distinct_seeds_give_distinct_functions() {
        let a = make_bump(&[[0.0, 1.0]], 0);
        let b = make_bump(&[[0.0, 1.0]], 1);
        let dist: f64 = (1..100)
            .map(|i| {
                let x = i as f64 / 100.0;
                (a.value(&[x]) - b.value(&[x])).powi(2)
            })
            .sum();
        assert!(dist > 1e-6);
    }

    #[test]
    fn bump_jet_matches_finite_differences() {
        // cross-check the hand-assembled jet against central differences
        let tf = make_bump(&[[0.0, 1.0], [-1.0, 1.0]], 7);
        let p = [0.4, 0.3];
        let j = tf.jet(&p);
        let h = 1e-5;
        for i in 0..2 {
            let mut pp = p;
            let mut pm = p;
            pp[i] += h;
            pm[i] -= h;
            let fd = (tf.value(&pp) - tf.value(&pm)) / (2.0 * h);
            assert!((fd - j.grad[i]).abs() < 1e-7, "grad[{i}]: fd {fd} vs {}", j.grad[i]);
            let fd2 = (tf.value(&pp) - 2.0 * tf.value(&p) + tf.value(&pm)) / (h * h);
            assert!(
                (fd2 - j.hess_at(i, i)).abs() < 1e-4,
                "hess[{i},{i}]: fd {fd2} vs {}",
                j.hess_at(i, i)
            );
        }
        let mut ppp = p;
        ppp[0] += h;
        ppp[1] += h;
        let mut ppm = p;
        ppm[0] += h;
        ppm[1] -= h;
        let mut pmp = p;
        pmp[0] -= h;
        pmp[1] += h;
        let mut pmm = p;
        pmm[0] -= h;
        pmm[1] -= h;
        let fd01 = (tf.value(&ppp) - tf.value(&ppm) - tf.value(&pmp) + tf.value(&pmm))
            / (4.0 * h * h);
        assert!((fd01 - j.hess_at(0, 1)).abs() < 1e-4);
    }
}
