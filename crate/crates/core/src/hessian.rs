//! Hessian potentials sampled on grids: the discrete Legendre transform and the real
//! Monge-Ampère residual.
//!
//! A grid is index-regular with spacing `h` in a parameter `u`, while the coordinates `y(u)`
//! attached to its nodes may be curvilinear. This is what lets the Legendre transform be
//! applied twice: the dual grid keeps the index structure and carries the coordinates `ŷ`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct HessianPotentialGrid {
    /// Nodes per dimension.
    pub shape: Vec<usize>,
    /// Parameter spacing per dimension.
    pub spacing: Vec<f64>,
    /// Coordinates of each node, in row-major node order.
    pub coords: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

impl HessianPotentialGrid {
    /// Samples `k` on the regular grid with `shape[i]` nodes over `[lo[i], hi[i]]`.
    pub fn regular<F: Fn(&[f64]) -> f64>(lo: &[f64], hi: &[f64], shape: &[usize], k: F) -> Result<HessianPotentialGrid> {
        let d = shape.len();
        if lo.len() != d || hi.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: lo.len().min(hi.len()) });
        }
        if shape.iter().any(|&n| n < 3) {
            return Err(Error::Invalid("need at least 3 nodes per dimension".into()));
        }
        let spacing: Vec<f64> = (0..d).map(|i| (hi[i] - lo[i]) / (shape[i] - 1) as f64).collect();
        let total: usize = shape.iter().product();
        let mut coords = Vec::with_capacity(total);
        let mut values = Vec::with_capacity(total);
        for flat in 0..total {
            let idx = unflatten(flat, shape);
            let y: Vec<f64> = (0..d).map(|i| lo[i] + spacing[i] * idx[i] as f64).collect();
            values.push(k(&y));
            coords.push(y);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("potential is not finite on the grid".into()));
        }
        Ok(HessianPotentialGrid { shape: shape.to_vec(), spacing, coords, values })
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn flat(&self, idx: &[usize]) -> usize {
        flatten(idx, &self.shape)
    }

    /// Row-major indices of nodes with all neighbours present.
    pub fn interior(&self) -> Vec<Vec<usize>> {
        let total: usize = self.shape.iter().product();
        (0..total)
            .map(|f| unflatten(f, &self.shape))
            .filter(|idx| idx.iter().zip(&self.shape).all(|(&i, &n)| i >= 1 && i + 1 < n))
            .collect()
    }

    /// First and second parameter derivatives of a nodal field at an interior node.
    fn param_derivatives(&self, field: &dyn Fn(usize) -> f64, idx: &[usize]) -> (Vec<f64>, DMatrix<f64>) {
        let d = self.dim();
        let at = |shift: &[(usize, isize)]| {
            let mut j: Vec<usize> = idx.to_vec();
            for &(k, s) in shift {
                j[k] = (j[k] as isize + s) as usize;
            }
            field(self.flat(&j))
        };
        let centre = at(&[]);
        let mut grad = vec![0.0; d];
        let mut hess = DMatrix::zeros(d, d);
        for a in 0..d {
            let ha = self.spacing[a];
            grad[a] = (at(&[(a, 1)]) - at(&[(a, -1)])) / (2.0 * ha);
            hess[(a, a)] = (at(&[(a, 1)]) - 2.0 * centre + at(&[(a, -1)])) / (ha * ha);
            for b in a + 1..d {
                let hb = self.spacing[b];
                let v = (at(&[(a, 1), (b, 1)]) - at(&[(a, 1), (b, -1)]) - at(&[(a, -1), (b, 1)]) + at(&[(a, -1), (b, -1)])) / (4.0 * ha * hb);
                hess[(a, b)] = v;
                hess[(b, a)] = v;
            }
        }
        (grad, hess)
    }

    /// Gradient `∂K/∂y` and Hessian `∂²K/∂y∂y` at an interior node, by the chain rule through
    /// the node coordinates.
    pub fn derivatives(&self, idx: &[usize]) -> Result<(Vec<f64>, DMatrix<f64>)> {
        let d = self.dim();
        let (dk, d2k) = self.param_derivatives(&|f| self.values[f], idx);
        // jc[(k, a)] = ∂y_k/∂u_a
        let mut jc = DMatrix::zeros(d, d);
        let mut coord_hess = Vec::with_capacity(d);
        for k in 0..d {
            let (g, h) = self.param_derivatives(&|f| self.coords[f][k], idx);
            for a in 0..d {
                jc[(k, a)] = g[a];
            }
            coord_hess.push(h);
        }
        let jc_inv = jc.clone().try_inverse().ok_or_else(|| Error::NotConvex(format!("coordinates are degenerate at node {idx:?}")))?;
        let dk = nalgebra::DVector::from_vec(dk);
        let grad = jc_inv.transpose() * &dk;
        let mut inner = d2k;
        for k in 0..d {
            inner -= &coord_hess[k] * grad[k];
        }
        let hess = jc_inv.transpose() * inner * &jc_inv;
        let hess = (&hess + hess.transpose()) * 0.5;
        Ok((grad.iter().copied().collect(), hess))
    }
}

fn flatten(idx: &[usize], shape: &[usize]) -> usize {
    idx.iter().zip(shape).fold(0, |acc, (&i, &n)| acc * n + i)
}

fn unflatten(mut f: usize, shape: &[usize]) -> Vec<usize> {
    let mut idx = vec![0; shape.len()];
    for k in (0..shape.len()).rev() {
        idx[k] = f % shape[k];
        f /= shape[k];
    }
    idx
}

/// `ŷ = ∂K/∂y` and `Ǩ = Σ y_i ŷ_i - K` on the interior nodes, as a grid in the `ŷ` coordinates.
pub fn legendre_dual(k: &HessianPotentialGrid) -> Result<HessianPotentialGrid> {
    let interior = k.interior();
    if interior.is_empty() {
        return Err(Error::Invalid("grid has no interior nodes".into()));
    }
    let mut coords = Vec::with_capacity(interior.len());
    let mut values = Vec::with_capacity(interior.len());
    for idx in &interior {
        let (grad, hess) = k.derivatives(idx)?;
        if hess.clone().cholesky().is_none() {
            return Err(Error::NotConvex(format!("Hessian is not positive definite at node {idx:?}")));
        }
        let y = &k.coords[k.flat(idx)];
        values.push(y.iter().zip(&grad).map(|(a, b)| a * b).sum::<f64>() - k.values[k.flat(idx)]);
        coords.push(grad);
    }
    Ok(HessianPotentialGrid { shape: k.shape.iter().map(|n| n - 2).collect(), spacing: k.spacing.clone(), coords, values })
}

/// Largest coordinate or value discrepancy between `legendre_dual(legendre_dual(k))` and `k` on
/// the nodes both grids share.
pub fn double_dual_error(k: &HessianPotentialGrid) -> Result<f64> {
    let dd = legendre_dual(&legendre_dual(k)?)?;
    let mut worst: f64 = 0.0;
    for f in 0..dd.len() {
        let idx: Vec<usize> = unflatten(f, &dd.shape).iter().map(|i| i + 2).collect();
        let o = k.flat(&idx);
        worst = worst.max((dd.values[f] - k.values[o]).abs());
        for (a, b) in dd.coords[f].iter().zip(&k.coords[o]) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MongeAmpereReport {
    /// `det ∂²K/∂y_i∂y_j` at each interior node.
    pub determinants: Vec<f64>,
    pub mean: f64,
    /// `max |det - mean| / |mean|`.
    pub residual: f64,
}

pub fn monge_ampere_residual(k: &HessianPotentialGrid) -> Result<MongeAmpereReport> {
    let interior = k.interior();
    if interior.is_empty() {
        return Err(Error::Invalid("grid has no interior nodes".into()));
    }
    let determinants: Vec<f64> = interior
        .iter()
        .map(|idx| k.derivatives(idx).map(|(_, h)| h.determinant()))
        .collect::<Result<_>>()?;
    let mean = determinants.iter().sum::<f64>() / determinants.len() as f64;
    let residual = determinants.iter().map(|d| (d - mean).abs()).fold(0.0, f64::max) / mean.abs();
    Ok(MongeAmpereReport { determinants, mean, residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic(d: usize, n: usize) -> HessianPotentialGrid {
        HessianPotentialGrid::regular(&vec![-1.0; d], &vec![1.0; d], &vec![n; d], |y| y.iter().map(|v| v * v / 2.0).sum()).unwrap()
    }

    fn exponential(n: usize) -> HessianPotentialGrid {
        HessianPotentialGrid::regular(&[-0.5, -0.5], &[0.5, 0.5], &[n, n], |y| y.iter().map(|v| v.exp()).sum()).unwrap()
    }

    #[test]
    fn quadratic_is_self_dual() {
        let k = quadratic(2, 9);
        let dual = legendre_dual(&k).unwrap();
        for f in 0..dual.len() {
            let idx: Vec<usize> = unflatten(f, &dual.shape).iter().map(|i| i + 1).collect();
            let o = k.flat(&idx);
            for (a, b) in dual.coords[f].iter().zip(&k.coords[o]) {
                assert!((a - b).abs() < 1e-12);
            }
            assert!((dual.values[f] - k.values[o]).abs() < 1e-12);
        }
        assert!(double_dual_error(&k).unwrap() < 1e-12);
    }

    #[test]
    fn exponential_dual_matches_closed_form() {
        let mut errs = Vec::new();
        for n in [11, 21, 41] {
            let k = exponential(n);
            let dual = legendre_dual(&k).unwrap();
            let mut worst: f64 = 0.0;
            for f in 0..dual.len() {
                let exact: f64 = dual.coords[f].iter().map(|&w| w * w.ln() - w).sum();
                worst = worst.max((dual.values[f] - exact).abs());
                let idx: Vec<usize> = unflatten(f, &dual.shape).iter().map(|i| i + 1).collect();
                let y = &k.coords[k.flat(&idx)];
                for (w, yy) in dual.coords[f].iter().zip(y) {
                    assert!((w - yy.exp()).abs() < 0.01);
                }
            }
            errs.push(worst);
        }
        // the value error is second order in the gradient error, so it falls at least 4x per halving
        for w in errs.windows(2) {
            assert!(w[0] / w[1] > 3.5, "{errs:?}");
        }
    }

    #[test]
    fn double_dual_converges_at_second_order() {
        let errs: Vec<f64> = [11, 21, 41].iter().map(|&n| double_dual_error(&exponential(n)).unwrap()).collect();
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!((3.5..4.5).contains(&ratio), "{errs:?}");
        }
    }

    #[test]
    fn monge_ampere_cases() {
        assert!(monge_ampere_residual(&quadratic(2, 7)).unwrap().residual < 1e-10);
        assert!(monge_ampere_residual(&quadratic(3, 5)).unwrap().residual < 1e-10);
        assert!(monge_ampere_residual(&exponential(11)).unwrap().residual > 0.5);
        let quartic = |eps: f64| {
            let k = HessianPotentialGrid::regular(&[-1.0], &[1.0], &[41], |y| y[0] * y[0] / 2.0 + eps * y[0].powi(4)).unwrap();
            monge_ampere_residual(&k).unwrap().residual
        };
        let r: Vec<f64> = [0.0, 0.01, 0.1, 1.0].iter().map(|&e| quartic(e)).collect();
        assert!(r[0] < 1e-10);
        assert!(r.windows(2).all(|w| w[0] < w[1]), "{r:?}");
    }

    #[test]
    fn concave_potential_is_rejected() {
        let k = HessianPotentialGrid::regular(&[-1.0, -1.0], &[1.0, 1.0], &[5, 5], |y| y[0] * y[0] - y[1] * y[1]).unwrap();
        assert!(matches!(legendre_dual(&k), Err(Error::NotConvex(_))));
    }

    #[test]
    fn index_round_trip() {
        let shape = [3, 4, 5];
        for f in 0..60 {
            assert_eq!(flatten(&unflatten(f, &shape), &shape), f);
        }
    }
}
