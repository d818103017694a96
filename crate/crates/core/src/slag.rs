//! Floating-point certification of the special Lagrangian fibrations on `C^n` with a torus
//! invariant Kähler potential `φ(|z_1|^2, .., |z_n|^2)`.
//!
//! Real coordinates are ordered `(Re z_1, Im z_1, .., Re z_n, Im z_n)`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::par::Execution;

pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum PotentialKind {
    /// `φ = Σ s_i`, the flat metric.
    Flat,
    /// `φ = Σ s_i + λ Σ s_i^2`.
    Quadratic { lambda: f64 },
    /// Any `φ(s)`, differentiated by central differences.
    Custom(ScalarFn),
}

impl fmt::Debug for PotentialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PotentialKind::Flat => write!(f, "Flat"),
            PotentialKind::Quadratic { lambda } => write!(f, "Quadratic {{ lambda: {lambda} }}"),
            PotentialKind::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// `φ` as a function of `s_i = |z_i|^2`.
#[derive(Clone, Debug)]
pub struct TorusInvariantPotential {
    pub n: usize,
    pub kind: PotentialKind,
}

const CUSTOM_STEP: f64 = 1e-4;

impl TorusInvariantPotential {
    pub fn flat(n: usize) -> Self {
        TorusInvariantPotential { n, kind: PotentialKind::Flat }
    }

    pub fn quadratic(n: usize, lambda: f64) -> Self {
        TorusInvariantPotential { n, kind: PotentialKind::Quadratic { lambda } }
    }

    pub fn custom(n: usize, f: ScalarFn) -> Self {
        TorusInvariantPotential { n, kind: PotentialKind::Custom(f) }
    }

    pub fn value(&self, s: &[f64]) -> f64 {
        match &self.kind {
            PotentialKind::Flat => s.iter().sum(),
            PotentialKind::Quadratic { lambda } => s.iter().map(|x| x + lambda * x * x).sum(),
            PotentialKind::Custom(f) => f(s),
        }
    }

    /// `φ_i = ∂φ/∂s_i`.
    pub fn gradient(&self, s: &[f64]) -> Vec<f64> {
        match &self.kind {
            PotentialKind::Flat => vec![1.0; s.len()],
            PotentialKind::Quadratic { lambda } => s.iter().map(|x| 1.0 + 2.0 * lambda * x).collect(),
            PotentialKind::Custom(f) => (0..s.len())
                .map(|i| {
                    let (mut a, mut b) = (s.to_vec(), s.to_vec());
                    a[i] += CUSTOM_STEP;
                    b[i] -= CUSTOM_STEP;
                    (f(&a) - f(&b)) / (2.0 * CUSTOM_STEP)
                })
                .collect(),
        }
    }

    /// `φ_ij = ∂²φ/∂s_i∂s_j`.
    pub fn hessian(&self, s: &[f64]) -> DMatrix<f64> {
        let n = s.len();
        match &self.kind {
            PotentialKind::Flat => DMatrix::zeros(n, n),
            PotentialKind::Quadratic { lambda } => DMatrix::from_diagonal_element(n, n, 2.0 * lambda),
            PotentialKind::Custom(f) => {
                let h = CUSTOM_STEP;
                let mut out = DMatrix::zeros(n, n);
                for i in 0..n {
                    for j in i..n {
                        let eval = |di: f64, dj: f64| {
                            let mut x = s.to_vec();
                            x[i] += di;
                            x[j] += dj;
                            f(&x)
                        };
                        let v = (eval(h, h) - eval(h, -h) - eval(-h, h) + eval(-h, -h)) / (4.0 * h * h);
                        out[(i, j)] = v;
                        out[(j, i)] = v;
                    }
                }
                out
            }
        }
    }
}

pub fn to_real(z: &[Complex64]) -> Vec<f64> {
    z.iter().flat_map(|c| [c.re, c.im]).collect()
}

pub fn to_complex(x: &[f64]) -> Vec<Complex64> {
    x.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect()
}

fn moduli(z: &[Complex64]) -> Vec<f64> {
    z.iter().map(|c| c.norm_sqr()).collect()
}

/// `H_jk = φ_k δ_jk + φ_jk z̄_j z_k`, so that `ω = (i/2) Σ H_jk dz_j ∧ dz̄_k`.
pub fn hermitian_matrix(p: &TorusInvariantPotential, z: &[Complex64]) -> DMatrix<Complex64> {
    let s = moduli(z);
    let g = p.gradient(&s);
    let hess = p.hessian(&s);
    let n = z.len();
    DMatrix::from_fn(n, n, |j, k| {
        let d = if j == k { Complex64::new(g[k], 0.0) } else { Complex64::new(0.0, 0.0) };
        d + z[j].conj() * z[k] * hess[(j, k)]
    })
}

/// `ω` as a `2n × 2n` antisymmetric matrix, `W_ab = ω(e_a, e_b)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoFormMatrix {
    pub matrix: DMatrix<f64>,
}

impl TwoFormMatrix {
    pub fn eval(&self, u: &[f64], v: &[f64]) -> f64 {
        let (u, v) = (DVector::from_column_slice(u), DVector::from_column_slice(v));
        (u.transpose() * &self.matrix * v)[(0, 0)]
    }
}

/// `ω(u, v) = -Im(Uᵀ H V̄)` for complex coordinate vectors `U`, `V`.
pub fn kahler_form(p: &TorusInvariantPotential, z: &[Complex64]) -> Result<TwoFormMatrix> {
    if z.len() != p.n {
        return Err(Error::DimensionMismatch { expected: p.n, got: z.len() });
    }
    let h = hermitian_matrix(p, z);
    if h.clone().cholesky().is_none() {
        return Err(Error::SingularMetric);
    }
    let n = p.n;
    let unit = |a: usize| if a.is_multiple_of(2) { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 1.0) };
    let mut w = DMatrix::zeros(2 * n, 2 * n);
    for a in 0..2 * n {
        for b in a + 1..2 * n {
            let v = -(unit(a) * h[(a / 2, b / 2)] * unit(b).conj()).im;
            w[(a, b)] = v;
            w[(b, a)] = -v;
        }
    }
    Ok(TwoFormMatrix { matrix: w })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FibrationVariant {
    /// `(φ_1|z_1|^2 - φ_k|z_k|^2, Im(i^{n+1} Π z_j))` on `C^n`.
    Affine,
    /// `(log|1 + Π z_j|, φ_1|z_1|^2 - φ_k|z_k|^2)` off the divisor `1 + Π z_j = 0`.
    Proper,
}

/// Deliberate damage to the map, for negative controls.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Corruption {
    #[default]
    None,
    /// Uses `|z_1|^2` in place of `φ_1|z_1|^2`.
    DropPhi1,
    /// Uses `Im(i^n Π z_j)` in place of `Im(i^{n+1} Π z_j)`.
    WrongPhase,
}

fn i_pow(k: usize) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

fn product(z: &[Complex64]) -> Complex64 {
    z.iter().product()
}

pub fn fibration_map(p: &TorusInvariantPotential, z: &[Complex64], variant: FibrationVariant) -> Result<Vec<f64>> {
    corrupted_fibration_map(p, z, variant, Corruption::None)
}

pub fn corrupted_fibration_map(p: &TorusInvariantPotential, z: &[Complex64], variant: FibrationVariant, corruption: Corruption) -> Result<Vec<f64>> {
    let n = p.n;
    if z.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: z.len() });
    }
    let s = moduli(z);
    let g = p.gradient(&s);
    let first = if corruption == Corruption::DropPhi1 { s[0] } else { g[0] * s[0] };
    let mu0 = (1..n).map(|k| first - g[k] * s[k]);
    let prod = product(z);
    match variant {
        FibrationVariant::Affine => {
            let phase = if corruption == Corruption::WrongPhase { i_pow(n) } else { i_pow(n + 1) };
            Ok(mu0.chain(std::iter::once((phase * prod).im)).collect())
        }
        FibrationVariant::Proper => {
            let w = Complex64::new(1.0, 0.0) + prod;
            if w.norm() == 0.0 {
                return Err(Error::OnDivisor);
            }
            let head = if corruption == Corruption::WrongPhase { w.arg() } else { w.norm().ln() };
            Ok(std::iter::once(head).chain(mu0).collect())
        }
    }
}

/// Central-difference Jacobian (rows are map components) with relative step `h`.
pub fn jacobian<F>(f: F, x: &[f64], h: f64) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let m = f(x)?.len();
    let mut jac = DMatrix::zeros(m, x.len());
    for a in 0..x.len() {
        let step = h * x[a].abs().max(1.0);
        let (mut xp, mut xm) = (x.to_vec(), x.to_vec());
        xp[a] += step;
        xm[a] -= step;
        let (fp, fm) = (f(&xp)?, f(&xm)?);
        for r in 0..m {
            jac[(r, a)] = (fp[r] - fm[r]) / (2.0 * step);
        }
    }
    Ok(jac)
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyConfig {
    pub variant: FibrationVariant,
    pub corruption: Corruption,
    pub fibers: usize,
    pub points_per_fiber: usize,
    pub seed: u64,
    pub tol: f64,
    /// Relative central-difference step.
    pub h_fd: f64,
    /// Singular values below `rank_threshold · σ_max` count as zero.
    pub rank_threshold: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            variant: FibrationVariant::Affine,
            corruption: Corruption::None,
            fibers: 10,
            points_per_fiber: 100,
            seed: 0,
            tol: 1e-6,
            h_fd: 1e-5,
            rank_threshold: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointResidual {
    /// `max |ω(u_a, u_b)|` over an orthonormal basis of the fiber tangent space.
    pub omega: f64,
    /// `|Im Ω(u_1, .., u_n)|`, or `|Im Ω'|` for the proper variant.
    pub im_omega: f64,
    /// The Jacobian has rank below `n`.
    pub critical: bool,
    pub pass: bool,
}

/// Orthonormal basis of the kernel of the `n × 2n` Jacobian, or `None` at a critical point.
fn fiber_tangent_space(jac: &DMatrix<f64>, rank_threshold: f64) -> Option<Vec<Vec<f64>>> {
    let (m, dim) = jac.shape();
    let mut padded = DMatrix::zeros(dim, dim);
    padded.view_mut((0, 0), (m, dim)).copy_from(jac);
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("requested right singular vectors");
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let smax = svd.singular_values[order[0]];
    if smax == 0.0 || svd.singular_values[order[m - 1]] < rank_threshold * smax {
        return None;
    }
    Some(order[m..].iter().map(|&i| vt.row(i).iter().copied().collect()).collect())
}

/// Special Lagrangian residuals of the fiber through `z`.
pub fn verify_slag(p: &TorusInvariantPotential, z: &[Complex64], cfg: &VerifyConfig) -> Result<PointResidual> {
    let n = p.n;
    let x = to_real(z);
    let map = |x: &[f64]| corrupted_fibration_map(p, &to_complex(x), cfg.variant, cfg.corruption);
    let jac = jacobian(map, &x, cfg.h_fd)?;
    let basis = match fiber_tangent_space(&jac, cfg.rank_threshold) {
        Some(b) => b,
        None => return Ok(PointResidual { omega: f64::NAN, im_omega: f64::NAN, critical: true, pass: false }),
    };
    let w = kahler_form(p, z)?;
    let mut omega: f64 = 0.0;
    for a in 0..n {
        for b in a + 1..n {
            omega = omega.max(w.eval(&basis[a], &basis[b]).abs());
        }
    }
    let m = DMatrix::from_fn(n, n, |j, a| Complex64::new(basis[a][2 * j], basis[a][2 * j + 1]));
    let mut vol = m.determinant();
    if cfg.variant == FibrationVariant::Proper {
        vol /= i_pow(n) * (Complex64::new(1.0, 0.0) + product(z));
    }
    let im_omega = vol.im.abs();
    Ok(PointResidual { omega, im_omega, critical: false, pass: omega < cfg.tol && im_omega < cfg.tol })
}

/// `X_j = 2i(z̄_j ∂/∂z̄_j - z_j ∂/∂z_j) = 2(y_j ∂/∂x_j - x_j ∂/∂y_j)`.
pub fn rotation_field(z: &[Complex64], j: usize) -> Vec<f64> {
    let mut v = vec![0.0; 2 * z.len()];
    v[2 * j] = 2.0 * z[j].im;
    v[2 * j + 1] = -2.0 * z[j].re;
    v
}

/// `max |ι(X_j)ω - d(φ_j |z_j|^2)|` over real components, the differential by central differences.
pub fn hamiltonian_check(p: &TorusInvariantPotential, j: usize, z: &[Complex64], h_fd: f64) -> Result<f64> {
    let w = kahler_form(p, z)?;
    let xj = rotation_field(z, j);
    let x = to_real(z);
    let ham = |x: &[f64]| -> Result<Vec<f64>> {
        let s = moduli(&to_complex(x));
        Ok(vec![p.gradient(&s)[j] * s[j]])
    };
    let dh = jacobian(ham, &x, h_fd)?;
    let mut worst: f64 = 0.0;
    for b in 0..x.len() {
        let contraction: f64 = (0..x.len()).map(|a| xj[a] * w.matrix[(a, b)]).sum();
        worst = worst.max((contraction - dh[(0, b)]).abs());
    }
    Ok(worst)
}

/// Largest change of the fibration map along an RK4 trajectory of `X_j - X_1` (`j >= 1`).
pub fn rotation_flow_drift(p: &TorusInvariantPotential, z: &[Complex64], j: usize, variant: FibrationVariant, time: f64, steps: usize) -> Result<f64> {
    let field = |x: &[f64]| -> Vec<f64> {
        let zc = to_complex(x);
        let a = rotation_field(&zc, j);
        let b = rotation_field(&zc, 0);
        a.iter().zip(&b).map(|(u, v)| u - v).collect()
    };
    let axpy = |x: &[f64], k: &[f64], s: f64| -> Vec<f64> { x.iter().zip(k).map(|(a, b)| a + s * b).collect() };
    let f0 = fibration_map(p, z, variant)?;
    let mut x = to_real(z);
    let dt = time / steps as f64;
    let mut worst: f64 = 0.0;
    for _ in 0..steps {
        let k1 = field(&x);
        let k2 = field(&axpy(&x, &k1, dt / 2.0));
        let k3 = field(&axpy(&x, &k2, dt / 2.0));
        let k4 = field(&axpy(&x, &k3, dt));
        x = (0..x.len()).map(|i| x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect();
        let f = fibration_map(p, &to_complex(&x), variant)?;
        worst = f.iter().zip(&f0).map(|(a, b)| (a - b).abs()).fold(worst, f64::max);
    }
    Ok(worst)
}

/// Multiplies `z_j` by `e^{iθ_j}`; with `Σ θ_j = 0` this preserves every component of the map.
pub fn rotate(z: &[Complex64], theta: &[f64]) -> Vec<Complex64> {
    z.iter().zip(theta).map(|(c, t)| c * Complex64::from_polar(1.0, *t)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SlagReport {
    pub n: usize,
    pub variant: FibrationVariant,
    pub corruption: Corruption,
    pub fibers: usize,
    pub points: usize,
    pub max_omega: f64,
    pub max_im_omega: f64,
    /// Largest `|f(z) - f(seed)|` over sampled points.
    pub max_fiber_drift: f64,
    pub critical_points: usize,
    /// Perturbations that failed to project back onto the fiber.
    pub rejected_samples: usize,
    pub tol: f64,
    pub pass: bool,
}

struct FiberResult {
    points: usize,
    max_omega: f64,
    max_im_omega: f64,
    drift: f64,
    critical: usize,
    rejected: usize,
}

fn sup(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Gauss-Newton projection onto `f = target` with minimum-norm steps.
fn project_to_fiber<F>(f: &F, x0: &[f64], target: &[f64], h: f64) -> Option<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let scale = target.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut x = x0.to_vec();
    for _ in 0..40 {
        let r: Vec<f64> = f(&x).ok()?.iter().zip(target).map(|(a, b)| a - b).collect();
        if r.iter().all(|v| v.abs() <= 1e-13 * scale) {
            return Some(x);
        }
        let jac = jacobian(f, &x, h).ok()?;
        let step = jac.pseudo_inverse(1e-12).ok()? * DVector::from_vec(r);
        x.iter_mut().zip(step.iter()).for_each(|(a, d)| *a -= d);
    }
    None
}

fn random_point<R: Rng>(rng: &mut R, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::from_polar(rng.random_range(0.6..1.4), rng.random_range(0.0..std::f64::consts::TAU)))
        .collect()
}

fn away_from_divisor(z: &[Complex64], variant: FibrationVariant) -> bool {
    variant == FibrationVariant::Affine || (Complex64::new(1.0, 0.0) + product(z)).norm() > 0.3
}

fn certify_fiber(p: &TorusInvariantPotential, cfg: &VerifyConfig, fiber: usize) -> Result<FiberResult> {
    let n = p.n;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(fiber as u64));
    let mut seed = random_point(&mut rng, n);
    while !away_from_divisor(&seed, cfg.variant) {
        seed = random_point(&mut rng, n);
    }
    let map = |x: &[f64]| corrupted_fibration_map(p, &to_complex(x), cfg.variant, cfg.corruption);
    let target = map(&to_real(&seed))?;
    let mut res = FiberResult { points: 0, max_omega: 0.0, max_im_omega: 0.0, drift: 0.0, critical: 0, rejected: 0 };
    let mut attempts = 0;
    while res.points < cfg.points_per_fiber && attempts < 20 * cfg.points_per_fiber {
        attempts += 1;
        let start: Vec<f64> = to_real(&seed).iter().map(|v| v + rng.random_range(-0.25..0.25)).collect();
        let projected = match project_to_fiber(&map, &start, &target, cfg.h_fd) {
            Some(x) => to_complex(&x),
            None => {
                res.rejected += 1;
                continue;
            }
        };
        let mut theta: Vec<f64> = (0..n - 1).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
        theta.push(-theta.iter().sum::<f64>());
        let z = rotate(&projected, &theta);
        if !away_from_divisor(&z, cfg.variant) || z.iter().any(|c| c.norm() < 0.05 || c.norm() > 5.0) {
            res.rejected += 1;
            continue;
        }
        let r = verify_slag(p, &z, cfg)?;
        if r.critical {
            res.critical += 1;
            continue;
        }
        res.points += 1;
        res.max_omega = res.max_omega.max(r.omega);
        res.max_im_omega = res.max_im_omega.max(r.im_omega);
        res.drift = res.drift.max(sup(&map(&to_real(&z))?, &target));
    }
    Ok(res)
}

/// Samples `cfg.fibers` random fibers with `cfg.points_per_fiber` points each and records the
/// worst residuals. Fibers are independent and seeded individually.
pub fn certify_fibers(p: &TorusInvariantPotential, cfg: &VerifyConfig, exec: Execution) -> Result<SlagReport> {
    if p.n < 2 {
        return Err(Error::Invalid("dimension must be at least 2".into()));
    }
    let results = exec.map_range(cfg.fibers, |f| certify_fiber(p, cfg, f));
    let mut report = SlagReport {
        n: p.n,
        variant: cfg.variant,
        corruption: cfg.corruption,
        fibers: cfg.fibers,
        points: 0,
        max_omega: 0.0,
        max_im_omega: 0.0,
        max_fiber_drift: 0.0,
        critical_points: 0,
        rejected_samples: 0,
        tol: cfg.tol,
        pass: false,
    };
    for r in results {
        let r = r?;
        report.points += r.points;
        report.max_omega = report.max_omega.max(r.max_omega);
        report.max_im_omega = report.max_im_omega.max(r.max_im_omega);
        report.max_fiber_drift = report.max_fiber_drift.max(r.drift);
        report.critical_points += r.critical;
        report.rejected_samples += r.rejected;
    }
    report.pass = report.points == cfg.fibers * cfg.points_per_fiber && report.max_omega < cfg.tol && report.max_im_omega < cfg.tol;
    Ok(report)
}

/// Worst [`hamiltonian_check`] residual over `samples` random points and all `j`.
pub fn max_hamiltonian_residual(p: &TorusInvariantPotential, samples: usize, seed: u64, h_fd: f64, exec: Execution) -> Result<f64> {
    let results = exec.map_range(samples, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (i as u64).wrapping_mul(0xD1B5_4A32_D192_ED03));
        let z = random_point(&mut rng, p.n);
        (0..p.n).try_fold(0.0f64, |m, j| Ok(m.max(hamiltonian_check(p, j, &z, h_fd)?)))
    });
    results.into_iter().try_fold(0.0f64, |m, r| Ok(m.max(r?)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_z(seed: u64, n: usize) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        random_point(&mut rng, n)
    }

    #[test]
    fn flat_form_is_standard() {
        let p = TorusInvariantPotential::flat(3);
        for seed in 0..5 {
            let w = kahler_form(&p, &random_z(seed, 3)).unwrap();
            for a in 0..6 {
                for b in 0..6 {
                    let expected = if b == a + 1 && a % 2 == 0 {
                        1.0
                    } else if a == b + 1 && b % 2 == 0 {
                        -1.0
                    } else {
                        0.0
                    };
                    assert_eq!(w.matrix[(a, b)], expected);
                }
            }
        }
    }

    #[test]
    fn quadratic_form_at_a_coordinate_point() {
        // φ = Σ s + λ Σ s²; at z = (1, 0, 0): H = diag(1 + 4λ, 1, 1), so ω = (1 + 4λ) dx1∧dy1 + dx2∧dy2 + dx3∧dy3
        let lambda = 0.5;
        let p = TorusInvariantPotential::quadratic(3, lambda);
        let w = kahler_form(&p, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!((w.matrix[(0, 1)] - (1.0 + 4.0 * lambda)).abs() < 1e-15);
        assert!((w.matrix[(2, 3)] - 1.0).abs() < 1e-15);
        assert!((w.matrix[(4, 5)] - 1.0).abs() < 1e-15);
        assert_eq!(w.matrix[(0, 2)], 0.0);
        // off-diagonal blocks come from φ_jk z̄_j z_k, which vanish for a diagonal Hessian
        let z = random_z(9, 3);
        let w = kahler_form(&p, &z).unwrap();
        for (j, zj) in z.iter().enumerate() {
            let s = zj.norm_sqr();
            assert!((w.matrix[(2 * j, 2 * j + 1)] - (1.0 + 4.0 * lambda * s)).abs() < 1e-13);
        }
    }

    #[test]
    fn antisymmetric_for_custom_potentials() {
        let f: ScalarFn = Arc::new(|s: &[f64]| s.iter().sum::<f64>() + 0.1 * (s[0] * s[1]).powi(2) + 0.05 * s[1].powi(3));
        let p = TorusInvariantPotential::custom(2, f);
        for seed in 0..5 {
            let w = kahler_form(&p, &random_z(seed, 2)).unwrap();
            assert_eq!(w.matrix.clone(), -w.matrix.transpose());
        }
    }

    #[test]
    fn singular_metric_is_reported() {
        let p = TorusInvariantPotential::quadratic(2, -1.0);
        assert_eq!(kahler_form(&p, &[c(1.0, 0.0), c(0.5, 0.0)]), Err(Error::SingularMetric));
    }

    #[test]
    fn map_examples() {
        let p = TorusInvariantPotential::flat(3);
        let one = c(1.0, 0.0);
        assert_eq!(fibration_map(&p, &[one, one, one], FibrationVariant::Affine).unwrap(), vec![0.0, 0.0, 0.0]);
        assert_eq!(fibration_map(&p, &[c(2.0, 0.0), one, one], FibrationVariant::Affine).unwrap(), vec![3.0, 3.0, 0.0]);
        assert_eq!(fibration_map(&p, &[c(-1.0, 0.0), one, one], FibrationVariant::Proper), Err(Error::OnDivisor));
        let z = [c(0.3, 0.4), c(1.0, -1.0), c(0.0, 2.0)];
        let f = fibration_map(&p, &z, FibrationVariant::Proper).unwrap();
        assert!((f[0] - (one + z[0] * z[1] * z[2]).norm().ln()).abs() < 1e-15);
        assert!((f[1] - (0.25 - 2.0)).abs() < 1e-15);
    }

    #[test]
    fn torus_orbit_preserves_the_map() {
        for variant in [FibrationVariant::Affine, FibrationVariant::Proper] {
            let p = TorusInvariantPotential::quadratic(3, 0.3);
            let z = random_z(4, 3);
            let f0 = fibration_map(&p, &z, variant).unwrap();
            for theta in [[0.3, -1.0, 0.7], [2.0, 2.0, -4.0]] {
                let f = fibration_map(&p, &rotate(&z, &theta), variant).unwrap();
                assert!(sup(&f, &f0) < 1e-12);
            }
            assert!(rotation_flow_drift(&p, &z, 2, variant, 0.5, 200).unwrap() < 1e-6);
        }
    }

    #[test]
    fn hamiltonian_residual_over_random_points() {
        let quad = TorusInvariantPotential::quadratic(3, 0.5);
        let r = max_hamiltonian_residual(&quad, 20, 7, 1e-5, Execution::Sequential).unwrap();
        assert!(r < 1e-6, "{r}");
        assert_eq!(r, max_hamiltonian_residual(&quad, 20, 7, 1e-5, Execution::Parallel).unwrap());
    }

    #[test]
    fn hamiltonian_identity() {
        let flat = TorusInvariantPotential::flat(3);
        let quad = TorusInvariantPotential::quadratic(3, 0.7);
        for seed in 0..10 {
            let z = random_z(seed, 3);
            for j in 0..3 {
                assert!(hamiltonian_check(&flat, j, &z, 1e-5).unwrap() < 1e-8);
                assert!(hamiltonian_check(&quad, j, &z, 1e-5).unwrap() < 1e-6);
            }
        }
        let z = [c(0.0, 0.0), c(0.5, 1.0), c(-1.0, 0.2)];
        assert!(hamiltonian_check(&quad, 0, &z, 1e-5).unwrap() < 1e-10);
    }

    #[test]
    fn fibers_are_special_lagrangian() {
        for n in [2, 3] {
            for variant in [FibrationVariant::Affine, FibrationVariant::Proper] {
                for p in [TorusInvariantPotential::flat(n), TorusInvariantPotential::quadratic(n, 0.5)] {
                    let cfg = VerifyConfig { variant, fibers: 2, points_per_fiber: 10, ..VerifyConfig::default() };
                    let r = certify_fibers(&p, &cfg, Execution::Sequential).unwrap();
                    assert!(r.pass, "{r:?}");
                    assert!(r.max_fiber_drift < 1e-10);
                }
            }
        }
    }

    #[test]
    fn corrupted_maps_fail() {
        let base = VerifyConfig { fibers: 2, points_per_fiber: 10, ..VerifyConfig::default() };
        let wrong_phase = VerifyConfig { corruption: Corruption::WrongPhase, ..base.clone() };
        let r = certify_fibers(&TorusInvariantPotential::flat(3), &wrong_phase, Execution::Sequential).unwrap();
        assert!(!r.pass);
        assert!(r.max_im_omega > 1e-2, "{r:?}");
        let drop = VerifyConfig { corruption: Corruption::DropPhi1, ..base };
        let r = certify_fibers(&TorusInvariantPotential::quadratic(3, 0.5), &drop, Execution::Sequential).unwrap();
        assert!(r.max_omega > 1e-2, "{r:?}");
    }

    #[test]
    fn critical_points_are_flagged() {
        // two vanishing coordinates make the differential of Π z vanish
        let p = TorusInvariantPotential::flat(3);
        let r = verify_slag(&p, &[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], &VerifyConfig::default()).unwrap();
        assert!(r.critical);
    }

    #[test]
    fn execution_modes_agree() {
        let p = TorusInvariantPotential::quadratic(2, 0.5);
        let cfg = VerifyConfig { fibers: 3, points_per_fiber: 5, ..VerifyConfig::default() };
        assert_eq!(
            certify_fibers(&p, &cfg, Execution::Sequential).unwrap(),
            certify_fibers(&p, &cfg, Execution::Parallel).unwrap()
        );
    }
}
