//! The mirror curve family `h_t`, numerical amoeba sampling with certified roots, and the
//! fattening comparison between an amoeba cloud and a tropical spine.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::par::Execution;
use crate::tropical::{Exponent, TropicalCurve};

/// Default relative residual bound `|h(z)| <= tol · Σ |terms|`.
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct LaurentPolynomial2 {
    pub terms: Vec<(Exponent, Complex64)>,
}

impl LaurentPolynomial2 {
    pub fn new(terms: Vec<(Exponent, Complex64)>) -> Result<LaurentPolynomial2> {
        let mut e: Vec<Exponent> = terms.iter().map(|(e, _)| *e).collect();
        e.sort();
        e.dedup();
        if e.len() != terms.len() {
            return Err(Error::Invalid("repeated exponent".into()));
        }
        Ok(LaurentPolynomial2 { terms })
    }

    /// Fewer than two nonzero terms: the zero set in the torus is empty or everything.
    pub fn is_degenerate(&self) -> bool {
        self.terms.iter().filter(|(_, c)| *c != Complex64::new(0.0, 0.0)).count() < 2
    }

    pub fn evaluate(&self, z1: Complex64, z2: Complex64) -> Complex64 {
        self.terms.iter().map(|(e, c)| c * z1.powi(e[0] as i32) * z2.powi(e[1] as i32)).sum()
    }

    pub fn term_magnitude(&self, z1: Complex64, z2: Complex64) -> f64 {
        self.terms.iter().map(|(e, c)| (c * z1.powi(e[0] as i32) * z2.powi(e[1] as i32)).norm()).sum()
    }

    /// Coefficients (constant term first) of `z^{-min} h` in the free variable, with the other
    /// variable fixed to `w`.
    pub fn specialize(&self, slice: Slice, w: Complex64) -> Vec<Complex64> {
        let (fixed, free) = match slice {
            Slice::X1 => (0, 1),
            Slice::X2 => (1, 0),
        };
        let lo = self.terms.iter().map(|(e, _)| e[free]).min().unwrap_or(0);
        let hi = self.terms.iter().map(|(e, _)| e[free]).max().unwrap_or(0);
        let mut out = vec![Complex64::new(0.0, 0.0); (hi - lo) as usize + 1];
        for (e, c) in &self.terms {
            out[(e[free] - lo) as usize] += c * w.powi(e[fixed] as i32);
        }
        out
    }
}

/// `h_t = Σ t^{φ(a,b)} m_{a,b} z_1^a z_2^b`.
pub fn curve_family(support: &[Exponent], phi: &[f64], m: &[Complex64], t: f64) -> Result<LaurentPolynomial2> {
    if phi.len() != support.len() {
        return Err(Error::DimensionMismatch { expected: support.len(), got: phi.len() });
    }
    if m.len() != support.len() {
        return Err(Error::DimensionMismatch { expected: support.len(), got: m.len() });
    }
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::Invalid(format!("t must lie in (0, 1], got {t}")));
    }
    LaurentPolynomial2::new(support.iter().zip(phi).zip(m).map(|((e, p), c)| (*e, c * t.powf(*p))).collect())
}

/// Horner evaluation of a polynomial and its derivative, constant term first.
fn horner(c: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for a in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

/// Nonzero roots of a polynomial (constant term first): companion-matrix eigenvalues followed by
/// Newton polishing. Roots at zero and at infinity (vanishing end coefficients) are dropped.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let zero = Complex64::new(0.0, 0.0);
    let lo = match coeffs.iter().position(|c| *c != zero) {
        Some(i) => i,
        None => return Vec::new(),
    };
    let hi = coeffs.iter().rposition(|c| *c != zero).expect("some coefficient is nonzero");
    let c = &coeffs[lo..=hi];
    let deg = c.len() - 1;
    let raw: Vec<Complex64> = match deg {
        0 => return Vec::new(),
        1 => vec![-c[0] / c[1]],
        _ => {
            let lead = c[deg];
            let mut m = DMatrix::<Complex64>::zeros(deg, deg);
            for i in 1..deg {
                m[(i, i - 1)] = Complex64::new(1.0, 0.0);
            }
            for i in 0..deg {
                m[(i, deg - 1)] = -c[i] / lead;
            }
            match m.schur().eigenvalues() {
                Some(ev) => ev.iter().copied().collect(),
                None => return Vec::new(),
            }
        }
    };
    raw.into_iter()
        .map(|mut z| {
            for _ in 0..3 {
                let (p, dp) = horner(c, z);
                if dp == zero {
                    break;
                }
                let next = z - p / dp;
                if horner(c, next).0.norm() < p.norm() {
                    z = next;
                } else {
                    break;
                }
            }
            z
        })
        .collect()
}

/// Which coordinate is fixed on a slice: `X1` fixes `z_1 = e^{x_1 + iθ}` and solves for `z_2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slice {
    X1,
    X2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slicing {
    X1Only,
    Both,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SamplingConfig {
    pub grid: Vec<f64>,
    pub angles: usize,
    pub slicing: Slicing,
    pub tol: f64,
}

impl SamplingConfig {
    /// `resolution` grid values evenly spaced over `[lo, hi]`, slicing in both directions.
    pub fn window(lo: f64, hi: f64, resolution: usize, angles: usize) -> SamplingConfig {
        let grid = if resolution <= 1 {
            vec![(lo + hi) / 2.0]
        } else {
            (0..resolution).map(|i| lo + (hi - lo) * i as f64 / (resolution - 1) as f64).collect()
        };
        SamplingConfig { grid, angles, slicing: Slicing::Both, tol: DEFAULT_RESIDUAL_TOL }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AmoebaCloud {
    pub points: Vec<[f64; 2]>,
    pub grid_len: usize,
    pub angles: usize,
    /// Roots rejected by the residual certificate.
    pub discarded: usize,
    /// Slices on which the one-variable polynomial vanished identically.
    pub degenerate_slices: usize,
    /// Largest relative residual among accepted roots.
    pub max_residual: f64,
}

struct SliceResult {
    points: Vec<[f64; 2]>,
    discarded: usize,
    degenerate: usize,
    max_residual: f64,
}

fn sample_slice(h: &LaurentPolynomial2, slice: Slice, x: f64, angles: usize, tol: f64) -> SliceResult {
    let mut res = SliceResult { points: Vec::new(), discarded: 0, degenerate: 0, max_residual: 0.0 };
    for k in 0..angles {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / angles as f64;
        let w = Complex64::from_polar(x.exp(), theta);
        let coeffs = h.specialize(slice, w);
        if coeffs.iter().all(|c| c.norm() == 0.0) {
            res.degenerate += 1;
            continue;
        }
        for r in polynomial_roots(&coeffs) {
            let (z1, z2) = match slice {
                Slice::X1 => (w, r),
                Slice::X2 => (r, w),
            };
            let scale = h.term_magnitude(z1, z2);
            let rel = h.evaluate(z1, z2).norm() / scale;
            if !(rel.is_finite() && rel <= tol && r.norm() > 0.0) {
                res.discarded += 1;
                continue;
            }
            res.max_residual = res.max_residual.max(rel);
            let l = r.norm().ln();
            res.points.push(match slice {
                Slice::X1 => [x, l],
                Slice::X2 => [l, x],
            });
        }
    }
    res
}

/// Samples `ν(z) = (log|z_1|, log|z_2|)` over the zero set of `h`, slice by slice. Results are
/// merged in grid order, so the cloud does not depend on the execution mode.
pub fn amoeba_sample(h: &LaurentPolynomial2, cfg: &SamplingConfig, exec: Execution) -> AmoebaCloud {
    let mut items: Vec<(Slice, f64)> = cfg.grid.iter().map(|&x| (Slice::X1, x)).collect();
    if cfg.slicing == Slicing::Both {
        items.extend(cfg.grid.iter().map(|&x| (Slice::X2, x)));
    }
    let parts = exec.map(&items, |&(s, x)| sample_slice(h, s, x, cfg.angles, cfg.tol));
    let mut cloud = AmoebaCloud {
        points: Vec::new(),
        grid_len: cfg.grid.len(),
        angles: cfg.angles,
        discarded: 0,
        degenerate_slices: 0,
        max_residual: 0.0,
    };
    for p in parts {
        cloud.points.extend(p.points);
        cloud.discarded += p.discarded;
        cloud.degenerate_slices += p.degenerate;
        cloud.max_residual = cloud.max_residual.max(p.max_residual);
    }
    cloud
}

/// The square `[lo, hi]^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl Window {
    /// `[-k |log t|, k |log t|]^2`.
    pub fn around(k: f64, t: f64) -> Window {
        let r = k * t.ln().abs();
        Window { lo: -r, hi: r }
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        p.iter().all(|&x| x >= self.lo && x <= self.hi)
    }
}

/// Bucket grid for nearest-neighbour queries.
struct Buckets {
    lo: f64,
    cell: f64,
    dim: usize,
    cells: Vec<Vec<[f64; 2]>>,
}

impl Buckets {
    fn new(points: &[[f64; 2]], lo: f64, hi: f64, dim: usize) -> Buckets {
        let cell = (hi - lo) / dim as f64;
        let mut cells = vec![Vec::new(); dim * dim];
        for p in points {
            let (i, j) = (((p[0] - lo) / cell).floor(), ((p[1] - lo) / cell).floor());
            if i >= 0.0 && j >= 0.0 && (i as usize) < dim && (j as usize) < dim {
                cells[i as usize * dim + j as usize].push(*p);
            }
        }
        Buckets { lo, cell, dim, cells }
    }

    fn nearest(&self, p: [f64; 2]) -> f64 {
        let d = self.dim as i64;
        let ci = (((p[0] - self.lo) / self.cell).floor() as i64).clamp(0, d - 1);
        let cj = (((p[1] - self.lo) / self.cell).floor() as i64).clamp(0, d - 1);
        let mut best = f64::INFINITY;
        for r in 0..d {
            for i in (ci - r)..=(ci + r) {
                for j in (cj - r)..=(cj + r) {
                    if (i - ci).abs() != r && (j - cj).abs() != r {
                        continue;
                    }
                    if i < 0 || j < 0 || i >= d || j >= d {
                        continue;
                    }
                    for q in &self.cells[(i * d + j) as usize] {
                        best = best.min(((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt());
                    }
                }
            }
            if best <= r as f64 * self.cell {
                break;
            }
        }
        best
    }
}

/// Distances from cloud points in the window to the spine, and from spine sample points in the
/// window to the cloud.
#[derive(Clone, Debug, PartialEq)]
pub struct FatteningDistances {
    pub cloud_to_spine: Vec<f64>,
    pub spine_to_cloud: Vec<f64>,
}

pub fn fattening_distances(cloud: &AmoebaCloud, tc: &TropicalCurve, window: Window, exec: Execution) -> FatteningDistances {
    let pieces = tc.pieces();
    let inside: Vec<[f64; 2]> = cloud.points.iter().copied().filter(|p| window.contains(*p)).collect();
    let cloud_to_spine = exec.map(&inside, |p| pieces.iter().map(|s| s.distance(*p)).fold(f64::INFINITY, f64::min));

    let side = window.hi - window.lo;
    let step = side / 2000.0;
    let mut samples: Vec<[f64; 2]> = Vec::new();
    for piece in &pieces {
        if let Some((a, b)) = piece.clip(window.lo, window.hi) {
            let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
            let k = (len / step).ceil().max(1.0) as usize;
            for i in 0..=k {
                let s = i as f64 / k as f64;
                samples.push([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]);
            }
        }
    }
    let margin = 0.1 * side;
    let buckets = Buckets::new(&cloud.points, window.lo - margin, window.hi + margin, 256);
    let spine_to_cloud = exec.map(&samples, |p| buckets.nearest(*p));
    FatteningDistances { cloud_to_spine, spine_to_cloud }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FatteningReport {
    pub eps: f64,
    /// Fraction of cloud points in the window within `eps` of the spine.
    pub contained: f64,
    /// Fraction of spine samples in the window within `eps` of the cloud.
    pub covers: f64,
    pub cloud_points: usize,
    pub spine_samples: usize,
}

fn fraction_within(d: &[f64], eps: f64) -> f64 {
    if d.is_empty() {
        return 0.0;
    }
    d.iter().filter(|&&x| x <= eps).count() as f64 / d.len() as f64
}

fn quantile(d: &[f64], q: f64) -> f64 {
    if d.is_empty() {
        return f64::INFINITY;
    }
    let mut v = d.to_vec();
    v.sort_by(f64::total_cmp);
    let i = ((q * v.len() as f64).ceil() as usize).clamp(1, v.len()) - 1;
    v[i]
}

pub fn fattening_check(cloud: &AmoebaCloud, tc: &TropicalCurve, eps: f64, window: Window, exec: Execution) -> FatteningReport {
    let d = fattening_distances(cloud, tc, window, exec);
    FatteningReport {
        eps,
        contained: fraction_within(&d.cloud_to_spine, eps),
        covers: fraction_within(&d.spine_to_cloud, eps),
        cloud_points: d.cloud_to_spine.len(),
        spine_samples: d.spine_to_cloud.len(),
    }
}

/// Smallest `eps` for which both fractions reach `fraction`.
pub fn required_eps(d: &FatteningDistances, fraction: f64) -> f64 {
    quantile(&d.cloud_to_spine, fraction).max(quantile(&d.spine_to_cloud, fraction))
}
