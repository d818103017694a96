//! Exact rational and integer linear algebra over lattices.
//!
//! Lattice points are always stored in ambient rational coordinates. A
//! [`LatticeSpec`] carries the generators of the lattice `N` so that points can
//! be moved to `N`-coordinates (and the dual lattice `M` recovered) on demand.

mod hnf;
mod matrix;

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub use hnf::{hermite_normal_form, smith_invariants};
pub use matrix::{rref, IntMatrix, Matrix, RatMatrix};

use crate::error::{Error, Result};

pub type Rational = BigRational;
pub type QVec = Vec<Rational>;

pub fn q(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn qvec(xs: &[i64]) -> QVec {
    xs.iter().map(|&x| q(x)).collect()
}

pub fn int_to_q(v: &[BigInt]) -> QVec {
    v.iter().map(|x| Rational::from_integer(x.clone())).collect()
}

/// Parse `"p/q"` or `"p"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    let parsed = match t.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| Error::Parse(format!("bad rational {s:?}")))?;
            let d: BigInt = d.trim().parse().map_err(|_| Error::Parse(format!("bad rational {s:?}")))?;
            if d.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            Rational::new(n, d)
        }
        None => Rational::from_integer(t.parse().map_err(|_| Error::Parse(format!("bad rational {s:?}")))?),
    };
    Ok(parsed)
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

pub fn sub(a: &[Rational], b: &[Rational]) -> QVec {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[Rational], b: &[Rational]) -> QVec {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[Rational], s: &Rational) -> QVec {
    a.iter().map(|x| x * s).collect()
}

pub fn is_zero_vec(a: &[Rational]) -> bool {
    a.iter().all(Zero::is_zero)
}

pub fn lex_cmp(a: &[Rational], b: &[Rational]) -> Ordering {
    a.iter().cmp(b.iter())
}

pub fn to_f64(x: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}

fn lcm_of_denominators(v: &[Rational]) -> BigInt {
    v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

fn gcd_of(v: &[BigInt]) -> BigInt {
    v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x))
}

/// Clear denominators and divide by the content. The direction (sign included) is preserved.
pub fn primitive_integer(v: &[Rational]) -> Vec<BigInt> {
    let l = lcm_of_denominators(v);
    let ints: Vec<BigInt> = v.iter().map(|x| (x * Rational::from_integer(l.clone())).to_integer()).collect();
    let g = gcd_of(&ints);
    if g.is_zero() {
        return ints;
    }
    ints.into_iter().map(|x| x / &g).collect()
}

/// Flip the sign so that the first nonzero coordinate is positive.
pub fn sign_normalize(v: &mut [BigInt]) {
    if let Some(first) = v.iter().find(|x| !x.is_zero()) {
        if first.is_negative() {
            for x in v.iter_mut() {
                *x = -x.clone();
            }
        }
    }
}

/// A full-rank lattice `N ⊂ Q^n`, given by generators in ambient coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeSpec {
    basis: RatMatrix,
    inverse: RatMatrix,
}

impl LatticeSpec {
    pub fn standard(n: usize) -> Self {
        Self { basis: RatMatrix::identity(n), inverse: RatMatrix::identity(n) }
    }

    /// `generators` are the columns of the basis matrix.
    pub fn new(generators: &[QVec]) -> Result<Self> {
        let n = generators.len();
        if n == 0 || generators.iter().any(|g| g.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: generators.first().map_or(0, Vec::len) });
        }
        let basis = RatMatrix::from_columns(generators);
        let inverse = basis.inverse().ok_or_else(|| Error::Invalid("lattice basis is singular".into()))?;
        Ok(Self { basis, inverse })
    }

    pub fn rank(&self) -> usize {
        self.basis.rows()
    }

    pub fn basis(&self) -> &RatMatrix {
        &self.basis
    }

    pub fn generators(&self) -> Vec<QVec> {
        (0..self.rank()).map(|j| self.basis.column(j)).collect()
    }

    pub fn is_standard(&self) -> bool {
        self.basis.is_identity()
    }

    /// Covolume of the lattice in ambient coordinates.
    pub fn covolume(&self) -> Rational {
        self.basis.determinant().abs()
    }

    pub fn coordinates(&self, v: &[Rational]) -> QVec {
        self.inverse.mul_vec(v)
    }

    pub fn from_coordinates(&self, c: &[Rational]) -> QVec {
        self.basis.mul_vec(c)
    }

    /// Integer `N`-coordinates, or `None` if `v` is not a lattice point.
    pub fn integer_coordinates(&self, v: &[Rational]) -> Option<Vec<BigInt>> {
        let c = self.coordinates(v);
        c.iter().all(|x| x.is_integer()).then(|| c.iter().map(|x| x.to_integer()).collect())
    }

    pub fn contains(&self, v: &[Rational]) -> bool {
        v.len() == self.rank() && self.integer_coordinates(v).is_some()
    }

    /// Dual lattice `M = {m : <m, n> ∈ Z for all n ∈ N}`, in the same ambient coordinates.
    pub fn dual(&self) -> LatticeSpec {
        let inv_t = self.inverse.transpose();
        LatticeSpec { inverse: self.basis.transpose(), basis: inv_t }
    }

    /// Primitive lattice vector on the ray through `v` (`v` nonzero).
    pub fn primitive(&self, v: &[Rational]) -> QVec {
        let c = primitive_integer(&self.coordinates(v));
        self.from_coordinates(&int_to_q(&c))
    }
}

/// Basis of the integer kernel `{x ∈ Z^cols : m x = 0}`.
///
/// The returned vectors are HNF-reduced, primitive, and sign-normalized.
pub fn kernel_basis(m: &RatMatrix) -> Vec<Vec<BigInt>> {
    let cols = m.cols();
    if m.rows() == 0 {
        return (0..cols)
            .map(|i| (0..cols).map(|j| BigInt::from((i == j) as i64)).collect())
            .collect();
    }
    // row scaling does not change the kernel
    let int_rows: Vec<Vec<BigInt>> = (0..m.rows())
        .map(|i| {
            let row = m.row(i);
            let l = lcm_of_denominators(row);
            row.iter().map(|x| (x * Rational::from_integer(l.clone())).to_integer()).collect()
        })
        .collect();
    let a = IntMatrix::from_rows(int_rows);
    let (h, u) = hermite_normal_form(&a.transpose());
    let kernel_rows: Vec<Vec<BigInt>> = (0..h.rows())
        .filter(|&i| h.row(i).iter().all(Zero::is_zero))
        .map(|i| u.row(i).to_vec())
        .collect();
    if kernel_rows.is_empty() {
        return Vec::new();
    }
    let (canon, _) = hermite_normal_form(&IntMatrix::from_rows(kernel_rows));
    canon
        .to_rows()
        .into_iter()
        .filter(|r| r.iter().any(|x| !x.is_zero()))
        .map(|mut r| {
            sign_normalize(&mut r);
            r
        })
        .collect()
}

/// Exact coordinates of `v` in the span of `basis`.
pub fn express_in_basis(v: &[Rational], basis: &[QVec]) -> Result<QVec> {
    let k = basis.len();
    if k == 0 {
        return if is_zero_vec(v) { Ok(Vec::new()) } else { Err(Error::NotInSpan) };
    }
    let dim = v.len();
    if basis.iter().any(|b| b.len() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, got: basis[0].len() });
    }
    let mut aug = RatMatrix::zeros(dim, k + 1);
    for i in 0..dim {
        for (j, b) in basis.iter().enumerate() {
            aug[(i, j)] = b[i].clone();
        }
        aug[(i, k)] = v[i].clone();
    }
    let (red, pivots) = rref(&aug);
    if pivots.contains(&k) {
        return Err(Error::NotInSpan);
    }
    if pivots.len() < k {
        return Err(Error::Invalid("basis vectors are linearly dependent".into()));
    }
    Ok((0..k).map(|j| red[(j, k)].clone()).collect())
}

/// Whether `vectors` generate the lattice `N`.
pub fn is_lattice_basis(vectors: &[QVec], lattice: &LatticeSpec) -> Result<bool> {
    let n = lattice.rank();
    if vectors.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: vectors.len() });
    }
    let mut coords = Vec::with_capacity(n);
    for v in vectors {
        if v.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: v.len() });
        }
        coords.push(lattice.integer_coordinates(v).ok_or(Error::NotInLattice)?);
    }
    let det = IntMatrix::from_columns(&coords).determinant();
    Ok(det.abs().is_one())
}
