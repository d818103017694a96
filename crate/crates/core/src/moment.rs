//! Ray maps, divisor classes, ampleness and moment polytopes of toric quotients.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::cones::Fan;
use crate::error::{Error, Result};
use crate::lattice::{
    dot, int_to_q, kernel_basis, rref, smith_invariants, IntMatrix, LatticeSpec, QVec, RatMatrix,
    Rational,
};
use crate::polyhedral::Polyhedron;

/// The map `Z^{Σ(1)} → N` sending `e_σ` to the ray generator `n_σ`, and its kernel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RayMap {
    pub lattice: LatticeSpec,
    /// `n × #rays`, columns are ray generators in ambient coordinates.
    pub pi: RatMatrix,
    pub kernel: Vec<Vec<BigInt>>,
}

pub fn build_ray_map(f: &Fan) -> Result<RayMap> {
    let n = f.dim();
    let pi = RatMatrix::from_columns(&f.rays);
    let coords: Vec<Vec<BigInt>> = f
        .rays
        .iter()
        .map(|r| f.lattice.integer_coordinates(r).ok_or(Error::NotInLattice))
        .collect::<Result<_>>()?;
    let int_pi = IntMatrix::from_columns(&coords);
    let inv = smith_invariants(&int_pi);
    if inv.len() != n || !inv.iter().all(One::is_one) {
        return Err(Error::NotSurjective);
    }
    let kernel = kernel_basis(&pi);
    Ok(RayMap { lattice: f.lattice.clone(), pi, kernel })
}

impl RayMap {
    pub fn num_rays(&self) -> usize {
        self.pi.cols()
    }

    /// `p : t* → k*`, restriction of `x0` to the kernel basis.
    pub fn class_of(&self, x0: &[Rational]) -> QVec {
        self.kernel.iter().map(|k| dot(&int_to_q(k), x0)).collect()
    }
}

/// A real divisor class, always carried with a lift `x0 ∈ R^{Σ(1)}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DivisorClass {
    pub alpha: QVec,
    pub x0: QVec,
}

impl DivisorClass {
    pub fn from_lift(rm: &RayMap, x0: QVec) -> DivisorClass {
        DivisorClass { alpha: rm.class_of(&x0), x0 }
    }

    /// Lift `alpha` to `x0`, preferring support on the rays that are not extreme rays of the
    /// support of the fan.
    pub fn from_class(f: &Fan, rm: &RayMap, alpha: QVec) -> Result<DivisorClass> {
        let k = rm.kernel.len();
        if alpha.len() != k {
            return Err(Error::DimensionMismatch { expected: k, got: alpha.len() });
        }
        let r = rm.num_rays();
        if k == 0 {
            return Ok(DivisorClass { alpha, x0: vec![Rational::zero(); r] });
        }
        let kmat = RatMatrix::from_rows(rm.kernel.iter().map(|v| int_to_q(v)).collect());
        let old = old_rays(f);
        let new: Vec<usize> = (0..r).filter(|i| !old.contains(i)).collect();
        if let Some(x0) = solve_supported(&kmat, &alpha, &new) {
            return Ok(DivisorClass { alpha, x0 });
        }
        // greedy invertible column selection, new rays first
        let order: Vec<usize> = new.iter().chain(old.iter()).copied().collect();
        let mut chosen: Vec<usize> = Vec::new();
        for &c in &order {
            let mut trial = chosen.clone();
            trial.push(c);
            let sub = RatMatrix::from_columns(&trial.iter().map(|&j| kmat.column(j)).collect::<Vec<_>>());
            if sub.rank() == trial.len() {
                chosen = trial;
            }
            if chosen.len() == k {
                break;
            }
        }
        let x0 = solve_supported(&kmat, &alpha, &chosen).ok_or_else(|| Error::Inconsistent("kernel has deficient rank".into()))?;
        Ok(DivisorClass { alpha, x0 })
    }
}

/// Indices of fan rays that are extreme rays of the support `|Σ|`.
pub fn old_rays(f: &Fan) -> Vec<usize> {
    let support = crate::cones::Cone::new(f.lattice.clone(), &f.rays);
    match support {
        Ok(c) => (0..f.rays.len()).filter(|&i| c.rays().contains(&f.lattice.primitive(&f.rays[i]))).collect(),
        Err(_) => Vec::new(),
    }
}

fn solve_supported(kmat: &RatMatrix, alpha: &[Rational], support: &[usize]) -> Option<QVec> {
    if support.is_empty() {
        return None;
    }
    let rows = kmat.rows();
    let s = support.len();
    let mut aug = RatMatrix::zeros(rows, s + 1);
    for i in 0..rows {
        for (jj, &j) in support.iter().enumerate() {
            aug[(i, jj)] = kmat[(i, j)].clone();
        }
        aug[(i, s)] = alpha[i].clone();
    }
    let (red, pivots) = rref(&aug);
    if pivots.contains(&s) {
        return None;
    }
    let mut x0 = vec![Rational::zero(); kmat.cols()];
    for (row, &pc) in pivots.iter().enumerate() {
        x0[support[pc]] = red[(row, s)].clone();
    }
    Some(x0)
}

/// `φ_α` as one linear function `m_τ` per maximal cone (same order as `Fan::max_cones`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PLFunction {
    pub slopes: Vec<QVec>,
}

/// Solves `<m_τ, n_σ> = -x0_σ` on each maximal cone and tests the strict inequalities off it.
pub fn ampleness(f: &Fan, d: &DivisorClass) -> Result<(bool, PLFunction)> {
    let n = f.dim();
    let mut slopes = Vec::with_capacity(f.max_cones.len());
    let mut ample = true;
    for mc in &f.max_cones {
        if mc.len() != n {
            return Err(Error::Inconsistent("maximal cone is not simplicial".into()));
        }
        let a = RatMatrix::from_rows(mc.iter().map(|&i| f.rays[i].clone()).collect());
        let inv = a.inverse().ok_or_else(|| Error::Inconsistent("maximal cone is degenerate".into()))?;
        let rhs: QVec = mc.iter().map(|&i| -d.x0[i].clone()).collect();
        let m = inv.mul_vec(&rhs);
        for (i, ray) in f.rays.iter().enumerate() {
            if !mc.contains(&i) && !(dot(&m, ray) + &d.x0[i]).is_positive() {
                ample = false;
            }
        }
        slopes.push(m);
    }
    Ok((ample, PLFunction { slopes }))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SkeletonEdge {
    Bounded { from: usize, to: usize, active: Vec<usize> },
    Ray { from: usize, direction: QVec, active: Vec<usize> },
}

impl SkeletonEdge {
    /// Facets (ray indices of the fan) containing the edge.
    pub fn active(&self) -> &[usize] {
        match self {
            SkeletonEdge::Bounded { active, .. } | SkeletonEdge::Ray { active, .. } => active,
        }
    }
}

/// `P_α = {m : <m, n_σ> + x0_σ >= 0}` with vertex and edge data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MomentPolytope {
    pub lattice: LatticeSpec,
    /// Facet normals `n_σ` (the fan rays).
    pub normals: Vec<QVec>,
    pub offsets: QVec,
    pub vertices: Vec<QVec>,
    /// Recession directions, integral and primitive in ambient coordinates.
    pub rays: Vec<QVec>,
    pub skeleton: Vec<SkeletonEdge>,
    polyhedron: Polyhedron,
}

pub fn moment_polytope(f: &Fan, d: &DivisorClass) -> Result<MomentPolytope> {
    let n = f.dim();
    let poly = Polyhedron::new(f.rays.clone(), d.x0.clone(), n);
    if poly.is_empty() {
        return Err(Error::EmptyPolytope);
    }
    if !poly.lineality.is_empty() {
        return Err(Error::Invalid("moment polytope contains a line; the fan is not full dimensional".into()));
    }
    let mut skeleton = Vec::new();
    for (e, &(a, b)) in poly.bounded_edges.iter().enumerate() {
        skeleton.push(SkeletonEdge::Bounded { from: a, to: b, active: poly.active_on_bounded_edge(e) });
    }
    for (e, &(v, r)) in poly.unbounded_edges.iter().enumerate() {
        skeleton.push(SkeletonEdge::Ray { from: v, direction: poly.rays[r].clone(), active: poly.active_on_unbounded_edge(e) });
    }
    Ok(MomentPolytope {
        lattice: f.lattice.dual(),
        normals: f.rays.clone(),
        offsets: d.x0.clone(),
        vertices: poly.vertices.clone(),
        rays: poly.rays.clone(),
        skeleton,
        polyhedron: poly,
    })
}

pub fn one_skeleton(p: &MomentPolytope) -> &[SkeletonEdge] {
    &p.skeleton
}

impl MomentPolytope {
    pub fn dim(&self) -> usize {
        self.normals.first().map_or(0, Vec::len)
    }

    pub fn contains(&self, m: &[Rational]) -> bool {
        self.polyhedron.contains(m)
    }

    /// Facets tight at vertex `v`.
    pub fn active_at_vertex(&self, v: usize) -> Vec<usize> {
        self.polyhedron.active_at_vertex(v)
    }

    /// Primitive edge directions (in `M`) leaving vertex `v`.
    pub fn edge_directions_at(&self, v: usize) -> Vec<QVec> {
        let m = &self.lattice;
        self.skeleton
            .iter()
            .filter_map(|e| match e {
                SkeletonEdge::Bounded { from, to, .. } if *from == v => {
                    Some(m.primitive(&crate::lattice::sub(&self.vertices[*to], &self.vertices[v])))
                }
                SkeletonEdge::Bounded { from, to, .. } if *to == v => {
                    Some(m.primitive(&crate::lattice::sub(&self.vertices[*from], &self.vertices[v])))
                }
                SkeletonEdge::Ray { from, direction, .. } if *from == v => Some(m.primitive(direction)),
                _ => None,
            })
            .collect()
    }

    /// `self` equals `other` translated by `t`, comparing H-representations exactly.
    pub fn translate_of(&self, other: &MomentPolytope) -> Option<QVec> {
        if self.vertices.len() != other.vertices.len() || self.rays != other.rays {
            return None;
        }
        let t = crate::lattice::sub(self.vertices.first()?, other.vertices.first()?);
        let moved: Vec<QVec> = other.vertices.iter().map(|v| crate::lattice::add(v, &t)).collect();
        let mut a = moved;
        a.sort_by(|x, y| crate::lattice::lex_cmp(x, y));
        (a == self.vertices).then_some(t)
    }
}

/// The dual basis `{v_i*}` of a simplicial cone's generators.
pub fn dual_basis(cone_rays: &[QVec]) -> Result<Vec<QVec>> {
    let a = RatMatrix::from_rows(cone_rays.to_vec());
    let inv = a.inverse().ok_or_else(|| Error::Invalid("generators are dependent".into()))?;
    Ok((0..cone_rays.len()).map(|j| inv.column(j)).collect())
}
