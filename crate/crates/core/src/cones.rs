//! Rational polyhedral cones, Gorenstein data, triangulations and fans.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::lattice::{
    dot, express_in_basis, is_lattice_basis, lex_cmp, q, LatticeSpec, QVec, RatMatrix, Rational,
};
use crate::polyhedral::{dual_of_generators, ConeGenerators};

/// A strongly convex rational polyhedral cone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cone {
    lattice: LatticeSpec,
    rays: Vec<QVec>,
    /// Generators of the dual cone, in ambient coordinates.
    dual: ConeGenerators,
    dim: usize,
}

fn rank_of(vs: &[QVec]) -> usize {
    if vs.is_empty() {
        0
    } else {
        RatMatrix::from_rows(vs.to_vec()).rank()
    }
}

impl Cone {
    /// Builds the cone generated by `generators`; redundant generators are removed and
    /// the remaining ones are made primitive in `lattice` and sorted lexicographically.
    pub fn new(lattice: LatticeSpec, generators: &[QVec]) -> Result<Cone> {
        let n = lattice.rank();
        for g in generators {
            if g.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: g.len() });
            }
        }
        let nonzero: Vec<QVec> = generators.iter().filter(|g| g.iter().any(|x| !x.is_zero())).cloned().collect();
        let dual = dual_of_generators(&nonzero, &[], n);
        let back = dual_of_generators(&dual.rays, &dual.lineality, n);
        if !back.lineality.is_empty() {
            return Err(Error::Invalid("cone contains a line".into()));
        }
        let mut rays: Vec<QVec> = back.rays.iter().map(|r| lattice.primitive(r)).collect();
        rays.sort_by(|a, b| lex_cmp(a, b));
        let dim = rank_of(&rays);
        Ok(Cone { lattice, rays, dual, dim })
    }

    pub fn lattice(&self) -> &LatticeSpec {
        &self.lattice
    }

    pub fn rays(&self) -> &[QVec] {
        &self.rays
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_full_dimensional(&self) -> bool {
        self.dim == self.lattice.rank()
    }

    pub fn is_simplicial(&self) -> bool {
        self.rays.len() == self.dim
    }

    /// Inward facet normals (extreme rays of the dual cone), ambient coordinates.
    pub fn facet_normals(&self) -> &[QVec] {
        &self.dual.rays
    }

    pub fn contains(&self, v: &[Rational]) -> bool {
        self.dual.rays.iter().all(|f| !dot(f, v).is_negative())
            && self.dual.lineality.iter().all(|l| dot(l, v).is_zero())
    }

    /// Faces as sorted sets of ray indices, including the cone itself and excluding the
    /// zero face. Sorted by dimension, then lexicographically.
    pub fn faces(&self) -> Vec<Vec<usize>> {
        let facet_sets: Vec<Vec<usize>> = self
            .dual
            .rays
            .iter()
            .map(|f| (0..self.rays.len()).filter(|&i| dot(f, &self.rays[i]).is_zero()).collect())
            .collect();
        let mut all: BTreeSet<Vec<usize>> = BTreeSet::new();
        let full: Vec<usize> = (0..self.rays.len()).collect();
        let mut frontier = vec![full];
        while let Some(face) = frontier.pop() {
            if !all.insert(face.clone()) {
                continue;
            }
            for fs in &facet_sets {
                let meet: Vec<usize> = face.iter().filter(|i| fs.contains(i)).copied().collect();
                if !meet.is_empty() && meet.len() < face.len() && !all.contains(&meet) {
                    frontier.push(meet);
                }
            }
        }
        let mut out: Vec<Vec<usize>> = all.into_iter().collect();
        out.sort_by_key(|f| (self.face_dim(f), f.clone()));
        out
    }

    pub fn face_dim(&self, face: &[usize]) -> usize {
        rank_of(&face.iter().map(|&i| self.rays[i].clone()).collect::<Vec<_>>())
    }

    /// Pulling triangulation of a face; simplices are lists of ray indices.
    pub fn triangulate_face(&self, face: &[usize]) -> Vec<Vec<usize>> {
        let faces = self.faces();
        self.pull(face, &faces)
    }

    fn pull(&self, face: &[usize], faces: &[Vec<usize>]) -> Vec<Vec<usize>> {
        let d = self.face_dim(face);
        if face.len() == d {
            return vec![face.to_vec()];
        }
        let apex = face[0];
        let mut out = Vec::new();
        for g in faces {
            let is_facet = g.len() < face.len()
                && g.iter().all(|i| face.contains(i))
                && !g.contains(&apex)
                && self.face_dim(g) + 1 == d;
            if is_facet {
                for mut s in self.pull(g, faces) {
                    s.insert(0, apex);
                    s.sort_unstable();
                    out.push(s);
                }
            }
        }
        out
    }

    fn n_coords(&self, vs: &[QVec]) -> RatMatrix {
        RatMatrix::from_columns(&vs.iter().map(|v| self.lattice.coordinates(v)).collect::<Vec<_>>())
    }

    /// Sum of lattice determinants over a pulling triangulation (normalized volume of the
    /// truncation by the hyperplane through the rays, for Gorenstein cones).
    pub fn normalized_volume(&self) -> Rational {
        assert!(self.is_full_dimensional(), "volume of a lower dimensional cone");
        let full: Vec<usize> = (0..self.rays.len()).collect();
        self.triangulate_face(&full)
            .iter()
            .map(|s| self.n_coords(&s.iter().map(|&i| self.rays[i].clone()).collect::<Vec<_>>()).determinant().abs())
            .fold(Rational::zero(), |a, b| a + b)
    }
}

/// The dual cone `{m : <m, v> >= 0 for v in c}` in the dual lattice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualCone {
    pub lattice: LatticeSpec,
    /// Rays, primitive in the dual lattice and sorted.
    pub rays: Vec<QVec>,
    pub lineality: Vec<QVec>,
    pub strongly_convex: bool,
}

pub fn dual_cone(c: &Cone) -> DualCone {
    let m = c.lattice.dual();
    let mut rays: Vec<QVec> = c.dual.rays.iter().map(|r| m.primitive(r)).collect();
    rays.sort_by(|a, b| lex_cmp(a, b));
    let lineality: Vec<QVec> = c.dual.lineality.iter().map(|r| m.primitive(r)).collect();
    let strongly_convex = lineality.is_empty();
    DualCone { lattice: m, rays, lineality, strongly_convex }
}

impl DualCone {
    /// Generators including both signs of every lineality vector.
    pub fn all_generators(&self) -> Vec<QVec> {
        let mut g = self.rays.clone();
        for l in &self.lineality {
            g.push(l.clone());
            g.push(l.iter().map(|x| -x).collect());
        }
        g
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GorensteinData {
    pub cone: Cone,
    pub m0: QVec,
    /// Vertices of the cross-section polytope `P = conv(rays)`.
    pub cross_section: Vec<QVec>,
}

pub fn gorenstein_degree(c: &Cone) -> Result<GorensteinData> {
    if !c.is_full_dimensional() {
        return Err(Error::Invalid("cone is not full dimensional".into()));
    }
    let n = c.lattice.rank();
    let mut aug = RatMatrix::zeros(c.rays.len(), n + 1);
    for (i, r) in c.rays.iter().enumerate() {
        for j in 0..n {
            aug[(i, j)] = r[j].clone();
        }
        aug[(i, n)] = Rational::one();
    }
    let (red, pivots) = crate::lattice::rref(&aug);
    if pivots.contains(&n) {
        return Err(Error::NotGorenstein("rays do not lie on a common affine hyperplane".into()));
    }
    let m0: QVec = (0..n).map(|i| red[(i, n)].clone()).collect();
    if !c.lattice.dual().contains(&m0) {
        return Err(Error::NotGorenstein("the degree is not in the dual lattice".into()));
    }
    Ok(GorensteinData { cone: c.clone(), cross_section: c.rays.clone(), m0 })
}

impl GorensteinData {
    pub fn height(&self, v: &[Rational]) -> Rational {
        dot(&self.m0, v)
    }

    /// Whether `v` is a lattice point of the cross-section `P`.
    pub fn is_lattice_point_of_p(&self, v: &[Rational]) -> bool {
        self.cone.lattice.contains(v) && self.height(v).is_one() && self.cone.contains(v)
    }
}

/// Simplices given as index tuples into a list of lattice points of `P`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Triangulation {
    pub points: Vec<QVec>,
    pub simplices: Vec<Vec<usize>>,
}

/// Star subdivision of the cone at a lattice point in the interior of `P`.
pub fn star_subdivision(g: &GorensteinData, point: &[Rational]) -> Result<Triangulation> {
    if !g.is_lattice_point_of_p(point) {
        return Err(Error::InvalidTriangulation("subdivision point is not a lattice point of P".into()));
    }
    if g.cone.facet_normals().iter().any(|f| dot(f, point).is_zero()) {
        return Err(Error::InvalidTriangulation("subdivision point lies on the boundary of P".into()));
    }
    let c = &g.cone;
    let faces = c.faces();
    let n = c.lattice.rank();
    let mut points = c.rays.clone();
    points.push(point.to_vec());
    let centre = points.len() - 1;
    let mut simplices = Vec::new();
    for face in faces.iter().filter(|f| c.face_dim(f) + 1 == n) {
        for mut s in c.triangulate_face(face) {
            s.push(centre);
            simplices.push(s);
        }
    }
    Ok(Triangulation { points, simplices })
}

/// A fan given by its rays and maximal cones (index lists into `rays`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fan {
    pub lattice: LatticeSpec,
    pub rays: Vec<QVec>,
    pub max_cones: Vec<Vec<usize>>,
    /// All nonzero cones of the fan (face closure), as sorted ray index sets.
    pub cones: Vec<Vec<usize>>,
}

impl Fan {
    pub fn new(lattice: LatticeSpec, rays: Vec<QVec>, max_cones: Vec<Vec<usize>>) -> Result<Fan> {
        let mut all = BTreeSet::new();
        for mc in &max_cones {
            if mc.iter().any(|&i| i >= rays.len()) {
                return Err(Error::Invalid("cone index out of range".into()));
            }
            let gens: Vec<QVec> = mc.iter().map(|&i| rays[i].clone()).collect();
            let cone = Cone::new(lattice.clone(), &gens)?;
            if cone.rays().len() != gens.len() {
                return Err(Error::Invalid("maximal cone has redundant generators".into()));
            }
            // map cone ray order back to fan indices
            let index: Vec<usize> = cone
                .rays()
                .iter()
                .map(|r| mc.iter().copied().find(|&i| lattice.primitive(&rays[i]) == *r).expect("ray present"))
                .collect();
            for face in cone.faces() {
                let mut f: Vec<usize> = face.iter().map(|&k| index[k]).collect();
                f.sort_unstable();
                all.insert(f);
            }
        }
        let mut cones: Vec<Vec<usize>> = all.into_iter().collect();
        cones.sort_by_key(|c| (c.len(), c.clone()));
        let mut max_cones: Vec<Vec<usize>> = max_cones
            .into_iter()
            .map(|mut c| {
                c.sort_unstable();
                c
            })
            .collect();
        max_cones.sort();
        Ok(Fan { lattice, rays, max_cones, cones })
    }

    /// The fan of faces of a single cone.
    pub fn from_cone(c: &Cone) -> Fan {
        let rays = c.rays().to_vec();
        let all: Vec<usize> = (0..rays.len()).collect();
        Fan::new(c.lattice().clone(), rays, vec![all]).expect("faces of a valid cone form a fan")
    }

    pub fn dim(&self) -> usize {
        self.lattice.rank()
    }

    /// Cones of dimension `k`, given as ray index sets.
    pub fn cones_of_dim(&self, k: usize) -> Vec<&Vec<usize>> {
        self.cones
            .iter()
            .filter(|c| rank_of(&c.iter().map(|&i| self.rays[i].clone()).collect::<Vec<_>>()) == k)
            .collect()
    }
}

pub fn fan_from_triangulation(g: &GorensteinData, t: &Triangulation) -> Result<Fan> {
    let c = &g.cone;
    let n = c.lattice().rank();
    for p in &t.points {
        if p.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: p.len() });
        }
        if !g.is_lattice_point_of_p(p) {
            return Err(Error::InvalidTriangulation(format!("point {} is not a lattice point of P", fmt_vec(p))));
        }
    }
    let mut volume = Rational::zero();
    // facet (sorted n-1 subset) -> list of (simplex, sign of the opposite vertex)
    let mut facets: BTreeMap<Vec<usize>, Vec<(usize, Rational)>> = BTreeMap::new();
    for (si, s) in t.simplices.iter().enumerate() {
        let mut s_sorted = s.clone();
        s_sorted.sort_unstable();
        s_sorted.dedup();
        if s_sorted.len() != n || s.iter().any(|&i| i >= t.points.len()) {
            return Err(Error::InvalidTriangulation(format!("simplex {si} does not have {n} distinct valid vertices")));
        }
        let coords = RatMatrix::from_columns(&s.iter().map(|&i| c.lattice().coordinates(&t.points[i])).collect::<Vec<_>>());
        let det = coords.determinant();
        if det.is_zero() {
            return Err(Error::InvalidTriangulation(format!("simplex {si} is degenerate")));
        }
        volume += det.abs();
        for skip in 0..n {
            let facet: Vec<usize> = s_sorted.iter().enumerate().filter(|(k, _)| *k != skip).map(|(_, &i)| i).collect();
            let normal = hyperplane_normal(&facet.iter().map(|&i| t.points[i].clone()).collect::<Vec<_>>());
            let side = dot(&normal, &t.points[s_sorted[skip]]);
            facets.entry(facet).or_default().push((si, side));
        }
    }
    for (facet, users) in &facets {
        let pts: Vec<QVec> = facet.iter().map(|&i| t.points[i].clone()).collect();
        let on_boundary = c
            .facet_normals()
            .iter()
            .any(|f| pts.iter().all(|p| dot(f, p).is_zero()));
        let ok = if on_boundary {
            users.len() == 1
        } else {
            users.len() == 2 && (users[0].1.is_positive() != users[1].1.is_positive())
        };
        if !ok {
            return Err(Error::InvalidTriangulation(format!(
                "facet {facet:?} is used by {} simplices inconsistently",
                users.len()
            )));
        }
    }
    if volume != c.normalized_volume() {
        return Err(Error::InvalidTriangulation("simplices do not cover P exactly once".into()));
    }
    // keep only the points that are used, in their given order
    let used: BTreeSet<usize> = t.simplices.iter().flatten().copied().collect();
    let remap: BTreeMap<usize, usize> = used.iter().enumerate().map(|(k, &i)| (i, k)).collect();
    let rays: Vec<QVec> = used.iter().map(|&i| t.points[i].clone()).collect();
    let max_cones = t.simplices.iter().map(|s| s.iter().map(|i| remap[i]).collect()).collect();
    Fan::new(c.lattice().clone(), rays, max_cones)
}

/// Normal of the linear hyperplane through `n-1` linearly independent points.
fn hyperplane_normal(pts: &[QVec]) -> QVec {
    let m = RatMatrix::from_rows(pts.to_vec());
    let k = crate::lattice::kernel_basis(&m);
    debug_assert_eq!(k.len(), 1);
    crate::lattice::int_to_q(&k[0])
}

fn fmt_vec(v: &[Rational]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(","))
}

/// Returns whether every maximal cone is generated by a lattice basis, plus the offenders.
pub fn is_smooth(f: &Fan) -> (bool, Vec<Vec<usize>>) {
    let n = f.dim();
    let offenders: Vec<Vec<usize>> = f
        .max_cones
        .iter()
        .filter(|mc| {
            let gens: Vec<QVec> = mc.iter().map(|&i| f.rays[i].clone()).collect();
            gens.len() != n || !is_lattice_basis(&gens, &f.lattice).unwrap_or(false)
        })
        .cloned()
        .collect();
    (offenders.is_empty(), offenders)
}

/// Every ray of the fan lies on the hyperplane `<m0, .> = 1`.
pub fn crepancy_check(g: &GorensteinData, f: &Fan) -> bool {
    f.rays.iter().all(|r| g.height(r).is_one())
}

/// Coordinates of `v` in terms of the rays of a simplicial cone.
pub fn simplicial_coordinates(rays: &[QVec], v: &[Rational]) -> Result<QVec> {
    express_in_basis(v, rays)
}

/// The example lattice `Z^3 + (1/3)(1,1,1)` used throughout the documentation.
pub fn z3_plus_third() -> LatticeSpec {
    let third = Rational::new(1.into(), 3.into());
    LatticeSpec::new(&[
        vec![q(1), q(0), q(0)],
        vec![q(0), q(1), q(0)],
        vec![third.clone(), third.clone(), third],
    ])
    .expect("invertible basis")
}
