//! Discriminant graphs of the toric special Lagrangian fibrations, their monodromy,
//! fiber types and the combinatorial dual fibration.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::lattice::{
    dot, express_in_basis, hermite_normal_form, int_to_q, kernel_basis, lex_cmp, primitive_integer, sign_normalize,
    sub, IntMatrix, LatticeSpec, QVec, Rational,
};
use crate::moment::{MomentPolytope, SkeletonEdge};

/// A basis `e_1..e_n` of `N` with `<m0, e_i> = 1`, and `f_i = e_1 - e_{i+1}` spanning `N_{m0}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdaptedBasis {
    pub lattice: LatticeSpec,
    pub m0: QVec,
    pub e: Vec<QVec>,
    pub f: Vec<QVec>,
}

/// Deterministic adapted basis: `f` is the Hermite-reduced basis of `N_{m0}` and `e_1` is the
/// shortest generator of `N` with `<m0, e_1> = 1`, falling back to a Hermite-derived solution.
pub fn adapted_basis(lattice: &LatticeSpec, m0: &[Rational]) -> Result<AdaptedBasis> {
    let n = lattice.rank();
    if m0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: m0.len() });
    }
    // M-coordinates of m0 are its pairings with the N-basis
    let gens = lattice.generators();
    let c: Vec<Rational> = gens.iter().map(|g| dot(m0, g)).collect();
    if !c.iter().all(|x| x.is_integer()) {
        return Err(Error::NoBasis("m0 is not in the dual lattice".into()));
    }
    let ci: Vec<BigInt> = c.iter().map(|x| x.to_integer()).collect();
    let col = IntMatrix::from_rows(ci.iter().map(|x| vec![x.clone()]).collect());
    let (h, u) = hermite_normal_form(&col);
    if !h[(0, 0)].is_one() {
        return Err(Error::NoBasis("m0 is not primitive".into()));
    }
    let e1 = gens
        .iter()
        .zip(&c)
        .filter(|(_, p)| p.is_one())
        .min_by(|(a, _), (b, _)| dot(a, a).cmp(&dot(b, b)))
        .map(|(g, _)| g.clone())
        .unwrap_or_else(|| lattice.from_coordinates(&int_to_q(u.row(0))));
    let row = crate::lattice::RatMatrix::from_rows(vec![c.clone()]);
    let f: Vec<QVec> = kernel_basis(&row).iter().map(|k| lattice.from_coordinates(&int_to_q(k))).collect();
    let mut e = vec![e1.clone()];
    e.extend(f.iter().map(|fi| sub(&e1, fi)));
    Ok(AdaptedBasis { lattice: lattice.clone(), m0: m0.to_vec(), e, f })
}

impl AdaptedBasis {
    /// Validated basis from a caller-chosen `e`.
    pub fn from_e(lattice: &LatticeSpec, m0: &[Rational], e: Vec<QVec>) -> Result<AdaptedBasis> {
        if !crate::lattice::is_lattice_basis(&e, lattice)? {
            return Err(Error::NoBasis("vectors do not form a basis of N".into()));
        }
        if e.iter().any(|v| !dot(m0, v).is_one()) {
            return Err(Error::NoBasis("<m0, e_i> != 1".into()));
        }
        let f = e[1..].iter().map(|v| sub(&e[0], v)).collect();
        Ok(AdaptedBasis { lattice: lattice.clone(), m0: m0.to_vec(), e, f })
    }

    pub fn rank(&self) -> usize {
        self.e.len()
    }

    /// `r(x) = (x_1 - x_2, ..., x_1 - x_n)` with `x_i = <x, e_i>`, i.e. `(<x, f_i>)`.
    pub fn project(&self, x: &[Rational]) -> QVec {
        self.f.iter().map(|fi| dot(x, fi)).collect()
    }

    /// Integer coordinates of `delta ∈ N_{m0}` in the basis `f`.
    pub fn sublattice_coordinates(&self, delta: &[Rational]) -> Result<Vec<BigInt>> {
        if !dot(&self.m0, delta).is_zero() || !self.lattice.contains(delta) {
            return Err(Error::NotInSublattice);
        }
        let a = express_in_basis(delta, &self.f).map_err(|_| Error::NotInSublattice)?;
        if !a.iter().all(|x| x.is_integer()) {
            return Err(Error::NotInSublattice);
        }
        Ok(a.iter().map(|x| x.to_integer()).collect())
    }
}

/// `(x_1 - x_2, ..., x_1 - x_n)` for a point given in coordinates dual to `e`.
pub fn projection_r(x: &[Rational]) -> QVec {
    x[1..].iter().map(|xi| &x[0] - xi).collect()
}

/// `T = I + (a_1, .., a_{n-1}, 0)^T` in the last column, where `delta = Σ a_i f_i`.
pub fn edge_monodromy(delta: &[Rational], b: &AdaptedBasis) -> Result<IntMatrix> {
    let a = b.sublattice_coordinates(delta)?;
    Ok(monodromy_from_coefficients(&a))
}

pub fn monodromy_from_coefficients(a: &[BigInt]) -> IntMatrix {
    let n = a.len() + 1;
    let mut t = IntMatrix::identity(n);
    for (i, ai) in a.iter().enumerate() {
        t[(i, n - 1)] = ai.clone();
    }
    t
}

pub fn is_unipotent_of_order_two(t: &IntMatrix) -> bool {
    let n = t.rows();
    let mut m = t.clone();
    for i in 0..n {
        m[(i, i)] = &m[(i, i)] - BigInt::one();
    }
    let sq = m.mul(&m);
    (0..n).all(|i| (0..n).all(|j| sq[(i, j)].is_zero())) && t.determinant().is_one()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FiberType {
    /// Generic singular fiber over an edge, type (2,2).
    Generic,
    /// Positive vertex fiber, type (1,2).
    Positive,
    /// Negative vertex fiber, type (2,1).
    Negative,
    /// Smooth `T^n` (the proper fibration away from the discriminant).
    SmoothTorus,
    /// Smooth `T^{n-1} × R` (the affine fibration away from the discriminant).
    NoncompactTorus,
    Unclassified,
}

impl FiberType {
    pub fn name(self) -> &'static str {
        match self {
            FiberType::Generic => "(2,2)",
            FiberType::Positive => "(1,2)",
            FiberType::Negative => "(2,1)",
            FiberType::SmoothTorus => "T^n",
            FiberType::NoncompactTorus => "T^(n-1) x R",
            FiberType::Unclassified => "unclassified",
        }
    }

    pub fn swapped(self) -> FiberType {
        match self {
            FiberType::Positive => FiberType::Negative,
            FiberType::Negative => FiberType::Positive,
            other => other,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeLabel {
    /// The two fan rays spanning the codimension-2 cone dual to the edge, lexicographically sorted.
    pub pair: Option<(QVec, QVec)>,
    /// `n_1 - n_2`.
    pub delta: Option<QVec>,
    /// Coordinates of `delta` in the basis `f`.
    pub coefficients: Option<Vec<BigInt>>,
    pub monodromy: IntMatrix,
    pub fiber: FiberType,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscriminantGraph {
    /// Dimension `n` of the Calabi-Yau.
    pub n: usize,
    pub vertices: Vec<QVec>,
    pub bounded_edges: Vec<(usize, usize)>,
    /// (vertex, primitive integral direction).
    pub rays: Vec<(usize, QVec)>,
    /// Labels for bounded edges followed by rays.
    pub edge_labels: Vec<EdgeLabel>,
    pub vertex_types: Vec<FiberType>,
    /// Fan rays active at each vertex, lexicographically sorted.
    pub vertex_cones: Vec<Vec<QVec>>,
    /// Source points in `M_R` of the vertices, and source directions of the rays.
    pub source_vertices: Vec<QVec>,
    pub source_directions: Vec<QVec>,
    /// Whether the graph is read as the discriminant of the proper fibration.
    pub proper: bool,
    pub warnings: Vec<String>,
}

impl DiscriminantGraph {
    pub fn ambient_dim(&self) -> usize {
        self.n.saturating_sub(1)
    }

    pub fn empty(n: usize) -> DiscriminantGraph {
        DiscriminantGraph {
            n,
            vertices: Vec::new(),
            bounded_edges: Vec::new(),
            rays: Vec::new(),
            edge_labels: Vec::new(),
            vertex_types: Vec::new(),
            vertex_cones: Vec::new(),
            source_vertices: Vec::new(),
            source_directions: Vec::new(),
            proper: false,
            warnings: Vec::new(),
        }
    }

    /// Fiber over a point of the base off the discriminant.
    pub fn generic_fiber(&self) -> FiberType {
        if self.proper {
            FiberType::SmoothTorus
        } else {
            FiberType::NoncompactTorus
        }
    }

    pub fn valence(&self, v: usize) -> usize {
        self.bounded_edges.iter().filter(|(a, b)| *a == v || *b == v).count()
            + self.rays.iter().filter(|(a, _)| *a == v).count()
    }

    /// Edge indices (bounded first, then rays) incident to `v`.
    pub fn incident_edges(&self, v: usize) -> Vec<usize> {
        let nb = self.bounded_edges.len();
        let mut out: Vec<usize> = self
            .bounded_edges
            .iter()
            .enumerate()
            .filter(|(_, (a, b))| *a == v || *b == v)
            .map(|(i, _)| i)
            .collect();
        out.extend(self.rays.iter().enumerate().filter(|(_, (a, _))| *a == v).map(|(i, _)| nb + i));
        out
    }

    /// Recomputes vertex and ray coordinates with a different projection frame
    /// `(<x, g_1>, .., <x, g_{n-1}>)`.
    pub fn reproject(&self, frame: &[QVec]) -> DiscriminantGraph {
        let mut g = self.clone();
        g.vertices = self.source_vertices.iter().map(|x| frame.iter().map(|fi| dot(x, fi)).collect()).collect();
        g.rays = self
            .rays
            .iter()
            .zip(&self.source_directions)
            .map(|((v, _), d)| {
                let p: QVec = frame.iter().map(|fi| dot(d, fi)).collect();
                (*v, int_to_q(&primitive_integer(&p)))
            })
            .collect();
        g
    }

    /// Replaces the label of edge `e` by its negative (and the monodromy by its inverse).
    pub fn negate_label(&mut self, e: usize) {
        let label = &mut self.edge_labels[e];
        if let Some(d) = label.delta.as_mut() {
            *d = d.iter().map(|x| -x).collect();
        }
        if let Some(a) = label.coefficients.as_mut() {
            *a = a.iter().map(|x| -x).collect();
        }
        label.monodromy = unipotent_inverse(&label.monodromy);
    }
}

/// Inverse of a unipotent `T` with `(T - I)^2 = 0`, namely `2I - T`.
pub fn unipotent_inverse(t: &IntMatrix) -> IntMatrix {
    let n = t.rows();
    let mut out = IntMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = if i == j { BigInt::from(2) - &t[(i, j)] } else { -t[(i, j)].clone() };
        }
    }
    out
}

fn sorted_pair(a: QVec, b: QVec) -> (QVec, QVec) {
    if lex_cmp(&a, &b).is_le() {
        (a, b)
    } else {
        (b, a)
    }
}

pub fn discriminant_graph(p: &MomentPolytope, b: &AdaptedBasis) -> Result<DiscriminantGraph> {
    let n = p.dim();
    if b.rank() != n {
        return Err(Error::DimensionMismatch { expected: n, got: b.rank() });
    }
    let mut g = DiscriminantGraph::empty(n);
    g.source_vertices = p.vertices.clone();
    g.vertices = p.vertices.iter().map(|v| b.project(v)).collect();
    g.vertex_cones = (0..p.vertices.len())
        .map(|v| {
            let mut c: Vec<QVec> = p.active_at_vertex(v).iter().map(|&i| p.normals[i].clone()).collect();
            c.sort_by(|x, y| lex_cmp(x, y));
            c
        })
        .collect();

    let mut bounded_labels = Vec::new();
    let mut ray_labels = Vec::new();
    for edge in &p.skeleton {
        let label = label_edge(p, b, edge.active())?;
        match edge {
            SkeletonEdge::Bounded { from, to, .. } => {
                g.bounded_edges.push((*from, *to));
                bounded_labels.push(label);
            }
            SkeletonEdge::Ray { from, direction, .. } => {
                let proj = b.project(direction);
                g.rays.push((*from, int_to_q(&primitive_integer(&proj))));
                g.source_directions.push(direction.clone());
                ray_labels.push(label);
            }
        }
    }
    g.edge_labels = bounded_labels;
    g.edge_labels.extend(ray_labels);
    g.vertex_types = (0..g.vertices.len())
        .map(|v| if n == 3 && g.valence(v) == 3 { FiberType::Positive } else { FiberType::Unclassified })
        .collect();
    if g.bounded_edges.is_empty() {
        g.warnings.push("degenerate graph: no bounded edges".into());
    }
    if g.ambient_dim() == 2 {
        g.warnings.extend(crossing_warnings(&g));
    }
    Ok(g)
}

fn label_edge(p: &MomentPolytope, b: &AdaptedBasis, active: &[usize]) -> Result<EdgeLabel> {
    let n = p.dim();
    if n != 3 || active.len() != 2 {
        return Ok(EdgeLabel {
            pair: None,
            delta: None,
            coefficients: None,
            monodromy: IntMatrix::identity(n),
            fiber: FiberType::Unclassified,
        });
    }
    let (n1, n2) = sorted_pair(p.normals[active[0]].clone(), p.normals[active[1]].clone());
    let delta = sub(&n1, &n2);
    let a = b.sublattice_coordinates(&delta)?;
    Ok(EdgeLabel {
        monodromy: monodromy_from_coefficients(&a),
        pair: Some((n1, n2)),
        delta: Some(delta),
        coefficients: Some(a),
        fiber: FiberType::Generic,
    })
}

fn cross(a: &[Rational], b: &[Rational]) -> Rational {
    &a[0] * &b[1] - &a[1] * &b[0]
}

struct Piece {
    start: QVec,
    dir: QVec,
    bounded: bool,
    endpoints: Vec<usize>,
}

fn in_range(s: &Rational, bounded: bool) -> bool {
    !s.is_negative() && (!bounded || *s <= Rational::one())
}

fn pieces_conflict(p: &Piece, q: &Piece) -> bool {
    let shared = p.endpoints.iter().any(|v| q.endpoints.contains(v));
    let w = sub(&q.start, &p.start);
    let c = cross(&p.dir, &q.dir);
    if !c.is_zero() {
        let s = cross(&w, &q.dir) / &c;
        let t = cross(&w, &p.dir) / &c;
        if !(in_range(&s, p.bounded) && in_range(&t, q.bounded)) {
            return false;
        }
        // meeting at a shared vertex is expected
        let at_p_end = s.is_zero() || (p.bounded && s.is_one());
        let at_q_end = t.is_zero() || (q.bounded && t.is_one());
        return !(shared && at_p_end && at_q_end);
    }
    if !cross(&w, &p.dir).is_zero() {
        return false;
    }
    // collinear: intersect the parameter intervals along p.dir (None = unbounded)
    let dd = dot(&p.dir, &p.dir);
    let t0 = dot(&w, &p.dir) / &dd;
    let step = dot(&q.dir, &p.dir) / &dd;
    let t1 = &t0 + &step;
    let q_interval: (Option<Rational>, Option<Rational>) = match (q.bounded, step.is_positive()) {
        (true, true) => (Some(t0), Some(t1)),
        (true, false) => (Some(t1), Some(t0)),
        (false, true) => (Some(t0), None),
        (false, false) => (None, Some(t0)),
    };
    let p_hi = p.bounded.then(Rational::one);
    let lo = match q_interval.0 {
        Some(x) if x > Rational::zero() => x,
        _ => Rational::zero(),
    };
    let hi = match (p_hi, q_interval.1) {
        (Some(a), Some(b)) => Some(if a < b { a } else { b }),
        (a, b) => a.or(b),
    };
    hi.is_none_or(|h| h > lo)
}

fn crossing_warnings(g: &DiscriminantGraph) -> Vec<String> {
    let mut pieces = Vec::new();
    for &(a, b) in &g.bounded_edges {
        pieces.push(Piece {
            start: g.vertices[a].clone(),
            dir: sub(&g.vertices[b], &g.vertices[a]),
            bounded: true,
            endpoints: vec![a, b],
        });
    }
    for (v, d) in &g.rays {
        pieces.push(Piece { start: g.vertices[*v].clone(), dir: d.clone(), bounded: false, endpoints: vec![*v] });
    }
    let mut out = Vec::new();
    for i in 0..pieces.len() {
        for j in i + 1..pieces.len() {
            if pieces_conflict(&pieces[i], &pieces[j]) {
                out.push(format!("NonInjectiveProjection: edges {i} and {j} cross"));
            }
        }
    }
    out
}

/// Outcome of the vertex relation check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexConsistency {
    pub consistent: bool,
    pub offending_vertices: Vec<usize>,
}

/// At each trivalent vertex with cone `r_1 < r_2 < r_3`, orient the incident edges cyclically
/// `(r_1,r_2), (r_2,r_3), (r_3,r_1)` and check `Σ ±δ = 0` and `Π T^{±1} = I`.
pub fn vertex_consistency(g: &DiscriminantGraph) -> VertexConsistency {
    let mut offending = Vec::new();
    for v in 0..g.vertices.len() {
        let cone = &g.vertex_cones[v];
        if g.n != 3 || cone.len() != 3 || g.valence(v) != 3 {
            continue;
        }
        let cyclic = [(0, 1), (1, 2), (2, 0)];
        let incident = g.incident_edges(v);
        let mut sum = vec![Rational::zero(); 3];
        let mut prod = IntMatrix::identity(3);
        let mut ok = true;
        for (a, b) in cyclic {
            let (x, y) = (&cone[a], &cone[b]);
            let found = incident.iter().find_map(|&e| {
                let label = &g.edge_labels[e];
                let (p, q) = label.pair.as_ref()?;
                if p == x && q == y {
                    Some((e, 1))
                } else if p == y && q == x {
                    Some((e, -1))
                } else {
                    None
                }
            });
            let Some((e, eps)) = found else {
                ok = false;
                break;
            };
            let label = &g.edge_labels[e];
            let delta = label.delta.as_ref().expect("labelled edge");
            for (s, d) in sum.iter_mut().zip(delta) {
                if eps > 0 {
                    *s += d;
                } else {
                    *s -= d;
                }
            }
            let t = if eps > 0 { label.monodromy.clone() } else { unipotent_inverse(&label.monodromy) };
            prod = prod.mul(&t);
        }
        if !ok || !sum.iter().all(Zero::is_zero) || !prod.is_identity() {
            offending.push(v);
        }
    }
    VertexConsistency { consistent: offending.is_empty(), offending_vertices: offending }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualFibrationData {
    pub graph: DiscriminantGraph,
    /// Primitive annihilator of each edge class, in coordinates dual to `f`.
    pub circle_classes: Vec<Option<Vec<BigInt>>>,
}

/// Transposes monodromy to `(T^T)^{-1}`, swaps positive and negative vertices and attaches
/// the circle classes `(n_1 - n_2)^⊥`.
pub fn dualize(g: &DiscriminantGraph) -> Result<DualFibrationData> {
    let vc = vertex_consistency(g);
    if !vc.consistent {
        return Err(Error::InconsistentGraph(format!("vertex relations fail at {:?}", vc.offending_vertices)));
    }
    let mut dual = g.clone();
    let mut circle_classes = Vec::with_capacity(g.edge_labels.len());
    for label in &mut dual.edge_labels {
        label.monodromy = inverse_transpose(&label.monodromy)?;
        label.fiber = label.fiber.swapped();
        circle_classes.push(label.coefficients.as_ref().and_then(|a| annihilator(a)));
    }
    for t in &mut dual.vertex_types {
        *t = t.swapped();
    }
    Ok(DualFibrationData { graph: dual, circle_classes })
}

fn inverse_transpose(t: &IntMatrix) -> Result<IntMatrix> {
    t.transpose()
        .unimodular_inverse()
        .ok_or_else(|| Error::InconsistentGraph("monodromy is not unimodular".into()))
}

/// Primitive generator of `a^⊥` for `a ∈ Z^2`.
fn annihilator(a: &[BigInt]) -> Option<Vec<BigInt>> {
    if a.len() != 2 {
        return None;
    }
    if a.iter().all(Zero::is_zero) {
        return None;
    }
    let mut v = primitive_integer(&int_to_q(&[-a[1].clone(), a[0].clone()]));
    sign_normalize(&mut v);
    Some(v)
}
