//! Minkowski decompositions of lattice polygons, the associated Altmann cones, and the
//! hyperplane arrangement carrying the discriminant of the smoothing.

use std::cmp::Ordering;
use std::fmt;

use num_integer::Integer;
use num_traits::Zero;

use crate::cones::{Cone, GorensteinData};
use crate::error::{Error, Result};
use crate::fibration::DiscriminantGraph;
use crate::lattice::{int_to_q, lex_cmp, primitive_integer, q, LatticeSpec, QVec, RatMatrix, Rational};
use crate::par::Execution;
use crate::polyhedral::cone_from_inequalities;

pub type Pt = [i64; 2];

/// Default bound on the number of unit edges in the decomposition search.
pub const DEFAULT_UNIT_EDGE_BUDGET: usize = 16;

fn cross(a: Pt, b: Pt) -> i64 {
    a[0] * b[1] - a[1] * b[0]
}

fn minus(a: Pt, b: Pt) -> Pt {
    [a[0] - b[0], a[1] - b[1]]
}

fn plus(a: Pt, b: Pt) -> Pt {
    [a[0] + b[0], a[1] + b[1]]
}

/// Counterclockwise angle order starting at direction (1, 0).
pub fn angle_cmp(a: Pt, b: Pt) -> Ordering {
    let half = |p: Pt| if p[1] > 0 || (p[1] == 0 && p[0] > 0) { 0 } else { 1 };
    half(a).cmp(&half(b)).then_with(|| 0.cmp(&cross(a, b)))
}

/// A convex lattice polygon, possibly degenerate (a point or a segment), with vertices listed
/// counterclockwise starting from the lexicographically smallest one.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticePolygon {
    vertices: Vec<Pt>,
}

impl fmt::Display for LatticePolygon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.vertices.iter().map(|v| format!("({},{})", v[0], v[1])).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

impl LatticePolygon {
    /// Validates a cyclically ordered list of extreme points (either orientation).
    pub fn new(vertices: Vec<Pt>) -> Result<LatticePolygon> {
        let hull = LatticePolygon::hull(&vertices);
        let mut given = vertices.clone();
        given.sort();
        given.dedup();
        let mut extreme = hull.vertices.clone();
        extreme.sort();
        if given != extreme || given.len() != vertices.len() {
            return Err(Error::Invalid("polygon vertices are not the extreme points of a convex polygon".into()));
        }
        if vertices.len() >= 3 {
            let k = vertices.len();
            let turns: Vec<i64> = (0..k)
                .map(|i| cross(minus(vertices[(i + 1) % k], vertices[i]), minus(vertices[(i + 2) % k], vertices[(i + 1) % k])))
                .collect();
            if !(turns.iter().all(|&t| t > 0) || turns.iter().all(|&t| t < 0)) {
                return Err(Error::Invalid("polygon vertices are not in cyclic order".into()));
            }
        }
        Ok(hull)
    }

    /// Convex hull of arbitrary points.
    pub fn hull(points: &[Pt]) -> LatticePolygon {
        let mut pts = points.to_vec();
        pts.sort();
        pts.dedup();
        if pts.len() <= 2 {
            return LatticePolygon { vertices: pts };
        }
        // monotone chain, strict turns only
        let mut lower: Vec<Pt> = Vec::new();
        for &p in &pts {
            while lower.len() >= 2 && cross(minus(lower[lower.len() - 1], lower[lower.len() - 2]), minus(p, lower[lower.len() - 1])) <= 0 {
                lower.pop();
            }
            lower.push(p);
        }
        let mut upper: Vec<Pt> = Vec::new();
        for &p in pts.iter().rev() {
            while upper.len() >= 2 && cross(minus(upper[upper.len() - 1], upper[upper.len() - 2]), minus(p, upper[upper.len() - 1])) <= 0 {
                upper.pop();
            }
            upper.push(p);
        }
        lower.pop();
        upper.pop();
        lower.extend(upper);
        if lower.len() == 2 && lower[0] == lower[1] {
            lower.pop();
        }
        LatticePolygon { vertices: lower }
    }

    pub fn vertices(&self) -> &[Pt] {
        &self.vertices
    }

    pub fn is_point(&self) -> bool {
        self.vertices.len() == 1
    }

    pub fn is_segment(&self) -> bool {
        self.vertices.len() == 2
    }

    /// Edges as vertex pairs; a segment has one edge and a point none.
    pub fn edges(&self) -> Vec<(Pt, Pt)> {
        match self.vertices.len() {
            0 | 1 => Vec::new(),
            2 => vec![(self.vertices[0], self.vertices[1])],
            k => (0..k).map(|i| (self.vertices[i], self.vertices[(i + 1) % k])).collect(),
        }
    }

    /// Boundary edge vectors, traversing a segment there and back.
    fn boundary_vectors(&self) -> Vec<Pt> {
        match self.vertices.len() {
            0 | 1 => Vec::new(),
            2 => {
                let d = minus(self.vertices[1], self.vertices[0]);
                vec![d, [-d[0], -d[1]]]
            }
            k => (0..k).map(|i| minus(self.vertices[(i + 1) % k], self.vertices[i])).collect(),
        }
    }

    pub fn support(&self, u: Pt) -> i64 {
        self.vertices.iter().map(|v| u[0] * v[0] + u[1] * v[1]).max().unwrap_or(0)
    }

    pub fn translate(&self, t: Pt) -> LatticePolygon {
        LatticePolygon { vertices: self.vertices.iter().map(|&v| plus(v, t)).collect() }
    }

    pub fn lex_min(&self) -> Pt {
        self.vertices[0]
    }

    pub fn minkowski_sum(&self, other: &LatticePolygon) -> LatticePolygon {
        let pts: Vec<Pt> = self.vertices.iter().flat_map(|&a| other.vertices.iter().map(move |&b| plus(a, b))).collect();
        LatticePolygon::hull(&pts)
    }

    /// Primitive edge normals (outward), used for support-function comparisons.
    pub fn edge_normals(&self) -> Vec<Pt> {
        self.boundary_vectors().iter().map(|d| [d[1], -d[0]]).collect()
    }
}

/// Primitive counterclockwise edge vectors with multiplicities (lattice lengths).
pub fn edge_vector_multiset(p: &LatticePolygon) -> Vec<(Pt, usize)> {
    let mut out: Vec<(Pt, usize)> = Vec::new();
    for d in p.boundary_vectors() {
        let g = d[0].gcd(&d[1]);
        let prim = [d[0] / g, d[1] / g];
        match out.iter_mut().find(|(v, _)| *v == prim) {
            Some((_, m)) => *m += g as usize,
            None => out.push((prim, g as usize)),
        }
    }
    out.sort_by(|a, b| angle_cmp(a.0, b.0));
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MinkowskiDecomposition {
    /// Summands `R_0..R_p`, each translated so its lexicographically smallest vertex is the origin.
    pub summands: Vec<LatticePolygon>,
}

impl MinkowskiDecomposition {
    pub fn p(&self) -> usize {
        self.summands.len().saturating_sub(1)
    }

    /// Translation `t` with `Σ R_k + t = P`, if the decomposition is valid for `P`.
    pub fn translation_to(&self, p: &LatticePolygon) -> Option<Pt> {
        let sum_min = self.summands.iter().fold([0, 0], |acc, r| plus(acc, r.lex_min()));
        let t = minus(p.lex_min(), sum_min);
        let mut normals = p.edge_normals();
        for r in &self.summands {
            normals.extend(r.edge_normals());
        }
        let ok = normals.iter().all(|&u| {
            let lhs: i64 = self.summands.iter().map(|r| r.support(u)).sum::<i64>() + u[0] * t[0] + u[1] * t[1];
            lhs == p.support(u)
        });
        ok.then_some(t)
    }
}

fn summand_from_counts(dirs: &[Pt], counts: &[usize]) -> LatticePolygon {
    let mut pts = vec![[0, 0]];
    let mut cur = [0, 0];
    for (d, &c) in dirs.iter().zip(counts) {
        if c > 0 {
            cur = plus(cur, [d[0] * c as i64, d[1] * c as i64]);
            pts.push(cur);
        }
    }
    let h = LatticePolygon::hull(&pts);
    let m = h.lex_min();
    h.translate([-m[0], -m[1]])
}

fn le(a: &[usize], b: &[usize]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

fn sub_counts(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Nonzero zero-sum sub-multisets of the edge multiset, as count vectors in descending order.
fn zero_sum_groups(dirs: &[Pt], counts: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; counts.len()];
    fn rec(i: usize, dirs: &[Pt], counts: &[usize], cur: &mut Vec<usize>, sum: Pt, out: &mut Vec<Vec<usize>>) {
        if i == counts.len() {
            if sum == [0, 0] && cur.iter().any(|&c| c > 0) {
                out.push(cur.clone());
            }
            return;
        }
        for c in 0..=counts[i] {
            cur[i] = c;
            let s = plus(sum, [dirs[i][0] * c as i64, dirs[i][1] * c as i64]);
            rec(i + 1, dirs, counts, cur, s, out);
        }
        cur[i] = 0;
    }
    rec(0, dirs, counts, &mut cur, [0, 0], &mut out);
    out.sort_by(|a, b| b.cmp(a));
    out
}

/// All nontrivial (`p >= 1`) lattice Minkowski decompositions of `poly`.
pub fn minkowski_decompositions(poly: &LatticePolygon, maximal_only: bool, budget: usize, exec: Execution) -> Result<Vec<MinkowskiDecomposition>> {
    let multiset = edge_vector_multiset(poly);
    let units: usize = multiset.iter().map(|(_, m)| m).sum();
    if units > budget {
        return Err(Error::TooLarge { units, budget });
    }
    let dirs: Vec<Pt> = multiset.iter().map(|(d, _)| *d).collect();
    let counts: Vec<usize> = multiset.iter().map(|(_, m)| *m).collect();
    let groups = zero_sum_groups(&dirs, &counts);
    let minimal: Vec<bool> = groups
        .iter()
        .map(|g| !groups.iter().any(|h| h != g && le(h, g)))
        .collect();

    // a canonical partition lists group indices in nondecreasing order; the first group must
    // contain the first edge, so the top-level branches are exactly those groups
    let first = counts.iter().position(|&c| c > 0);
    let branches: Vec<usize> = match first {
        Some(f) => (0..groups.len()).filter(|&i| groups[i][f] > 0).collect(),
        None => Vec::new(),
    };
    let per_branch = exec.map(&branches, |&idx| {
        let mut out = Vec::new();
        let mut acc = vec![idx];
        partitions_from_ordered(&groups, &sub_counts(&counts, &groups[idx]), idx, &mut acc, &mut out);
        out
    });
    let mut result: Vec<MinkowskiDecomposition> = per_branch
        .into_iter()
        .flatten()
        .filter(|part| part.len() >= 2)
        .filter(|part| !maximal_only || part.iter().all(|&i| minimal[i]))
        .map(|part| {
            let mut summands: Vec<LatticePolygon> = part.iter().map(|&i| summand_from_counts(&dirs, &groups[i])).collect();
            summands.sort();
            MinkowskiDecomposition { summands }
        })
        .collect();
    result.sort();
    result.dedup();
    Ok(result)
}

/// Group indices are taken in nondecreasing order, so each multiset of groups appears once.
fn partitions_from_ordered(groups: &[Vec<usize>], remaining: &[usize], start: usize, acc: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if remaining.iter().all(|&c| c == 0) {
        out.push(acc.clone());
        return;
    }
    for idx in start..groups.len() {
        if le(&groups[idx], remaining) {
            acc.push(idx);
            partitions_from_ordered(groups, &sub_counts(remaining, &groups[idx]), idx, acc, out);
            acc.pop();
        }
    }
}

/// Altmann's cone `σ̃ = Cone(∪_k R_k × {e_k}) ⊂ L ⊕ Z^{p+1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AltmannCone {
    /// Summands with `R_0` shifted so that `Σ R_k = P` exactly.
    pub summands: Vec<LatticePolygon>,
    pub generators: Vec<QVec>,
    pub cone: Cone,
    pub m0_prime: QVec,
    /// `(3 + p) × 3` matrix of the map `N → N'`, `(l, a) ↦ (l; a, .., a)`.
    pub embedding: RatMatrix,
}

impl AltmannCone {
    pub fn p(&self) -> usize {
        self.summands.len() - 1
    }

    pub fn lattice(&self) -> LatticeSpec {
        LatticeSpec::standard(2 + self.summands.len())
    }
}

/// The cone over `P × {1}` in `N = L ⊕ Z n_0`.
pub fn polygon_cone(p: &LatticePolygon) -> Result<Cone> {
    let gens: Vec<QVec> = p.vertices().iter().map(|v| vec![q(v[0]), q(v[1]), q(1)]).collect();
    Cone::new(LatticeSpec::standard(3), &gens)
}

pub fn altmann_cone(p: &LatticePolygon, d: &MinkowskiDecomposition) -> Result<AltmannCone> {
    if d.summands.is_empty() {
        return Err(Error::InvalidDecomposition("no summands".into()));
    }
    let t = d
        .translation_to(p)
        .ok_or_else(|| Error::InvalidDecomposition("summands do not add up to the polygon".into()))?;
    let mut summands = d.summands.clone();
    summands[0] = summands[0].translate(t);
    let k = summands.len();
    let dim = 2 + k;
    let mut generators = Vec::new();
    for (i, r) in summands.iter().enumerate() {
        for v in r.vertices() {
            let mut g = vec![q(v[0]), q(v[1])];
            g.extend((0..k).map(|j| q((i == j) as i64)));
            generators.push(g);
        }
    }
    let cone = Cone::new(LatticeSpec::standard(dim), &generators)?;
    let mut m0_prime = vec![q(0), q(0)];
    m0_prime.extend((0..k).map(|_| q(1)));
    let mut embedding = RatMatrix::zeros(dim, 3);
    embedding[(0, 0)] = q(1);
    embedding[(1, 1)] = q(1);
    for j in 0..k {
        embedding[(2 + j, 2)] = q(1);
    }
    Ok(AltmannCone { summands, generators, cone, m0_prime, embedding })
}

/// Whether `σ̃` is Gorenstein of degree `m0' = Σ e_k*`.
pub fn altmann_is_gorenstein(a: &AltmannCone) -> bool {
    crate::cones::gorenstein_degree(&a.cone).map(|g| g.m0 == a.m0_prime).unwrap_or(false)
}

/// Checks `σ = J^{-1}(σ̃)` exactly: the facets of `σ̃` are pulled back through the embedding
/// and the resulting cone is compared with `σ`.
pub fn verify_embedding(g: &GorensteinData, a: &AltmannCone) -> bool {
    let jt = a.embedding.transpose();
    let pulled: Vec<QVec> = a.cone.facet_normals().iter().map(|u| jt.mul_vec(u)).collect();
    let gens = cone_from_inequalities(&pulled, a.embedding.cols());
    if !gens.lineality.is_empty() {
        return false;
    }
    let mut expected: Vec<QVec> = g.cone.rays().iter().map(|r| int_to_q(&primitive_integer(r))).collect();
    expected.sort_by(|x, y| lex_cmp(x, y));
    gens.rays == expected
}

/// A Gaussian rational `re + i·im`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaussianRational {
    pub re: Rational,
    pub im: Rational,
}

impl GaussianRational {
    pub fn new(re: Rational, im: Rational) -> Self {
        GaussianRational { re, im }
    }

    pub fn zero() -> Self {
        GaussianRational { re: q(0), im: q(0) }
    }

    pub fn sub(&self, o: &Self) -> Self {
        GaussianRational { re: &self.re - &o.re, im: &self.im - &o.im }
    }

    /// `Im(i^k · self)`.
    pub fn im_after_rotation(&self, k: usize) -> Rational {
        match k % 4 {
            0 => self.im.clone(),
            1 => self.re.clone(),
            2 => -self.im.clone(),
            _ => -self.re.clone(),
        }
    }
}

/// Default generic parameters `x_k = i·k`.
pub fn default_parameters(count: usize) -> Vec<GaussianRational> {
    (0..count).map(|k| GaussianRational::new(q(0), q(k as i64))).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmoothingComponent {
    pub k: usize,
    /// The constant `Im(i^{n+1}(x_0 - x_k))` fixing the first coordinate of the plane.
    pub plane_value: Rational,
    /// Primitive generator of the annihilator of `n_1 - n_2` in `L*`.
    pub direction: Pt,
    pub edge: (Pt, Pt),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmoothingDiscriminant {
    pub n: usize,
    pub plane_values: Vec<Rational>,
    pub components: Vec<SmoothingComponent>,
    /// All `p + 1` plane values are distinct.
    pub generic: bool,
}

impl SmoothingDiscriminant {
    pub fn distinct_planes(&self) -> usize {
        let mut vals: Vec<&Rational> = self.components.iter().map(|c| &c.plane_value).collect();
        vals.sort();
        vals.dedup();
        vals.len()
    }
}

fn annihilator(d: Pt) -> Pt {
    let g = d[0].gcd(&d[1]);
    let mut v = [-d[1] / g, d[0] / g];
    if v[0] < 0 || (v[0] == 0 && v[1] < 0) {
        v = [-v[0], -v[1]];
    }
    v
}

pub fn smoothing_discriminant(d: &MinkowskiDecomposition, x: &[GaussianRational], n: usize) -> Result<SmoothingDiscriminant> {
    let k = d.summands.len();
    if x.len() != k {
        return Err(Error::DimensionMismatch { expected: k, got: x.len() });
    }
    let plane_values: Vec<Rational> = x.iter().map(|xk| x[0].sub(xk).im_after_rotation(n + 1)).collect();
    let mut sorted = plane_values.clone();
    sorted.sort();
    sorted.dedup();
    let generic = sorted.len() == plane_values.len();
    let mut components = Vec::new();
    for (i, r) in d.summands.iter().enumerate() {
        for (a, b) in r.edges() {
            components.push(SmoothingComponent {
                k: i,
                plane_value: plane_values[i].clone(),
                direction: annihilator(minus(b, a)),
                edge: (a, b),
            });
        }
    }
    Ok(SmoothingDiscriminant { n, plane_values, components, generic })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphSummary {
    pub vertices: usize,
    pub bounded_edges: usize,
    pub rays: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionReport {
    pub m0: QVec,
    pub resolutions: Vec<GraphSummary>,
    pub smoothing_components: usize,
    pub planes_at_x: usize,
    pub planes_in_limit: usize,
    /// Whether all smoothing planes coincide as `x → 0`.
    pub collapses: bool,
    pub lines: Vec<(Rational, Pt)>,
}

/// Compares the resolution side (discriminant graphs) with the smoothing side (line arrangement)
/// of an extremal transition.
pub fn extremal_transition_report(g: &GorensteinData, resolutions: &[DiscriminantGraph], smoothing: &SmoothingDiscriminant) -> TransitionReport {
    let limit: Vec<Rational> = smoothing.components.iter().map(|_| Rational::zero()).collect();
    let mut limit_sorted = limit.clone();
    limit_sorted.dedup();
    TransitionReport {
        m0: g.m0.clone(),
        resolutions: resolutions
            .iter()
            .map(|r| GraphSummary { vertices: r.vertices.len(), bounded_edges: r.bounded_edges.len(), rays: r.rays.len() })
            .collect(),
        smoothing_components: smoothing.components.len(),
        planes_at_x: smoothing.distinct_planes(),
        planes_in_limit: limit_sorted.len(),
        collapses: limit_sorted.len() <= 1,
        lines: smoothing.components.iter().map(|c| (c.plane_value.clone(), c.direction)).collect(),
    }
}
