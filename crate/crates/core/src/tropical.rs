//! Exact tropical curves in the plane: the corner locus of a max-plus polynomial with rational
//! heights, its dual regular subdivision, and the comparison with discriminant graphs.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::fibration::DiscriminantGraph;
use crate::lattice::{primitive_integer, q, to_f64, QVec, Rational};

pub type Exponent = [i64; 2];

/// `max_{(a,b)} (c_{a,b} + a x + b y)`, with heights `c` measured in units of `unit`.
///
/// For the mirror family the heights are `φ(a,b) log t = -φ(a,b) |log t|`, stored as `c = -φ`
/// with `unit = |log t|`, so the curve is exact in height units and scaled by `unit` for plotting.
#[derive(Clone, Debug, PartialEq)]
pub struct TropicalPolynomial {
    pub support: Vec<Exponent>,
    pub heights: Vec<Rational>,
    pub unit: f64,
}

impl TropicalPolynomial {
    pub fn new(support: Vec<Exponent>, heights: Vec<Rational>, unit: f64) -> Result<TropicalPolynomial> {
        if support.len() != heights.len() {
            return Err(Error::DimensionMismatch { expected: support.len(), got: heights.len() });
        }
        if support.len() < 2 {
            return Err(Error::DegenerateHeights("fewer than two terms".into()));
        }
        let mut sorted = support.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != support.len() {
            return Err(Error::DegenerateHeights("repeated exponent".into()));
        }
        if !(unit.is_finite() && unit > 0.0) {
            return Err(Error::Invalid(format!("unit must be positive, got {unit}")));
        }
        Ok(TropicalPolynomial { support, heights, unit })
    }

    /// Heights `-φ` in units of `|log t|`, for `0 < t < 1`.
    pub fn from_phi(support: Vec<Exponent>, phi: &[Rational], t: f64) -> Result<TropicalPolynomial> {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::Invalid(format!("t must lie in (0, 1), got {t}")));
        }
        TropicalPolynomial::new(support, phi.iter().map(|p| -p).collect(), -t.ln())
    }

    pub fn term(&self, i: usize, x: &[Rational]) -> Rational {
        &self.heights[i] + q(self.support[i][0]) * &x[0] + q(self.support[i][1]) * &x[1]
    }

    pub fn evaluate(&self, x: &[Rational]) -> Rational {
        (0..self.support.len()).map(|i| self.term(i, x)).max().expect("at least two terms")
    }

    pub fn is_affinely_spanning(&self) -> bool {
        let p0 = self.support[0];
        self.support.iter().any(|p| {
            self.support
                .iter()
                .any(|r| cross(sub(*p, p0), sub(*r, p0)) != 0)
        })
    }
}

fn sub(a: Exponent, b: Exponent) -> Exponent {
    [a[0] - b[0], a[1] - b[1]]
}

fn cross(a: Exponent, b: Exponent) -> i64 {
    a[0] * b[1] - a[1] * b[0]
}

fn lattice_length(d: Exponent) -> i64 {
    d[0].gcd(&d[1])
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TropicalEdge {
    pub from: usize,
    pub to: usize,
    /// Primitive direction from `from` to `to`.
    pub direction: [i64; 2],
    pub multiplicity: i64,
    /// Endpoints (support indices) of the dual edge of the subdivision.
    pub dual: (usize, usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TropicalRay {
    pub from: usize,
    pub direction: [i64; 2],
    pub multiplicity: i64,
    pub dual: (usize, usize),
}

/// A full line, which only occurs when the support is collinear.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TropicalLine {
    pub point: QVec,
    pub direction: [i64; 2],
    pub multiplicity: i64,
    pub dual: (usize, usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TropicalCurve {
    /// Vertices in height units.
    pub vertices: Vec<QVec>,
    pub bounded_edges: Vec<TropicalEdge>,
    pub rays: Vec<TropicalRay>,
    pub lines: Vec<TropicalLine>,
    /// Dual subdivision: for each vertex, the support indices of its cell in counterclockwise
    /// order (extreme points only).
    pub cells: Vec<Vec<usize>>,
    pub support: Vec<Exponent>,
    pub unit: f64,
}

/// One piece of the spine in plot units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpinePiece {
    Segment([f64; 2], [f64; 2]),
    Ray([f64; 2], [f64; 2]),
    Line([f64; 2], [f64; 2]),
}

impl SpinePiece {
    pub fn distance(&self, p: [f64; 2]) -> f64 {
        let (a, d, lo, hi) = match *self {
            SpinePiece::Segment(a, b) => (a, [b[0] - a[0], b[1] - a[1]], 0.0, 1.0),
            SpinePiece::Ray(a, d) => (a, d, 0.0, f64::INFINITY),
            SpinePiece::Line(a, d) => (a, d, f64::NEG_INFINITY, f64::INFINITY),
        };
        let dd = d[0] * d[0] + d[1] * d[1];
        let s = if dd == 0.0 { 0.0 } else { (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / dd).clamp(lo, hi) };
        let c = [a[0] + s * d[0], a[1] + s * d[1]];
        ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)).sqrt()
    }

    /// Portion inside the square `[lo, hi]^2`, as a segment.
    pub fn clip(&self, lo: f64, hi: f64) -> Option<([f64; 2], [f64; 2])> {
        let (a, d, mut s0, mut s1) = match *self {
            SpinePiece::Segment(a, b) => (a, [b[0] - a[0], b[1] - a[1]], 0.0, 1.0),
            SpinePiece::Ray(a, d) => (a, d, 0.0, f64::INFINITY),
            SpinePiece::Line(a, d) => (a, d, f64::NEG_INFINITY, f64::INFINITY),
        };
        for k in 0..2 {
            if d[k] == 0.0 {
                if a[k] < lo || a[k] > hi {
                    return None;
                }
            } else {
                let (t0, t1) = ((lo - a[k]) / d[k], (hi - a[k]) / d[k]);
                s0 = s0.max(t0.min(t1));
                s1 = s1.min(t0.max(t1));
            }
        }
        (s0 <= s1 && s0.is_finite() && s1.is_finite())
            .then(|| ([a[0] + s0 * d[0], a[1] + s0 * d[1]], [a[0] + s1 * d[0], a[1] + s1 * d[1]]))
    }
}

impl TropicalCurve {
    pub fn vertex_f64(&self, v: usize) -> [f64; 2] {
        [to_f64(&self.vertices[v][0]) * self.unit, to_f64(&self.vertices[v][1]) * self.unit]
    }

    pub fn pieces(&self) -> Vec<SpinePiece> {
        let dir = |d: [i64; 2]| [d[0] as f64, d[1] as f64];
        let mut out: Vec<SpinePiece> = self
            .bounded_edges
            .iter()
            .map(|e| SpinePiece::Segment(self.vertex_f64(e.from), self.vertex_f64(e.to)))
            .collect();
        out.extend(self.rays.iter().map(|r| SpinePiece::Ray(self.vertex_f64(r.from), dir(r.direction))));
        out.extend(self.lines.iter().map(|l| {
            SpinePiece::Line([to_f64(&l.point[0]) * self.unit, to_f64(&l.point[1]) * self.unit], dir(l.direction))
        }));
        out
    }

    pub fn distance(&self, p: [f64; 2]) -> f64 {
        self.pieces().iter().map(|s| s.distance(p)).fold(f64::INFINITY, f64::min)
    }

    /// `Σ multiplicity · outgoing direction` at each vertex.
    pub fn balancing_defects(&self) -> Vec<[i64; 2]> {
        let mut out = vec![[0i64; 2]; self.vertices.len()];
        for e in &self.bounded_edges {
            for (k, d) in e.direction.iter().enumerate() {
                out[e.from][k] += e.multiplicity * d;
                out[e.to][k] -= e.multiplicity * d;
            }
        }
        for r in &self.rays {
            for (k, d) in r.direction.iter().enumerate() {
                out[r.from][k] += r.multiplicity * d;
            }
        }
        out
    }

    pub fn is_balanced(&self) -> bool {
        self.balancing_defects().iter().all(|d| *d == [0, 0])
    }

    pub fn valence(&self, v: usize) -> usize {
        self.bounded_edges.iter().filter(|e| e.from == v || e.to == v).count() + self.rays.iter().filter(|r| r.from == v).count()
    }
}

/// Counterclockwise convex hull (extreme points only) of the given support indices.
fn hull_indices(support: &[Exponent], idx: &[usize]) -> Vec<usize> {
    let mut pts: Vec<usize> = idx.to_vec();
    pts.sort_by_key(|&i| support[i]);
    pts.dedup_by_key(|i| support[*i]);
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<usize> = Vec::new();
    for &i in &pts {
        while lower.len() >= 2 {
            let (a, b) = (support[lower[lower.len() - 2]], support[lower[lower.len() - 1]]);
            if cross(sub(b, a), sub(support[i], a)) <= 0 {
                lower.pop();
            } else {
                break;
            }
        }
        lower.push(i);
    }
    let mut upper: Vec<usize> = Vec::new();
    for &i in pts.iter().rev() {
        while upper.len() >= 2 {
            let (a, b) = (support[upper[upper.len() - 2]], support[upper[upper.len() - 1]]);
            if cross(sub(b, a), sub(support[i], a)) <= 0 {
                upper.pop();
            } else {
                break;
            }
        }
        upper.push(i);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn primitive_i64(d: Exponent) -> [i64; 2] {
    let g = lattice_length(d);
    [d[0] / g, d[1] / g]
}

/// Outward normal of the counterclockwise edge `a -> b`, rotated clockwise.
fn outward_normal(a: Exponent, b: Exponent) -> [i64; 2] {
    let d = sub(b, a);
    primitive_i64([d[1], -d[0]])
}

/// (cell, outward normal, lattice length) of one cell edge.
type CellEdge = (usize, [i64; 2], i64);

pub fn tropical_curve(tp: &TropicalPolynomial) -> Result<TropicalCurve> {
    let k = tp.support.len();
    let s = &tp.support;
    if !tp.is_affinely_spanning() {
        return Ok(collinear_curve(tp));
    }

    // vertices: points where three affinely independent terms tie and dominate
    let mut found: BTreeMap<QVec, Vec<usize>> = BTreeMap::new();
    for i in 0..k {
        for j in i + 1..k {
            for l in j + 1..k {
                let (u, v) = (sub(s[j], s[i]), sub(s[l], s[i]));
                let det = cross(u, v);
                if det == 0 {
                    continue;
                }
                // u·x = c_i - c_j, v·x = c_i - c_l
                let r1 = &tp.heights[i] - &tp.heights[j];
                let r2 = &tp.heights[i] - &tp.heights[l];
                let d = q(det);
                let x = vec![
                    (&r1 * q(v[1]) - &r2 * q(u[1])) / &d,
                    (&r2 * q(u[0]) - &r1 * q(v[0])) / &d,
                ];
                if found.contains_key(&x) {
                    continue;
                }
                let value = tp.term(i, &x);
                let top = tp.evaluate(&x);
                if value == top {
                    let tied: Vec<usize> = (0..k).filter(|&m| tp.term(m, &x) == top).collect();
                    found.insert(x, tied);
                }
            }
        }
    }

    let vertices: Vec<QVec> = found.keys().cloned().collect();
    let cells: Vec<Vec<usize>> = found.values().map(|t| hull_indices(s, t)).collect();

    // each cell edge is either shared by two cells (a bounded edge) or lies on the boundary (a ray)
    let mut owners: BTreeMap<(usize, usize), Vec<CellEdge>> = BTreeMap::new();
    for (v, cell) in cells.iter().enumerate() {
        let m = cell.len();
        for e in 0..m {
            let (a, b) = (cell[e], cell[(e + 1) % m]);
            let key = (a.min(b), a.max(b));
            owners
                .entry(key)
                .or_default()
                .push((v, outward_normal(s[a], s[b]), lattice_length(sub(s[b], s[a]))));
        }
    }
    let mut bounded_edges = Vec::new();
    let mut rays = Vec::new();
    for (key, own) in owners {
        match own.as_slice() {
            [(v, n, m)] => rays.push(TropicalRay { from: *v, direction: *n, multiplicity: *m, dual: key }),
            [(v, n, m), (w, _, _)] => {
                let diff: Vec<Rational> = (0..2).map(|c| &vertices[*w][c] - &vertices[*v][c]).collect();
                debug_assert!(diff[0].clone() * q(n[1]) == diff[1].clone() * q(n[0]));
                debug_assert!((diff[0].clone() * q(n[0]) + diff[1].clone() * q(n[1])).is_positive());
                bounded_edges.push(TropicalEdge { from: *v, to: *w, direction: *n, multiplicity: *m, dual: key });
            }
            _ => {
                return Err(Error::DegenerateHeights(format!(
                    "subdivision edge {key:?} is shared by {} cells",
                    own.len()
                )))
            }
        }
    }
    Ok(TropicalCurve {
        vertices,
        bounded_edges,
        rays,
        lines: Vec::new(),
        cells,
        support: s.clone(),
        unit: tp.unit,
    })
}

fn collinear_curve(tp: &TropicalPolynomial) -> TropicalCurve {
    let s = &tp.support;
    let p0 = s[0];
    let far = s.iter().max_by_key(|p| {
        let d = sub(**p, p0);
        d[0].abs() + d[1].abs()
    });
    let d = primitive_i64(sub(*far.expect("nonempty"), p0));
    let param = |p: Exponent| {
        let e = sub(p, p0);
        if d[0] != 0 {
            e[0] / d[0]
        } else {
            e[1] / d[1]
        }
    };
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by_key(|&i| param(s[i]));
    // upper hull of (parameter, height)
    let mut hull: Vec<usize> = Vec::new();
    for &i in &order {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let (ta, tb, ti) = (q(param(s[a])), q(param(s[b])), q(param(s[i])));
            let lhs = (&tp.heights[b] - &tp.heights[a]) * (&ti - &ta);
            let rhs = (&tp.heights[i] - &tp.heights[a]) * (&tb - &ta);
            if lhs <= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    let lines = hull
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            let u = sub(s[b], s[a]);
            let uu = q(u[0] * u[0] + u[1] * u[1]);
            let f = (&tp.heights[a] - &tp.heights[b]) / uu;
            TropicalLine {
                point: vec![&f * q(u[0]), &f * q(u[1])],
                direction: [-d[1], d[0]],
                multiplicity: lattice_length(u),
                dual: (a.min(b), a.max(b)),
            }
        })
        .collect();
    TropicalCurve {
        vertices: Vec::new(),
        bounded_edges: Vec::new(),
        rays: Vec::new(),
        lines,
        cells: Vec::new(),
        support: s.clone(),
        unit: tp.unit,
    }
}

/// A graph in the plane with exact vertices and primitive ray directions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlanarGraph {
    pub vertices: Vec<QVec>,
    pub edges: Vec<(usize, usize)>,
    pub rays: Vec<(usize, [i64; 2])>,
}

fn to_i64_pair(v: &[num_bigint::BigInt]) -> [i64; 2] {
    use num_traits::ToPrimitive;
    [v[0].to_i64().unwrap_or(i64::MAX), v[1].to_i64().unwrap_or(i64::MAX)]
}

impl PlanarGraph {
    pub fn from_discriminant(g: &DiscriminantGraph) -> Result<PlanarGraph> {
        if g.ambient_dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: g.ambient_dim() });
        }
        Ok(PlanarGraph {
            vertices: g.vertices.clone(),
            edges: g.bounded_edges.clone(),
            rays: g.rays.iter().map(|(v, d)| (*v, to_i64_pair(&primitive_integer(d)))).collect(),
        })
    }

    pub fn from_tropical(tc: &TropicalCurve) -> PlanarGraph {
        PlanarGraph {
            vertices: tc.vertices.clone(),
            edges: tc.bounded_edges.iter().map(|e| (e.from, e.to)).collect(),
            rays: tc.rays.iter().map(|r| (r.from, r.direction)).collect(),
        }
    }
}

/// Outcome of matching a spine against a graph through an integral linear basis change `A`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpineComparison {
    pub isomorphic: bool,
    /// (vertices, bounded edges, rays)
    pub spine_counts: (usize, usize, usize),
    pub graph_counts: (usize, usize, usize),
    /// Graph vertex matched to each spine vertex.
    pub vertex_map: Option<Vec<usize>>,
    /// Least-squares fit `graph ≈ scale · A · spine + translation` (spine in plot units).
    pub scale: f64,
    pub translation: [f64; 2],
    pub max_discrepancy: f64,
    pub failures: Vec<String>,
}

fn apply(a: &[[i64; 2]; 2], d: [i64; 2]) -> [i64; 2] {
    [a[0][0] * d[0] + a[0][1] * d[1], a[1][0] * d[0] + a[1][1] * d[1]]
}

fn primitive_of(v: &[Rational]) -> Option<[i64; 2]> {
    if v.iter().all(|x| x.is_zero()) {
        return None;
    }
    Some(to_i64_pair(&primitive_integer(v)))
}

pub fn compare_spine_to_discriminant(tc: &TropicalCurve, g: &DiscriminantGraph, basis_change: [[i64; 2]; 2]) -> Result<SpineComparison> {
    Ok(compare_planar_graphs(&PlanarGraph::from_tropical(tc), tc.unit, &PlanarGraph::from_discriminant(g)?, basis_change))
}

/// Matches `spine` (scaled by `unit`) against `graph`: incidences, ray directions and bounded
/// edge directions must agree after `basis_change`; positions are compared after a fitted
/// scale and translation.
pub fn compare_planar_graphs(spine: &PlanarGraph, unit: f64, graph: &PlanarGraph, basis_change: [[i64; 2]; 2]) -> SpineComparison {
    let counts = |p: &PlanarGraph| (p.vertices.len(), p.edges.len(), p.rays.len());
    let mut report = SpineComparison {
        isomorphic: false,
        spine_counts: counts(spine),
        graph_counts: counts(graph),
        vertex_map: None,
        scale: 1.0,
        translation: [0.0, 0.0],
        max_discrepancy: f64::INFINITY,
        failures: Vec::new(),
    };
    if report.spine_counts != report.graph_counts {
        report.failures.push(format!("counts differ: spine {:?}, graph {:?}", report.spine_counts, report.graph_counts));
        return report;
    }
    let mapped = |v: &QVec| -> QVec {
        (0..2).map(|r| q(basis_change[r][0]) * &v[0] + q(basis_change[r][1]) * &v[1]).collect()
    };
    let spine_v: Vec<QVec> = spine.vertices.iter().map(mapped).collect();
    let ray_dirs = |p: &PlanarGraph, v: usize, f: &dyn Fn([i64; 2]) -> [i64; 2]| {
        let mut d: Vec<[i64; 2]> = p.rays.iter().filter(|(w, _)| *w == v).map(|(_, d)| f(*d)).collect();
        d.sort();
        d
    };
    let map_dir = |d: [i64; 2]| primitive_i64(apply(&basis_change, d));
    let spine_rays: Vec<Vec<[i64; 2]>> = (0..spine_v.len()).map(|v| ray_dirs(spine, v, &map_dir)).collect();
    let graph_rays: Vec<Vec<[i64; 2]>> = (0..graph.vertices.len()).map(|v| ray_dirs(graph, v, &|d| d)).collect();

    let nv = spine_v.len();
    let mut assignment: Vec<Option<usize>> = vec![None; nv];
    let mut used = vec![false; nv];
    let edge_dir = |p: &[QVec], a: usize, b: usize| primitive_of(&[&p[b][0] - &p[a][0], &p[b][1] - &p[a][1]]);
    let consistent = |assign: &[Option<usize>]| -> bool {
        spine.edges.iter().all(|&(a, b)| match (assign[a], assign[b]) {
            (Some(x), Some(y)) => {
                let present = graph.edges.iter().filter(|&&(c, d)| (c, d) == (x, y) || (c, d) == (y, x)).count();
                let wanted = spine.edges.iter().filter(|&&(c, d)| (c, d) == (a, b) || (c, d) == (b, a)).count();
                present == wanted && edge_dir(&spine_v, a, b) == edge_dir(&graph.vertices, x, y)
            }
            _ => true,
        })
    };
    fn search(
        v: usize,
        nv: usize,
        assign: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
        ok_pair: &dyn Fn(usize, usize) -> bool,
        consistent: &dyn Fn(&[Option<usize>]) -> bool,
    ) -> bool {
        if v == nv {
            return true;
        }
        for w in 0..nv {
            if !used[w] && ok_pair(v, w) {
                assign[v] = Some(w);
                used[w] = true;
                if consistent(assign) && search(v + 1, nv, assign, used, ok_pair, consistent) {
                    return true;
                }
                assign[v] = None;
                used[w] = false;
            }
        }
        false
    }
    let ok_pair = |v: usize, w: usize| spine_rays[v] == graph_rays[w];
    if !search(0, nv, &mut assignment, &mut used, &ok_pair, &consistent) {
        report.failures.push("no incidence-preserving vertex bijection matches ray and edge directions".into());
        return report;
    }
    let map: Vec<usize> = assignment.into_iter().map(|x| x.expect("complete assignment")).collect();

    let p: Vec<[f64; 2]> = spine_v.iter().map(|v| [to_f64(&v[0]) * unit, to_f64(&v[1]) * unit]).collect();
    let qv: Vec<[f64; 2]> = map.iter().map(|&w| [to_f64(&graph.vertices[w][0]), to_f64(&graph.vertices[w][1])]).collect();
    if nv > 0 {
        let mean = |xs: &[[f64; 2]]| {
            let n = xs.len() as f64;
            [xs.iter().map(|x| x[0]).sum::<f64>() / n, xs.iter().map(|x| x[1]).sum::<f64>() / n]
        };
        let (pm, qm) = (mean(&p), mean(&qv));
        let mut num = 0.0;
        let mut den = 0.0;
        for (a, b) in p.iter().zip(&qv) {
            num += (a[0] - pm[0]) * (b[0] - qm[0]) + (a[1] - pm[1]) * (b[1] - qm[1]);
            den += (a[0] - pm[0]).powi(2) + (a[1] - pm[1]).powi(2);
        }
        let s = if den > 0.0 { num / den } else { 1.0 };
        report.scale = s;
        report.translation = [qm[0] - s * pm[0], qm[1] - s * pm[1]];
        report.max_discrepancy = p
            .iter()
            .zip(&qv)
            .map(|(a, b)| ((s * a[0] + report.translation[0] - b[0]).powi(2) + (s * a[1] + report.translation[1] - b[1]).powi(2)).sqrt())
            .fold(0.0, f64::max);
    } else {
        report.max_discrepancy = 0.0;
    }
    report.isomorphic = true;
    report.vertex_map = Some(map);
    report
}
