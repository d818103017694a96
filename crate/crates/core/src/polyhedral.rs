//! Exact double description for polyhedral cones and polyhedra.

use num_traits::{Signed, Zero};

use crate::lattice::{dot, int_to_q, is_zero_vec, lex_cmp, primitive_integer, scale, sub, QVec, Rational};

/// Generators of `{x : <a, x> >= 0 for every a}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeGenerators {
    /// Extreme rays, integral and primitive in the input coordinates, lexicographically sorted.
    pub rays: Vec<QVec>,
    /// Basis of the lineality space.
    pub lineality: Vec<QVec>,
}

impl ConeGenerators {
    pub fn is_pointed(&self) -> bool {
        self.lineality.is_empty()
    }
}

fn normalize(v: &[Rational]) -> QVec {
    int_to_q(&primitive_integer(v))
}

pub fn tight_set(ineqs: &[QVec], v: &[Rational]) -> Vec<usize> {
    ineqs.iter().enumerate().filter(|(_, a)| dot(a, v).is_zero()).map(|(i, _)| i).collect()
}

fn is_subset(a: &[usize], b: &[usize]) -> bool {
    // both sorted
    let mut j = 0;
    for x in a {
        while j < b.len() && b[j] < *x {
            j += 1;
        }
        if j == b.len() || b[j] != *x {
            return false;
        }
    }
    true
}

fn intersect(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().filter(|x| b.binary_search(x).is_ok()).copied().collect()
}

/// Combinatorial adjacency: no third ray is tight on every inequality where both are tight.
pub fn adjacent_by_tight_sets(tight: &[Vec<usize>], i: usize, j: usize) -> bool {
    let common = intersect(&tight[i], &tight[j]);
    !tight
        .iter()
        .enumerate()
        .any(|(k, t)| k != i && k != j && is_subset(&common, t))
}

/// Double description of `{x ∈ Q^dim : <a, x> >= 0}`.
pub fn cone_from_inequalities(ineqs: &[QVec], dim: usize) -> ConeGenerators {
    let mut lineality: Vec<QVec> = (0..dim)
        .map(|i| (0..dim).map(|j| Rational::from_integer(((i == j) as i64).into())).collect())
        .collect();
    let mut rays: Vec<QVec> = Vec::new();
    let mut processed: Vec<QVec> = Vec::new();

    for a in ineqs {
        assert_eq!(a.len(), dim, "inequality dimension mismatch");
        if let Some(pos) = lineality.iter().position(|l| !dot(a, l).is_zero()) {
            let mut l0 = lineality.remove(pos);
            let mut al0 = dot(a, &l0);
            if al0.is_negative() {
                l0 = l0.iter().map(|x| -x).collect();
                al0 = -al0;
            }
            let project = |v: &QVec| -> QVec {
                let c = dot(a, v) / &al0;
                sub(v, &scale(&l0, &c))
            };
            lineality = lineality.iter().map(project).collect();
            rays = rays.iter().map(|r| normalize(&project(r))).collect();
            rays.push(normalize(&l0));
            processed.push(a.clone());
            continue;
        }
        let values: Vec<Rational> = rays.iter().map(|r| dot(a, r)).collect();
        let tight: Vec<Vec<usize>> = rays.iter().map(|r| tight_set(&processed, r)).collect();
        let mut next: Vec<QVec> = Vec::new();
        for (r, v) in rays.iter().zip(&values) {
            if !v.is_negative() {
                next.push(r.clone());
            }
        }
        for (i, vi) in values.iter().enumerate() {
            if !vi.is_positive() {
                continue;
            }
            for (j, vj) in values.iter().enumerate() {
                if !vj.is_negative() || !adjacent_by_tight_sets(&tight, i, j) {
                    continue;
                }
                // vi * r_j - vj * r_i lies on the new hyperplane
                let combo: QVec = rays[j]
                    .iter()
                    .zip(&rays[i])
                    .map(|(rj, ri)| vi * rj - vj * ri)
                    .collect();
                next.push(normalize(&combo));
            }
        }
        rays = next;
        processed.push(a.clone());
    }

    rays.retain(|r| !is_zero_vec(r));
    rays.sort_by(|a, b| lex_cmp(a, b));
    rays.dedup();
    ConeGenerators { rays, lineality: canonical_lineality(&lineality, dim) }
}

fn canonical_lineality(basis: &[QVec], dim: usize) -> Vec<QVec> {
    if basis.is_empty() {
        return Vec::new();
    }
    let (red, pivots) = crate::lattice::rref(&crate::lattice::RatMatrix::from_rows(basis.to_vec()));
    (0..pivots.len()).map(|i| normalize(&red.row(i)[..dim])).collect()
}

/// Dual cone `{m : <m, v> >= 0}` of the cone generated by `gens` (and `±lineality`).
pub fn dual_of_generators(gens: &[QVec], lineality: &[QVec], dim: usize) -> ConeGenerators {
    let mut ineqs: Vec<QVec> = gens.to_vec();
    for l in lineality {
        ineqs.push(l.clone());
        ineqs.push(l.iter().map(|x| -x).collect());
    }
    cone_from_inequalities(&ineqs, dim)
}

/// A polyhedron `{m : <a_i, m> + b_i >= 0}` with its vertices, recession rays and 1-skeleton.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polyhedron {
    pub normals: Vec<QVec>,
    pub offsets: Vec<Rational>,
    pub vertices: Vec<QVec>,
    pub rays: Vec<QVec>,
    pub lineality: Vec<QVec>,
    /// Pairs of adjacent vertices.
    pub bounded_edges: Vec<(usize, usize)>,
    /// (vertex, ray) pairs spanning an unbounded edge.
    pub unbounded_edges: Vec<(usize, usize)>,
}

impl Polyhedron {
    pub fn new(normals: Vec<QVec>, offsets: Vec<Rational>, dim: usize) -> Polyhedron {
        assert_eq!(normals.len(), offsets.len());
        let mut homog: Vec<QVec> = normals
            .iter()
            .zip(&offsets)
            .map(|(a, b)| {
                let mut h = a.clone();
                h.push(b.clone());
                h
            })
            .collect();
        let mut lambda = vec![Rational::zero(); dim + 1];
        lambda[dim] = Rational::from_integer(1.into());
        homog.push(lambda);
        let gens = cone_from_inequalities(&homog, dim + 1);

        let mut vertices = Vec::new();
        let mut rays = Vec::new();
        for g in &gens.rays {
            if g[dim].is_positive() {
                vertices.push(g[..dim].iter().map(|x| x / &g[dim]).collect::<QVec>());
            } else {
                rays.push(g[..dim].to_vec());
            }
        }
        vertices.sort_by(|a, b| lex_cmp(a, b));
        rays.sort_by(|a, b| lex_cmp(a, b));
        let lineality = gens.lineality.iter().map(|l| normalize(&l[..dim])).collect();

        // adjacency in the homogenized cone; tight sets include the lambda >= 0 row
        let one = Rational::from_integer(1.into());
        let lifted: Vec<QVec> = vertices
            .iter()
            .map(|v| {
                let mut h = v.clone();
                h.push(one.clone());
                h
            })
            .chain(rays.iter().map(|r| {
                let mut h = r.clone();
                h.push(Rational::zero());
                h
            }))
            .collect();
        let tight: Vec<Vec<usize>> = lifted.iter().map(|x| tight_set(&homog, x)).collect();
        let nv = vertices.len();
        let mut bounded_edges = Vec::new();
        let mut unbounded_edges = Vec::new();
        for i in 0..nv {
            for j in i + 1..lifted.len() {
                if adjacent_by_tight_sets(&tight, i, j) {
                    if j < nv {
                        bounded_edges.push((i, j));
                    } else {
                        unbounded_edges.push((i, j - nv));
                    }
                }
            }
        }
        Polyhedron { normals, offsets, vertices, rays, lineality, bounded_edges, unbounded_edges }
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty() && self.lineality.is_empty()
    }

    pub fn value(&self, facet: usize, m: &[Rational]) -> Rational {
        dot(&self.normals[facet], m) + &self.offsets[facet]
    }

    pub fn contains(&self, m: &[Rational]) -> bool {
        (0..self.normals.len()).all(|i| !self.value(i, m).is_negative())
    }

    /// Facets whose inequality is tight at a vertex.
    pub fn active_at_vertex(&self, v: usize) -> Vec<usize> {
        (0..self.normals.len()).filter(|&i| self.value(i, &self.vertices[v]).is_zero()).collect()
    }

    /// Facets tight along a whole edge.
    pub fn active_on_bounded_edge(&self, e: usize) -> Vec<usize> {
        let (a, b) = self.bounded_edges[e];
        intersect(&self.active_at_vertex(a), &self.active_at_vertex(b))
    }

    pub fn active_on_unbounded_edge(&self, e: usize) -> Vec<usize> {
        let (v, r) = self.unbounded_edges[e];
        self.active_at_vertex(v)
            .into_iter()
            .filter(|&i| dot(&self.normals[i], &self.rays[r]).is_zero())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{q, qvec};

    #[test]
    fn octant_is_self_dual() {
        let e = vec![qvec(&[1, 0, 0]), qvec(&[0, 1, 0]), qvec(&[0, 0, 1])];
        let d = dual_of_generators(&e, &[], 3);
        let mut sorted = e.clone();
        sorted.reverse();
        assert_eq!(d.rays, sorted);
        assert!(d.is_pointed());
    }

    #[test]
    fn half_plane_from_a_ray() {
        let d = dual_of_generators(&[qvec(&[1, 0])], &[], 2);
        assert_eq!(d.rays, vec![qvec(&[1, 0])]);
        assert_eq!(d.lineality, vec![qvec(&[0, 1])]);
    }

    #[test]
    fn square_pyramid_has_four_facets() {
        let gens = vec![qvec(&[0, 0, 1]), qvec(&[1, 0, 1]), qvec(&[0, 1, 1]), qvec(&[1, 1, 1])];
        let d = dual_of_generators(&gens, &[], 3);
        assert_eq!(d.rays.len(), 4);
        // every facet normal is tight on exactly two generators
        for f in &d.rays {
            assert_eq!(gens.iter().filter(|g| dot(f, g).is_zero()).count(), 2);
        }
        let back = dual_of_generators(&d.rays, &[], 3);
        let mut expected = gens.clone();
        expected.sort_by(|a, b| lex_cmp(a, b));
        assert_eq!(back.rays, expected);
    }

    #[test]
    fn redundant_generator_is_dropped() {
        let gens = vec![qvec(&[1, 0]), qvec(&[0, 1]), qvec(&[1, 1])];
        let d = dual_of_generators(&gens, &[], 2);
        let back = dual_of_generators(&d.rays, &[], 2);
        assert_eq!(back.rays, vec![qvec(&[0, 1]), qvec(&[1, 0])]);
    }

    #[test]
    fn triangle_polytope_skeleton() {
        // r >= 0, r1 + r2 + r3 >= 2
        let normals = vec![qvec(&[1, 0, 0]), qvec(&[0, 1, 0]), qvec(&[0, 0, 1]), qvec(&[1, 1, 1])];
        let offsets = vec![q(0), q(0), q(0), q(-2)];
        let p = Polyhedron::new(normals, offsets, 3);
        assert_eq!(p.vertices, vec![qvec(&[0, 0, 2]), qvec(&[0, 2, 0]), qvec(&[2, 0, 0])]);
        assert_eq!(p.rays, vec![qvec(&[0, 0, 1]), qvec(&[0, 1, 0]), qvec(&[1, 0, 0])]);
        assert_eq!(p.bounded_edges.len(), 3);
        assert_eq!(p.unbounded_edges.len(), 3);
        for e in 0..3 {
            assert_eq!(p.active_on_bounded_edge(e).len(), 2);
            assert_eq!(p.active_on_unbounded_edge(e).len(), 2);
        }
    }

    #[test]
    fn infeasible_polyhedron_is_empty() {
        let p = Polyhedron::new(vec![qvec(&[1]), qvec(&[-1])], vec![q(-1), q(0)], 1);
        assert!(p.is_empty());
    }

    proptest::proptest! {
        #[test]
        fn double_dual_recovers_extreme_rays(pts in proptest::collection::vec((-4i64..5, -4i64..5), 3..8)) {
            // cones over random points at height 1 are pointed and full dimensional when the points span
            let gens: Vec<QVec> = pts.iter().map(|&(a, b)| qvec(&[a, b, 1])).collect();
            let rank = crate::lattice::RatMatrix::from_rows(gens.clone()).rank();
            proptest::prop_assume!(rank == 3);
            let d = dual_of_generators(&gens, &[], 3);
            let back = dual_of_generators(&d.rays, &[], 3);
            // every input point lies in the recovered cone and every recovered ray is an input point
            for g in &gens {
                proptest::prop_assert!(d.rays.iter().all(|f| !dot(f, g).is_negative()));
            }
            for r in &back.rays {
                proptest::prop_assert!(gens.iter().any(|g| normalize(g) == *r));
            }
            let dd = dual_of_generators(&back.rays, &[], 3);
            proptest::prop_assert_eq!(dd.rays, d.rays);
        }
    }
}
