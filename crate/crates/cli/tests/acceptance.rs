//! Acceptance criteria, one line per criterion. Runs without the libtest harness so the
//! summary is always printed; exits non-zero if any criterion fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_complex::Complex64;
use slag_toric::amoeba::{amoeba_sample, curve_family, fattening_check, fattening_distances, required_eps, SamplingConfig, Window};
use slag_toric::cones::{fan_from_triangulation, gorenstein_degree, star_subdivision, z3_plus_third, Cone, Fan, GorensteinData};
use slag_toric::deformations::{
    altmann_cone, altmann_is_gorenstein, default_parameters, minkowski_decompositions, polygon_cone, smoothing_discriminant,
    verify_embedding, GaussianRational, LatticePolygon, MinkowskiDecomposition, DEFAULT_UNIT_EDGE_BUDGET,
};
use slag_toric::fibration::{
    adapted_basis, discriminant_graph, dualize, is_unipotent_of_order_two, vertex_consistency, DiscriminantGraph, FiberType,
};
use slag_toric::hessian::{double_dual_error, legendre_dual, monge_ampere_residual, HessianPotentialGrid};
use slag_toric::lattice::{primitive_integer, q, qf, qvec, IntMatrix, LatticeSpec, Rational};
use slag_toric::moment::{ampleness, build_ray_map, moment_polytope, DivisorClass, MomentPolytope};
use slag_toric::slag::{certify_fibers, max_hamiltonian_residual, Corruption, FibrationVariant, TorusInvariantPotential, VerifyConfig};
use slag_toric::tropical::{compare_spine_to_discriminant, tropical_curve, TropicalPolynomial};
use slag_toric::Execution;

type Check = Result<String, String>;

struct Criterion {
    id: usize,
    name: &'static str,
    limit: Option<Duration>,
    run: fn() -> Check,
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn err<E: std::fmt::Debug>(e: E) -> String {
    format!("{e:?}")
}

fn example_cone() -> Cone {
    Cone::new(z3_plus_third(), &[qvec(&[1, 0, 0]), qvec(&[0, 1, 0]), qvec(&[0, 0, 1])]).unwrap()
}

fn del_pezzo_cone() -> Cone {
    let rays = [[0, 0, 1], [1, 0, 1], [2, 1, 1], [2, 2, 1], [1, 2, 1], [0, 1, 1]];
    Cone::new(LatticeSpec::standard(3), &rays.iter().map(|r| qvec(r)).collect::<Vec<_>>()).unwrap()
}

fn example_fan() -> (GorensteinData, Fan) {
    let g = gorenstein_degree(&example_cone()).unwrap();
    let f = fan_from_triangulation(&g, &star_subdivision(&g, &[qf(1, 3), qf(1, 3), qf(1, 3)]).unwrap()).unwrap();
    (g, f)
}

fn centre_index(f: &Fan) -> usize {
    f.rays.iter().position(|r| r[0] == qf(1, 3)).unwrap()
}

/// Polytope and graph for the class `a` (lift `-a/3` on the centre ray).
fn example_pipeline(a: i64) -> Result<(MomentPolytope, DiscriminantGraph), String> {
    let (g, f) = example_fan();
    let rm = build_ray_map(&f).map_err(err)?;
    let mut x0 = vec![q(0); f.rays.len()];
    x0[centre_index(&f)] = qf(-a, 3);
    let d = DivisorClass::from_lift(&rm, x0);
    ensure(ampleness(&f, &d).map_err(err)?.0, "class is not ample")?;
    let p = moment_polytope(&f, &d).map_err(err)?;
    let graph = discriminant_graph(&p, &adapted_basis(&f.lattice, &g.m0).map_err(err)?).map_err(err)?;
    Ok((p, graph))
}

fn c1_gorenstein() -> Check {
    let a = gorenstein_degree(&example_cone()).map_err(err)?;
    ensure(a.m0 == qvec(&[1, 1, 1]), format!("m0 = {:?}", a.m0))?;
    let b = gorenstein_degree(&del_pezzo_cone()).map_err(err)?;
    ensure(b.m0 == qvec(&[0, 0, 1]), format!("m0 = {:?}", b.m0))?;
    Ok("m0 = (1,1,1) and (0,0,1)".into())
}

fn c2_kernel() -> Check {
    let (_, f) = example_fan();
    let rm = build_ray_map(&f).map_err(err)?;
    ensure(rm.kernel.len() == 1, format!("kernel rank {}", rm.kernel.len()))?;
    let c = centre_index(&f);
    let expected: Vec<i64> = (0..4).map(|i| if i == c { -3 } else { 1 }).collect();
    let got: Vec<i64> = rm.kernel[0].iter().map(|x| i64::try_from(x).unwrap()).collect();
    let neg: Vec<i64> = expected.iter().map(|x| -x).collect();
    ensure(got == expected || got == neg, format!("kernel {got:?}"))?;
    Ok(format!("kernel {got:?} (centre ray at index {c})"))
}

fn c3_polytope() -> Check {
    for a in [1, 3, 7] {
        let (p, _) = example_pipeline(a)?;
        // normalize each inequality <n, m> + c >= 0 to a primitive integer normal
        let mut ineqs: Vec<(Vec<i64>, Rational)> = p
            .normals
            .iter()
            .zip(&p.offsets)
            .map(|(n, c)| {
                let prim: Vec<i64> = primitive_integer(n).iter().map(|x| i64::try_from(x).unwrap()).collect();
                let i = prim.iter().position(|x| *x != 0).unwrap();
                (prim.clone(), c * (Rational::from_integer(prim[i].into()) / &n[i]))
            })
            .collect();
        ineqs.sort();
        let mut want = vec![(vec![0, 0, 1], q(0)), (vec![0, 1, 0], q(0)), (vec![1, 0, 0], q(0)), (vec![1, 1, 1], q(-a))];
        want.sort();
        ensure(ineqs == want, format!("a = {a}: H-representation {ineqs:?}"))?;
        let mut verts = p.vertices.clone();
        verts.sort();
        ensure(verts == vec![qvec(&[0, 0, a]), qvec(&[0, a, 0]), qvec(&[a, 0, 0])], format!("a = {a}: vertices {verts:?}"))?;
        let mut rays = p.rays.clone();
        rays.sort();
        ensure(rays == vec![qvec(&[0, 0, 1]), qvec(&[0, 1, 0]), qvec(&[1, 0, 0])], format!("a = {a}: rays {rays:?}"))?;
    }
    Ok("{r >= 0, r1+r2+r3 >= a} for a = 1, 3, 7; 3 vertices, rays e1 e2 e3".into())
}

/// `2I - T`, the inverse when `(T - I)^2 = 0`.
fn inverse_unipotent(t: &IntMatrix) -> IntMatrix {
    let n = t.rows();
    let mut m = t.clone();
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = BigInt::from(if i == j { 2 } else { 0 }) - &t[(i, j)];
        }
    }
    m
}

fn c4_graph() -> Check {
    let (_, g) = example_pipeline(3)?;
    let counts = (g.vertices.len(), g.bounded_edges.len(), g.rays.len());
    ensure(counts == (3, 3, 3), format!("counts {counts:?}"))?;
    ensure((0..3).all(|v| g.valence(v) == 3), "not trivalent")?;
    ensure(g.edge_labels.iter().all(|l| is_unipotent_of_order_two(&l.monodromy)), "monodromy not unipotent")?;
    // independent oracle: some choice of orientations makes the product at each vertex trivial
    for v in 0..3 {
        let edges = g.incident_edges(v);
        let found = (0..(1 << edges.len())).any(|signs: usize| {
            let prod = edges.iter().enumerate().fold(IntMatrix::identity(3), |acc, (k, &e)| {
                let t = &g.edge_labels[e].monodromy;
                let t = if signs >> k & 1 == 1 { inverse_unipotent(t) } else { t.clone() };
                acc.mul(&t)
            });
            prod == IntMatrix::identity(3) && edges.iter().all(|&e| g.edge_labels[e].monodromy != IntMatrix::identity(3))
        });
        ensure(found, format!("no trivial product at vertex {v}"))?;
    }
    let vc = vertex_consistency(&g);
    ensure(vc.consistent, format!("vertex relations fail at {:?}", vc.offending_vertices))?;
    Ok("3 trivalent vertices, 3 edges, 3 rays; (T-I)^2 = 0; products trivial".into())
}

fn c5_duality() -> Check {
    let (_, g) = example_pipeline(3)?;
    let d = dualize(&g).map_err(err)?;
    let allowed = [FiberType::Generic, FiberType::Negative];
    ensure(d.graph.vertex_types.iter().all(|t| allowed.contains(t)), format!("{:?}", d.graph.vertex_types))?;
    ensure(d.graph.edge_labels.iter().all(|l| allowed.contains(&l.fiber)), "dual edge fiber types")?;
    let back = dualize(&d.graph).map_err(err)?;
    ensure(back.graph.edge_labels == g.edge_labels, "dualize twice changed the monodromy data")?;
    ensure(back.graph.vertex_types == g.vertex_types, "dualize twice changed the vertex types")?;
    Ok("involution; dual types only (2,2) and (2,1)".into())
}

fn hexagon() -> LatticePolygon {
    LatticePolygon::new(vec![[0, 0], [1, 0], [2, 1], [2, 2], [1, 2], [0, 1]]).unwrap()
}

fn square() -> LatticePolygon {
    LatticePolygon::new(vec![[0, 0], [1, 0], [1, 1], [0, 1]]).unwrap()
}

fn census(p: &LatticePolygon) -> Result<Vec<MinkowskiDecomposition>, String> {
    minkowski_decompositions(p, true, DEFAULT_UNIT_EDGE_BUDGET, Execution::Parallel).map_err(err)
}

fn c6_census() -> Check {
    let triangle = LatticePolygon::new(vec![[0, 0], [1, 0], [0, 1]]).unwrap();
    let counts = [census(&hexagon())?.len(), census(&square())?.len(), census(&triangle)?.len()];
    ensure(counts == [2, 1, 0], format!("counts {counts:?}"))?;
    Ok("hexagon 2, square 1, triangle 0".into())
}

fn c7_altmann() -> Check {
    let mut checked = 0;
    for p in [hexagon(), square()] {
        let g = gorenstein_degree(&polygon_cone(&p).map_err(err)?).map_err(err)?;
        for d in census(&p)? {
            let a = altmann_cone(&p, &d).map_err(err)?;
            ensure(verify_embedding(&g, &a), format!("embedding fails for {p}"))?;
            ensure(altmann_is_gorenstein(&a), format!("not Gorenstein for {p}"))?;
            let mut m0 = qvec(&[0, 0]);
            m0.extend(std::iter::repeat_n(q(1), d.summands.len()));
            ensure(a.m0_prime == m0, format!("degree {:?}", a.m0_prime))?;
            checked += 1;
        }
    }
    ensure(checked == 3, format!("{checked} decompositions checked"))?;
    Ok("3 decompositions, degree (0,0,1,..,1)".into())
}

fn c8_smoothing() -> Check {
    let decs = census(&hexagon())?;
    let segs = decs.iter().find(|d| d.summands.len() == 3).ok_or("no 3-segment decomposition")?;
    let tris = decs.iter().find(|d| d.summands.len() == 2).ok_or("no 2-triangle decomposition")?;
    let sq = &census(&square())?[0];
    let mut lines = Vec::new();
    for (d, comps, planes) in [(segs, 3, 3), (tris, 6, 2), (sq, 2, 2)] {
        let x = default_parameters(d.summands.len());
        let s = smoothing_discriminant(d, &x, 3).map_err(err)?;
        ensure(
            s.components.len() == comps && s.distinct_planes() == planes,
            format!("{} components in {} planes, expected {comps} in {planes}", s.components.len(), s.distinct_planes()),
        )?;
        // the plane values are linear in x, so shrinking x shrinks their spread by the same factor
        let spread = |s: &slag_toric::deformations::SmoothingDiscriminant| {
            let mx = s.plane_values.iter().max().unwrap().clone();
            let mn = s.plane_values.iter().min().unwrap().clone();
            mx - mn
        };
        let base = spread(&s);
        for k in 1..=6 {
            let f = Rational::new(1.into(), 10i64.pow(k).into());
            let xs: Vec<GaussianRational> = x.iter().map(|g| GaussianRational::new(&g.re * &f, &g.im * &f)).collect();
            let sk = smoothing_discriminant(d, &xs, 3).map_err(err)?;
            ensure(spread(&sk) == &base * &f, "spread does not shrink linearly")?;
        }
        let zero = smoothing_discriminant(d, &vec![GaussianRational::zero(); d.summands.len()], 3).map_err(err)?;
        ensure(zero.distinct_planes() == 1, "planes do not coincide at x = 0")?;
        lines.push(format!("{comps}/{planes}"));
    }
    Ok(format!("components/planes {}; all planes coincide as x -> 0", lines.join(", ")))
}

const SUPPORT: [[i64; 2]; 4] = [[1, 0], [0, 1], [-1, -1], [0, 0]];

fn c9_tropical() -> Check {
    let (_, graph) = example_pipeline(3)?;
    let mut needed = Vec::new();
    let mut summary = String::new();
    for t in [0.1, 0.05, 0.01] {
        let tc = tropical_curve(&TropicalPolynomial::from_phi(SUPPORT.to_vec(), &[q(1), q(1), q(1), q(0)], t).map_err(err)?)
            .map_err(err)?;
        let h = curve_family(&SUPPORT, &[1.0, 1.0, 1.0, 0.0], &[Complex64::new(1.0, 0.0); 4], t).map_err(err)?;
        let w = Window::around(3.0, t);
        let cloud = amoeba_sample(&h, &SamplingConfig::window(w.lo, w.hi, 200, 64), Execution::Parallel);
        needed.push(required_eps(&fattening_distances(&cloud, &tc, w, Execution::Parallel), 0.99));
        if t == 0.01 {
            ensure(
                (tc.vertices.len(), tc.bounded_edges.len(), tc.rays.len()) == (3, 3, 3),
                format!("spine counts {} {} {}", tc.vertices.len(), tc.bounded_edges.len(), tc.rays.len()),
            )?;
            let cmp = compare_spine_to_discriminant(&tc, &graph, [[-1, 0], [0, -1]]).map_err(err)?;
            ensure(cmp.isomorphic, format!("not isomorphic: {:?}", cmp.failures))?;
            let r = fattening_check(&cloud, &tc, 1.0, w, Execution::Parallel);
            ensure(r.contained >= 0.99 && r.covers >= 0.99, format!("fractions {} {}", r.contained, r.covers))?;
            summary = format!("contained {:.4}, covers {:.4} at eps 1", r.contained, r.covers);
        }
    }
    ensure(needed.windows(2).all(|w| w[1] < w[0]), format!("required eps not decreasing: {needed:?}"))?;
    Ok(format!("spine 3/3/3 isomorphic under -I; {summary}; required eps {:.3} > {:.3} > {:.3}", needed[0], needed[1], needed[2]))
}

fn c10_slag() -> Check {
    let tol = 1e-6;
    let mut worst: f64 = 0.0;
    let mut weakest_control = f64::INFINITY;
    let mut ham: f64 = 0.0;
    for n in [2, 3] {
        for p in [TorusInvariantPotential::flat(n), TorusInvariantPotential::quadratic(n, 0.5)] {
            let controls: &[Corruption] = match p.kind {
                slag_toric::slag::PotentialKind::Flat => &[Corruption::WrongPhase],
                _ => &[Corruption::WrongPhase, Corruption::DropPhi1],
            };
            for variant in [FibrationVariant::Affine, FibrationVariant::Proper] {
                let cfg = VerifyConfig { variant, fibers: 10, points_per_fiber: 100, tol, ..VerifyConfig::default() };
                let r = certify_fibers(&p, &cfg, Execution::Parallel).map_err(err)?;
                ensure(r.points == 1000, format!("{} points certified", r.points))?;
                ensure(r.pass, format!("n = {n} {variant:?} {:?}: omega {:e}, im {:e}", p.kind, r.max_omega, r.max_im_omega))?;
                let clean = r.max_omega.max(r.max_im_omega);
                worst = worst.max(clean);
                for &c in controls {
                    let bad = certify_fibers(&p, &VerifyConfig { corruption: c, ..cfg.clone() }, Execution::Parallel).map_err(err)?;
                    let residual = bad.max_omega.max(bad.max_im_omega);
                    ensure(!bad.pass, format!("{c:?} control passed"))?;
                    let margin = (residual / tol).min(residual / clean.max(f64::MIN_POSITIVE));
                    weakest_control = weakest_control.min(margin);
                }
            }
            ham = ham.max(max_hamiltonian_residual(&p, 100, 0, 1e-5, Execution::Parallel).map_err(err)?);
        }
    }
    ensure(weakest_control >= 1e4, format!("negative control margin only {weakest_control:e}"))?;
    ensure(ham < 1e-6, format!("Hamiltonian residual {ham:e}"))?;
    Ok(format!("max residual {worst:.2e}; controls fail by >= {weakest_control:.1e}x; Hamiltonian {ham:.2e}"))
}

fn c11_legendre() -> Check {
    let quad = HessianPotentialGrid::regular(&[-1.0, -1.0], &[1.0, 1.0], &[9, 9], |y| y.iter().map(|v| v * v / 2.0).sum()).map_err(err)?;
    let dual = legendre_dual(&quad).map_err(err)?;
    for (x, v) in dual.coords.iter().zip(&dual.values) {
        let exact: f64 = x.iter().map(|a| a * a / 2.0).sum();
        ensure((v - exact).abs() < 1e-12, format!("dual value {v} at {x:?}"))?;
        ensure(quad.coords.iter().any(|y| y.iter().zip(x).all(|(a, b)| (a - b).abs() < 1e-12)), "dual node is not a primal node")?;
    }
    ensure(double_dual_error(&quad).map_err(err)? < 1e-12, "quadratic double dual differs")?;
    let exponential = |n: usize| HessianPotentialGrid::regular(&[-0.5, -0.5], &[0.5, 0.5], &[n, n], |y| y.iter().map(|v| v.exp()).sum());
    let errs: Vec<f64> = [11, 21, 41].iter().map(|&n| double_dual_error(&exponential(n).map_err(err)?).map_err(err)).collect::<Result<_, _>>()?;
    let ratios: Vec<f64> = errs.windows(2).map(|w| w[0] / w[1]).collect();
    ensure(ratios.iter().all(|r| (3.5..4.5).contains(r)), format!("error ratios {ratios:?}"))?;
    let ma_quad = monge_ampere_residual(&quad).map_err(err)?.residual;
    ensure(ma_quad < 1e-10, format!("quadratic Monge-Ampere residual {ma_quad:e}"))?;
    let ma_exp = monge_ampere_residual(&exponential(21).map_err(err)?).map_err(err)?.residual;
    ensure((0.1..10.0).contains(&ma_exp), format!("exponential Monge-Ampere residual {ma_exp}"))?;
    Ok(format!("error ratios {:.2}, {:.2}; MA residual {ma_quad:.1e} (quadratic), {ma_exp:.3} (exponential)", ratios[0], ratios[1]))
}

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name).to_string_lossy().into_owned()
}

fn run_to(dir: &Path, args: &[&str]) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_slag-toric"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .status()
        .map_err(err)?;
    ensure(status.success(), format!("{args:?} exited with {status}"))
}

fn without_version_comment(svg: &str) -> String {
    svg.lines().filter(|l| !l.starts_with("<!-- slag-toric")).collect::<Vec<_>>().join("\n")
}

fn c12_determinism() -> Check {
    let (e23, dp, sq, curve, hex) = (data("example_2_3.json"), data("delpezzo6.json"), data("square_odp.json"), data("example_4_2_curve.json"), data("hexagon.json"));
    let runs: Vec<Vec<&str>> = vec![
        vec!["gorenstein", &e23],
        vec!["discriminant", &e23],
        vec!["discriminant", &dp],
        vec!["discriminant", &sq],
        vec!["smooth", &hex],
        vec!["mirror", &curve],
        vec!["verify", "--potential", "quadratic", "--variant", "proper", "--seed", "11", "--samples", "20"],
    ];
    let mut files = 0;
    for args in runs {
        let dirs: Vec<PathBuf> = (0..2).map(|_| tempfile::tempdir().map(|d| d.keep())).collect::<Result<_, _>>().map_err(err)?;
        for d in &dirs {
            run_to(d, &args)?;
        }
        let mut names: Vec<String> = std::fs::read_dir(&dirs[0]).map_err(err)?.map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
        names.sort();
        for name in names {
            let (a, b) = (std::fs::read_to_string(dirs[0].join(&name)).map_err(err)?, std::fs::read_to_string(dirs[1].join(&name)).map_err(err)?);
            let same = if name.ends_with(".svg") { without_version_comment(&a) == without_version_comment(&b) } else { a == b };
            ensure(same, format!("{args:?}: {name} differs"))?;
            files += 1;
        }
        for d in dirs {
            std::fs::remove_dir_all(d).map_err(err)?;
        }
    }
    Ok(format!("{files} output files byte-identical across repeated runs"))
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "Gorenstein detection", limit: Some(Duration::from_secs(1)), run: c1_gorenstein },
        Criterion { id: 2, name: "ray map kernel", limit: Some(Duration::from_secs(1)), run: c2_kernel },
        Criterion { id: 3, name: "moment polytope", limit: Some(Duration::from_secs(1)), run: c3_polytope },
        Criterion { id: 4, name: "discriminant graph", limit: Some(Duration::from_secs(1)), run: c4_graph },
        Criterion { id: 5, name: "duality involution", limit: None, run: c5_duality },
        Criterion { id: 6, name: "Minkowski census", limit: Some(Duration::from_secs(5)), run: c6_census },
        Criterion { id: 7, name: "Altmann embedding", limit: Some(Duration::from_secs(1)), run: c7_altmann },
        Criterion { id: 8, name: "smoothing discriminants", limit: None, run: c8_smoothing },
        Criterion { id: 9, name: "tropical spine and amoeba", limit: Some(Duration::from_secs(60)), run: c9_tropical },
        Criterion { id: 10, name: "special Lagrangian certification", limit: Some(Duration::from_secs(30)), run: c10_slag },
        Criterion { id: 11, name: "Legendre and Monge-Ampere", limit: Some(Duration::from_secs(5)), run: c11_legendre },
        Criterion { id: 12, name: "determinism", limit: None, run: c12_determinism },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let outcome = match (outcome, c.limit) {
            (Ok(_), Some(limit)) if elapsed > limit => Err(format!("took {elapsed:?}, limit {limit:?}")),
            (o, _) => o,
        };
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d.clone()),
            Err(e) => ("FAIL", e.clone()),
        };
        if outcome.is_err() {
            failed += 1;
        }
        println!("criterion {:>2} {tag} [{:>9.3} s] {}: {detail}", c.id, elapsed.as_secs_f64(), c.name);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
