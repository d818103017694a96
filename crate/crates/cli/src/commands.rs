//! Pipelines behind the subcommands. Each returns its report outputs plus the data needed for
//! side artifacts (SVG, point clouds).

use num_complex::Complex64;
use slag_toric::amoeba::{
    amoeba_sample, curve_family, fattening_check, fattening_distances, required_eps, AmoebaCloud, SamplingConfig, Window,
};
use slag_toric::cones::{
    crepancy_check, fan_from_triangulation, gorenstein_degree, is_smooth, star_subdivision, Cone, Fan, GorensteinData,
};
use slag_toric::deformations::{
    altmann_cone, altmann_is_gorenstein, default_parameters, minkowski_decompositions, polygon_cone, smoothing_discriminant,
    verify_embedding, GaussianRational, LatticePolygon, MinkowskiDecomposition, DEFAULT_UNIT_EDGE_BUDGET,
};
use slag_toric::fibration::{adapted_basis, discriminant_graph, dualize, vertex_consistency, DiscriminantGraph};
use slag_toric::lattice::{to_f64, QVec, Rational};
use slag_toric::moment::{ampleness, build_ray_map, moment_polytope, DivisorClass, SkeletonEdge};
use slag_toric::slag::{certify_fibers, max_hamiltonian_residual, Corruption, FibrationVariant, TorusInvariantPotential, VerifyConfig};
use slag_toric::tropical::{compare_spine_to_discriminant, tropical_curve, TropicalCurve, TropicalPolynomial};
use slag_toric::{Error, Execution};

use crate::documents::{int_strs, rat_str, rat_vec, vec_str, CurveDocument, FanDocument, PolygonDocument, TriangulationSpec};
use crate::error::{CliError, CliResult};
use crate::reports::*;

fn rows(vs: &[QVec]) -> Vec<QRow> {
    vs.iter().map(|v| vec_str(v)).collect()
}

/// The Gorenstein data of the cone spanned by all rays, and the fan described by the document.
pub fn build_fan(doc: &FanDocument) -> CliResult<(GorensteinData, Fan)> {
    doc.validate()?;
    let lattice = doc.lattice_spec()?;
    let rays = doc.ray_vectors()?;
    let cone = Cone::new(lattice.clone(), &rays)?;
    let g = gorenstein_degree(&cone)?;
    let fan = match doc.triangulation()? {
        Some(TriangulationSpec::Star(p)) => fan_from_triangulation(&g, &star_subdivision(&g, &p)?)?,
        Some(TriangulationSpec::Explicit(t)) => fan_from_triangulation(&g, &t)?,
        None if doc.cones.is_empty() => Fan::from_cone(&cone),
        None => Fan::new(lattice, rays, doc.cones.clone())?,
    };
    Ok((g, fan))
}

pub fn gorenstein(doc: &FanDocument) -> CliResult<GorensteinOutput> {
    let (g, fan) = build_fan(doc)?;
    let (smooth, non_smooth_cones) = is_smooth(&fan);
    let ray_map_kernel = match build_ray_map(&fan) {
        Ok(rm) => Some(rm.kernel.iter().map(|k| int_strs(k)).collect()),
        Err(Error::NotSurjective) => None,
        Err(e) => return Err(e.into()),
    };
    Ok(GorensteinOutput {
        m0: vec_str(&g.m0),
        cross_section: rows(&g.cross_section),
        normalized_volume: rat_str(&g.cone.normalized_volume()),
        fan: FanOutput { rays: rows(&fan.rays), max_cones: fan.max_cones.clone() },
        smooth,
        non_smooth_cones,
        crepant: doc.triangulation.is_some().then(|| crepancy_check(&g, &fan)),
        ray_map_kernel,
    })
}

fn divisor(doc: &FanDocument, fan: &Fan, class: Option<QVec>) -> CliResult<DivisorClass> {
    let rm = build_ray_map(fan)?;
    if let Some(alpha) = class {
        return Ok(DivisorClass::from_class(fan, &rm, alpha)?);
    }
    if let Some(lift) = &doc.lift {
        let mut x0 = vec![Rational::from_integer(0.into()); fan.rays.len()];
        for entry in lift {
            let r = fan.lattice.primitive(&rat_vec(&entry.ray)?);
            let i = fan
                .rays
                .iter()
                .position(|fr| *fr == r)
                .ok_or_else(|| CliError::Parse(format!("lift ray {:?} is not a ray of the fan", entry.ray)))?;
            x0[i] = crate::documents::rat(&entry.value)?;
        }
        return Ok(DivisorClass::from_lift(&rm, x0));
    }
    if let Some(alpha) = &doc.class {
        return Ok(DivisorClass::from_class(fan, &rm, rat_vec(alpha)?)?);
    }
    Err(CliError::Parse("no divisor class: give --class, or class or lift in the document".into()))
}

pub fn graph_output(g: &DiscriminantGraph) -> GraphOutput {
    GraphOutput {
        n: g.n,
        proper: g.proper,
        vertices: rows(&g.vertices),
        vertex_types: g.vertex_types.iter().map(|t| t.name().to_string()).collect(),
        bounded_edges: g.bounded_edges.iter().map(|&(a, b)| [a, b]).collect(),
        rays: g.rays.iter().map(|(v, d)| GraphRay { vertex: *v, direction: vec_str(d) }).collect(),
        edge_labels: g
            .edge_labels
            .iter()
            .map(|l| EdgeLabelOutput {
                pair: l.pair.as_ref().map(|(a, b)| [vec_str(a), vec_str(b)]),
                delta: l.delta.as_ref().map(|d| vec_str(d)),
                coefficients: l.coefficients.as_ref().map(|c| int_strs(c)),
                monodromy: l.monodromy.to_rows().iter().map(|r| int_strs(r)).collect(),
                fiber: l.fiber.name().to_string(),
            })
            .collect(),
        warnings: g.warnings.clone(),
    }
}

pub struct DiscriminantRun {
    pub output: DiscriminantOutput,
    pub graph: DiscriminantGraph,
}

pub fn discriminant(doc: &FanDocument, class: Option<QVec>) -> CliResult<DiscriminantRun> {
    let (g, fan) = build_fan(doc)?;
    let d = divisor(doc, &fan, class)?;
    if !ampleness(&fan, &d)?.0 {
        return Err(Error::NotAmple.into());
    }
    let p = moment_polytope(&fan, &d)?;
    let basis = adapted_basis(&fan.lattice, &g.m0)?;
    let mut graph = discriminant_graph(&p, &basis)?;
    let frame = doc.frame_vectors()?;
    if let Some(fr) = &frame {
        if fr.len() != graph.ambient_dim() || fr.iter().any(|v| v.len() != fan.dim()) {
            return Err(CliError::Parse(format!("frame must have {} vectors of length {}", graph.ambient_dim(), fan.dim())));
        }
        graph = graph.reproject(fr);
    }
    let vc = vertex_consistency(&graph);
    let dual = if vc.consistent {
        let dd = dualize(&graph)?;
        Some(DualOutput {
            graph: graph_output(&dd.graph),
            circle_classes: dd.circle_classes.iter().map(|c| c.as_ref().map(|v| int_strs(v))).collect(),
        })
    } else {
        None
    };
    let polytope = PolytopeOutput {
        h_rep: p.normals.iter().zip(&p.offsets).map(|(n, o)| HalfSpace { normal: vec_str(n), offset: rat_str(o) }).collect(),
        vertices: rows(&p.vertices),
        rays: rows(&p.rays),
        skeleton: p
            .skeleton
            .iter()
            .map(|e| match e {
                SkeletonEdge::Bounded { from, to, active } => SkeletonOutput::Bounded { from: *from, to: *to, facets: active.clone() },
                SkeletonEdge::Ray { from, direction, active } => {
                    SkeletonOutput::Ray { from: *from, direction: vec_str(direction), facets: active.clone() }
                }
            })
            .collect(),
    };
    let output = DiscriminantOutput {
        m0: vec_str(&g.m0),
        fan_rays: rows(&fan.rays),
        class: vec_str(&d.alpha),
        lift: vec_str(&d.x0),
        polytope,
        basis_e: rows(&basis.e),
        basis_f: rows(&basis.f),
        frame: frame.as_deref().map(rows),
        graph: graph_output(&graph),
        consistent: vc.consistent,
        offending_vertices: vc.offending_vertices,
        dual,
    };
    Ok(DiscriminantRun { output, graph })
}

pub struct SmoothRun {
    pub output: SmoothOutput,
    pub polygon: LatticePolygon,
    pub decompositions: Vec<MinkowskiDecomposition>,
}

fn parameter_strs(x: &[GaussianRational]) -> Vec<[String; 2]> {
    x.iter().map(|g| [rat_str(&g.re), rat_str(&g.im)]).collect()
}

/// `x` overrides the document parameters; decompositions with `k` summands use the first `k`.
pub fn smooth(doc: &PolygonDocument, x: Option<Vec<GaussianRational>>, exec: Execution) -> CliResult<SmoothRun> {
    doc.validate()?;
    let polygon = LatticePolygon::new(doc.vertices.clone())?;
    let maximal_only = doc.maximal_only.unwrap_or(true);
    let budget = doc.budget.unwrap_or(DEFAULT_UNIT_EDGE_BUDGET);
    let n = doc.n.unwrap_or(3);
    let x = match x {
        Some(x) => Some(x),
        None => doc.parameters()?,
    };
    let decompositions = minkowski_decompositions(&polygon, maximal_only, budget, exec)?;
    let g = gorenstein_degree(&polygon_cone(&polygon)?)?;
    let mut outs = Vec::with_capacity(decompositions.len());
    for d in &decompositions {
        let k = d.summands.len();
        let params = match &x {
            Some(x) if x.len() >= k => x[..k].to_vec(),
            Some(x) => return Err(Error::DimensionMismatch { expected: k, got: x.len() }.into()),
            None => default_parameters(k),
        };
        let a = altmann_cone(&polygon, d)?;
        let sd = smoothing_discriminant(d, &params, n)?;
        let at_zero = smoothing_discriminant(d, &vec![GaussianRational::zero(); k], n)?;
        outs.push(DecompositionOutput {
            p: d.p(),
            summands: d.summands.iter().map(|r| r.vertices().to_vec()).collect(),
            altmann: AltmannOutput {
                generators: rows(&a.generators),
                m0_prime: vec_str(&a.m0_prime),
                gorenstein: altmann_is_gorenstein(&a),
                embedding_verified: verify_embedding(&g, &a),
            },
            smoothing: SmoothingOutput {
                parameters: parameter_strs(&params),
                plane_values: vec_str(&sd.plane_values),
                components: sd
                    .components
                    .iter()
                    .map(|c| ComponentOutput {
                        summand: c.k,
                        plane_value: rat_str(&c.plane_value),
                        direction: c.direction,
                        edge: [c.edge.0, c.edge.1],
                    })
                    .collect(),
                distinct_planes: sd.distinct_planes(),
                generic: sd.generic,
                distinct_planes_at_zero: at_zero.distinct_planes(),
            },
        });
    }
    let output = SmoothOutput { polygon: polygon.vertices().to_vec(), n, maximal_only, budget, decompositions: outs };
    Ok(SmoothRun { output, polygon, decompositions })
}

#[derive(Clone, Debug)]
pub struct MirrorOptions {
    pub t: Option<f64>,
    /// Half-width of the window in units of `|log t|`.
    pub window: f64,
    pub eps: f64,
    pub resolution: usize,
    pub angles: usize,
    /// Discriminant graph to compare the spine against, with its divisor class override.
    pub compare: Option<(FanDocument, Option<QVec>)>,
    pub basis_change: [[i64; 2]; 2],
    pub exec: Execution,
}

impl Default for MirrorOptions {
    fn default() -> Self {
        MirrorOptions {
            t: None,
            window: 3.0,
            eps: 1.0,
            resolution: 200,
            angles: 64,
            compare: None,
            basis_change: [[-1, 0], [0, -1]],
            exec: Execution::default(),
        }
    }
}

pub struct MirrorRun {
    pub output: MirrorOutput,
    pub curve: TropicalCurve,
    pub cloud: AmoebaCloud,
    pub window: Window,
}

pub const DEFAULT_T: f64 = 0.01;

pub fn mirror(doc: &CurveDocument, opts: &MirrorOptions) -> CliResult<MirrorRun> {
    doc.validate()?;
    let t = opts.t.or(doc.t).unwrap_or(DEFAULT_T);
    if !(t > 0.0 && t < 1.0) {
        return Err(CliError::Parse(format!("t must lie in (0, 1), got {t}")));
    }
    let phi = rat_vec(&doc.phi)?;
    let curve = tropical_curve(&TropicalPolynomial::from_phi(doc.support.clone(), &phi, t)?)?;
    let coefficients: Vec<Complex64> = match &doc.coefficients {
        Some(c) => c.iter().map(|[re, im]| Complex64::new(*re, *im)).collect(),
        None => vec![Complex64::new(1.0, 0.0); doc.support.len()],
    };
    let phi_f: Vec<f64> = phi.iter().map(to_f64).collect();
    let h = curve_family(&doc.support, &phi_f, &coefficients, t)?;
    let window = Window::around(opts.window, t);
    let cloud = amoeba_sample(&h, &SamplingConfig::window(window.lo, window.hi, opts.resolution, opts.angles), opts.exec);
    let check = fattening_check(&cloud, &curve, opts.eps, window, opts.exec);
    let needed = required_eps(&fattening_distances(&cloud, &curve, window, opts.exec), 0.99);
    let comparison = match &opts.compare {
        None => None,
        Some((fan_doc, class)) => {
            let run = discriminant(fan_doc, class.clone())?;
            let c = compare_spine_to_discriminant(&curve, &run.graph, opts.basis_change)?;
            Some(ComparisonOutput {
                basis_change: opts.basis_change,
                isomorphic: c.isomorphic,
                spine_counts: [c.spine_counts.0, c.spine_counts.1, c.spine_counts.2],
                graph_counts: [c.graph_counts.0, c.graph_counts.1, c.graph_counts.2],
                vertex_map: c.vertex_map,
                scale: c.scale,
                translation: c.translation,
                max_discrepancy: c.max_discrepancy,
                failures: c.failures,
            })
        }
    };
    let spine = SpineOutput {
        unit: curve.unit,
        vertices: rows(&curve.vertices),
        bounded_edges: curve
            .bounded_edges
            .iter()
            .map(|e| SpineEdge { from: e.from, to: e.to, direction: e.direction, multiplicity: e.multiplicity })
            .collect(),
        rays: curve.rays.iter().map(|r| SpineRay { from: r.from, direction: r.direction, multiplicity: r.multiplicity }).collect(),
        lines: curve
            .lines
            .iter()
            .map(|l| SpineLine { point: vec_str(&l.point), direction: l.direction, multiplicity: l.multiplicity })
            .collect(),
        balanced: curve.is_balanced(),
    };
    let output = MirrorOutput {
        t,
        window: [window.lo, window.hi],
        spine,
        cloud: CloudSummary {
            points: cloud.points.len(),
            resolution: opts.resolution,
            angles: opts.angles,
            discarded: cloud.discarded,
            degenerate_slices: cloud.degenerate_slices,
            max_residual: cloud.max_residual,
        },
        fattening: FatteningOutput {
            eps: check.eps,
            contained: check.contained,
            covers: check.covers,
            required_eps: needed.is_finite().then_some(needed),
            cloud_points: check.cloud_points,
            spine_samples: check.spine_samples,
        },
        comparison,
    };
    Ok(MirrorRun { output, curve, cloud, window })
}

/// Cloud points as `x1,x2` rows.
pub fn cloud_csv(cloud: &AmoebaCloud) -> String {
    let mut s = String::from("log_abs_z1,log_abs_z2\n");
    for p in &cloud.points {
        s.push_str(&format!("{},{}\n", p[0], p[1]));
    }
    s
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PotentialChoice {
    Flat,
    Quadratic { lambda: f64 },
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub potential: PotentialChoice,
    pub n: usize,
    pub variant: FibrationVariant,
    pub corruption: Corruption,
    pub fibers: usize,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub exec: Execution,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            potential: PotentialChoice::Flat,
            n: 3,
            variant: FibrationVariant::Affine,
            corruption: Corruption::None,
            fibers: 10,
            samples: 100,
            seed: 0,
            tol: 1e-6,
            exec: Execution::default(),
        }
    }
}

pub fn variant_name(v: FibrationVariant) -> &'static str {
    match v {
        FibrationVariant::Affine => "affine",
        FibrationVariant::Proper => "proper",
    }
}

pub fn corruption_name(c: Corruption) -> &'static str {
    match c {
        Corruption::None => "none",
        Corruption::DropPhi1 => "drop-phi1",
        Corruption::WrongPhase => "wrong-phase",
    }
}

/// Fiber certification plus the Hamiltonian identity on as many random points as fiber samples.
pub fn verify(opts: &VerifyOptions) -> CliResult<VerifyOutput> {
    if opts.n < 2 {
        return Err(CliError::Parse("--n must be at least 2".into()));
    }
    let (p, potential, lambda) = match opts.potential {
        PotentialChoice::Flat => (TorusInvariantPotential::flat(opts.n), "flat", None),
        PotentialChoice::Quadratic { lambda } => (TorusInvariantPotential::quadratic(opts.n, lambda), "quadratic", Some(lambda)),
    };
    let cfg = VerifyConfig {
        variant: opts.variant,
        corruption: opts.corruption,
        fibers: opts.fibers,
        points_per_fiber: opts.samples,
        seed: opts.seed,
        tol: opts.tol,
        ..VerifyConfig::default()
    };
    let r = certify_fibers(&p, &cfg, opts.exec)?;
    let ham = max_hamiltonian_residual(&p, opts.samples, opts.seed, cfg.h_fd, opts.exec)?;
    Ok(VerifyOutput {
        potential: potential.to_string(),
        lambda,
        n: opts.n,
        variant: variant_name(opts.variant).to_string(),
        corruption: corruption_name(opts.corruption).to_string(),
        fibers: opts.fibers,
        points_per_fiber: opts.samples,
        seed: opts.seed,
        tol: opts.tol,
        points: r.points,
        max_omega: r.max_omega,
        max_im_omega: r.max_im_omega,
        max_fiber_drift: r.max_fiber_drift,
        critical_points: r.critical_points,
        rejected_samples: r.rejected_samples,
        max_hamiltonian: ham,
        pass: r.pass && ham < opts.tol,
    })
}
