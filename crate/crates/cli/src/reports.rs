//! Report documents emitted by every subcommand.

use serde::{Deserialize, Serialize};

use crate::documents::SCHEMA_VERSION;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: u32,
    pub command: String,
    pub tool_version: String,
    /// Input document and options as given.
    pub inputs: serde_json::Value,
    pub outputs: Outputs,
    /// Wall time, only present when requested, so that reports stay reproducible by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

impl ReportDocument {
    pub fn new(command: &str, inputs: serde_json::Value, outputs: Outputs) -> Self {
        ReportDocument {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            inputs,
            outputs,
            timing_ms: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)]
pub enum Outputs {
    Gorenstein(GorensteinOutput),
    Discriminant(DiscriminantOutput),
    Smooth(SmoothOutput),
    Mirror(MirrorOutput),
    Verify(VerifyOutput),
}

pub type QRow = Vec<String>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FanOutput {
    pub rays: Vec<QRow>,
    pub max_cones: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GorensteinOutput {
    pub m0: QRow,
    /// Vertices of the cross-section `P`.
    pub cross_section: Vec<QRow>,
    pub normalized_volume: String,
    pub fan: FanOutput,
    pub smooth: bool,
    pub non_smooth_cones: Vec<Vec<usize>>,
    /// Only set when the document carries a triangulation.
    pub crepant: Option<bool>,
    /// Integer kernel of the ray map of the fan, when the rays generate the lattice.
    pub ray_map_kernel: Option<Vec<QRow>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SkeletonOutput {
    Bounded { from: usize, to: usize, facets: Vec<usize> },
    Ray { from: usize, direction: QRow, facets: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HalfSpace {
    pub normal: QRow,
    pub offset: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolytopeOutput {
    /// `<m, normal> + offset >= 0`.
    pub h_rep: Vec<HalfSpace>,
    pub vertices: Vec<QRow>,
    pub rays: Vec<QRow>,
    pub skeleton: Vec<SkeletonOutput>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphRay {
    pub vertex: usize,
    pub direction: QRow,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeLabelOutput {
    pub pair: Option<[QRow; 2]>,
    pub delta: Option<QRow>,
    pub coefficients: Option<QRow>,
    pub monodromy: Vec<QRow>,
    pub fiber: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphOutput {
    pub n: usize,
    pub proper: bool,
    pub vertices: Vec<QRow>,
    pub vertex_types: Vec<String>,
    pub bounded_edges: Vec<[usize; 2]>,
    pub rays: Vec<GraphRay>,
    /// Bounded edges first, then rays.
    pub edge_labels: Vec<EdgeLabelOutput>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualOutput {
    pub graph: GraphOutput,
    pub circle_classes: Vec<Option<QRow>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscriminantOutput {
    pub m0: QRow,
    pub fan_rays: Vec<QRow>,
    pub class: QRow,
    /// Heights `x0` on the fan rays.
    pub lift: QRow,
    pub polytope: PolytopeOutput,
    pub basis_e: Vec<QRow>,
    pub basis_f: Vec<QRow>,
    pub frame: Option<Vec<QRow>>,
    pub graph: GraphOutput,
    pub consistent: bool,
    pub offending_vertices: Vec<usize>,
    pub dual: Option<DualOutput>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AltmannOutput {
    pub generators: Vec<QRow>,
    pub m0_prime: QRow,
    pub gorenstein: bool,
    pub embedding_verified: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentOutput {
    pub summand: usize,
    pub plane_value: String,
    pub direction: [i64; 2],
    pub edge: [[i64; 2]; 2],
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmoothingOutput {
    pub parameters: Vec<[String; 2]>,
    pub plane_values: QRow,
    pub components: Vec<ComponentOutput>,
    pub distinct_planes: usize,
    pub generic: bool,
    /// Distinct planes once every parameter is sent to 0.
    pub distinct_planes_at_zero: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionOutput {
    pub p: usize,
    pub summands: Vec<Vec<[i64; 2]>>,
    pub altmann: AltmannOutput,
    pub smoothing: SmoothingOutput,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmoothOutput {
    pub polygon: Vec<[i64; 2]>,
    pub n: usize,
    pub maximal_only: bool,
    pub budget: usize,
    pub decompositions: Vec<DecompositionOutput>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpineEdge {
    pub from: usize,
    pub to: usize,
    pub direction: [i64; 2],
    pub multiplicity: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpineRay {
    pub from: usize,
    pub direction: [i64; 2],
    pub multiplicity: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpineLine {
    pub point: QRow,
    pub direction: [i64; 2],
    pub multiplicity: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpineOutput {
    /// `|log t|`; exact coordinates below are in these units.
    pub unit: f64,
    pub vertices: Vec<QRow>,
    pub bounded_edges: Vec<SpineEdge>,
    pub rays: Vec<SpineRay>,
    pub lines: Vec<SpineLine>,
    pub balanced: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CloudSummary {
    pub points: usize,
    pub resolution: usize,
    pub angles: usize,
    pub discarded: usize,
    pub degenerate_slices: usize,
    pub max_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FatteningOutput {
    pub eps: f64,
    pub contained: f64,
    pub covers: f64,
    /// Smallest eps reaching 0.99 for both fractions; absent when there is nothing to measure.
    pub required_eps: Option<f64>,
    pub cloud_points: usize,
    pub spine_samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonOutput {
    pub basis_change: [[i64; 2]; 2],
    pub isomorphic: bool,
    pub spine_counts: [usize; 3],
    pub graph_counts: [usize; 3],
    pub vertex_map: Option<Vec<usize>>,
    pub scale: f64,
    pub translation: [f64; 2],
    pub max_discrepancy: f64,
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MirrorOutput {
    pub t: f64,
    pub window: [f64; 2],
    pub spine: SpineOutput,
    pub cloud: CloudSummary,
    pub fattening: FatteningOutput,
    pub comparison: Option<ComparisonOutput>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyOutput {
    pub potential: String,
    pub lambda: Option<f64>,
    pub n: usize,
    pub variant: String,
    pub corruption: String,
    pub fibers: usize,
    pub points_per_fiber: usize,
    pub seed: u64,
    pub tol: f64,
    pub points: usize,
    pub max_omega: f64,
    pub max_im_omega: f64,
    pub max_fiber_drift: f64,
    pub critical_points: usize,
    pub rejected_samples: usize,
    pub max_hamiltonian: f64,
    pub pass: bool,
}
