//! JSON documents read and written by the command-line tool.
//!
//! Exact values are carried as `"p/q"` strings.

use serde::{Deserialize, Serialize};
use slag_toric::cones::Triangulation;
use slag_toric::deformations::GaussianRational;
use slag_toric::lattice::{parse_rational, LatticeSpec, QVec, Rational};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

pub fn rat(s: &str) -> CliResult<Rational> {
    Ok(parse_rational(s)?)
}

pub fn rat_vec(v: &[String]) -> CliResult<QVec> {
    v.iter().map(|s| rat(s)).collect()
}

pub fn rat_str(r: &Rational) -> String {
    r.to_string()
}

pub fn vec_str(v: &[Rational]) -> Vec<String> {
    v.iter().map(rat_str).collect()
}

pub fn int_strs<T: ToString>(v: &[T]) -> Vec<String> {
    v.iter().map(ToString::to_string).collect()
}

fn check_version(v: u32) -> CliResult<()> {
    if v != SCHEMA_VERSION {
        return Err(CliError::Parse(format!("unsupported schema_version {v}")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeDoc {
    pub rank: usize,
    /// Generators of the lattice, one per row, in ambient coordinates.
    pub basis: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TriangulationDoc {
    Star { star: Vec<String> },
    Explicit { points: Vec<Vec<String>>, simplices: Vec<Vec<usize>> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiftEntry {
    pub ray: Vec<String>,
    pub value: String,
}

/// A cone (or fan) together with optional resolution and divisor data.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FanDocument {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<LatticeDoc>,
    pub rays: Vec<Vec<String>>,
    /// Maximal cones as ray index lists; empty means the single cone over all rays.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cones: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub triangulation: Option<TriangulationDoc>,
    /// Divisor class in kernel coordinates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<Vec<String>>,
    /// Heights `x0` on rays of the resolved fan; unlisted rays get 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lift: Option<Vec<LiftEntry>>,
    /// Projection frame for the discriminant graph, replacing the adapted basis coordinates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<Vec<Vec<String>>>,
}

impl FanDocument {
    pub fn validate(&self) -> CliResult<()> {
        check_version(self.schema_version)?;
        let n = self.rank();
        if n == 0 {
            return Err(CliError::Parse("no rays".into()));
        }
        for r in &self.rays {
            if r.len() != n {
                return Err(CliError::Parse(format!("ray of length {} in rank {n}", r.len())));
            }
            rat_vec(r)?;
        }
        for c in &self.cones {
            if let Some(&i) = c.iter().find(|&&i| i >= self.rays.len()) {
                return Err(CliError::Parse(format!("cone index {i} out of bounds")));
            }
        }
        if let Some(TriangulationDoc::Explicit { points, simplices }) = &self.triangulation {
            for s in simplices {
                if let Some(&i) = s.iter().find(|&&i| i >= points.len()) {
                    return Err(CliError::Parse(format!("simplex index {i} out of bounds")));
                }
            }
        }
        self.lattice_spec()?;
        Ok(())
    }

    pub fn rank(&self) -> usize {
        self.lattice.as_ref().map_or_else(|| self.rays.first().map_or(0, Vec::len), |l| l.rank)
    }

    pub fn lattice_spec(&self) -> CliResult<LatticeSpec> {
        match &self.lattice {
            None => Ok(LatticeSpec::standard(self.rank())),
            Some(l) => {
                if l.basis.len() != l.rank || l.basis.iter().any(|b| b.len() != l.rank) {
                    return Err(CliError::Parse("lattice basis must be rank x rank".into()));
                }
                let gens = l.basis.iter().map(|b| rat_vec(b)).collect::<CliResult<Vec<_>>>()?;
                Ok(LatticeSpec::new(&gens)?)
            }
        }
    }

    pub fn ray_vectors(&self) -> CliResult<Vec<QVec>> {
        self.rays.iter().map(|r| rat_vec(r)).collect()
    }

    pub fn triangulation(&self) -> CliResult<Option<TriangulationSpec>> {
        Ok(match &self.triangulation {
            None => None,
            Some(TriangulationDoc::Star { star }) => Some(TriangulationSpec::Star(rat_vec(star)?)),
            Some(TriangulationDoc::Explicit { points, simplices }) => Some(TriangulationSpec::Explicit(Triangulation {
                points: points.iter().map(|p| rat_vec(p)).collect::<CliResult<_>>()?,
                simplices: simplices.clone(),
            })),
        })
    }

    pub fn frame_vectors(&self) -> CliResult<Option<Vec<QVec>>> {
        self.frame.as_ref().map(|f| f.iter().map(|v| rat_vec(v)).collect()).transpose()
    }
}

pub enum TriangulationSpec {
    Star(QVec),
    Explicit(Triangulation),
}

/// A lattice polygon with deformation parameters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolygonDocument {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub vertices: Vec<[i64; 2]>,
    /// Only report decompositions that cannot be refined.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub maximal_only: Option<bool>,
    /// Bound on the number of primitive edge segments searched.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    /// Deformation parameters `x_k` as `[re, im]` pairs, one per summand.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<[String; 2]>>,
    /// Dimension `n` of the Calabi-Yau, fixing the phase `i^(n+1)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
}

impl PolygonDocument {
    pub fn validate(&self) -> CliResult<()> {
        check_version(self.schema_version)?;
        self.parameters()?;
        Ok(())
    }

    pub fn parameters(&self) -> CliResult<Option<Vec<GaussianRational>>> {
        self.x.as_ref().map(|xs| parse_parameters(xs)).transpose()
    }
}

pub fn parse_parameters(xs: &[[String; 2]]) -> CliResult<Vec<GaussianRational>> {
    xs.iter().map(|[re, im]| Ok(GaussianRational::new(rat(re)?, rat(im)?))).collect()
}

/// A tropical family `Σ m_c t^{φ(c)} z^c`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveDocument {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub support: Vec<[i64; 2]>,
    /// Heights `φ(c)`.
    pub phi: Vec<String>,
    /// Complex coefficients `m_c` as `[re, im]`; all ones when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
}

impl CurveDocument {
    pub fn validate(&self) -> CliResult<()> {
        check_version(self.schema_version)?;
        if self.phi.len() != self.support.len() {
            return Err(CliError::Parse(format!("{} heights for {} exponents", self.phi.len(), self.support.len())));
        }
        if let Some(c) = &self.coefficients {
            if c.len() != self.support.len() {
                return Err(CliError::Parse(format!("{} coefficients for {} exponents", c.len(), self.support.len())));
            }
        }
        rat_vec(&self.phi)?;
        Ok(())
    }
}

pub fn parse_json<T: serde::de::DeserializeOwned>(text: &str) -> CliResult<T> {
    serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
}

pub fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("documents always serialize");
    s.push('\n');
    s
}
