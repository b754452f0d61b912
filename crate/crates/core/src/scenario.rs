//! Scenario files: a mesh, the form degree, the potential and the parameters
//! of every experiment, read from JSON with field-path error reporting.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use crate::complex::{MeshFile, MeshSpec, MetricData, SimplicialComplex};
use crate::error::{Error, Result};
use crate::gap::GapStudySpec;
use crate::operators::OperatorBundle;

/// Newtonian potential on the vertices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhiSpec {
    Constant {
        value: f64,
    },
    /// One value per vertex.
    Table {
        values: Vec<f64>,
    },
    /// `slope · (hop distance from center)`.
    Radial {
        center: usize,
        slope: f64,
    },
    /// Uniform in `[-amplitude, amplitude]`, drawn from the scenario seed.
    Random {
        amplitude: f64,
    },
}

impl Default for PhiSpec {
    fn default() -> Self {
        PhiSpec::Constant { value: 0.0 }
    }
}

impl PhiSpec {
    pub fn evaluate(&self, complex: &SimplicialComplex, seed: u64) -> Result<Vec<f64>> {
        let nv = complex.num_vertices();
        match self {
            PhiSpec::Constant { value } => Ok(vec![*value; nv]),
            PhiSpec::Table { values } => {
                if values.len() != nv {
                    return Err(Error::Dimension { expected: nv, found: values.len() });
                }
                Ok(values.clone())
            }
            PhiSpec::Radial { center, slope } => {
                if *center >= nv {
                    return Err(Error::InvalidParameter(format!("radial center {center} is not a vertex")));
                }
                let hops = complex.hop_distance(*center);
                if hops.contains(&usize::MAX) {
                    return Err(Error::Complex("radial potential needs a connected complex".into()));
                }
                Ok(hops.iter().map(|&h| slope * h as f64).collect())
            }
            PhiSpec::Random { amplitude } => {
                if !(amplitude.is_finite() && *amplitude >= 0.0) {
                    return Err(Error::InvalidParameter(format!("random amplitude {amplitude}")));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
                let dist = Uniform::new_inclusive(-amplitude, *amplitude)
                    .map_err(|e| Error::InvalidParameter(e.to_string()))?;
                Ok((0..nv).map(|_| dist.sample(&mut rng)).collect())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveSpec {
    pub t_max: f64,
    pub steps: usize,
    /// Scale of the random initial phase point.
    pub scale: f64,
}

impl Default for EvolveSpec {
    fn default() -> Self {
        EvolveSpec { t_max: 10.0, steps: 100, scale: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuantizeSpec {
    /// Number of random coherent labels.
    pub labels: usize,
    pub scale: f64,
    pub wick_max: u32,
}

impl Default for QuantizeSpec {
    fn default() -> Self {
        QuantizeSpec { labels: 3, scale: 0.3, wick_max: 4 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WilsonSpec {
    /// `(simplex index, ±1)` entries of the closed chain.
    #[serde(rename = "loop")]
    pub chain: Vec<(usize, i8)>,
    pub t: f64,
    pub h: f64,
}

impl Default for WilsonSpec {
    fn default() -> Self {
        WilsonSpec { chain: Vec::new(), t: 0.5, h: crate::wilson::DEFAULT_STEP }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub mesh: Option<MeshSpec>,
    /// Mesh file path, relative to the scenario file.
    #[serde(default)]
    pub mesh_file: Option<PathBuf>,
    /// Manifold dimension; checked against the mesh when given.
    #[serde(default)]
    pub n: Option<usize>,
    pub p: usize,
    #[serde(default)]
    pub phi: PhiSpec,
    /// Overrides the conformal twist coefficient `(n - 2p - 1) / 2`.
    #[serde(default)]
    pub twist: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    /// Output directory, relative to the scenario file.
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub evolve: EvolveSpec,
    #[serde(default)]
    pub quantize: QuantizeSpec,
    #[serde(default)]
    pub wilson: WilsonSpec,
    #[serde(default)]
    pub gap_study: GapStudySpec,
}

/// Parse failure located by JSON field path and source position.
#[derive(Clone, Debug, PartialEq)]
pub struct ParseFailure {
    pub path: String,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl std::fmt::Display for ParseFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}, column {}, field `{}`: {}", self.line, self.column, self.path, self.message)
    }
}

/// A scenario resolved into a complex, its metric and the operators of degree `p`.
#[derive(Clone, Debug)]
pub struct Setup {
    pub complex: SimplicialComplex,
    pub metric: MetricData,
    pub bundle: OperatorBundle,
}

impl Scenario {
    pub fn from_json(text: &str) -> std::result::Result<Self, ParseFailure> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            ParseFailure { path, line: inner.line(), column: inner.column(), message: inner.to_string() }
        })
    }

    pub fn load(path: &Path) -> Result<std::result::Result<Self, ParseFailure>> {
        Ok(Self::from_json(&std::fs::read_to_string(path)?))
    }

    /// Generates or loads the mesh, applies the potential and assembles the operators.
    pub fn build(&self, base: &Path) -> Result<Setup> {
        let (complex, mut metric) = match (&self.mesh, &self.mesh_file) {
            (Some(spec), None) => {
                let mesh = spec.generate()?;
                (mesh.complex, mesh.metric)
            }
            (None, Some(file)) => MeshFile::load(base.join(file))?,
            _ => return Err(Error::InvalidParameter("give exactly one of `mesh` and `mesh_file`".into())),
        };
        if let Some(n) = self.n {
            if n != complex.dimension() {
                return Err(Error::InvalidParameter(format!(
                    "scenario says n = {n} but the mesh has dimension {}",
                    complex.dimension()
                )));
            }
        }
        if self.p > complex.dimension() {
            return Err(Error::degree(self.p as isize, 0, complex.dimension() as isize));
        }
        if self.mesh.is_some() || !matches!(self.phi, PhiSpec::Constant { value } if value == 0.0) {
            metric.phi = self.phi.evaluate(&complex, self.seed)?;
        }
        let bundle = OperatorBundle::assemble(&complex, &metric, self.p, self.twist)?;
        Ok(Setup { complex, metric, bundle })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_scenario() {
        let s = Scenario::from_json(r#"{"mesh": {"kind": "torus", "n": 4, "m": 4}, "p": 1}"#).unwrap();
        assert_eq!(s.seed, 0);
        assert_eq!(s.evolve, EvolveSpec::default());
        let setup = s.build(Path::new(".")).unwrap();
        assert_eq!(setup.bundle.size(1), 48);
    }

    #[test]
    fn errors_name_the_field() {
        let text = "{\n  \"mesh\": {\"kind\": \"torus\", \"n\": 4, \"m\": 4},\n  \"p\": 1,\n  \"evolve\": {\"steps\": \"many\"}\n}";
        let e = Scenario::from_json(text).unwrap_err();
        assert_eq!(e.path, "evolve.steps");
        assert_eq!(e.line, 4);
        let e = Scenario::from_json(r#"{"p": 1, "bogus": 3}"#).unwrap_err();
        assert!(e.message.contains("bogus"), "{e}");
    }

    #[test]
    fn dimension_and_degree_are_checked() {
        let s = Scenario::from_json(r#"{"mesh": {"kind": "circle", "n": 5}, "n": 2, "p": 0}"#).unwrap();
        assert!(matches!(s.build(Path::new(".")), Err(Error::InvalidParameter(_))));
        let s = Scenario::from_json(r#"{"mesh": {"kind": "circle", "n": 5}, "p": 2}"#).unwrap();
        assert!(matches!(s.build(Path::new(".")), Err(Error::Degree { .. })));
    }

    #[test]
    fn potentials() {
        let mesh = MeshSpec::Disc { rings: 2, sectors: 4, profile: Default::default() }.generate().unwrap();
        let radial = PhiSpec::Radial { center: 0, slope: 0.5 }.evaluate(&mesh.complex, 0).unwrap();
        assert_eq!(radial[0], 0.0);
        assert_eq!(radial[8], 1.0);
        let r1 = PhiSpec::Random { amplitude: 0.2 }.evaluate(&mesh.complex, 7).unwrap();
        let r2 = PhiSpec::Random { amplitude: 0.2 }.evaluate(&mesh.complex, 7).unwrap();
        assert_eq!(r1, r2);
        assert!(r1.iter().all(|x| x.abs() <= 0.2));
        assert!(PhiSpec::Table { values: vec![0.0; 3] }.evaluate(&mesh.complex, 0).is_err());
    }
}
