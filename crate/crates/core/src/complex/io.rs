use serde::{Deserialize, Serialize};

use super::{MetricData, SimplicialComplex};
use crate::error::{Error, Result};

/// On-disk mesh document: the complex, its dual volumes and the potential.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshFile {
    pub dimension: usize,
    pub simplices: Vec<Vec<Vec<usize>>>,
    pub dual_volumes: Vec<Vec<f64>>,
    pub phi: Vec<f64>,
}

impl MeshFile {
    pub fn new(complex: &SimplicialComplex, metric: &MetricData) -> Self {
        MeshFile {
            dimension: complex.dimension(),
            simplices: complex.levels().to_vec(),
            dual_volumes: metric.dual_volumes.clone(),
            phi: metric.phi.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(crate::json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn into_parts(self) -> Result<(SimplicialComplex, MetricData)> {
        if self.dimension != self.simplices.len().saturating_sub(1) {
            return Err(Error::Complex(format!(
                "dimension {} but {} simplex levels",
                self.dimension,
                self.simplices.len()
            )));
        }
        let complex = SimplicialComplex::from_simplices(self.dimension, self.simplices)?;
        let metric = MetricData::new(self.dual_volumes, self.phi);
        metric.validate(&complex)?;
        Ok((complex, metric))
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<(SimplicialComplex, MetricData)> {
        Self::from_json(&std::fs::read_to_string(path)?)?.into_parts()
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{MeshSpec, WeightProfile};

    #[test]
    fn save_load_is_bit_identical() {
        let mut mesh =
            MeshSpec::Disc { rings: 3, sectors: 5, profile: WeightProfile::HyperbolicLike }.generate().unwrap();
        mesh.metric.phi = (0..mesh.complex.num_vertices()).map(|i| (i as f64 * 0.37).sin() / 3.0).collect();
        let text = MeshFile::new(&mesh.complex, &mesh.metric).to_json().unwrap();
        let (c, m) = MeshFile::from_json(&text).unwrap().into_parts().unwrap();
        assert_eq!(c, mesh.complex);
        for (a, b) in m.dual_volumes.iter().flatten().zip(mesh.metric.dual_volumes.iter().flatten()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        for (a, b) in m.phi.iter().zip(&mesh.metric.phi) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(MeshFile::new(&c, &m).to_json().unwrap(), text);
    }

    #[test]
    fn rejects_inconsistent_documents() {
        let doc = r#"{"dimension":1,"simplices":[[[0],[1]],[[0,1]]],"dual_volumes":[[1,1],[-1]],"phi":[0,0]}"#;
        assert!(matches!(MeshFile::from_json(doc).unwrap().into_parts(), Err(Error::Metric(_))));
        let doc = r#"{"dimension":2,"simplices":[[[0],[1]],[[0,1]]],"dual_volumes":[[1,1],[1]],"phi":[0,0]}"#;
        assert!(MeshFile::from_json(doc).unwrap().into_parts().is_err());
        assert!(matches!(MeshFile::from_json("{"), Err(Error::Parse(_))));
    }
}
