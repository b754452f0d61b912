use nalgebra::DVector;

use super::SimplicialComplex;
use crate::error::{Error, Result};

/// Lumped Hodge star weights per simplex and the Newtonian potential per vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricData {
    pub dual_volumes: Vec<Vec<f64>>,
    pub phi: Vec<f64>,
}

impl MetricData {
    pub fn new(dual_volumes: Vec<Vec<f64>>, phi: Vec<f64>) -> Self {
        MetricData { dual_volumes, phi }
    }

    pub fn uniform(complex: &SimplicialComplex) -> Self {
        MetricData {
            dual_volumes: complex.levels().iter().map(|l| vec![1.0; l.len()]).collect(),
            phi: vec![0.0; complex.num_vertices()],
        }
    }

    pub fn validate(&self, complex: &SimplicialComplex) -> Result<()> {
        if self.dual_volumes.len() != complex.dimension() + 1 {
            return Err(Error::Metric(format!(
                "dual volumes given for {} degrees, complex has {}",
                self.dual_volumes.len(),
                complex.dimension() + 1
            )));
        }
        for (k, w) in self.dual_volumes.iter().enumerate() {
            if w.len() != complex.count(k) {
                return Err(Error::Metric(format!(
                    "degree {k}: {} dual volumes for {} simplices",
                    w.len(),
                    complex.count(k)
                )));
            }
            if let Some((i, &x)) = w.iter().enumerate().find(|(_, &x)| !(x > 0.0 && x.is_finite())) {
                return Err(Error::Metric(format!("degree {k}: dual volume {x} at simplex {i}")));
            }
        }
        if self.phi.len() != complex.num_vertices() {
            return Err(Error::Metric(format!(
                "{} potential values for {} vertices",
                self.phi.len(),
                complex.num_vertices()
            )));
        }
        if let Some(i) = self.phi.iter().position(|x| !x.is_finite()) {
            return Err(Error::Metric(format!("potential is not finite at vertex {i}")));
        }
        Ok(())
    }
}

/// Diagonal of the lumped mass matrix `M_k`.
pub fn mass_matrix(complex: &SimplicialComplex, metric: &MetricData, k: usize) -> Result<DVector<f64>> {
    let w = metric.dual_volumes.get(k).ok_or_else(|| Error::Metric(format!("no dual volumes for degree {k}")))?;
    if w.len() != complex.count(k) {
        return Err(Error::Metric(format!("degree {k}: {} weights for {} simplices", w.len(), complex.count(k))));
    }
    if let Some(&x) = w.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::Metric(format!("nonpositive dual volume {x} in degree {k}")));
    }
    Ok(DVector::from_column_slice(w))
}

/// Diagonal twist weights `exp(c · mean φ)` for every degree.
pub fn twist_weights(complex: &SimplicialComplex, metric: &MetricData, coefficient: f64) -> Result<Vec<DVector<f64>>> {
    if metric.phi.len() != complex.num_vertices() {
        return Err(Error::Metric("potential does not cover every vertex".into()));
    }
    if !coefficient.is_finite() {
        return Err(Error::InvalidParameter(format!("twist coefficient {coefficient}")));
    }
    complex
        .levels()
        .iter()
        .map(|level| {
            let w = DVector::from_iterator(
                level.len(),
                level.iter().map(|s| {
                    let mean = s.iter().map(|&v| metric.phi[v]).sum::<f64>() / s.len() as f64;
                    (coefficient * mean).exp()
                }),
            );
            if w.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
                return Err(Error::Metric("twist weight overflow".into()));
            }
            Ok(w)
        })
        .collect()
}
