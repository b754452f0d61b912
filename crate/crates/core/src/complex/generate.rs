use serde::{Deserialize, Serialize};

use super::{MetricData, SimplicialComplex};
use crate::error::{Error, Result};

/// Radial weight profile for the disc and cylinder generators.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightProfile {
    /// Every dual volume equals one.
    #[default]
    Flat,
    /// Dual volumes scaled by `exp(r)`, `r` the mean ring index of the simplex.
    HyperbolicLike,
}

impl WeightProfile {
    fn factor(self, radius: f64) -> f64 {
        match self {
            WeightProfile::Flat => 1.0,
            WeightProfile::HyperbolicLike => radius.exp(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeshSpec {
    Circle {
        n: usize,
    },
    Interval {
        n: usize,
    },
    Torus {
        n: usize,
        m: usize,
    },
    SphereOctahedron {
        subdiv: usize,
    },
    Disc {
        rings: usize,
        sectors: usize,
        #[serde(default)]
        profile: WeightProfile,
    },
    Cylinder {
        n: usize,
        m: usize,
        #[serde(default)]
        profile: WeightProfile,
    },
}

/// A generated complex together with its metric (potential set to zero).
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    pub complex: SimplicialComplex,
    pub metric: MetricData,
}

impl MeshSpec {
    pub fn dimension(&self) -> usize {
        match self {
            MeshSpec::Circle { .. } | MeshSpec::Interval { .. } => 1,
            _ => 2,
        }
    }

    /// Euler characteristic of the surface being triangulated.
    pub fn expected_euler(&self) -> i64 {
        match self {
            MeshSpec::Circle { .. } | MeshSpec::Torus { .. } | MeshSpec::Cylinder { .. } => 0,
            MeshSpec::Interval { .. } | MeshSpec::Disc { .. } => 1,
            MeshSpec::SphereOctahedron { .. } => 2,
        }
    }

    pub fn generate(&self) -> Result<Mesh> {
        let (complex, radius, profile) = match *self {
            MeshSpec::Circle { n } => {
                need(n >= 3, "circle needs at least 3 vertices")?;
                let edges = (0..n).map(|i| vec![i, (i + 1) % n]);
                (SimplicialComplex::from_top_simplices(1, n, edges)?, None, WeightProfile::Flat)
            }
            MeshSpec::Interval { n } => {
                need(n >= 1, "interval needs at least 1 segment")?;
                let edges = (0..n).map(|i| vec![i, i + 1]);
                (SimplicialComplex::from_top_simplices(1, n + 1, edges)?, None, WeightProfile::Flat)
            }
            MeshSpec::Torus { n, m } => {
                need(n >= 3 && m >= 3, "torus needs n, m >= 3")?;
                let v = |i: usize, j: usize| (i % n) + n * (j % m);
                let tris = (0..m).flat_map(|j| {
                    (0..n).flat_map(move |i| {
                        [vec![v(i, j), v(i + 1, j), v(i + 1, j + 1)], vec![v(i, j), v(i, j + 1), v(i + 1, j + 1)]]
                    })
                });
                (SimplicialComplex::from_top_simplices(2, n * m, tris)?, None, WeightProfile::Flat)
            }
            MeshSpec::SphereOctahedron { subdiv } => {
                need(subdiv <= 6, "sphere subdivision level above 6 is too large")?;
                let (nv, tris) = octahedron(subdiv);
                (SimplicialComplex::from_top_simplices(2, nv, tris)?, None, WeightProfile::Flat)
            }
            MeshSpec::Disc { rings, sectors, profile } => {
                need(rings >= 1 && sectors >= 3, "disc needs rings >= 1 and sectors >= 3")?;
                let v = |ring: usize, j: usize| if ring == 0 { 0 } else { 1 + (ring - 1) * sectors + j % sectors };
                let mut tris = Vec::new();
                for j in 0..sectors {
                    tris.push(vec![0, v(1, j), v(1, j + 1)]);
                }
                for r in 1..rings {
                    for j in 0..sectors {
                        tris.push(vec![v(r, j), v(r + 1, j), v(r + 1, j + 1)]);
                        tris.push(vec![v(r, j), v(r, j + 1), v(r + 1, j + 1)]);
                    }
                }
                let nv = 1 + rings * sectors;
                let radius: Vec<f64> =
                    (0..nv).map(|i| if i == 0 { 0.0 } else { (1 + (i - 1) / sectors) as f64 }).collect();
                (SimplicialComplex::from_top_simplices(2, nv, tris)?, Some(radius), profile)
            }
            MeshSpec::Cylinder { n, m, profile } => {
                need(n >= 3 && m >= 1, "cylinder needs n >= 3 and m >= 1")?;
                let v = |i: usize, j: usize| (i % n) + n * j;
                let tris = (0..m).flat_map(|j| {
                    (0..n).flat_map(move |i| {
                        [vec![v(i, j), v(i + 1, j), v(i + 1, j + 1)], vec![v(i, j), v(i, j + 1), v(i + 1, j + 1)]]
                    })
                });
                let nv = n * (m + 1);
                let radius: Vec<f64> = (0..nv).map(|i| (i / n) as f64).collect();
                (SimplicialComplex::from_top_simplices(2, nv, tris)?, Some(radius), profile)
            }
        };
        let euler = complex.euler_characteristic();
        if euler != self.expected_euler() {
            return Err(Error::Complex(format!(
                "generated mesh has Euler characteristic {euler}, expected {}",
                self.expected_euler()
            )));
        }
        let dual_volumes = complex
            .levels()
            .iter()
            .map(|level| {
                level
                    .iter()
                    .map(|s| match &radius {
                        Some(r) => {
                            let mean = s.iter().map(|&v| r[v]).sum::<f64>() / s.len() as f64;
                            profile.factor(mean)
                        }
                        None => 1.0,
                    })
                    .collect()
            })
            .collect();
        let metric = MetricData::new(dual_volumes, vec![0.0; complex.num_vertices()]);
        metric.validate(&complex)?;
        Ok(Mesh { complex, metric })
    }
}

fn need(ok: bool, msg: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg.to_string()))
    }
}

/// Octahedron refined `levels` times by midpoint (1-to-4) subdivision.
fn octahedron(levels: usize) -> (usize, Vec<Vec<usize>>) {
    // +x, -x, +y, -y, +z, -z
    let mut tris: Vec<[usize; 3]> = Vec::new();
    for &x in &[0, 1] {
        for &y in &[2, 3] {
            for &z in &[4, 5] {
                tris.push([x, y, z]);
            }
        }
    }
    let mut nv = 6;
    for _ in 0..levels {
        let mut midpoint = std::collections::BTreeMap::new();
        let mut mid = |a: usize, b: usize, nv: &mut usize| {
            *midpoint.entry((a.min(b), a.max(b))).or_insert_with(|| {
                *nv += 1;
                *nv - 1
            })
        };
        let mut next = Vec::with_capacity(tris.len() * 4);
        for [a, b, c] in tris {
            let ab = mid(a, b, &mut nv);
            let bc = mid(b, c, &mut nv);
            let ca = mid(c, a, &mut nv);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        tris = next;
    }
    (nv, tris.into_iter().map(|t| t.to_vec()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(spec: MeshSpec) -> Vec<usize> {
        let c = spec.generate().unwrap().complex;
        (0..=c.dimension()).map(|k| c.count(k)).collect()
    }

    #[test]
    fn standard_counts() {
        assert_eq!(counts(MeshSpec::Torus { n: 4, m: 4 }), vec![16, 48, 32]);
        assert_eq!(counts(MeshSpec::Circle { n: 4 }), vec![4, 4]);
        assert_eq!(counts(MeshSpec::SphereOctahedron { subdiv: 0 }), vec![6, 12, 8]);
        assert_eq!(counts(MeshSpec::SphereOctahedron { subdiv: 1 }), vec![18, 48, 32]);
        assert_eq!(counts(MeshSpec::Interval { n: 3 }), vec![4, 3]);
        assert_eq!(counts(MeshSpec::Disc { rings: 2, sectors: 4, profile: WeightProfile::Flat }), vec![9, 20, 12]);
        assert_eq!(counts(MeshSpec::Cylinder { n: 3, m: 2, profile: WeightProfile::Flat }), vec![9, 21, 12]);
    }

    #[test]
    fn too_small_parameters_rejected() {
        for spec in [
            MeshSpec::Torus { n: 2, m: 4 },
            MeshSpec::Circle { n: 2 },
            MeshSpec::Interval { n: 0 },
            MeshSpec::Disc { rings: 0, sectors: 4, profile: WeightProfile::Flat },
            MeshSpec::Cylinder { n: 2, m: 1, profile: WeightProfile::Flat },
        ] {
            assert!(matches!(spec.generate(), Err(Error::InvalidParameter(_))), "{spec:?}");
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = MeshSpec::SphereOctahedron { subdiv: 2 };
        assert_eq!(spec.generate().unwrap(), spec.generate().unwrap());
    }

    #[test]
    fn hyperbolic_profile_grows_outward() {
        let mesh = MeshSpec::Disc { rings: 3, sectors: 4, profile: WeightProfile::HyperbolicLike }.generate().unwrap();
        let w = &mesh.metric.dual_volumes[0];
        assert_eq!(w[0], 1.0);
        assert!((w[1] - 1f64.exp()).abs() < 1e-15);
        assert!((w[w.len() - 1] - 3f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn spec_json_shape() {
        let spec: MeshSpec = serde_json::from_str(r#"{"kind":"torus","n":4,"m":4}"#).unwrap();
        assert_eq!(spec, MeshSpec::Torus { n: 4, m: 4 });
        let disc: MeshSpec =
            serde_json::from_str(r#"{"kind":"disc","rings":2,"sectors":6,"profile":"hyperbolic-like"}"#).unwrap();
        assert_eq!(disc, MeshSpec::Disc { rings: 2, sectors: 6, profile: WeightProfile::HyperbolicLike });
    }
}
