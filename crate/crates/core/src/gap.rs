//! Lowest nonzero eigenvalues of `L_0` and `L_1` on discs of growing radius,
//! comparing flat weights with exponentially growing (hyperbolic-like) ones.

use serde::{Deserialize, Serialize};

use crate::complex::{MeshSpec, WeightProfile};
use crate::error::{Error, Result};
use crate::operators::{OperatorBundle, SpectralData, ZeroThreshold};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapStudySpec {
    /// Ring counts, one disc per entry, in increasing order.
    #[serde(default = "default_rings")]
    pub rings: Vec<usize>,
    #[serde(default = "default_sectors")]
    pub sectors: usize,
    #[serde(default = "default_profiles")]
    pub profiles: Vec<WeightProfile>,
}

fn default_rings() -> Vec<usize> {
    vec![4, 8, 16]
}

fn default_sectors() -> usize {
    8
}

fn default_profiles() -> Vec<WeightProfile> {
    vec![WeightProfile::Flat, WeightProfile::HyperbolicLike]
}

impl Default for GapStudySpec {
    fn default() -> Self {
        GapStudySpec { rings: default_rings(), sectors: default_sectors(), profiles: default_profiles() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapRow {
    pub profile: WeightProfile,
    pub rings: usize,
    pub sectors: usize,
    pub vertices: usize,
    /// Lowest eigenvalue of `L_0` above the kernel cut.
    pub lambda1_l0: f64,
    /// Smallest eigenvalue of `L_1`, uncut: the disc has no 1-cohomology, and
    /// under the hyperbolic-like profile this eigenvalue decays exponentially
    /// with the radius, eventually below any relative kernel cut.
    pub lambda_min_l1: f64,
}

fn lowest_nonzero(s: &SpectralData) -> Result<f64> {
    s.eigenvalues()
        .iter()
        .enumerate()
        .find(|&(i, _)| !s.is_kernel(i))
        .map(|(_, &l)| l)
        .ok_or_else(|| Error::Numerical("spectrum has no nonzero eigenvalue".into()))
}

pub fn gap_row(profile: WeightProfile, rings: usize, sectors: usize, policy: ZeroThreshold) -> Result<GapRow> {
    let mesh = MeshSpec::Disc { rings, sectors, profile }.generate()?;
    // p = 0 for the scalar Laplacian; the twist vanishes with Φ = 0 anyway
    let bundle = OperatorBundle::assemble(&mesh.complex, &mesh.metric, 0, None)?;
    Ok(GapRow {
        profile,
        rings,
        sectors,
        vertices: mesh.complex.num_vertices(),
        lambda1_l0: lowest_nonzero(&bundle.spectrum(0, policy)?)?,
        lambda_min_l1: bundle.spectrum(1, policy)?.eigenvalues()[0],
    })
}

pub fn gap_study(spec: &GapStudySpec, policy: ZeroThreshold) -> Result<Vec<GapRow>> {
    if spec.rings.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("gap-study rings must increase".into()));
    }
    let mut rows = Vec::new();
    for &profile in &spec.profiles {
        for &rings in &spec.rings {
            rows.push(gap_row(profile, rings, spec.sectors, policy)?);
        }
    }
    Ok(rows)
}

/// Lower bound the hyperbolic-like `L_0` gap is expected to stay above.
pub const HYPERBOLIC_GAP_BOUND: f64 = 0.1;

/// Outcome of the qualitative trend assertion.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapTrend {
    pub flat_decreasing: bool,
    pub hyperbolic_min: f64,
    pub hyperbolic_bounded: bool,
}

pub fn gap_trend(rows: &[GapRow], bound: f64) -> Result<GapTrend> {
    let series =
        |p: WeightProfile| -> Vec<f64> { rows.iter().filter(|r| r.profile == p).map(|r| r.lambda1_l0).collect() };
    let flat = series(WeightProfile::Flat);
    let hyp = series(WeightProfile::HyperbolicLike);
    if flat.len() < 2 || hyp.is_empty() {
        return Err(Error::InvalidParameter("gap trend needs both profiles and at least two sizes".into()));
    }
    let hyperbolic_min = hyp.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(GapTrend {
        flat_decreasing: flat.windows(2).all(|w| w[1] < w[0]),
        hyperbolic_min,
        hyperbolic_bounded: hyperbolic_min > bound,
    })
}
