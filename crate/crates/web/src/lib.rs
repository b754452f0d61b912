//! Three operations for the static page in `www/`: the spectrum of `L_p`,
//! a classical time series and the disc gap study. Scenarios are passed as
//! the same JSON documents the command line reads.

use pform::dynamics::PhaseSpace;
use pform::gap::{gap_study as run_gap_study, GapStudySpec};
use pform::operators::ZeroThreshold;
use pform::scenario::{Scenario, Setup};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wasm_bindgen::prelude::*;

fn setup(scenario: &str) -> Result<(Scenario, Setup), String> {
    let s = Scenario::from_json(scenario).map_err(|e| e.to_string())?;
    if s.mesh_file.is_some() {
        return Err("mesh files are not available in the browser".into());
    }
    let setup = s.build(std::path::Path::new(".")).map_err(|e| e.to_string())?;
    Ok((s, setup))
}

/// Eigenvalues of `L_p`, ascending.
pub fn spectrum_values(scenario: &str) -> Result<Vec<f64>, String> {
    let (s, setup) = setup(scenario)?;
    let spec = setup.bundle.spectrum(s.p, ZeroThreshold::default()).map_err(|e| e.to_string())?;
    Ok(spec.eigenvalues().iter().copied().collect())
}

/// Rows `[t, H, ‖oscillating‖, ‖free‖]`, flattened, for a seeded random
/// initial point evolved over `[0, t_max]`.
pub fn evolve_series(scenario: &str, t_max: f64, steps: usize) -> Result<Vec<f64>, String> {
    if steps == 0 || !t_max.is_finite() {
        return Err("need steps > 0 and a finite t_max".into());
    }
    let (s, setup) = setup(scenario)?;
    let space = PhaseSpace::new(setup.bundle, ZeroThreshold::default()).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let x = space.random_point(&mut rng, s.evolve.scale);
    let mut out = Vec::with_capacity(4 * (steps + 1));
    for i in 0..=steps {
        let t = t_max * i as f64 / steps as f64;
        let run = || -> pform::Result<[f64; 4]> {
            let xt = space.evolve(&x, t)?;
            let parts = space.split_sectors(&xt)?;
            Ok([t, space.hamiltonian(&xt)?, space.hilbert_norm(&parts.oscillating), space.hilbert_norm(&parts.free)])
        };
        out.extend(run().map_err(|e| e.to_string())?);
    }
    Ok(out)
}

/// Rows `[profile (0 flat, 1 hyperbolic-like), rings, λ₁(L_0), λ_min(L_1)]`, flattened.
pub fn gap_rows(rings: &[usize], sectors: usize) -> Result<Vec<f64>, String> {
    let spec = GapStudySpec { rings: rings.to_vec(), sectors, ..GapStudySpec::default() };
    let rows = run_gap_study(&spec, ZeroThreshold::default()).map_err(|e| e.to_string())?;
    Ok(rows
        .iter()
        .flat_map(|r| {
            let profile = if r.profile == pform::complex::WeightProfile::Flat { 0.0 } else { 1.0 };
            [profile, r.rings as f64, r.lambda1_l0, r.lambda_min_l1]
        })
        .collect())
}

#[wasm_bindgen]
pub fn spectrum(scenario: &str) -> Result<Vec<f64>, JsError> {
    spectrum_values(scenario).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn evolve(scenario: &str, t_max: f64, steps: usize) -> Result<Vec<f64>, JsError> {
    evolve_series(scenario, t_max, steps).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn gap_study(rings: Vec<usize>, sectors: usize) -> Result<Vec<f64>, JsError> {
    gap_rows(&rings, sectors).map_err(|e| JsError::new(&e))
}
