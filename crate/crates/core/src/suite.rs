//! The invariant suite behind `verify`: every structural, spectral, dynamical
//! and quantum identity of the crate, measured on one scenario.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::complex::SimplicialComplex;
use crate::dynamics::{PhasePoint, PhaseSpace};
use crate::error::{Error, Result};
use crate::kodaira::{betti, kodaira_split};
use crate::operators::{inner, norm, ZeroThreshold};
use crate::quantization::{CoherentLabel, ComplexStructure};
use crate::scenario::{Scenario, Setup};
use crate::wilson::{self, Chain};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// `measured <= tolerance`
    AtMost,
    /// `measured >= tolerance`
    AtLeast,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub module: &'static str,
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub bound: Bound,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Skipped {
    pub module: &'static str,
    pub name: String,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SuiteReport {
    pub checks: Vec<Check>,
    pub skipped: Vec<Skipped>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    fn extend(&mut self, other: SuiteReport) {
        self.checks.extend(other.checks);
        self.skipped.extend(other.skipped);
    }
}

/// Collects checks for one module; upper tolerances are multiplied by `scale`.
struct Recorder {
    module: &'static str,
    scale: f64,
    report: SuiteReport,
}

impl Recorder {
    fn new(module: &'static str, scale: f64) -> Self {
        Recorder { module, scale, report: SuiteReport::default() }
    }

    fn at_most(&mut self, name: impl Into<String>, measured: f64, tolerance: f64) {
        let tolerance = tolerance * self.scale;
        self.report.checks.push(Check {
            module: self.module,
            name: name.into(),
            measured,
            tolerance,
            bound: Bound::AtMost,
            passed: measured <= tolerance,
        });
    }

    fn at_least(&mut self, name: impl Into<String>, measured: f64, tolerance: f64) {
        self.report.checks.push(Check {
            module: self.module,
            name: name.into(),
            measured,
            tolerance,
            bound: Bound::AtLeast,
            passed: measured >= tolerance,
        });
    }

    /// Exact integer equality, recorded as `|a - b| <= 0`.
    fn exact(&mut self, name: impl Into<String>, a: i64, b: i64) {
        self.report.checks.push(Check {
            module: self.module,
            name: name.into(),
            measured: (a - b).abs() as f64,
            tolerance: 0.0,
            bound: Bound::AtMost,
            passed: a == b,
        });
    }

    fn skip(&mut self, name: impl Into<String>, reason: impl Into<String>) {
        self.report.skipped.push(Skipped { module: self.module, name: name.into(), reason: reason.into() });
    }
}

fn rel(diff: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

fn crel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1.0)
}

pub fn run(scenario: &Scenario, setup: &Setup, tolerance_scale: f64) -> Result<SuiteReport> {
    let policy = ZeroThreshold::default();
    let space = PhaseSpace::new(setup.bundle.clone(), policy)?;
    let seed = scenario.seed;
    type Group<'a> = Box<dyn Fn() -> Result<SuiteReport> + Send + Sync + 'a>;
    let groups: Vec<Group> = vec![
        Box::new(|| complex_checks(scenario, setup, tolerance_scale)),
        Box::new(|| operator_checks(setup, seed, tolerance_scale)),
        Box::new(|| kodaira_checks(setup, tolerance_scale)),
        Box::new(|| dynamics_checks(&space, seed, tolerance_scale)),
        Box::new(|| quantization_checks(&space, seed, tolerance_scale)),
        Box::new(|| wilson_checks(scenario, setup, &space, seed, tolerance_scale)),
    ];
    let parts: Vec<Result<SuiteReport>> = groups.par_iter().map(|g| g()).collect();
    let mut report = SuiteReport::default();
    for part in parts {
        report.extend(part?);
    }
    Ok(report)
}

fn complex_checks(scenario: &Scenario, setup: &Setup, scale: f64) -> Result<SuiteReport> {
    let mut r = Recorder::new("complex", scale);
    let c = &setup.complex;
    for k in 0..c.dimension().saturating_sub(1) {
        let dd = c.coboundary(k + 1)?.compose(&c.coboundary(k)?)?;
        let worst = dd.iter().flatten().map(|x| x.abs()).max().unwrap_or(0);
        r.exact(format!("d_{} d_{k} = 0 (integer)", k + 1), worst, 0);
    }
    let rebuilt = SimplicialComplex::from_simplices(c.dimension(), c.levels().to_vec());
    r.exact("face-of-face closure", i64::from(rebuilt.is_err()), 0);
    match &scenario.mesh {
        Some(spec) => {
            let again = spec.generate()?;
            r.exact("deterministic generation", i64::from(again.complex != *c), 0);
        }
        None => r.skip("deterministic generation", "mesh read from file"),
    }
    Ok(r.report)
}

fn operator_checks(setup: &Setup, seed: u64, scale: f64) -> Result<SuiteReport> {
    let mut r = Recorder::new("operators", scale);
    let b = &setup.bundle;
    let n = b.dimension();
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    for k in 0..n.saturating_sub(1) {
        let d0 = b.derivative(k as isize)?;
        let d1 = b.derivative(k as isize + 1)?;
        let entry = d1.amax() * d0.amax();
        r.at_most(format!("D_{} D_{k} = 0", k + 1), rel((d1 * d0).amax(), entry), 1e-12);
    }
    for k in 0..n {
        let d = b.derivative(k as isize)?;
        let ds = b.adjoint(k as isize)?;
        let (m0, m1) = (b.mass(k)?, b.mass(k + 1)?);
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let alpha = random_vec(&mut rng, b.size(k + 1));
            let beta = random_vec(&mut rng, b.size(k));
            let lhs = inner(&alpha, &(d * &beta), m1);
            let rhs = inner(&(ds * &alpha), &beta, m0);
            let s = norm(&alpha, m1) * norm(&(d * &beta), m1) + norm(&(ds * &alpha), m0) * norm(&beta, m0);
            worst = worst.max(rel((lhs - rhs).abs(), s));
        }
        r.at_most(format!("adjointness of D_{k} (100 trials)"), worst, 1e-12);
    }
    for k in 0..=n {
        let policy = ZeroThreshold::default();
        let s = b.spectrum(k, policy)?;
        let min = s.eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
        r.at_most(format!("L_{k} nonnegative"), rel(-min, s.lambda_max()).max(0.0), 1e-10);
        let x = random_vec(&mut rng, b.size(k));
        let l = b.laplacian(k)?;
        let want = l * (l * &x);
        let got = s.apply_function(|v| v * v, &x)?;
        r.at_most(format!("spectral mapping on L_{k}"), rel((&got - &want).norm(), want.norm()), 1e-9);
    }
    Ok(r.report)
}

fn kodaira_checks(setup: &Setup, scale: f64) -> Result<SuiteReport> {
    let mut r = Recorder::new("kodaira", scale);
    let b = &setup.bundle;
    let policy = ZeroThreshold::default();
    for k in 0..=b.dimension() {
        let split = kodaira_split(b, k, policy)?;
        let beta = betti(&setup.complex, k)?;
        r.exact(format!("harmonic dim {k} = Betti"), split.dims[1] as i64, beta as i64);
        if split.margins.largest_kernel.is_some() && split.margins.smallest_nonkernel.is_some() {
            r.at_least(format!("kernel margin ratio in degree {k}"), split.margins.ratio, 1e6);
        }
        r.at_most(format!("completeness in degree {k}"), split.completeness_residual(), 1e-10);
        r.at_most(format!("orthogonality in degree {k}"), split.orthogonality_residual(), 1e-10);
        r.at_most(format!("idempotence in degree {k}"), split.idempotence_residual(), 1e-10);
        r.at_most(format!("self-adjointness in degree {k}"), split.symmetry_residual(), 1e-10);
        let d = b.derivative(k as isize)?;
        if d.nrows() > 0 {
            let scale = d.amax().max(1.0);
            r.at_most(format!("D_{k} P_exact = 0"), (d * &split.exact).amax() / scale, 1e-10);
            r.at_most(format!("D_{k} P_harmonic = 0"), (d * &split.harmonic).amax() / scale, 1e-9);
        }
        if k > 0 {
            let ds = b.adjoint(k as isize - 1)?;
            let scale = ds.amax().max(1.0);
            r.at_most(format!("D_{}^* P_harmonic = 0", k - 1), (ds * &split.harmonic).amax() / scale, 1e-9);
        }
    }
    Ok(r.report)
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    use rand_distr::{Distribution, StandardNormal};
    DVector::from_fn(n, |_, _| StandardNormal.sample(rng))
}

const TIMES: [f64; 6] = [-10.0, -3.7, -0.25, 0.5, 2.0, 10.0];

fn dynamics_checks(space: &PhaseSpace, seed: u64, scale: f64) -> Result<SuiteReport> {
    let mut r = Recorder::new("dynamics", scale);
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(2));
    let x = space.random_point(&mut rng, 1.0);
    let y = space.random_point(&mut rng, 1.0);
    let h0 = space.hamiltonian(&x)?;
    let w0 = space.symplectic(&x, &y)?;
    let n0 = space.hilbert_norm(&x);
    let split0 = space.split_sectors(&x)?;
    let (mut dh, mut dw, mut gauss, mut mix, mut dn) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for t in TIMES {
        let xt = space.evolve(&x, t)?;
        let yt = space.evolve(&y, t)?;
        dh = dh.max(rel((space.hamiltonian(&xt)? - h0).abs(), h0.abs()));
        dw = dw.max(rel((space.symplectic(&xt, &yt)? - w0).abs(), w0.abs()));
        gauss = gauss.max(space.gauss_residual(&xt.e)?);
        // a sector holding only rounding noise is not evolved on its own
        if space.hilbert_norm(&split0.oscillating) > 1e-12 * n0 {
            let osc = space.evolve_oscillating(&split0.oscillating, t)?;
            mix = mix.max(space.hilbert_norm(&space.split_sectors(&osc)?.free));
        }
        if space.hilbert_norm(&split0.free) > 1e-12 * n0 {
            let free = space.evolve_free(&split0.free, t)?;
            mix = mix.max(space.hilbert_norm(&space.split_sectors(&free)?.oscillating));
        }
        dn = dn.max(rel((space.hilbert_norm(&xt) - n0).abs(), n0));
    }
    r.at_most("Hamiltonian drift over [-10, 10]", dh, 1e-10);
    r.at_most("symplectic drift over [-10, 10]", dw, 1e-10);
    r.at_most("Gauss constraint along trajectory", gauss, 1e-9);
    r.at_most("sector mixing under evolution", mix, 1e-10);
    if space.kodaira().dims[2] > 0 {
        r.at_least("Hilbert norm not conserved", dn, 1e-3);
    } else {
        r.skip("Hilbert norm not conserved", "oscillating sector is empty");
    }
    for (t, s) in [(0.7, 1.3), (-2.0, 5.0)] {
        let o = space.oscillating_propagator(t + s)?
            - space.oscillating_propagator(t)? * space.oscillating_propagator(s)?;
        r.at_most(format!("oscillating group law ({t}, {s})"), space.stacked_operator_norm(&o), 1e-10);
        let f = space.free_propagator(t + s) - space.free_propagator(t) * space.free_propagator(s);
        r.at_most(format!("free group law ({t}, {s})"), space.stacked_operator_norm(&f), 1e-10);
    }
    if space.kodaira().dims[1] > 0 {
        for t in [0.0, 1.0, 3.0] {
            let nsq = space.stacked_operator_norm(&space.free_propagator(t)).powi(2);
            let violation = (1.0 - nsq).max(nsq - (2.0 + t * t)).max(0.0);
            r.at_most(format!("1 <= |T_f({t})|^2 <= 2 + t^2"), violation, 1e-12);
        }
        let f = &split0.free;
        let ft = space.evolve_free(f, 2.5)?;
        let want = PhasePoint::new(&f.a + &f.e * 2.5, f.e.clone());
        r.at_most("free evolution is A + tE", space.hilbert_norm(&ft.sub(&want)), 1e-14);
    } else {
        r.skip("free-sector bounds", "free sector is empty");
    }
    Ok(r.report)
}

fn labels(cs: &ComplexStructure, rng: &mut ChaCha8Rng, k: usize, scale: f64) -> Result<Vec<CoherentLabel>> {
    (0..k)
        .map(|_| {
            let a = cs.space().random_cochain(rng) * scale;
            let e = cs.space().random_cochain(rng) * scale;
            cs.label_from_raw(&a, &e)
        })
        .collect()
}

fn point_rel(space: &PhaseSpace, a: &PhasePoint, b: &PhasePoint) -> f64 {
    rel(space.hilbert_norm(&a.sub(b)), space.hilbert_norm(b))
}

fn quantization_checks(space: &PhaseSpace, seed: u64, scale: f64) -> Result<SuiteReport> {
    let mut r = Recorder::new("quantization", scale);
    let cs = match ComplexStructure::new(space) {
        Ok(cs) => cs,
        Err(Error::Sector(why)) => {
            r.skip("all quantization checks", why);
            return Ok(r.report);
        }
        Err(e) => return Err(e),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(3));
    let xs = labels(&cs, &mut rng, 100, 0.3)?;
    let (mut jj, mut wj, mut nj, mut hpos) = (0.0f64, 0.0f64, 0.0f64, f64::INFINITY);
    for pair in xs.chunks(2) {
        let (x, y) = (pair[0].point(), pair[1].point());
        let jx = cs.apply_j(x)?;
        let jy = cs.apply_j(y)?;
        jj = jj.max(point_rel(space, &cs.apply_j(&jx)?.scale(-1.0), x));
        let w = cs.omega(x, y)?;
        wj = wj.max(rel((cs.omega(&jx, &jy)? - w).abs(), w.abs()));
        for v in [x, y] {
            let n = cs.norm_sq(v)?;
            nj = nj.max(rel((cs.norm_sq(&cs.apply_j(v)?)? - n).abs(), n));
            hpos = hpos.min(n);
        }
    }
    r.at_most("J^2 = -1", jj, 1e-10);
    r.at_most("omega(JX, JY) = omega(X, Y)", wj, 1e-10);
    r.at_most("|JX|_H = |X|_H (100 points)", nj, 1e-10);
    r.at_least("|X|_H^2 >= 0", hpos, 0.0);
    let mut comm = 0.0f64;
    for t in [0.3, -1.7, 6.0] {
        for x in &xs[..4] {
            let a = cs.apply_j(cs.evolve_label(x, t)?.point())?;
            let b = space.evolve_oscillating(&cs.apply_j(x.point())?, t)?;
            comm = comm.max(point_rel(space, &a, &b));
        }
    }
    r.at_most("[J, T_o(t)] = 0", comm, 1e-10);

    let v = &xs[..5];
    let zero = wilson::vacuum(&cs)?;
    let f0 = cs.observable_of(&zero);
    r.at_most("mu(0) = 1", (cs.characteristic_functional(&f0)? - 1.0).abs(), 1e-15);
    let g = cs.observable_of(&v[0]);
    let gneg = cs.observable_from_point(&v[0].point().scale(-1.0))?;
    r.at_most(
        "mu(F) = mu(-F)",
        (cs.characteristic_functional(&g)? - cs.characteristic_functional(&gneg)?).abs(),
        1e-15,
    );
    let (mut mu_drift, mut unit) = (0.0f64, 0.0f64);
    let o01 = cs.coherent_overlap(&v[0], &v[1])?;
    for t in [-10.0, 1.0, 10.0] {
        let ft = cs.observable_of(&cs.evolve_label(&v[0], t)?);
        mu_drift = mu_drift.max((cs.characteristic_functional(&ft)? - cs.characteristic_functional(&g)?).abs());
        let o = cs.coherent_overlap(&cs.evolve_label(&v[0], t)?, &cs.evolve_label(&v[1], t)?)?;
        unit = unit.max((o - o01).norm());
    }
    r.at_most("mu constant on orbits", mu_drift, 1e-10);
    r.at_most("overlaps invariant under evolution", unit, 1e-10);

    let mut gram = DMatrix::<Complex64>::zeros(5, 5);
    let (mut modulus, mut diag, mut herm) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..5 {
        for j in 0..5 {
            gram[(i, j)] = cs.coherent_overlap(&v[i], &v[j])?;
            modulus = modulus.max(gram[(i, j)].norm() - 1.0);
        }
        diag = diag.max((gram[(i, i)] - 1.0).norm());
    }
    for i in 0..5 {
        for j in 0..5 {
            herm = herm.max((gram[(i, j)] - gram[(j, i)].conj()).norm());
        }
    }
    r.at_most("|<X|X'>| <= 1", modulus.max(0.0), 1e-15);
    r.at_most("<X|X> = 1", diag, 1e-14);
    r.at_most("conjugate symmetry of overlaps", herm, 1e-14);
    let min_eig = gram.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
    r.at_least("Gram matrix positive semidefinite", min_eig, -1e-10);
    let vac = cs.coherent_overlap(&zero, &v[1])?;
    let mu1 = cs.characteristic_functional(&cs.observable_of(&v[1]))?;
    r.at_most("<0|X> = mu(X)", (vac - mu1).norm(), 1e-15);

    // Weyl elements and relations on 20 triples
    let (mut weyl_rel, mut vac_w, mut zero_f, mut bounded) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for k in 0..20 {
        let t = labels(&cs, &mut rng, 4, 0.3)?;
        let (f, gg) = (cs.observable_of(&t[0]), cs.observable_of(&t[1]));
        let (bra, ket) = (&t[2], &t[3]);
        let (p1, k1) = cs.weyl_action(&gg, ket)?;
        let composed = p1 * cs.weyl_matrix_element(&f, bra, &k1)?.raw;
        let fg = cs.observable_from_point(&f.dual().add(gg.dual()))?;
        let w = cs.omega(f.dual(), gg.dual())?;
        let closed = Complex64::new(0.0, -w / 2.0).exp() * cs.weyl_matrix_element(&fg, bra, ket)?.raw;
        weyl_rel = weyl_rel.max((composed - closed).norm() / closed.norm());
        bounded = bounded.max(cs.weyl_matrix_element(&f, bra, ket)?.raw.norm() - 1.0);
        if k < 5 {
            let w00 = cs.weyl_matrix_element(&f, &zero, &zero)?.raw;
            vac_w = vac_w.max((w00 - cs.characteristic_functional(&f)?).norm());
            let w0 = cs.weyl_matrix_element(&f0, bra, ket)?.raw;
            zero_f = zero_f.max((w0 - cs.coherent_overlap(bra, ket)?).norm());
        }
    }
    r.at_most("Weyl relations (20 triples)", weyl_rel, 1e-12);
    r.at_most("|<X'|W(F)|X>| <= 1", bounded.max(0.0), 1e-15);
    r.at_most("<0|W(F)|0> = mu(F)", vac_w, 1e-15);
    r.at_most("W(0) element = overlap", zero_f, 1e-15);

    // Heisenberg elements
    let (bra, ket) = (&v[1], &v[2]);
    let hd = cs.heisenberg_matrix_element(&g, bra, bra)?.ratio;
    let wdiag = cs.omega(g.dual(), bra.point())?;
    r.at_most("correspondence principle", crel(hd, wdiag.into()), 1e-12);
    r.at_most("Heisenberg(0) = 0", cs.heisenberg_matrix_element(&f0, bra, ket)?.raw.norm(), 1e-15);
    let h = 1e-4;
    let wp = cs.weyl_matrix_element(&cs.observable_from_point(&g.dual().scale(h))?, bra, ket)?.raw;
    let wm = cs.weyl_matrix_element(&cs.observable_from_point(&g.dual().scale(-h))?, bra, ket)?.raw;
    let fd = Complex64::i() * (wp - wm) / (2.0 * h);
    r.at_most(
        "Heisenberg = i d/dt Weyl (h = 1e-4)",
        (fd - cs.heisenberg_matrix_element(&g, bra, ket)?.raw).norm(),
        1e-6,
    );
    // unit H-norm keeps the fourth-derivative truncation term small
    let unit = g.dual().scale(1.0 / cs.norm_sq(g.dual())?.sqrt());
    let s = 1e-3;
    let mu = |t: f64| -> Result<f64> {
        let ft = cs.observable_from_point(&unit.scale(t))?;
        Ok(cs.weyl_matrix_element(&ft, &zero, &zero)?.raw.re)
    };
    let second = (mu(s)? - 2.0 * mu(0.0)? + mu(-s)?) / (s * s);
    r.at_most("variance -d^2 mu(tF) = |F|^2 / 2", (-second - cs.norm_sq(&unit)? / 2.0).abs(), 1e-5);

    // Wick powers against the binomial oracle
    let sq2 = std::f64::consts::SQRT_2;
    let a = cs.complex_inner(bra.point(), g.dual())? / (-Complex64::i() * sq2);
    let bcoef = cs.complex_inner(g.dual(), ket.point())? / (Complex64::i() * sq2);
    let mut wick = 0.0f64;
    for n in 0..=5u32 {
        let mut sum = Complex64::new(0.0, 0.0);
        for m in 0..=n {
            sum += binomial(n, m) * a.powu(m) * bcoef.powu(n - m);
        }
        sum /= 2f64.powf(f64::from(n) / 2.0);
        let got = cs.wick_power_matrix_element(&g, n, bra, ket)?.ratio;
        wick = wick.max(crel(got, sum));
    }
    r.at_most("Wick powers n <= 5 vs binomial oracle", wick, 1e-12);
    let w0 = cs.wick_power_matrix_element(&g, 0, bra, ket)?.raw;
    r.at_most("Wick n = 0 is the overlap", (w0 - cs.coherent_overlap(bra, ket)?).norm(), 1e-15);

    // Normal-ordered Weyl, two closed forms
    let mut normal = 0.0f64;
    for _ in 0..50 {
        let t = labels(&cs, &mut rng, 3, 0.3)?;
        let f = cs.observable_of(&t[0]);
        let exp_form = cs.normal_weyl_matrix_element(&f, &t[1], &t[2])?.raw;
        let div_form = cs.weyl_matrix_element(&f, &t[1], &t[2])?.raw / cs.weyl_matrix_element(&f, &zero, &zero)?.raw;
        normal = normal.max(crel(exp_form, div_form));
    }
    r.at_most(":W(F): exp form = division form (50 cases)", normal, 1e-12);
    r.at_most(":W(F): at X = X' = 0 is 1", (cs.normal_weyl_matrix_element(&g, &zero, &zero)?.raw - 1.0).norm(), 1e-15);

    let ann = cs.annihilation_matrix_element(&g, bra, ket)?.ratio;
    let closed = cs.complex_inner(g.dual(), ket.point())? / (Complex64::i() * sq2);
    r.at_most("annihilation eigenvalue", crel(ann, closed), 1e-12);
    Ok(r.report)
}

fn binomial(n: u32, m: u32) -> f64 {
    (0..m).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// Closed `p`-chains built from the complex itself: boundaries of two
/// `(p+1)`-simplices, or two vertices when `p = 0`.
fn auto_chains(c: &SimplicialComplex, p: usize) -> Result<Option<(Chain, Chain)>> {
    if p == 0 {
        if c.count(0) < 2 {
            return Ok(None);
        }
        return Ok(Some((wilson::make_chain(c, 0, &[(0, 1)])?, wilson::make_chain(c, 0, &[(1, 1)])?)));
    }
    if p >= c.dimension() || c.count(p + 1) < 2 {
        return Ok(None);
    }
    let d = c.coboundary(p)?;
    let last = c.count(p + 1) - 1;
    let boundary = |j: usize| wilson::make_chain(c, p, d.row(j));
    Ok(Some((boundary(0)?, boundary(last)?)))
}

fn wilson_checks(scenario: &Scenario, setup: &Setup, space: &PhaseSpace, seed: u64, scale: f64) -> Result<SuiteReport> {
    let mut r = Recorder::new("wilson", scale);
    let cs = match ComplexStructure::new(space) {
        Ok(cs) => cs,
        Err(Error::Sector(why)) => {
            r.skip("all wilson checks", why);
            return Ok(r.report);
        }
        Err(e) => return Err(e),
    };
    let p = space.degree();
    let c = &setup.complex;
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(4));
    let v = labels(&cs, &mut rng, 2, 0.3)?;
    let (bra, ket) = (&v[0], &v[1]);
    let m = space.mass();
    let size = space.size();

    let fa = wilson::field_a_matrix_element(&cs, bra, ket)?;
    let fe = wilson::field_e_matrix_element(&cs, bra, ket)?;
    let (mut xa, mut xe) = (0.0f64, 0.0f64);
    let zero = DVector::zeros(size);
    for k in 0..10.min(size) {
        let i = (k * 7919 + seed as usize) % size;
        let delta = DVector::from_fn(size, |j, _| if j == i { 1.0 / m[i] } else { 0.0 });
        let ha = cs.heisenberg_matrix_element(&cs.observable(&zero, &delta)?, bra, ket)?.ratio;
        xa = xa.max(crel(ha, fa.values[i]));
        let he = cs.heisenberg_matrix_element(&cs.observable(&-&delta, &zero)?, bra, ket)?.ratio;
        xe = xe.max(crel(he, fe.values[i]));
    }
    r.at_most("A field = Heisenberg of evaluation (10 simplices)", xa, 1e-12);
    r.at_most("E field = Heisenberg of -evaluation (10 simplices)", xe, 1e-12);
    let da = wilson::field_a_matrix_element(&cs, bra, bra)?;
    let de = wilson::field_e_matrix_element(&cs, bra, bra)?;
    let imag = da.values.iter().chain(de.values.iter()).map(|z| z.im.abs()).fold(0.0, f64::max);
    r.at_most("diagonal field elements are real", imag, 1e-10);
    let back = (da.values.map(|z| z.re) - &bra.point().a).amax().max((de.values.map(|z| z.re) - &bra.point().e).amax());
    r.at_most("diagonal field elements are classical", back, 1e-14);

    let given =
        if scenario.wilson.chain.is_empty() { None } else { Some(wilson::make_chain(c, p, &scenario.wilson.chain)?) };
    let auto = auto_chains(c, p)?;
    let Some((g1, g2)) = auto.clone().or_else(|| given.clone().map(|g| (g.clone(), g))) else {
        r.skip("chain checks", format!("no closed {p}-chain available"));
        return Ok(r.report);
    };
    let gamma = given.clone().unwrap_or_else(|| g1.clone());

    let w = wilson::wilson_ratio(&cs, &gamma, bra, ket)?;
    let heis = cs.heisenberg_matrix_element(&wilson::chain_observable(&cs, &gamma)?, bra, ket)?.ratio;
    r.at_most("Wilson = Heisenberg of Gamma", crel(w, heis), 1e-12);
    let wd = wilson::wilson_matrix_element(&cs, &gamma, bra, bra)?;
    r.at_most("diagonal Wilson = classical holonomy", crel(wd, gamma.pair(&bra.point().a).into()), 1e-12);
    let wr = wilson::wilson_ratio(&cs, &gamma.reversed(), bra, ket)?;
    r.at_most("reversed chain negates", (wr + w).norm(), 1e-14 * w.norm().max(1.0));
    let sum = wilson::wilson_ratio(&cs, &g1.sum(&g2)?, bra, ket)?;
    let parts = wilson::wilson_ratio(&cs, &g1, bra, ket)? + wilson::wilson_ratio(&cs, &g2, bra, ket)?;
    r.at_most("chain linearity", crel(sum, parts), 1e-12);
    let hd = wilson::holonomy_matrix_element(&cs, &gamma, bra, bra)?;
    r.at_most("diagonal holonomy has unit modulus", (hd.norm() - 1.0).abs(), 1e-12);
    let empty = wilson::make_chain(c, p, &[])?;
    let he = wilson::holonomy_matrix_element(&cs, &empty, bra, ket)?;
    r.at_most("empty-chain holonomy = overlap", (he - cs.coherent_overlap(bra, ket)?).norm(), 1e-15);
    let neg = cs.observable_from_point(&wilson::chain_observable(&cs, &gamma)?.dual().scale(-1.0))?;
    let nw = cs.normal_weyl_matrix_element(&neg, bra, ket)?.raw;
    let hol = wilson::holonomy_matrix_element(&cs, &gamma, bra, ket)?;
    r.at_most("holonomy = :W(-(0 + Gamma)):", crel(hol, nw), 1e-12);

    if p > 0 {
        let phi = random_vec(&mut rng, space.bundle().size(p - 1));
        let shift = space.bundle().derivative(p as isize - 1)? * phi;
        let a_raw = ket.point().a.clone();
        let moved = cs.label_from_raw(&(&a_raw + &shift), &ket.point().e)?;
        let wm = wilson::wilson_ratio(&cs, &gamma, bra, &moved)?;
        r.at_most("gauge independence", (wm - w).norm(), 1e-10);
    }

    let spec = &scenario.wilson;
    let rep = wilson::verify_quantum_maxwell(&cs, bra, ket, spec.t, spec.h)?;
    r.at_most("quantum Maxwell dA/dt = E", rep.gauss_ampere[0], 1e-6);
    r.at_most("quantum Maxwell dE/dt = -L A", rep.faraday[0], 1e-6);
    for (name, ratio) in ["dA/dt", "dE/dt"].iter().zip(rep.richardson()) {
        match ratio {
            Some(q) => r.at_most(format!("Richardson ratio for {name} within 10% of 4"), (q / 4.0 - 1.0).abs(), 0.1),
            None => r.skip(format!("Richardson ratio for {name}"), "residual at rounding level"),
        }
    }
    let mut cor = 0.0f64;
    for t in [0.0, 1.0, 5.0] {
        cor = cor.max(wilson::verify_wilson_corollary(&cs, &gamma, bra, ket, t, spec.h)?);
    }
    r.at_most("Wilson-loop evolution corollary", cor, 1e-6);

    aharonov_bohm(&mut r, setup, space, given.as_ref(), auto.as_ref().map(|a| &a.0))?;
    Ok(r.report)
}

fn aharonov_bohm(
    r: &mut Recorder,
    setup: &Setup,
    space: &PhaseSpace,
    loop_: Option<&Chain>,
    contractible: Option<&Chain>,
) -> Result<()> {
    let (Some(noncontractible), Some(contractible)) = (loop_, contractible) else {
        r.skip("Aharonov-Bohm detection", "needs a scenario loop and a boundary chain");
        return Ok(());
    };
    if space.kodaira().dims[1] == 0 || space.degree() + 1 > setup.complex.dimension() {
        r.skip("Aharonov-Bohm detection", "no harmonic forms or no field strength in this degree");
        return Ok(());
    }
    let p = space.degree();
    let twist = space.bundle().twist(p)?;
    if twist.iter().chain(space.bundle().twist(p + 1)?.iter()).any(|w| (w / twist[0] - 1.0).abs() > 1e-15) {
        r.skip("Aharonov-Bohm detection", "twisted derivative differs from the coboundary");
        return Ok(());
    }
    let m = space.mass();
    let a = &space.kodaira().harmonic * noncontractible.indicator().component_div(m);
    let da = space.bundle().derivative(space.degree() as isize)? * &a;
    let scale = a.amax().max(f64::MIN_POSITIVE);
    r.at_most("harmonic A has zero field strength", da.amax() / scale, 1e-10);
    r.at_least(
        "holonomy on scenario loop is nonzero",
        wilson::classical_holonomy(noncontractible, &a).abs() / scale,
        1e-6,
    );
    r.at_most("holonomy on a boundary is zero", wilson::classical_holonomy(contractible, &a).abs() / scale, 1e-10);
    Ok(())
}
