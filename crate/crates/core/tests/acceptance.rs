//! Acceptance criteria, one PASS/FAIL line each. Run with `--nocapture` to see
//! the lines; the test fails if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};

use nalgebra::DVector;
use num_complex::Complex64;
use pform::complex::{MeshSpec, MetricData, SimplicialComplex, WeightProfile};
use pform::dynamics::{PhasePoint, PhaseSpace};
use pform::gap::{gap_study, gap_trend, GapStudySpec, HYPERBOLIC_GAP_BOUND};
use pform::kodaira::{betti, harmonic_dimension, kodaira_split, Margins};
use pform::operators::{inner, norm, OperatorBundle, ZeroThreshold};
use pform::quantization::{CoherentLabel, ComplexStructure};
use pform::wilson;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

type Outcome = Result<String, String>;

fn policy() -> ZeroThreshold {
    ZeroThreshold::default()
}

fn builtin() -> Vec<MeshSpec> {
    vec![
        MeshSpec::Circle { n: 4 },
        MeshSpec::Circle { n: 7 },
        MeshSpec::Interval { n: 5 },
        MeshSpec::Torus { n: 4, m: 4 },
        MeshSpec::Torus { n: 8, m: 8 },
        MeshSpec::SphereOctahedron { subdiv: 0 },
        MeshSpec::SphereOctahedron { subdiv: 1 },
        MeshSpec::Disc { rings: 3, sectors: 6, profile: WeightProfile::Flat },
        MeshSpec::Disc { rings: 3, sectors: 6, profile: WeightProfile::HyperbolicLike },
        MeshSpec::Cylinder { n: 5, m: 2, profile: WeightProfile::Flat },
        MeshSpec::Cylinder { n: 5, m: 2, profile: WeightProfile::HyperbolicLike },
    ]
}

/// The mesh with a random potential on top of its own dual volumes.
fn with_random_phi(spec: &MeshSpec, seed: u64) -> (SimplicialComplex, MetricData) {
    let mesh = spec.generate().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = Uniform::new(-0.4, 0.4).unwrap();
    let phi = (0..mesh.complex.num_vertices()).map(|_| u.sample(&mut rng)).collect();
    let metric = MetricData::new(mesh.metric.dual_volumes.clone(), phi);
    (mesh.complex, metric)
}

fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| StandardNormal.sample(rng))
}

fn space(spec: MeshSpec, p: usize) -> PhaseSpace {
    let mesh = spec.generate().unwrap();
    let b = OperatorBundle::assemble(&mesh.complex, &mesh.metric, p, None).unwrap();
    PhaseSpace::new(b, policy()).unwrap()
}

fn labels(cs: &ComplexStructure, rng: &mut ChaCha8Rng, k: usize) -> Vec<CoherentLabel> {
    (0..k)
        .map(|_| {
            let a = cs.space().random_cochain(rng) * 0.3;
            let e = cs.space().random_cochain(rng) * 0.3;
            cs.label_from_raw(&a, &e).unwrap()
        })
        .collect()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c1_exactness_adjointness() -> Outcome {
    let mut dd_int = 0i64;
    let (mut dd, mut adj) = (0.0f64, 0.0f64);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (s, spec) in builtin().iter().enumerate() {
        let (complex, metric) = with_random_phi(spec, s as u64);
        let n = complex.dimension();
        for k in 0..n.saturating_sub(1) {
            let prod = complex.coboundary(k + 1).unwrap().compose(&complex.coboundary(k).unwrap()).unwrap();
            dd_int = dd_int.max(prod.iter().flatten().map(|x| x.abs()).max().unwrap_or(0));
        }
        for p in 0..=n {
            let b = OperatorBundle::assemble(&complex, &metric, p, None).unwrap();
            for k in 0..n.saturating_sub(1) {
                let d0 = b.derivative(k as isize).unwrap();
                let d1 = b.derivative(k as isize + 1).unwrap();
                dd = dd.max((d1 * d0).amax() / (d1.amax() * d0.amax()));
            }
            for k in 0..n {
                let d = b.derivative(k as isize).unwrap();
                let ds = b.adjoint(k as isize).unwrap();
                let (m0, m1) = (b.mass(k).unwrap(), b.mass(k + 1).unwrap());
                for _ in 0..10 {
                    let alpha = gaussian(&mut rng, b.size(k + 1));
                    let beta = gaussian(&mut rng, b.size(k));
                    let lhs = inner(&alpha, &(d * &beta), m1);
                    let rhs = inner(&(ds * &alpha), &beta, m0);
                    let scale = norm(&alpha, m1) * norm(&(d * &beta), m1);
                    adj = adj.max((lhs - rhs).abs() / scale);
                }
            }
        }
    }
    check(
        dd_int == 0 && dd < 1e-12 && adj < 1e-12,
        format!("integer |dd| = {dd_int}, rel |DD| = {dd:.2e}, adjointness = {adj:.2e} (limit 1e-12)"),
    )
}

fn c2_hodge() -> Outcome {
    let cases = [
        (MeshSpec::Torus { n: 4, m: 4 }, vec![1, 2, 1]),
        (MeshSpec::SphereOctahedron { subdiv: 0 }, vec![1, 0, 1]),
        (MeshSpec::Circle { n: 4 }, vec![1, 1]),
    ];
    let mut worst_margin = f64::INFINITY;
    let mut lines = Vec::new();
    let mut ok = true;
    for (spec, expected) in cases {
        let mesh = spec.generate().unwrap();
        let mut dims = Vec::new();
        for (k, &want) in expected.iter().enumerate() {
            let b = OperatorBundle::assemble(&mesh.complex, &mesh.metric, k, None).unwrap();
            let h = harmonic_dimension(&b, k, policy()).unwrap();
            let exact_betti = betti(&mesh.complex, k).unwrap();
            ok &= h == want && exact_betti == want;
            let m = Margins::of(&b.spectrum(k, policy()).unwrap());
            worst_margin = worst_margin.min(m.ratio);
            dims.push(h);
        }
        lines.push(format!("{dims:?}"));
    }
    ok &= worst_margin > 1e6;
    check(ok, format!("harmonic dims {} ; worst margin ratio {worst_margin:.2e} (limit 1e6)", lines.join(" ")))
}

fn c3_kodaira() -> Outcome {
    let (mut comp, mut orth) = (0.0f64, 0.0f64);
    for (s, spec) in builtin().iter().enumerate() {
        let (complex, metric) = with_random_phi(spec, 100 + s as u64);
        for p in 0..=complex.dimension() {
            let b = OperatorBundle::assemble(&complex, &metric, p, None).unwrap();
            for k in 0..=complex.dimension() {
                let split = kodaira_split(&b, k, policy()).unwrap();
                comp = comp.max(split.completeness_residual());
                orth = orth.max(split.orthogonality_residual());
            }
        }
    }
    check(comp < 1e-10 && orth < 1e-10, format!("completeness {comp:.2e}, orthogonality {orth:.2e} (limit 1e-10)"))
}

fn c4_conservation() -> Outcome {
    let (mut dh, mut dw, mut gauss) = (0.0f64, 0.0f64, 0.0f64);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for (spec, p) in [
        (MeshSpec::Torus { n: 4, m: 4 }, 1),
        (MeshSpec::SphereOctahedron { subdiv: 1 }, 1),
        (MeshSpec::Torus { n: 4, m: 4 }, 0),
        (MeshSpec::Cylinder { n: 5, m: 2, profile: WeightProfile::HyperbolicLike }, 1),
    ] {
        let (complex, metric) = with_random_phi(&spec, 7);
        let b = OperatorBundle::assemble(&complex, &metric, p, None).unwrap();
        let ps = PhaseSpace::new(b, policy()).unwrap();
        let x = ps.random_point(&mut rng, 1.0);
        let y = ps.random_point(&mut rng, 1.0);
        let (h0, w0) = (ps.hamiltonian(&x).unwrap(), ps.symplectic(&x, &y).unwrap());
        for i in 0..=40 {
            let t = -10.0 + 0.5 * i as f64;
            let xt = ps.evolve(&x, t).unwrap();
            let yt = ps.evolve(&y, t).unwrap();
            dh = dh.max((ps.hamiltonian(&xt).unwrap() - h0).abs() / h0.abs());
            dw = dw.max((ps.symplectic(&xt, &yt).unwrap() - w0).abs() / w0.abs());
            gauss = gauss.max(ps.gauss_residual(&xt.e).unwrap());
        }
    }
    check(
        dh < 1e-10 && dw < 1e-10 && gauss < 1e-9,
        format!("energy drift {dh:.2e}, symplectic drift {dw:.2e} (limit 1e-10), Gauss {gauss:.2e} (limit 1e-9)"),
    )
}

fn c5_group_laws() -> Outcome {
    let ps = space(MeshSpec::Torus { n: 4, m: 4 }, 1);
    let mut group = 0.0f64;
    for (t, s) in [(0.3, 0.9), (-4.0, 2.5), (7.0, 3.0)] {
        let o = ps.oscillating_propagator(t + s).unwrap()
            - ps.oscillating_propagator(t).unwrap() * ps.oscillating_propagator(s).unwrap();
        let f = ps.free_propagator(t + s) - ps.free_propagator(t) * ps.free_propagator(s);
        group = group.max(ps.stacked_operator_norm(&o)).max(ps.stacked_operator_norm(&f));
    }
    let mut ok = group < 1e-10;
    let mut norms = Vec::new();
    for t in [0.0f64, 1.0, 3.0] {
        let nsq = ps.stacked_operator_norm(&ps.free_propagator(t)).powi(2);
        // largest squared singular value of [[1, t], [0, 1]]
        let oracle = (t * t + 2.0 + t * (t * t + 4.0).sqrt()) / 2.0;
        ok &= (1.0 - 1e-12..=2.0 + t * t).contains(&nsq) && (nsq - oracle).abs() < 1e-10;
        norms.push(format!("t={t}: {nsq:.6}"));
    }
    check(ok, format!("group law {group:.2e} (limit 1e-10); |T_f|^2 {}", norms.join(", ")))
}

fn c6_complex_structure() -> Outcome {
    let ps = space(MeshSpec::Torus { n: 4, m: 4 }, 1);
    let cs = ComplexStructure::new(&ps).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let v = labels(&cs, &mut rng, 20);
    let (mut jj, mut sym, mut comm) = (0.0f64, 0.0f64, 0.0f64);
    for pair in v.chunks(2) {
        let (x, y) = (pair[0].point(), pair[1].point());
        let jx = cs.apply_j(x).unwrap();
        let jy = cs.apply_j(y).unwrap();
        jj = jj.max(ps.hilbert_norm(&cs.apply_j(&jx).unwrap().add(x)) / ps.hilbert_norm(x));
        let w = cs.omega(x, y).unwrap();
        sym = sym.max((cs.omega(&jx, &jy).unwrap() - w).abs() / w.abs().max(1e-300));
        for t in [0.4, -2.2, 9.0] {
            let a = cs.apply_j(&ps.evolve_oscillating(x, t).unwrap()).unwrap();
            let b = ps.evolve_oscillating(&jx, t).unwrap();
            comm = comm.max(ps.hilbert_norm(&a.sub(&b)) / ps.hilbert_norm(x));
        }
    }
    check(
        jj < 1e-10 && sym < 1e-10 && comm < 1e-10,
        format!("J^2+1 {jj:.2e}, symplectic invariance {sym:.2e}, [J,T] {comm:.2e} (limit 1e-10)"),
    )
}

/// Closed Gaussian form of `⟨f|W(g)|h⟩`, written out from the symplectic form
/// and the H-norm alone.
fn oracle_weyl(cs: &ComplexStructure, g: &PhasePoint, f: &PhasePoint, h: &PhasePoint) -> Complex64 {
    let phase = cs.omega(g, &h.add(f)).unwrap() + cs.omega(h, f).unwrap();
    let d = cs.norm_sq(&h.add(g).sub(f)).unwrap();
    Complex64::new(-d / 4.0, -phase / 2.0).exp()
}

fn c7_weyl_relations() -> Outcome {
    let ps = space(MeshSpec::Torus { n: 4, m: 4 }, 1);
    let cs = ComplexStructure::new(&ps).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let t = labels(&cs, &mut rng, 4);
        let (f, g) = (cs.observable_of(&t[0]), cs.observable_of(&t[1]));
        // W(F) W(G) |h⟩ through two actions, then projected on ⟨bra|
        let (p1, k1) = cs.weyl_action(&g, &t[3]).unwrap();
        let (p2, k2) = cs.weyl_action(&f, &k1).unwrap();
        let composed = p1 * p2 * cs.coherent_overlap(&t[2], &k2).unwrap();
        let w = cs.omega(f.dual(), g.dual()).unwrap();
        let sum = f.dual().add(g.dual());
        let closed = Complex64::new(0.0, -w / 2.0).exp() * oracle_weyl(&cs, &sum, t[2].point(), t[3].point());
        worst = worst.max((composed - closed).norm() / closed.norm());
        let lib = cs.weyl_matrix_element(&f, &t[2], &t[3]).unwrap().raw;
        let ora = oracle_weyl(&cs, f.dual(), t[2].point(), t[3].point());
        worst = worst.max((lib - ora).norm() / ora.norm());
    }
    check(worst < 1e-12, format!("20 triples, worst relative phase/amplitude error {worst:.2e} (limit 1e-12)"))
}

fn c8_derivatives() -> Outcome {
    let ps = space(MeshSpec::Torus { n: 4, m: 4 }, 1);
    let cs = ComplexStructure::new(&ps).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let v = labels(&cs, &mut rng, 3);
    let g = v[0].point();
    let (f, h) = (v[1].point(), v[2].point());
    let step = 1e-4;
    let fd = Complex64::i() * (oracle_weyl(&cs, &g.scale(step), f, h) - oracle_weyl(&cs, &g.scale(-step), f, h))
        / (2.0 * step);
    let heis = cs.heisenberg_matrix_element(&cs.observable_of(&v[0]), &v[1], &v[2]).unwrap().raw;
    let err = (fd - heis).norm();
    let zero = PhasePoint::zeros(ps.size());
    let s = 1e-3;
    let mu = |t: f64| oracle_weyl(&cs, &g.scale(t), &zero, &zero).re;
    let second = (mu(s) - 2.0 * mu(0.0) + mu(-s)) / (s * s);
    let var = (-second - cs.norm_sq(g).unwrap() / 2.0).abs();
    check(
        err < 1e-6 && var < 1e-5,
        format!("Heisenberg vs i d/dt Weyl {err:.2e} (limit 1e-6); variance error {var:.2e} (limit 1e-5)"),
    )
}

fn c9_wick() -> Outcome {
    let ps = space(MeshSpec::SphereOctahedron { subdiv: 1 }, 1);
    let cs = ComplexStructure::new(&ps).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let v = labels(&cs, &mut rng, 3);
        let (g, f, h) = (v[0].point(), v[1].point(), v[2].point());
        let s2 = std::f64::consts::SQRT_2;
        let a = cs.complex_inner(f, g).unwrap() / (-Complex64::i() * s2);
        let b = cs.complex_inner(g, h).unwrap() / (Complex64::i() * s2);
        let overlap = cs.coherent_overlap(&v[1], &v[2]).unwrap();
        for n in 0..=5u32 {
            let mut sum = Complex64::new(0.0, 0.0);
            let mut c = 1.0;
            for m in 0..=n {
                sum += c * a.powu(m) * b.powu(n - m);
                c = c * f64::from(n - m) / f64::from(m + 1);
            }
            let oracle = sum / 2f64.powf(f64::from(n) / 2.0) * overlap;
            let got = cs.wick_power_matrix_element(&cs.observable_of(&v[0]), n, &v[1], &v[2]).unwrap().raw;
            worst = worst.max((got - oracle).norm() / oracle.norm());
        }
    }
    check(worst < 1e-12, format!("n <= 5 over 5 triples, worst relative error {worst:.2e} (limit 1e-12)"))
}

fn torus_loop(c: &SimplicialComplex, row: usize) -> wilson::Chain {
    let path: Vec<usize> = (0..=4).map(|i| (i % 4) + 4 * row).collect();
    wilson::loop_chain(c, &path).unwrap()
}

fn c10_quantum_maxwell() -> Outcome {
    let mesh = MeshSpec::Torus { n: 4, m: 4 }.generate().unwrap();
    let b = OperatorBundle::assemble(&mesh.complex, &mesh.metric, 1, None).unwrap();
    let ps = PhaseSpace::new(b, policy()).unwrap();
    let cs = ComplexStructure::new(&ps).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let v = labels(&cs, &mut rng, 2);
    let rep = wilson::verify_quantum_maxwell(&cs, &v[0], &v[1], 0.8, 1e-4).unwrap();
    let [ra, re] = rep.richardson();
    let (ra, re) = (ra.unwrap_or(f64::NAN), re.unwrap_or(f64::NAN));
    let gamma = torus_loop(&mesh.complex, 1);
    let mut cor = 0.0f64;
    for t in [0.0, 1.0, 5.0] {
        cor = cor.max(wilson::verify_wilson_corollary(&cs, &gamma, &v[0], &v[1], t, 1e-4).unwrap());
    }
    let [r1, r2] = rep.residuals();
    let rich = |q: f64| (q / 4.0 - 1.0).abs() <= 0.1;
    check(
        r1 < 1e-6 && r2 < 1e-6 && rich(ra) && rich(re) && cor < 1e-6,
        format!(
            "residuals {r1:.2e}, {r2:.2e} (limit 1e-6); Richardson {ra:.3}, {re:.3} (4 +- 10%); corollary {cor:.2e}"
        ),
    )
}

fn c11_aharonov_bohm() -> Outcome {
    let mesh = MeshSpec::Torus { n: 4, m: 4 }.generate().unwrap();
    let b = OperatorBundle::assemble(&mesh.complex, &mesh.metric, 1, None).unwrap();
    let ps = PhaseSpace::new(b, policy()).unwrap();
    let around = torus_loop(&mesh.complex, 0);
    let triangle = wilson::loop_chain(&mesh.complex, &[0, 1, 5, 0]).unwrap();
    let m = ps.mass();
    let a = &ps.kodaira().harmonic * around.indicator().component_div(m);
    let field = (ps.bundle().derivative(1).unwrap() * &a).amax();
    let hol = wilson::classical_holonomy(&around, &a);
    let contract = wilson::classical_holonomy(&triangle, &a);
    let e = ps.kodaira().harmonic.column(1).into_owned();
    let x = PhasePoint::new(a.clone(), e.clone());
    let mut shear = 0.0f64;
    for t in [-3.0, 0.5, 7.0] {
        let xt = ps.evolve(&x, t).unwrap();
        let want = PhasePoint::new(&a + &e * t, e.clone());
        shear = shear.max(ps.hilbert_norm(&xt.sub(&want)) / ps.hilbert_norm(&want));
    }
    check(
        field < 1e-12 && hol.abs() > 1e-3 && contract.abs() < 1e-12 && shear < 1e-12,
        format!(
            "|D_1 A| {field:.2e}, holonomy around {hol:.4}, around a triangle {contract:.2e}, free shear error {shear:.2e}"
        ),
    )
}

fn c12_gap_study() -> Outcome {
    let rows = gap_study(&GapStudySpec::default(), policy()).unwrap();
    let trend = gap_trend(&rows, HYPERBOLIC_GAP_BOUND).unwrap();
    let series = |p: WeightProfile| -> String {
        rows.iter().filter(|r| r.profile == p).map(|r| format!("{:.4}", r.lambda1_l0)).collect::<Vec<_>>().join(" > ")
    };
    check(
        trend.flat_decreasing && trend.hyperbolic_bounded,
        format!(
            "flat {}; hyperbolic-like {} (bound {HYPERBOLIC_GAP_BOUND})",
            series(WeightProfile::Flat),
            series(WeightProfile::HyperbolicLike).replace(" > ", ", ")
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

/// Runs without the libtest harness so every line reaches the terminal.
fn main() {
    let criteria: [Criterion; 12] = [
        ("exactness and adjointness", c1_exactness_adjointness),
        ("discrete Hodge theorem", c2_hodge),
        ("Kodaira completeness", c3_kodaira),
        ("conservation under evolution", c4_conservation),
        ("group laws and free-sector growth", c5_group_laws),
        ("complex structure", c6_complex_structure),
        ("Weyl relations", c7_weyl_relations),
        ("derivative consistency", c8_derivatives),
        ("Wick oracle", c9_wick),
        ("quantum Maxwell", c10_quantum_maxwell),
        ("Aharonov-Bohm", c11_aharonov_bohm),
        ("gap study trend", c12_gap_study),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                println!("FAIL {:>2} {name}: {detail}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
