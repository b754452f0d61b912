use std::path::{Path, PathBuf};

use nalgebra::DVector;
use num_complex::Complex64;
use pform::complex::{MeshFile, WeightProfile};
use pform::dynamics::PhaseSpace;
use pform::gap::{gap_study, gap_trend, GapStudySpec, HYPERBOLIC_GAP_BOUND};
use pform::kodaira::{betti, kodaira_split, Margins};
use pform::operators::ZeroThreshold;
use pform::quantization::{CoherentLabel, ComplexStructure, MatrixElement, Observable};
use pform::scenario::{Scenario, Setup};
use pform::{suite, wilson, Error};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::output::{write_json, Cell, Table};
use crate::{status, Cli, Command};

#[derive(Debug)]
pub struct Failure {
    pub status: u8,
    pub message: String,
}

impl Failure {
    pub fn io(message: String) -> Self {
        Failure { status: status::IO, message }
    }

    pub fn parse(message: String) -> Self {
        Failure { status: status::PARSE, message }
    }

    pub fn numerical(message: String) -> Self {
        Failure { status: status::NUMERICAL, message }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io(_) => status::IO,
            Error::Numerical(_) | Error::Domain { .. } | Error::Assembly(_) => status::NUMERICAL,
            Error::InvalidParameter(_)
            | Error::Degree { .. }
            | Error::Complex(_)
            | Error::Metric(_)
            | Error::Sector(_)
            | Error::Dimension { .. }
            | Error::Cycle { .. }
            | Error::Parse(_) => status::PARSE,
        };
        Failure { status, message: e.to_string() }
    }
}

type Outcome = Result<u8, Failure>;

struct Context {
    scenario: Scenario,
    base: PathBuf,
    out: PathBuf,
    tolerance_scale: f64,
}

impl Context {
    fn setup(&self) -> Result<Setup, Failure> {
        Ok(self.scenario.build(&self.base)?)
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.scenario.seed.wrapping_add(stream))
    }
}

pub fn run(cli: &Cli) -> Outcome {
    if !(cli.tolerance_scale.is_finite() && cli.tolerance_scale > 0.0) {
        return Err(Failure::parse(format!("--tolerance-scale {} must be positive", cli.tolerance_scale)));
    }
    if let Command::GapStudy = cli.command {
        return gap(cli);
    }
    let ctx = context(cli)?;
    match &cli.command {
        Command::Mesh => mesh(&ctx),
        Command::Spectrum => spectrum(&ctx),
        Command::Kodaira => kodaira(&ctx),
        Command::Evolve => evolve(&ctx),
        Command::Quantize { labels } => quantize(&ctx, labels.as_deref()),
        Command::Wilson => wilson_report(&ctx),
        Command::Verify => verify(&ctx),
        Command::GapStudy => unreachable!(),
    }
}

fn load_scenario(path: &Path) -> Result<Scenario, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    Scenario::from_json(&text).map_err(|e| Failure::parse(format!("{}: {e}", path.display())))
}

fn context(cli: &Cli) -> Result<Context, Failure> {
    let Some(path) = &cli.scenario else {
        return Err(Failure::parse("--scenario is required".into()));
    };
    let mut scenario = load_scenario(path)?;
    if let Some(seed) = cli.seed {
        scenario.seed = seed;
    }
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let out = output_dir(cli, &base, &scenario);
    Ok(Context { scenario, base, out, tolerance_scale: cli.tolerance_scale })
}

fn output_dir(cli: &Cli, base: &Path, scenario: &Scenario) -> PathBuf {
    match (&cli.out, &scenario.out_dir) {
        (Some(out), _) => out.clone(),
        (None, Some(dir)) => base.join(dir),
        (None, None) => PathBuf::from("."),
    }
}

fn policy() -> ZeroThreshold {
    ZeroThreshold::default()
}

fn announce(path: &Path) {
    println!("wrote {}", path.display());
}

fn mesh(ctx: &Context) -> Outcome {
    let setup = ctx.setup()?;
    let c = &setup.complex;
    let counts: Vec<String> = (0..=c.dimension()).map(|k| c.count(k).to_string()).collect();
    println!("dimension {}, simplices [{}], euler {}", c.dimension(), counts.join(", "), c.euler_characteristic());
    announce(&write_json(&ctx.out, "mesh.json", &MeshFile::new(c, &setup.metric))?);
    Ok(status::OK)
}

fn spectrum(ctx: &Context) -> Outcome {
    let setup = ctx.setup()?;
    let spectra: Vec<_> = (0..=setup.bundle.dimension())
        .into_par_iter()
        .map(|k| setup.bundle.spectrum(k, policy()))
        .collect::<Result<_, _>>()?;
    let mut table = Table::new(&["degree", "index", "eigenvalue", "is_kernel"]);
    for (k, s) in spectra.iter().enumerate() {
        for (i, &l) in s.eigenvalues().iter().enumerate() {
            table.push(vec![k.into(), i.into(), l.into(), s.is_kernel(i).into()]);
        }
        println!("degree {k}: {} eigenvalues, kernel {}", s.dim(), s.kernel_dim());
    }
    announce(&table.write(&ctx.out, "spectrum.csv")?);
    Ok(status::OK)
}

#[derive(Serialize)]
struct Dims {
    exact: usize,
    harmonic: usize,
    coexact: usize,
}

#[derive(Serialize)]
struct Residuals {
    completeness: f64,
    idempotence: f64,
    orthogonality: f64,
    symmetry: f64,
}

#[derive(Serialize)]
struct KodairaDegree {
    degree: usize,
    dims: Dims,
    betti: usize,
    margins: Margins,
    residuals: Residuals,
    warnings: Vec<String>,
}

#[derive(Serialize)]
struct KodairaReport {
    p: usize,
    twist_coefficient: f64,
    degrees: Vec<KodairaDegree>,
}

fn kodaira(ctx: &Context) -> Outcome {
    let setup = ctx.setup()?;
    let degrees: Vec<KodairaDegree> = (0..=setup.bundle.dimension())
        .into_par_iter()
        .map(|k| -> pform::Result<KodairaDegree> {
            let s = kodaira_split(&setup.bundle, k, policy())?;
            Ok(KodairaDegree {
                degree: k,
                dims: Dims { exact: s.dims[0], harmonic: s.dims[1], coexact: s.dims[2] },
                betti: betti(&setup.complex, k)?,
                margins: s.margins,
                residuals: Residuals {
                    completeness: s.completeness_residual(),
                    idempotence: s.idempotence_residual(),
                    orthogonality: s.orthogonality_residual(),
                    symmetry: s.symmetry_residual(),
                },
                warnings: s.warnings.clone(),
            })
        })
        .collect::<Result<_, _>>()?;
    for d in &degrees {
        println!(
            "degree {}: exact {}, harmonic {}, coexact {}, betti {}",
            d.degree, d.dims.exact, d.dims.harmonic, d.dims.coexact, d.betti
        );
        for w in &d.warnings {
            println!("  warning: {w}");
        }
    }
    let report =
        KodairaReport { p: setup.bundle.form_degree(), twist_coefficient: setup.bundle.twist_coefficient(), degrees };
    announce(&write_json(&ctx.out, "kodaira.json", &report)?);
    Ok(status::OK)
}

fn evolve(ctx: &Context) -> Outcome {
    let spec = &ctx.scenario.evolve;
    if spec.steps == 0 || !spec.t_max.is_finite() || !spec.scale.is_finite() {
        return Err(Failure::parse("evolve needs steps > 0 and finite t_max, scale".into()));
    }
    let setup = ctx.setup()?;
    let space = PhaseSpace::new(setup.bundle, policy())?;
    let mut rng = ctx.rng(0);
    let x = space.random_point(&mut rng, spec.scale);
    let y = space.random_point(&mut rng, spec.scale);
    let rows: Vec<[f64; 7]> = (0..=spec.steps)
        .into_par_iter()
        .map(|i| -> pform::Result<[f64; 7]> {
            let t = spec.t_max * i as f64 / spec.steps as f64;
            let xt = space.evolve(&x, t)?;
            let yt = space.evolve(&y, t)?;
            let sectors = space.split_sectors(&xt)?;
            Ok([
                t,
                space.hamiltonian(&xt)?,
                space.symplectic(&xt, &yt)?,
                space.hilbert_norm(&xt),
                space.hilbert_norm(&sectors.oscillating),
                space.hilbert_norm(&sectors.free),
                space.gauss_residual(&xt.e)?,
            ])
        })
        .collect::<Result<_, _>>()?;
    let mut table = Table::new(&[
        "t",
        "hamiltonian",
        "symplectic",
        "hilbert_norm",
        "oscillating_norm",
        "free_norm",
        "gauss_residual",
    ]);
    for row in &rows {
        table.push(row.iter().map(|&v| Cell::from(v)).collect());
    }
    println!("seed {}, {} samples on [0, {}]", ctx.scenario.seed, rows.len(), spec.t_max);
    announce(&table.write(&ctx.out, "evolve.csv")?);
    Ok(status::OK)
}

/// Labels and observables for `quantize`, given as raw cochains.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LabelFile {
    labels: Vec<RawPoint>,
    #[serde(default)]
    observables: Vec<RawObservable>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPoint {
    a: Vec<f64>,
    e: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawObservable {
    q: Vec<f64>,
    j: Vec<f64>,
}

#[derive(Serialize)]
struct Overlap {
    bra: usize,
    ket: usize,
    value: Complex64,
}

#[derive(Serialize)]
struct Elements {
    observable: usize,
    bra: usize,
    ket: usize,
    characteristic: f64,
    weyl: MatrixElement,
    heisenberg: MatrixElement,
    wick: Vec<MatrixElement>,
    normal_weyl: MatrixElement,
    annihilation: MatrixElement,
}

#[derive(Serialize)]
struct QuantizeReport {
    seed: u64,
    labels: usize,
    observables: usize,
    overlaps: Vec<Overlap>,
    elements: Vec<Elements>,
}

fn read_label_file(path: &Path) -> Result<LabelFile, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::parse(format!("{}: {e}", path.display())))
}

fn random_inputs(ctx: &Context, cs: &ComplexStructure) -> Result<(Vec<CoherentLabel>, Vec<Observable>), Failure> {
    let spec = &ctx.scenario.quantize;
    let mut rng = ctx.rng(3);
    let mut draw = || cs.space().random_cochain(&mut rng) * spec.scale;
    let mut labels = Vec::with_capacity(spec.labels);
    let mut observables = Vec::with_capacity(spec.labels);
    for _ in 0..spec.labels {
        let (a, e) = (draw(), draw());
        labels.push(cs.label_from_raw(&a, &e)?);
        let (q, j) = (draw(), draw());
        observables.push(cs.observable(&q, &j)?);
    }
    Ok((labels, observables))
}

fn quantize(ctx: &Context, label_file: Option<&Path>) -> Outcome {
    let spec = &ctx.scenario.quantize;
    let setup = ctx.setup()?;
    let space = PhaseSpace::new(setup.bundle, policy())?;
    let cs = ComplexStructure::new(&space)?;
    let (labels, observables) = match label_file {
        Some(path) => {
            let file = read_label_file(path)?;
            let labels = file
                .labels
                .iter()
                .map(|x| cs.label_from_raw(&DVector::from_vec(x.a.clone()), &DVector::from_vec(x.e.clone())))
                .collect::<Result<Vec<_>, _>>()?;
            let observables = if file.observables.is_empty() {
                labels.iter().map(|l| cs.observable_of(l)).collect()
            } else {
                file.observables
                    .iter()
                    .map(|f| cs.observable(&DVector::from_vec(f.q.clone()), &DVector::from_vec(f.j.clone())))
                    .collect::<Result<Vec<_>, _>>()?
            };
            (labels, observables)
        }
        None => random_inputs(ctx, &cs)?,
    };
    let n = labels.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let overlaps = pairs
        .par_iter()
        .map(|&(i, j)| Ok(Overlap { bra: i, ket: j, value: cs.coherent_overlap(&labels[i], &labels[j])? }))
        .collect::<pform::Result<Vec<_>>>()?;
    let triples: Vec<(usize, usize, usize)> =
        (0..observables.len()).flat_map(|g| pairs.iter().map(move |&(i, j)| (g, i, j))).collect();
    let elements = triples
        .par_iter()
        .map(|&(g, i, j)| -> pform::Result<Elements> {
            let (obs, bra, ket) = (&observables[g], &labels[i], &labels[j]);
            Ok(Elements {
                observable: g,
                bra: i,
                ket: j,
                characteristic: cs.characteristic_functional(obs)?,
                weyl: cs.weyl_matrix_element(obs, bra, ket)?,
                heisenberg: cs.heisenberg_matrix_element(obs, bra, ket)?,
                wick: (0..=spec.wick_max)
                    .map(|k| cs.wick_power_matrix_element(obs, k, bra, ket))
                    .collect::<Result<_, _>>()?,
                normal_weyl: cs.normal_weyl_matrix_element(obs, bra, ket)?,
                annihilation: cs.annihilation_matrix_element(obs, bra, ket)?,
            })
        })
        .collect::<pform::Result<Vec<_>>>()?;
    let report =
        QuantizeReport { seed: ctx.scenario.seed, labels: n, observables: observables.len(), overlaps, elements };
    println!("{} labels, {} observables, {} element sets", n, observables.len(), report.elements.len());
    announce(&write_json(&ctx.out, "quantize.json", &report)?);
    Ok(status::OK)
}

#[derive(Serialize)]
struct WilsonReport {
    wilson: Complex64,
    holonomy: Complex64,
    maxwell_residuals: [f64; 2],
    richardson: [Option<f64>; 2],
    corollary_residual: f64,
    overlap: Complex64,
    classical_holonomy: f64,
    t: f64,
    h: f64,
    seed: u64,
}

fn wilson_report(ctx: &Context) -> Outcome {
    let spec = &ctx.scenario.wilson;
    if spec.chain.is_empty() {
        return Err(Failure::parse("wilson needs a non-empty `wilson.loop` in the scenario".into()));
    }
    if !(spec.h > 0.0 && spec.h.is_finite() && spec.t.is_finite()) {
        return Err(Failure::parse("wilson needs finite t and a positive step h".into()));
    }
    let setup = ctx.setup()?;
    let chain = wilson::make_chain(&setup.complex, setup.bundle.form_degree(), &spec.chain)?;
    let space = PhaseSpace::new(setup.bundle, policy())?;
    let cs = ComplexStructure::new(&space)?;
    let mut rng = ctx.rng(4);
    let scale = ctx.scenario.quantize.scale;
    let mut draw = || space.random_cochain(&mut rng) * scale;
    let (a1, e1, a2, e2) = (draw(), draw(), draw(), draw());
    let bra = cs.label_from_raw(&a1, &e1)?;
    let ket = cs.label_from_raw(&a2, &e2)?;
    let maxwell = wilson::verify_quantum_maxwell(&cs, &bra, &ket, spec.t, spec.h)?;
    let report = WilsonReport {
        wilson: wilson::wilson_matrix_element(&cs, &chain, &bra, &ket)?,
        holonomy: wilson::holonomy_matrix_element(&cs, &chain, &bra, &ket)?,
        maxwell_residuals: maxwell.residuals(),
        richardson: maxwell.richardson(),
        corollary_residual: wilson::verify_wilson_corollary(&cs, &chain, &bra, &ket, spec.t, spec.h)?,
        overlap: cs.coherent_overlap(&bra, &ket)?,
        classical_holonomy: wilson::classical_holonomy(&chain, &space.point(&a1, &e1)?.a),
        t: spec.t,
        h: spec.h,
        seed: ctx.scenario.seed,
    };
    println!(
        "wilson {:e}{:+e}i, holonomy {:e}{:+e}i, maxwell residuals {:e}, {:e}",
        report.wilson.re,
        report.wilson.im,
        report.holonomy.re,
        report.holonomy.im,
        report.maxwell_residuals[0],
        report.maxwell_residuals[1]
    );
    announce(&write_json(&ctx.out, "wilson.json", &report)?);
    Ok(status::OK)
}

fn verify(ctx: &Context) -> Outcome {
    let setup = ctx.setup()?;
    let report = suite::run(&ctx.scenario, &setup, ctx.tolerance_scale)?;
    for c in &report.checks {
        let op = match c.bound {
            suite::Bound::AtMost => "<=",
            suite::Bound::AtLeast => ">=",
        };
        println!(
            "{} [{}] {}: {:e} {op} {:e}",
            if c.passed { "PASS" } else { "FAIL" },
            c.module,
            c.name,
            c.measured,
            c.tolerance
        );
    }
    for s in &report.skipped {
        println!("SKIP [{}] {}: {}", s.module, s.name, s.reason);
    }
    let failed = report.failures().count();
    println!("{} checks, {failed} failed, {} skipped", report.checks.len(), report.skipped.len());
    announce(&write_json(&ctx.out, "verify.json", &report)?);
    Ok(if failed == 0 { status::OK } else { status::INVARIANT })
}

fn profile_name(p: WeightProfile) -> &'static str {
    match p {
        WeightProfile::Flat => "flat",
        WeightProfile::HyperbolicLike => "hyperbolic-like",
    }
}

/// Runs without a scenario on the default discs; a scenario contributes its
/// `gap_study` section and output directory.
fn gap(cli: &Cli) -> Outcome {
    let (spec, out) = match &cli.scenario {
        Some(path) => {
            let scenario = load_scenario(path)?;
            let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
            let out = output_dir(cli, &base, &scenario);
            (scenario.gap_study, out)
        }
        None => (GapStudySpec::default(), cli.out.clone().unwrap_or_else(|| PathBuf::from("."))),
    };
    let rows = gap_study(&spec, policy())?;
    let mut table = Table::new(&["profile", "rings", "sectors", "vertices", "lambda1_l0", "lambda_min_l1"]);
    for r in &rows {
        table.push(vec![
            profile_name(r.profile).to_string().into(),
            r.rings.into(),
            r.sectors.into(),
            r.vertices.into(),
            r.lambda1_l0.into(),
            r.lambda_min_l1.into(),
        ]);
    }
    announce(&table.write(&out, "gap_study.csv")?);
    let trend = gap_trend(&rows, HYPERBOLIC_GAP_BOUND)?;
    println!(
        "flat gap decreasing: {}; hyperbolic-like minimum {:e} (bound {:e}): {}",
        trend.flat_decreasing,
        trend.hyperbolic_min,
        HYPERBOLIC_GAP_BOUND,
        if trend.hyperbolic_bounded { "bounded" } else { "not bounded" }
    );
    announce(&write_json(&out, "gap_trend.json", &trend)?);
    Ok(if trend.flat_decreasing && trend.hyperbolic_bounded { status::OK } else { status::INVARIANT })
}
