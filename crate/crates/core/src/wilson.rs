//! Field quasioperators `Â`, `Ê` and Wilson surfaces `∮_γ Â` over closed
//! chains, with finite-difference checks of the vacuum Maxwell equations they
//! satisfy along the classical flow of the labels.
//!
//! For a bra `X' = A' ⊕ E'` and a ket `X = A ⊕ E` the ratio cochains are
//!
//! ```text
//! ⟨X'|Â|X⟩ / ⟨X'|X⟩ = (A + A')/2 + i L^{-1/2} (E' - E)/2
//! ⟨X'|Ê|X⟩ / ⟨X'|X⟩ = (E + E')/2 + i L^{1/2} (A - A')/2
//! ```
//!
//! and `∮_γ Â` pairs the first with the chain. The holonomy `exp(i ∮_γ Â)` is
//! the normal-ordered Weyl operator of `F* = -(0 ⊕ Γ_γ)` with
//! `Γ_γ = P_o M^{-1} · indicator(γ)`.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use crate::complex::SimplicialComplex;
use crate::dynamics::PhasePoint;
use crate::error::{Error, Result};
use crate::quantization::{CoherentLabel, ComplexStructure, Observable};

/// Step used by the finite-difference checks.
pub const DEFAULT_STEP: f64 = 1e-4;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// A closed `p`-chain with coefficients summed from signed simplex entries.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Chain {
    degree: usize,
    terms: Vec<(usize, i8)>,
    coefficients: Vec<i64>,
}

impl Chain {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> &[(usize, i8)] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.iter().all(|&c| c == 0)
    }

    /// Integer coefficient of every `p`-simplex.
    pub fn coefficients(&self) -> &[i64] {
        &self.coefficients
    }

    pub fn indicator(&self) -> DVector<f64> {
        DVector::from_iterator(self.coefficients.len(), self.coefficients.iter().map(|&c| c as f64))
    }

    pub fn reversed(&self) -> Chain {
        Chain {
            degree: self.degree,
            terms: self.terms.iter().map(|&(i, s)| (i, -s)).collect(),
            coefficients: self.coefficients.iter().map(|c| -c).collect(),
        }
    }

    pub fn sum(&self, other: &Chain) -> Result<Chain> {
        if other.degree != self.degree || other.coefficients.len() != self.coefficients.len() {
            return Err(Error::Degree { degree: other.degree as isize, valid: format!("{}", self.degree) });
        }
        Ok(Chain {
            degree: self.degree,
            terms: self.terms.iter().chain(&other.terms).copied().collect(),
            coefficients: self.coefficients.iter().zip(&other.coefficients).map(|(a, b)| a + b).collect(),
        })
    }

    /// `∮_γ a` for a real cochain.
    pub fn pair(&self, a: &DVector<f64>) -> f64 {
        self.coefficients.iter().zip(a.iter()).map(|(&c, &x)| c as f64 * x).sum()
    }

    pub fn pair_complex(&self, a: &DVector<Complex64>) -> Complex64 {
        self.coefficients.iter().zip(a.iter()).map(|(&c, &x)| x * c as f64).sum()
    }
}

/// Builds a chain from `(simplex index, ±1)` entries and checks that its
/// boundary vanishes in integer arithmetic.
pub fn make_chain(complex: &SimplicialComplex, degree: usize, terms: &[(usize, i8)]) -> Result<Chain> {
    if degree > complex.dimension() {
        return Err(Error::degree(degree as isize, 0, complex.dimension() as isize));
    }
    let count = complex.count(degree);
    let mut coefficients = vec![0i64; count];
    for &(i, s) in terms {
        if i >= count {
            return Err(Error::InvalidParameter(format!("{degree}-simplex {i} does not exist ({count} in total)")));
        }
        if s != 1 && s != -1 {
            return Err(Error::InvalidParameter(format!("orientation {s} is not ±1")));
        }
        coefficients[i] += i64::from(s);
    }
    if degree > 0 {
        let boundary = complex.coboundary(degree - 1)?.transpose_apply(&coefficients);
        let nonzero = boundary.iter().filter(|&&b| b != 0).count();
        if nonzero > 0 {
            return Err(Error::Cycle { nonzero });
        }
    }
    Ok(Chain { degree, terms: terms.to_vec(), coefficients })
}

/// The 1-chain traversing a closed vertex path `v0 v1 ... v0`.
pub fn loop_chain(complex: &SimplicialComplex, path: &[usize]) -> Result<Chain> {
    let mut terms = Vec::with_capacity(path.len());
    for w in path.windows(2) {
        let (a, b) = (w[0].min(w[1]), w[0].max(w[1]));
        let i = complex
            .index_of(&[a, b])
            .ok_or_else(|| Error::InvalidParameter(format!("no edge between {} and {}", w[0], w[1])))?;
        terms.push((i, if w[0] < w[1] { 1 } else { -1 }));
    }
    make_chain(complex, 1, &terms)
}

/// A complex cochain of ratios together with the overlap it is normalized by.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldMatrixElement {
    pub values: DVector<Complex64>,
    pub overlap: Complex64,
}

impl FieldMatrixElement {
    pub fn raw(&self) -> DVector<Complex64> {
        &self.values * self.overlap
    }
}

fn complexify(re: &DVector<f64>, im: &DVector<f64>) -> DVector<Complex64> {
    re.zip_map(im, Complex64::new)
}

/// `L` applied to a complex cochain.
fn apply_laplacian(cs: &ComplexStructure, x: &DVector<Complex64>) -> DVector<Complex64> {
    let l = cs.space().bundle().laplacian(cs.space().degree()).expect("degree checked at assembly");
    complexify(&(l * x.map(|z| z.re)), &(l * x.map(|z| z.im)))
}

pub fn field_a_matrix_element(
    cs: &ComplexStructure,
    bra: &CoherentLabel,
    ket: &CoherentLabel,
) -> Result<FieldMatrixElement> {
    let (xp, x) = (bra.point(), ket.point());
    let re = (&x.a + &xp.a) * 0.5;
    let im = cs.power(&(&xp.e - &x.e), -0.5)? * 0.5;
    Ok(FieldMatrixElement { values: complexify(&re, &im), overlap: cs.coherent_overlap(bra, ket)? })
}

pub fn field_e_matrix_element(
    cs: &ComplexStructure,
    bra: &CoherentLabel,
    ket: &CoherentLabel,
) -> Result<FieldMatrixElement> {
    let (xp, x) = (bra.point(), ket.point());
    let re = (&x.e + &xp.e) * 0.5;
    let im = cs.power(&(&x.a - &xp.a), 0.5)? * 0.5;
    Ok(FieldMatrixElement { values: complexify(&re, &im), overlap: cs.coherent_overlap(bra, ket)? })
}

/// The observable dual `0 ⊕ Γ_γ`; its Heisenberg element is `∮_γ Â`.
pub fn chain_observable(cs: &ComplexStructure, chain: &Chain) -> Result<Observable> {
    check_degree(cs, chain)?;
    let gamma = chain.indicator().component_div(cs.space().mass());
    cs.observable(&DVector::zeros(gamma.len()), &gamma)
}

fn check_degree(cs: &ComplexStructure, chain: &Chain) -> Result<()> {
    let p = cs.space().degree();
    if chain.degree != p || chain.coefficients.len() != cs.space().size() {
        return Err(Error::Degree { degree: chain.degree as isize, valid: format!("{p}") });
    }
    Ok(())
}

/// `⟨bra|∮_γ Â|ket⟩ / ⟨bra|ket⟩`.
pub fn wilson_ratio(
    cs: &ComplexStructure,
    chain: &Chain,
    bra: &CoherentLabel,
    ket: &CoherentLabel,
) -> Result<Complex64> {
    check_degree(cs, chain)?;
    Ok(chain.pair_complex(&field_a_matrix_element(cs, bra, ket)?.values))
}

/// `⟨bra|∮_γ Â|ket⟩`.
pub fn wilson_matrix_element(
    cs: &ComplexStructure,
    chain: &Chain,
    bra: &CoherentLabel,
    ket: &CoherentLabel,
) -> Result<Complex64> {
    Ok(wilson_ratio(cs, chain, bra, ket)? * cs.coherent_overlap(bra, ket)?)
}

/// `⟨bra|:exp(i ∮_γ Â):|ket⟩`.
pub fn holonomy_matrix_element(
    cs: &ComplexStructure,
    chain: &Chain,
    bra: &CoherentLabel,
    ket: &CoherentLabel,
) -> Result<Complex64> {
    Ok((I * wilson_ratio(cs, chain, bra, ket)?).exp() * cs.coherent_overlap(bra, ket)?)
}

/// Classical holonomy `∮_γ A` of a real potential, the only way free-sector
/// (harmonic) potentials enter.
pub fn classical_holonomy(chain: &Chain, a: &DVector<f64>) -> f64 {
    chain.pair(a)
}

/// Maximum absolute residuals of both Maxwell equations at steps `h` and `h/2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MaxwellReport {
    pub t: f64,
    pub h: f64,
    /// `max |∂_t Â - Ê|` at `h` and at `h/2`.
    pub gauss_ampere: [f64; 2],
    /// `max |∂_t Ê + L Â|` at `h` and at `h/2`.
    pub faraday: [f64; 2],
}

impl MaxwellReport {
    pub fn residuals(&self) -> [f64; 2] {
        [self.gauss_ampere[0], self.faraday[0]]
    }

    /// Residual ratio between step `h` and `h/2` for each equation; `None`
    /// when the residual is at rounding level and the ratio is meaningless.
    pub fn richardson(&self) -> [Option<f64>; 2] {
        let ratio = |r: [f64; 2]| if r[1] > 1e-14 { Some(r[0] / r[1]) } else { None };
        [ratio(self.gauss_ampere), ratio(self.faraday)]
    }
}

fn max_abs(x: &DVector<Complex64>) -> f64 {
    x.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn verify_quantum_maxwell(
    cs: &ComplexStructure,
    bra: &CoherentLabel,
    ket: &CoherentLabel,
    t: f64,
    h: f64,
) -> Result<MaxwellReport> {
    let at = |s: f64| -> Result<(FieldMatrixElement, FieldMatrixElement)> {
        let b = cs.evolve_label(bra, s)?;
        let k = cs.evolve_label(ket, s)?;
        Ok((field_a_matrix_element(cs, &b, &k)?, field_e_matrix_element(cs, &b, &k)?))
    };
    let (a0, e0) = at(t)?;
    let (a_raw, e_raw) = (a0.raw(), e0.raw());
    let la = apply_laplacian(cs, &a_raw);
    let mut ga = [0.0; 2];
    let mut fa = [0.0; 2];
    for (slot, step) in [h, h / 2.0].into_iter().enumerate() {
        let (ap, ep) = at(t + step)?;
        let (am, em) = at(t - step)?;
        let da = (ap.raw() - am.raw()) / Complex64::from(2.0 * step);
        let de = (ep.raw() - em.raw()) / Complex64::from(2.0 * step);
        ga[slot] = max_abs(&(da - &e_raw));
        fa[slot] = max_abs(&(de + &la));
    }
    Ok(MaxwellReport { t, h, gauss_ampere: ga, faraday: fa })
}

/// `|∂_t hol - i (∮_γ Ê) exp(i ∮_γ Â)|` on ratios, with a central difference
/// of step `h` on the left.
pub fn verify_wilson_corollary(
    cs: &ComplexStructure,
    chain: &Chain,
    bra: &CoherentLabel,
    ket: &CoherentLabel,
    t: f64,
    h: f64,
) -> Result<f64> {
    check_degree(cs, chain)?;
    let hol = |s: f64| -> Result<Complex64> {
        let b = cs.evolve_label(bra, s)?;
        let k = cs.evolve_label(ket, s)?;
        Ok((I * wilson_ratio(cs, chain, &b, &k)?).exp())
    };
    let lhs = (hol(t + h)? - hol(t - h)?) / (2.0 * h);
    let b = cs.evolve_label(bra, t)?;
    let k = cs.evolve_label(ket, t)?;
    let e = chain.pair_complex(&field_e_matrix_element(cs, &b, &k)?.values);
    let rhs = I * e * (I * wilson_ratio(cs, chain, &b, &k)?).exp();
    Ok((lhs - rhs).norm())
}

/// Zero phase point helper for empty-label checks.
pub fn vacuum(cs: &ComplexStructure) -> Result<CoherentLabel> {
    cs.label(PhasePoint::zeros(cs.space().size()))
}
