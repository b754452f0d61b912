//! Complex structure on the oscillating sector and the free boson field over
//! it: coherent-state overlaps and the matrix elements of Weyl, Heisenberg,
//! Wick-power and normal-ordered Weyl operators, all in closed Gaussian form.
//!
//! Conventions. Labels and observable duals are oscillating phase points.
//! `ω(X, Y) = ⟨E, A'⟩ - ⟨E', A⟩`, `J(A ⊕ E) = L^{-1/2} E ⊕ -L^{1/2} A`,
//! `h(X, Y) = ω(X, J Y) = ⟨A, L^{1/2} A'⟩ + ⟨E, L^{-1/2} E'⟩` and the complex
//! inner product `⟨X, Y⟩ = h(X, Y) + i ω(X, Y)` is antilinear in its first
//! slot, with multiplication by `i` acting as `J`. For a bra label `f`, a ket
//! label `h` and an observable dual `g`:
//!
//! ```text
//! ⟨f|h⟩        = exp(i ω(f, h) / 2 - ‖f - h‖² / 4)
//! ⟨f|W(g)|h⟩   = exp(-i [ω(g, h + f) + ω(h, f)] / 2 - ‖h + g - f‖² / 4)
//! W(g)|h⟩      = exp(-i ω(g, h) / 2) |h + g⟩
//! ⟨f|Φ(g)|h⟩   = ⟨f|h⟩ · (i/2) [⟨f, g⟩ - ⟨g, h⟩]
//! ```
//!
//! so that `W(g) = exp(-iΦ(g))`, `W(f) W(g) = exp(ω(f, g) / 2i) W(f + g)`
//! and the diagonal Heisenberg element is `ω(g, f)`.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use crate::dynamics::{PhasePoint, PhaseSpace};
use crate::error::{Error, Result};
use crate::operators::inner;

/// Largest Wick power accepted.
pub const MAX_WICK_POWER: u32 = 32;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// A matrix element together with its ratio to the coherent-state overlap.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MatrixElement {
    pub raw: Complex64,
    pub ratio: Complex64,
}

/// Ket or bra label `|X⟩` of a coherent state; an oscillating phase point.
#[derive(Clone, Debug, PartialEq)]
pub struct CoherentLabel(PhasePoint);

impl CoherentLabel {
    pub fn point(&self) -> &PhasePoint {
        &self.0
    }
}

/// A linear observable through its phase-space dual `F*`, `F(X) = ω(F*, X)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable(PhasePoint);

impl Observable {
    pub fn dual(&self) -> &PhasePoint {
        &self.0
    }
}

/// The complex structure `J` on the oscillating sector of one phase space.
#[derive(Clone, Copy, Debug)]
pub struct ComplexStructure<'a> {
    space: &'a PhaseSpace,
}

impl<'a> ComplexStructure<'a> {
    pub fn new(space: &'a PhaseSpace) -> Result<Self> {
        if space.spectrum().kernel_dim() == space.size() || space.kodaira().dims[2] == 0 {
            return Err(Error::Sector("the oscillating sector is empty".into()));
        }
        Ok(ComplexStructure { space })
    }

    pub fn space(&self) -> &'a PhaseSpace {
        self.space
    }

    /// `L^s` on the nonzero spectrum; kernel components are dropped.
    pub fn power(&self, x: &DVector<f64>, s: f64) -> Result<DVector<f64>> {
        self.space.spectrum().apply_on_range(|l| l.powf(s), x)
    }

    /// Projection of a cochain onto the oscillating sector (the coexact part).
    pub fn project_oscillating(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.space.kodaira().coexact * x
    }

    pub fn label(&self, x: PhasePoint) -> Result<CoherentLabel> {
        self.space.require_oscillating(&x)?;
        Ok(CoherentLabel(x))
    }

    /// The label carried along the classical flow for time `t`.
    pub fn evolve_label(&self, x: &CoherentLabel, t: f64) -> Result<CoherentLabel> {
        Ok(CoherentLabel(self.space.evolve_oscillating(&x.0, t)?))
    }

    /// Label from arbitrary cochains, projected onto the oscillating sector.
    pub fn label_from_raw(&self, a: &DVector<f64>, e: &DVector<f64>) -> Result<CoherentLabel> {
        self.check(a)?;
        self.check(e)?;
        Ok(CoherentLabel(PhasePoint::new(self.project_oscillating(a), self.project_oscillating(e))))
    }

    /// Observable whose dual is the oscillating part of `F* = Q ⊕ J`.
    pub fn observable(&self, q: &DVector<f64>, j: &DVector<f64>) -> Result<Observable> {
        self.check(q)?;
        self.check(j)?;
        Ok(Observable(PhasePoint::new(self.project_oscillating(q), self.project_oscillating(j))))
    }

    pub fn observable_from_point(&self, fstar: &PhasePoint) -> Result<Observable> {
        self.observable(&fstar.a, &fstar.e)
    }

    /// The observable dual to a coherent label; `F(X) = ω(label, X)`.
    pub fn observable_of(&self, label: &CoherentLabel) -> Observable {
        Observable(label.0.clone())
    }

    fn check(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.space.size() {
            return Err(Error::Dimension { expected: self.space.size(), found: x.len() });
        }
        Ok(())
    }

    /// `J(A ⊕ E) = L^{-1/2} E ⊕ -L^{1/2} A`.
    pub fn apply_j(&self, x: &PhasePoint) -> Result<PhasePoint> {
        Ok(PhasePoint::new(self.power(&x.e, -0.5)?, -self.power(&x.a, 0.5)?))
    }

    /// `h(X, Y) = ⟨A, L^{1/2} A'⟩ + ⟨E, L^{-1/2} E'⟩`.
    pub fn real_inner(&self, x: &PhasePoint, y: &PhasePoint) -> Result<f64> {
        let m = self.space.mass();
        Ok(inner(&x.a, &self.power(&y.a, 0.5)?, m) + inner(&x.e, &self.power(&y.e, -0.5)?, m))
    }

    pub fn norm_sq(&self, x: &PhasePoint) -> Result<f64> {
        self.real_inner(x, x)
    }

    pub fn omega(&self, x: &PhasePoint, y: &PhasePoint) -> Result<f64> {
        self.space.symplectic(x, y)
    }

    /// `⟨X, Y⟩ = h(X, Y) + i ω(X, Y)`.
    pub fn complex_inner(&self, x: &PhasePoint, y: &PhasePoint) -> Result<Complex64> {
        Ok(Complex64::new(self.real_inner(x, y)?, self.omega(x, y)?))
    }

    /// `μ(F) = exp(-‖F*‖² / 4)`.
    pub fn characteristic_functional(&self, f: &Observable) -> Result<f64> {
        Ok((-self.norm_sq(&f.0)? / 4.0).exp())
    }

    /// `⟨bra|ket⟩`.
    pub fn coherent_overlap(&self, bra: &CoherentLabel, ket: &CoherentLabel) -> Result<Complex64> {
        self.overlap_points(&bra.0, &ket.0)
    }

    fn overlap_points(&self, f: &PhasePoint, h: &PhasePoint) -> Result<Complex64> {
        let w = self.omega(f, h)?;
        let d = self.norm_sq(&f.sub(h))?;
        Ok(Complex64::new(-d / 4.0, w / 2.0).exp())
    }

    /// Overlap of the states labelled `x + f*` and `x + h*` relative to a
    /// nonzero background `x`.
    pub fn coherent_overlap_with_background(
        &self,
        background: &CoherentLabel,
        bra: &CoherentLabel,
        ket: &CoherentLabel,
    ) -> Result<Complex64> {
        self.overlap_points(&bra.0.sub(&background.0), &ket.0.sub(&background.0))
    }

    /// `W(g)|h⟩ = phase · |h + g⟩`, returned as `(phase, h + g)`.
    pub fn weyl_action(&self, g: &Observable, ket: &CoherentLabel) -> Result<(Complex64, CoherentLabel)> {
        let w = self.omega(&g.0, &ket.0)?;
        Ok((Complex64::new(0.0, -w / 2.0).exp(), CoherentLabel(ket.0.add(&g.0))))
    }

    pub fn weyl_matrix_element(
        &self,
        g: &Observable,
        bra: &CoherentLabel,
        ket: &CoherentLabel,
    ) -> Result<MatrixElement> {
        let (f, h, g) = (&bra.0, &ket.0, &g.0);
        let phase = self.omega(g, &h.add(f))? + self.omega(h, f)?;
        let d = self.norm_sq(&h.add(g).sub(f))?;
        let log_raw = Complex64::new(-d / 4.0, -phase / 2.0);
        let log_overlap = Complex64::new(-self.norm_sq(&f.sub(h))? / 4.0, self.omega(f, h)? / 2.0);
        Ok(MatrixElement { raw: log_raw.exp(), ratio: (log_raw - log_overlap).exp() })
    }

    /// Ratio `(i/2) [⟨f, g⟩ - ⟨g, h⟩]` and the raw element.
    pub fn heisenberg_matrix_element(
        &self,
        g: &Observable,
        bra: &CoherentLabel,
        ket: &CoherentLabel,
    ) -> Result<MatrixElement> {
        let ratio = self.heisenberg_ratio(&g.0, &bra.0, &ket.0)?;
        let overlap = self.overlap_points(&bra.0, &ket.0)?;
        Ok(MatrixElement { raw: ratio * overlap, ratio })
    }

    fn heisenberg_ratio(&self, g: &PhasePoint, f: &PhasePoint, h: &PhasePoint) -> Result<Complex64> {
        Ok(I * 0.5 * (self.complex_inner(f, g)? - self.complex_inner(g, h)?))
    }

    /// `⟨f|:Φ(g)^n:|h⟩`, whose ratio is the `n`-th power of the Heisenberg ratio.
    pub fn wick_power_matrix_element(
        &self,
        g: &Observable,
        n: u32,
        bra: &CoherentLabel,
        ket: &CoherentLabel,
    ) -> Result<MatrixElement> {
        if n > MAX_WICK_POWER {
            return Err(Error::InvalidParameter(format!("Wick power {n} exceeds {MAX_WICK_POWER}")));
        }
        let ratio = self.heisenberg_ratio(&g.0, &bra.0, &ket.0)?.powu(n);
        Ok(MatrixElement { raw: ratio * self.coherent_overlap(bra, ket)?, ratio })
    }

    /// `⟨f|:W(g):|h⟩ = exp(-i · Heisenberg ratio) ⟨f|h⟩`.
    pub fn normal_weyl_matrix_element(
        &self,
        g: &Observable,
        bra: &CoherentLabel,
        ket: &CoherentLabel,
    ) -> Result<MatrixElement> {
        let h = self.heisenberg_matrix_element(g, bra, ket)?;
        let ratio = (-I * h.ratio).exp();
        Ok(MatrixElement { raw: ratio * self.coherent_overlap(bra, ket)?, ratio })
    }

    /// `⟨f|a(g)|h⟩` assembled from Heisenberg elements,
    /// `a(g) = (Φ(g) + i Φ(J g)) / √2`.
    pub fn annihilation_matrix_element(
        &self,
        g: &Observable,
        bra: &CoherentLabel,
        ket: &CoherentLabel,
    ) -> Result<MatrixElement> {
        let jg = Observable(self.apply_j(&g.0)?);
        let a = self.heisenberg_matrix_element(g, bra, ket)?;
        let b = self.heisenberg_matrix_element(&jg, bra, ket)?;
        let s = std::f64::consts::SQRT_2;
        Ok(MatrixElement { raw: (a.raw + I * b.raw) / s, ratio: (a.ratio + I * b.ratio) / s })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::MeshSpec;
    use crate::operators::{OperatorBundle, ZeroThreshold};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn torus() -> PhaseSpace {
        let mesh = MeshSpec::Torus { n: 4, m: 4 }.generate().unwrap();
        let b = OperatorBundle::assemble(&mesh.complex, &mesh.metric, 1, None).unwrap();
        PhaseSpace::new(b, ZeroThreshold::default()).unwrap()
    }

    fn random_label(cs: &ComplexStructure, rng: &mut ChaCha8Rng, scale: f64) -> CoherentLabel {
        let a = cs.space().random_cochain(rng) * scale;
        let e = cs.space().random_cochain(rng) * scale;
        cs.label_from_raw(&a, &e).unwrap()
    }

    #[test]
    fn empty_oscillating_sector_is_rejected() {
        let mesh = MeshSpec::Circle { n: 4 }.generate().unwrap();
        // p = 1 on a circle: L_1 has a one-dimensional kernel and the rest is exact
        let b = OperatorBundle::assemble(&mesh.complex, &mesh.metric, 1, None).unwrap();
        let ps = PhaseSpace::new(b, ZeroThreshold::default()).unwrap();
        assert!(matches!(ComplexStructure::new(&ps), Err(Error::Sector(_))));
    }

    #[test]
    fn labels_must_be_oscillating() {
        let ps = torus();
        let cs = ComplexStructure::new(&ps).unwrap();
        let harm = ps.kodaira().harmonic.column(0).into_owned();
        let x = PhasePoint::new(harm, DVector::zeros(48));
        assert!(matches!(cs.label(x), Err(Error::Sector(_))));
    }

    #[test]
    fn diagonal_overlap_and_vacuum() {
        let ps = torus();
        let cs = ComplexStructure::new(&ps).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = random_label(&cs, &mut rng, 0.4);
        let z = cs.coherent_overlap(&x, &x).unwrap();
        assert!((z - 1.0).norm() < 1e-15);
        let vacuum = cs.label_from_raw(&DVector::zeros(48), &DVector::zeros(48)).unwrap();
        let v = cs.coherent_overlap(&vacuum, &x).unwrap();
        let mu = cs.characteristic_functional(&cs.observable_of(&x)).unwrap();
        assert!(v.im.abs() < 1e-15 && (v.re - mu).abs() < 1e-15);
        let zero_bg = cs.coherent_overlap_with_background(&vacuum, &vacuum, &x).unwrap();
        assert_eq!(zero_bg, v);
    }

    #[test]
    fn wick_power_guard() {
        let ps = torus();
        let cs = ComplexStructure::new(&ps).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let x = random_label(&cs, &mut rng, 0.3);
        let g = cs.observable_of(&random_label(&cs, &mut rng, 0.3));
        assert!(matches!(cs.wick_power_matrix_element(&g, 33, &x, &x), Err(Error::InvalidParameter(_))));
        assert!(cs.wick_power_matrix_element(&g, 32, &x, &x).is_ok());
    }
}
