//! Classical phase space of p-form electromagnetism in temporal gauge.
//!
//! A phase point is a pair `[A] ⊕ E` of `p`-cochains. The gauge class `[A]`
//! is represented by its M-shortest member (no component along
//! `ran D_{p-1}`) and `E` satisfies the Gauss law `D_{p-1}^* E = 0`; both
//! conditions are the same orthogonal projection. The phase space splits into
//! the free sector (`ker L_p`, where evolution is a shear) and the oscillating
//! sector (nonzero spectrum, harmonic-oscillator evolution).

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::kodaira::{kodaira_split_with, operator_norm, KodairaSplit};
use crate::operators::{inner, norm, OperatorBundle, SpectralData, ZeroThreshold};

/// Relative size of a foreign-sector component that is still treated as
/// rounding noise.
pub const SECTOR_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct PhasePoint {
    pub a: DVector<f64>,
    pub e: DVector<f64>,
}

impl PhasePoint {
    pub fn new(a: DVector<f64>, e: DVector<f64>) -> Self {
        PhasePoint { a, e }
    }

    pub fn zeros(size: usize) -> Self {
        PhasePoint { a: DVector::zeros(size), e: DVector::zeros(size) }
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn add(&self, other: &PhasePoint) -> PhasePoint {
        PhasePoint { a: &self.a + &other.a, e: &self.e + &other.e }
    }

    pub fn sub(&self, other: &PhasePoint) -> PhasePoint {
        PhasePoint { a: &self.a - &other.a, e: &self.e - &other.e }
    }

    pub fn scale(&self, s: f64) -> PhasePoint {
        PhasePoint { a: &self.a * s, e: &self.e * s }
    }

    /// Stacked `(A, E)` coordinates.
    pub fn stacked(&self) -> DVector<f64> {
        let n = self.len();
        DVector::from_fn(2 * n, |i, _| if i < n { self.a[i] } else { self.e[i - n] })
    }

    pub fn from_stacked(x: &DVector<f64>) -> PhasePoint {
        let n = x.len() / 2;
        PhasePoint { a: x.rows(0, n).into_owned(), e: x.rows(n, n).into_owned() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SectorSplit {
    pub oscillating: PhasePoint,
    pub free: PhasePoint,
}

/// The gauge-fixed phase space of one scenario, with the spectral data of
/// `L_p` used for exact time evolution.
#[derive(Clone, Debug)]
pub struct PhaseSpace {
    bundle: OperatorBundle,
    spectrum: SpectralData,
    split: KodairaSplit,
    physical: DMatrix<f64>,
}

impl PhaseSpace {
    pub fn new(bundle: OperatorBundle, policy: ZeroThreshold) -> Result<Self> {
        let p = bundle.form_degree();
        let spectrum = bundle.spectrum(p, policy)?;
        let split = kodaira_split_with(&bundle, p, &spectrum, policy)?;
        let n = bundle.size(p);
        let physical = DMatrix::identity(n, n) - &split.exact;
        Ok(PhaseSpace { bundle, spectrum, split, physical })
    }

    pub fn bundle(&self) -> &OperatorBundle {
        &self.bundle
    }

    pub fn spectrum(&self) -> &SpectralData {
        &self.spectrum
    }

    pub fn kodaira(&self) -> &KodairaSplit {
        &self.split
    }

    pub fn degree(&self) -> usize {
        self.bundle.form_degree()
    }

    /// Number of `p`-cochain components.
    pub fn size(&self) -> usize {
        self.spectrum.dim()
    }

    pub fn mass(&self) -> &DVector<f64> {
        self.spectrum.mass()
    }

    fn check(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.size() {
            return Err(Error::Dimension { expected: self.size(), found: x.len() });
        }
        Ok(())
    }

    fn check_point(&self, x: &PhasePoint) -> Result<()> {
        self.check(&x.a)?;
        self.check(&x.e)
    }

    /// Projects a raw electric field onto `ker D_{p-1}^*`.
    pub fn project_gauss(&self, e_raw: &DVector<f64>) -> Result<DVector<f64>> {
        self.check(e_raw)?;
        Ok(&self.physical * e_raw)
    }

    /// M-shortest representative of the gauge class of `a_raw`.
    pub fn gauge_fix(&self, a_raw: &DVector<f64>) -> Result<DVector<f64>> {
        self.check(a_raw)?;
        Ok(&self.physical * a_raw)
    }

    /// A normalized phase point from raw cochains.
    pub fn point(&self, a_raw: &DVector<f64>, e_raw: &DVector<f64>) -> Result<PhasePoint> {
        Ok(PhasePoint { a: self.gauge_fix(a_raw)?, e: self.project_gauss(e_raw)? })
    }

    /// Normal samples in every component, normalized, scaled by `scale`.
    pub fn random_point(&self, rng: &mut impl Rng, scale: f64) -> PhasePoint {
        let n = self.size();
        let a = DVector::from_fn(n, |_, _| scale * rng.sample::<f64, _>(StandardNormal));
        let e = DVector::from_fn(n, |_, _| scale * rng.sample::<f64, _>(StandardNormal));
        PhasePoint { a: &self.physical * a, e: &self.physical * e }
    }

    pub fn random_cochain(&self, rng: &mut impl Rng) -> DVector<f64> {
        DVector::from_fn(self.size(), |_, _| rng.sample::<f64, _>(StandardNormal))
    }

    /// `‖D_{p-1}^* E‖` in the `M_{p-1}` norm.
    pub fn gauss_residual(&self, e: &DVector<f64>) -> Result<f64> {
        self.check(e)?;
        let p = self.degree();
        if p == 0 {
            return Ok(0.0);
        }
        let div = self.bundle.adjoint(p as isize - 1)? * e;
        Ok(norm(&div, self.bundle.mass(p - 1)?))
    }

    /// `‖P_exact A‖`.
    pub fn gauge_residual(&self, a: &DVector<f64>) -> Result<f64> {
        self.check(a)?;
        Ok(norm(&(&self.split.exact * a), self.mass()))
    }

    /// `½ (⟨E, E⟩ + ⟨D_p A, D_p A⟩)`.
    pub fn hamiltonian(&self, x: &PhasePoint) -> Result<f64> {
        self.check_point(x)?;
        let p = self.degree();
        let da = self.bundle.derivative(p as isize)? * &x.a;
        let magnetic = if da.is_empty() { 0.0 } else { inner(&da, &da, self.bundle.mass(p + 1)?) };
        Ok(0.5 * (inner(&x.e, &x.e, self.mass()) + magnetic))
    }

    /// `ω(X, X') = ⟨E, A'⟩ - ⟨E', A⟩`.
    pub fn symplectic(&self, x: &PhasePoint, y: &PhasePoint) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(y)?;
        let m = self.mass();
        Ok(inner(&x.e, &y.a, m) - inner(&y.e, &x.a, m))
    }

    /// The Hilbert norm `‖X‖_P² = ⟨A, A⟩ + ⟨E, E⟩`, which evolution does not preserve.
    pub fn hilbert_norm(&self, x: &PhasePoint) -> f64 {
        let m = self.mass();
        (inner(&x.a, &x.a, m) + inner(&x.e, &x.e, m)).sqrt()
    }

    pub fn split_sectors(&self, x: &PhasePoint) -> Result<SectorSplit> {
        self.check_point(x)?;
        let free = PhasePoint { a: self.spectrum.project_kernel(&x.a)?, e: self.spectrum.project_kernel(&x.e)? };
        let oscillating = x.sub(&free);
        Ok(SectorSplit { oscillating, free })
    }

    fn foreign_size(&self, part: &PhasePoint, whole: &PhasePoint) -> f64 {
        self.hilbert_norm(part) / self.hilbert_norm(whole).max(f64::MIN_POSITIVE)
    }

    /// Errors unless `x` has no free-sector component beyond rounding.
    pub fn require_oscillating(&self, x: &PhasePoint) -> Result<()> {
        let split = self.split_sectors(x)?;
        let rel = self.foreign_size(&split.free, x);
        if rel > SECTOR_TOLERANCE && self.hilbert_norm(&split.free) > 1e-300 {
            return Err(Error::Sector(format!("point has free-sector component of relative size {rel:e}")));
        }
        Ok(())
    }

    pub fn require_free(&self, x: &PhasePoint) -> Result<()> {
        let split = self.split_sectors(x)?;
        let rel = self.foreign_size(&split.oscillating, x);
        if rel > SECTOR_TOLERANCE && self.hilbert_norm(&split.oscillating) > 1e-300 {
            return Err(Error::Sector(format!("point has oscillating-sector component of relative size {rel:e}")));
        }
        Ok(())
    }

    /// `A(t) = cos(t√L) A + sin(t√L)/√L E`, `E(t) = -√L sin(t√L) A + cos(t√L) E`.
    pub fn evolve_oscillating(&self, x: &PhasePoint, t: f64) -> Result<PhasePoint> {
        self.require_oscillating(x)?;
        self.flow_oscillating(x, t)
    }

    fn flow_oscillating(&self, x: &PhasePoint, t: f64) -> Result<PhasePoint> {
        let s = &self.spectrum;
        let cos = |l: f64| (t * l.sqrt()).cos();
        let sinc = |l: f64| (t * l.sqrt()).sin() / l.sqrt();
        let msin = |l: f64| -l.sqrt() * (t * l.sqrt()).sin();
        Ok(PhasePoint {
            a: s.apply_on_range(cos, &x.a)? + s.apply_on_range(sinc, &x.e)?,
            e: s.apply_on_range(msin, &x.a)? + s.apply_on_range(cos, &x.e)?,
        })
    }

    /// `A(t) = A + t E`, `E(t) = E`.
    pub fn evolve_free(&self, x: &PhasePoint, t: f64) -> Result<PhasePoint> {
        self.require_free(x)?;
        Ok(PhasePoint { a: &x.a + &x.e * t, e: x.e.clone() })
    }

    pub fn evolve(&self, x: &PhasePoint, t: f64) -> Result<PhasePoint> {
        let split = self.split_sectors(x)?;
        let osc = self.flow_oscillating(&split.oscillating, t)?;
        let free = &split.free;
        let free = PhasePoint { a: &free.a + &free.e * t, e: free.e.clone() };
        Ok(osc.add(&free))
    }

    /// Matrix of the oscillating propagator on stacked `(A, E)` coordinates,
    /// composed with the projection onto the oscillating sector.
    pub fn oscillating_propagator(&self, t: f64) -> Result<DMatrix<f64>> {
        let s = &self.spectrum;
        let c = s.matrix_function_on_range(|l| (t * l.sqrt()).cos())?;
        let sn = s.matrix_function_on_range(|l| (t * l.sqrt()).sin() / l.sqrt())?;
        let ms = s.matrix_function_on_range(|l| -l.sqrt() * (t * l.sqrt()).sin())?;
        Ok(blocks(&c, &sn, &ms, &c))
    }

    /// Matrix of the free propagator on stacked coordinates, composed with
    /// the projection onto the free sector.
    pub fn free_propagator(&self, t: f64) -> DMatrix<f64> {
        let ph = &self.split.harmonic;
        let zero = DMatrix::zeros(ph.nrows(), ph.ncols());
        blocks(ph, &(ph * t), &zero, ph)
    }

    /// Operator norm for stacked coordinates under `‖·‖_P`.
    pub fn stacked_operator_norm(&self, op: &DMatrix<f64>) -> f64 {
        let m = self.mass();
        let n = m.len();
        let mm = DVector::from_fn(2 * n, |i, _| m[i % n]);
        operator_norm(op, &mm)
    }
}

fn blocks(a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>, d: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    out.view_mut((0, 0), (n, n)).copy_from(a);
    out.view_mut((0, n), (n, n)).copy_from(b);
    out.view_mut((n, 0), (n, n)).copy_from(c);
    out.view_mut((n, n), (n, n)).copy_from(d);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::MeshSpec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn torus() -> PhaseSpace {
        let mesh = MeshSpec::Torus { n: 4, m: 4 }.generate().unwrap();
        let b = OperatorBundle::assemble(&mesh.complex, &mesh.metric, 1, None).unwrap();
        PhaseSpace::new(b, ZeroThreshold::default()).unwrap()
    }

    #[test]
    fn pure_gauge_is_removed() {
        let ps = torus();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let phi = DVector::from_fn(16, |_, _| rng.sample::<f64, _>(StandardNormal));
        let grad = ps.bundle().derivative(0).unwrap() * phi;
        assert!(ps.gauge_fix(&grad).unwrap().amax() < 1e-12);
        assert!(ps.project_gauss(&grad).unwrap().amax() < 1e-12);
    }

    #[test]
    fn gauss_projection_keeps_coexact_fields() {
        let ps = torus();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let beta = DVector::from_fn(32, |_, _| rng.sample::<f64, _>(StandardNormal));
        let coexact = ps.bundle().adjoint(1).unwrap() * beta;
        let projected = ps.project_gauss(&coexact).unwrap();
        assert!((&projected - &coexact).amax() < 1e-12);
        assert!(ps.gauss_residual(&coexact).unwrap() < 1e-12);
        let again = ps.project_gauss(&projected).unwrap();
        assert!((again - projected).amax() < 1e-12);
    }

    #[test]
    fn harmonic_potential_has_no_energy() {
        let ps = torus();
        let harm = ps.kodaira().harmonic.column(0).into_owned();
        let x = PhasePoint::new(harm.clone(), DVector::zeros(48));
        assert!(ps.hamiltonian(&x).unwrap() < 1e-24);
        assert_eq!(ps.gauge_fix(&harm).unwrap().len(), 48);
        assert!((ps.gauge_fix(&harm).unwrap() - &harm).amax() < 1e-12);
        assert_eq!(ps.hamiltonian(&PhasePoint::zeros(48)).unwrap(), 0.0);
    }

    #[test]
    fn sector_errors() {
        let ps = torus();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = ps.random_point(&mut rng, 1.0);
        assert!(matches!(ps.evolve_oscillating(&x, 1.0), Err(Error::Sector(_))));
        assert!(matches!(ps.evolve_free(&x, 1.0), Err(Error::Sector(_))));
        let bad = PhasePoint::zeros(47);
        assert!(matches!(ps.hamiltonian(&bad), Err(Error::Dimension { .. })));
        assert!(matches!(ps.symplectic(&x, &bad), Err(Error::Dimension { .. })));
    }

    #[test]
    fn free_sector_dimension_on_torus() {
        let ps = torus();
        assert_eq!(ps.spectrum().kernel_dim(), 2);
        assert_eq!(ps.kodaira().dims[1], 2);
    }

    #[test]
    fn single_eigenmode_evolution() {
        let ps = torus();
        let s = ps.spectrum();
        let idx = (0..s.dim())
            .rev()
            .find(|&i| {
                let v = s.eigenvectors().column(i).into_owned();
                !s.is_kernel(i) && norm(&ps.gauge_fix(&v).unwrap(), ps.mass()) > 0.5
            })
            .unwrap();
        let v = s.eigenvectors().column(idx).into_owned();
        let x = ps.point(&v, &DVector::zeros(48)).unwrap();
        let lambda = s.eigenvalues()[idx];
        let t = 0.83;
        let y = ps.evolve_oscillating(&x, t).unwrap();
        let want_a = &x.a * (t * lambda.sqrt()).cos();
        let want_e = &x.a * (-lambda.sqrt() * (t * lambda.sqrt()).sin());
        assert!((y.a - want_a).amax() < 1e-12);
        assert!((y.e - want_e).amax() < 1e-12);
    }
}
