//! Orthogonal splitting of `k`-cochains into exact, harmonic and coexact parts
//! (`ran D_{k-1} ⊕ ker L_k ⊕ ran D_k^*`), and the exact Betti numbers that
//! the harmonic count is checked against.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::complex::SimplicialComplex;
use crate::error::{Error, Result};
use crate::exact::integer_rank;
use crate::operators::{OperatorBundle, SpectralData, ZeroThreshold};

/// Kernel/nonkernel separation of a spectrum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Margins {
    pub largest_kernel: Option<f64>,
    pub smallest_nonkernel: Option<f64>,
    /// `smallest_nonkernel / largest_kernel`; infinite when the kernel is
    /// empty or exactly zero.
    pub ratio: f64,
}

impl Margins {
    pub fn of(spectrum: &SpectralData) -> Self {
        let (largest_kernel, smallest_nonkernel) = spectrum.margins();
        let ratio = match (largest_kernel, smallest_nonkernel) {
            (Some(k), Some(g)) if k > 0.0 => g / k,
            (_, Some(_)) | (None, None) => f64::INFINITY,
            (Some(_), None) => 0.0,
        };
        Margins { largest_kernel, smallest_nonkernel, ratio }
    }
}

/// Below this margin ratio the kernel count is reported as ambiguous.
pub const AMBIGUOUS_MARGIN: f64 = 1e3;

#[derive(Clone, Debug)]
pub struct KodairaSplit {
    pub degree: usize,
    pub exact: DMatrix<f64>,
    pub harmonic: DMatrix<f64>,
    pub coexact: DMatrix<f64>,
    /// Ranks of the exact, harmonic and coexact projectors.
    pub dims: [usize; 3],
    pub margins: Margins,
    pub warnings: Vec<String>,
    mass: DVector<f64>,
}

impl KodairaSplit {
    pub fn projectors(&self) -> [&DMatrix<f64>; 3] {
        [&self.exact, &self.harmonic, &self.coexact]
    }

    pub fn completeness_residual(&self) -> f64 {
        let n = self.mass.len();
        let sum = &self.exact + &self.harmonic + &self.coexact - DMatrix::identity(n, n);
        operator_norm(&sum, &self.mass)
    }

    pub fn idempotence_residual(&self) -> f64 {
        self.projectors().iter().map(|p| operator_norm(&(*p * *p - *p), &self.mass)).fold(0.0, f64::max)
    }

    /// Largest `‖P_a P_b‖` over distinct pairs.
    pub fn orthogonality_residual(&self) -> f64 {
        let ps = self.projectors();
        let mut worst = 0.0f64;
        for a in 0..3 {
            for b in 0..3 {
                if a != b {
                    worst = worst.max(operator_norm(&(ps[a] * ps[b]), &self.mass));
                }
            }
        }
        worst
    }

    /// Largest deviation from M-self-adjointness, `‖M P - (M P)^T‖`.
    pub fn symmetry_residual(&self) -> f64 {
        self.projectors()
            .iter()
            .map(|p| {
                let mp = DMatrix::from_fn(p.nrows(), p.ncols(), |i, j| self.mass[i] * p[(i, j)]);
                (&mp - mp.transpose()).amax()
            })
            .fold(0.0, f64::max)
    }
}

/// Operator norm induced by the M-weighted inner product.
pub fn operator_norm(a: &DMatrix<f64>, mass: &DVector<f64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let conj = DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| mass[i].sqrt() * a[(i, j)] / mass[j].sqrt());
    conj.singular_values().iter().fold(0.0, |m, &s| m.max(s))
}

/// M-orthogonal projector onto the column space of `span`, with rank decided
/// by squared singular values under the same relative cut as eigenvalues.
pub fn range_projector(
    span: &DMatrix<f64>,
    mass: &DVector<f64>,
    policy: ZeroThreshold,
) -> Result<(DMatrix<f64>, usize)> {
    let n = mass.len();
    if span.nrows() != n {
        return Err(Error::Dimension { expected: n, found: span.nrows() });
    }
    if span.ncols() == 0 {
        return Ok((DMatrix::zeros(n, n), 0));
    }
    let root = mass.map(f64::sqrt);
    let weighted = DMatrix::from_fn(n, span.ncols(), |i, j| root[i] * span[(i, j)]);
    // squared singular values are the eigenvalues of the Gram matrix
    let eig = (weighted.transpose() * &weighted).symmetric_eigen();
    let top = eig.eigenvalues.iter().fold(0.0f64, |m, &s| m.max(s));
    let cut = policy.cut(top);
    let keep: Vec<usize> = (0..eig.eigenvalues.len()).filter(|&i| eig.eigenvalues[i] >= cut).collect();
    if keep.is_empty() {
        return Ok((DMatrix::zeros(n, n), 0));
    }
    let v = DMatrix::from_fn(span.ncols(), keep.len(), |i, j| {
        eig.eigenvectors[(i, keep[j])] / eig.eigenvalues[keep[j]].sqrt()
    });
    // one Householder pass restores orthonormality lost to the Gram product
    let basis = (&weighted * v).qr().q();
    let sym = &basis * basis.transpose();
    let proj = DMatrix::from_fn(n, n, |i, j| sym[(i, j)] * root[j] / root[i]);
    Ok((proj, keep.len()))
}

/// M-orthogonal projector onto the kernel eigenspaces of `spectrum`.
pub fn kernel_projector(spectrum: &SpectralData) -> DMatrix<f64> {
    let n = spectrum.dim();
    let mut p = DMatrix::zeros(n, n);
    let v = spectrum.eigenvectors();
    let m = spectrum.mass();
    for c in (0..n).filter(|&c| spectrum.is_kernel(c)) {
        for i in 0..n {
            for j in 0..n {
                p[(i, j)] += v[(i, c)] * v[(j, c)] * m[j];
            }
        }
    }
    p
}

pub fn kodaira_split(bundle: &OperatorBundle, k: usize, policy: ZeroThreshold) -> Result<KodairaSplit> {
    let spectrum = bundle.spectrum(k, policy)?;
    kodaira_split_with(bundle, k, &spectrum, policy)
}

/// Same as [`kodaira_split`] with a precomputed spectrum of `L_k`.
pub fn kodaira_split_with(
    bundle: &OperatorBundle,
    k: usize,
    spectrum: &SpectralData,
    policy: ZeroThreshold,
) -> Result<KodairaSplit> {
    let mass = bundle.mass(k)?.clone();
    if spectrum.dim() != mass.len() {
        return Err(Error::Dimension { expected: mass.len(), found: spectrum.dim() });
    }
    let (exact, rank_exact) = range_projector(bundle.derivative(k as isize - 1)?, &mass, policy)?;
    let (coexact, rank_coexact) = range_projector(bundle.adjoint(k as isize)?, &mass, policy)?;
    let harmonic = kernel_projector(spectrum);
    let dims = [rank_exact, spectrum.kernel_dim(), rank_coexact];
    let margins = Margins::of(spectrum);
    let mut warnings = Vec::new();
    if margins.ratio < AMBIGUOUS_MARGIN {
        warnings.push(format!(
            "kernel of L_{k} is ambiguous: largest kernel eigenvalue {:?}, smallest nonkernel {:?}",
            margins.largest_kernel, margins.smallest_nonkernel
        ));
    }
    if dims.iter().sum::<usize>() != mass.len() {
        warnings.push(format!("dimensions {dims:?} do not add up to {}", mass.len()));
    }
    Ok(KodairaSplit { degree: k, exact, harmonic, coexact, dims, margins, warnings, mass })
}

pub fn harmonic_dimension(bundle: &OperatorBundle, k: usize, policy: ZeroThreshold) -> Result<usize> {
    Ok(bundle.spectrum(k, policy)?.kernel_dim())
}

/// `dim ker d_k - rank d_{k-1}` over the integers.
pub fn betti(complex: &SimplicialComplex, k: usize) -> Result<usize> {
    let n = complex.dimension();
    if k > n {
        return Err(Error::degree(k as isize, 0, n as isize));
    }
    let rank_out = if k < n { integer_rank(&complex.coboundary(k)?.to_integer_rows()) } else { 0 };
    let rank_in = if k > 0 { integer_rank(&complex.coboundary(k - 1)?.to_integer_rows()) } else { 0 };
    Ok(complex.count(k) - rank_out - rank_in)
}

pub fn betti_numbers(complex: &SimplicialComplex) -> Result<Vec<usize>> {
    (0..=complex.dimension()).map(|k| betti(complex, k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::MeshSpec;

    fn setup(spec: MeshSpec, p: usize) -> (SimplicialComplex, OperatorBundle) {
        let mesh = spec.generate().unwrap();
        let b = OperatorBundle::assemble(&mesh.complex, &mesh.metric, p, None).unwrap();
        (mesh.complex, b)
    }

    #[test]
    fn torus_split_dimensions() {
        let (_, b) = setup(MeshSpec::Torus { n: 4, m: 4 }, 1);
        let s = kodaira_split(&b, 1, ZeroThreshold::default()).unwrap();
        assert_eq!(s.dims, [15, 2, 31]);
        assert!(s.warnings.is_empty(), "{:?}", s.warnings);
        assert!(s.completeness_residual() < 1e-10);
        assert!(s.orthogonality_residual() < 1e-10);
        assert!(s.idempotence_residual() < 1e-10);
    }

    #[test]
    fn sphere_has_no_harmonic_one_forms() {
        let (_, b) = setup(MeshSpec::SphereOctahedron { subdiv: 0 }, 1);
        assert_eq!(harmonic_dimension(&b, 1, ZeroThreshold::default()).unwrap(), 0);
        let s = kodaira_split(&b, 1, ZeroThreshold::default()).unwrap();
        assert_eq!(s.dims, [5, 0, 7]);
        assert!(s.margins.ratio.is_infinite());
    }

    #[test]
    fn betti_of_standard_meshes() {
        let (c, _) = setup(MeshSpec::Torus { n: 4, m: 4 }, 1);
        assert_eq!(betti_numbers(&c).unwrap(), vec![1, 2, 1]);
        let (c, _) = setup(MeshSpec::SphereOctahedron { subdiv: 0 }, 1);
        assert_eq!(betti_numbers(&c).unwrap(), vec![1, 0, 1]);
        let (c, _) = setup(MeshSpec::Circle { n: 4 }, 0);
        assert_eq!(betti_numbers(&c).unwrap(), vec![1, 1]);
        assert!(betti(&c, 2).is_err());
    }

    #[test]
    fn exact_part_is_closed() {
        let (_, b) = setup(MeshSpec::Torus { n: 4, m: 3 }, 1);
        let s = kodaira_split(&b, 1, ZeroThreshold::default()).unwrap();
        let dp = b.derivative(1).unwrap() * &s.exact;
        assert!(dp.amax() < 1e-10);
    }
}
