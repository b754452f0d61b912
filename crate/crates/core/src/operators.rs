//! Twisted derivatives, their metric adjoints, twisted Laplacians and the
//! spectral functional calculus on cochains.
//!
//! For a scenario `(n, p, Φ)` the twisted derivative is the conjugated
//! coboundary `D_k = E_{k+1} d_k E_k^{-1}` with diagonal twist weights
//! `E_k = exp(c · Φ)`, `c = (n - 2p - 1) / 2`. Adjoints are taken in the
//! lumped inner products `⟨x, y⟩_k = Σ x_i M_k[i] y_i`, and
//! `L_k = D_k^* D_k + D_{k-1} D_{k-1}^*`. The derivatives below degree 0 and
//! above degree `n - 1` are zero maps.

use nalgebra::{DMatrix, DVector};

use crate::complex::{mass_matrix, twist_weights, Incidence, MetricData, SimplicialComplex};
use crate::error::{Error, Result};

/// M-weighted inner product of two cochains.
pub fn inner(x: &DVector<f64>, y: &DVector<f64>, mass: &DVector<f64>) -> f64 {
    x.iter().zip(y.iter()).zip(mass.iter()).map(|((a, b), m)| a * m * b).sum()
}

pub fn norm(x: &DVector<f64>, mass: &DVector<f64>) -> f64 {
    inner(x, x, mass).sqrt()
}

/// `c = (n - 2p - 1) / 2`, the exponent of the conformal rescaling.
pub fn conformal_coefficient(n: usize, p: usize) -> f64 {
    (n as f64 - 2.0 * p as f64 - 1.0) / 2.0
}

/// `D_k = E_{k+1} · d_k · E_k^{-1}`.
pub fn twisted_derivative(d: &Incidence, twist_k: &DVector<f64>, twist_k1: &DVector<f64>) -> Result<DMatrix<f64>> {
    if d.ncols() != twist_k.len() || d.nrows() != twist_k1.len() {
        return Err(Error::Assembly(format!(
            "coboundary is {}x{}, twist weights have lengths {} and {}",
            d.nrows(),
            d.ncols(),
            twist_k1.len(),
            twist_k.len()
        )));
    }
    let mut out = DMatrix::zeros(d.nrows(), d.ncols());
    for i in 0..d.nrows() {
        for &(j, s) in d.row(i) {
            out[(i, j)] = twist_k1[i] * f64::from(s) / twist_k[j];
        }
    }
    Ok(out)
}

/// Metric adjoint `M_k^{-1} D^T M_{k+1}`.
pub fn adjoint(d: &DMatrix<f64>, mass_k: &DVector<f64>, mass_k1: &DVector<f64>) -> Result<DMatrix<f64>> {
    if d.ncols() != mass_k.len() || d.nrows() != mass_k1.len() {
        return Err(Error::Assembly(format!(
            "operator is {}x{}, masses have lengths {} and {}",
            d.nrows(),
            d.ncols(),
            mass_k1.len(),
            mass_k.len()
        )));
    }
    if mass_k.iter().chain(mass_k1.iter()).any(|&m| !(m > 0.0 && m.is_finite())) {
        return Err(Error::Metric("mass matrix is not positive definite".into()));
    }
    let mut out = d.transpose();
    for i in 0..out.nrows() {
        for j in 0..out.ncols() {
            out[(i, j)] *= mass_k1[j] / mass_k[i];
        }
    }
    Ok(out)
}

/// Every operator of one `(n, p, Φ)` scenario.
#[derive(Clone, Debug)]
pub struct OperatorBundle {
    n: usize,
    p: usize,
    coefficient: f64,
    coboundaries: Vec<Incidence>,
    mass: Vec<DVector<f64>>,
    twist: Vec<DVector<f64>>,
    // index k + 1 for k in -1..=n
    derivatives: Vec<DMatrix<f64>>,
    adjoints: Vec<DMatrix<f64>>,
    laplacians: Vec<DMatrix<f64>>,
}

impl OperatorBundle {
    /// Assembles the bundle. `coefficient` overrides the conformal default
    /// `(n - 2p - 1) / 2`.
    pub fn assemble(
        complex: &SimplicialComplex,
        metric: &MetricData,
        p: usize,
        coefficient: Option<f64>,
    ) -> Result<Self> {
        let n = complex.dimension();
        if p > n {
            return Err(Error::degree(p as isize, 0, n as isize));
        }
        metric.validate(complex)?;
        let coefficient = coefficient.unwrap_or_else(|| conformal_coefficient(n, p));
        let coboundaries = (0..n).map(|k| complex.coboundary(k)).collect::<Result<Vec<_>>>()?;
        let mass = (0..=n).map(|k| mass_matrix(complex, metric, k)).collect::<Result<Vec<_>>>()?;
        let twist = twist_weights(complex, metric, coefficient)?;

        let mut derivatives = Vec::with_capacity(n + 2);
        let mut adjoints = Vec::with_capacity(n + 2);
        derivatives.push(DMatrix::zeros(complex.count(0), 0));
        adjoints.push(DMatrix::zeros(0, complex.count(0)));
        for k in 0..n {
            let dk = twisted_derivative(&coboundaries[k], &twist[k], &twist[k + 1])?;
            adjoints.push(adjoint(&dk, &mass[k], &mass[k + 1])?);
            derivatives.push(dk);
        }
        derivatives.push(DMatrix::zeros(0, complex.count(n)));
        adjoints.push(DMatrix::zeros(complex.count(n), 0));

        let laplacians = (0..=n)
            .map(|k| {
                // D_k^* D_k + D_{k-1} D_{k-1}^*
                let up = &adjoints[k + 1] * &derivatives[k + 1];
                let down = &derivatives[k] * &adjoints[k];
                up + down
            })
            .collect();

        Ok(OperatorBundle { n, p, coefficient, coboundaries, mass, twist, derivatives, adjoints, laplacians })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn form_degree(&self) -> usize {
        self.p
    }

    pub fn twist_coefficient(&self) -> f64 {
        self.coefficient
    }

    /// Number of `k`-cochain components.
    pub fn size(&self, k: usize) -> usize {
        self.mass.get(k).map_or(0, DVector::len)
    }

    pub fn coboundary(&self, k: usize) -> Result<&Incidence> {
        self.coboundaries.get(k).ok_or_else(|| Error::degree(k as isize, 0, self.n as isize - 1))
    }

    pub fn mass(&self, k: usize) -> Result<&DVector<f64>> {
        self.mass.get(k).ok_or_else(|| Error::degree(k as isize, 0, self.n as isize))
    }

    pub fn twist(&self, k: usize) -> Result<&DVector<f64>> {
        self.twist.get(k).ok_or_else(|| Error::degree(k as isize, 0, self.n as isize))
    }

    /// `D_k` for `k` in `-1..=n`; the two ends are zero maps.
    pub fn derivative(&self, k: isize) -> Result<&DMatrix<f64>> {
        self.slot(&self.derivatives, k)
    }

    /// `D_k^*` for `k` in `-1..=n`.
    pub fn adjoint(&self, k: isize) -> Result<&DMatrix<f64>> {
        self.slot(&self.adjoints, k)
    }

    pub fn laplacian(&self, k: usize) -> Result<&DMatrix<f64>> {
        self.laplacians.get(k).ok_or_else(|| Error::degree(k as isize, 0, self.n as isize))
    }

    fn slot<'a>(&self, v: &'a [DMatrix<f64>], k: isize) -> Result<&'a DMatrix<f64>> {
        usize::try_from(k + 1).ok().and_then(|i| v.get(i)).ok_or_else(|| Error::degree(k, -1, self.n as isize))
    }

    /// Spectral data of `L_k` in the `M_k` inner product.
    pub fn spectrum(&self, k: usize, policy: ZeroThreshold) -> Result<SpectralData> {
        SpectralData::new(self.laplacian(k)?, self.mass(k)?, policy)
    }
}

/// Kernel cut for eigenvalues: `λ < max(relative · λ_max, absolute)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZeroThreshold {
    pub relative: f64,
    pub absolute: f64,
}

impl Default for ZeroThreshold {
    fn default() -> Self {
        ZeroThreshold { relative: 1e-9, absolute: 1e-14 }
    }
}

impl ZeroThreshold {
    pub fn cut(&self, scale: f64) -> f64 {
        (self.relative * scale).max(self.absolute)
    }
}

/// Eigenpairs of an M-self-adjoint operator, eigenvalues nondecreasing and
/// eigenvectors M-orthonormal.
#[derive(Clone, Debug)]
pub struct SpectralData {
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
    mass: DVector<f64>,
    zero_threshold: f64,
}

impl SpectralData {
    pub fn new(operator: &DMatrix<f64>, mass: &DVector<f64>, policy: ZeroThreshold) -> Result<Self> {
        let dim = mass.len();
        if operator.nrows() != dim || operator.ncols() != dim {
            return Err(Error::Dimension { expected: dim, found: operator.nrows() });
        }
        if mass.iter().any(|&m| !(m > 0.0 && m.is_finite())) {
            return Err(Error::Metric("mass matrix is not positive definite".into()));
        }
        if operator.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numerical("operator has non-finite entries".into()));
        }
        let root = mass.map(f64::sqrt);
        // S = M^{1/2} L M^{-1/2}, symmetric when L is M-self-adjoint
        let mut sym = DMatrix::from_fn(dim, dim, |i, j| root[i] * operator[(i, j)] / root[j]);
        let skew = (&sym - sym.transpose()).amax();
        let scale = sym.amax().max(f64::MIN_POSITIVE);
        if skew > 1e-8 * scale {
            return Err(Error::Numerical(format!(
                "operator is not self-adjoint in the given inner product (asymmetry {skew:e}, scale {scale:e})"
            )));
        }
        sym = (&sym + sym.transpose()) * 0.5;
        let eig = nalgebra::linalg::SymmetricEigen::try_new(sym, f64::EPSILON, 1000 * dim.max(1))
            .ok_or_else(|| Error::Numerical(format!("symmetric eigensolver did not converge (dimension {dim})")))?;
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let eigenvalues = DVector::from_iterator(dim, order.iter().map(|&i| eig.eigenvalues[i]));
        let mut eigenvectors = DMatrix::zeros(dim, dim);
        for (col, &i) in order.iter().enumerate() {
            for r in 0..dim {
                eigenvectors[(r, col)] = eig.eigenvectors[(r, i)] / root[r];
            }
        }
        let lambda_max = eigenvalues.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        Ok(SpectralData { eigenvalues, eigenvectors, mass: mass.clone(), zero_threshold: policy.cut(lambda_max) })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn mass(&self) -> &DVector<f64> {
        &self.mass
    }

    pub fn zero_threshold(&self) -> f64 {
        self.zero_threshold
    }

    pub fn is_kernel(&self, i: usize) -> bool {
        self.eigenvalues[i] < self.zero_threshold
    }

    pub fn kernel_dim(&self) -> usize {
        (0..self.dim()).filter(|&i| self.is_kernel(i)).count()
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0f64, |a, x| a.max(x.abs()))
    }

    /// Largest kernel eigenvalue (in absolute value) and smallest nonkernel
    /// eigenvalue; `None` where the class is empty.
    pub fn margins(&self) -> (Option<f64>, Option<f64>) {
        let kernel = (0..self.dim()).filter(|&i| self.is_kernel(i)).map(|i| self.eigenvalues[i].abs()).reduce(f64::max);
        let gap = (0..self.dim()).filter(|&i| !self.is_kernel(i)).map(|i| self.eigenvalues[i]).reduce(f64::min);
        (kernel, gap)
    }

    /// Expansion coefficients `⟨v_i, x⟩_M`.
    pub fn coefficients(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), found: x.len() });
        }
        Ok(self.eigenvectors.tr_mul(&x.component_mul(&self.mass)))
    }

    /// `Σ φ(λ_i) v_i ⟨v_i, x⟩_M`.
    pub fn apply_function(&self, phi: impl Fn(f64) -> f64, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.apply_filtered(|_| true, phi, x)
    }

    /// Functional calculus restricted to the nonkernel eigenspaces; kernel
    /// components are dropped.
    pub fn apply_on_range(&self, phi: impl Fn(f64) -> f64, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.apply_filtered(|i| !self.is_kernel(i), phi, x)
    }

    pub fn project_kernel(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.apply_filtered(|i| self.is_kernel(i), |_| 1.0, x)
    }

    pub fn project_range(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.apply_on_range(|_| 1.0, x)
    }

    fn apply_filtered(
        &self,
        keep: impl Fn(usize) -> bool,
        phi: impl Fn(f64) -> f64,
        x: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        let mut c = self.coefficients(x)?;
        for i in 0..self.dim() {
            if keep(i) {
                let f = phi(self.eigenvalues[i]);
                if !f.is_finite() {
                    return Err(Error::Domain { eigenvalue: self.eigenvalues[i] });
                }
                c[i] *= f;
            } else {
                c[i] = 0.0;
            }
        }
        Ok(&self.eigenvectors * c)
    }

    /// The matrix of `φ(L)` in cochain coordinates: `V diag(φ(λ)) V^T M`.
    pub fn matrix_function(&self, phi: impl Fn(f64) -> f64) -> Result<DMatrix<f64>> {
        self.matrix_filtered(|_| true, phi)
    }

    /// [`Self::matrix_function`] with the kernel eigenspaces mapped to zero.
    pub fn matrix_function_on_range(&self, phi: impl Fn(f64) -> f64) -> Result<DMatrix<f64>> {
        self.matrix_filtered(|i| !self.is_kernel(i), phi)
    }

    fn matrix_filtered(&self, keep: impl Fn(usize) -> bool, phi: impl Fn(f64) -> f64) -> Result<DMatrix<f64>> {
        let mut weighted = self.eigenvectors.clone();
        for (i, mut col) in weighted.column_iter_mut().enumerate() {
            let f = if keep(i) { phi(self.eigenvalues[i]) } else { 0.0 };
            if !f.is_finite() {
                return Err(Error::Domain { eigenvalue: self.eigenvalues[i] });
            }
            col *= f;
        }
        let mut vt_m = self.eigenvectors.transpose();
        for mut row in vt_m.row_iter_mut() {
            row.component_mul_assign(&self.mass.transpose());
        }
        Ok(weighted * vt_m)
    }

    /// Removable-singularity helper: `f(λ)` on the range and `limit` on the kernel.
    pub fn with_kernel_limit<'a>(&'a self, f: impl Fn(f64) -> f64 + 'a, limit: f64) -> impl Fn(f64) -> f64 + 'a {
        move |lambda| if lambda < self.zero_threshold { limit } else { f(lambda) }
    }
}
