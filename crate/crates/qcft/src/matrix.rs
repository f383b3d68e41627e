//! Dense complex matrix algebra: Hermitian eigendecompositions, operator
//! powers with complex exponents, tensor/partial-trace structure, and the
//! distance measures used by the fluctuation-theorem machinery.
//!
//! Everything is dense and desk-scale (dimensions up to a couple hundred);
//! the eigensolver is LAPACK's Hermitian driver via `ndarray-linalg`.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::tol;

pub type CMatrix = Array2<C64>;
pub type CVector = Array1<C64>;

pub const ONE: C64 = C64::new(1.0, 0.0);
pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Conjugate transpose.
pub fn dagger(a: &CMatrix) -> CMatrix {
    a.t().mapv(|z| z.conj())
}

pub fn identity(d: usize) -> CMatrix {
    Array2::eye(d)
}

pub fn trace(a: &CMatrix) -> C64 {
    a.diag().sum()
}

/// max_ij |a_ij - b_ij|
pub fn maxnorm_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn maxnorm(a: &CMatrix) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// max_ij |a_ij - conj(a_ji)|
pub fn herm_asymmetry(a: &CMatrix) -> f64 {
    let d = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

fn check_square(a: &CMatrix, context: &'static str) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch {
            context,
            got: a.ncols(),
            expected: a.nrows(),
        });
    }
    Ok(a.nrows())
}

/// Outer product |u><v|.
pub fn outer(u: &CVector, v: &CVector) -> CMatrix {
    let n = u.len();
    let m = v.len();
    Array2::from_shape_fn((n, m), |(i, j)| u[i] * v[j].conj())
}

/// <u|A|v>
pub fn sandwich(u: &CVector, a: &CMatrix, v: &CVector) -> C64 {
    let av = a.dot(v);
    u.iter().zip(av.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn inner(u: &CVector, v: &CVector) -> C64 {
    u.iter().zip(v.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn normalize(v: &CVector) -> CVector {
    let n = inner(v, v).re.sqrt();
    v.mapv(|z| z / n)
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues are sorted in descending order; `vectors` holds the matching
/// orthonormal eigenvectors as columns. Within a degenerate subspace any
/// orthonormal basis may be returned.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub vectors: CMatrix,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn vector(&self, k: usize) -> CVector {
        self.vectors.column(k).to_owned()
    }

    /// V diag(f(lambda)) V†
    pub fn apply_fn(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        let d = self.dim();
        let mut scaled = self.vectors.clone();
        for (k, col) in scaled.columns_mut().into_iter().enumerate() {
            let fk = f(self.eigenvalues[k]);
            let mut col = col;
            col.mapv_inplace(|z| z * fk);
        }
        let vdag = dagger(&self.vectors);
        let mut out = scaled.dot(&vdag);
        debug_assert_eq!(out.nrows(), d);
        // round away the imaginary dust on what should be structured output
        out.mapv_inplace(|z| z);
        out
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.apply_fn(|x| C64::new(x, 0.0))
    }

    /// Number of eigenvalues above the relative support threshold.
    pub fn support_rank(&self) -> usize {
        let cut = self.support_cut();
        self.eigenvalues.iter().filter(|&&x| x > cut).count()
    }

    /// Absolute eigenvalue threshold defining the support.
    pub fn support_cut(&self) -> f64 {
        let max = self
            .eigenvalues
            .iter()
            .cloned()
            .fold(0.0f64, |a, b| a.max(b.abs()));
        tol::RANK_TOL_REL * max.max(f64::MIN_POSITIVE)
    }

    /// Projector onto the support (eigenvalues above the threshold).
    pub fn support_projector(&self) -> CMatrix {
        let cut = self.support_cut();
        let d = self.dim();
        let mut p = Array2::zeros((d, d));
        for (k, &x) in self.eigenvalues.iter().enumerate() {
            if x > cut {
                let v = self.vectors.column(k);
                for i in 0..d {
                    for j in 0..d {
                        p[(i, j)] += v[i] * v[j].conj();
                    }
                }
            }
        }
        p
    }
}

/// Hermitian eigendecomposition with descending eigenvalues.
///
/// Rejects inputs whose anti-Hermitian part exceeds the input tolerance;
/// the strictly Hermitian average (A + A†)/2 is what gets decomposed.
pub fn herm_eig(a: &CMatrix) -> Result<SpectralDecomposition> {
    check_square(a, "herm_eig input")?;
    let asym = herm_asymmetry(a);
    if asym > tol::HERM_INPUT_TOL {
        return Err(Error::NotHermitian {
            asymmetry: asym,
            tol: tol::HERM_INPUT_TOL,
        });
    }
    let sym = (a + &dagger(a)).mapv(|z| z * 0.5);
    let (vals, vecs) = sym.eigh(UPLO::Lower)?;
    // LAPACK returns ascending order; flip to descending.
    let d = vals.len();
    let eigenvalues: Vec<f64> = vals.iter().rev().cloned().collect();
    let mut vectors = Array2::zeros((d, d));
    for k in 0..d {
        vectors.column_mut(k).assign(&vecs.column(d - 1 - k));
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        vectors,
    })
}

/// Power of a positive-semidefinite matrix with a complex exponent,
/// restricted to the support: eigenvalues at or below the relative rank
/// threshold map to 0, the rest to exp(alpha ln lambda).
pub fn mat_pow(a: &CMatrix, alpha: C64) -> Result<CMatrix> {
    let spec = herm_eig(a)?;
    Ok(mat_pow_spectral(&spec, alpha))
}

/// Same as [`mat_pow`] on a cached decomposition.
pub fn mat_pow_spectral(spec: &SpectralDecomposition, alpha: C64) -> CMatrix {
    let cut = spec.support_cut();
    spec.apply_fn(|x| {
        if x > cut {
            (alpha * x.ln()).exp()
        } else {
            ZERO
        }
    })
}

/// exp(scale * A) for Hermitian A.
pub fn expm_hermitian(a: &CMatrix, scale: C64) -> Result<CMatrix> {
    let spec = herm_eig(a)?;
    Ok(spec.apply_fn(|x| (scale * x).exp()))
}

/// Kronecker product A ⊗ B.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    ndarray::linalg::kron(a, b)
}

pub fn tensor_vec(u: &CVector, v: &CVector) -> CVector {
    let mut out = Array1::zeros(u.len() * v.len());
    for i in 0..u.len() {
        for j in 0..v.len() {
            out[i * v.len() + j] = u[i] * v[j];
        }
    }
    out
}

/// Partial trace of an operator on a tensor-product space.
///
/// `dims` lists the factor dimensions (kron convention: leftmost factor
/// varies slowest); `keep` lists the factor indices to retain, in their
/// original order.
pub fn partial_trace(a: &CMatrix, dims: &[usize], keep: &[usize]) -> Result<CMatrix> {
    let d = check_square(a, "partial_trace input")?;
    let prod: usize = dims.iter().product();
    if prod != d {
        return Err(Error::DimensionMismatch {
            context: "partial_trace dims product",
            got: prod,
            expected: d,
        });
    }
    let n = dims.len();
    let keep_set: Vec<usize> = keep.to_vec();
    let traced: Vec<usize> = (0..n).filter(|k| !keep_set.contains(k)).collect();
    let dk: usize = keep_set.iter().map(|&k| dims[k]).product();
    let dt: usize = traced.iter().map(|&k| dims[k]).product();

    // strides of each factor in the full index
    let mut stride = vec![1usize; n];
    for k in (0..n.saturating_sub(1)).rev() {
        stride[k] = stride[k + 1] * dims[k + 1];
    }
    let unrank = |mut r: usize, subset: &[usize]| -> usize {
        // map a mixed-radix rank over `subset` factors to a full-space offset
        let mut off = 0;
        for &k in subset.iter().rev() {
            off += (r % dims[k]) * stride[k];
            r /= dims[k];
        }
        off
    };

    let mut out: CMatrix = Array2::zeros((dk, dk));
    for rk in 0..dk {
        let rk_off = unrank(rk, &keep_set);
        for ck in 0..dk {
            let ck_off = unrank(ck, &keep_set);
            let mut acc = ZERO;
            for t in 0..dt {
                let t_off = unrank(t, &traced);
                acc += a[(rk_off + t_off, ck_off + t_off)];
            }
            out[(rk, ck)] = acc;
        }
    }
    Ok(out)
}

/// Hermitian, positive-semidefinite, unit-trace operator with a cached
/// spectral decomposition.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    matrix: CMatrix,
    spectral: SpectralDecomposition,
    support_rank: usize,
    trace: f64,
}

impl DensityOperator {
    /// Strict constructor: Hermitian to 1e-10, eigenvalues above -1e-10
    /// (values in the clamp window are set to 0), trace within 1e-10 of 1.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        Self::build(matrix, tol::EIG_CLAMP, tol::HERM_TOL, tol::TRACE_TOL, false)
    }

    /// Permissive constructor for integrator and channel outputs: symmetrizes,
    /// clamps eigenvalues within `eig_floor` of zero, and renormalizes the
    /// trace. Eigenvalues below `-eig_floor` are still rejected.
    pub fn sanitize(matrix: CMatrix, eig_floor: f64) -> Result<Self> {
        Self::build(matrix, eig_floor, f64::INFINITY, f64::INFINITY, true)
    }

    fn build(
        matrix: CMatrix,
        eig_floor: f64,
        herm_tol: f64,
        trace_tol: f64,
        renormalize: bool,
    ) -> Result<Self> {
        check_square(&matrix, "density operator")?;
        let asym = herm_asymmetry(&matrix);
        if asym > herm_tol {
            return Err(Error::NotHermitian {
                asymmetry: asym,
                tol: herm_tol,
            });
        }
        let tr = trace(&matrix).re;
        if (tr - 1.0).abs() > trace_tol {
            return Err(Error::NotUnitTrace {
                trace: tr,
                tol: trace_tol,
            });
        }
        let mut spec = herm_eig(&matrix)?;
        if let Some(&min) = spec
            .eigenvalues
            .iter()
            .min_by(|a, b| a.partial_cmp(b).unwrap())
        {
            if min < -eig_floor {
                return Err(Error::NotPositive {
                    eigenvalue: min,
                    floor: eig_floor,
                });
            }
        }
        for x in spec.eigenvalues.iter_mut() {
            if *x < 0.0 {
                *x = 0.0;
            }
        }
        let total: f64 = spec.eigenvalues.iter().sum();
        if renormalize {
            for x in spec.eigenvalues.iter_mut() {
                *x /= total;
            }
        }
        let matrix = spec.reconstruct();
        let support_rank = spec.support_rank();
        let trace = if renormalize { 1.0 } else { tr };
        Ok(Self {
            matrix,
            spectral: spec,
            support_rank,
            trace,
        })
    }

    pub fn from_pure(v: &CVector) -> Self {
        let v = normalize(v);
        Self::new(outer(&v, &v)).expect("pure projector is a valid state")
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self::new(identity(d).mapv(|z| z / d as f64)).unwrap()
    }

    /// Gibbs state e^{-beta H} / Z for Hermitian H.
    pub fn gibbs(hamiltonian: &CMatrix, beta: f64) -> Result<Self> {
        let spec = herm_eig(hamiltonian)?;
        // subtract the ground energy before exponentiating
        let e0 = spec.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        let weights: Vec<f64> = spec
            .eigenvalues
            .iter()
            .map(|&e| (-beta * (e - e0)).exp())
            .collect();
        let z: f64 = weights.iter().sum();
        let mut spec2 = spec;
        for (w, e) in spec2.eigenvalues.iter_mut().zip(weights) {
            *w = e / z;
        }
        let m = spec2.reconstruct();
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn spectral(&self) -> &SpectralDecomposition {
        &self.spectral
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.spectral.eigenvalues
    }

    pub fn support_rank(&self) -> usize {
        self.support_rank
    }

    pub fn trace(&self) -> f64 {
        self.trace
    }

    pub fn is_full_rank(&self) -> bool {
        self.support_rank == self.dim()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.spectral
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn support_projector(&self) -> CMatrix {
        self.spectral.support_projector()
    }

    /// A^alpha on the support (cached decomposition).
    pub fn pow(&self, alpha: C64) -> CMatrix {
        mat_pow_spectral(&self.spectral, alpha)
    }

    /// -Tr[rho ln rho] in nats.
    pub fn von_neumann_entropy(&self) -> f64 {
        let cut = self.spectral.support_cut();
        -self
            .spectral
            .eigenvalues
            .iter()
            .filter(|&&p| p > cut)
            .map(|&p| p * p.ln())
            .sum::<f64>()
    }
}

/// Quantum fidelity F(rho, tau) = ||sqrt(rho) sqrt(tau)||_1^2.
pub fn fidelity(rho: &DensityOperator, tau: &DensityOperator) -> Result<f64> {
    if rho.dim() != tau.dim() {
        return Err(Error::DimensionMismatch {
            context: "fidelity",
            got: tau.dim(),
            expected: rho.dim(),
        });
    }
    let sr = rho.pow(C64::new(0.5, 0.0));
    let m = sr.dot(tau.matrix()).dot(&sr);
    let spec = herm_eig(&m)?;
    let root_sum: f64 = spec
        .eigenvalues
        .iter()
        .map(|&x| if x > 0.0 { x.sqrt() } else { 0.0 })
        .sum();
    Ok(root_sum * root_sum)
}

/// Relative entropy S(rho || gamma) = Tr[rho (ln rho - ln gamma)] in nats.
///
/// Requires supp(rho) within supp(gamma); this is checked through the
/// support-projector overlap Tr[P_gamma rho] >= 1 - 1e-9 and a violation is
/// an error rather than infinity.
pub fn relative_entropy(rho: &DensityOperator, gamma: &DensityOperator) -> Result<f64> {
    if rho.dim() != gamma.dim() {
        return Err(Error::DimensionMismatch {
            context: "relative_entropy",
            got: gamma.dim(),
            expected: rho.dim(),
        });
    }
    let pg = gamma.support_projector();
    let overlap = (pg.dot(rho.matrix())).diag().sum().re;
    if overlap < 1.0 - tol::SUPPORT_TOL {
        return Err(Error::SupportViolation {
            defect: 1.0 - overlap,
        });
    }
    // Tr[rho ln rho]
    let cut_r = rho.spectral().support_cut();
    let t1: f64 = rho
        .eigenvalues()
        .iter()
        .filter(|&&p| p > cut_r)
        .map(|&p| p * p.ln())
        .sum();
    // Tr[rho ln gamma] over gamma's support eigenbasis
    let cut_g = gamma.spectral().support_cut();
    let mut t2 = 0.0;
    for (k, &g) in gamma.eigenvalues().iter().enumerate() {
        if g > cut_g {
            let v = gamma.spectral().vector(k);
            let p = sandwich(&v, rho.matrix(), &v).re;
            t2 += p * g.ln();
        }
    }
    Ok(t1 - t2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn diag(xs: &[f64]) -> CMatrix {
        let d = xs.len();
        Array2::from_shape_fn((d, d), |(i, j)| {
            if i == j {
                c(xs[i], 0.0)
            } else {
                ZERO
            }
        })
    }

    #[test]
    fn herm_eig_identity() {
        let spec = herm_eig(&identity(2)).unwrap();
        assert_abs_diff_eq!(spec.eigenvalues[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(spec.eigenvalues[1], 1.0, epsilon = 1e-12);
        assert!(maxnorm_diff(&spec.reconstruct(), &identity(2)) < 1e-10);
    }

    #[test]
    fn herm_eig_diagonal_descending() {
        let spec = herm_eig(&diag(&[0.3, 0.7])).unwrap();
        assert_abs_diff_eq!(spec.eigenvalues[0], 0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(spec.eigenvalues[1], 0.3, epsilon = 1e-12);
        // standard basis up to phase
        assert!(spec.vectors.column(0)[1].norm() > 0.999);
        assert!(spec.vectors.column(1)[0].norm() > 0.999);
    }

    #[test]
    fn herm_eig_pauli_x() {
        let sx = ndarray::array![[ZERO, ONE], [ONE, ZERO]];
        let spec = herm_eig(&sx).unwrap();
        assert_abs_diff_eq!(spec.eigenvalues[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(spec.eigenvalues[1], -1.0, epsilon = 1e-12);
        let v = spec.vector(0);
        // (|0> + |1>)/sqrt(2) up to phase
        assert_abs_diff_eq!(v[0].norm(), std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-10);
        assert_abs_diff_eq!((v[0] - v[1]).norm(), 0.0, epsilon = 1e-10);
        // unitarity of the eigenvector matrix
        let vv = dagger(&spec.vectors).dot(&spec.vectors);
        assert!(maxnorm_diff(&vv, &identity(2)) < 1e-10);
    }

    #[test]
    fn herm_eig_rejects_non_hermitian() {
        let m = ndarray::array![[ONE, ONE], [ZERO, ONE]];
        assert!(matches!(herm_eig(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn mat_pow_identity_fixed_point() {
        let out = mat_pow(&identity(2), c(0.5, 3.0)).unwrap();
        assert!(maxnorm_diff(&out, &identity(2)) < 1e-12);
    }

    #[test]
    fn mat_pow_support_pseudopower() {
        let out = mat_pow(&diag(&[4.0, 0.0]), c(-0.5, 0.0)).unwrap();
        assert!(maxnorm_diff(&out, &diag(&[0.5, 0.0])) < 1e-12);
    }

    #[test]
    fn mat_pow_imaginary_exponent_is_unitary() {
        let beta = 1.3;
        let z = (beta / 2.0f64).exp() + (-beta / 2.0f64).exp();
        let g = diag(&[(beta / 2.0f64).exp() / z, (-beta / 2.0f64).exp() / z]);
        let theta = 0.77;
        let u = mat_pow(&g, c(0.0, theta)).unwrap();
        let prod = dagger(&u).dot(&u);
        assert!(maxnorm_diff(&prod, &identity(2)) < 1e-12);
        // eigenbasis formula: diag(exp(i theta ln r))
        let r1 = (beta / 2.0f64).exp() / z;
        assert_abs_diff_eq!(u[(0, 0)].re, (theta * r1.ln()).cos(), epsilon = 1e-12);
        assert_abs_diff_eq!(u[(0, 0)].im, (theta * r1.ln()).sin(), epsilon = 1e-12);
    }

    #[test]
    fn mat_pow_exponents_add_on_support() {
        use crate::random::rng;
        use rand::Rng;
        let mut r = rng(7);
        for _ in 0..20 {
            let d = 3;
            let w: CMatrix =
                Array2::from_shape_fn((d, d), |_| c(r.gen::<f64>() - 0.5, r.gen::<f64>() - 0.5));
            let a = w.dot(&dagger(&w));
            let al = c(r.gen::<f64>() - 0.5, r.gen::<f64>() - 0.5);
            let be = c(r.gen::<f64>() - 0.5, r.gen::<f64>() - 0.5);
            let lhs = mat_pow(&a, al).unwrap().dot(&mat_pow(&a, be).unwrap());
            let rhs = mat_pow(&a, al + be).unwrap();
            assert!(maxnorm_diff(&lhs, &rhs) < 1e-9);
        }
    }

    #[test]
    fn tensor_identities() {
        let t = tensor(&identity(2), &identity(3));
        assert!(maxnorm_diff(&t, &identity(6)) < 1e-15);
    }

    #[test]
    fn partial_trace_product_state() {
        let a = diag(&[0.25, 0.75]);
        let b = diag(&[0.1, 0.2, 0.7]);
        let full = tensor(&a, &b);
        let ta = partial_trace(&full, &[2, 3], &[0]).unwrap();
        assert!(maxnorm_diff(&ta, &a) < 1e-12);
        let tb = partial_trace(&full, &[2, 3], &[1]).unwrap();
        assert!(maxnorm_diff(&tb, &b) < 1e-12);
    }

    #[test]
    fn partial_trace_bell_state() {
        let mut v: CVector = Array1::zeros(4);
        v[0] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        v[3] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let bell = outer(&v, &v);
        for keep in [0usize, 1] {
            let red = partial_trace(&bell, &[2, 2], &[keep]).unwrap();
            assert!(maxnorm_diff(&red, &diag(&[0.5, 0.5])) < 1e-12);
        }
    }

    #[test]
    fn fidelity_basics() {
        let rho = DensityOperator::new(diag(&[0.6, 0.4])).unwrap();
        assert_abs_diff_eq!(fidelity(&rho, &rho).unwrap(), 1.0, epsilon = 1e-10);
        let p0 = DensityOperator::new(diag(&[1.0, 0.0])).unwrap();
        let p1 = DensityOperator::new(diag(&[0.0, 1.0])).unwrap();
        assert_abs_diff_eq!(fidelity(&p0, &p1).unwrap(), 0.0, epsilon = 1e-12);
        let mixed = DensityOperator::maximally_mixed(2);
        assert_abs_diff_eq!(fidelity(&p0, &mixed).unwrap(), 0.5, epsilon = 1e-10);
    }

    #[test]
    fn relative_entropy_values() {
        let rho = DensityOperator::new(diag(&[0.9, 0.1])).unwrap();
        assert_abs_diff_eq!(relative_entropy(&rho, &rho).unwrap(), 0.0, epsilon = 1e-10);
        let p0 = DensityOperator::new(diag(&[1.0, 0.0])).unwrap();
        let mixed = DensityOperator::maximally_mixed(2);
        assert_abs_diff_eq!(
            relative_entropy(&p0, &mixed).unwrap(),
            2.0f64.ln(),
            epsilon = 1e-10
        );
        let gamma = DensityOperator::new(diag(&[0.5, 0.5])).unwrap();
        let expected = 0.9 * (0.9f64 / 0.5).ln() + 0.1 * (0.1f64 / 0.5).ln();
        assert_abs_diff_eq!(
            relative_entropy(&rho, &gamma).unwrap(),
            expected,
            epsilon = 1e-10
        );
    }

    #[test]
    fn relative_entropy_support_violation() {
        let p0 = DensityOperator::new(diag(&[1.0, 0.0])).unwrap();
        let p1 = DensityOperator::new(diag(&[0.0, 1.0])).unwrap();
        assert!(matches!(
            relative_entropy(&p0, &p1),
            Err(Error::SupportViolation { .. })
        ));
    }

    #[test]
    fn density_operator_clamps_and_rejects() {
        // tiny negative eigenvalue within the clamp window is accepted
        let m = diag(&[1.0 + 0.5e-10, -0.5e-10]);
        let rho = DensityOperator::new(m).unwrap();
        assert_eq!(rho.support_rank(), 1);
        assert!(rho.min_eigenvalue() >= 0.0);
        // a genuinely negative eigenvalue is rejected
        let bad = diag(&[1.001, -0.001]);
        assert!(matches!(
            DensityOperator::new(bad),
            Err(Error::NotPositive { .. })
        ));
        // trace off by more than the tolerance is rejected
        let bad_tr = diag(&[0.9, 0.2]);
        assert!(matches!(
            DensityOperator::new(bad_tr),
            Err(Error::NotUnitTrace { .. })
        ));
    }

    #[test]
    fn relative_entropy_monotone_under_partial_trace() {
        use crate::random::{random_density, rng};
        let mut r = rng(11);
        for _ in 0..10 {
            let rho = random_density(4, &mut r);
            let gam = random_density(4, &mut r);
            let s_joint = relative_entropy(&rho, &gam).unwrap();
            let rho_a =
                DensityOperator::sanitize(partial_trace(rho.matrix(), &[2, 2], &[0]).unwrap(), 1e-9)
                    .unwrap();
            let gam_a =
                DensityOperator::sanitize(partial_trace(gam.matrix(), &[2, 2], &[0]).unwrap(), 1e-9)
                    .unwrap();
            let s_red = relative_entropy(&rho_a, &gam_a).unwrap();
            assert!(s_joint - s_red >= -1e-9);
        }
    }
}
