//! CPTP channels in Kraus form: application, adjoints, rescaling maps,
//! Choi-based validation, and covariance testing.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::matrix::{
    self, dagger, herm_eig, identity, maxnorm_diff, outer, CMatrix, CVector, DensityOperator,
    SpectralDecomposition,
};
use crate::tol;

/// A completely positive trace-preserving map N(rho) = sum_m K_m rho K_m†.
///
/// Input and output dimensions may differ (e.g. a channel that appends a
/// classical memory register).
#[derive(Debug, Clone)]
pub struct KrausChannel {
    kraus: Vec<CMatrix>,
    dim_in: usize,
    dim_out: usize,
}

impl KrausChannel {
    /// Validated constructor: trace preservation to 1e-8. Complete
    /// positivity is automatic for an explicit Kraus set.
    pub fn new(kraus: Vec<CMatrix>) -> Result<Self> {
        Self::with_tp_tolerance(kraus, tol::CPTP_TOL)
    }

    /// Validated constructor with an explicit trace-preservation tolerance
    /// (integrator-assembled channels carry larger residuals).
    pub fn with_tp_tolerance(kraus: Vec<CMatrix>, tp_tol: f64) -> Result<Self> {
        let ch = Self::new_unchecked(kraus);
        let dev = ch.tp_defect();
        if dev > tp_tol {
            return Err(Error::NotTracePreserving {
                deviation: dev,
                tol: tp_tol,
            });
        }
        Ok(ch)
    }

    /// No validation; for intermediate composite objects.
    pub fn new_unchecked(kraus: Vec<CMatrix>) -> Self {
        assert!(!kraus.is_empty(), "empty Kraus set");
        let dim_out = kraus[0].nrows();
        let dim_in = kraus[0].ncols();
        for k in &kraus {
            assert_eq!(k.nrows(), dim_out);
            assert_eq!(k.ncols(), dim_in);
        }
        Self {
            kraus,
            dim_in,
            dim_out,
        }
    }

    /// Channels whose evolved reference is rank deficient are trace
    /// preserving only on that support; validate against a projector.
    pub fn with_tp_projector(kraus: Vec<CMatrix>, projector: &CMatrix, tp_tol: f64) -> Result<Self> {
        let ch = Self::new_unchecked(kraus);
        let dev = maxnorm_diff(&ch.completeness_sum(), projector);
        if dev > tp_tol {
            return Err(Error::NotTracePreserving {
                deviation: dev,
                tol: tp_tol,
            });
        }
        Ok(ch)
    }

    /// sum_m K_m† K_m
    pub fn completeness_sum(&self) -> CMatrix {
        let mut s: CMatrix = Array2::zeros((self.dim_in, self.dim_in));
        for k in &self.kraus {
            s = s + dagger(k).dot(k);
        }
        s
    }

    /// max-norm deviation of the completeness sum from the identity.
    pub fn tp_defect(&self) -> f64 {
        maxnorm_diff(&self.completeness_sum(), &identity(self.dim_in))
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn identity(dim: usize) -> Self {
        Self::new_unchecked(vec![identity(dim)])
    }

    pub fn from_unitary(u: CMatrix) -> Result<Self> {
        Self::new(vec![u])
    }

    /// Linear action on an arbitrary matrix (no state validation).
    pub fn apply_matrix(&self, x: &CMatrix) -> CMatrix {
        let mut out: CMatrix = Array2::zeros((self.dim_out, self.dim_out));
        for k in &self.kraus {
            out = out + k.dot(x).dot(&dagger(k));
        }
        out
    }

    /// Apply to a density operator; the output is re-validated (symmetrized
    /// and trace-renormalized against accumulated rounding).
    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        if rho.dim() != self.dim_in {
            return Err(Error::DimensionMismatch {
                context: "channel apply",
                got: rho.dim(),
                expected: self.dim_in,
            });
        }
        DensityOperator::sanitize(self.apply_matrix(rho.matrix()), tol::INTEGRATOR_EIG_FLOOR)
    }

    /// Adjoint (Heisenberg) action N†(X) = sum_m K_m† X K_m.
    pub fn adjoint_apply(&self, x: &CMatrix) -> Result<CMatrix> {
        if x.nrows() != self.dim_out || x.ncols() != self.dim_out {
            return Err(Error::DimensionMismatch {
                context: "channel adjoint_apply",
                got: x.nrows(),
                expected: self.dim_out,
            });
        }
        let mut out: CMatrix = Array2::zeros((self.dim_in, self.dim_in));
        for k in &self.kraus {
            out = out + dagger(k).dot(x).dot(k);
        }
        Ok(out)
    }

    /// Choi matrix sum_ij E_ij ⊗ N(E_ij), dimension dim_in * dim_out.
    pub fn choi(&self) -> CMatrix {
        let d_in = self.dim_in;
        let d_out = self.dim_out;
        let mut c: CMatrix = Array2::zeros((d_in * d_out, d_in * d_out));
        // Choi = sum_m |w_m><w_m| with w_m[(i,k)] = K_m[k,i]
        for k in &self.kraus {
            let mut w: CVector = ndarray::Array1::zeros(d_in * d_out);
            for i in 0..d_in {
                for r in 0..d_out {
                    w[i * d_out + r] = k[(r, i)];
                }
            }
            c = c + outer(&w, &w);
        }
        c
    }

    /// Minimal Kraus set from an eigendecomposition of the Choi matrix.
    ///
    /// `cp_tol` bounds how negative a Choi eigenvalue may be before the map
    /// is rejected as not completely positive.
    pub fn from_choi(choi: &CMatrix, dim_in: usize, dim_out: usize, cp_tol: f64) -> Result<Self> {
        let spec = validate_choi_psd(choi, cp_tol)?;
        let mut kraus = Vec::new();
        let cut = spec
            .eigenvalues
            .iter()
            .cloned()
            .fold(0.0f64, f64::max)
            * tol::RANK_TOL_REL;
        for (m, &w) in spec.eigenvalues.iter().enumerate() {
            if w > cut.max(0.0) {
                let v = spec.vector(m);
                let mut k: CMatrix = Array2::zeros((dim_out, dim_in));
                for i in 0..dim_in {
                    for r in 0..dim_out {
                        k[(r, i)] = v[i * dim_out + r] * w.sqrt();
                    }
                }
                kraus.push(k);
            }
        }
        Ok(Self::new_unchecked(kraus))
    }

    /// Re-express the channel through its Choi eigenbasis, giving at most
    /// dim_in * dim_out Kraus operators. The map itself is unchanged.
    pub fn compress(&self) -> Self {
        if self.kraus.len() <= self.dim_in * self.dim_out {
            return self.clone();
        }
        Self::from_choi(&self.choi(), self.dim_in, self.dim_out, tol::CPTP_TOL)
            .expect("own Choi matrix is PSD")
    }

    /// Kraus reduction of a unitary dilation Tr_B[U (rho ⊗ gamma_B) U†].
    ///
    /// K_{(m,n)} = sqrt(q_n) (I ⊗ <b_m|) U (I ⊗ |b_n>) over the bath
    /// eigenbasis {q_n, |b_n>}; bath eigenvalues below `weight_cut` are
    /// dropped (their total mass bounds the trace-preservation defect).
    pub fn from_unitary_dilation(
        u: &CMatrix,
        dim_sys: usize,
        bath: &DensityOperator,
        weight_cut: f64,
    ) -> Result<Self> {
        let d_b = bath.dim();
        if u.nrows() != dim_sys * d_b {
            return Err(Error::DimensionMismatch {
                context: "dilation unitary",
                got: u.nrows(),
                expected: dim_sys * d_b,
            });
        }
        let mut kraus = Vec::new();
        for (n, &q) in bath.eigenvalues().iter().enumerate() {
            if q <= weight_cut {
                continue;
            }
            let bn = bath.spectral().vector(n);
            // columns of U restricted to bath vector |b_n>: U (I ⊗ |b_n>)
            let mut ub: CMatrix = Array2::zeros((dim_sys * d_b, dim_sys));
            for s in 0..dim_sys {
                for row in 0..dim_sys * d_b {
                    let mut acc = C64::new(0.0, 0.0);
                    for b in 0..d_b {
                        acc += u[(row, s * d_b + b)] * bn[b];
                    }
                    ub[(row, s)] = acc;
                }
            }
            for m in 0..d_b {
                // (I ⊗ <b_m|) picks bath component m in the standard basis:
                // use the same eigenbasis for the output side.
                let bm = bath.spectral().vector(m);
                let mut k: CMatrix = Array2::zeros((dim_sys, dim_sys));
                for r in 0..dim_sys {
                    for s in 0..dim_sys {
                        let mut acc = C64::new(0.0, 0.0);
                        for b in 0..d_b {
                            acc += bm[b].conj() * ub[(r * d_b + b, s)];
                        }
                        k[(r, s)] = acc * q.sqrt();
                    }
                }
                kraus.push(k);
            }
        }
        Self::new(kraus)
    }

    /// Compose other ∘ self (apply self first).
    pub fn then(&self, other: &KrausChannel) -> Result<KrausChannel> {
        if other.dim_in != self.dim_out {
            return Err(Error::DimensionMismatch {
                context: "channel composition",
                got: other.dim_in,
                expected: self.dim_out,
            });
        }
        let mut kraus = Vec::new();
        for a in &other.kraus {
            for b in &self.kraus {
                kraus.push(a.dot(b));
            }
        }
        Ok(KrausChannel::new_unchecked(kraus).compress())
    }
}

/// Check a Choi matrix for positivity; returns its decomposition.
pub fn validate_choi_psd(choi: &CMatrix, cp_tol: f64) -> Result<SpectralDecomposition> {
    let spec = herm_eig(choi)?;
    let min = spec
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if min < -cp_tol {
        return Err(Error::NotCompletelyPositive { eigenvalue: min });
    }
    Ok(spec)
}

/// Choi matrix of an arbitrary linear map given by a closure.
pub fn choi_of_map(dim_in: usize, dim_out: usize, map: impl Fn(&CMatrix) -> CMatrix) -> CMatrix {
    let mut c: CMatrix = Array2::zeros((dim_in * dim_out, dim_in * dim_out));
    for i in 0..dim_in {
        for j in 0..dim_in {
            let mut e: CMatrix = Array2::zeros((dim_in, dim_in));
            e[(i, j)] = C64::new(1.0, 0.0);
            let ne = map(&e);
            for r in 0..dim_out {
                for s in 0..dim_out {
                    c[(i * dim_out + r, j * dim_out + s)] = ne[(r, s)];
                }
            }
        }
    }
    c
}

/// Rescaling map J_A^alpha(X) = A^alpha X (A^alpha)† on the support of A.
pub fn rescale(a: &DensityOperator, alpha: C64, x: &CMatrix) -> Result<CMatrix> {
    if x.nrows() != a.dim() || x.ncols() != a.dim() {
        return Err(Error::DimensionMismatch {
            context: "rescale",
            got: x.nrows(),
            expected: a.dim(),
        });
    }
    let p = a.pow(alpha);
    Ok(p.dot(x).dot(&dagger(&p)))
}

/// Covariance defect of a channel with respect to the group generated by
/// ln(gamma): max-norm Choi difference between
/// J_{N(gamma)}^{-i theta} ∘ N ∘ J_gamma^{i theta} and N itself.
///
/// Zero (within tolerance) at every theta exactly when the channel is
/// covariant for this reference.
pub fn covariance_defect(ch: &KrausChannel, gamma: &DensityOperator, theta: f64) -> Result<f64> {
    if gamma.dim() != ch.dim_in() {
        return Err(Error::DimensionMismatch {
            context: "covariance_defect reference",
            got: gamma.dim(),
            expected: ch.dim_in(),
        });
    }
    let n_gamma = ch.apply(gamma)?;
    let u_in = gamma.pow(C64::new(0.0, theta));
    let u_out = n_gamma.pow(C64::new(0.0, -theta));
    let conjugated: Vec<CMatrix> = ch
        .kraus()
        .iter()
        .map(|k| u_out.dot(k).dot(&u_in))
        .collect();
    let conj_ch = KrausChannel::new_unchecked(conjugated);
    Ok(maxnorm_diff(&conj_ch.choi(), &ch.choi()))
}

/// Covariance defect for an explicit Hermitian generator pair: compares
/// e^{+iLt}_out N(e^{-iLt} rho e^{+iLt}) e^{-iLt}_out against N.
pub fn covariance_defect_generator(
    ch: &KrausChannel,
    gen_in: &CMatrix,
    gen_out: &CMatrix,
    t: f64,
) -> Result<f64> {
    let u_in = matrix::expm_hermitian(gen_in, C64::new(0.0, -t))?;
    let u_out = matrix::expm_hermitian(gen_out, C64::new(0.0, t))?;
    let conjugated: Vec<CMatrix> = ch
        .kraus()
        .iter()
        .map(|k| u_out.dot(k).dot(&u_in))
        .collect();
    let conj_ch = KrausChannel::new_unchecked(conjugated);
    Ok(maxnorm_diff(&conj_ch.choi(), &ch.choi()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{sandwich, trace, ONE, ZERO};
    use crate::random::{random_channel, random_density, rng};
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    #[test]
    fn identity_channel_is_identity() {
        let mut r = rng(1);
        let rho = random_density(3, &mut r);
        let ch = KrausChannel::identity(3);
        let out = ch.apply(&rho).unwrap();
        assert!(maxnorm_diff(out.matrix(), rho.matrix()) < 1e-12);
    }

    #[test]
    fn depolarizing_channel_maps_to_maximally_mixed() {
        // Kraus set {sigma_k / 2} fully depolarizes a qubit
        let half = C64::new(0.5, 0.0);
        let i = C64::new(0.0, 1.0);
        let kraus = vec![
            array![[half, ZERO], [ZERO, half]],
            array![[ZERO, half], [half, ZERO]],
            array![[ZERO, -i * half], [i * half, ZERO]],
            array![[half, ZERO], [ZERO, -half]],
        ];
        let ch = KrausChannel::new(kraus).unwrap();
        let mut r = rng(2);
        let rho = random_density(2, &mut r);
        let out = ch.apply(&rho).unwrap();
        assert!(maxnorm_diff(out.matrix(), DensityOperator::maximally_mixed(2).matrix()) < 1e-10);
    }

    #[test]
    fn adjoint_is_unital_and_dual() {
        let mut r = rng(3);
        let ch = random_channel(3, 3, 4, &mut r);
        let unital = ch.adjoint_apply(&identity(3)).unwrap();
        assert!(maxnorm_diff(&unital, &identity(3)) < 1e-8);
        // duality Tr[X N(rho)] = Tr[N†(X) rho]
        for _ in 0..5 {
            let rho = random_density(3, &mut r);
            let x = crate::random::random_complex_matrix(3, 3, &mut r);
            let lhs = trace(&x.dot(&ch.apply_matrix(rho.matrix())));
            let rhs = trace(&ch.adjoint_apply(&x).unwrap().dot(rho.matrix()));
            assert!((lhs - rhs).norm() < 1e-9);
        }
    }

    #[test]
    fn unitary_adjoint_conjugates() {
        // adjoint of a unitary channel U is U† X U
        let theta = 0.3f64;
        let u = array![
            [C64::new(theta.cos(), 0.0), C64::new(-theta.sin(), 0.0)],
            [C64::new(theta.sin(), 0.0), C64::new(theta.cos(), 0.0)]
        ];
        let ch = KrausChannel::from_unitary(u.clone()).unwrap();
        let x = array![[ONE, ZERO], [ZERO, -ONE]];
        let adj = ch.adjoint_apply(&x).unwrap();
        let expected = dagger(&u).dot(&x).dot(&u);
        assert!(maxnorm_diff(&adj, &expected) < 1e-12);
    }

    #[test]
    fn apply_preserves_trace_and_hermiticity() {
        let mut r = rng(4);
        for _ in 0..10 {
            let ch = random_channel(4, 3, 3, &mut r);
            let rho = random_density(4, &mut r);
            let raw = ch.apply_matrix(rho.matrix());
            assert!((trace(&raw).re - 1.0).abs() < 1e-9);
            assert!(crate::matrix::herm_asymmetry(&raw) < 1e-9);
        }
    }

    #[test]
    fn transpose_map_choi_is_detected_as_non_cp() {
        // Choi of the transpose map is the swap operator: eigenvalue -1.
        let d = 2;
        let choi = choi_of_map(d, d, |e| e.t().to_owned());
        let err = validate_choi_psd(&choi, tol::CPTP_TOL);
        match err {
            Err(Error::NotCompletelyPositive { eigenvalue }) => {
                assert_abs_diff_eq!(eigenvalue, -1.0, epsilon = 1e-10);
            }
            other => panic!("expected NotCompletelyPositive, got {other:?}"),
        }
    }

    #[test]
    fn choi_roundtrip_and_compression() {
        let mut r = rng(5);
        let ch = random_channel(3, 2, 5, &mut r);
        let compressed = ch.compress();
        assert!(compressed.kraus().len() <= 6);
        assert!(maxnorm_diff(&compressed.choi(), &ch.choi()) < 1e-10);
        let rho = random_density(3, &mut r);
        assert!(
            maxnorm_diff(
                &ch.apply_matrix(rho.matrix()),
                &compressed.apply_matrix(rho.matrix())
            ) < 1e-10
        );
    }

    #[test]
    fn rescale_basics() {
        let mut r = rng(6);
        let rho = random_density(3, &mut r);
        let x = crate::random::random_complex_matrix(3, 3, &mut r);
        // A = I leaves X unchanged
        let id = DensityOperator::maximally_mixed(3);
        let scaled = rescale(&id, C64::new(0.0, 0.0), &x).unwrap();
        assert!(maxnorm_diff(&scaled, &x) < 1e-12);
        // alpha = 0 projects onto the support
        let p = rescale(&rho, C64::new(0.0, 0.0), &x).unwrap();
        let proj = rho.support_projector();
        let expected = proj.dot(&x).dot(&proj);
        assert!(maxnorm_diff(&p, &expected) < 1e-10);
    }

    #[test]
    fn covariance_defect_zero_at_theta_zero() {
        let mut r = rng(7);
        let ch = random_channel(3, 3, 3, &mut r);
        let gamma = random_density(3, &mut r);
        let defect = covariance_defect(&ch, &gamma, 0.0).unwrap();
        assert!(defect < 1e-10);
    }

    #[test]
    fn dilation_constructor_matches_direct_dilation() {
        use crate::matrix::{partial_trace, tensor};
        let mut r = rng(8);
        // random unitary via QR-free route: exp(i H) from a random Hermitian
        let w = crate::random::random_complex_matrix(6, 6, &mut r);
        let h = (&w + &dagger(&w)).mapv(|z| z * 0.5);
        let u = crate::matrix::expm_hermitian(&h, C64::new(0.0, -1.0)).unwrap();
        let bath = random_density(3, &mut r);
        let ch = KrausChannel::from_unitary_dilation(&u, 2, &bath, 1e-16).unwrap();
        let rho = random_density(2, &mut r);
        let joint = tensor(rho.matrix(), bath.matrix());
        let evolved = u.dot(&joint).dot(&dagger(&u));
        let reduced = partial_trace(&evolved, &[2, 3], &[0]).unwrap();
        assert!(maxnorm_diff(&ch.apply_matrix(rho.matrix()), &reduced) < 1e-10);
    }

    #[test]
    fn dilation_pure_state_consistency() {
        let mut r = rng(9);
        let psi = crate::random::random_pure(2, &mut r);
        let phi = crate::random::random_pure(2, &mut r);
        let ch = random_channel(2, 2, 3, &mut r);
        let t: f64 = sandwich(&phi, &ch.apply_matrix(&outer(&psi, &psi)), &phi).re;
        assert!((0.0..=1.0 + 1e-9).contains(&t));
    }
}
