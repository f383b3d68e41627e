//! Petz, rotated-Petz, and rotation-averaged recovery channels.
//!
//! A forward channel N together with a full-rank reference state gamma
//! determines the one-parameter family of reverse channels
//!
//!     R_gamma^theta = J_gamma^{1/2 + i theta} ∘ N† ∘ J_{N(gamma)}^{-1/2 - i theta},
//!
//! every member of which restores the reference exactly. theta = 0 is the
//! ordinary Petz recovery map.

use num_complex::Complex64 as C64;

use crate::channel::KrausChannel;
use crate::error::{Error, Result};
use crate::matrix::{dagger, maxnorm, maxnorm_diff, CMatrix, DensityOperator};
use crate::tol;

/// A forward channel paired with its (full-rank) reference state and the
/// evolved reference N(gamma).
#[derive(Debug, Clone)]
pub struct RecoveryFamily {
    forward: KrausChannel,
    reference: DensityOperator,
    evolved_reference: DensityOperator,
    /// ||N(gamma) - evolved_reference||_max. Zero unless the family was
    /// pinned to a fixed point.
    fixed_point_residual: f64,
}

impl RecoveryFamily {
    /// Evolve the reference through the channel and pair them.
    pub fn new(forward: KrausChannel, reference: DensityOperator) -> Result<Self> {
        Self::check_reference(&forward, &reference)?;
        let evolved_reference = forward.apply(&reference)?;
        Ok(Self {
            forward,
            reference,
            evolved_reference,
            fixed_point_residual: 0.0,
        })
    }

    /// Pin the evolved reference to the reference itself.
    ///
    /// For channels with an (approximate) fixed point gamma, bookkeeping
    /// with the exact gamma on both ends keeps every information-exchange
    /// value exact; the residual ||N(gamma) - gamma|| is recorded and must
    /// stay below `residual_tol`.
    pub fn with_fixed_point(
        forward: KrausChannel,
        reference: DensityOperator,
        residual_tol: f64,
    ) -> Result<Self> {
        Self::check_reference(&forward, &reference)?;
        let image = forward.apply(&reference)?;
        let residual = maxnorm_diff(image.matrix(), reference.matrix());
        if residual > residual_tol {
            return Err(Error::TruncationInsufficient {
                residual,
                tol: residual_tol,
            });
        }
        Ok(Self {
            forward,
            evolved_reference: reference.clone(),
            reference,
            fixed_point_residual: residual,
        })
    }

    /// Pair an explicitly known evolved reference (e.g. the exact Gibbs
    /// state of the final Hamiltonian for a thermodynamic channel).
    pub fn with_evolved_reference(
        forward: KrausChannel,
        reference: DensityOperator,
        evolved_reference: DensityOperator,
        residual_tol: f64,
    ) -> Result<Self> {
        Self::check_reference(&forward, &reference)?;
        let image = forward.apply(&reference)?;
        let residual = maxnorm_diff(image.matrix(), evolved_reference.matrix());
        if residual > residual_tol {
            return Err(Error::TruncationInsufficient {
                residual,
                tol: residual_tol,
            });
        }
        Ok(Self {
            forward,
            reference,
            evolved_reference,
            fixed_point_residual: residual,
        })
    }

    fn check_reference(forward: &KrausChannel, reference: &DensityOperator) -> Result<()> {
        if reference.dim() != forward.dim_in() {
            return Err(Error::DimensionMismatch {
                context: "recovery family reference",
                got: reference.dim(),
                expected: forward.dim_in(),
            });
        }
        if !reference.is_full_rank() {
            return Err(Error::RankDeficientReference {
                min_eigenvalue: reference.min_eigenvalue(),
            });
        }
        Ok(())
    }

    pub fn forward(&self) -> &KrausChannel {
        &self.forward
    }

    pub fn reference(&self) -> &DensityOperator {
        &self.reference
    }

    pub fn evolved_reference(&self) -> &DensityOperator {
        &self.evolved_reference
    }

    pub fn fixed_point_residual(&self) -> f64 {
        self.fixed_point_residual
    }

    /// Trace-preservation tolerance appropriate to this family: pinned
    /// references propagate their residual into the reverse Kraus sum.
    fn reverse_tp_tol(&self) -> f64 {
        // the residual enters scaled by the condition of gamma^{-1/2}
        let min = self.reference.min_eigenvalue().max(tol::RANK_TOL_REL);
        (tol::CPTP_TOL).max(10.0 * self.fixed_point_residual / min)
    }

    /// The Petz recovery map R_gamma, Kraus set
    /// gamma^{1/2} K_m† N(gamma)^{-1/2}.
    pub fn petz(&self) -> Result<KrausChannel> {
        self.rotated_petz(0.0)
    }

    /// The rotated Petz recovery map R_gamma^theta, Kraus set
    /// gamma^{1/2 + i theta} K_m† N(gamma)^{-1/2 - i theta}.
    pub fn rotated_petz(&self, theta: f64) -> Result<KrausChannel> {
        let g_pow = self.reference.pow(C64::new(0.5, theta));
        let ng_pow = self.evolved_reference.pow(C64::new(-0.5, -theta));
        let kraus: Vec<CMatrix> = self
            .forward
            .kraus()
            .iter()
            .map(|k| g_pow.dot(&dagger(k)).dot(&ng_pow))
            .collect();
        let tp_tol = self.reverse_tp_tol();
        if self.evolved_reference.is_full_rank() {
            KrausChannel::with_tp_tolerance(kraus, tp_tol)
        } else {
            // trace preserving only on the support of the evolved reference
            let proj = self.evolved_reference.support_projector();
            KrausChannel::with_tp_projector(kraus, &proj, tp_tol)
        }
    }

    /// Rotation-averaged recovery applied to a state:
    /// integral over theta of g0(theta) R^{theta/2}(rho), computed with a
    /// composite Simpson rule on [-cutoff, cutoff] and renormalized by the
    /// truncated weight of g0.
    pub fn averaged_recovery(
        &self,
        rho_in: &DensityOperator,
        theta_cutoff: f64,
        n_nodes: usize,
    ) -> Result<DensityOperator> {
        let (nodes, weights) = simpson_grid(theta_cutoff, n_nodes);
        let mut total_weight = 0.0;
        let mut acc: Option<CMatrix> = None;
        for (&theta, &w) in nodes.iter().zip(weights.iter()) {
            let gw = w * g0_weight(theta);
            total_weight += gw;
            let r = self.rotated_petz(theta / 2.0)?;
            let out = r.apply_matrix(rho_in.matrix());
            acc = Some(match acc {
                None => out.mapv(|z| z * gw),
                Some(a) => a + out.mapv(|z| z * gw),
            });
        }
        let m = acc.expect("grid is nonempty").mapv(|z| z / total_weight);
        DensityOperator::sanitize(m, tol::INTEGRATOR_EIG_FLOOR)
    }

    /// Average of f(theta) against g0 over the same quadrature grid used by
    /// [`averaged_recovery`]; used for averaged recovery fidelities.
    pub fn g0_average(
        &self,
        theta_cutoff: f64,
        n_nodes: usize,
        mut f: impl FnMut(f64) -> Result<f64>,
    ) -> Result<f64> {
        let (nodes, weights) = simpson_grid(theta_cutoff, n_nodes);
        let mut total_weight = 0.0;
        let mut acc = 0.0;
        for (&theta, &w) in nodes.iter().zip(weights.iter()) {
            let gw = w * g0_weight(theta);
            total_weight += gw;
            acc += gw * f(theta)?;
        }
        Ok(acc / total_weight)
    }

    /// Max-norm recovery defect ||R^theta(N(gamma)) - gamma||.
    pub fn recovery_defect(&self, theta: f64) -> Result<f64> {
        let r = self.rotated_petz(theta)?;
        let back = r.apply_matrix(self.evolved_reference.matrix());
        Ok(maxnorm_diff(&back, self.reference.matrix()))
    }

    /// The dual family: the forward channel of this family is the Petz
    /// recovery of its own Petz recovery, taken with reference N(gamma).
    pub fn dual(&self) -> Result<RecoveryFamily> {
        let petz = self.petz()?;
        RecoveryFamily::with_evolved_reference(
            petz,
            self.evolved_reference.clone(),
            self.reference.clone(),
            (10.0 * self.fixed_point_residual).max(1e-9),
        )
    }
}

/// Normalized weight g0(theta) = (pi/2) / (cosh(pi theta) + 1); integrates
/// to 1 over the real line and decays like exp(-pi |theta|).
pub fn g0_weight(theta: f64) -> f64 {
    std::f64::consts::FRAC_PI_2 / ((std::f64::consts::PI * theta).cosh() + 1.0)
}

/// Composite-Simpson nodes and weights on [-cutoff, cutoff]; `n_nodes` must
/// be odd and at least 3 (it is bumped up if even).
pub fn simpson_grid(cutoff: f64, n_nodes: usize) -> (Vec<f64>, Vec<f64>) {
    let n = if n_nodes % 2 == 0 { n_nodes + 1 } else { n_nodes.max(3) };
    let h = 2.0 * cutoff / (n - 1) as f64;
    let nodes: Vec<f64> = (0..n).map(|k| -cutoff + k as f64 * h).collect();
    let weights: Vec<f64> = (0..n)
        .map(|k| {
            let c = if k == 0 || k == n - 1 {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            c * h / 3.0
        })
        .collect();
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{expm_hermitian, identity};
    use crate::random::{random_channel, random_density, rng};
    use approx::assert_abs_diff_eq;

    #[test]
    fn g0_quadrature_integrates_to_one() {
        let (nodes, weights) = simpson_grid(tol::THETA_CUTOFF_DEFAULT, tol::THETA_NODES_DEFAULT);
        let total: f64 = nodes
            .iter()
            .zip(weights.iter())
            .map(|(&t, &w)| w * g0_weight(t))
            .sum();
        assert!((total - 1.0).abs() < 1e-9, "quadrature total {total}");
    }

    #[test]
    fn petz_of_identity_is_identity() {
        let mut r = rng(21);
        let gamma = random_density(3, &mut r);
        let fam = RecoveryFamily::new(KrausChannel::identity(3), gamma).unwrap();
        let petz = fam.petz().unwrap();
        assert!(maxnorm_diff(&petz.choi(), &KrausChannel::identity(3).choi()) < 1e-9);
    }

    #[test]
    fn petz_of_unitary_is_inverse_unitary() {
        let mut r = rng(22);
        let w = crate::random::random_complex_matrix(3, 3, &mut r);
        let h = (&w + &dagger(&w)).mapv(|z| z * 0.5);
        let u = expm_hermitian(&h, C64::new(0.0, -1.0)).unwrap();
        let gamma = random_density(3, &mut r);
        let fam =
            RecoveryFamily::new(KrausChannel::from_unitary(u.clone()).unwrap(), gamma).unwrap();
        let petz = fam.petz().unwrap();
        let inv = KrausChannel::from_unitary(dagger(&u)).unwrap();
        assert!(maxnorm_diff(&petz.choi(), &inv.choi()) < 1e-9);
    }

    #[test]
    fn every_rotation_recovers_the_reference() {
        let mut r = rng(23);
        let ch = random_channel(3, 3, 4, &mut r);
        let gamma = random_density(3, &mut r);
        let fam = RecoveryFamily::new(ch, gamma).unwrap();
        for theta in [0.0, 0.7, -2.3, 5.0] {
            assert!(fam.recovery_defect(theta).unwrap() < 1e-9);
        }
    }

    #[test]
    fn rejects_rank_deficient_reference() {
        let mut r = rng(24);
        let ch = random_channel(3, 3, 4, &mut r);
        let gamma = crate::random::random_rank_deficient_density(3, 2, &mut r);
        assert!(matches!(
            RecoveryFamily::new(ch, gamma),
            Err(Error::RankDeficientReference { .. })
        ));
    }

    #[test]
    fn duality_petz_of_petz_restores_forward() {
        let mut r = rng(25);
        let ch = random_channel(3, 3, 4, &mut r);
        let gamma = random_density(3, &mut r);
        let fam = RecoveryFamily::new(ch.clone(), gamma).unwrap();
        let dual = fam.dual().unwrap();
        let back = dual.petz().unwrap();
        assert!(maxnorm_diff(&back.choi(), &ch.choi()) < 1e-8);
    }

    #[test]
    fn averaged_recovery_restores_reference() {
        let mut r = rng(26);
        let ch = random_channel(2, 2, 3, &mut r);
        let gamma = random_density(2, &mut r);
        let fam = RecoveryFamily::new(ch, gamma.clone()).unwrap();
        let ng = fam.evolved_reference().clone();
        let rec = fam.averaged_recovery(&ng, 12.0, 121).unwrap();
        assert!(maxnorm_diff(rec.matrix(), gamma.matrix()) < 1e-8);
    }

    #[test]
    fn theta_zero_equals_plain_petz() {
        let mut r = rng(27);
        let ch = random_channel(3, 2, 3, &mut r);
        let gamma = random_density(3, &mut r);
        let fam = RecoveryFamily::new(ch, gamma).unwrap();
        let a = fam.petz().unwrap();
        let b = fam.rotated_petz(0.0).unwrap();
        assert_abs_diff_eq!(maxnorm_diff(&a.choi(), &b.choi()), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn reverse_channel_unital_on_support() {
        let mut r = rng(28);
        let ch = random_channel(3, 3, 4, &mut r);
        let gamma = random_density(3, &mut r);
        let fam = RecoveryFamily::new(ch, gamma).unwrap();
        let petz = fam.petz().unwrap();
        assert!(maxnorm(&(petz.completeness_sum() - identity(3))) < 1e-8);
    }
}
