//! Resource-theoretic applications of the channel fluctuation relations:
//! free-energy balance for energy-conserving channels, asymmetry loss under
//! covariant channels, coherence merging, entanglement/coherent-information
//! loss under LOCC, reversibility bounds, and the rotation-spectrum
//! diagnostic for broken symmetry.

use std::collections::BTreeMap;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::channel::{covariance_defect_generator, KrausChannel};
use crate::error::{Error, Result};
use crate::fluctuation::{ep_distribution, integral_qft, mean_entropy_production, transition_pure};
use crate::matrix::{
    fidelity, maxnorm, partial_trace, relative_entropy, CMatrix, CVector, DensityOperator,
};
use crate::models::ThermodynamicChannel;
use crate::petz::RecoveryFamily;
use crate::tol;

fn theta_key(theta: f64) -> String {
    format!("{theta:+.4}")
}

/// Common shape of every application report, serialized with fixed field
/// names.
#[derive(Debug, Clone, Serialize)]
pub struct ResourceReport {
    #[serde(rename = "mean_sigma_R")]
    pub mean_sigma_r: f64,
    #[serde(rename = "mean_sigma_I")]
    pub mean_sigma_i: f64,
    pub kappa_by_theta: BTreeMap<String, f64>,
    pub fidelity_by_theta: BTreeMap<String, f64>,
    pub averaged_fidelity: f64,
    pub bound_lhs: f64,
    pub bound_rhs: f64,
    pub satisfied: bool,
    /// application-specific scalars (delta_f, delta_c, delta_e_s, ...)
    pub extras: BTreeMap<String, f64>,
}

impl ResourceReport {
    fn check_fidelities(&self) -> Result<()> {
        for &f in self.fidelity_by_theta.values() {
            if !(0.0..=1.0 + 1e-9).contains(&f) {
                return Err(Error::Linalg(format!("fidelity {f} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// Integral-relation data over a theta grid: kappa from the recovery
/// channel and the atom-average lhs, which must agree.
fn kappa_grid(
    fam: &RecoveryFamily,
    rho: &DensityOperator,
    thetas: &[f64],
) -> Result<(BTreeMap<String, f64>, f64)> {
    let mut kappa = BTreeMap::new();
    let mut worst = 0.0f64;
    for &theta in thetas {
        let out = integral_qft(fam, rho, theta)?;
        worst = worst.max((out.lhs - C64::new(out.kappa, 0.0)).norm());
        kappa.insert(theta_key(theta), out.kappa);
    }
    Ok((kappa, worst))
}

fn recovery_fidelity(fam: &RecoveryFamily, rho: &DensityOperator, theta: f64) -> Result<f64> {
    let reverse = fam.rotated_petz(theta / 2.0)?;
    let n_rho = fam.forward().apply(rho)?;
    let recovered = DensityOperator::sanitize(
        reverse.apply_matrix(n_rho.matrix()),
        tol::INTEGRATOR_EIG_FLOOR,
    )?;
    fidelity(rho, &recovered)
}

/// Report of the balanced free-energy relation for an energy-conserving
/// channel: <e^{beta dF}> = e^{beta dF_eq}, dF = <dF> <= dF_eq, and the
/// recovery-fidelity bound F >= e^{beta (dF - dF_eq)}.
pub fn free_energy_ft(th: &ThermodynamicChannel, rho: &DensityOperator) -> Result<ResourceReport> {
    let fam = RecoveryFamily::with_evolved_reference(
        th.channel.clone(),
        th.gamma_s.clone(),
        th.gamma_s_prime.clone(),
        tol::FIXED_POINT_TOL,
    )?;
    let dist = ep_distribution(&fam, rho)?.pruned(1e-10);
    // imaginary entropy production vanishes for energy-conserving channels
    let max_sigma_i = dist
        .atoms()
        .iter()
        .map(|a| a.sigma_i.abs())
        .fold(0.0, f64::max);
    if max_sigma_i > 1e-6 {
        return Err(Error::NotCovariant {
            defect: max_sigma_i,
            theta: 0.0,
        });
    }
    let (mr, mi) = dist.mean_sigma();
    let beta = th.beta;
    let delta_f = -mr.re / beta + th.delta_f_eq;
    // balanced equality <e^{beta dF}> = e^{beta dF_eq}
    let balanced = dist.exp_average(0.0).re * (beta * th.delta_f_eq).exp();
    let thetas = [0.0, 1.0, -2.5];
    let (kappa, qft_defect) = kappa_grid(&fam, rho, &thetas)?;
    if qft_defect > 1e-7 {
        return Err(Error::Linalg(format!(
            "integral relation defect {qft_defect} exceeds 1e-7"
        )));
    }
    let f0 = recovery_fidelity(&fam, rho, 0.0)?;
    let bound_rhs = (beta * (delta_f - th.delta_f_eq)).exp();
    let mut fid = BTreeMap::new();
    fid.insert(theta_key(0.0), f0);
    let mut extras = BTreeMap::new();
    extras.insert("delta_f".into(), delta_f);
    extras.insert("delta_f_eq".into(), th.delta_f_eq);
    extras.insert("balanced_lhs".into(), balanced);
    extras.insert("balanced_rhs".into(), (beta * th.delta_f_eq).exp());
    let report = ResourceReport {
        mean_sigma_r: mr.re,
        mean_sigma_i: mi.re,
        kappa_by_theta: kappa,
        fidelity_by_theta: fid,
        averaged_fidelity: f0,
        bound_lhs: f0,
        bound_rhs,
        satisfied: f0 >= bound_rhs - 1e-9 && delta_f <= th.delta_f_eq + 1e-9,
        extras,
    };
    report.check_fidelities()?;
    Ok(report)
}

/// Block-dephasing of rho in the eigenbasis of a Hermitian generator;
/// eigenvalues within 1e-9 form one block.
pub fn dephase(rho: &DensityOperator, generator: &CMatrix) -> Result<DensityOperator> {
    let spec = crate::matrix::herm_eig(generator)?;
    let d = spec.dim();
    // group eigenvalues into degenerate blocks
    let mut block_of = vec![0usize; d];
    let mut n_blocks = 0usize;
    for k in 0..d {
        if k > 0 && (spec.eigenvalues[k] - spec.eigenvalues[k - 1]).abs() < 1e-9 {
            block_of[k] = n_blocks - 1;
        } else {
            block_of[k] = n_blocks;
            n_blocks += 1;
        }
    }
    let v = &spec.vectors;
    let in_basis = crate::matrix::dagger(v).dot(rho.matrix()).dot(v);
    let mut out: CMatrix = Array2::zeros((d, d));
    for a in 0..d {
        for b in 0..d {
            if block_of[a] == block_of[b] {
                out[(a, b)] = in_basis[(a, b)];
            }
        }
    }
    let back = v.dot(&out).dot(&crate::matrix::dagger(v));
    DensityOperator::sanitize(back, tol::EIG_CLAMP)
}

/// Relative entropy of asymmetry C(rho) = S(rho || D(rho)).
pub fn asymmetry_measure(rho: &DensityOperator, generator: &CMatrix) -> Result<f64> {
    let d = dephase(rho, generator)?;
    relative_entropy(rho, &d)
}

/// Asymmetry-loss fluctuation report for a channel covariant under the
/// group generated by L, with the dephased input as reference.
pub fn asymmetry_ft(
    ch: &KrausChannel,
    rho: &DensityOperator,
    generator: &CMatrix,
) -> Result<ResourceReport> {
    // covariance of the channel under e^{-iLt}
    for t in [0.37, 1.0, 2.21] {
        let defect = covariance_defect_generator(ch, generator, generator, t)?;
        if defect > 1e-7 {
            return Err(Error::NotCovariant { defect, theta: t });
        }
    }
    let d_rho = dephase(rho, generator)?;
    if !d_rho.is_full_rank() {
        return Err(Error::RankDeficientReference {
            min_eigenvalue: d_rho.min_eigenvalue(),
        });
    }
    let fam = RecoveryFamily::new(ch.clone(), d_rho.clone())?;
    let n_rho = ch.apply(rho)?;
    let c_in = asymmetry_measure(rho, generator)?;
    let c_out = asymmetry_measure(&n_rho, generator)?;
    let delta_c = c_out - c_in;
    let (mr, mi) = mean_entropy_production(&fam, rho)?;
    let thetas = [0.0, 1.0, -2.5];
    let (kappa, qft_defect) = kappa_grid(&fam, rho, &thetas)?;
    if qft_defect > 1e-7 {
        return Err(Error::Linalg(format!(
            "integral relation defect {qft_defect} exceeds 1e-7"
        )));
    }
    // averaged recovery bound F(rho, R~(N(rho))) >= e^{delta C}
    let averaged = fam.averaged_recovery(
        &n_rho,
        tol::THETA_CUTOFF_DEFAULT,
        tol::THETA_NODES_DEFAULT,
    )?;
    let f_avg = fidelity(rho, &averaged)?;
    let mut fid = BTreeMap::new();
    for &t in &thetas {
        fid.insert(theta_key(t), recovery_fidelity(&fam, rho, t)?);
    }
    let mut extras = BTreeMap::new();
    extras.insert("delta_c".into(), delta_c);
    extras.insert("c_initial".into(), c_in);
    extras.insert("c_final".into(), c_out);
    let report = ResourceReport {
        mean_sigma_r: mr,
        mean_sigma_i: mi,
        kappa_by_theta: kappa,
        fidelity_by_theta: fid,
        averaged_fidelity: f_avg,
        bound_lhs: f_avg,
        bound_rhs: delta_c.exp(),
        satisfied: f_avg >= delta_c.exp() - 1e-9 && (delta_c + mr).abs() < 1e-8,
        extras,
    };
    report.check_fidelities()?;
    Ok(report)
}

/// Coherence-merging bound for a covariant channel: the magnitude of an
/// output off-diagonal element against the mode-resolved sum of input
/// magnitudes weighted by the information exchange.
///
/// `levels` is the diagonal generator (the computational basis is its
/// eigenbasis) and `gamma` a reference state commuting with it.
pub fn coherence_merging_bound(
    ch: &KrausChannel,
    rho: &DensityOperator,
    gamma: &DensityOperator,
    levels: &[f64],
    k: usize,
    l: usize,
) -> Result<(f64, f64)> {
    let d = levels.len();
    // gamma must commute with the generator: diagonal in this basis
    let mut offdiag = 0.0f64;
    for a in 0..d {
        for b in 0..d {
            if a != b {
                offdiag = offdiag.max(gamma.matrix()[(a, b)].norm());
            }
        }
    }
    if offdiag > 1e-9 {
        return Err(Error::ReferenceNotCommuting { defect: offdiag });
    }
    let mut gen: CMatrix = Array2::zeros((d, d));
    for a in 0..d {
        gen[(a, a)] = C64::new(levels[a], 0.0);
    }
    for t in [0.73, 1.91] {
        let defect = covariance_defect_generator(ch, &gen, &gen, t)?;
        if defect > 1e-7 {
            return Err(Error::NotCovariant { defect, theta: t });
        }
    }
    let n_rho = ch.apply(rho)?;
    let n_gamma = ch.apply(gamma)?;
    let lhs = n_rho.matrix()[(k, l)].norm();
    let r_in: Vec<f64> = (0..d).map(|a| gamma.matrix()[(a, a)].re).collect();
    let r_out: Vec<f64> = (0..d).map(|a| n_gamma.matrix()[(a, a)].re).collect();
    let target = levels[k] - levels[l];
    let mut rhs = 0.0;
    for i in 0..d {
        for j in 0..d {
            if (levels[i] - levels[j] - target).abs() > 1e-9 {
                continue;
            }
            let dq_r = 0.5 * (r_in[i].ln() + r_in[j].ln()) - 0.5 * (r_out[k].ln() + r_out[l].ln());
            let amp = rho.matrix()[(i, j)].norm();
            rhs += if dq_r >= 0.0 { amp * (-dq_r).exp() } else { amp };
        }
    }
    Ok((lhs, rhs))
}

/// Entanglement-loss report for a one-way LOCC channel acting on a pure
/// bipartite state (A ⊗ B, dims d_a x d_b), with the memory register
/// appended by the channel.
pub fn locc_entanglement_ft(
    locc: &KrausChannel,
    rho_ab: &DensityOperator,
    d_a: usize,
    d_b: usize,
) -> Result<ResourceReport> {
    let largest = rho_ab.eigenvalues()[0];
    if largest < 1.0 - 1e-9 {
        return Err(Error::NotPure { largest });
    }
    locc_report(locc, rho_ab, d_a, d_b, true)
}

/// Coherent-information version for a general (possibly mixed) bipartite
/// state: Delta I(A>B) = -<sigma_R> <= 0.
pub fn locc_coherent_info_ft(
    locc: &KrausChannel,
    rho_ab: &DensityOperator,
    d_a: usize,
    d_b: usize,
) -> Result<ResourceReport> {
    locc_report(locc, rho_ab, d_a, d_b, false)
}

fn locc_report(
    locc: &KrausChannel,
    rho_ab: &DensityOperator,
    d_a: usize,
    d_b: usize,
    pure: bool,
) -> Result<ResourceReport> {
    if locc.dim_in() != d_a * d_b {
        return Err(Error::DimensionMismatch {
            context: "locc input",
            got: locc.dim_in(),
            expected: d_a * d_b,
        });
    }
    let m_dim = locc.dim_out() / (d_a * d_b);
    let rho_b = DensityOperator::sanitize(
        partial_trace(rho_ab.matrix(), &[d_a, d_b], &[1])?,
        tol::EIG_CLAMP,
    )?;
    if !rho_b.is_full_rank() {
        return Err(Error::RankDeficientReference {
            min_eigenvalue: rho_b.min_eigenvalue(),
        });
    }
    // normalized reference (I_A ⊗ rho_B) / d_A; the normalization offset
    // cancels inside every information-exchange difference
    let reference = DensityOperator::sanitize(
        crate::matrix::tensor(
            &crate::matrix::identity(d_a).mapv(|z| z / d_a as f64),
            rho_b.matrix(),
        ),
        tol::EIG_CLAMP,
    )?;
    let fam = RecoveryFamily::new(locc.clone(), reference)?;

    // outcome decomposition of the output state via the memory register
    let out = fam.forward().apply(rho_ab)?;
    let mut delta_resource = 0.0;
    let initial_measure = if pure {
        rho_b.von_neumann_entropy()
    } else {
        rho_b.von_neumann_entropy() - rho_ab.von_neumann_entropy()
    };
    for m in 0..m_dim {
        // block (a b m), (a' b' m): extract the AB operator for outcome m
        let mut blk: CMatrix = Array2::zeros((d_a * d_b, d_a * d_b));
        for ab in 0..d_a * d_b {
            for ab2 in 0..d_a * d_b {
                blk[(ab, ab2)] = out.matrix()[(ab * m_dim + m, ab2 * m_dim + m)];
            }
        }
        let p_m: f64 = blk.diag().iter().map(|z| z.re).sum();
        if p_m < 1e-12 {
            continue;
        }
        let state_m = DensityOperator::sanitize(blk.mapv(|z| z / p_m), 1e-8)?;
        let b_m = DensityOperator::sanitize(
            partial_trace(state_m.matrix(), &[d_a, d_b], &[1])?,
            1e-8,
        )?;
        let measure_m = if pure {
            b_m.von_neumann_entropy()
        } else {
            b_m.von_neumann_entropy() - state_m.von_neumann_entropy()
        };
        delta_resource += p_m * measure_m;
    }
    delta_resource -= initial_measure;

    let (mr, mi) = mean_entropy_production(&fam, rho_ab)?;
    let thetas = [0.0, 1.0, -2.5];
    let (kappa, qft_defect) = kappa_grid(&fam, rho_ab, &thetas)?;
    if qft_defect > 1e-7 {
        return Err(Error::Linalg(format!(
            "integral relation defect {qft_defect} exceeds 1e-7"
        )));
    }
    let mut fid = BTreeMap::new();
    for &t in &thetas {
        fid.insert(theta_key(t), recovery_fidelity(&fam, rho_ab, t)?);
    }
    // averaged recovery fidelity F~ = integral of g0(theta) F_theta
    let f_bar = fam.g0_average(tol::THETA_CUTOFF_DEFAULT, tol::THETA_NODES_DEFAULT, |t| {
        recovery_fidelity(&fam, rho_ab, t)
    })?;
    let mut extras = BTreeMap::new();
    extras.insert(
        if pure { "delta_e_s" } else { "delta_coherent_info" }.into(),
        delta_resource,
    );
    extras.insert("initial_measure".into(), initial_measure);
    let bound_rhs = f_bar.ln();
    let report = ResourceReport {
        mean_sigma_r: mr,
        mean_sigma_i: mi,
        kappa_by_theta: kappa,
        fidelity_by_theta: fid,
        averaged_fidelity: f_bar,
        bound_lhs: delta_resource,
        bound_rhs,
        satisfied: delta_resource <= bound_rhs + 1e-9
            && delta_resource <= 1e-9
            && (delta_resource + mr).abs() < 1e-8,
        extras,
    };
    report.check_fidelities()?;
    Ok(report)
}

/// Reversibility report: mean entropy production against the averaged
/// recovery fidelity, with the zero-production case implying perfect
/// recovery at every rotation.
pub fn reversibility_check(
    fam: &RecoveryFamily,
    rho: &DensityOperator,
    theta_grid: &[f64],
) -> Result<ResourceReport> {
    let (mr, mi) = mean_entropy_production(fam, rho)?;
    let mut fid = BTreeMap::new();
    let mut min_f = f64::INFINITY;
    for &t in theta_grid {
        let f = recovery_fidelity(fam, rho, t)?;
        min_f = min_f.min(f);
        fid.insert(theta_key(t), f);
    }
    let n_rho = fam.forward().apply(rho)?;
    let averaged = fam.averaged_recovery(
        &n_rho,
        tol::THETA_CUTOFF_DEFAULT,
        tol::THETA_NODES_DEFAULT,
    )?;
    let f_avg = fidelity(rho, &averaged)?;
    let bound_rhs = -f_avg.ln();
    let mut satisfied = mr >= bound_rhs - 1e-8;
    if mr < 1e-10 {
        satisfied = satisfied && min_f > 1.0 - 1e-7;
    }
    let (kappa, _) = kappa_grid(fam, rho, &[0.0])?;
    let report = ResourceReport {
        mean_sigma_r: mr,
        mean_sigma_i: mi,
        kappa_by_theta: kappa,
        fidelity_by_theta: fid,
        averaged_fidelity: f_avg,
        bound_lhs: mr,
        bound_rhs,
        satisfied,
        extras: BTreeMap::new(),
    };
    report.check_fidelities()?;
    Ok(report)
}

/// Rotation-spectrum diagnostic: the transition probability between
/// reference-rotated vectors as a function of the rotation angle, and its
/// discrete Fourier transform. Spectral peaks sit at the imaginary
/// entropy-production values the channel can produce.
#[derive(Debug, Clone, Serialize)]
pub struct SymmetrySpectrum {
    pub thetas: Vec<f64>,
    pub transition: Vec<f64>,
    pub frequencies: Vec<f64>,
    pub amplitudes: Vec<f64>,
    /// frequencies whose normalized amplitude exceeds the peak threshold
    pub peaks: Vec<f64>,
}

/// Sample T(U(theta/2) psi -> V(theta/2) phi) with U(theta) = gamma^{i theta},
/// V(theta) = N(gamma)^{i theta} on a uniform grid of length `n_grid`
/// (a power of two) spanning [0, span), then Fourier transform.
pub fn symmetry_diagnostic(
    fam: &RecoveryFamily,
    psi: &CVector,
    phi: &CVector,
    n_grid: usize,
    span: f64,
) -> Result<SymmetrySpectrum> {
    assert!(n_grid.is_power_of_two(), "grid length must be a power of two");
    let step = span / n_grid as f64;
    let mut thetas = Vec::with_capacity(n_grid);
    let mut transition = Vec::with_capacity(n_grid);
    for n in 0..n_grid {
        let theta = n as f64 * step;
        let u = fam.reference().pow(C64::new(0.0, theta / 2.0));
        let v = fam.evolved_reference().pow(C64::new(0.0, theta / 2.0));
        let pu = u.dot(psi);
        let pv = v.dot(phi);
        transition.push(transition_pure(fam.forward(), &pu, &pv)?);
        thetas.push(theta);
    }
    // discrete Fourier transform (n_grid is small; direct evaluation)
    let mut frequencies = Vec::with_capacity(n_grid);
    let mut amplitudes = Vec::with_capacity(n_grid);
    let mut max_amp = 0.0f64;
    let mut spectrum = Vec::with_capacity(n_grid);
    for k in 0..n_grid {
        let mut acc = C64::new(0.0, 0.0);
        for (n, &f) in transition.iter().enumerate() {
            let phase = -2.0 * std::f64::consts::PI * (k * n) as f64 / n_grid as f64;
            acc += C64::new(0.0, phase).exp() * f;
        }
        let amp = acc.norm() / n_grid as f64;
        let k_signed = if k <= n_grid / 2 {
            k as isize
        } else {
            k as isize - n_grid as isize
        };
        let freq = 2.0 * std::f64::consts::PI * k_signed as f64 / span;
        spectrum.push((freq, amp));
        max_amp = max_amp.max(amp);
    }
    spectrum.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut peaks = Vec::new();
    for &(freq, amp) in &spectrum {
        frequencies.push(freq);
        amplitudes.push(if max_amp > 0.0 { amp / max_amp } else { 0.0 });
        if max_amp > 0.0 && amp / max_amp > 1e-6 {
            peaks.push(freq);
        }
    }
    Ok(SymmetrySpectrum {
        thetas,
        transition,
        frequencies,
        amplitudes,
        peaks,
    })
}

/// Check that every spectral peak matches an imaginary entropy-production
/// value (up to sign and grid resolution) and vice versa.
pub fn peaks_match_sigma_i(
    spectrum: &SymmetrySpectrum,
    sigma_i_values: &[f64],
    resolution: f64,
) -> bool {
    let matches_atom = |freq: f64| {
        sigma_i_values
            .iter()
            .any(|&s| (freq.abs() - s.abs()).abs() <= resolution)
    };
    let matches_peak = |s: f64| {
        spectrum
            .peaks
            .iter()
            .any(|&p| (p.abs() - s.abs()).abs() <= resolution)
    };
    spectrum.peaks.iter().all(|&p| matches_atom(p))
        && sigma_i_values.iter().all(|&s| matches_peak(s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::identity;
    use crate::models::{atom_hamiltonian, locc_channel, swap_gate, thermodynamic_channel};
    use crate::random::{
        random_covariant_channel, random_density, random_diagonal_density, rng,
    };
    use approx::assert_abs_diff_eq;

    #[test]
    fn dephase_blocks_and_measure() {
        let mut r = rng(81);
        let rho = random_density(3, &mut r);
        let gen = {
            let mut m: CMatrix = Array2::zeros((3, 3));
            m[(0, 0)] = C64::new(0.0, 0.0);
            m[(1, 1)] = C64::new(1.0, 0.0);
            m[(2, 2)] = C64::new(2.0, 0.0);
            m
        };
        let d = dephase(&rho, &gen).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                if a != b {
                    assert!(d.matrix()[(a, b)].norm() < 1e-12);
                }
            }
        }
        let c = asymmetry_measure(&rho, &gen).unwrap();
        assert!(c > 0.0);
        let c_diag = asymmetry_measure(&d, &gen).unwrap();
        assert!(c_diag.abs() < 1e-10);
    }

    #[test]
    fn free_energy_reference_state_is_balanced() {
        // rho = gamma_S: dF = dF_eq exactly, fidelity 1
        let beta = 0.8;
        let h = atom_hamiltonian(1.3);
        let gamma_b = DensityOperator::gibbs(&h, beta).unwrap();
        let th = thermodynamic_channel(&swap_gate(), &gamma_b, &h, &h, &h, &h, beta).unwrap();
        let report = free_energy_ft(&th, &th.gamma_s.clone()).unwrap();
        assert!(report.satisfied);
        assert_abs_diff_eq!(report.extras["delta_f"], th.delta_f_eq, epsilon = 1e-9);
        assert_abs_diff_eq!(report.mean_sigma_r, 0.0, epsilon = 1e-9);
        assert!(report.averaged_fidelity > 1.0 - 1e-8);
    }

    #[test]
    fn asymmetry_incoherent_state_has_no_loss() {
        let mut r = rng(82);
        let levels = [0.0, 1.0];
        let ch = random_covariant_channel(&levels, &mut r);
        let rho = random_diagonal_density(2, &mut r);
        let gen = {
            let mut m: CMatrix = Array2::zeros((2, 2));
            m[(1, 1)] = C64::new(1.0, 0.0);
            m
        };
        let report = asymmetry_ft(&ch, &rho, &gen).unwrap();
        assert_abs_diff_eq!(report.extras["delta_c"], 0.0, epsilon = 1e-9);
        assert!(report.satisfied);
        assert!(report.averaged_fidelity > 1.0 - 1e-7);
    }

    #[test]
    fn asymmetry_unitary_group_action_preserves_measure() {
        // channel = e^{-iLt} conjugation: a symmetry transformation
        let gen = {
            let mut m: CMatrix = Array2::zeros((2, 2));
            m[(1, 1)] = C64::new(1.0, 0.0);
            m
        };
        let u = crate::matrix::expm_hermitian(&gen, C64::new(0.0, -0.9)).unwrap();
        let ch = KrausChannel::from_unitary(u).unwrap();
        let mut r = rng(83);
        let rho = random_density(2, &mut r);
        let report = asymmetry_ft(&ch, &rho, &gen).unwrap();
        assert_abs_diff_eq!(report.extras["delta_c"], 0.0, epsilon = 1e-9);
        assert!(report.averaged_fidelity > 1.0 - 1e-7);
    }

    #[test]
    fn merging_bound_trivial_cases() {
        let mut r = rng(84);
        // identity channel with maximally mixed reference: rhs = |rho_kl|
        let ch = KrausChannel::identity(2);
        let rho = random_density(2, &mut r);
        let gamma = DensityOperator::maximally_mixed(2);
        let (lhs, rhs) = coherence_merging_bound(&ch, &rho, &gamma, &[0.0, 1.0], 0, 1).unwrap();
        assert_abs_diff_eq!(lhs, rho.matrix()[(0, 1)].norm(), epsilon = 1e-12);
        assert_abs_diff_eq!(rhs, rho.matrix()[(0, 1)].norm(), epsilon = 1e-12);
        // diagonal rho: both sides vanish
        let diag = random_diagonal_density(2, &mut r);
        let (lhs2, rhs2) = coherence_merging_bound(&ch, &diag, &gamma, &[0.0, 1.0], 0, 1).unwrap();
        assert!(lhs2 < 1e-12);
        assert!(rhs2 < 1e-12);
    }

    #[test]
    fn merging_bound_random_covariant_sweep() {
        let mut r = rng(85);
        for _ in 0..50 {
            let levels = [0.0, 1.0, 2.0];
            let ch = random_covariant_channel(&levels, &mut r);
            let rho = random_density(3, &mut r);
            let gamma = random_diagonal_density(3, &mut r);
            for k in 0..3 {
                for l in 0..3 {
                    if k == l {
                        continue;
                    }
                    let (lhs, rhs) =
                        coherence_merging_bound(&ch, &rho, &gamma, &levels, k, l).unwrap();
                    assert!(lhs <= rhs + 1e-9, "merging bound violated: {lhs} > {rhs}");
                }
            }
        }
    }

    #[test]
    fn locc_local_unitaries_do_not_change_entanglement() {
        let u = crate::matrix::expm_hermitian(&atom_hamiltonian(1.0), C64::new(0.0, -0.4)).unwrap();
        let ch = locc_channel(&[u], &[identity(2)]).unwrap();
        // maximally entangled input
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut psi: CVector = ndarray::Array1::zeros(4);
        psi[0] = C64::new(s, 0.0);
        psi[3] = C64::new(s, 0.0);
        let rho = DensityOperator::from_pure(&psi);
        let report = locc_entanglement_ft(&ch, &rho, 2, 2).unwrap();
        assert_abs_diff_eq!(report.extras["delta_e_s"], 0.0, epsilon = 1e-9);
        assert!(report.averaged_fidelity > 1.0 - 1e-7);
        assert!(report.satisfied);
    }

    #[test]
    fn bell_pair_projective_measurement_loses_log2() {
        let mut k0: CMatrix = Array2::zeros((2, 2));
        k0[(0, 0)] = C64::new(1.0, 0.0);
        let mut k1: CMatrix = Array2::zeros((2, 2));
        k1[(1, 1)] = C64::new(1.0, 0.0);
        let ch = locc_channel(&[identity(2), identity(2)], &[k0, k1]).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut psi: CVector = ndarray::Array1::zeros(4);
        psi[0] = C64::new(s, 0.0);
        psi[3] = C64::new(s, 0.0);
        let rho = DensityOperator::from_pure(&psi);
        let report = locc_entanglement_ft(&ch, &rho, 2, 2).unwrap();
        assert_abs_diff_eq!(report.extras["delta_e_s"], -(2.0f64.ln()), epsilon = 1e-9);
        assert_abs_diff_eq!(report.mean_sigma_r, 2.0f64.ln(), epsilon = 1e-8);
        assert!(report.satisfied);
        // kappa equals the recovery fidelity for a pure input
        let k0v = report.kappa_by_theta[&theta_key(0.0)];
        let f0 = report.fidelity_by_theta[&theta_key(0.0)];
        assert_abs_diff_eq!(k0v, f0, epsilon = 1e-9);
        assert_abs_diff_eq!(f0, 0.5, epsilon = 1e-9);
    }

    #[test]
    fn locc_mixed_state_coherent_information_monotone() {
        let mut r = rng(86);
        let mut k0: CMatrix = Array2::zeros((2, 2));
        k0[(0, 0)] = C64::new(1.0, 0.0);
        let mut k1: CMatrix = Array2::zeros((2, 2));
        k1[(1, 1)] = C64::new(1.0, 0.0);
        let ch = locc_channel(&[identity(2), identity(2)], &[k0, k1]).unwrap();
        let rho = random_density(4, &mut r);
        let report = locc_coherent_info_ft(&ch, &rho, 2, 2).unwrap();
        assert!(report.extras["delta_coherent_info"] <= 1e-9);
        assert!((report.extras["delta_coherent_info"] + report.mean_sigma_r).abs() < 1e-8);
    }

    #[test]
    fn reversibility_reference_and_unitary() {
        let mut r = rng(87);
        let gamma = random_density(2, &mut r);
        let ch = crate::random::random_channel(2, 2, 3, &mut r);
        let fam = RecoveryFamily::new(ch, gamma.clone()).unwrap();
        let grid = [-2.0, 0.0, 1.5];
        let report = reversibility_check(&fam, &gamma, &grid).unwrap();
        assert!(report.mean_sigma_r.abs() < 1e-9);
        for f in report.fidelity_by_theta.values() {
            assert!(*f > 1.0 - 1e-7);
        }
        assert!(report.satisfied);
    }

    #[test]
    fn reversibility_strict_for_lossy_channel() {
        let mut r = rng(88);
        let ch = crate::random::random_channel(3, 3, 4, &mut r);
        let gamma = random_density(3, &mut r);
        let rho = crate::random::random_rank_deficient_density(3, 1, &mut r);
        let fam = RecoveryFamily::new(ch, gamma).unwrap();
        let report = reversibility_check(&fam, &rho, &[0.0]).unwrap();
        assert!(report.mean_sigma_r > 1e-3);
        assert!(report.satisfied, "entropy bound should hold");
        assert!(report.bound_rhs <= report.mean_sigma_r + 1e-8);
    }

    #[test]
    fn symmetry_spectrum_flat_for_identity_on_reference_eigenvectors() {
        let mut r = rng(89);
        let gamma = random_density(2, &mut r);
        let fam = RecoveryFamily::new(KrausChannel::identity(2), gamma.clone()).unwrap();
        let psi = gamma.spectral().vector(0);
        let spec = symmetry_diagnostic(&fam, &psi, &psi, 64, 8.0).unwrap();
        // flat transition: single zero-frequency peak
        assert_eq!(spec.peaks.len(), 1);
        assert!(spec.peaks[0].abs() < 1e-12);
    }
}
