//! The statistical core: two-point-measurement quasi-probabilities,
//! information exchange, complex entropy production, forward/backward
//! distributions, and the fluctuation-theorem checks built on them.
//!
//! A transition table is indexed by (mu; i, j; nu'; k', l'): mu and nu'
//! label eigenvectors of the initial and final states, i, j label reference
//! eigenvectors on the input side and k', l' on the output side. The table
//! entry is
//!
//!     P^{mu,nu'}_{ij,k'l'} = w_mu <phi'_nu| Pi_k' N(Pi_i |psi_mu><psi_mu| Pi_j) Pi_l' |phi'_nu>
//!
//! whose marginals reproduce the physical initial/final statistics while the
//! off-diagonal blocks carry the channel's coherence transfer (and may be
//! negative or complex).

use num_complex::Complex64 as C64;

use crate::channel::KrausChannel;
use crate::error::{Error, Result};
use crate::matrix::{dagger, outer, sandwich, CMatrix, CVector, DensityOperator};
use crate::petz::RecoveryFamily;
use crate::tol;

/// Support eigensystem of a positive operator: eigenvalues (descending,
/// above the support cut) with matching eigenvector columns.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub values: Vec<f64>,
    /// dim x len(values); column a is the eigenvector of values[a]
    pub vectors: CMatrix,
}

impl Eigensystem {
    pub fn from_state(rho: &DensityOperator) -> Self {
        let spec = rho.spectral();
        let cut = spec.support_cut();
        let idx: Vec<usize> = (0..spec.dim())
            .filter(|&k| spec.eigenvalues[k] > cut)
            .collect();
        let values: Vec<f64> = idx.iter().map(|&k| spec.eigenvalues[k]).collect();
        let mut vectors = CMatrix::zeros((spec.dim(), idx.len()));
        for (c, &k) in idx.iter().enumerate() {
            vectors.column_mut(c).assign(&spec.vectors.column(k));
        }
        Self { values, vectors }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn vector(&self, k: usize) -> CVector {
        self.vectors.column(k).to_owned()
    }

    /// Reconstruction defect of sum_k values[k] |v_k><v_k| against `op`.
    pub fn reconstruction_defect(&self, op: &CMatrix) -> f64 {
        let mut m = CMatrix::zeros((self.dim(), self.dim()));
        for (k, &w) in self.values.iter().enumerate() {
            let v = self.vectors.column(k);
            for i in 0..self.dim() {
                for j in 0..self.dim() {
                    m[(i, j)] += v[i] * v[j].conj() * w;
                }
            }
        }
        crate::matrix::maxnorm_diff(&m, op)
    }
}

/// The four eigensystems that anchor a forward/backward transition table:
/// initial state rho, final state N(rho), reference gamma, and evolved
/// reference N(gamma).
#[derive(Debug, Clone)]
pub struct TransitionBasis {
    pub initial: Eigensystem,
    pub final_: Eigensystem,
    pub ref_in: Eigensystem,
    pub ref_out: Eigensystem,
}

impl TransitionBasis {
    pub fn new(fam: &RecoveryFamily, rho: &DensityOperator) -> Result<Self> {
        if rho.dim() != fam.forward().dim_in() {
            return Err(Error::DimensionMismatch {
                context: "transition basis state",
                got: rho.dim(),
                expected: fam.forward().dim_in(),
            });
        }
        let n_rho = fam.forward().apply(rho)?;
        Ok(Self {
            initial: Eigensystem::from_state(rho),
            final_: Eigensystem::from_state(&n_rho),
            ref_in: Eigensystem::from_state(fam.reference()),
            ref_out: Eigensystem::from_state(fam.evolved_reference()),
        })
    }

    /// Forward table for the family's channel.
    pub fn forward_table(&self, fam: &RecoveryFamily) -> TpmQuasiProb {
        quasi_table(
            fam.forward(),
            &self.initial,
            &self.final_,
            &self.ref_in,
            &self.ref_out,
        )
    }

    /// Backward table: the rotated recovery channel applied to N(rho), with
    /// every role reversed. Its entropy-production atoms land at -sigma*.
    pub fn backward_table(&self, fam: &RecoveryFamily, theta: f64) -> Result<TpmQuasiProb> {
        let reverse = fam.rotated_petz(theta)?;
        Ok(quasi_table(
            &reverse,
            &self.final_,
            &self.initial,
            &self.ref_out,
            &self.ref_in,
        ))
    }
}

/// Complex-valued two-point transition table plus the eigenvalue data needed
/// to turn entries into entropy-production values.
#[derive(Debug, Clone)]
pub struct TpmQuasiProb {
    /// index layout [mu][i][j][nu][k][l], row-major
    entries: Vec<C64>,
    n_init: usize,
    n_ref_in: usize,
    n_final: usize,
    n_ref_out: usize,
    w_init: Vec<f64>,
    w_final: Vec<f64>,
    r_in: Vec<f64>,
    r_out: Vec<f64>,
    /// <u_a| rho |u_a> targets for the reference-side marginal checks
    diag_init: Vec<f64>,
    diag_final: Vec<f64>,
}

/// Build the transition table of `channel` between the given eigensystems.
fn quasi_table(
    channel: &KrausChannel,
    init: &Eigensystem,
    fin: &Eigensystem,
    ref_in: &Eigensystem,
    ref_out: &Eigensystem,
) -> TpmQuasiProb {
    let n_mu = init.len();
    let n_i = ref_in.len();
    let n_nu = fin.len();
    let n_k = ref_out.len();

    // overlaps A[a, mu] = <u_a|psi_mu>, B[b, nu] = <v_b|phi_nu>
    let a_ov = dagger(&ref_in.vectors).dot(&init.vectors);
    let b_ov = dagger(&ref_out.vectors).dot(&fin.vectors);

    // transition tensor T[i,j,k,l] = sum_m <v_k|K_m|u_i> conj(<v_l|K_m|u_j>)
    let mut t = vec![C64::new(0.0, 0.0); n_i * n_i * n_k * n_k];
    let t_idx = |i: usize, j: usize, k: usize, l: usize| ((i * n_i + j) * n_k + k) * n_k + l;
    for kop in channel.kraus() {
        let khat = dagger(&ref_out.vectors).dot(kop).dot(&ref_in.vectors);
        for i in 0..n_i {
            for j in 0..n_i {
                for k in 0..n_k {
                    for l in 0..n_k {
                        t[t_idx(i, j, k, l)] += khat[(k, i)] * khat[(l, j)].conj();
                    }
                }
            }
        }
    }

    let mut entries = vec![C64::new(0.0, 0.0); n_mu * n_i * n_i * n_nu * n_k * n_k];
    let p_idx = |mu: usize, i: usize, j: usize, nu: usize, k: usize, l: usize| {
        ((((mu * n_i + i) * n_i + j) * n_nu + nu) * n_k + k) * n_k + l
    };
    for mu in 0..n_mu {
        let w = init.values[mu];
        for i in 0..n_i {
            let ai = a_ov[(i, mu)];
            if ai.norm_sqr() == 0.0 {
                continue;
            }
            for j in 0..n_i {
                let aj = a_ov[(j, mu)].conj();
                let front = ai * aj * w;
                if front.norm_sqr() == 0.0 {
                    continue;
                }
                for nu in 0..n_nu {
                    for k in 0..n_k {
                        let bk = b_ov[(k, nu)].conj();
                        for l in 0..n_k {
                            let bl = b_ov[(l, nu)];
                            entries[p_idx(mu, i, j, nu, k, l)] =
                                front * bk * bl * t[t_idx(i, j, k, l)];
                        }
                    }
                }
            }
        }
    }

    let diag_init = (0..n_i)
        .map(|a| {
            (0..n_mu)
                .map(|mu| init.values[mu] * a_ov[(a, mu)].norm_sqr())
                .sum()
        })
        .collect();
    let diag_final = (0..n_k)
        .map(|b| {
            (0..n_nu)
                .map(|nu| fin.values[nu] * b_ov[(b, nu)].norm_sqr())
                .sum()
        })
        .collect();

    TpmQuasiProb {
        entries,
        n_init: n_mu,
        n_ref_in: n_i,
        n_final: n_nu,
        n_ref_out: n_k,
        w_init: init.values.clone(),
        w_final: fin.values.clone(),
        r_in: ref_in.values.clone(),
        r_out: ref_out.values.clone(),
        diag_init,
        diag_final,
    }
}

impl TpmQuasiProb {
    #[inline]
    fn idx(&self, mu: usize, i: usize, j: usize, nu: usize, k: usize, l: usize) -> usize {
        ((((mu * self.n_ref_in + i) * self.n_ref_in + j) * self.n_final + nu) * self.n_ref_out + k)
            * self.n_ref_out
            + l
    }

    pub fn value(&self, mu: usize, i: usize, j: usize, nu: usize, k: usize, l: usize) -> C64 {
        self.entries[self.idx(mu, i, j, nu, k, l)]
    }

    pub fn dims(&self) -> (usize, usize, usize, usize) {
        (self.n_init, self.n_ref_in, self.n_final, self.n_ref_out)
    }

    pub fn total(&self) -> C64 {
        self.entries.iter().sum()
    }

    /// max |P_{ij,kl} - conj(P_{ji,lk})|
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for mu in 0..self.n_init {
            for i in 0..self.n_ref_in {
                for j in 0..self.n_ref_in {
                    for nu in 0..self.n_final {
                        for k in 0..self.n_ref_out {
                            for l in 0..self.n_ref_out {
                                let a = self.value(mu, i, j, nu, k, l);
                                let b = self.value(mu, j, i, nu, l, k).conj();
                                worst = worst.max((a - b).norm());
                            }
                        }
                    }
                }
            }
        }
        worst
    }

    /// Worst deviation over the four marginal families: initial weights,
    /// final weights, and the reference-basis diagonals of both states.
    pub fn marginality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        // sum over everything but mu -> w_init[mu]
        for mu in 0..self.n_init {
            let mut s = C64::new(0.0, 0.0);
            for i in 0..self.n_ref_in {
                for j in 0..self.n_ref_in {
                    for nu in 0..self.n_final {
                        for k in 0..self.n_ref_out {
                            for l in 0..self.n_ref_out {
                                s += self.value(mu, i, j, nu, k, l);
                            }
                        }
                    }
                }
            }
            worst = worst.max((s - self.w_init[mu]).norm());
        }
        // sum over everything but nu -> w_final[nu]
        for nu in 0..self.n_final {
            let mut s = C64::new(0.0, 0.0);
            for mu in 0..self.n_init {
                for i in 0..self.n_ref_in {
                    for j in 0..self.n_ref_in {
                        for k in 0..self.n_ref_out {
                            for l in 0..self.n_ref_out {
                                s += self.value(mu, i, j, nu, k, l);
                            }
                        }
                    }
                }
            }
            worst = worst.max((s - self.w_final[nu]).norm());
        }
        // diagonal i = j, summed over the rest -> <u_i|rho|u_i>
        for i in 0..self.n_ref_in {
            let mut s = C64::new(0.0, 0.0);
            for mu in 0..self.n_init {
                for nu in 0..self.n_final {
                    for k in 0..self.n_ref_out {
                        for l in 0..self.n_ref_out {
                            s += self.value(mu, i, i, nu, k, l);
                        }
                    }
                }
            }
            worst = worst.max((s - self.diag_init[i]).norm());
        }
        // diagonal k = l -> <v_k|N(rho)|v_k>
        for k in 0..self.n_ref_out {
            let mut s = C64::new(0.0, 0.0);
            for mu in 0..self.n_init {
                for i in 0..self.n_ref_in {
                    for j in 0..self.n_ref_in {
                        for nu in 0..self.n_final {
                            s += self.value(mu, i, j, nu, k, k);
                        }
                    }
                }
            }
            worst = worst.max((s - self.diag_final[k]).norm());
        }
        worst
    }

    /// Complex entropy production of one transition:
    /// sigma = delta_s - (delta_q_R + i delta_q_I).
    pub fn sigma(&self, mu: usize, i: usize, j: usize, nu: usize, k: usize, l: usize) -> C64 {
        let ds = self.w_init[mu].ln() - self.w_final[nu].ln();
        let dq = info_exchange_values(&self.r_in, &self.r_out, i, j, k, l);
        C64::new(ds - dq.re, -dq.im)
    }
}

/// Complex information exchange for a transition |i><j| -> |k'><l'| with the
/// given reference spectra: real part -(1/2)ln(r'_k r'_l) + (1/2)ln(r_i r_j),
/// imaginary part -(1/2)ln(r'_k/r'_l) + (1/2)ln(r_i/r_j).
pub fn info_exchange_values(r_in: &[f64], r_out: &[f64], i: usize, j: usize, k: usize, l: usize) -> C64 {
    let (ri, rj) = (r_in[i].ln(), r_in[j].ln());
    let (rk, rl) = (r_out[k].ln(), r_out[l].ln());
    C64::new(
        0.5 * (ri + rj) - 0.5 * (rk + rl),
        0.5 * (ri - rj) - 0.5 * (rk - rl),
    )
}

/// Information exchange in a [`TransitionBasis`], with support checks.
pub fn info_exchange(basis: &TransitionBasis, i: usize, j: usize, k: usize, l: usize) -> Result<C64> {
    let n_i = basis.ref_in.len();
    let n_k = basis.ref_out.len();
    if i >= n_i || j >= n_i {
        return Err(Error::SupportViolation { defect: 1.0 });
    }
    if k >= n_k || l >= n_k {
        return Err(Error::SupportViolation { defect: 1.0 });
    }
    Ok(info_exchange_values(
        &basis.ref_in.values,
        &basis.ref_out.values,
        i,
        j,
        k,
        l,
    ))
}

/// One atom of an entropy-production quasi-distribution.
///
/// The physical weight of the atom is the real part; the imaginary parts
/// cancel pairwise between conjugate atoms (sigma_R, +/- sigma_I) and are
/// kept because the rotated-Crooks identity relates the full complex sums.
#[derive(Debug, Clone, Copy)]
pub struct EpAtom {
    pub sigma_r: f64,
    pub sigma_i: f64,
    pub weight: C64,
}

/// Signed quasi-distribution over complex entropy-production values.
#[derive(Debug, Clone)]
pub struct EpDistribution {
    atoms: Vec<EpAtom>,
}

impl EpDistribution {
    /// Bin the transitions of a table into atoms, merging sigma values that
    /// agree within the binning tolerance on both components.
    pub fn from_table(table: &TpmQuasiProb) -> Self {
        let (n_mu, n_i, n_nu, n_k) = table.dims();
        let mut raw: Vec<(f64, f64, C64)> = Vec::new();
        for mu in 0..n_mu {
            for i in 0..n_i {
                for j in 0..n_i {
                    for nu in 0..n_nu {
                        for k in 0..n_k {
                            for l in 0..n_k {
                                let w = table.value(mu, i, j, nu, k, l);
                                if w.norm_sqr() == 0.0 {
                                    continue;
                                }
                                let s = table.sigma(mu, i, j, nu, k, l);
                                raw.push((s.re, s.im, w));
                            }
                        }
                    }
                }
            }
        }
        Self::from_raw(raw)
    }

    fn from_raw(mut raw: Vec<(f64, f64, C64)>) -> Self {
        raw.sort_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .unwrap()
                .then(a.1.partial_cmp(&b.1).unwrap())
        });
        let mut atoms: Vec<EpAtom> = Vec::new();
        let mut pos = 0;
        while pos < raw.len() {
            // cluster by sigma_r
            let mut end = pos + 1;
            while end < raw.len() && raw[end].0 - raw[end - 1].0 < tol::ATOM_BIN_TOL {
                end += 1;
            }
            let mut cluster: Vec<(f64, f64, C64)> = raw[pos..end].to_vec();
            cluster.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
            let mut q = 0;
            while q < cluster.len() {
                let mut qe = q + 1;
                while qe < cluster.len() && cluster[qe].1 - cluster[qe - 1].1 < tol::ATOM_BIN_TOL {
                    qe += 1;
                }
                let weight: C64 = cluster[q..qe].iter().map(|x| x.2).sum();
                atoms.push(EpAtom {
                    sigma_r: cluster[q].0,
                    sigma_i: cluster[q].1,
                    weight,
                });
                q = qe;
            }
            pos = end;
        }
        atoms.sort_by(|a, b| {
            a.sigma_r
                .partial_cmp(&b.sigma_r)
                .unwrap()
                .then(a.sigma_i.partial_cmp(&b.sigma_i).unwrap())
        });
        Self { atoms }
    }

    pub fn atoms(&self) -> &[EpAtom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total(&self) -> C64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    /// (sum sigma_R w, sum sigma_I w); the imaginary parts vanish by the
    /// conjugate-pair symmetry, the real parts are the physical means.
    pub fn mean_sigma(&self) -> (C64, C64) {
        let mr = self
            .atoms
            .iter()
            .map(|a| a.weight * a.sigma_r)
            .sum();
        let mi = self
            .atoms
            .iter()
            .map(|a| a.weight * a.sigma_i)
            .sum();
        (mr, mi)
    }

    /// <exp(-sigma_R + i theta sigma_I)> over the complex weights.
    pub fn exp_average(&self, theta: f64) -> C64 {
        self.atoms
            .iter()
            .map(|a| a.weight * C64::new(0.0, theta * a.sigma_i).exp() * (-a.sigma_r).exp())
            .sum()
    }

    /// Atom at (sigma_r, sigma_i) within the binning tolerance.
    pub fn lookup(&self, sigma_r: f64, sigma_i: f64) -> Option<&EpAtom> {
        let lo = self
            .atoms
            .partition_point(|a| a.sigma_r < sigma_r - tol::ATOM_BIN_TOL);
        self.atoms[lo..]
            .iter()
            .take_while(|a| a.sigma_r <= sigma_r + tol::ATOM_BIN_TOL)
            .find(|a| (a.sigma_i - sigma_i).abs() <= tol::ATOM_BIN_TOL)
    }

    /// Distribution over sigma_R alone (imaginary components summed out);
    /// weights are exactly real after the pairing, so only Re survives.
    pub fn marginal_sigma_r(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        for a in &self.atoms {
            match out.last_mut() {
                Some(last) if (last.0 - a.sigma_r).abs() < tol::ATOM_BIN_TOL => {
                    last.1 += a.weight.re
                }
                _ => out.push((a.sigma_r, a.weight.re)),
            }
        }
        out
    }

    /// Drop atoms with |weight| below `floor` (reporting convenience).
    pub fn pruned(&self, floor: f64) -> Self {
        Self {
            atoms: self
                .atoms
                .iter()
                .filter(|a| a.weight.norm() > floor)
                .cloned()
                .collect(),
        }
    }

    /// max |w(sigma_R, sigma_I) - conj(w(sigma_R, -sigma_I))|
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for a in &self.atoms {
            let partner = self.lookup(a.sigma_r, -a.sigma_i);
            let pw = partner.map(|p| p.weight).unwrap_or(C64::new(0.0, 0.0));
            worst = worst.max((a.weight - pw.conj()).norm());
        }
        worst
    }

    /// Forward-distribution invariants: unit total and vanishing mean
    /// imaginary entropy production.
    pub fn validate(&self) -> Result<()> {
        let total = self.total();
        if (total - C64::new(1.0, 0.0)).norm() > 1e-9 {
            return Err(Error::NotUnitTrace {
                trace: total.re,
                tol: 1e-9,
            });
        }
        let (_, mi) = self.mean_sigma();
        if mi.norm() > 1e-9 {
            return Err(Error::Linalg(format!(
                "mean imaginary entropy production {mi} exceeds 1e-9"
            )));
        }
        Ok(())
    }
}

/// T(|psi> -> |phi'>) = <phi'| N(|psi><psi|) |phi'>.
pub fn transition_pure(ch: &KrausChannel, psi: &CVector, phi: &CVector) -> Result<f64> {
    if psi.len() != ch.dim_in() {
        return Err(Error::DimensionMismatch {
            context: "transition_pure input vector",
            got: psi.len(),
            expected: ch.dim_in(),
        });
    }
    if phi.len() != ch.dim_out() {
        return Err(Error::DimensionMismatch {
            context: "transition_pure output vector",
            got: phi.len(),
            expected: ch.dim_out(),
        });
    }
    let mut t = 0.0;
    for k in ch.kraus() {
        let amp = sandwich(phi, k, psi);
        t += amp.norm_sqr();
    }
    Ok(t)
}

/// Which end of the process a vector is rescaled for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RescaleDirection {
    /// |psi~> ∝ gamma^{-1/2} |psi> (requires psi within supp gamma)
    Initial,
    /// |phi~> ∝ N(gamma)^{+1/2} |phi>
    Final,
}

/// Reference-rescaled vector; eigenvectors of the reference are fixed points.
pub fn rescaled_vector(
    reference: &DensityOperator,
    v: &CVector,
    direction: RescaleDirection,
) -> Result<CVector> {
    if v.len() != reference.dim() {
        return Err(Error::DimensionMismatch {
            context: "rescaled_vector",
            got: v.len(),
            expected: reference.dim(),
        });
    }
    if direction == RescaleDirection::Initial {
        let p = reference.support_projector();
        let pv = p.dot(v);
        let defect = 1.0 - crate::matrix::inner(&pv, &pv).re;
        if defect > tol::SUPPORT_TOL {
            return Err(Error::SupportViolation { defect });
        }
    }
    let alpha = match direction {
        RescaleDirection::Initial => C64::new(-0.5, 0.0),
        RescaleDirection::Final => C64::new(0.5, 0.0),
    };
    let w = reference.pow(alpha).dot(v);
    let n2 = crate::matrix::inner(&w, &w).re;
    if n2 < 1e-28 {
        return Err(Error::SupportViolation { defect: 1.0 });
    }
    Ok(w.mapv(|z| z / n2.sqrt()))
}

/// Forward/backward transition probabilities of a pure-state pair and the
/// reference factor they must balance to.
#[derive(Debug, Clone, Copy)]
pub struct DetailedBalance {
    pub forward: f64,
    pub backward: f64,
    /// <psi|gamma^{-1}|psi> <phi'|N(gamma)|phi'>
    pub rhs: f64,
}

impl DetailedBalance {
    pub fn ratio(&self) -> f64 {
        self.forward / self.backward
    }
}

/// Detailed-balance data for |psi> -> |phi'> through the family's channel,
/// with the backward transition taken between the reference-rescaled states
/// through the Petz recovery map.
pub fn detailed_balance_ratio(
    fam: &RecoveryFamily,
    psi: &CVector,
    phi: &CVector,
) -> Result<DetailedBalance> {
    let forward = transition_pure(fam.forward(), psi, phi)?;
    let psi_t = rescaled_vector(fam.reference(), psi, RescaleDirection::Initial)?;
    let phi_t = rescaled_vector(fam.evolved_reference(), phi, RescaleDirection::Final)?;
    let reverse = fam.petz()?;
    let backward = sandwich(&psi_t, &reverse.apply_matrix(&outer(&phi_t, &phi_t)), &psi_t).re;
    if backward < 1e-14 {
        return Err(Error::DegenerateBackward { value: backward });
    }
    let ginv = fam.reference().pow(C64::new(-1.0, 0.0));
    let rhs = sandwich(psi, &ginv, psi).re
        * sandwich(phi, fam.evolved_reference().matrix(), phi).re;
    Ok(DetailedBalance {
        forward,
        backward,
        rhs,
    })
}

/// Coherence correction factor in the thermal detailed-balance relation:
/// Upsilon = exp(beta dE) <psi|e^{beta H}|psi> <phi'|e^{-beta H}|phi'> with
/// dE = <phi'|H|phi'> - <psi|H|psi>. Equals 1 exactly when both vectors are
/// energy eigenstates and exceeds 1 otherwise.
pub fn upsilon(hamiltonian: &CMatrix, beta: f64, psi: &CVector, phi: &CVector) -> Result<f64> {
    let e_psi = sandwich(psi, hamiltonian, psi).re;
    let e_phi = sandwich(phi, hamiltonian, phi).re;
    let de = e_phi - e_psi;
    let eph = crate::matrix::expm_hermitian(hamiltonian, C64::new(beta, 0.0))?;
    let emh = crate::matrix::expm_hermitian(hamiltonian, C64::new(-beta, 0.0))?;
    let a = sandwich(psi, &eph, psi).re;
    let b = sandwich(phi, &emh, phi).re;
    Ok((beta * de).exp() * a * b)
}

/// Forward table of the family's channel on `rho`.
pub fn tpm_quasiprob(fam: &RecoveryFamily, rho: &DensityOperator) -> Result<TpmQuasiProb> {
    let basis = TransitionBasis::new(fam, rho)?;
    Ok(basis.forward_table(fam))
}

/// Forward entropy-production distribution.
pub fn ep_distribution(fam: &RecoveryFamily, rho: &DensityOperator) -> Result<EpDistribution> {
    Ok(EpDistribution::from_table(&tpm_quasiprob(fam, rho)?))
}

/// Backward entropy-production distribution through R_gamma^theta.
///
/// For rank-deficient rho its total mass is kappa_theta rather than 1.
pub fn backward_ep_distribution(
    fam: &RecoveryFamily,
    theta: f64,
    rho: &DensityOperator,
) -> Result<EpDistribution> {
    let basis = TransitionBasis::new(fam, rho)?;
    Ok(EpDistribution::from_table(&basis.backward_table(fam, theta)?))
}

/// Result of the atomwise rotated-Crooks comparison.
#[derive(Debug, Clone)]
pub struct CrooksReport {
    pub theta: f64,
    pub checked: usize,
    pub skipped_zero_backward: usize,
    pub max_rel_violation: f64,
    /// per-atom rows: (sigma_r, sigma_i, forward weight, backward weight at
    /// -sigma*, relative violation of the ratio identity)
    pub rows: Vec<(f64, f64, C64, C64, f64)>,
}

/// Check the ratio identity P_fwd(sigma) / P_bwd(-sigma*) =
/// exp(sigma_R - 2 i theta sigma_I) atom by atom.
///
/// `bwd` must be the backward distribution built at the same `theta`.
/// Atoms with |backward weight| <= 1e-12 are excluded (the identity is
/// vacuous there) and counted separately.
pub fn crooks_check(
    fwd: &EpDistribution,
    bwd: &EpDistribution,
    theta: f64,
) -> Result<CrooksReport> {
    let mut report = CrooksReport {
        theta,
        checked: 0,
        skipped_zero_backward: 0,
        max_rel_violation: 0.0,
        rows: Vec::new(),
    };
    for atom in fwd.atoms() {
        if atom.weight.norm() <= tol::ATOM_WEIGHT_FLOOR {
            continue;
        }
        // backward atoms for transitions into -sigma* = (-sigma_R, +sigma_I)
        let partner = bwd.lookup(-atom.sigma_r, atom.sigma_i);
        let Some(p) = partner else {
            return Err(Error::MissingAtom {
                sigma_r: atom.sigma_r,
                sigma_i: atom.sigma_i,
                forward_weight: atom.weight.norm(),
            });
        };
        if p.weight.norm() <= tol::ATOM_WEIGHT_FLOOR {
            report.skipped_zero_backward += 1;
            continue;
        }
        let expected = C64::new(atom.sigma_r, -2.0 * theta * atom.sigma_i).exp();
        let ratio = atom.weight / p.weight;
        let viol = (ratio - expected).norm() / expected.norm();
        report.checked += 1;
        report.max_rel_violation = report.max_rel_violation.max(viol);
        report
            .rows
            .push((atom.sigma_r, atom.sigma_i, atom.weight, p.weight, viol));
    }
    Ok(report)
}

/// Both sides of the integral fluctuation relation at rotation theta.
#[derive(Debug, Clone, Copy)]
pub struct IntegralQft {
    /// <exp(-sigma_R + i theta sigma_I)> from the distribution atoms
    pub lhs: C64,
    /// Tr[Pi_rho (R^{theta/2} ∘ N)(rho)] from the recovery channel
    pub kappa: f64,
}

/// Evaluate the integral fluctuation relation: the atom average must equal
/// kappa_theta, computed independently through the rotated recovery channel
/// and the support projector of rho. kappa = 1 for full-rank rho.
pub fn integral_qft(fam: &RecoveryFamily, rho: &DensityOperator, theta: f64) -> Result<IntegralQft> {
    let dist = ep_distribution(fam, rho)?;
    let lhs = dist.exp_average(theta);
    let reverse = fam.rotated_petz(theta / 2.0)?;
    let n_rho = fam.forward().apply(rho)?;
    let recovered = reverse.apply_matrix(n_rho.matrix());
    let proj = rho.support_projector();
    let kappa = proj
        .dot(&recovered)
        .diag()
        .iter()
        .map(|z| z.re)
        .sum::<f64>();
    Ok(IntegralQft { lhs, kappa })
}

/// Mean entropy production (real and imaginary parts) of the forward
/// distribution; the real part equals S(rho||gamma) - S(N(rho)||N(gamma)).
pub fn mean_entropy_production(fam: &RecoveryFamily, rho: &DensityOperator) -> Result<(f64, f64)> {
    let dist = ep_distribution(fam, rho)?;
    let (mr, mi) = dist.mean_sigma();
    Ok((mr.re, mi.re))
}
