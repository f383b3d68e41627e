//! Physical scenario constructors: resonant Jaynes-Cummings channels with
//! thermal or coherent-Gibbs field states, the dissipative JC channel,
//! generic energy-conserving thermodynamic channels, and one-way LOCC
//! channels with a classical memory register.
//!
//! Conventions: the atomic basis is ordered (|g>, |e|) with H_a =
//! (omega0/2) diag(-1, +1); joint operators live on atom ⊗ field with the
//! atom as the slow index.

use ndarray::{s, Array2};
use num_complex::Complex64 as C64;

use crate::channel::KrausChannel;
use crate::error::{Error, Result};
use crate::lindblad::LindbladGenerator;
use crate::matrix::{
    dagger, expm_hermitian, herm_eig, identity, maxnorm_diff, mat_pow_spectral, tensor, trace,
    CMatrix, CVector, DensityOperator,
};
use crate::tol;

/// Initial field state of the JC interaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bath {
    /// Thermal (Gibbs) field state: the channel is a thermal operation.
    Thermal,
    /// Pure state with sqrt-Gibbs amplitudes: transfers coherence.
    CoherentGibbs,
}

/// Parameters of the resonant Jaynes-Cummings setup.
#[derive(Debug, Clone, Copy)]
pub struct JcConfig {
    pub beta: f64,
    pub omega0: f64,
    pub g: f64,
    /// Fock cutoff; the field space has n_max + 1 levels.
    pub n_max: usize,
    /// Thermal-noise coupling rate (0 disables the dissipator).
    pub gamma_noise: f64,
    pub tau: f64,
}

impl JcConfig {
    pub fn new(beta: f64, omega0: f64, g: f64, n_max: usize, gamma_noise: f64, tau: f64) -> Result<Self> {
        let cfg = Self {
            beta,
            omega0,
            g,
            n_max,
            gamma_noise,
            tau,
        };
        let tail = cfg.truncation_tail();
        if tail > 1e-12 {
            return Err(Error::TruncationInsufficient {
                residual: tail,
                tol: 1e-12,
            });
        }
        Ok(cfg)
    }

    /// Paper-scale defaults: beta = omega0 = 1, g = 0.1, n_max = 40.
    pub fn default_figures(tau: f64, gamma_noise: f64) -> Self {
        Self::new(1.0, 1.0, 0.1, 40, gamma_noise, tau).expect("default cutoff is sufficient")
    }

    /// Relative thermal weight left above the Fock cutoff.
    pub fn truncation_tail(&self) -> f64 {
        (-self.beta * self.omega0 * (self.n_max as f64 + 1.0)).exp()
    }

    pub fn field_dim(&self) -> usize {
        self.n_max + 1
    }

    pub fn joint_dim(&self) -> usize {
        2 * self.field_dim()
    }
}

/// Truncated annihilation operator, <n|a|n+1> = sqrt(n+1).
pub fn annihilation(field_dim: usize) -> CMatrix {
    let mut a: CMatrix = Array2::zeros((field_dim, field_dim));
    for n in 1..field_dim {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

pub fn sigma_plus() -> CMatrix {
    let mut m: CMatrix = Array2::zeros((2, 2));
    m[(1, 0)] = C64::new(1.0, 0.0);
    m
}

pub fn sigma_minus() -> CMatrix {
    dagger(&sigma_plus())
}

/// H_a = (omega0/2) diag(-1, +1) in the (|g>, |e>) ordering.
pub fn atom_hamiltonian(omega0: f64) -> CMatrix {
    let mut m: CMatrix = Array2::zeros((2, 2));
    m[(0, 0)] = C64::new(-omega0 / 2.0, 0.0);
    m[(1, 1)] = C64::new(omega0 / 2.0, 0.0);
    m
}

pub fn field_hamiltonian(omega0: f64, field_dim: usize) -> CMatrix {
    let mut m: CMatrix = Array2::zeros((field_dim, field_dim));
    for n in 0..field_dim {
        m[(n, n)] = C64::new(omega0 * n as f64, 0.0);
    }
    m
}

/// Resonant JC Hamiltonian H_a + H_f + g (sigma_+ a + sigma_- a†) on
/// atom ⊗ field.
pub fn jc_hamiltonian(cfg: &JcConfig) -> CMatrix {
    let f = cfg.field_dim();
    let ha = tensor(&atom_hamiltonian(cfg.omega0), &identity(f));
    let hf = tensor(&identity(2), &field_hamiltonian(cfg.omega0, f));
    let a = annihilation(f);
    let int = tensor(&sigma_plus(), &a) + tensor(&sigma_minus(), &dagger(&a));
    ha + hf + int.mapv(|z| z * cfg.g)
}

/// Thermal atom state e^{-beta H_a}/Z_a.
pub fn atom_gibbs(cfg: &JcConfig) -> DensityOperator {
    DensityOperator::gibbs(&atom_hamiltonian(cfg.omega0), cfg.beta).expect("2x2 Gibbs state")
}

/// Thermal field state over the truncated Fock space.
pub fn thermal_field_state(cfg: &JcConfig) -> DensityOperator {
    DensityOperator::gibbs(&field_hamiltonian(cfg.omega0, cfg.field_dim()), cfg.beta)
        .expect("field Gibbs state")
}

/// Pure field state with amplitudes proportional to exp(-n beta omega0 / 2),
/// normalized over the truncation.
pub fn coherent_gibbs_field_vector(cfg: &JcConfig) -> CVector {
    let f = cfg.field_dim();
    let mut v: CVector = ndarray::Array1::zeros(f);
    for n in 0..f {
        v[n] = C64::new((-(n as f64) * cfg.beta * cfg.omega0 / 2.0).exp(), 0.0);
    }
    crate::matrix::normalize(&v)
}

/// Noiseless JC channel on the atom: trace out the field after evolving
/// rho ⊗ (bath state) for time tau.
pub fn jc_channel(cfg: &JcConfig, bath: Bath) -> Result<KrausChannel> {
    let spec = herm_eig(&jc_hamiltonian(cfg))?;
    jc_channel_from_spec(cfg, bath, &spec, cfg.tau)
}

fn jc_channel_from_spec(
    cfg: &JcConfig,
    bath: Bath,
    spec: &crate::matrix::SpectralDecomposition,
    tau: f64,
) -> Result<KrausChannel> {
    let u = propagator(spec, tau);
    let f = cfg.field_dim();
    let ch = match bath {
        Bath::Thermal => {
            let gamma_f = thermal_field_state(cfg);
            KrausChannel::from_unitary_dilation(&u, 2, &gamma_f, 1e-18)?.compress()
        }
        Bath::CoherentGibbs => {
            let v = coherent_gibbs_field_vector(cfg);
            // K_m = (I ⊗ <m|) U (I ⊗ |gamma_f>)
            let mut kraus = Vec::with_capacity(f);
            for m in 0..f {
                let mut k: CMatrix = Array2::zeros((2, 2));
                for s_out in 0..2 {
                    for s_in in 0..2 {
                        let mut acc = C64::new(0.0, 0.0);
                        for n in 0..f {
                            acc += u[(s_out * f + m, s_in * f + n)] * v[n];
                        }
                        k[(s_out, s_in)] = acc;
                    }
                }
                kraus.push(k);
            }
            KrausChannel::new(kraus)?.compress()
        }
    };
    if bath == Bath::Thermal {
        let gamma_a = atom_gibbs(cfg);
        let residual = maxnorm_diff(&ch.apply_matrix(gamma_a.matrix()), gamma_a.matrix());
        if residual > tol::CPTP_TOL {
            return Err(Error::TruncationInsufficient {
                residual,
                tol: tol::CPTP_TOL,
            });
        }
    }
    Ok(ch)
}

/// U(tau) from the cached Hamiltonian decomposition.
fn propagator(spec: &crate::matrix::SpectralDecomposition, tau: f64) -> CMatrix {
    spec.apply_fn(|e| (C64::new(0.0, -tau) * e).exp())
}

/// Residual ||N_tau(gamma_a) - gamma_a|| for the coherent-Gibbs channel.
pub fn coherent_return_residual(cfg: &JcConfig, tau: f64) -> Result<f64> {
    let spec = herm_eig(&jc_hamiltonian(cfg))?;
    let mut c = cfg.clone();
    c.tau = tau;
    let ch = jc_channel_from_spec(&c, Bath::CoherentGibbs, &spec, tau)?;
    let gamma_a = atom_gibbs(cfg);
    Ok(maxnorm_diff(&ch.apply_matrix(gamma_a.matrix()), gamma_a.matrix()))
}

/// Locate the interaction time near `seed` at which the coherent-Gibbs
/// channel returns the thermal atom state to itself, by golden-section
/// minimization of the fixed-point residual over [seed - window, seed + window].
pub fn find_return_time(cfg: &JcConfig, seed: f64, window: f64) -> Result<(f64, f64)> {
    let spec = herm_eig(&jc_hamiltonian(cfg))?;
    let gamma_a = atom_gibbs(cfg);
    let f = |tau: f64| -> Result<f64> {
        let mut c = cfg.clone();
        c.tau = tau;
        let ch = jc_channel_from_spec(&c, Bath::CoherentGibbs, &spec, tau)?;
        Ok(maxnorm_diff(&ch.apply_matrix(gamma_a.matrix()), gamma_a.matrix()))
    };
    // coarse scan
    let n_scan = 61;
    let mut best_tau = seed;
    let mut best = f(seed)?;
    for k in 0..n_scan {
        let t = seed - window + 2.0 * window * k as f64 / (n_scan - 1) as f64;
        let v = f(t)?;
        if v < best {
            best = v;
            best_tau = t;
        }
    }
    // golden-section refinement around the best scan point
    let gr = (5.0f64.sqrt() - 1.0) / 2.0;
    let step = 2.0 * window / (n_scan - 1) as f64;
    let (mut lo, mut hi) = (best_tau - step, best_tau + step);
    let mut c = hi - gr * (hi - lo);
    let mut d = lo + gr * (hi - lo);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    for _ in 0..60 {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - gr * (hi - lo);
            fc = f(c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + gr * (hi - lo);
            fd = f(d)?;
        }
    }
    let tau = 0.5 * (lo + hi);
    Ok((tau, f(tau)?))
}

/// Joint atom-field Lindblad generator: JC Hamiltonian plus (for
/// gamma_noise > 0) the thermal dissipator with absorption rate Gamma and
/// emission rate Gamma e^{beta omega0}, which leaves the joint Gibbs state
/// stationary.
pub fn noise_lindbladian(cfg: &JcConfig) -> LindbladGenerator {
    let f = cfg.field_dim();
    let h = jc_hamiltonian(cfg);
    let mut jumps = Vec::new();
    if cfg.gamma_noise > 0.0 {
        let up = tensor(&sigma_plus(), &identity(f))
            .mapv(|z| z * cfg.gamma_noise.sqrt());
        let down = tensor(&sigma_minus(), &identity(f))
            .mapv(|z| z * (cfg.gamma_noise * (cfg.beta * cfg.omega0).exp()).sqrt());
        jumps.push(up);
        jumps.push(down);
    }
    LindbladGenerator::new(h, jumps).expect("JC Hamiltonian is Hermitian")
}

/// Structure-aware evaluator for the dissipative JC generator: the diagonal
/// free part, the single-excitation ladder coupling, and the block-local
/// dissipator all act in O(dim^2), which keeps the Choi assembly of the
/// noisy channel tractable at large Fock cutoffs.
struct JcFastEval {
    f: usize,
    /// joint diagonal energies
    energies: Vec<f64>,
    g: f64,
    /// sqrt(1), ..., sqrt(n_max)
    root: Vec<f64>,
    c_up: f64,
    c_down: f64,
}

impl JcFastEval {
    fn new(cfg: &JcConfig) -> Self {
        let f = cfg.field_dim();
        let mut energies = vec![0.0; 2 * f];
        for s in 0..2 {
            for n in 0..f {
                energies[s * f + n] = cfg.omega0 * (n as f64 + s as f64 - 0.5);
            }
        }
        Self {
            f,
            energies,
            g: cfg.g,
            root: (0..f).map(|n| (n as f64).sqrt()).collect(),
            c_up: cfg.gamma_noise,
            c_down: cfg.gamma_noise * (cfg.beta * cfg.omega0).exp(),
        }
    }

    /// out = L(rho)
    fn apply(&self, rho: &CMatrix, out: &mut CMatrix) {
        let f = self.f;
        let d = 2 * f;
        let mi = C64::new(0.0, -1.0);
        // -i [H0, rho]
        for r in 0..d {
            for c in 0..d {
                out[(r, c)] = mi * (self.energies[r] - self.energies[c]) * rho[(r, c)];
            }
        }
        // -i g [V, rho] with V = sigma+ ⊗ a + sigma- ⊗ a†
        // (V rho): rows (g,n) <- sqrt(n+1) rho[(e, n+1), :]; rows (e,n) <- sqrt(n+1)...
        // handled entrywise below; (rho V) analogously on columns.
        let mig = mi * self.g;
        for c in 0..d {
            for n in 0..f {
                // (sigma-⊗a†) rho: row (g,n) gains sqrt(n) rho[(e, n-1), c]
                if n >= 1 {
                    out[(n, c)] += mig * self.root[n] * rho[(f + n - 1, c)];
                }
                // (sigma+⊗a) rho: row (e,n) gains sqrt(n+1) rho[(g, n+1), c]
                if n + 1 < f {
                    out[(f + n, c)] += mig * self.root[n + 1] * rho[(n + 1, c)];
                }
            }
        }
        let pig = -mig; // +i g for the rho V term
        for r in 0..d {
            for n in 0..f {
                // rho (sigma+⊗a): column (g,n+1) includes rho[r, (e,n)] sqrt(n+1)
                if n + 1 < f {
                    out[(r, n + 1)] += pig * self.root[n + 1] * rho[(r, f + n)];
                }
                // rho (sigma-⊗a†): column (e,n-1)... a†: col (e,n) gains rho[r,(g,n+1)] sqrt(n+1)
                if n + 1 < f {
                    out[(r, f + n)] += pig * self.root[n + 1] * rho[(r, n + 1)];
                }
            }
        }
        if self.c_up > 0.0 {
            let (cu, cd) = (self.c_up, self.c_down);
            // jump transfer terms
            for n in 0..f {
                for m in 0..f {
                    // sigma+ ρ sigma-: ee block gains cu * rho_gg
                    out[(f + n, f + m)] += cu * rho[(n, m)];
                    // sigma- ρ sigma+: gg block gains cd * rho_ee
                    out[(n, m)] += cd * rho[(f + n, f + m)];
                }
            }
            // -(1/2) {sum L†L, rho}: block-diagonal rates
            for r in 0..d {
                let cr = if r < f { cu } else { cd };
                for c in 0..d {
                    let cc = if c < f { cu } else { cd };
                    out[(r, c)] -= 0.5 * (cr + cc) * rho[(r, c)];
                }
            }
        }
    }
}

/// RK4 integration of an arbitrary joint matrix under the dissipative JC
/// generator using the structured evaluator.
fn jc_fast_integrate(eval: &JcFastEval, x0: &CMatrix, tau: f64, dt: f64, snapshots: &[f64]) -> Vec<CMatrix> {
    let d = 2 * eval.f;
    let n = (tau / dt).round().max(1.0) as usize;
    let h = tau / n as f64;
    let mut y = x0.clone();
    let mut k1: CMatrix = Array2::zeros((d, d));
    let mut k2: CMatrix = Array2::zeros((d, d));
    let mut k3: CMatrix = Array2::zeros((d, d));
    let mut k4: CMatrix = Array2::zeros((d, d));
    let mut tmp: CMatrix = Array2::zeros((d, d));
    let mut out = Vec::with_capacity(snapshots.len());
    let mut next_snap = 0;
    let record = |t: f64, y: &CMatrix, next_snap: &mut usize, out: &mut Vec<CMatrix>| {
        while *next_snap < snapshots.len() && snapshots[*next_snap] <= t + 0.5 * h {
            out.push(y.clone());
            *next_snap += 1;
        }
    };
    record(0.0, &y, &mut next_snap, &mut out);
    for step in 0..n {
        eval.apply(&y, &mut k1);
        tmp.assign(&y);
        tmp.scaled_add(C64::new(0.5 * h, 0.0), &k1);
        eval.apply(&tmp, &mut k2);
        tmp.assign(&y);
        tmp.scaled_add(C64::new(0.5 * h, 0.0), &k2);
        eval.apply(&tmp, &mut k3);
        tmp.assign(&y);
        tmp.scaled_add(C64::new(h, 0.0), &k3);
        eval.apply(&tmp, &mut k4);
        let w = C64::new(h / 6.0, 0.0);
        ndarray::Zip::from(&mut y)
            .and(&k1)
            .and(&k2)
            .and(&k3)
            .and(&k4)
            .for_each(|y, &a, &b, &c, &dd| {
                *y += w * (a + 2.0 * b + 2.0 * c + dd);
            });
        record((step + 1) as f64 * h, &y, &mut next_snap, &mut out);
    }
    while next_snap < snapshots.len() {
        out.push(y.clone());
        next_snap += 1;
    }
    out
}

/// Dissipative JC channel on the atom at a single interaction time,
/// realized through its Choi matrix assembled from the four basis inputs.
pub fn jc_noisy_channel(cfg: &JcConfig, dt: f64) -> Result<KrausChannel> {
    Ok(jc_noisy_channel_family(cfg, dt, &[cfg.tau])?.remove(0))
}

/// Dissipative JC channels at several interaction times from one
/// integration pass per Choi column.
pub fn jc_noisy_channel_family(cfg: &JcConfig, dt: f64, taus: &[f64]) -> Result<Vec<KrausChannel>> {
    let mut sorted: Vec<f64> = taus.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let tau_max = *sorted.last().expect("at least one time");
    let eval = JcFastEval::new(cfg);
    let f = cfg.field_dim();
    let gamma_f = thermal_field_state(cfg);
    // evolve the four atom-basis inputs E_ij ⊗ gamma_f
    let mut reduced: Vec<Vec<CMatrix>> = Vec::with_capacity(4);
    for i in 0..2 {
        for j in 0..2 {
            let mut e: CMatrix = Array2::zeros((2, 2));
            e[(i, j)] = C64::new(1.0, 0.0);
            let x0 = tensor(&e, gamma_f.matrix());
            let snaps = jc_fast_integrate(&eval, &x0, tau_max, dt, &sorted);
            let red: Vec<CMatrix> = snaps
                .iter()
                .map(|m| crate::matrix::partial_trace(m, &[2, f], &[0]).expect("dims fixed"))
                .collect();
            reduced.push(red);
        }
    }
    // assemble one channel per requested time, in the caller's order
    let mut out = Vec::with_capacity(taus.len());
    for &tau in taus {
        let pos = sorted
            .iter()
            .position(|&t| (t - tau).abs() < 1e-12)
            .expect("snapshot present");
        let mut choi: CMatrix = Array2::zeros((4, 4));
        for i in 0..2 {
            for j in 0..2 {
                let blk = &reduced[i * 2 + j][pos];
                for r in 0..2 {
                    for s_ in 0..2 {
                        choi[(i * 2 + r, j * 2 + s_)] = blk[(r, s_)];
                    }
                }
            }
        }
        out.push(KrausChannel::from_choi(
            &choi,
            2,
            2,
            tol::INTEGRATED_CPTP_TOL,
        )?);
    }
    Ok(out)
}

/// An energy-conserving system-bath channel together with the Gibbs data
/// needed by the free-energy fluctuation relation.
#[derive(Debug, Clone)]
pub struct ThermodynamicChannel {
    pub channel: KrausChannel,
    pub beta: f64,
    pub gamma_s: DensityOperator,
    pub gamma_s_prime: DensityOperator,
    /// (1/beta) ln(Z_S / Z'_S)
    pub delta_f_eq: f64,
}

fn partition_function(h: &CMatrix, beta: f64) -> Result<f64> {
    let spec = herm_eig(h)?;
    Ok(spec.eigenvalues.iter().map(|&e| (-beta * e).exp()).sum())
}

impl ThermodynamicChannel {
    /// Wrap a channel whose system Hamiltonian is unchanged and whose Gibbs
    /// state is an (approximate) fixed point, e.g. the dissipative JC
    /// channel. The equilibrium free-energy difference is zero.
    pub fn from_fixed_hamiltonian(
        channel: KrausChannel,
        h_s: &CMatrix,
        beta: f64,
        residual_tol: f64,
    ) -> Result<Self> {
        let gamma_s = DensityOperator::gibbs(h_s, beta)?;
        let residual = maxnorm_diff(&channel.apply_matrix(gamma_s.matrix()), gamma_s.matrix());
        if residual > residual_tol {
            return Err(Error::TruncationInsufficient {
                residual,
                tol: residual_tol,
            });
        }
        Ok(Self {
            channel,
            beta,
            gamma_s: gamma_s.clone(),
            gamma_s_prime: gamma_s,
            delta_f_eq: 0.0,
        })
    }
}

/// Build Tr_B[U (rho ⊗ gamma_B) U†] with validated energy conservation
/// U (H_S + H_B) U† = H'_S + H'_B and the Gibbs-to-Gibbs check.
#[allow(clippy::too_many_arguments)]
pub fn thermodynamic_channel(
    u: &CMatrix,
    gamma_b: &DensityOperator,
    h_s: &CMatrix,
    h_s_prime: &CMatrix,
    h_b: &CMatrix,
    h_b_prime: &CMatrix,
    beta: f64,
) -> Result<ThermodynamicChannel> {
    let d_s = h_s.nrows();
    let d_b = h_b.nrows();
    let before = tensor(h_s, &identity(d_b)) + tensor(&identity(d_s), h_b);
    let after = tensor(h_s_prime, &identity(d_b)) + tensor(&identity(d_s), h_b_prime);
    let defect = maxnorm_diff(&u.dot(&before).dot(&dagger(u)), &after);
    if defect > tol::CPTP_TOL {
        return Err(Error::EnergyConservationViolated { defect });
    }
    let channel = KrausChannel::from_unitary_dilation(u, d_s, gamma_b, 1e-18)?.compress();
    let gamma_s = DensityOperator::gibbs(h_s, beta)?;
    let gamma_s_prime = DensityOperator::gibbs(h_s_prime, beta)?;
    let g2g = maxnorm_diff(
        &channel.apply_matrix(gamma_s.matrix()),
        gamma_s_prime.matrix(),
    );
    if g2g > tol::CPTP_TOL {
        return Err(Error::TruncationInsufficient {
            residual: g2g,
            tol: tol::CPTP_TOL,
        });
    }
    let delta_f_eq =
        (partition_function(h_s, beta)? / partition_function(h_s_prime, beta)?).ln() / beta;
    Ok(ThermodynamicChannel {
        channel,
        beta,
        gamma_s,
        gamma_s_prime,
        delta_f_eq,
    })
}

/// One-way LOCC channel: measure B with Kraus set {K_m}, apply the
/// outcome-conditioned unitary V_m on A, and record the outcome in an
/// orthogonal memory register: Kraus operators (V_m ⊗ K_m) ⊗ |m>_M.
pub fn locc_channel(v_ops: &[CMatrix], k_ops: &[CMatrix]) -> Result<KrausChannel> {
    if v_ops.len() != k_ops.len() || v_ops.is_empty() {
        return Err(Error::InconsistentLabels(
            "need one local unitary per measurement outcome".into(),
        ));
    }
    let d_a = v_ops[0].nrows();
    let d_b = k_ops[0].nrows();
    let m_dim = v_ops.len();
    // completeness of the measurement
    let mut s: CMatrix = Array2::zeros((d_b, d_b));
    for k in k_ops {
        s = s + dagger(k).dot(k);
    }
    let defect = maxnorm_diff(&s, &identity(d_b));
    if defect > tol::CPTP_TOL {
        return Err(Error::NotPovm { defect });
    }
    for v in v_ops {
        let uu = maxnorm_diff(&dagger(v).dot(v), &identity(d_a));
        if uu > tol::CPTP_TOL {
            return Err(Error::NotPovm { defect: uu });
        }
    }
    let mut kraus = Vec::with_capacity(m_dim);
    for (m, (v, k)) in v_ops.iter().zip(k_ops.iter()).enumerate() {
        let local = tensor(v, k);
        let mut mem: CMatrix = Array2::zeros((m_dim, 1));
        mem[(m, 0)] = C64::new(1.0, 0.0);
        kraus.push(tensor(&local, &mem));
    }
    KrausChannel::new(kraus)
}

/// Two-qubit swap unitary.
pub fn swap_gate() -> CMatrix {
    let mut u: CMatrix = Array2::zeros((4, 4));
    u[(0, 0)] = C64::new(1.0, 0.0);
    u[(1, 2)] = C64::new(1.0, 0.0);
    u[(2, 1)] = C64::new(1.0, 0.0);
    u[(3, 3)] = C64::new(1.0, 0.0);
    u
}

/// Fixed plus-superposition mixture used throughout the case studies:
/// (1/2)|+><+| + I/4.
pub fn plus_mixture_state() -> DensityOperator {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let plus = ndarray::array![C64::new(s, 0.0), C64::new(s, 0.0)];
    let proj = crate::matrix::outer(&plus, &plus);
    let m = proj.mapv(|z| z * 0.5) + identity(2).mapv(|z| z * 0.25);
    DensityOperator::new(m).expect("valid mixture")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{partial_trace, sandwich};
    use approx::assert_abs_diff_eq;

    fn cfg_small(tau: f64) -> JcConfig {
        JcConfig::new(1.0, 1.0, 0.1, 35, 0.0, tau).unwrap()
    }

    #[test]
    fn hamiltonian_g_zero_is_diagonal() {
        let mut cfg = cfg_small(1.0);
        cfg.g = 0.0;
        let h = jc_hamiltonian(&cfg);
        let f = cfg.field_dim();
        for r in 0..2 * f {
            for c in 0..2 * f {
                if r != c {
                    assert_eq!(h[(r, c)], C64::new(0.0, 0.0));
                }
            }
        }
        // energies omega0 (n + s - 1/2)
        assert_abs_diff_eq!(h[(0, 0)].re, -0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(h[(f, f)].re, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(h[(1, 1)].re, 0.5, epsilon = 1e-14);
    }

    #[test]
    fn jc_conserves_free_energy_generator() {
        // [H_JC, H_a + H_f] = 0 exactly, including at the truncation edge
        let cfg = cfg_small(1.0);
        let f = cfg.field_dim();
        let h = jc_hamiltonian(&cfg);
        let h0 = tensor(&atom_hamiltonian(cfg.omega0), &identity(f))
            + tensor(&identity(2), &field_hamiltonian(cfg.omega0, f));
        let comm = h.dot(&h0) - h0.dot(&h);
        assert!(crate::matrix::maxnorm(&comm) < 1e-10);
    }

    #[test]
    fn hamiltonian_interaction_block() {
        // n_max = 1: the (|g,1>, |e,0>) block carries the off-diagonal g
        let cfg = JcConfig::new(14.0, 2.0, 0.3, 1, 0.0, 1.0).unwrap();
        let h = jc_hamiltonian(&cfg);
        // ordering: (g,0), (g,1), (e,0), (e,1)
        let expected = ndarray::array![
            [C64::new(-1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.3, 0.0), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(0.3, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(3.0, 0.0)]
        ];
        assert!(maxnorm_diff(&h, &expected) < 1e-14);
    }

    #[test]
    fn thermal_channel_fixes_gibbs_atom() {
        for tau in [0.7, 3.0, 18.66] {
            let cfg = cfg_small(tau);
            let ch = jc_channel(&cfg, Bath::Thermal).unwrap();
            let gamma_a = atom_gibbs(&cfg);
            let out = ch.apply_matrix(gamma_a.matrix());
            assert!(maxnorm_diff(&out, gamma_a.matrix()) < 1e-10);
        }
    }

    #[test]
    fn tau_zero_is_identity_channel() {
        let cfg = cfg_small(0.0);
        let ch = jc_channel(&cfg, Bath::Thermal).unwrap();
        assert!(maxnorm_diff(&ch.choi(), &KrausChannel::identity(2).choi()) < 1e-10);
    }

    #[test]
    fn jc_channel_matches_direct_dilation() {
        let cfg = cfg_small(2.5);
        let ch = jc_channel(&cfg, Bath::Thermal).unwrap();
        let h = jc_hamiltonian(&cfg);
        let u = expm_hermitian(&h, C64::new(0.0, -cfg.tau)).unwrap();
        let gamma_f = thermal_field_state(&cfg);
        let mut r = crate::random::rng(61);
        let rho = crate::random::random_density(2, &mut r);
        let joint = tensor(rho.matrix(), gamma_f.matrix());
        let evolved = u.dot(&joint).dot(&dagger(&u));
        let reduced = partial_trace(&evolved, &[2, cfg.field_dim()], &[0]).unwrap();
        assert!(maxnorm_diff(&ch.apply_matrix(rho.matrix()), &reduced) < 1e-9);
    }

    #[test]
    fn coherent_channel_pure_bath_kraus_count() {
        let cfg = cfg_small(2.0);
        let ch = jc_channel(&cfg, Bath::CoherentGibbs).unwrap();
        assert!(ch.kraus().len() <= 4);
        assert!(ch.tp_defect() < 1e-10);
    }

    #[test]
    fn noise_lindbladian_keeps_joint_gibbs_stationary() {
        let cfg = JcConfig::new(1.0, 1.0, 0.1, 30, 0.1, 1.0).unwrap();
        let gen = noise_lindbladian(&cfg);
        let gamma = tensor(atom_gibbs(&cfg).matrix(), thermal_field_state(&cfg).matrix());
        let drift = gen.apply(&gamma);
        assert!(crate::matrix::maxnorm(&drift) < 1e-12);
        // detailed-balance ratio of the two jump rates
        let j = gen.jumps();
        let r_up: f64 = j[0].iter().map(|z| z.norm_sqr()).sum();
        let r_down: f64 = j[1].iter().map(|z| z.norm_sqr()).sum();
        assert_abs_diff_eq!(r_down / r_up, (1.0f64).exp(), epsilon = 1e-12);
    }

    #[test]
    fn fast_eval_matches_generic_generator() {
        let cfg = JcConfig::new(1.2, 0.9, 0.17, 24, 0.13, 1.0).unwrap();
        let gen = noise_lindbladian(&cfg);
        let eval = JcFastEval::new(&cfg);
        let mut r = crate::random::rng(62);
        let x = crate::random::random_complex_matrix(cfg.joint_dim(), cfg.joint_dim(), &mut r);
        let generic = gen.apply(&x);
        let mut fast: CMatrix = Array2::zeros((cfg.joint_dim(), cfg.joint_dim()));
        eval.apply(&x, &mut fast);
        assert!(
            maxnorm_diff(&generic, &fast) < 1e-11,
            "defect {}",
            maxnorm_diff(&generic, &fast)
        );
    }

    #[test]
    fn noisy_channel_noiseless_limit_matches_unitary_path() {
        let cfg = JcConfig::new(1.0, 1.0, 0.1, 24, 0.0, 2.0).unwrap();
        let noisy = jc_noisy_channel(&cfg, 1e-3).unwrap();
        let clean = jc_channel(&cfg, Bath::Thermal).unwrap();
        assert!(
            maxnorm_diff(&noisy.choi(), &clean.choi()) < 1e-6,
            "choi defect {}",
            maxnorm_diff(&noisy.choi(), &clean.choi())
        );
    }

    #[test]
    fn noisy_channel_fixes_gibbs_atom() {
        let cfg = JcConfig::new(1.0, 1.0, 0.1, 24, 0.1, 2.0).unwrap();
        let ch = jc_noisy_channel(&cfg, 1e-3).unwrap();
        let gamma_a = atom_gibbs(&cfg);
        let out = ch.apply_matrix(gamma_a.matrix());
        assert!(maxnorm_diff(&out, gamma_a.matrix()) < 1e-7);
    }

    #[test]
    fn thermodynamic_swap_channel() {
        // swap with an equal-frequency thermal qubit: Gibbs state is fixed
        let beta = 0.8;
        let h = atom_hamiltonian(1.3);
        let gamma_b = DensityOperator::gibbs(&h, beta).unwrap();
        let th = thermodynamic_channel(&swap_gate(), &gamma_b, &h, &h, &h, &h, beta).unwrap();
        assert_abs_diff_eq!(th.delta_f_eq, 0.0, epsilon = 1e-12);
        let out = th.channel.apply_matrix(th.gamma_s.matrix());
        assert!(maxnorm_diff(&out, th.gamma_s.matrix()) < 1e-10);
        // identity U is also a valid (trivial) thermodynamic channel
        let id4 = identity(4);
        let trivial = thermodynamic_channel(&id4, &gamma_b, &h, &h, &h, &h, beta).unwrap();
        assert!(maxnorm_diff(&trivial.channel.choi(), &KrausChannel::identity(2).choi()) < 1e-10);
    }

    #[test]
    fn energy_conservation_violation_detected() {
        let beta = 1.0;
        let h = atom_hamiltonian(1.0);
        let h_other = atom_hamiltonian(2.0);
        let gamma_b = DensityOperator::gibbs(&h, beta).unwrap();
        // swap between different-frequency qubits does not conserve H_S + H_B
        let out = thermodynamic_channel(&swap_gate(), &gamma_b, &h, &h, &h_other, &h_other, beta);
        assert!(matches!(out, Err(Error::EnergyConservationViolated { .. })));
    }

    #[test]
    fn locc_channel_structure() {
        // single trivial outcome: isometric embedding with a memory tag
        let ch = locc_channel(&[identity(2)], &[identity(2)]).unwrap();
        assert_eq!(ch.dim_in(), 4);
        assert_eq!(ch.dim_out(), 4);
        // projective two-outcome measurement on B
        let mut k0: CMatrix = Array2::zeros((2, 2));
        k0[(0, 0)] = C64::new(1.0, 0.0);
        let mut k1: CMatrix = Array2::zeros((2, 2));
        k1[(1, 1)] = C64::new(1.0, 0.0);
        let ch2 = locc_channel(&[identity(2), identity(2)], &[k0, k1]).unwrap();
        assert_eq!(ch2.dim_out(), 8);
        // reference evolution: I_A ⊗ rho_B -> sum_m I_A ⊗ K rho K ⊗ |m><m|
        let mut r = crate::random::rng(63);
        let rho_b = crate::random::random_density(2, &mut r);
        let reference = tensor(&identity(2).mapv(|z| z * 0.5), rho_b.matrix());
        let out = ch2.apply_matrix(&reference);
        // memory off-diagonal blocks vanish
        for a in 0..4 {
            for b in 0..4 {
                let blk_01 = out[(a * 2, b * 2 + 1)];
                assert!(blk_01.norm() < 1e-12);
            }
        }
        let _ = sandwich(
            &coherent_gibbs_field_vector(&cfg_small(1.0)),
            &field_hamiltonian(1.0, 36),
            &coherent_gibbs_field_vector(&cfg_small(1.0)),
        );
    }

    #[test]
    fn truncation_guard_rejects_small_cutoff() {
        assert!(JcConfig::new(0.1, 1.0, 0.1, 10, 0.0, 1.0).is_err());
        assert!(JcConfig::new(1.0, 1.0, 0.1, 30, 0.0, 1.0).is_ok());
    }
}
