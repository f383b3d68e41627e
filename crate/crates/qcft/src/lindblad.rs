//! Markovian open-system dynamics: fixed-step integration of the Lindblad
//! equation and the closed-form reverse generator derived from the Petz
//! recovery map of the infinitesimal-time channel.
//!
//! Forward form (hbar = 1):
//!
//!     drho/dt = -i[H, rho] + sum_n (L_n rho L_n† - 1/2 {L_n† L_n, rho})
//!
//! Reverse form for a reference trajectory gamma_t, with G = gamma_t^{1/2}:
//!
//!     L~_n = G L_n† G^{-1}
//!     H~   = -1/2 (G H G^{-1} + i G' G^{-1} + i/2 sum_n G L_n† L_n G^{-1}) + h.c.
//!
//! Integrating the reverse equation from gamma_tau transports the reference
//! backwards along its own trajectory.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::channel::choi_of_map;
use crate::error::{Error, Result};
use crate::matrix::{
    dagger, herm_asymmetry, herm_eig, maxnorm, maxnorm_diff, trace, CMatrix, DensityOperator,
};
use crate::tol;

/// Hamiltonian plus jump operators.
#[derive(Debug, Clone)]
pub struct LindbladGenerator {
    hamiltonian: CMatrix,
    jumps: Vec<CMatrix>,
}

impl LindbladGenerator {
    pub fn new(hamiltonian: CMatrix, jumps: Vec<CMatrix>) -> Result<Self> {
        let asym = herm_asymmetry(&hamiltonian);
        if asym > tol::HERM_TOL {
            return Err(Error::NotHermitian {
                asymmetry: asym,
                tol: tol::HERM_TOL,
            });
        }
        Ok(Self { hamiltonian, jumps })
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[CMatrix] {
        &self.jumps
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    /// Schroedinger-picture action L(rho).
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let i = C64::new(0.0, 1.0);
        let h = &self.hamiltonian;
        let mut out = (h.dot(rho) - rho.dot(h)).mapv(|z| z * (-i));
        for l in &self.jumps {
            let ld = dagger(l);
            let ldl = ld.dot(l);
            out = out + l.dot(rho).dot(&ld)
                - (ldl.dot(rho) + rho.dot(&ldl)).mapv(|z| z * 0.5);
        }
        out
    }

    /// Heisenberg-picture action L†(A).
    pub fn adjoint_apply(&self, a: &CMatrix) -> CMatrix {
        let i = C64::new(0.0, 1.0);
        let h = &self.hamiltonian;
        let mut out = (h.dot(a) - a.dot(h)).mapv(|z| z * i);
        for l in &self.jumps {
            let ld = dagger(l);
            let ldl = ld.dot(l);
            out = out + ld.dot(a).dot(l)
                - (ldl.dot(a) + a.dot(&ldl)).mapv(|z| z * 0.5);
        }
        out
    }

    /// Effective drift E = -iH - 1/2 sum L†L, so that
    /// L(rho) = E rho + rho E† + sum L rho L†.
    fn drift(&self) -> CMatrix {
        let i = C64::new(0.0, 1.0);
        let mut e = self.hamiltonian.mapv(|z| z * (-i));
        for l in &self.jumps {
            e = e - dagger(l).dot(l).mapv(|z| z * 0.5);
        }
        e
    }
}

/// Time-ordered sequence of states produced by the integrator.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityOperator>,
}

impl Trajectory {
    pub fn last(&self) -> &DensityOperator {
        self.states.last().expect("trajectory is nonempty")
    }

    /// CSV export: header `time,re_0_0,im_0_0,...`, one row per stored state,
    /// entries row-major.
    pub fn to_csv(&self) -> String {
        let d = self.states[0].dim();
        let mut out = String::from("time");
        for i in 0..d {
            for j in 0..d {
                out.push_str(&format!(",re_{i}_{j},im_{i}_{j}"));
            }
        }
        out.push('\n');
        for (t, s) in self.times.iter().zip(self.states.iter()) {
            out.push_str(&crate::output::fmt_f64(*t));
            for z in s.matrix().iter() {
                out.push(',');
                out.push_str(&crate::output::fmt_f64(z.re));
                out.push(',');
                out.push_str(&crate::output::fmt_f64(z.im));
            }
            out.push('\n');
        }
        out
    }
}

fn rk4_step(f: &dyn Fn(&CMatrix) -> CMatrix, y: &CMatrix, h: f64) -> CMatrix {
    let k1 = f(y);
    let k2 = f(&(y + &k1.mapv(|z| z * (0.5 * h))));
    let k3 = f(&(y + &k2.mapv(|z| z * (0.5 * h))));
    let k4 = f(&(y + &k3.mapv(|z| z * h)));
    y + &(k1 + k2.mapv(|z| z * 2.0) + k3.mapv(|z| z * 2.0) + k4).mapv(|z| z * (h / 6.0))
}

/// Linear fixed-step RK4 integration of d/dt X = L(X) for an arbitrary
/// matrix initial condition (no state re-validation; used to assemble
/// channels column by column).
pub fn evolve_matrix(gen: &LindbladGenerator, x0: &CMatrix, tau: f64, dt: f64) -> CMatrix {
    let drift = gen.drift();
    let drift_d = dagger(&drift);
    let jumps: Vec<(CMatrix, CMatrix)> =
        gen.jumps().iter().map(|l| (l.clone(), dagger(l))).collect();
    let f = move |y: &CMatrix| -> CMatrix {
        let mut out = drift.dot(y) + y.dot(&drift_d);
        for (l, ld) in &jumps {
            out = out + l.dot(y).dot(ld);
        }
        out
    };
    let n = (tau / dt).round().max(1.0) as usize;
    let h = tau / n as f64;
    let mut y = x0.clone();
    for _ in 0..n {
        y = rk4_step(&f, &y, h);
    }
    y
}

/// Fixed-step RK4 integration of the Lindblad equation from a valid state.
///
/// Every stored state is re-Hermitized and trace-renormalized; per-step
/// trace drift beyond 1e-8 or an eigenvalue below -1e-6 aborts.
pub fn evolve(
    gen: &LindbladGenerator,
    rho0: &DensityOperator,
    tau: f64,
    dt: f64,
) -> Result<Trajectory> {
    if rho0.dim() != gen.dim() {
        return Err(Error::DimensionMismatch {
            context: "lindblad evolve state",
            got: rho0.dim(),
            expected: gen.dim(),
        });
    }
    let n = (tau / dt).round().max(1.0) as usize;
    let h = tau / n as f64;
    let drift = gen.drift();
    let drift_d = dagger(&drift);
    let jumps: Vec<(CMatrix, CMatrix)> =
        gen.jumps().iter().map(|l| (l.clone(), dagger(l))).collect();
    let f = move |y: &CMatrix| -> CMatrix {
        let mut out = drift.dot(y) + y.dot(&drift_d);
        for (l, ld) in &jumps {
            out = out + l.dot(y).dot(ld);
        }
        out
    };

    let mut times = Vec::with_capacity(n + 1);
    let mut states = Vec::with_capacity(n + 1);
    times.push(0.0);
    states.push(rho0.clone());
    let mut y = rho0.matrix().clone();
    for step in 0..n {
        y = rk4_step(&f, &y, h);
        let tr = trace(&y).re;
        if (tr - 1.0).abs() > tol::INTEGRATOR_TRACE_DRIFT {
            return Err(Error::StepTooLarge {
                eigenvalue: tr - 1.0,
                time: (step + 1) as f64 * h,
            });
        }
        y.mapv_inplace(|z| z / tr);
        let t = (step + 1) as f64 * h;
        let herm = (&y + &dagger(&y)).mapv(|z| z * 0.5);
        let state = DensityOperator::sanitize(herm, tol::INTEGRATOR_EIG_FLOOR).map_err(|e| {
            match e {
                Error::NotPositive { eigenvalue, .. } => Error::StepTooLarge { eigenvalue, time: t },
                other => other,
            }
        })?;
        times.push(t);
        states.push(state);
    }
    Ok(Trajectory { times, states })
}

/// Divided-difference transform of the matrix square root: given gamma and
/// dgamma/dt, returns d(gamma^{1/2})/dt through the eigenbasis of gamma
/// (degenerate pairs use the limit 1/(2 sqrt(lambda))).
pub fn sqrt_derivative(gamma: &DensityOperator, dgamma_dt: &CMatrix) -> CMatrix {
    let spec = gamma.spectral();
    let v = &spec.vectors;
    let m = dagger(v).dot(dgamma_dt).dot(v);
    let d = spec.dim();
    let mut out: CMatrix = Array2::zeros((d, d));
    for a in 0..d {
        for b in 0..d {
            let la = spec.eigenvalues[a].max(0.0);
            let lb = spec.eigenvalues[b].max(0.0);
            let phi = if (la - lb).abs() > 1e-12 * la.max(lb).max(1e-300) {
                (la.sqrt() - lb.sqrt()) / (la - lb)
            } else {
                0.5 / la.max(lb).max(1e-300).sqrt()
            };
            out[(a, b)] = m[(a, b)] * phi;
        }
    }
    v.dot(&out).dot(&dagger(v))
}

/// Reverse generator at one instant of the reference trajectory.
///
/// Requires full-rank gamma; the returned Hamiltonian is Hermitian by
/// construction.
pub fn reverse_generator(
    gen: &LindbladGenerator,
    gamma: &DensityOperator,
    dgamma_dt: &CMatrix,
) -> Result<LindbladGenerator> {
    if !gamma.is_full_rank() {
        return Err(Error::RankDeficientReference {
            min_eigenvalue: gamma.min_eigenvalue(),
        });
    }
    let g = gamma.pow(C64::new(0.5, 0.0));
    let g_inv = gamma.pow(C64::new(-0.5, 0.0));
    let g_dot = sqrt_derivative(gamma, dgamma_dt);

    let jumps: Vec<CMatrix> = gen
        .jumps()
        .iter()
        .map(|l| g.dot(&dagger(l)).dot(&g_inv))
        .collect();
    let h_rev = reverse_hamiltonian(gen, &g, &g_inv, &g_dot);
    debug_assert!(herm_asymmetry(&h_rev) < 1e-9);
    LindbladGenerator::new(h_rev, jumps)
}

/// -1/2 (M + M†) with M = G H G^{-1} + i G' G^{-1} + i/2 G (sum L†L) G^{-1}.
fn reverse_hamiltonian(
    gen: &LindbladGenerator,
    g: &CMatrix,
    g_inv: &CMatrix,
    g_dot: &CMatrix,
) -> CMatrix {
    let i = C64::new(0.0, 1.0);
    let mut ldl_sum: CMatrix = Array2::zeros((gen.dim(), gen.dim()));
    for l in gen.jumps() {
        ldl_sum = ldl_sum + dagger(l).dot(l);
    }
    let m = g.dot(gen.hamiltonian()).dot(g_inv)
        + g_dot.dot(g_inv).mapv(|z| z * i)
        + g.dot(&ldl_sum).dot(g_inv).mapv(|z| z * (i * 0.5));
    (m.clone() + dagger(&m)).mapv(|z| z * (-0.5))
}

/// Maximum deviation between the reverse-integrated state and the stored
/// forward reference trajectory.
///
/// The forward trajectory is integrated at half the requested step so the
/// reverse integrator has generator data on its RK4 midpoints; memory stays
/// bounded by re-integrating from sqrt-spaced checkpoints. A stationary
/// reference (||L(gamma0)|| below 1e-12) follows a constant-trajectory fast
/// path.
pub fn reverse_recovery_check(
    gen: &LindbladGenerator,
    gamma0: &DensityOperator,
    tau: f64,
    dt: f64,
) -> Result<f64> {
    if !gamma0.is_full_rank() {
        return Err(Error::RankDeficientReference {
            min_eigenvalue: gamma0.min_eigenvalue(),
        });
    }
    let n = (tau / dt).round().max(1.0) as usize;
    let h = tau / n as f64;
    let stationary = maxnorm(&gen.apply(gamma0.matrix())) < 1e-12;

    // reverse stepper with generator rebuilt from the reference state
    let rev_gen_at = |gamma: &DensityOperator| -> Result<LindbladGenerator> {
        reverse_generator(gen, gamma, &gen.apply(gamma.matrix()))
    };

    if stationary {
        let rev = rev_gen_at(gamma0)?;
        let mut y = gamma0.matrix().clone();
        let mut worst = 0.0f64;
        let drift = rev.drift();
        let drift_d = dagger(&drift);
        let jumps: Vec<(CMatrix, CMatrix)> =
            rev.jumps().iter().map(|l| (l.clone(), dagger(l))).collect();
        let f = |y: &CMatrix| -> CMatrix {
            let mut out = drift.dot(y) + y.dot(&drift_d);
            for (l, ld) in &jumps {
                out = out + l.dot(y).dot(ld);
            }
            out
        };
        for _ in 0..n {
            y = rk4_step(&f, &y, h);
            let tr = trace(&y).re;
            y.mapv_inplace(|z| z / tr);
            worst = worst.max(maxnorm_diff(&y, gamma0.matrix()));
        }
        return Ok(worst);
    }

    // forward fine grid at h/2 with sqrt-spaced checkpoints
    let fine = 2 * n;
    let hh = h / 2.0;
    let seg = ((fine as f64).sqrt().ceil() as usize).max(1);
    let mut checkpoints: Vec<CMatrix> = Vec::with_capacity(fine / seg + 2);
    {
        let mut y = gamma0.matrix().clone();
        checkpoints.push(y.clone());
        for q in 1..=fine {
            y = rk4_step(&|x| gen.apply(x), &y, hh);
            let tr = trace(&y).re;
            y.mapv_inplace(|z| z / tr);
            if q % seg == 0 {
                checkpoints.push(y.clone());
            }
        }
    }
    let fill_window = |c_idx: usize, len: usize| -> Vec<CMatrix> {
        // states at fine indices c_idx*seg .. c_idx*seg + len
        let mut out = Vec::with_capacity(len + 1);
        let mut y = checkpoints[c_idx].clone();
        out.push(y.clone());
        for _ in 0..len {
            y = rk4_step(&|x| gen.apply(x), &y, hh);
            let tr = trace(&y).re;
            y.mapv_inplace(|z| z / tr);
            out.push(y.clone());
        }
        out
    };

    let state_of = |m: &CMatrix| -> Result<DensityOperator> {
        let herm = (m + &dagger(m)).mapv(|z| z * 0.5);
        DensityOperator::sanitize(herm, tol::INTEGRATOR_EIG_FLOOR)
    };

    // reverse sweep: reverse step k advances from fine index 2(n-k) down to
    // 2(n-k-1); cache the window of forward states covering each segment.
    let mut worst = 0.0f64;
    let mut y = {
        let last_c = (fine / seg).min(checkpoints.len() - 1);
        let window = fill_window(last_c, fine - last_c * seg);
        window.last().unwrap().clone()
    };
    let mut cache_start: isize = -1;
    let mut cache: Vec<CMatrix> = Vec::new();
    let mut gen_cache: std::collections::HashMap<usize, LindbladGenerator> =
        std::collections::HashMap::new();
    for k in 0..n {
        let q_hi = 2 * (n - k);
        let q_lo = q_hi - 2;
        // ensure cache covers [q_lo, q_hi]
        if cache_start < 0
            || (q_lo as isize) < cache_start
            || (q_hi as isize) > cache_start + cache.len() as isize - 1
        {
            let c_idx = q_lo / seg;
            let len = (q_hi - c_idx * seg).max(seg).min(fine - c_idx * seg);
            cache = fill_window(c_idx, len);
            cache_start = (c_idx * seg) as isize;
            gen_cache.clear();
        }
        let fetch = |q: usize, cache: &Vec<CMatrix>| -> CMatrix {
            cache[(q as isize - cache_start) as usize].clone()
        };
        let mut rev_at = |q: usize| -> Result<LindbladGenerator> {
            if let Some(g) = gen_cache.get(&q) {
                return Ok(g.clone());
            }
            let st = state_of(&fetch(q, &cache))?;
            let g = rev_gen_at(&st)?;
            gen_cache.insert(q, g.clone());
            Ok(g)
        };
        let g_hi = rev_at(q_hi)?;
        let g_mid = rev_at(q_hi - 1)?;
        let g_lo = rev_at(q_lo)?;
        let k1 = g_hi.apply(&y);
        let k2 = g_mid.apply(&(&y + &k1.mapv(|z| z * (0.5 * h))));
        let k3 = g_mid.apply(&(&y + &k2.mapv(|z| z * (0.5 * h))));
        let k4 = g_lo.apply(&(&y + &k3.mapv(|z| z * h)));
        y = &y + &(k1 + k2.mapv(|z| z * 2.0) + k3.mapv(|z| z * 2.0) + k4).mapv(|z| z * (h / 6.0));
        let tr = trace(&y).re;
        y.mapv_inplace(|z| z / tr);
        worst = worst.max(maxnorm_diff(&y, &fetch(q_lo, &cache)));
    }
    Ok(worst)
}

/// Choi-matrix deviation between the Petz recovery of the infinitesimal
/// forward channel (1 + L dt) and the infinitesimal reverse channel
/// (1 + L~ dt); shrinks as O(dt^2).
pub fn infinitesimal_petz_choi_error(
    gen: &LindbladGenerator,
    gamma: &DensityOperator,
    dt: f64,
) -> Result<f64> {
    let d = gen.dim();
    let l_gamma = gen.apply(gamma.matrix());
    let evolved = DensityOperator::sanitize(
        gamma.matrix() + &l_gamma.mapv(|z| z * dt),
        tol::INTEGRATOR_EIG_FLOOR,
    )?;
    let g = gamma.pow(C64::new(0.5, 0.0));
    let ng_inv = evolved.pow(C64::new(-0.5, 0.0));
    let petz_map = |chi: &CMatrix| -> CMatrix {
        let y = ng_inv.dot(chi).dot(&ng_inv);
        let z = &y + &gen.adjoint_apply(&y).mapv(|v| v * dt);
        g.dot(&z).dot(&g)
    };
    let rev = reverse_generator(gen, gamma, &l_gamma)?;
    let rev_map = |chi: &CMatrix| -> CMatrix { chi + &rev.apply(chi).mapv(|v| v * dt) };
    let c_petz = choi_of_map(d, d, petz_map);
    let c_rev = choi_of_map(d, d, rev_map);
    Ok(maxnorm_diff(&c_petz, &c_rev))
}
