//! Experiment runner: every check in the library exposed as a subcommand
//! driven by a flat key-value config file. Writes CSV/JSON artifacts.
//!
//! Exit status: 0 on success, 1 on input/config errors, 2 when an invariant
//! check fails (a machine-readable violation report goes to stderr).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_complex::Complex64 as C64;
use serde::Serialize;

use qcft::bounds;
use qcft::channel::{covariance_defect, KrausChannel};
use qcft::config::Config;
use qcft::error::Error;
use qcft::fluctuation::{
    backward_ep_distribution, crooks_check, detailed_balance_ratio, ep_distribution, integral_qft,
    upsilon, EpDistribution, TransitionBasis,
};
use qcft::lindblad::{infinitesimal_petz_choi_error, reverse_recovery_check};
use qcft::matrix::{CVector, DensityOperator};
use qcft::models::{
    self, atom_gibbs, atom_hamiltonian, jc_channel, jc_noisy_channel, jc_noisy_channel_family,
    noise_lindbladian, Bath, JcConfig,
};
use qcft::output::{write_json, write_text, CsvWriter};
use qcft::petz::RecoveryFamily;
use qcft::random;

#[derive(Parser)]
#[command(name = "qcft", about = "Fluctuation-theorem experiments for quantum channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config file (key = value lines, # comments)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output artifact path (CSV or JSON depending on the subcommand)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Rotation parameter(s); repeatable
    #[arg(long, global = true)]
    theta: Vec<f64>,
    /// Suppress progress output
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Forward/backward pure-state transition probabilities vs time
    DetailedBalance,
    /// Entropy-production quasi-distribution (forward and backward)
    EntropyDist,
    /// Atomwise ratio identity between forward and backward distributions
    CrooksCheck,
    /// Integral fluctuation relation and its kappa factor
    IntegralQft,
    /// Reverse Lindblad trajectory recovery and infinitesimal consistency
    LindbladReverse,
    /// Two-point POVM statistics and table reconstruction
    PovmReconstruct,
    /// Covariance defect over a rotation grid
    Covariance,
    /// Free-energy balance for the energy-conserving channel
    FreeEnergy,
    /// Asymmetry loss under the covariant channel
    Asymmetry,
    /// Coherence-merging bound sweep
    CoherenceMerge,
    /// Entanglement loss under a one-way LOCC channel
    Locc,
    /// Rotation spectrum of the transition probability
    SymmetrySpectrum,
}

#[derive(Serialize)]
struct Violation {
    check: String,
    value: f64,
    threshold: f64,
}

#[derive(Serialize)]
struct ViolationReport {
    command: String,
    violations: Vec<Violation>,
}

enum RunError {
    Input(Error),
    Invariant(ViolationReport),
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::Input(e)
    }
}

type RunResult = Result<(), RunError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(RunError::Invariant(report)) => {
            eprintln!(
                "{}",
                serde_json::to_string_pretty(&report).expect("report serializes")
            );
            ExitCode::from(2)
        }
        Err(RunError::Input(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> RunResult {
    let config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    let out = cli.out.clone().unwrap_or_else(|| {
        PathBuf::from(format!("qcft-{}.out", command_name(cli.command)))
    });
    match cli.command {
        Command::DetailedBalance => detailed_balance(cli, &config, &out),
        Command::EntropyDist => entropy_dist(cli, &config, &out),
        Command::CrooksCheck => crooks_cmd(cli, &config, &out),
        Command::IntegralQft => integral_qft_cmd(cli, &config, &out),
        Command::LindbladReverse => lindblad_reverse_cmd(cli, &config, &out),
        Command::PovmReconstruct => povm_cmd(cli, &config, &out),
        Command::Covariance => covariance_cmd(cli, &config, &out),
        Command::FreeEnergy => free_energy_cmd(cli, &config, &out),
        Command::Asymmetry => asymmetry_cmd(cli, &config, &out),
        Command::CoherenceMerge => coherence_merge_cmd(cli, &config, &out),
        Command::Locc => locc_cmd(cli, &config, &out),
        Command::SymmetrySpectrum => symmetry_spectrum_cmd(cli, &config, &out),
    }
}

fn command_name(c: Command) -> &'static str {
    match c {
        Command::DetailedBalance => "detailed-balance",
        Command::EntropyDist => "entropy-dist",
        Command::CrooksCheck => "crooks-check",
        Command::IntegralQft => "integral-qft",
        Command::LindbladReverse => "lindblad-reverse",
        Command::PovmReconstruct => "povm-reconstruct",
        Command::Covariance => "covariance",
        Command::FreeEnergy => "free-energy",
        Command::Asymmetry => "asymmetry",
        Command::CoherenceMerge => "coherence-merge",
        Command::Locc => "locc",
        Command::SymmetrySpectrum => "symmetry-spectrum",
    }
}

fn note(cli: &Cli, msg: &str) {
    if !cli.quiet {
        println!("{msg}");
    }
}

fn fail(command: Command, violations: Vec<Violation>) -> RunError {
    RunError::Invariant(ViolationReport {
        command: command_name(command).to_string(),
        violations,
    })
}

// ---- config-driven model construction ------------------------------------

fn jc_config(config: &Config) -> Result<JcConfig, Error> {
    JcConfig::new(
        config.f64_or("beta", 1.0)?,
        config.f64_or("omega0", 1.0)?,
        config.f64_or("g", 0.1)?,
        config.usize_or("n_max", 40)?,
        config.f64_or("gamma_noise", 0.0)?,
        config.f64_or("tau", 18.66)?,
    )
}

fn bath_from(config: &Config) -> Result<Bath, Error> {
    match config.str_or("bath", "thermal") {
        "thermal" => Ok(Bath::Thermal),
        "coherent_gibbs" => Ok(Bath::CoherentGibbs),
        other => Err(Error::ConfigBadValue {
            key: "bath".into(),
            msg: format!("unknown bath `{other}`"),
        }),
    }
}

/// The channel named by the config: a JC variant or a random instance.
fn channel_from(config: &Config) -> Result<(KrausChannel, JcConfig), Error> {
    let cfg = jc_config(config)?;
    let ch = match config.str_or("model", "jc") {
        "jc" => jc_channel(&cfg, bath_from(config)?)?,
        "jc_noisy" => jc_noisy_channel(&cfg, config.f64_or("dt", 1e-3)?)?,
        "identity" => KrausChannel::identity(config.usize_or("dim", 2)?),
        "random" => {
            let dim = config.usize_or("dim", 3)?;
            let mut r = random::rng(config.usize_or("seed", 7)? as u64);
            random::random_channel(dim, dim, config.usize_or("n_kraus", 3)?, &mut r)
        }
        other => {
            return Err(Error::ConfigBadValue {
                key: "model".into(),
                msg: format!("unknown model `{other}`"),
            })
        }
    };
    Ok((ch, cfg))
}

fn state_from(config: &Config, dim: usize, cfg: &JcConfig) -> Result<DensityOperator, Error> {
    match config.str_or("rho", "plus_mixture") {
        "plus_mixture" => Ok(models::plus_mixture_state()),
        "gibbs" => Ok(atom_gibbs(cfg)),
        "maximally_mixed" => Ok(DensityOperator::maximally_mixed(dim)),
        "random" => {
            let mut r = random::rng(config.usize_or("rho_seed", 11)? as u64);
            Ok(random::random_density(dim, &mut r))
        }
        other => Err(Error::ConfigBadValue {
            key: "rho".into(),
            msg: format!("unknown state `{other}`"),
        }),
    }
}

fn family_from(
    config: &Config,
    ch: &KrausChannel,
    cfg: &JcConfig,
) -> Result<RecoveryFamily, Error> {
    let reference = match config.str_or("reference", "gibbs") {
        "gibbs" => atom_gibbs(cfg),
        "maximally_mixed" => DensityOperator::maximally_mixed(ch.dim_in()),
        "random" => {
            let mut r = random::rng(config.usize_or("reference_seed", 13)? as u64);
            random::random_density(ch.dim_in(), &mut r)
        }
        other => {
            return Err(Error::ConfigBadValue {
                key: "reference".into(),
                msg: format!("unknown reference `{other}`"),
            })
        }
    };
    let pin = config.str_or("pin_reference", "auto");
    let residual_tol = config.f64_or("fixed_point_tol", qcft::tol::FIXED_POINT_TOL)?;
    match pin {
        "true" => RecoveryFamily::with_fixed_point(ch.clone(), reference, residual_tol),
        "false" => RecoveryFamily::new(ch.clone(), reference),
        _ => {
            // pin when the reference is (numerically) a fixed point
            RecoveryFamily::with_fixed_point(ch.clone(), reference.clone(), residual_tol)
                .or_else(|_| RecoveryFamily::new(ch.clone(), reference))
        }
    }
}

fn thetas_from(cli: &Cli, default: &[f64]) -> Vec<f64> {
    if cli.theta.is_empty() {
        default.to_vec()
    } else {
        cli.theta.clone()
    }
}

// ---- subcommands ----------------------------------------------------------

fn detailed_balance(cli: &Cli, config: &Config, out: &Path) -> RunResult {
    let cfg = jc_config(config)?;
    let r = config.f64_or("r", 0.5)?;
    let tau_start = config.f64_or("tau_start", 0.5)?;
    let tau_stop = config.f64_or("tau_stop", 10.0)?;
    let n_tau = config.usize_or("tau_points", 20)?;
    let psi: CVector = ndarray::array![
        C64::new(r.sqrt(), 0.0),
        C64::new((1.0 - r).sqrt(), 0.0)
    ];
    let phi: CVector = ndarray::array![
        C64::new((1.0 - r).sqrt(), 0.0),
        C64::new(-r.sqrt(), 0.0)
    ];
    let taus: Vec<f64> = (0..n_tau)
        .map(|k| tau_start + (tau_stop - tau_start) * k as f64 / (n_tau - 1).max(1) as f64)
        .collect();
    let channels: Vec<KrausChannel> = if cfg.gamma_noise > 0.0 {
        jc_noisy_channel_family(&cfg, config.f64_or("dt", 1e-3)?, &taus)?
    } else {
        let mut v = Vec::with_capacity(taus.len());
        for &tau in &taus {
            let mut c = cfg;
            c.tau = tau;
            v.push(jc_channel(&c, bath_from(config)?)?);
        }
        v
    };
    let h_a = atom_hamiltonian(cfg.omega0);
    let ups = upsilon(&h_a, cfg.beta, &psi, &phi)?;
    let de = qcft::matrix::sandwich(&phi, &h_a, &phi).re
        - qcft::matrix::sandwich(&psi, &h_a, &psi).re;
    let prediction = ups * (-cfg.beta * de).exp();
    let mut csv = CsvWriter::new(&["tau", "t_forward", "t_backward", "ratio", "prediction"]);
    let mut worst = 0.0f64;
    for (tau, ch) in taus.iter().zip(channels) {
        let fam = RecoveryFamily::new(ch, atom_gibbs(&cfg))?;
        let db = detailed_balance_ratio(&fam, &psi, &phi)?;
        worst = worst.max((db.ratio() - prediction).abs());
        csv.row(&[*tau, db.forward, db.backward, db.ratio(), prediction]);
    }
    csv.write_to(out)?;
    note(cli, &format!("wrote {}; max |ratio - prediction| = {worst:.3e}", out.display()));
    let tol = config.f64_or("ratio_tol", 1e-6)?;
    if worst > tol {
        return Err(fail(
            Command::DetailedBalance,
            vec![Violation {
                check: "detailed balance ratio vs prediction".into(),
                value: worst,
                threshold: tol,
            }],
        ));
    }
    Ok(())
}

fn build_family_and_state(
    config: &Config,
) -> Result<(RecoveryFamily, DensityOperator), Error> {
    let (ch, cfg) = channel_from(config)?;
    let rho = state_from(config, ch.dim_in(), &cfg)?;
    let fam = family_from(config, &ch, &cfg)?;
    Ok((fam, rho))
}

fn entropy_dist(cli: &Cli, config: &Config, out: &Path) -> RunResult {
    let (fam, rho) = build_family_and_state(config)?;
    let theta = thetas_from(cli, &[0.0])[0];
    let basis = TransitionBasis::new(&fam, &rho)?;
    let fwd = EpDistribution::from_table(&basis.forward_table(&fam));
    let bwd = EpDistribution::from_table(&basis.backward_table(&fam, theta)?);
    let floor = config.f64_or("weight_floor", 1e-12)?;
    let mut csv = CsvWriter::new(&["sigma_r", "sigma_i", "weight_fwd", "weight_bwd"]);
    for atom in fwd.pruned(floor).atoms() {
        let partner = bwd
            .lookup(-atom.sigma_r, atom.sigma_i)
            .map(|a| a.weight.re)
            .unwrap_or(0.0);
        csv.row(&[atom.sigma_r, atom.sigma_i, atom.weight.re, partner]);
    }
    csv.write_to(out)?;
    let total = fwd.total();
    let sym = fwd.conjugate_symmetry_defect();
    note(
        cli,
        &format!(
            "wrote {}; {} atoms, total = {:.12}, conjugate symmetry defect = {sym:.3e}",
            out.display(),
            fwd.len(),
            total.re
        ),
    );
    let mut violations = Vec::new();
    if (total - C64::new(1.0, 0.0)).norm() > 1e-9 {
        violations.push(Violation {
            check: "forward distribution total".into(),
            value: (total - C64::new(1.0, 0.0)).norm(),
            threshold: 1e-9,
        });
    }
    if sym > 1e-9 {
        violations.push(Violation {
            check: "conjugate symmetry".into(),
            value: sym,
            threshold: 1e-9,
        });
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(fail(Command::EntropyDist, violations))
    }
}

fn crooks_cmd(cli: &Cli, config: &Config, out: &Path) -> RunResult {
    let (fam, rho) = build_family_and_state(config)?;
    let thetas = thetas_from(cli, &[0.0]);
    let basis = TransitionBasis::new(&fam, &rho)?;
    let fwd = EpDistribution::from_table(&basis.forward_table(&fam));
    let mut csv = CsvWriter::new(&[
        "theta",
        "sigma_r",
        "sigma_i",
        "fwd_re",
        "fwd_im",
        "bwd_re",
        "bwd_im",
        "rel_violation",
    ]);
    let mut worst = 0.0f64;
    for &theta in &thetas {
        let bwd = EpDistribution::from_table(&basis.backward_table(&fam, theta)?);
        let report = crooks_check(&fwd, &bwd, theta)?;
        worst = worst.max(report.max_rel_violation);
        for (sr, si, wf, wb, viol) in report.rows {
            csv.row(&[theta, sr, si, wf.re, wf.im, wb.re, wb.im, viol]);
        }
    }
    csv.write_to(out)?;
    note(cli, &format!("wrote {}; max relative violation = {worst:.3e}", out.display()));
    let tol = config.f64_or("crooks_tol", 1e-6)?;
    if worst > tol {
        return Err(fail(
            Command::CrooksCheck,
            vec![Violation {
                check: "ratio identity".into(),
                value: worst,
                threshold: tol,
            }],
        ));
    }
    Ok(())
}

fn integral_qft_cmd(cli: &Cli, config: &Config, out: &Path) -> RunResult {
    let (fam, rho) = build_family_and_state(config)?;
    let thetas = thetas_from(cli, &[0.0, 1.0, -2.5]);
    let mut csv = CsvWriter::new(&["theta", "lhs_re", "lhs_im", "kappa", "abs_error"]);
    let mut worst = 0.0f64;
    for &theta in &thetas {
        let r = integral_qft(&fam, &rho, theta)?;
        let err = (r.lhs - C64::new(r.kappa, 0.0)).norm();
        worst = worst.max(err);
        csv.row(&[theta, r.lhs.re, r.lhs.im, r.kappa, err]);
    }
    csv.write_to(out)?;
    note(cli, &format!("wrote {}; max |lhs - kappa| = {worst:.3e}", out.display()));
    if worst > 1e-7 {
        return Err(fail(
            Command::IntegralQft,
            vec![Violation {
                check: "integral relation".into(),
                value: worst,
                threshold: 1e-7,
            }],
        ));
    }
    Ok(())
}

fn lindblad_reverse_cmd(cli: &Cli, config: &Config, out: &Path) -> RunResult {
    let tau = config.f64_or("tau", 1.0)?;
    let dt = config.f64_or("dt", 1e-4)?;
    let (gen, gamma0) = match config.str_or("model", "driven_qubit") {
        "driven_qubit" => {
            let jump_rate = config.f64_or("jump_rate", 0.1)?;
            let sx = ndarray::array![
                [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
                [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]
            ];
            let sm = ndarray::array![
                [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
                [C64::new(0.0, 0.0), C64::new(0.0, 0.0)]
            ];
            let gen = qcft::lindblad::LindbladGenerator::new(
                sx,
                vec![sm.mapv(|z| z * jump_rate.sqrt())],
            )?;
            let p = config.f64_or("gamma0_ground", 0.7)?;
            let gamma0 = DensityOperator::new(ndarray::array![
                [C64::new(p, 0.0), C64::new(0.0, 0.0)],
                [C64::new(0.0, 0.0), C64::new(1.0 - p, 0.0)]
            ])?;
            (gen, gamma0)
        }
        "jc_noisy" => {
            let cfg = jc_config(config)?;
            let gen = noise_lindbladian(&cfg);
            let joint = qcft::matrix::tensor(
                atom_gibbs(&cfg).matrix(),
                models::thermal_field_state(&cfg).matrix(),
            );
            (gen, DensityOperator::new(joint)?)
        }
        other => {
            return Err(RunError::Input(Error::ConfigBadValue {
                key: "model".into(),
                msg: format!("unknown model `{other}`"),
            }))
        }
    };
    let max_error = reverse_recovery_check(&gen, &gamma0, tau, dt)?;
    let e1 = infinitesimal_petz_choi_error(&gen, &gamma0, dt)?;
    let e2 = infinitesimal_petz_choi_error(&gen, &gamma0, dt / 2.0)?;
    let ratio = e1 / e2;
    let mut csv = CsvWriter::new(&["tau", "dt", "max_error", "choi_err_dt", "choi_err_half_dt", "ratio"]);
    csv.row(&[tau, dt, max_error, e1, e2, ratio]);
    csv.write_to(out)?;
    note(
        cli,
        &format!(
            "wrote {}; trajectory error {max_error:.3e}, infinitesimal ratio {ratio:.3}",
            out.display()
        ),
    );
    let err_tol = config.f64_or("error_tol", 10.0 * dt * dt)?;
    if max_error > err_tol {
        return Err(fail(
            Command::LindbladReverse,
            vec![Violation {
                check: "reverse trajectory error".into(),
                value: max_error,
                threshold: err_tol,
            }],
        ));
    }
    Ok(())
}

fn povm_cmd(cli: &Cli, config: &Config, out: &Path) -> RunResult {
    let (fam, rho) = build_family_and_state(config)?;
    let (first, second) = qcft::povm::build_povms(&fam, &rho)?;
    let dist = qcft::povm::two_point_distribution(fam.forward(), &rho, &first, &second)?;
    write_text(out, &qcft::povm::distribution_to_csv(&dist))?;
    let d_in = fam.forward().dim_in();
    let d_out = fam.forward().dim_out();
    let rec = qcft::povm::reconstruct_quasiprob(&dist, d_in, d_out, d_in, d_out)?;
    let direct = qcft::fluctuation::tpm_quasiprob(&fam, &rho)?;
    let err = rec.max_diff(&direct);
    note(cli, &format!("wrote {}; reconstruction error = {err:.3e}", out.display()));
    if err > 1e-8 {
        return Err(fail(
            Command::PovmReconstruct,
            vec![Violation {
                check: "reconstruction vs direct table".into(),
                value: err,
                threshold: 1e-8,
            }],
        ));
    }
    Ok(())
}

fn covariance_cmd(cli: &Cli, config: &Config, out: &Path) -> RunResult {
    let (ch, cfg) = channel_from(config)?;
    let gamma = atom_gibbs(&cfg);
    let thetas = if cli.theta.is_empty() {
        let n = config.usize_or("theta_points", 9)?;
        let hi = config.f64_or("theta_max", 2.0)?;
        (0..n).map(|k| hi * k as f64 / (n - 1).max(1) as f64).collect()
    } else {
        cli.theta.clone()
    };
    let mut csv = CsvWriter::new(&["theta", "defect"]);
    for &theta in &thetas {
        let defect = covariance_defect(&ch, &gamma, theta)?;
        csv.row(&[theta, defect]);
    }
    csv.write_to(out)?;
    note(cli, &format!("wrote {}", out.display()));
    Ok(())
}

fn free_energy_cmd(cli: &Cli, config: &Config, out: &Path) -> RunResult {
    let cfg = jc_config(config)?;
    let ch = if cfg.gamma_noise > 0.0 {
        jc_noisy_channel(&cfg, config.f64_or("dt", 1e-3)?)?
    } else {
        jc_channel(&cfg, Bath::Thermal)?
    };
    let th = models::ThermodynamicChannel::from_fixed_hamiltonian(
        ch,
        &atom_hamiltonian(cfg.omega0),
        cfg.beta,
        qcft::tol::FIXED_POINT_TOL,
    )?;
    let rho = state_from(config, 2, &cfg)?;
    let report = bounds::free_energy_ft(&th, &rho)?;
    write_json(out, &report)?;
    note(
        cli,
        &format!(
            "wrote {}; delta_f = {:.6}, bound satisfied: {}",
            out.display(),
            report.extras["delta_f"],
            report.satisfied
        ),
    );
    if !report.satisfied {
        return Err(fail(
            Command::FreeEnergy,
            vec![Violation {
                check: "free-energy bound".into(),
                value: report.bound_lhs,
                threshold: report.bound_rhs,
            }],
        ));
    }
    Ok(())
}

fn asymmetry_cmd(cli: &Cli, config: &Config, out: &Path) -> RunResult {
    let cfg = jc_config(config)?;
    let ch = if cfg.gamma_noise > 0.0 {
        jc_noisy_channel(&cfg, config.f64_or("dt", 1e-3)?)?
    } else {
        jc_channel(&cfg, Bath::Thermal)?
    };
    let rho = state_from(config, 2, &cfg)?;
    let report = bounds::asymmetry_ft(&ch, &rho, &atom_hamiltonian(cfg.omega0))?;
    write_json(out, &report)?;
    note(
        cli,
        &format!(
            "wrote {}; delta_c = {:.6}, bound satisfied: {}",
            out.display(),
            report.extras["delta_c"],
            report.satisfied
        ),
    );
    if !report.satisfied {
        return Err(fail(
            Command::Asymmetry,
            vec![Violation {
                check: "asymmetry recovery bound".into(),
                value: report.bound_lhs,
                threshold: report.bound_rhs,
            }],
        ));
    }
    Ok(())
}

fn coherence_merge_cmd(cli: &Cli, config: &Config, out: &Path) -> RunResult {
    let n_instances = config.usize_or("instances", 100)?;
    let seed = config.usize_or("seed", 5)? as u64;
    let levels = config.f64_list_or("levels", &[0.0, 1.0, 2.0])?;
    let d = levels.len();
    let mut r = random::rng(seed);
    let mut csv = CsvWriter::new(&["instance", "k", "l", "lhs", "rhs"]);
    let mut worst: f64 = f64::NEG_INFINITY;
    for inst in 0..n_instances {
        let ch = random::random_covariant_channel(&levels, &mut r);
        let rho = random::random_density(d, &mut r);
        let gamma = random::random_diagonal_density(d, &mut r);
        for k in 0..d {
            for l in 0..d {
                if k == l {
                    continue;
                }
                let (lhs, rhs) =
                    bounds::coherence_merging_bound(&ch, &rho, &gamma, &levels, k, l)?;
                worst = worst.max(lhs - rhs);
                csv.row(&[inst as f64, k as f64, l as f64, lhs, rhs]);
            }
        }
    }
    csv.write_to(out)?;
    note(cli, &format!("wrote {}; max (lhs - rhs) = {worst:.3e}", out.display()));
    if worst > 1e-9 {
        return Err(fail(
            Command::CoherenceMerge,
            vec![Violation {
                check: "merging bound".into(),
                value: worst,
                threshold: 1e-9,
            }],
        ));
    }
    Ok(())
}

fn locc_cmd(cli: &Cli, config: &Config, out: &Path) -> RunResult {
    // Bell pair with an outcome-recording projective measurement on B
    let mut k0 = ndarray::Array2::zeros((2, 2));
    k0[(0, 0)] = C64::new(1.0, 0.0);
    let mut k1 = ndarray::Array2::zeros((2, 2));
    k1[(1, 1)] = C64::new(1.0, 0.0);
    let ch = models::locc_channel(
        &[qcft::matrix::identity(2), qcft::matrix::identity(2)],
        &[k0, k1],
    )?;
    let angle = config.f64_or("schmidt_angle", std::f64::consts::FRAC_PI_4)?;
    let mut psi: CVector = ndarray::Array1::zeros(4);
    psi[0] = C64::new(angle.cos(), 0.0);
    psi[3] = C64::new(angle.sin(), 0.0);
    let rho = DensityOperator::from_pure(&psi);
    let report = bounds::locc_entanglement_ft(&ch, &rho, 2, 2)?;
    write_json(out, &report)?;
    note(
        cli,
        &format!(
            "wrote {}; delta_e_s = {:.6}, log averaged fidelity = {:.6}",
            out.display(),
            report.extras["delta_e_s"],
            report.bound_rhs
        ),
    );
    if !report.satisfied {
        return Err(fail(
            Command::Locc,
            vec![Violation {
                check: "entanglement-loss bound".into(),
                value: report.bound_lhs,
                threshold: report.bound_rhs,
            }],
        ));
    }
    Ok(())
}

fn symmetry_spectrum_cmd(cli: &Cli, config: &Config, out: &Path) -> RunResult {
    let (fam, rho) = build_family_and_state(config)?;
    let basis = TransitionBasis::new(&fam, &rho)?;
    let mu = config.usize_or("mu", 0)?;
    let nu = config.usize_or("nu", 0)?;
    let psi = basis.initial.vector(mu);
    let phi = basis.final_.vector(nu);
    let n_grid = config.usize_or("n_grid", 256)?;
    let cfg = jc_config(config)?;
    let span = config.f64_or("span", 4.0 * std::f64::consts::PI / (cfg.beta * cfg.omega0))?;
    let spectrum = bounds::symmetry_diagnostic(&fam, &psi, &phi, n_grid, span)?;
    let mut csv = CsvWriter::new(&["frequency", "amplitude"]);
    for (f, a) in spectrum.frequencies.iter().zip(spectrum.amplitudes.iter()) {
        csv.row(&[*f, *a]);
    }
    csv.write_to(out)?;
    // peaks must sit on the imaginary entropy-production values
    let dist = ep_distribution(&fam, &rho)?.pruned(1e-10);
    let sigma_i: Vec<f64> = dist.atoms().iter().map(|a| a.sigma_i).collect();
    let resolution = 2.0 * std::f64::consts::PI / span;
    let ok = bounds::peaks_match_sigma_i(&spectrum, &sigma_i, 0.51 * resolution);
    note(
        cli,
        &format!(
            "wrote {}; {} peaks, matches sigma_i atoms: {ok}",
            out.display(),
            spectrum.peaks.len()
        ),
    );
    if !ok {
        return Err(fail(
            Command::SymmetrySpectrum,
            vec![Violation {
                check: "spectral peaks vs imaginary entropy production".into(),
                value: spectrum.peaks.len() as f64,
                threshold: sigma_i.len() as f64,
            }],
        ));
    }
    Ok(())
}
