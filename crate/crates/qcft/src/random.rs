//! Seeded random instances: channels, states, and covariant Kraus sets.
//!
//! Everything is driven by an explicit ChaCha8 stream so sweeps are
//! reproducible bit-for-bit across runs.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::KrausChannel;
use crate::matrix::{dagger, herm_eig, mat_pow_spectral, CMatrix, DensityOperator};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(r: &mut ChaCha8Rng) -> f64 {
    // Box-Muller
    let u1: f64 = r.gen::<f64>().max(1e-300);
    let u2: f64 = r.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn random_complex_matrix(rows: usize, cols: usize, r: &mut ChaCha8Rng) -> CMatrix {
    Array2::from_shape_fn((rows, cols), |_| C64::new(gaussian(r), gaussian(r)))
}

/// Random full-rank density operator, Wishart-distributed and mixed with a
/// sliver of the maximally mixed state to keep it well conditioned.
pub fn random_density(dim: usize, r: &mut ChaCha8Rng) -> DensityOperator {
    let w = random_complex_matrix(dim, dim, r);
    let mut m = w.dot(&dagger(&w));
    let tr: f64 = m.diag().iter().map(|z| z.re).sum();
    m.mapv_inplace(|z| z * (0.9 / tr));
    for i in 0..dim {
        m[(i, i)] += C64::new(0.1 / dim as f64, 0.0);
    }
    DensityOperator::sanitize(m, 1e-12).expect("random density is valid")
}

/// Random rank-deficient density operator with the given rank.
pub fn random_rank_deficient_density(dim: usize, rank: usize, r: &mut ChaCha8Rng) -> DensityOperator {
    assert!(rank >= 1 && rank <= dim);
    let w = random_complex_matrix(dim, rank, r);
    let mut m = w.dot(&dagger(&w));
    let tr: f64 = m.diag().iter().map(|z| z.re).sum();
    m.mapv_inplace(|z| z / tr);
    DensityOperator::sanitize(m, 1e-12).expect("random projector mixture is valid")
}

/// Random CPTP channel with `n_kraus` Kraus operators: Gaussian blocks
/// whitened by the inverse square root of their completeness sum.
pub fn random_channel(dim_in: usize, dim_out: usize, n_kraus: usize, r: &mut ChaCha8Rng) -> KrausChannel {
    let blocks: Vec<CMatrix> = (0..n_kraus)
        .map(|_| random_complex_matrix(dim_out, dim_in, r))
        .collect();
    let mut s: CMatrix = Array2::zeros((dim_in, dim_in));
    for b in &blocks {
        s = s + dagger(b).dot(b);
    }
    let spec = herm_eig(&s).expect("completeness sum is Hermitian");
    let s_inv_half = mat_pow_spectral(&spec, C64::new(-0.5, 0.0));
    let kraus: Vec<CMatrix> = blocks.iter().map(|b| b.dot(&s_inv_half)).collect();
    KrausChannel::new(kraus).expect("whitened Kraus set is CPTP")
}

/// Random unit vector.
pub fn random_pure(dim: usize, r: &mut ChaCha8Rng) -> crate::matrix::CVector {
    let v = ndarray::Array1::from_shape_fn(dim, |_| C64::new(gaussian(r), gaussian(r)));
    crate::matrix::normalize(&v)
}

/// Random channel covariant under the group generated by `levels`:
/// conjugation by exp(-i t diag(levels)) commutes with the channel.
///
/// Kraus operators are built mode by mode: entry (i, j) may be populated
/// only within a single frequency class levels[i] - levels[j] per operator,
/// and column norms are whitened so the set is exactly trace preserving.
pub fn random_covariant_channel(levels: &[f64], r: &mut ChaCha8Rng) -> KrausChannel {
    let d = levels.len();
    // collect frequency classes
    let mut modes: Vec<f64> = Vec::new();
    for i in 0..d {
        for j in 0..d {
            let w = levels[i] - levels[j];
            if !modes.iter().any(|&m| (m - w).abs() < 1e-9) {
                modes.push(w);
            }
        }
    }
    modes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut kraus: Vec<CMatrix> = Vec::new();
    for &w in &modes {
        let mut k: CMatrix = Array2::zeros((d, d));
        let mut nonzero = false;
        for i in 0..d {
            for j in 0..d {
                if (levels[i] - levels[j] - w).abs() < 1e-9 {
                    k[(i, j)] = C64::new(gaussian(r), gaussian(r));
                    nonzero = true;
                }
            }
        }
        if nonzero {
            kraus.push(k);
        }
    }
    // whiten columns: sum_m K_m† K_m is diagonal for distinct modes, so a
    // per-column rescale restores trace preservation exactly.
    let mut col_norm = vec![0.0f64; d];
    for k in &kraus {
        for j in 0..d {
            for i in 0..d {
                col_norm[j] += k[(i, j)].norm_sqr();
            }
        }
    }
    for k in kraus.iter_mut() {
        for j in 0..d {
            let scale = 1.0 / col_norm[j].sqrt();
            for i in 0..d {
                k[(i, j)] *= scale;
            }
        }
    }
    KrausChannel::new(kraus).expect("mode-structured Kraus set is CPTP")
}

/// Random diagonal full-rank reference state (commuting with any diagonal
/// generator).
pub fn random_diagonal_density(dim: usize, r: &mut ChaCha8Rng) -> DensityOperator {
    let mut w: Vec<f64> = (0..dim).map(|_| r.gen::<f64>() + 0.05).collect();
    let s: f64 = w.iter().sum();
    for x in w.iter_mut() {
        *x /= s;
    }
    let m = Array2::from_shape_fn((dim, dim), |(i, j)| {
        if i == j {
            C64::new(w[i], 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    DensityOperator::new(m).unwrap()
}
