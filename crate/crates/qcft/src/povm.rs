//! Two-point POVM protocol: overlapping measurement families whose outcome
//! statistics are a proper probability distribution, plus the linear
//! reconstruction that recovers the full complex transition table from
//! them.
//!
//! First-measurement elements, for every state eigenvector psi_mu and
//! reference indices i < j:
//!
//!     (1/sqrt d)  Pi_i Pi_psi,   (1/sqrt 2d) (Pi_i + Pi_j) Pi_psi,
//!     (1/sqrt 2d) (Pi_i + i Pi_j) Pi_psi
//!
//! and mirrored (projector order reversed) on the output side. The family
//! sums to the identity exactly, so the joint statistics of measuring,
//! passing the channel, and measuring again are observable probabilities.

use std::collections::BTreeMap;

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::channel::KrausChannel;
use crate::error::{Error, Result};
use crate::matrix::{dagger, identity, maxnorm_diff, CMatrix, DensityOperator, SpectralDecomposition};
use crate::petz::RecoveryFamily;
use crate::tol;

/// Sub-measurement tag within one state sector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Tag {
    /// projector onto a single reference eigenvector
    Basis(usize),
    /// (Pi_i + Pi_j) superposition element, i < j
    Plus(usize, usize),
    /// (Pi_i + i Pi_j) phase element, i < j
    Times(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct PovmLabel {
    /// eigenvector index of the state (initial or final)
    pub state: usize,
    pub tag: Tag,
}

impl PovmLabel {
    pub fn encode(&self) -> String {
        match self.tag {
            Tag::Basis(i) => format!("m{}:b{}", self.state, i),
            Tag::Plus(i, j) => format!("m{}:p{}.{}", self.state, i, j),
            Tag::Times(i, j) => format!("m{}:t{}.{}", self.state, i, j),
        }
    }

    pub fn decode(text: &str) -> Result<Self> {
        let bad = || Error::InconsistentLabels(format!("cannot parse label `{text}`"));
        let rest = text.strip_prefix('m').ok_or_else(bad)?;
        let (state_s, tag_s) = rest.split_once(':').ok_or_else(bad)?;
        let state: usize = state_s.parse().map_err(|_| bad())?;
        let tag = match tag_s.split_at(1) {
            ("b", idx) => Tag::Basis(idx.parse().map_err(|_| bad())?),
            ("p", pair) => {
                let (a, b) = pair.split_once('.').ok_or_else(bad)?;
                Tag::Plus(a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?)
            }
            ("t", pair) => {
                let (a, b) = pair.split_once('.').ok_or_else(bad)?;
                Tag::Times(a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?)
            }
            _ => return Err(bad()),
        };
        Ok(Self { state, tag })
    }
}

/// A labeled family of measurement operators with sum M†M = identity.
#[derive(Debug, Clone)]
pub struct PovmSet {
    elements: Vec<(PovmLabel, CMatrix)>,
    dim: usize,
}

impl PovmSet {
    pub fn elements(&self) -> &[(PovmLabel, CMatrix)] {
        &self.elements
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn completeness_defect(&self) -> f64 {
        let mut s: CMatrix = Array2::zeros((self.dim, self.dim));
        for (_, m) in &self.elements {
            s = s + dagger(m).dot(m);
        }
        maxnorm_diff(&s, &identity(self.dim))
    }
}

fn projector_from_column(spec: &SpectralDecomposition, k: usize) -> CMatrix {
    let v = spec.vector(k);
    crate::matrix::outer(&v, &v)
}

/// Build one measurement family; `state_first` controls the operator order
/// (reference projector leftmost for the first measurement, rightmost for
/// the second).
fn build_set(state: &SpectralDecomposition, reference: &SpectralDecomposition, state_first: bool) -> PovmSet {
    let d = state.dim();
    let sd = (d as f64).sqrt();
    let s2d = (2.0 * d as f64).sqrt();
    let i_unit = C64::new(0.0, 1.0);
    let mut elements = Vec::new();
    let state_projs: Vec<CMatrix> = (0..d).map(|m| projector_from_column(state, m)).collect();
    let ref_projs: Vec<CMatrix> = (0..d).map(|m| projector_from_column(reference, m)).collect();
    for (mu, psi) in state_projs.iter().enumerate() {
        let compose = |refpart: &CMatrix| -> CMatrix {
            if state_first {
                refpart.dot(psi)
            } else {
                psi.dot(refpart)
            }
        };
        for i in 0..d {
            elements.push((
                PovmLabel {
                    state: mu,
                    tag: Tag::Basis(i),
                },
                compose(&ref_projs[i]).mapv(|z| z / sd),
            ));
        }
        for i in 0..d {
            for j in (i + 1)..d {
                let plus = &ref_projs[i] + &ref_projs[j];
                let times = &ref_projs[i] + &ref_projs[j].mapv(|z| z * i_unit);
                elements.push((
                    PovmLabel {
                        state: mu,
                        tag: Tag::Plus(i, j),
                    },
                    compose(&plus).mapv(|z| z / s2d),
                ));
                elements.push((
                    PovmLabel {
                        state: mu,
                        tag: Tag::Times(i, j),
                    },
                    compose(&times).mapv(|z| z / s2d),
                ));
            }
        }
    }
    PovmSet { elements, dim: d }
}

/// Measurement families for the initial and final points of the process.
///
/// Built from the full eigenbases of rho, N(rho) and of the reference pair,
/// so each family is complete regardless of state rank.
pub fn build_povms(fam: &RecoveryFamily, rho: &DensityOperator) -> Result<(PovmSet, PovmSet)> {
    let n_rho = fam.forward().apply(rho)?;
    let first = build_set(rho.spectral(), fam.reference().spectral(), true);
    let second = build_set(
        n_rho.spectral(),
        fam.evolved_reference().spectral(),
        false,
    );
    let d1 = first.completeness_defect();
    if d1 > tol::CPTP_TOL {
        return Err(Error::NotPovm { defect: d1 });
    }
    let d2 = second.completeness_defect();
    if d2 > tol::CPTP_TOL {
        return Err(Error::NotPovm { defect: d2 });
    }
    Ok((first, second))
}

pub type TwoPointDistribution = BTreeMap<(PovmLabel, PovmLabel), f64>;

/// Forward statistics P(m, m') = Tr[M'_{m'} N(M_m rho M_m†) M'_{m'}†].
pub fn two_point_distribution(
    ch: &KrausChannel,
    rho: &DensityOperator,
    first: &PovmSet,
    second: &PovmSet,
) -> Result<TwoPointDistribution> {
    if rho.dim() != ch.dim_in() || first.dim() != ch.dim_in() || second.dim() != ch.dim_out() {
        return Err(Error::DimensionMismatch {
            context: "two_point_distribution",
            got: first.dim(),
            expected: ch.dim_in(),
        });
    }
    let mut dist = BTreeMap::new();
    for (lm, m) in first.elements() {
        let pre = m.dot(rho.matrix()).dot(&dagger(m));
        let mid = ch.apply_matrix(&pre);
        for (ln, mp) in second.elements() {
            let val = mp.dot(&mid).dot(&dagger(mp));
            let p: f64 = val.diag().iter().map(|z| z.re).sum();
            dist.insert((*lm, *ln), p);
        }
    }
    Ok(dist)
}

/// Backward statistics P(m, m') = Tr[M_m† R(M'_{m'}† N(rho) M'_{m'}) M_m].
pub fn backward_two_point_distribution(
    fam: &RecoveryFamily,
    theta: f64,
    rho: &DensityOperator,
    first: &PovmSet,
    second: &PovmSet,
) -> Result<TwoPointDistribution> {
    let reverse = fam.rotated_petz(theta)?;
    let n_rho = fam.forward().apply(rho)?;
    let mut dist = BTreeMap::new();
    for (ln, mp) in second.elements() {
        let pre = dagger(mp).dot(n_rho.matrix()).dot(mp);
        let mid = reverse.apply_matrix(&pre);
        for (lm, m) in first.elements() {
            let val = dagger(m).dot(&mid).dot(m);
            let p: f64 = val.diag().iter().map(|z| z.re).sum();
            dist.insert((*lm, *ln), p);
        }
    }
    Ok(dist)
}

/// Dense reconstructed table with the same (mu; i, j; nu; k, l) layout as
/// the directly computed transition table.
#[derive(Debug, Clone)]
pub struct ReconstructedTable {
    entries: Vec<C64>,
    n_state_in: usize,
    n_state_out: usize,
    d_in: usize,
    d_out: usize,
}

impl ReconstructedTable {
    fn idx(&self, mu: usize, i: usize, j: usize, nu: usize, k: usize, l: usize) -> usize {
        ((((mu * self.d_in + i) * self.d_in + j) * self.n_state_out + nu) * self.d_out + k)
            * self.d_out
            + l
    }

    pub fn value(&self, mu: usize, i: usize, j: usize, nu: usize, k: usize, l: usize) -> C64 {
        self.entries[self.idx(mu, i, j, nu, k, l)]
    }

    /// Entrywise max deviation from a directly computed table (index ranges
    /// must agree, i.e. full-rank states).
    pub fn max_diff(&self, table: &crate::fluctuation::TpmQuasiProb) -> f64 {
        let (n_mu, n_i, n_nu, n_k) = table.dims();
        assert_eq!(
            (n_mu, n_i, n_nu, n_k),
            (self.n_state_in, self.d_in, self.n_state_out, self.d_out),
            "table shapes differ"
        );
        let mut worst = 0.0f64;
        for mu in 0..n_mu {
            for i in 0..n_i {
                for j in 0..n_i {
                    for nu in 0..n_nu {
                        for k in 0..n_k {
                            for l in 0..n_k {
                                worst = worst.max(
                                    (self.value(mu, i, j, nu, k, l)
                                        - table.value(mu, i, j, nu, k, l))
                                    .norm(),
                                );
                            }
                        }
                    }
                }
            }
        }
        worst
    }
}

/// Linear reconstruction of the complex transition table from the observed
/// two-point distribution.
///
/// Per (mu, nu) block: diagonal entries come from the basis-basis
/// probabilities scaled by d^2; singly off-diagonal entries from
/// plus/phase combinations with the basis background subtracted; doubly
/// off-diagonal entries from the 4x4 complex inversion of the four
/// plus/phase cross terms.
pub fn reconstruct_quasiprob(
    dist: &TwoPointDistribution,
    n_state_in: usize,
    n_state_out: usize,
    d_in: usize,
    d_out: usize,
) -> Result<ReconstructedTable> {
    let scale = (d_in * d_out) as f64;
    let fetch = |mu: usize, tag_in: Tag, nu: usize, tag_out: Tag| -> Result<f64> {
        dist.get(&(
            PovmLabel {
                state: mu,
                tag: tag_in,
            },
            PovmLabel {
                state: nu,
                tag: tag_out,
            },
        ))
        .copied()
        .ok_or_else(|| {
            Error::InconsistentLabels(format!(
                "missing outcome pair ({}, {})",
                PovmLabel {
                    state: mu,
                    tag: tag_in
                }
                .encode(),
                PovmLabel {
                    state: nu,
                    tag: tag_out
                }
                .encode()
            ))
        })
    };

    let mut table = ReconstructedTable {
        entries: vec![C64::new(0.0, 0.0); n_state_in * d_in * d_in * n_state_out * d_out * d_out],
        n_state_in,
        n_state_out,
        d_in,
        d_out,
    };
    let iu = C64::new(0.0, 1.0);

    for mu in 0..n_state_in {
        for nu in 0..n_state_out {
            // diagonal-diagonal
            for i in 0..d_in {
                for k in 0..d_out {
                    let p = fetch(mu, Tag::Basis(i), nu, Tag::Basis(k))?;
                    let idx = table.idx(mu, i, i, nu, k, k);
                    table.entries[idx] = C64::new(scale * p, 0.0);
                }
            }
            // diagonal input, off-diagonal output
            for i in 0..d_in {
                for k in 0..d_out {
                    for l in (k + 1)..d_out {
                        let back = 0.5
                            * (fetch(mu, Tag::Basis(i), nu, Tag::Basis(k))?
                                + fetch(mu, Tag::Basis(i), nu, Tag::Basis(l))?);
                        let qp = fetch(mu, Tag::Basis(i), nu, Tag::Plus(k, l))? - back;
                        let qt = fetch(mu, Tag::Basis(i), nu, Tag::Times(k, l))? - back;
                        let kl = table.idx(mu, i, i, nu, k, l);
                        let lk = table.idx(mu, i, i, nu, l, k);
                        table.entries[kl] = (C64::new(qp, 0.0) + iu * qt) * scale;
                        table.entries[lk] = (C64::new(qp, 0.0) - iu * qt) * scale;
                    }
                }
            }
            // off-diagonal input, diagonal output
            for i in 0..d_in {
                for j in (i + 1)..d_in {
                    for k in 0..d_out {
                        let back = 0.5
                            * (fetch(mu, Tag::Basis(i), nu, Tag::Basis(k))?
                                + fetch(mu, Tag::Basis(j), nu, Tag::Basis(k))?);
                        let qp = fetch(mu, Tag::Plus(i, j), nu, Tag::Basis(k))? - back;
                        let qt = fetch(mu, Tag::Times(i, j), nu, Tag::Basis(k))? - back;
                        let ij = table.idx(mu, i, j, nu, k, k);
                        let ji = table.idx(mu, j, i, nu, k, k);
                        table.entries[ij] = (C64::new(qp, 0.0) + iu * qt) * scale;
                        table.entries[ji] = (C64::new(qp, 0.0) - iu * qt) * scale;
                    }
                }
            }
            // doubly off-diagonal: 4x4 inversion per index pair
            for i in 0..d_in {
                for j in (i + 1)..d_in {
                    for k in 0..d_out {
                        for l in (k + 1)..d_out {
                            let pbar = fetch(mu, Tag::Basis(i), nu, Tag::Basis(k))?
                                + fetch(mu, Tag::Basis(i), nu, Tag::Basis(l))?
                                + fetch(mu, Tag::Basis(j), nu, Tag::Basis(k))?
                                + fetch(mu, Tag::Basis(j), nu, Tag::Basis(l))?;
                            // singly-off-diagonal Q values entering the subtraction
                            let q_in_b = |a: usize, tag_out: Tag| -> Result<f64> {
                                let back = 0.5
                                    * (fetch(mu, Tag::Basis(a), nu, Tag::Basis(k))?
                                        + fetch(mu, Tag::Basis(a), nu, Tag::Basis(l))?);
                                Ok(fetch(mu, Tag::Basis(a), nu, tag_out)? - back)
                            };
                            let q_out_b = |tag_in: Tag, b: usize| -> Result<f64> {
                                let back = 0.5
                                    * (fetch(mu, Tag::Basis(i), nu, Tag::Basis(b))?
                                        + fetch(mu, Tag::Basis(j), nu, Tag::Basis(b))?);
                                Ok(fetch(mu, tag_in, nu, Tag::Basis(b))? - back)
                            };
                            let q_cross = |tag_in: Tag, tag_out: Tag| -> Result<f64> {
                                let inner = q_in_b(i, tag_out)?
                                    + q_in_b(j, tag_out)?
                                    + q_out_b(tag_in, k)?
                                    + q_out_b(tag_in, l)?;
                                Ok(fetch(mu, tag_in, nu, tag_out)? - 0.5 * inner - 0.25 * pbar)
                            };
                            let qpp = q_cross(Tag::Plus(i, j), Tag::Plus(k, l))?;
                            let qpt = q_cross(Tag::Plus(i, j), Tag::Times(k, l))?;
                            let qtp = q_cross(Tag::Times(i, j), Tag::Plus(k, l))?;
                            let qtt = q_cross(Tag::Times(i, j), Tag::Times(k, l))?;
                            let (qpp, qpt, qtp, qtt) = (
                                C64::new(qpp, 0.0),
                                C64::new(qpt, 0.0),
                                C64::new(qtp, 0.0),
                                C64::new(qtt, 0.0),
                            );
                            let v_ij_kl = qpp + iu * qpt + iu * qtp - qtt;
                            let v_ij_lk = qpp - iu * qpt + iu * qtp + qtt;
                            let v_ji_kl = qpp + iu * qpt - iu * qtp + qtt;
                            let v_ji_lk = qpp - iu * qpt - iu * qtp - qtt;
                            let assign = |t: &mut ReconstructedTable, a, b, c, d, v: C64| {
                                let idx = t.idx(mu, a, b, nu, c, d);
                                t.entries[idx] = v * scale;
                            };
                            assign(&mut table, i, j, k, l, v_ij_kl);
                            assign(&mut table, i, j, l, k, v_ij_lk);
                            assign(&mut table, j, i, k, l, v_ji_kl);
                            assign(&mut table, j, i, l, k, v_ji_lk);
                        }
                    }
                }
            }
        }
    }
    Ok(table)
}

/// CSV export: columns label_m, label_mp, probability.
pub fn distribution_to_csv(dist: &TwoPointDistribution) -> String {
    let mut out = String::from("label_m,label_mp,probability\n");
    for ((lm, ln), p) in dist {
        out.push_str(&format!(
            "{},{},{}\n",
            lm.encode(),
            ln.encode(),
            crate::output::fmt_f64(*p)
        ));
    }
    out
}

/// CSV import matching [`distribution_to_csv`].
pub fn distribution_from_csv(text: &str) -> Result<TwoPointDistribution> {
    let mut dist = BTreeMap::new();
    for (idx, line) in text.lines().enumerate() {
        if idx == 0 || line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 3 {
            return Err(Error::InconsistentLabels(format!(
                "line {}: expected 3 columns",
                idx + 1
            )));
        }
        let lm = PovmLabel::decode(cells[0].trim())?;
        let ln = PovmLabel::decode(cells[1].trim())?;
        let p: f64 = cells[2].trim().parse().map_err(|e| {
            Error::InconsistentLabels(format!("line {}: bad probability ({e})", idx + 1))
        })?;
        dist.insert((lm, ln), p);
    }
    Ok(dist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fluctuation::tpm_quasiprob;
    use crate::random::{random_channel, random_density, rng};

    #[test]
    fn qubit_sets_have_eight_elements() {
        let mut r = rng(71);
        let ch = random_channel(2, 2, 2, &mut r);
        let gamma = random_density(2, &mut r);
        let rho = random_density(2, &mut r);
        let fam = RecoveryFamily::new(ch, gamma).unwrap();
        let (first, second) = build_povms(&fam, &rho).unwrap();
        assert_eq!(first.elements().len(), 8);
        assert_eq!(second.elements().len(), 8);
        assert!(first.completeness_defect() < 1e-12);
        assert!(second.completeness_defect() < 1e-12);
    }

    #[test]
    fn distribution_is_normalized_probability() {
        let mut r = rng(72);
        let ch = random_channel(3, 3, 3, &mut r);
        let gamma = random_density(3, &mut r);
        let rho = random_density(3, &mut r);
        let fam = RecoveryFamily::new(ch.clone(), gamma).unwrap();
        let (first, second) = build_povms(&fam, &rho).unwrap();
        let dist = two_point_distribution(&ch, &rho, &first, &second).unwrap();
        let total: f64 = dist.values().sum();
        assert!((total - 1.0).abs() < 1e-9, "total {total}");
        for &p in dist.values() {
            assert!(p > -1e-12);
        }
    }

    #[test]
    fn reconstruction_matches_direct_table() {
        let mut r = rng(73);
        for dim in [2usize, 3] {
            let ch = random_channel(dim, dim, 3, &mut r);
            let gamma = random_density(dim, &mut r);
            let rho = random_density(dim, &mut r);
            let fam = RecoveryFamily::new(ch.clone(), gamma).unwrap();
            let (first, second) = build_povms(&fam, &rho).unwrap();
            let dist = two_point_distribution(&ch, &rho, &first, &second).unwrap();
            let rec = reconstruct_quasiprob(&dist, dim, dim, dim, dim).unwrap();
            let direct = tpm_quasiprob(&fam, &rho).unwrap();
            let err = rec.max_diff(&direct);
            assert!(err < 1e-8, "dim {dim}: reconstruction error {err}");
        }
    }

    #[test]
    fn reconstruction_is_linear_in_the_state() {
        let mut r = rng(74);
        let dim = 2;
        let ch = random_channel(dim, dim, 2, &mut r);
        let gamma = random_density(dim, &mut r);
        let rho_a = random_density(dim, &mut r);
        let rho_b = random_density(dim, &mut r);
        let lambda = 0.3;
        let mix = DensityOperator::sanitize(
            rho_a.matrix().mapv(|z| z * lambda) + rho_b.matrix().mapv(|z| z * (1.0 - lambda)),
            1e-12,
        )
        .unwrap();
        let fam = RecoveryFamily::new(ch.clone(), gamma).unwrap();
        // one fixed measurement family (built from the mixed state) for all three
        let (first, second) = build_povms(&fam, &mix).unwrap();
        let da = two_point_distribution(&ch, &rho_a, &first, &second).unwrap();
        let db = two_point_distribution(&ch, &rho_b, &first, &second).unwrap();
        let dmix = two_point_distribution(&ch, &mix, &first, &second).unwrap();
        let ra = reconstruct_quasiprob(&da, dim, dim, dim, dim).unwrap();
        let rb = reconstruct_quasiprob(&db, dim, dim, dim, dim).unwrap();
        let rmix = reconstruct_quasiprob(&dmix, dim, dim, dim, dim).unwrap();
        for mu in 0..dim {
            for i in 0..dim {
                for j in 0..dim {
                    for nu in 0..dim {
                        for k in 0..dim {
                            for l in 0..dim {
                                let lin = ra.value(mu, i, j, nu, k, l) * lambda
                                    + rb.value(mu, i, j, nu, k, l) * (1.0 - lambda);
                                let got = rmix.value(mu, i, j, nu, k, l);
                                assert!((lin - got).norm() < 1e-9);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn commuting_case_reduces_to_projective_tpm() {
        // diagonal state and diagonal reference: every informative outcome
        // sits in the basis-basis sector and reproduces p_i T(i -> k)
        let mut r = rng(75);
        let ch = random_channel(2, 2, 2, &mut r);
        let gamma = crate::random::random_diagonal_density(2, &mut r);
        let rho = crate::random::random_diagonal_density(2, &mut r);
        let fam = RecoveryFamily::new(ch.clone(), gamma).unwrap();
        let (first, second) = build_povms(&fam, &rho).unwrap();
        let dist = two_point_distribution(&ch, &rho, &first, &second).unwrap();
        let rec = reconstruct_quasiprob(&dist, 2, 2, 2, 2).unwrap();
        let direct = tpm_quasiprob(&fam, &rho).unwrap();
        assert!(rec.max_diff(&direct) < 1e-9);
        // off-diagonal reconstructed entries vanish
        for mu in 0..2 {
            for nu in 0..2 {
                assert!(rec.value(mu, 0, 1, nu, 0, 0).norm() < 1e-9);
                assert!(rec.value(mu, 0, 0, nu, 0, 1).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn label_roundtrip_and_csv() {
        let mut r = rng(76);
        let ch = random_channel(2, 2, 2, &mut r);
        let gamma = random_density(2, &mut r);
        let rho = random_density(2, &mut r);
        let fam = RecoveryFamily::new(ch.clone(), gamma).unwrap();
        let (first, second) = build_povms(&fam, &rho).unwrap();
        let dist = two_point_distribution(&ch, &rho, &first, &second).unwrap();
        let text = distribution_to_csv(&dist);
        let back = distribution_from_csv(&text).unwrap();
        assert_eq!(dist.len(), back.len());
        for (k, v) in &dist {
            assert!((back[k] - v).abs() < 1e-15);
        }
    }

    #[test]
    fn backward_distribution_is_normalized_for_full_rank_states() {
        let mut r = rng(77);
        let ch = random_channel(2, 2, 2, &mut r);
        let gamma = random_density(2, &mut r);
        let rho = random_density(2, &mut r);
        let fam = RecoveryFamily::new(ch, gamma).unwrap();
        let (first, second) = build_povms(&fam, &rho).unwrap();
        let dist = backward_two_point_distribution(&fam, 0.0, &rho, &first, &second).unwrap();
        let total: f64 = dist.values().sum();
        assert!((total - 1.0).abs() < 1e-9, "total {total}");
    }

    #[test]
    fn trivial_one_dimensional_protocol() {
        let fam = RecoveryFamily::new(
            KrausChannel::identity(1),
            DensityOperator::maximally_mixed(1),
        )
        .unwrap();
        let rho = DensityOperator::maximally_mixed(1);
        let (first, second) = build_povms(&fam, &rho).unwrap();
        assert_eq!(first.elements().len(), 1);
        assert_eq!(second.elements().len(), 1);
        assert!(first.completeness_defect() < 1e-14);
    }
}
