//! Converse machinery: the Fano/Holevo rate bound, type partitions for the
//! strong converse, the user-constant single-type bound, and the Markov
//! good-set argument for averaged channels.

use crate::capacity::{classical_mutual_information, holevo_information};
use crate::channel::{AveragedChannelSpec, CompoundSet, CqChannel};
use crate::coding::{individual_errors, Codebook};
use crate::error::{CqError, Result};
use crate::linalg;
use crate::operator::HermitianOperator;
use crate::prob::ProbabilityVector;
use crate::types::{type_counts, TypeClass};
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DuplicatePolicy {
    /// Error out on repeated codewords.
    Reject,
    /// Treat the code message-wise; repeated codewords enter the mean type
    /// with their multiplicity. The information-theoretic chain is unchanged.
    MultiplicityWeighted,
}

#[derive(Debug, Clone, Serialize)]
pub struct FanoHolevoReport {
    /// Average decoding error ε_n.
    pub epsilon: f64,
    /// Mean codeword type p*.
    pub p_star: ProbabilityVector,
    /// χ(p*, W), single letter.
    pub chi: f64,
    /// (1 − ε_n)·log M_n.
    pub lhs: f64,
    /// n·χ(p*, W) + 1.
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
    /// I(ν, K) of the induced classical channel (with a junk outcome
    /// completing the decoder sum when needed).
    pub mutual_information: f64,
    pub had_duplicates: bool,
}

/// Induced classical channel K(j|i) = tr(D_{x^n(i)} b_j), completed with a
/// junk outcome when Σ b_j < 1.
pub fn induced_decoding_channel(code: &Codebook, w: &CqChannel) -> Result<Vec<Vec<f64>>> {
    let m = code.size();
    let dim = code.decoder_dim();
    let mut deficit = linalg::identity(dim);
    for b in &code.decoders {
        deficit -= b.mat();
    }
    let deficit_norm = linalg::eigh(&deficit).values[0].max(0.0);
    let add_junk = deficit_norm > 1e-12;
    let junk = HermitianOperator::from_hermitian_parts(deficit);
    let mut rows = Vec::with_capacity(m);
    for word in &code.codewords {
        let out = w.output_state_budgeted(word, dim.max(1))?;
        let mut row: Vec<f64> = code
            .decoders
            .iter()
            .map(|b| linalg::trace_product_re(out.mat(), b.mat()).max(0.0))
            .collect();
        if add_junk {
            row.push(linalg::trace_product_re(out.mat(), junk.mat()).max(0.0));
        }
        let total: f64 = row.iter().sum();
        for q in &mut row {
            *q /= total;
        }
        rows.push(row);
    }
    Ok(rows)
}

fn mean_codeword_type(code: &Codebook) -> Result<ProbabilityVector> {
    let a = code.alphabet.len();
    let mut acc = vec![0.0f64; a];
    for word in &code.codewords {
        for (x, &c) in type_counts(word, a)?.iter().enumerate() {
            acc[x] += c as f64;
        }
    }
    let total = (code.n * code.size()) as f64;
    ProbabilityVector::new(code.alphabet.clone(), acc.iter().map(|c| c / total).collect())
}

/// (1 − ε_n)·log M_n ≤ n·χ(p*, W) + 1 for a single memoryless channel.
pub fn fano_holevo_bound(
    code: &Codebook,
    w: &CqChannel,
    policy: DuplicatePolicy,
) -> Result<FanoHolevoReport> {
    let mut seen = std::collections::BTreeSet::new();
    let had_duplicates = !code.codewords.iter().all(|w| seen.insert(w.clone()));
    if had_duplicates && policy == DuplicatePolicy::Reject {
        return Err(CqError::InvalidParameter(
            "duplicate codewords (use MultiplicityWeighted to evaluate message-wise)".into(),
        ));
    }
    let errors = individual_errors(code, w)?;
    let epsilon = errors.iter().sum::<f64>() / errors.len() as f64;
    let p_star = mean_codeword_type(code)?;
    let chi = holevo_information(&p_star, w)?;
    let m = code.size() as f64;
    let lhs = (1.0 - epsilon) * m.log2();
    let rhs = code.n as f64 * chi + 1.0;

    let k_rows = induced_decoding_channel(code, w)?;
    let nu = ProbabilityVector::new(
        (0..code.size()).map(|i| format!("m{i}")).collect(),
        vec![1.0 / m; code.size()],
    )?;
    let mutual_information = classical_mutual_information(&nu, &k_rows)?;

    Ok(FanoHolevoReport {
        epsilon,
        p_star,
        chi,
        lhs,
        rhs,
        slack: rhs - lhs,
        holds: lhs <= rhs + 1e-9,
        mutual_information,
        had_duplicates,
    })
}

// ---------------------------------------------------------------------------
// Type partition
// ---------------------------------------------------------------------------

/// Codewords grouped by exact type; at most (n+1)^{|A|} groups.
pub fn type_partition(code: &Codebook) -> Result<BTreeMap<Vec<usize>, Codebook>> {
    let a = code.alphabet.len();
    let mut groups: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for (i, word) in code.codewords.iter().enumerate() {
        groups.entry(type_counts(word, a)?).or_default().push(i);
    }
    let mut out = BTreeMap::new();
    for (counts, indices) in groups {
        let sub = Codebook::new(
            code.n,
            code.alphabet.clone(),
            indices.iter().map(|&i| code.codewords[i].clone()).collect(),
            indices.iter().map(|&i| code.decoders[i].clone()).collect(),
        )?;
        out.insert(counts, sub);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Strong converse plumbing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct TypeGroupBound {
    pub type_class: TypeClass,
    pub size: usize,
    /// inf_t χ(p_j, W_t).
    pub inf_chi: f64,
    /// n·(inf_t χ(p_j, W_t) + k'/√n), bits.
    pub bound_bits: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StrongConverseReport {
    pub k_prime: f64,
    pub groups: Vec<TypeGroupBound>,
    /// |A|·log(n+1) + max_j bound_j.
    pub total_bound_bits: f64,
    pub log_m: f64,
    pub slack: f64,
    pub holds: bool,
    pub group_count_bound: f64,
}

/// log M_n ≤ |A|·log(n+1) + max over type groups of n·(inf_t χ(p_j, W_t) +
/// k'/√n). The constant k' is user-supplied; the partition theorem only
/// proves its existence.
pub fn strong_converse_rate_bound(
    n: usize,
    code: &Codebook,
    set: &CompoundSet,
    k_prime: f64,
) -> Result<StrongConverseReport> {
    if !(k_prime > 0.0) {
        return Err(CqError::InvalidParameter(format!("k_prime = {k_prime}")));
    }
    if code.n != n {
        return Err(CqError::InvalidParameter(format!(
            "code has block length {}, expected {n}",
            code.n
        )));
    }
    let partition = type_partition(code)?;
    let a = code.alphabet.len();
    let mut groups = Vec::new();
    let mut max_bound = f64::NEG_INFINITY;
    for (counts, sub) in &partition {
        let type_class = TypeClass {
            alphabet: code.alphabet.clone(),
            length: n,
            counts: counts.clone(),
        };
        let p = type_class.to_probability_vector()?;
        let inf_chi = set
            .members()
            .iter()
            .map(|w| holevo_information(&p, w))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        let bound_bits = n as f64 * (inf_chi + k_prime / (n as f64).sqrt());
        max_bound = max_bound.max(bound_bits);
        groups.push(TypeGroupBound {
            type_class,
            size: sub.size(),
            inf_chi,
            bound_bits,
        });
    }
    let total_bound_bits = a as f64 * ((n + 1) as f64).log2() + max_bound;
    let log_m = (code.size() as f64).log2();
    Ok(StrongConverseReport {
        k_prime,
        groups,
        total_bound_bits,
        log_m,
        slack: total_bound_bits - log_m,
        holds: log_m <= total_bound_bits + 1e-9,
        group_count_bound: ((n + 1) as f64).powi(a as i32),
    })
}

// ---------------------------------------------------------------------------
// Markov good set and the averaged weak converse
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct MarkovGoodSet {
    /// ε_n = Σ_t μ(t)·e_av(t).
    pub epsilon: f64,
    pub threshold: f64,
    pub good_ids: Vec<String>,
    pub mass: f64,
    /// μ(G_n) ≥ 1 − √ε_n.
    pub holds: bool,
}

/// G_n = {t : e_av(t) ≤ √ε_n} with μ(G_n) ≥ 1 − √ε_n by Markov's inequality.
pub fn markov_good_set(code: &Codebook, spec: &AveragedChannelSpec) -> Result<MarkovGoodSet> {
    let set = spec.compound();
    let per_member_avg: Vec<f64> = set
        .members()
        .iter()
        .map(|w| {
            individual_errors(code, w).map(|errs| errs.iter().sum::<f64>() / errs.len() as f64)
        })
        .collect::<Result<_>>()?;
    let epsilon: f64 = set
        .ids()
        .iter()
        .zip(&per_member_avg)
        .map(|(id, &e)| spec.weights().weight_of(id).unwrap_or(0.0) * e)
        .sum();
    let threshold = epsilon.sqrt();
    let mut good_ids = Vec::new();
    let mut mass = 0.0;
    for (id, &e) in set.ids().iter().zip(&per_member_avg) {
        if e <= threshold + 1e-15 {
            good_ids.push(id.clone());
            mass += spec.weights().weight_of(id).unwrap_or(0.0);
        }
    }
    Ok(MarkovGoodSet {
        epsilon,
        threshold,
        good_ids,
        mass,
        holds: mass >= 1.0 - threshold - 1e-12,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct WeakConverseRow {
    pub n: usize,
    pub m: usize,
    pub epsilon: f64,
    pub sqrt_epsilon: f64,
    /// √ε_n < 1/2 is required for the chain to apply.
    pub applicable: bool,
    pub good_set_mass: f64,
    /// inf over the good set of χ(p*, W_t).
    pub good_inf_chi: f64,
    /// (inf_{G_n} χ(p*, W_t) + 1/n)/(1 − √ε_n).
    pub rate_bound: f64,
    pub rate: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct WeakConverseReport {
    pub rows: Vec<WeakConverseRow>,
    /// max over applicable rows of rate − rate_bound (≤ tolerance when the
    /// chain holds everywhere).
    pub worst_violation: f64,
    pub all_hold: bool,
}

/// Per-n inequality chain of the averaged-channel weak converse: for each
/// code with √ε_n < 1/2,
/// (1/n)·log M_n ≤ (inf_{t∈G_n} χ(p*, W_t) + 1/n)/(1 − √ε_n).
pub fn averaged_weak_converse_check(
    codes: &[Codebook],
    spec: &AveragedChannelSpec,
) -> Result<WeakConverseReport> {
    let mut rows = Vec::with_capacity(codes.len());
    let mut worst = f64::NEG_INFINITY;
    let mut all_hold = true;
    for code in codes {
        let good = markov_good_set(code, spec)?;
        let applicable = good.threshold < 0.5;
        let p_star = mean_codeword_type(code)?;
        let good_inf_chi = if good.good_ids.is_empty() {
            f64::INFINITY
        } else {
            good.good_ids
                .iter()
                .map(|id| {
                    let w = spec
                        .compound()
                        .member_by_id(id)
                        .expect("good ids come from the compound set");
                    holevo_information(&p_star, w)
                })
                .collect::<Result<Vec<f64>>>()?
                .into_iter()
                .fold(f64::INFINITY, f64::min)
        };
        let n = code.n as f64;
        let rate = (code.size() as f64).log2() / n;
        let rate_bound = if applicable {
            (good_inf_chi + 1.0 / n) / (1.0 - good.threshold)
        } else {
            f64::INFINITY
        };
        let holds = !applicable || rate <= rate_bound + 1e-9;
        if applicable {
            worst = worst.max(rate - rate_bound);
        }
        all_hold &= holds;
        rows.push(WeakConverseRow {
            n: code.n,
            m: code.size(),
            epsilon: good.epsilon,
            sqrt_epsilon: good.threshold,
            applicable,
            good_set_mass: good.mass,
            good_inf_chi,
            rate_bound,
            rate,
            holds,
        });
    }
    Ok(WeakConverseReport {
        rows,
        worst_violation: if worst == f64::NEG_INFINITY { 0.0 } else { worst },
        all_hold,
    })
}
