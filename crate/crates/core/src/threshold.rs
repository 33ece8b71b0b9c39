//! Information densities of finite classical channel families, the averaging
//! inequality that controls them, Hoeffding tails, and the threshold test set
//! with its projection.

use crate::capacity::classical_mutual_information;
use crate::error::{CqError, Result};
use crate::extreal::ExtReal;
use crate::linalg::{self, CMat};
use crate::operator::{HermitianOperator, Pvm, DEFAULT_AXIS_BUDGET};
use crate::prob::ProbabilityVector;
use crate::universal::RankOneRefinement;
use serde::Serialize;

/// Exact-enumeration cap on |X|^a · |J|^a outcomes.
const ENUMERATION_BUDGET: u128 = 1_000_000;

// ---------------------------------------------------------------------------
// Classical channel families
// ---------------------------------------------------------------------------

/// Weighted family {V_t} of stochastic matrices X → J with a common input
/// distribution r.
#[derive(Debug, Clone)]
pub struct ClassicalFamily {
    input: Vec<f64>,
    members: Vec<Vec<Vec<f64>>>,
    weights: Vec<f64>,
    output_laws: Vec<Vec<f64>>,
}

impl ClassicalFamily {
    pub fn new(input: Vec<f64>, members: Vec<Vec<Vec<f64>>>, weights: Vec<f64>) -> Result<Self> {
        if members.is_empty() {
            return Err(CqError::InvalidParameter("empty family".into()));
        }
        if weights.len() != members.len() {
            return Err(CqError::LabelMismatch(format!(
                "{} weights vs {} members",
                weights.len(),
                members.len()
            )));
        }
        let wsum: f64 = weights.iter().sum();
        if (wsum - 1.0).abs() > 1e-9 || weights.iter().any(|&w| w < 0.0) {
            return Err(CqError::InvalidParameter(
                "weights must be a probability vector".into(),
            ));
        }
        let x = input.len();
        let isum: f64 = input.iter().sum();
        if (isum - 1.0).abs() > 1e-9 || input.iter().any(|&p| p < 0.0) {
            return Err(CqError::InvalidParameter(
                "input must be a probability vector".into(),
            ));
        }
        let j = members[0][0].len();
        for (t, v) in members.iter().enumerate() {
            if v.len() != x {
                return Err(CqError::DimensionMismatch(format!(
                    "member {t} has {} rows, expected {x}",
                    v.len()
                )));
            }
            for (row_idx, row) in v.iter().enumerate() {
                if row.len() != j {
                    return Err(CqError::DimensionMismatch(format!(
                        "member {t}, row {row_idx}: {} columns, expected {j}",
                        row.len()
                    )));
                }
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > 1e-8 || row.iter().any(|&q| q < -1e-12) {
                    return Err(CqError::InvalidParameter(format!(
                        "member {t}, row {row_idx} is not stochastic"
                    )));
                }
            }
        }
        let output_laws = (0..members.len())
            .map(|t| {
                let mut q = vec![0.0; j];
                for (xi, &rx) in input.iter().enumerate() {
                    for (ji, slot) in q.iter_mut().enumerate() {
                        *slot += rx * members[t][xi][ji];
                    }
                }
                q
            })
            .collect();
        Ok(ClassicalFamily {
            input,
            members,
            weights,
            output_laws,
        })
    }

    pub fn uniform(input: Vec<f64>, members: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let t = members.len();
        let weights = vec![1.0 / t as f64; t];
        Self::new(input, members, weights)
    }

    pub fn input(&self) -> &[f64] {
        &self.input
    }

    pub fn members(&self) -> &[Vec<Vec<f64>>] {
        &self.members
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn x_size(&self) -> usize {
        self.input.len()
    }

    pub fn j_size(&self) -> usize {
        self.members[0][0].len()
    }

    pub fn family_size(&self) -> usize {
        self.members.len()
    }

    /// Output law q_t(j) = Σ_x r(x) V_t(j|x).
    pub fn output_law(&self, t: usize) -> &[f64] {
        &self.output_laws[t]
    }

    /// V^a(j^a|x^a) = Σ_t w_t Π_i V_t(j_i|x_i) — the average of the product
    /// extensions, not the product of averages.
    pub fn averaged_block_transition(&self, xs: &[usize], js: &[usize]) -> f64 {
        self.members
            .iter()
            .zip(&self.weights)
            .map(|(v, &w)| {
                w * xs
                    .iter()
                    .zip(js)
                    .map(|(&x, &j)| v[x][j])
                    .product::<f64>()
            })
            .sum()
    }

    /// q^a(j^a) = Σ_t w_t Π_i q_t(j_i).
    pub fn averaged_block_output(&self, js: &[usize]) -> f64 {
        self.output_laws
            .iter()
            .zip(&self.weights)
            .map(|(q, &w)| w * js.iter().map(|&j| q[j]).product::<f64>())
            .sum()
    }

    /// I(r, V_t) in bits, which equals the exact expectation of i_t under
    /// member t's joint law.
    pub fn member_mutual_information(&self, t: usize) -> Result<f64> {
        let labels: Vec<String> = (0..self.x_size()).map(|i| format!("x{i}")).collect();
        let p = ProbabilityVector::new(labels, self.input.clone())?;
        classical_mutual_information(&p, &self.members[t])
    }
}

fn log_ratio(num: f64, den: f64) -> f64 {
    if num <= 0.0 {
        // Zero numerator: −∞ regardless of the reference (0/0 resolves to −∞
        // as well; such outcomes carry no probability mass).
        f64::NEG_INFINITY
    } else if den <= 0.0 {
        f64::INFINITY
    } else {
        (num / den).log2()
    }
}

/// i^a(x^a, j^a) = (1/a)·log V^a(j^a|x^a)/q^a(j^a) for the averaged family.
pub fn information_density(family: &ClassicalFamily, xs: &[usize], js: &[usize]) -> Result<ExtReal> {
    check_pair(family, xs, js)?;
    let a = xs.len() as f64;
    let v = family.averaged_block_transition(xs, js);
    let q = family.averaged_block_output(js);
    Ok(ext_from(log_ratio(v, q) / a))
}

/// i_t^a(x^a, j^a) = (1/a)·log V_t^a(j^a|x^a)/q_t^{⊗a}(j^a) for member t.
pub fn information_density_member(
    family: &ClassicalFamily,
    t: usize,
    xs: &[usize],
    js: &[usize],
) -> Result<ExtReal> {
    check_pair(family, xs, js)?;
    let a = xs.len() as f64;
    let q = family.output_law(t);
    let mut log_sum = 0.0f64;
    for (&x, &j) in xs.iter().zip(js) {
        log_sum += log_ratio(family.members[t][x][j], q[j]);
        if log_sum.is_nan() {
            // (+∞) + (−∞): a zero-numerator letter dominates.
            return Ok(ExtReal::NegInfinity);
        }
    }
    Ok(ext_from(log_sum / a))
}

fn ext_from(v: f64) -> ExtReal {
    if v == f64::INFINITY {
        ExtReal::Infinity
    } else if v == f64::NEG_INFINITY {
        ExtReal::NegInfinity
    } else {
        ExtReal::Finite(v)
    }
}

fn check_pair(family: &ClassicalFamily, xs: &[usize], js: &[usize]) -> Result<()> {
    if xs.len() != js.len() || xs.is_empty() {
        return Err(CqError::InvalidParameter(
            "input and output blocks must have equal positive length".into(),
        ));
    }
    if xs.iter().any(|&x| x >= family.x_size()) || js.iter().any(|&j| j >= family.j_size()) {
        return Err(CqError::UnknownSymbol("block index out of range".into()));
    }
    Ok(())
}

fn enumeration_budget_ok(family: &ClassicalFamily, a: usize) -> Result<()> {
    let outcomes = (family.x_size() as u128)
        .checked_pow(a as u32)
        .and_then(|x| x.checked_mul((family.j_size() as u128).checked_pow(a as u32)?))
        .ok_or_else(|| CqError::BudgetExceeded("outcome count overflow".into()))?;
    if outcomes > ENUMERATION_BUDGET {
        return Err(CqError::BudgetExceeded(format!(
            "(|X|·|J|)^a = {outcomes} outcomes exceed {ENUMERATION_BUDGET}"
        )));
    }
    Ok(())
}

fn multi_indices(base: usize, len: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = base.pow(len as u32);
    (0..total).map(move |mut idx| {
        let mut out = vec![0usize; len];
        for pos in (0..len).rev() {
            out[pos] = idx % base;
            idx /= base;
        }
        out
    })
}

// ---------------------------------------------------------------------------
// Averaging inequality (Blackwell–Breiman–Thomasian form)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct AveragingInequalityCheck {
    pub alpha: f64,
    pub beta: f64,
    /// P(i^a ≤ α) under the averaged joint law.
    pub lhs: f64,
    /// Σ_t w_t P_t(i_t^a ≤ α+β) + |T|·2^{−aβ}.
    pub rhs: f64,
    pub member_tail_probs: Vec<f64>,
    pub holds: bool,
}

/// Exhaustive check of P(i^a ≤ α) ≤ Σ_t w_t P_t(i_t^a ≤ α+β) + |T|2^{−aβ}.
pub fn bbt_inequality_check(
    family: &ClassicalFamily,
    a: usize,
    alpha: f64,
    beta: f64,
) -> Result<AveragingInequalityCheck> {
    enumeration_budget_ok(family, a)?;
    let mut lhs = 0.0f64;
    let mut member_tail_probs = vec![0.0f64; family.family_size()];
    for xs in multi_indices(family.x_size(), a) {
        let r_mass: f64 = xs.iter().map(|&x| family.input[x]).product();
        if r_mass == 0.0 {
            continue;
        }
        for js in multi_indices(family.j_size(), a) {
            let v_avg = family.averaged_block_transition(&xs, &js);
            if v_avg > 0.0 {
                let i_avg = information_density(family, &xs, &js)?;
                if i_avg <= ExtReal::Finite(alpha) {
                    lhs += r_mass * v_avg;
                }
            }
            for t in 0..family.family_size() {
                let v_t: f64 = xs
                    .iter()
                    .zip(&js)
                    .map(|(&x, &j)| family.members[t][x][j])
                    .product();
                if v_t > 0.0 {
                    let i_t = information_density_member(family, t, &xs, &js)?;
                    if i_t <= ExtReal::Finite(alpha + beta) {
                        member_tail_probs[t] += r_mass * v_t;
                    }
                }
            }
        }
    }
    let rhs: f64 = member_tail_probs
        .iter()
        .zip(family.weights())
        .map(|(&p, &w)| w * p)
        .sum::<f64>()
        + family.family_size() as f64 * (-(a as f64) * beta).exp2();
    Ok(AveragingInequalityCheck {
        alpha,
        beta,
        lhs,
        rhs,
        member_tail_probs,
        holds: lhs <= rhs + 1e-12,
    })
}

// ---------------------------------------------------------------------------
// Hoeffding tails
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct HoeffdingCheck {
    /// P(Σ(X_i − E X_i) ≥ aτ), exact or empirical.
    pub tail: f64,
    /// exp(−2a²τ²/Σ(o_i−u_i)²).
    pub bound: f64,
    /// 95% Wilson upper limit when sampled.
    pub wilson_upper: Option<f64>,
    pub holds: bool,
}

/// Law of each independent variable: (value, probability) pairs.
pub enum TailLaw<'a> {
    Exact(&'a [Vec<(f64, f64)>]),
    MonteCarlo {
        laws: &'a [Vec<(f64, f64)>],
        samples: usize,
        seed: u64,
    },
}

pub fn hoeffding_tail_check(
    ranges: &[(f64, f64)],
    tau: f64,
    law: TailLaw<'_>,
) -> Result<HoeffdingCheck> {
    let a = ranges.len();
    if a == 0 {
        return Err(CqError::InvalidParameter("no variables".into()));
    }
    for &(u, o) in ranges {
        if !(o > u) {
            return Err(CqError::InvalidParameter(format!(
                "range [{u}, {o}] is empty"
            )));
        }
    }
    let denom: f64 = ranges.iter().map(|&(u, o)| (o - u) * (o - u)).sum();
    let bound = (-2.0 * (a as f64 * tau) * (a as f64 * tau) / denom).exp();

    match law {
        TailLaw::Exact(laws) => {
            check_laws(laws, ranges)?;
            let total: u128 = laws
                .iter()
                .map(|l| l.len() as u128)
                .try_fold(1u128, |acc, n| acc.checked_mul(n))
                .ok_or_else(|| CqError::BudgetExceeded("law product overflow".into()))?;
            if total > ENUMERATION_BUDGET {
                return Err(CqError::BudgetExceeded(format!(
                    "{total} atoms in the product law"
                )));
            }
            let means: Vec<f64> = laws
                .iter()
                .map(|l| l.iter().map(|&(v, p)| v * p).sum())
                .collect();
            let mut tail = 0.0f64;
            let mut stack: Vec<(usize, f64, f64)> = vec![(0, 0.0, 1.0)];
            while let Some((i, sum, prob)) = stack.pop() {
                if i == a {
                    if sum >= a as f64 * tau - 1e-15 {
                        tail += prob;
                    }
                    continue;
                }
                for &(v, p) in &laws[i] {
                    if p > 0.0 {
                        stack.push((i + 1, sum + v - means[i], prob * p));
                    }
                }
            }
            Ok(HoeffdingCheck {
                tail,
                bound,
                wilson_upper: None,
                holds: tail <= bound + 1e-12,
            })
        }
        TailLaw::MonteCarlo {
            laws,
            samples,
            seed,
        } => {
            check_laws(laws, ranges)?;
            if samples == 0 {
                return Err(CqError::InvalidParameter("samples = 0".into()));
            }
            let means: Vec<f64> = laws
                .iter()
                .map(|l| l.iter().map(|&(v, p)| v * p).sum())
                .collect();
            let mut rng = crate::random::stream(seed, 0);
            use rand::Rng;
            let mut hits = 0usize;
            for _ in 0..samples {
                let mut sum = 0.0;
                for (i, l) in laws.iter().enumerate() {
                    let mut u: f64 = rng.random();
                    let mut value = l[l.len() - 1].0;
                    for &(v, p) in l {
                        if u < p {
                            value = v;
                            break;
                        }
                        u -= p;
                    }
                    sum += value - means[i];
                }
                if sum >= a as f64 * tau - 1e-15 {
                    hits += 1;
                }
            }
            let p_hat = hits as f64 / samples as f64;
            // Wilson interval at z = 1.96.
            let z = 1.959963984540054f64;
            let n = samples as f64;
            let center = (p_hat + z * z / (2.0 * n)) / (1.0 + z * z / n);
            let half = z * ((p_hat * (1.0 - p_hat) + z * z / (4.0 * n)) / n).sqrt()
                / (1.0 + z * z / n);
            let lower = (center - half).max(0.0);
            Ok(HoeffdingCheck {
                tail: p_hat,
                bound,
                wilson_upper: Some((center + half).min(1.0)),
                holds: lower <= bound + 1e-12,
            })
        }
    }
}

fn check_laws(laws: &[Vec<(f64, f64)>], ranges: &[(f64, f64)]) -> Result<()> {
    if laws.len() != ranges.len() {
        return Err(CqError::DimensionMismatch(
            "one law per range required".into(),
        ));
    }
    for (i, (law, &(u, o))) in laws.iter().zip(ranges).enumerate() {
        let total: f64 = law.iter().map(|&(_, p)| p).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(CqError::InvalidParameter(format!(
                "law {i} sums to {total}"
            )));
        }
        for &(v, p) in law {
            if p > 0.0 && (v < u - 1e-12 || v > o + 1e-12) {
                return Err(CqError::InvalidParameter(format!(
                    "law {i} has an atom {v} outside [{u}, {o}]"
                )));
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Threshold test set and its projection
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct ThresholdTestSet {
    pub a: usize,
    pub l: usize,
    pub theta: f64,
    /// I_n = min_t I(r, V_t), bits per l-block.
    pub i_n: f64,
    /// I_n − 2lθ.
    pub threshold: f64,
    /// p'^a mass of the accepted set, exact.
    pub mass_true: f64,
    /// (r^{⊗a} ⊗ q^a) mass of the accepted set, exact.
    pub mass_ref: f64,
    /// 1 − Σ_t w_t·hoeffding_t − |T|·2^{−alθ}, with per-member Hoeffding
    /// widths taken from the realized log-ratio ranges.
    pub mass_true_lower_bound: f64,
    /// 2^{−a(I_n − 2lθ)}.
    pub mass_ref_upper_bound: f64,
    pub member_hoeffding_bounds: Vec<f64>,
    pub member_mutual_informations: Vec<f64>,
}

/// Threshold test X_{a,θ} = {(x^a, j^a) : i^a > I_n − 2lθ} with per-x-word
/// acceptance masks over output multi-indices.
#[derive(Debug, Clone)]
pub struct ThresholdTest {
    pub set: ThresholdTestSet,
    /// accepted[x_rank][j_rank] over X^a × J^a.
    pub accepted: Vec<Vec<bool>>,
}

pub fn threshold_test_projection(
    family: &ClassicalFamily,
    l: usize,
    a: usize,
    theta: f64,
) -> Result<ThresholdTest> {
    if a == 0 {
        return Err(CqError::InvalidParameter("a = 0".into()));
    }
    if !(theta > 0.0) {
        return Err(CqError::InvalidParameter(format!("theta = {theta}")));
    }
    enumeration_budget_ok(family, a)?;

    let member_mutual_informations: Vec<f64> = (0..family.family_size())
        .map(|t| family.member_mutual_information(t))
        .collect::<Result<_>>()?;
    let i_n = member_mutual_informations
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let threshold = i_n - 2.0 * l as f64 * theta;

    let x_size = family.x_size();
    let j_size = family.j_size();
    let x_total = x_size.pow(a as u32);
    let j_total = j_size.pow(a as u32);

    let mut accepted = vec![vec![false; j_total]; x_total];
    let mut mass_true = 0.0f64;
    let mut mass_ref = 0.0f64;
    for (x_rank, xs) in multi_indices(x_size, a).enumerate() {
        let r_mass: f64 = xs.iter().map(|&x| family.input[x]).product();
        for (j_rank, js) in multi_indices(j_size, a).enumerate() {
            let i_avg = information_density(family, &xs, &js)?;
            let inside = i_avg > ExtReal::Finite(threshold);
            accepted[x_rank][j_rank] = inside;
            if inside && r_mass > 0.0 {
                mass_true += r_mass * family.averaged_block_transition(&xs, &js);
                mass_ref += r_mass * family.averaged_block_output(&js);
            }
        }
    }

    // Per-member Hoeffding bound on P_t(i_t ≤ I_n − lθ), with widths from the
    // realized log ratios (a subset of the paper's floor-based range, so the
    // resulting bound is valid and at least as tight).
    let mut member_hoeffding_bounds = Vec::with_capacity(family.family_size());
    for t in 0..family.family_size() {
        let q = family.output_law(t);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for x in 0..x_size {
            if family.input[x] == 0.0 {
                continue;
            }
            for j in 0..j_size {
                let v = family.members[t][x][j];
                if v > 0.0 {
                    let ratio = (v / q[j]).log2();
                    lo = lo.min(ratio);
                    hi = hi.max(ratio);
                }
            }
        }
        let width = (hi - lo).max(0.0);
        let bound = if width == 0.0 {
            0.0
        } else {
            let dev = l as f64 * theta;
            (-2.0 * a as f64 * dev * dev / (width * width)).exp()
        };
        member_hoeffding_bounds.push(bound);
    }
    let hoeffding_total: f64 = member_hoeffding_bounds
        .iter()
        .zip(family.weights())
        .map(|(&b, &w)| w * b)
        .sum();
    let union_term = family.family_size() as f64 * (-(a as f64) * l as f64 * theta).exp2();
    let mass_true_lower_bound = 1.0 - hoeffding_total - union_term;
    let mass_ref_upper_bound = (-(a as f64) * threshold).exp2();

    Ok(ThresholdTest {
        set: ThresholdTestSet {
            a,
            l,
            theta,
            i_n,
            threshold,
            mass_true,
            mass_ref,
            mass_true_lower_bound,
            mass_ref_upper_bound,
            member_hoeffding_bounds,
            member_mutual_informations,
        },
        accepted,
    })
}

impl ThresholdTest {
    pub fn accepts(&self, x_rank: usize, j_rank: usize) -> bool {
        self.accepted[x_rank][j_rank]
    }

    /// Dense orthogonal projection Σ_{(x^a,j^a)∈X} |x^a⟩⟨x^a| ⊗ |e_{x^a,j^a}⟩⟨e_{x^a,j^a}|
    /// on C^{|X|^a} ⊗ (C^{d^l})^{⊗a}, built from a rank-one refinement whose
    /// classical blocks are the l-words.
    pub fn projection(&self, refinement: &RankOneRefinement) -> Result<HermitianOperator> {
        let a = self.set.a;
        let x_words = self.accepted.len();
        let q_letter = refinement.quantum_dim; // d^l per outer letter
        if refinement.classical_count != nth_root(x_words, a) {
            return Err(CqError::DimensionMismatch(format!(
                "refinement has {} classical blocks; expected the a-th root of {x_words}",
                refinement.classical_count
            )));
        }
        let x_letter = refinement.classical_count;
        let q_total = q_letter.pow(a as u32);
        let dim = x_words
            .checked_mul(q_total)
            .filter(|&d| d <= DEFAULT_AXIS_BUDGET)
            .ok_or_else(|| {
                CqError::BudgetExceeded(format!("projection dimension {x_words}·{q_total}"))
            })?;
        let mut mat = CMat::from_element(dim, dim, linalg::czero());
        for (x_rank, row) in self.accepted.iter().enumerate() {
            // outer-letter decomposition of the classical word
            let mut letters = vec![0usize; a];
            let mut rest = x_rank;
            for pos in (0..a).rev() {
                letters[pos] = rest % x_letter;
                rest /= x_letter;
            }
            for (j_rank, &inside) in row.iter().enumerate() {
                if !inside {
                    continue;
                }
                // e_{x^a, j^a} = ⊗_i e_{x_i, j_i}
                let mut jl = vec![0usize; a];
                let mut rest = j_rank;
                for pos in (0..a).rev() {
                    jl[pos] = rest % q_letter;
                    rest /= q_letter;
                }
                let mut vec = linalg::CVec::from_element(1, linalg::cre(1.0));
                for (pos, (&x, &j)) in letters.iter().zip(&jl).enumerate() {
                    let _ = pos;
                    vec = linalg::kron_vec(&vec, &refinement.block(x).vectors[j]);
                }
                let base = x_rank * q_total;
                for i in 0..q_total {
                    for jj in 0..q_total {
                        mat[(base + i, base + jj)] += vec[i] * vec[jj].conj();
                    }
                }
            }
        }
        Ok(HermitianOperator::from_hermitian_parts(mat))
    }

    pub fn to_pvm(&self, refinement: &RankOneRefinement) -> Result<Pvm> {
        Pvm::two_outcome(self.projection(refinement)?)
    }
}

fn nth_root(value: usize, n: usize) -> usize {
    let mut lo = 1usize;
    while lo.pow(n as u32) < value {
        lo += 1;
    }
    lo
}
