//! Universal hypothesis testing: the type-neighborhood test set, the block
//! schedule, and the two-outcome universal PVM that pinches tensor powers in
//! the reference state's eigenbasis.
//!
//! The test set accepts the sequences whose type lies within ℓ1 distance δ of
//! the composite null Ω. The exponent constant is the Pinsker constant
//! c = 1/(2 ln 2), and the ℓ1 metric defines the δ-neighborhood; both choices
//! are fixed here and used consistently by `schedule`.

use crate::entropy::kl_divergence_slices;
use crate::error::{CqError, Result};
use crate::extreal::ExtReal;
use crate::linalg::{self, xlog2x, CMat, CVec, Eigensystem};
use crate::operator::{DensityOperator, HermitianOperator, Pvm, DEFAULT_AXIS_BUDGET};
use crate::types::{enumerate_type_counts, l1_to_distribution, type_class_mass, type_count};
use serde::Serialize;
use std::collections::BTreeSet;

/// Exponent constant in the first-kind bound of the type test.
pub const LEMMA1_C: f64 = std::f64::consts::LOG2_E / 2.0;

/// Cap on the block-alphabet type enumeration.
const TYPE_ENUMERATION_BUDGET: u128 = 5_000_000;

// ---------------------------------------------------------------------------
// Universal type test (classical)
// ---------------------------------------------------------------------------

/// Type-level descriptor of X_{k,δ} = {x^k : min_{q∈Ω} ‖type(x^k) − q‖₁ ≤ δ},
/// with exact masses and the two exponential bounds.
#[derive(Debug, Clone)]
pub struct UniversalTestSet {
    pub alphabet_size: usize,
    pub k: usize,
    pub delta: f64,
    /// Accepted type count vectors.
    pub accepted: BTreeSet<Vec<usize>>,
    /// Exact q^{⊗k}(X_{k,δ}) per member of Ω.
    pub q_masses: Vec<f64>,
    /// Exact r^{⊗k}(X_{k,δ}).
    pub r_mass: f64,
    /// 1 − (k+1)^{|X|}·2^{−k·c·δ²}.
    pub q_mass_lower_bound: f64,
    /// (k+1)^{|X|}·2^{−k(D(Ω‖r) − η(δ,r))}.
    pub r_mass_upper_bound: f64,
    /// D(Ω‖r) = min_{q∈Ω} D(q‖r).
    pub divergence_to_r: f64,
    /// η(δ,r) = −δ log(δ/|X|) − δ log r_min.
    pub eta: f64,
}

impl UniversalTestSet {
    pub fn contains_type(&self, counts: &[usize]) -> bool {
        self.accepted.contains(counts)
    }

    /// Word-level predicate; words are index sequences of length k.
    pub fn accepts_word(&self, word: &[usize]) -> Result<bool> {
        if word.len() != self.k {
            return Err(CqError::InvalidParameter(format!(
                "word length {} ≠ k = {}",
                word.len(),
                self.k
            )));
        }
        let counts = crate::types::type_counts(word, self.alphabet_size)?;
        Ok(self.contains_type(&counts))
    }
}

/// η(δ,r) with r_min the smallest positive entry of r.
pub fn eta_of(delta: f64, alphabet_size: usize, r_min: f64) -> f64 {
    -delta * (delta / alphabet_size as f64).log2() - delta * r_min.log2()
}

/// Builds X_{k,δ} for the composite null Ω against the reference r by exact
/// type-class enumeration.
pub fn universal_test_set(
    omega: &[Vec<f64>],
    r: &[f64],
    k: usize,
    delta: f64,
) -> Result<UniversalTestSet> {
    if omega.is_empty() {
        return Err(CqError::InvalidParameter("empty null set".into()));
    }
    if !(delta > 0.0) {
        return Err(CqError::InvalidParameter(format!("delta = {delta}")));
    }
    if k == 0 {
        return Err(CqError::InvalidParameter("k = 0".into()));
    }
    let x = r.len();
    if r.iter().any(|&ri| ri <= 0.0) {
        return Err(CqError::InvalidParameter(
            "reference distribution must be strictly positive".into(),
        ));
    }
    for q in omega {
        if q.len() != x {
            return Err(CqError::DimensionMismatch(
                "null member and reference have different alphabets".into(),
            ));
        }
    }
    if type_count(x, k) > TYPE_ENUMERATION_BUDGET {
        return Err(CqError::BudgetExceeded(format!(
            "{} types for |X| = {x}, k = {k}",
            type_count(x, k)
        )));
    }

    let mut accepted = BTreeSet::new();
    let mut q_masses = vec![0.0f64; omega.len()];
    let mut r_mass = 0.0f64;
    for counts in enumerate_type_counts(x, k) {
        let dist_ok = omega
            .iter()
            .any(|q| l1_to_distribution(&counts, k, q) <= delta);
        if dist_ok {
            for (i, q) in omega.iter().enumerate() {
                q_masses[i] += type_class_mass(&counts, q);
            }
            r_mass += type_class_mass(&counts, r);
            accepted.insert(counts);
        }
    }

    let types_bound = ((k + 1) as f64).powi(x as i32);
    let q_mass_lower_bound = 1.0 - types_bound * (-(k as f64) * LEMMA1_C * delta * delta).exp2();
    let divergence_to_r = omega
        .iter()
        .map(|q| {
            kl_divergence_slices(q, r).expect_finite("r strictly positive dominates every q")
        })
        .fold(f64::INFINITY, f64::min);
    let r_min = r.iter().copied().fold(f64::INFINITY, f64::min);
    let eta = eta_of(delta, x, r_min);
    let r_mass_upper_bound = types_bound * (-(k as f64) * (divergence_to_r - eta)).exp2();

    Ok(UniversalTestSet {
        alphabet_size: x,
        k,
        delta,
        accepted,
        q_masses,
        r_mass,
        q_mass_lower_bound,
        r_mass_upper_bound,
        divergence_to_r,
        eta,
    })
}

// ---------------------------------------------------------------------------
// Block schedule
// ---------------------------------------------------------------------------

/// Block parameters and error terms for length-l universal pinching.
///
/// `tau1` is the raw first-kind bound (k+1)^{d^m}·2^{−kcδ²}; it exceeds 1 at
/// small l, where the bound is vacuous. `zeta` therefore uses tau1 clamped to
/// [0, 1] — a probability defect larger than one carries no information, and
/// the unclamped formula would make the finite-l relative-entropy bound
/// unsatisfiable. For l large enough that tau1 < 1 the two agree.
#[derive(Debug, Clone, Serialize)]
pub struct UniversalSchedule {
    pub l: usize,
    pub m: usize,
    pub k: usize,
    pub y: usize,
    pub delta: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub eta: f64,
    pub zeta: f64,
    pub c: f64,
    pub sigma_min_eig: f64,
    pub dim: usize,
}

impl UniversalSchedule {
    pub fn tau1_clamped(&self) -> f64 {
        self.tau1.min(1.0)
    }
}

/// m = max(1, ⌈log_d(l^{1/8})⌉) by integer arithmetic: the smallest m ≥ 1
/// with d^{8m} ≥ l.
fn inner_block_length(l: usize, d: usize) -> usize {
    let mut m = 1usize;
    loop {
        let mut pow: u128 = 1;
        let mut reached = false;
        for _ in 0..8 * m {
            pow = pow.saturating_mul(d as u128);
            if pow >= l as u128 {
                reached = true;
                break;
            }
        }
        if reached {
            return m;
        }
        m += 1;
    }
}

pub fn schedule(l: usize, sigma_min_eig: f64, d: usize) -> Result<UniversalSchedule> {
    if l < 2 {
        return Err(CqError::InvalidParameter(format!("l = {l} < 2")));
    }
    if d < 2 {
        return Err(CqError::InvalidParameter(format!("dim = {d} < 2")));
    }
    if !(sigma_min_eig > 0.0) {
        return Err(CqError::InvalidState(format!(
            "sigma minimum eigenvalue {sigma_min_eig} is not positive"
        )));
    }
    let m = inner_block_length(l, d);
    let y = l % m;
    let k = (l - y) / m;
    let delta = (l as f64).powf(-0.25);
    let dm = (d as f64).powi(m as i32);
    // log-domain to survive large (k+1)^{d^m}
    let log2_tau1 = dm * ((k + 1) as f64).log2() - k as f64 * LEMMA1_C * delta * delta;
    let tau1 = log2_tau1.exp2();
    let eta = -delta * (delta / d as f64).log2() - delta * sigma_min_eig.log2();
    let tau2 = d as f64 * ((m + 1) as f64).log2() / m as f64
        + (dm * dm + dm) * ((k + 1) as f64).log2() / (k as f64 * m as f64)
        + eta;
    let t1 = tau1.min(1.0);
    let zeta = (1.0 - t1) * tau2 - t1 * sigma_min_eig.log2() + 1.0 / l as f64;
    Ok(UniversalSchedule {
        l,
        m,
        k,
        y,
        delta,
        tau1,
        tau2,
        eta,
        zeta,
        c: LEMMA1_C,
        sigma_min_eig,
        dim: d,
    })
}

// ---------------------------------------------------------------------------
// Universal PVM
// ---------------------------------------------------------------------------

/// Two-outcome universal PVM {P_l, 1−P_l} on H^{⊗l}, kept in structured form:
/// the eigenbasis of σ plus the accepted block types. `to_pvm` materializes
/// the dense projector when the dimension budget allows.
#[derive(Debug, Clone)]
pub struct UniversalPvm {
    pub schedule: UniversalSchedule,
    pub base_dim: usize,
    pub l: usize,
    /// Type test over the block alphabet [d^m] of eigenindex m-blocks.
    pub test: UniversalTestSet,
    /// tr(ρ^{⊗l} P_l) per member of Ω, exact.
    pub first_kind: Vec<f64>,
    /// tr(σ^{⊗l} P_l), exact.
    pub second_kind: f64,
    /// min over Ω of S(ρ‖σ).
    pub s_omega_sigma: f64,
    /// Eigenbasis of σ (letter level); blocks use m-fold products of it.
    pub sigma_eigen: Eigensystem,
    /// Per-letter pinched distributions ⟨u_j|ρ|u_j⟩ of the members.
    pub letter_pinches: Vec<Vec<f64>>,
}

/// ⟨u_j|ρ|u_j⟩ over the eigenbasis columns, clamped to ≥ 0.
pub fn pinched_distribution(rho: &DensityOperator, basis: &Eigensystem) -> Vec<f64> {
    (0..basis.dim())
        .map(|j| linalg::quadratic_form_re(rho.mat(), &basis.vector(j)).max(0.0))
        .collect()
}

fn block_distribution(letter: &[f64], m: usize) -> Vec<f64> {
    let d = letter.len();
    let size = d.pow(m as u32);
    let mut out = vec![1.0; size];
    for (idx, slot) in out.iter_mut().enumerate() {
        let mut rest = idx;
        let mut prod = 1.0;
        for _ in 0..m {
            prod *= letter[rest % d];
            rest /= d;
        }
        *slot = prod;
    }
    out
}

pub fn universal_pvm(
    omega: &[DensityOperator],
    sigma: &DensityOperator,
    l: usize,
) -> Result<UniversalPvm> {
    if omega.is_empty() {
        return Err(CqError::InvalidParameter("empty null set".into()));
    }
    let d = sigma.dim();
    for rho in omega {
        if rho.dim() != d {
            return Err(CqError::DimensionMismatch(
                "null member and reference have different dimensions".into(),
            ));
        }
    }
    let eigen = sigma.eigensystem().clone();
    let min_eig = eigen.min_value();
    if min_eig <= 1e-12 {
        return Err(CqError::InvalidState(format!(
            "sigma is not invertible: min eigenvalue {min_eig:.3e}"
        )));
    }
    let sched = schedule(l, min_eig, d)?;
    let block_alphabet = d
        .checked_pow(sched.m as u32)
        .filter(|&b| b <= DEFAULT_AXIS_BUDGET)
        .ok_or_else(|| {
            CqError::BudgetExceeded(format!("block alphabet d^m = {d}^{}", sched.m))
        })?;

    let letter_pinches: Vec<Vec<f64>> = omega
        .iter()
        .map(|rho| pinched_distribution(rho, &eigen))
        .collect();
    let omega_blocks: Vec<Vec<f64>> = letter_pinches
        .iter()
        .map(|p| block_distribution(p, sched.m))
        .collect();
    let r_block = block_distribution(&eigen.values, sched.m);
    debug_assert_eq!(r_block.len(), block_alphabet);

    let test = universal_test_set(&omega_blocks, &r_block, sched.k, sched.delta)?;
    let first_kind = test.q_masses.clone();
    let second_kind = test.r_mass;

    let s_omega_sigma = omega
        .iter()
        .map(|rho| {
            crate::entropy::quantum_relative_entropy(rho, sigma)
                .map(|v| v.expect_finite("sigma invertible"))
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);

    Ok(UniversalPvm {
        schedule: sched,
        base_dim: d,
        l,
        test,
        first_kind,
        second_kind,
        s_omega_sigma,
        sigma_eigen: eigen,
        letter_pinches,
    })
}

impl UniversalPvm {
    /// S_{M_l}(ρ^{⊗l}‖σ^{⊗l}) of member `i` from the two-outcome statistics.
    pub fn measured_relative_entropy(&self, i: usize) -> ExtReal {
        let a = self.first_kind[i].clamp(0.0, 1.0);
        let b = self.second_kind.clamp(0.0, 1.0);
        kl_divergence_slices(&[a, 1.0 - a], &[b, 1.0 - b])
    }

    /// Indicator over the σ^{⊗l}-eigenproduct basis: index runs through the
    /// base-d digits (j_1, …, j_l), most significant first.
    pub fn accepts_eigenindex(&self, idx: usize) -> bool {
        let d = self.base_dim;
        let m = self.schedule.m;
        let k = self.schedule.k;
        // digits, most significant first
        let mut digits = vec![0usize; self.l];
        let mut rest = idx;
        for pos in (0..self.l).rev() {
            digits[pos] = rest % d;
            rest /= d;
        }
        let mut counts = vec![0usize; self.test.alphabet_size];
        for block in 0..k {
            let mut value = 0usize;
            for i in 0..m {
                value = value * d + digits[block * m + i];
            }
            counts[value] += 1;
        }
        self.test.contains_type(&counts)
    }

    /// Dense two-outcome PVM {P_l, 1 − P_l} on H^{⊗l}.
    pub fn to_pvm(&self) -> Result<Pvm> {
        let d = self.base_dim;
        let mut total = 1usize;
        for _ in 0..self.l {
            total = total
                .checked_mul(d)
                .filter(|&t| t <= DEFAULT_AXIS_BUDGET)
                .ok_or_else(|| {
                    CqError::BudgetExceeded(format!("d^l = {d}^{} for dense PVM", self.l))
                })?;
        }
        // U^{⊗l} diag(indicator) U^{⊗l}†
        let mut u_l = CMat::identity(1, 1);
        for _ in 0..self.l {
            u_l = linalg::kron(&u_l, &self.sigma_eigen.vectors);
        }
        let mut p = CMat::from_element(total, total, linalg::czero());
        for idx in 0..total {
            if !self.accepts_eigenindex(idx) {
                continue;
            }
            let col = u_l.column(idx);
            for i in 0..total {
                for j in 0..total {
                    p[(i, j)] += col[i] * col[j].conj();
                }
            }
        }
        Pvm::two_outcome(HermitianOperator::from_hermitian_parts(p))
    }
}

// ---------------------------------------------------------------------------
// Nagaoka chain bound
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct NagaokaChainBound {
    /// S_M of the two-outcome statistics of (ρ^{⊗l}, σ^{⊗l}).
    pub s_m: ExtReal,
    /// s_target·tr(ρ^{⊗l}P) − (1 + H₂(tr ρ^{⊗l}P))/l.
    pub lower: f64,
    pub rho_mass: f64,
    pub sigma_mass: f64,
    /// s_m/l − lower (+∞ collapses to f64::INFINITY).
    pub slack: f64,
}

/// Two-outcome chain bound: (1/l)·S_M ≥ s_target·tr(ρ^{⊗l}P) − (1 + H₂)/l,
/// valid whenever s_target ≤ −(1/l)·log tr(σ^{⊗l}P).
pub fn nagaoka_chain_bound(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    l: usize,
    m: &Pvm,
    s_target: f64,
) -> Result<NagaokaChainBound> {
    if m.len() != 2 {
        return Err(CqError::InvalidMeasurement(format!(
            "chain bound expects a two-outcome PVM, got {} outcomes",
            m.len()
        )));
    }
    let rho_l = rho.tensor_power(l, DEFAULT_AXIS_BUDGET)?;
    let sigma_l = sigma.tensor_power(l, DEFAULT_AXIS_BUDGET)?;
    let a = m.outcome_distribution(&rho_l)?[0].clamp(0.0, 1.0);
    let b = m.outcome_distribution(&sigma_l)?[0].clamp(0.0, 1.0);
    let s_m = kl_divergence_slices(&[a, 1.0 - a], &[b, 1.0 - b]);
    let h2 = -(xlog2x(a) + xlog2x(1.0 - a));
    let lower = s_target * a - (1.0 + h2) / l as f64;
    let slack = match s_m {
        ExtReal::Finite(v) => v / l as f64 - lower,
        _ => f64::INFINITY,
    };
    if slack < -1e-9 {
        return Err(CqError::contract(
            "nagaoka_chain_bound",
            format!("S_M/l fell below the chain bound by {slack:.3e}; s_target invalid?"),
        ));
    }
    Ok(NagaokaChainBound {
        s_m,
        lower,
        rho_mass: a,
        sigma_mass: b,
        slack,
    })
}

// ---------------------------------------------------------------------------
// Rank-one refinement of block-diagonal two-outcome PVMs
// ---------------------------------------------------------------------------

/// Rank-one refinement {|x⟩⟨x| ⊗ |e_{x,j}⟩⟨e_{x,j}|} of a two-outcome PVM
/// whose first outcome is block diagonal over the classical register.
#[derive(Debug, Clone)]
pub struct RankOneRefinement {
    pub classical_count: usize,
    pub quantum_dim: usize,
    /// Per classical block: d orthonormal vectors and their outcome flags.
    blocks: Vec<RefinedBlock>,
}

#[derive(Debug, Clone)]
pub struct RefinedBlock {
    pub vectors: Vec<CVec>,
    /// true ⇔ the vector belongs to the first outcome's range.
    pub outcome_one: Vec<bool>,
}

impl RankOneRefinement {
    pub fn block(&self, x: usize) -> &RefinedBlock {
        &self.blocks[x]
    }

    /// Builds a refinement with one shared orthonormal basis across all
    /// classical blocks and per-block acceptance masks.
    pub fn from_shared_basis(
        classical_count: usize,
        basis: Vec<CVec>,
        masks: Vec<Vec<bool>>,
    ) -> Result<Self> {
        if masks.len() != classical_count {
            return Err(CqError::InvalidParameter(
                "one acceptance mask per classical block required".into(),
            ));
        }
        let q = basis.len();
        for mask in &masks {
            if mask.len() != q {
                return Err(CqError::InvalidParameter(
                    "mask length must match the basis size".into(),
                ));
            }
        }
        let blocks = masks
            .into_iter()
            .map(|mask| RefinedBlock {
                vectors: basis.clone(),
                outcome_one: mask,
            })
            .collect();
        Ok(RankOneRefinement {
            classical_count,
            quantum_dim: q,
            blocks,
        })
    }

    /// Dense rank-one PVM with elements ordered by (block, basis index).
    pub fn to_pvm(&self) -> Result<Pvm> {
        let dim = self.classical_count * self.quantum_dim;
        if dim > DEFAULT_AXIS_BUDGET {
            return Err(CqError::BudgetExceeded(format!(
                "rank-one refinement dimension {dim}"
            )));
        }
        let mut elements = Vec::with_capacity(dim);
        for (x, block) in self.blocks.iter().enumerate() {
            for v in &block.vectors {
                let mut mat = CMat::from_element(dim, dim, linalg::czero());
                let q = self.quantum_dim;
                for i in 0..q {
                    for j in 0..q {
                        mat[(x * q + i, x * q + j)] = v[i] * v[j].conj();
                    }
                }
                elements.push(HermitianOperator::from_hermitian_parts(mat));
            }
        }
        Pvm::new(elements)
    }

    /// Sum of the first-outcome rank-one elements; must reproduce the coarse
    /// PVM's first outcome entrywise.
    pub fn coarse_grained_first_outcome(&self) -> HermitianOperator {
        let dim = self.classical_count * self.quantum_dim;
        let q = self.quantum_dim;
        let mut mat = CMat::from_element(dim, dim, linalg::czero());
        for (x, block) in self.blocks.iter().enumerate() {
            for (v, &keep) in block.vectors.iter().zip(&block.outcome_one) {
                if !keep {
                    continue;
                }
                for i in 0..q {
                    for j in 0..q {
                        mat[(x * q + i, x * q + j)] += v[i] * v[j].conj();
                    }
                }
            }
        }
        HermitianOperator::from_hermitian_parts(mat)
    }
}

/// Refines a two-outcome block-diagonal PVM (first outcome given, classical-
/// major layout) into rank-one projections by diagonalizing each block.
pub fn refine_to_rank_one(
    first_outcome: &HermitianOperator,
    classical_count: usize,
) -> Result<RankOneRefinement> {
    let dim = first_outcome.dim();
    if classical_count == 0 || dim % classical_count != 0 {
        return Err(CqError::InvalidParameter(format!(
            "dimension {dim} is not divisible into {classical_count} classical blocks"
        )));
    }
    let q = dim / classical_count;
    let mat = first_outcome.mat();
    // Off-block mass must vanish.
    let mut off = 0.0f64;
    for i in 0..dim {
        for j in 0..dim {
            if i / q != j / q {
                off = off.max(mat[(i, j)].norm());
            }
        }
    }
    if off > 1e-10 {
        return Err(CqError::NonBlockDiagonal(format!(
            "off-block magnitude {off:.3e}"
        )));
    }
    let mut blocks = Vec::with_capacity(classical_count);
    for x in 0..classical_count {
        let mut sub = CMat::from_element(q, q, linalg::czero());
        for i in 0..q {
            for j in 0..q {
                sub[(i, j)] = mat[(x * q + i, x * q + j)];
            }
        }
        let eig = linalg::eigh(&sub);
        let mut vectors = Vec::with_capacity(q);
        let mut outcome_one = Vec::with_capacity(q);
        for kk in 0..q {
            let lam = eig.values[kk];
            if (lam - 1.0).abs() > 1e-6 && lam.abs() > 1e-6 {
                return Err(CqError::InvalidMeasurement(format!(
                    "block {x} is not a projector: eigenvalue {lam}"
                )));
            }
            vectors.push(eig.vector(kk));
            outcome_one.push(lam > 0.5);
        }
        blocks.push(RefinedBlock {
            vectors,
            outcome_one,
        });
    }
    Ok(RankOneRefinement {
        classical_count,
        quantum_dim: q,
        blocks,
    })
}

/// Reorders an operator on (C^a ⊗ C^d)^{⊗l} from per-letter interleaved
/// indexing to classical-major indexing on C^{a^l} ⊗ C^{d^l}.
pub fn interleaved_to_classical_major(
    op: &HermitianOperator,
    a: usize,
    d: usize,
    l: usize,
) -> Result<HermitianOperator> {
    let dim = (a * d).pow(l as u32);
    if op.dim() != dim {
        return Err(CqError::DimensionMismatch(format!(
            "operator dim {} vs (a·d)^l = {dim}",
            op.dim()
        )));
    }
    let d_l = d.pow(l as u32);
    // interleaved index -> (classical word rank, quantum rank)
    let remap = |idx: usize| -> usize {
        let mut xs = 0usize;
        let mut js = 0usize;
        let mut rest = idx;
        let mut letters = vec![0usize; l];
        for pos in (0..l).rev() {
            letters[pos] = rest % (a * d);
            rest /= a * d;
        }
        for &letter in &letters {
            xs = xs * a + letter / d;
            js = js * d + letter % d;
        }
        xs * d_l + js
    };
    let m = op.mat();
    let mut out = CMat::from_element(dim, dim, linalg::czero());
    for i in 0..dim {
        let ri = remap(i);
        for j in 0..dim {
            out[(ri, remap(j))] = m[(i, j)];
        }
    }
    Ok(HermitianOperator::from_hermitian_parts(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::cre;
    use crate::random;

    #[test]
    fn test_set_trivial_full_ball() {
        // delta ≥ 2 accepts every type, so all masses are 1.
        let omega = vec![vec![0.9, 0.1]];
        let r = vec![0.5, 0.5];
        let t = universal_test_set(&omega, &r, 10, 2.0).unwrap();
        assert!((t.q_masses[0] - 1.0).abs() < 1e-12);
        assert!((t.r_mass - 1.0).abs() < 1e-12);
        assert!(t.r_mass <= t.r_mass_upper_bound + 1e-12);
    }

    #[test]
    fn test_set_bounds_by_word_enumeration() {
        // Independent oracle: enumerate all binary words of length k.
        let omega = vec![vec![0.9, 0.1]];
        let r = vec![0.5, 0.5];
        let k = 10;
        let delta = 0.2;
        let t = universal_test_set(&omega, &r, k, delta).unwrap();

        let mut q_mass = 0.0;
        let mut r_mass = 0.0;
        for w in 0..(1u32 << k) {
            let word: Vec<usize> = (0..k).map(|b| ((w >> b) & 1) as usize).collect();
            if t.accepts_word(&word).unwrap() {
                let ones = word.iter().sum::<usize>() as i32;
                q_mass += 0.1f64.powi(ones) * 0.9f64.powi(k as i32 - ones);
                r_mass += 0.5f64.powi(k as i32);
            }
        }
        assert!((t.q_masses[0] - q_mass).abs() < 1e-12);
        assert!((t.r_mass - r_mass).abs() < 1e-12);
        // Both exponential bounds hold.
        assert!(t.q_masses[0] >= t.q_mass_lower_bound - 1e-12);
        assert!(t.r_mass <= t.r_mass_upper_bound + 1e-12);
    }

    #[test]
    fn test_set_omega_equals_r() {
        let r = vec![0.5, 0.5];
        let t = universal_test_set(&[r.clone()], &r, 10, 0.3).unwrap();
        assert!(t.q_masses[0] >= t.q_mass_lower_bound - 1e-12);
        assert!(t.divergence_to_r.abs() < 1e-12);
        assert!(t.r_mass <= t.r_mass_upper_bound + 1e-12);
    }

    #[test]
    fn test_set_rejects_bad_inputs() {
        let r_zero = vec![1.0, 0.0];
        assert!(universal_test_set(&[vec![0.5, 0.5]], &r_zero, 5, 0.1).is_err());
        let r = vec![0.5, 0.5];
        assert!(universal_test_set(&[vec![0.5, 0.5]], &r, 5, 0.0).is_err());
    }

    #[test]
    fn schedule_examples() {
        let s = schedule(4, 0.5, 2).unwrap();
        assert_eq!((s.m, s.k, s.y), (1, 4, 0));
        assert!((s.delta - 4f64.powf(-0.25)).abs() < 1e-15);
        // m = 1 forces y = 0, k = l.
        let s = schedule(7, 0.3, 2).unwrap();
        assert_eq!((s.m, s.k, s.y), (1, 7, 0));
        // m crosses to 2 only past d^8.
        let s = schedule(257, 0.3, 2).unwrap();
        assert_eq!(s.m, 2);
        assert_eq!(s.k, 128);
        assert_eq!(s.y, 1);
        assert_eq!(s.k * s.m + s.y, 257);
    }

    #[test]
    fn schedule_zeta_decreases() {
        let big = schedule(10_000, 0.1, 2).unwrap();
        let small = schedule(100, 0.1, 2).unwrap();
        assert!(big.zeta < small.zeta);
    }

    #[test]
    fn schedule_rejects_degenerate_sigma() {
        assert!(schedule(8, 0.0, 2).is_err());
        assert!(schedule(8, -0.1, 2).is_err());
    }

    #[test]
    fn universal_pvm_self_test() {
        // Ω = {σ}: the r-mass bound degenerates to S(Ω‖σ) = 0.
        let sigma = DensityOperator::from_real_diagonal(&[0.6, 0.4]).unwrap();
        let u = universal_pvm(std::slice::from_ref(&sigma), &sigma, 8).unwrap();
        assert!(u.first_kind[0] >= 1.0 - u.schedule.tau1_clamped() - 1e-12);
        assert!(u.s_omega_sigma.abs() < 1e-10);
        // Finite-l conclusion with ζ from the schedule.
        let s_m = u.measured_relative_entropy(0);
        let bound = u.s_omega_sigma - u.schedule.zeta;
        assert!(s_m.expect_finite("finite") / 8.0 >= bound - 1e-9);
    }

    #[test]
    fn universal_pvm_matches_classical_reduction() {
        // Commuting pair: masses equal exhaustive classical enumeration.
        let rho = DensityOperator::from_real_diagonal(&[0.9, 0.1]).unwrap();
        let sigma = DensityOperator::from_real_diagonal(&[0.5, 0.5]).unwrap();
        let l = 8;
        let u = universal_pvm(std::slice::from_ref(&rho), &sigma, l).unwrap();

        // The canonical eigenbasis of diag(0.5, 0.5) may permute the
        // computational basis; use the pinched distribution it actually used.
        let pinch = &u.letter_pinches[0];
        let mut rho_mass = 0.0;
        let mut sigma_mass = 0.0;
        for w in 0..(1usize << l) {
            let word: Vec<usize> = (0..l).map(|b| (w >> b) & 1).collect();
            if u.test.accepts_word(&word).unwrap() {
                let ones = word.iter().sum::<usize>();
                rho_mass += pinch[1].powi(ones as i32) * pinch[0].powi((l - ones) as i32);
                sigma_mass += 0.5f64.powi(l as i32);
            }
        }
        assert!((u.first_kind[0] - rho_mass).abs() < 1e-12);
        assert!((u.second_kind - sigma_mass).abs() < 1e-12);
    }

    #[test]
    fn universal_pvm_two_member_commuting() {
        let a = DensityOperator::from_real_diagonal(&[0.85, 0.15]).unwrap();
        let b = DensityOperator::from_real_diagonal(&[0.2, 0.8]).unwrap();
        let sigma = DensityOperator::from_real_diagonal(&[0.5, 0.5]).unwrap();
        let u = universal_pvm(&[a, b], &sigma, 8).unwrap();
        let t1 = u.schedule.tau1_clamped();
        for &mass in &u.first_kind {
            assert!(mass >= 1.0 - t1 - 1e-12);
        }
        // Second kind obeys the τ₂ exponent bound.
        let bound = (-(u.l as f64) * (u.s_omega_sigma - u.schedule.tau2)).exp2();
        assert!(u.second_kind <= bound.min(1.0) + 1e-12);
    }

    #[test]
    fn universal_pvm_dense_matches_structured_masses() {
        let mut rng = random::stream(91, 0);
        let rho = random::random_density(2, &mut rng);
        let sigma = random::random_density(2, &mut rng);
        let l = 4;
        let u = universal_pvm(std::slice::from_ref(&rho), &sigma, l).unwrap();
        let pvm = u.to_pvm().unwrap();
        let rho_l = rho.tensor_power(l, DEFAULT_AXIS_BUDGET).unwrap();
        let sigma_l = sigma.tensor_power(l, DEFAULT_AXIS_BUDGET).unwrap();
        let pr = pvm.outcome_distribution(&rho_l).unwrap();
        let ps = pvm.outcome_distribution(&sigma_l).unwrap();
        assert!((pr[0] - u.first_kind[0]).abs() < 1e-10);
        assert!((ps[0] - u.second_kind).abs() < 1e-10);
        assert!(pvm.is_projective(&crate::operator::Numerics::default()));
    }

    #[test]
    fn universal_pvm_rejects_singular_sigma() {
        let sigma = DensityOperator::basis_state(2, 0);
        let rho = DensityOperator::maximally_mixed(2);
        assert!(universal_pvm(&[rho], &sigma, 4).is_err());
    }

    #[test]
    fn nagaoka_chain_trivial_and_classical() {
        let rho = DensityOperator::from_real_diagonal(&[0.9, 0.1]).unwrap();
        let sigma = DensityOperator::from_real_diagonal(&[0.5, 0.5]).unwrap();
        let l = 4;
        // P = identity outcome only: S_M = 0, lower ≤ 0.
        let full = Pvm::two_outcome(HermitianOperator::identity(16)).unwrap();
        let nb = nagaoka_chain_bound(&rho, &sigma, l, &full, 0.0).unwrap();
        assert_eq!(nb.s_m, ExtReal::Finite(0.0));
        assert!(nb.lower <= 0.0);

        // Constructed test at a valid target exponent.
        let u = universal_pvm(std::slice::from_ref(&rho), &sigma, l).unwrap();
        let pvm = u.to_pvm().unwrap();
        let target = -(u.second_kind.log2()) / l as f64;
        let nb = nagaoka_chain_bound(&rho, &sigma, l, &pvm, target).unwrap();
        assert!(nb.slack >= -1e-9);

        // Ω = {σ}: lower ≤ 0 ≤ S_M.
        let u = universal_pvm(std::slice::from_ref(&sigma), &sigma, l).unwrap();
        let pvm = u.to_pvm().unwrap();
        let nb = nagaoka_chain_bound(&sigma, &sigma, l, &pvm, 0.0).unwrap();
        assert!(nb.lower <= 0.0);
        assert!(nb.s_m >= ExtReal::Finite(0.0));
    }

    #[test]
    fn refinement_reproduces_block_projector() {
        // Block projector at classical count 2, quantum dim 2: blocks
        // {|0⟩⟨0|, 1}.
        let mut mat = CMat::from_element(4, 4, linalg::czero());
        mat[(0, 0)] = cre(1.0);
        mat[(2, 2)] = cre(1.0);
        mat[(3, 3)] = cre(1.0);
        let p1 = HermitianOperator::new(mat).unwrap();
        let refinement = refine_to_rank_one(&p1, 2).unwrap();
        let coarse = refinement.coarse_grained_first_outcome();
        assert!(coarse.max_abs_diff(&p1) < 1e-10);
        let pvm = refinement.to_pvm().unwrap();
        assert_eq!(pvm.len(), 4);
        assert!(pvm.is_projective(&crate::operator::Numerics::default()));
    }

    #[test]
    fn refinement_counts_elements() {
        // d = 2, l = 2 block structure: |A|²·4 elements.
        let a = 2usize;
        let d_l = 4usize;
        let blocks = a * a;
        let mut mat = CMat::from_element(blocks * d_l, blocks * d_l, linalg::czero());
        for x in 0..blocks {
            // block projector of rank 2
            mat[(x * d_l, x * d_l)] = cre(1.0);
            mat[(x * d_l + 3, x * d_l + 3)] = cre(1.0);
        }
        let refinement = refine_to_rank_one(&HermitianOperator::new(mat).unwrap(), blocks).unwrap();
        assert_eq!(refinement.to_pvm().unwrap().len(), blocks * d_l);
    }

    #[test]
    fn refinement_rejects_non_block_input() {
        let mut mat = CMat::from_element(4, 4, linalg::czero());
        mat[(0, 2)] = cre(0.5);
        mat[(2, 0)] = cre(0.5);
        mat[(0, 0)] = cre(0.5);
        mat[(2, 2)] = cre(0.5);
        let op = HermitianOperator::new(mat).unwrap();
        assert!(matches!(
            refine_to_rank_one(&op, 2),
            Err(CqError::NonBlockDiagonal(_))
        ));
    }

    #[test]
    fn refinement_increases_measured_relative_entropy() {
        use crate::entropy::measured_relative_entropy;
        let rho = DensityOperator::from_real_diagonal(&[0.4, 0.3, 0.2, 0.1]).unwrap();
        let sig = DensityOperator::from_real_diagonal(&[0.1, 0.2, 0.3, 0.4]).unwrap();
        let mut mat = CMat::from_element(4, 4, linalg::czero());
        mat[(0, 0)] = cre(1.0);
        mat[(3, 3)] = cre(1.0);
        let p1 = HermitianOperator::new(mat).unwrap();
        let coarse = Pvm::two_outcome(p1.clone()).unwrap();
        let refined = refine_to_rank_one(&p1, 2).unwrap().to_pvm().unwrap();
        let s_coarse = measured_relative_entropy(&rho, &sig, &coarse)
            .unwrap()
            .expect_finite("coarse");
        let s_fine = measured_relative_entropy(&rho, &sig, &refined)
            .unwrap()
            .expect_finite("fine");
        assert!(s_fine >= s_coarse - 1e-9);
    }

    #[test]
    fn interleave_remap_preserves_identity() {
        let op = HermitianOperator::identity(16); // (2·2)^2
        let out = interleaved_to_classical_major(&op, 2, 2, 2).unwrap();
        assert!(out.max_abs_diff(&HermitianOperator::identity(16)) < 1e-12);
    }
}
