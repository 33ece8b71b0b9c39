//! Classical-quantum channels, their memoryless extensions, compound sets,
//! finitely supported averages, and mixing with the useless channel.

use crate::error::{CqError, Result};
use crate::operator::{DensityOperator, Numerics, DEFAULT_AXIS_BUDGET};
use crate::prob::ProbabilityVector;
use crate::{entropy, linalg};

/// Map from a finite input alphabet to density operators on a shared
/// output space.
#[derive(Debug, Clone)]
pub struct CqChannel {
    alphabet: Vec<String>,
    dim: usize,
    outputs: Vec<DensityOperator>,
}

impl CqChannel {
    pub fn new(alphabet: Vec<String>, outputs: Vec<DensityOperator>) -> Result<Self> {
        if alphabet.is_empty() {
            return Err(CqError::InvalidParameter("empty alphabet".into()));
        }
        if alphabet.len() != outputs.len() {
            return Err(CqError::LabelMismatch(format!(
                "{} symbols vs {} output states",
                alphabet.len(),
                outputs.len()
            )));
        }
        let mut seen = std::collections::BTreeSet::new();
        for s in &alphabet {
            if !seen.insert(s.clone()) {
                return Err(CqError::LabelMismatch(format!("duplicate symbol {s:?}")));
            }
        }
        let dim = outputs[0].dim();
        for (s, d) in alphabet.iter().zip(&outputs) {
            if d.dim() != dim {
                return Err(CqError::DimensionMismatch(format!(
                    "output of {s:?} has dim {} ≠ {dim}",
                    d.dim()
                )));
            }
        }
        Ok(CqChannel {
            alphabet,
            dim,
            outputs,
        })
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn outputs(&self) -> &[DensityOperator] {
        &self.outputs
    }

    pub fn output(&self, x: usize) -> &DensityOperator {
        &self.outputs[x]
    }

    pub fn symbol_index(&self, symbol: &str) -> Result<usize> {
        self.alphabet
            .iter()
            .position(|s| s == symbol)
            .ok_or_else(|| CqError::UnknownSymbol(symbol.to_string()))
    }

    pub fn word_from_symbols(&self, symbols: &[&str]) -> Result<Vec<usize>> {
        symbols.iter().map(|s| self.symbol_index(s)).collect()
    }

    /// Uniform distribution on this channel's alphabet.
    pub fn uniform_input(&self) -> ProbabilityVector {
        ProbabilityVector::uniform(self.alphabet.clone()).expect("nonempty alphabet")
    }

    fn check_word(&self, word: &[usize], axis_budget: usize) -> Result<()> {
        if word.is_empty() {
            return Err(CqError::InvalidParameter("empty word".into()));
        }
        for &x in word {
            if x >= self.alphabet.len() {
                return Err(CqError::UnknownSymbol(format!("index {x}")));
            }
        }
        let mut total = 1usize;
        for _ in 0..word.len() {
            total = total
                .checked_mul(self.dim)
                .filter(|&t| t <= axis_budget)
                .ok_or_else(|| {
                    CqError::BudgetExceeded(format!(
                        "d^n = {}^{} exceeds axis budget {axis_budget}",
                        self.dim,
                        word.len()
                    ))
                })?;
        }
        Ok(())
    }

    /// n-fold memoryless output D_{x₁} ⊗ … ⊗ D_{x_n}.
    pub fn output_state(&self, word: &[usize]) -> Result<DensityOperator> {
        self.output_state_budgeted(word, DEFAULT_AXIS_BUDGET)
    }

    pub fn output_state_budgeted(
        &self,
        word: &[usize],
        axis_budget: usize,
    ) -> Result<DensityOperator> {
        self.check_word(word, axis_budget)?;
        let mut out = self.outputs[word[0]].clone();
        for &x in &word[1..] {
            out = out.kron(&self.outputs[x]);
        }
        Ok(out)
    }

    /// Single-letter average output Σ p(x) D_x.
    pub fn average_output(&self, p: &ProbabilityVector) -> Result<DensityOperator> {
        if p.labels() != self.alphabet {
            return Err(CqError::LabelMismatch(
                "input distribution labels differ from the channel alphabet".into(),
            ));
        }
        let parts: Vec<(f64, &DensityOperator)> = p
            .weights()
            .iter()
            .copied()
            .zip(self.outputs.iter())
            .collect();
        DensityOperator::mixture(&parts)
    }
}

/// Replaces every output by (1−τ)·D_x + (τ/d)·1. Every output of the result
/// has minimum eigenvalue ≥ τ/d.
pub fn mix_with_useless(w: &CqChannel, tau: f64) -> Result<CqChannel> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(CqError::InvalidParameter(format!(
            "tau = {tau} outside (0, 1]"
        )));
    }
    let d = w.dim();
    let uniform = DensityOperator::maximally_mixed(d);
    let outputs: Vec<DensityOperator> = w
        .outputs()
        .iter()
        .map(|rho| {
            DensityOperator::mixture(&[(1.0 - tau, rho), (tau, &uniform)])
                .expect("mixture of densities")
        })
        .collect();
    CqChannel::new(w.alphabet().to_vec(), outputs)
}

/// max over letters of the output trace distance.
pub fn channel_distance(w1: &CqChannel, w2: &CqChannel) -> Result<f64> {
    if w1.alphabet() != w2.alphabet() || w1.dim() != w2.dim() {
        return Err(CqError::LabelMismatch(
            "channel distance requires a shared alphabet and output dimension".into(),
        ));
    }
    let mut max = 0.0f64;
    for (a, b) in w1.outputs().iter().zip(w2.outputs()) {
        max = max.max(entropy::trace_distance(a, b)?);
    }
    Ok(max)
}

// ---------------------------------------------------------------------------
// Compound sets and finitely supported averages
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct CompoundSet {
    ids: Vec<String>,
    members: Vec<CqChannel>,
}

impl CompoundSet {
    pub fn new(ids: Vec<String>, members: Vec<CqChannel>) -> Result<Self> {
        if members.is_empty() {
            return Err(CqError::InvalidParameter("empty compound set".into()));
        }
        if ids.len() != members.len() {
            return Err(CqError::LabelMismatch(format!(
                "{} ids vs {} members",
                ids.len(),
                members.len()
            )));
        }
        let mut seen = std::collections::BTreeSet::new();
        for id in &ids {
            if !seen.insert(id.clone()) {
                return Err(CqError::LabelMismatch(format!("duplicate id {id:?}")));
            }
        }
        let alphabet = members[0].alphabet().to_vec();
        let dim = members[0].dim();
        for (id, m) in ids.iter().zip(&members) {
            if m.alphabet() != alphabet || m.dim() != dim {
                return Err(CqError::LabelMismatch(format!(
                    "member {id:?} disagrees on alphabet or dimension"
                )));
            }
        }
        Ok(CompoundSet { ids, members })
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn members(&self) -> &[CqChannel] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn alphabet(&self) -> &[String] {
        self.members[0].alphabet()
    }

    pub fn dim(&self) -> usize {
        self.members[0].dim()
    }

    pub fn member_by_id(&self, id: &str) -> Option<&CqChannel> {
        self.ids
            .iter()
            .position(|i| i == id)
            .map(|k| &self.members[k])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &CqChannel)> {
        self.ids.iter().zip(self.members.iter())
    }

    /// Subset by indices, preserving order.
    pub fn subset(&self, indices: &[usize]) -> Result<CompoundSet> {
        let ids = indices.iter().map(|&i| self.ids[i].clone()).collect();
        let members = indices.iter().map(|&i| self.members[i].clone()).collect();
        CompoundSet::new(ids, members)
    }
}

/// Compound set with a finitely supported prior over its members.
#[derive(Debug, Clone)]
pub struct AveragedChannelSpec {
    compound: CompoundSet,
    weights: ProbabilityVector,
}

impl AveragedChannelSpec {
    pub fn new(compound: CompoundSet, weights: ProbabilityVector) -> Result<Self> {
        if weights.labels() != compound.ids() {
            return Err(CqError::LabelMismatch(
                "weight labels must biject with member ids, in order".into(),
            ));
        }
        Ok(AveragedChannelSpec { compound, weights })
    }

    pub fn compound(&self) -> &CompoundSet {
        &self.compound
    }

    pub fn weights(&self) -> &ProbabilityVector {
        &self.weights
    }

    /// Members with strictly positive weight.
    pub fn positive_support(&self) -> Result<CompoundSet> {
        let idx = self.weights.support();
        self.compound.subset(&idx)
    }

    /// Σ_t μ(t) · W_t^n(word).
    pub fn averaged_output_state(&self, word: &[usize]) -> Result<DensityOperator> {
        let states: Vec<DensityOperator> = self
            .compound
            .members()
            .iter()
            .map(|w| w.output_state(word))
            .collect::<Result<_>>()?;
        let parts: Vec<(f64, &DensityOperator)> = self
            .weights
            .weights()
            .iter()
            .copied()
            .zip(states.iter())
            .collect();
        DensityOperator::mixture(&parts)
    }
}

/// Validates a channel against custom numerics (used by the JSON loader).
pub fn validate_channel(w: &CqChannel, numerics: &Numerics) -> Result<()> {
    for (s, rho) in w.alphabet().iter().zip(w.outputs()) {
        let defect = linalg::hermiticity_defect(rho.mat());
        if defect > numerics.hermiticity_tol {
            return Err(CqError::InvalidState(format!(
                "output of {s:?}: hermiticity defect {defect:.3e}"
            )));
        }
        let min = rho.eigensystem().min_value();
        if min < -numerics.psd_tol {
            return Err(CqError::InvalidState(format!(
                "output of {s:?}: eigenvalue {min:.3e}"
            )));
        }
        let tr = rho.op().trace();
        if (tr - 1.0).abs() > numerics.trace_tol {
            return Err(CqError::InvalidState(format!(
                "output of {s:?}: trace {tr}"
            )));
        }
    }
    Ok(())
}
