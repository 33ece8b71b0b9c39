//! One-shot random coding with square-root-measurement decoding: codebooks,
//! error evaluation, the operator inequality behind the error bound,
//! expurgation, and the exact expected-error functional.

use crate::channel::{AveragedChannelSpec, CompoundSet, CqChannel};
use crate::entropy::generalized_inverse_sqrt;
use crate::error::{CqError, Result};
use crate::linalg;
use crate::operator::{min_eigenvalue, HermitianOperator, Numerics};
use crate::prob::ProbabilityVector;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;

// ---------------------------------------------------------------------------
// Codebook
// ---------------------------------------------------------------------------

/// Block code: codeword sequences with PSD decoding operators whose sum is
/// dominated by the identity.
#[derive(Debug, Clone)]
pub struct Codebook {
    pub n: usize,
    pub alphabet: Vec<String>,
    pub codewords: Vec<Vec<usize>>,
    pub decoders: Vec<HermitianOperator>,
}

impl Codebook {
    pub fn new(
        n: usize,
        alphabet: Vec<String>,
        codewords: Vec<Vec<usize>>,
        decoders: Vec<HermitianOperator>,
    ) -> Result<Self> {
        Self::new_with(n, alphabet, codewords, decoders, &Numerics::default())
    }

    pub fn new_with(
        n: usize,
        alphabet: Vec<String>,
        codewords: Vec<Vec<usize>>,
        decoders: Vec<HermitianOperator>,
        numerics: &Numerics,
    ) -> Result<Self> {
        if codewords.is_empty() || codewords.len() != decoders.len() {
            return Err(CqError::InvalidParameter(format!(
                "{} codewords vs {} decoders",
                codewords.len(),
                decoders.len()
            )));
        }
        let dim = decoders[0].dim();
        let mut sum = linalg::CMat::from_element(dim, dim, linalg::czero());
        for (i, (word, b)) in codewords.iter().zip(&decoders).enumerate() {
            if word.len() != n {
                return Err(CqError::InvalidParameter(format!(
                    "codeword {i} has length {}, expected {n}",
                    word.len()
                )));
            }
            if word.iter().any(|&x| x >= alphabet.len()) {
                return Err(CqError::UnknownSymbol(format!("codeword {i}")));
            }
            if b.dim() != dim {
                return Err(CqError::DimensionMismatch(format!("decoder {i}")));
            }
            let min = min_eigenvalue(b);
            if min < -numerics.psd_tol {
                return Err(CqError::InvalidState(format!(
                    "decoder {i} has eigenvalue {min:.3e}"
                )));
            }
            sum += b.mat();
        }
        let excess = linalg::eigh(&(sum - linalg::identity(dim)))
            .values
            .first()
            .copied()
            .unwrap_or(0.0);
        if excess > numerics.pvm_completeness_tol {
            return Err(CqError::InvalidState(format!(
                "decoder sum exceeds the identity by {excess:.3e}"
            )));
        }
        Ok(Codebook {
            n,
            alphabet,
            codewords,
            decoders,
        })
    }

    pub fn size(&self) -> usize {
        self.codewords.len()
    }

    pub fn decoder_dim(&self) -> usize {
        self.decoders[0].dim()
    }

    pub fn rate_bits(&self) -> f64 {
        (self.size() as f64).log2() / self.n as f64
    }
}

// ---------------------------------------------------------------------------
// Error reports
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct CodeErrorReport {
    pub per_channel_max: BTreeMap<String, f64>,
    pub per_channel_avg: BTreeMap<String, f64>,
    pub sup_max: f64,
    pub sup_avg: f64,
    /// μ-weighted average error for averaged specs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weighted_avg: Option<f64>,
}

/// Per-codeword errors 1 − tr(D_{t,x^n(i)} b_i) for one channel.
pub fn individual_errors(code: &Codebook, w: &CqChannel) -> Result<Vec<f64>> {
    let dim_expected = code.decoder_dim();
    code.codewords
        .iter()
        .zip(&code.decoders)
        .map(|(word, b)| {
            let out = w.output_state_budgeted(word, dim_expected.max(1))?;
            if out.dim() != dim_expected {
                return Err(CqError::DimensionMismatch(format!(
                    "channel output dim {} vs decoder dim {dim_expected}",
                    out.dim()
                )));
            }
            Ok((1.0 - linalg::trace_product_re(out.mat(), b.mat())).clamp(0.0, 1.0))
        })
        .collect()
}

pub fn error_report(code: &Codebook, set: &CompoundSet) -> Result<CodeErrorReport> {
    build_report(code, set, None)
}

pub fn error_report_averaged(
    code: &Codebook,
    spec: &AveragedChannelSpec,
) -> Result<CodeErrorReport> {
    build_report(code, spec.compound(), Some(spec.weights()))
}

fn build_report(
    code: &Codebook,
    set: &CompoundSet,
    weights: Option<&ProbabilityVector>,
) -> Result<CodeErrorReport> {
    let per_member: Vec<Vec<f64>> = set
        .members()
        .par_iter()
        .map(|w| individual_errors(code, w))
        .collect::<Result<_>>()?;
    let mut per_channel_max = BTreeMap::new();
    let mut per_channel_avg = BTreeMap::new();
    let mut sup_max = 0.0f64;
    let mut sup_avg = 0.0f64;
    for (id, errors) in set.ids().iter().zip(&per_member) {
        let max = errors.iter().copied().fold(0.0, f64::max);
        let avg = errors.iter().sum::<f64>() / errors.len() as f64;
        sup_max = sup_max.max(max);
        sup_avg = sup_avg.max(avg);
        per_channel_max.insert(id.clone(), max);
        per_channel_avg.insert(id.clone(), avg);
    }
    let weighted_avg = weights.map(|mu| {
        set.ids()
            .iter()
            .zip(&per_member)
            .map(|(id, errors)| {
                let avg = errors.iter().sum::<f64>() / errors.len() as f64;
                mu.weight_of(id).unwrap_or(0.0) * avg
            })
            .sum()
    });
    Ok(CodeErrorReport {
        per_channel_max,
        per_channel_avg,
        sup_max,
        sup_avg,
        weighted_avg,
    })
}

// ---------------------------------------------------------------------------
// Operator inequality
// ---------------------------------------------------------------------------

/// Minimum eigenvalue of 2(1−a) + 4b − [1 − (a+b)^{−1/2} a (a+b)^{−1/2}];
/// the inequality asserts this is nonnegative for 0 ⪯ a ⪯ 1, b ⪰ 0.
pub fn hn_operator_inequality_residual(
    a: &HermitianOperator,
    b: &HermitianOperator,
) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(CqError::DimensionMismatch(format!(
            "{} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    let tol = Numerics::default().psd_tol;
    let a_eig = a.eigh();
    if a_eig.min_value() < -tol || a_eig.values[0] > 1.0 + tol {
        return Err(CqError::InvalidState(format!(
            "a has spectrum [{:.3e}, {:.3e}] outside [0, 1]",
            a_eig.min_value(),
            a_eig.values[0]
        )));
    }
    if min_eigenvalue(b) < -tol {
        return Err(CqError::InvalidState("b is not PSD".into()));
    }
    let dim = a.dim();
    let s = generalized_inverse_sqrt(&a.add(b), 1e-12)?;
    let sandwiched = s.mat() * a.mat() * s.mat();
    let lhs = linalg::identity(dim) - sandwiched;
    let rhs = (linalg::identity(dim) - a.mat()).scale(2.0) + b.mat().scale(4.0);
    let slack = HermitianOperator::from_hermitian_parts(rhs - lhs);
    Ok(min_eigenvalue(&slack))
}

// ---------------------------------------------------------------------------
// Square-root measurement
// ---------------------------------------------------------------------------

/// b_i = (Σ_j P_j)^{−1/2} P_i (Σ_j P_j)^{−1/2}. The sum is dominated by the
/// support projection of Σ P_j, hence by the identity.
pub fn sqrt_measurement_decoders(
    projections: &[HermitianOperator],
) -> Result<Vec<HermitianOperator>> {
    if projections.is_empty() {
        return Err(CqError::InvalidParameter("no test operators".into()));
    }
    let dim = projections[0].dim();
    let mut total = HermitianOperator::zeros(dim);
    for p in projections {
        if p.dim() != dim {
            return Err(CqError::DimensionMismatch("test operator dims".into()));
        }
        total = total.add(p);
    }
    let s = generalized_inverse_sqrt(&total, 1e-12)?;
    Ok(projections
        .iter()
        .map(|p| HermitianOperator::from_hermitian_parts(s.mat() * p.mat() * s.mat()))
        .collect())
}

// ---------------------------------------------------------------------------
// One-shot coding
// ---------------------------------------------------------------------------

/// First outcome of a two-outcome test on the classical⊗quantum space,
/// stored per classical letter: P = Σ_k |k⟩⟨k| ⊗ P_k.
#[derive(Debug, Clone)]
pub struct BlockDiagonalTest {
    blocks: Vec<HermitianOperator>,
}

impl BlockDiagonalTest {
    pub fn new(blocks: Vec<HermitianOperator>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(CqError::InvalidParameter("no blocks".into()));
        }
        let dim = blocks[0].dim();
        for (k, b) in blocks.iter().enumerate() {
            if b.dim() != dim {
                return Err(CqError::DimensionMismatch(format!("block {k}")));
            }
        }
        Ok(BlockDiagonalTest { blocks })
    }

    pub fn blocks(&self) -> &[HermitianOperator] {
        &self.blocks
    }

    pub fn block(&self, k: usize) -> &HermitianOperator {
        &self.blocks[k]
    }

    pub fn quantum_dim(&self) -> usize {
        self.blocks[0].dim()
    }

    /// tr(ρP) = Σ_k w(k) tr(D_k P_k).
    pub fn first_kind_mass(&self, w: &CqChannel, dist: &ProbabilityVector) -> Result<f64> {
        self.check(w, dist)?;
        Ok(dist
            .weights()
            .iter()
            .enumerate()
            .map(|(k, &wk)| wk * linalg::trace_product_re(w.output(k).mat(), self.blocks[k].mat()))
            .sum())
    }

    /// tr((w⊗σ)P) = Σ_k w(k) tr(σ P_k), σ = Σ_k w(k) D_k.
    pub fn reference_mass(&self, w: &CqChannel, dist: &ProbabilityVector) -> Result<f64> {
        self.check(w, dist)?;
        let sigma = w.average_output(dist)?;
        Ok(dist
            .weights()
            .iter()
            .enumerate()
            .map(|(k, &wk)| wk * linalg::trace_product_re(sigma.mat(), self.blocks[k].mat()))
            .sum())
    }

    fn check(&self, w: &CqChannel, dist: &ProbabilityVector) -> Result<()> {
        if self.blocks.len() != w.alphabet_size() || dist.len() != w.alphabet_size() {
            return Err(CqError::LabelMismatch(
                "test blocks, channel alphabet and distribution must agree".into(),
            ));
        }
        if self.quantum_dim() != w.dim() {
            return Err(CqError::DimensionMismatch(format!(
                "block dim {} vs channel dim {}",
                self.quantum_dim(),
                w.dim()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OneShotParams {
    /// Exponent μ with tr((w⊗σ)P) ≤ 2^{−μ}.
    pub mu: f64,
    /// 0 < γ < μ; the code has M = ⌊2^{μ−γ}⌋ words.
    pub gamma: f64,
    /// First-kind defect λ with tr(ρP) ≥ 1 − λ.
    pub lambda_first_kind: f64,
    pub trials: usize,
    pub seed: u64,
}

impl OneShotParams {
    pub fn validate(&self) -> Result<usize> {
        if !(self.gamma > 0.0 && self.gamma < self.mu) {
            return Err(CqError::InvalidParameter(format!(
                "need 0 < gamma < mu, got gamma = {}, mu = {}",
                self.gamma, self.mu
            )));
        }
        if self.trials == 0 {
            return Err(CqError::InvalidParameter("trials = 0".into()));
        }
        let m = (self.mu - self.gamma).exp2().floor();
        if m < 1.0 {
            return Err(CqError::InvalidParameter(format!(
                "M = floor(2^(mu-gamma)) = {m} < 1"
            )));
        }
        if m > 1e6 {
            return Err(CqError::BudgetExceeded(format!(
                "M = floor(2^(mu-gamma)) = {m} codewords"
            )));
        }
        Ok(m as usize)
    }

    /// 2λ + 4·2^{−γ}.
    pub fn error_bound(&self) -> f64 {
        2.0 * self.lambda_first_kind + 4.0 * (-self.gamma).exp2()
    }
}

#[derive(Debug, Clone)]
pub struct OneShotOutcome {
    pub code: Codebook,
    pub achieved_avg_error: f64,
    pub bound: f64,
    pub m_codewords: usize,
    pub trial_errors: Vec<f64>,
    pub best_trial: usize,
}

fn sample_letter(dist: &ProbabilityVector, rng: &mut impl Rng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (k, &w) in dist.weights().iter().enumerate() {
        acc += w;
        if u < acc {
            return k;
        }
    }
    dist.len() - 1
}

fn code_from_letters(
    w: &CqChannel,
    test: &BlockDiagonalTest,
    letters: &[usize],
) -> Result<(Vec<HermitianOperator>, f64)> {
    let projections: Vec<HermitianOperator> = letters
        .iter()
        .map(|&k| test.block(k).clone())
        .collect();
    let decoders = sqrt_measurement_decoders(&projections)?;
    let m = letters.len() as f64;
    let avg_error: f64 = letters
        .iter()
        .zip(&decoders)
        .map(|(&k, b)| {
            (1.0 - linalg::trace_product_re(w.output(k).mat(), b.mat())).clamp(0.0, 1.0)
        })
        .sum::<f64>()
        / m;
    Ok((decoders, avg_error))
}

/// Samples M = ⌊2^{μ−γ}⌋ codewords i.i.d. from `dist` per trial, decodes with
/// the square-root measurement, and returns the best trial. The expectation
/// bound 2λ + 4·2^{−γ} is enforced on the returned code; exhausting all
/// trials without meeting it is an explicit error.
pub fn one_shot_code(
    w: &CqChannel,
    dist: &ProbabilityVector,
    test: &BlockDiagonalTest,
    params: &OneShotParams,
) -> Result<OneShotOutcome> {
    let m = params.validate()?;
    let rho_mass = test.first_kind_mass(w, dist)?;
    if rho_mass < 1.0 - params.lambda_first_kind - 1e-9 {
        return Err(CqError::contract(
            "one_shot_code",
            format!(
                "tr(ρP) = {rho_mass} < 1 − λ = {}",
                1.0 - params.lambda_first_kind
            ),
        ));
    }
    let ref_mass = test.reference_mass(w, dist)?;
    if ref_mass > (-params.mu).exp2() * (1.0 + 1e-9) + 1e-15 {
        return Err(CqError::contract(
            "one_shot_code",
            format!("tr((w⊗σ)P) = {ref_mass} > 2^(−μ) = {}", (-params.mu).exp2()),
        ));
    }

    // Counter-based streams: trial i draws from stream (seed, i), so results
    // are identical across thread counts.
    let trials: Vec<(Vec<usize>, f64)> = (0..params.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = crate::random::stream(params.seed, trial as u64);
            let letters: Vec<usize> = (0..m).map(|_| sample_letter(dist, &mut rng)).collect();
            let (_, avg_error) = code_from_letters(w, test, &letters)?;
            Ok((letters, avg_error))
        })
        .collect::<Result<_>>()?;

    let mut best_trial = 0usize;
    let mut best_error = f64::INFINITY;
    for (i, (_, err)) in trials.iter().enumerate() {
        if *err < best_error {
            best_error = *err;
            best_trial = i;
        }
    }
    let bound = params.error_bound();
    if best_error > bound + 1e-9 {
        return Err(CqError::contract(
            "one_shot_code",
            format!(
                "best-of-{} error {best_error} exceeds 2λ + 4·2^(−γ) = {bound}",
                params.trials
            ),
        ));
    }
    let letters = trials[best_trial].0.clone();
    let (decoders, achieved) = code_from_letters(w, test, &letters)?;
    let code = Codebook::new(
        1,
        w.alphabet().to_vec(),
        letters.iter().map(|&k| vec![k]).collect(),
        decoders,
    )?;
    Ok(OneShotOutcome {
        code,
        achieved_avg_error: achieved,
        bound,
        m_codewords: m,
        trial_errors: trials.into_iter().map(|(_, e)| e).collect(),
        best_trial,
    })
}

// ---------------------------------------------------------------------------
// Expurgation
// ---------------------------------------------------------------------------

/// Keeps the ⌈M/2⌉ codewords with the smallest individual error on `w` (ties
/// by codeword index); the resulting maximum error is at most twice the
/// original average.
pub fn expurgate_to_max_error(code: &Codebook, w: &CqChannel) -> Result<Codebook> {
    let errors = individual_errors(code, w)?;
    let keep = code.size().div_ceil(2);
    let mut order: Vec<usize> = (0..code.size()).collect();
    order.sort_by(|&i, &j| {
        errors[i]
            .partial_cmp(&errors[j])
            .unwrap()
            .then(i.cmp(&j))
    });
    order.truncate(keep);
    order.sort();
    Codebook::new(
        code.n,
        code.alphabet.clone(),
        order.iter().map(|&i| code.codewords[i].clone()).collect(),
        order.iter().map(|&i| code.decoders[i].clone()).collect(),
    )
}

// ---------------------------------------------------------------------------
// Expected error of the random ensemble
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExpectationMode {
    Auto,
    Exact,
    MonteCarlo,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExpectedError {
    pub expectation: f64,
    /// 2·tr(ρ(1−P)) + 4·M·tr((w⊗σ)P).
    pub operator_bound: f64,
    /// 2λ + 4·2^{−γ}.
    pub parameter_bound: f64,
    pub exact: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub half_width_95: Option<f64>,
}

/// Expectation over the i.i.d. codeword ensemble of the average decoding
/// error, exact by enumeration when |K|^M fits the budget.
pub fn random_code_expected_error(
    w: &CqChannel,
    dist: &ProbabilityVector,
    test: &BlockDiagonalTest,
    params: &OneShotParams,
    mode: ExpectationMode,
) -> Result<ExpectedError> {
    let m = params.validate()?;
    let rho_mass = test.first_kind_mass(w, dist)?;
    let ref_mass = test.reference_mass(w, dist)?;
    let operator_bound = 2.0 * (1.0 - rho_mass) + 4.0 * m as f64 * ref_mass;
    let parameter_bound = params.error_bound();

    let k = dist.len() as u128;
    let tuples = k.checked_pow(m as u32);
    let exact_ok = tuples.map(|t| t <= 1_000_000).unwrap_or(false);
    let use_exact = match mode {
        ExpectationMode::Exact => {
            if !exact_ok {
                return Err(CqError::BudgetExceeded(format!(
                    "|K|^M = {}^{m} tuples",
                    dist.len()
                )));
            }
            true
        }
        ExpectationMode::MonteCarlo => false,
        ExpectationMode::Auto => exact_ok,
    };

    if use_exact {
        let total = dist.len().pow(m as u32);
        let expectations: Vec<f64> = (0..total)
            .into_par_iter()
            .map(|rank| {
                let mut letters = vec![0usize; m];
                let mut rest = rank;
                for pos in (0..m).rev() {
                    letters[pos] = rest % dist.len();
                    rest /= dist.len();
                }
                let prob: f64 = letters.iter().map(|&x| dist.weights()[x]).product();
                if prob == 0.0 {
                    return Ok(0.0);
                }
                let (_, avg_error) = code_from_letters(w, test, &letters)?;
                Ok(prob * avg_error)
            })
            .collect::<Result<_>>()?;
        let expectation: f64 = expectations.iter().sum();
        Ok(ExpectedError {
            expectation,
            operator_bound,
            parameter_bound,
            exact: true,
            half_width_95: None,
        })
    } else {
        let samples = 4000usize;
        let errors: Vec<f64> = (0..samples)
            .into_par_iter()
            .map(|i| {
                let mut rng = crate::random::stream(params.seed, i as u64);
                let letters: Vec<usize> =
                    (0..m).map(|_| sample_letter(dist, &mut rng)).collect();
                let (_, avg_error) = code_from_letters(w, test, &letters)?;
                Ok(avg_error)
            })
            .collect::<Result<_>>()?;
        let mean: f64 = errors.iter().sum::<f64>() / samples as f64;
        let var: f64 =
            errors.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (samples - 1) as f64;
        let half = 1.959963984540054 * (var / samples as f64).sqrt();
        Ok(ExpectedError {
            expectation: mean,
            operator_bound,
            parameter_bound,
            exact: false,
            half_width_95: Some(half),
        })
    }
}
