//! Holevo information, the compound-capacity minimax over the input simplex,
//! the averaged-capacity essential infimum (finite support), and the Donald
//! identity diagnostics that link the two optimizations.

use crate::channel::{AveragedChannelSpec, CompoundSet, CqChannel};
use crate::entropy::{self, quantum_relative_entropy, von_neumann_entropy};
use crate::error::{CqError, Result};
use crate::extreal::ExtReal;
use crate::linalg::{self, CMat, CVec};
use crate::operator::DensityOperator;
use crate::prob::ProbabilityVector;
use rayon::prelude::*;
use serde::Serialize;

const LOG2_E: f64 = std::f64::consts::LOG2_E;
/// Cap applied to +∞ supergradient components at the simplex boundary.
const SUPERGRADIENT_CAP: f64 = 1e3;
/// Channels within this of the minimum count as active.
const ACTIVE_TOL: f64 = 1e-9;

// ---------------------------------------------------------------------------
// Joint states
// ---------------------------------------------------------------------------

/// The classical-quantum state Σ p(x)|x⟩⟨x| ⊗ D_x together with its quantum
/// marginal Σ p(x) D_x.
#[derive(Debug, Clone)]
pub struct JointState {
    input: ProbabilityVector,
    joint: DensityOperator,
    marginal: DensityOperator,
}

impl JointState {
    pub fn new(p: &ProbabilityVector, w: &CqChannel) -> Result<Self> {
        if p.labels() != w.alphabet() {
            return Err(CqError::LabelMismatch(
                "input labels differ from the channel alphabet".into(),
            ));
        }
        let a = w.alphabet_size();
        let d = w.dim();
        let mut joint = CMat::from_element(a * d, a * d, linalg::czero());
        for (x, &px) in p.weights().iter().enumerate() {
            let block = w.output(x).mat().scale(px);
            for i in 0..d {
                for j in 0..d {
                    joint[(x * d + i, x * d + j)] = block[(i, j)];
                }
            }
        }
        Ok(JointState {
            input: p.clone(),
            joint: DensityOperator::from_matrix(joint)?,
            marginal: w.average_output(p)?,
        })
    }

    pub fn input(&self) -> &ProbabilityVector {
        &self.input
    }

    pub fn joint(&self) -> &DensityOperator {
        &self.joint
    }

    pub fn marginal(&self) -> &DensityOperator {
        &self.marginal
    }

    /// Partial trace of the joint state over the classical register.
    pub fn trace_out_classical(&self) -> DensityOperator {
        let a = self.input.len();
        let d = self.marginal.dim();
        let mut out = CMat::from_element(d, d, linalg::czero());
        for x in 0..a {
            for i in 0..d {
                for j in 0..d {
                    out[(i, j)] += self.joint.mat()[(x * d + i, x * d + j)];
                }
            }
        }
        DensityOperator::from_matrix(out).expect("partial trace of a state")
    }
}

/// p ⊗ σ as a density operator on the classical⊗quantum space, with the
/// block-product eigensystem seeded so that degenerate spectra keep exact
/// block alignment.
pub fn classical_quantum_product(
    p: &ProbabilityVector,
    sigma: &DensityOperator,
) -> DensityOperator {
    let a = p.len();
    let d = sigma.dim();
    let se = sigma.eigensystem();
    let mut pairs: Vec<(f64, CVec)> = Vec::with_capacity(a * d);
    for (x, &px) in p.weights().iter().enumerate() {
        for k in 0..d {
            let u = se.vector(k);
            let mut v = CVec::from_element(a * d, linalg::czero());
            for i in 0..d {
                v[x * d + i] = u[i];
            }
            pairs.push((px * se.values[k], v));
        }
    }
    DensityOperator::from_eigensystem(pairs).expect("product of states")
}

// ---------------------------------------------------------------------------
// Holevo information
// ---------------------------------------------------------------------------

/// χ(p, W) = S(Σ p(x) D_x) − Σ p(x) S(D_x), in bits.
pub fn holevo_information(p: &ProbabilityVector, w: &CqChannel) -> Result<f64> {
    if p.labels() != w.alphabet() {
        return Err(CqError::LabelMismatch(
            "input labels differ from the channel alphabet".into(),
        ));
    }
    let avg = w.average_output(p)?;
    let mut chi = von_neumann_entropy(&avg)?;
    for (x, &px) in p.weights().iter().enumerate() {
        if px > 0.0 {
            chi -= px * von_neumann_entropy(w.output(x))?;
        }
    }
    Ok(chi.max(0.0))
}

/// Per-symbol ascent direction of χ at p: component x is S(D_x‖σ_p) − log₂e.
/// Components are +∞ where σ_p fails to dominate D_x (possible only off the
/// support of p).
pub fn holevo_supergradient(p: &ProbabilityVector, w: &CqChannel) -> Result<Vec<ExtReal>> {
    if p.labels() != w.alphabet() {
        return Err(CqError::LabelMismatch(
            "input labels differ from the channel alphabet".into(),
        ));
    }
    let sigma = w.average_output(p)?;
    w.outputs()
        .iter()
        .map(|dx| {
            Ok(match quantum_relative_entropy(dx, &sigma)? {
                ExtReal::Finite(v) => ExtReal::Finite(v - LOG2_E),
                other => other,
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Single-channel Blahut-Arimoto (upper-bound oracle for the certificate)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct BlahutArimoto {
    pub lower: f64,
    pub upper: f64,
    pub input: Vec<f64>,
    pub iterations: usize,
}

/// Multiplicative ascent p'(x) ∝ p(x)·2^{S(D_x‖σ_p)}. At every iterate,
/// χ(p) ≤ C ≤ max_x S(D_x‖σ_p), which gives a certified bracket.
pub fn blahut_arimoto(w: &CqChannel, tol: f64, max_iter: usize) -> Result<BlahutArimoto> {
    let a = w.alphabet_size();
    let mut p = vec![1.0 / a as f64; a];
    let mut best = BlahutArimoto {
        lower: 0.0,
        upper: f64::INFINITY,
        input: p.clone(),
        iterations: 0,
    };
    for iter in 0..max_iter {
        let pv = ProbabilityVector::new(w.alphabet().to_vec(), p.clone())?;
        let sigma = w.average_output(&pv)?;
        let mut rel = vec![0.0; a];
        for x in 0..a {
            rel[x] = match quantum_relative_entropy(w.output(x), &sigma)? {
                ExtReal::Finite(v) => v,
                // Unreachable for interior p; guard anyway.
                _ => SUPERGRADIENT_CAP,
            };
        }
        let lower: f64 = p.iter().zip(&rel).map(|(&px, &r)| px * r).sum();
        let upper: f64 = rel.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if upper < best.upper || lower > best.lower {
            best = BlahutArimoto {
                lower: best.lower.max(lower),
                upper: best.upper.min(upper),
                input: p.clone(),
                iterations: iter + 1,
            };
        }
        if best.upper - best.lower <= tol {
            break;
        }
        // Multiplicative update, renormalized; shift exponents for stability.
        let shift = upper;
        let mut next: Vec<f64> = p
            .iter()
            .zip(&rel)
            .map(|(&px, &r)| px * (r - shift).exp2())
            .collect();
        let total: f64 = next.iter().sum();
        for v in &mut next {
            *v /= total;
        }
        p = next;
    }
    Ok(best)
}

// ---------------------------------------------------------------------------
// Compound capacity
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct CapacityResult {
    pub value: f64,
    pub argmax_input: ProbabilityVector,
    pub active_channel_ids: Vec<String>,
    pub iterations: usize,
    pub certified_gap: f64,
}

/// Euclidean projection onto the probability simplex.
fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted: Vec<f64> = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (k, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let candidate = (cumulative - 1.0) / (k + 1) as f64;
        if u - candidate > 0.0 {
            theta = candidate;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

fn eval_min_chi(weights: &[f64], set: &CompoundSet) -> Result<(f64, usize)> {
    let p = ProbabilityVector::new(set.alphabet().to_vec(), weights.to_vec())?;
    let values: Vec<f64> = set
        .members()
        .par_iter()
        .map(|w| holevo_information(&p, w))
        .collect::<Result<_>>()?;
    let mut min = f64::INFINITY;
    let mut arg = 0;
    for (t, &v) in values.iter().enumerate() {
        if v < min {
            min = v;
            arg = t;
        }
    }
    Ok((min, arg))
}

/// Local stencil polish: exchange moves p ± δ(e_i − e_j) restricted to the
/// current support, hill-climbing while the objective improves.
fn stencil_polish(
    start: &[f64],
    start_value: f64,
    set: &CompoundSet,
    resolution: f64,
) -> Result<(Vec<f64>, f64)> {
    let n = start.len();
    let mut best = start.to_vec();
    let mut best_value = start_value;
    let steps = [resolution, 4.0 * resolution, 16.0 * resolution];
    for _round in 0..64 {
        let mut improved = false;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                for &delta in &steps {
                    if best[j] < delta {
                        continue;
                    }
                    let mut cand = best.clone();
                    cand[i] += delta;
                    cand[j] -= delta;
                    let (v, _) = eval_min_chi(&cand, set)?;
                    if v > best_value + 1e-15 {
                        best_value = v;
                        best = cand;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            break;
        }
    }
    Ok((best, best_value))
}

/// max_p min_t χ(p, W_t) to additive accuracy `tol`, by projected
/// supergradient ascent (step 1/√k) with a stencil-refinement polish and a
/// Blahut-Arimoto upper-bound certificate.
pub fn compound_capacity(set: &CompoundSet, tol: f64) -> Result<CapacityResult> {
    compound_capacity_with(set, tol, 20_000)
}

pub fn compound_capacity_with(
    set: &CompoundSet,
    tol: f64,
    max_iter: usize,
) -> Result<CapacityResult> {
    if !(tol > 0.0) {
        return Err(CqError::InvalidParameter(format!("tol = {tol}")));
    }
    let a = set.alphabet().len();
    let mut p = vec![1.0 / a as f64; a];
    let (mut best_value, _) = eval_min_chi(&p, set)?;
    let mut best_p = p.clone();
    let mut iterations = 0usize;
    let mut stale_rounds = 0usize;

    for k in 1..=max_iter {
        iterations = k;
        let pv = ProbabilityVector::new(set.alphabet().to_vec(), p.clone())?;
        // Active channel: the minimizer with the lowest id on ties.
        let values: Vec<f64> = set
            .members()
            .par_iter()
            .map(|w| holevo_information(&pv, w))
            .collect::<Result<_>>()?;
        let mut min = f64::INFINITY;
        let mut active = 0usize;
        for (t, &v) in values.iter().enumerate() {
            if v < min - 0.0 {
                min = v;
                active = t;
            }
        }
        if min > best_value {
            best_value = min;
            best_p = p.clone();
            stale_rounds = 0;
        }
        let grad = holevo_supergradient(&pv, &set.members()[active])?;
        let step = 1.0 / (k as f64).sqrt();
        let moved: Vec<f64> = p
            .iter()
            .zip(&grad)
            .map(|(&px, g)| {
                let gv = match g {
                    ExtReal::Finite(v) => v.min(SUPERGRADIENT_CAP),
                    ExtReal::Infinity => SUPERGRADIENT_CAP,
                    ExtReal::NegInfinity => -SUPERGRADIENT_CAP,
                };
                px + step * gv
            })
            .collect();
        p = project_to_simplex(&moved);

        // Periodic certificate attempt: polish locally; if the polish stops
        // producing progress, ascent has converged at this tolerance.
        if k % 500 == 0 || k == max_iter {
            let (pp, pv2) = stencil_polish(&best_p, best_value, set, tol / 4.0)?;
            if pv2 > best_value + tol / 16.0 {
                best_value = pv2;
                best_p = pp.clone();
                p = pp;
                stale_rounds = 0;
            } else {
                stale_rounds += 1;
                if stale_rounds >= 2 && k >= 1000 {
                    break;
                }
            }
        }
    }

    let (final_p, final_value) = stencil_polish(&best_p, best_value, set, tol / 4.0)?;
    let pv = ProbabilityVector::new(set.alphabet().to_vec(), final_p.clone())?;
    let values: Vec<f64> = set
        .members()
        .iter()
        .map(|w| holevo_information(&pv, w))
        .collect::<Result<_>>()?;
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mut active_ids: Vec<String> = set
        .ids()
        .iter()
        .zip(&values)
        .filter(|(_, &v)| v <= min + ACTIVE_TOL)
        .map(|(id, _)| id.clone())
        .collect();
    active_ids.sort();

    // Global upper bound: min over channels of the single-channel capacity
    // bracket (max_p min_t ≤ min_t max_p).
    let upper = set
        .members()
        .par_iter()
        .map(|w| blahut_arimoto(w, (tol / 8.0).max(1e-9), 2000).map(|ba| ba.upper))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);

    Ok(CapacityResult {
        value: final_value,
        argmax_input: pv,
        active_channel_ids: active_ids,
        iterations,
        certified_gap: (upper - final_value).max(0.0),
    })
}

/// Averaged capacity for finitely supported priors: the essential infimum
/// runs over positive-weight members only, so this is the compound capacity
/// of the positive support.
pub fn averaged_capacity(spec: &AveragedChannelSpec, tol: f64) -> Result<CapacityResult> {
    let support = spec.positive_support()?;
    compound_capacity(&support, tol)
}

// ---------------------------------------------------------------------------
// Donald identity diagnostics
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct DonaldDecomposition {
    /// S(ρ_{t'} ‖ p⊗σ_t)
    pub lhs: ExtReal,
    /// S(ρ_{t'} ‖ p⊗σ_{t'}) = χ(p, W_{t'})
    pub rhs: f64,
    /// S(σ_{t'} ‖ σ_t)
    pub gap: ExtReal,
}

/// Donald decomposition S(ρ_{t'}‖p⊗σ_t) = S(ρ_{t'}‖p⊗σ_{t'}) + S(σ_{t'}‖σ_t).
pub fn donald_decomposition(
    p: &ProbabilityVector,
    w_t: &CqChannel,
    w_tp: &CqChannel,
) -> Result<DonaldDecomposition> {
    if w_t.alphabet() != w_tp.alphabet() || w_t.dim() != w_tp.dim() {
        return Err(CqError::LabelMismatch(
            "channels must share alphabet and dimension".into(),
        ));
    }
    let joint_tp = JointState::new(p, w_tp)?;
    let sigma_t = w_t.average_output(p)?;
    let sigma_tp = joint_tp.marginal();

    let ref_t = classical_quantum_product(p, &sigma_t);
    let ref_tp = classical_quantum_product(p, sigma_tp);

    let lhs = quantum_relative_entropy(joint_tp.joint(), &ref_t)?;
    let rhs = quantum_relative_entropy(joint_tp.joint(), &ref_tp)?
        .expect_finite("S(ρ_t'||p⊗σ_t') is finite by construction");
    let gap = quantum_relative_entropy(sigma_tp, &sigma_t)?;
    Ok(DonaldDecomposition { lhs, rhs, gap })
}

/// Both sides of the double-minimization identity
/// inf_{t'} S(Ω_p ‖ p⊗σ_{t'}) = inf_{t'} S(ρ_{t'} ‖ p⊗σ_{t'}),
/// evaluated exhaustively over a finite set.
pub fn omega_inf_check(p: &ProbabilityVector, set: &CompoundSet) -> Result<(f64, f64)> {
    let joints: Vec<JointState> = set
        .members()
        .iter()
        .map(|w| JointState::new(p, w))
        .collect::<Result<_>>()?;
    let refs: Vec<DensityOperator> = joints
        .iter()
        .map(|j| classical_quantum_product(p, j.marginal()))
        .collect();

    let mut lhs = ExtReal::Infinity;
    let mut rhs = ExtReal::Infinity;
    for (tp, reference) in refs.iter().enumerate() {
        for (r, joint) in joints.iter().enumerate() {
            let v = quantum_relative_entropy(joint.joint(), reference)?;
            lhs = lhs.min(v);
            if r == tp {
                rhs = rhs.min(v);
            }
        }
    }
    Ok((
        lhs.expect_finite("diagonal terms are finite"),
        rhs.expect_finite("diagonal terms are finite"),
    ))
}

/// I(p, V) = Σ_x p(x) D(V(·|x) ‖ Σ_y p(y) V(·|y)) for a stochastic matrix V.
pub fn classical_mutual_information(p: &ProbabilityVector, v: &[Vec<f64>]) -> Result<f64> {
    if v.len() != p.len() {
        return Err(CqError::LabelMismatch(format!(
            "{} rows vs {} input symbols",
            v.len(),
            p.len()
        )));
    }
    let cols = v[0].len();
    for (x, row) in v.iter().enumerate() {
        if row.len() != cols {
            return Err(CqError::DimensionMismatch(format!(
                "row {x} has {} entries, expected {cols}",
                row.len()
            )));
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > 1e-9 || row.iter().any(|&q| q < -1e-12) {
            return Err(CqError::InvalidParameter(format!(
                "row {x} is not a probability vector"
            )));
        }
    }
    let mut q = vec![0.0; cols];
    for (x, &px) in p.weights().iter().enumerate() {
        for j in 0..cols {
            q[j] += px * v[x][j];
        }
    }
    let mut info = 0.0;
    for (x, &px) in p.weights().iter().enumerate() {
        if px == 0.0 {
            continue;
        }
        match entropy::kl_divergence_slices(&v[x], &q) {
            ExtReal::Finite(d) => info += px * d,
            // q dominates every row it averages, so this cannot trigger.
            _ => {
                return Err(CqError::contract(
                    "classical_mutual_information",
                    "output marginal fails to dominate a row",
                ))
            }
        }
    }
    Ok(info.max(0.0))
}
