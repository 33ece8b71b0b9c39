//! Entropy functionals and spectral operations on density operators.
//!
//! All quantities are in bits (base-2 logarithms); natural-log intermediates
//! are converted at the boundary. 0·log 0 := 0 throughout.

use crate::error::{CqError, Result};
use crate::extreal::ExtReal;
use crate::linalg::{self, xlog2x};
use crate::operator::{DensityOperator, HermitianOperator, Numerics, Pvm};
use crate::prob::ProbabilityVector;

/// Probabilities below this are treated as exact zeros in classical
/// divergences; they arise only as round-off of PSD traces.
const PROB_ZERO_TOL: f64 = 1e-14;

/// S(ρ) = −Σ λ log λ over eigenvalues above the support cutoff.
pub fn von_neumann_entropy(rho: &DensityOperator) -> Result<f64> {
    let numerics = Numerics::default();
    let eigen = rho.eigensystem();
    if eigen.min_value() < -numerics.psd_tol {
        return Err(CqError::InvalidState(format!(
            "eigenvalue {:.3e} below tolerance",
            eigen.min_value()
        )));
    }
    Ok(-eigen
        .values
        .iter()
        .map(|&l| {
            if l <= numerics.support_cutoff {
                0.0
            } else {
                xlog2x(l)
            }
        })
        .sum::<f64>())
}

pub fn shannon_entropy(p: &ProbabilityVector) -> f64 {
    shannon_entropy_slice(p.weights())
}

pub fn shannon_entropy_slice(weights: &[f64]) -> f64 {
    -weights.iter().map(|&w| xlog2x(w)).sum::<f64>()
}

/// Classical Kullback-Leibler divergence on raw weight slices, +∞ when
/// absolute continuity fails.
pub fn kl_divergence_slices(p: &[f64], q: &[f64]) -> ExtReal {
    debug_assert_eq!(p.len(), q.len());
    let mut acc = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        let pi = if pi < PROB_ZERO_TOL { 0.0 } else { pi };
        let qi = if qi < PROB_ZERO_TOL { 0.0 } else { qi };
        if pi == 0.0 {
            continue;
        }
        if qi == 0.0 {
            return ExtReal::Infinity;
        }
        acc += pi * (pi / qi).log2();
    }
    ExtReal::Finite(acc)
}

/// D(p‖q) for labelled distributions; label sets must agree.
pub fn kl_divergence(p: &ProbabilityVector, q: &ProbabilityVector) -> Result<ExtReal> {
    if !p.same_labels(q) {
        return Err(CqError::LabelMismatch(
            "KL divergence arguments carry different label sets".into(),
        ));
    }
    Ok(kl_divergence_slices(p.weights(), q.weights()))
}

/// S(ρ‖σ) = tr(ρ log ρ − ρ log σ); +∞ unless supp(ρ) ≤ supp(σ).
pub fn quantum_relative_entropy(
    rho: &DensityOperator,
    sigma: &DensityOperator,
) -> Result<ExtReal> {
    if rho.dim() != sigma.dim() {
        return Err(CqError::DimensionMismatch(format!(
            "{} vs {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    let numerics = Numerics::default();
    let cutoff = numerics.support_cutoff;
    let se = sigma.eigensystem();
    // Mass of ρ outside the support of σ.
    let mut kernel_leak = 0.0;
    let mut cross_term = 0.0; // tr(ρ log σ) restricted to supp(σ)
    for k in 0..se.dim() {
        let overlap = linalg::quadratic_form_re(rho.mat(), &se.vector(k)).max(0.0);
        if se.values[k] <= cutoff {
            kernel_leak += overlap;
        } else {
            cross_term += overlap * se.values[k].log2();
        }
    }
    if kernel_leak > numerics.psd_tol {
        return Ok(ExtReal::Infinity);
    }
    let neg_entropy: f64 = rho
        .eigensystem()
        .values
        .iter()
        .map(|&l| if l <= cutoff { 0.0 } else { xlog2x(l) })
        .sum();
    let value = neg_entropy - cross_term;
    // Klein inequality: clamp round-off just below zero.
    Ok(ExtReal::Finite(if value < 0.0 && value > -1e-9 {
        0.0
    } else {
        value
    }))
}

/// S_M(ρ‖σ): KL divergence of the two outcome distributions under `m`.
pub fn measured_relative_entropy(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    m: &Pvm,
) -> Result<ExtReal> {
    if rho.dim() != sigma.dim() {
        return Err(CqError::DimensionMismatch(format!(
            "{} vs {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    let p = m.outcome_distribution(rho)?;
    let q = m.outcome_distribution(sigma)?;
    Ok(kl_divergence_slices(&p, &q))
}

/// Σ |eig(ρ−σ)|, the trace distance (range [0, 2]).
pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(CqError::DimensionMismatch(format!(
            "{} vs {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    let diff = rho.mat() - sigma.mat();
    Ok(linalg::eigh(&diff).values.iter().map(|l| l.abs()).sum())
}

/// Projector onto the eigenspaces of ρ with eigenvalue > cutoff.
pub fn support_projection(rho: &DensityOperator, cutoff: f64) -> HermitianOperator {
    let eigen = rho.eigensystem();
    HermitianOperator::from_hermitian_parts(eigen.apply(|l| if l > cutoff { 1.0 } else { 0.0 }))
}

/// Generalized inverse square root: s with s·a·s = supp(a), vanishing on the
/// kernel of a. Eigenvalues in (−psd_tol, cutoff] count as kernel; anything
/// below −psd_tol is an error.
pub fn generalized_inverse_sqrt(a: &HermitianOperator, cutoff: f64) -> Result<HermitianOperator> {
    let numerics = Numerics::default();
    let eigen = a.eigh();
    if eigen.min_value() < -numerics.psd_tol.max(cutoff) {
        return Err(CqError::InvalidState(format!(
            "negative eigenvalue {:.3e} in generalized inverse sqrt",
            eigen.min_value()
        )));
    }
    Ok(HermitianOperator::from_hermitian_parts(eigen.apply(|l| {
        if l > cutoff {
            1.0 / l.sqrt()
        } else {
            0.0
        }
    })))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{cre, CMat, CVec};
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Scalar binary-entropy oracle for the derived examples.
    fn h2(p: f64) -> f64 {
        -xlog2x(p) - xlog2x(1.0 - p)
    }

    #[test]
    fn von_neumann_trivial_cases() {
        let mixed = DensityOperator::maximally_mixed(2);
        assert!((von_neumann_entropy(&mixed).unwrap() - 1.0).abs() < 1e-12);
        let pure = DensityOperator::basis_state(3, 1);
        assert!(von_neumann_entropy(&pure).unwrap().abs() < 1e-12);
    }

    #[test]
    fn von_neumann_derived_binary_spectrum() {
        // Eigenvalues (1 ± 1/√2)/2; oracle is the scalar formula.
        let lam = (1.0 + 0.5f64.sqrt()) / 2.0;
        let rho = DensityOperator::from_real_diagonal(&[lam, 1.0 - lam]).unwrap();
        let expected = h2(lam);
        assert!((expected - 0.60088).abs() < 1e-5);
        assert!((von_neumann_entropy(&rho).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn shannon_examples() {
        let half = ProbabilityVector::new(vec!["0".into(), "1".into()], vec![0.5, 0.5]).unwrap();
        assert!((shannon_entropy(&half) - 1.0).abs() < 1e-12);
        let point = ProbabilityVector::new(vec!["0".into(), "1".into()], vec![1.0, 0.0]).unwrap();
        assert_eq!(shannon_entropy(&point), 0.0);
        let skew =
            ProbabilityVector::new(vec!["0".into(), "1".into()], vec![0.8536, 0.1464]).unwrap();
        assert!((shannon_entropy(&skew) - h2(0.8536)).abs() < 1e-12);
        assert!((shannon_entropy(&skew) - 0.60088).abs() < 2e-4);
    }

    #[test]
    fn kl_examples() {
        let p = ProbabilityVector::new(vec!["0".into(), "1".into()], vec![0.7, 0.3]).unwrap();
        let q = ProbabilityVector::new(vec!["0".into(), "1".into()], vec![0.5, 0.5]).unwrap();
        assert_eq!(kl_divergence(&p, &p).unwrap(), ExtReal::Finite(0.0));
        // Scalar oracle.
        let expected = 0.7 * (0.7f64 / 0.5).log2() + 0.3 * (0.3f64 / 0.5).log2();
        assert!((expected - 0.11871).abs() < 1e-5);
        let got = kl_divergence(&p, &q).unwrap().expect_finite("kl");
        assert!((got - expected).abs() < 1e-12);

        let e0 = ProbabilityVector::new(vec!["0".into(), "1".into()], vec![1.0, 0.0]).unwrap();
        let e1 = ProbabilityVector::new(vec!["0".into(), "1".into()], vec![0.0, 1.0]).unwrap();
        assert_eq!(kl_divergence(&e0, &e1).unwrap(), ExtReal::Infinity);
    }

    #[test]
    fn relative_entropy_examples() {
        let rho = DensityOperator::from_real_diagonal(&[0.7, 0.3]).unwrap();
        let sigma = DensityOperator::from_real_diagonal(&[0.5, 0.5]).unwrap();
        let expected = 0.7 * (0.7f64 / 0.5).log2() + 0.3 * (0.3f64 / 0.5).log2();
        let got = quantum_relative_entropy(&rho, &sigma)
            .unwrap()
            .expect_finite("commuting pair");
        assert!((got - expected).abs() < 1e-10);

        assert_eq!(
            quantum_relative_entropy(&rho, &rho).unwrap(),
            ExtReal::Finite(0.0)
        );
        let zero = DensityOperator::basis_state(2, 0);
        let one = DensityOperator::basis_state(2, 1);
        assert_eq!(
            quantum_relative_entropy(&zero, &one).unwrap(),
            ExtReal::Infinity
        );
    }

    #[test]
    fn measured_relative_entropy_cases() {
        let rho = DensityOperator::from_real_diagonal(&[0.7, 0.3]).unwrap();
        let sigma = DensityOperator::from_real_diagonal(&[0.5, 0.5]).unwrap();
        // Single-outcome PVM: zero information.
        let trivial = Pvm::new(vec![HermitianOperator::identity(2)]).unwrap();
        assert_eq!(
            measured_relative_entropy(&rho, &sigma, &trivial).unwrap(),
            ExtReal::Finite(0.0)
        );
        // Shared eigenbasis rank-one PVM reproduces the quantum value.
        let basis = Pvm::new(vec![
            HermitianOperator::from_real_diagonal(&[1.0, 0.0]),
            HermitianOperator::from_real_diagonal(&[0.0, 1.0]),
        ])
        .unwrap();
        let measured = measured_relative_entropy(&rho, &sigma, &basis)
            .unwrap()
            .expect_finite("measured");
        let quantum = quantum_relative_entropy(&rho, &sigma)
            .unwrap()
            .expect_finite("quantum");
        assert!((measured - quantum).abs() < 1e-10);
    }

    #[test]
    fn trace_distance_examples() {
        let rho = DensityOperator::from_real_diagonal(&[0.7, 0.3]).unwrap();
        let sigma = DensityOperator::from_real_diagonal(&[0.5, 0.5]).unwrap();
        assert!((trace_distance(&rho, &sigma).unwrap() - 0.4).abs() < 1e-12);
        assert!(trace_distance(&rho, &rho).unwrap() < 1e-12);
        let zero = DensityOperator::basis_state(2, 0);
        let one = DensityOperator::basis_state(2, 1);
        assert!((trace_distance(&zero, &one).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn support_projection_thresholds() {
        let full = DensityOperator::from_real_diagonal(&[0.6, 0.4]).unwrap();
        let id = support_projection(&full, 1e-12);
        assert!(id.max_abs_diff(&HermitianOperator::identity(2)) < 1e-12);

        let nearly = DensityOperator::from_real_diagonal(&[0.999, 1e-15])
            .unwrap_or_else(|_| DensityOperator::from_real_diagonal(&[1.0 - 1e-15, 1e-15]).unwrap());
        let proj = support_projection(&nearly, 1e-12);
        assert!(proj.max_abs_diff(&HermitianOperator::from_real_diagonal(&[1.0, 0.0])) < 1e-12);

        let pure = DensityOperator::basis_state(2, 1);
        let proj = support_projection(&pure, 1e-12);
        assert!(proj.max_abs_diff(pure.op()) < 1e-12);
    }

    #[test]
    fn generalized_inverse_sqrt_identity_and_diag() {
        let id = HermitianOperator::identity(3);
        let s = generalized_inverse_sqrt(&id, 1e-12).unwrap();
        assert!(s.max_abs_diff(&id) < 1e-12);
        let a = HermitianOperator::from_real_diagonal(&[4.0, 0.0]);
        let s = generalized_inverse_sqrt(&a, 1e-12).unwrap();
        assert!(s.max_abs_diff(&HermitianOperator::from_real_diagonal(&[0.5, 0.0])) < 1e-12);
    }

    #[test]
    fn generalized_inverse_sqrt_defining_identity() {
        // Random-ish PSD with a kernel direction.
        let g = CMat::from_row_slice(
            3,
            3,
            &[
                c(0.9, 0.0),
                c(0.2, 0.4),
                c(0.0, 0.0),
                c(0.1, -0.3),
                c(0.7, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
            ],
        );
        let psd = HermitianOperator::from_hermitian_parts(&g * g.adjoint());
        let s = generalized_inverse_sqrt(&psd, 1e-12).unwrap();
        let sas = s.mat() * psd.mat() * s.mat();
        let rho = DensityOperator::from_matrix(psd.mat().scale(1.0 / psd.trace())).unwrap();
        let supp = support_projection(&rho, 1e-12);
        assert!(linalg::max_abs_diff(&sas, supp.mat()) < 1e-8);
    }

    #[test]
    fn min_eigenvalue_examples() {
        use crate::operator::min_eigenvalue;
        assert!((min_eigenvalue(&HermitianOperator::identity(4)) - 1.0).abs() < 1e-12);
        let a = HermitianOperator::from_real_diagonal(&[0.2, 0.8]);
        assert!((min_eigenvalue(&a) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn entropy_of_pure_superposition() {
        let v = CVec::from_vec(vec![cre(0.5f64.sqrt()), cre(0.5f64.sqrt())]);
        let rho = DensityOperator::pure(&v).unwrap();
        assert!(von_neumann_entropy(&rho).unwrap().abs() < 1e-10);
    }
}
