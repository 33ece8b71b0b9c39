//! Core operator types: Hermitian operators, density operators with a cached
//! eigendecomposition, and projection-valued measures.

use crate::error::{CqError, Result};
use crate::linalg::{self, CMat, CVec, Eigensystem};
use serde::{Deserialize, Serialize};
use std::sync::{Arc, OnceLock};

/// Tolerance knobs for state validation. An input file may override these via
/// its optional "numerics" section.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct Numerics {
    /// Max-abs deviation from the conjugate transpose.
    pub hermiticity_tol: f64,
    /// Minimum eigenvalue floor for PSD checks.
    pub psd_tol: f64,
    /// |tr - 1| tolerance for density operators.
    pub trace_tol: f64,
    /// Eigenvalues in (-psd_tol, support_cutoff] count as kernel.
    pub support_cutoff: f64,
    /// Max-abs deviation of a PVM element sum from the identity.
    pub pvm_completeness_tol: f64,
    /// ||P² - P|| tolerance for projection checks.
    pub idempotency_tol: f64,
}

impl Default for Numerics {
    fn default() -> Self {
        Numerics {
            hermiticity_tol: 1e-12,
            psd_tol: 1e-10,
            trace_tol: 1e-10,
            support_cutoff: 1e-12,
            pvm_completeness_tol: 1e-9,
            idempotency_tol: 1e-9,
        }
    }
}

/// Default per-axis entry budget for tensor powers: d^n larger than this is
/// rejected rather than silently truncated.
pub const DEFAULT_AXIS_BUDGET: usize = 4096;

// ---------------------------------------------------------------------------
// HermitianOperator
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    dim: usize,
    mat: CMat,
}

impl HermitianOperator {
    pub fn new(mat: CMat) -> Result<Self> {
        Self::new_with(mat, &Numerics::default())
    }

    pub fn new_with(mat: CMat, numerics: &Numerics) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(CqError::DimensionMismatch(format!(
                "{}x{} matrix is not square",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if mat.nrows() == 0 {
            return Err(CqError::InvalidParameter("empty matrix".into()));
        }
        let defect = linalg::hermiticity_defect(&mat);
        if defect > numerics.hermiticity_tol {
            return Err(CqError::InvalidState(format!(
                "hermiticity defect {defect:.3e} exceeds {:.3e}",
                numerics.hermiticity_tol
            )));
        }
        Ok(HermitianOperator {
            dim: mat.nrows(),
            mat: linalg::hermitize(&mat),
        })
    }

    /// Skips the Hermiticity check; for internal construction where the input
    /// is Hermitian by algebra. The matrix is still symmetrized.
    pub(crate) fn from_hermitian_parts(mat: CMat) -> Self {
        HermitianOperator {
            dim: mat.nrows(),
            mat: linalg::hermitize(&mat),
        }
    }

    pub fn identity(dim: usize) -> Self {
        HermitianOperator {
            dim,
            mat: linalg::identity(dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        HermitianOperator {
            dim,
            mat: CMat::from_element(dim, dim, linalg::czero()),
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let dim = diag.len();
        let mut mat = CMat::from_element(dim, dim, linalg::czero());
        for (i, &v) in diag.iter().enumerate() {
            mat[(i, i)] = linalg::cre(v);
        }
        HermitianOperator { dim, mat }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    pub fn into_mat(self) -> CMat {
        self.mat
    }

    pub fn eigh(&self) -> Eigensystem {
        linalg::eigh(&self.mat)
    }

    pub fn trace(&self) -> f64 {
        linalg::trace_re(&self.mat)
    }

    pub fn kron(&self, other: &HermitianOperator) -> HermitianOperator {
        HermitianOperator {
            dim: self.dim * other.dim,
            mat: linalg::kron(&self.mat, &other.mat),
        }
    }

    pub fn scale(&self, s: f64) -> HermitianOperator {
        HermitianOperator {
            dim: self.dim,
            mat: self.mat.scale(s),
        }
    }

    pub fn add(&self, other: &HermitianOperator) -> HermitianOperator {
        HermitianOperator {
            dim: self.dim,
            mat: &self.mat + &other.mat,
        }
    }

    pub fn sub(&self, other: &HermitianOperator) -> HermitianOperator {
        HermitianOperator {
            dim: self.dim,
            mat: &self.mat - &other.mat,
        }
    }

    pub fn max_abs_diff(&self, other: &HermitianOperator) -> f64 {
        linalg::max_abs_diff(&self.mat, &other.mat)
    }
}

/// Smallest eigenvalue of a Hermitian operator.
pub fn min_eigenvalue(a: &HermitianOperator) -> f64 {
    a.eigh().min_value()
}

// ---------------------------------------------------------------------------
// DensityOperator
// ---------------------------------------------------------------------------

/// PSD, unit-trace Hermitian operator with a lazily populated eigendecomposition.
///
/// The cache is behind a `OnceLock`, so concurrent first use initializes it
/// exactly once and all later spectral queries are free.
#[derive(Debug)]
pub struct DensityOperator {
    op: HermitianOperator,
    eigen: OnceLock<Arc<Eigensystem>>,
}

impl Clone for DensityOperator {
    fn clone(&self) -> Self {
        let eigen = OnceLock::new();
        if let Some(e) = self.eigen.get() {
            let _ = eigen.set(Arc::clone(e));
        }
        DensityOperator {
            op: self.op.clone(),
            eigen,
        }
    }
}

impl PartialEq for DensityOperator {
    fn eq(&self, other: &Self) -> bool {
        self.op == other.op
    }
}

impl DensityOperator {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        Self::new_with(op, &Numerics::default())
    }

    pub fn new_with(op: HermitianOperator, numerics: &Numerics) -> Result<Self> {
        let tr = op.trace();
        if (tr - 1.0).abs() > numerics.trace_tol {
            return Err(CqError::InvalidState(format!(
                "trace {tr} deviates from 1 by more than {:.3e}",
                numerics.trace_tol
            )));
        }
        let rho = DensityOperator {
            op,
            eigen: OnceLock::new(),
        };
        let min = rho.eigensystem().min_value();
        if min < -numerics.psd_tol {
            return Err(CqError::InvalidState(format!(
                "minimum eigenvalue {min:.3e} below -{:.3e}",
                numerics.psd_tol
            )));
        }
        Ok(rho)
    }

    pub fn from_matrix(mat: CMat) -> Result<Self> {
        Self::new(HermitianOperator::new(mat)?)
    }

    /// Builds the operator Σ λ_k v_k v_k† and seeds the eigen cache with the
    /// given system (canonically reordered). Lets callers with structured
    /// spectra (e.g. classical⊗quantum products) keep exact block alignment
    /// instead of re-diagonalizing a possibly degenerate matrix.
    pub fn from_eigensystem(pairs: Vec<(f64, CVec)>) -> Result<Self> {
        let eigen = linalg::eigensystem_from_pairs(pairs);
        let mat = eigen.apply(|x| x);
        let op = HermitianOperator::from_hermitian_parts(mat);
        let rho = DensityOperator::new(op)?;
        let _ = rho.eigen.set(Arc::new(eigen));
        Ok(rho)
    }

    pub fn pure(state: &CVec) -> Result<Self> {
        let norm: f64 = state.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(CqError::InvalidState(format!(
                "pure state norm² {norm} is not 1"
            )));
        }
        let d = state.len();
        let mut mat = CMat::from_element(d, d, linalg::czero());
        for i in 0..d {
            for j in 0..d {
                mat[(i, j)] = state[i] * state[j].conj();
            }
        }
        Self::from_matrix(mat)
    }

    pub fn basis_state(dim: usize, k: usize) -> Self {
        let mut diag = vec![0.0; dim];
        diag[k] = 1.0;
        DensityOperator {
            op: HermitianOperator::from_real_diagonal(&diag),
            eigen: OnceLock::new(),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityOperator {
            op: HermitianOperator::from_real_diagonal(&vec![1.0 / dim as f64; dim]),
            eigen: OnceLock::new(),
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        DensityOperator::new(HermitianOperator::from_real_diagonal(diag))
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn mat(&self) -> &CMat {
        self.op.mat()
    }

    pub fn eigensystem(&self) -> &Eigensystem {
        self.eigen
            .get_or_init(|| Arc::new(self.op.eigh()))
            .as_ref()
    }

    pub fn kron(&self, other: &DensityOperator) -> DensityOperator {
        DensityOperator {
            op: self.op.kron(&other.op),
            eigen: OnceLock::new(),
        }
    }

    /// n-fold tensor power with an entry budget on the resulting axis length.
    pub fn tensor_power(&self, n: usize, axis_budget: usize) -> Result<DensityOperator> {
        if n == 0 {
            return Err(CqError::InvalidParameter("tensor power with n = 0".into()));
        }
        let mut target = 1usize;
        for _ in 0..n {
            target = target
                .checked_mul(self.dim())
                .filter(|&t| t <= axis_budget)
                .ok_or_else(|| {
                    CqError::BudgetExceeded(format!(
                        "d^n = {}^{} exceeds axis budget {}",
                        self.dim(),
                        n,
                        axis_budget
                    ))
                })?;
        }
        let mut out = self.clone();
        for _ in 1..n {
            out = out.kron(self);
        }
        Ok(out)
    }

    /// Weighted mixture Σ w_i ρ_i. Weights must be a probability vector.
    pub fn mixture(parts: &[(f64, &DensityOperator)]) -> Result<DensityOperator> {
        if parts.is_empty() {
            return Err(CqError::InvalidParameter("empty mixture".into()));
        }
        let dim = parts[0].1.dim();
        let mut mat = CMat::from_element(dim, dim, linalg::czero());
        for (w, rho) in parts {
            if rho.dim() != dim {
                return Err(CqError::DimensionMismatch(
                    "mixture members have different dimensions".into(),
                ));
            }
            mat += rho.mat().scale(*w);
        }
        DensityOperator::from_matrix(mat)
    }
}

// ---------------------------------------------------------------------------
// Pvm
// ---------------------------------------------------------------------------

/// Finite positive-operator measurement whose elements sum to the identity.
/// Projection-valued instances additionally satisfy the idempotency check.
#[derive(Debug, Clone)]
pub struct Pvm {
    dim: usize,
    elements: Vec<HermitianOperator>,
}

impl Pvm {
    pub fn new(elements: Vec<HermitianOperator>) -> Result<Self> {
        Self::new_with(elements, &Numerics::default())
    }

    pub fn new_with(elements: Vec<HermitianOperator>, numerics: &Numerics) -> Result<Self> {
        if elements.is_empty() {
            return Err(CqError::InvalidMeasurement("no elements".into()));
        }
        let dim = elements[0].dim();
        let mut sum = CMat::from_element(dim, dim, linalg::czero());
        for (i, el) in elements.iter().enumerate() {
            if el.dim() != dim {
                return Err(CqError::DimensionMismatch(format!(
                    "element {i} has dim {} ≠ {dim}",
                    el.dim()
                )));
            }
            let min = min_eigenvalue(el);
            if min < -numerics.psd_tol {
                return Err(CqError::InvalidMeasurement(format!(
                    "element {i} has eigenvalue {min:.3e}"
                )));
            }
            sum += el.mat();
        }
        let defect = linalg::max_abs_diff(&sum, &linalg::identity(dim));
        if defect > numerics.pvm_completeness_tol {
            return Err(CqError::InvalidMeasurement(format!(
                "completeness defect {defect:.3e} exceeds {:.3e}",
                numerics.pvm_completeness_tol
            )));
        }
        Ok(Pvm { dim, elements })
    }

    /// {P, 1 − P} from a projector-like operator.
    pub fn two_outcome(p: HermitianOperator) -> Result<Self> {
        let complement = HermitianOperator::identity(p.dim()).sub(&p);
        Pvm::new(vec![p, complement])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[HermitianOperator] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &HermitianOperator {
        &self.elements[i]
    }

    /// Max ||P² − P|| over elements.
    pub fn idempotency_defect(&self) -> f64 {
        self.elements
            .iter()
            .map(|el| {
                let sq = el.mat() * el.mat();
                linalg::max_abs_diff(&sq, el.mat())
            })
            .fold(0.0, f64::max)
    }

    pub fn is_projective(&self, numerics: &Numerics) -> bool {
        self.idempotency_defect() <= numerics.idempotency_tol
    }

    /// Outcome distribution (tr ρ P_i)_i; tiny negative traces from round-off
    /// are clamped to 0.
    pub fn outcome_distribution(&self, rho: &DensityOperator) -> Result<Vec<f64>> {
        if rho.dim() != self.dim {
            return Err(CqError::DimensionMismatch(format!(
                "state dim {} vs PVM dim {}",
                rho.dim(),
                self.dim
            )));
        }
        Ok(self
            .elements
            .iter()
            .map(|el| linalg::trace_product_re(rho.mat(), el.mat()).max(0.0))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::cre;
    use num_complex::Complex64;

    #[test]
    fn density_operator_validates() {
        let bad_trace = HermitianOperator::from_real_diagonal(&[0.7, 0.7]);
        assert!(DensityOperator::new(bad_trace).is_err());
        let negative = HermitianOperator::from_real_diagonal(&[1.5, -0.5]);
        assert!(DensityOperator::new(negative).is_err());
        let ok = HermitianOperator::from_real_diagonal(&[0.25, 0.75]);
        let rho = DensityOperator::new(ok).unwrap();
        assert_eq!(rho.eigensystem().values, vec![0.75, 0.25]);
    }

    #[test]
    fn hermiticity_is_enforced() {
        let mut mat = linalg::identity(2);
        mat[(0, 1)] = Complex64::new(0.1, 0.0);
        assert!(HermitianOperator::new(mat).is_err());
    }

    #[test]
    fn pvm_checks_completeness() {
        let p = HermitianOperator::from_real_diagonal(&[1.0, 0.0]);
        let q = HermitianOperator::from_real_diagonal(&[0.0, 1.0]);
        assert!(Pvm::new(vec![p.clone(), q]).is_ok());
        assert!(Pvm::new(vec![p.clone(), p]).is_err());
    }

    #[test]
    fn tensor_power_budget() {
        let rho = DensityOperator::maximally_mixed(2);
        assert!(rho.tensor_power(12, DEFAULT_AXIS_BUDGET).is_ok());
        assert!(rho.tensor_power(13, DEFAULT_AXIS_BUDGET).is_err());
    }

    #[test]
    fn from_eigensystem_keeps_structure() {
        let v0 = CVec::from_vec(vec![cre(1.0), cre(0.0)]);
        let v1 = CVec::from_vec(vec![cre(0.0), cre(1.0)]);
        let rho = DensityOperator::from_eigensystem(vec![(0.5, v0), (0.5, v1)]).unwrap();
        // Degenerate, but the seeded cache keeps the given basis vectors,
        // reordered canonically (lexicographically smallest first on ties).
        let e = rho.eigensystem();
        assert_eq!(e.values, vec![0.5, 0.5]);
        assert_eq!(e.vectors[(1, 0)], cre(1.0));
        assert_eq!(e.vectors[(0, 1)], cre(1.0));
        assert_eq!(e.vectors[(0, 0)], cre(0.0));
    }
}
