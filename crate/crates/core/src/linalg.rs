//! Dense complex-matrix kernels: Kronecker products, Hermitian checks, and a
//! deterministic Hermitian eigendecomposition wrapper.
//!
//! Eigendecomposition is the single spectral primitive of the crate. The
//! wrapper canonicalizes nalgebra's output so that repeated runs, and runs
//! under different thread counts, produce bit-identical spectra: eigenvalues
//! sorted descending, degenerate groups ordered lexicographically by their
//! phase-normalized eigenvector entries.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

/// Eigenvalue gap below which two eigenvalues are treated as a degenerate
/// group for ordering purposes.
const EIG_TIE_TOL: f64 = 1e-9;
/// Rounding quantum for the lexicographic tie-break on eigenvector entries.
const LEX_ROUND: f64 = 1e-9;

pub fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

pub fn cre(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn identity(dim: usize) -> CMat {
    CMat::identity(dim, dim)
}

/// Kronecker product in row-major (left factor outermost) convention.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn kron_vec(a: &CVec, b: &CVec) -> CVec {
    let mut out = CVec::from_element(a.len() * b.len(), czero());
    for i in 0..a.len() {
        for j in 0..b.len() {
            out[i * b.len() + j] = a[i] * b[j];
        }
    }
    out
}

/// Max-abs deviation of `m` from its conjugate transpose.
pub fn hermiticity_defect(m: &CMat) -> f64 {
    let adj = m.adjoint();
    (m - adj).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// (m + m†)/2, used to scrub accumulated round-off before spectral calls.
pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn trace_re(m: &CMat) -> f64 {
    m.diagonal().iter().map(|z| z.re).sum()
}

/// Re tr(a·b) for Hermitian a, b without forming the product.
pub fn trace_product_re(a: &CMat, b: &CMat) -> f64 {
    // tr(ab) = sum_{ij} a_ij b_ji; for Hermitian b, b_ji = conj(b_ij).
    let mut acc = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            let p = a[(i, j)] * b[(j, i)];
            acc += p.re;
        }
    }
    acc
}

/// Quadratic form ⟨v| m |v⟩, real part (exact for Hermitian m).
pub fn quadratic_form_re(m: &CMat, v: &CVec) -> f64 {
    let mv = m * v;
    v.iter().zip(mv.iter()).map(|(a, b)| (a.conj() * b).re).sum()
}

#[derive(Debug, Clone)]
pub struct Eigensystem {
    /// Descending.
    pub values: Vec<f64>,
    /// Column k is the eigenvector of `values[k]`.
    pub vectors: CMat,
}

impl Eigensystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, k: usize) -> CVec {
        self.vectors.column(k).into_owned()
    }

    pub fn min_value(&self) -> f64 {
        *self.values.last().expect("empty eigensystem")
    }

    /// Σ f(λ_k) v_k v_k†.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> CMat {
        let d = self.dim();
        let mut out = CMat::from_element(d, d, czero());
        for k in 0..d {
            let fv = f(self.values[k]);
            if fv == 0.0 {
                continue;
            }
            let v = self.vectors.column(k);
            for i in 0..d {
                for j in 0..d {
                    out[(i, j)] += v[i] * v[j].conj() * cre(fv);
                }
            }
        }
        out
    }
}

fn normalize_phase(v: &mut CVec) {
    // Make the largest-magnitude entry real and positive.
    let mut best = 0usize;
    let mut best_norm = 0.0;
    for (i, z) in v.iter().enumerate() {
        if z.norm() > best_norm + 1e-15 {
            best_norm = z.norm();
            best = i;
        }
    }
    if best_norm > 0.0 {
        let phase = v[best] / cre(best_norm);
        let correction = phase.conj();
        for z in v.iter_mut() {
            *z *= correction;
        }
    }
}

fn lex_cmp_rounded(a: &CVec, b: &CVec) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        let xr = (x.re / LEX_ROUND).round();
        let yr = (y.re / LEX_ROUND).round();
        if xr != yr {
            return xr.partial_cmp(&yr).unwrap();
        }
        let xi = (x.im / LEX_ROUND).round();
        let yi = (y.im / LEX_ROUND).round();
        if xi != yi {
            return xi.partial_cmp(&yi).unwrap();
        }
    }
    std::cmp::Ordering::Equal
}

/// Hermitian eigendecomposition with the canonical ordering described in the
/// module docs. The input is hermitized first; callers must validate the
/// Hermiticity tolerance themselves.
pub fn eigh(m: &CMat) -> Eigensystem {
    assert_eq!(m.nrows(), m.ncols(), "eigh expects a square matrix");
    let se = hermitize(m).symmetric_eigen();
    let d = m.nrows();
    let mut cols: Vec<(f64, CVec)> = (0..d)
        .map(|k| {
            let mut v = se.eigenvectors.column(k).into_owned();
            normalize_phase(&mut v);
            (se.eigenvalues[k], v)
        })
        .collect();
    // Descending by eigenvalue; within EIG_TIE_TOL groups, lexicographic.
    cols.sort_by(|(la, va), (lb, vb)| {
        if (la - lb).abs() <= EIG_TIE_TOL {
            lex_cmp_rounded(va, vb)
        } else {
            lb.partial_cmp(la).unwrap()
        }
    });
    // The pairwise comparator above is not transitive across chained ties, so
    // enforce descending order on the values afterwards with a stable pass.
    let mut idx: Vec<usize> = (0..d).collect();
    idx.sort_by(|&i, &j| {
        let (li, lj) = (cols[i].0, cols[j].0);
        if (li - lj).abs() <= EIG_TIE_TOL {
            std::cmp::Ordering::Equal
        } else {
            lj.partial_cmp(&li).unwrap()
        }
    });
    let values: Vec<f64> = idx.iter().map(|&i| cols[i].0).collect();
    let mut vectors = CMat::from_element(d, d, czero());
    for (k, &i) in idx.iter().enumerate() {
        vectors.set_column(k, &cols[i].1);
    }
    Eigensystem { values, vectors }
}

/// Builds an eigensystem from given (value, vector) pairs, applying the same
/// canonical ordering as `eigh`. Vectors must already be orthonormal.
pub fn eigensystem_from_pairs(pairs: Vec<(f64, CVec)>) -> Eigensystem {
    let d = pairs.len();
    let mut cols: Vec<(f64, CVec)> = pairs
        .into_iter()
        .map(|(l, mut v)| {
            normalize_phase(&mut v);
            (l, v)
        })
        .collect();
    cols.sort_by(|(la, va), (lb, vb)| {
        if (la - lb).abs() <= EIG_TIE_TOL {
            lex_cmp_rounded(va, vb)
        } else {
            lb.partial_cmp(la).unwrap()
        }
    });
    let mut idx: Vec<usize> = (0..d).collect();
    idx.sort_by(|&i, &j| {
        let (li, lj) = (cols[i].0, cols[j].0);
        if (li - lj).abs() <= EIG_TIE_TOL {
            std::cmp::Ordering::Equal
        } else {
            lj.partial_cmp(&li).unwrap()
        }
    });
    let values: Vec<f64> = idx.iter().map(|&i| cols[i].0).collect();
    let mut vectors = CMat::from_element(d, d, czero());
    for (k, &i) in idx.iter().enumerate() {
        vectors.set_column(k, &cols[i].1);
    }
    Eigensystem { values, vectors }
}

/// x·log₂(x) with the 0·log 0 := 0 convention.
pub fn xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eigh_reconstructs() {
        let m = CMat::from_row_slice(
            3,
            3,
            &[
                c(2.0, 0.0),
                c(0.5, 0.3),
                c(0.1, -0.2),
                c(0.5, -0.3),
                c(1.0, 0.0),
                c(0.4, 0.1),
                c(0.1, 0.2),
                c(0.4, -0.1),
                c(3.0, 0.0),
            ],
        );
        let e = eigh(&m);
        let rec = e.apply(|x| x);
        assert!(max_abs_diff(&m, &rec) < 1e-12);
        assert!(e.values.windows(2).all(|w| w[0] >= w[1] - 1e-12));
    }

    #[test]
    fn eigh_is_deterministic_on_degenerate_input() {
        let m = CMat::from_diagonal_element(4, 4, c(0.25, 0.0));
        let a = eigh(&m);
        let b = eigh(&m);
        assert_eq!(a.values, b.values);
        assert_eq!(a.vectors.as_slice(), b.vectors.as_slice());
    }

    #[test]
    fn kron_matches_manual() {
        let a = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)]);
        let b = CMat::from_row_slice(2, 2, &[c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let k = kron(&a, &b);
        assert_eq!(k[(0, 0)], c(0.0, 1.0));
        assert_eq!(k[(1, 1)], c(1.0, 0.0));
        assert_eq!(k[(2, 0)], c(0.0, 3.0));
        assert_eq!(k[(3, 3)], c(4.0, 0.0));
    }
}
