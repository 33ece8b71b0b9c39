//! Seeded generators for random states, channels, and unitaries.
//!
//! Used by the randomized check suites and the test corpus. All streams are
//! keyed by explicit (seed, index) pairs so suites parallelize without losing
//! reproducibility.

use crate::linalg::{czero, CMat, CVec};
use crate::operator::DensityOperator;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent stream for item `index` of the suite keyed by `seed`.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index.wrapping_add(1));
    rng
}

/// Standard normal via Box-Muller.
pub fn normal(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.random::<f64>().max(1e-300);
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

pub fn complex_normal(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(normal(rng), normal(rng))
}

pub fn ginibre(dim: usize, rng: &mut impl Rng) -> CMat {
    CMat::from_fn(dim, dim, |_, _| complex_normal(rng))
}

/// Haar-ish random unit vector.
pub fn random_unit_vector(dim: usize, rng: &mut impl Rng) -> CVec {
    loop {
        let v = CVec::from_fn(dim, |_, _| complex_normal(rng));
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return v.scale(1.0 / norm);
        }
    }
}

/// Full-rank random density operator (Hilbert-Schmidt ensemble, G G†/tr).
pub fn random_density(dim: usize, rng: &mut impl Rng) -> DensityOperator {
    let g = ginibre(dim, rng);
    let w = &g * g.adjoint();
    let tr: f64 = w.diagonal().iter().map(|z| z.re).sum();
    DensityOperator::from_matrix(w.scale(1.0 / tr)).expect("Wishart state is PSD with unit trace")
}

pub fn random_pure(dim: usize, rng: &mut impl Rng) -> DensityOperator {
    DensityOperator::pure(&random_unit_vector(dim, rng)).expect("unit vector")
}

/// Random unitary via Gram-Schmidt on a Ginibre matrix.
pub fn random_unitary(dim: usize, rng: &mut impl Rng) -> CMat {
    loop {
        let g = ginibre(dim, rng);
        let mut cols: Vec<CVec> = Vec::with_capacity(dim);
        let mut ok = true;
        for k in 0..dim {
            let mut v = g.column(k).into_owned();
            for u in &cols {
                let overlap: Complex64 = u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
                v -= u.scale_complex(overlap);
            }
            let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-8 {
                ok = false;
                break;
            }
            cols.push(v.scale(1.0 / norm));
        }
        if ok {
            let mut u = CMat::from_element(dim, dim, czero());
            for (k, col) in cols.iter().enumerate() {
                u.set_column(k, col);
            }
            return u;
        }
    }
}

/// Random probability weights (normalized exponentials, i.e. flat Dirichlet).
pub fn random_weights(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    let raw: Vec<f64> = (0..n)
        .map(|_| -(rng.random::<f64>().max(1e-300)).ln())
        .collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / sum).collect()
}

/// Interior probability weights bounded away from the boundary.
pub fn random_interior_weights(n: usize, floor: f64, rng: &mut impl Rng) -> Vec<f64> {
    let raw = random_weights(n, rng);
    let scale = 1.0 - floor * n as f64;
    raw.into_iter().map(|w| floor + scale * w).collect()
}

trait ScaleComplex {
    fn scale_complex(&self, s: Complex64) -> Self;
}

impl ScaleComplex for CVec {
    fn scale_complex(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        for z in out.iter_mut() {
            *z *= s;
        }
        out
    }
}
