//! Property tests for the structural invariants: entropy additivity, Klein,
//! measurement monotonicity, Fannes continuity, tensor subadditivity,
//! minimax concavity, memoryless extension algebra, and mixing affinity.
//!
//! Random objects are derived from proptest-generated seeds through the
//! crate's own seeded generators, so failures replay deterministically.

use cqcap::capacity::{compound_capacity, holevo_information};
use cqcap::channel::{channel_distance, mix_with_useless, CompoundSet, CqChannel};
use cqcap::entropy::{
    measured_relative_entropy, quantum_relative_entropy, trace_distance, von_neumann_entropy,
};
use cqcap::linalg;
use cqcap::operator::{min_eigenvalue, DensityOperator, HermitianOperator, Pvm};
use cqcap::prob::ProbabilityVector;
use cqcap::random;
use proptest::prelude::*;

fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

fn random_channel(a: usize, d: usize, rng: &mut impl rand::Rng) -> CqChannel {
    let outputs = (0..a).map(|_| random::random_density(d, rng)).collect();
    CqChannel::new(labels(a), outputs).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn entropy_is_additive_over_tensor_products(seed in any::<u64>(), d1 in 2usize..=4, d2 in 2usize..=4) {
        let mut rng = random::stream(seed, 0);
        let rho = random::random_density(d1, &mut rng);
        let sigma = random::random_density(d2, &mut rng);
        let joint = von_neumann_entropy(&rho.kron(&sigma)).unwrap();
        let parts = von_neumann_entropy(&rho).unwrap() + von_neumann_entropy(&sigma).unwrap();
        prop_assert!((joint - parts).abs() <= 1e-9);
    }

    #[test]
    fn klein_inequality_with_equality_condition(seed in any::<u64>(), d in 2usize..=4) {
        let mut rng = random::stream(seed, 1);
        let rho = random::random_density(d, &mut rng);
        let sigma = random::random_density(d, &mut rng);
        let rel = quantum_relative_entropy(&rho, &sigma).unwrap().expect_finite("full rank");
        prop_assert!(rel >= 0.0);
        if rel <= 1e-8 {
            prop_assert!(trace_distance(&rho, &sigma).unwrap() <= 1e-3);
        }
        let self_rel = quantum_relative_entropy(&rho, &rho).unwrap().expect_finite("identical");
        prop_assert!(self_rel.abs() <= 1e-10);
    }

    #[test]
    fn measurement_cannot_increase_relative_entropy(seed in any::<u64>(), d in 2usize..=4) {
        let mut rng = random::stream(seed, 2);
        let rho = random::random_density(d, &mut rng);
        let sigma = random::random_density(d, &mut rng);
        let quantum = quantum_relative_entropy(&rho, &sigma).unwrap().expect_finite("full rank");
        let u = random::random_unitary(d, &mut rng);
        let elements: Vec<HermitianOperator> = (0..d)
            .map(|k| {
                let col = u.column(k).into_owned();
                let mut mat = linalg::CMat::from_element(d, d, linalg::czero());
                for r in 0..d {
                    for c in 0..d {
                        mat[(r, c)] = col[r] * col[c].conj();
                    }
                }
                HermitianOperator::new(mat).unwrap()
            })
            .collect();
        let pvm = Pvm::new(elements).unwrap();
        let measured = measured_relative_entropy(&rho, &sigma, &pvm).unwrap().expect_finite("generic");
        prop_assert!(measured <= quantum + 1e-9);
    }

    #[test]
    fn coarse_graining_cannot_increase_measured_entropy(seed in any::<u64>()) {
        let d = 4usize;
        let mut rng = random::stream(seed, 3);
        let rho = random::random_density(d, &mut rng);
        let sigma = random::random_density(d, &mut rng);
        let u = random::random_unitary(d, &mut rng);
        let rank_one: Vec<HermitianOperator> = (0..d)
            .map(|k| {
                let col = u.column(k).into_owned();
                let mut mat = linalg::CMat::from_element(d, d, linalg::czero());
                for r in 0..d {
                    for c in 0..d {
                        mat[(r, c)] = col[r] * col[c].conj();
                    }
                }
                HermitianOperator::new(mat).unwrap()
            })
            .collect();
        let fine = Pvm::new(rank_one.clone()).unwrap();
        // Coarse PVM merges outcomes {0,1} and {2,3}.
        let coarse = Pvm::new(vec![
            rank_one[0].add(&rank_one[1]),
            rank_one[2].add(&rank_one[3]),
        ])
        .unwrap();
        let s_fine = measured_relative_entropy(&rho, &sigma, &fine).unwrap().expect_finite("fine");
        let s_coarse = measured_relative_entropy(&rho, &sigma, &coarse).unwrap().expect_finite("coarse");
        prop_assert!(s_fine >= s_coarse - 1e-9);
    }

    #[test]
    fn fannes_continuity_bound(seed in any::<u64>(), d in 2usize..=4, mix in 0.0f64..0.2) {
        let mut rng = random::stream(seed, 4);
        let rho = random::random_density(d, &mut rng);
        let tau = random::random_density(d, &mut rng);
        let sigma = DensityOperator::mixture(&[(1.0 - mix, &rho), (mix, &tau)]).unwrap();
        let delta = trace_distance(&rho, &sigma).unwrap();
        prop_assume!(delta > 1e-12 && delta <= 1.0 / std::f64::consts::E);
        let diff = (von_neumann_entropy(&rho).unwrap() - von_neumann_entropy(&sigma).unwrap()).abs();
        let bound = delta * (d as f64).log2() - delta * delta.log2();
        prop_assert!(diff <= bound + 1e-9);
    }

    #[test]
    fn tensor_trace_distance_is_subadditive(seed in any::<u64>(), n in 2usize..=3) {
        let mut rng = random::stream(seed, 5);
        let pairs: Vec<(DensityOperator, DensityOperator)> = (0..n)
            .map(|_| {
                (
                    random::random_density(2, &mut rng),
                    random::random_density(2, &mut rng),
                )
            })
            .collect();
        let mut rho = pairs[0].0.clone();
        let mut sigma = pairs[0].1.clone();
        let mut sum = trace_distance(&pairs[0].0, &pairs[0].1).unwrap();
        for (r, s) in &pairs[1..] {
            rho = rho.kron(r);
            sigma = sigma.kron(s);
            sum += trace_distance(r, s).unwrap();
        }
        let joint = trace_distance(&rho, &sigma).unwrap();
        prop_assert!(joint <= sum + 1e-9);
    }

    #[test]
    fn output_state_splits_over_word_concatenation(seed in any::<u64>(), total in 2usize..=5, cut in 1usize..=4) {
        prop_assume!(cut < total);
        let mut rng = random::stream(seed, 6);
        let w = random_channel(2, 2, &mut rng);
        let word: Vec<usize> = (0..total).map(|_| rng.random_range(0..2usize)).collect();
        let joint = w.output_state(&word).unwrap();
        let left = w.output_state(&word[..cut]).unwrap();
        let right = w.output_state(&word[cut..]).unwrap();
        prop_assert!(joint.op().max_abs_diff(left.kron(&right).op()) <= 1e-12);
    }

    #[test]
    fn mixing_scales_channel_distance_affinely(seed in any::<u64>(), tau in 0.01f64..=1.0) {
        let mut rng = random::stream(seed, 7);
        let w1 = random_channel(2, 2, &mut rng);
        let w2 = random_channel(2, 2, &mut rng);
        let before = channel_distance(&w1, &w2).unwrap();
        let after = channel_distance(
            &mix_with_useless(&w1, tau).unwrap(),
            &mix_with_useless(&w2, tau).unwrap(),
        )
        .unwrap();
        prop_assert!((after - (1.0 - tau) * before).abs() <= 1e-10);
    }

    #[test]
    fn mixed_product_minimum_eigenvalue_floor(seed in any::<u64>(), n in 2usize..=6) {
        // λ_min(p ⊗ σ') ≥ p_min/(n²·d) for the mixed marginal σ'.
        let mut rng = random::stream(seed, 8);
        let d = 2usize;
        let w = random_channel(3, d, &mut rng);
        let mixed = mix_with_useless(&w, 1.0 / (n * n) as f64).unwrap();
        let p = ProbabilityVector::new(
            labels(3),
            random::random_interior_weights(3, 0.05, &mut rng),
        )
        .unwrap();
        let sigma = mixed.average_output(&p).unwrap();
        let product = cqcap::capacity::classical_quantum_product(&p, &sigma);
        let p_min = p.min_positive();
        let floor = p_min / ((n * n * d) as f64);
        prop_assert!(min_eigenvalue(product.op()) >= floor - 1e-12);
    }
}

proptest! {
    // The minimax evaluations below run the full solver, so fewer cases.
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn worst_case_holevo_is_concave(seed in any::<u64>(), lam in 0.0f64..=1.0) {
        let mut rng = random::stream(seed, 9);
        let members: Vec<CqChannel> = (0..3).map(|_| random_channel(2, 2, &mut rng)).collect();
        let set = CompoundSet::new((0..3).map(|i| format!("t{i}")).collect(), members).unwrap();
        let f = |weights: &[f64]| -> f64 {
            let p = ProbabilityVector::new(labels(2), weights.to_vec()).unwrap();
            set.members()
                .iter()
                .map(|w| holevo_information(&p, w).unwrap())
                .fold(f64::INFINITY, f64::min)
        };
        let p1 = random::random_weights(2, &mut rng);
        let p2 = random::random_weights(2, &mut rng);
        let mixed: Vec<f64> = p1
            .iter()
            .zip(&p2)
            .map(|(&a, &b)| lam * a + (1.0 - lam) * b)
            .collect();
        prop_assert!(f(&mixed) >= lam * f(&p1) + (1.0 - lam) * f(&p2) - 1e-8);
    }

    #[test]
    fn capacity_range_and_set_monotonicity(seed in any::<u64>()) {
        let tol = 1e-3;
        let mut rng = random::stream(seed, 10);
        let members: Vec<CqChannel> = (0..3).map(|_| random_channel(2, 2, &mut rng)).collect();
        let small = CompoundSet::new(
            vec!["a".into(), "b".into()],
            members[..2].to_vec(),
        )
        .unwrap();
        let large = CompoundSet::new(
            vec!["a".into(), "b".into(), "c".into()],
            members.clone(),
        )
        .unwrap();
        let c_small = compound_capacity(&small, tol).unwrap();
        let c_large = compound_capacity(&large, tol).unwrap();
        // Range: 0 ≤ C ≤ min over single-channel capacities ≤ log d.
        prop_assert!(c_small.value >= 0.0);
        for w in small.members() {
            let single = CompoundSet::new(vec!["w".into()], vec![w.clone()]).unwrap();
            let c_single = compound_capacity(&single, tol).unwrap();
            prop_assert!(c_small.value <= c_single.value + 2.0 * tol);
            prop_assert!(c_single.value <= 1.0 + 1e-8);
        }
        // Adding a channel never raises the capacity.
        prop_assert!(c_large.value <= c_small.value + 2.0 * tol);
    }

    #[test]
    fn holevo_is_superadditive_over_products(seed in any::<u64>(), n in 2usize..=3) {
        // χ(ν, W^n) ≤ Σ_j χ(ν_j, W) for arbitrary input distributions ν.
        let mut rng = random::stream(seed, 11);
        let w = random_channel(2, 2, &mut rng);
        let a = 2usize;
        let words: Vec<Vec<usize>> = (0..a.pow(n as u32))
            .map(|rank| {
                (0..n)
                    .rev()
                    .map(|pos| (rank >> pos) & 1)
                    .collect()
            })
            .collect();
        let nu = random::random_weights(words.len(), &mut rng);
        // Extension channel on the product alphabet.
        let ext_outputs: Vec<DensityOperator> = words
            .iter()
            .map(|word| w.output_state(word).unwrap())
            .collect();
        let ext_labels: Vec<String> = (0..words.len()).map(|i| format!("w{i}")).collect();
        let ext = CqChannel::new(ext_labels.clone(), ext_outputs).unwrap();
        let nu_p = ProbabilityVector::new(ext_labels, nu.clone()).unwrap();
        let chi_ext = holevo_information(&nu_p, &ext).unwrap();
        // Marginals.
        let mut sum = 0.0;
        for j in 0..n {
            let mut marg = vec![0.0; a];
            for (word, &weight) in words.iter().zip(&nu) {
                marg[word[j]] += weight;
            }
            let pj = ProbabilityVector::new(labels(a), marg).unwrap();
            sum += holevo_information(&pj, &w).unwrap();
        }
        prop_assert!(chi_ext <= sum + 1e-8);
    }
}
