use std::f64::consts::PI;

use proptest::prelude::*;
use qarb::bits::{bits_to_index, index_to_bits};
use qarb::market::TransitMatrix;
use qarb::model::{brute_force_best, Formulation};
use qarb::optim::{de_minimize, DeConfig, ObjectiveError};
use qarb::qubo::PenaltyConfig;
use qarb::sim::{simulate, CircuitSpec, Entanglement};
use qarb::vqe::{decode_bitstring, ArbitrageProblem, Readout};

fn pattern() -> impl Strategy<Value = Entanglement> {
    prop::sample::select(Entanglement::ALL.to_vec())
}

fn spec_and_params() -> impl Strategy<Value = (CircuitSpec, Vec<f64>)> {
    (2usize..7, 1usize..4, pattern()).prop_flat_map(|(n, reps, e)| {
        let spec = CircuitSpec::new(n, reps, e);
        let len = spec.num_params();
        (Just(spec), prop::collection::vec(-2.0 * PI..2.0 * PI, len))
    })
}

fn market(n: usize) -> impl Strategy<Value = TransitMatrix> {
    prop::collection::vec(-1.5f64..1.5, n * n).prop_map(move |logs| {
        let rates = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { 1.0 } else { logs[i * n + j].exp() })
                    .collect()
            })
            .collect();
        let labels = (0..n).map(|i| format!("C{i}")).collect();
        TransitMatrix::new(labels, rates).unwrap()
    })
}

fn canonical3() -> ArbitrageProblem {
    let m = TransitMatrix::from_csv_str("A,B,C\n1,2,0.5\n0.4,1,3\n1.5,0.25,1\n").unwrap();
    ArbitrageProblem::new(&m, Formulation::Selfloop, PenaltyConfig::Auto).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn states_are_normalized_and_real((spec, params) in spec_and_params()) {
        let s = simulate(&spec, &params).unwrap();
        prop_assert!((s.norm_sqr() - 1.0).abs() <= 1e-10);
        prop_assert!(s.amplitudes().iter().all(|a| a.im.abs() <= 1e-12));
    }

    #[test]
    fn rotation_periodicity((spec, params) in spec_and_params(), k in 0usize..64) {
        let k = k % params.len();
        let base = simulate(&spec, &params).unwrap();
        let mut p4 = params.clone();
        p4[k] += 4.0 * PI;
        let s4 = simulate(&spec, &p4).unwrap();
        for (a, b) in base.amplitudes().iter().zip(s4.amplitudes()) {
            prop_assert!((a - b).norm() <= 1e-10);
        }
        let mut p2 = params.clone();
        p2[k] += 2.0 * PI;
        let s2 = simulate(&spec, &p2).unwrap();
        for (a, b) in base.probabilities().iter().zip(s2.probabilities()) {
            prop_assert!((a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn sca_equals_circular_at_one_rep(n in 2usize..7, seed in any::<u64>()) {
        let sca = CircuitSpec::new(n, 1, Entanglement::Sca);
        let circ = CircuitSpec::new(n, 1, Entanglement::Circular);
        let params: Vec<f64> = (0..sca.num_params())
            .map(|k| ((seed as f64 + 1.0) * (k as f64 + 0.5)).sin() * PI)
            .collect();
        let a = simulate(&sca, &params).unwrap();
        let b = simulate(&circ, &params).unwrap();
        prop_assert_eq!(a.amplitudes(), b.amplitudes());
    }

    #[test]
    fn expectation_is_bounded_by_ground_state(params in prop::collection::vec(-PI..PI, 18)) {
        let p = canonical3();
        let (lambda_min, _) = p.hamiltonian.ground_state();
        let spec = CircuitSpec::new(9, 1, Entanglement::Sca);
        let e = simulate(&spec, &params).unwrap().expectation(&p.hamiltonian.energy_table()).unwrap();
        prop_assert!(e >= lambda_min - 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ising_matches_qubo_and_argmin_is_the_oracle(m in market(3)) {
        let p = ArbitrageProblem::new(&m, Formulation::Selfloop, PenaltyConfig::Auto).unwrap();
        let table = p.hamiltonian.energy_table();
        for idx in 0..512usize {
            let bits = index_to_bits(idx, 9);
            let q = p.qubo.energy(&bits).unwrap();
            prop_assert!((table.get(idx) - q).abs() <= 1e-9);
        }
        let (_, argmin) = p.hamiltonian.ground_state();
        let oracle = brute_force_best(&p.weights).unwrap();
        match p.decode_index(argmin) {
            Readout::Solution(s) => prop_assert!((s.log_gain - oracle.log_gain).abs() <= 1e-9),
            Readout::Infeasible => prop_assert!(false, "ground state is infeasible"),
        }
    }

    #[test]
    fn decoded_solutions_are_feasible_and_consistent(m in market(3), idx in 0usize..512) {
        let p = ArbitrageProblem::new(&m, Formulation::Selfloop, PenaltyConfig::Auto).unwrap();
        let bits = index_to_bits(idx, 9);
        if let Readout::Solution(s) = decode_bitstring(&bits, 3, &p.qp, &p.weights) {
            prop_assert!(p.qp.evaluate(&bits).unwrap().feasible);
            // feasible strings carry no penalty
            let e = p.qubo.energy(&bits).unwrap();
            prop_assert!((-s.log_gain - e).abs() <= 1e-9);
            prop_assert_eq!(bits_to_index(&s.assignment_bits(3)), idx);
        }
    }

    #[test]
    fn doubling_the_penalty_keeps_the_argmin(m in market(3)) {
        let a = ArbitrageProblem::new(&m, Formulation::Selfloop, PenaltyConfig::Auto).unwrap();
        let w = a.qubo.penalty * 2.0;
        let b = ArbitrageProblem::new(&m, Formulation::Selfloop, PenaltyConfig::Weight(w)).unwrap();
        prop_assert_eq!(a.hamiltonian.ground_state().1, b.hamiltonian.ground_state().1);
    }

    #[test]
    fn de_invariants(
        dim in 1usize..6,
        seed in any::<u64>(),
        popsize in 5usize..20,
        centre in prop::collection::vec(-2.0f64..2.0, 6),
        width in 0.1f64..3.0,
    ) {
        let bounds: Vec<(f64, f64)> = (0..dim).map(|k| (centre[k] - width, centre[k] + width)).collect();
        let cfg = DeConfig {
            popsize,
            max_generations: 40,
            bounds: bounds.clone(),
            seed,
            ..DeConfig::for_dim(dim)
        };
        let mut out_of_bounds = false;
        let mut batch_sizes = Vec::new();
        let f = |b: &[Vec<f64>], oob: &mut bool, sizes: &mut Vec<usize>| -> Result<Vec<f64>, ObjectiveError> {
            sizes.push(b.len());
            for x in b {
                for (v, &(lo, hi)) in x.iter().zip(&bounds) {
                    *oob |= *v < lo || *v > hi;
                }
            }
            Ok(b.iter().map(|x| x.iter().map(|v| (v - 0.3).powi(2) + (3.0 * v).sin()).sum()).collect())
        };
        let r = de_minimize(|b: &[Vec<f64>]| f(b, &mut out_of_bounds, &mut batch_sizes), dim, &cfg).unwrap();
        prop_assert!(!out_of_bounds);
        prop_assert!(batch_sizes.iter().all(|&s| s == popsize));
        prop_assert_eq!(r.evaluations, popsize * (r.generations + 1));
        prop_assert!(r.history.windows(2).all(|w| w[1].best <= w[0].best));
        let min_seen = r.trace.iter().copied().fold(f64::INFINITY, f64::min);
        prop_assert_eq!(r.best_value, min_seen);
        let again = de_minimize(|b: &[Vec<f64>]| f(b, &mut false, &mut Vec::new()), dim, &cfg).unwrap();
        prop_assert_eq!(r, again);
    }
}
