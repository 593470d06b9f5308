//! Loop-model operations: validation, derived kernels, sensor processes,
//! and the simulation oracle.

mod common;

use common::*;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use umwelt_core::kernel::Kernel;
use umwelt_core::model::{ActionWord, Violation};
use umwelt_core::sample::{sample_model_sized, SamplerConfig};
use umwelt_core::scalar::{Rational, Scalar};

#[test]
fn five_state_fixture_is_valid() {
    assert!(five_state_hmm().validate().is_empty());
}

#[test]
fn short_row_sum_is_reported() {
    let w = space("W", &["x"]);
    let s = space("S", &["0", "1"]);
    let c = space("C", &["c0"]);
    let a = space("A", &["a0"]);
    let model = build_model(
        w,
        s,
        c,
        a,
        rows(&[&[(1, 1)]]),
        rows(&[&[(9, 20), (9, 20)]]), // sums to 9/10
        rows(&[&[(1, 1)], &[(1, 1)]]),
        rows(&[&[(1, 1)]]),
        true,
    );
    let violations = model.validate();
    assert_eq!(violations.len(), 1);
    match &violations[0] {
        Violation::RowSum { kernel, row, sum } => {
            assert_eq!(kernel, "beta");
            assert_eq!(*row, 0);
            assert_eq!(sum, "9/10");
        }
        other => panic!("expected a row-sum violation, got {other:?}"),
    }
}

#[test]
fn memory_dependence_with_memoryless_flag_is_reported() {
    let w = space("W", &["x"]);
    let s = space("S", &["0"]);
    let c = space("C", &["c0", "c1"]);
    let a = space("A", &["a0"]);
    // phi rows differ across the agent coordinate
    let model = build_model(
        w,
        s,
        c,
        a,
        rows(&[&[(1, 1)]]),
        rows(&[&[(1, 1)]]),
        rows(&[&[(1, 1), (0, 1)], &[(0, 1), (1, 1)]]),
        rows(&[&[(1, 1)], &[(1, 1)]]),
        true,
    );
    let violations = model.validate();
    assert_eq!(violations.len(), 1);
    assert!(matches!(violations[0], Violation::Memoryless { .. }));
}

#[test]
fn sensor_followed_by_constant_action_kernel_gives_dirac_rows() {
    let model = five_state_hmm();
    let constant = Kernel::new(
        "choose",
        vec![model.sensors().clone()],
        vec![model.actuators().clone()],
        rows(&[&[(1, 1)], &[(1, 1)]]),
    )
    .unwrap();
    let composed = model.beta().compose(&constant).unwrap();
    for row in composed.rows() {
        assert_eq!(row, &[r(1, 1)]);
    }
}

#[test]
fn gamma_on_single_action_model_is_dirac() {
    let model = five_state_hmm();
    let gamma = model.gamma().unwrap();
    for w in 0..model.world().len() {
        assert_eq!(gamma.row(w), &[r(1, 1)]);
    }
}

#[test]
fn gamma_with_uniform_policy_is_uniform() {
    let w = space("W", &["x", "y"]);
    let s = space("S", &["0", "1"]);
    let c = space("C", &["c0"]);
    let a = space("A", &["l", "r", "u"]);
    let model = build_model(
        w,
        s,
        c,
        a,
        rows(&[
            &[(1, 1), (0, 1)],
            &[(0, 1), (1, 1)],
            &[(1, 1), (0, 1)],
            &[(0, 1), (1, 1)],
            &[(1, 2), (1, 2)],
            &[(1, 2), (1, 2)],
        ]),
        rows(&[&[(1, 3), (2, 3)], &[(3, 4), (1, 4)]]),
        rows(&[&[(1, 1)], &[(1, 1)]]),
        rows(&[&[(1, 3), (1, 3), (1, 3)]]),
        true,
    );
    let gamma = model.gamma().unwrap();
    for w_idx in 0..2 {
        assert_eq!(gamma.row(w_idx), &[r(1, 3), r(1, 3), r(1, 3)]);
    }
}

#[test]
fn gamma_equals_explicit_sensor_agent_enumeration() {
    let cfg = SamplerConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(301);
    for _ in 0..20 {
        let model = sample_model_sized(&mut rng, &cfg, 3, 3, 2, 2);
        let gamma = model.gamma().unwrap();
        // independent route: sum over sensor and agent paths
        let n_c = model.agent().len();
        for w in 0..3 {
            for a in 0..2 {
                let mut total = Rational::zero();
                for s in 0..3 {
                    for c in 0..n_c {
                        // memoryless: the previous agent state is irrelevant; row 0 is canonical
                        let p = model.beta().entry(w, s).clone()
                            * model.phi().entry(s * n_c, c).clone()
                            * model.pi().entry(c, a).clone();
                        total = total + p;
                    }
                }
                assert_eq!(gamma.entry(w, a), &total);
            }
        }
    }
}

#[test]
fn gamma_rejects_models_with_memory()
{
    let w = space("W", &["x"]);
    let s = space("S", &["0"]);
    let c = space("C", &["c0", "c1"]);
    let a = space("A", &["a0"]);
    let model = build_model(
        w,
        s,
        c,
        a,
        rows(&[&[(1, 1)]]),
        rows(&[&[(1, 1)]]),
        rows(&[&[(1, 1), (0, 1)], &[(0, 1), (1, 1)]]),
        rows(&[&[(1, 1)], &[(1, 1)]]),
        false,
    );
    assert!(model.gamma().is_err());
    assert!(model.kappa().is_err());
}

#[test]
fn kappa_on_single_action_model_is_gamma_tensor_alpha() {
    let model = five_state_hmm();
    let kappa = model.kappa().unwrap();
    let n_w = model.world().len();
    for w in 0..n_w {
        // single action: kappa(w)(a0, w') = alpha(a0, w)(w')
        assert_eq!(kappa.row(w), model.alpha_row(0, w));
    }
}

#[test]
fn kappa_marginals_recompose_gamma_and_alpha() {
    let cfg = SamplerConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(302);
    for _ in 0..20 {
        let model = sample_model_sized(&mut rng, &cfg, 4, 2, 3, 2);
        let gamma = model.gamma().unwrap();
        let kappa = model.kappa().unwrap();
        let n_w = 4;
        for w in 0..n_w {
            for a in 0..3 {
                let marginal: Rational = (0..n_w)
                    .map(|w2| kappa.entry(w, a * n_w + w2).clone())
                    .sum();
                assert_eq!(&marginal, gamma.entry(w, a), "A-marginal equals gamma");
                if !marginal.is_zero() {
                    for w2 in 0..n_w {
                        let conditional =
                            kappa.entry(w, a * n_w + w2).clone() / marginal.clone();
                        assert_eq!(
                            &conditional,
                            &model.alpha_row(a, w)[w2],
                            "conditional equals the world update row"
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn sensor_process_matches_hand_computed_tables() {
    let model = five_state_hmm();
    // one reading from state 1: both sensor values at 1/2
    let t1 = model
        .sensor_process(0, &ActionWord(vec![0]))
        .unwrap();
    assert_eq!(t1.probs(), &[r(1, 2), r(1, 2)]);
    // two readings from state 2: first is surely 0, then state 4 emits evenly
    let t2 = model
        .sensor_process(1, &ActionWord(vec![0, 0]))
        .unwrap();
    assert_eq!(t2.probs(), &[r(1, 2), r(1, 2), r(0, 1), r(0, 1)]);
}

#[test]
fn empty_action_word_gives_the_unit_table() {
    let model = five_state_hmm();
    let t = model.sensor_process(2, &ActionWord(vec![])).unwrap();
    assert_eq!(t.probs(), &[r(1, 1)]);
}

#[test]
fn sensor_tables_sum_to_one_exactly() {
    let cfg = SamplerConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    for _ in 0..10 {
        let model = sample_model_sized(&mut rng, &cfg, 4, 3, 2, 1);
        for w in 0..4 {
            for word in [ActionWord(vec![0]), ActionWord(vec![1, 0]), ActionWord(vec![0, 1, 1])] {
                let t = model.sensor_process(w, &word).unwrap();
                let total: Rational = t.probs().iter().cloned().sum();
                assert!(total.is_one(), "table must be a distribution");
            }
        }
    }
}

#[test]
fn oversized_horizon_is_rejected() {
    let model = five_state_hmm();
    let word = ActionWord(vec![0; 30]);
    assert!(model.sensor_process(0, &word).is_err());
    let ok = model.sensor_process_capped(0, &ActionWord(vec![0, 0]), 4);
    assert!(ok.is_ok());
    let too_small = model.sensor_process_capped(0, &ActionWord(vec![0, 0, 0]), 4);
    assert!(too_small.is_err());
}

#[test]
fn simulation_frequency_stays_near_the_exact_probability() {
    let model = five_state_hmm();
    let word = ActionWord(vec![0]);
    let empirical = model.simulate(0, &word, 100_000, 7).unwrap();
    // binomial at p = 1/2, n = 1e5: three sigma is under 0.005
    let freq0 = empirical.probs()[0].to_f64();
    assert!((freq0 - 0.5).abs() <= 0.01, "freq {freq0} too far from 1/2");
}

#[test]
fn simulation_of_deterministic_model_is_exact() {
    let model = deterministic_loop();
    let word = ActionWord(vec![0, 0, 0]);
    let exact = model.sensor_process(0, &word).unwrap();
    let empirical = model.simulate(0, &word, 500, 11).unwrap();
    assert_eq!(exact.probs(), empirical.probs());
}

#[test]
fn simulation_is_reproducible_per_seed() {
    let model = five_state_hmm();
    let word = ActionWord(vec![0, 0, 0, 0]);
    let a = model.simulate(0, &word, 5_000, 42).unwrap();
    let b = model.simulate(0, &word, 5_000, 42).unwrap();
    assert_eq!(a.probs(), b.probs());
    let c = model.simulate(0, &word, 5_000, 43).unwrap();
    assert_ne!(a.probs(), c.probs(), "different seeds should differ somewhere");
}

#[test]
fn simulation_tv_distance_within_bound_on_fixtures() {
    // statistical invariant: TV <= 0.02 at 1e5 samples, horizon <= 5
    for (model, name) in [
        (five_state_hmm(), "five-state"),
        (passive_cycle(), "passive-cycle"),
        (already_minimal(), "already-minimal"),
    ] {
        let word = ActionWord(vec![0; 5]);
        for w in 0..model.world().len() {
            let exact = model.sensor_process(w, &word).unwrap();
            let empirical = model.simulate(w, &word, 100_000, 99).unwrap();
            let tv = exact.tv_distance(&empirical).to_f64();
            assert!(tv <= 0.02, "{name}: TV {tv} at state {w}");
        }
    }
}

#[test]
fn policy_rollout_is_reproducible_and_well_typed() {
    let model = five_state_hmm();
    let a = model.rollout_policy(20, 5);
    let b = model.rollout_policy(20, 5);
    assert_eq!(a, b);
    assert_eq!(a.len(), 21);
    for (w, s, c, act) in a {
        assert!(w < 5 && s < 2 && c < 1 && act < 1);
    }
}

#[test]
fn float_mode_validates_within_epsilon() {
    let model = five_state_hmm_float();
    assert!(model.validate().is_empty());
    assert!(!model.authoritative());
}
