//! Shared fixture models for the integration tests.

#![allow(dead_code)]

use umwelt_core::kernel::Kernel;
use umwelt_core::model::LoopModel;
use umwelt_core::scalar::{Rational, Scalar};
use umwelt_core::space::{FiniteSpace, SpaceRef};

use num_traits::Zero;

pub fn r(num: i64, den: i64) -> Rational {
    Rational::ratio(num, den)
}

pub fn rows(entries: &[&[(i64, i64)]]) -> Vec<Vec<Rational>> {
    entries
        .iter()
        .map(|row| row.iter().map(|&(n, d)| r(n, d)).collect())
        .collect()
}

pub fn space(name: &str, labels: &[&str]) -> SpaceRef {
    FiniteSpace::new(name, labels.iter().copied()).unwrap()
}

/// Builds a single-agent model from kernel rows; `phi` rows constant in the
/// agent coordinate when `memoryless`.
pub fn build_model(
    w: SpaceRef,
    s: SpaceRef,
    c: SpaceRef,
    a: SpaceRef,
    alpha_rows: Vec<Vec<Rational>>,
    beta_rows: Vec<Vec<Rational>>,
    phi_rows: Vec<Vec<Rational>>,
    pi_rows: Vec<Vec<Rational>>,
    memoryless: bool,
) -> LoopModel<Rational> {
    let alpha = Kernel::new("alpha", vec![a.clone(), w.clone()], vec![w.clone()], alpha_rows).unwrap();
    let beta = Kernel::new("beta", vec![w.clone()], vec![s.clone()], beta_rows).unwrap();
    let phi = Kernel::new("phi", vec![s.clone(), c.clone()], vec![c.clone()], phi_rows).unwrap();
    let pi = Kernel::new("pi", vec![c.clone()], vec![a.clone()], pi_rows).unwrap();
    LoopModel::new(w, s, c, a, alpha, beta, phi, pi, None, memoryless, Rational::zero()).unwrap()
}

/// The five-state observing agent: three states emit both sensor values at
/// even odds, one emits only 0, one only 1; the dynamics funnel everything
/// into state 4 except state 5, which loops.
pub fn five_state_hmm() -> LoopModel<Rational> {
    let w = space("W", &["1", "2", "3", "4", "5"]);
    let s = space("S", &["0", "1"]);
    let c = space("C", &["c0"]);
    let a = space("A", &["a0"]);
    let alpha_rows = rows(&[
        &[(0, 1), (1, 2), (1, 2), (0, 1), (0, 1)],
        &[(0, 1), (0, 1), (0, 1), (1, 1), (0, 1)],
        &[(0, 1), (0, 1), (0, 1), (1, 1), (0, 1)],
        &[(0, 1), (0, 1), (0, 1), (1, 1), (0, 1)],
        &[(0, 1), (0, 1), (0, 1), (0, 1), (1, 1)],
    ]);
    let beta_rows = rows(&[
        &[(1, 2), (1, 2)],
        &[(1, 1), (0, 1)],
        &[(0, 1), (1, 1)],
        &[(1, 2), (1, 2)],
        &[(1, 2), (1, 2)],
    ]);
    let phi_rows = rows(&[&[(1, 1)], &[(1, 1)]]);
    let pi_rows = rows(&[&[(1, 1)]]);
    build_model(w, s, c, a, alpha_rows, beta_rows, phi_rows, pi_rows, true)
}

/// Blind actor: one sensor value, two actions that move a three-state world.
pub fn blind_actor() -> LoopModel<Rational> {
    let w = space("W", &["x", "y", "z"]);
    let s = space("S", &["*"]);
    let c = space("C", &["c0"]);
    let a = space("A", &["stay", "step"]);
    let alpha_rows = rows(&[
        // stay
        &[(1, 1), (0, 1), (0, 1)],
        &[(0, 1), (1, 1), (0, 1)],
        &[(0, 1), (0, 1), (1, 1)],
        // step
        &[(0, 1), (1, 1), (0, 1)],
        &[(0, 1), (0, 1), (1, 1)],
        &[(1, 1), (0, 1), (0, 1)],
    ]);
    let beta_rows = rows(&[&[(1, 1)], &[(1, 1)], &[(1, 1)]]);
    let phi_rows = rows(&[&[(1, 1)]]);
    let pi_rows = rows(&[&[(1, 2), (1, 2)]]);
    build_model(w, s, c, a, alpha_rows, beta_rows, phi_rows, pi_rows, true)
}

/// Passive observer of a two-state cycle whose states share one sensor
/// emission; a third state is distinguishable.
pub fn passive_cycle() -> LoopModel<Rational> {
    let w = space("W", &["g1", "g2", "b"]);
    let s = space("S", &["good", "bad"]);
    let c = space("C", &["c0"]);
    let a = space("A", &["a0"]);
    let alpha_rows = rows(&[
        &[(0, 1), (1, 1), (0, 1)],
        &[(1, 1), (0, 1), (0, 1)],
        &[(0, 1), (0, 1), (1, 1)],
    ]);
    let beta_rows = rows(&[
        &[(1, 1), (0, 1)],
        &[(1, 1), (0, 1)],
        &[(0, 1), (1, 1)],
    ]);
    let phi_rows = rows(&[&[(1, 1)], &[(1, 1)]]);
    let pi_rows = rows(&[&[(1, 1)]]);
    build_model(w, s, c, a, alpha_rows, beta_rows, phi_rows, pi_rows, true)
}

/// Two fully distinguished states: injective Dirac sensing, identity world.
/// Here the intrinsic and extrinsic partitions already coincide.
pub fn already_minimal() -> LoopModel<Rational> {
    let w = space("W", &["x", "y"]);
    let s = space("S", &["0", "1"]);
    let c = space("C", &["c0"]);
    let a = space("A", &["a0"]);
    let alpha_rows = rows(&[&[(1, 1), (0, 1)], &[(0, 1), (1, 1)]]);
    let beta_rows = rows(&[&[(1, 1), (0, 1)], &[(0, 1), (1, 1)]]);
    let phi_rows = rows(&[&[(1, 1)], &[(1, 1)]]);
    let pi_rows = rows(&[&[(1, 1)]]);
    build_model(w, s, c, a, alpha_rows, beta_rows, phi_rows, pi_rows, true)
}

/// Fully deterministic loop (all kernels Dirac) for exact-simulation checks.
pub fn deterministic_loop() -> LoopModel<Rational> {
    let w = space("W", &["p", "q"]);
    let s = space("S", &["0", "1"]);
    let c = space("C", &["c0"]);
    let a = space("A", &["a0"]);
    let alpha_rows = rows(&[&[(0, 1), (1, 1)], &[(1, 1), (0, 1)]]);
    let beta_rows = rows(&[&[(1, 1), (0, 1)], &[(0, 1), (1, 1)]]);
    let phi_rows = rows(&[&[(1, 1)], &[(1, 1)]]);
    let pi_rows = rows(&[&[(1, 1)]]);
    build_model(w, s, c, a, alpha_rows, beta_rows, phi_rows, pi_rows, true)
}

/// The five-state fixture in float arithmetic, tolerance 1e-9.
pub fn five_state_hmm_float() -> LoopModel<f64> {
    let rational = five_state_hmm();
    to_float(&rational, 1e-9)
}

pub fn to_float(model: &LoopModel<Rational>, tol: f64) -> LoopModel<f64> {
    let conv = |k: &Kernel<Rational>, name: &str| {
        Kernel::new(
            name,
            k.source().to_vec(),
            k.target().to_vec(),
            k.rows()
                .iter()
                .map(|row| row.iter().map(Scalar::to_f64).collect())
                .collect(),
        )
        .unwrap()
    };
    LoopModel::new(
        model.world().clone(),
        model.sensors().clone(),
        model.agent().clone(),
        model.actuators().clone(),
        conv(model.alpha(), "alpha"),
        conv(model.beta(), "beta"),
        conv(model.phi(), "phi"),
        conv(model.pi(), "pi"),
        Some(model.initial().iter().map(Scalar::to_f64).collect()),
        model.memoryless(),
        tol,
    )
    .unwrap()
}
