//! Seeded random models for property campaigns.
//!
//! Rows are built by dropping `d <= max_denominator` unit chips onto target
//! states, so every entry is a rational with denominator at most
//! `max_denominator` and rows are frequently sparse or Dirac — the shapes the
//! analyses care about. Generation is deterministic per seed.

use num_traits::Zero;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::kernel::Kernel;
use crate::model::LoopModel;
use crate::partition::Partition;
use crate::scalar::{Rational, Scalar};
use crate::space::{FiniteSpace, SpaceRef};

#[derive(Debug, Clone, Copy)]
pub struct SamplerConfig {
    pub max_world: usize,
    pub max_sensors: usize,
    pub max_actions: usize,
    pub max_agent: usize,
    pub max_denominator: u64,
    /// Generate `phi` constant in the agent coordinate so the model is
    /// memoryless (the memoryless analyses need this).
    pub memoryless: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            max_world: 8,
            max_sensors: 4,
            max_actions: 4,
            max_agent: 2,
            max_denominator: 8,
            memoryless: true,
        }
    }
}

pub fn sample_model(rng: &mut ChaCha8Rng, cfg: &SamplerConfig) -> LoopModel<Rational> {
    let n_w = rng.gen_range(1..=cfg.max_world);
    let n_s = rng.gen_range(1..=cfg.max_sensors);
    let n_a = rng.gen_range(1..=cfg.max_actions);
    let n_c = rng.gen_range(1..=cfg.max_agent);
    sample_model_sized(rng, cfg, n_w, n_s, n_a, n_c)
}

pub fn sample_model_sized(
    rng: &mut ChaCha8Rng,
    cfg: &SamplerConfig,
    n_w: usize,
    n_s: usize,
    n_a: usize,
    n_c: usize,
) -> LoopModel<Rational> {
    let w = labelled_space("W", "w", n_w);
    let s = labelled_space("S", "s", n_s);
    let c = labelled_space("C", "c", n_c);
    let a = labelled_space("A", "a", n_a);
    let alpha = random_kernel(rng, cfg, "alpha", vec![a.clone(), w.clone()], vec![w.clone()]);
    let beta = random_kernel(rng, cfg, "beta", vec![w.clone()], vec![s.clone()]);
    let phi = if cfg.memoryless {
        // one row per sensor value, repeated across agent states
        let per_sensor: Vec<Vec<Rational>> =
            (0..n_s).map(|_| random_row(rng, cfg, n_c)).collect();
        let rows: Vec<Vec<Rational>> = (0..n_s)
            .flat_map(|s_idx| std::iter::repeat(per_sensor[s_idx].clone()).take(n_c))
            .collect();
        Kernel::new("phi", vec![s.clone(), c.clone()], vec![c.clone()], rows).unwrap()
    } else {
        random_kernel(rng, cfg, "phi", vec![s.clone(), c.clone()], vec![c.clone()])
    };
    let pi = random_kernel(rng, cfg, "pi", vec![c.clone()], vec![a.clone()]);
    LoopModel::new(w, s, c, a, alpha, beta, phi, pi, None, cfg.memoryless, Rational::zero())
        .expect("sampled kernels are wired correctly")
}

fn labelled_space(name: &str, prefix: &str, n: usize) -> SpaceRef {
    FiniteSpace::new(name, (0..n).map(|i| format!("{prefix}{i}"))).unwrap()
}

fn random_kernel(
    rng: &mut ChaCha8Rng,
    cfg: &SamplerConfig,
    name: &str,
    source: Vec<SpaceRef>,
    target: Vec<SpaceRef>,
) -> Kernel<Rational> {
    let n_rows: usize = source.iter().map(|s| s.len()).product();
    let n_cols: usize = target.iter().map(|s| s.len()).product();
    let rows = (0..n_rows).map(|_| random_row(rng, cfg, n_cols)).collect();
    Kernel::new(name, source, target, rows).unwrap()
}

fn random_row(rng: &mut ChaCha8Rng, cfg: &SamplerConfig, n_cols: usize) -> Vec<Rational> {
    let den = rng.gen_range(1..=cfg.max_denominator);
    let mut counts = vec![0u64; n_cols];
    for _ in 0..den {
        counts[rng.gen_range(0..n_cols)] += 1;
    }
    counts
        .into_iter()
        .map(|c| Rational::ratio(c as i64, den as i64))
        .collect()
}

/// Random partition of an `n`-state space by independent block assignment.
pub fn sample_partition(rng: &mut ChaCha8Rng, space: &SpaceRef) -> Partition {
    let n = space.len();
    let max_blocks = rng.gen_range(1..=n);
    let assignment: Vec<usize> = (0..n).map(|_| rng.gen_range(0..max_blocks)).collect();
    Partition::from_assignment(space.clone(), &assignment)
}

pub fn anonymous_space(n: usize) -> SpaceRef {
    labelled_space("X", "x", n)
}

/// Greedy witness shrinker: tries to merge away world states while the
/// failure reproduces. Merging state `k` into state 0 deletes `k`'s rows and
/// reroutes its incoming mass, keeping every row stochastic.
pub fn shrink_model<F>(model: &LoopModel<Rational>, still_fails: F) -> LoopModel<Rational>
where
    F: Fn(&LoopModel<Rational>) -> bool,
{
    let mut current = model.clone();
    loop {
        let n_w = current.world().len();
        if n_w <= 1 {
            return current;
        }
        let mut improved = false;
        for victim in (1..n_w).rev() {
            let candidate = merge_world_state(&current, victim);
            if still_fails(&candidate) {
                current = candidate;
                improved = true;
                break;
            }
        }
        if !improved {
            return current;
        }
    }
}

fn merge_world_state(model: &LoopModel<Rational>, victim: usize) -> LoopModel<Rational> {
    let n_w = model.world().len();
    let keep: Vec<usize> = (0..n_w).filter(|&w| w != victim).collect();
    let labels: Vec<String> = keep
        .iter()
        .map(|&w| model.world().label(w).to_owned())
        .collect();
    let w_space = FiniteSpace::new(model.world().name(), labels).unwrap();
    let n_a = model.actuators().len();
    let mut alpha_rows = Vec::with_capacity(n_a * keep.len());
    for a in 0..n_a {
        for &w in &keep {
            let row = model.alpha_row(a, w);
            let mut new_row: Vec<Rational> =
                keep.iter().map(|&t| row[t].clone()).collect();
            // reroute mass aimed at the victim to the first surviving state
            new_row[0] = new_row[0].clone() + row[victim].clone();
            alpha_rows.push(new_row);
        }
    }
    let alpha = Kernel::new(
        "alpha",
        vec![model.actuators().clone(), w_space.clone()],
        vec![w_space.clone()],
        alpha_rows,
    )
    .unwrap();
    let beta_rows: Vec<Vec<Rational>> = keep
        .iter()
        .map(|&w| model.beta().row(w).to_vec())
        .collect();
    let beta = Kernel::new(
        "beta",
        vec![w_space.clone()],
        vec![model.sensors().clone()],
        beta_rows,
    )
    .unwrap();
    LoopModel::new(
        w_space,
        model.sensors().clone(),
        model.agent().clone(),
        model.actuators().clone(),
        alpha,
        beta,
        model.phi().clone(),
        model.pi().clone(),
        None,
        model.memoryless(),
        model.tolerance().clone(),
    )
    .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let cfg = SamplerConfig::default();
        let a = sample_model(&mut ChaCha8Rng::seed_from_u64(7), &cfg);
        let b = sample_model(&mut ChaCha8Rng::seed_from_u64(7), &cfg);
        assert_eq!(a, b);
        let c = sample_model(&mut ChaCha8Rng::seed_from_u64(8), &cfg);
        assert!(a != c || a.world().len() == c.world().len());
    }

    #[test]
    fn sampled_models_are_valid() {
        let cfg = SamplerConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..50 {
            let model = sample_model(&mut rng, &cfg);
            assert!(model.validate().is_empty());
        }
    }

    #[test]
    fn shrinker_merges_down_to_failure_core() {
        let cfg = SamplerConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let model = sample_model_sized(&mut rng, &cfg, 6, 2, 2, 1);
        // "failure" = has at least 3 world states; the shrinker should stop at 3
        let shrunk = shrink_model(&model, |m| m.world().len() >= 3);
        assert_eq!(shrunk.world().len(), 3);
        assert!(shrunk.validate().is_empty());
    }
}
