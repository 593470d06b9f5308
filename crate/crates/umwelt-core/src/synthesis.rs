//! Minimal world models: rewriting the world update so it only uses the
//! distinctions the agent can make, without changing anything the agent
//! could ever observe.
//!
//! The construction picks one representative per sensory-equivalence class
//! (least state index, for determinism) and redirects every state's update
//! rows to its representative's: `alpha'_a(w) = alpha_a(ς(w))`. The modified
//! update is constant on intrinsic blocks, reproduces every sensor process,
//! and its own extrinsic partition collapses onto the intrinsic one — which
//! is what makes it a faithful minimal model of the world for this agent.
//!
//! Verification does not trust the construction: it re-derives equivalence
//! mechanically on a disjoint-union model carrying both updates, and
//! recomputes the extrinsic partition of the modified model from scratch.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::ModelError;
use crate::intrinsic::{build_basis, intrinsic_partition, IntrinsicResult};
use crate::kernel::Kernel;
use crate::model::{ActionWord, LoopModel, SensorWord};
use crate::partition::Partition;
use crate::refinement::w_sep;
use crate::scalar::Scalar;
use crate::space::FiniteSpace;

/// Idempotent map sending each world state to the representative of its
/// intrinsic block. The induced partition equals the intrinsic partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selector {
    map: Vec<usize>,
}

impl Selector {
    pub fn new(map: Vec<usize>) -> Result<Self, ModelError> {
        for (w, &r) in map.iter().enumerate() {
            if r >= map.len() || map[r] != r {
                return Err(ModelError::InconsistentSelector {
                    label: format!("state #{w}"),
                });
            }
        }
        Ok(Selector { map })
    }

    pub fn identity(n: usize) -> Self {
        Selector {
            map: (0..n).collect(),
        }
    }

    pub fn representative(&self, w: usize) -> usize {
        self.map[w]
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    /// Partition induced by the fibers of the selector.
    pub fn induced_partition(&self, space: &crate::space::SpaceRef) -> Partition {
        Partition::from_assignment(space.clone(), &self.map)
    }
}

/// Least-index representative per intrinsic block.
pub fn select_representatives<T: Scalar>(intr: &IntrinsicResult<T>) -> Selector {
    let p = &intr.partition;
    let mut map = vec![0; p.space().len()];
    for block in p.blocks() {
        let rep = block[0]; // canonical blocks are sorted, least first
        for &w in block {
            map[w] = rep;
        }
    }
    Selector { map }
}

/// A base model together with a replacement world update.
#[derive(Debug, Clone, PartialEq)]
pub struct ModifiedModel<T: Scalar> {
    pub base: LoopModel<T>,
    pub selector: Selector,
    pub alpha_prime: Kernel<T>,
}

impl<T: Scalar> ModifiedModel<T> {
    /// The base model with `alpha` swapped for `alpha'`.
    pub fn modified_loop(&self) -> LoopModel<T> {
        self.base
            .with_alpha(self.alpha_prime.clone())
            .expect("alpha' has the shape of alpha")
    }
}

/// Builds `alpha'_a(w) = alpha_a(ς(w))`: rows copied from representatives,
/// every other mechanism untouched.
pub fn synthesize_alpha_prime<T: Scalar>(
    model: &LoopModel<T>,
    selector: &Selector,
) -> Result<ModifiedModel<T>, ModelError> {
    let n_w = model.world().len();
    if selector.map().len() != n_w {
        return Err(ModelError::InconsistentSelector {
            label: "selector length".to_owned(),
        });
    }
    let n_a = model.actuators().len();
    let mut rows = Vec::with_capacity(n_a * n_w);
    for a in 0..n_a {
        for w in 0..n_w {
            rows.push(model.alpha_row(a, selector.representative(w)).to_vec());
        }
    }
    let alpha_prime = Kernel::new(
        "alpha_prime",
        model.alpha().source().to_vec(),
        model.alpha().target().to_vec(),
        rows,
    )?;
    Ok(ModifiedModel {
        base: model.clone(),
        selector: selector.clone(),
        alpha_prime,
    })
}

/// Convex-mixture variant: instead of copying one representative row, each
/// block's update becomes the `weights`-mixture of its members' rows (any
/// such mixture preserves the sensor process). `weights` is indexed by world
/// state and is normalized within each block; a block with no positive mass
/// is an error.
pub fn synthesize_alpha_prime_mixture<T: Scalar>(
    model: &LoopModel<T>,
    intr: &IntrinsicResult<T>,
    weights: &[T],
) -> Result<ModifiedModel<T>, ModelError> {
    let n_w = model.world().len();
    assert_eq!(weights.len(), n_w, "one weight per world state");
    let p = &intr.partition;
    let n_a = model.actuators().len();
    // normalized block mixtures
    let mut block_rows: Vec<Vec<Vec<T>>> = Vec::with_capacity(p.num_blocks());
    for block in p.blocks() {
        let total: T = block.iter().map(|&w| weights[w].clone()).sum();
        if block.iter().any(|&w| weights[w] < T::zero()) || total.is_zero() {
            return Err(ModelError::BadMixtureWeights {
                label: model.world().label(block[0]).to_owned(),
            });
        }
        let mut per_action = Vec::with_capacity(n_a);
        for a in 0..n_a {
            let mut row = vec![T::zero(); n_w];
            for &w in block {
                let lambda = weights[w].clone() / total.clone();
                for (slot, v) in row.iter_mut().zip(model.alpha_row(a, w)) {
                    *slot = slot.clone() + lambda.clone() * v.clone();
                }
            }
            per_action.push(row);
        }
        block_rows.push(per_action);
    }
    let mut rows = Vec::with_capacity(n_a * n_w);
    for a in 0..n_a {
        for w in 0..n_w {
            rows.push(block_rows[p.block_of(w)][a].clone());
        }
    }
    let alpha_prime = Kernel::new(
        "alpha_prime",
        model.alpha().source().to_vec(),
        model.alpha().target().to_vec(),
        rows,
    )?;
    Ok(ModifiedModel {
        base: model.clone(),
        selector: select_representatives(intr),
        alpha_prime,
    })
}

/// Monte Carlo leg of the equivalence certificate.
#[derive(Debug, Clone, Copy)]
pub struct McConfig {
    pub horizon: usize,
    pub samples: u64,
    pub seed: u64,
    /// Per-sensor-word deviation bound between the empirical table of the
    /// modified model and the exact table of the original.
    pub max_word_deviation: f64,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            horizon: 5,
            samples: 100_000,
            seed: 0xA11CE,
            max_word_deviation: 0.02,
        }
    }
}

#[derive(Debug, Clone)]
pub struct McReport {
    pub horizon: usize,
    pub samples: u64,
    pub seed: u64,
    /// Largest observed per-word deviation across all started states.
    pub max_word_deviation: f64,
    /// Largest observed full-table total-variation distance (informational;
    /// its noise floor grows with the table size).
    pub max_tv_distance: f64,
    pub passed: bool,
}

/// Certificate that a modified update is observationally equivalent to the
/// original: every state, started under either update, induces the same
/// sensor process for every action sequence.
#[derive(Debug, Clone)]
pub struct EquivalenceCertificate<T: Scalar> {
    pub certified: bool,
    /// States whose copies the union-model basis separated.
    pub failing_states: Vec<usize>,
    /// Shortest distinguishing action word and the sensor word whose
    /// probability differs, for the first failing state.
    pub counterexample: Option<Counterexample<T>>,
    pub monte_carlo: Option<McReport>,
}

#[derive(Debug, Clone)]
pub struct Counterexample<T: Scalar> {
    pub state: usize,
    pub action_word: ActionWord,
    pub sensor_word: SensorWord,
    pub original_prob: T,
    pub modified_prob: T,
}

/// Certifies equivalence of `mod.alpha_prime` with the base update.
///
/// The check builds one model on the disjoint union of two copies of the
/// world — the original update on the first copy, the modified one on the
/// second, sensors shared — and asks the equivalence basis of that model
/// whether each state is equivalent to its copy. That decides all horizons
/// at once. On failure the shortest distinguishing word is found by direct
/// enumeration so the caller gets a concrete refutation.
pub fn verify_equivalence<T: Scalar>(
    model: &LoopModel<T>,
    modified: &ModifiedModel<T>,
    mc: Option<McConfig>,
) -> Result<EquivalenceCertificate<T>, ModelError> {
    let n_w = model.world().len();
    let union = union_model(model, &modified.alpha_prime)?;
    let basis = build_basis(&union);
    let tol = model.tolerance();
    let failing_states: Vec<usize> = (0..n_w)
        .filter(|&w| !basis.equivalent(w, n_w + w, tol))
        .collect();
    let counterexample = match failing_states.first() {
        Some(&w) => find_counterexample(model, modified, w)?,
        None => None,
    };
    let monte_carlo = match mc {
        Some(cfg) => Some(monte_carlo_check(model, modified, cfg)?),
        None => None,
    };
    let mc_ok = monte_carlo.as_ref().map_or(true, |r| r.passed);
    Ok(EquivalenceCertificate {
        certified: failing_states.is_empty() && mc_ok,
        failing_states,
        counterexample,
        monte_carlo,
    })
}

/// Disjoint union of two copies of the world, original update on the first,
/// alternative update on the second, with shared sensors and agent.
fn union_model<T: Scalar>(
    model: &LoopModel<T>,
    alpha_prime: &Kernel<T>,
) -> Result<LoopModel<T>, ModelError> {
    let n_w = model.world().len();
    let labels: Vec<String> = model
        .world()
        .labels()
        .iter()
        .map(|l| l.clone())
        .chain(model.world().labels().iter().map(|l| format!("{l}'")))
        .collect();
    let union_w = FiniteSpace::new(format!("{}+{}", model.world().name(), model.world().name()), labels)?;
    let n_a = model.actuators().len();
    let mut alpha_rows = Vec::with_capacity(n_a * 2 * n_w);
    for a in 0..n_a {
        for w in 0..n_w {
            let mut row = model.alpha_row(a, w).to_vec();
            row.extend(std::iter::repeat(T::zero()).take(n_w));
            alpha_rows.push(row);
        }
        for w in 0..n_w {
            let mut row = vec![T::zero(); n_w];
            row.extend(alpha_prime.row(a * n_w + w).iter().cloned());
            alpha_rows.push(row);
        }
    }
    let alpha = Kernel::new(
        "alpha_union",
        vec![model.actuators().clone(), union_w.clone()],
        vec![union_w.clone()],
        alpha_rows,
    )?;
    let beta_rows: Vec<Vec<T>> = (0..2 * n_w)
        .map(|i| model.beta().row(i % n_w).to_vec())
        .collect();
    let beta = Kernel::new(
        "beta_union",
        vec![union_w.clone()],
        vec![model.sensors().clone()],
        beta_rows,
    )?;
    LoopModel::new(
        union_w,
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
}

/// Shortest action word whose sensor table differs between the original and
/// the modified model started at `state`.
fn find_counterexample<T: Scalar>(
    model: &LoopModel<T>,
    modified: &ModifiedModel<T>,
    state: usize,
) -> Result<Option<Counterexample<T>>, ModelError> {
    let alt = modified.modified_loop();
    let tol = model.tolerance();
    let n_a = model.actuators().len();
    // `|W|` letters decide equivalence, so a distinguishing word of length
    // <= |W| exists whenever any does.
    let max_len = model.world().len().max(1);
    for len in 1..=max_len {
        let mut word = vec![0usize; len];
        loop {
            let aw = ActionWord(word.clone());
            let orig = model.sensor_process(state, &aw)?;
            let new = alt.sensor_process(state, &aw)?;
            for (i, (p, q)) in orig.probs().iter().zip(new.probs()).enumerate() {
                if !p.approx_eq(q, tol) {
                    return Ok(Some(Counterexample {
                        state,
                        action_word: aw.clone(),
                        sensor_word: orig.word_at(i),
                        original_prob: p.clone(),
                        modified_prob: q.clone(),
                    }));
                }
            }
            if !increment(&mut word, n_a) {
                break;
            }
        }
    }
    Ok(None)
}

fn increment(word: &mut [usize], radix: usize) -> bool {
    for slot in word.iter_mut().rev() {
        *slot += 1;
        if *slot < radix {
            return true;
        }
        *slot = 0;
    }
    false
}

/// Seeded statistical cross-check: sample the modified model and compare the
/// empirical sensor table against the exact table of the original, one
/// random action word per state.
fn monte_carlo_check<T: Scalar>(
    model: &LoopModel<T>,
    modified: &ModifiedModel<T>,
    cfg: McConfig,
) -> Result<McReport, ModelError> {
    let alt = modified.modified_loop();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n_a = model.actuators().len();
    let mut max_dev = 0.0f64;
    let mut max_tv = 0.0f64;
    for w in 0..model.world().len() {
        let word = ActionWord(
            (0..cfg.horizon)
                .map(|_| rng.gen_range(0..n_a))
                .collect(),
        );
        let exact = model.sensor_process(w, &word)?;
        let empirical = alt.simulate(w, &word, cfg.samples, cfg.seed ^ (w as u64))?;
        let dev = exact.max_word_deviation(&empirical).to_f64();
        let tv = exact.tv_distance(&empirical).to_f64();
        max_dev = max_dev.max(dev);
        max_tv = max_tv.max(tv);
    }
    Ok(McReport {
        horizon: cfg.horizon,
        samples: cfg.samples,
        seed: cfg.seed,
        max_word_deviation: max_dev,
        max_tv_distance: max_tv,
        passed: max_dev <= cfg.max_word_deviation,
    })
}

/// Minimality certificate: the extrinsic partition of the modified model,
/// recomputed from scratch, must coincide block-for-block with the intrinsic
/// partition of the original.
#[derive(Debug, Clone)]
pub struct MinimalityReport {
    pub holds: bool,
    pub w_sep_modified: Partition,
    pub intrinsic_original: Partition,
}

pub fn certify_minimal_model<T: Scalar>(
    model: &LoopModel<T>,
    modified: &ModifiedModel<T>,
) -> MinimalityReport {
    let alt = modified.modified_loop();
    let (sep_mod, _) = w_sep(&alt);
    let intr = intrinsic_partition(model);
    MinimalityReport {
        holds: sep_mod == intr.partition,
        w_sep_modified: sep_mod,
        intrinsic_original: intr.partition,
    }
}
