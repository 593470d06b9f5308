//! The sensorimotor loop: four spaces, four mechanisms, and the operations
//! derived from them.
//!
//! A [`LoopModel`] couples a world `W`, sensors `S`, an agent state `C`, and
//! actuators `A` through the kernels `alpha: A x W -> W` (world update),
//! `beta: W -> S` (sensing), `phi: S x C -> C` (agent update) and
//! `pi: C -> A` (policy). Everything is immutable after construction; all
//! operations are pure.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::ModelError;
use crate::kernel::Kernel;
use crate::scalar::Scalar;
use crate::space::{product_space, ProductIndexer, SpaceRef};

/// Largest dense sensor-word table the crate will materialize (`|S|^n`).
/// Matches a horizon of 12 over a four-letter sensor alphabet.
pub const DEFAULT_TABLE_CAP: u64 = 16_777_216;

/// A finite open-loop action sequence; state indices into `A`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct ActionWord(pub Vec<usize>);

/// A finite sensor reading sequence; state indices into `S`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct SensorWord(pub Vec<usize>);

impl ActionWord {
    pub fn from_labels(space: &SpaceRef, labels: &[&str]) -> Result<Self, ModelError> {
        labels
            .iter()
            .map(|l| space.index_of(l))
            .collect::<Result<Vec<_>, _>>()
            .map(ActionWord)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn labels(&self, space: &SpaceRef) -> Vec<String> {
        self.0.iter().map(|&i| space.label(i).to_owned()).collect()
    }
}

impl SensorWord {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn labels(&self, space: &SpaceRef) -> Vec<String> {
        self.0.iter().map(|&i| space.label(i).to_owned()).collect()
    }
}

/// Distribution of length-`n` sensor words under a fixed action word.
///
/// Stored densely: entry `i` is the probability of the word whose letters are
/// the base-`|S|` digits of `i`, most significant first.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorProcess<T: Scalar> {
    sensor_space: SpaceRef,
    action_word: ActionWord,
    len: usize,
    probs: Vec<T>,
}

impl<T: Scalar> SensorProcess<T> {
    pub fn word_len(&self) -> usize {
        self.len
    }

    pub fn action_word(&self) -> &ActionWord {
        &self.action_word
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn prob(&self, word: &SensorWord) -> T {
        assert_eq!(word.len(), self.len, "sensor word length mismatch");
        self.probs[self.rank(&word.0)].clone()
    }

    fn rank(&self, letters: &[usize]) -> usize {
        let s = self.sensor_space.len();
        letters.iter().fold(0, |acc, &l| acc * s + l)
    }

    pub fn word_at(&self, mut index: usize) -> SensorWord {
        let s = self.sensor_space.len();
        let mut letters = vec![0; self.len];
        for slot in letters.iter_mut().rev() {
            *slot = index % s;
            index /= s;
        }
        SensorWord(letters)
    }

    pub fn iter(&self) -> impl Iterator<Item = (SensorWord, &T)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(|(i, p)| (self.word_at(i), p))
    }

    /// Total-variation distance, `max_B |p(B) - q(B)| = (1/2) * l1`.
    pub fn tv_distance(&self, other: &SensorProcess<T>) -> T {
        assert_eq!(self.probs.len(), other.probs.len(), "table shape mismatch");
        let l1: T = self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(p, q)| (p.clone() - q.clone()).abs())
            .sum();
        l1 / T::from_u64(2)
    }

    /// Largest single-word probability deviation, `max_w |p(w) - q(w)|`.
    pub fn max_word_deviation(&self, other: &SensorProcess<T>) -> T {
        assert_eq!(self.probs.len(), other.probs.len(), "table shape mismatch");
        let mut best = T::zero();
        for (p, q) in self.probs.iter().zip(&other.probs) {
            let d = (p.clone() - q.clone()).abs();
            if d > best {
                best = d;
            }
        }
        best
    }
}

/// One failed numeric invariant of a model; produced by
/// [`LoopModel::validate`]. Violations are data, not errors: an invalid
/// model is representable so it can be diagnosed.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NegativeEntry {
        kernel: String,
        row: usize,
        col: usize,
    },
    RowSum {
        kernel: String,
        row: usize,
        sum: String,
    },
    /// `phi` depends on the previous agent state although the model is
    /// declared memoryless.
    Memoryless {
        sensor: String,
        agent_a: String,
        agent_b: String,
    },
    InitialNegative {
        index: usize,
    },
    InitialSum {
        sum: String,
    },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::NegativeEntry { kernel, row, col } => {
                write!(f, "kernel {kernel}: negative entry at row {row}, column {col}")
            }
            Violation::RowSum { kernel, row, sum } => {
                write!(f, "kernel {kernel}: row {row} sums to {sum}, expected 1")
            }
            Violation::Memoryless { sensor, agent_a, agent_b } => write!(
                f,
                "phi marked memoryless but rows for sensor {sensor} differ between agent states {agent_a} and {agent_b}"
            ),
            Violation::InitialNegative { index } => {
                write!(f, "initial distribution: negative mass at index {index}")
            }
            Violation::InitialSum { sum } => {
                write!(f, "initial distribution sums to {sum}, expected 1")
            }
        }
    }
}

/// A complete sensorimotor loop over finite spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopModel<T: Scalar> {
    w: SpaceRef,
    s: SpaceRef,
    c: SpaceRef,
    a: SpaceRef,
    alpha: Kernel<T>,
    beta: Kernel<T>,
    phi: Kernel<T>,
    pi: Kernel<T>,
    /// Joint distribution over `W x S x C x A`, row-major. Used only by
    /// policy rollouts; the σ-algebra constructions never weight states.
    initial: Vec<T>,
    memoryless: bool,
    tol: T,
}

impl<T: Scalar> LoopModel<T> {
    /// Wires a model together, checking the causal diagram: `alpha` must map
    /// `A x W -> W`, `beta` `W -> S`, `phi` `S x C -> C`, `pi` `C -> A`.
    /// Mis-wiring is a structural error; numeric defects are left to
    /// [`validate`](Self::validate).
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        w: SpaceRef,
        s: SpaceRef,
        c: SpaceRef,
        a: SpaceRef,
        alpha: Kernel<T>,
        beta: Kernel<T>,
        phi: Kernel<T>,
        pi: Kernel<T>,
        initial: Option<Vec<T>>,
        memoryless: bool,
        tol: T,
    ) -> Result<Self, ModelError> {
        check_wiring("alpha", &alpha, &[a.clone(), w.clone()], &[w.clone()])?;
        check_wiring("beta", &beta, &[w.clone()], &[s.clone()])?;
        check_wiring("phi", &phi, &[s.clone(), c.clone()], &[c.clone()])?;
        check_wiring("pi", &pi, &[c.clone()], &[a.clone()])?;
        let joint = w.len() * s.len() * c.len() * a.len();
        let initial = match initial {
            Some(v) => {
                if v.len() != joint {
                    return Err(ModelError::KernelRowCount {
                        kernel: "initial".to_owned(),
                        expected: joint,
                        found: v.len(),
                    });
                }
                v
            }
            None => default_initial(&w, &s, &c, &a),
        };
        Ok(LoopModel {
            w,
            s,
            c,
            a,
            alpha,
            beta,
            phi,
            pi,
            initial,
            memoryless,
            tol,
        })
    }

    pub fn world(&self) -> &SpaceRef {
        &self.w
    }

    pub fn sensors(&self) -> &SpaceRef {
        &self.s
    }

    pub fn agent(&self) -> &SpaceRef {
        &self.c
    }

    pub fn actuators(&self) -> &SpaceRef {
        &self.a
    }

    pub fn alpha(&self) -> &Kernel<T> {
        &self.alpha
    }

    pub fn beta(&self) -> &Kernel<T> {
        &self.beta
    }

    pub fn phi(&self) -> &Kernel<T> {
        &self.phi
    }

    pub fn pi(&self) -> &Kernel<T> {
        &self.pi
    }

    pub fn initial(&self) -> &[T] {
        &self.initial
    }

    pub fn memoryless(&self) -> bool {
        self.memoryless
    }

    pub fn tolerance(&self) -> &T {
        &self.tol
    }

    /// Whether equality decisions under this model are exact.
    pub fn authoritative(&self) -> bool {
        T::EXACT
    }

    /// Row of `alpha` for action `a` and world state `w`.
    pub fn alpha_row(&self, a: usize, w: usize) -> &[T] {
        self.alpha.row(a * self.w.len() + w)
    }

    /// Returns a model identical to this one with `alpha` replaced.
    pub fn with_alpha(&self, alpha: Kernel<T>) -> Result<Self, ModelError> {
        LoopModel::new(
            self.w.clone(),
            self.s.clone(),
            self.c.clone(),
            self.a.clone(),
            alpha,
            self.beta.clone(),
            self.phi.clone(),
            self.pi.clone(),
            Some(self.initial.clone()),
            self.memoryless,
            self.tol.clone(),
        )
    }

    /// Checks every numeric invariant and returns the violations found.
    /// An empty list means the model is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (name, kernel) in [
            ("alpha", &self.alpha),
            ("beta", &self.beta),
            ("phi", &self.phi),
            ("pi", &self.pi),
        ] {
            for (i, row) in kernel.rows().iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    if *v < T::zero() {
                        out.push(Violation::NegativeEntry {
                            kernel: name.to_owned(),
                            row: i,
                            col: j,
                        });
                    }
                }
                let sum: T = row.iter().cloned().sum();
                if !sum.approx_eq(&T::one(), &self.tol) {
                    out.push(Violation::RowSum {
                        kernel: name.to_owned(),
                        row: i,
                        sum: sum.render(),
                    });
                }
            }
        }
        if self.memoryless {
            // phi rows must be constant in the C coordinate of the source
            for s_idx in 0..self.s.len() {
                let base = self.phi.row(s_idx * self.c.len());
                for c_idx in 1..self.c.len() {
                    let row = self.phi.row(s_idx * self.c.len() + c_idx);
                    let same = base
                        .iter()
                        .zip(row)
                        .all(|(a, b)| a.approx_eq(b, &self.tol));
                    if !same {
                        out.push(Violation::Memoryless {
                            sensor: self.s.label(s_idx).to_owned(),
                            agent_a: self.c.label(0).to_owned(),
                            agent_b: self.c.label(c_idx).to_owned(),
                        });
                    }
                }
            }
        }
        for (i, v) in self.initial.iter().enumerate() {
            if *v < T::zero() {
                out.push(Violation::InitialNegative { index: i });
            }
        }
        let sum: T = self.initial.iter().cloned().sum();
        if !sum.approx_eq(&T::one(), &self.tol) {
            out.push(Violation::InitialSum { sum: sum.render() });
        }
        out
    }

    /// Collapses sensing, agent update and policy into one kernel
    /// `gamma: W -> A`. Only meaningful for memoryless agents, where the
    /// agent state can be integrated out in a single step.
    pub fn gamma(&self) -> Result<Kernel<T>, ModelError> {
        if !self.memoryless {
            return Err(ModelError::NotMemoryless);
        }
        let phi_s = self.phi_as_sensor_kernel()?;
        self.beta.compose(&phi_s)?.compose(&self.pi)
    }

    /// `phi` read as a kernel `S -> C`, taking the row at the first agent
    /// state (all rows agree in the memoryless case).
    fn phi_as_sensor_kernel(&self) -> Result<Kernel<T>, ModelError> {
        let rows: Vec<Vec<T>> = (0..self.s.len())
            .map(|s_idx| self.phi.row(s_idx * self.c.len()).to_vec())
            .collect();
        Kernel::new(
            "phi_sensor",
            vec![self.s.clone()],
            vec![self.c.clone()],
            rows,
        )
    }

    /// Combined one-step kernel `kappa: W -> A x W`,
    /// `kappa(w)(a, w') = gamma(w)(a) * alpha(a, w)(w')`.
    pub fn kappa(&self) -> Result<Kernel<T>, ModelError> {
        let gamma = self.gamma()?;
        let aw = product_space("AxW", &[self.a.clone(), self.w.clone()])?;
        let n_w = self.w.len();
        let rows: Vec<Vec<T>> = (0..n_w)
            .map(|w_idx| {
                let mut row = Vec::with_capacity(self.a.len() * n_w);
                for a_idx in 0..self.a.len() {
                    let weight = gamma.entry(w_idx, a_idx).clone();
                    for v in self.alpha_row(a_idx, w_idx) {
                        row.push(weight.clone() * v.clone());
                    }
                }
                row
            })
            .collect();
        Kernel::new("kappa", vec![self.w.clone()], vec![aw], rows)
    }

    /// Exact distribution of the first `n` sensor readings when the world
    /// starts at `w` and the agent's policy is overridden by the fixed action
    /// word (`n` = word length; only the first `n - 1` actions can matter,
    /// since the last one acts after the final reading).
    pub fn sensor_process(
        &self,
        w: usize,
        word: &ActionWord,
    ) -> Result<SensorProcess<T>, ModelError> {
        self.sensor_process_capped(w, word, DEFAULT_TABLE_CAP)
    }

    pub fn sensor_process_capped(
        &self,
        w: usize,
        word: &ActionWord,
        cap: u64,
    ) -> Result<SensorProcess<T>, ModelError> {
        let n = word.len();
        let table_size = (self.s.len() as u64)
            .checked_pow(n as u32)
            .filter(|&sz| sz <= cap)
            .ok_or_else(|| ModelError::CapExceeded {
                what: format!("sensor-word table at horizon {n}"),
                needed: (self.s.len() as u64).saturating_pow(n as u32),
                cap,
            })?;
        // Joint DP: for each sensor-word prefix keep the unnormalized
        // distribution over current world states.
        let mut layer: Vec<Vec<T>> = vec![dirac(self.w.len(), w)];
        for step in 0..n {
            let mut next: Vec<Vec<T>> = Vec::with_capacity(layer.len() * self.s.len());
            for dist in &layer {
                for s_idx in 0..self.s.len() {
                    // weight by the sensor emission at the current world state
                    let mut weighted: Vec<T> = dist
                        .iter()
                        .enumerate()
                        .map(|(w_idx, p)| p.clone() * self.beta.entry(w_idx, s_idx).clone())
                        .collect();
                    // push through the world update, except after the last reading
                    if step + 1 < n {
                        weighted = self.push_world(&weighted, word.0[step]);
                    }
                    next.push(weighted);
                }
            }
            layer = next;
        }
        debug_assert_eq!(layer.len() as u64, table_size);
        let probs: Vec<T> = layer
            .into_iter()
            .map(|dist| dist.into_iter().sum())
            .collect();
        Ok(SensorProcess {
            sensor_space: self.s.clone(),
            action_word: word.clone(),
            len: n,
            probs,
        })
    }

    fn push_world(&self, dist: &[T], action: usize) -> Vec<T> {
        let mut out = vec![T::zero(); self.w.len()];
        for (w_idx, p) in dist.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            for (slot, v) in out.iter_mut().zip(self.alpha_row(action, w_idx)) {
                *slot = slot.clone() + p.clone() * v.clone();
            }
        }
        out
    }

    /// Empirical counterpart of [`sensor_process`](Self::sensor_process):
    /// seeded rollouts, reproducible for a fixed seed. Frequencies are exact
    /// ratios `count / samples` in rational mode.
    pub fn simulate(
        &self,
        w: usize,
        word: &ActionWord,
        samples: u64,
        seed: u64,
    ) -> Result<SensorProcess<T>, ModelError> {
        assert!(samples >= 1, "need at least one sample");
        let n = word.len();
        let table_size = (self.s.len() as u64)
            .checked_pow(n as u32)
            .filter(|&sz| sz <= DEFAULT_TABLE_CAP)
            .ok_or_else(|| ModelError::CapExceeded {
                what: format!("sensor-word table at horizon {n}"),
                needed: (self.s.len() as u64).saturating_pow(n as u32),
                cap: DEFAULT_TABLE_CAP,
            })?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let beta_cdf = RowSampler::from_kernel(&self.beta);
        let alpha_cdf = RowSampler::from_kernel(&self.alpha);
        let mut counts = vec![0u64; table_size as usize];
        for _ in 0..samples {
            let mut world = w;
            let mut rank = 0usize;
            for step in 0..n {
                let s_idx = beta_cdf.sample(world, &mut rng);
                rank = rank * self.s.len() + s_idx;
                if step + 1 < n {
                    world = alpha_cdf.sample(word.0[step] * self.w.len() + world, &mut rng);
                }
            }
            counts[rank] += 1;
        }
        let probs = counts
            .into_iter()
            .map(|c| T::from_u64(c) / T::from_u64(samples))
            .collect();
        Ok(SensorProcess {
            sensor_space: self.s.clone(),
            action_word: word.clone(),
            len: n,
            probs,
        })
    }

    /// Convenience closed-loop rollout that keeps the policy in place:
    /// samples `(w, s, c, a)` trajectories from the initial distribution.
    /// Returns state-index tuples, one per step.
    pub fn rollout_policy(&self, steps: usize, seed: u64) -> Vec<(usize, usize, usize, usize)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let initial_f64: Vec<f64> = self.initial.iter().map(|v| v.to_f64()).collect();
        let joint = sample_index(&initial_f64, &mut rng);
        let idx = ProductIndexer::new(&[
            self.w.clone(),
            self.s.clone(),
            self.c.clone(),
            self.a.clone(),
        ]);
        let coords = idx.unrank(joint);
        let (mut world, mut sensor, mut agent, mut action) =
            (coords[0], coords[1], coords[2], coords[3]);
        let beta_cdf = RowSampler::from_kernel(&self.beta);
        let alpha_cdf = RowSampler::from_kernel(&self.alpha);
        let phi_cdf = RowSampler::from_kernel(&self.phi);
        let pi_cdf = RowSampler::from_kernel(&self.pi);
        let mut out = Vec::with_capacity(steps + 1);
        out.push((world, sensor, agent, action));
        for _ in 0..steps {
            world = alpha_cdf.sample(action * self.w.len() + world, &mut rng);
            sensor = beta_cdf.sample(world, &mut rng);
            agent = phi_cdf.sample(sensor * self.c.len() + agent, &mut rng);
            action = pi_cdf.sample(agent, &mut rng);
            out.push((world, sensor, agent, action));
        }
        out
    }
}

fn check_wiring<T: Scalar>(
    name: &str,
    kernel: &Kernel<T>,
    source: &[SpaceRef],
    target: &[SpaceRef],
) -> Result<(), ModelError> {
    use crate::kernel::{same_spaces, space_list_name};
    if !same_spaces(kernel.source(), source) || !same_spaces(kernel.target(), target) {
        return Err(ModelError::KernelWiring {
            kernel: name.to_owned(),
            expected_source: space_list_name(source),
            expected_target: space_list_name(target),
            found_source: space_list_name(kernel.source()),
            found_target: space_list_name(kernel.target()),
        });
    }
    Ok(())
}

/// Uniform over `W`, Dirac at the first state of `S`, `C`, and `A`.
fn default_initial<T: Scalar>(w: &SpaceRef, s: &SpaceRef, c: &SpaceRef, a: &SpaceRef) -> Vec<T> {
    let joint = w.len() * s.len() * c.len() * a.len();
    let mut out = vec![T::zero(); joint];
    let stride = s.len() * c.len() * a.len();
    let mass = T::one() / T::from_u64(w.len() as u64);
    for w_idx in 0..w.len() {
        out[w_idx * stride] = mass.clone();
    }
    out
}

fn dirac<T: Scalar>(n: usize, at: usize) -> Vec<T> {
    let mut v = vec![T::zero(); n];
    v[at] = T::one();
    v
}

/// Precomputed f64 cumulative rows for categorical sampling.
struct RowSampler {
    cdf: Vec<Vec<f64>>,
}

impl RowSampler {
    fn from_kernel<T: Scalar>(kernel: &Kernel<T>) -> Self {
        let cdf = kernel
            .rows()
            .iter()
            .map(|row| {
                let mut acc = 0.0;
                row.iter()
                    .map(|v| {
                        acc += v.to_f64();
                        acc
                    })
                    .collect()
            })
            .collect();
        RowSampler { cdf }
    }

    fn sample(&self, row: usize, rng: &mut ChaCha8Rng) -> usize {
        let cdf = &self.cdf[row];
        let u: f64 = rng.gen::<f64>() * cdf.last().copied().unwrap_or(1.0);
        cdf.iter().position(|&c| u < c).unwrap_or(cdf.len() - 1)
    }
}

fn sample_index(weights: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let total: f64 = weights.iter().sum();
    let u: f64 = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights.len() - 1
}
