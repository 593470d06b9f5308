//! Sensory equivalence and the intrinsic world partition.
//!
//! Two world states are sensory-equivalent when every open-loop action
//! sequence induces identical distributions over sensor sequences. The
//! intrinsic partition collects exactly the distinctions the agent could in
//! principle make through its own sensors and actuators, with no knowledge
//! of the world mechanism.
//!
//! Deciding equality over all action sequences at once works by a spanning
//! argument standard for weighted automata: the probability of observing a
//! sensor word under an action word is a functional on world states, every
//! such functional arises from the seed functionals (the constant one and the
//! single-reading functionals `beta(., s)`) by repeated application of the
//! linear operators `v -> beta(., s) ⊙ (alpha_a · v)`, and the span of all of
//! them is reached after at most `|W|` independent vectors. Two states are
//! equivalent iff every basis vector takes the same value on both.

use crate::error::ModelError;
use crate::model::{ActionWord, LoopModel, SensorWord};
use crate::partition::{split_by_signature, Partition};
use crate::refinement::{check_invariance, w_sep, Invariance, RefinementTrace};
use crate::scalar::Scalar;

/// Linearly independent functionals spanning every sensor-word probability
/// map, each tagged with a (sensor word, action word) pair that produces it.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceBasis<T: Scalar> {
    vectors: Vec<Vec<T>>,
    words: Vec<(SensorWord, ActionWord)>,
    /// False when rank decisions were made with ε-pivoting in float mode.
    authoritative: bool,
}

impl<T: Scalar> EquivalenceBasis<T> {
    pub fn dimension(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[Vec<T>] {
        &self.vectors
    }

    pub fn generating_words(&self) -> &[(SensorWord, ActionWord)] {
        &self.words
    }

    pub fn authoritative(&self) -> bool {
        self.authoritative
    }

    /// True iff all basis functionals agree on the two states.
    pub fn equivalent(&self, w1: usize, w2: usize, tol: &T) -> bool {
        self.vectors
            .iter()
            .all(|v| v[w1].approx_eq(&v[w2], tol))
    }
}

/// Intrinsic partition together with the basis that decides it.
#[derive(Debug, Clone, PartialEq)]
pub struct IntrinsicResult<T: Scalar> {
    pub partition: Partition,
    pub basis: EquivalenceBasis<T>,
}

/// Incremental exact (or ε-pivoted) row space for independence tests.
struct RowSpace<T: Scalar> {
    /// Reduced rows, each with its pivot column.
    reduced: Vec<(usize, Vec<T>)>,
    tol: T,
}

impl<T: Scalar> RowSpace<T> {
    fn new(tol: T) -> Self {
        RowSpace {
            reduced: Vec::new(),
            tol,
        }
    }

    fn rank(&self) -> usize {
        self.reduced.len()
    }

    /// Reduces `row` against the space; inserts and reports true if a new
    /// pivot survives.
    fn insert(&mut self, row: &[T]) -> bool {
        let mut work = row.to_vec();
        for (pivot_col, pivot_row) in &self.reduced {
            let factor = work[*pivot_col].clone();
            if factor.is_zero() {
                continue;
            }
            for (w, p) in work.iter_mut().zip(pivot_row) {
                *w = w.clone() - factor.clone() * p.clone();
            }
        }
        let threshold = self.pivot_threshold(&work);
        let pivot = work.iter().position(|v| v.abs() > threshold);
        match pivot {
            Some(col) => {
                let lead = work[col].clone();
                for v in work.iter_mut() {
                    *v = v.clone() / lead.clone();
                }
                self.reduced.push((col, work));
                true
            }
            None => false,
        }
    }

    fn pivot_threshold(&self, row: &[T]) -> T {
        if T::EXACT {
            return T::zero();
        }
        // scale the tolerance by the row magnitude, floor at the raw tolerance
        let mut max = T::zero();
        for v in row {
            let a = v.abs();
            if a > max {
                max = a;
            }
        }
        let scaled = self.tol.clone() * max;
        if scaled > self.tol {
            scaled
        } else {
            self.tol.clone()
        }
    }
}

/// Builds the spanning basis by worklist closure.
///
/// Seeds are the all-ones functional (the empty observation) and one
/// functional per sensor letter; the worklist applies every operator
/// `T_{a,s}` in a fixed order, so the basis — and with it every downstream
/// report — is deterministic. Terminates after at most `|W|` insertions.
pub fn build_basis<T: Scalar>(model: &LoopModel<T>) -> EquivalenceBasis<T> {
    let n_w = model.world().len();
    let n_s = model.sensors().len();
    let n_a = model.actuators().len();
    let mut space = RowSpace::new(model.tolerance().clone());
    let mut vectors: Vec<Vec<T>> = Vec::new();
    let mut words: Vec<(SensorWord, ActionWord)> = Vec::new();
    let mut queue: std::collections::VecDeque<usize> = std::collections::VecDeque::new();

    let push = |v: Vec<T>,
                    word: (SensorWord, ActionWord),
                    space: &mut RowSpace<T>,
                    vectors: &mut Vec<Vec<T>>,
                    words: &mut Vec<(SensorWord, ActionWord)>,
                    queue: &mut std::collections::VecDeque<usize>| {
        if space.insert(&v) {
            vectors.push(v);
            words.push(word);
            queue.push_back(vectors.len() - 1);
        }
    };

    let ones = vec![T::one(); n_w];
    push(
        ones,
        (SensorWord::default(), ActionWord::default()),
        &mut space,
        &mut vectors,
        &mut words,
        &mut queue,
    );
    for s in 0..n_s {
        let v: Vec<T> = (0..n_w).map(|w| model.beta().entry(w, s).clone()).collect();
        push(
            v,
            (SensorWord(vec![s]), ActionWord::default()),
            &mut space,
            &mut vectors,
            &mut words,
            &mut queue,
        );
    }

    while let Some(i) = queue.pop_front() {
        if space.rank() == n_w {
            break; // span is already everything it can be
        }
        let base = vectors[i].clone();
        let (base_sw, base_aw) = words[i].clone();
        for a in 0..n_a {
            // alpha_a applied to the functional
            let pushed: Vec<T> = (0..n_w)
                .map(|w| {
                    model
                        .alpha_row(a, w)
                        .iter()
                        .zip(&base)
                        .filter(|(p, _)| !p.is_zero())
                        .map(|(p, v)| p.clone() * v.clone())
                        .sum()
                })
                .collect();
            for s in 0..n_s {
                let candidate: Vec<T> = (0..n_w)
                    .map(|w| model.beta().entry(w, s).clone() * pushed[w].clone())
                    .collect();
                let mut sw = vec![s];
                sw.extend(&base_sw.0);
                let mut aw = vec![a];
                aw.extend(&base_aw.0);
                push(
                    candidate,
                    (SensorWord(sw), ActionWord(aw)),
                    &mut space,
                    &mut vectors,
                    &mut words,
                    &mut queue,
                );
            }
        }
    }

    EquivalenceBasis {
        vectors,
        words,
        authoritative: T::EXACT,
    }
}

/// Partition of world states by sensory equivalence: states share a block
/// iff every basis functional agrees on them.
pub fn intrinsic_partition<T: Scalar>(model: &LoopModel<T>) -> IntrinsicResult<T> {
    let basis = build_basis(model);
    let base = Partition::trivial(model.world().clone());
    let partition = split_by_signature(&base, model.tolerance(), |w| {
        basis.vectors().iter().map(|v| v[w].clone()).collect()
    });
    IntrinsicResult { partition, basis }
}

/// Finite-horizon enumeration oracle: compares the exact sensor-word tables
/// of the two states for every action word of every length up to `horizon`.
/// Deliberately brute force; the spanning basis is checked against this.
pub fn brute_force_equivalent<T: Scalar>(
    model: &LoopModel<T>,
    w1: usize,
    w2: usize,
    horizon: usize,
    cap: u64,
) -> Result<bool, ModelError> {
    assert!(horizon >= 1, "horizon must be at least 1");
    let n_a = model.actuators().len() as u64;
    let n_s = model.sensors().len() as u64;
    let work = n_a
        .checked_pow(horizon as u32)
        .and_then(|a| n_s.checked_pow(horizon as u32).and_then(|s| a.checked_mul(s)));
    match work {
        Some(v) if v <= cap => {}
        _ => {
            return Err(ModelError::CapExceeded {
                what: format!("brute-force equivalence at horizon {horizon}"),
                needed: work.unwrap_or(u64::MAX),
                cap,
            })
        }
    }
    let tol = model.tolerance();
    for len in 1..=horizon {
        let mut word = vec![0usize; len];
        loop {
            let aw = ActionWord(word.clone());
            let t1 = model.sensor_process(w1, &aw)?;
            let t2 = model.sensor_process(w2, &aw)?;
            let agree = t1
                .probs()
                .iter()
                .zip(t2.probs())
                .all(|(p, q)| p.approx_eq(q, tol));
            if !agree {
                return Ok(false);
            }
            if !increment(&mut word, model.actuators().len()) {
                break;
            }
        }
    }
    Ok(true)
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

/// How the intrinsic partition relates to the separately measurable one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContainmentRelation {
    Equal,
    /// The intrinsic partition is strictly coarser than `w_sep`.
    StrictlyCoarser,
}

/// Containment report: the intrinsic σ-algebra always sits inside the
/// separately measurable one, and equality holds exactly when the intrinsic
/// partition itself passes the invariance check. Both routes are computed
/// and cross-checked here; an inconsistency would be a bug and comes back as
/// an error carrying the witness.
#[derive(Debug, Clone)]
pub struct ContainmentReport<T: Scalar> {
    pub intrinsic: IntrinsicResult<T>,
    pub w_sep: Partition,
    pub trace: RefinementTrace,
    pub relation: ContainmentRelation,
    pub intrinsic_invariance: Invariance,
}

/// What went wrong when the containment cross-check failed. Either case
/// indicates an implementation bug, not a property of the model.
#[derive(Debug, Clone, thiserror::Error)]
pub enum ContainmentViolation {
    #[error("states {w1} and {w2} share a w_sep block but are not sensory-equivalent")]
    NotCoarser { w1: usize, w2: usize },

    #[error("relation {relation:?} disagrees with invariance of the intrinsic partition ({invariant})")]
    InvarianceMismatch {
        relation: ContainmentRelation,
        invariant: bool,
    },
}

pub fn check_containment<T: Scalar>(
    model: &LoopModel<T>,
) -> Result<ContainmentReport<T>, ContainmentViolation> {
    let intrinsic = intrinsic_partition(model);
    let (sep, trace) = w_sep(model);
    if let Some((w1, w2)) = coarsening_witness(&sep, &intrinsic.partition) {
        return Err(ContainmentViolation::NotCoarser { w1, w2 });
    }
    let relation = if intrinsic.partition == sep {
        ContainmentRelation::Equal
    } else {
        ContainmentRelation::StrictlyCoarser
    };
    let intrinsic_invariance = check_invariance(model, &intrinsic.partition);
    let consistent = match relation {
        ContainmentRelation::Equal => intrinsic_invariance.holds(),
        ContainmentRelation::StrictlyCoarser => !intrinsic_invariance.holds(),
    };
    if !consistent {
        return Err(ContainmentViolation::InvarianceMismatch {
            relation,
            invariant: intrinsic_invariance.holds(),
        });
    }
    Ok(ContainmentReport {
        intrinsic,
        w_sep: sep,
        trace,
        relation,
        intrinsic_invariance,
    })
}

/// Two states in one `sep` block that the candidate coarsening separates,
/// if any. `coarse` must merge whole `sep` blocks to be a coarsening.
fn coarsening_witness(sep: &Partition, coarse: &Partition) -> Option<(usize, usize)> {
    for block in sep.blocks() {
        let lead = block[0];
        for &w in &block[1..] {
            if !coarse.same_block(lead, w) {
                return Some((lead, w));
            }
        }
    }
    None
}
