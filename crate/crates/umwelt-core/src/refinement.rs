//! Extrinsic world partitions: what an observer who knows the mechanisms can
//! distinguish.
//!
//! The construction starts from the distinctions the sensor kernel makes on
//! its own and repeatedly refines by the world update: two states stay
//! together only if, for every action, they push the same probability mass
//! onto every current block. The fixpoint `w_sep` is the coarsest partition
//! whose generated σ-algebra keeps `beta` measurable and every `alpha_a`
//! measurable as a self-map — equivalently, the coarsest sensor-respecting
//! probabilistic bisimulation.
//!
//! Each stage here refines the join of all previous stages, so the stage
//! sequence is monotone and must stabilize within `|W| - 1` proper steps.
//! The refinement itself is the naive `O(|W|^2 * |A| * blocks)` signature
//! scheme; at desk scale that beats the bookkeeping of smarter splitters.
//! (Optimization hook: a Paige–Tarjan-style worklist would drop the factor
//! `blocks` if larger worlds ever matter.)

use crate::error::ModelError;
use crate::model::LoopModel;
use crate::partition::{split_by_signature, Partition};
use crate::scalar::Scalar;

/// The stages of the refinement, stage `n` being the join of everything
/// learned up to depth `n`. Stages strictly refine each other until
/// `fixpoint_index`, after which nothing changes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefinementTrace {
    pub stages: Vec<Partition>,
    pub fixpoint_index: usize,
}

/// Result of an invariance check: either the partition's σ-algebra is
/// preserved by every `alpha_a` preimage, or a witness shows two states of
/// one block pushing different mass onto some block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Invariance {
    Holds,
    Violated {
        action: usize,
        w1: usize,
        w2: usize,
        block: usize,
    },
}

impl Invariance {
    pub fn holds(&self) -> bool {
        matches!(self, Invariance::Holds)
    }
}

/// Partition generated by the sensor kernel: states grouped by identical
/// `beta` rows (within the model tolerance in float mode).
pub fn sigma_beta<T: Scalar>(model: &LoopModel<T>) -> Partition {
    let base = Partition::trivial(model.world().clone());
    split_by_signature(&base, model.tolerance(), |w| model.beta().row(w).to_vec())
}

/// One refinement step: split blocks of `p` by the mass each action pushes
/// onto each block of `p`. Returns a partition refining `p`.
pub fn refine_step<T: Scalar>(model: &LoopModel<T>, p: &Partition) -> Partition {
    split_by_signature(p, model.tolerance(), |w| transition_signature(model, p, w, None))
}

/// Like [`refine_step`] but using a single action's signatures only.
pub fn refine_step_single_action<T: Scalar>(
    model: &LoopModel<T>,
    p: &Partition,
    action: usize,
) -> Partition {
    split_by_signature(p, model.tolerance(), |w| {
        transition_signature(model, p, w, Some(action))
    })
}

fn transition_signature<T: Scalar>(
    model: &LoopModel<T>,
    p: &Partition,
    w: usize,
    only_action: Option<usize>,
) -> Vec<T> {
    let actions: Vec<usize> = match only_action {
        Some(a) => vec![a],
        None => (0..model.actuators().len()).collect(),
    };
    let mut sig = Vec::with_capacity(actions.len() * p.num_blocks());
    for a in actions {
        let row = model.alpha_row(a, w);
        for block in p.blocks() {
            sig.push(block.iter().map(|&t| row[t].clone()).sum());
        }
    }
    sig
}

/// The minimal separately measurable partition: iterate [`refine_step`] from
/// [`sigma_beta`] to the fixpoint. The fixpoint is reached within `|W| - 1`
/// proper refinements.
pub fn w_sep<T: Scalar>(model: &LoopModel<T>) -> (Partition, RefinementTrace) {
    let mut stages = vec![sigma_beta(model)];
    loop {
        let current = stages.last().unwrap();
        let next = refine_step(model, current);
        if &next == current {
            break;
        }
        stages.push(next);
        debug_assert!(stages.len() <= model.world().len());
    }
    let fixpoint_index = stages.len() - 1;
    (
        stages[fixpoint_index].clone(),
        RefinementTrace {
            stages,
            fixpoint_index,
        },
    )
}

/// Memoryless-agent analogue of [`w_sep`]: the refinement signature is the
/// mass the combined kernel `kappa` puts on `{a} x B`, i.e.
/// `gamma(w)(a) * alpha(a, w)(B)`, over actions `a` and current blocks `B`.
/// Rejected for models that are not memoryless.
pub fn w_am<T: Scalar>(model: &LoopModel<T>) -> Result<Partition, ModelError> {
    if !model.memoryless() {
        return Err(ModelError::NotMemoryless);
    }
    let gamma = model.gamma()?;
    let mut current = sigma_beta(model);
    loop {
        let next = split_by_signature(&current, model.tolerance(), |w| {
            let mut sig = Vec::with_capacity(model.actuators().len() * current.num_blocks());
            for a in 0..model.actuators().len() {
                let weight = gamma.entry(w, a);
                let row = model.alpha_row(a, w);
                for block in current.blocks() {
                    let mass: T = block.iter().map(|&t| row[t].clone()).sum();
                    sig.push(weight.clone() * mass);
                }
            }
            sig
        });
        if next == current {
            return Ok(current);
        }
        current = next;
    }
}

/// Checks the invariance condition for `p`: every `alpha_a` preimage of a
/// `p`-measurable set must be `p`-measurable. In the finite case that means
/// the mass `alpha_a(w)(B)` is constant while `w` ranges over one block, for
/// every action `a` and block `B`; additivity extends this to all unions of
/// blocks.
pub fn check_invariance<T: Scalar>(model: &LoopModel<T>, p: &Partition) -> Invariance {
    let tol = model.tolerance();
    for a in 0..model.actuators().len() {
        for (block_id, _) in p.blocks().iter().enumerate() {
            for source in p.blocks() {
                let lead = source[0];
                let lead_mass: T = p.block(block_id)
                    .iter()
                    .map(|&t| model.alpha_row(a, lead)[t].clone())
                    .sum();
                for &w in &source[1..] {
                    let mass: T = p.block(block_id)
                        .iter()
                        .map(|&t| model.alpha_row(a, w)[t].clone())
                        .sum();
                    if !mass.approx_eq(&lead_mass, tol) {
                        return Invariance::Violated {
                            action: a,
                            w1: lead,
                            w2: w,
                            block: block_id,
                        };
                    }
                }
            }
        }
    }
    Invariance::Holds
}

/// How `w_am` relates to `w_sep` on one model. Reported, never asserted:
/// no containment holds in general.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmSepRelation {
    Equal,
    AmCoarser,
    AmFiner,
    Incomparable,
}

pub fn compare_am_sep<T: Scalar>(model: &LoopModel<T>) -> Result<AmSepRelation, ModelError> {
    let am = w_am(model)?;
    let (sep, _) = w_sep(model);
    Ok(relate(&am, &sep))
}

fn relate(am: &Partition, sep: &Partition) -> AmSepRelation {
    match (sep.refines(am), am.refines(sep)) {
        (true, true) => AmSepRelation::Equal,
        (true, false) => AmSepRelation::AmCoarser,
        (false, true) => AmSepRelation::AmFiner,
        (false, false) => AmSepRelation::Incomparable,
    }
}
