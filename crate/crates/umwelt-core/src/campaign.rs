//! Property campaign: the per-model checks behind `umwelt proptest` and the
//! acceptance suite, factored so each verdict is testable (and corruptible)
//! on its own.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::enumeration::coarsest_stable_partition;
use crate::error::ModelError;
use crate::intrinsic::{brute_force_equivalent, check_containment, intrinsic_partition};
use crate::model::LoopModel;
use crate::partition::Partition;
use crate::refinement::{compare_am_sep, w_sep, AmSepRelation};
use crate::sample::{sample_model, sample_partition, anonymous_space, shrink_model, SamplerConfig};
use crate::scalar::{Rational, Scalar};
use crate::synthesis::{
    certify_minimal_model, select_representatives, synthesize_alpha_prime, verify_equivalence,
};

pub const BRUTE_FORCE_CAP: u64 = 16_777_216;

/// One failed campaign check.
#[derive(Debug, Clone)]
pub struct CampaignViolation {
    pub suite: &'static str,
    pub seed_index: u64,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct CampaignSummary {
    pub models: u64,
    pub containment_checks: u64,
    pub minimality_checks: u64,
    pub oracle_checks: u64,
    pub lattice_checks: u64,
    pub structural_checks: u64,
    /// Observed `w_am` vs `w_sep` relations (equal, am-coarser, am-finer,
    /// incomparable). Informational only; no containment is a theorem here.
    pub am_sep_tally: [u64; 4],
    pub violations: Vec<CampaignViolation>,
}

impl CampaignSummary {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// The intrinsic partition must coarsen (or equal) `w_sep`, and the equality
/// case must coincide with the intrinsic partition being invariant.
pub fn containment_verdict<T: Scalar>(model: &LoopModel<T>) -> Option<String> {
    match check_containment(model) {
        Ok(_) => None,
        Err(v) => Some(v.to_string()),
    }
}

/// Synthesis must certify equivalence and minimality. `mc` optionally adds
/// the statistical cross-check.
pub fn minimality_verdict<T: Scalar>(
    model: &LoopModel<T>,
    mc: Option<crate::synthesis::McConfig>,
) -> Result<Option<String>, ModelError> {
    let intr = intrinsic_partition(model);
    let selector = select_representatives(&intr);
    let modified = synthesize_alpha_prime(model, &selector)?;
    let cert = verify_equivalence(model, &modified, mc)?;
    if !cert.certified {
        return Ok(Some(match &cert.counterexample {
            Some(ce) => format!(
                "equivalence failed at state {}: action word {:?} gives {} vs {}",
                ce.state,
                ce.action_word.0,
                ce.original_prob.render(),
                ce.modified_prob.render()
            ),
            None => "equivalence certificate failed".to_owned(),
        }));
    }
    let minimal = certify_minimal_model(model, &modified);
    if !minimal.holds {
        return Ok(Some(format!(
            "w_sep of modified model {} differs from intrinsic partition {}",
            minimal.w_sep_modified.display(),
            minimal.intrinsic_original.display()
        )));
    }
    Ok(None)
}

/// The spanning-basis partition must agree with the finite-horizon
/// enumeration at horizon `|W|` on every state pair. The two model arguments
/// are normally the same; passing different models is how the harness's own
/// failure path is exercised.
pub fn oracle_agreement_verdict<T: Scalar>(
    model_for_basis: &LoopModel<T>,
    model_for_oracle: &LoopModel<T>,
) -> Result<Option<String>, ModelError> {
    let n_w = model_for_basis.world().len();
    let horizon = n_w.max(1);
    let intr = intrinsic_partition(model_for_basis);
    for w1 in 0..n_w {
        for w2 in (w1 + 1)..n_w {
            let fast = intr.partition.same_block(w1, w2);
            let slow = brute_force_equivalent(model_for_oracle, w1, w2, horizon, BRUTE_FORCE_CAP)?;
            if fast != slow {
                return Ok(Some(format!(
                    "states {w1},{w2}: basis says {fast}, horizon-{horizon} enumeration says {slow}"
                )));
            }
        }
    }
    Ok(None)
}

/// `w_sep` must equal the exhaustively found coarsest stable partition.
pub fn exhaustive_w_sep_verdict<T: Scalar>(model: &LoopModel<T>) -> Result<Option<String>, ModelError> {
    let (sep, _) = w_sep(model);
    let brute = coarsest_stable_partition(model)?;
    if sep == brute {
        Ok(None)
    } else {
        Ok(Some(format!(
            "w_sep {} != exhaustive coarsest stable partition {}",
            sep.display(),
            brute.display()
        )))
    }
}

/// Join/meet laws on one partition pair.
pub fn lattice_verdict(p: &Partition, q: &Partition) -> Option<String> {
    let join = p.join(q).ok()?;
    let meet = p.meet(q).ok()?;
    let checks: [(&str, bool); 8] = [
        ("join commutes", join == q.join(p).unwrap()),
        ("meet commutes", meet == q.meet(p).unwrap()),
        ("join idempotent", p.join(p).unwrap() == *p),
        ("meet idempotent", p.meet(p).unwrap() == *p),
        ("join refines both", join.refines(p) && join.refines(q)),
        ("meet coarsens both", meet.coarsens(p) && meet.coarsens(q)),
        ("absorption p∨(p∧q)=p", p.join(&meet).unwrap() == *p),
        ("absorption p∧(p∨q)=p", p.meet(&join).unwrap() == *p),
    ];
    for (law, holds) in checks {
        if !holds {
            return Some(format!(
                "{law} failed for {} and {}",
                p.display(),
                q.display()
            ));
        }
    }
    None
}

/// Associativity needs a third partition.
pub fn lattice_associativity_verdict(p: &Partition, q: &Partition, r: &Partition) -> Option<String> {
    let join_assoc = p.join(q).unwrap().join(r).unwrap() == p.join(&q.join(r).unwrap()).unwrap();
    let meet_assoc = p.meet(q).unwrap().meet(r).unwrap() == p.meet(&q.meet(r).unwrap()).unwrap();
    if !join_assoc {
        return Some("join associativity failed".to_owned());
    }
    if !meet_assoc {
        return Some("meet associativity failed".to_owned());
    }
    None
}

/// Exhaustive meet minimality: every partition that coarsens both arguments
/// must coarsen their meet. Only run for small spaces.
pub fn meet_minimality_verdict(p: &Partition, q: &Partition) -> Option<String> {
    let meet = p.meet(q).unwrap();
    if !(meet.coarsens(p) && meet.coarsens(q)) {
        return Some("meet does not coarsen its arguments".to_owned());
    }
    let n = p.space().len();
    for assignment in crate::enumeration::set_partitions(n) {
        let candidate = Partition::from_assignment(p.space().clone(), &assignment);
        if candidate.coarsens(p) && candidate.coarsens(q) && !candidate.coarsens(&meet) {
            return Some(format!(
                "{} coarsens both arguments but not the meet {}",
                candidate.display(),
                meet.display()
            ));
        }
    }
    None
}

/// Structural bounds: refinement fixpoint within `|W| - 1` steps, basis
/// dimension at most `|W|`.
pub fn structural_verdict<T: Scalar>(model: &LoopModel<T>) -> Option<String> {
    let n_w = model.world().len();
    let (_, trace) = w_sep(model);
    if trace.fixpoint_index + 1 > n_w {
        return Some(format!(
            "refinement took {} stages on a {n_w}-state world",
            trace.stages.len()
        ));
    }
    let intr = intrinsic_partition(model);
    if intr.basis.dimension() > n_w {
        return Some(format!(
            "basis dimension {} exceeds |W| = {n_w}",
            intr.basis.dimension()
        ));
    }
    None
}

#[derive(Debug, Clone, Copy)]
pub struct CampaignConfig {
    pub count: u64,
    pub max_world: usize,
    pub seed: u64,
    /// Run the synthesis suite on every k-th model (it is the expensive one).
    pub minimality_every: u64,
    /// Oracle agreement only below this world size.
    pub oracle_max_world: usize,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            count: 100,
            max_world: 8,
            seed: 0,
            minimality_every: 5,
            oracle_max_world: 5,
        }
    }
}

/// Runs all suites over `count` seeded random models plus random partition
/// pairs; collects violations with shrunk witness models.
pub fn run_campaign(cfg: &CampaignConfig) -> (CampaignSummary, Option<LoopModel<Rational>>) {
    let mut summary = CampaignSummary::default();
    let mut witness: Option<LoopModel<Rational>> = None;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let sampler = SamplerConfig {
        max_world: cfg.max_world.max(1),
        ..SamplerConfig::default()
    };
    for i in 0..cfg.count {
        let model = sample_model(&mut rng, &sampler);
        summary.models += 1;

        summary.containment_checks += 1;
        if let Some(detail) = containment_verdict(&model) {
            record(
                &mut summary,
                &mut witness,
                &model,
                "containment",
                i,
                detail,
                |m| containment_verdict(m).is_some(),
            );
        }

        summary.structural_checks += 1;
        if let Some(detail) = structural_verdict(&model) {
            record(
                &mut summary,
                &mut witness,
                &model,
                "structural",
                i,
                detail,
                |m| structural_verdict(m).is_some(),
            );
        }

        if let Ok(relation) = compare_am_sep(&model) {
            let slot = match relation {
                AmSepRelation::Equal => 0,
                AmSepRelation::AmCoarser => 1,
                AmSepRelation::AmFiner => 2,
                AmSepRelation::Incomparable => 3,
            };
            summary.am_sep_tally[slot] += 1;
        }

        if cfg.minimality_every > 0 && i % cfg.minimality_every == 0 {
            summary.minimality_checks += 1;
            match minimality_verdict(&model, None) {
                Ok(None) => {}
                Ok(Some(detail)) => record(
                    &mut summary,
                    &mut witness,
                    &model,
                    "minimality",
                    i,
                    detail,
                    |m| matches!(minimality_verdict(m, None), Ok(Some(_))),
                ),
                Err(e) => record(
                    &mut summary,
                    &mut witness,
                    &model,
                    "minimality",
                    i,
                    e.to_string(),
                    |_| false,
                ),
            }
        }

        if model.world().len() <= cfg.oracle_max_world {
            summary.oracle_checks += 1;
            match oracle_agreement_verdict(&model, &model) {
                Ok(None) => {}
                Ok(Some(detail)) => record(
                    &mut summary,
                    &mut witness,
                    &model,
                    "oracle-agreement",
                    i,
                    detail,
                    |m| matches!(oracle_agreement_verdict(m, m), Ok(Some(_))),
                ),
                Err(e) => record(
                    &mut summary,
                    &mut witness,
                    &model,
                    "oracle-agreement",
                    i,
                    e.to_string(),
                    |_| false,
                ),
            }
        }

        summary.lattice_checks += 1;
        let space = anonymous_space(rng.gen_range(1..=10));
        let p = sample_partition(&mut rng, &space);
        let q = sample_partition(&mut rng, &space);
        let r = sample_partition(&mut rng, &space);
        if let Some(detail) = lattice_verdict(&p, &q)
            .or_else(|| lattice_associativity_verdict(&p, &q, &r))
        {
            summary.violations.push(CampaignViolation {
                suite: "lattice",
                seed_index: i,
                detail,
            });
        }
    }
    (summary, witness)
}

fn record<F>(
    summary: &mut CampaignSummary,
    witness: &mut Option<LoopModel<Rational>>,
    model: &LoopModel<Rational>,
    suite: &'static str,
    index: u64,
    detail: String,
    still_fails: F,
) where
    F: Fn(&LoopModel<Rational>) -> bool,
{
    summary.violations.push(CampaignViolation {
        suite,
        seed_index: index,
        detail,
    });
    if witness.is_none() {
        *witness = Some(shrink_model(model, still_fails));
    }
}
