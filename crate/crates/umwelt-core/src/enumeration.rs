//! Deliberately naive reference computations.
//!
//! Everything here exists to cross-check the fast paths by a second,
//! independent route: exhaustive enumeration of set partitions, stability
//! checked straight off the kernel rows, and sensor-word probabilities
//! stacked into a matrix whose rank bounds the equivalence basis. None of
//! this code shares logic with the algorithms it validates.

use crate::error::ModelError;
use crate::model::{ActionWord, LoopModel};
use crate::partition::Partition;
use crate::scalar::Scalar;

/// All set partitions of `{0, .., n-1}` as assignment vectors in restricted
/// growth form. `Bell(n)` of them: 1, 1, 2, 5, 15, 52, 203, ...
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut assignment = vec![0usize; n];
    fn recurse(assignment: &mut Vec<usize>, pos: usize, max_used: usize, out: &mut Vec<Vec<usize>>) {
        if pos == assignment.len() {
            out.push(assignment.clone());
            return;
        }
        for id in 0..=max_used + 1 {
            assignment[pos] = id;
            recurse(assignment, pos + 1, max_used.max(id), out);
        }
    }
    if n == 0 {
        out.push(Vec::new());
        return out;
    }
    assignment[0] = 0;
    recurse(&mut assignment, 1, 0, &mut out);
    out
}

/// Is every `beta` row constant on each block?
fn respects_sensor<T: Scalar>(model: &LoopModel<T>, p: &Partition) -> bool {
    let tol = model.tolerance();
    p.blocks().iter().all(|block| {
        let lead = model.beta().row(block[0]);
        block[1..].iter().all(|&w| {
            model
                .beta()
                .row(w)
                .iter()
                .zip(lead)
                .all(|(a, b)| a.approx_eq(b, tol))
        })
    })
}

/// Is the block mass pushed by every action constant on each block?
fn is_stable<T: Scalar>(model: &LoopModel<T>, p: &Partition) -> bool {
    let tol = model.tolerance();
    for a in 0..model.actuators().len() {
        for target in p.blocks() {
            for source in p.blocks() {
                let mass = |w: usize| -> T {
                    target
                        .iter()
                        .map(|&t| model.alpha_row(a, w)[t].clone())
                        .sum()
                };
                let lead = mass(source[0]);
                if source[1..].iter().any(|&w| !mass(w).approx_eq(&lead, tol)) {
                    return false;
                }
            }
        }
    }
    true
}

/// Exhaustive search for the coarsest sensor-respecting stable partition.
///
/// Enumerates every partition of the world, keeps the stable
/// sensor-respecting ones, and picks the one with the fewest blocks — then
/// verifies it actually coarsens every other candidate, so uniqueness of the
/// optimum is checked rather than assumed. Only sensible for small worlds.
pub fn coarsest_stable_partition<T: Scalar>(
    model: &LoopModel<T>,
) -> Result<Partition, ModelError> {
    let space = model.world().clone();
    let mut candidates: Vec<Partition> = set_partitions(space.len())
        .into_iter()
        .map(|assignment| Partition::from_assignment(space.clone(), &assignment))
        .filter(|p| respects_sensor(model, p) && is_stable(model, p))
        .collect();
    candidates.sort_by_key(Partition::num_blocks);
    let best = candidates
        .first()
        .cloned()
        .expect("the discrete partition is always a stable candidate");
    for other in &candidates {
        if !other.refines(&best) {
            return Err(ModelError::SpaceMismatch {
                context: "coarsest stable partition".to_owned(),
                expected: "a unique coarsest stable partition".to_owned(),
                found: format!(
                    "incomparable stable candidates {} and {}",
                    best.display(),
                    other.display()
                ),
            });
        }
    }
    Ok(best)
}

/// Rank of the matrix whose rows are *all* sensor-word probability
/// functionals up to `horizon`, computed via [`LoopModel::sensor_process`]
/// word by word. Bounds — and for a correct basis equals — the equivalence
/// basis dimension at that horizon.
pub fn word_functional_rank<T: Scalar>(
    model: &LoopModel<T>,
    horizon: usize,
    cap: u64,
) -> Result<usize, ModelError> {
    let n_w = model.world().len();
    let mut rows: Vec<Vec<T>> = vec![vec![T::one(); n_w]];
    for len in 1..=horizon {
        let n_words = (model.actuators().len() as u64).checked_pow(len as u32);
        let n_tables = (model.sensors().len() as u64).checked_pow(len as u32);
        match n_words.and_then(|a| n_tables.and_then(|s| a.checked_mul(s))) {
            Some(v) if v <= cap => {}
            _ => {
                return Err(ModelError::CapExceeded {
                    what: format!("word functionals at horizon {len}"),
                    needed: u64::MAX,
                    cap,
                })
            }
        }
        let mut action = vec![0usize; len];
        loop {
            let aw = ActionWord(action.clone());
            let tables: Vec<_> = (0..n_w)
                .map(|w| model.sensor_process(w, &aw))
                .collect::<Result<_, _>>()?;
            let table_len = tables[0].probs().len();
            for word_idx in 0..table_len {
                rows.push(
                    tables
                        .iter()
                        .map(|t| t.probs()[word_idx].clone())
                        .collect(),
                );
            }
            if !increment(&mut action, model.actuators().len()) {
                break;
            }
        }
    }
    Ok(rank(rows, model.tolerance()))
}

/// Plain Gaussian elimination rank with the model's tolerance as pivot
/// threshold (exact when the tolerance is zero).
pub fn rank<T: Scalar>(mut rows: Vec<Vec<T>>, tol: &T) -> usize {
    let mut rank = 0;
    let width = rows.first().map_or(0, Vec::len);
    for col in 0..width {
        let pivot = (rank..rows.len()).find(|&r| rows[r][col].abs() > *tol);
        let Some(pivot) = pivot else { continue };
        rows.swap(rank, pivot);
        let lead = rows[rank][col].clone();
        for v in rows[rank].iter_mut() {
            *v = v.clone() / lead.clone();
        }
        for r in 0..rows.len() {
            if r != rank {
                let factor = rows[r][col].clone();
                if !factor.is_zero() {
                    for c in 0..width {
                        let delta = factor.clone() * rows[rank][c].clone();
                        rows[r][c] = rows[r][c].clone() - delta;
                    }
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
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

/// Brute-force one-step law of an agent view: enumerates the partner's
/// update paths explicitly. Used to validate the derived view kernel.
pub fn enumerate_view_transition<T: Scalar>(
    m: &crate::multiagent::TwoAgentModel<T>,
    agent: usize,
    own_action: usize,
    w: usize,
    s_j: usize,
    c_j: usize,
    a_j: usize,
) -> Vec<T> {
    let _ = s_j; // the partner's current reading does not influence the step
    let partner = m.agent(1 - agent);
    let n_w = m.world().len();
    let sizes = [
        n_w,
        partner.sensors.len(),
        partner.agent.len(),
        partner.actuators.len(),
    ];
    let total: usize = sizes.iter().product();
    let mut out = vec![T::zero(); total];
    for w2 in 0..n_w {
        let p_w = match agent {
            0 => m.alpha_row(own_action, a_j, w)[w2].clone(),
            _ => m.alpha_row(a_j, own_action, w)[w2].clone(),
        };
        for s2 in 0..sizes[1] {
            let p_s = partner.beta.entry(w2, s2).clone();
            for c2 in 0..sizes[2] {
                let p_c = partner.phi.entry(s2 * sizes[2] + c_j, c2).clone();
                for a2 in 0..sizes[3] {
                    let p_a = partner.pi.entry(c2, a2).clone();
                    let idx = ((w2 * sizes[1] + s2) * sizes[2] + c2) * sizes[3] + a2;
                    out[idx] = out[idx].clone()
                        + p_w.clone() * p_s.clone() * p_c.clone() * p_a.clone();
                }
            }
        }
    }
    out
}

/// Independent σ(beta) construction by pairwise row comparison, for
/// cross-checking the signature-grouping path.
pub fn sigma_beta_pairwise<T: Scalar>(model: &LoopModel<T>) -> Partition {
    let n = model.world().len();
    let tol = model.tolerance();
    let mut assignment: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in 0..i {
            let same = model
                .beta()
                .row(i)
                .iter()
                .zip(model.beta().row(j))
                .all(|(a, b)| a.approx_eq(b, tol));
            if same {
                assignment[i] = assignment[j];
                break;
            }
        }
    }
    Partition::from_assignment(model.world().clone(), &assignment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use num_traits::Zero;

    #[test]
    fn bell_numbers() {
        for (n, bell) in [(0, 1), (1, 1), (2, 2), (3, 5), (4, 15), (5, 52), (6, 203)] {
            assert_eq!(set_partitions(n).len(), bell, "Bell({n})");
        }
    }

    #[test]
    fn rank_of_simple_matrices() {
        let tol = Rational::zero();
        let r = |n: i64| Rational::ratio(n, 1);
        assert_eq!(rank(vec![vec![r(1), r(0)], vec![r(0), r(1)]], &tol), 2);
        assert_eq!(rank(vec![vec![r(1), r(2)], vec![r(2), r(4)]], &tol), 1);
        assert_eq!(rank(vec![vec![r(0), r(0)]], &tol), 0);
    }

    #[test]
    fn all_set_partitions_are_restricted_growth() {
        for p in set_partitions(5) {
            let mut max_seen = 0;
            for (i, &id) in p.iter().enumerate() {
                if i == 0 {
                    assert_eq!(id, 0);
                } else {
                    assert!(id <= max_seen + 1);
                }
                max_seen = max_seen.max(id);
            }
        }
    }
}
