//! Partitions of a finite space, standing in for the σ-algebras they generate.
//!
//! In the finite setting a family of distinctions closed under complement and
//! union is determined by its atoms, so everything downstream works with
//! partitions in a canonical form: blocks are listed by their least member,
//! members sorted ascending. Equal partitions are therefore identical values.

use crate::error::ModelError;
use crate::scalar::Scalar;
use crate::space::SpaceRef;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    space: SpaceRef,
    block_of: Vec<usize>,
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    /// Builds the canonical partition from a block-id assignment per state.
    /// Ids may be arbitrary; they are relabelled by least member.
    pub fn from_assignment(space: SpaceRef, assignment: &[usize]) -> Self {
        assert_eq!(assignment.len(), space.len(), "assignment length mismatch");
        let mut first_seen: Vec<(usize, usize)> = Vec::new(); // (raw id, least state)
        for (state, &raw) in assignment.iter().enumerate() {
            if !first_seen.iter().any(|&(id, _)| id == raw) {
                first_seen.push((raw, state));
            }
        }
        // canonical order: blocks sorted by least member
        first_seen.sort_by_key(|&(_, least)| least);
        let mut block_of = vec![0; assignment.len()];
        let mut blocks = vec![Vec::new(); first_seen.len()];
        for (state, &raw) in assignment.iter().enumerate() {
            let canonical = first_seen.iter().position(|&(id, _)| id == raw).unwrap();
            block_of[state] = canonical;
            blocks[canonical].push(state);
        }
        Partition {
            space,
            block_of,
            blocks,
        }
    }

    pub fn from_blocks(space: SpaceRef, blocks: Vec<Vec<usize>>) -> Result<Self, ModelError> {
        let mut assignment = vec![usize::MAX; space.len()];
        for (id, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(ModelError::SpaceMismatch {
                    context: "partition".to_owned(),
                    expected: "nonempty blocks".to_owned(),
                    found: "empty block".to_owned(),
                });
            }
            for &state in block {
                if state >= space.len() || assignment[state] != usize::MAX {
                    return Err(ModelError::SpaceMismatch {
                        context: "partition".to_owned(),
                        expected: format!("a partition of {}", space.name()),
                        found: "overlapping or out-of-range blocks".to_owned(),
                    });
                }
                assignment[state] = id;
            }
        }
        if assignment.iter().any(|&b| b == usize::MAX) {
            return Err(ModelError::SpaceMismatch {
                context: "partition".to_owned(),
                expected: format!("blocks covering {}", space.name()),
                found: "uncovered states".to_owned(),
            });
        }
        Ok(Self::from_assignment(space, &assignment))
    }

    /// All states in one block.
    pub fn trivial(space: SpaceRef) -> Self {
        let assignment = vec![0; space.len()];
        Self::from_assignment(space, &assignment)
    }

    /// Every state its own block.
    pub fn discrete(space: SpaceRef) -> Self {
        let assignment: Vec<usize> = (0..space.len()).collect();
        Self::from_assignment(space, &assignment)
    }

    pub fn space(&self) -> &SpaceRef {
        &self.space
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_of(&self, state: usize) -> usize {
        self.block_of[state]
    }

    pub fn block_assignment(&self) -> &[usize] {
        &self.block_of
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block(&self, id: usize) -> &[usize] {
        &self.blocks[id]
    }

    pub fn is_trivial(&self) -> bool {
        self.blocks.len() == 1
    }

    pub fn is_discrete(&self) -> bool {
        self.blocks.len() == self.space.len()
    }

    pub fn same_block(&self, a: usize, b: usize) -> bool {
        self.block_of[a] == self.block_of[b]
    }

    /// `self` refines `other`: every block of `self` sits inside one block of
    /// `other`. Reflexive.
    pub fn refines(&self, other: &Partition) -> bool {
        self.space == other.space
            && self
                .blocks
                .iter()
                .all(|block| block.iter().all(|&s| other.block_of[s] == other.block_of[block[0]]))
    }

    pub fn coarsens(&self, other: &Partition) -> bool {
        other.refines(self)
    }

    fn check_same_space(&self, other: &Partition, context: &str) -> Result<(), ModelError> {
        if self.space != other.space {
            return Err(ModelError::SpaceMismatch {
                context: context.to_owned(),
                expected: self.space.name().to_owned(),
                found: other.space.name().to_owned(),
            });
        }
        Ok(())
    }

    /// Coarsest common refinement: blocks are the nonempty pairwise
    /// intersections. Generates the same σ-algebra as the union of the two
    /// block families.
    pub fn join(&self, other: &Partition) -> Result<Partition, ModelError> {
        self.check_same_space(other, "partition join")?;
        let n = self.space.len();
        let mut keys: Vec<(usize, usize)> = Vec::with_capacity(n);
        let mut assignment = vec![0; n];
        for state in 0..n {
            let key = (self.block_of[state], other.block_of[state]);
            let id = match keys.iter().position(|&k| k == key) {
                Some(i) => i,
                None => {
                    keys.push(key);
                    keys.len() - 1
                }
            };
            assignment[state] = id;
        }
        Ok(Partition::from_assignment(self.space.clone(), &assignment))
    }

    /// Finest common coarsening: connected components of the overlap graph
    /// that links states sharing a block in either argument. Each block of
    /// the result is simultaneously a union of `self`-blocks and of
    /// `other`-blocks, and no finer partition has that property — this is the
    /// intersection of the two generated σ-algebras.
    pub fn meet(&self, other: &Partition) -> Result<Partition, ModelError> {
        self.check_same_space(other, "partition meet")?;
        let n = self.space.len();
        let mut dsu = DisjointSet::new(n);
        for block in self.blocks.iter().chain(other.blocks.iter()) {
            for pair in block.windows(2) {
                dsu.union(pair[0], pair[1]);
            }
        }
        let assignment: Vec<usize> = (0..n).map(|s| dsu.find(s)).collect();
        Ok(Partition::from_assignment(self.space.clone(), &assignment))
    }

    /// Blocks as label lists, in canonical order.
    pub fn block_labels(&self) -> Vec<Vec<String>> {
        self.blocks
            .iter()
            .map(|block| block.iter().map(|&s| self.space.label(s).to_owned()).collect())
            .collect()
    }

    /// Compact display form such as `{1,4,5} {2} {3}`.
    pub fn display(&self) -> String {
        self.blocks
            .iter()
            .map(|block| {
                let labels: Vec<&str> = block.iter().map(|&s| self.space.label(s)).collect();
                format!("{{{}}}", labels.join(","))
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Splits every block of `base` by a per-state signature vector.
///
/// States stay together iff they already share a block and their signatures
/// agree within `tol`. Grouping sorts signatures and merges neighbours by
/// single linkage, so with `tol == 0` the groups are exact equality classes;
/// with a positive tolerance the chaining is order-sensitive and float-mode
/// results are not authoritative.
pub fn split_by_signature<T: Scalar>(
    base: &Partition,
    tol: &T,
    mut signature: impl FnMut(usize) -> Vec<T>,
) -> Partition {
    let n = base.space().len();
    let mut assignment = vec![0usize; n];
    let mut next_id = 0;
    for block in base.blocks() {
        let mut members: Vec<(usize, Vec<T>)> =
            block.iter().map(|&s| (s, signature(s))).collect();
        members.sort_by(|(sa, siga), (sb, sigb)| {
            lex_cmp(siga, sigb).then_with(|| sa.cmp(sb))
        });
        let mut prev: Option<&[T]> = None;
        for i in 0..members.len() {
            let close = match prev {
                Some(p) => p
                    .iter()
                    .zip(&members[i].1)
                    .all(|(a, b)| a.approx_eq(b, tol)),
                None => false,
            };
            if !close {
                next_id += 1;
            }
            assignment[members[i].0] = next_id - 1;
            prev = Some(&members[i].1);
        }
    }
    Partition::from_assignment(base.space().clone(), &assignment)
}

fn lex_cmp<T: Scalar>(a: &[T], b: &[T]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        let ord = x.total_cmp(y);
        if ord != std::cmp::Ordering::Equal {
            return ord;
        }
    }
    a.len().cmp(&b.len())
}

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // keep the smaller index as root so canonical labels stay stable
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::FiniteSpace;

    fn space3() -> SpaceRef {
        FiniteSpace::new("X", ["1", "2", "3"]).unwrap()
    }

    fn p(space: &SpaceRef, blocks: &[&[usize]]) -> Partition {
        Partition::from_blocks(space.clone(), blocks.iter().map(|b| b.to_vec()).collect())
            .unwrap()
    }

    #[test]
    fn join_of_crossing_pairs_is_discrete() {
        let x = space3();
        let a = p(&x, &[&[0, 1], &[2]]);
        let b = p(&x, &[&[0], &[1, 2]]);
        assert_eq!(a.join(&b).unwrap(), Partition::discrete(x));
    }

    #[test]
    fn meet_of_crossing_pairs_is_trivial() {
        let x = space3();
        let a = p(&x, &[&[0, 1], &[2]]);
        let b = p(&x, &[&[0], &[1, 2]]);
        assert_eq!(a.meet(&b).unwrap(), Partition::trivial(x));
    }

    #[test]
    fn join_meet_absorbing_elements() {
        let x = space3();
        let a = p(&x, &[&[0, 1], &[2]]);
        assert_eq!(a.join(&a).unwrap(), a);
        assert_eq!(a.meet(&a).unwrap(), a);
        assert_eq!(a.join(&Partition::discrete(x.clone())).unwrap(), Partition::discrete(x.clone()));
        assert_eq!(a.meet(&Partition::trivial(x.clone())).unwrap(), Partition::trivial(x));
    }

    #[test]
    fn canonical_form_ignores_block_listing_order() {
        let x = space3();
        let a = p(&x, &[&[2], &[0, 1]]);
        let b = p(&x, &[&[0, 1], &[2]]);
        assert_eq!(a, b);
        assert_eq!(a.display(), "{1,2} {3}");
    }

    #[test]
    fn refinement_order() {
        let x = space3();
        let fine = Partition::discrete(x.clone());
        let mid = p(&x, &[&[0, 1], &[2]]);
        let coarse = Partition::trivial(x);
        assert!(fine.refines(&mid) && mid.refines(&coarse));
        assert!(!mid.refines(&fine));
        assert!(coarse.coarsens(&mid));
        let joined = mid.join(&fine).unwrap();
        assert!(joined.refines(&mid));
    }
}
