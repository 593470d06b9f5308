//! Markov kernels as row-stochastic matrices between finite (product) spaces.

use crate::error::ModelError;
use crate::scalar::Scalar;
use crate::space::{ProductIndexer, SpaceRef};

/// A map assigning each source state a distribution over target states.
///
/// Source and target may be ordered products; rows and columns are indexed
/// row-major with the first factor varying slowest. Construction checks the
/// matrix shape only — stochasticity is a model-level invariant reported by
/// [`LoopModel::validate`](crate::model::LoopModel::validate), so that broken
/// inputs can still be represented and diagnosed.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel<T: Scalar> {
    source: Vec<SpaceRef>,
    target: Vec<SpaceRef>,
    rows: Vec<Vec<T>>,
}

impl<T: Scalar> Kernel<T> {
    pub fn new(
        name: &str,
        source: Vec<SpaceRef>,
        target: Vec<SpaceRef>,
        rows: Vec<Vec<T>>,
    ) -> Result<Self, ModelError> {
        let n_rows = ProductIndexer::new(&source).len();
        let n_cols = ProductIndexer::new(&target).len();
        if rows.len() != n_rows {
            return Err(ModelError::KernelRowCount {
                kernel: name.to_owned(),
                expected: n_rows,
                found: rows.len(),
            });
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n_cols {
                return Err(ModelError::KernelShape {
                    kernel: name.to_owned(),
                    expected_rows: n_rows,
                    expected_cols: n_cols,
                    row: i,
                    found: row.len(),
                });
            }
        }
        Ok(Kernel {
            source,
            target,
            rows,
        })
    }

    /// Dirac identity kernel on a space.
    pub fn identity(space: SpaceRef) -> Self {
        let n = space.len();
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { T::one() } else { T::zero() })
                    .collect()
            })
            .collect();
        Kernel {
            source: vec![space.clone()],
            target: vec![space],
            rows,
        }
    }

    pub fn source(&self) -> &[SpaceRef] {
        &self.source
    }

    pub fn target(&self) -> &[SpaceRef] {
        &self.target
    }

    pub fn source_indexer(&self) -> ProductIndexer {
        ProductIndexer::new(&self.source)
    }

    pub fn target_indexer(&self) -> ProductIndexer {
        ProductIndexer::new(&self.target)
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.rows
    }

    pub fn entry(&self, row: usize, col: usize) -> &T {
        &self.rows[row][col]
    }

    /// Total mass a row puts on a set of target columns.
    pub fn mass_on<'a>(&self, row: usize, cols: impl IntoIterator<Item = &'a usize>) -> T {
        cols.into_iter()
            .map(|&c| self.rows[row][c].clone())
            .sum()
    }

    /// Kernel composition: `(self ; other)(x)(z) = sum_y self(x)(y) other(y)(z)`.
    ///
    /// Requires `self.target == other.source` as ordered space lists.
    pub fn compose(&self, other: &Kernel<T>) -> Result<Kernel<T>, ModelError> {
        if !same_spaces(&self.target, &other.source) {
            return Err(ModelError::SpaceMismatch {
                context: "kernel composition".to_owned(),
                expected: space_list_name(&self.target),
                found: space_list_name(&other.source),
            });
        }
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut out = vec![T::zero(); other.n_cols()];
                for (mid, weight) in row.iter().enumerate() {
                    if weight.is_zero() {
                        continue;
                    }
                    for (slot, v) in out.iter_mut().zip(other.row(mid)) {
                        *slot = slot.clone() + weight.clone() * v.clone();
                    }
                }
                out
            })
            .collect();
        Ok(Kernel {
            source: self.source.clone(),
            target: other.target.clone(),
            rows,
        })
    }

    /// Pushes a distribution over source states forward through the kernel.
    pub fn push(&self, dist: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.n_cols()];
        for (i, weight) in dist.iter().enumerate() {
            if weight.is_zero() {
                continue;
            }
            for (slot, v) in out.iter_mut().zip(self.row(i)) {
                *slot = slot.clone() + weight.clone() * v.clone();
            }
        }
        out
    }

    /// Applies the kernel to a functional on target states:
    /// `(K v)(x) = sum_y K(x)(y) v(y)`.
    pub fn apply_functional(&self, v: &[T]) -> Vec<T> {
        self.rows
            .iter()
            .map(|row| {
                row.iter()
                    .zip(v)
                    .filter(|(w, _)| !w.is_zero())
                    .map(|(w, x)| w.clone() * x.clone())
                    .sum()
            })
            .collect()
    }
}

pub(crate) fn same_spaces(a: &[SpaceRef], b: &[SpaceRef]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x == y)
}

pub(crate) fn space_list_name(spaces: &[SpaceRef]) -> String {
    spaces
        .iter()
        .map(|s| s.name().to_owned())
        .collect::<Vec<_>>()
        .join("x")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use crate::space::FiniteSpace;

    fn r(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }

    #[test]
    fn identity_is_neutral() {
        let w = FiniteSpace::new("W", ["x", "y"]).unwrap();
        let s = FiniteSpace::new("S", ["0", "1"]).unwrap();
        let beta = Kernel::new(
            "beta",
            vec![w.clone()],
            vec![s.clone()],
            vec![vec![r(1, 2), r(1, 2)], vec![r(1, 4), r(3, 4)]],
        )
        .unwrap();
        let id_w = Kernel::identity(w);
        let id_s = Kernel::identity(s);
        assert_eq!(id_w.compose(&beta).unwrap(), beta);
        assert_eq!(beta.compose(&id_s).unwrap(), beta);
    }

    #[test]
    fn constant_kernel_absorbs() {
        let w = FiniteSpace::new("W", ["x", "y"]).unwrap();
        let s = FiniteSpace::new("S", ["0", "1"]).unwrap();
        let a = FiniteSpace::new("A", ["go"]).unwrap();
        let beta = Kernel::new(
            "beta",
            vec![w],
            vec![s.clone()],
            vec![vec![r(1, 2), r(1, 2)], vec![r(1, 4), r(3, 4)]],
        )
        .unwrap();
        let constant = Kernel::new(
            "to_a",
            vec![s],
            vec![a],
            vec![vec![r(1, 1)], vec![r(1, 1)]],
        )
        .unwrap();
        let composed = beta.compose(&constant).unwrap();
        assert!(composed.rows().iter().all(|row| row == &[r(1, 1)]));
    }

    #[test]
    fn compose_requires_matching_spaces() {
        let w = FiniteSpace::new("W", ["x"]).unwrap();
        let s = FiniteSpace::new("S", ["0"]).unwrap();
        let k1: Kernel<Rational> = Kernel::identity(w);
        let k2: Kernel<Rational> = Kernel::identity(s);
        assert!(k1.compose(&k2).is_err());
    }
}
