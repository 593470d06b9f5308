//! Finite state spaces and row-major indexing of product spaces.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::ModelError;

/// A named finite set of states with a fixed ordering.
///
/// All matrices in the crate index rows and columns against this ordering,
/// which is set at construction and never changes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteSpace {
    name: String,
    states: Vec<String>,
    index: HashMap<String, usize>,
}

pub type SpaceRef = Arc<FiniteSpace>;

impl FiniteSpace {
    pub fn new(
        name: impl Into<String>,
        states: impl IntoIterator<Item = impl Into<String>>,
    ) -> Result<SpaceRef, ModelError> {
        let name = name.into();
        let states: Vec<String> = states.into_iter().map(Into::into).collect();
        if states.is_empty() {
            return Err(ModelError::EmptySpace { space: name });
        }
        let mut index = HashMap::with_capacity(states.len());
        for (i, label) in states.iter().enumerate() {
            if index.insert(label.clone(), i).is_some() {
                return Err(ModelError::DuplicateLabel {
                    space: name,
                    label: label.clone(),
                });
            }
        }
        Ok(Arc::new(FiniteSpace {
            name,
            states,
            index,
        }))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        false // at least one state by construction
    }

    pub fn labels(&self) -> &[String] {
        &self.states
    }

    pub fn label(&self, idx: usize) -> &str {
        &self.states[idx]
    }

    pub fn index_of(&self, label: &str) -> Result<usize, ModelError> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| ModelError::UnknownState {
                space: self.name.clone(),
                label: label.to_owned(),
            })
    }
}

/// Row-major index arithmetic over an ordered product of spaces.
///
/// The first factor varies slowest, so enumeration order is the
/// lexicographic order of state tuples under each space's own ordering.
#[derive(Debug, Clone)]
pub struct ProductIndexer {
    sizes: Vec<usize>,
    total: usize,
}

impl ProductIndexer {
    pub fn new(spaces: &[SpaceRef]) -> Self {
        let sizes: Vec<usize> = spaces.iter().map(|s| s.len()).collect();
        let total = sizes.iter().product();
        ProductIndexer { sizes, total }
    }

    pub fn len(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn rank(&self, coords: &[usize]) -> usize {
        debug_assert_eq!(coords.len(), self.sizes.len());
        let mut idx = 0;
        for (c, size) in coords.iter().zip(&self.sizes) {
            debug_assert!(c < size);
            idx = idx * size + c;
        }
        idx
    }

    pub fn unrank(&self, mut idx: usize) -> Vec<usize> {
        let mut coords = vec![0; self.sizes.len()];
        for (slot, size) in coords.iter_mut().zip(&self.sizes).rev() {
            *slot = idx % size;
            idx /= size;
        }
        coords
    }
}

/// Composite label for a product-space state, e.g. `"1,s0,c0"`.
pub fn product_label(spaces: &[SpaceRef], coords: &[usize]) -> String {
    spaces
        .iter()
        .zip(coords)
        .map(|(space, &c)| space.label(c))
        .collect::<Vec<_>>()
        .join(",")
}

/// Materializes an ordered product as a plain space with composite labels.
pub fn product_space(name: impl Into<String>, spaces: &[SpaceRef]) -> Result<SpaceRef, ModelError> {
    let indexer = ProductIndexer::new(spaces);
    let labels: Vec<String> = (0..indexer.len())
        .map(|i| product_label(spaces, &indexer.unrank(i)))
        .collect();
    FiniteSpace::new(name, labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicate_labels_and_empty_spaces() {
        assert!(FiniteSpace::new("W", ["a", "a"]).is_err());
        assert!(FiniteSpace::new("W", Vec::<String>::new()).is_err());
    }

    #[test]
    fn product_ranking_is_row_major() {
        let a = FiniteSpace::new("A", ["a0", "a1"]).unwrap();
        let w = FiniteSpace::new("W", ["w0", "w1", "w2"]).unwrap();
        let idx = ProductIndexer::new(&[a.clone(), w.clone()]);
        assert_eq!(idx.len(), 6);
        // A varies slowest.
        assert_eq!(idx.rank(&[0, 2]), 2);
        assert_eq!(idx.rank(&[1, 0]), 3);
        for i in 0..6 {
            assert_eq!(idx.rank(&idx.unrank(i)), i);
        }
        assert_eq!(product_label(&[a, w], &[1, 2]), "a1,w2");
    }
}
