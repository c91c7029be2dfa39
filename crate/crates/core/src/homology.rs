//! Relative homology over Z/2 for small sets of simplices.

use std::collections::{BTreeSet, HashMap};

use crate::grid::{SimplexId, SimplicialComplex};

/// Dense bit vector used as a column of a Z/2 matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
struct BitColumn(Vec<u64>);

impl BitColumn {
    fn zeros(len: usize) -> Self {
        BitColumn(vec![0; len.div_ceil(64).max(1)])
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] ^= 1 << (i % 64);
    }

    fn xor_assign(&mut self, other: &BitColumn) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a ^= b;
        }
    }

    fn lowest(&self) -> Option<usize> {
        self.0.iter().enumerate().find(|(_, w)| **w != 0).map(|(k, w)| k * 64 + w.trailing_zeros() as usize)
    }
}

/// Rank over Z/2 by column reduction.
fn rank(columns: Vec<BitColumn>) -> usize {
    let mut pivots: HashMap<usize, BitColumn> = HashMap::new();
    for mut col in columns {
        while let Some(low) = col.lowest() {
            match pivots.get(&low) {
                Some(p) => col.xor_assign(p),
                None => {
                    pivots.insert(low, col);
                    break;
                }
            }
        }
    }
    pivots.len()
}

/// Betti numbers `[β0, β1, β2]` of the pair `(cl V, cl V \ V)`.
///
/// Chains are generated by the simplices of `set`; a boundary entry is kept
/// only when the face itself lies in `set`.
pub fn relative_betti(complex: &SimplicialComplex, set: &BTreeSet<SimplexId>) -> [usize; 3] {
    let mut by_dim: [Vec<SimplexId>; 3] = Default::default();
    for &id in set {
        by_dim[complex.dim(id)].push(id);
    }
    let row_of: [HashMap<SimplexId, usize>; 3] =
        std::array::from_fn(|d| by_dim[d].iter().enumerate().map(|(i, &s)| (s, i)).collect());

    // ranks[d] = rank of the boundary map C_d -> C_{d-1}.
    let mut ranks = [0usize; 4];
    for d in 1..3 {
        let columns = by_dim[d]
            .iter()
            .map(|&s| {
                let mut col = BitColumn::zeros(by_dim[d - 1].len());
                for f in complex.faces(s) {
                    if let Some(&row) = row_of[d - 1].get(f) {
                        col.set(row);
                    }
                }
                col
            })
            .collect();
        ranks[d] = rank(columns);
    }
    std::array::from_fn(|d| by_dim[d].len() - ranks[d] - ranks[d + 1])
}
