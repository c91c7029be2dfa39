#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};
use std::f64::consts::{FRAC_PI_2, TAU};
use std::sync::Arc;

use mvf2vec::cmf::{Cmf, VectorCloud};
use mvf2vec::grid::{make_grid_points, GridSpec, SimplicialComplex};
use mvf2vec::rng::SplitMix64;

pub const P: usize = 0;
pub const Q: usize = 1;
pub const R: usize = 2;
pub const S: usize = 3;

/// The four-point toy complex with triangles PQR and QRS.
pub fn toy_complex() -> Arc<SimplicialComplex> {
    let pts = vec![[0.0, 0.0], [2.0, 0.0], [0.0, 2.0], [2.0, 2.0]];
    Arc::new(SimplicialComplex::from_simplices(pts, &[vec![P, Q, R], vec![Q, R, S]]).unwrap())
}

pub fn ids(k: &SimplicialComplex, simplices: &[&[usize]]) -> Vec<usize> {
    simplices.iter().map(|s| k.find(s).unwrap()).collect()
}

/// The five multivectors v1..v5 of the toy field, entered directly.
pub fn toy_cmf() -> Cmf {
    let k = toy_complex();
    let sets = vec![
        ids(&k, &[&[P], &[P, R]]),
        ids(&k, &[&[R], &[Q, R]]),
        ids(&k, &[&[Q], &[P, Q]]),
        ids(&k, &[&[P, Q, R]]),
        ids(&k, &[&[S], &[R, S], &[Q, S], &[Q, R, S]]),
    ];
    Cmf::from_multivectors(k, &sets).unwrap()
}

/// Multivector ids of v1..v5 in the toy field.
pub fn toy_ids(cmf: &Cmf) -> [usize; 5] {
    let k = cmf.complex();
    let own = |s: &[usize]| cmf.owner(k.find(s).unwrap());
    [own(&[P]), own(&[R]), own(&[Q]), own(&[P, Q, R]), own(&[S])]
}

/// A random vector cloud on a grid of at most `max_side` points per axis,
/// plus a random angular parameter. Mixes smooth affine fields, pure noise
/// and sprinkled zero vectors.
pub fn random_cloud(rng: &mut SplitMix64, max_side: usize) -> (VectorCloud, f64) {
    let px = 2 + rng.below(max_side - 1);
    let py = 2 + rng.below(max_side - 1);
    let grid = GridSpec { x_min: -1.0, x_max: 1.0, y_min: -1.0, y_max: 1.0, px, py };
    let points = make_grid_points(&grid).unwrap();
    let a: Vec<f64> = (0..6).map(|_| rng.uniform(-1.0, 1.0)).collect();
    let mode = rng.below(3);
    let vectors = points
        .iter()
        .map(|p| {
            if rng.next_f64() < 0.1 {
                return [0.0, 0.0];
            }
            match mode {
                0 => [a[0] * p[0] + a[1] * p[1] + a[2], a[3] * p[0] + a[4] * p[1] + a[5]],
                1 => {
                    let t = rng.uniform(0.0, TAU);
                    [t.cos(), t.sin()]
                }
                _ => {
                    let t = rng.uniform(0.0, TAU);
                    [a[0] * p[0] + a[1] * p[1] + 0.3 * t.cos(), a[3] * p[0] + a[4] * p[1] + 0.3 * t.sin()]
                }
            }
        })
        .collect();
    let alpha = if rng.below(4) == 0 { 0.0 } else { rng.uniform(0.0, FRAC_PI_2) };
    (VectorCloud::on_grid(grid, vectors).unwrap(), alpha)
}

/// Rank over Z/2 of a 0/1 matrix given as columns of row indices.
///
/// Small matrices are ranked by enumerating the whole column span; larger
/// ones by dense row-echelon elimination.
pub fn gf2_rank(columns: &[Vec<usize>], rows: usize) -> usize {
    if columns.is_empty() || rows == 0 {
        return 0;
    }
    if columns.len() <= 14 && rows <= 64 {
        let masks: Vec<u64> = columns.iter().map(|c| c.iter().fold(0u64, |m, &r| m ^ (1 << r))).collect();
        let span: BTreeSet<u64> = (0u32..1 << masks.len())
            .map(|sel| masks.iter().enumerate().filter(|(i, _)| sel >> i & 1 == 1).fold(0, |acc, (_, m)| acc ^ m))
            .collect();
        return span.len().trailing_zeros() as usize;
    }
    let words = columns.len().div_ceil(64);
    let mut m = vec![vec![0u64; words]; rows];
    for (j, col) in columns.iter().enumerate() {
        for &r in col {
            m[r][j / 64] ^= 1 << (j % 64);
        }
    }
    let mut rank = 0;
    for col in 0..columns.len() {
        let (w, bit) = (col / 64, 1u64 << (col % 64));
        let Some(pivot) = (rank..rows).find(|&r| m[r][w] & bit != 0) else { continue };
        m.swap(rank, pivot);
        let pivot_row = m[rank].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != rank && row[w] & bit != 0 {
                for (x, p) in row.iter_mut().zip(&pivot_row).skip(w) {
                    *x ^= p;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Relative Z/2 Betti numbers of `(cl V, cl V \ V)` from vertex lists only:
/// the relative chain groups are spanned by the simplices of `V` and the
/// boundary of a simplex keeps just the faces lying in `V`.
pub fn brute_betti(k: &SimplicialComplex, set: &BTreeSet<usize>) -> [usize; 3] {
    let mut by_dim: [Vec<Vec<usize>>; 3] = Default::default();
    for &s in set {
        let v = k.simplex(s).vertices().to_vec();
        by_dim[v.len() - 1].push(v);
    }
    let index: [HashMap<Vec<usize>, usize>; 3] =
        std::array::from_fn(|d| by_dim[d].iter().enumerate().map(|(i, v)| (v.clone(), i)).collect());
    let rank = |d: usize| -> usize {
        // Boundary from dimension d to d - 1.
        let cols: Vec<Vec<usize>> = by_dim[d]
            .iter()
            .map(|v| {
                (0..v.len())
                    .filter_map(|drop| {
                        let face: Vec<usize> = v.iter().enumerate().filter(|&(i, _)| i != drop).map(|(_, &x)| x).collect();
                        index[d - 1].get(&face).copied()
                    })
                    .collect()
            })
            .collect();
        gf2_rank(&cols, by_dim[d - 1].len())
    };
    let r1 = rank(1);
    let r2 = rank(2);
    [by_dim[0].len() - r1, by_dim[1].len() - r1 - r2, by_dim[2].len() - r2]
}

/// Orderly convexity from vertex lists: whenever `a ⊂ c` lie in the set,
/// every `b` with `a ⊂ b ⊂ c` must too.
pub fn brute_convex(k: &SimplicialComplex, set: &BTreeSet<usize>) -> bool {
    let members: BTreeSet<Vec<usize>> = set.iter().map(|&s| k.simplex(s).vertices().to_vec()).collect();
    for c in &members {
        for a in &members {
            if a.len() >= c.len() || !a.iter().all(|x| c.contains(x)) {
                continue;
            }
            for mask in 1u32..(1 << c.len()) - 1 {
                let b: Vec<usize> = c.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &x)| x).collect();
                if b.len() > a.len() && a.iter().all(|x| b.contains(x)) && !members.contains(&b) {
                    return false;
                }
            }
        }
    }
    true
}
