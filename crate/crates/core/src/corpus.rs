//! Random multivector walks rendered as sentences of label words.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cmf::Cmf;
use crate::error::{Error, Result};
use crate::graph::{CmfGraph, Direction};
use crate::labels::{hash64, Label64, Labeling};
use crate::rng::SplitMix64;

/// Parameters of a `(b, f, c, d)` corpus plus seeding and boundary margin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkParams {
    /// Backward label radius `b`.
    pub backward: usize,
    /// Forward label radius `f`.
    pub forward: usize,
    /// Walks per root and direction (`c`).
    pub repetitions: usize,
    /// Walk length in vertices (`d`).
    pub length: usize,
    pub seed: u64,
    /// Boundary margin in grid spacings.
    pub margin: f64,
}

impl Default for WalkParams {
    fn default() -> Self {
        WalkParams { backward: 1, forward: 1, repetitions: 2, length: 10, seed: 0, margin: 2.0 }
    }
}

impl WalkParams {
    pub fn validate(&self) -> Result<()> {
        if self.repetitions < 1 {
            return Err(Error::validation("walk repetitions c must be >= 1"));
        }
        if self.length < 1 {
            return Err(Error::validation("walk length d must be >= 1"));
        }
        if !(self.margin >= 0.0) || !self.margin.is_finite() {
            return Err(Error::validation(format!("margin must be a finite value >= 0, got {}", self.margin)));
        }
        Ok(())
    }
}

/// Marks the multivectors that stay in the walk graph. A multivector is
/// dropped iff one of its vertices lies strictly closer than `margin` grid
/// spacings to the boundary of the sampled rectangle.
pub fn boundary_filter(cmf: &Cmf, margin: f64) -> Result<Vec<bool>> {
    if !(margin >= 0.0) {
        return Err(Error::validation(format!("margin must be >= 0, got {margin}")));
    }
    let complex = cmf.complex();
    let Some(grid) = complex.grid() else {
        if margin == 0.0 {
            return Ok(vec![true; cmf.len()]);
        }
        return Err(Error::validation("boundary filtering needs a grid complex"));
    };
    // Distance to the boundary counted in spacings along the nearer axis.
    let near_edge: Vec<bool> = (0..grid.num_points())
        .map(|p| {
            let (i, j) = (p % grid.px, p / grid.px);
            let steps = i.min(grid.px - 1 - i).min(j).min(grid.py - 1 - j);
            (steps as f64) < margin
        })
        .collect();
    Ok(cmf
        .multivectors()
        .iter()
        .map(|mv| {
            !mv.simplices.iter().any(|&s| complex.simplex(s).vertices().iter().any(|&v| near_edge[v]))
        })
        .collect())
}

/// Vertices a walk may step to from `current`: kept neighbours in `dir`,
/// plus `current` itself when it is critical. Ascending order.
pub fn admissible_successors(
    graph: &CmfGraph,
    kept: &[bool],
    critical: &[bool],
    current: usize,
    dir: Direction,
) -> Vec<usize> {
    let mut next: Vec<usize> = graph.neighbors(current, dir).iter().copied().filter(|&u| kept[u]).collect();
    if critical[current] {
        let at = next.partition_point(|&u| u < current);
        next.insert(at, current);
    }
    next
}

/// One `d`-random multivector walk from `root`.
///
/// Steps are uniform over the admissible successors and the walk stops
/// early at a vertex with none. Backward walks follow reversed edges and
/// are returned in reverse, so they read as forward trajectories ending at
/// `root`.
pub fn random_walk(
    graph: &CmfGraph,
    kept: &[bool],
    critical: &[bool],
    root: usize,
    length: usize,
    dir: Direction,
    rng: &mut SplitMix64,
) -> Vec<usize> {
    let mut walk = Vec::with_capacity(length);
    if length == 0 {
        return walk;
    }
    walk.push(root);
    let mut current = root;
    while walk.len() < length {
        let next = admissible_successors(graph, kept, critical, current, dir);
        if next.is_empty() {
            break;
        }
        current = next[rng.below(next.len())];
        walk.push(current);
    }
    if dir == Direction::Backward {
        walk.reverse();
    }
    walk
}

/// Seed of the walk stream for one `(field, root, direction, repetition)`.
pub fn walk_seed(seed: u64, field: usize, root: usize, dir: Direction, repetition: usize) -> u64 {
    let mut bytes = Vec::with_capacity(33);
    bytes.extend(seed.to_le_bytes());
    bytes.extend((field as u64).to_le_bytes());
    bytes.extend((root as u64).to_le_bytes());
    bytes.push(dir.byte());
    bytes.extend((repetition as u64).to_le_bytes());
    hash64(&bytes)
}

/// Sentences of label words and the word counts.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Corpus {
    pub sentences: Vec<Vec<Label64>>,
    pub counts: BTreeMap<Label64, u64>,
}

impl Corpus {
    pub fn from_sentences(sentences: Vec<Vec<Label64>>) -> Self {
        let mut counts = BTreeMap::new();
        for w in sentences.iter().flatten() {
            *counts.entry(*w).or_insert(0) += 1;
        }
        Corpus { sentences, counts }
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Vec::len).sum()
    }

    /// Sentences as owned hex words.
    pub fn text_sentences(&self) -> Vec<Vec<String>> {
        self.sentences.iter().map(|s| s.iter().map(Label64::word).collect()).collect()
    }

    /// One sentence per line, words separated by single spaces.
    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut line = String::new();
        for sentence in &self.sentences {
            line.clear();
            for (i, w) in sentence.iter().enumerate() {
                if i > 0 {
                    line.push(' ');
                }
                line.push_str(&w.word());
            }
            line.push('\n');
            out.write_all(line.as_bytes())?;
        }
        out.flush()
    }

    pub fn read<R: BufRead>(input: R) -> Result<Self> {
        let mut sentences = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line.map_err(|e| Error::io("<corpus>", e))?;
            if line.is_empty() {
                continue;
            }
            let words = line
                .split(' ')
                .map(|w| {
                    Label64::parse(w).ok_or_else(|| Error::Parse {
                        path: "<corpus>".into(),
                        line: i + 1,
                        msg: format!("not a 16-digit hex word: {w:?}"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            sentences.push(words);
        }
        Ok(Corpus::from_sentences(sentences))
    }
}

/// One field of a family: its multivector field and graph.
#[derive(Clone, Copy)]
pub struct FieldRef<'a> {
    pub cmf: &'a Cmf,
    pub graph: &'a CmfGraph,
}

/// Generates the `(b, f, c, d)` corpus of a family of fields.
///
/// Sentences are ordered by field, root, direction (forward first) and
/// repetition. Every walk draws from its own stream keyed by that tuple, so
/// the output does not depend on scheduling.
pub fn generate_corpus(family: &[FieldRef<'_>], params: &WalkParams) -> Result<Corpus> {
    params.validate()?;
    let mut sentences = Vec::new();
    for (field, fr) in family.iter().enumerate() {
        let kept = boundary_filter(fr.cmf, params.margin)?;
        if !kept.iter().any(|&k| k) {
            log::warn!("field {field}: every multivector is within the boundary margin; no sentences");
            continue;
        }
        let labels = Labeling::compute(fr.cmf, fr.graph, params.backward, params.forward);
        let critical: Vec<bool> = fr.cmf.multivectors().iter().map(|m| m.critical).collect();
        let roots: Vec<usize> = (0..fr.cmf.len()).filter(|&v| kept[v]).collect();
        let per_root: Vec<Vec<Vec<Label64>>> = roots
            .par_iter()
            .map(|&root| {
                let mut out = Vec::with_capacity(2 * params.repetitions);
                for dir in [Direction::Forward, Direction::Backward] {
                    for rep in 0..params.repetitions {
                        let mut rng = SplitMix64::new(walk_seed(params.seed, field, root, dir, rep));
                        let walk = random_walk(fr.graph, &kept, &critical, root, params.length, dir, &mut rng);
                        out.push(walk.into_iter().map(|v| labels.words[v]).collect());
                    }
                }
                out
            })
            .collect();
        sentences.extend(per_root.into_iter().flatten());
    }
    Ok(Corpus::from_sentences(sentences))
}
