//! Topological hash labels of multivectors.
//!
//! Every label is the 64-bit FNV-1a hash of a canonical little-endian byte
//! encoding, so words are identical across runs, platforms and
//! implementations.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{Read, Write};

use rayon::prelude::*;

use crate::cmf::{euler_characteristic, Cmf};
use crate::error::{Error, Result};
use crate::graph::{CmfGraph, Direction};

const FNV_OFFSET: u64 = 14695981039346656037;
const FNV_PRIME: u64 = 1099511628211;

const TUPLE_TAG: u8 = 0x54;
const LIST_TAG: u8 = 0x4C;

/// 64-bit FNV-1a.
pub fn hash64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label64(pub u64);

impl Label64 {
    /// Zero-padded 16 character lowercase hex.
    pub fn word(&self) -> String {
        format!("{:016x}", self.0)
    }

    pub fn parse(word: &str) -> Option<Self> {
        if word.len() != 16 || !word.bytes().all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b)) {
            return None;
        }
        u64::from_str_radix(word, 16).ok().map(Label64)
    }
}

impl fmt::Display for Label64 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

/// Level (0,0) label of the triple `(max dim, cardinality, χ)`.
pub fn label_of_triple(max_dim: u64, cardinality: u64, euler: i64) -> Label64 {
    let mut bytes = Vec::with_capacity(26);
    bytes.extend([TUPLE_TAG, 3]);
    bytes.extend(max_dim.to_le_bytes());
    bytes.extend(cardinality.to_le_bytes());
    bytes.extend(euler.to_le_bytes());
    Label64(hash64(&bytes))
}

pub fn label00(cmf: &Cmf, v: usize) -> Label64 {
    let k = cmf.complex();
    let mv = cmf.multivector(v);
    let max_dim = mv.simplices.iter().map(|&s| k.dim(s)).max().unwrap_or(0);
    let set: BTreeSet<_> = mv.simplices.iter().copied().collect();
    label_of_triple(max_dim as u64, mv.len() as u64, euler_characteristic(k, &set))
}

fn push_list(bytes: &mut Vec<u8>, mut values: Vec<u64>) {
    values.sort_unstable();
    bytes.push(LIST_TAG);
    bytes.extend((values.len() as u64).to_le_bytes());
    for v in values {
        bytes.extend(v.to_le_bytes());
    }
}

/// Level `(b, f)` label given precomputed level (0,0) labels.
///
/// Neighbour labels are collected as a multiset: two neighbours with the
/// same level (0,0) label contribute two entries.
pub fn label_bf_from(l00: &[Label64], graph: &CmfGraph, v: usize, b: usize, f: usize) -> Label64 {
    let forward = graph.neighborhood(v, f, Direction::Forward).into_iter().map(|u| l00[u].0).collect();
    let backward = graph.neighborhood(v, b, Direction::Backward).into_iter().map(|u| l00[u].0).collect();
    let mut bytes = Vec::with_capacity(64);
    bytes.extend([TUPLE_TAG, 3]);
    bytes.extend(l00[v].0.to_le_bytes());
    push_list(&mut bytes, forward);
    push_list(&mut bytes, backward);
    Label64(hash64(&bytes))
}

pub fn label_bf(cmf: &Cmf, graph: &CmfGraph, v: usize, b: usize, f: usize) -> Label64 {
    let l00 = labels00(cmf);
    label_bf_from(&l00, graph, v, b, f)
}

pub fn labels00(cmf: &Cmf) -> Vec<Label64> {
    (0..cmf.len()).into_par_iter().map(|v| label00(cmf, v)).collect()
}

/// Labels of every multivector at one `(b, f)` level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Labeling {
    pub backward: usize,
    pub forward: usize,
    pub level00: Vec<Label64>,
    pub words: Vec<Label64>,
}

impl Labeling {
    pub fn compute(cmf: &Cmf, graph: &CmfGraph, backward: usize, forward: usize) -> Self {
        let level00 = labels00(cmf);
        let words = (0..cmf.len())
            .into_par_iter()
            .map(|v| label_bf_from(&level00, graph, v, backward, forward))
            .collect();
        Labeling { backward, forward, level00, words }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// `multivector_id,label00,label_bf` with hex words.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["multivector_id", "label00", "label_bf"])?;
        for (id, (l0, lbf)) in self.level00.iter().zip(&self.words).enumerate() {
            w.write_record([id.to_string(), l0.word(), lbf.word()])?;
        }
        w.flush().map_err(|e| Error::io("<labels csv>", e))?;
        Ok(())
    }

    /// Reads the CSV form; the level is not stored in the file and must be
    /// supplied.
    pub fn read_csv<R: Read>(input: R, backward: usize, forward: usize) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let mut level00 = Vec::new();
        let mut words = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let bad = |msg: &str| Error::Parse { path: "<labels csv>".into(), line: i + 2, msg: msg.into() };
            let id: usize = rec.get(0).and_then(|s| s.parse().ok()).ok_or_else(|| bad("bad multivector id"))?;
            if id != i {
                return Err(bad("multivector ids must be dense and ascending"));
            }
            level00.push(rec.get(1).and_then(Label64::parse).ok_or_else(|| bad("bad label00 word"))?);
            words.push(rec.get(2).and_then(Label64::parse).ok_or_else(|| bad("bad label_bf word"))?);
        }
        Ok(Labeling { backward, forward, level00, words })
    }
}
