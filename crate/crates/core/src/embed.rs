//! Multivector and field feature vectors built from word vectors.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::Label64;
use crate::sgns::WordVectors;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    Mean,
    Tfidf,
}

impl std::str::FromStr for Weighting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(Weighting::Mean),
            "tfidf" => Ok(Weighting::Tfidf),
            other => Err(Error::validation(format!("unknown weighting {other:?} (expected mean or tfidf)"))),
        }
    }
}

/// Vector of every multivector: the encoding of its label, or zeros when it
/// was filtered out or its word is unknown.
pub fn embed_multivectors(words: &[Label64], kept: &[bool], vectors: &WordVectors) -> Vec<Vec<f64>> {
    words
        .iter()
        .zip(kept)
        .map(|(w, &k)| if k { vectors.encode(&w.word()) } else { vec![0.0; vectors.dim()] })
        .collect()
}

/// Document frequencies of labels over a family of fields.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FamilyStats {
    pub fields: usize,
    pub document_frequency: BTreeMap<Label64, usize>,
}

impl FamilyStats {
    /// `fields` yields, per field, the labels of its kept multivectors.
    pub fn from_fields<'a, I>(fields: I) -> Self
    where
        I: IntoIterator<Item = Vec<&'a Label64>>,
    {
        let mut stats = FamilyStats::default();
        for labels in fields {
            stats.fields += 1;
            let distinct: BTreeSet<&Label64> = labels.into_iter().collect();
            for l in distinct {
                *stats.document_frequency.entry(*l).or_insert(0) += 1;
            }
        }
        stats
    }

    /// Smoothed inverse document frequency `ln((1+N)/(1+df)) + 1`.
    pub fn idf(&self, label: &Label64) -> f64 {
        let df = self.document_frequency.get(label).copied().unwrap_or(0) as f64;
        ((1.0 + self.fields as f64) / (1.0 + df)).ln() + 1.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FieldEmbedding {
    pub field_id: usize,
    pub vector: Vec<f64>,
    pub weighting: Weighting,
}

/// Weighted sum of label encodings over the kept multivectors of a field.
///
/// With `Mean` every kept vertex weighs `1/|kept|`. With `Tfidf` each
/// distinct label `l` contributes `tf(l)·idf(l)·Φ(l)`, where `tf` is its
/// share of kept vertices.
pub fn embed_field(
    field_id: usize,
    words: &[Label64],
    kept: &[bool],
    vectors: &WordVectors,
    weighting: Weighting,
    family: Option<&FamilyStats>,
) -> Result<FieldEmbedding> {
    let dim = vectors.dim();
    let labels: Vec<&Label64> = words.iter().zip(kept).filter(|(_, &k)| k).map(|(w, _)| w).collect();
    let mut vector = vec![0.0; dim];
    if labels.is_empty() {
        if weighting == Weighting::Tfidf && family.is_none() {
            return Err(Error::validation("tfidf weighting needs family statistics"));
        }
        return Ok(FieldEmbedding { field_id, vector, weighting });
    }
    let n = labels.len() as f64;
    match weighting {
        Weighting::Mean => {
            for l in &labels {
                if let Some(v) = vectors.get(&l.word()) {
                    for (acc, x) in vector.iter_mut().zip(v) {
                        *acc += x / n;
                    }
                }
            }
        }
        Weighting::Tfidf => {
            let family = family.ok_or_else(|| Error::validation("tfidf weighting needs family statistics"))?;
            let mut tf: BTreeMap<&Label64, usize> = BTreeMap::new();
            for l in &labels {
                *tf.entry(*l).or_insert(0) += 1;
            }
            for (l, count) in tf {
                let w = count as f64 / n * family.idf(l);
                if let Some(v) = vectors.get(&l.word()) {
                    for (acc, x) in vector.iter_mut().zip(v) {
                        *acc += w * x;
                    }
                }
            }
        }
    }
    Ok(FieldEmbedding { field_id, vector, weighting })
}

/// Writes `<id_column>,e1,...,eD` rows.
pub fn write_embedding_csv<W: Write>(out: W, id_column: &str, rows: &[(usize, Vec<f64>)], dim: usize) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![id_column.to_owned()];
    header.extend((1..=dim).map(|i| format!("e{i}")));
    w.write_record(&header)?;
    for (id, v) in rows {
        let mut rec = vec![id.to_string()];
        rec.extend(v.iter().map(|x| format!("{x:.16e}")));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("<embedding csv>", e))?;
    Ok(())
}

/// Straight RGBA in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rgba {
    pub r: f64,
    pub g: f64,
    pub b: f64,
    pub a: f64,
}

impl Rgba {
    pub const TRANSPARENT_WHITE: Rgba = Rgba { r: 1.0, g: 1.0, b: 1.0, a: 0.0 };

    pub fn is_transparent(&self) -> bool {
        self.a == 0.0
    }
}

fn is_zero(v: &[f64]) -> bool {
    v.iter().all(|&x| x == 0.0)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Colors from vectors: the first (up to) three coordinates are min-max
/// scaled over the nonzero vectors and used as channels, alpha is the norm
/// relative to the largest norm. One coordinate gives gray, two give
/// `(R, G, 0.5)`. Zero vectors are transparent white.
pub fn colorize(vectors: &[Vec<f64>]) -> Vec<Rgba> {
    let nonzero: Vec<&Vec<f64>> = vectors.iter().filter(|v| !is_zero(v)).collect();
    let channels = vectors.first().map_or(0, |v| v.len().min(3));
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for v in &nonzero {
        for c in 0..channels {
            lo[c] = lo[c].min(v[c]);
            hi[c] = hi[c].max(v[c]);
        }
    }
    let max_norm = nonzero.iter().map(|v| norm(v)).fold(0.0, f64::max);
    let scale = |c: usize, x: f64| if hi[c] > lo[c] { ((x - lo[c]) / (hi[c] - lo[c])).clamp(0.0, 1.0) } else { 0.5 };

    vectors
        .iter()
        .map(|v| {
            if is_zero(v) {
                return Rgba::TRANSPARENT_WHITE;
            }
            let a = (norm(v) / max_norm).clamp(0.0, 1.0);
            match channels {
                1 => {
                    let g = scale(0, v[0]);
                    Rgba { r: g, g, b: g, a }
                }
                2 => Rgba { r: scale(0, v[0]), g: scale(1, v[1]), b: 0.5, a },
                _ => Rgba { r: scale(0, v[0]), g: scale(1, v[1]), b: scale(2, v[2]), a },
            }
        })
        .collect()
}
