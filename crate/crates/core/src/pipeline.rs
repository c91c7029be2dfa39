//! End-to-end run: field → multivector field → corpus → vectors → features.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cmf::{build_cmf, Cmf, VectorCloud};
use crate::corpus::{boundary_filter, generate_corpus, Corpus, FieldRef, WalkParams};
use crate::embed::{colorize, embed_field, embed_multivectors, write_embedding_csv, FamilyStats, FieldEmbedding, Weighting};
use crate::error::{Error, Result};
use crate::graph::{build_graph, CmfGraph};
use crate::grid::{triangulate, GridSpec};
use crate::labels::Labeling;
use crate::manifest::{write_output, OutputRecord, TOOL_VERSION};
use crate::sgns::{default_epochs, train, EmbeddingModel, TrainParams, TrainStats, Vocab};
use crate::svg::{render_cmf, render_scatter, PlotSpec};
use crate::systems::{minmax_scale, read_ucr, sample_field, ts_to_field, SystemSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldSource {
    System { system: SystemSpec, grid: GridSpec },
    TimeSeries { path: PathBuf, index: usize },
}

/// SGNS settings; `epochs` falls back to the corpus-size rule when absent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SgnsConfig {
    pub dim: usize,
    pub window: usize,
    pub lr0: f64,
    pub epochs: Option<usize>,
    pub negatives: usize,
    pub min_count: u64,
}

impl Default for SgnsConfig {
    fn default() -> Self {
        SgnsConfig { dim: 2, window: 5, lr0: 0.01, epochs: None, negatives: 5, min_count: 1 }
    }
}

impl SgnsConfig {
    pub fn params(&self, token_count: usize, seed: u64) -> TrainParams {
        TrainParams {
            dim: self.dim,
            window: self.window,
            lr0: self.lr0,
            epochs: self.epochs.unwrap_or_else(|| default_epochs(token_count)),
            negatives: self.negatives,
            seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub source: FieldSource,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub walk: WalkParams,
    #[serde(default)]
    pub sgns: SgnsConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_weighting")]
    pub weighting: Weighting,
    #[serde(default)]
    pub plot: PlotSpec,
    #[serde(default)]
    pub output_dir: PathBuf,
}

fn default_weighting() -> Weighting {
    Weighting::Mean
}

impl PipelineConfig {
    /// Orbit system on `[-4, 4]^2` with 30 points per axis, level (1,1),
    /// a (1,1,2,10) corpus and 2-dimensional vectors.
    pub fn orbit(output_dir: impl Into<PathBuf>, seed: u64) -> Self {
        PipelineConfig {
            source: FieldSource::System {
                system: SystemSpec::Orbit { corrected_sign: true },
                grid: GridSpec::square(-4.0, 4.0, 30).expect("valid grid"),
            },
            alpha: 0.0,
            walk: WalkParams { backward: 1, forward: 1, repetitions: 2, length: 10, seed, margin: 2.0 },
            sgns: SgnsConfig { epochs: Some(1000), ..Default::default() },
            seed,
            weighting: Weighting::Mean,
            plot: PlotSpec::default(),
            output_dir: output_dir.into(),
        }
    }

    /// Reads a config file; a manifest written by a previous run is
    /// accepted too and replays its recorded config.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let value: serde_json::Value = serde_json::from_str(&text)?;
        let config = match value.get("config") {
            Some(inner) => inner.clone(),
            None => value,
        };
        Ok(serde_json::from_value(config)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.output_dir.as_os_str().is_empty() {
            return Err(Error::validation("output_dir is required"));
        }
        if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&self.alpha) {
            return Err(Error::validation(format!("alpha must lie in [0, pi/2], got {}", self.alpha)));
        }
        self.walk.validate()?;
        self.sgns.params(0, self.seed).validate()?;
        if self.sgns.min_count < 1 {
            return Err(Error::validation("min_count must be >= 1"));
        }
        self.plot.validate()?;
        if let FieldSource::System { grid, .. } = &self.source {
            grid.validate()?;
        }
        if let FieldSource::TimeSeries { path, .. } = &self.source {
            if !path.exists() {
                return Err(Error::validation(format!("time series file {} does not exist", path.display())));
            }
        }
        Ok(())
    }

    pub fn load_field(&self) -> Result<VectorCloud> {
        match &self.source {
            FieldSource::System { system, grid } => sample_field(system, grid),
            FieldSource::TimeSeries { path, index } => {
                let series = read_ucr(path)?;
                let ts = series.get(*index).ok_or_else(|| {
                    Error::validation(format!("{} holds {} series, index {index} is out of range", path.display(), series.len()))
                })?;
                ts_to_field(&minmax_scale(ts))
            }
        }
    }
}

/// In-memory results of a pipeline run.
pub struct PipelineRun {
    pub cloud: VectorCloud,
    pub cmf: Cmf,
    pub graph: CmfGraph,
    pub labels: Labeling,
    pub kept: Vec<bool>,
    pub corpus: Corpus,
    pub model: EmbeddingModel,
    pub stats: TrainStats,
    pub multivector_embeddings: Vec<Vec<f64>>,
    pub field_embedding: FieldEmbedding,
    pub records: Vec<OutputRecord>,
}

#[derive(Serialize)]
struct RunManifest<'a> {
    tool: &'a str,
    config: &'a PipelineConfig,
    outputs: &'a [OutputRecord],
}

/// Runs every stage and writes its artifacts (with sidecar manifests) to
/// the output directory, plus `manifest.json` covering the whole run.
pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineRun> {
    config.validate()?;
    let dir = &config.output_dir;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let inputs: Vec<PathBuf> = match &config.source {
        FieldSource::TimeSeries { path, .. } => vec![path.clone()],
        FieldSource::System { .. } => Vec::new(),
    };
    let input_refs: Vec<&Path> = inputs.iter().map(PathBuf::as_path).collect();
    let mut records = Vec::new();
    let mut emit = |name: &str, bytes: Vec<u8>, step: &str, params: serde_json::Value, seed: Option<u64>| -> Result<()> {
        let path = dir.join(name);
        let rec = OutputRecord::new(&path, &bytes, step, params, seed).with_inputs(&input_refs)?;
        write_output(&path, &bytes, &rec)?;
        records.push(rec);
        Ok(())
    };

    let cloud = config.load_field()?;
    let mut buf = Vec::new();
    cloud.write_csv(&mut buf)?;
    emit("field.csv", buf, "gen-field", serde_json::to_value(&config.source)?, None)?;

    let complex = Arc::new(triangulate(&cloud.grid)?);
    let cmf = build_cmf(complex, &cloud, config.alpha)?;
    emit("cmf.json", serde_json::to_vec_pretty(&cmf.to_json()?)?, "build-cmf", serde_json::json!({ "alpha": config.alpha }), None)?;

    let graph = build_graph(&cmf);
    let labels = Labeling::compute(&cmf, &graph, config.walk.backward, config.walk.forward);
    let mut buf = Vec::new();
    labels.write_csv(&mut buf)?;
    emit("labels.csv", buf, "label", serde_json::json!({ "b": labels.backward, "f": labels.forward }), None)?;

    let kept = boundary_filter(&cmf, config.walk.margin)?;
    let corpus = generate_corpus(&[FieldRef { cmf: &cmf, graph: &graph }], &config.walk)?;
    let mut buf = Vec::new();
    corpus.write(&mut buf).map_err(|e| Error::io(dir.join("corpus.txt"), e))?;
    emit("corpus.txt", buf, "corpus", serde_json::to_value(config.walk)?, Some(config.walk.seed))?;

    let counts = corpus.counts.iter().map(|(w, &c)| (w.word(), c)).collect();
    let vocab = Vocab::from_counts(&counts, config.sgns.min_count)?;
    let params = config.sgns.params(corpus.token_count(), config.seed);
    let (model, stats) = train(&corpus.text_sentences(), &vocab, &params)?;
    let mut buf = Vec::new();
    model.input.write(&mut buf).map_err(|e| Error::io(dir.join("vectors.txt"), e))?;
    emit("vectors.txt", buf, "train", serde_json::to_value(params)?, Some(params.seed))?;

    let multivector_embeddings = embed_multivectors(&labels.words, &kept, &model.input);
    let rows: Vec<(usize, Vec<f64>)> = multivector_embeddings.iter().cloned().enumerate().collect();
    let mut buf = Vec::new();
    write_embedding_csv(&mut buf, "multivector_id", &rows, params.dim)?;
    emit("multivector_emb.csv", buf, "embed", serde_json::json!({}), None)?;

    let family = FamilyStats::from_fields([labels.words.iter().zip(&kept).filter(|(_, &k)| k).map(|(w, _)| w).collect()]);
    let field_embedding = embed_field(0, &labels.words, &kept, &model.input, config.weighting, Some(&family))?;
    let mut buf = Vec::new();
    write_embedding_csv(&mut buf, "field_id", &[(0, field_embedding.vector.clone())], params.dim)?;
    emit("field_emb.csv", buf, "embed", serde_json::json!({ "weighting": config.weighting }), None)?;

    let colors = colorize(&multivector_embeddings);
    emit("plot.svg", render_cmf(&cmf, &colors, &config.plot)?.into_bytes(), "plot", serde_json::to_value(&config.plot)?, None)?;
    if params.dim >= 2 {
        let word_vecs: Vec<Vec<f64>> = (0..model.input.len()).map(|i| model.input.vector(i).to_vec()).collect();
        let points: Vec<(Vec<f64>, _)> = word_vecs.iter().cloned().zip(colorize(&word_vecs)).collect();
        emit("words.svg", render_scatter(&points, &config.plot)?.into_bytes(), "plot", serde_json::to_value(&config.plot)?, None)?;
    }

    let manifest = RunManifest { tool: TOOL_VERSION, config, outputs: &records };
    let path = dir.join("manifest.json");
    fs::write(&path, serde_json::to_vec_pretty(&manifest)?).map_err(|e| Error::io(&path, e))?;

    Ok(PipelineRun {
        cloud,
        cmf,
        graph,
        labels,
        kept,
        corpus,
        model,
        stats,
        multivector_embeddings,
        field_embedding,
        records,
    })
}
