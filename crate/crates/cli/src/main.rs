use std::collections::BTreeMap;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use mvf2vec::cmf::{build_cmf, Cmf, CmfJson, VectorCloud};
use mvf2vec::corpus::{boundary_filter, generate_corpus, Corpus, FieldRef, WalkParams};
use mvf2vec::embed::{colorize, embed_field, embed_multivectors, write_embedding_csv, FamilyStats, Weighting};
use mvf2vec::graph::build_graph;
use mvf2vec::grid::{triangulate, GridSpec};
use mvf2vec::labels::Labeling;
use mvf2vec::manifest::{write_output, OutputRecord};
use mvf2vec::pipeline::{run_pipeline, PipelineConfig};
use mvf2vec::sgns::{build_vocab, default_epochs, train, TrainParams, WordVectors};
use mvf2vec::svg::{render_cmf, PlotSpec};
use mvf2vec::systems::{minmax_scale, read_ucr, sample_field, ts_to_field, SystemSpec};
use mvf2vec::{Error, Result};

#[derive(Parser)]
#[command(name = "mvf2vec", version, about = "Word embeddings of combinatorial multivector fields")]
struct Cli {
    /// Directory for outputs whose path is not given explicitly.
    #[arg(long, global = true, env = "MVF2VEC_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a dynamical system on a grid into a field CSV.
    GenField(GenFieldArgs),
    /// Turn one series of a UCR file into a field CSV.
    Ts2field(Ts2FieldArgs),
    /// Build a multivector field from a field CSV.
    BuildCmf(BuildCmfArgs),
    /// Compute level-(b,f) labels of a multivector field.
    Label(LabelArgs),
    /// Generate a walk corpus from a directory of multivector fields.
    Corpus(CorpusArgs),
    /// Train word vectors on a corpus.
    Train(TrainArgs),
    /// Multivector and field embeddings from trained vectors.
    Embed(EmbedArgs),
    /// Draw a multivector field colored by its embedding.
    Plot(PlotArgs),
    /// Run every stage from a config (or a previous run's manifest).
    Pipeline(PipelineArgs),
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, default_value_t = -4.0, allow_hyphen_values = true)]
    x_min: f64,
    #[arg(long, default_value_t = 4.0, allow_hyphen_values = true)]
    x_max: f64,
    #[arg(long, default_value_t = -4.0, allow_hyphen_values = true)]
    y_min: f64,
    #[arg(long, default_value_t = 4.0, allow_hyphen_values = true)]
    y_max: f64,
    /// Points along x.
    #[arg(long, default_value_t = 30)]
    px: usize,
    /// Points along y.
    #[arg(long, default_value_t = 30)]
    py: usize,
}

impl GridArgs {
    fn spec(&self) -> Result<GridSpec> {
        let g = GridSpec { x_min: self.x_min, x_max: self.x_max, y_min: self.y_min, y_max: self.y_max, px: self.px, py: self.py };
        g.validate()?;
        Ok(g)
    }
}

#[derive(Args)]
struct GenFieldArgs {
    /// orbit, two_orbits, prey_predator or zero.
    #[arg(long)]
    system: String,
    /// System parameter as name=value, repeatable.
    #[arg(long = "param", value_parser = parse_param, allow_hyphen_values = true)]
    params: Vec<(String, f64)>,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct Ts2FieldArgs {
    #[arg(long)]
    input: PathBuf,
    /// Zero-based series index in the file.
    #[arg(long, default_value_t = 0)]
    index: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BuildCmfArgs {
    #[arg(long)]
    field: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Clone, Copy)]
struct LevelArgs {
    #[arg(long, short = 'b', default_value_t = 1)]
    backward: usize,
    #[arg(long, short = 'f', default_value_t = 1)]
    forward: usize,
}

#[derive(Args)]
struct LabelArgs {
    #[arg(long)]
    cmf: PathBuf,
    #[command(flatten)]
    level: LevelArgs,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CorpusArgs {
    /// Directory holding one CMF JSON per field.
    #[arg(long)]
    cmf_dir: PathBuf,
    #[command(flatten)]
    level: LevelArgs,
    #[arg(long, short = 'c', default_value_t = 2)]
    repetitions: usize,
    #[arg(long, short = 'd', default_value_t = 10)]
    length: usize,
    #[arg(long, default_value_t = 2.0)]
    margin: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 5)]
    window: usize,
    #[arg(long, default_value_t = 0.01)]
    lr0: f64,
    /// Defaults to a corpus-size based schedule.
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long, default_value_t = 5)]
    negatives: usize,
    #[arg(long, default_value_t = 1)]
    min_count: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EmbedArgs {
    /// One or more CMF JSON files; ids in the output follow this order.
    #[arg(long, required = true, num_args = 1..)]
    cmf: Vec<PathBuf>,
    #[arg(long)]
    vectors: PathBuf,
    #[command(flatten)]
    level: LevelArgs,
    #[arg(long, default_value_t = 2.0)]
    margin: f64,
    #[arg(long, default_value = "mean")]
    weighting: Weighting,
    /// Field embedding CSV; multivector CSVs are written next to it.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long)]
    cmf: PathBuf,
    #[arg(long)]
    vectors: PathBuf,
    #[command(flatten)]
    level: LevelArgs,
    #[arg(long, default_value_t = 2.0)]
    margin: f64,
    #[arg(long, default_value_t = 600.0)]
    width: f64,
    #[arg(long, default_value_t = 600.0)]
    height: f64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct PipelineArgs {
    /// Config JSON, or a manifest.json written by an earlier run.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's output directory.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Overrides both the walk and training seeds.
    #[arg(long)]
    seed: Option<u64>,
}

fn parse_param(s: &str) -> std::result::Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected name=value, got {s:?}"))?;
    let v = v.parse::<f64>().map_err(|e| format!("parameter {k}: {e}"))?;
    Ok((k.to_owned(), v))
}

fn existing(path: &Path) -> Result<&Path> {
    if path.is_file() {
        Ok(path)
    } else {
        Err(Error::validation(format!("input file {} does not exist", path.display())))
    }
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(existing(path)?).map_err(|e| Error::io(path, e))
}

fn read_cmf(path: &Path) -> Result<Cmf> {
    let json: CmfJson = serde_json::from_slice(&read_bytes(path)?)?;
    Cmf::from_json(&json)
}

fn read_vectors(path: &Path) -> Result<WordVectors> {
    WordVectors::read(BufReader::new(read_bytes(path)?.as_slice()))
}

struct Outputs<'a> {
    dir: &'a Path,
}

impl Outputs<'_> {
    fn path(&self, explicit: Option<&PathBuf>, default_name: &str) -> PathBuf {
        match explicit {
            Some(p) if p.is_absolute() => p.clone(),
            Some(p) => self.dir.join(p),
            None => self.dir.join(default_name),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn emit(&self, path: &Path, bytes: &[u8], step: &str, params: serde_json::Value, seed: Option<u64>, inputs: &[&Path]) -> Result<()> {
        let rec = OutputRecord::new(path, bytes, step, params, seed).with_inputs(inputs)?;
        write_output(path, bytes, &rec)?;
        log::info!("wrote {}", path.display());
        Ok(())
    }
}

fn kept_labels(cmf: &Cmf, level: LevelArgs, margin: f64) -> Result<(Labeling, Vec<bool>)> {
    let graph = build_graph(cmf);
    let labels = Labeling::compute(cmf, &graph, level.backward, level.forward);
    let kept = boundary_filter(cmf, margin)?;
    Ok((labels, kept))
}

fn cmf_files(dir: &Path) -> Result<Vec<PathBuf>> {
    if !dir.is_dir() {
        return Err(Error::validation(format!("CMF directory {} does not exist", dir.display())));
    }
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
            name.ends_with(".json") && !name.ends_with(".manifest.json")
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::validation(format!("no CMF JSON files in {}", dir.display())));
    }
    Ok(files)
}

fn run(cli: Cli) -> Result<()> {
    let out = Outputs { dir: &cli.out_dir };
    match cli.command {
        Command::GenField(a) => {
            let params: BTreeMap<String, f64> = a.params.into_iter().collect();
            let system = SystemSpec::from_params(&a.system, &params)?;
            let grid = a.grid.spec()?;
            let mut buf = Vec::new();
            sample_field(&system, &grid)?.write_csv(&mut buf)?;
            let path = out.path(a.output.as_ref(), "field.csv");
            out.emit(&path, &buf, "gen-field", json!({ "system": system, "grid": grid }), None, &[])
        }
        Command::Ts2field(a) => {
            let series = read_ucr(existing(&a.input)?)?;
            let ts = series.get(a.index).ok_or_else(|| {
                Error::validation(format!("{} holds {} series, index {} is out of range", a.input.display(), series.len(), a.index))
            })?;
            let mut buf = Vec::new();
            ts_to_field(&minmax_scale(ts))?.write_csv(&mut buf)?;
            let path = out.path(a.output.as_ref(), "field.csv");
            out.emit(&path, &buf, "ts2field", json!({ "index": a.index }), None, &[&a.input])
        }
        Command::BuildCmf(a) => {
            let cloud = VectorCloud::read_csv(read_bytes(&a.field)?.as_slice())?;
            let complex = std::sync::Arc::new(triangulate(&cloud.grid)?);
            let cmf = build_cmf(complex, &cloud, a.alpha)?;
            let bytes = serde_json::to_vec_pretty(&cmf.to_json()?)?;
            let path = out.path(a.output.as_ref(), "cmf.json");
            out.emit(&path, &bytes, "build-cmf", json!({ "alpha": a.alpha }), None, &[&a.field])
        }
        Command::Label(a) => {
            let cmf = read_cmf(&a.cmf)?;
            let graph = build_graph(&cmf);
            let labels = Labeling::compute(&cmf, &graph, a.level.backward, a.level.forward);
            let mut buf = Vec::new();
            labels.write_csv(&mut buf)?;
            let path = out.path(a.output.as_ref(), "labels.csv");
            out.emit(&path, &buf, "label", json!({ "b": a.level.backward, "f": a.level.forward }), None, &[&a.cmf])
        }
        Command::Corpus(a) => {
            let params = WalkParams {
                backward: a.level.backward,
                forward: a.level.forward,
                repetitions: a.repetitions,
                length: a.length,
                seed: a.seed,
                margin: a.margin,
            };
            params.validate()?;
            let files = cmf_files(&a.cmf_dir)?;
            let cmfs = files.iter().map(|f| read_cmf(f)).collect::<Result<Vec<_>>>()?;
            let graphs: Vec<_> = cmfs.iter().map(build_graph).collect();
            let family: Vec<FieldRef> = cmfs.iter().zip(&graphs).map(|(cmf, graph)| FieldRef { cmf, graph }).collect();
            let corpus = generate_corpus(&family, &params)?;
            let mut buf = Vec::new();
            corpus.write(&mut buf).map_err(|e| Error::io("<corpus>", e))?;
            let path = out.path(a.output.as_ref(), "corpus.txt");
            let inputs: Vec<&Path> = files.iter().map(PathBuf::as_path).collect();
            out.emit(&path, &buf, "corpus", serde_json::to_value(params)?, Some(a.seed), &inputs)
        }
        Command::Train(a) => {
            let corpus = Corpus::read(BufReader::new(read_bytes(&a.corpus)?.as_slice()))?;
            let sentences = corpus.text_sentences();
            let params = TrainParams {
                dim: a.dim,
                window: a.window,
                lr0: a.lr0,
                epochs: a.epochs.unwrap_or_else(|| default_epochs(corpus.token_count())),
                negatives: a.negatives,
                seed: a.seed,
            };
            params.validate()?;
            let vocab = build_vocab(&sentences, a.min_count)?;
            let (model, stats) = train(&sentences, &vocab, &params)?;
            if let Some(last) = stats.epoch_loss.last() {
                log::info!("trained {} epochs on {} pairs, final loss {last:.6}", params.epochs, stats.pairs);
            }
            let mut buf = Vec::new();
            model.input.write(&mut buf).map_err(|e| Error::io("<vectors>", e))?;
            let path = out.path(a.output.as_ref(), "vectors.txt");
            let mut record = serde_json::to_value(params)?;
            record["min_count"] = json!(a.min_count);
            out.emit(&path, &buf, "train", record, Some(a.seed), &[&a.corpus])
        }
        Command::Embed(a) => {
            let vectors = read_vectors(&a.vectors)?;
            let cmfs = a.cmf.iter().map(|f| read_cmf(f)).collect::<Result<Vec<_>>>()?;
            let labeled = cmfs.iter().map(|c| kept_labels(c, a.level, a.margin)).collect::<Result<Vec<_>>>()?;
            let family = FamilyStats::from_fields(
                labeled.iter().map(|(l, kept)| l.words.iter().zip(kept).filter(|(_, &k)| k).map(|(w, _)| w).collect()),
            );
            let path = out.path(a.output.as_ref(), "field_emb.csv");
            let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
            let params = json!({ "b": a.level.backward, "f": a.level.forward, "margin": a.margin, "weighting": a.weighting });
            let mut rows = Vec::new();
            for (k, ((labels, kept), input)) in labeled.iter().zip(&a.cmf).enumerate() {
                let mv = embed_multivectors(&labels.words, kept, &vectors);
                let mv_rows: Vec<(usize, Vec<f64>)> = mv.into_iter().enumerate().collect();
                let mut buf = Vec::new();
                write_embedding_csv(&mut buf, "multivector_id", &mv_rows, vectors.dim())?;
                let name = if cmfs.len() == 1 { "multivector_emb.csv".to_owned() } else { format!("multivector_emb_{k}.csv") };
                out.emit(&dir.join(name), &buf, "embed", params.clone(), None, &[input, &a.vectors])?;
                let field = embed_field(k, &labels.words, kept, &vectors, a.weighting, Some(&family))?;
                rows.push((k, field.vector));
            }
            let mut buf = Vec::new();
            write_embedding_csv(&mut buf, "field_id", &rows, vectors.dim())?;
            let mut inputs: Vec<&Path> = a.cmf.iter().map(PathBuf::as_path).collect();
            inputs.push(&a.vectors);
            out.emit(&path, &buf, "embed", params, None, &inputs)
        }
        Command::Plot(a) => {
            let spec = PlotSpec { width: a.width, height: a.height, ..PlotSpec::default() };
            spec.validate()?;
            let vectors = read_vectors(&a.vectors)?;
            let cmf = read_cmf(&a.cmf)?;
            let (labels, kept) = kept_labels(&cmf, a.level, a.margin)?;
            let colors = colorize(&embed_multivectors(&labels.words, &kept, &vectors));
            let svg = render_cmf(&cmf, &colors, &spec)?;
            let path = out.path(a.output.as_ref(), "plot.svg");
            let params = json!({ "b": a.level.backward, "f": a.level.forward, "margin": a.margin, "plot": spec });
            out.emit(&path, svg.as_bytes(), "plot", params, None, &[&a.cmf, &a.vectors])
        }
        Command::Pipeline(a) => {
            let mut config = PipelineConfig::load(existing(&a.config)?)?;
            if let Some(dir) = a.output_dir {
                config.output_dir = dir;
            } else if config.output_dir.as_os_str().is_empty() {
                config.output_dir = cli.out_dir.clone();
            }
            if let Some(seed) = a.seed {
                config.seed = seed;
                config.walk.seed = seed;
            }
            let run = run_pipeline(&config)?;
            log::info!(
                "{} multivectors, {} sentences, {} words in {}",
                run.cmf.len(),
                run.corpus.sentences.len(),
                run.model.input.len(),
                config.output_dir.display()
            );
            Ok(())
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io { .. } => 1,
        e if e.is_user_error() => 2,
        Error::Json(_) | Error::Csv(_) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("mvf2vec: {msg}");
            ExitCode::from(exit_code(&e))
        }
    }
}
