//! Topological word embeddings of combinatorial multivector fields on
//! triangulated planar grids.

pub mod cmf;
pub mod corpus;
pub mod embed;
pub mod error;
pub mod graph;
pub mod grid;
pub mod homology;
pub mod labels;
pub mod manifest;
pub mod pipeline;
pub mod rng;
pub mod sgns;
pub mod svg;
pub mod systems;

pub use cmf::{build_cmf, Cmf, Multivector, VectorCloud};
pub use corpus::{generate_corpus, Corpus, FieldRef, WalkParams};
pub use embed::{colorize, embed_field, embed_multivectors, Rgba, Weighting};
pub use error::{Error, Result};
pub use graph::{build_graph, CmfGraph, Direction};
pub use grid::{GridSpec, SimplicialComplex};
pub use labels::{Label64, Labeling};
pub use pipeline::{run_pipeline, PipelineConfig, PipelineRun};
pub use sgns::{train, EmbeddingModel, TrainParams, Vocab, WordVectors};
pub use systems::SystemSpec;
