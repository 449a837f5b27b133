//! Signature files, corpus indexing and querying, evaluation and the
//! synthetic corpus generator.

mod config;
mod eval;
mod pipeline;
mod signature;
pub mod synth;

pub use config::{Config, GammaSetting, SvmSettings};
pub use eval::{
    average_precision, evaluate, format_distance_ranking, format_match_ranking, EvalReport,
    GroundTruth, QueryEval, Rankings, SetEval, TruthEntry, DEFAULT_SET,
};
pub use pipeline::{
    find_manifests, index_corpus, query_corpus, video_id_for, Extractor, IndexSummary,
};
pub use signature::{
    read_signature, read_signature_file, read_signatures, write_signature, write_signatures,
};
pub use synth::{
    generate_synthetic_corpus, synthetic_config, train_default_model, CorpusSpec, EditKind,
    EditSpec, SynthCorpus, SynthQuery, SynthVideo,
};
