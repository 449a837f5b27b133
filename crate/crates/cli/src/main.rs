use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use log::info;

use ndvd_core::baselines::{baseline_rank, BaselineMethod};
use ndvd_core::index::{
    evaluate, format_distance_ranking, format_match_ranking, generate_synthetic_corpus,
    index_corpus, query_corpus, read_signature_file, synth, train_default_model, video_id_for,
    write_signature, Config, CorpusSpec, EditSpec, Extractor, GammaSetting, GroundTruth, Rankings,
};
use ndvd_core::ingest::{detect_shot_boundaries, load_frames, FrameManifest};
use ndvd_core::texture::{
    cross_validate, median_gamma, train_ovr_svm_with_report, GaborBank, SvmParams,
};
use ndvd_core::TrainedSvmModel;

#[derive(Parser)]
#[command(
    name = "ndvd",
    version,
    about = "Near-duplicate video detection from shot signatures"
)]
struct Cli {
    /// Pipeline configuration (`key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the shots detected in a frame manifest.
    Segment { manifest: PathBuf },
    /// Write the signature of one video.
    Extract {
        manifest: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        /// Texture model; the built-in synthetic model is trained when absent.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Video id; defaults to the manifest's directory or file stem.
        #[arg(long)]
        id: Option<String>,
    },
    /// Extract every manifest under a directory into one index file.
    Index {
        dir: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Rank index videos against each query signature in a file.
    Query {
        sig: PathBuf,
        #[arg(long)]
        index: PathBuf,
        /// Print the matched shot pairs under each result.
        #[arg(long)]
        trace: bool,
        /// Overrides `query.mismatch_threshold`.
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Rank index videos by edit distance over shot durations.
    Baseline {
        sig: PathBuf,
        #[arg(long)]
        index: PathBuf,
        #[arg(long, value_parser = parse_method)]
        method: BaselineMethod,
    },
    /// Generate a seeded synthetic corpus with edited query copies.
    Synth {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        videos: usize,
        /// Edited copies per edit kind.
        #[arg(long, default_value_t = 2)]
        queries: usize,
        #[arg(long, default_value_t = 12)]
        min_shots: usize,
        #[arg(long, default_value_t = 20)]
        max_shots: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Precision, recall and MAP of a rankings file.
    Evaluate {
        rankings: PathBuf,
        #[arg(long)]
        truth: PathBuf,
    },
    /// Train the texture model on the synthetic training set.
    Train {
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long, default_value_t = 40)]
        per_class: usize,
        #[arg(long, default_value_t = synth::DEFAULT_TRAINING_SEED)]
        seed: u64,
        /// Cross-validation folds for a (gamma, C) grid search; 0 skips it.
        #[arg(long, default_value_t = 0)]
        folds: usize,
    },
}

fn parse_method(s: &str) -> std::result::Result<BaselineMethod, String> {
    s.parse().map_err(|e: ndvd_core::Error| e.to_string())
}

fn load_config(path: Option<&Path>) -> Result<Config> {
    match path {
        Some(p) => Config::read(p).with_context(|| format!("loading config {}", p.display())),
        None => Ok(Config::default()),
    }
}

fn load_model(path: Option<&Path>, cfg: &Config) -> Result<TrainedSvmModel> {
    match path {
        Some(p) => {
            let text =
                std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Ok(TrainedSvmModel::parse(&text)?)
        }
        None => {
            info!("no texture model given, training the synthetic default");
            Ok(train_default_model(cfg)?)
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn run(cli: Cli) -> Result<()> {
    let cfg = load_config(cli.config.as_deref())?;
    let mut text = String::new();
    match cli.cmd {
        Cmd::Segment { manifest } => {
            let m = FrameManifest::read(&manifest)?;
            let frames = load_frames(&m, manifest.parent().unwrap_or(Path::new(".")))?;
            let shots = detect_shot_boundaries(&m, &frames, &cfg.segmentation)?;
            for (k, s) in shots.iter().enumerate() {
                let _ = writeln!(
                    text,
                    "{k} {} {} {}",
                    s.start_frame, s.end_frame, s.duration_ms
                );
            }
        }
        Cmd::Extract {
            manifest,
            out,
            model,
            id,
        } => {
            let ex = Extractor::new(cfg.clone(), load_model(model.as_deref(), &cfg)?)?;
            let id = id.unwrap_or_else(|| video_id_for(&manifest));
            let sig = ex.extract_manifest(&id, &manifest)?;
            write_file(&out, &write_signature(&sig))?;
            let _ = writeln!(text, "{} {}", sig.video_id(), sig.len());
        }
        Cmd::Index { dir, out, model } => {
            let ex = Extractor::new(cfg.clone(), load_model(model.as_deref(), &cfg)?)?;
            let s = index_corpus(&dir, &out, &ex)?;
            let _ = writeln!(text, "indexed {} skipped {}", s.indexed, s.skipped);
        }
        Cmd::Query {
            sig,
            index,
            trace,
            threshold,
        } => {
            let queries = read_signature_file(&sig)?;
            let index = read_signature_file(&index)?;
            let threshold = threshold.unwrap_or(cfg.mismatch_threshold);
            if !(0.0..=1.0).contains(&threshold) {
                bail!(ndvd_core::Error::InvalidArgument(
                    "threshold must be in [0,1]".into()
                ));
            }
            for q in &queries {
                let results = query_corpus(q, &index, &cfg.matching, threshold)?;
                if trace {
                    // trace lines are comments so the output still parses as rankings
                    for (k, r) in results.iter().enumerate() {
                        let _ = writeln!(
                            text,
                            "{} {} {} {:.6} {}",
                            q.video_id(),
                            k + 1,
                            r.index_id,
                            r.relevance,
                            r.pairs.len()
                        );
                        for line in r.trace_lines() {
                            let _ = writeln!(text, "# {} {line}", r.index_id);
                        }
                    }
                } else {
                    text.push_str(&format_match_ranking(q.video_id(), &results));
                }
            }
        }
        Cmd::Baseline { sig, index, method } => {
            let queries = read_signature_file(&sig)?;
            let index: Vec<(String, Vec<u64>)> = read_signature_file(&index)?
                .into_iter()
                .map(|s| (s.video_id().to_string(), s.durations()))
                .collect();
            for q in &queries {
                let ranked = baseline_rank(&q.durations(), &index, method, &cfg.matching)?;
                text.push_str(&format_distance_ranking(q.video_id(), &ranked));
            }
        }
        Cmd::Synth {
            seed,
            videos,
            queries,
            min_shots,
            max_shots,
            out,
        } => {
            let spec = CorpusSpec {
                n_videos: videos,
                min_shots,
                max_shots,
                ..Default::default()
            };
            let edits = EditSpec {
                queries_per_kind: queries,
                ..Default::default()
            };
            let corpus = generate_synthetic_corpus(seed, &spec, &edits)?;
            corpus.write_to(&out)?;
            let _ = writeln!(
                text,
                "sources {} queries {}",
                corpus.sources.len(),
                corpus.queries.len()
            );
        }
        Cmd::Evaluate { rankings, truth } => {
            let r = std::fs::read_to_string(&rankings)
                .with_context(|| format!("reading {}", rankings.display()))?;
            let t = std::fs::read_to_string(&truth)
                .with_context(|| format!("reading {}", truth.display()))?;
            let report = evaluate(&Rankings::parse(&r)?, &GroundTruth::parse(&t)?)?;
            text.push_str(&report.to_text());
        }
        Cmd::Train {
            out,
            per_class,
            seed,
            folds,
        } => {
            let bank = GaborBank::from_config(&cfg.gabor)?;
            let size = synth::SYNTH_FRAME_SIZE.max(cfg.gabor.kernel_size + 17);
            let data = synth::synthetic_training_set(seed, per_class, size, &bank)?;
            let gamma_med = median_gamma(&data)?;
            let mut params = SvmParams {
                gamma: match cfg.svm.gamma {
                    GammaSetting::Auto => gamma_med,
                    GammaSetting::Fixed(g) => g,
                },
                c: cfg.svm.c,
                tol: cfg.svm.kkt_tol,
                max_iter: cfg.svm.max_iter,
            };
            if folds > 0 {
                let gammas = [0.25, 1.0, 4.0].map(|s| s * gamma_med);
                let report = cross_validate(&data, &gammas, &[1.0, 10.0, 100.0], folds)?;
                for p in &report.grid {
                    let _ = writeln!(
                        text,
                        "cv gamma {:.6} c {:.6} accuracy {:.6}",
                        p.gamma, p.c, p.mean_accuracy
                    );
                }
                params.gamma = report.best.gamma;
                params.c = report.best.c;
            }
            let (model, reports) = train_ovr_svm_with_report(&data, &params)?;
            let gap = reports.iter().map(|r| r.kkt_gap).fold(0.0, f64::max);
            write_file(&out, &model.to_text())?;
            let _ = writeln!(
                text,
                "samples {} gamma {:.6} c {:.6} max_kkt_gap {gap:.6}",
                data.len(),
                params.gamma,
                params.c
            );
        }
    }
    emit(&text)
}

/// Writes to stdout; a closed pipe is not an error.
fn emit(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
