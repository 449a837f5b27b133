use ndvd_core::index::synth::{Scene, Segment};
use ndvd_core::index::*;
use ndvd_core::ingest::FrameRate;
use ndvd_core::matcher::relevance;
use ndvd_core::texture::TextureConceptId;
use ndvd_core::{ColorConceptId, ColorSignature, ShotSignature, TextureSignature, VideoSignature};

fn small_corpus(seed: u64, n: usize) -> SynthCorpus {
    let spec = CorpusSpec {
        n_videos: n,
        min_shots: 4,
        max_shots: 6,
        ..Default::default()
    };
    let edits = EditSpec {
        queries_per_kind: 1,
        kinds: vec![EditKind::Insert, EditKind::Jitter],
        ..Default::default()
    };
    generate_synthetic_corpus(seed, &spec, &edits).unwrap()
}

fn extractor() -> Extractor {
    let cfg = synthetic_config();
    let model = train_default_model(&cfg).unwrap();
    Extractor::new(cfg, model).unwrap()
}

#[test]
fn index_corpus_on_disk() {
    let ex = extractor();
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    let out = dir.path().join("empty.idx");
    assert_eq!(index_corpus(&empty, &out, &ex).unwrap().indexed, 0);

    let corpus = small_corpus(5, 1);
    let root = dir.path().join("corpus");
    corpus.sources[0].write_to(&root).unwrap();
    // a manifest pointing at a missing frame is skipped
    std::fs::write(
        root.join("broken.manifest"),
        "ndvd-manifest v1 fps=25/1\n0 nowhere/000000.ppm\n",
    )
    .unwrap();

    let a = dir.path().join("a.idx");
    let b = dir.path().join("b.idx");
    let summary = index_corpus(&root, &a, &ex).unwrap();
    assert_eq!(
        summary,
        IndexSummary {
            indexed: 1,
            skipped: 1
        }
    );
    index_corpus(&root, &b, &ex).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let sigs = read_signature_file(&a).unwrap();
    assert_eq!(sigs.len(), 1);
    assert_eq!(sigs[0].video_id(), "v000");
    assert_eq!(sigs[0].durations(), corpus.sources[0].planted_durations());
}

fn single_shot(d: u64, c: ColorConceptId, t: TextureConceptId) -> ShotSignature {
    let mut pct = [0.0; 11];
    pct[c.index()] = 100.0;
    ShotSignature {
        duration_ms: d,
        color: ColorSignature::new(pct).unwrap(),
        texture: TextureSignature::from_concepts(&[t]),
    }
}

#[test]
fn self_query_ranks_first_with_full_relevance() {
    use ColorConceptId::*;
    use TextureConceptId::*;
    let a = VideoSignature::new(
        "a",
        vec![
            single_shot(1200, Red, Lined),
            single_shot(3000, Blue, Uniform),
            single_shot(2000, Green, Spotted),
        ],
    )
    .unwrap();
    let b = VideoSignature::new(
        "b",
        vec![
            single_shot(1200, Yellow, Lined),
            single_shot(3000, Blue, Netlike),
        ],
    )
    .unwrap();
    let cfg = synthetic_config();
    let res = query_corpus(&a, &[b.clone(), a.clone()], &cfg.matching, 1.0).unwrap();
    assert_eq!(res[0].index_id, "a");
    assert!(
        (res[0].relevance - 1.0).abs() < 1e-4,
        "{}",
        res[0].relevance
    );
    assert_eq!(res[0].pairs.len(), 3);

    // threshold 0 keeps only perfect exhaustivity
    let strict = query_corpus(&a, &[b.clone(), a.clone()], &cfg.matching, 0.0).unwrap();
    assert!(strict.iter().all(|r| r.exhaustivity >= 1.0 - 1e-12));
    assert!(strict.len() <= 1);

    assert!(query_corpus(&a, &[], &cfg.matching, 0.4).is_err());
}

#[test]
fn ranking_equals_independent_relevance() {
    let ex = extractor();
    let corpus = small_corpus(11, 6);
    let sigs: Vec<VideoSignature> = corpus
        .sources
        .iter()
        .chain(corpus.queries.iter().map(|q| &q.video))
        .map(|v| {
            let (m, f) = v.render().unwrap();
            ex.extract(&v.id, &m, &f).unwrap()
        })
        .collect();
    let (index, queries) = sigs.split_at(corpus.sources.len());
    let cfg = &ex.config().matching;
    for q in queries {
        let ranked = query_corpus(q, index, cfg, 1.0).unwrap();
        let mut direct: Vec<(String, f64)> = index
            .iter()
            .map(|i| {
                let r = relevance(q, i, cfg).unwrap();
                (r.index_id, r.relevance)
            })
            .collect();
        direct.sort_by(|x, y| y.1.total_cmp(&x.1));
        let got: Vec<f64> = ranked.iter().map(|r| r.relevance).collect();
        let want: Vec<f64> = direct.iter().map(|d| d.1).collect();
        assert_eq!(got, want);

        // recall cannot grow as the mismatch threshold tightens
        let truth = corpus.ground_truth();
        let mut last = f64::INFINITY;
        for t in [1.0, 0.8, 0.6, 0.4, 0.2, 0.0] {
            let res = query_corpus(q, index, cfg, t).unwrap();
            let mut r = Rankings::default();
            r.insert(
                q.video_id(),
                res.iter().map(|x| x.index_id.clone()).collect(),
            );
            let mut gt = GroundTruth::default();
            let entry = &truth.queries[q.video_id()];
            let rel: Vec<&str> = entry.relevant.iter().map(String::as_str).collect();
            gt.insert(q.video_id(), &rel, &entry.set);
            let recall = evaluate(&r, &gt).unwrap().queries[0].recall;
            assert!(recall <= last);
            last = recall;
        }
    }
}

#[test]
fn planted_cuts_within_one_frame() {
    let ex = extractor();
    let spec = CorpusSpec {
        n_videos: 1,
        min_shots: 6,
        max_shots: 6,
        ..Default::default()
    };
    let mut video = generate_synthetic_corpus(
        21,
        &spec,
        &EditSpec {
            queries_per_kind: 0,
            ..Default::default()
        },
    )
    .unwrap()
    .sources
    .remove(0);
    for fps in [25u32, 30, 24] {
        video.fps = FrameRate::new(fps, 1).unwrap();
        let (m, f) = video.render().unwrap();
        let sig = ex.extract("v", &m, &f).unwrap();
        let planted = video.planted_durations();
        assert_eq!(sig.len(), planted.len(), "fps {fps}");
        let period = 1000.0 / fps as f64;
        for (got, want) in sig.durations().iter().zip(&planted) {
            assert!(
                (*got as f64 - *want as f64).abs() <= period + 1.0,
                "{got} vs {want}"
            );
        }
    }
}

#[test]
fn uniform_scene_signature() {
    let ex = extractor();
    let scene = Scene {
        bands: vec![(ColorConceptId::Green, 32)],
        pattern: ndvd_core::index::synth::Pattern::Uniform,
    };
    let v = SynthVideo {
        id: "u".into(),
        fps: FrameRate::new(25, 1).unwrap(),
        frame_size: 32,
        segments: vec![Segment {
            scene,
            duration_ms: 2000,
            alien: false,
        }],
    };
    let (m, f) = v.render().unwrap();
    let sig = ex.extract("u", &m, &f).unwrap();
    assert_eq!(sig.len(), 1);
    assert_eq!(sig.shots()[0].color.get(ColorConceptId::Green), 100.0);
    assert_eq!(
        sig.shots()[0].texture.concepts(),
        vec![TextureConceptId::Uniform]
    );
}
