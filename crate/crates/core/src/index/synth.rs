//! Seeded synthetic videos with planted cuts and concept-distinct scenes,
//! their edited copies, and a labelled texture training set.
//!
//! A scene is a stack of horizontal color bands sharing one texture pattern.
//! Each color concept has two shades that map to that concept, and the
//! pattern chooses between them, so a band's color percentage is exact
//! while its texture is carried by the shade layout. All 22 shades fall in
//! distinct 64-bin grey histogram bins, so a cut between scenes with
//! disjoint colors has histogram difference 1.

use std::f64::consts::PI;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{Config, GammaSetting};
use super::eval::GroundTruth;
use crate::color::{ColorConceptId, N_COLOR_CONCEPTS};
use crate::error::{Error, Result};
use crate::ingest::{Frame, FrameManifest, FrameRate};
use crate::texture::{
    gabor_energy_vector, median_gamma, train_ovr_svm_with_report, GaborBank, GaborConfig,
    LabelledSample, SvmParams, TextureConceptId, TrainedSvmModel,
};

pub const SYNTH_FRAME_SIZE: usize = 32;
pub const SYNTH_FPS: u32 = 25;
pub const JITTER_FPS: u32 = 30;
/// Pattern drift: one pixel per this many milliseconds.
const DRIFT_MS_PER_PX: u64 = 400;
pub const DEFAULT_TRAINING_SEED: u64 = 0x5eed_7e47;
pub const DEFAULT_TRAINING_PER_CLASS: usize = 40;

/// Two shades per concept, indexed by `ColorConceptId::index()`.
const SHADES: [[[u8; 3]; 2]; N_COLOR_CONCEPTS] = [
    [[0, 0, 0], [30, 30, 30]],          // black
    [[50, 50, 255], [20, 20, 200]],     // blue
    [[0, 200, 200], [0, 130, 130]],     // cyan
    [[0, 200, 0], [0, 130, 0]],         // green
    [[100, 100, 100], [180, 180, 180]], // grey
    [[255, 140, 0], [200, 110, 0]],     // orange
    [[160, 40, 200], [110, 25, 140]],   // purple
    [[220, 20, 20], [150, 10, 10]],     // red
    [[230, 180, 150], [190, 145, 115]], // skin
    [[255, 255, 255], [225, 225, 225]], // white
    [[255, 230, 0], [200, 180, 0]],     // yellow
];

pub fn shades(c: ColorConceptId) -> [[u8; 3]; 2] {
    SHADES[c.index()]
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pattern {
    Uniform,
    /// Square-wave stripes at orientation `k * pi / 7`.
    Lined {
        orientation: u8,
        period: u8,
    },
    Spotted {
        period: u8,
    },
    /// One-pixel grid lines.
    Netlike {
        period: u8,
    },
    /// 2x2 blocks of hashed noise.
    Disordered {
        seed: u32,
    },
}

/// Texture concepts the generator can render.
pub const PATTERN_CONCEPTS: [TextureConceptId; 5] = [
    TextureConceptId::Disordered,
    TextureConceptId::Lined,
    TextureConceptId::Netlike,
    TextureConceptId::Spotted,
    TextureConceptId::Uniform,
];

impl Pattern {
    pub fn concept(&self) -> TextureConceptId {
        match self {
            Pattern::Uniform => TextureConceptId::Uniform,
            Pattern::Lined { .. } => TextureConceptId::Lined,
            Pattern::Spotted { .. } => TextureConceptId::Spotted,
            Pattern::Netlike { .. } => TextureConceptId::Netlike,
            Pattern::Disordered { .. } => TextureConceptId::Disordered,
        }
    }

    pub fn random(rng: &mut impl Rng, concept: TextureConceptId) -> Result<Self> {
        Ok(match concept {
            TextureConceptId::Uniform => Pattern::Uniform,
            TextureConceptId::Lined => Pattern::Lined {
                orientation: rng.gen_range(0..7),
                period: rng.gen_range(4..=8),
            },
            TextureConceptId::Spotted => Pattern::Spotted {
                period: rng.gen_range(6..=9),
            },
            TextureConceptId::Netlike => Pattern::Netlike {
                period: rng.gen_range(5..=7),
            },
            TextureConceptId::Disordered => Pattern::Disordered { seed: rng.gen() },
            other => {
                return Err(Error::InvalidArgument(format!(
                    "no synthetic pattern for `{other}`"
                )))
            }
        })
    }

    /// Whether pixel `(x, y)` takes the second shade.
    fn value(&self, x: i64, y: i64, drift: i64) -> bool {
        match *self {
            Pattern::Uniform => false,
            Pattern::Lined {
                orientation,
                period,
            } => {
                let theta = orientation as f64 * PI / 7.0;
                let u = x as f64 * theta.cos() + y as f64 * theta.sin() + drift as f64;
                (u / period as f64).rem_euclid(1.0) < 0.5
            }
            Pattern::Spotted { period } => {
                let p = period as i64;
                let half = (p - 1) as f64 / 2.0;
                let dx = (x + drift).rem_euclid(p) as f64 - half;
                let dy = y.rem_euclid(p) as f64 - half;
                let r = p as f64 / 3.5;
                dx * dx + dy * dy <= r * r
            }
            Pattern::Netlike { period } => {
                let p = period as i64;
                (x + drift).rem_euclid(p) == 0 || y.rem_euclid(p) == 0
            }
            Pattern::Disordered { seed } => {
                let bx = (x + drift).div_euclid(2) as u64;
                let by = y.div_euclid(2) as u64;
                mix((seed as u64) << 40 ^ bx << 20 ^ by) & 1 == 1
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    /// Top-to-bottom bands as (concept, rows).
    pub bands: Vec<(ColorConceptId, usize)>,
    pub pattern: Pattern,
}

impl Scene {
    pub fn colors(&self) -> Vec<ColorConceptId> {
        self.bands.iter().map(|b| b.0).collect()
    }

    pub fn height(&self) -> usize {
        self.bands.iter().map(|b| b.1).sum()
    }

    /// Exact concept percentages of any rendered frame.
    pub fn color_percentages(&self) -> [f64; N_COLOR_CONCEPTS] {
        let h = self.height() as f64;
        let mut pct = [0.0; N_COLOR_CONCEPTS];
        for &(c, rows) in &self.bands {
            pct[c.index()] += rows as f64 / h * 100.0;
        }
        pct
    }

    /// 1 to 3 colors not in `exclude`, random band heights, random pattern.
    pub fn random(rng: &mut impl Rng, size: usize, exclude: &[ColorConceptId]) -> Scene {
        let concept = *PATTERN_CONCEPTS.choose(rng).expect("non-empty");
        let pattern = Pattern::random(rng, concept).expect("renderable concept");
        Scene::random_with_pattern(rng, size, exclude, pattern)
    }

    pub fn random_with_pattern(
        rng: &mut impl Rng,
        size: usize,
        exclude: &[ColorConceptId],
        pattern: Pattern,
    ) -> Scene {
        let mut pool: Vec<ColorConceptId> = ColorConceptId::ALL
            .into_iter()
            .filter(|c| !exclude.contains(c))
            .collect();
        pool.shuffle(rng);
        let k = rng.gen_range(1..=3usize).min(pool.len()).max(1);
        let weights: Vec<usize> = (0..k).map(|_| rng.gen_range(1..=3)).collect();
        let total: usize = weights.iter().sum();
        let mut bands = Vec::with_capacity(k);
        let mut used = 0;
        for (j, w) in weights.iter().enumerate() {
            let rows = if j + 1 == k {
                size - used
            } else {
                size * w / total
            };
            used += rows;
            bands.push((pool[j], rows));
        }
        Scene { bands, pattern }
    }

    /// Frame at scene-local time `t_ms`; the pattern drifts with time.
    pub fn render(&self, width: usize, t_ms: u64) -> Frame {
        let drift = (t_ms / DRIFT_MS_PER_PX) as i64;
        let h = self.height();
        let mut rgb = Vec::with_capacity(width * h * 3);
        let mut y = 0;
        for &(c, rows) in &self.bands {
            let s = shades(c);
            for _ in 0..rows {
                for x in 0..width {
                    let v = self.pattern.value(x as i64, y as i64, drift);
                    rgb.extend_from_slice(&s[usize::from(v)]);
                }
                y += 1;
            }
        }
        Frame::from_rgb(width, h, rgb).expect("consistent dimensions")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub scene: Scene,
    pub duration_ms: u64,
    /// Inserted content not present in the source.
    pub alien: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthVideo {
    pub id: String,
    pub fps: FrameRate,
    pub frame_size: usize,
    pub segments: Vec<Segment>,
}

impl SynthVideo {
    pub fn planted_durations(&self) -> Vec<u64> {
        self.segments.iter().map(|s| s.duration_ms).collect()
    }

    pub fn total_ms(&self) -> u64 {
        self.segments.iter().map(|s| s.duration_ms).sum()
    }

    pub fn alien_ms(&self) -> u64 {
        self.segments
            .iter()
            .filter(|s| s.alien)
            .map(|s| s.duration_ms)
            .sum()
    }

    /// Samples the timeline at the video's frame rate. Frame `k` shows the
    /// segment containing its timestamp.
    pub fn render(&self) -> Result<(FrameManifest, Vec<Frame>)> {
        let total = self.total_ms();
        if total == 0 {
            return Err(Error::Empty("synthetic timeline"));
        }
        let period = self.fps.period_ms();
        let n = (total as f64 / period).ceil() as usize;
        let manifest = FrameManifest::uniform(n, self.fps)?;
        let mut frames = Vec::with_capacity(n);
        let mut seg = 0;
        let mut seg_start = 0u64;
        for k in 0..n {
            let t = manifest.timestamp(k);
            while seg + 1 < self.segments.len() && t >= seg_start + self.segments[seg].duration_ms {
                seg_start += self.segments[seg].duration_ms;
                seg += 1;
            }
            frames.push(
                self.segments[seg]
                    .scene
                    .render(self.frame_size, t - seg_start),
            );
        }
        Ok((manifest, frames))
    }

    /// Writes `<root>/<id>/manifest.txt` and its PPM frames.
    pub fn write_to(&self, root: &Path) -> Result<()> {
        let (manifest, frames) = self.render()?;
        let dir = root.join(&self.id);
        let frames_dir = dir.join("frames");
        std::fs::create_dir_all(&frames_dir).map_err(|e| Error::io(&frames_dir, e))?;
        for (entry, frame) in manifest.entries().iter().zip(&frames) {
            let path = dir.join(&entry.frame_path);
            std::fs::write(&path, frame.to_ppm()).map_err(|e| Error::io(&path, e))?;
        }
        let path = dir.join("manifest.txt");
        std::fs::write(&path, manifest.to_text()).map_err(|e| Error::io(&path, e))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSpec {
    pub n_videos: usize,
    pub min_shots: usize,
    pub max_shots: usize,
    pub min_shot_ms: u64,
    pub max_shot_ms: u64,
    pub frame_size: usize,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            n_videos: 50,
            min_shots: 12,
            max_shots: 20,
            min_shot_ms: 1000,
            max_shot_ms: 6000,
            frame_size: SYNTH_FRAME_SIZE,
        }
    }
}

impl CorpusSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_videos == 0 {
            return Err(Error::InvalidArgument("need at least one video".into()));
        }
        if self.min_shots == 0 || self.min_shots > self.max_shots {
            return Err(Error::InvalidArgument("bad shot count range".into()));
        }
        if self.min_shot_ms < 200 || self.min_shot_ms > self.max_shot_ms {
            return Err(Error::InvalidArgument("bad shot duration range".into()));
        }
        if self.frame_size < 8 {
            return Err(Error::InvalidArgument(
                "frame size must be at least 8".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EditKind {
    /// Alien shots inserted at shot boundaries.
    Insert,
    /// Re-timed at 30 fps with a global duration scale.
    Jitter,
    Mixed,
    /// Consecutive source shots covering about `target_ms`.
    Excerpt {
        target_ms: u64,
    },
}

impl EditKind {
    pub fn set_name(&self) -> String {
        match self {
            EditKind::Insert => "insert".into(),
            EditKind::Jitter => "jitter".into(),
            EditKind::Mixed => "mixed".into(),
            EditKind::Excerpt { target_ms } => format!("excerpt-{}s", target_ms / 1000),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EditSpec {
    pub kinds: Vec<EditKind>,
    pub queries_per_kind: usize,
    /// Largest inserted fraction of the source duration.
    pub insert_budget: f64,
    /// Largest relative duration change.
    pub max_jitter: f64,
}

impl Default for EditSpec {
    fn default() -> Self {
        EditSpec {
            kinds: vec![
                EditKind::Insert,
                EditKind::Jitter,
                EditKind::Mixed,
                EditKind::Excerpt { target_ms: 5_000 },
                EditKind::Excerpt { target_ms: 15_000 },
                EditKind::Excerpt { target_ms: 120_000 },
            ],
            queries_per_kind: 10,
            insert_budget: 0.2,
            max_jitter: 0.025,
        }
    }
}

impl EditSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=0.2).contains(&self.insert_budget) {
            return Err(Error::InvalidArgument(
                "insert budget must be in [0, 0.2]".into(),
            ));
        }
        if !(0.0..=0.05).contains(&self.max_jitter) {
            return Err(Error::InvalidArgument("jitter must be in [0, 0.05]".into()));
        }
        if self
            .kinds
            .iter()
            .any(|k| matches!(k, EditKind::Excerpt { target_ms: 0 }))
        {
            return Err(Error::InvalidArgument(
                "excerpt length must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthQuery {
    pub video: SynthVideo,
    pub source_id: String,
    pub kind: EditKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    pub sources: Vec<SynthVideo>,
    pub queries: Vec<SynthQuery>,
}

impl SynthCorpus {
    pub fn ground_truth(&self) -> GroundTruth {
        let mut gt = GroundTruth::default();
        for q in &self.queries {
            gt.insert(
                q.video.id.clone(),
                &[q.source_id.as_str()],
                &q.kind.set_name(),
            );
        }
        gt
    }

    /// `<out>/corpus/<id>/`, `<out>/queries/<id>/`, `truth.tsv` and a
    /// matching `ndvd.conf`.
    pub fn write_to(&self, out: &Path) -> Result<()> {
        let corpus = out.join("corpus");
        let queries = out.join("queries");
        for v in &self.sources {
            v.write_to(&corpus)?;
        }
        for q in &self.queries {
            q.video.write_to(&queries)?;
        }
        std::fs::create_dir_all(&queries).map_err(|e| Error::io(&queries, e))?;
        let truth = out.join("truth.tsv");
        std::fs::write(&truth, self.ground_truth().to_text()).map_err(|e| Error::io(&truth, e))?;
        let conf = out.join("ndvd.conf");
        std::fs::write(&conf, synthetic_config().to_text()).map_err(|e| Error::io(&conf, e))
    }
}

fn random_duration(rng: &mut impl Rng, lo: u64, hi: u64) -> u64 {
    // multiples of 40 ms so 25 fps renders cut exactly on planted boundaries
    rng.gen_range(lo.div_ceil(40)..=hi / 40) * 40
}

fn source_video(rng: &mut impl Rng, id: String, spec: &CorpusSpec) -> SynthVideo {
    let n = rng.gen_range(spec.min_shots..=spec.max_shots);
    let mut segments: Vec<Segment> = Vec::with_capacity(n);
    for _ in 0..n {
        let exclude = segments
            .last()
            .map(|s| s.scene.colors())
            .unwrap_or_default();
        segments.push(Segment {
            scene: Scene::random(rng, spec.frame_size, &exclude),
            duration_ms: random_duration(rng, spec.min_shot_ms, spec.max_shot_ms),
            alien: false,
        });
    }
    SynthVideo {
        id,
        fps: FrameRate::new(SYNTH_FPS, 1).expect("valid rate"),
        frame_size: spec.frame_size,
        segments,
    }
}

fn insert_aliens(rng: &mut impl Rng, v: &mut SynthVideo, budget: f64, spec: &CorpusSpec) {
    let budget_ms = (budget * v.total_ms() as f64).floor() as u64;
    let mut used = 0;
    let attempts = rng.gen_range(1..=4);
    for _ in 0..attempts {
        let remaining = budget_ms - used;
        if remaining < spec.min_shot_ms {
            break;
        }
        let d = random_duration(rng, spec.min_shot_ms, remaining.min(spec.max_shot_ms));
        let gap = rng.gen_range(0..=v.segments.len());
        let mut exclude = Vec::new();
        if gap > 0 {
            exclude.extend(v.segments[gap - 1].scene.colors());
        }
        if let Some(next) = v.segments.get(gap) {
            exclude.extend(next.scene.colors());
        }
        let scene = Scene::random(rng, v.frame_size, &exclude);
        v.segments.insert(
            gap,
            Segment {
                scene,
                duration_ms: d,
                alien: true,
            },
        );
        used += d;
    }
}

fn jitter(rng: &mut impl Rng, v: &mut SynthVideo, max_jitter: f64) {
    let f = 1.0 + rng.gen_range(-1.0..=1.0) * max_jitter;
    for s in &mut v.segments {
        s.duration_ms = ((s.duration_ms as f64 * f).round() as u64).max(1);
    }
    v.fps = FrameRate::new(JITTER_FPS, 1).expect("valid rate");
}

/// Consecutive shots from a random start whose total first reaches
/// `target_ms`; when no run is long enough, every shot but the first.
fn excerpt(rng: &mut impl Rng, v: &mut SynthVideo, target_ms: u64) {
    let n = v.segments.len();
    let ends: Vec<(usize, usize)> = (0..n)
        .filter_map(|s| {
            let mut acc = 0;
            for e in s..n {
                acc += v.segments[e].duration_ms;
                if acc >= target_ms {
                    return Some((s, e));
                }
            }
            None
        })
        .collect();
    let (s, e) = match ends.choose(rng) {
        Some(&r) => r,
        None => (usize::from(n > 1), n - 1),
    };
    v.segments = v.segments[s..=e].to_vec();
}

/// Sources `v000...` plus `queries_per_kind` edited copies per edit kind, each
/// made from a distinct random source where possible.
pub fn generate_synthetic_corpus(
    seed: u64,
    spec: &CorpusSpec,
    edits: &EditSpec,
) -> Result<SynthCorpus> {
    spec.validate()?;
    edits.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sources: Vec<SynthVideo> = (0..spec.n_videos)
        .map(|k| source_video(&mut rng, format!("v{k:03}"), spec))
        .collect();

    let mut queries = Vec::new();
    for kind in &edits.kinds {
        let mut order: Vec<usize> = (0..sources.len()).collect();
        order.shuffle(&mut rng);
        for j in 0..edits.queries_per_kind {
            let src = &sources[order[j % order.len()]];
            let mut v = src.clone();
            v.id = format!("q-{}-{j:03}", kind.set_name());
            match *kind {
                EditKind::Insert => insert_aliens(&mut rng, &mut v, edits.insert_budget, spec),
                EditKind::Jitter => jitter(&mut rng, &mut v, edits.max_jitter),
                EditKind::Mixed => {
                    insert_aliens(&mut rng, &mut v, edits.insert_budget, spec);
                    jitter(&mut rng, &mut v, edits.max_jitter);
                }
                EditKind::Excerpt { target_ms } => excerpt(&mut rng, &mut v, target_ms),
            }
            queries.push(SynthQuery {
                video: v,
                source_id: src.id.clone(),
                kind: *kind,
            });
        }
    }
    Ok(SynthCorpus { sources, queries })
}

/// Pipeline settings sized for the synthetic frames.
pub fn synthetic_config() -> Config {
    Config {
        gabor: GaborConfig {
            kernel_size: 15,
            f_min: 0.08,
            f_max: 0.4,
            ..GaborConfig::default()
        },
        ..Config::default()
    }
}

/// Energy vectors of random scenes, `per_class` for every renderable
/// texture concept.
pub fn synthetic_training_set(
    seed: u64,
    per_class: usize,
    frame_size: usize,
    bank: &GaborBank,
) -> Result<Vec<LabelledSample>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(per_class * PATTERN_CONCEPTS.len());
    for _ in 0..per_class {
        for &concept in &PATTERN_CONCEPTS {
            let pattern = Pattern::random(&mut rng, concept)?;
            let scene = Scene::random_with_pattern(&mut rng, frame_size, &[], pattern);
            let frame = scene.render(frame_size, rng.gen_range(0..10_000));
            out.push((gabor_energy_vector(&frame, bank)?, concept));
        }
    }
    Ok(out)
}

/// The texture model used when none is supplied: trained on the synthetic
/// training set with the configured Gabor bank and SVM settings.
pub fn train_default_model(cfg: &Config) -> Result<TrainedSvmModel> {
    let bank = GaborBank::from_config(&cfg.gabor)?;
    let size = SYNTH_FRAME_SIZE.max(cfg.gabor.kernel_size + 17);
    let data = synthetic_training_set(
        DEFAULT_TRAINING_SEED,
        DEFAULT_TRAINING_PER_CLASS,
        size,
        &bank,
    )?;
    let gamma = match cfg.svm.gamma {
        GammaSetting::Auto => median_gamma(&data)?,
        GammaSetting::Fixed(g) => g,
    };
    let params = SvmParams {
        gamma,
        c: cfg.svm.c,
        tol: cfg.svm.kkt_tol,
        max_iter: cfg.svm.max_iter,
    };
    train_ovr_svm_with_report(&data, &params).map(|(m, _)| m)
}
