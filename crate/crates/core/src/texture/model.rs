//! One-vs-rest texture concept classifier with calibrated posteriors.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use rayon::prelude::*;

use super::calibration::{fit_sigmoid, Sigmoid};
use super::gabor::{gabor_energy_vector, GaborBank, GaborEnergyVector, GABOR_DIM};
use super::svm::{rbf_kernel, solve_binary, BinarySolution, Gram, SvmParams};
use crate::error::{Error, Result};
use crate::ingest::Frame;

pub const N_TEXTURE_CONCEPTS: usize = 11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TextureConceptId {
    Bumpy,
    Cracked,
    Disordered,
    Interlaced,
    Lined,
    Marbled,
    Netlike,
    Smeared,
    Spotted,
    Uniform,
    Whirly,
}

impl TextureConceptId {
    pub const ALL: [TextureConceptId; N_TEXTURE_CONCEPTS] = [
        TextureConceptId::Bumpy,
        TextureConceptId::Cracked,
        TextureConceptId::Disordered,
        TextureConceptId::Interlaced,
        TextureConceptId::Lined,
        TextureConceptId::Marbled,
        TextureConceptId::Netlike,
        TextureConceptId::Smeared,
        TextureConceptId::Spotted,
        TextureConceptId::Uniform,
        TextureConceptId::Whirly,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            TextureConceptId::Bumpy => "bumpy",
            TextureConceptId::Cracked => "cracked",
            TextureConceptId::Disordered => "disordered",
            TextureConceptId::Interlaced => "interlaced",
            TextureConceptId::Lined => "lined",
            TextureConceptId::Marbled => "marbled",
            TextureConceptId::Netlike => "netlike",
            TextureConceptId::Smeared => "smeared",
            TextureConceptId::Spotted => "spotted",
            TextureConceptId::Uniform => "uniform",
            TextureConceptId::Whirly => "whirly",
        }
    }
}

impl fmt::Display for TextureConceptId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TextureConceptId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown texture concept `{s}`")))
    }
}

/// Texture concepts characterising a shot, with their posteriors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TextureSignature {
    pub present: [bool; N_TEXTURE_CONCEPTS],
    pub prob: [f64; N_TEXTURE_CONCEPTS],
}

impl TextureSignature {
    /// Thresholds `prob` at `tau`, forcing the most probable concept present.
    pub fn from_probabilities(prob: [f64; N_TEXTURE_CONCEPTS], tau: f64) -> Result<Self> {
        if prob.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidArgument(
                "texture probability outside [0,1]".into(),
            ));
        }
        let mut present = prob.map(|p| p >= tau);
        let mut best = 0;
        for (k, &p) in prob.iter().enumerate() {
            if p > prob[best] {
                best = k;
            }
        }
        present[best] = true;
        Ok(TextureSignature { present, prob })
    }

    /// A signature whose probabilities are exactly its presence bits.
    pub fn from_concepts(concepts: &[TextureConceptId]) -> Self {
        let mut present = [false; N_TEXTURE_CONCEPTS];
        for c in concepts {
            present[c.index()] = true;
        }
        TextureSignature {
            present,
            prob: present.map(|p| if p { 1.0 } else { 0.0 }),
        }
    }

    pub fn concepts(&self) -> Vec<TextureConceptId> {
        TextureConceptId::ALL
            .into_iter()
            .filter(|c| self.present[c.index()])
            .collect()
    }
}

/// Binary classifier for one concept against the rest.
#[derive(Debug, Clone, PartialEq)]
pub struct ConceptSvm {
    pub gamma: f64,
    pub c: f64,
    pub bias: f64,
    pub calibration: Sigmoid,
    /// `(alpha_i * y_i, x_i)` for every vector with non-zero alpha.
    pub support: Vec<(f64, [f64; GABOR_DIM])>,
}

impl ConceptSvm {
    pub fn decision(&self, x: &GaborEnergyVector) -> f64 {
        self.support
            .iter()
            .map(|(coef, sv)| coef * rbf_kernel(sv, &x.e, self.gamma))
            .sum::<f64>()
            + self.bias
    }

    pub fn posterior(&self, x: &GaborEnergyVector) -> f64 {
        self.calibration.apply(self.decision(x))
    }
}

/// Diagnostics from training one binary subproblem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConceptTrainingReport {
    pub n_positive: usize,
    pub kkt_gap: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedSvmModel {
    concepts: Vec<ConceptSvm>,
}

impl TrainedSvmModel {
    pub fn from_concepts(concepts: Vec<ConceptSvm>) -> Result<Self> {
        if concepts.len() != N_TEXTURE_CONCEPTS {
            return Err(Error::Untrained);
        }
        for c in &concepts {
            SvmParams::new(c.gamma, c.c).validate()?;
        }
        Ok(TrainedSvmModel { concepts })
    }

    pub fn concept(&self, c: TextureConceptId) -> &ConceptSvm {
        &self.concepts[c.index()]
    }

    pub fn concepts(&self) -> &[ConceptSvm] {
        &self.concepts
    }

    pub fn decision_values(&self, x: &GaborEnergyVector) -> [f64; N_TEXTURE_CONCEPTS] {
        std::array::from_fn(|k| self.concepts[k].decision(x))
    }

    /// The concept with the largest decision value.
    pub fn predict(&self, x: &GaborEnergyVector) -> TextureConceptId {
        let d = self.decision_values(x);
        let mut best = 0;
        for k in 1..N_TEXTURE_CONCEPTS {
            if d[k] > d[best] {
                best = k;
            }
        }
        TextureConceptId::ALL[best]
    }
}

pub type LabelledSample = (GaborEnergyVector, TextureConceptId);

fn distinct_labels(data: &[LabelledSample]) -> [usize; N_TEXTURE_CONCEPTS] {
    let mut counts = [0usize; N_TEXTURE_CONCEPTS];
    for (_, c) in data {
        counts[c.index()] += 1;
    }
    counts
}

/// Trains the eleven one-vs-rest machines over the rows `idx` of `data`,
/// sharing one Gram matrix.
pub(crate) fn train_subset(
    data: &[LabelledSample],
    gram: &Gram,
    idx: &[usize],
    params: &SvmParams,
) -> Result<(TrainedSvmModel, Vec<ConceptTrainingReport>)> {
    let counts = {
        let mut counts = [0usize; N_TEXTURE_CONCEPTS];
        for &i in idx {
            counts[data[i].1.index()] += 1;
        }
        counts
    };
    if counts.iter().filter(|&&n| n > 0).count() < 2 {
        return Err(Error::DegenerateData(
            "need at least two texture classes".into(),
        ));
    }

    let results: Vec<Result<(ConceptSvm, ConceptTrainingReport)>> = TextureConceptId::ALL
        .par_iter()
        .map(|&concept| {
            let y: Vec<f64> = idx
                .iter()
                .map(|&i| if data[i].1 == concept { 1.0 } else { -1.0 })
                .collect();
            let n_positive = counts[concept.index()];
            let sol = if n_positive == 0 {
                // Nothing to separate: constant negative decision.
                BinarySolution {
                    alpha: vec![0.0; idx.len()],
                    bias: -1.0,
                    kkt_gap: 0.0,
                    iterations: 0,
                }
            } else {
                solve_binary(gram, idx, &y, params)?
            };
            let support: Vec<(f64, [f64; GABOR_DIM])> = sol
                .alpha
                .iter()
                .zip(idx)
                .zip(&y)
                .filter(|((a, _), _)| **a > 0.0)
                .map(|((a, &i), yi)| (a * yi, data[i].0.e))
                .collect();
            // training decision values straight from the Gram matrix
            let dec: Vec<f64> = idx
                .iter()
                .map(|&r| {
                    sol.alpha
                        .iter()
                        .zip(idx)
                        .zip(&y)
                        .filter(|((a, _), _)| **a > 0.0)
                        .map(|((a, &i), yi)| a * yi * gram.get(i, r))
                        .sum::<f64>()
                        + sol.bias
                })
                .collect();
            let labels: Vec<bool> = y.iter().map(|&v| v > 0.0).collect();
            let calibration = fit_sigmoid(&dec, &labels);
            Ok((
                ConceptSvm {
                    gamma: params.gamma,
                    c: params.c,
                    bias: sol.bias,
                    calibration,
                    support,
                },
                ConceptTrainingReport {
                    n_positive,
                    kkt_gap: sol.kkt_gap,
                    iterations: sol.iterations,
                },
            ))
        })
        .collect();

    let mut concepts = Vec::with_capacity(N_TEXTURE_CONCEPTS);
    let mut reports = Vec::with_capacity(N_TEXTURE_CONCEPTS);
    for r in results {
        let (c, rep) = r?;
        concepts.push(c);
        reports.push(rep);
    }
    Ok((TrainedSvmModel::from_concepts(concepts)?, reports))
}

/// Trains eleven one-vs-rest RBF machines and calibrates their posteriors.
pub fn train_ovr_svm_with_report(
    data: &[LabelledSample],
    params: &SvmParams,
) -> Result<(TrainedSvmModel, Vec<ConceptTrainingReport>)> {
    params.validate()?;
    let counts = distinct_labels(data);
    if counts.iter().filter(|&&n| n > 0).count() < 2 {
        return Err(Error::DegenerateData(
            "need at least two texture classes".into(),
        ));
    }
    if let Some((k, _)) = counts.iter().enumerate().find(|&(_, &n)| n == 1) {
        return Err(Error::DegenerateData(format!(
            "class `{}` has a single sample",
            TextureConceptId::ALL[k]
        )));
    }
    let x: Vec<&[f64]> = data.iter().map(|(v, _)| v.as_slice()).collect();
    let gram = Gram::new(&x, params.gamma);
    let idx: Vec<usize> = (0..data.len()).collect();
    train_subset(data, &gram, &idx, params)
}

pub fn train_ovr_svm(data: &[LabelledSample], gamma: f64, c: f64) -> Result<TrainedSvmModel> {
    train_ovr_svm_with_report(data, &SvmParams::new(gamma, c)).map(|(m, _)| m)
}

/// Calibrated posterior of every concept for one energy vector.
pub fn posterior_probability(
    model: &TrainedSvmModel,
    x: &GaborEnergyVector,
) -> Result<[f64; N_TEXTURE_CONCEPTS]> {
    if model.concepts.len() != N_TEXTURE_CONCEPTS {
        return Err(Error::Untrained);
    }
    Ok(std::array::from_fn(|k| model.concepts[k].posterior(x)))
}

/// Averages posteriors over key-frames and thresholds them at `tau_present`.
pub fn classify_shot_texture(
    key_frames: &[&Frame],
    bank: &GaborBank,
    model: &TrainedSvmModel,
    tau_present: f64,
) -> Result<TextureSignature> {
    if key_frames.is_empty() {
        return Err(Error::Empty("key-frame list"));
    }
    if !(tau_present > 0.0 && tau_present < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "presence threshold must be in (0,1), got {tau_present}"
        )));
    }
    let mut acc = [0.0; N_TEXTURE_CONCEPTS];
    for frame in key_frames {
        let e = gabor_energy_vector(frame, bank)?;
        for (a, p) in acc.iter_mut().zip(posterior_probability(model, &e)?) {
            *a += p;
        }
    }
    let n = key_frames.len() as f64;
    TextureSignature::from_probabilities(acc.map(|a| (a / n).clamp(0.0, 1.0)), tau_present)
}

const MODEL_MAGIC: &str = "ndvd-svm";

impl TrainedSvmModel {
    /// Text form: a `ndvd-svm v1 11` header, then per concept a `concept`
    /// line followed by one `sv <coef> <49 values>` line per support vector.
    pub fn to_text(&self) -> String {
        let mut out = format!("{MODEL_MAGIC} v1 {N_TEXTURE_CONCEPTS}\n");
        for (concept, m) in TextureConceptId::ALL.iter().zip(&self.concepts) {
            let _ = writeln!(
                out,
                "concept {} gamma {:e} c {:e} bias {:e} a {:e} b {:e} nsv {}",
                concept,
                m.gamma,
                m.c,
                m.bias,
                m.calibration.a,
                m.calibration.b,
                m.support.len()
            );
            for (coef, sv) in &m.support {
                let _ = write!(out, "sv {coef:e}");
                for v in sv {
                    let _ = write!(out, " {v:e}");
                }
                out.push('\n');
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(1, "empty model file"))?;
        let head: Vec<&str> = header.split_whitespace().collect();
        if head.first() != Some(&MODEL_MAGIC) {
            return Err(Error::parse(1, "missing `ndvd-svm` header"));
        }
        if head.get(1) != Some(&"v1") {
            return Err(Error::Version(head.get(1).unwrap_or(&"").to_string()));
        }
        if head.get(2) != Some(&"11") {
            return Err(Error::parse(1, "expected 11 concepts"));
        }
        let num = |line: usize, s: Option<&str>| -> Result<f64> {
            s.and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::parse(line, "malformed number"))
        };

        let mut concepts = Vec::with_capacity(N_TEXTURE_CONCEPTS);
        for expected in TextureConceptId::ALL {
            let (ln, line) = lines
                .next()
                .ok_or_else(|| Error::parse(0, format!("missing concept `{expected}`")))?;
            let ln = ln + 1;
            let t: Vec<&str> = line.split_whitespace().collect();
            let keys = ["concept", "gamma", "c", "bias", "a", "b", "nsv"];
            if t.len() != 14 || keys.iter().enumerate().any(|(i, k)| t[2 * i] != *k) {
                return Err(Error::parse(ln, "malformed concept line"));
            }
            if t[1] != expected.name() {
                return Err(Error::parse(ln, format!("expected concept `{expected}`")));
            }
            let nsv: usize = t[13]
                .parse()
                .map_err(|_| Error::parse(ln, "malformed support-vector count"))?;
            let mut support = Vec::with_capacity(nsv);
            for _ in 0..nsv {
                let (ln, line) = lines
                    .next()
                    .ok_or_else(|| Error::parse(0, "truncated support vectors"))?;
                let ln = ln + 1;
                let mut parts = line.split_whitespace();
                if parts.next() != Some("sv") {
                    return Err(Error::parse(ln, "expected `sv` line"));
                }
                let coef = num(ln, parts.next())?;
                let vals: Vec<f64> = parts
                    .map(|p| p.parse().map_err(|_| Error::parse(ln, "malformed number")))
                    .collect::<Result<_>>()?;
                let sv: [f64; GABOR_DIM] = vals
                    .try_into()
                    .map_err(|_| Error::parse(ln, "support vector must have 49 values"))?;
                support.push((coef, sv));
            }
            concepts.push(ConceptSvm {
                gamma: num(ln, Some(t[3]))?,
                c: num(ln, Some(t[5]))?,
                bias: num(ln, Some(t[7]))?,
                calibration: Sigmoid {
                    a: num(ln, Some(t[9]))?,
                    b: num(ln, Some(t[11]))?,
                },
                support,
            });
        }
        if let Some((ln, _)) = lines.next() {
            return Err(Error::parse(ln + 1, "trailing content"));
        }
        TrainedSvmModel::from_concepts(concepts)
    }
}
