//! Synthetic speaker population with controllable gender and identity
//! factors, plus pseudo-i-vectors.
//!
//! Frame model:
//! `x = mu_class + gender_strength * (±u) + speaker_offset + session_offset + eps`
//! with a fixed unit gender direction `u` (sign + for F, − for M), class means
//! drawn once per corpus, a per-speaker offset, a per-session offset, and
//! per-frame noise. The knobs turn each factor on or off independently, so
//! downstream attacks can be dialed from impossible to easy.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::seed;
use crate::{Error, Result};

/// Class means are scaled to this Euclidean norm so phonetic content
/// dominates speaker factors at default sigmas.
const CLASS_MEAN_NORM: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gender {
    F,
    M,
}

impl Gender {
    /// Sign of the gender term: + for F, − for M.
    pub fn sign(self) -> f64 {
        match self {
            Gender::F => 1.0,
            Gender::M => -1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Gender::F => "F",
            Gender::M => "M",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusConfig {
    pub feature_dim: usize,
    pub num_classes: usize,
    pub generic_speakers: usize,
    pub p1_speakers: usize,
    pub p2_speakers: usize,
    pub female_fraction: f64,
    pub gender_strength: f64,
    pub speaker_sigma: f64,
    pub session_sigma: f64,
    pub noise_sigma: f64,
    pub frames_per_session: usize,
    pub seed: u64,
}

impl Default for CorpusConfig {
    fn default() -> CorpusConfig {
        CorpusConfig {
            feature_dim: 20,
            num_classes: 10,
            generic_speakers: 12,
            p1_speakers: 60,
            p2_speakers: 40,
            female_fraction: 0.5,
            gender_strength: 4.0,
            speaker_sigma: 1.0,
            session_sigma: 0.3,
            noise_sigma: 0.6,
            frames_per_session: 3000,
            seed: 0,
        }
    }
}

impl CorpusConfig {
    pub fn validate(&self) -> Result<()> {
        if self.feature_dim == 0 || self.num_classes == 0 {
            return Err(Error::InvalidConfig(
                "feature_dim and num_classes must be >= 1".into(),
            ));
        }
        if self.num_speakers() < 2 {
            return Err(Error::InvalidConfig("need at least 2 speakers".into()));
        }
        // Round-robin labeling guarantees every class appears in every
        // session only if the session is long enough.
        if self.frames_per_session < self.num_classes {
            return Err(Error::InvalidConfig(format!(
                "frames_per_session {} < num_classes {}",
                self.frames_per_session, self.num_classes
            )));
        }
        if !(0.0..=1.0).contains(&self.female_fraction) {
            return Err(Error::InvalidConfig(format!(
                "female_fraction {} outside [0,1]",
                self.female_fraction
            )));
        }
        for (name, v) in [
            ("gender_strength", self.gender_strength),
            ("speaker_sigma", self.speaker_sigma),
            ("session_sigma", self.session_sigma),
            ("noise_sigma", self.noise_sigma),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        Ok(())
    }

    pub fn num_speakers(&self) -> usize {
        self.generic_speakers + self.p1_speakers + self.p2_speakers
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub features: Vec<f64>,
    pub label: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeakerProfile {
    pub speaker_id: String,
    pub gender: Gender,
    pub speaker_offset: Vec<f64>,
    pub session_offsets: [Vec<f64>; 2],
    pub sessions: [Vec<Frame>; 2],
    pub pseudo_ivector: Vec<f64>,
}

impl SpeakerProfile {
    pub fn session(&self, index: usize) -> &[Frame] {
        &self.sessions[index]
    }

    /// Session frames as (features, label) pairs for training.
    pub fn session_dataset(&self, index: usize) -> Vec<(Vec<f64>, usize)> {
        self.sessions[index]
            .iter()
            .map(|f| (f.features.clone(), f.label))
            .collect()
    }

    pub fn frames(&self) -> impl Iterator<Item = &Frame> {
        self.sessions[0].iter().chain(self.sessions[1].iter())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub config: CorpusConfig,
    pub class_means: Vec<Vec<f64>>,
    pub gender_direction: Vec<f64>,
    /// Label-marginal average of the class means: the content expectation of
    /// a frame. Centering speaker means on it makes the pseudo-i-vector the
    /// pure speaker part of the frame model.
    pub global_mean: Vec<f64>,
    pub generic: Vec<SpeakerProfile>,
    pub p1: Vec<SpeakerProfile>,
    pub p2: Vec<SpeakerProfile>,
}

impl Corpus {
    pub fn generate(config: CorpusConfig) -> Result<Corpus> {
        config.validate()?;
        let dim = config.feature_dim;

        let mut shared_rng =
            ChaCha8Rng::seed_from_u64(seed::mix_str(config.seed, "corpus-shared", &[]));
        let class_means: Vec<Vec<f64>> = (0..config.num_classes)
            .map(|_| {
                let v = normal_vector(&mut shared_rng, dim, 1.0);
                scale_to_norm(v, CLASS_MEAN_NORM)
            })
            .collect();
        let gender_direction = scale_to_norm(normal_vector(&mut shared_rng, dim, 1.0), 1.0);

        let global_mean = label_marginal_mean(&class_means, config.frames_per_session);

        let mut speaker_index = 0usize;
        let mut build_split = |prefix: &str, count: usize| -> Vec<SpeakerProfile> {
            let females = ((config.female_fraction * count as f64).round() as usize).min(count);
            (0..count)
                .map(|i| {
                    let gender = if i < females { Gender::F } else { Gender::M };
                    let profile = generate_speaker(
                        &config,
                        &class_means,
                        &gender_direction,
                        &global_mean,
                        format!("{prefix}-{i:03}"),
                        gender,
                        speaker_index,
                    );
                    speaker_index += 1;
                    profile
                })
                .collect()
        };

        let generic = build_split("gen", config.generic_speakers);
        let p1 = build_split("p1", config.p1_speakers);
        let p2 = build_split("p2", config.p2_speakers);

        Ok(Corpus {
            config,
            class_means,
            gender_direction,
            global_mean,
            generic,
            p1,
            p2,
        })
    }

    /// All frames of the generic split, both sessions, in speaker order.
    pub fn generic_pool(&self) -> Vec<(Vec<f64>, usize)> {
        let mut pool = Vec::new();
        for sp in &self.generic {
            for f in sp.frames() {
                pool.push((f.features.clone(), f.label));
            }
        }
        pool
    }

    pub fn split(&self, name: &str) -> Result<&[SpeakerProfile]> {
        match name {
            "generic" => Ok(&self.generic),
            "p1" => Ok(&self.p1),
            "p2" => Ok(&self.p2),
            other => Err(Error::InvalidConfig(format!("unknown split '{other}'"))),
        }
    }
}

/// Mean of all the speaker's frames minus the corpus global mean.
pub fn pseudo_ivector(profile_frames: &[&Frame], global_mean: &[f64]) -> Result<Vec<f64>> {
    if profile_frames.is_empty() {
        return Err(Error::Empty("speaker frames"));
    }
    let dim = global_mean.len();
    let mut mean = vec![0.0; dim];
    for f in profile_frames {
        for (m, v) in mean.iter_mut().zip(&f.features) {
            *m += v;
        }
    }
    let inv = 1.0 / profile_frames.len() as f64;
    for (m, g) in mean.iter_mut().zip(global_mean) {
        *m = *m * inv - g;
    }
    Ok(mean)
}

fn generate_speaker(
    config: &CorpusConfig,
    class_means: &[Vec<f64>],
    gender_direction: &[f64],
    global_mean: &[f64],
    speaker_id: String,
    gender: Gender,
    speaker_index: usize,
) -> SpeakerProfile {
    let dim = config.feature_dim;
    let mut rng = ChaCha8Rng::seed_from_u64(seed::mix_str(
        config.seed,
        "speaker",
        &[speaker_index as u64],
    ));
    let speaker_offset = normal_vector(&mut rng, dim, config.speaker_sigma);
    let gsign = config.gender_strength * gender.sign();

    let mut session_offsets: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    let mut sessions: [Vec<Frame>; 2] = [Vec::new(), Vec::new()];
    for s in 0..2 {
        let session_offset = normal_vector(&mut rng, dim, config.session_sigma);
        let mut labels: Vec<usize> = (0..config.frames_per_session)
            .map(|i| i % config.num_classes)
            .collect();
        labels.shuffle(&mut rng);
        let frames = labels
            .into_iter()
            .map(|label| {
                let mu = &class_means[label];
                let features = (0..dim)
                    .map(|d| {
                        let eps: f64 = rng.sample::<f64, _>(StandardNormal) * config.noise_sigma;
                        mu[d] + gsign * gender_direction[d]
                            + speaker_offset[d]
                            + session_offset[d]
                            + eps
                    })
                    .collect();
                Frame { features, label }
            })
            .collect();
        session_offsets[s] = session_offset;
        sessions[s] = frames;
    }

    let all: Vec<&Frame> = sessions[0].iter().chain(sessions[1].iter()).collect();
    let pseudo_ivector = pseudo_ivector(&all, global_mean).expect("sessions are non-empty");

    SpeakerProfile {
        speaker_id,
        gender,
        speaker_offset,
        session_offsets,
        sessions,
        pseudo_ivector,
    }
}

fn normal_vector(rng: &mut ChaCha8Rng, dim: usize, sigma: f64) -> Vec<f64> {
    (0..dim)
        .map(|_| rng.sample::<f64, _>(StandardNormal) * sigma)
        .collect()
}

fn scale_to_norm(mut v: Vec<f64>, target: f64) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    // A fresh standard normal vector has zero norm with probability zero;
    // guard anyway so a pathological draw cannot emit NaN.
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x *= target / norm;
        }
    }
    v
}

/// Average of class means weighted by how often round-robin labeling emits
/// each class in a session of the given length.
fn label_marginal_mean(class_means: &[Vec<f64>], frames_per_session: usize) -> Vec<f64> {
    let num_classes = class_means.len();
    let dim = class_means[0].len();
    let mut mean = vec![0.0; dim];
    for (c, mu) in class_means.iter().enumerate() {
        let count = frames_per_session / num_classes
            + usize::from(c < frames_per_session % num_classes);
        let w = count as f64 / frames_per_session as f64;
        for (m, v) in mean.iter_mut().zip(mu) {
            *m += w * v;
        }
    }
    mean
}
