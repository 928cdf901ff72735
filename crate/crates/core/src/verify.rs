//! Verification trials, cosine scoring, and equal error rate.
//!
//! Trials cross every speaker's session-1 embedding with every speaker's
//! session-2 embedding: n target and n(n−1) non-target trials. EER is the
//! FA/FR crossing over the threshold-swept empirical operating points, with
//! linear interpolation between adjacent corners.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::extractor::SpeakerEmbedding;
use crate::personalize::SessionId;
use crate::{Error, Result};

/// A speaker's two session embeddings (any vectors; raw weight vectors work
/// as baseline "embeddings").
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingPair {
    pub speaker_id: String,
    pub s1: Vec<f64>,
    pub s2: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trial {
    pub enroll_id: String,
    pub test_id: String,
    pub is_target: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredTrial {
    pub trial: Trial,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialScoreSet {
    pub scored: Vec<ScoredTrial>,
    pub num_target: usize,
    pub num_nontarget: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EerResult {
    pub eer_percent: f64,
    pub threshold: f64,
}

/// Groups per-session embeddings into pairs, sorted by speaker id. Every
/// speaker must have exactly one embedding per session.
pub fn build_embedding_pairs(embeddings: &[SpeakerEmbedding]) -> Result<Vec<EmbeddingPair>> {
    let mut by_speaker: BTreeMap<&str, [Option<&SpeakerEmbedding>; 2]> = BTreeMap::new();
    for e in embeddings {
        let slot = &mut by_speaker.entry(e.speaker_id.as_str()).or_default()
            [e.session_id.index()];
        if slot.is_some() {
            return Err(Error::InvalidConfig(format!(
                "duplicate embedding for {} {}",
                e.speaker_id,
                e.session_id.as_str()
            )));
        }
        *slot = Some(e);
    }
    let mut pairs = Vec::with_capacity(by_speaker.len());
    for (id, slots) in by_speaker {
        match slots {
            [Some(a), Some(b)] => pairs.push(EmbeddingPair {
                speaker_id: id.to_string(),
                s1: a.vector.clone(),
                s2: b.vector.clone(),
            }),
            [None, _] => {
                return Err(Error::MissingEmbedding(format!("{id} {}", SessionId::S1.as_str())))
            }
            [_, None] => {
                return Err(Error::MissingEmbedding(format!("{id} {}", SessionId::S2.as_str())))
            }
        }
    }
    Ok(pairs)
}

/// All enroll(s1) × test(s2) trials in (enroll_id, test_id) order.
pub fn generate_trials(speakers: &[EmbeddingPair]) -> Result<Vec<Trial>> {
    if speakers.is_empty() {
        return Err(Error::Empty("trial speakers"));
    }
    let mut ordered: Vec<&EmbeddingPair> = speakers.iter().collect();
    ordered.sort_by(|a, b| a.speaker_id.cmp(&b.speaker_id));
    for w in ordered.windows(2) {
        if w[0].speaker_id == w[1].speaker_id {
            return Err(Error::InvalidConfig(format!(
                "duplicate speaker id '{}' in trial set",
                w[0].speaker_id
            )));
        }
    }
    let mut trials = Vec::with_capacity(ordered.len() * ordered.len());
    for enroll in &ordered {
        for test in &ordered {
            trials.push(Trial {
                enroll_id: enroll.speaker_id.clone(),
                test_id: test.speaker_id.clone(),
                is_target: enroll.speaker_id == test.speaker_id,
            });
        }
    }
    Ok(trials)
}

/// Cosine similarity, clamped into [−1, 1] against rounding spill.
pub fn cosine_score(e1: &[f64], e2: &[f64]) -> Result<f64> {
    if e1.len() != e2.len() {
        return Err(Error::DimensionMismatch {
            context: "cosine operand length",
            expected: e1.len(),
            got: e2.len(),
        });
    }
    let mut dot = 0.0;
    let mut n1 = 0.0;
    let mut n2 = 0.0;
    for (a, b) in e1.iter().zip(e2) {
        dot += a * b;
        n1 += a * a;
        n2 += b * b;
    }
    if n1 == 0.0 || n2 == 0.0 {
        return Err(Error::ZeroNorm("cosine operand".into()));
    }
    // sqrt(n1*n2) rather than sqrt(n1)*sqrt(n2): the former makes
    // cosine(x, x) exactly 1 (correctly rounded sqrt of a square).
    let score = dot / (n1 * n2).sqrt();
    if !score.is_finite() {
        return Err(Error::NonFinite("cosine score"));
    }
    Ok(score.clamp(-1.0, 1.0))
}

/// Generates and scores all trials for the given speakers.
pub fn score_trials(speakers: &[EmbeddingPair]) -> Result<TrialScoreSet> {
    let trials = generate_trials(speakers)?;
    let by_id: BTreeMap<&str, &EmbeddingPair> = speakers
        .iter()
        .map(|p| (p.speaker_id.as_str(), p))
        .collect();
    let mut scored = Vec::with_capacity(trials.len());
    let mut num_target = 0;
    let mut num_nontarget = 0;
    for trial in trials {
        let enroll = by_id[trial.enroll_id.as_str()];
        let test = by_id[trial.test_id.as_str()];
        let score = cosine_score(&enroll.s1, &test.s2)?;
        if trial.is_target {
            num_target += 1;
        } else {
            num_nontarget += 1;
        }
        scored.push(ScoredTrial { trial, score });
    }
    Ok(TrialScoreSet {
        scored,
        num_target,
        num_nontarget,
    })
}

impl TrialScoreSet {
    pub fn target_scores(&self) -> Vec<f64> {
        self.scored
            .iter()
            .filter(|s| s.trial.is_target)
            .map(|s| s.score)
            .collect()
    }

    pub fn nontarget_scores(&self) -> Vec<f64> {
        self.scored
            .iter()
            .filter(|s| !s.trial.is_target)
            .map(|s| s.score)
            .collect()
    }
}

/// EER of a score set, in percent, with the operating threshold.
pub fn eer(score_set: &TrialScoreSet) -> Result<EerResult> {
    eer_from_scores(&score_set.target_scores(), &score_set.nontarget_scores())
}

/// FA(θ) = fraction of non-target scores ≥ θ; FR(θ) = fraction of target
/// scores < θ. Walks the corner thresholds (every distinct score plus a
/// sentinel above the maximum) and linearly interpolates the first
/// FR ≥ FA crossing.
pub fn eer_from_scores(targets: &[f64], nontargets: &[f64]) -> Result<EerResult> {
    if targets.is_empty() {
        return Err(Error::Empty("target scores"));
    }
    if nontargets.is_empty() {
        return Err(Error::Empty("non-target scores"));
    }
    if !targets.iter().chain(nontargets).all(|s| s.is_finite()) {
        return Err(Error::NonFinite("trial scores"));
    }
    let mut st = targets.to_vec();
    let mut sn = nontargets.to_vec();
    st.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    sn.sort_by(|a, b| a.partial_cmp(b).expect("finite"));

    let mut thresholds: Vec<f64> = st.iter().chain(sn.iter()).copied().collect();
    thresholds.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    thresholds.dedup();
    let sentinel = thresholds.last().expect("non-empty") + 1.0;
    thresholds.push(sentinel);

    let fa_at = |theta: f64| {
        let below = sn.partition_point(|&s| s < theta);
        (sn.len() - below) as f64 / sn.len() as f64
    };
    let fr_at = |theta: f64| st.partition_point(|&s| s < theta) as f64 / st.len() as f64;

    let mut prev: Option<(f64, f64, f64)> = None; // (theta, fa, fr)
    for &theta in &thresholds {
        let fa = fa_at(theta);
        let fr = fr_at(theta);
        if fr >= fa {
            if fr == fa {
                return Ok(EerResult {
                    eer_percent: fa * 100.0,
                    threshold: theta,
                });
            }
            let (pt, pfa, pfr) = prev.expect("FR < FA holds at the minimum threshold");
            let denom = (fr - pfr) - (fa - pfa);
            let t = (pfa - pfr) / denom;
            return Ok(EerResult {
                eer_percent: (pfa + t * (fa - pfa)) * 100.0,
                threshold: pt + t * (theta - pt),
            });
        }
        prev = Some((theta, fa, fr));
    }
    unreachable!("sentinel threshold always yields FR=1 >= FA=0")
}
