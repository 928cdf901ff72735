//! The staged experiment pipeline.
//!
//! Stage order: synth → pretrain → personalize → attack-gender →
//! train-extractor → embed → trials → score → report. Every stage is
//! load-or-compute against a persisted artifact under the output directory,
//! so a rerun resumes from whatever exists and reproduces the remainder
//! bit-exact from the master seed. Artifacts are written to a temporary
//! sibling and atomically renamed; no stage observes a partial file.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use wleak_core::cluster::{gender_cluster_layer, speaker_classes};
use wleak_core::corpus::{Corpus, Gender};
use wleak_core::extractor::{
    train_extractor, Extractor, ExtractorSpec, SpeakerEmbedding, Standardizer,
};
use wleak_core::personalize::{
    personalization_seed, personalize, train_generic, Provenance, SessionId, WeightSnapshot,
};
use wleak_core::verify::{build_embedding_pairs, eer, generate_trials, score_trials, EmbeddingPair};
use wleak_core::weight_features::{flatten_snapshot, flatten_snapshot_delta, LayerVector, Source};
use wleak_core::Matrix;

use crate::config::{Direction, ExperimentConfig};
use crate::report::{self, Metric, ReportRow};
use crate::weightfile::{self, write_atomic, Precision};
use crate::{Error, Result};

/// One personalized model with the corpus facts needed by the attacks.
#[derive(Debug, Clone)]
pub struct ModelRecord {
    pub speaker_id: String,
    pub session_id: SessionId,
    pub split: String,
    pub gender: Gender,
    pub adapted: WeightSnapshot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PurityRecord {
    pub direction: String,
    /// 1-based, as in the report.
    pub layer: usize,
    pub purity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationRecord {
    pub direction: String,
    /// 1-based, as in the report.
    pub layer: usize,
    pub eer_extractor: f64,
    pub eer_raw_cosine: f64,
}

/// Persisted next to each extractor's weight file; holds everything the
/// weights alone cannot express.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ExtractorMeta {
    spec: ExtractorSpec,
    standardizer: Standardizer,
}

pub struct Pipeline {
    pub config: ExperimentConfig,
}

fn stage_err<'a>(stage: &'static str, path: &'a Path) -> impl Fn(Error) -> Error + 'a {
    move |e| match e {
        // Keep the innermost stage context; it names the actual failure.
        nested @ Error::Stage { .. } => nested,
        other => Error::Stage {
            stage,
            path: path.to_path_buf(),
            source: Box::new(other),
        },
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = fs::read(path).map_err(|source| Error::Io {
        context: "reading",
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_slice(&bytes).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec(value).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

impl Pipeline {
    pub fn new(config: ExperimentConfig) -> Result<Pipeline> {
        config.validate()?;
        Ok(Pipeline { config })
    }

    fn out(&self) -> &Path {
        &self.config.output_dir
    }

    pub fn corpus_path(&self) -> PathBuf {
        self.out().join("corpus.json")
    }

    pub fn generic_path(&self) -> PathBuf {
        self.out().join("generic.wlkw")
    }

    pub fn model_path(&self, speaker_id: &str, session_id: SessionId) -> PathBuf {
        self.out()
            .join("models")
            .join(format!("{speaker_id}-{}.wlkw", session_id.as_str()))
    }

    pub fn purity_path(&self) -> PathBuf {
        self.out().join("gender-purity.json")
    }

    pub fn extractor_path(&self, direction: &Direction, layer0: usize) -> PathBuf {
        self.out()
            .join("extractors")
            .join(format!("{}-L{:02}.wlkw", direction.label(), layer0 + 1))
    }

    pub fn extractor_meta_path(&self, direction: &Direction, layer0: usize) -> PathBuf {
        self.out()
            .join("extractors")
            .join(format!("{}-L{:02}.meta.json", direction.label(), layer0 + 1))
    }

    pub fn embeddings_path(&self, direction: &Direction, layer0: usize) -> PathBuf {
        self.out()
            .join("embeddings")
            .join(format!("{}-L{:02}.json", direction.label(), layer0 + 1))
    }

    pub fn trials_path(&self, direction: &Direction) -> PathBuf {
        self.out().join("trials").join(format!("{}.txt", direction.label()))
    }

    pub fn verification_path(&self) -> PathBuf {
        self.out().join("verification.json")
    }

    pub fn report_csv_path(&self) -> PathBuf {
        self.out().join("report.csv")
    }

    pub fn report_json_path(&self) -> PathBuf {
        self.out().join("report.json")
    }

    /// Stage `synth`: the corpus file.
    pub fn corpus(&self) -> Result<Corpus> {
        let path = self.corpus_path();
        let wrap = stage_err("synth", &path);
        if path.exists() {
            return read_json(&path).map_err(&wrap);
        }
        let corpus = Corpus::generate(self.config.corpus_config()).map_err(|e| wrap(e.into()))?;
        write_json(&path, &corpus).map_err(&wrap)?;
        eprintln!("[synth] wrote {}", path.display());
        Ok(corpus)
    }

    /// Stage `pretrain`: the generic base snapshot.
    pub fn base(&self, corpus: &Corpus) -> Result<Arc<WeightSnapshot>> {
        let path = self.generic_path();
        let wrap = stage_err("pretrain", &path);
        let topology = self.config.surrogate_topology();
        if path.exists() {
            let (network, provenance) =
                weightfile::load_network(&path, topology.layer_specs()).map_err(&wrap)?;
            if provenance != Provenance::Generic.label() {
                return Err(wrap(Error::WeightFormat {
                    path: path.clone(),
                    message: format!("expected generic provenance, found \"{provenance}\""),
                }));
            }
            return Ok(Arc::new(WeightSnapshot {
                topology,
                network,
                provenance: Provenance::Generic,
            }));
        }
        let cfg = self.config.generic_train_config();
        let (snapshot, _) =
            train_generic(&corpus.generic_pool(), &topology, &cfg).map_err(|e| wrap(e.into()))?;
        weightfile::save_network(&path, &snapshot.network, &snapshot.provenance.label())
            .map_err(&wrap)?;
        eprintln!("[pretrain] wrote {}", path.display());
        Ok(Arc::new(snapshot))
    }

    /// Stage `personalize`: one model per (attack-split speaker, session),
    /// fanned out across the worker pool. Jobs are independent because each
    /// derives its own seed from (master seed, speaker, session).
    pub fn models(&self, corpus: &Corpus, base: &Arc<WeightSnapshot>) -> Result<Vec<ModelRecord>> {
        let topology = self.config.surrogate_topology();
        let mut jobs = Vec::new();
        for split in ["p1", "p2"] {
            for profile in corpus.split(split).map_err(Error::from)? {
                for session_id in SessionId::BOTH {
                    jobs.push((split, profile, session_id));
                }
            }
        }
        let fresh = jobs
            .iter()
            .filter(|(_, p, s)| !self.model_path(&p.speaker_id, *s).exists())
            .count();
        let records: Vec<ModelRecord> = jobs
            .par_iter()
            .map(|&(split, profile, session_id)| {
                let path = self.model_path(&profile.speaker_id, session_id);
                let wrap = stage_err("personalize", &path);
                let provenance = Provenance::Personalized {
                    speaker_id: profile.speaker_id.clone(),
                    session_id,
                };
                let adapted = if path.exists() {
                    let (network, label) =
                        weightfile::load_network(&path, topology.layer_specs())
                            .map_err(&wrap)?;
                    if label != provenance.label() {
                        return Err(wrap(Error::WeightFormat {
                            path: path.clone(),
                            message: format!(
                                "expected provenance \"{}\", found \"{label}\"",
                                provenance.label()
                            ),
                        }));
                    }
                    WeightSnapshot {
                        topology,
                        network,
                        provenance,
                    }
                } else {
                    let cfg = self.config.personalize_train_config(personalization_seed(
                        self.config.master_seed,
                        &profile.speaker_id,
                        session_id,
                    ));
                    let model = personalize(
                        base,
                        &profile.session_dataset(session_id.index()),
                        &profile.speaker_id,
                        session_id,
                        &cfg,
                    )
                    .map_err(|e| wrap(e.into()))?;
                    weightfile::save_network(
                        &path,
                        &model.adapted.network,
                        &model.adapted.provenance.label(),
                    )
                    .map_err(&wrap)?;
                    model.adapted
                };
                Ok(ModelRecord {
                    speaker_id: profile.speaker_id.clone(),
                    session_id,
                    split: split.to_string(),
                    gender: profile.gender,
                    adapted,
                })
            })
            .collect::<Result<_>>()?;
        if fresh > 0 {
            eprintln!(
                "[personalize] trained {fresh} of {} models under {}",
                records.len(),
                self.out().join("models").display()
            );
        }
        Ok(records)
    }

    fn eval_records<'a>(
        &self,
        records: &'a [ModelRecord],
        direction: &Direction,
    ) -> Vec<&'a ModelRecord> {
        records.iter().filter(|r| r.split == direction.eval).collect()
    }

    fn layer_vectors(
        &self,
        base: &WeightSnapshot,
        records: &[&ModelRecord],
        layer0: usize,
        source: Source,
    ) -> Result<Vec<LayerVector>> {
        let include_bias = self.config.attack.include_bias;
        records
            .iter()
            .map(|r| {
                let values = match source {
                    Source::Raw => flatten_snapshot(&r.adapted, layer0, include_bias)?,
                    Source::Delta => {
                        flatten_snapshot_delta(base, &r.adapted, layer0, include_bias)?
                    }
                };
                Ok(LayerVector {
                    speaker_id: r.speaker_id.clone(),
                    session_id: r.session_id,
                    layer_index: layer0,
                    values,
                    source,
                })
            })
            .collect::<wleak_core::Result<_>>()
            .map_err(Error::from)
    }

    /// Stage `attack-gender`: per-direction, per-layer Ward clustering of the
    /// eval split's weight vectors, scored as purity against gender.
    pub fn gender_purity(
        &self,
        base: &WeightSnapshot,
        records: &[ModelRecord],
    ) -> Result<Vec<PurityRecord>> {
        let path = self.purity_path();
        let wrap = stage_err("attack-gender", &path);
        if path.exists() {
            return read_json(&path).map_err(&wrap);
        }
        let source = self.config.attack.source.to_core();
        let mut rows = Vec::new();
        for direction in self.config.directions() {
            // One model per eval speaker: the gender attack sees a single
            // personalized model, not both sessions.
            let eval: Vec<&ModelRecord> = self
                .eval_records(records, &direction)
                .into_iter()
                .filter(|r| r.session_id == SessionId::S1)
                .collect();
            let genders: Vec<Gender> = eval.iter().map(|r| r.gender).collect();
            let per_layer: Vec<PurityRecord> = self
                .config
                .layers0()
                .par_iter()
                .map(|&layer0| {
                    let vectors = self.layer_vectors(base, &eval, layer0, source)?;
                    let (purity, _) =
                        gender_cluster_layer(&vectors, &genders).map_err(Error::from)?;
                    Ok(PurityRecord {
                        direction: direction.label(),
                        layer: layer0 + 1,
                        purity,
                    })
                })
                .collect::<Result<_>>()
                .map_err(&wrap)?;
            rows.extend(per_layer);
        }
        write_json(&path, &rows).map_err(&wrap)?;
        eprintln!("[attack-gender] wrote {}", path.display());
        Ok(rows)
    }

    fn extractor_spec(&self, layer0: usize) -> Result<ExtractorSpec> {
        let specs = self.config.surrogate_topology().layer_specs();
        let layer = specs[layer0];
        let e = &self.config.extractor;
        Ok(ExtractorSpec {
            target_layer_index: layer0,
            num_blocks: layer.units,
            block_size: layer.fan_in + usize::from(self.config.attack.include_bias),
            per_block_units: e.per_block_units,
            fc_units: e.fc_units.clone(),
            embedding_dim: *e.fc_units.last().expect("validated non-empty"),
            num_classes: e.num_classes,
            source: self.config.attack.source.to_core(),
            include_bias: self.config.attack.include_bias,
            holdout_fraction: e.holdout_fraction,
            post_activation_embedding: false,
        })
    }

    fn save_extractor(&self, direction: &Direction, layer0: usize, ex: &Extractor) -> Result<()> {
        let mut layers: Vec<(&Matrix, &[f64])> = ex
            .blocks
            .iter()
            .map(|(w, b)| (w, b.as_slice()))
            .collect();
        layers.extend(
            ex.trunk
                .weights()
                .iter()
                .zip(ex.trunk.biases())
                .map(|(w, b)| (w, b.as_slice())),
        );
        let provenance = format!("extractor/{}/L{:02}", direction.label(), layer0 + 1);
        weightfile::save(
            &self.extractor_path(direction, layer0),
            &layers,
            &provenance,
            Precision::F64,
        )?;
        let meta = ExtractorMeta {
            spec: ex.spec.clone(),
            standardizer: ex
                .standardizer
                .clone()
                .ok_or(wleak_core::Error::MissingStandardizer)?,
        };
        write_json(&self.extractor_meta_path(direction, layer0), &meta)
    }

    fn load_extractor(&self, direction: &Direction, layer0: usize) -> Result<Extractor> {
        let meta: ExtractorMeta = read_json(&self.extractor_meta_path(direction, layer0))?;
        let path = self.extractor_path(direction, layer0);
        let file = weightfile::load(&path)?;
        let trunk_layers = meta.spec.fc_units.len() + 1;
        if file.layers.len() != meta.spec.num_blocks + trunk_layers {
            return Err(Error::WeightFormat {
                path,
                message: format!(
                    "expected {} + {} layers, found {}",
                    meta.spec.num_blocks,
                    trunk_layers,
                    file.layers.len()
                ),
            });
        }
        let mut layers = file.layers;
        let trunk = layers.split_off(meta.spec.num_blocks);
        let (trunk_weights, trunk_biases): (Vec<Matrix>, Vec<Vec<f64>>) =
            trunk.into_iter().unzip();
        Extractor::from_parts(
            meta.spec,
            layers,
            trunk_weights,
            trunk_biases,
            Some(meta.standardizer),
        )
        .map_err(Error::from)
    }

    /// Speaker-class labels for a direction's training split, from Ward
    /// clustering of the split's pseudo-i-vectors.
    fn speaker_class_map(
        &self,
        corpus: &Corpus,
        direction: &Direction,
    ) -> Result<BTreeMap<String, usize>> {
        let profiles = corpus.split(&direction.train).map_err(Error::from)?;
        let ivectors: Vec<Vec<f64>> =
            profiles.iter().map(|p| p.pseudo_ivector.clone()).collect();
        let classes = speaker_classes(&ivectors, self.config.extractor.num_classes)
            .map_err(Error::from)?;
        Ok(profiles
            .iter()
            .zip(classes)
            .map(|(p, c)| (p.speaker_id.clone(), c))
            .collect())
    }

    /// Stage `train-extractor`: one multi-stream extractor per (direction,
    /// layer), trained on the direction's training split.
    pub fn extractors(
        &self,
        corpus: &Corpus,
        base: &WeightSnapshot,
        records: &[ModelRecord],
    ) -> Result<BTreeMap<(String, usize), Extractor>> {
        let source = self.config.attack.source.to_core();
        let mut out = BTreeMap::new();
        for direction in self.config.directions() {
            let class_of = self.speaker_class_map(corpus, &direction).map_err(|e| {
                stage_err("train-extractor", &self.extractor_path(&direction, 0))(e)
            })?;
            let train: Vec<&ModelRecord> = records
                .iter()
                .filter(|r| r.split == direction.train)
                .collect();
            let trained: Vec<((String, usize), Extractor)> = self
                .config
                .layers0()
                .par_iter()
                .map(|&layer0| {
                    let path = self.extractor_path(&direction, layer0);
                    let wrap = stage_err("train-extractor", &path);
                    let exists = path.exists()
                        && self.extractor_meta_path(&direction, layer0).exists();
                    let ex = if exists {
                        self.load_extractor(&direction, layer0).map_err(&wrap)?
                    } else {
                        let vectors = self
                            .layer_vectors(base, &train, layer0, source)
                            .map_err(&wrap)?;
                        let labels: Vec<usize> = train
                            .iter()
                            .map(|r| class_of[r.speaker_id.as_str()])
                            .collect();
                        let spec = self.extractor_spec(layer0).map_err(&wrap)?;
                        let cfg = self
                            .config
                            .extractor_train_config(&direction.label(), layer0);
                        let (ex, _) = train_extractor(&vectors, &labels, &spec, &cfg)
                            .map_err(|e| wrap(e.into()))?;
                        self.save_extractor(&direction, layer0, &ex).map_err(&wrap)?;
                        ex
                    };
                    Ok(((direction.label(), layer0), ex))
                })
                .collect::<Result<_>>()?;
            out.extend(trained);
        }
        eprintln!(
            "[train-extractor] {} extractors under {}",
            out.len(),
            self.out().join("extractors").display()
        );
        Ok(out)
    }

    /// Stage `embed`: eval-split embeddings through each trained extractor.
    pub fn embeddings(
        &self,
        base: &WeightSnapshot,
        records: &[ModelRecord],
        extractors: &BTreeMap<(String, usize), Extractor>,
    ) -> Result<BTreeMap<(String, usize), Vec<SpeakerEmbedding>>> {
        let source = self.config.attack.source.to_core();
        let mut out = BTreeMap::new();
        for direction in self.config.directions() {
            let eval = self.eval_records(records, &direction);
            for &layer0 in &self.config.layers0() {
                let path = self.embeddings_path(&direction, layer0);
                let wrap = stage_err("embed", &path);
                let embeddings: Vec<SpeakerEmbedding> = if path.exists() {
                    read_json(&path).map_err(&wrap)?
                } else {
                    let key = (direction.label(), layer0);
                    let ex = extractors.get(&key).ok_or_else(|| {
                        wrap(Error::InvalidConfig(format!(
                            "no extractor for direction {} layer {}",
                            key.0,
                            layer0 + 1
                        )))
                    })?;
                    let vectors = self
                        .layer_vectors(base, &eval, layer0, source)
                        .map_err(&wrap)?;
                    let embeddings = vectors
                        .iter()
                        .map(|v| ex.embed(v))
                        .collect::<wleak_core::Result<Vec<_>>>()
                        .map_err(|e| wrap(e.into()))?;
                    write_json(&path, &embeddings).map_err(&wrap)?;
                    embeddings
                };
                out.insert((direction.label(), layer0), embeddings);
            }
        }
        eprintln!(
            "[embed] embeddings under {}",
            self.out().join("embeddings").display()
        );
        Ok(out)
    }

    /// Stage `trials`: the per-direction trial/key text file. One line per
    /// trial: `enroll-speaker test-speaker target|nontarget`, enumerating
    /// every session-1 × session-2 cross of the eval split.
    pub fn trials(&self, corpus: &Corpus) -> Result<()> {
        for direction in self.config.directions() {
            let path = self.trials_path(&direction);
            let wrap = stage_err("trials", &path);
            if path.exists() {
                continue;
            }
            // Enumeration only: the placeholder vectors are never scored.
            let pairs: Vec<EmbeddingPair> = corpus
                .split(&direction.eval)
                .map_err(|e| wrap(e.into()))?
                .iter()
                .map(|p| EmbeddingPair {
                    speaker_id: p.speaker_id.clone(),
                    s1: vec![1.0],
                    s2: vec![1.0],
                })
                .collect();
            let trials = generate_trials(&pairs).map_err(|e| wrap(e.into()))?;
            let mut text = String::new();
            for t in &trials {
                text.push_str(&t.enroll_id);
                text.push(' ');
                text.push_str(&t.test_id);
                text.push(' ');
                text.push_str(if t.is_target { "target" } else { "nontarget" });
                text.push('\n');
            }
            write_atomic(&path, text.as_bytes()).map_err(&wrap)?;
            eprintln!("[trials] wrote {}", path.display());
        }
        Ok(())
    }

    /// Stage `score`: extractor-embedding EER and raw-weight cosine baseline
    /// EER per (direction, layer).
    pub fn verification(
        &self,
        base: &WeightSnapshot,
        records: &[ModelRecord],
        embeddings: &BTreeMap<(String, usize), Vec<SpeakerEmbedding>>,
    ) -> Result<Vec<VerificationRecord>> {
        let path = self.verification_path();
        let wrap = stage_err("score", &path);
        if path.exists() {
            return read_json(&path).map_err(&wrap);
        }
        let mut rows = Vec::new();
        for direction in self.config.directions() {
            let eval = self.eval_records(records, &direction);
            for &layer0 in &self.config.layers0() {
                let key = (direction.label(), layer0);
                let embedded = embeddings.get(&key).ok_or_else(|| {
                    wrap(Error::InvalidConfig(format!(
                        "no embeddings for direction {} layer {}",
                        key.0,
                        layer0 + 1
                    )))
                })?;
                let eer_extractor = score_eer(embedded).map_err(&wrap)?;

                // The baseline scores raw weight vectors directly, whatever
                // source the extractor consumed.
                let raw = self
                    .layer_vectors(base, &eval, layer0, Source::Raw)
                    .map_err(&wrap)?;
                let raw_embeddings: Vec<SpeakerEmbedding> = raw
                    .into_iter()
                    .map(|v| SpeakerEmbedding {
                        speaker_id: v.speaker_id,
                        session_id: v.session_id,
                        layer_index: v.layer_index,
                        vector: v.values,
                    })
                    .collect();
                let eer_raw_cosine = score_eer(&raw_embeddings).map_err(&wrap)?;

                rows.push(VerificationRecord {
                    direction: direction.label(),
                    layer: layer0 + 1,
                    eer_extractor,
                    eer_raw_cosine,
                });
            }
        }
        write_json(&path, &rows).map_err(&wrap)?;
        eprintln!("[score] wrote {}", path.display());
        Ok(rows)
    }

    /// Stage `report`: CSV and JSON mirrors of all metric rows. Always
    /// rewritten; derived purely from upstream artifacts.
    pub fn report(
        &self,
        purity: &[PurityRecord],
        verification: &[VerificationRecord],
    ) -> Result<(PathBuf, PathBuf)> {
        let csv_path = self.report_csv_path();
        let json_path = self.report_json_path();
        let wrap = stage_err("report", &csv_path);
        let mut rows = Vec::new();
        let row = |layer: usize, metric: Metric, direction: &str, value: f64| ReportRow {
            experiment: self.config.experiment.clone(),
            layer,
            metric,
            direction: direction.to_string(),
            seed: self.config.master_seed,
            value,
        };
        for p in purity {
            rows.push(row(p.layer, Metric::Purity, &p.direction, p.purity));
        }
        for v in verification {
            rows.push(row(v.layer, Metric::EerExtractor, &v.direction, v.eer_extractor));
            rows.push(row(v.layer, Metric::EerRawCosine, &v.direction, v.eer_raw_cosine));
        }
        report::write_csv(&csv_path, &rows).map_err(&wrap)?;
        report::write_json(&json_path, &self.config, &rows).map_err(wrap)?;
        eprintln!("[report] wrote {}", csv_path.display());
        Ok((csv_path, json_path))
    }

    /// All stages in order; returns the (CSV, JSON) report paths.
    pub fn run_all(&self) -> Result<(PathBuf, PathBuf)> {
        let corpus = self.corpus()?;
        let base = self.base(&corpus)?;
        let records = self.models(&corpus, &base)?;
        let purity = self.gender_purity(&base, &records)?;
        let extractors = self.extractors(&corpus, &base, &records)?;
        let embeddings = self.embeddings(&base, &records, &extractors)?;
        self.trials(&corpus)?;
        let verification = self.verification(&base, &records, &embeddings)?;
        self.report(&purity, &verification)
    }
}

fn score_eer(embeddings: &[SpeakerEmbedding]) -> Result<f64> {
    let pairs = build_embedding_pairs(embeddings).map_err(Error::from)?;
    let set = score_trials(&pairs).map_err(Error::from)?;
    Ok(eer(&set).map_err(Error::from)?.eer_percent)
}
