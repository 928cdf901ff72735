//! Generic-model training and per-speaker fine-tuning.
//!
//! A generic surrogate acoustic model is trained once on the pooled generic
//! split, then copied and fine-tuned per (speaker, session), producing one
//! personalized model per session. Weight deltas (adapted − base) are the
//! default downstream analysis input.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;
use crate::nn::{Activation, LayerSpec, Network, TrainConfig};
use crate::seed;
use crate::{Error, Result};

/// Generic training schedule endpoints.
pub const GENERIC_INITIAL_LR: f64 = 0.00025;
pub const GENERIC_FINAL_LR: f64 = 0.000025;
/// Personalization schedule endpoints.
pub const PERSONALIZE_INITIAL_LR: f64 = 0.000025;
pub const PERSONALIZE_FINAL_LR: f64 = 0.000015;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SessionId {
    S1,
    S2,
}

impl SessionId {
    pub fn index(self) -> usize {
        match self {
            SessionId::S1 => 0,
            SessionId::S2 => 1,
        }
    }

    pub fn from_index(index: usize) -> Result<SessionId> {
        match index {
            0 => Ok(SessionId::S1),
            1 => Ok(SessionId::S2),
            other => Err(Error::InvalidConfig(format!(
                "session index {other} (only 0 and 1 exist)"
            ))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SessionId::S1 => "s1",
            SessionId::S2 => "s2",
        }
    }

    pub const BOTH: [SessionId; 2] = [SessionId::S1, SessionId::S2];
}

/// Dense stand-in for the acoustic model: `num_layers` weight layers in
/// total, all hidden layers ReLU at `hidden_units`, softmax output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurrogateTopology {
    pub num_layers: usize,
    pub hidden_units: usize,
    pub input_dim: usize,
    pub output_dim: usize,
}

impl SurrogateTopology {
    pub fn new(input_dim: usize, output_dim: usize) -> SurrogateTopology {
        SurrogateTopology {
            num_layers: 13,
            hidden_units: 32,
            input_dim,
            output_dim,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_layers < 2 {
            return Err(Error::InvalidConfig("num_layers must be >= 2".into()));
        }
        if self.hidden_units < 2 {
            return Err(Error::InvalidConfig("hidden_units must be >= 2".into()));
        }
        if self.input_dim == 0 || self.output_dim == 0 {
            return Err(Error::InvalidConfig(
                "input_dim and output_dim must be >= 1".into(),
            ));
        }
        Ok(())
    }

    pub fn layer_specs(&self) -> Vec<LayerSpec> {
        let mut specs = Vec::with_capacity(self.num_layers);
        for i in 0..self.num_layers - 1 {
            let fan_in = if i == 0 { self.input_dim } else { self.hidden_units };
            specs.push(LayerSpec::new(fan_in, self.hidden_units, Activation::Relu));
        }
        specs.push(LayerSpec::new(
            self.hidden_units,
            self.output_dim,
            Activation::Softmax,
        ));
        specs
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    Generic,
    Personalized {
        speaker_id: String,
        session_id: SessionId,
    },
}

impl Provenance {
    pub fn label(&self) -> String {
        match self {
            Provenance::Generic => "generic".into(),
            Provenance::Personalized {
                speaker_id,
                session_id,
            } => format!("{speaker_id}/{}", session_id.as_str()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSnapshot {
    pub topology: SurrogateTopology,
    pub network: Network,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PersonalizedModel {
    pub base: Arc<WeightSnapshot>,
    pub adapted: WeightSnapshot,
    pub speaker_id: String,
    pub session_id: SessionId,
    pub loss_trace: Vec<f64>,
    pub initial_loss: f64,
    pub final_loss: f64,
}

/// Trains the generic surrogate on the pooled generic split. Weight
/// initialization derives from `cfg.seed`, so the snapshot is a pure
/// function of (pool, topology, cfg).
pub fn train_generic(
    pool: &[(Vec<f64>, usize)],
    topology: &SurrogateTopology,
    cfg: &TrainConfig,
) -> Result<(WeightSnapshot, Vec<f64>)> {
    topology.validate()?;
    if pool.is_empty() {
        return Err(Error::Empty("generic training pool"));
    }
    let mut network = Network::seeded(
        topology.layer_specs(),
        seed::mix_str(cfg.seed, "generic-init", &[]),
    )?;
    let trace = network.sgd_train(pool, cfg)?;
    Ok((
        WeightSnapshot {
            topology: *topology,
            network,
            provenance: Provenance::Generic,
        },
        trace,
    ))
}

/// Fine-tunes a copy of the base snapshot on one session. The base is never
/// modified; every hyperparameter lives in `cfg`, which callers keep
/// identical across speakers.
pub fn personalize(
    base: &Arc<WeightSnapshot>,
    session: &[(Vec<f64>, usize)],
    speaker_id: &str,
    session_id: SessionId,
    cfg: &TrainConfig,
) -> Result<PersonalizedModel> {
    if session.is_empty() {
        return Err(Error::Empty("personalization session"));
    }
    let mut network = base.network.clone();
    let initial_loss = network.dataset_loss(session)?;
    let loss_trace = network.sgd_train(session, cfg)?;
    let final_loss = network.dataset_loss(session)?;
    Ok(PersonalizedModel {
        base: Arc::clone(base),
        adapted: WeightSnapshot {
            topology: base.topology,
            network,
            provenance: Provenance::Personalized {
                speaker_id: speaker_id.to_string(),
                session_id,
            },
        },
        speaker_id: speaker_id.to_string(),
        session_id,
        loss_trace,
        initial_loss,
        final_loss,
    })
}

/// Elementwise adapted − base for one layer; exact, no tolerance.
pub fn weight_delta(model: &PersonalizedModel, layer_index: usize) -> Result<(Matrix, Vec<f64>)> {
    if model.base.topology != model.adapted.topology {
        return Err(Error::TopologyMismatch(
            "personalized model base/adapted topologies differ".into(),
        ));
    }
    let (base_w, base_b) = model.base.network.layer(layer_index)?;
    let (adapted_w, adapted_b) = model.adapted.network.layer(layer_index)?;
    let dw = adapted_w.sub(base_w)?;
    let db = adapted_b.iter().zip(base_b).map(|(a, b)| a - b).collect();
    Ok((dw, db))
}

/// Derives the per-(speaker, session) training seed from a run seed, so
/// personalizations are order-independent and safe to run in parallel.
pub fn personalization_seed(run_seed: u64, speaker_id: &str, session_id: SessionId) -> u64 {
    seed::mix_str(run_seed, speaker_id, &[session_id.index() as u64])
}
