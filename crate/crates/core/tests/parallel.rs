//! Personalizing speakers in parallel must be bit-identical to doing it
//! sequentially: each job derives its own RNG stream from (run seed,
//! speaker, session), so thread scheduling cannot influence results.

use std::sync::Arc;

use rayon::prelude::*;

use wleak_core::corpus::{Corpus, CorpusConfig};
use wleak_core::nn::TrainConfig;
use wleak_core::personalize::{
    personalize, personalization_seed, train_generic, PersonalizedModel, SessionId,
    SurrogateTopology, GENERIC_FINAL_LR, GENERIC_INITIAL_LR, PERSONALIZE_FINAL_LR,
    PERSONALIZE_INITIAL_LR,
};

fn tiny_corpus() -> Corpus {
    let config = CorpusConfig {
        feature_dim: 8,
        num_classes: 4,
        generic_speakers: 4,
        p1_speakers: 6,
        p2_speakers: 0,
        frames_per_session: 40,
        seed: 99,
        ..CorpusConfig::default()
    };
    Corpus::generate(config).unwrap()
}

#[test]
fn parallel_personalization_is_bit_identical_to_sequential() {
    let corpus = tiny_corpus();
    let topology = SurrogateTopology {
        num_layers: 4,
        hidden_units: 12,
        ..SurrogateTopology::new(corpus.config.feature_dim, corpus.config.num_classes)
    };
    let generic_cfg = TrainConfig {
        initial_lr: GENERIC_INITIAL_LR,
        final_lr: GENERIC_FINAL_LR,
        epochs: 1,
        batch_size: 8,
        seed: 7,
    };
    let (base, _) = train_generic(&corpus.generic_pool(), &topology, &generic_cfg).unwrap();
    let base = Arc::new(base);

    let jobs: Vec<(&str, SessionId)> = corpus
        .split("p1")
        .unwrap()
        .iter()
        .flat_map(|p| SessionId::BOTH.map(|s| (p.speaker_id.as_str(), s)))
        .collect();

    let run = |parallel: bool| -> Vec<PersonalizedModel> {
        let work = |&(speaker_id, session_id): &(&str, SessionId)| {
            let profile = corpus
                .split("p1")
                .unwrap()
                .iter()
                .find(|p| p.speaker_id == speaker_id)
                .unwrap();
            let cfg = TrainConfig {
                initial_lr: PERSONALIZE_INITIAL_LR,
                final_lr: PERSONALIZE_FINAL_LR,
                epochs: 3,
                batch_size: 8,
                seed: personalization_seed(7, speaker_id, session_id),
            };
            personalize(
                &base,
                &profile.session_dataset(session_id.index()),
                speaker_id,
                session_id,
                &cfg,
            )
            .unwrap()
        };
        if parallel {
            jobs.par_iter().map(work).collect()
        } else {
            jobs.iter().map(work).collect()
        }
    };

    let sequential = run(false);
    let parallel = run(true);

    assert_eq!(sequential.len(), parallel.len());
    for (s, p) in sequential.iter().zip(&parallel) {
        assert_eq!(s.speaker_id, p.speaker_id);
        assert_eq!(s.session_id, p.session_id);
        for (ws, wp) in s
            .adapted
            .network
            .weights()
            .iter()
            .zip(p.adapted.network.weights())
        {
            assert_eq!(ws.data(), wp.data(), "weights differ for {}", s.speaker_id);
        }
        for (bs, bp) in s
            .adapted
            .network
            .biases()
            .iter()
            .zip(p.adapted.network.biases())
        {
            assert_eq!(bs, bp, "biases differ for {}", s.speaker_id);
        }
    }
}

#[test]
fn personalization_seed_separates_speaker_and_session() {
    let a = personalization_seed(1, "p1-000", SessionId::S1);
    let b = personalization_seed(1, "p1-000", SessionId::S2);
    let c = personalization_seed(1, "p1-001", SessionId::S1);
    let d = personalization_seed(2, "p1-000", SessionId::S1);
    assert!(a != b && a != c && a != d && b != c);
}
