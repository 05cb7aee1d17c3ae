//! Corpus-level caption metrics: BLEU-1..4, ROUGE-L, CIDEr and METEOR-lite.
//!
//! Per-pair scores are computed in parallel; every corpus aggregate is summed
//! in ascending image-id order so that reports do not depend on input order
//! or thread count.

pub mod bleu;
pub mod cider;
pub mod meteor;
pub mod rouge;
pub mod stem;

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::{CandidateCaptionFile, Corpus, GenderPredictionFile};
use crate::error::{Error, Result};
use crate::lexicon::{norms, Lexicon};
use crate::splitter::SplitAssignment;
use crate::transform::{neutralize, GenderLabel};

/// One candidate caption with its references, all as normalized tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalPair {
    pub image_id: u64,
    pub candidate: Vec<String>,
    pub references: Vec<Vec<String>>,
}

impl EvalPair {
    pub fn new(image_id: u64, candidate: Vec<String>, references: Vec<Vec<String>>) -> Self {
        EvalPair {
            image_id,
            candidate,
            references,
        }
    }
}

fn require_pairs(pairs: &[EvalPair]) -> Result<()> {
    if pairs.is_empty() {
        return Err(Error::EmptyPairs("the pair list is empty".into()));
    }
    if let Some(p) = pairs.iter().find(|p| p.references.is_empty()) {
        return Err(Error::EmptyPairs(format!(
            "image {} has no references",
            p.image_id
        )));
    }
    Ok(())
}

/// Mean of per-pair scores, summed in (image id, score) order.
fn canonical_mean(mut scored: Vec<(u64, f64)>) -> f64 {
    scored.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let n = scored.len() as f64;
    scored.iter().map(|(_, s)| s).sum::<f64>() / n
}

pub fn bleu(pairs: &[EvalPair], max_n: usize) -> Result<f64> {
    require_pairs(pairs)?;
    if !(1..=bleu::MAX_N).contains(&max_n) {
        return Err(Error::InvalidArgument(format!(
            "BLEU order {max_n} outside 1..=4"
        )));
    }
    Ok(bleu::corpus_stats(pairs).score(max_n))
}

pub fn rouge_l(pairs: &[EvalPair]) -> Result<f64> {
    require_pairs(pairs)?;
    Ok(canonical_mean(
        pairs
            .par_iter()
            .map(|p| (p.image_id, rouge::rouge_l_pair(&p.candidate, &p.references)))
            .collect(),
    ))
}

/// Corpus CIDEr in [0, 10].
pub fn cider(pairs: &[EvalPair]) -> Result<f64> {
    require_pairs(pairs)?;
    let scorer = cider::CiderScorer::new(pairs);
    Ok(10.0
        * canonical_mean(
            pairs
                .par_iter()
                .map(|p| (p.image_id, scorer.pair_score(p)))
                .collect(),
        ))
}

fn meteor_pair_max(pair: &EvalPair) -> f64 {
    let cand = meteor::Stemmed::new(&pair.candidate);
    pair.references
        .iter()
        .map(|r| meteor::meteor_pair(&cand, &meteor::Stemmed::new(r)))
        .fold(0.0, f64::max)
}

pub fn meteor_lite(pairs: &[EvalPair]) -> Result<f64> {
    require_pairs(pairs)?;
    Ok(canonical_mean(
        pairs
            .par_iter()
            .map(|p| (p.image_id, meteor_pair_max(p)))
            .collect(),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerImageScores {
    pub image_id: u64,
    pub bleu4: f64,
    pub rouge_l: f64,
    pub meteor_lite: f64,
    pub cider_pair: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub bleu1: f64,
    pub bleu2: f64,
    pub bleu3: f64,
    pub bleu4: f64,
    pub meteor_lite: f64,
    pub rouge_l: f64,
    pub cider: f64,
    pub n_images: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_image: Option<Vec<PerImageScores>>,
}

impl MetricReport {
    pub fn bleu(&self, n: usize) -> f64 {
        match n {
            1 => self.bleu1,
            2 => self.bleu2,
            3 => self.bleu3,
            4 => self.bleu4,
            _ => panic!("BLEU order {n} outside 1..=4"),
        }
    }
}

/// Runs every metric family; `per_image` additionally keeps sentence-level
/// diagnostics in ascending image-id order.
pub fn evaluate(pairs: &[EvalPair], per_image: bool) -> Result<MetricReport> {
    require_pairs(pairs)?;
    let scorer = cider::CiderScorer::new(pairs);
    // (row, unscaled cider) per pair
    let mut scored: Vec<(PerImageScores, f64)> = pairs
        .par_iter()
        .map(|p| {
            let cider_raw = scorer.pair_score(p);
            let row = PerImageScores {
                image_id: p.image_id,
                bleu4: bleu::pair_stats(p).score(4),
                rouge_l: rouge::rouge_l_pair(&p.candidate, &p.references),
                meteor_lite: meteor_pair_max(p),
                cider_pair: 10.0 * cider_raw,
            };
            (row, cider_raw)
        })
        .collect();
    scored.sort_by_key(|r| r.0.image_id);

    let column = |f: &dyn Fn(&(PerImageScores, f64)) -> f64| -> f64 {
        canonical_mean(scored.iter().map(|r| (r.0.image_id, f(r))).collect())
    };
    let stats = bleu::corpus_stats(pairs);
    let report = MetricReport {
        bleu1: stats.score(1),
        bleu2: stats.score(2),
        bleu3: stats.score(3),
        bleu4: stats.score(4),
        meteor_lite: column(&|r| r.0.meteor_lite),
        rouge_l: column(&|r| r.0.rouge_l),
        cider: 10.0 * column(&|r| r.1),
        n_images: pairs.len(),
        per_image: None,
    };
    Ok(MetricReport {
        per_image: per_image.then(|| scored.into_iter().map(|r| r.0).collect()),
        ..report
    })
}

pub fn write_per_image_csv(rows: &[PerImageScores], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::io(path, e.into()))?;
    for r in rows {
        w.serialize(r).map_err(|e| Error::io(path, e.into()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn caption_tokens(lexicon: &Lexicon, text: &str, neutral: bool) -> Vec<String> {
    if neutral {
        neutralize(lexicon, text)
            .tokens
            .into_iter()
            .map(|t| t.norm)
            .collect()
    } else {
        norms(text)
    }
}

/// Pairs candidates with their reference captions. With `neutral_mode`
/// both sides are neutralized first.
pub fn build_eval_pairs(
    candidates: &CandidateCaptionFile,
    corpus: &Corpus,
    neutral_mode: bool,
    lexicon: &Lexicon,
) -> Result<Vec<EvalPair>> {
    let unknown: Vec<u64> = candidates
        .entries
        .keys()
        .copied()
        .filter(|id| !corpus.contains(*id))
        .collect();
    if !unknown.is_empty() {
        return Err(Error::UnknownCandidateIds(unknown));
    }
    Ok(candidates
        .entries
        .par_iter()
        .map(|(id, caption)| {
            let image = corpus.get(*id).expect("checked above");
            EvalPair {
                image_id: *id,
                candidate: caption_tokens(lexicon, caption, neutral_mode),
                references: image
                    .captions
                    .iter()
                    .map(|r| caption_tokens(lexicon, r, neutral_mode))
                    .collect(),
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenderAccuracy {
    /// Correct predictions over confident images that have a prediction.
    pub accuracy: f64,
    /// Confident images with a prediction over all confident images.
    pub coverage: f64,
    pub confident_images: usize,
    pub predicted: usize,
    pub correct: usize,
}

/// Scores gender predictions against confident-split consensus. `Unknown`
/// predictions count as wrong.
pub fn gender_accuracy(
    predictions: &GenderPredictionFile,
    splits: &SplitAssignment,
) -> Result<GenderAccuracy> {
    if splits.confident.is_empty() {
        return Err(Error::EmptyConfidentSplit);
    }
    let mut predicted = 0;
    let mut correct = 0;
    for (id, gender) in &splits.confident {
        if let Some(p) = predictions.entries.get(id) {
            predicted += 1;
            if p.label == GenderLabel::from(*gender) {
                correct += 1;
            }
        }
    }
    let confident_images = splits.confident.len();
    Ok(GenderAccuracy {
        accuracy: if predicted == 0 {
            0.0
        } else {
            correct as f64 / predicted as f64
        },
        coverage: predicted as f64 / confident_images as f64,
        confident_images,
        predicted,
        correct,
    })
}

/// Uniform Male/Female labels for every confident image, reproducible from
/// `seed`.
pub fn uniform_random_predictions(splits: &SplitAssignment, seed: u64) -> GenderPredictionFile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    splits
        .confident
        .keys()
        .map(|id| {
            let label = if rng.gen_bool(0.5) {
                GenderLabel::Male
            } else {
                GenderLabel::Female
            };
            (*id, label)
        })
        .collect()
}
