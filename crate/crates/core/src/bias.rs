//! Gender / word co-occurrence statistics at image granularity.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::lexicon::{tokenize, Gender, GenderClass, Lexicon};

pub const DEFAULT_MIN_SUPPORT: usize = 5;
pub const DEFAULT_TOP_K: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiasRow {
    pub word: String,
    pub male_count: usize,
    pub female_count: usize,
    /// male_count / support
    pub ratio: f64,
    pub support: usize,
}

/// Words co-mentioned with each gender in one image.
fn image_words(lexicon: &Lexicon, captions: &[String]) -> (BTreeSet<String>, BTreeSet<String>) {
    let mut male = BTreeSet::new();
    let mut female = BTreeSet::new();
    for caption in captions {
        let tokens = tokenize(caption);
        let classes: Vec<GenderClass> = tokens
            .iter()
            .map(|t| lexicon.classify_word(&t.norm))
            .collect();
        let has = |g: Gender| classes.iter().any(|c| c.gender() == Some(g));
        let (has_male, has_female) = (has(Gender::Male), has(Gender::Female));
        if !has_male && !has_female {
            continue;
        }
        for (t, c) in tokens.iter().zip(&classes) {
            if c.is_human() {
                continue;
            }
            if has_male {
                male.insert(t.norm.clone());
            }
            if has_female {
                female.insert(t.norm.clone());
            }
        }
    }
    (male, female)
}

/// Per-word counts of images whose captions pair the word with a male or a
/// female token. Rows below `min_support` are dropped; the rest are ordered
/// by distance of the ratio from 0.5, then support, then word.
pub fn cooccurrence_table(
    lexicon: &Lexicon,
    corpus: &Corpus,
    min_support: usize,
) -> Result<Vec<BiasRow>> {
    if min_support == 0 {
        return Err(Error::InvalidArgument(
            "min_support must be at least 1".into(),
        ));
    }
    let counts: HashMap<String, (usize, usize)> = corpus
        .images()
        .par_iter()
        .map(|img| {
            let (male, female) = image_words(lexicon, &img.captions);
            let mut local: HashMap<String, (usize, usize)> = HashMap::new();
            for w in male {
                local.entry(w).or_default().0 += 1;
            }
            for w in female {
                local.entry(w).or_default().1 += 1;
            }
            local
        })
        .reduce(HashMap::new, |mut a, b| {
            for (w, (m, f)) in b {
                let e = a.entry(w).or_default();
                e.0 += m;
                e.1 += f;
            }
            a
        });

    let mut rows: Vec<BiasRow> = counts
        .into_iter()
        .filter_map(|(word, (male_count, female_count))| {
            let support = male_count + female_count;
            (support >= min_support).then(|| BiasRow {
                word,
                male_count,
                female_count,
                ratio: male_count as f64 / support as f64,
                support,
            })
        })
        .collect();
    rows.sort_by(|a, b| {
        let skew = |r: &BiasRow| (r.ratio - 0.5).abs();
        skew(b)
            .total_cmp(&skew(a))
            .then(b.support.cmp(&a.support))
            .then_with(|| a.word.cmp(&b.word))
    });
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiasComparison {
    pub word: String,
    pub ratio_before: f64,
    pub ratio_after: f64,
}

/// Inner join on word, in the order of `before`.
pub fn compare_bias(before: &[BiasRow], after: &[BiasRow]) -> Vec<BiasComparison> {
    let after: BTreeMap<&str, f64> = after.iter().map(|r| (r.word.as_str(), r.ratio)).collect();
    before
        .iter()
        .filter_map(|r| {
            after
                .get(r.word.as_str())
                .map(|&ratio_after| BiasComparison {
                    word: r.word.clone(),
                    ratio_before: r.ratio,
                    ratio_after,
                })
        })
        .collect()
}

/// The `k` most male-skewed (ratio > 0.5) and most female-skewed
/// (ratio < 0.5) rows, most extreme first.
pub fn extremes(rows: &[BiasRow], k: usize) -> (Vec<BiasRow>, Vec<BiasRow>) {
    let pick = |male: bool| -> Vec<BiasRow> {
        let mut side: Vec<BiasRow> = rows
            .iter()
            .filter(|r| if male { r.ratio > 0.5 } else { r.ratio < 0.5 })
            .cloned()
            .collect();
        side.sort_by(|a, b| {
            let (x, y) = if male {
                (b.ratio, a.ratio)
            } else {
                (a.ratio, b.ratio)
            };
            x.total_cmp(&y)
                .then(b.support.cmp(&a.support))
                .then_with(|| a.word.cmp(&b.word))
        });
        side.truncate(k);
        side
    };
    (pick(true), pick(false))
}

pub fn write_bias_csv(rows: &[BiasRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::io(path, e.into()))?;
    w.write_record(["word", "male_count", "female_count", "ratio", "support"])
        .map_err(|e| Error::io(path, e.into()))?;
    for r in rows {
        w.write_record([
            r.word.clone(),
            r.male_count.to_string(),
            r.female_count.to_string(),
            format!("{:.6}", r.ratio),
            r.support.to_string(),
        ])
        .map_err(|e| Error::io(path, e.into()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
