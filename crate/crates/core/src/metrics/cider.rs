//! Original CIDEr: tf-idf weighted n-gram cosine similarity averaged over
//! references and n = 1..4, scaled by 10. No length penalty, no clipping.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use super::bleu::{ngram_counts, MAX_N};
use super::EvalPair;

type Vector<'a> = BTreeMap<&'a [String], f64>;

/// Document frequency of every reference n-gram (orders 1..4), counting a
/// pair once however many of its references contain the n-gram.
pub fn document_frequencies(pairs: &[EvalPair]) -> HashMap<&[String], usize> {
    pairs
        .par_iter()
        .map(|pair| {
            let mut seen: HashMap<&[String], usize> = HashMap::new();
            for r in &pair.references {
                for n in 1..=MAX_N {
                    for g in ngram_counts(r, n).into_keys() {
                        seen.insert(g, 1);
                    }
                }
            }
            seen
        })
        .reduce(HashMap::new, |mut a, b| {
            for (g, c) in b {
                *a.entry(g).or_insert(0) += c;
            }
            a
        })
}

pub fn cosine(a: &Vector, b: &Vector) -> f64 {
    let norm = |v: &Vector| v.values().map(|x| x * x).sum::<f64>().sqrt();
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let dot: f64 = small
        .iter()
        .filter_map(|(g, x)| large.get(g).map(|y| x * y))
        .sum();
    (dot / (na * nb)).clamp(0.0, 1.0)
}

pub struct CiderScorer<'a> {
    df: HashMap<&'a [String], usize>,
    log_n: f64,
}

impl<'a> CiderScorer<'a> {
    pub fn new(pairs: &'a [EvalPair]) -> Self {
        CiderScorer {
            df: document_frequencies(pairs),
            log_n: (pairs.len() as f64).ln(),
        }
    }

    pub fn idf(&self, gram: &[String]) -> f64 {
        match self.df.get(gram) {
            Some(&df) => self.log_n - (df as f64).ln(),
            None => self.log_n,
        }
    }

    fn vector<'t>(&self, tokens: &'t [String], n: usize) -> Vector<'t> {
        ngram_counts(tokens, n)
            .into_iter()
            .map(|(g, tf)| (g, tf as f64 * self.idf(g)))
            .collect()
    }

    /// Unscaled pair score in [0, 1].
    pub fn pair_score(&self, pair: &EvalPair) -> f64 {
        if pair.references.is_empty() {
            return 0.0;
        }
        let mut sum_n = 0.0;
        for n in 1..=MAX_N {
            let cand = self.vector(&pair.candidate, n);
            let mut sims: Vec<f64> = pair
                .references
                .iter()
                .map(|r| cosine(&cand, &self.vector(r, n)))
                .collect();
            sims.sort_by(f64::total_cmp);
            sum_n += sims.iter().sum::<f64>() / sims.len() as f64;
        }
        sum_n / MAX_N as f64
    }
}
