//! Corpus-level BLEU without smoothing.

use std::collections::HashMap;

use super::EvalPair;

pub const MAX_N: usize = 4;

pub(crate) fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if n > 0 && tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    counts
}

/// Sufficient statistics of one or more pairs. Integer-valued, so summing
/// them is order independent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BleuStats {
    /// Clipped matches per order (index 0 is unigrams).
    pub matches: [u64; MAX_N],
    /// Candidate n-gram totals per order.
    pub totals: [u64; MAX_N],
    pub cand_len: u64,
    pub ref_len: u64,
}

impl std::ops::AddAssign for BleuStats {
    fn add_assign(&mut self, o: Self) {
        for k in 0..MAX_N {
            self.matches[k] += o.matches[k];
            self.totals[k] += o.totals[k];
        }
        self.cand_len += o.cand_len;
        self.ref_len += o.ref_len;
    }
}

/// Reference length closest to `cand_len`; ties go to the shorter one.
pub fn closest_ref_len(cand_len: usize, refs: &[Vec<String>]) -> usize {
    refs.iter()
        .map(Vec::len)
        .min_by_key(|&r| (r.abs_diff(cand_len), r))
        .unwrap_or(0)
}

pub fn pair_stats(pair: &EvalPair) -> BleuStats {
    let mut stats = BleuStats {
        cand_len: pair.candidate.len() as u64,
        ref_len: closest_ref_len(pair.candidate.len(), &pair.references) as u64,
        ..Default::default()
    };
    for n in 1..=MAX_N {
        let cand = ngram_counts(&pair.candidate, n);
        let mut max_ref: HashMap<&[String], usize> = HashMap::new();
        for r in &pair.references {
            for (g, c) in ngram_counts(r, n) {
                let e = max_ref.entry(g).or_insert(0);
                *e = (*e).max(c);
            }
        }
        let mut matched = 0;
        let mut total = 0;
        for (g, c) in cand {
            total += c;
            matched += c.min(max_ref.get(g).copied().unwrap_or(0));
        }
        stats.matches[n - 1] = matched as u64;
        stats.totals[n - 1] = total as u64;
    }
    stats
}

impl BleuStats {
    pub fn brevity_penalty(&self) -> f64 {
        if self.cand_len > self.ref_len {
            1.0
        } else if self.cand_len == 0 {
            0.0
        } else {
            (1.0 - self.ref_len as f64 / self.cand_len as f64).exp()
        }
    }

    /// BLEU-`max_n`; zero whenever some precision has no matches.
    pub fn score(&self, max_n: usize) -> f64 {
        assert!((1..=MAX_N).contains(&max_n), "BLEU order must be in 1..=4");
        let mut log_sum = 0.0;
        for k in 0..max_n {
            if self.matches[k] == 0 || self.totals[k] == 0 {
                return 0.0;
            }
            log_sum += (self.matches[k] as f64 / self.totals[k] as f64).ln();
        }
        self.brevity_penalty() * (log_sum / max_n as f64).exp()
    }
}

pub fn corpus_stats(pairs: &[EvalPair]) -> BleuStats {
    use rayon::prelude::*;
    pairs
        .par_iter()
        .map(pair_stats)
        .reduce(BleuStats::default, |mut a, b| {
            a += b;
            a
        })
}
