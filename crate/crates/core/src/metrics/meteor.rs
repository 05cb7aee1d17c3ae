//! METEOR-lite: exact and Porter-stem unigram alignment with a
//! fragmentation penalty. No synonym or paraphrase stages.

use std::collections::HashMap;

use super::stem::porter_stem;

pub const ALPHA: f64 = 0.9;
pub const BETA: f64 = 3.0;
pub const GAMMA: f64 = 0.5;

/// Search states explored before falling back to the greedy alignment.
const STATE_BUDGET: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Alignment {
    /// (candidate index, reference index), sorted by candidate index.
    pub pairs: Vec<(usize, usize)>,
    pub exact: usize,
    pub chunks: usize,
}

impl Alignment {
    pub fn matches(&self) -> usize {
        self.pairs.len()
    }
}

/// Tokens with their stems precomputed.
#[derive(Debug, Clone)]
pub struct Stemmed<'a> {
    pub words: &'a [String],
    pub stems: Vec<String>,
}

impl<'a> Stemmed<'a> {
    pub fn new(words: &'a [String]) -> Self {
        Stemmed {
            words,
            stems: words.iter().map(|w| porter_stem(w)).collect(),
        }
    }

    fn len(&self) -> usize {
        self.words.len()
    }
}

pub fn chunk_count(pairs: &[(usize, usize)]) -> usize {
    let mut sorted = pairs.to_vec();
    sorted.sort_unstable();
    let mut chunks = 0;
    for (k, &(i, j)) in sorted.iter().enumerate() {
        let continues = k > 0 && {
            let (pi, pj) = sorted[k - 1];
            i == pi + 1 && j == pj + 1
        };
        if !continues {
            chunks += 1;
        }
    }
    chunks
}

/// Objective of a (partial) alignment, compared lexicographically:
/// exact matches, then total matches, then adjacent continuations.
type Score = (u32, u32, u32);

fn add(a: Score, b: Score) -> Score {
    (a.0 + b.0, a.1 + b.1, a.2 + b.2)
}

enum Slot {
    /// Matched to this reference index in every maximal alignment.
    Forced(usize),
    /// Compatible (reference index, exact) choices; may also stay unmatched.
    Free(Vec<(usize, bool)>),
}

struct Search {
    slots: Vec<Slot>,
    memo: HashMap<(usize, u128, usize), (Score, Option<usize>)>,
    budget_hit: bool,
}

const NO_PREV: usize = usize::MAX;

impl Search {
    /// Best score for candidates i.. given the mask of used free reference
    /// slots and the reference index matched by candidate i-1 (or NO_PREV).
    fn best(&mut self, i: usize, used: u128, prev: usize) -> Score {
        if i == self.slots.len() || self.budget_hit {
            return (0, 0, 0);
        }
        if let Some((score, _)) = self.memo.get(&(i, used, prev)) {
            return *score;
        }
        if self.memo.len() >= STATE_BUDGET {
            self.budget_hit = true;
            return (0, 0, 0);
        }
        let adj = |j: usize| u32::from(prev != NO_PREV && j == prev + 1);
        let (best, choice) = match &self.slots[i] {
            Slot::Forced(j) => {
                let j = *j;
                (add((1, 1, adj(j)), self.best(i + 1, used, j)), Some(j))
            }
            Slot::Free(options) => {
                let options = options.clone();
                let mut best = self.best(i + 1, used, NO_PREV);
                let mut choice = None;
                for (j, exact) in options {
                    if used & (1u128 << j) != 0 {
                        continue;
                    }
                    let total = add(
                        (u32::from(exact), 1, adj(j)),
                        self.best(i + 1, used | (1u128 << j), j),
                    );
                    if total > best {
                        best = total;
                        choice = Some(j);
                    }
                }
                (best, choice)
            }
        };
        self.memo.insert((i, used, prev), (best, choice));
        best
    }
}

#[allow(clippy::needless_range_loop)]
fn greedy_align(cand: &Stemmed, refr: &Stemmed) -> Vec<(usize, usize)> {
    let mut ref_used = vec![false; refr.len()];
    let mut cand_used = vec![false; cand.len()];
    let mut pairs = Vec::new();
    for stage in 0..2 {
        let mut prev: Option<usize> = None;
        for i in 0..cand.len() {
            if cand_used[i] {
                prev = pairs
                    .iter()
                    .find(|p: &&(usize, usize)| p.0 == i)
                    .map(|p| p.1);
                continue;
            }
            let ok = |j: usize| {
                !ref_used[j]
                    && if stage == 0 {
                        cand.words[i] == refr.words[j]
                    } else {
                        cand.stems[i] == refr.stems[j]
                    }
            };
            let pick = prev
                .map(|p| p + 1)
                .filter(|&j| j < refr.len() && ok(j))
                .or_else(|| (0..refr.len()).find(|&j| ok(j)));
            prev = pick;
            if let Some(j) = pick {
                ref_used[j] = true;
                cand_used[i] = true;
                pairs.push((i, j));
            }
        }
    }
    pairs.sort_unstable();
    pairs
}

/// Maximal two-stage alignment (exact words, then stems) with the fewest
/// chunks among maximal alignments.
pub fn align(cand: &Stemmed, refr: &Stemmed) -> Alignment {
    let pairs = if refr.len() > 128 {
        greedy_align(cand, refr)
    } else {
        search_align(cand, refr).unwrap_or_else(|| greedy_align(cand, refr))
    };
    let exact = pairs
        .iter()
        .filter(|(i, j)| cand.words[*i] == refr.words[*j])
        .count();
    Alignment {
        chunks: chunk_count(&pairs),
        exact,
        pairs,
    }
}

fn search_align(cand: &Stemmed, refr: &Stemmed) -> Option<Vec<(usize, usize)>> {
    let mut cand_count: HashMap<&str, usize> = HashMap::new();
    let mut ref_pos: HashMap<&str, Vec<usize>> = HashMap::new();
    for w in cand.words {
        *cand_count.entry(w.as_str()).or_default() += 1;
    }
    for (j, w) in refr.words.iter().enumerate() {
        ref_pos.entry(w.as_str()).or_default().push(j);
    }

    // A word occurring once on each side is matched exactly in every
    // maximal alignment, so it gets a single option and its reference slot
    // is closed to everyone else.
    let mut forced_refs: u128 = 0;
    let mut forced: Vec<Option<usize>> = vec![None; cand.len()];
    for (i, w) in cand.words.iter().enumerate() {
        if cand_count[w.as_str()] == 1 {
            if let Some(js) = ref_pos.get(w.as_str()) {
                if js.len() == 1 {
                    forced[i] = Some(js[0]);
                    forced_refs |= 1u128 << js[0];
                }
            }
        }
    }

    let slots: Vec<Slot> = (0..cand.len())
        .map(|i| match forced[i] {
            Some(j) => Slot::Forced(j),
            None => Slot::Free(
                (0..refr.len())
                    .filter(|&j| forced_refs & (1u128 << j) == 0 && cand.stems[i] == refr.stems[j])
                    .map(|j| (j, cand.words[i] == refr.words[j]))
                    .collect(),
            ),
        })
        .collect();

    let mut search = Search {
        slots,
        memo: HashMap::new(),
        budget_hit: false,
    };
    search.best(0, 0, NO_PREV);
    if search.budget_hit {
        return None;
    }

    let mut pairs = Vec::new();
    let (mut used, mut prev) = (0u128, NO_PREV);
    for (i, forced_ref) in forced.iter().enumerate() {
        let (_, choice) = search.memo[&(i, used, prev)];
        match choice {
            Some(j) => {
                pairs.push((i, j));
                if forced_ref.is_none() {
                    used |= 1u128 << j;
                }
                prev = j;
            }
            None => prev = NO_PREV,
        }
    }
    Some(pairs)
}

/// Score of one candidate against one reference.
pub fn meteor_pair(cand: &Stemmed, refr: &Stemmed) -> f64 {
    if cand.len() == 0 || refr.len() == 0 {
        return 0.0;
    }
    let a = align(cand, refr);
    let m = a.matches();
    if m == 0 {
        return 0.0;
    }
    let m = m as f64;
    let precision = m / cand.len() as f64;
    let recall = m / refr.len() as f64;
    let f_mean = precision * recall / (ALPHA * precision + (1.0 - ALPHA) * recall);
    let penalty = GAMMA * (a.chunks as f64 / m).powf(BETA);
    f_mean * (1.0 - penalty)
}
