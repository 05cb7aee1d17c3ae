//! Brute-force reference implementations of the caption metrics, written
//! without sharing code with the library, plus toy fixtures.
#![allow(dead_code)]

use capfair::metrics::stem::porter_stem;
use capfair::metrics::EvalPair;

pub fn toks(s: &str) -> Vec<String> {
    s.split_whitespace().map(String::from).collect()
}

pub fn pair(id: u64, cand: &str, refs: &[&str]) -> EvalPair {
    EvalPair::new(id, toks(cand), refs.iter().map(|r| toks(r)).collect())
}

fn grams(tokens: &[String], n: usize) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    let mut i = 0;
    while i + n <= tokens.len() {
        out.push(tokens[i..i + n].to_vec());
        i += 1;
    }
    out
}

fn occurrences(haystack: &[Vec<String>], gram: &[String]) -> usize {
    haystack.iter().filter(|g| g.as_slice() == gram).count()
}

fn distinct(list: Vec<Vec<String>>) -> Vec<Vec<String>> {
    let mut out: Vec<Vec<String>> = Vec::new();
    for g in list {
        if !out.contains(&g) {
            out.push(g);
        }
    }
    out
}

/// Corpus BLEU-n from clipped counts found by scanning every n-gram.
pub fn oracle_bleu(pairs: &[EvalPair], max_n: usize) -> f64 {
    let mut c_len = 0usize;
    let mut r_len = 0usize;
    let mut log_p = 0.0;
    for n in 1..=max_n {
        let mut matched = 0usize;
        let mut total = 0usize;
        for p in pairs {
            let cand = grams(&p.candidate, n);
            total += cand.len();
            for g in distinct(cand.clone()) {
                let count = occurrences(&cand, &g);
                let max_ref = p
                    .references
                    .iter()
                    .map(|r| occurrences(&grams(r, n), &g))
                    .max()
                    .unwrap_or(0);
                matched += count.min(max_ref);
            }
        }
        if matched == 0 {
            return 0.0;
        }
        log_p += (matched as f64 / total as f64).ln();
    }
    for p in pairs {
        c_len += p.candidate.len();
        let c = p.candidate.len() as i64;
        let mut best: Option<usize> = None;
        for r in &p.references {
            let better = match best {
                None => true,
                Some(b) => {
                    let (d, db) = ((r.len() as i64 - c).abs(), (b as i64 - c).abs());
                    d < db || (d == db && r.len() < b)
                }
            };
            if better {
                best = Some(r.len());
            }
        }
        r_len += best.unwrap_or(0);
    }
    let bp = if c_len > r_len {
        1.0
    } else {
        (1.0 - r_len as f64 / c_len as f64).exp()
    };
    bp * (log_p / max_n as f64).exp()
}

fn is_subsequence(sub: &[&String], of: &[String]) -> bool {
    let mut k = 0;
    for w in of {
        if k < sub.len() && sub[k] == w {
            k += 1;
        }
    }
    k == sub.len()
}

/// LCS length by trying every subsequence of `a`.
pub fn oracle_lcs(a: &[String], b: &[String]) -> usize {
    assert!(a.len() <= 16, "exhaustive LCS is exponential");
    let mut best = 0;
    for mask in 0u32..(1 << a.len()) {
        let sub: Vec<&String> = (0..a.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| &a[i])
            .collect();
        if sub.len() > best && is_subsequence(&sub, b) {
            best = sub.len();
        }
    }
    best
}

pub fn oracle_rouge_l(pairs: &[EvalPair]) -> f64 {
    let beta2 = 1.2f64 * 1.2;
    let mut sum = 0.0;
    for p in pairs {
        let mut best: f64 = 0.0;
        for r in &p.references {
            let l = oracle_lcs(&p.candidate, r) as f64;
            if l == 0.0 {
                continue;
            }
            let (rec, prec) = (l / r.len() as f64, l / p.candidate.len() as f64);
            best = best.max((1.0 + beta2) * rec * prec / (rec + beta2 * prec));
        }
        sum += best;
    }
    sum / pairs.len() as f64
}

/// Original CIDEr (x10) from explicit tf-idf vectors.
pub fn oracle_cider(pairs: &[EvalPair]) -> f64 {
    let n_docs = pairs.len() as f64;
    let df = |g: &Vec<String>| -> f64 {
        pairs
            .iter()
            .filter(|p| p.references.iter().any(|r| grams(r, g.len()).contains(g)))
            .count() as f64
    };
    let vector = |tokens: &[String], n: usize| -> Vec<(Vec<String>, f64)> {
        let all = grams(tokens, n);
        distinct(all.clone())
            .into_iter()
            .map(|g| {
                let tf = occurrences(&all, &g) as f64;
                let idf = n_docs.ln() - df(&g).max(1.0).ln();
                (g, tf * idf)
            })
            .collect()
    };
    let cos = |a: &[(Vec<String>, f64)], b: &[(Vec<String>, f64)]| -> f64 {
        let mut dot = 0.0;
        for (g, x) in a {
            for (h, y) in b {
                if g == h {
                    dot += x * y;
                }
            }
        }
        let na = a.iter().map(|(_, x)| x * x).sum::<f64>().sqrt();
        let nb = b.iter().map(|(_, y)| y * y).sum::<f64>().sqrt();
        if na == 0.0 || nb == 0.0 {
            0.0
        } else {
            dot / (na * nb)
        }
    };
    let mut total = 0.0;
    for p in pairs {
        let mut per_n = 0.0;
        for n in 1..=4 {
            let c = vector(&p.candidate, n);
            let mut s = 0.0;
            for r in &p.references {
                s += cos(&c, &vector(r, n));
            }
            per_n += s / p.references.len() as f64;
        }
        total += per_n / 4.0;
    }
    10.0 * total / pairs.len() as f64
}

pub fn oracle_chunks(pairs: &[(usize, usize)]) -> usize {
    let mut chunks = 0;
    for &(i, j) in pairs {
        let continues = i > 0 && j > 0 && pairs.contains(&(i - 1, j - 1));
        if !continues {
            chunks += 1;
        }
    }
    chunks
}

/// Every stem-compatible one-to-one alignment; keeps the one with the most
/// exact matches, then the most matches, then the fewest chunks.
pub fn oracle_meteor_alignment(cand: &[String], refr: &[String]) -> (usize, usize, usize) {
    assert!(
        cand.len() <= 14 && refr.len() <= 14,
        "exhaustive alignment is exponential"
    );
    let cs: Vec<String> = cand.iter().map(|w| porter_stem(w)).collect();
    let rs: Vec<String> = refr.iter().map(|w| porter_stem(w)).collect();
    let mut best: Option<(usize, usize, usize)> = None;
    let mut current: Vec<(usize, usize)> = Vec::new();
    let mut used = vec![false; refr.len()];
    #[allow(clippy::too_many_arguments)]
    fn walk(
        i: usize,
        cand: &[String],
        refr: &[String],
        cs: &[String],
        rs: &[String],
        used: &mut Vec<bool>,
        current: &mut Vec<(usize, usize)>,
        best: &mut Option<(usize, usize, usize)>,
    ) {
        if i == cand.len() {
            let exact = current.iter().filter(|(a, b)| cand[*a] == refr[*b]).count();
            let m = current.len();
            let chunks = oracle_chunks(current);
            let better = match *best {
                None => true,
                Some((e, t, c)) => (exact, m) > (e, t) || ((exact, m) == (e, t) && chunks < c),
            };
            if better {
                *best = Some((exact, m, chunks));
            }
            return;
        }
        walk(i + 1, cand, refr, cs, rs, used, current, best);
        for j in 0..refr.len() {
            if !used[j] && (cand[i] == refr[j] || cs[i] == rs[j]) {
                used[j] = true;
                current.push((i, j));
                walk(i + 1, cand, refr, cs, rs, used, current, best);
                current.pop();
                used[j] = false;
            }
        }
    }
    walk(0, cand, refr, &cs, &rs, &mut used, &mut current, &mut best);
    best.unwrap()
}

pub fn oracle_meteor_pair(cand: &[String], refr: &[String]) -> f64 {
    if cand.is_empty() || refr.is_empty() {
        return 0.0;
    }
    let (_, m, chunks) = oracle_meteor_alignment(cand, refr);
    if m == 0 {
        return 0.0;
    }
    let m = m as f64;
    let p = m / cand.len() as f64;
    let r = m / refr.len() as f64;
    let f = p * r / (0.9 * p + 0.1 * r);
    f * (1.0 - 0.5 * (chunks as f64 / m).powi(3))
}

pub fn oracle_meteor(pairs: &[EvalPair]) -> f64 {
    let mut sum = 0.0;
    for p in pairs {
        let best = p
            .references
            .iter()
            .map(|r| oracle_meteor_pair(&p.candidate, r))
            .fold(0.0, f64::max);
        sum += best;
    }
    sum / pairs.len() as f64
}

/// [bleu1, bleu2, bleu3, bleu4, meteor_lite, rouge_l, cider], as computed by
/// the oracles in `common`.
pub const FROZEN_METRICS: [(&str, [f64; 7]); 12] = [
    (
        "single_short",
        [
            0.7165313105737893,
            0.7165313105737893,
            0.7165313105737893,
            0.0,
            0.7549857549857549,
            0.8356164383561644,
            0.0,
        ],
    ),
    ("lcs_swap", [1.0, 0.0, 0.0, 0.0, 0.5, 0.75, 0.0]),
    ("disjoint_identity", [1.0, 1.0, 1.0, 1.0, 0.996, 1.0, 10.0]),
    (
        "clipping",
        [
            0.2857142857142857,
            0.0,
            0.0,
            0.0,
            0.1639344262295082,
            0.31202046035805625,
            0.0,
        ],
    ),
    (
        "two_images",
        [
            0.7584835431705546,
            0.5978571941276356,
            0.38457002713585364,
            0.0,
            0.7520002319109462,
            0.7417334669338678,
            2.476598660970372,
        ],
    ),
    (
        "stems",
        [
            0.7142857142857143,
            0.37796447300922725,
            0.0,
            0.0,
            0.8140166028097062,
            0.6266025641025641,
            1.172420015043834,
        ],
    ),
    (
        "long_candidate",
        [
            0.46153846153846156,
            0.33968311024337877,
            0.21890301363223724,
            0.0,
            0.8344827586206895,
            0.6039603960396039,
            0.0,
        ],
    ),
    (
        "three_images",
        [
            0.8666666666666667,
            0.6582805886043833,
            0.3637976276870353,
            0.0,
            0.6617565128688009,
            0.7703649397197783,
            2.2962621087861432,
        ],
    ),
    (
        "repeats",
        [
            0.9,
            0.8215838362577492,
            0.60822019955734,
            0.4870018732126484,
            0.7718750000000001,
            0.8,
            2.79141263393277,
        ],
    ),
    (
        "tie_lengths",
        [
            1.0,
            1.0,
            1.0,
            1.0,
            0.9304224738675959,
            0.8713398176910934,
            6.679442618624357,
        ],
    ),
    (
        "scrambled",
        [
            1.0,
            0.5477225575051661,
            0.33471647504108476,
            0.0,
            0.71875,
            0.5,
            3.5625,
        ],
    ),
    (
        "four_images",
        [
            0.6508668871612338,
            0.4872552972208589,
            0.27522923566508484,
            0.0,
            0.5093073333913851,
            0.6346867378933922,
            2.330692487053202,
        ],
    ),
];

/// Toy corpora covering clipping, brevity, multiple references, repeated
/// words, stems and disjoint vocabularies.
pub fn toy_corpora() -> Vec<(&'static str, Vec<EvalPair>)> {
    vec![
        (
            "single_short",
            vec![pair(1, "the cat sat", &["the cat sat down"])],
        ),
        ("lcs_swap", vec![pair(1, "a b c d", &["a c b d"])]),
        (
            "disjoint_identity",
            vec![
                pair(1, "a cat sat on mats", &["a cat sat on mats"]),
                pair(2, "the dog ran home fast", &["the dog ran home fast"]),
            ],
        ),
        (
            "clipping",
            vec![pair(
                1,
                "the the the the the the the",
                &["the cat is on the mat", "there is a cat on the mat"],
            )],
        ),
        (
            "two_images",
            vec![
                pair(
                    1,
                    "a man riding a horse on a beach",
                    &[
                        "a man rides a horse on the beach",
                        "a person riding a brown horse",
                    ],
                ),
                pair(
                    2,
                    "a bowl of fruit on a table",
                    &[
                        "a bowl filled with fruit on a wooden table",
                        "fruit in a bowl",
                    ],
                ),
            ],
        ),
        (
            "stems",
            vec![
                pair(
                    1,
                    "dogs running in parks",
                    &["a dog runs in the park", "two dogs running"],
                ),
                pair(
                    2,
                    "people riding horses",
                    &["a person rides a horse", "people ride horses"],
                ),
            ],
        ),
        (
            "long_candidate",
            vec![pair(
                1,
                "a woman standing in a kitchen next to a stove and a sink",
                &["a woman in a kitchen", "a lady cooking at the stove"],
            )],
        ),
        (
            "three_images",
            vec![
                pair(
                    1,
                    "a plate of food",
                    &["a plate with food", "food on a plate"],
                ),
                pair(
                    2,
                    "a red bus on the street",
                    &["a red double decker bus", "a bus driving down the street"],
                ),
                pair(
                    3,
                    "a cat on a couch",
                    &["a cat sleeping on a couch", "a kitten on the sofa"],
                ),
            ],
        ),
        (
            "repeats",
            vec![
                pair(1, "a dog and a dog", &["a dog chasing a dog", "two dogs"]),
                pair(
                    2,
                    "the cat and the dog",
                    &["the cat and the mouse", "a cat with the dog"],
                ),
            ],
        ),
        (
            "tie_lengths",
            vec![
                pair(1, "a b c d e", &["a b c d", "a b c d e f"]),
                pair(2, "x y z", &["x y", "x y z w"]),
            ],
        ),
        (
            "scrambled",
            vec![
                pair(1, "on the mat sat the cat", &["the cat sat on the mat"]),
                pair(
                    2,
                    "table wooden a on laptop a",
                    &["a laptop on a wooden table"],
                ),
            ],
        ),
        (
            "four_images",
            vec![
                pair(
                    1,
                    "a man surfing a wave",
                    &["a surfer riding a wave", "a man on a surfboard"],
                ),
                pair(
                    2,
                    "a giraffe eating leaves",
                    &["a giraffe eating from a tree"],
                ),
                pair(
                    3,
                    "a clock tower",
                    &["a tall clock tower in a city", "the clock on a tower"],
                ),
                pair(
                    4,
                    "two zebras standing in grass",
                    &["zebras grazing in a field", "two zebras in the grass"],
                ),
            ],
        ),
    ]
}

pub mod synth {
    //! Seeded synthetic MSCOCO-like corpora.

    use capfair::corpus::{Corpus, ImageRecord};
    use capfair::lexicon::default_lexicon;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub const VERBS: [&str; 12] = [
        "riding",
        "holding",
        "eating",
        "standing near",
        "sitting on",
        "walking with",
        "playing with",
        "looking at",
        "carrying",
        "throwing",
        "cutting",
        "watching",
    ];
    pub const OBJECTS: [&str; 14] = [
        "a horse",
        "a surfboard",
        "a pizza",
        "a red bus",
        "a bench",
        "a dog",
        "a frisbee",
        "a kite",
        "a laptop",
        "a cake",
        "an umbrella",
        "a skateboard",
        "the beach",
        "a table",
    ];
    pub const SCENES: [&str; 10] = [
        "a bowl of fruit on a table",
        "a red bus parked on the street",
        "a plate of food with broccoli",
        "two giraffes standing in a field",
        "a clock tower against a blue sky",
        "a cat sleeping on a couch",
        "a train at the station",
        "a kitchen with a stove and a sink",
        "zebras grazing in tall grass",
        "a boat floating on the water",
    ];

    /// Image kinds: 0 male, 1 female, 2 mixed genders, 3 neutral human, 4 nature.
    pub fn corpus(seed: u64, n_images: usize, captions_per_image: usize) -> Corpus {
        let lex = default_lexicon();
        let parts = lex.parts();
        let male: Vec<String> = parts.male_singular.iter().cloned().collect();
        let female: Vec<String> = parts.female_singular.iter().cloned().collect();
        let neutral: Vec<String> = parts.neutral_singular.iter().cloned().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let images = (0..n_images)
            .map(|k| {
                let kind = rng.gen_range(0..5);
                let captions = (0..captions_per_image)
                    .map(|c| {
                        let verb = VERBS.choose(&mut rng).unwrap();
                        let obj = OBJECTS.choose(&mut rng).unwrap();
                        let subject = match kind {
                            0 => male.choose(&mut rng).unwrap().clone(),
                            1 => female.choose(&mut rng).unwrap().clone(),
                            2 if c % 2 == 0 => male.choose(&mut rng).unwrap().clone(),
                            2 => female.choose(&mut rng).unwrap().clone(),
                            3 => neutral.choose(&mut rng).unwrap().clone(),
                            _ => return SCENES.choose(&mut rng).unwrap().to_string(),
                        };
                        let article = if subject.starts_with(['a', 'e', 'i', 'o', 'u']) {
                            "an"
                        } else {
                            "a"
                        };
                        format!("{article} {subject} {verb} {obj}")
                    })
                    .collect();
                ImageRecord {
                    image_id: 100 + k as u64 * 7,
                    file_name: format!("COCO_val2014_{k:012}.jpg"),
                    captions,
                }
            })
            .collect();
        Corpus::new("synthetic", images).unwrap()
    }

    /// Captions of random words drawn from a small vocabulary mixed with
    /// every lexicon word, so any verdict can occur.
    pub fn random_corpus(rng: &mut ChaCha8Rng, max_images: usize) -> Corpus {
        let lex = default_lexicon();
        let parts = lex.parts();
        let mut vocab: Vec<String> = (0..40).map(|i| format!("w{i}")).collect();
        for set in [
            &parts.male_singular,
            &parts.male_plural,
            &parts.female_singular,
            &parts.female_plural,
            &parts.neutral_singular,
            &parts.neutral_plural,
        ] {
            vocab.extend(set.iter().cloned());
        }
        let n = rng.gen_range(0..=max_images);
        let images = (0..n)
            .map(|k| {
                let n_caps = rng.gen_range(1..=5);
                let captions = (0..n_caps)
                    .map(|_| {
                        let len = rng.gen_range(1..=8);
                        let ws: Vec<&str> = (0..len)
                            .map(|_| {
                                // bias towards plain words so nature images are common
                                if rng.gen_bool(0.85) {
                                    vocab[rng.gen_range(0..40)].as_str()
                                } else {
                                    vocab.choose(rng).unwrap().as_str()
                                }
                            })
                            .collect();
                        ws.join(" ")
                    })
                    .collect();
                ImageRecord {
                    image_id: k as u64,
                    file_name: format!("{k}.jpg"),
                    captions,
                }
            })
            .collect();
        Corpus::new("random", images).unwrap()
    }
}

pub mod golden {
    //! Synthetic metric rows for the table-layout golden file.

    use capfair::metrics::MetricReport;
    use capfair::report::{metric_table, MetricRow};

    fn row(label: &str, split: &str, v: [f64; 7], n_images: usize) -> MetricRow {
        MetricRow {
            label: label.into(),
            split: split.into(),
            neutral: label.ends_with("-N"),
            scores: MetricReport {
                bleu1: v[0],
                bleu2: v[1],
                bleu3: v[2],
                bleu4: v[3],
                meteor_lite: v[4],
                rouge_l: v[5],
                cider: v[6],
                n_images,
                per_image: None,
            },
        }
    }

    /// Three tables: confident with four rows, nature and human with two.
    pub fn tables() -> String {
        let confident = [
            row(
                "SAT",
                "confident",
                [0.59125, 0.38, 0.25049, 0.17, 0.2, 0.49, 4.4],
                2036,
            ),
            row(
                "SAI",
                "confident",
                [0.58999, 0.38, 0.24, 0.16, 0.19, 0.49, 4.3],
                2036,
            ),
            row(
                "SAT-N",
                "confident",
                [0.62, 0.42, 0.28, 0.2, 0.22, 0.52, 4.4],
                2036,
            ),
            row(
                "SAI-N",
                "confident",
                [0.64, 0.43, 0.29, 0.19, 0.22, 0.53, 4.4],
                2036,
            ),
        ];
        let nature = [
            row(
                "SAT",
                "nature",
                [0.62, 0.41, 0.27, 0.18, 0.2, 0.49, 5.5],
                21453,
            ),
            row(
                "SAI",
                "nature",
                [0.62, 0.4, 0.26, 0.17, 0.2, 0.49, 5.4],
                21453,
            ),
        ];
        let human = [
            row(
                "SAT-N",
                "human",
                [0.6, 0.38, 0.25, 0.17, 0.2, 0.48, 4.7],
                19051,
            ),
            row(
                "SAI-N",
                "human",
                [0.61, 0.38, 0.24, 0.16, 0.2, 0.47, 10.0],
                19051,
            ),
        ];
        [
            metric_table("Split: confident (2036 images)", &confident),
            metric_table("Split: nature (21453 images)", &nature),
            metric_table("Split: human (19051 images)", &human),
        ]
        .join("\n")
    }
}
