//! Gender neutralization and gender recombination of captions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Range;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::{CandidateCaptionFile, Corpus, GenderPredictionFile};
use crate::error::{Error, Result};
use crate::lexicon::{tokenize, Gender, GenderClass, Lexicon, Number, Token};

/// Output class of an external gender classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GenderLabel {
    Male,
    Female,
    Unknown,
}

impl GenderLabel {
    pub fn gender(self) -> Option<Gender> {
        match self {
            GenderLabel::Male => Some(Gender::Male),
            GenderLabel::Female => Some(Gender::Female),
            GenderLabel::Unknown => None,
        }
    }
}

impl From<Gender> for GenderLabel {
    fn from(g: Gender) -> Self {
        match g {
            Gender::Male => GenderLabel::Male,
            Gender::Female => GenderLabel::Female,
        }
    }
}

impl FromStr for GenderLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_lowercase().as_str() {
            "male" => Ok(GenderLabel::Male),
            "female" => Ok(GenderLabel::Female),
            "unknown" => Ok(GenderLabel::Unknown),
            other => Err(Error::InvalidArgument(format!(
                "invalid gender label `{other}`"
            ))),
        }
    }
}

impl fmt::Display for GenderLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GenderLabel::Male => "male",
            GenderLabel::Female => "female",
            GenderLabel::Unknown => "unknown",
        })
    }
}

/// A caption with every gendered word replaced by its neutral target.
///
/// Keeps the source text so that rendering splices replacements into the
/// original string and leaves spacing and punctuation untouched.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeutralCaption {
    pub tokens: Vec<Token>,
    pub replaced_positions: BTreeSet<usize>,
    pub original_classes: BTreeMap<usize, GenderClass>,
    pub original_words: BTreeMap<usize, String>,
    source: String,
    spans: Vec<Range<usize>>,
}

impl NeutralCaption {
    pub fn norms(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.norm.as_str()).collect()
    }

    pub fn render(&self) -> String {
        splice(&self.source, &self.spans, &self.tokens)
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}

fn splice(source: &str, spans: &[Range<usize>], tokens: &[Token]) -> String {
    let mut out = String::with_capacity(source.len() + 8);
    let mut last = 0;
    for (span, token) in spans.iter().zip(tokens) {
        out.push_str(&source[last..span.start]);
        out.push_str(&token.surface);
        last = span.end;
    }
    out.push_str(&source[last..]);
    out
}

/// Replaces the base word of `token`, keeping a possessive suffix of
/// `suffix_len` bytes and any edge punctuation.
fn replace_base(token: &Token, word: &str, suffix_len: usize) -> Token {
    if suffix_len == 0 {
        return token.with_core(word);
    }
    let core = token.core();
    let suffix = core
        .get(core.len().saturating_sub(suffix_len)..)
        .unwrap_or("'s");
    token.with_core(&format!("{word}{suffix}"))
}

pub fn neutralize(lexicon: &Lexicon, caption: &str) -> NeutralCaption {
    let original = tokenize(caption);
    let spans = original
        .iter()
        .map(|t| t.offset..t.offset + t.surface.len())
        .collect();
    let mut replaced_positions = BTreeSet::new();
    let mut original_classes = BTreeMap::new();
    let mut original_words = BTreeMap::new();
    let tokens = original
        .into_iter()
        .map(|token| match lexicon.lookup(&token.norm) {
            Some((class, suffix_len)) if class.is_gendered() => {
                let number = class.number().expect("gendered classes carry number");
                let target = lexicon.neutral_target(number);
                replaced_positions.insert(token.position);
                original_classes.insert(token.position, class);
                original_words.insert(token.position, token.core().to_string());
                replace_base(&token, target, suffix_len)
            }
            _ => token,
        })
        .collect();
    NeutralCaption {
        tokens,
        replaced_positions,
        original_classes,
        original_words,
        source: caption.to_string(),
        spans,
    }
}

/// Token sequence of [`recombine`] before rendering.
pub fn recombine_tokens(
    lexicon: &Lexicon,
    neutral: &NeutralCaption,
    gender: GenderLabel,
) -> Vec<Token> {
    let Some(gender) = gender.gender() else {
        return neutral.tokens.clone();
    };
    let singular = lexicon.neutral_target(Number::Singular);
    let plural = lexicon.neutral_target(Number::Plural);
    neutral
        .tokens
        .iter()
        .map(|token| {
            let Some((_, suffix_len)) = lexicon.lookup(&token.norm) else {
                return token.clone();
            };
            let base = &token.norm[..token.norm.len() - suffix_len];
            let number = if base == singular {
                Number::Singular
            } else if base == plural {
                Number::Plural
            } else {
                return token.clone();
            };
            replace_base(token, lexicon.gendered_target(gender, number), suffix_len)
        })
        .collect()
}

/// Puts gender back into a neutral caption: every neutral target word
/// becomes the gendered target of the same number. `Unknown` leaves the
/// caption neutral.
pub fn recombine(lexicon: &Lexicon, neutral: &NeutralCaption, gender: GenderLabel) -> String {
    let tokens = recombine_tokens(lexicon, neutral, gender);
    splice(&neutral.source, &neutral.spans, &tokens)
}

pub fn neutralize_text(lexicon: &Lexicon, caption: &str) -> String {
    neutralize(lexicon, caption).render()
}

pub fn neutralize_corpus(lexicon: &Lexicon, corpus: &Corpus) -> Corpus {
    corpus.map_captions(|c| neutralize_text(lexicon, c))
}

pub fn neutralize_candidates(
    lexicon: &Lexicon,
    candidates: &CandidateCaptionFile,
) -> CandidateCaptionFile {
    map_candidates(candidates, |_, c| neutralize_text(lexicon, c))
}

fn map_candidates(
    candidates: &CandidateCaptionFile,
    f: impl Fn(u64, &str) -> String + Sync,
) -> CandidateCaptionFile {
    let out: Vec<(u64, String)> = candidates
        .entries
        .par_iter()
        .map(|(id, c)| (*id, f(*id, c)))
        .collect();
    out.into_iter().collect()
}

/// Gender-agnostic captions plus per-image gender predictions to gendered
/// captions. Captions are neutralized first, so gendered input is accepted;
/// images without a prediction stay neutral.
pub fn sai_pipeline(
    lexicon: &Lexicon,
    candidates: &CandidateCaptionFile,
    predictions: &GenderPredictionFile,
) -> CandidateCaptionFile {
    map_candidates(candidates, |id, c| {
        let neutral = neutralize(lexicon, c);
        recombine(lexicon, &neutral, predictions.label(id))
    })
}

/// One replacement made by neutralization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditEntry {
    pub image_id: u64,
    pub caption_index: usize,
    pub position: usize,
    pub original: String,
    pub replacement: String,
}

fn audit_caption(
    lexicon: &Lexicon,
    image_id: u64,
    caption_index: usize,
    caption: &str,
) -> Vec<AuditEntry> {
    let neutral = neutralize(lexicon, caption);
    neutral
        .original_words
        .iter()
        .map(|(pos, word)| AuditEntry {
            image_id,
            caption_index,
            position: *pos,
            original: word.clone(),
            replacement: neutral.tokens[*pos].core().to_string(),
        })
        .collect()
}

pub fn audit_corpus(lexicon: &Lexicon, corpus: &Corpus) -> Vec<AuditEntry> {
    corpus
        .images()
        .par_iter()
        .flat_map_iter(|img| {
            img.captions
                .iter()
                .enumerate()
                .flat_map(|(i, c)| audit_caption(lexicon, img.image_id, i, c))
                .collect::<Vec<_>>()
        })
        .collect()
}

pub fn audit_candidates(lexicon: &Lexicon, candidates: &CandidateCaptionFile) -> Vec<AuditEntry> {
    candidates
        .entries
        .iter()
        .flat_map(|(id, c)| audit_caption(lexicon, *id, 0, c))
        .collect()
}

pub fn write_audit_csv(entries: &[AuditEntry], path: &Path) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| Error::io(path, e.into()))?;
    // header written explicitly so an empty audit is still a valid table
    w.write_record([
        "image_id",
        "caption_index",
        "position",
        "original",
        "replacement",
    ])
    .map_err(|e| Error::io(path, e.into()))?;
    for e in entries {
        w.serialize(e).map_err(|e| Error::io(path, e.into()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::ImageRecord;
    use crate::lexicon::{default_lexicon, norms};

    fn lex() -> Lexicon {
        default_lexicon()
    }

    #[test]
    fn neutralize_examples() {
        let n = neutralize(&lex(), "a man riding a bike");
        assert_eq!(n.render(), "a person riding a bike");
        assert_eq!(n.replaced_positions, BTreeSet::from([1]));
        assert_eq!(n.original_classes[&1], GenderClass::MaleSingular);

        let n = neutralize(&lex(), "two women shopping with a lady");
        assert_eq!(n.render(), "two people shopping with a person");

        let n = neutralize(&lex(), "a dog on the grass");
        assert_eq!(n.render(), "a dog on the grass");
        assert!(n.replaced_positions.is_empty());
    }

    #[test]
    fn neutralize_keeps_text_outside_replacements() {
        let n = neutralize(&lex(), "  A Man,  riding a bike .");
        assert_eq!(n.render(), "  A person,  riding a bike .");
        let n = neutralize(&lex(), "A woman's purse and the men's room");
        assert_eq!(n.render(), "A person's purse and the people's room");
        assert_eq!(n.original_words[&1], "woman's");
    }

    #[test]
    fn player_words_are_never_replaced() {
        let n = neutralize(&lex(), "a skier and a player");
        assert!(n.replaced_positions.is_empty());
        assert_eq!(
            recombine(&lex(), &n, GenderLabel::Female),
            "a skier and a player"
        );
    }

    #[test]
    fn recombine_examples() {
        let l = lex();
        let n = neutralize(&l, "a person riding a bike");
        assert_eq!(recombine(&l, &n, GenderLabel::Male), "a man riding a bike");
        let n = neutralize(&l, "people playing frisbee");
        assert_eq!(
            recombine(&l, &n, GenderLabel::Female),
            "women playing frisbee"
        );
        let n = neutralize(&l, "a person walking a dog");
        assert_eq!(
            recombine(&l, &n, GenderLabel::Unknown),
            "a person walking a dog"
        );
        let n = neutralize(&l, "The person's bag.");
        assert_eq!(recombine(&l, &n, GenderLabel::Female), "The woman's bag.");
    }

    #[test]
    fn sai_pipeline_examples() {
        let l = lex();
        let cands: CandidateCaptionFile = [
            (1, "a person on a surfboard".to_string()),
            (2, "a man on a surfboard".to_string()),
            (3, "a man on a surfboard".to_string()),
        ]
        .into_iter()
        .collect();
        let preds: GenderPredictionFile = [(1, GenderLabel::Female), (2, GenderLabel::Female)]
            .into_iter()
            .collect();
        let out = sai_pipeline(&l, &cands, &preds);
        assert_eq!(out.get(1), Some("a woman on a surfboard"));
        // neutralize gives "a person on a surfboard", recombine(female) gives "a woman ..."
        assert_eq!(out.get(2), Some("a woman on a surfboard"));
        assert_eq!(out.get(3), Some("a person on a surfboard"));
    }

    #[test]
    fn neutralize_corpus_examples() {
        let l = lex();
        let c = Corpus::new(
            "t",
            vec![
                ImageRecord {
                    image_id: 1,
                    file_name: "a".into(),
                    captions: vec!["a man cooking".into(), "a guy cooks".into()],
                },
                ImageRecord {
                    image_id: 2,
                    file_name: "b".into(),
                    captions: vec!["a bowl of fruit".into()],
                },
            ],
        )
        .unwrap();
        let n = neutralize_corpus(&l, &c);
        assert_eq!(n.len(), c.len());
        assert_eq!(
            n.images()[0].captions,
            ["a person cooking", "a person cooks"]
        );
        assert_eq!(n.images()[1], c.images()[1]);

        let audit = audit_corpus(&l, &c);
        assert_eq!(audit.len(), 2);
        assert_eq!(audit[1].original, "guy");
        assert_eq!(audit[1].replacement, "person");
    }

    #[test]
    fn label_parsing() {
        assert_eq!("Male".parse::<GenderLabel>().unwrap(), GenderLabel::Male);
        assert_eq!(
            " UNKNOWN ".parse::<GenderLabel>().unwrap(),
            GenderLabel::Unknown
        );
        assert!("person".parse::<GenderLabel>().is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn word() -> impl Strategy<Value = String> {
            prop_oneof![
                3 => "[a-z]{1,6}",
                2 => prop::sample::select(vec![
                    "man", "Men", "woman's", "ladies", "guy", "boy", "girls", "male",
                    "person", "People", "skier", "kids", "men's", "female,", "(lady)",
                ]).prop_map(String::from),
                1 => "[.,!?\"']{1,2}",
            ]
        }

        fn caption() -> impl Strategy<Value = String> {
            prop::collection::vec((word(), prop::sample::select(vec![" ", "  ", "\t"])), 0..12)
                .prop_map(|ws| ws.into_iter().map(|(w, sep)| format!("{w}{sep}")).collect())
        }

        proptest! {
            #[test]
            fn neutral_output_is_gender_free_and_idempotent(c in caption()) {
                let l = default_lexicon();
                let n = neutralize(&l, &c);
                for t in &n.tokens {
                    prop_assert!(!l.classify_word(&t.norm).is_gendered(), "{:?}", t);
                }
                let again = neutralize(&l, &n.render());
                prop_assert_eq!(again.norms(), n.norms());
                prop_assert!(again.replaced_positions.is_empty());
                prop_assert_eq!(n.tokens.len(), tokenize(&c).len());
            }

            #[test]
            fn recombine_round_trips_at_neutral_level(c in caption(), male in any::<bool>()) {
                let l = default_lexicon();
                let n = neutralize(&l, &c);
                let g = if male { GenderLabel::Male } else { GenderLabel::Female };
                let text = recombine(&l, &n, g);
                prop_assert_eq!(norms(&text).len(), n.tokens.len());
                let back = neutralize(&l, &text);
                prop_assert_eq!(back.norms(), n.norms());
            }

            #[test]
            fn untouched_tokens_keep_their_surface(c in caption()) {
                let l = default_lexicon();
                let original = tokenize(&c);
                let n = neutralize(&l, &c);
                for (a, b) in original.iter().zip(&n.tokens) {
                    if !n.replaced_positions.contains(&a.position) {
                        prop_assert_eq!(&a.surface, &b.surface);
                    }
                }
            }
        }
    }
}
