//! Gender and human-identifier word inventory, tokenization and per-token
//! classification.
//!
//! Every other module sees captions only through [`tokenize`] and
//! [`Lexicon::classify_word`], so matching rules live here and nowhere else.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::Range;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Male,
    Female,
}

impl Gender {
    pub fn opposite(self) -> Gender {
        match self {
            Gender::Male => Gender::Female,
            Gender::Female => Gender::Male,
        }
    }
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Gender::Male => "male",
            Gender::Female => "female",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Number {
    Singular,
    Plural,
}

/// Class of a single token. Exactly one class applies to every token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GenderClass {
    MaleSingular,
    MalePlural,
    FemaleSingular,
    FemalePlural,
    NeutralHumanSingular,
    NeutralHumanPlural,
    NonHuman,
}

impl GenderClass {
    pub const HUMAN: [GenderClass; 6] = [
        GenderClass::MaleSingular,
        GenderClass::MalePlural,
        GenderClass::FemaleSingular,
        GenderClass::FemalePlural,
        GenderClass::NeutralHumanSingular,
        GenderClass::NeutralHumanPlural,
    ];

    pub fn gender(self) -> Option<Gender> {
        match self {
            GenderClass::MaleSingular | GenderClass::MalePlural => Some(Gender::Male),
            GenderClass::FemaleSingular | GenderClass::FemalePlural => Some(Gender::Female),
            _ => None,
        }
    }

    pub fn is_gendered(self) -> bool {
        self.gender().is_some()
    }

    pub fn is_human(self) -> bool {
        self != GenderClass::NonHuman
    }

    pub fn number(self) -> Option<Number> {
        match self {
            GenderClass::MaleSingular
            | GenderClass::FemaleSingular
            | GenderClass::NeutralHumanSingular => Some(Number::Singular),
            GenderClass::MalePlural
            | GenderClass::FemalePlural
            | GenderClass::NeutralHumanPlural => Some(Number::Plural),
            GenderClass::NonHuman => None,
        }
    }

    /// The class with male and female swapped; neutral classes map to themselves.
    pub fn swap_gender(self) -> GenderClass {
        match self {
            GenderClass::MaleSingular => GenderClass::FemaleSingular,
            GenderClass::MalePlural => GenderClass::FemalePlural,
            GenderClass::FemaleSingular => GenderClass::MaleSingular,
            GenderClass::FemalePlural => GenderClass::MalePlural,
            other => other,
        }
    }

    fn set_name(self) -> &'static str {
        match self {
            GenderClass::MaleSingular => "male_singular",
            GenderClass::MalePlural => "male_plural",
            GenderClass::FemaleSingular => "female_singular",
            GenderClass::FemalePlural => "female_plural",
            GenderClass::NeutralHumanSingular => "neutral_singular",
            GenderClass::NeutralHumanPlural => "neutral_plural",
            GenderClass::NonHuman => "non_human",
        }
    }

    fn plural(self) -> Option<GenderClass> {
        match self {
            GenderClass::MaleSingular => Some(GenderClass::MalePlural),
            GenderClass::FemaleSingular => Some(GenderClass::FemalePlural),
            GenderClass::NeutralHumanSingular => Some(GenderClass::NeutralHumanPlural),
            _ => None,
        }
    }
}

/// One whitespace-delimited piece of a caption.
///
/// `surface` is the piece exactly as written (punctuation included); `norm` is
/// its lowercased core with leading and trailing punctuation removed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub norm: String,
    pub position: usize,
    /// Byte range of the core word inside `surface`.
    pub(crate) core: Range<usize>,
    /// Byte offset of `surface` in the text it was cut from.
    pub(crate) offset: usize,
}

impl Token {
    pub fn core(&self) -> &str {
        &self.surface[self.core.clone()]
    }

    /// Returns a copy whose core word is replaced by `word`, keeping any
    /// surrounding punctuation of the surface.
    pub(crate) fn with_core(&self, word: &str) -> Token {
        let mut surface = String::with_capacity(self.surface.len() + word.len());
        surface.push_str(&self.surface[..self.core.start]);
        surface.push_str(word);
        surface.push_str(&self.surface[self.core.end..]);
        let start = self.core.start;
        Token {
            surface,
            norm: word.to_lowercase(),
            position: self.position,
            core: start..start + word.len(),
            offset: self.offset,
        }
    }
}

fn is_edge_punct(c: char) -> bool {
    !c.is_alphanumeric()
}

/// Lowercases, splits on whitespace and strips leading/trailing punctuation.
/// Pieces that are pure punctuation are dropped.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    for piece in text.split_whitespace() {
        let trimmed_start = piece.trim_start_matches(is_edge_punct);
        let start = piece.len() - trimmed_start.len();
        let core = trimmed_start.trim_end_matches(is_edge_punct);
        if core.is_empty() {
            continue;
        }
        let lowered = core.to_lowercase();
        let norm = lowered.trim_matches(is_edge_punct);
        if norm.is_empty() {
            continue;
        }
        tokens.push(Token {
            surface: piece.to_string(),
            norm: norm.to_string(),
            position: tokens.len(),
            core: start..start + core.len(),
            offset: piece.as_ptr() as usize - text.as_ptr() as usize,
        });
    }
    tokens
}

/// Normalized word sequence of a caption.
pub fn norms(text: &str) -> Vec<String> {
    tokenize(text).into_iter().map(|t| t.norm).collect()
}

/// Joins token surfaces with single spaces.
pub fn render(tokens: &[Token]) -> String {
    let mut out = String::new();
    for (i, t) in tokens.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&t.surface);
    }
    out
}

const POSSESSIVE_SUFFIXES: [&str; 2] = ["'s", "\u{2019}s"];

/// Raw word inventory. Validated into a [`Lexicon`] by [`Lexicon::from_parts`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LexiconParts {
    pub male_singular: BTreeSet<String>,
    pub male_plural: BTreeSet<String>,
    pub female_singular: BTreeSet<String>,
    pub female_plural: BTreeSet<String>,
    pub neutral_singular: BTreeSet<String>,
    pub neutral_plural: BTreeSet<String>,
    pub plural_of: BTreeMap<String, String>,
    pub neutral_target_singular: String,
    pub neutral_target_plural: String,
    pub male_target_singular: String,
    pub male_target_plural: String,
    pub female_target_singular: String,
    pub female_target_plural: String,
}

impl LexiconParts {
    fn set(&self, class: GenderClass) -> &BTreeSet<String> {
        match class {
            GenderClass::MaleSingular => &self.male_singular,
            GenderClass::MalePlural => &self.male_plural,
            GenderClass::FemaleSingular => &self.female_singular,
            GenderClass::FemalePlural => &self.female_plural,
            GenderClass::NeutralHumanSingular => &self.neutral_singular,
            GenderClass::NeutralHumanPlural => &self.neutral_plural,
            GenderClass::NonHuman => unreachable!("no word set for NonHuman"),
        }
    }

    fn set_mut(&mut self, class: GenderClass) -> &mut BTreeSet<String> {
        match class {
            GenderClass::MaleSingular => &mut self.male_singular,
            GenderClass::MalePlural => &mut self.male_plural,
            GenderClass::FemaleSingular => &mut self.female_singular,
            GenderClass::FemalePlural => &mut self.female_plural,
            GenderClass::NeutralHumanSingular => &mut self.neutral_singular,
            GenderClass::NeutralHumanPlural => &mut self.neutral_plural,
            GenderClass::NonHuman => unreachable!("no word set for NonHuman"),
        }
    }

    fn target_mut(&mut self, class: GenderClass) -> &mut String {
        match class {
            GenderClass::MaleSingular => &mut self.male_target_singular,
            GenderClass::MalePlural => &mut self.male_target_plural,
            GenderClass::FemaleSingular => &mut self.female_target_singular,
            GenderClass::FemalePlural => &mut self.female_target_plural,
            GenderClass::NeutralHumanSingular => &mut self.neutral_target_singular,
            GenderClass::NeutralHumanPlural => &mut self.neutral_target_plural,
            GenderClass::NonHuman => unreachable!("no target for NonHuman"),
        }
    }

    fn defaults() -> LexiconParts {
        fn set(words: &[&str]) -> BTreeSet<String> {
            words.iter().map(|w| w.to_string()).collect()
        }
        let pairs = [
            ("man", "men"),
            ("guy", "guys"),
            ("boy", "boys"),
            ("gentleman", "gentlemen"),
            ("male", "males"),
            ("woman", "women"),
            ("lady", "ladies"),
            ("girl", "girls"),
            ("female", "females"),
            ("person", "people"),
            ("player", "players"),
            ("skier", "skiers"),
            ("snowboarder", "snowboarders"),
            ("surfer", "surfers"),
            ("rider", "riders"),
            ("child", "children"),
            ("kid", "kids"),
            ("human", "humans"),
        ];
        LexiconParts {
            male_singular: set(&["man", "guy", "boy", "gentleman", "male"]),
            male_plural: set(&["men", "guys", "boys", "gentlemen", "males"]),
            female_singular: set(&["woman", "lady", "girl", "female"]),
            female_plural: set(&["women", "ladies", "girls", "females"]),
            neutral_singular: set(&[
                "person",
                "player",
                "skier",
                "snowboarder",
                "surfer",
                "rider",
                "child",
                "kid",
                "human",
            ]),
            neutral_plural: set(&[
                "people",
                "players",
                "skiers",
                "snowboarders",
                "surfers",
                "riders",
                "children",
                "kids",
                "humans",
            ]),
            plural_of: pairs
                .iter()
                .map(|(s, p)| (s.to_string(), p.to_string()))
                .collect(),
            neutral_target_singular: "person".into(),
            neutral_target_plural: "people".into(),
            male_target_singular: "man".into(),
            male_target_plural: "men".into(),
            female_target_singular: "woman".into(),
            female_target_plural: "women".into(),
        }
    }
}

/// Validated, immutable word inventory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    parts: LexiconParts,
    index: HashMap<String, GenderClass>,
}

impl Default for Lexicon {
    fn default() -> Self {
        default_lexicon()
    }
}

/// Built-in inventory.
pub fn default_lexicon() -> Lexicon {
    Lexicon::from_parts(LexiconParts::defaults()).expect("built-in lexicon is valid")
}

fn check_word(word: &str) -> Result<()> {
    let ok = !word.is_empty()
        && word.chars().all(|c| !c.is_whitespace())
        && word.to_lowercase() == word
        && word.starts_with(|c: char| c.is_alphanumeric())
        && word.ends_with(|c: char| c.is_alphanumeric());
    if ok {
        Ok(())
    } else {
        Err(Error::Lexicon(format!(
            "`{word}` is not a normalized word (lowercase, no whitespace, no edge punctuation)"
        )))
    }
}

impl Lexicon {
    pub fn from_parts(parts: LexiconParts) -> Result<Lexicon> {
        let mut index: HashMap<String, GenderClass> = HashMap::new();
        for class in GenderClass::HUMAN {
            for word in parts.set(class) {
                check_word(word)?;
                if let Some(prev) = index.insert(word.clone(), class) {
                    return Err(Error::Lexicon(format!(
                        "word `{word}` appears in both [{}] and [{}]; word sets must be disjoint",
                        prev.set_name(),
                        class.set_name()
                    )));
                }
            }
        }

        for (singular, plural) in &parts.plural_of {
            let from = index.get(singular).copied();
            let to = index.get(plural).copied();
            let expected = from.and_then(GenderClass::plural);
            if expected.is_none() || to != expected {
                return Err(Error::Lexicon(format!(
                    "plural_of maps `{singular}` ({}) to `{plural}` ({}); a mapping must go from a singular set to the plural set of the same gender",
                    from.map_or("not in lexicon", GenderClass::set_name),
                    to.map_or("not in lexicon", GenderClass::set_name),
                )));
            }
        }

        let targets = [
            (
                "neutral_singular",
                &parts.neutral_target_singular,
                GenderClass::NeutralHumanSingular,
            ),
            (
                "neutral_plural",
                &parts.neutral_target_plural,
                GenderClass::NeutralHumanPlural,
            ),
            (
                "male_singular",
                &parts.male_target_singular,
                GenderClass::MaleSingular,
            ),
            (
                "male_plural",
                &parts.male_target_plural,
                GenderClass::MalePlural,
            ),
            (
                "female_singular",
                &parts.female_target_singular,
                GenderClass::FemaleSingular,
            ),
            (
                "female_plural",
                &parts.female_target_plural,
                GenderClass::FemalePlural,
            ),
        ];
        for (name, word, class) in targets {
            if index.get(word.as_str()) != Some(&class) {
                return Err(Error::Lexicon(format!(
                    "target {name} = `{word}` must be a member of [{}]",
                    class.set_name()
                )));
            }
        }

        Ok(Lexicon { parts, index })
    }

    pub fn parts(&self) -> &LexiconParts {
        &self.parts
    }

    pub fn words(&self, class: GenderClass) -> &BTreeSet<String> {
        self.parts.set(class)
    }

    pub fn plural_of(&self, singular: &str) -> Option<&str> {
        self.parts.plural_of.get(singular).map(String::as_str)
    }

    pub fn neutral_target(&self, number: Number) -> &str {
        match number {
            Number::Singular => &self.parts.neutral_target_singular,
            Number::Plural => &self.parts.neutral_target_plural,
        }
    }

    pub fn gendered_target(&self, gender: Gender, number: Number) -> &str {
        match (gender, number) {
            (Gender::Male, Number::Singular) => &self.parts.male_target_singular,
            (Gender::Male, Number::Plural) => &self.parts.male_target_plural,
            (Gender::Female, Number::Singular) => &self.parts.female_target_singular,
            (Gender::Female, Number::Plural) => &self.parts.female_target_plural,
        }
    }

    /// Looks up a normalized word. Possessive forms ("woman's") take the
    /// class of their base word; the returned length is the byte length of
    /// the possessive suffix (0 for a plain match).
    pub fn lookup(&self, norm: &str) -> Option<(GenderClass, usize)> {
        if let Some(class) = self.index.get(norm) {
            return Some((*class, 0));
        }
        POSSESSIVE_SUFFIXES.iter().find_map(|suffix| {
            let base = norm.strip_suffix(suffix)?;
            self.index.get(base).map(|class| (*class, suffix.len()))
        })
    }

    pub fn classify_word(&self, norm: &str) -> GenderClass {
        self.lookup(norm)
            .map_or(GenderClass::NonHuman, |(class, _)| class)
    }
}

pub fn classify(lexicon: &Lexicon, token: &Token) -> GenderClass {
    lexicon.classify_word(&token.norm)
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct WordSection {
    #[serde(default)]
    words: Vec<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct TargetSection {
    neutral_singular: Option<String>,
    neutral_plural: Option<String>,
    male_singular: Option<String>,
    male_plural: Option<String>,
    female_singular: Option<String>,
    female_plural: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LexiconConfig {
    #[serde(default = "yes")]
    extend_defaults: bool,
    #[serde(default)]
    male_singular: WordSection,
    #[serde(default)]
    male_plural: WordSection,
    #[serde(default)]
    female_singular: WordSection,
    #[serde(default)]
    female_plural: WordSection,
    #[serde(default)]
    neutral_singular: WordSection,
    #[serde(default)]
    neutral_plural: WordSection,
    #[serde(default)]
    plural_of: BTreeMap<String, String>,
    #[serde(default)]
    targets: TargetSection,
}

fn yes() -> bool {
    true
}

/// Parses a lexicon config document. Words are added to the built-in
/// inventory unless `extend_defaults = false`.
pub fn parse_lexicon(text: &str) -> Result<Lexicon> {
    let config: LexiconConfig =
        toml::from_str(text).map_err(|e| Error::Lexicon(format!("config parse error: {e}")))?;

    let mut parts = if config.extend_defaults {
        LexiconParts::defaults()
    } else {
        LexiconParts::default()
    };
    let sections = [
        (GenderClass::MaleSingular, config.male_singular),
        (GenderClass::MalePlural, config.male_plural),
        (GenderClass::FemaleSingular, config.female_singular),
        (GenderClass::FemalePlural, config.female_plural),
        (GenderClass::NeutralHumanSingular, config.neutral_singular),
        (GenderClass::NeutralHumanPlural, config.neutral_plural),
    ];
    for (class, section) in sections {
        for word in section.words {
            parts.set_mut(class).insert(word.trim().to_lowercase());
        }
    }
    for (s, p) in config.plural_of {
        parts
            .plural_of
            .insert(s.trim().to_lowercase(), p.trim().to_lowercase());
    }

    let t = config.targets;
    let defaults = LexiconParts::defaults();
    let slots = [
        (
            t.neutral_singular,
            GenderClass::NeutralHumanSingular,
            defaults.neutral_target_singular,
        ),
        (
            t.neutral_plural,
            GenderClass::NeutralHumanPlural,
            defaults.neutral_target_plural,
        ),
        (
            t.male_singular,
            GenderClass::MaleSingular,
            defaults.male_target_singular,
        ),
        (
            t.male_plural,
            GenderClass::MalePlural,
            defaults.male_target_plural,
        ),
        (
            t.female_singular,
            GenderClass::FemaleSingular,
            defaults.female_target_singular,
        ),
        (
            t.female_plural,
            GenderClass::FemalePlural,
            defaults.female_target_plural,
        ),
    ];
    for (value, class, fallback) in slots {
        // Unset targets keep the built-in word when it is still in the set,
        // else the set's first word.
        let chosen = match value {
            Some(v) => v.trim().to_lowercase(),
            None if parts.set(class).contains(&fallback) => fallback,
            None => parts.set(class).iter().next().cloned().unwrap_or_default(),
        };
        *parts.target_mut(class) = chosen;
    }
    Lexicon::from_parts(parts)
}

pub fn load_lexicon(path: &Path) -> Result<Lexicon> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_lexicon(&text)
}
