//! Gender-Confident / Human / Nature evaluation subsets.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::{write_corpus, Corpus, ImageRecord};
use crate::error::{Error, Result};
use crate::lexicon::{tokenize, Gender, GenderClass, Lexicon};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct CaptionProfile {
    pub male: usize,
    pub female: usize,
    pub neutral: usize,
}

impl CaptionProfile {
    pub fn of(lexicon: &Lexicon, caption: &str) -> CaptionProfile {
        let mut p = CaptionProfile::default();
        for token in tokenize(caption) {
            match lexicon.classify_word(&token.norm) {
                GenderClass::MaleSingular | GenderClass::MalePlural => p.male += 1,
                GenderClass::FemaleSingular | GenderClass::FemalePlural => p.female += 1,
                GenderClass::NeutralHumanSingular | GenderClass::NeutralHumanPlural => {
                    p.neutral += 1
                }
                GenderClass::NonHuman => {}
            }
        }
        p
    }

    pub fn has_human(&self) -> bool {
        self.male + self.female + self.neutral > 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Verdict {
    ConfidentMale,
    ConfidentFemale,
    HumanMixed,
    NoHuman,
}

impl Verdict {
    pub fn confident_gender(self) -> Option<Gender> {
        match self {
            Verdict::ConfidentMale => Some(Gender::Male),
            Verdict::ConfidentFemale => Some(Gender::Female),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ImageConsensus {
    pub image_id: u64,
    pub per_caption_profiles: Vec<CaptionProfile>,
    pub verdict: Verdict,
}

/// Classifies an image from all of its reference captions.
///
/// Confident requires every caption to mention the gender and none to
/// mention the other one.
pub fn consensus(lexicon: &Lexicon, image: &ImageRecord) -> ImageConsensus {
    let profiles: Vec<CaptionProfile> = image
        .captions
        .iter()
        .map(|c| CaptionProfile::of(lexicon, c))
        .collect();
    let all = |f: fn(&CaptionProfile) -> bool| !profiles.is_empty() && profiles.iter().all(f);
    let verdict = if all(|p| p.male >= 1 && p.female == 0) {
        Verdict::ConfidentMale
    } else if all(|p| p.female >= 1 && p.male == 0) {
        Verdict::ConfidentFemale
    } else if profiles.iter().any(CaptionProfile::has_human) {
        Verdict::HumanMixed
    } else {
        Verdict::NoHuman
    };
    ImageConsensus {
        image_id: image.image_id,
        per_caption_profiles: profiles,
        verdict,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SplitName {
    Confident,
    Human,
    Nature,
}

impl SplitName {
    pub const ALL: [SplitName; 3] = [SplitName::Confident, SplitName::Human, SplitName::Nature];

    pub fn as_str(self) -> &'static str {
        match self {
            SplitName::Confident => "confident",
            SplitName::Human => "human",
            SplitName::Nature => "nature",
        }
    }
}

impl fmt::Display for SplitName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SplitName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "confident" => Ok(SplitName::Confident),
            "human" => Ok(SplitName::Human),
            "nature" => Ok(SplitName::Nature),
            other => Err(Error::UnknownSplit(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SplitAssignment {
    pub confident: BTreeMap<u64, Gender>,
    pub human: BTreeSet<u64>,
    pub nature: BTreeSet<u64>,
}

impl SplitAssignment {
    pub fn contains(&self, which: SplitName, image_id: u64) -> bool {
        match which {
            SplitName::Confident => self.confident.contains_key(&image_id),
            SplitName::Human => self.human.contains(&image_id),
            SplitName::Nature => self.nature.contains(&image_id),
        }
    }

    pub fn size(&self, which: SplitName) -> usize {
        match which {
            SplitName::Confident => self.confident.len(),
            SplitName::Human => self.human.len(),
            SplitName::Nature => self.nature.len(),
        }
    }

    pub fn members(&self, which: SplitName) -> BTreeSet<u64> {
        match which {
            SplitName::Confident => self.confident.keys().copied().collect(),
            SplitName::Human => self.human.clone(),
            SplitName::Nature => self.nature.clone(),
        }
    }
}

pub fn build_splits(lexicon: &Lexicon, corpus: &Corpus) -> SplitAssignment {
    let verdicts: Vec<(u64, Verdict)> = corpus
        .images()
        .par_iter()
        .map(|img| (img.image_id, consensus(lexicon, img).verdict))
        .collect();
    let mut out = SplitAssignment::default();
    for (id, verdict) in verdicts {
        if verdict == Verdict::NoHuman {
            out.nature.insert(id);
        } else {
            out.human.insert(id);
        }
        if let Some(g) = verdict.confident_gender() {
            out.confident.insert(id, g);
        }
    }
    out
}

/// Writes the member images of one split in the corpus file format.
pub fn export_split(
    assignment: &SplitAssignment,
    which: &str,
    corpus: &Corpus,
    path: &Path,
) -> Result<()> {
    let which: SplitName = which.parse()?;
    let sub = corpus.filter(|id| assignment.contains(which, id));
    write_corpus(&sub, path)
}
