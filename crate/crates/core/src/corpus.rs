//! Loading and writing MSCOCO-style caption annotations, gender prediction
//! files and candidate caption files.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::transform::GenderLabel;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageRecord {
    pub image_id: u64,
    pub file_name: String,
    pub captions: Vec<String>,
}

/// Immutable set of images, always held in ascending `image_id` order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Corpus {
    images: Vec<ImageRecord>,
    source_label: String,
}

impl Corpus {
    /// Builds a corpus, sorting by image id. Fails on duplicate ids or on
    /// images without a non-blank caption.
    pub fn new(source_label: impl Into<String>, mut images: Vec<ImageRecord>) -> Result<Corpus> {
        images.sort_by_key(|img| img.image_id);
        let dupes: BTreeSet<u64> = images
            .windows(2)
            .filter(|w| w[0].image_id == w[1].image_id)
            .map(|w| w[0].image_id)
            .collect();
        if !dupes.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "duplicate image ids: {dupes:?}"
            )));
        }
        for img in &images {
            if img.captions.is_empty() {
                return Err(Error::InvalidArgument(format!(
                    "image {} has no captions",
                    img.image_id
                )));
            }
            if img.captions.iter().any(|c| c.trim().is_empty()) {
                return Err(Error::InvalidArgument(format!(
                    "image {} has a blank caption",
                    img.image_id
                )));
            }
        }
        Ok(Corpus {
            images,
            source_label: source_label.into(),
        })
    }

    pub fn empty(source_label: impl Into<String>) -> Corpus {
        Corpus {
            images: Vec::new(),
            source_label: source_label.into(),
        }
    }

    pub fn images(&self) -> &[ImageRecord] {
        &self.images
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ImageRecord> {
        self.images.iter()
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn source_label(&self) -> &str {
        &self.source_label
    }

    pub fn get(&self, image_id: u64) -> Option<&ImageRecord> {
        self.images
            .binary_search_by_key(&image_id, |img| img.image_id)
            .ok()
            .map(|i| &self.images[i])
    }

    pub fn contains(&self, image_id: u64) -> bool {
        self.get(image_id).is_some()
    }

    pub fn image_ids(&self) -> impl Iterator<Item = u64> + '_ {
        self.images.iter().map(|img| img.image_id)
    }

    /// Sub-corpus holding the images whose ids satisfy `keep`.
    pub fn filter(&self, mut keep: impl FnMut(u64) -> bool) -> Corpus {
        Corpus {
            images: self
                .images
                .iter()
                .filter(|img| keep(img.image_id))
                .cloned()
                .collect(),
            source_label: self.source_label.clone(),
        }
    }

    /// Applies `f` to every caption, keeping ids, file names and counts.
    pub fn map_captions(&self, f: impl Fn(&str) -> String + Sync) -> Corpus {
        use rayon::prelude::*;
        let images = self
            .images
            .par_iter()
            .map(|img| ImageRecord {
                image_id: img.image_id,
                file_name: img.file_name.clone(),
                captions: img.captions.iter().map(|c| f(c)).collect(),
            })
            .collect();
        Corpus {
            images,
            source_label: self.source_label.clone(),
        }
    }
}

impl<'a> IntoIterator for &'a Corpus {
    type Item = &'a ImageRecord;
    type IntoIter = std::slice::Iter<'a, ImageRecord>;

    fn into_iter(self) -> Self::IntoIter {
        self.images.iter()
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CocoInfo {
    #[serde(default)]
    description: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CocoImage {
    id: u64,
    #[serde(default)]
    file_name: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct CocoAnnotation {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    id: Option<u64>,
    image_id: u64,
    caption: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct CocoCaptions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    info: Option<CocoInfo>,
    images: Vec<CocoImage>,
    annotations: Vec<CocoAnnotation>,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let mut bytes = Vec::new();
    open(path)?
        .read_to_end(&mut bytes)
        .map_err(|e| Error::io(path, e))?;
    let de = &mut serde_json::Deserializer::from_slice(&bytes);
    serde_path_to_error::deserialize(de).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        location: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T, pretty: bool) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let res = if pretty {
        serde_json::to_writer_pretty(&mut w, value)
    } else {
        serde_json::to_writer(&mut w, value)
    };
    res.map_err(|e| Error::io(path, e.into()))?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Loads an MSCOCO captions annotation file.
///
/// Images without annotations are dropped with a warning. Unknown image ids
/// in the annotation list, duplicate image ids and blank captions are
/// validation errors.
pub fn load_coco_annotations(path: &Path) -> Result<Corpus> {
    let raw: CocoCaptions = read_json(path)?;

    let mut by_id: BTreeMap<u64, (String, Vec<String>)> = BTreeMap::new();
    let mut dupes = BTreeSet::new();
    for img in raw.images {
        if by_id.contains_key(&img.id) {
            dupes.insert(img.id);
        }
        by_id.insert(img.id, (img.file_name, Vec::new()));
    }
    if !dupes.is_empty() {
        return Err(Error::validation(
            path,
            format!("duplicate image ids in \"images\": {dupes:?}"),
        ));
    }

    let mut unknown = BTreeSet::new();
    for (idx, ann) in raw.annotations.into_iter().enumerate() {
        if ann.caption.trim().is_empty() {
            return Err(Error::validation(
                path,
                format!(
                    "annotations[{idx}] (image_id {}) has a blank caption",
                    ann.image_id
                ),
            ));
        }
        match by_id.get_mut(&ann.image_id) {
            Some((_, captions)) => captions.push(ann.caption),
            None => {
                unknown.insert(ann.image_id);
            }
        }
    }
    if !unknown.is_empty() {
        return Err(Error::validation(
            path,
            format!("annotations reference image ids absent from \"images\": {unknown:?}"),
        ));
    }

    let mut dropped = 0usize;
    let images: Vec<ImageRecord> = by_id
        .into_iter()
        .filter_map(|(image_id, (file_name, captions))| {
            if captions.is_empty() {
                dropped += 1;
                None
            } else {
                Some(ImageRecord {
                    image_id,
                    file_name,
                    captions,
                })
            }
        })
        .collect();
    if dropped > 0 {
        log::warn!(
            "{}: dropped {dropped} image(s) without caption annotations",
            path.display()
        );
    }

    let source_label = match raw.info.and_then(|i| i.description) {
        Some(d) => d,
        None => path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default(),
    };
    Ok(Corpus {
        images,
        source_label,
    })
}

/// Writes a corpus in the MSCOCO captions schema. Annotation ids are
/// assigned sequentially in canonical order.
pub fn write_corpus(corpus: &Corpus, path: &Path) -> Result<()> {
    let mut next_id = 0u64;
    let mut annotations = Vec::new();
    for img in corpus {
        for caption in &img.captions {
            next_id += 1;
            annotations.push(CocoAnnotation {
                id: Some(next_id),
                image_id: img.image_id,
                caption: caption.clone(),
            });
        }
    }
    let doc = CocoCaptions {
        info: Some(CocoInfo {
            description: Some(corpus.source_label.clone()),
        }),
        images: corpus
            .iter()
            .map(|img| CocoImage {
                id: img.image_id,
                file_name: img.file_name.clone(),
            })
            .collect(),
        annotations,
    };
    write_json(path, &doc, false)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenderPrediction {
    pub label: GenderLabel,
    pub confidence: Option<f64>,
}

/// Per-image output of an external gender classifier.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GenderPredictionFile {
    pub entries: BTreeMap<u64, GenderPrediction>,
}

impl GenderPredictionFile {
    pub fn label(&self, image_id: u64) -> GenderLabel {
        self.entries
            .get(&image_id)
            .map_or(GenderLabel::Unknown, |p| p.label)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl FromIterator<(u64, GenderLabel)> for GenderPredictionFile {
    fn from_iter<I: IntoIterator<Item = (u64, GenderLabel)>>(iter: I) -> Self {
        GenderPredictionFile {
            entries: iter
                .into_iter()
                .map(|(id, label)| {
                    (
                        id,
                        GenderPrediction {
                            label,
                            confidence: None,
                        },
                    )
                })
                .collect(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct RawPrediction {
    #[serde(alias = "id")]
    image_id: u64,
    label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    confidence: Option<f64>,
}

fn predictions_from_raw(path: &Path, raw: Vec<RawPrediction>) -> Result<GenderPredictionFile> {
    let mut entries = BTreeMap::new();
    for (idx, r) in raw.into_iter().enumerate() {
        let label: GenderLabel = r.label.parse().map_err(|_| {
            Error::validation(
                path,
                format!(
                    "record {idx} (image_id {}): label `{}` is not one of male, female, unknown",
                    r.image_id, r.label
                ),
            )
        })?;
        if let Some(c) = r.confidence {
            if !(0.0..=1.0).contains(&c) {
                return Err(Error::validation(
                    path,
                    format!(
                        "record {idx} (image_id {}): confidence {c} outside [0, 1]",
                        r.image_id
                    ),
                ));
            }
        }
        let prediction = GenderPrediction {
            label,
            confidence: r.confidence,
        };
        if entries.insert(r.image_id, prediction).is_some() {
            return Err(Error::validation(
                path,
                format!("duplicate image_id {} in predictions", r.image_id),
            ));
        }
    }
    Ok(GenderPredictionFile { entries })
}

fn looks_like_csv(path: &Path) -> Result<bool> {
    if let Some(ext) = path.extension() {
        if ext.eq_ignore_ascii_case("csv") {
            return Ok(true);
        }
        if ext.eq_ignore_ascii_case("json") {
            return Ok(false);
        }
    }
    let mut head = [0u8; 256];
    let n = open(path)?
        .read(&mut head)
        .map_err(|e| Error::io(path, e))?;
    Ok(head[..n]
        .iter()
        .find(|b| !b.is_ascii_whitespace())
        .is_some_and(|b| *b != b'['))
}

/// Loads gender predictions from JSON (`[{image_id, label, confidence?}]`)
/// or CSV with header `image_id,label,confidence`.
pub fn load_gender_predictions(path: &Path) -> Result<GenderPredictionFile> {
    let raw: Vec<RawPrediction> = if looks_like_csv(path)? {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(open(path)?);
        let mut rows = Vec::new();
        for (idx, rec) in reader.deserialize::<RawPrediction>().enumerate() {
            rows.push(rec.map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                location: format!("row {}", idx + 1),
                message: e.to_string(),
            })?);
        }
        rows
    } else {
        read_json(path)?
    };
    predictions_from_raw(path, raw)
}

/// CSV when the path ends in `.csv`, JSON otherwise.
pub fn write_gender_predictions(predictions: &GenderPredictionFile, path: &Path) -> Result<()> {
    let raw: Vec<RawPrediction> = predictions
        .entries
        .iter()
        .map(|(id, p)| RawPrediction {
            image_id: *id,
            label: p.label.to_string(),
            confidence: p.confidence,
        })
        .collect();
    if !path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
    {
        return write_json(path, &raw, true);
    }
    let csv_err = |e: csv::Error| Error::io(path, e.into());
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["image_id", "label", "confidence"])
        .map_err(csv_err)?;
    for r in &raw {
        let confidence = r.confidence.map(|c| c.to_string()).unwrap_or_default();
        w.write_record([r.image_id.to_string(), r.label.clone(), confidence])
            .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// One predicted caption per image.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CandidateCaptionFile {
    pub entries: BTreeMap<u64, String>,
}

impl CandidateCaptionFile {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, image_id: u64) -> Option<&str> {
        self.entries.get(&image_id).map(String::as_str)
    }
}

impl FromIterator<(u64, String)> for CandidateCaptionFile {
    fn from_iter<I: IntoIterator<Item = (u64, String)>>(iter: I) -> Self {
        CandidateCaptionFile {
            entries: iter.into_iter().collect(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct RawCandidate {
    image_id: u64,
    caption: String,
}

pub fn load_candidates(path: &Path) -> Result<CandidateCaptionFile> {
    let raw: Vec<RawCandidate> = read_json(path)?;
    let mut entries = BTreeMap::new();
    for r in raw {
        if entries.insert(r.image_id, r.caption).is_some() {
            return Err(Error::validation(
                path,
                format!("duplicate image_id {} in candidate captions", r.image_id),
            ));
        }
    }
    Ok(CandidateCaptionFile { entries })
}

pub fn write_candidates(candidates: &CandidateCaptionFile, path: &Path) -> Result<()> {
    let raw: Vec<RawCandidate> = candidates
        .entries
        .iter()
        .map(|(id, c)| RawCandidate {
            image_id: *id,
            caption: c.clone(),
        })
        .collect();
    write_json(path, &raw, true)
}

pub(crate) fn write_json_pretty<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_json(path, value, true)
}
