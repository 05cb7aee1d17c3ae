//! Run reports: a structured JSON document plus an aligned-column text
//! rendering. Wall-clock timing lives in its own file so that the report
//! files stay byte-identical across reruns.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::bias::BiasRow;
use crate::corpus::write_json_pretty;
use crate::error::{Error, Result};
use crate::metrics::{GenderAccuracy, MetricReport};
use crate::splitter::SplitAssignment;

pub const TOOL_NAME: &str = "capfair";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const REPORT_JSON: &str = "report.json";
pub const REPORT_TXT: &str = "report.txt";
pub const TIMING_JSON: &str = "timing.json";

pub const METRIC_HEADERS: [&str; 7] = [
    "Bleu1",
    "Bleu2",
    "Bleu3",
    "Bleu4",
    "METEOR-lite",
    "ROUGE_L",
    "CIDEr",
];

const METRIC_NOTE: &str = "CIDEr is the original tf-idf CIDEr (not CIDEr-D), scaled by 10. \
METEOR-lite aligns exact and Porter-stem matches only.";

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct ConfigEcho {
    pub annotations: Option<String>,
    /// `None` means the built-in lexicon.
    pub lexicon: Option<String>,
    pub candidates: Vec<(String, String)>,
    pub predictions: Option<String>,
    pub split: String,
    pub neutral: bool,
    pub min_support: usize,
    pub top_k: usize,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SplitSizes {
    pub total: usize,
    pub confident: usize,
    pub human: usize,
    pub nature: usize,
}

impl SplitSizes {
    pub fn of(total: usize, splits: &SplitAssignment) -> SplitSizes {
        SplitSizes {
            total,
            confident: splits.confident.len(),
            human: splits.human.len(),
            nature: splits.nature.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusSummary {
    pub source_label: String,
    pub images: usize,
    pub captions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricRow {
    pub label: String,
    pub split: String,
    pub neutral: bool,
    #[serde(flatten)]
    pub scores: MetricReport,
}

impl MetricRow {
    pub fn values(&self) -> [f64; 7] {
        let s = &self.scores;
        [
            s.bleu1,
            s.bleu2,
            s.bleu3,
            s.bleu4,
            s.meteor_lite,
            s.rouge_l,
            s.cider,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenderAccuracyBlock {
    pub predictions: Option<GenderAccuracy>,
    /// Uniform random labels drawn with `seed`.
    pub random_baseline: Option<GenderAccuracy>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiasBlock {
    pub csv: String,
    pub rows: usize,
    pub min_support: usize,
    pub most_male: Vec<BiasRow>,
    pub most_female: Vec<BiasRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: ConfigEcho,
    pub corpus: Option<CorpusSummary>,
    pub split_sizes: Option<SplitSizes>,
    pub metrics: Vec<MetricRow>,
    pub gender_accuracy: Option<GenderAccuracyBlock>,
    pub bias: Option<BiasBlock>,
    /// Files written under the output directory, report files excluded.
    pub outputs: Vec<String>,
    pub notes: Vec<String>,
}

impl RunReport {
    pub fn new(command: &str, config: ConfigEcho) -> RunReport {
        RunReport {
            tool: TOOL_NAME.to_string(),
            version: TOOL_VERSION.to_string(),
            command: command.to_string(),
            config,
            corpus: None,
            split_sizes: None,
            metrics: Vec::new(),
            gender_accuracy: None,
            bias: None,
            outputs: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn render_text(&self) -> String {
        let mut out = format!("{} {} {}\n", self.tool, self.version, self.command);
        if let Some(c) = &self.corpus {
            let _ = writeln!(
                out,
                "\nCorpus: {} ({} images, {} captions)",
                c.source_label, c.images, c.captions
            );
        }
        if let Some(s) = &self.split_sizes {
            out.push('\n');
            out.push_str(&split_table(s));
        }
        let mut splits: Vec<&str> = Vec::new();
        for row in &self.metrics {
            if !splits.contains(&row.split.as_str()) {
                splits.push(&row.split);
            }
        }
        for split in splits {
            let rows: Vec<MetricRow> = self
                .metrics
                .iter()
                .filter(|r| r.split == split)
                .cloned()
                .collect();
            let n = rows.first().map_or(0, |r| r.scores.n_images);
            out.push('\n');
            out.push_str(&metric_table(
                &format!("Split: {split} ({n} images)"),
                &rows,
            ));
        }
        if let Some(g) = &self.gender_accuracy {
            out.push_str("\nGender accuracy on the confident split\n");
            if let Some(a) = &g.predictions {
                out.push_str(&accuracy_line("predictions", a));
            }
            if let Some(a) = &g.random_baseline {
                let label = format!("random (seed {})", g.seed.unwrap_or_default());
                out.push_str(&accuracy_line(&label, a));
            }
        }
        if let Some(b) = &self.bias {
            let _ = writeln!(
                out,
                "\nWord/gender co-occurrence: {} words with support >= {} (full table: {})",
                b.rows, b.min_support, b.csv
            );
            out.push_str(&bias_table("Most male-skewed", &b.most_male));
            out.push_str(&bias_table("Most female-skewed", &b.most_female));
        }
        if !self.outputs.is_empty() {
            out.push_str("\nOutputs:\n");
            for o in &self.outputs {
                let _ = writeln!(out, "  {o}");
            }
        }
        for n in &self.notes {
            let _ = writeln!(out, "\nNote: {n}");
        }
        out
    }

    /// Writes `report.json` and `report.txt` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        write_json_pretty(&dir.join(REPORT_JSON), self)?;
        let path = dir.join(REPORT_TXT);
        std::fs::write(&path, self.render_text()).map_err(|e| Error::io(&path, e))
    }
}

fn split_table(s: &SplitSizes) -> String {
    let rows = [
        ("total", s.total),
        ("confident", s.confident),
        ("human", s.human),
        ("nature", s.nature),
    ];
    let width = rows
        .iter()
        .map(|(_, n)| n.to_string().len())
        .max()
        .unwrap_or(1);
    let mut out = String::from("Split sizes\n");
    for (name, n) in rows {
        let _ = writeln!(out, "  {name:<10} {n:>width$}");
    }
    out
}

/// Aligned table with one row per labeled candidate set and the seven
/// metric columns, values to four decimals.
pub fn metric_table(title: &str, rows: &[MetricRow]) -> String {
    let label_w = rows
        .iter()
        .map(|r| r.label.len())
        .chain([5])
        .max()
        .unwrap_or(5);
    let mut out = format!("{title}\n");
    let _ = write!(out, "{:<label_w$}", "Model");
    for h in METRIC_HEADERS {
        let _ = write!(out, "  {:>w$}", h, w = h.len().max(7));
    }
    out.push('\n');
    for r in rows {
        let _ = write!(out, "{:<label_w$}", r.label);
        for (h, v) in METRIC_HEADERS.iter().zip(r.values()) {
            let _ = write!(out, "  {:>w$.4}", v, w = h.len().max(7));
        }
        out.push('\n');
    }
    out.push_str(METRIC_NOTE);
    out.push('\n');
    out
}

fn accuracy_line(label: &str, a: &GenderAccuracy) -> String {
    format!(
        "  {label:<20} accuracy {:.4}  ({} of {} predicted correct, coverage {:.4} of {} images)\n",
        a.accuracy, a.correct, a.predicted, a.coverage, a.confident_images
    )
}

fn bias_table(title: &str, rows: &[BiasRow]) -> String {
    let mut out = format!("{title}\n");
    if rows.is_empty() {
        out.push_str("  (none)\n");
        return out;
    }
    let word_w = rows
        .iter()
        .map(|r| r.word.chars().count())
        .chain([4])
        .max()
        .unwrap_or(4);
    let _ = writeln!(
        out,
        "  {:<word_w$}  {:>6}  {:>6}  {:>6}  {:>7}",
        "word", "male", "female", "ratio", "support"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "  {:<word_w$}  {:>6}  {:>6}  {:>6.3}  {:>7}",
            r.word, r.male_count, r.female_count, r.ratio, r.support
        );
    }
    out
}

#[derive(Debug, Serialize)]
struct Timing<'a> {
    command: &'a str,
    wall_clock_seconds: f64,
}

pub fn write_timing(dir: &Path, command: &str, seconds: f64) -> Result<()> {
    write_json_pretty(
        &dir.join(TIMING_JSON),
        &Timing {
            command,
            wall_clock_seconds: seconds,
        },
    )
}
