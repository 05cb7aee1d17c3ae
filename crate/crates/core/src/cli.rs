//! Command-line grammar and the six batch commands.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bias::{
    cooccurrence_table, extremes, write_bias_csv, DEFAULT_MIN_SUPPORT, DEFAULT_TOP_K,
};
use crate::corpus::{
    load_candidates, load_coco_annotations, load_gender_predictions, write_candidates,
    write_corpus, Corpus,
};
use crate::error::{Error, Result};
use crate::lexicon::{default_lexicon, load_lexicon, Lexicon};
use crate::metrics::{
    build_eval_pairs, evaluate, gender_accuracy, uniform_random_predictions, write_per_image_csv,
};
use crate::report::{
    write_timing, BiasBlock, ConfigEcho, CorpusSummary, GenderAccuracyBlock, MetricRow, RunReport,
    SplitSizes,
};
use crate::splitter::{build_splits, export_split, SplitAssignment, SplitName};
use crate::transform::{
    audit_candidates, audit_corpus, neutralize_candidates, neutralize_corpus, sai_pipeline,
    write_audit_csv,
};

const OUTPUT_FILES: &str = "\
Output files (all under --out):
  every command      report.json, report.txt, timing.json
  split              split_confident.json, split_human.json, split_nature.json
  neutralize         neutralized_annotations.json + audit_annotations.csv, or
                     neutralized_<LABEL>.json + audit_<LABEL>.csv per --candidates
  recombine          recombined_<LABEL>.json per --candidates
  evaluate           per_image_<LABEL>.csv per --candidates (with --per-image)
  bias-report        bias_table.csv
  gender-accuracy    (report only)

report.json and report.txt are byte-identical across reruns with the same
inputs; wall-clock time is kept in timing.json.";

#[derive(Debug, Parser)]
#[command(name = "capfair", version, about = "Gender-aware caption corpus analysis and evaluation", after_help = OUTPUT_FILES)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the confident/human/nature splits and export them.
    Split(Options),
    /// Replace gendered words with person/people in a corpus or candidate files.
    Neutralize(Options),
    /// Neutralize candidates, then re-insert gender from a prediction file.
    Recombine(Options),
    /// Score candidate captions against the reference corpus.
    Evaluate(Options),
    /// Word/gender co-occurrence statistics over the reference corpus.
    BiasReport(Options),
    /// Score gender predictions against the confident-split consensus.
    GenderAccuracy(Options),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Split(_) => "split",
            Command::Neutralize(_) => "neutralize",
            Command::Recombine(_) => "recombine",
            Command::Evaluate(_) => "evaluate",
            Command::BiasReport(_) => "bias-report",
            Command::GenderAccuracy(_) => "gender-accuracy",
        }
    }

    pub fn options(&self) -> &Options {
        match self {
            Command::Split(o)
            | Command::Neutralize(o)
            | Command::Recombine(o)
            | Command::Evaluate(o)
            | Command::BiasReport(o)
            | Command::GenderAccuracy(o) => o,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SplitChoice {
    Confident,
    Human,
    Nature,
    All,
}

impl SplitChoice {
    fn names(self) -> Vec<SplitName> {
        match self {
            SplitChoice::Confident => vec![SplitName::Confident],
            SplitChoice::Human => vec![SplitName::Human],
            SplitChoice::Nature => vec![SplitName::Nature],
            SplitChoice::All => SplitName::ALL.to_vec(),
        }
    }

    fn single(self) -> Option<SplitName> {
        match self {
            SplitChoice::All => None,
            other => other.names().pop(),
        }
    }

    fn as_str(self) -> &'static str {
        self.single().map_or("all", SplitName::as_str)
    }
}

/// A labeled candidate file, given as `LABEL=PATH`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateSpec {
    pub label: String,
    pub path: PathBuf,
}

fn parse_candidate_spec(s: &str) -> std::result::Result<CandidateSpec, String> {
    let (label, path) = s.split_once('=').ok_or("expected LABEL=PATH")?;
    let ok = |c: char| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.');
    if label.is_empty() || !label.chars().all(ok) {
        return Err(format!(
            "label `{label}` must be non-empty and use only [A-Za-z0-9._-]"
        ));
    }
    if path.is_empty() {
        return Err("empty path".into());
    }
    Ok(CandidateSpec {
        label: label.to_string(),
        path: PathBuf::from(path),
    })
}

#[derive(Debug, Clone, Args)]
pub struct Options {
    /// Reference captions in MSCOCO captions JSON format.
    #[arg(long, value_name = "PATH")]
    pub annotations: Option<PathBuf>,

    /// Lexicon config (TOML); the built-in lexicon when absent.
    #[arg(long, value_name = "PATH", env = "CAPFAIR_LEXICON")]
    pub lexicon: Option<PathBuf>,

    /// Candidate captions as LABEL=PATH; the label names the report row.
    #[arg(long, value_name = "LABEL=PATH", num_args = 1.., value_parser = parse_candidate_spec)]
    pub candidates: Vec<CandidateSpec>,

    /// Per-image gender predictions (CSV or JSON).
    #[arg(long, value_name = "PATH")]
    pub predictions: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = SplitChoice::All)]
    pub split: SplitChoice,

    /// Neutralize candidates and references before scoring; rows get a -N suffix.
    #[arg(long)]
    pub neutral: bool,

    #[arg(long, value_name = "N", default_value_t = DEFAULT_MIN_SUPPORT)]
    pub min_support: usize,

    /// Rows per side in the bias extremes table.
    #[arg(long, value_name = "K", default_value_t = DEFAULT_TOP_K)]
    pub top_k: usize,

    /// Also write per-image metric rows.
    #[arg(long)]
    pub per_image: bool,

    #[arg(long, value_name = "DIR", default_value = "capfair_out")]
    pub out: PathBuf,

    /// Worker threads (default: all cores).
    #[arg(long, value_name = "N")]
    pub workers: Option<usize>,

    /// Seed for the random gender-prediction baseline.
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
}

impl Options {
    fn echo(&self) -> ConfigEcho {
        let show = |p: &Path| p.display().to_string();
        ConfigEcho {
            annotations: self.annotations.as_deref().map(show),
            lexicon: self.lexicon.as_deref().map(show),
            candidates: self
                .candidates
                .iter()
                .map(|c| (c.label.clone(), show(&c.path)))
                .collect(),
            predictions: self.predictions.as_deref().map(show),
            split: self.split.as_str().to_string(),
            neutral: self.neutral,
            min_support: self.min_support,
            top_k: self.top_k,
            seed: self.seed,
            workers: self.workers,
        }
    }

    /// Checks every input path and flag value before any work starts.
    fn validate(&self) -> Result<()> {
        let inputs = self
            .annotations
            .iter()
            .chain(&self.lexicon)
            .chain(&self.predictions)
            .chain(self.candidates.iter().map(|c| &c.path));
        for path in inputs {
            if !path.is_file() {
                return Err(Error::io(
                    path,
                    std::io::Error::new(std::io::ErrorKind::NotFound, "input file not found"),
                ));
            }
        }
        let mut labels: Vec<&str> = self.candidates.iter().map(|c| c.label.as_str()).collect();
        labels.sort_unstable();
        if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument(format!(
                "candidate label `{}` given twice",
                w[0]
            )));
        }
        if self.min_support == 0 {
            return Err(Error::InvalidArgument(
                "--min-support must be at least 1".into(),
            ));
        }
        if self.workers == Some(0) {
            return Err(Error::InvalidArgument(
                "--workers must be at least 1".into(),
            ));
        }
        Ok(())
    }

    fn annotations_for(&self, command: &str) -> Result<&Path> {
        self.annotations
            .as_deref()
            .ok_or_else(|| Error::InvalidArgument(format!("{command} requires --annotations PATH")))
    }

    fn candidates_for(&self, command: &str) -> Result<&[CandidateSpec]> {
        if self.candidates.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "{command} requires --candidates LABEL=PATH"
            )));
        }
        Ok(&self.candidates)
    }

    fn load_lexicon(&self) -> Result<Lexicon> {
        match &self.lexicon {
            Some(p) => load_lexicon(p),
            None => Ok(default_lexicon()),
        }
    }
}

/// Runs one command: validates inputs, creates the output directory,
/// writes the command's files, the report pair and the timing file.
pub fn run(command: &Command) -> Result<RunReport> {
    let start = Instant::now();
    let opts = command.options();
    opts.validate()?;
    std::fs::create_dir_all(&opts.out).map_err(|e| Error::io(&opts.out, e))?;

    let mut report = RunReport::new(command.name(), opts.echo());
    match command {
        Command::Split(o) => cmd_split(o, &mut report)?,
        Command::Neutralize(o) => cmd_neutralize(o, &mut report)?,
        Command::Recombine(o) => cmd_recombine(o, &mut report)?,
        Command::Evaluate(o) => cmd_evaluate(o, &mut report)?,
        Command::BiasReport(o) => cmd_bias_report(o, &mut report)?,
        Command::GenderAccuracy(o) => cmd_gender_accuracy(o, &mut report)?,
    }
    report.write(&opts.out)?;
    write_timing(&opts.out, command.name(), start.elapsed().as_secs_f64())?;
    Ok(report)
}

fn summarize(corpus: &Corpus) -> CorpusSummary {
    CorpusSummary {
        source_label: corpus.source_label().to_string(),
        images: corpus.len(),
        captions: corpus.iter().map(|i| i.captions.len()).sum(),
    }
}

/// Loads the reference corpus and its splits, recording both in the report.
fn load_with_splits(
    o: &Options,
    command: &str,
    lex: &Lexicon,
    report: &mut RunReport,
) -> Result<(Corpus, SplitAssignment)> {
    let corpus = load_coco_annotations(o.annotations_for(command)?)?;
    let splits = build_splits(lex, &corpus);
    report.corpus = Some(summarize(&corpus));
    report.split_sizes = Some(SplitSizes::of(corpus.len(), &splits));
    Ok((corpus, splits))
}

fn cmd_split(o: &Options, report: &mut RunReport) -> Result<()> {
    let lex = o.load_lexicon()?;
    let (corpus, splits) = load_with_splits(o, "split", &lex, report)?;
    for which in o.split.names() {
        let name = format!("split_{which}.json");
        export_split(&splits, which.as_str(), &corpus, &o.out.join(&name))?;
        report.outputs.push(name);
    }
    Ok(())
}

fn cmd_neutralize(o: &Options, report: &mut RunReport) -> Result<()> {
    let lex = o.load_lexicon()?;
    if o.candidates.is_empty() {
        let corpus = load_coco_annotations(o.annotations_for("neutralize")?)?;
        let audit = audit_corpus(&lex, &corpus);
        write_corpus(
            &neutralize_corpus(&lex, &corpus),
            &o.out.join("neutralized_annotations.json"),
        )?;
        write_audit_csv(&audit, &o.out.join("audit_annotations.csv"))?;
        report.corpus = Some(summarize(&corpus));
        report.outputs.extend([
            "neutralized_annotations.json".into(),
            "audit_annotations.csv".into(),
        ]);
        report
            .notes
            .push(format!("{} words replaced in the corpus", audit.len()));
        return Ok(());
    }
    for spec in &o.candidates {
        let cands = load_candidates(&spec.path)?;
        let audit = audit_candidates(&lex, &cands);
        let (out_name, audit_name) = (
            format!("neutralized_{}.json", spec.label),
            format!("audit_{}.csv", spec.label),
        );
        write_candidates(&neutralize_candidates(&lex, &cands), &o.out.join(&out_name))?;
        write_audit_csv(&audit, &o.out.join(&audit_name))?;
        report.outputs.extend([out_name, audit_name]);
        report
            .notes
            .push(format!("{}: {} words replaced", spec.label, audit.len()));
    }
    Ok(())
}

fn cmd_recombine(o: &Options, report: &mut RunReport) -> Result<()> {
    let lex = o.load_lexicon()?;
    let specs = o.candidates_for("recombine")?;
    let pred_path = o
        .predictions
        .as_deref()
        .ok_or_else(|| Error::InvalidArgument("recombine requires --predictions PATH".into()))?;
    let predictions = load_gender_predictions(pred_path)?;
    for spec in specs {
        let cands = load_candidates(&spec.path)?;
        let gendered = cands
            .entries
            .keys()
            .filter(|id| predictions.label(**id).gender().is_some())
            .count();
        let name = format!("recombined_{}.json", spec.label);
        write_candidates(
            &sai_pipeline(&lex, &cands, &predictions),
            &o.out.join(&name),
        )?;
        report.outputs.push(name);
        report.notes.push(format!(
            "{}: {gendered} of {} captions received a gender label, the rest stay neutral",
            spec.label,
            cands.len()
        ));
    }
    Ok(())
}

fn row_label(label: &str, neutral: bool) -> String {
    if neutral && !label.ends_with("-N") {
        format!("{label}-N")
    } else {
        label.to_string()
    }
}

fn cmd_evaluate(o: &Options, report: &mut RunReport) -> Result<()> {
    let lex = o.load_lexicon()?;
    let specs = o.candidates_for("evaluate")?;
    let (corpus, splits) = load_with_splits(o, "evaluate", &lex, report)?;
    for spec in specs {
        let mut cands = load_candidates(&spec.path)?;
        let unknown: Vec<u64> = cands
            .entries
            .keys()
            .copied()
            .filter(|id| !corpus.contains(*id))
            .collect();
        if !unknown.is_empty() {
            return Err(Error::UnknownCandidateIds(unknown));
        }
        if let Some(which) = o.split.single() {
            cands.entries.retain(|id, _| splits.contains(which, *id));
        }
        if cands.is_empty() {
            return Err(Error::EmptyPairs(format!(
                "no image of `{}` falls in split {}",
                spec.label,
                o.split.as_str()
            )));
        }
        let pairs = build_eval_pairs(&cands, &corpus, o.neutral, &lex)?;
        let mut scores = evaluate(&pairs, o.per_image)?;
        let label = row_label(&spec.label, o.neutral);
        if let Some(rows) = scores.per_image.take() {
            let name = format!("per_image_{label}.csv");
            write_per_image_csv(&rows, &o.out.join(&name))?;
            report.outputs.push(name);
        }
        report.metrics.push(MetricRow {
            label,
            split: o.split.as_str().to_string(),
            neutral: o.neutral,
            scores,
        });
    }
    Ok(())
}

fn cmd_bias_report(o: &Options, report: &mut RunReport) -> Result<()> {
    let lex = o.load_lexicon()?;
    let (corpus, splits) = load_with_splits(o, "bias-report", &lex, report)?;
    let corpus = match o.split.single() {
        Some(which) => corpus.filter(|id| splits.contains(which, id)),
        None => corpus,
    };
    let rows = cooccurrence_table(&lex, &corpus, o.min_support)?;
    write_bias_csv(&rows, &o.out.join("bias_table.csv"))?;
    if rows.is_empty() {
        let msg = "no word co-occurs with a gendered word at the given support; the corpus may be neutralized";
        log::warn!("{msg}");
        report.notes.push(msg.to_string());
    }
    let (most_male, most_female) = extremes(&rows, o.top_k);
    report.bias = Some(BiasBlock {
        csv: "bias_table.csv".into(),
        rows: rows.len(),
        min_support: o.min_support,
        most_male,
        most_female,
    });
    report.outputs.push("bias_table.csv".into());
    Ok(())
}

fn cmd_gender_accuracy(o: &Options, report: &mut RunReport) -> Result<()> {
    if o.predictions.is_none() && o.seed.is_none() {
        return Err(Error::InvalidArgument(
            "gender-accuracy requires --predictions PATH and/or --seed N".into(),
        ));
    }
    let lex = o.load_lexicon()?;
    let (_, splits) = load_with_splits(o, "gender-accuracy", &lex, report)?;
    let predictions = match &o.predictions {
        Some(p) => Some(gender_accuracy(&load_gender_predictions(p)?, &splits)?),
        None => None,
    };
    let random_baseline = match o.seed {
        Some(seed) => Some(gender_accuracy(
            &uniform_random_predictions(&splits, seed),
            &splits,
        )?),
        None => None,
    };
    report.gender_accuracy = Some(GenderAccuracyBlock {
        predictions,
        random_baseline,
        seed: o.seed,
    });
    Ok(())
}
