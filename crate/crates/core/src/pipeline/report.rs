//! Report types and their JSON / CSV serialization.
//!
//! The JSON layout is versioned by [`SCHEMA_VERSION`]; see
//! `docs/report-schema.md` for field meanings.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{BandMeasure, SystemSpec};
use crate::error::{Error, Result};
use crate::information::{EntropyEstimate, InformationProfile};
use crate::stats::{BandTestResult, Membership, ScoreBandSplit};

pub const SCHEMA_VERSION: u32 = 1;

/// Stated in every report so readers know how normalized values were formed.
pub const NORMALIZATION_NOTE: &str =
    "normalized = total / interior length, EOS surprisal included; empty strings report the total";

/// Run parameters recorded in the report. Paths are left out so reports do
/// not depend on where the inputs live.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSettings {
    pub order: usize,
    pub alpha: f64,
    pub max_length: usize,
    pub context_chars: usize,
    pub entropy_samples: usize,
    pub chance_samples: usize,
    pub seed: u64,
    pub alpha_test: f64,
    pub band_measure: BandMeasure,
    pub total_bin_width: f64,
    pub normalized_bin_width: f64,
    pub normalization: String,
    pub systems: Vec<SystemSpec>,
}

/// One decoded (or reference) string scored under its context.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemOutput {
    pub system: String,
    pub text: String,
    pub profile: InformationProfile,
    /// Band membership under the report's band measure.
    pub membership: Membership,
    /// `I(y) − Ĥ`.
    pub deviation: f64,
    /// Normalized information minus the mean normalized information of the
    /// samples.
    pub normalized_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextReport {
    pub id: String,
    pub ordinal: usize,
    pub prompt: String,
    /// Estimate of `H` from total information of ancestral samples.
    pub estimate: EntropyEstimate,
    /// The same samples' normalized information.
    pub normalized_estimate: EntropyEstimate,
    /// Total information of the chance-baseline samples.
    pub chance_information: Vec<f64>,
    /// Normalized information of the chance-baseline samples.
    pub chance_normalized: Vec<f64>,
    /// The reference first, then every system in configuration order.
    pub outputs: Vec<SystemOutput>,
}

impl ContextReport {
    pub fn output(&self, system: &str) -> Option<&SystemOutput> {
        self.outputs.iter().find(|o| o.system == system)
    }

    /// Estimate matching `measure`.
    pub fn band_estimate(&self, measure: BandMeasure) -> &EntropyEstimate {
        match measure {
            BandMeasure::Total => &self.estimate,
            BandMeasure::Normalized => &self.normalized_estimate,
        }
    }

    pub fn chance_values(&self, measure: BandMeasure) -> &[f64] {
        match measure {
            BandMeasure::Total => &self.chance_information,
            BandMeasure::Normalized => &self.chance_normalized,
        }
    }
}

pub fn measure_value(profile: &InformationProfile, measure: BandMeasure) -> f64 {
    match measure {
        BandMeasure::Total => profile.total,
        BandMeasure::Normalized => profile.normalized,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub index: i64,
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
}

/// Histogram with bins centered on multiples of the width: bin `k` covers
/// `[(k − ½)w, (k + ½)w)`. Only non-empty bins are listed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_width: f64,
    pub bins: Vec<Bin>,
}

pub(crate) fn bin_index(value: f64, width: f64) -> i64 {
    (value / width + 0.5).floor() as i64
}

pub(crate) fn bin_edges(index: i64, width: f64) -> (f64, f64) {
    ((index as f64 - 0.5) * width, (index as f64 + 0.5) * width)
}

impl Histogram {
    pub fn from_values(values: impl IntoIterator<Item = f64>, bin_width: f64) -> Self {
        let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
        for v in values {
            *counts.entry(bin_index(v, bin_width)).or_insert(0) += 1;
        }
        let bins = counts
            .into_iter()
            .map(|(index, count)| {
                let (lower, upper) = bin_edges(index, bin_width);
                Bin {
                    index,
                    lower,
                    upper,
                    count,
                }
            })
            .collect();
        Histogram { bin_width, bins }
    }

    pub fn total(&self) -> usize {
        self.bins.iter().map(|b| b.count).sum()
    }
}

/// Distributions of one system's outputs across contexts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemHistograms {
    pub system: String,
    pub total: Histogram,
    pub normalized: Histogram,
    /// `I(y) − Ĥ`, binned at the total-information width.
    pub deviation: Histogram,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationSummary {
    pub system: String,
    pub count: usize,
    pub mean_deviation: f64,
    pub mean_abs_deviation: f64,
    pub inside: usize,
    pub above: usize,
    pub below: usize,
}

/// Aggregated human scores of one output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemScore {
    pub system: String,
    pub score: f64,
    /// Competition rank: tied scores share the better rank.
    pub rank: usize,
    pub ratings: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextRatings {
    pub context: String,
    /// Best first; ties keep configuration order.
    pub scores: Vec<SystemScore>,
    pub rank1: Vec<String>,
    /// The reference plus the top-ranked decoded strings used by the band
    /// test.
    pub rated_set: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreBin {
    pub index: i64,
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
    pub mean_score: f64,
}

/// Mean score per bin of total information.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    pub bin_width: f64,
    pub bins: Vec<ScoreBin>,
}

/// A test run under one pooling: either a result or the reason it failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome<T> {
    /// `"pooled"` or a system name.
    pub pooling: String,
    pub result: Option<T>,
    pub error: Option<String>,
}

impl<T> TestOutcome<T> {
    pub fn from_result(pooling: impl Into<String>, r: Result<T>) -> Self {
        let (result, error) = match r {
            Ok(v) => (Some(v), None),
            Err(e) => (None, Some(e.to_string())),
        };
        TestOutcome {
            pooling: pooling.into(),
            result,
            error,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingsAnalysis {
    pub aggregation: String,
    pub top_k: usize,
    pub contexts: Vec<ContextRatings>,
    /// Fraction of rated contexts where the reference holds rank 1.
    pub reference_rank1_proportion: Option<f64>,
    pub score_vs_information: ScoreTable,
    pub band_tests: Vec<TestOutcome<BandTestResult>>,
    pub score_splits: Vec<TestOutcome<ScoreBandSplit>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub settings: ReportSettings,
    pub vocabulary: Vec<String>,
    pub contexts: Vec<ContextReport>,
    /// One entry per system, then `"all"` pooling every system (not the
    /// reference).
    pub histograms: Vec<SystemHistograms>,
    pub deviations: Vec<DeviationSummary>,
    pub ratings: Option<RatingsAnalysis>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    CsvBundle,
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let report: Report = serde_json::from_str(json)?;
        if report.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidParameter(format!(
                "report schema version {} is not supported (expected {SCHEMA_VERSION})",
                report.schema_version
            )));
        }
        Ok(report)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn context(&self, id: &str) -> Option<&ContextReport> {
        self.contexts.iter().find(|c| c.id == id)
    }
}

/// Writes `report` as one JSON file, or as a directory of CSV files.
pub fn emit_report(report: &Report, format: ReportFormat, dest: &Path) -> Result<()> {
    match format {
        ReportFormat::Json => fs::write(dest, report.to_json()?).map_err(|e| Error::io(dest, e)),
        ReportFormat::CsvBundle => write_csv_bundle(report, dest),
    }
}

fn csv_writer(dir: &Path, name: &str) -> Result<csv::Writer<fs::File>> {
    let path = dir.join(name);
    let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn membership_name(m: Membership) -> &'static str {
    match m {
        Membership::Inside => "inside",
        Membership::Above => "above",
        Membership::Below => "below",
    }
}

fn write_histograms(dir: &Path, name: &str, report: &Report, pick: fn(&SystemHistograms) -> &Histogram) -> Result<()> {
    let mut w = csv_writer(dir, name)?;
    w.write_record(["system", "bin", "lower", "upper", "count"])?;
    for h in &report.histograms {
        let hist = pick(h);
        for b in &hist.bins {
            w.write_record([
                h.system.clone(),
                b.index.to_string(),
                b.lower.to_string(),
                b.upper.to_string(),
                b.count.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io(dir.join(name), e))
}

fn write_csv_bundle(report: &Report, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_histograms(dir, "histogram_total.csv", report, |h| &h.total)?;
    write_histograms(dir, "histogram_normalized.csv", report, |h| &h.normalized)?;
    write_histograms(dir, "histogram_deviation.csv", report, |h| &h.deviation)?;

    let mut w = csv_writer(dir, "deviations.csv")?;
    w.write_record([
        "context_id", "system", "text", "information", "normalized", "entropy_estimate",
        "std_dev", "deviation", "normalized_deviation", "membership",
    ])?;
    for c in &report.contexts {
        for o in &c.outputs {
            w.write_record([
                c.id.clone(),
                o.system.clone(),
                o.text.clone(),
                o.profile.total.to_string(),
                o.profile.normalized.to_string(),
                c.estimate.mean.to_string(),
                c.estimate.std_dev.to_string(),
                o.deviation.to_string(),
                o.normalized_deviation.to_string(),
                membership_name(o.membership).to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io(dir, e))?;

    let Some(ratings) = &report.ratings else {
        return Ok(());
    };
    let mut w = csv_writer(dir, "score_vs_information.csv")?;
    w.write_record(["bin", "lower", "upper", "count", "mean_score"])?;
    for b in &ratings.score_vs_information.bins {
        w.write_record([
            b.index.to_string(),
            b.lower.to_string(),
            b.upper.to_string(),
            b.count.to_string(),
            b.mean_score.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(dir, e))?;

    let mut w = csv_writer(dir, "band_split.csv")?;
    w.write_record([
        "pooling", "inside_n", "inside_mean", "outside_n", "outside_mean", "above_n", "below_n",
        "t", "dof", "p_value", "reject", "note",
    ])?;
    let mean = |v: &[f64]| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
    for o in &ratings.score_splits {
        let row = match &o.result {
            Some(s) => [
                o.pooling.clone(),
                s.inside.len().to_string(),
                opt(mean(&s.inside)),
                s.outside.len().to_string(),
                opt(mean(&s.outside)),
                s.above.len().to_string(),
                s.below.len().to_string(),
                opt(s.test.map(|t| t.t)),
                opt(s.test.map(|t| t.dof)),
                opt(s.test.map(|t| t.p_value)),
                opt(s.reject),
                s.omitted.clone().unwrap_or_default(),
            ],
            None => {
                let mut row: [String; 12] = Default::default();
                row[0] = o.pooling.clone();
                row[11] = o.error.clone().unwrap_or_default();
                row
            }
        };
        w.write_record(row)?;
    }
    w.flush().map_err(|e| Error::io(dir, e))?;

    let mut w = csv_writer(dir, "band_test.csv")?;
    w.write_record(["pooling", "context_id", "observed", "chance", "t", "dof", "p_value", "reject", "note"])?;
    for o in &ratings.band_tests {
        match &o.result {
            Some(r) => {
                for c in &r.contexts {
                    w.write_record([
                        o.pooling.clone(),
                        c.context.clone(),
                        c.observed.to_string(),
                        c.chance.to_string(),
                        r.t.to_string(),
                        r.dof.to_string(),
                        r.p_value.to_string(),
                        r.reject.to_string(),
                        String::new(),
                    ])?;
                }
            }
            None => {
                let note = o.error.clone().unwrap_or_default();
                w.write_record([o.pooling.as_str(), "", "", "", "", "", "", "", note.as_str()])?;
            }
        }
    }
    w.flush().map_err(|e| Error::io(dir, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centered_binning() {
        let h = Histogram::from_values(std::iter::repeat_n(2.0, 10), 0.5);
        assert_eq!(h.bins.len(), 1);
        let b = h.bins[0];
        assert_eq!((b.lower, b.upper, b.count), (1.75, 2.25, 10));
        let h = Histogram::from_values([-0.1, 0.1, 0.25, 0.9, -1.0], 0.5);
        let got: Vec<(i64, usize)> = h.bins.iter().map(|b| (b.index, b.count)).collect();
        assert_eq!(got, [(-2, 1), (0, 2), (1, 1), (2, 1)]);
        assert_eq!(h.total(), 5);
    }
}
