//! Human ratings: reading, aggregation, ranking, and the rating-based tests.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::REFERENCE_SYSTEM;
use super::report::{
    bin_edges, bin_index, measure_value, ContextRatings, RatingsAnalysis, Report, ScoreBin,
    ScoreTable, SystemScore, TestOutcome,
};
use crate::error::{Error, Result};
use crate::stats::{band_vs_chance_test, score_band_split, BandContext, ScoredInformation};

/// Highest score a rater can give.
pub const MAX_SCORE: u8 = 7;
/// Decoded strings joining the reference in the band test's rated set.
pub const RATED_TOP_K: usize = 3;

pub const AGGREGATION_NOTE: &str =
    "median across raters per criterion, then mean across criteria; ties share the best rank";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingsRecord {
    pub context_id: String,
    pub system: String,
    pub criterion: String,
    pub rater_id: String,
    pub score: u8,
}

const COLUMNS: [&str; 5] = ["context_id", "system", "criterion", "rater_id", "score"];

/// Reads a ratings CSV with a header naming the five columns in any order.
pub fn read_ratings(path: &Path) -> Result<Vec<RatingsRecord>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_ratings(file, &path.display().to_string())
}

pub fn parse_ratings<R: std::io::Read>(reader: R, origin: &str) -> Result<Vec<RatingsRecord>> {
    let err = |line: usize, message: String| Error::Parse {
        path: origin.to_string(),
        line,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let header = rdr.headers().map_err(|e| err(1, e.to_string()))?.clone();
    let mut index = [0usize; 5];
    for (slot, name) in index.iter_mut().zip(COLUMNS) {
        *slot = header
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| err(1, format!("missing column {name:?}")))?;
    }
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            err(line, e.to_string())
        })?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        if row.len() != header.len() {
            return Err(err(line, format!("expected {} fields, found {}", header.len(), row.len())));
        }
        let field = |i: usize| row[index[i]].trim().to_string();
        let raw = field(4);
        let score: u8 = raw
            .parse()
            .ok()
            .filter(|&s| s <= MAX_SCORE)
            .ok_or_else(|| err(line, format!("score must be an integer from 0 to {MAX_SCORE}, got {raw:?}")))?;
        out.push(RatingsRecord {
            context_id: field(0),
            system: field(1),
            criterion: field(2),
            rater_id: field(3),
            score,
        });
    }
    Ok(out)
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// Competition ranks of `scores` (higher is better).
pub fn competition_ranks(scores: &[f64]) -> Vec<usize> {
    scores
        .iter()
        .map(|s| 1 + scores.iter().filter(|o| *o > s).count())
        .collect()
}

/// Adds aggregated scores, ranks, and the rating-based analyses to a copy of
/// `report`. Information values are left untouched.
pub fn join_ratings(report: &Report, ratings: &[RatingsRecord]) -> Result<Report> {
    // context -> system -> criterion -> scores
    type Grouped = BTreeMap<String, BTreeMap<String, BTreeMap<String, Vec<f64>>>>;
    let mut grouped: Grouped = BTreeMap::new();
    for r in ratings {
        let ctx = report
            .context(&r.context_id)
            .ok_or_else(|| Error::UnknownContext(r.context_id.clone()))?;
        if ctx.output(&r.system).is_none() {
            return Err(Error::UnknownSystem {
                context: r.context_id.clone(),
                system: r.system.clone(),
            });
        }
        grouped
            .entry(r.context_id.clone())
            .or_default()
            .entry(r.system.clone())
            .or_default()
            .entry(r.criterion.clone())
            .or_default()
            .push(f64::from(r.score));
    }

    let measure = report.settings.band_measure;
    let alpha = report.settings.alpha_test;
    let mut contexts = Vec::new();
    let mut scored: Vec<(String, f64, ScoredInformation)> = Vec::new();
    let mut pooled_band = Vec::new();
    let mut reference_rank1 = (0usize, 0usize);

    // Contexts in report order so the analysis does not depend on CSV order.
    for ctx in &report.contexts {
        let Some(by_system) = grouped.get_mut(&ctx.id) else {
            continue;
        };
        let mut scores: Vec<SystemScore> = Vec::new();
        for out in &ctx.outputs {
            let Some(criteria) = by_system.get_mut(&out.system) else {
                continue;
            };
            let ratings = criteria.values().map(Vec::len).sum();
            let per_criterion: Vec<f64> = criteria.values_mut().map(|v| median(v)).collect();
            let score = per_criterion.iter().sum::<f64>() / per_criterion.len() as f64;
            scores.push(SystemScore {
                system: out.system.clone(),
                score,
                rank: 0,
                ratings,
            });
        }
        let ranks = competition_ranks(&scores.iter().map(|s| s.score).collect::<Vec<_>>());
        for (s, r) in scores.iter_mut().zip(ranks) {
            s.rank = r;
        }
        // Stable sort keeps configuration order among ties.
        scores.sort_by_key(|s| s.rank);

        let rank1: Vec<String> = scores.iter().filter(|s| s.rank == 1).map(|s| s.system.clone()).collect();
        if scores.iter().any(|s| s.system == REFERENCE_SYSTEM) {
            reference_rank1.1 += 1;
            reference_rank1.0 += usize::from(rank1.iter().any(|s| s == REFERENCE_SYSTEM));
        }
        let mut rated_set: Vec<String> = scores
            .iter()
            .filter(|s| s.system == REFERENCE_SYSTEM)
            .map(|s| s.system.clone())
            .collect();
        rated_set.extend(
            scores
                .iter()
                .filter(|s| s.system != REFERENCE_SYSTEM)
                .take(RATED_TOP_K)
                .map(|s| s.system.clone()),
        );

        let estimate = ctx.band_estimate(measure);
        for s in &scores {
            let out = ctx.output(&s.system).expect("validated above");
            let value = measure_value(&out.profile, measure);
            scored.push((s.system.clone(), out.profile.total, ScoredInformation::new(value, s.score, estimate)));
        }
        pooled_band.push(BandContext {
            context: ctx.id.clone(),
            rated: rated_set
                .iter()
                .map(|s| measure_value(&ctx.output(s).expect("validated above").profile, measure))
                .collect(),
            samples: ctx.chance_values(measure).to_vec(),
            estimate: *estimate,
        });
        contexts.push(ContextRatings {
            context: ctx.id.clone(),
            scores,
            rank1,
            rated_set,
        });
    }

    let mut band_tests = vec![TestOutcome::from_result("pooled", band_vs_chance_test(&pooled_band, alpha))];
    let mut score_splits = vec![TestOutcome::from_result(
        "pooled",
        score_band_split(&scored.iter().map(|s| s.2).collect::<Vec<_>>(), alpha),
    )];
    let system_names = report.settings.systems.iter().map(|s| s.name.as_str());
    for system in std::iter::once(REFERENCE_SYSTEM).chain(system_names) {
        let per_context: Vec<BandContext> = report
            .contexts
            .iter()
            .filter(|c| contexts.iter().any(|r| r.context == c.id && r.scores.iter().any(|s| s.system == system)))
            .map(|c| BandContext {
                context: c.id.clone(),
                rated: vec![measure_value(&c.output(system).expect("rated").profile, measure)],
                samples: c.chance_values(measure).to_vec(),
                estimate: *c.band_estimate(measure),
            })
            .collect();
        band_tests.push(TestOutcome::from_result(system, band_vs_chance_test(&per_context, alpha)));
        let items: Vec<ScoredInformation> = scored.iter().filter(|s| s.0 == system).map(|s| s.2).collect();
        score_splits.push(TestOutcome::from_result(system, score_band_split(&items, alpha)));
    }

    let score_vs_information = score_table(
        scored.iter().map(|(_, total, s)| (*total, s.score)),
        report.settings.total_bin_width,
    );
    let mut joined = report.clone();
    joined.ratings = Some(RatingsAnalysis {
        aggregation: AGGREGATION_NOTE.to_string(),
        top_k: RATED_TOP_K,
        contexts,
        reference_rank1_proportion: (reference_rank1.1 > 0)
            .then(|| reference_rank1.0 as f64 / reference_rank1.1 as f64),
        score_vs_information,
        band_tests,
        score_splits,
    });
    Ok(joined)
}

/// Mean score per centered bin of information. The result does not depend
/// on the order of `points`.
pub fn score_table(points: impl IntoIterator<Item = (f64, f64)>, bin_width: f64) -> ScoreTable {
    let mut bins: BTreeMap<i64, Vec<f64>> = BTreeMap::new();
    for (info, score) in points {
        bins.entry(bin_index(info, bin_width)).or_default().push(score);
    }
    let bins = bins
        .into_iter()
        .map(|(index, mut scores)| {
            // Sorted so the floating-point sum is order independent.
            scores.sort_by(f64::total_cmp);
            let (lower, upper) = bin_edges(index, bin_width);
            ScoreBin {
                index,
                lower,
                upper,
                count: scores.len(),
                mean_score: scores.iter().sum::<f64>() / scores.len() as f64,
            }
        })
        .collect();
    ScoreTable { bin_width, bins }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_share_ties() {
        assert_eq!(competition_ranks(&[7.0, 3.0]), [1, 2]);
        assert_eq!(competition_ranks(&[7.0, 7.0, 3.0]), [1, 1, 3]);
        assert_eq!(competition_ranks(&[2.0, 5.0, 5.0, 1.0]), [3, 1, 1, 4]);
    }

    #[test]
    fn median_handles_even_counts() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 7.0]), 3.0);
    }

    #[test]
    fn parse_reports_bad_lines() {
        let ok = "context_id,system,criterion,rater_id,score\nc0,greedy,fluency,r1,5\n";
        let recs = parse_ratings(ok.as_bytes(), "r.csv").unwrap();
        assert_eq!(recs[0].score, 5);
        assert_eq!(recs[0].system, "greedy");

        let reordered = "score,rater_id,context_id,system,criterion\n3,r,c1,mbr,coherence\n";
        assert_eq!(parse_ratings(reordered.as_bytes(), "r.csv").unwrap()[0].context_id, "c1");

        let bad = "context_id,system,criterion,rater_id,score\nc0,greedy,fluency,r1,5\nc0,greedy,fluency,r2,9\n";
        let e = parse_ratings(bad.as_bytes(), "r.csv").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }), "{e}");
        let short = "context_id,system,criterion,rater_id,score\nc0,greedy\n";
        assert!(matches!(parse_ratings(short.as_bytes(), "r.csv"), Err(Error::Parse { line: 2, .. })));
        let missing = "context_id,system,rater_id,score\n";
        assert!(parse_ratings(missing.as_bytes(), "r.csv").is_err());
    }

    #[test]
    fn score_table_is_order_free() {
        let pts = [(1.0, 3.0), (1.2, 5.0), (4.1, 7.0), (0.9, 0.1)];
        let mut rev = pts;
        rev.reverse();
        assert_eq!(score_table(pts, 2.0), score_table(rev, 2.0));
        let t = score_table(pts, 2.0);
        // [-1, 1) holds 0.9; [1, 3) holds 1.0 and 1.2; [3, 5) holds 4.1.
        let counts: Vec<usize> = t.bins.iter().map(|b| b.count).collect();
        assert_eq!(counts, [1, 2, 1]);
        assert_eq!(t.bins[1].mean_score, 4.0);
    }
}
