//! Entropy-band membership and Welch t-tests.
//!
//! A string is "inside" the band of a context when its information lies
//! within one estimated standard deviation of the estimated entropy. The two
//! hypothesis tests ask whether rated strings land in the band more often than
//! samples from the model, and whether strings inside the band score higher.

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};
use crate::information::{EntropyEstimate, InformationProfile};
use crate::typicality::BAND_TOLERANCE;

/// Default significance level.
pub const DEFAULT_ALPHA: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    Inside,
    /// More information than the band allows (less probable).
    Above,
    Below,
}

/// Classifies `value` against `[center − sigma, center + sigma]`, edges
/// inclusive up to [`BAND_TOLERANCE`].
pub fn classify(value: f64, center: f64, sigma: f64) -> Membership {
    if (value - center).abs() <= sigma + BAND_TOLERANCE {
        Membership::Inside
    } else if value > center {
        Membership::Above
    } else {
        Membership::Below
    }
}

/// Band membership of a string's total information.
pub fn band_membership(profile: &InformationProfile, estimate: &EntropyEstimate) -> Membership {
    classify(profile.total, estimate.mean, estimate.std_dev)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alternative {
    TwoSided,
    /// Mean of `a` exceeds mean of `b`.
    Greater,
    Less,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub t: f64,
    pub dof: f64,
    pub p_value: f64,
    pub paired: bool,
    pub alternative: Alternative,
    /// `mean(a) − mean(b)`.
    pub mean_difference: f64,
}

impl TTest {
    pub fn rejects(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// `P(T > t)` for Student's t with `dof` degrees of freedom.
pub fn t_survival(t: f64, dof: f64) -> f64 {
    if t.is_infinite() {
        return if t > 0.0 { 0.0 } else { 1.0 };
    }
    // Both tails from the same incomplete beta value so neither side loses
    // precision to cancellation.
    let tail = 0.5 * beta_reg(dof / 2.0, 0.5, dof / (dof + t * t));
    if t >= 0.0 {
        tail
    } else {
        1.0 - tail
    }
}

/// Welch's unequal-variance t-test, or the paired t-test on `a − b`.
pub fn welch_t_test(a: &[f64], b: &[f64], paired: bool, alternative: Alternative) -> Result<TTest> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "t-test needs at least 2 values per sample, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let (t, dof, mean_difference) = if paired {
        if a.len() != b.len() {
            return Err(Error::LengthMismatch {
                left: a.len(),
                right: b.len(),
            });
        }
        let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        let (mean, var) = mean_var(&diffs);
        if var == 0.0 {
            return Err(Error::DegenerateVariance);
        }
        let n = diffs.len() as f64;
        (mean / (var / n).sqrt(), n - 1.0, mean)
    } else {
        let (ma, va) = mean_var(a);
        let (mb, vb) = mean_var(b);
        if va == 0.0 && vb == 0.0 {
            return Err(Error::DegenerateVariance);
        }
        let (sa, sb) = (va / a.len() as f64, vb / b.len() as f64);
        let se2 = sa + sb;
        let dof = se2 * se2
            / (sa * sa / (a.len() as f64 - 1.0) + sb * sb / (b.len() as f64 - 1.0));
        ((ma - mb) / se2.sqrt(), dof, ma - mb)
    };
    let p_value = match alternative {
        Alternative::Greater => t_survival(t, dof),
        Alternative::Less => t_survival(-t, dof),
        Alternative::TwoSided => beta_reg(dof / 2.0, 0.5, dof / (dof + t * t)),
    };
    Ok(TTest {
        t,
        dof,
        p_value,
        paired,
        alternative,
        mean_difference,
    })
}

/// Information values of one context for the band-vs-chance comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct BandContext {
    pub context: String,
    /// Information of the rated (human-preferred) strings.
    pub rated: Vec<f64>,
    /// Information of strings sampled from the model.
    pub samples: Vec<f64>,
    pub estimate: EntropyEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextProportions {
    pub context: String,
    /// Fraction of rated strings inside the band.
    pub observed: f64,
    /// Fraction of model samples inside the band.
    pub chance: f64,
    pub rated: usize,
    pub sampled: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandTestResult {
    pub contexts: Vec<ContextProportions>,
    pub t: f64,
    pub dof: f64,
    pub p_value: f64,
    pub alpha: f64,
    pub reject: bool,
}

fn inside_fraction(values: &[f64], estimate: &EntropyEstimate) -> f64 {
    let inside = values
        .iter()
        .filter(|&&v| classify(v, estimate.mean, estimate.std_dev) == Membership::Inside)
        .count();
    inside as f64 / values.len() as f64
}

/// One-sided paired test that rated strings fall inside the band more often
/// than model samples do.
pub fn band_vs_chance_test(contexts: &[BandContext], alpha: f64) -> Result<BandTestResult> {
    if contexts.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "band test needs at least 2 contexts, got {}",
            contexts.len()
        )));
    }
    let mut rows = Vec::with_capacity(contexts.len());
    for c in contexts {
        if c.rated.is_empty() || c.samples.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "context {:?} needs at least 1 rated string and 2 samples, got {} and {}",
                c.context,
                c.rated.len(),
                c.samples.len()
            )));
        }
        rows.push(ContextProportions {
            context: c.context.clone(),
            observed: inside_fraction(&c.rated, &c.estimate),
            chance: inside_fraction(&c.samples, &c.estimate),
            rated: c.rated.len(),
            sampled: c.samples.len(),
        });
    }
    let observed: Vec<f64> = rows.iter().map(|r| r.observed).collect();
    let chance: Vec<f64> = rows.iter().map(|r| r.chance).collect();
    let test = welch_t_test(&observed, &chance, true, Alternative::Greater)?;
    Ok(BandTestResult {
        contexts: rows,
        t: test.t,
        dof: test.dof,
        p_value: test.p_value,
        alpha,
        reject: test.rejects(alpha),
    })
}

/// One scored string: its information, its score, and its context's estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredInformation {
    pub information: f64,
    pub score: f64,
    pub center: f64,
    pub sigma: f64,
}

impl ScoredInformation {
    pub fn new(information: f64, score: f64, estimate: &EntropyEstimate) -> Self {
        ScoredInformation {
            information,
            score,
            center: estimate.mean,
            sigma: estimate.std_dev,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreBandSplit {
    pub inside: Vec<f64>,
    /// `above ++ below`, in input order.
    pub outside: Vec<f64>,
    pub above: Vec<f64>,
    pub below: Vec<f64>,
    pub test: Option<TTest>,
    /// Why the test was not run, when it was not.
    pub omitted: Option<String>,
    pub alpha: f64,
    pub reject: Option<bool>,
}

/// Splits scores by band membership and tests `mean(inside) > mean(outside)`.
///
/// A cell with fewer than two scores omits the test with a reason. Constant
/// scores in both cells are an error.
pub fn score_band_split(items: &[ScoredInformation], alpha: f64) -> Result<ScoreBandSplit> {
    let (mut inside, mut outside, mut above, mut below) = (vec![], vec![], vec![], vec![]);
    for it in items {
        match classify(it.information, it.center, it.sigma) {
            Membership::Inside => inside.push(it.score),
            Membership::Above => {
                above.push(it.score);
                outside.push(it.score);
            }
            Membership::Below => {
                below.push(it.score);
                outside.push(it.score);
            }
        }
    }
    let (test, omitted) = if inside.len() < 2 || outside.len() < 2 {
        let reason = format!(
            "test needs at least 2 scores inside and outside the band, got {} and {}",
            inside.len(),
            outside.len()
        );
        (None, Some(reason))
    } else {
        (Some(welch_t_test(&inside, &outside, false, Alternative::Greater)?), None)
    };
    Ok(ScoreBandSplit {
        inside,
        outside,
        above,
        below,
        reject: test.map(|t| t.rejects(alpha)),
        test,
        omitted,
        alpha,
    })
}
