use std::path::Path;

use crate::csvio;
use crate::error::{Error, Result};
use crate::numeric::{fmt_f64, CompensatedSum};

pub const MAE_HEADER: &str = "mae,accuracy";
pub const STATS_HEADER: &str = "method,n,mean,median,q1,q3,whisker_low,whisker_high";

/// Recall accuracy as a function of the allowed frame error.
#[derive(Debug, Clone, PartialEq)]
pub struct MaeCurve {
    pub points: Vec<(usize, f64)>,
}

impl MaeCurve {
    pub fn accuracy(&self, mae: usize) -> Option<f64> {
        self.points.iter().find(|(m, _)| *m == mae).map(|&(_, a)| a)
    }

    pub fn is_monotone(&self) -> bool {
        self.points.windows(2).all(|w| w[0].1 <= w[1].1)
    }
}

/// `curve[m]` is the fraction of queries whose predicted frame lies within
/// `m` frames of the true one, for `m = 0..=max_mae`.
pub fn mae_accuracy(predicted: &[usize], truth: &[usize], max_mae: usize) -> Result<MaeCurve> {
    if predicted.len() != truth.len() {
        return Err(Error::LengthMismatch(predicted.len(), truth.len()));
    }
    if predicted.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut hist = vec![0usize; max_mae + 1];
    for (&p, &t) in predicted.iter().zip(truth) {
        let d = p.abs_diff(t);
        if d <= max_mae {
            hist[d] += 1;
        }
    }
    let n = predicted.len() as f64;
    let mut acc = 0;
    let points = hist
        .iter()
        .enumerate()
        .map(|(m, &c)| {
            acc += c;
            (m, acc as f64 / n)
        })
        .collect();
    Ok(MaeCurve { points })
}

/// Box-plot summary of positioning errors in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorStats {
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
}

/// Quantile of sorted data, interpolating linearly at position `(n-1)·p`.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = (sorted.len() - 1) as f64 * p;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Mean, quartiles and whiskers at 1.5 IQR clipped to the data range.
pub fn error_stats(errors: &[f64]) -> Result<ErrorStats> {
    if errors.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !errors.iter().all(|e| e.is_finite()) {
        return Err(Error::NonFinite("positioning errors"));
    }
    let mut s = errors.to_vec();
    s.sort_by(f64::total_cmp);
    let sum: CompensatedSum = s.iter().copied().collect();
    let (q1, median, q3) = (quantile(&s, 0.25), quantile(&s, 0.5), quantile(&s, 0.75));
    let iqr = q3 - q1;
    Ok(ErrorStats {
        n: s.len(),
        mean: sum.value() / s.len() as f64,
        median,
        q1,
        q3,
        whisker_low: (q1 - 1.5 * iqr).max(s[0]),
        whisker_high: (q3 + 1.5 * iqr).min(s[s.len() - 1]),
    })
}

pub fn write_mae_curve(path: &Path, curve: &MaeCurve) -> Result<()> {
    let rows: Vec<Vec<String>> = curve
        .points
        .iter()
        .map(|&(m, a)| vec![m.to_string(), fmt_f64(a)])
        .collect();
    csvio::write_table(path, MAE_HEADER, &rows)
}

pub fn read_mae_curve(path: &Path) -> Result<MaeCurve> {
    const WHAT: &str = "MAE curve";
    let points = csvio::read_table(WHAT, path, MAE_HEADER)?
        .iter()
        .map(|r| Ok((csvio::parse_usize(WHAT, &r[0])?, csvio::parse_f64(WHAT, &r[1])?)))
        .collect::<Result<_>>()?;
    Ok(MaeCurve { points })
}

pub fn write_error_stats(path: &Path, stats: &[(String, ErrorStats)]) -> Result<()> {
    let rows = stats
        .iter()
        .map(|(name, s)| {
            csvio::check_field("error stats", name)?;
            let mut row = vec![name.clone(), s.n.to_string()];
            row.extend(
                [s.mean, s.median, s.q1, s.q3, s.whisker_low, s.whisker_high]
                    .into_iter()
                    .map(fmt_f64),
            );
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    csvio::write_table(path, STATS_HEADER, &rows)
}

pub fn read_error_stats(path: &Path) -> Result<Vec<(String, ErrorStats)>> {
    const WHAT: &str = "error stats";
    csvio::read_table(WHAT, path, STATS_HEADER)?
        .iter()
        .map(|r| {
            let f = |i: usize| csvio::parse_f64(WHAT, &r[i]);
            Ok((
                r[0].clone(),
                ErrorStats {
                    n: csvio::parse_usize(WHAT, &r[1])?,
                    mean: f(2)?,
                    median: f(3)?,
                    q1: f(4)?,
                    q3: f(5)?,
                    whisker_low: f(6)?,
                    whisker_high: f(7)?,
                },
            ))
        })
        .collect()
}
