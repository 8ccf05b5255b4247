//! Error metrics in mph, reference predictors and per-day trace export.

use std::fmt;
use std::fs;
use std::path::Path;

use ndarray::{s, Array2, ArrayView2};

use crate::data::{NormalizationSpec, SpeedSeries, WindowSample, HORIZON};
use crate::error::{Error, Result};
use crate::model::GltModel;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub rmse: f64,
    /// Percent, over entries with a positive target.
    pub mape: f64,
    pub mae: f64,
    /// Entries entering RMSE and MAE.
    pub n: usize,
    /// Zero-target entries left out of MAPE.
    pub skipped_zero_targets: usize,
}

impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "rmse_mph={:.6} mape_pct={:.6} mae_mph={:.6} n={} skipped={}",
            self.rmse, self.mape, self.mae, self.n, self.skipped_zero_targets
        )
    }
}

impl MetricsReport {
    /// `key=value` lines, one metric per line.
    pub fn to_key_values(&self) -> String {
        format!(
            "rmse_mph={}\nmape_pct={}\nmae_mph={}\nn={}\nskipped={}\n",
            self.rmse, self.mape, self.mae, self.n, self.skipped_zero_targets
        )
    }
}

pub fn compute_metrics(predictions: ArrayView2<'_, f64>, targets: ArrayView2<'_, f64>) -> Result<MetricsReport> {
    if predictions.dim() != targets.dim() {
        return Err(Error::ShapeMismatch(format!(
            "predictions {:?} vs targets {:?}",
            predictions.dim(),
            targets.dim()
        )));
    }
    if predictions.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let (mut sq, mut abs, mut pct) = (0.0, 0.0, 0.0);
    let mut positive = 0usize;
    for (&p, &y) in predictions.iter().zip(targets) {
        let err = (y - p).abs();
        sq += err * err;
        abs += err;
        if y > 0.0 {
            pct += err / y;
            positive += 1;
        }
    }
    if positive == 0 {
        return Err(Error::AllTargetsZero);
    }
    let n = predictions.len();
    Ok(MetricsReport {
        rmse: (sq / n as f64).sqrt(),
        mape: 100.0 * pct / positive as f64,
        mae: abs / n as f64,
        n,
        skipped_zero_targets: n - positive,
    })
}

fn targets_of(windows: &[WindowSample]) -> Array2<f64> {
    let n = windows.first().map_or(0, |w| w.target.len());
    let mut out = Array2::zeros((windows.len(), n));
    for (mut row, w) in out.rows_mut().into_iter().zip(windows) {
        row.assign(&w.target);
    }
    out
}

/// Model predictions in mph for windows given in mph.
pub fn predict_mph(model: &GltModel, windows: &[WindowSample], normalization: &NormalizationSpec) -> Result<Array2<f64>> {
    normalization.validate()?;
    let mut out = Array2::zeros((windows.len(), model.num_links()));
    for (mut row, w) in out.rows_mut().into_iter().zip(windows) {
        let inputs = w.inputs.mapv(|v| normalization.to_model(v));
        row.assign(&model.forward(inputs.view())?.mapv(|v| normalization.to_mph(v)));
    }
    Ok(out)
}

/// Metrics of the model on windows cut from an mph series.
pub fn evaluate(model: &GltModel, windows: &[WindowSample], normalization: &NormalizationSpec) -> Result<MetricsReport> {
    if windows.is_empty() {
        return Err(Error::EmptyDataset("no evaluation windows".into()));
    }
    let preds = predict_mph(model, windows, normalization)?;
    compute_metrics(preds.view(), targets_of(windows).view())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    /// Next value equals the last observed value.
    Persistence,
    /// Training-set mean for the target's time-of-day slot.
    HistoricalMean,
}

/// Per time-of-day slot mean of each link over `train` (`steps_per_day × N`).
pub fn historical_means(train: &SpeedSeries) -> Result<Array2<f64>> {
    train.require_full_day()?;
    let spd = train.steps_per_day();
    let mut sums = Array2::<f64>::zeros((spd, train.num_links()));
    let mut counts = vec![0usize; spd];
    for t in 0..train.len() {
        let slot = train.time_of_day(t);
        counts[slot] += 1;
        let mut row = sums.row_mut(slot);
        row += &train.row(t);
    }
    for (mut row, &c) in sums.rows_mut().into_iter().zip(&counts) {
        row /= c as f64;
    }
    Ok(sums)
}

/// Reference predictions for windows cut from `source`.
pub fn baseline_predict(kind: BaselineKind, train: &SpeedSeries, source: &SpeedSeries, windows: &[WindowSample]) -> Result<Array2<f64>> {
    let n = source.num_links();
    let mut out = Array2::zeros((windows.len(), n));
    match kind {
        BaselineKind::Persistence => {
            for (mut row, w) in out.rows_mut().into_iter().zip(windows) {
                row.assign(&w.inputs.row(w.inputs.nrows() - 1));
            }
        }
        BaselineKind::HistoricalMean => {
            if train.steps_per_day() != source.steps_per_day() || train.num_links() != n {
                return Err(Error::ShapeMismatch("training series does not match the source grid".into()));
            }
            let means = historical_means(train)?;
            for (mut row, w) in out.rows_mut().into_iter().zip(windows) {
                row.assign(&means.row(source.time_of_day(w.t_index + HORIZON)));
            }
        }
    }
    Ok(out)
}

pub fn evaluate_baseline(kind: BaselineKind, train: &SpeedSeries, source: &SpeedSeries, windows: &[WindowSample]) -> Result<MetricsReport> {
    if windows.is_empty() {
        return Err(Error::EmptyDataset("no evaluation windows".into()));
    }
    let preds = baseline_predict(kind, train, source, windows)?;
    compute_metrics(preds.view(), targets_of(windows).view())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub time_step: usize,
    pub ground_truth_mph: f64,
    pub predicted_mph: f64,
}

/// One-step-ahead predictions for link `link` over every step of day `day`
/// (days counted from the start of the series' first day). Each prediction
/// uses the `window` rows before it, so the day must start at least
/// `window` rows into the series.
pub fn trace_day(
    model: &GltModel,
    series: &SpeedSeries,
    normalization: &NormalizationSpec,
    window: usize,
    link: usize,
    day: usize,
) -> Result<Vec<TracePoint>> {
    let n = series.num_links();
    if link >= n {
        return Err(Error::BadLink { link, n });
    }
    let spd = series.steps_per_day();
    let first = (day * spd).checked_sub(series.start_index()).ok_or(Error::BadDay(day))?;
    if window == 0 || first < window || first + spd > series.len() {
        return Err(Error::BadDay(day));
    }
    (0..spd)
        .map(|slot| {
            let row = first + slot;
            let inputs = series
                .values()
                .slice(s![row - window..row, ..])
                .mapv(|v| normalization.to_model(v));
            let pred = model.forward(inputs.view())?[link];
            Ok(TracePoint {
                time_step: slot,
                ground_truth_mph: series.values()[[row, link]],
                predicted_mph: normalization.to_mph(pred),
            })
        })
        .collect()
}

/// Writes `time_step,ground_truth_mph,predicted_mph` rows for one link and day.
pub fn export_trace(
    model: &GltModel,
    series: &SpeedSeries,
    normalization: &NormalizationSpec,
    window: usize,
    link: usize,
    day: usize,
    path: impl AsRef<Path>,
) -> Result<Vec<TracePoint>> {
    let points = trace_day(model, series, normalization, window, link, day)?;
    let mut out = String::from("time_step,ground_truth_mph,predicted_mph\n");
    for p in &points {
        out.push_str(&format!("{},{},{}\n", p.time_step, p.ground_truth_mph, p.predicted_mph));
    }
    let path = path.as_ref();
    fs::write(path, out).map_err(|e| Error::io(path, e))?;
    Ok(points)
}

pub fn read_trace(path: impl AsRef<Path>) -> Result<Vec<TracePoint>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .skip(1)
        .map(|(idx, line)| {
            let bad = || Error::MalformedCsv {
                line: idx + 1,
                reason: format!("bad trace row {line:?}"),
            };
            let cells: Vec<&str> = line.split(',').collect();
            match cells.as_slice() {
                [t, g, p] => Ok(TracePoint {
                    time_step: t.parse().map_err(|_| bad())?,
                    ground_truth_mph: g.parse().map_err(|_| bad())?,
                    predicted_mph: p.parse().map_err(|_| bad())?,
                }),
                _ => Err(bad()),
            }
        })
        .collect()
}
