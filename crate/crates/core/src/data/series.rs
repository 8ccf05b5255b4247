use ndarray::{s, Array1, Array2, ArrayView1, Axis};

use crate::error::{Error, Result};

pub const MINUTES_PER_DAY: u32 = 1440;

/// Link speeds on a fixed time grid: one row per time step, one column per link.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeedSeries {
    values: Array2<f64>,
    interval_minutes: u32,
    start_index: usize,
}

impl SpeedSeries {
    /// Builds a series whose first row falls at time-of-day slot `start_index`.
    ///
    /// Requires at least two links and one time step, finite non-negative
    /// entries, and an interval that divides the day evenly. Whole-day coverage
    /// is checked by the operations that need it, since chronological splits
    /// are routinely shorter than a day.
    pub fn new(values: Array2<f64>, interval_minutes: u32, start_index: usize) -> Result<Self> {
        if interval_minutes == 0 || !MINUTES_PER_DAY.is_multiple_of(interval_minutes) {
            return Err(Error::BadShape(format!(
                "interval of {interval_minutes} minutes does not divide a day"
            )));
        }
        let (t, n) = values.dim();
        if n < 2 {
            return Err(Error::BadShape(format!("need at least 2 links, got {n}")));
        }
        if t == 0 {
            return Err(Error::TooShort("series has no time steps".into()));
        }
        let steps_per_day = (MINUTES_PER_DAY / interval_minutes) as usize;
        if start_index >= steps_per_day {
            return Err(Error::BadShape(format!(
                "start index {start_index} exceeds {steps_per_day} steps per day"
            )));
        }
        for ((row, col), &v) in values.indexed_iter() {
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("speed at row {row}, column {col}")));
            }
            if v < 0.0 {
                return Err(Error::NegativeSpeed { row, col, value: v });
            }
        }
        Ok(Self {
            values,
            interval_minutes,
            start_index,
        })
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }

    pub fn interval_minutes(&self) -> u32 {
        self.interval_minutes
    }

    pub fn start_index(&self) -> usize {
        self.start_index
    }

    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.nrows() == 0
    }

    pub fn num_links(&self) -> usize {
        self.values.ncols()
    }

    pub fn steps_per_day(&self) -> usize {
        (MINUTES_PER_DAY / self.interval_minutes) as usize
    }

    /// Time-of-day slot of row `row`.
    pub fn time_of_day(&self, row: usize) -> usize {
        (self.start_index + row) % self.steps_per_day()
    }

    pub fn row(&self, t: usize) -> ArrayView1<'_, f64> {
        self.values.row(t)
    }

    pub fn require_full_day(&self) -> Result<()> {
        if self.len() < self.steps_per_day() {
            return Err(Error::TooShort(format!(
                "{} steps is less than one day of {} steps",
                self.len(),
                self.steps_per_day()
            )));
        }
        Ok(())
    }

    /// Rows `start..end` as a new series, keeping the time-of-day alignment.
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.len() {
            return Err(Error::TooShort(format!(
                "empty or out-of-range slice {start}..{end} of {} steps",
                self.len()
            )));
        }
        Ok(Self {
            values: self.values.slice(s![start..end, ..]).to_owned(),
            interval_minutes: self.interval_minutes,
            start_index: self.time_of_day(start),
        })
    }

    fn with_values(&self, values: Array2<f64>) -> Self {
        Self {
            values,
            interval_minutes: self.interval_minutes,
            start_index: self.start_index,
        }
    }
}

/// Replaces zero readings (detector dropouts) by the link's last valid value,
/// or by the mean of its valid values when no earlier reading exists.
pub fn impute_missing(series: &SpeedSeries) -> SpeedSeries {
    let mut values = series.values.clone();
    for mut column in values.axis_iter_mut(Axis(1)) {
        let valid: Vec<f64> = column.iter().copied().filter(|&v| v > 0.0).collect();
        if valid.is_empty() {
            continue;
        }
        let mean = valid.iter().sum::<f64>() / valid.len() as f64;
        let mut last = None;
        for v in column.iter_mut() {
            if *v > 0.0 {
                last = Some(*v);
            } else {
                *v = last.unwrap_or(mean);
            }
        }
    }
    series.with_values(values)
}

/// Chronological train / validation / test partition.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSplit {
    pub train: SpeedSeries,
    pub validation: SpeedSeries,
    pub test: SpeedSeries,
    pub fractions: (f64, f64, f64),
}

impl DatasetSplit {
    pub fn lengths(&self) -> (usize, usize, usize) {
        (self.train.len(), self.validation.len(), self.test.len())
    }

    /// Stacks the three slices back into one series.
    pub fn concat(&self) -> SpeedSeries {
        let values = ndarray::concatenate(
            Axis(0),
            &[
                self.train.values.view(),
                self.validation.values.view(),
                self.test.values.view(),
            ],
        )
        .expect("slices share the link dimension");
        self.train.with_values(values)
    }
}

pub const DEFAULT_FRACTIONS: (f64, f64, f64) = (0.7, 0.2, 0.1);

/// Train gets `round(f0 * T)` rows, validation `round(f1 * T)`, test the rest.
pub fn chronological_split(series: &SpeedSeries, fractions: (f64, f64, f64)) -> Result<DatasetSplit> {
    let (a, b, c) = fractions;
    let positive = [a, b, c].iter().all(|f| f.is_finite() && *f > 0.0);
    if !positive || ((a + b + c) - 1.0).abs() > 1e-9 {
        return Err(Error::BadFractions(fractions));
    }
    let t = series.len();
    let n_train = (a * t as f64).round() as usize;
    let n_val = (b * t as f64).round() as usize;
    if n_train == 0 || n_val == 0 || n_train + n_val >= t {
        return Err(Error::TooShort(format!(
            "{t} steps cannot be split into three non-empty parts with {fractions:?}"
        )));
    }
    Ok(DatasetSplit {
        train: series.slice(0, n_train)?,
        validation: series.slice(n_train, n_train + n_val)?,
        test: series.slice(n_train + n_val, t)?,
        fractions,
    })
}

/// One supervised example: `window` consecutive rows and the row `horizon` steps later.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSample {
    pub inputs: Array2<f64>,
    pub target: Array1<f64>,
    /// Row index (within the source series) of the last input row.
    pub t_index: usize,
}

pub const DEFAULT_WINDOW: usize = 10;
pub const HORIZON: usize = 1;

pub fn make_windows(series: &SpeedSeries, window: usize, horizon: usize) -> Result<Vec<WindowSample>> {
    if window == 0 || horizon == 0 {
        return Err(Error::BadParams(format!(
            "window ({window}) and horizon ({horizon}) must be at least 1"
        )));
    }
    let t = series.len();
    if t < window + horizon {
        return Err(Error::TooShort(format!(
            "{t} steps cannot hold a window of {window} plus horizon {horizon}"
        )));
    }
    let count = t - window - horizon + 1;
    Ok((0..count)
        .map(|j| {
            let t_index = window - 1 + j;
            WindowSample {
                inputs: series.values.slice(s![j..=t_index, ..]).to_owned(),
                target: series.values.row(t_index + horizon).to_owned(),
                t_index,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NormalizationMode {
    None,
    #[default]
    MaxScale,
}

impl std::str::FromStr for NormalizationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "max_scale" => Ok(Self::MaxScale),
            other => Err(Error::BadParams(format!("unknown normalization mode {other:?}"))),
        }
    }
}

/// Maps mph to model units and back.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationSpec {
    pub mode: NormalizationMode,
    pub scale: f64,
}

impl Default for NormalizationSpec {
    fn default() -> Self {
        Self {
            mode: NormalizationMode::MaxScale,
            scale: 60.0,
        }
    }
}

impl NormalizationSpec {
    pub fn new(mode: NormalizationMode, scale: f64) -> Result<Self> {
        let spec = Self { mode, scale };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return Err(Error::BadScale(self.scale));
        }
        Ok(())
    }

    pub fn to_model(&self, mph: f64) -> f64 {
        match self.mode {
            NormalizationMode::None => mph,
            NormalizationMode::MaxScale => mph / self.scale,
        }
    }

    pub fn to_mph(&self, value: f64) -> f64 {
        match self.mode {
            NormalizationMode::None => value,
            NormalizationMode::MaxScale => value * self.scale,
        }
    }
}

pub fn normalize(series: &SpeedSeries, spec: &NormalizationSpec) -> Result<SpeedSeries> {
    spec.validate()?;
    Ok(series.with_values(series.values.mapv(|v| spec.to_model(v))))
}

/// Inverse of [`normalize`]. Negative model outputs are not speeds, so this
/// works on raw matrices rather than on [`SpeedSeries`].
pub fn denormalize(values: &Array2<f64>, spec: &NormalizationSpec) -> Result<Array2<f64>> {
    spec.validate()?;
    Ok(values.mapv(|v| spec.to_mph(v)))
}

/// Undirected road network: binary adjacency and roadway distances in miles.
#[derive(Debug, Clone, PartialEq)]
pub struct RoadNetworkSpec {
    adjacency: Array2<u8>,
    distance: Array2<f64>,
}

impl RoadNetworkSpec {
    pub fn new(adjacency: Array2<u8>, distance: Array2<f64>) -> Result<Self> {
        let n = adjacency.nrows();
        if adjacency.dim() != (n, n) || distance.dim() != (n, n) {
            return Err(Error::ShapeMismatch(format!(
                "adjacency {:?} and distance {:?} must both be square and equal",
                adjacency.dim(),
                distance.dim()
            )));
        }
        for i in 0..n {
            if adjacency[[i, i]] != 0 {
                return Err(Error::NonSymmetric(format!("adjacency diagonal at {i} is nonzero")));
            }
            if distance[[i, i]] != 0.0 {
                return Err(Error::BadParams(format!("distance diagonal at {i} is nonzero")));
            }
            for j in 0..n {
                let a = adjacency[[i, j]];
                if a > 1 {
                    return Err(Error::BadParams(format!("adjacency entry ({i},{j}) = {a} is not binary")));
                }
                if a != adjacency[[j, i]] {
                    return Err(Error::NonSymmetric(format!("adjacency ({i},{j}) != ({j},{i})")));
                }
                let d = distance[[i, j]];
                if !d.is_finite() || d < 0.0 {
                    return Err(Error::BadParams(format!("distance ({i},{j}) = {d}")));
                }
                if d != distance[[j, i]] {
                    return Err(Error::NonSymmetric(format!("distance ({i},{j}) != ({j},{i})")));
                }
                if a == 1 && d <= 0.0 {
                    return Err(Error::BadParams(format!(
                        "adjacent links ({i},{j}) need a positive distance"
                    )));
                }
            }
        }
        Ok(Self { adjacency, distance })
    }

    pub fn adjacency(&self) -> &Array2<u8> {
        &self.adjacency
    }

    pub fn distance(&self) -> &Array2<f64> {
        &self.distance
    }

    pub fn num_links(&self) -> usize {
        self.adjacency.nrows()
    }
}
