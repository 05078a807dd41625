//! Growth reports: a measured series over a schedule with a log2 fit.

use std::io::Write;

use bilab_core::fieldgrid::Grid;
use bilab_core::fit::{fit_line, LineFit};
use serde::Serialize;

use crate::error::{param, ExpError, Result};

/// Largest tolerated deviation from the fitted line, in log2 units.
pub const MAX_RESIDUAL: f64 = 0.15;

/// Smallest schedule accepted for a fit.
pub const MIN_POINTS: usize = 4;

/// How the schedule enters the fit: `log2 value` against the step index or against `log2 step`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Abscissa {
    Index,
    Log2,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Expectation {
    /// `|slope - target| <= tol`.
    Near { target: f64, tol: f64 },
    /// `slope <= bound`.
    AtMost { bound: f64 },
}

impl Expectation {
    pub fn holds(&self, slope: f64) -> bool {
        match *self {
            Expectation::Near { target, tol } => (slope - target).abs() <= tol,
            Expectation::AtMost { bound } => slope <= bound,
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            Expectation::Near { target, tol } => format!("slope {target} +- {tol}"),
            Expectation::AtMost { bound } => format!("slope <= {bound}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
    /// The fit residual exceeds [`MAX_RESIDUAL`].
    Inconclusive,
    /// The parameters sit exactly on a threshold; no verdict is given.
    Borderline,
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Outcome::Pass => "pass",
            Outcome::Fail => "fail",
            Outcome::Inconclusive => "inconclusive",
            Outcome::Borderline => "borderline",
        })
    }
}

/// Named auxiliary series aligned with the schedule.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Series {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthReport {
    pub schema: u32,
    pub experiment: String,
    /// Name of the schedule parameter (`k`, `j`, `R`, `X`).
    pub parameter: String,
    pub abscissa: Abscissa,
    pub schedule: Vec<f64>,
    /// Measured quantity per schedule point.
    pub values: Vec<f64>,
    pub fit: LineFit,
    pub slope: f64,
    pub predicted_slope: f64,
    pub expectation: Expectation,
    /// Max deviation of `log2 value` from the fitted line.
    pub residual: f64,
    pub outcome: Outcome,
    pub grid: Option<Grid>,
    pub seeds: Vec<u64>,
    pub aux: Vec<Series>,
    pub notes: Vec<String>,
}

impl GrowthReport {
    /// Fits `log2 values` and decides the outcome.
    #[allow(clippy::too_many_arguments)]
    pub fn build(
        experiment: impl Into<String>,
        parameter: impl Into<String>,
        abscissa: Abscissa,
        schedule: Vec<f64>,
        values: Vec<f64>,
        predicted_slope: f64,
        expectation: Expectation,
    ) -> Result<Self> {
        if schedule.len() != values.len() {
            return param("schedule and values differ in length");
        }
        if schedule.len() < MIN_POINTS {
            return param(format!("a growth fit needs at least {MIN_POINTS} points, got {}", schedule.len()));
        }
        if let Some(v) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(ExpError::Lab(bilab_core::LabError::Degenerate(format!("measured value {v} cannot enter a log fit"))));
        }
        let xs: Vec<f64> = match abscissa {
            Abscissa::Index => schedule.clone(),
            Abscissa::Log2 => {
                if schedule.iter().any(|s| *s <= 0.0) {
                    return param("log2 abscissa needs a positive schedule");
                }
                schedule.iter().map(|s| s.log2()).collect()
            }
        };
        let ys: Vec<f64> = values.iter().map(|v| v.log2()).collect();
        let fit = fit_line(&xs, &ys)?;
        let residual = fit.max_deviation;
        let outcome = if residual > MAX_RESIDUAL {
            Outcome::Inconclusive
        } else if expectation.holds(fit.slope) {
            Outcome::Pass
        } else {
            Outcome::Fail
        };
        Ok(Self {
            schema: 1,
            experiment: experiment.into(),
            parameter: parameter.into(),
            abscissa,
            schedule,
            values,
            slope: fit.slope,
            fit,
            predicted_slope,
            expectation,
            residual,
            outcome,
            grid: None,
            seeds: Vec::new(),
            aux: Vec::new(),
            notes: Vec::new(),
        })
    }

    pub fn passed(&self) -> bool {
        self.outcome == Outcome::Pass
    }

    pub fn aux(&self, name: &str) -> Option<&[f64]> {
        self.aux.iter().find(|s| s.name == name).map(|s| s.values.as_slice())
    }

    pub(crate) fn push_aux(&mut self, name: &str, values: Vec<f64>) {
        self.aux.push(Series { name: name.into(), values });
    }

    /// Raw `(step, value)` pairs.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let io = |e: csv::Error| ExpError::Lab(bilab_core::LabError::Io(e.to_string()));
        wr.write_record(["step", "value"]).map_err(io)?;
        for (s, v) in self.schedule.iter().zip(&self.values) {
            wr.write_record([format!("{s}"), format!("{v:e}")]).map_err(io)?;
        }
        wr.flush().map_err(|e| ExpError::Lab(e.into()))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(slope: f64) -> Vec<f64> {
        (0..5).map(|k| 3.0 * 2f64.powf(slope * k as f64)).collect()
    }

    #[test]
    fn exact_power_law_passes() {
        let r = GrowthReport::build("t", "k", Abscissa::Index, (0..5).map(f64::from).collect(), series(0.5), 0.5, Expectation::Near { target: 0.5, tol: 0.1 })
            .unwrap();
        assert!((r.slope - 0.5).abs() < 1e-12);
        assert_eq!(r.outcome, Outcome::Pass);
        let r = GrowthReport::build("t", "k", Abscissa::Index, (0..5).map(f64::from).collect(), series(0.5), 0.0, Expectation::AtMost { bound: 0.1 })
            .unwrap();
        assert_eq!(r.outcome, Outcome::Fail);
    }

    #[test]
    fn large_residual_is_inconclusive() {
        let mut v = series(0.0);
        v[2] *= 2.0;
        let r = GrowthReport::build("t", "k", Abscissa::Index, (0..5).map(f64::from).collect(), v, 0.0, Expectation::Near { target: 0.0, tol: 0.5 })
            .unwrap();
        assert_eq!(r.outcome, Outcome::Inconclusive);
    }

    #[test]
    fn short_or_nonpositive_series_are_rejected() {
        let e = Expectation::AtMost { bound: 0.0 };
        assert!(GrowthReport::build("t", "k", Abscissa::Index, vec![0.0, 1.0, 2.0], vec![1.0; 3], 0.0, e).is_err());
        assert!(GrowthReport::build("t", "k", Abscissa::Index, vec![0.0, 1.0, 2.0, 3.0], vec![1.0, 0.0, 1.0, 1.0], 0.0, e).is_err());
        assert!(GrowthReport::build("t", "R", Abscissa::Log2, vec![0.0, 1.0, 2.0, 3.0], vec![1.0; 4], 0.0, e).is_err());
    }

    #[test]
    fn log2_abscissa_and_csv() {
        let sched = vec![4.0, 8.0, 16.0, 32.0];
        let vals: Vec<f64> = sched.iter().map(|r: &f64| r.sqrt()).collect();
        let r = GrowthReport::build("t", "R", Abscissa::Log2, sched, vals, 0.5, Expectation::Near { target: 0.5, tol: 0.1 }).unwrap();
        assert!((r.slope - 0.5).abs() < 1e-12);
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some("step,value"));
        assert_eq!(text.lines().count(), 5);
    }
}
