//! Central finite-difference verification of analytic gradients.

use std::fmt;

use crate::error::{Error, Result};

mod suite;
pub use suite::{model_check, run_suite, SuiteOptions, Tolerances};

/// Relative step: each coordinate is perturbed by `STEP · max(1, |x_i|)`.
pub const STEP: f64 = 1e-5;

/// Denominator floor of the relative error, so coordinates whose true
/// gradient is zero are judged on absolute error.
pub const REL_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub name: String,
    pub tolerance: f64,
    pub max_rel_err: f64,
    /// Coordinate with the largest relative error.
    pub worst_index: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub checked: usize,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.max_rel_err < self.tolerance
    }
}

impl fmt::Display for GradCheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<4} {:<28} max_rel_err={:.3e} tol={:.0e} coords={}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.max_rel_err,
            self.tolerance,
            self.checked
        )?;
        if !self.passed() {
            write!(f, " worst@{} analytic={:.6e} numeric={:.6e}", self.worst_index, self.analytic, self.numeric)?;
        }
        Ok(())
    }
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_FLOOR)
}

/// Compares `analytic` against central differences of `loss` around `point`.
///
/// Only the coordinates in `coords` are probed (all when `None`).
pub fn gradient_check(
    name: &str,
    mut loss: impl FnMut(&[f64]) -> Result<f64>,
    point: &[f64],
    analytic: &[f64],
    coords: Option<&[usize]>,
    tolerance: f64,
) -> Result<GradCheckReport> {
    if point.len() != analytic.len() {
        return Err(Error::shape(format!(
            "{name}: {} coordinates but {} analytic gradients",
            point.len(),
            analytic.len()
        )));
    }
    let all: Vec<usize>;
    let coords = match coords {
        Some(c) => c,
        None => {
            all = (0..point.len()).collect();
            &all
        }
    };
    let mut x = point.to_vec();
    let mut report = GradCheckReport {
        name: name.to_owned(),
        tolerance,
        max_rel_err: 0.0,
        worst_index: 0,
        analytic: 0.0,
        numeric: 0.0,
        checked: coords.len(),
    };
    for (k, &i) in coords.iter().enumerate() {
        let h = STEP * point[i].abs().max(1.0);
        x[i] = point[i] + h;
        let up = loss(&x)?;
        x[i] = point[i] - h;
        let down = loss(&x)?;
        x[i] = point[i];
        let numeric = (up - down) / (2.0 * h);
        if !numeric.is_finite() || !analytic[i].is_finite() {
            return Err(Error::NonFinite(format!("{name}: coordinate {i} gave a non-finite gradient")));
        }
        let err = relative_error(analytic[i], numeric);
        if k == 0 || err > report.max_rel_err {
            report.max_rel_err = err;
            report.worst_index = i;
            report.analytic = analytic[i];
            report.numeric = numeric;
        }
    }
    Ok(report)
}
