//! Binary accuracy with pg as the positive class.

use std::fmt;

use serde::Serialize;

use super::manifest::Label;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    /// Correct pg predictions.
    pub tp: usize,
    /// Correct cg predictions.
    pub tn: usize,
    /// Number of pg samples.
    pub p: usize,
    /// Number of cg samples.
    pub n: usize,
    pub acc: f64,
}

impl Metrics {
    pub fn from_counts(tp: usize, tn: usize, p: usize, n: usize) -> Result<Self> {
        if tp > p || tn > n {
            return Err(Error::invalid(format!("counts out of range: tp={tp} p={p} tn={tn} n={n}")));
        }
        if p + n == 0 {
            return Err(Error::invalid("accuracy of an empty set"));
        }
        Ok(Metrics { tp, tn, p, n, acc: (tp + tn) as f64 / (p + n) as f64 })
    }
}

impl fmt::Display for Metrics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Acc={:.2}% TP={} TN={} P={} N={}", 100.0 * self.acc, self.tp, self.tn, self.p, self.n)
    }
}

pub fn accuracy(predictions: &[Label], labels: &[Label]) -> Result<Metrics> {
    if predictions.len() != labels.len() {
        return Err(Error::shape(format!("{} predictions for {} labels", predictions.len(), labels.len())));
    }
    let (mut tp, mut tn, mut p, mut n) = (0, 0, 0, 0);
    for (&pred, &truth) in predictions.iter().zip(labels) {
        match truth {
            Label::Pg => {
                p += 1;
                tp += usize::from(pred == Label::Pg);
            }
            Label::Cg => {
                n += 1;
                tn += usize::from(pred == Label::Cg);
            }
        }
    }
    Metrics::from_counts(tp, tn, p, n)
}
