//! Confusion matrix, accuracy and squared error of ±1 decisions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::Label;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// `confusion[decided][real]`, classes ordered (+1, −1).
    pub confusion: [[u64; 2]; 2],
    pub accuracy: f64,
    /// Mean of `(real − decided)²` under ±1 coding, i.e. `4 · (1 − accuracy)`.
    pub mse: f64,
    pub n_test: u64,
}

impl EvalReport {
    pub fn from_confusion(confusion: [[u64; 2]; 2]) -> Result<Self> {
        let n_test: u64 = confusion.iter().flatten().sum();
        if n_test == 0 {
            return Err(Error::InvalidInput("empty confusion matrix".into()));
        }
        let correct = confusion[0][0] + confusion[1][1];
        let accuracy = correct as f64 / n_test as f64;
        Ok(Self {
            confusion,
            accuracy,
            mse: (4 * (n_test - correct)) as f64 / n_test as f64,
            n_test,
        })
    }

    pub fn correct(&self) -> u64 {
        self.confusion[0][0] + self.confusion[1][1]
    }

    /// Percentage with one decimal, e.g. `95.6%`.
    pub fn accuracy_percent(&self) -> String {
        format!("{:.1}%", 100.0 * self.accuracy)
    }

    pub fn mse_text(&self) -> String {
        format!("{:.4}", self.mse)
    }

    /// Rows are decided classes, columns real classes.
    pub fn render_confusion(&self) -> String {
        let c = &self.confusion;
        format!(
            "{:<18}{:>10}{:>10}\n{:<18}{:>10}{:>10}\n{:<18}{:>10}{:>10}\n",
            "decided \\ real", "Class 1", "Class 2", "Class 1", c[0][0], c[0][1], "Class 2", c[1][0], c[1][1]
        )
    }
}

pub fn evaluate(predicted: &[Label], actual: &[Label]) -> Result<EvalReport> {
    if predicted.len() != actual.len() {
        return Err(Error::DimensionMismatch {
            expected: actual.len(),
            actual: predicted.len(),
        });
    }
    let mut confusion = [[0u64; 2]; 2];
    for (p, a) in predicted.iter().zip(actual) {
        confusion[p.class_index()][a.class_index()] += 1;
    }
    EvalReport::from_confusion(confusion)
}
