//! Baseline propensity weights `R_0 = dP~(Q | past) / dP(Q | past)`.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::history::EventHistory;
use crate::logistic::{fit_logistic, LogisticFit};

/// Conditional density (probability mass) of a subject's observed baseline
/// value under some law.
pub trait BaselineDensity {
    fn density(&self, history: &EventHistory, idx: usize) -> Result<f64>;
}

/// Marginal Bernoulli law for a binary baseline column.
#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliDensity {
    pub column: String,
    pub p: f64,
}

impl BernoulliDensity {
    pub fn new(column: impl Into<String>, p: f64) -> Self {
        Self { column: column.into(), p }
    }

    /// Empirical frequency of `column == 1`.
    pub fn fit(history: &EventHistory, column: &str) -> Result<Self> {
        let j = history
            .baseline_column(column)
            .ok_or_else(|| Error::UnknownColumn(column.into()))?;
        if history.n() == 0 {
            return Err(Error::InvalidParameter("no subjects"));
        }
        let ones = (0..history.n()).filter(|&i| history.baseline_row(i)[j] == 1.0).count();
        Ok(Self::new(column, ones as f64 / history.n() as f64))
    }
}

impl BaselineDensity for BernoulliDensity {
    fn density(&self, history: &EventHistory, idx: usize) -> Result<f64> {
        let j = history
            .baseline_column(&self.column)
            .ok_or_else(|| Error::UnknownColumn(self.column.clone()))?;
        Ok(if history.baseline_row(idx)[j] == 1.0 { self.p } else { 1.0 - self.p })
    }
}

/// Logistic model for a binary baseline column given other baseline columns
/// (an intercept is always included).
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticDensity {
    pub column: String,
    pub predictors: Vec<String>,
    pub fit: LogisticFit,
}

impl LogisticDensity {
    pub fn fit<S: AsRef<str>>(history: &EventHistory, column: &str, predictors: &[S]) -> Result<Self> {
        let target = history
            .baseline_column(column)
            .ok_or_else(|| Error::UnknownColumn(column.into()))?;
        let cols = predictors
            .iter()
            .map(|p| {
                history.baseline_column(p.as_ref()).ok_or_else(|| Error::UnknownColumn(p.as_ref().into()))
            })
            .collect::<Result<Vec<_>>>()?;
        let width = cols.len() + 1;
        let mut x = Vec::with_capacity(history.n() * width);
        let mut y = Vec::with_capacity(history.n());
        for i in 0..history.n() {
            let row = history.baseline_row(i);
            x.push(1.0);
            x.extend(cols.iter().map(|&c| row[c]));
            y.push(row[target]);
        }
        Ok(Self {
            column: column.into(),
            predictors: predictors.iter().map(|p| p.as_ref().into()).collect(),
            fit: fit_logistic(&x, &y, width),
        })
    }
}

impl BaselineDensity for LogisticDensity {
    fn density(&self, history: &EventHistory, idx: usize) -> Result<f64> {
        let row = history.baseline_row(idx);
        let mut x = Vec::with_capacity(self.predictors.len() + 1);
        x.push(1.0);
        for name in &self.predictors {
            let c = history.baseline_column(name).ok_or_else(|| Error::UnknownColumn(name.clone()))?;
            x.push(row[c]);
        }
        let target =
            history.baseline_column(&self.column).ok_or_else(|| Error::UnknownColumn(self.column.clone()))?;
        let p = self.fit.predict(&x);
        Ok(if row[target] == 1.0 { p } else { 1.0 - p })
    }
}

/// `R_0^i` for every subject, in subject-index order.
pub fn baseline_weight<N, D>(history: &EventHistory, numerator: &N, denominator: &D) -> Result<Vec<f64>>
where
    N: BaselineDensity + ?Sized,
    D: BaselineDensity + ?Sized,
{
    (0..history.n())
        .map(|i| {
            let den = denominator.density(history, i)?;
            if !(den > 0.0) {
                return Err(Error::Positivity { subject: history.subject_ids()[i], time: 0.0 });
            }
            Ok(numerator.density(history, i)? / den)
        })
        .collect()
}
