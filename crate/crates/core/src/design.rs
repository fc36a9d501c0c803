//! Design matrices built from left limits of indicator processes and
//! baseline variables.
//!
//! A column is a product of factors. `"1"` is the intercept, `"A"` and `"L"`
//! are the treatment and covariate indicators `A_{t-}`, `L_{t-}`, any other
//! name refers to a baseline variable, and `"A*L"` multiplies factors.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::history::{EventHistory, EventKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Factor {
    Treated,
    Covariate,
    Baseline(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    /// Empty for the intercept.
    pub factors: Vec<Factor>,
}

impl Column {
    pub fn intercept() -> Self {
        Self { factors: Vec::new() }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if text == "1" {
            return Ok(Self::intercept());
        }
        let mut factors = Vec::new();
        for part in text.split(['*', ':']) {
            let part = part.trim();
            factors.push(match part {
                "" => return Err(Error::UnknownColumn(text.to_string())),
                "1" => continue,
                "A" => Factor::Treated,
                "L" => Factor::Covariate,
                name => Factor::Baseline(name.to_string()),
            });
        }
        Ok(Self { factors })
    }

    pub fn name(&self) -> String {
        if self.factors.is_empty() {
            return "1".to_string();
        }
        let mut out = String::new();
        for (k, f) in self.factors.iter().enumerate() {
            if k > 0 {
                out.push('*');
            }
            match f {
                Factor::Treated => out.push('A'),
                Factor::Covariate => out.push('L'),
                Factor::Baseline(n) => out.push_str(n),
            }
        }
        out
    }
}

/// Ordered list of design columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DesignSpec {
    pub columns: Vec<Column>,
}

impl DesignSpec {
    pub fn parse<S: AsRef<str>>(columns: &[S]) -> Result<Self> {
        let columns = columns.iter().map(|c| Column::parse(c.as_ref())).collect::<Result<_>>()?;
        Ok(Self { columns })
    }

    pub fn intercept_only() -> Self {
        Self { columns: alloc::vec![Column::intercept()] }
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }

    pub fn names(&self) -> Vec<String> {
        self.columns.iter().map(Column::name).collect()
    }

    /// Resolves baseline names against a history.
    pub fn bind(&self, history: &EventHistory) -> Result<BoundDesign> {
        let mut columns = Vec::with_capacity(self.columns.len());
        for col in &self.columns {
            let mut factors = Vec::with_capacity(col.factors.len());
            for f in &col.factors {
                factors.push(match f {
                    Factor::Treated => BoundFactor::Process(EventKind::Treatment),
                    Factor::Covariate => BoundFactor::Process(EventKind::Covariate),
                    Factor::Baseline(name) => BoundFactor::Baseline(
                        history
                            .baseline_column(name)
                            .ok_or_else(|| Error::UnknownColumn(name.clone()))?,
                    ),
                });
            }
            columns.push(factors);
        }
        Ok(BoundDesign { columns })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BoundFactor {
    Process(EventKind),
    Baseline(usize),
}

/// A [`DesignSpec`] with baseline columns resolved to indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundDesign {
    columns: Vec<Vec<BoundFactor>>,
}

impl BoundDesign {
    pub fn width(&self) -> usize {
        self.columns.len()
    }

    /// Writes `X^i_{t-}` for subject index `idx` into `out`.
    pub fn row_into(&self, history: &EventHistory, idx: usize, t: f64, out: &mut [f64]) {
        let times = history.subject_times(idx);
        let baseline = history.baseline_row(idx);
        for (slot, factors) in out.iter_mut().zip(&self.columns) {
            let mut v = 1.0;
            for f in factors {
                v *= match *f {
                    BoundFactor::Process(kind) => {
                        if times.jumped_before(kind, t) {
                            1.0
                        } else {
                            0.0
                        }
                    }
                    BoundFactor::Baseline(c) => baseline[c],
                };
            }
            *slot = v;
        }
    }

    pub fn row(&self, history: &EventHistory, idx: usize, t: f64) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.width()];
        self.row_into(history, idx, t, &mut out);
        out
    }

    /// Times at which the row of subject `idx` can change value (right after these times).
    pub fn change_times(&self, history: &EventHistory, idx: usize) -> Vec<f64> {
        let times = history.subject_times(idx);
        let mut out = Vec::new();
        for factors in &self.columns {
            for f in factors {
                if let BoundFactor::Process(kind) = f {
                    if let Some(s) = times.get(*kind) {
                        out.push(s);
                    }
                }
            }
        }
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }
}

/// `X^i_{t-}` for one subject id.
pub fn design_row(
    history: &EventHistory,
    spec: &DesignSpec,
    subject: u64,
    t: f64,
) -> Result<Vec<f64>> {
    let idx = history.index_of(subject)?;
    Ok(spec.bind(history)?.row(history, idx, t))
}
