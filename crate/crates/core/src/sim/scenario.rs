use crate::error::{Error, Result};

/// Constant-coefficient hazards over the states `(A, L)`:
///
/// * `lambda^D = d0 + dA*A + dL*L + dAL*A*L`
/// * `lambda^A = a0 + aL*L` while untreated
/// * `lambda^L = l0 + lA*A` while `L = 0`
///
/// plus an optional censoring clock `c0 + cL*L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfoundedScenario {
    pub alpha_d0: f64,
    pub alpha_da: f64,
    pub alpha_dl: f64,
    pub alpha_dal: f64,
    pub alpha_a0: f64,
    pub alpha_al: f64,
    pub alpha_l0: f64,
    pub alpha_la: f64,
    pub horizon: f64,
    pub n: usize,
    pub censoring: Option<CensoringHazard>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CensoringHazard {
    pub base: f64,
    pub per_l: f64,
}

impl Default for ConfoundedScenario {
    fn default() -> Self {
        Self {
            alpha_d0: 0.1,
            alpha_da: 0.05,
            alpha_dl: 0.1,
            alpha_dal: 0.0,
            alpha_a0: 0.1,
            alpha_al: 0.3,
            alpha_l0: 0.2,
            alpha_la: 0.05,
            horizon: 10.0,
            n: 1000,
            censoring: None,
        }
    }
}

fn check_rate(x: f64, what: &'static str) -> Result<()> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(what))
    }
}

impl ConfoundedScenario {
    pub fn validate(&self) -> Result<()> {
        for (x, what) in [
            (self.alpha_d0, "alpha_d0 must be a non-negative rate"),
            (self.alpha_da, "alpha_da must be a non-negative rate"),
            (self.alpha_dl, "alpha_dl must be a non-negative rate"),
            (self.alpha_dal, "alpha_dal must be a non-negative rate"),
            (self.alpha_a0, "alpha_a0 must be a non-negative rate"),
            (self.alpha_al, "alpha_al must be a non-negative rate"),
            (self.alpha_l0, "alpha_l0 must be a non-negative rate"),
            (self.alpha_la, "alpha_la must be a non-negative rate"),
        ] {
            check_rate(x, what)?;
        }
        if let Some(c) = self.censoring {
            check_rate(c.base, "censoring base rate must be non-negative")?;
            check_rate(c.per_l, "censoring L effect must be non-negative")?;
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::InvalidHorizon(self.horizon));
        }
        Ok(())
    }

    pub fn outcome_rate(&self, a: bool, l: bool) -> f64 {
        let (a, l) = (a as u8 as f64, l as u8 as f64);
        self.alpha_d0 + self.alpha_da * a + self.alpha_dl * l + self.alpha_dal * a * l
    }

    pub fn treatment_rate(&self, l: bool) -> f64 {
        self.alpha_a0 + self.alpha_al * (l as u8 as f64)
    }

    pub fn covariate_rate(&self, a: bool) -> f64 {
        self.alpha_l0 + self.alpha_la * (a as u8 as f64)
    }

    pub fn censoring_rate(&self, l: bool) -> f64 {
        self.censoring.map_or(0.0, |c| c.base + c.per_l * (l as u8 as f64))
    }
}

/// Treatment hazard `a0 + aA * x` depending on a binary baseline variable
/// `x ~ Bernoulli(p)`; no other processes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineScenario {
    pub alpha0: f64,
    pub alpha_a: f64,
    pub p: f64,
    pub horizon: f64,
    pub n: usize,
}

impl Default for BaselineScenario {
    fn default() -> Self {
        Self { alpha0: 0.2, alpha_a: 0.8, p: 0.5, horizon: 2.0, n: 1000 }
    }
}

impl BaselineScenario {
    /// Name of the baseline column carrying `x`.
    pub const COLUMN: &'static str = "x";

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha0 > 0.0 && self.alpha0.is_finite()) {
            return Err(Error::InvalidParameter("alpha0 must be positive"));
        }
        check_rate(self.alpha_a, "alpha_a must be a non-negative rate")?;
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::InvalidParameter("p must lie in [0, 1]"));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::InvalidHorizon(self.horizon));
        }
        Ok(())
    }

    pub fn treatment_rate(&self, x: bool) -> f64 {
        self.alpha0 + self.alpha_a * (x as u8 as f64)
    }
}
