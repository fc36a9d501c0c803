//! Plugin estimation of parameters that solve `eta_t = eta_0 + int_0^t F(eta_{s-}) dB_s`.
//!
//! With step-function integrators the solution is the finite recursion
//! `eta <- eta + F(eta_{s-}) dB_s` over the jump times, which is what
//! [`solve_plugin`] computes. Nothing is interpolated between jumps.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::aalen::CumCoef;
use crate::error::{Error, Result};
use crate::step::StepPath;

/// What drives one column of the integrator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegratorKind {
    /// A cumulative hazard supplied by the caller.
    Hazard,
    /// Calendar time; its increment at a knot is the time since the previous knot.
    Time,
}

type Integrand = dyn Fn(&[f64], &mut [f64]) + Send + Sync;

pub struct OdeSpec {
    pub name: String,
    pub eta0: Vec<f64>,
    pub columns: Vec<IntegratorKind>,
    /// Lipschitz constant of `F` in the max-norm.
    pub lipschitz: f64,
    /// Writes `F(eta)` as a row-major `d x m` matrix.
    integrand: Box<Integrand>,
}

impl fmt::Debug for OdeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OdeSpec")
            .field("name", &self.name)
            .field("eta0", &self.eta0)
            .field("columns", &self.columns)
            .field("lipschitz", &self.lipschitz)
            .finish_non_exhaustive()
    }
}

impl OdeSpec {
    pub fn new(
        name: impl Into<String>,
        eta0: Vec<f64>,
        columns: Vec<IntegratorKind>,
        lipschitz: f64,
        integrand: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), eta0, columns, lipschitz, integrand: Box::new(integrand) }
    }

    pub fn dim(&self) -> usize {
        self.eta0.len()
    }

    pub fn arity(&self) -> usize {
        self.columns.len()
    }

    pub fn hazard_columns(&self) -> usize {
        self.columns.iter().filter(|c| **c == IntegratorKind::Hazard).count()
    }

    pub fn with_eta0(mut self, eta0: Vec<f64>) -> Self {
        assert_eq!(eta0.len(), self.eta0.len());
        self.eta0 = eta0;
        self
    }

    pub fn integrand(&self, eta: &[f64], out: &mut [f64]) {
        (self.integrand)(eta, out)
    }
}

/// `F = I`: the state is the integrator itself plus `eta0`.
pub fn identity_spec(dim: usize) -> OdeSpec {
    OdeSpec::new("identity", alloc::vec![0.0; dim], alloc::vec![IntegratorKind::Hazard; dim], 1.0, move |_, out| {
        out.iter_mut().for_each(|v| *v = 0.0);
        for k in 0..dim {
            out[k * dim + k] = 1.0;
        }
    })
}

/// `S_t = 1 - int S_{s-} dB_s`.
pub fn survival_spec() -> OdeSpec {
    OdeSpec::new("survival", alloc::vec![1.0], alloc::vec![IntegratorKind::Hazard], 1.0, |eta, out| {
        out[0] = -eta[0];
    })
}

/// `RS_t = 1 + int (-RS, RS) d(B^{treated}, B^{untreated})`.
pub fn relative_survival_spec() -> OdeSpec {
    OdeSpec::new(
        "relative-survival",
        alloc::vec![1.0],
        alloc::vec![IntegratorKind::Hazard, IntegratorKind::Hazard],
        1.0,
        |eta, out| {
            out[0] = -eta[0];
            out[1] = eta[0];
        },
    )
}

/// State `(S, C_1)` driven by `(B_1, B_all)`: `dC_1 = S dB_1`, `dS = -S dB_all`.
pub fn cumulative_incidence_spec() -> OdeSpec {
    OdeSpec::new(
        "cumulative-incidence",
        alloc::vec![1.0, 0.0],
        alloc::vec![IntegratorKind::Hazard, IntegratorKind::Hazard],
        1.0,
        |eta, out| {
            out[0] = 0.0;
            out[1] = -eta[0];
            out[2] = eta[0];
            out[3] = 0.0;
        },
    )
}

/// State `(S, mu)` driven by `(B, t)`: `dS = -S dB`, `dmu = S dt`.
pub fn rmst_spec() -> OdeSpec {
    OdeSpec::new(
        "rmst",
        alloc::vec![1.0, 0.0],
        alloc::vec![IntegratorKind::Hazard, IntegratorKind::Time],
        1.0,
        |eta, out| {
            out[0] = -eta[0];
            out[1] = 0.0;
            out[2] = 0.0;
            out[3] = eta[0];
        },
    )
}

pub fn spec_by_name(name: &str) -> Option<OdeSpec> {
    match name {
        "survival" => Some(survival_spec()),
        "relative-survival" => Some(relative_survival_spec()),
        "cumulative-incidence" => Some(cumulative_incidence_spec()),
        "rmst" => Some(rmst_spec()),
        _ => None,
    }
}

/// A pure-jump integrator given by its jump times and increments.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct JumpIntegrator {
    pub times: Vec<f64>,
    pub increments: Vec<f64>,
}

impl JumpIntegrator {
    pub fn new(times: Vec<f64>, increments: Vec<f64>) -> Self {
        assert_eq!(times.len(), increments.len());
        Self { times, increments }
    }

    /// Column `j` of a cumulative coefficient fit.
    pub fn from_column(fit: &CumCoef, j: usize) -> Self {
        Self {
            times: fit.times.clone(),
            increments: fit.increments.iter().map(|inc| inc[j]).collect(),
        }
    }

    /// The linear combination `sum_j w_j B_j` of a fit's columns.
    pub fn from_combination(fit: &CumCoef, weights: &[f64]) -> Self {
        let (times, increments) = fit.combined_increments(weights).into_iter().unzip();
        Self { times, increments }
    }

    pub fn total_variation(&self) -> f64 {
        self.increments.iter().map(|d| d.abs()).sum()
    }
}

/// State path of a plugin estimator; each value is the state vector.
pub type ParamPath = StepPath<Vec<f64>>;

/// Runs the recursion for `spec`, binding the hazard integrators in order to
/// the spec's hazard columns.
///
/// Knots are the union of the integrators' jump times, `extra_knots` and
/// `horizon` (when given). Time columns only contribute at knots, so add
/// `extra_knots` where a time-driven state is wanted.
pub fn solve_plugin(
    spec: &OdeSpec,
    hazards: &[JumpIntegrator],
    horizon: Option<f64>,
    extra_knots: &[f64],
) -> Result<ParamPath> {
    let expected = spec.hazard_columns();
    if hazards.len() != expected {
        return Err(Error::BindingMismatch { expected, found: hazards.len() });
    }
    let (d, m) = (spec.dim(), spec.arity());
    let mut knots: Vec<f64> = hazards.iter().flat_map(|h| h.times.iter().copied()).collect();
    knots.extend_from_slice(extra_knots);
    knots.extend(horizon);
    knots.retain(|&t| horizon.map_or(true, |h| t <= h));
    knots.sort_by(f64::total_cmp);
    knots.dedup();

    let mut cursors = alloc::vec![0usize; hazards.len()];
    let mut eta = spec.eta0.clone();
    let mut path = StepPath::constant(eta.clone());
    let mut f = alloc::vec![0.0; d * m];
    let mut db = alloc::vec![0.0; m];
    let mut previous = 0.0;
    for &s in &knots {
        let mut h = 0;
        for (col, kind) in spec.columns.iter().enumerate() {
            db[col] = match kind {
                IntegratorKind::Time => s - previous,
                IntegratorKind::Hazard => {
                    let integrator = &hazards[h];
                    let c = &mut cursors[h];
                    h += 1;
                    let mut inc = 0.0;
                    while *c < integrator.times.len() && integrator.times[*c] <= s {
                        if integrator.times[*c] == s {
                            inc += integrator.increments[*c];
                        }
                        *c += 1;
                    }
                    inc
                }
            };
        }
        previous = s;
        if db.iter().all(|&v| v == 0.0) {
            continue;
        }
        spec.integrand(&eta, &mut f);
        let next: Vec<f64> = (0..d)
            .map(|r| eta[r] + (0..m).map(|c| f[r * m + c] * db[c]).sum::<f64>())
            .collect();
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState { time: s });
        }
        eta = next;
        path.push(s, eta.clone());
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn survival_two_steps() {
        let b = JumpIntegrator::new(vec![1.0, 2.0], vec![0.1, 0.2]);
        let p = solve_plugin(&survival_spec(), &[b], None, &[]).unwrap();
        assert_eq!(p.values()[0], vec![0.9]);
        assert!((p.values()[1][0] - 0.72).abs() < 1e-15);
    }

    #[test]
    fn relative_survival_single_step() {
        let treated = JumpIntegrator::new(vec![1.0], vec![0.2]);
        let untreated = JumpIntegrator::new(vec![1.0], vec![0.1]);
        let p = solve_plugin(&relative_survival_spec(), &[treated, untreated], None, &[]).unwrap();
        assert!((p.last_value()[0] - 0.9).abs() < 1e-15);
    }

    #[test]
    fn rmst_without_hazard_is_time() {
        let p = solve_plugin(&rmst_spec(), &[JumpIntegrator::default()], Some(4.0), &[1.0, 2.5]).unwrap();
        assert_eq!(p.eval(1.0)[1], 1.0);
        assert_eq!(p.eval(3.0)[1], 2.5);
        assert_eq!(p.eval(4.0)[1], 4.0);
        assert_eq!(p.last_value()[0], 1.0);
    }

    #[test]
    fn wrong_number_of_hazards() {
        let b = JumpIntegrator::new(vec![1.0], vec![0.2]);
        assert_eq!(
            solve_plugin(&relative_survival_spec(), &[b], None, &[]).unwrap_err(),
            Error::BindingMismatch { expected: 2, found: 1 }
        );
    }

    #[test]
    fn blow_up_reports_time() {
        let spec = OdeSpec::new("square", vec![1.0], vec![IntegratorKind::Hazard], f64::INFINITY, |eta, out| {
            out[0] = eta[0] * eta[0];
        });
        let b = JumpIntegrator::new(vec![1.0, 2.0, 3.0], vec![1e200, 1e200, 1e200]);
        assert_eq!(solve_plugin(&spec, &[b], None, &[]).unwrap_err(), Error::NonFiniteState { time: 2.0 });
    }
}
