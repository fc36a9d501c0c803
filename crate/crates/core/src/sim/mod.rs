//! Simulation scenarios with constant hazards, their hypothetical worlds and
//! marginal treatment hazards.

mod generate;
mod marginal;
mod rng;
mod scenario;

pub use generate::{simulate_baseline_scenario, simulate_confounded, simulate_hypothetical};
pub use marginal::{
    baseline_covariate_share, confounded_covariate_share, marginal_treatment_hazard_baseline,
    marginal_treatment_hazard_confounded, BaselineTreatmentIntensity, ConfoundedTreatmentIntensity,
    MarginalHazard, TimeHazard,
};
pub use rng::{replication_seed, SubjectRng};
pub use scenario::{BaselineScenario, CensoringHazard, ConfoundedScenario};
