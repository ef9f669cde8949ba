use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{aep, decode_genome, Layout, TurbineSpec, WindRose};
use crate::local_search::{cauchy_local_search, LocalSearchResult};
use crate::{BoundedObjective, Error, Result};

/// Step scale of the layout local search, in meters.
pub const LOCAL_SEARCH_ETA: f64 = 10.0;

/// A circular-boundary layout problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub boundary_radius: f64,
    pub n_turbines: usize,
    pub turbine: TurbineSpec,
    pub wind_rose: WindRose,
    /// Penalty per meter outside the boundary.
    pub boundary_weight: f64,
    /// Penalty per meter of missing separation.
    pub spacing_weight: f64,
}

impl Default for Scenario {
    /// 16 turbines inside a 1300 m radius.
    fn default() -> Self {
        Self {
            boundary_radius: 1300.0,
            n_turbines: 16,
            turbine: TurbineSpec::default(),
            wind_rose: WindRose::iea37(),
            boundary_weight: 100.0,
            spacing_weight: 100.0,
        }
    }
}

impl Scenario {
    /// Two rotor diameters.
    pub fn min_separation(&self) -> f64 {
        2.0 * self.turbine.rotor_diameter
    }

    pub fn dimension(&self) -> usize {
        2 * self.n_turbines
    }

    pub fn validate(&self) -> Result<()> {
        self.turbine.validate()?;
        if !(self.boundary_radius > 0.0) || self.n_turbines == 0 {
            return Err(Error::config("scenario needs a positive radius and at least one turbine"));
        }
        if !(self.boundary_weight >= 0.0 && self.spacing_weight >= 0.0) {
            return Err(Error::config("penalty weights must be non-negative"));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Self = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn aep(&self, layout: &Layout) -> f64 {
        aep(layout, &self.wind_rose, &self.turbine)
    }

    /// `-AEP + penalty` for a genome of length `2 n_turbines`.
    pub fn penalized_objective(&self, genome: &[f64]) -> Result<f64> {
        let (layout, penalty) = decode_genome(genome, self)?;
        Ok(-self.aep(&layout) + penalty)
    }
}

/// Minimization objective over `[-R, R]^(2n)` returning `-AEP + penalty`.
pub fn wind_farm_objective(scenario: &Scenario) -> Result<BoundedObjective> {
    scenario.validate()?;
    let s = scenario.clone();
    let r = s.boundary_radius;
    BoundedObjective::new("windfarm", s.dimension(), -r, r, move |g: &[f64]| {
        s.penalized_objective(g).unwrap_or(f64::INFINITY)
    })
}

/// Cauchy hill climbing on a layout with the penalized objective.
pub fn layout_local_search<R: Rng + ?Sized>(
    layout: &Layout,
    objective: &BoundedObjective,
    budget: u64,
    rng: &mut R,
) -> Result<(Layout, LocalSearchResult)> {
    if budget == 0 {
        return Err(Error::argument("local search budget must be at least 1"));
    }
    let genome = layout.to_genome();
    let fitness = objective.try_evaluate(&genome)?;
    let out = cauchy_local_search(&genome, fitness, objective, LOCAL_SEARCH_ETA, budget, rng);
    Ok((Layout::from_genome(&out.genome)?, out))
}
