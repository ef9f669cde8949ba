//! Wind-farm layout objective: turbine power curve, Gaussian wake model,
//! directional farm power and annual energy production.
//!
//! Coordinates are meters in a frame centred on the farm. Wind directions are
//! meteorological (the direction the wind blows from, clockwise from north).

mod layout;
mod scenario;

pub use layout::{
    check_feasibility, decode_genome, BoundaryViolation, FeasibilityReport, Layout, SpacingViolation,
};
pub use scenario::{layout_local_search, wind_farm_objective, Scenario, LOCAL_SEARCH_ETA};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Hours per (non-leap) year.
pub const HOURS_PER_YEAR: f64 = 8760.0;

/// Constant thrust coefficient of the wake model.
pub const THRUST_COEFFICIENT: f64 = 8.0 / 9.0;

/// Linear wake expansion rate.
pub const WAKE_EXPANSION: f64 = 0.0324555;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TurbineSpec {
    /// Meters.
    pub rotor_diameter: f64,
    /// Rated power in MW.
    pub rating: f64,
    /// Wind speeds in m/s.
    pub cut_in: f64,
    pub rated: f64,
    pub cut_out: f64,
}

impl Default for TurbineSpec {
    /// The 3.35 MW, 130 m reference turbine.
    fn default() -> Self {
        Self { rotor_diameter: 130.0, rating: 3.35, cut_in: 4.0, rated: 9.8, cut_out: 25.0 }
    }
}

impl TurbineSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.cut_in < self.rated && self.rated < self.cut_out) {
            return Err(Error::config("turbine speeds must satisfy cut_in < rated < cut_out"));
        }
        if !(self.cut_in >= 0.0 && self.rotor_diameter > 0.0 && self.rating > 0.0) {
            return Err(Error::config("turbine diameter and rating must be positive"));
        }
        Ok(())
    }

    fn power(&self, v: f64) -> f64 {
        if v < self.cut_in || v > self.cut_out {
            0.0
        } else if v < self.rated {
            self.rating * ((v - self.cut_in) / (self.rated - self.cut_in)).powi(3)
        } else {
            self.rating
        }
    }
}

/// Turbine output in MW at hub wind speed `v` (m/s).
pub fn power_curve(v: f64, spec: &TurbineSpec) -> Result<f64> {
    if !(v >= 0.0) {
        return Err(Error::argument(format!("wind speed must be non-negative, got {v}")));
    }
    Ok(spec.power(v))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindBin {
    /// Degrees clockwise from north.
    pub direction: f64,
    pub frequency: f64,
}

/// Sixteen direction bins with their frequencies and a common free-stream
/// speed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRose", into = "RawRose")]
pub struct WindRose {
    bins: Vec<WindBin>,
    free_stream: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRose {
    free_stream: f64,
    bins: Vec<WindBin>,
}

impl TryFrom<RawRose> for WindRose {
    type Error = Error;
    fn try_from(raw: RawRose) -> Result<Self> {
        WindRose::new(raw.bins, raw.free_stream)
    }
}

impl From<WindRose> for RawRose {
    fn from(r: WindRose) -> Self {
        RawRose { free_stream: r.free_stream, bins: r.bins }
    }
}

const IEA37_FREQUENCIES: [f64; 16] = [
    0.025, 0.024, 0.029, 0.036, 0.063, 0.065, 0.100, 0.122, 0.063, 0.038, 0.039, 0.083, 0.213, 0.046, 0.032,
    0.022,
];

impl WindRose {
    pub const BINS: usize = 16;

    pub fn new(bins: Vec<WindBin>, free_stream: f64) -> Result<Self> {
        if bins.len() != Self::BINS {
            return Err(Error::config(format!("wind rose needs {} bins, got {}", Self::BINS, bins.len())));
        }
        if bins.iter().any(|b| !(b.frequency >= 0.0) || !b.direction.is_finite()) {
            return Err(Error::config("wind rose frequencies must be non-negative"));
        }
        let total: f64 = bins.iter().map(|b| b.frequency).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::config(format!("wind rose frequencies sum to {total}, not 1")));
        }
        if !(free_stream > 0.0) {
            return Err(Error::config("free-stream speed must be positive"));
        }
        Ok(Self { bins, free_stream })
    }

    /// Evenly spaced bins starting at north, 22.5 degrees apart.
    pub fn from_frequencies(frequencies: &[f64], free_stream: f64) -> Result<Self> {
        let step = 360.0 / frequencies.len().max(1) as f64;
        let bins = frequencies
            .iter()
            .enumerate()
            .map(|(b, &frequency)| WindBin { direction: step * b as f64, frequency })
            .collect();
        Self::new(bins, free_stream)
    }

    /// Frequencies of the IEA Task 37 case study at 9.8 m/s.
    pub fn iea37() -> Self {
        Self::from_frequencies(&IEA37_FREQUENCIES, 9.8).expect("built-in rose is valid")
    }

    pub fn bins(&self) -> &[WindBin] {
        &self.bins
    }

    pub fn free_stream(&self) -> f64 {
        self.free_stream
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.bins.iter().map(|b| b.frequency).collect()
    }
}

impl Default for WindRose {
    fn default() -> Self {
        Self::iea37()
    }
}

/// Velocity deficit fraction at `downstream`/`crosswind` meters from an
/// upstream rotor; zero when not downstream.
pub fn wake_deficit(downstream: f64, crosswind: f64, rotor_diameter: f64) -> f64 {
    if downstream <= 0.0 {
        return 0.0;
    }
    let sigma = WAKE_EXPANSION * downstream + rotor_diameter / 8f64.sqrt();
    let ratio = sigma / rotor_diameter;
    let root = (1.0 - THRUST_COEFFICIENT / (8.0 * ratio * ratio)).max(0.0).sqrt();
    (1.0 - root) * (-0.5 * (crosswind / sigma).powi(2)).exp()
}

/// Hub speeds of every turbine when the wind blows from `direction` degrees.
pub fn effective_speeds(positions: &[[f64; 2]], direction: f64, free_stream: f64, rotor_diameter: f64) -> Vec<f64> {
    // Frame with +x pointing downwind.
    let angle = (270.0 - direction).to_radians();
    let (s, c) = (-angle).sin_cos();
    let rotated: Vec<[f64; 2]> = positions.iter().map(|&[x, y]| [x * c - y * s, x * s + y * c]).collect();
    rotated
        .iter()
        .map(|&[xi, yi]| {
            let sum_sq: f64 = rotated
                .iter()
                .map(|&[xj, yj]| wake_deficit(xi - xj, yi - yj, rotor_diameter).powi(2))
                .sum();
            free_stream * (1.0 - sum_sq.sqrt())
        })
        .collect()
}

/// Farm output in MW for bin `direction_index` of the rose.
pub fn farm_power(layout: &Layout, direction_index: usize, rose: &WindRose, spec: &TurbineSpec) -> Result<f64> {
    let bin = rose
        .bins()
        .get(direction_index)
        .ok_or_else(|| Error::argument(format!("direction index {direction_index} out of range")))?;
    Ok(direction_power(layout.positions(), bin.direction, rose.free_stream(), spec))
}

fn direction_power(positions: &[[f64; 2]], direction: f64, free_stream: f64, spec: &TurbineSpec) -> f64 {
    effective_speeds(positions, direction, free_stream, spec.rotor_diameter)
        .into_iter()
        .map(|v| spec.power(v.max(0.0)))
        .sum()
}

/// Annual energy production in MWh.
pub fn aep(layout: &Layout, rose: &WindRose, spec: &TurbineSpec) -> f64 {
    let weighted: f64 = rose
        .bins()
        .iter()
        .map(|b| b.frequency * direction_power(layout.positions(), b.direction, rose.free_stream(), spec))
        .sum();
    weighted * HOURS_PER_YEAR
}

/// AEP with every turbine at free-stream output: `n * rating * 8760`.
pub fn wake_free_aep(n_turbines: usize, spec: &TurbineSpec) -> f64 {
    n_turbines as f64 * spec.rating * HOURS_PER_YEAR
}
