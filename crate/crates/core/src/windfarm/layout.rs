use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::Scenario;
use crate::{Error, Result};

/// Turbine positions in meters.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    positions: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct LayoutRow {
    i: usize,
    x: f64,
    y: f64,
}

impl Layout {
    pub fn new(positions: Vec<[f64; 2]>) -> Self {
        Self { positions }
    }

    /// Reads consecutive `(x, y)` pairs.
    pub fn from_genome(genome: &[f64]) -> Result<Self> {
        if !genome.len().is_multiple_of(2) {
            return Err(Error::argument(format!("genome length {} is odd", genome.len())));
        }
        Ok(Self { positions: genome.chunks_exact(2).map(|p| [p[0], p[1]]).collect() })
    }

    pub fn to_genome(&self) -> Vec<f64> {
        self.positions.iter().flatten().copied().collect()
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Rotates about the origin, counter-clockwise, by `degrees`.
    pub fn rotated(&self, degrees: f64) -> Self {
        let (s, c) = degrees.to_radians().sin_cos();
        Self { positions: self.positions.iter().map(|&[x, y]| [x * c - y * s, x * s + y * c]).collect() }
    }

    /// The 16-turbine layout reported for the 1300 m case.
    pub fn reference_case1() -> Self {
        Self::new(vec![
            [-335.6, 1255.7],
            [1273.3, -261.8],
            [1210.0, 356.3],
            [-521.1, 98.0],
            [-798.7, -1003.0],
            [-226.9, -1125.9],
            [124.6, 548.6],
            [1018.1, -798.7],
            [-1233.3, -375.5],
            [-975.6, 831.4],
            [805.6, 1019.8],
            [676.7, 684.4],
            [-1098.8, 237.8],
            [549.4, -109.7],
            [353.1, -1250.9],
            [-98.7, -556.0],
        ])
    }

    /// CSV with header `i,x,y`, turbines numbered from 1.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for (k, &[x, y]) in self.positions.iter().enumerate() {
            w.serialize(LayoutRow { i: k + 1, x, y })?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rows: Vec<LayoutRow> =
            csv::Reader::from_reader(reader).deserialize().collect::<std::result::Result<_, _>>()?;
        rows.sort_by_key(|r| r.i);
        Ok(Self { positions: rows.into_iter().map(|r| [r.x, r.y]).collect() })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryViolation {
    /// 0-based turbine index.
    pub turbine: usize,
    pub radius: f64,
    /// Meters beyond the boundary.
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpacingViolation {
    pub first: usize,
    pub second: usize,
    pub distance: f64,
    /// Meters short of the minimum separation.
    pub shortfall: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeasibilityReport {
    pub boundary: Vec<BoundaryViolation>,
    pub spacing: Vec<SpacingViolation>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.boundary.is_empty() && self.spacing.is_empty()
    }

    pub fn boundary_excess(&self) -> f64 {
        self.boundary.iter().map(|v| v.excess).sum()
    }

    pub fn spacing_shortfall(&self) -> f64 {
        self.spacing.iter().map(|v| v.shortfall).sum()
    }
}

pub fn check_feasibility(layout: &Layout, scenario: &Scenario) -> FeasibilityReport {
    let p = layout.positions();
    let radius_limit = scenario.boundary_radius;
    let min_sep = scenario.min_separation();
    let boundary = p
        .iter()
        .enumerate()
        .filter_map(|(turbine, &[x, y])| {
            let radius = x.hypot(y);
            (radius > radius_limit).then_some(BoundaryViolation { turbine, radius, excess: radius - radius_limit })
        })
        .collect();
    let mut spacing = Vec::new();
    for a in 0..p.len() {
        for b in a + 1..p.len() {
            let distance = (p[a][0] - p[b][0]).hypot(p[a][1] - p[b][1]);
            if distance < min_sep {
                spacing.push(SpacingViolation { first: a, second: b, distance, shortfall: min_sep - distance });
            }
        }
    }
    FeasibilityReport { boundary, spacing }
}

/// Maps a `2 n_turbines` genome to a layout and its constraint penalty.
pub fn decode_genome(genome: &[f64], scenario: &Scenario) -> Result<(Layout, f64)> {
    if genome.len() != 2 * scenario.n_turbines {
        return Err(Error::argument(format!(
            "genome length {} does not match {} turbines",
            genome.len(),
            scenario.n_turbines
        )));
    }
    let layout = Layout::from_genome(genome)?;
    let report = check_feasibility(&layout, scenario);
    let penalty = scenario.boundary_weight * report.boundary_excess() + scenario.spacing_weight * report.spacing_shortfall();
    Ok((layout, penalty))
}
