//! Substrate tag assignment and adaptive operator probabilities.
//!
//! Credit collected from the larvae of each substrate is turned into a metric
//! `m_i`, min-max normalized to `[0, 1]`, and mapped to assignment
//! probabilities with a softmax of temperature `tau`. A floor `epsilon` keeps
//! every substrate selectable.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AssignmentMode {
    /// Fixed contiguous reef regions, one per substrate.
    Static,
    /// Uniform redraw of every tag each generation.
    UniformProbabilistic,
    /// Redraw from credit-driven probabilities.
    Dynamic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    /// Fraction of a substrate's larvae that settled.
    SuccessRate,
    /// Aggregate of the larvae fitness, negated so better is larger.
    RawFitness,
    /// Aggregate of the improvement over the previous generation's best.
    FitnessImprovement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregate {
    Mean,
    Best,
    Worst,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AssignmentPolicy {
    pub mode: AssignmentMode,
    pub metric: Metric,
    pub aggregate: Aggregate,
    pub temperature: f64,
    pub floor: f64,
    /// Generations between probability updates.
    pub update_period: usize,
}

impl Default for AssignmentPolicy {
    fn default() -> Self {
        Self {
            mode: AssignmentMode::Dynamic,
            metric: Metric::RawFitness,
            aggregate: Aggregate::Best,
            temperature: 0.1,
            floor: 0.02,
            update_period: 10,
        }
    }
}

impl AssignmentPolicy {
    pub fn with_mode(mode: AssignmentMode) -> Self {
        Self { mode, ..Self::default() }
    }

    pub fn validate(&self, substrates: usize) -> Result<()> {
        if substrates == 0 {
            return Err(Error::config("at least one substrate is required"));
        }
        if !(self.temperature > 0.0) {
            return Err(Error::config("temperature must be positive"));
        }
        if !(self.floor >= 0.0) || self.floor * substrates as f64 >= 1.0 {
            return Err(Error::config(format!(
                "floor {} is infeasible for {} substrates",
                self.floor, substrates
            )));
        }
        if self.update_period == 0 {
            return Err(Error::config("update_period must be at least 1"));
        }
        Ok(())
    }
}

/// Static layer of a reef cell: `T` contiguous row-major regions of near-equal size.
pub fn static_region(cell: usize, cells: usize, substrates: usize) -> usize {
    cell * substrates / cells
}

/// Draws an index from the categorical distribution `p`.
pub fn draw_tag<R: Rng + ?Sized>(p: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &pi) in p.iter().enumerate() {
        acc += pi;
        if u < acc {
            return i;
        }
    }
    // u landed in the rounding gap above the cumulative sum
    p.iter().rposition(|&pi| pi > 0.0).unwrap_or(0)
}

#[derive(Debug, Clone, Default, PartialEq)]
struct Window {
    produced: u64,
    settled: u64,
    fitness_sum: f64,
    fitness_min: f64,
    fitness_max: f64,
    improvement_sum: f64,
    improvement_max: f64,
    improvement_min: f64,
}

impl Window {
    fn new() -> Self {
        Self {
            fitness_min: f64::INFINITY,
            fitness_max: f64::NEG_INFINITY,
            improvement_max: f64::NEG_INFINITY,
            improvement_min: f64::INFINITY,
            ..Default::default()
        }
    }
}

/// Per-run probabilities and the credit accumulated in the current window.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityState {
    probabilities: Vec<f64>,
    metrics: Vec<f64>,
    windows: Vec<Window>,
}

impl ProbabilityState {
    /// Uniform probabilities over `substrates` entries.
    pub fn new(substrates: usize) -> Self {
        assert!(substrates > 0, "at least one substrate");
        Self {
            probabilities: vec![1.0 / substrates as f64; substrates],
            metrics: vec![0.0; substrates],
            windows: vec![Window::new(); substrates],
        }
    }

    /// Starts from an explicit distribution; `p` must be non-negative and sum to one.
    pub fn with_probabilities(p: Vec<f64>) -> Result<Self> {
        let sum: f64 = p.iter().sum();
        if p.is_empty() || p.iter().any(|&v| !(v >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::argument("probabilities must be non-negative and sum to 1"));
        }
        let mut s = Self::new(p.len());
        s.probabilities = p;
        Ok(s)
    }

    pub fn substrates(&self) -> usize {
        self.probabilities.len()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Metrics computed at the most recent update.
    pub fn metrics(&self) -> &[f64] {
        &self.metrics
    }

    /// Tags for `cells` reef cells under `policy`.
    ///
    /// `occupied[c]` says whether cell `c` holds a coral; empty cells get no
    /// draw and are reported as `None`.
    pub fn assign_tags<R: Rng + ?Sized>(
        &self,
        policy: &AssignmentPolicy,
        occupied: &[bool],
        rng: &mut R,
    ) -> Vec<Option<usize>> {
        let t = self.substrates();
        let uniform = vec![1.0 / t as f64; t];
        occupied
            .iter()
            .enumerate()
            .map(|(cell, &occ)| {
                occ.then(|| match policy.mode {
                    AssignmentMode::Static => static_region(cell, occupied.len(), t),
                    AssignmentMode::UniformProbabilistic => draw_tag(&uniform, rng),
                    AssignmentMode::Dynamic => draw_tag(&self.probabilities, rng),
                })
            })
            .collect()
    }

    /// Probabilities a trace should report for `policy`: the constant uniform
    /// vector for the non-adaptive modes, the live vector otherwise.
    pub fn reported(&self, policy: &AssignmentPolicy) -> Vec<f64> {
        match policy.mode {
            AssignmentMode::Dynamic => self.probabilities.clone(),
            _ => vec![1.0 / self.substrates() as f64; self.substrates()],
        }
    }

    /// Credits one larva produced by substrate `tag`.
    pub fn record_outcome(&mut self, tag: usize, larva_fitness: f64, settled: bool, previous_best: f64) {
        let w = &mut self.windows[tag];
        w.produced += 1;
        if settled {
            w.settled += 1;
        }
        w.fitness_sum += larva_fitness;
        w.fitness_min = w.fitness_min.min(larva_fitness);
        w.fitness_max = w.fitness_max.max(larva_fitness);
        let gain = (previous_best - larva_fitness).max(0.0);
        w.improvement_sum += gain;
        w.improvement_max = w.improvement_max.max(gain);
        w.improvement_min = w.improvement_min.min(gain);
    }

    pub fn produced(&self, tag: usize) -> u64 {
        self.windows[tag].produced
    }

    pub fn settled(&self, tag: usize) -> u64 {
        self.windows[tag].settled
    }

    pub fn window_has_larvae(&self) -> bool {
        self.windows.iter().any(|w| w.produced > 0)
    }

    /// Aggregated larva fitness of substrate `tag` in the current window.
    pub fn aggregate_fitness(&self, tag: usize, aggregate: Aggregate) -> Option<f64> {
        let w = &self.windows[tag];
        (w.produced > 0).then(|| match aggregate {
            Aggregate::Mean => w.fitness_sum / w.produced as f64,
            Aggregate::Best => w.fitness_min,
            Aggregate::Worst => w.fitness_max,
        })
    }

    /// Aggregated improvement credit of substrate `tag` in the current window.
    pub fn aggregate_improvement(&self, tag: usize, aggregate: Aggregate) -> Option<f64> {
        let w = &self.windows[tag];
        (w.produced > 0).then(|| match aggregate {
            Aggregate::Mean => w.improvement_sum / w.produced as f64,
            Aggregate::Best => w.improvement_max,
            Aggregate::Worst => w.improvement_min,
        })
    }

    /// Raw (un-normalized) metric per substrate; `None` for substrates that
    /// produced nothing this window.
    pub fn raw_metrics(&self, policy: &AssignmentPolicy) -> Vec<Option<f64>> {
        (0..self.substrates())
            .map(|i| match policy.metric {
                Metric::SuccessRate => {
                    let w = &self.windows[i];
                    (w.produced > 0).then(|| w.settled as f64 / w.produced as f64)
                }
                Metric::RawFitness => self.aggregate_fitness(i, policy.aggregate).map(|f| -f),
                Metric::FitnessImprovement => self.aggregate_improvement(i, policy.aggregate),
            })
            .collect()
    }

    /// Normalized metrics for the closing window.
    pub fn compute_metrics(&self, policy: &AssignmentPolicy) -> Result<Vec<f64>> {
        normalize_metrics(&self.raw_metrics(policy))
    }

    /// Closes the window: recomputes the metrics, refits the probabilities and
    /// clears the accumulators.
    pub fn update_probabilities(&mut self, policy: &AssignmentPolicy) -> Result<&[f64]> {
        if !(policy.temperature > 0.0) {
            return Err(Error::config("temperature must be positive"));
        }
        let m = self.compute_metrics(policy)?;
        self.probabilities = apply_floor(&softmax(&m, policy.temperature), policy.floor);
        self.metrics = m;
        self.reset_window();
        Ok(&self.probabilities)
    }

    pub fn reset_window(&mut self) {
        self.windows.iter_mut().for_each(|w| *w = Window::new());
    }
}

/// Min-max normalizes to `[0, 1]`. Missing entries take the minimum of the
/// present ones; an all-equal vector maps to `0.5` everywhere.
pub fn normalize_metrics(raw: &[Option<f64>]) -> Result<Vec<f64>> {
    let present: Vec<f64> = raw.iter().flatten().copied().collect();
    if present.is_empty() {
        return Err(Error::state("no substrate produced larvae in this window"));
    }
    let lo = present.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = present.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let filled = raw.iter().map(|m| m.unwrap_or(lo));
    if !(hi > lo) || !(hi - lo).is_finite() {
        return Ok(if hi > lo {
            // infinite spread: rank by comparison against the extremes
            filled.map(|v| if v == hi { 1.0 } else if v == lo { 0.0 } else { 0.5 }).collect()
        } else {
            vec![0.5; raw.len()]
        });
    }
    Ok(filled.map(|v| (v - lo) / (hi - lo)).collect())
}

/// `p_i = exp(m_i / tau) / sum_j exp(m_j / tau)`, computed with the maximum
/// subtracted for stability.
pub fn softmax(m: &[f64], tau: f64) -> Vec<f64> {
    let top = m.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = m.iter().map(|&v| ((v - top) / tau).exp()).collect();
    let z: f64 = e.iter().sum();
    e.into_iter().map(|v| v / z).collect()
}

/// Raises every entry below `floor` to `floor` and rescales the remaining
/// entries by `(1 - floor * k) / their_sum`, repeating until stable.
pub fn apply_floor(p: &[f64], floor: f64) -> Vec<f64> {
    let mut out = p.to_vec();
    if floor <= 0.0 {
        return out;
    }
    let mut pinned = vec![false; p.len()];
    loop {
        let mut changed = false;
        for (v, pin) in out.iter_mut().zip(pinned.iter_mut()) {
            if !*pin && *v < floor {
                *pin = true;
                changed = true;
            }
        }
        let k = pinned.iter().filter(|&&b| b).count();
        let free_mass: f64 = out.iter().zip(&pinned).filter(|(_, &b)| !b).map(|(v, _)| v).sum();
        let target = 1.0 - floor * k as f64;
        for (v, &pin) in out.iter_mut().zip(&pinned) {
            *v = if pin { floor } else { *v * target / free_mass };
        }
        if !changed || k == out.len() {
            return out;
        }
    }
}
