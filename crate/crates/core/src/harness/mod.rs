//! Repeated seeded runs, summary statistics and CSV export.

mod config;

pub use config::{ExperimentConfig, ObjectiveSpec, PolicyConfig, Variant};

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::reef::{GenerationStats, Optimizer};
use crate::windfarm::Layout;
use crate::{Error, Result};

/// One row of a run trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    /// 0 is the freshly initialized reef.
    pub generation: usize,
    pub best: f64,
    pub mean: f64,
    pub evaluations: u64,
    pub probabilities: Vec<f64>,
}

impl From<&GenerationStats> for TraceRow {
    fn from(s: &GenerationStats) -> Self {
        Self {
            generation: s.generation,
            best: s.best,
            mean: s.mean,
            evaluations: s.evaluations,
            probabilities: s.probabilities.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub seed: u64,
    pub rows: Vec<TraceRow>,
    pub best_genome: Vec<f64>,
    pub best_fitness: f64,
    pub evaluations: u64,
    pub wall_time: Duration,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub best: f64,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub function: String,
    pub variant: Variant,
    pub substrate_names: Vec<String>,
    /// Whether best genomes are turbine layouts.
    pub layout: bool,
    pub summary: Summary,
    pub records: Vec<RunRecord>,
}

/// Best (minimum), mean and population standard deviation.
pub fn aggregate_stats(values: &[f64]) -> Result<Summary> {
    if values.is_empty() {
        return Err(Error::argument("cannot aggregate an empty list"));
    }
    if values.iter().all(|v| *v == values[0]) {
        return Ok(Summary { best: values[0], mean: values[0], std: 0.0 });
    }
    let n = values.len() as f64;
    let best = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Ok(Summary { best, mean, std: var.sqrt() })
}

/// Runs a single repetition with the given seed.
pub fn run_once(config: &ExperimentConfig, seed: u64) -> Result<RunRecord> {
    let start = Instant::now();
    let objective = config.objective.build()?;
    let mut opt = Optimizer::new(objective, config.optimizer_config(), seed)?;
    let mut rows = vec![TraceRow {
        generation: 0,
        best: opt.best().fitness,
        mean: opt.reef().mean_fitness(),
        evaluations: opt.reef().evaluations_used(),
        probabilities: opt.probabilities(),
    }];
    while !opt.is_finished() {
        rows.push(TraceRow::from(&opt.step()?));
    }
    let best = opt.best();
    Ok(RunRecord {
        seed,
        rows,
        best_genome: best.genome.clone(),
        best_fitness: best.fitness,
        evaluations: opt.reef().evaluations_used(),
        wall_time: start.elapsed(),
    })
}

/// Runs `repetitions` independent runs in parallel with seeds `seed + r`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let records = (0..config.repetitions as u64)
        .into_par_iter()
        .map(|r| run_once(config, config.seed.wrapping_add(r)))
        .collect::<Result<Vec<_>>>()?;
    let finals: Vec<f64> = records.iter().map(|r| r.best_fitness).collect();
    Ok(ExperimentResult {
        function: config.objective.name(),
        variant: config.variant,
        substrate_names: config.substrates.iter().map(|s| s.to_string()).collect(),
        layout: matches!(config.objective, ObjectiveSpec::Windfarm { .. }),
        summary: aggregate_stats(&finals)?,
        records,
    })
}

/// Writes `summary.csv`, `trace_run<r>.csv` for each repetition and
/// `best_solution.csv` into `dir`. Returns the written paths.
pub fn export_traces(results: &[ExperimentResult], dir: &Path) -> Result<Vec<PathBuf>> {
    if results.is_empty() || results.iter().any(|r| r.records.is_empty()) {
        return Err(Error::argument("no run records to export"));
    }
    fs::create_dir_all(dir)?;
    let multi = results.len() > 1;
    let mut written = Vec::new();

    let summary_path = dir.join("summary.csv");
    let mut w = csv::Writer::from_path(&summary_path)?;
    w.write_record(["function", "variant", "best", "mean", "std"])?;
    for res in results {
        let s = res.summary;
        w.write_record([
            res.function.clone(),
            res.variant.label().to_string(),
            s.best.to_string(),
            s.mean.to_string(),
            s.std.to_string(),
        ])?;
    }
    w.flush()?;
    written.push(summary_path);

    for res in results {
        let prefix = if multi { format!("{}_", res.variant.key()) } else { String::new() };
        for (r, record) in res.records.iter().enumerate() {
            let path = dir.join(format!("{prefix}trace_run{r}.csv"));
            write_trace(&path, &res.substrate_names, record)?;
            written.push(path);
        }
        let best = res
            .records
            .iter()
            .min_by(|a, b| a.best_fitness.total_cmp(&b.best_fitness))
            .expect("non-empty records");
        let path = dir.join(format!("{prefix}best_solution.csv"));
        write_best(&path, res.layout, &best.best_genome)?;
        written.push(path);
    }
    Ok(written)
}

fn write_trace(path: &Path, names: &[String], record: &RunRecord) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["generation".to_string(), "best".into(), "mean".into(), "evals".into()];
    header.extend(names.iter().map(|n| format!("p_{n}")));
    w.write_record(&header)?;
    for row in &record.rows {
        let mut fields = vec![
            row.generation.to_string(),
            row.best.to_string(),
            row.mean.to_string(),
            row.evaluations.to_string(),
        ];
        fields.extend(row.probabilities.iter().map(f64::to_string));
        w.write_record(&fields)?;
    }
    w.flush()?;
    Ok(())
}

fn write_best(path: &Path, layout: bool, genome: &[f64]) -> Result<()> {
    if layout {
        return Layout::from_genome(genome)?.write_csv(fs::File::create(path)?);
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["j", "value"])?;
    for (j, v) in genome.iter().enumerate() {
        w.write_record([(j + 1).to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
