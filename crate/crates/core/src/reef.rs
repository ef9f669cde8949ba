//! The reef population and the CRO generational loop.
//!
//! A generation runs tag assignment, broadcast spawning and brooding, larvae
//! setting, budding, credit bookkeeping (with a probability refit at the end
//! of each update window) and depredation. Fitness is minimized throughout.

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::local_search::{cauchy_local_search, LocalSearchParams};
use crate::operators::{cmp_fitness, gaussian, Bounds, OperatorContext, OperatorParams, Population, Substrate};
use crate::probability::{AssignmentMode, AssignmentPolicy, ProbabilityState};
use crate::{BoundedObjective, Error, Result};

/// Brooding and budding perturb with `Normal(0, (0.02 (A - B))^2)`.
pub const BROOD_SIGMA_FRACTION: f64 = 0.02;

// Tolerance when converting fractions to counts, so 0.9 * 60 counts as 54.
const COUNT_EPS: f64 = 1e-9;

fn fraction_count(fraction: f64, n: usize) -> usize {
    ((fraction * n as f64) + COUNT_EPS).floor() as usize
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReefParams {
    pub rows: usize,
    pub cols: usize,
    /// Fraction of cells occupied at initialization, `rho_0`.
    pub init_occupancy: f64,
    /// Fraction of corals that reproduce by broadcast spawning, `F_b`.
    pub broadcast_fraction: f64,
    /// Fraction of best corals that bud each generation, `F_a`.
    pub budding_fraction: f64,
    /// Fraction of worst corals exposed to depredation, `F_dep`.
    pub depredation_fraction: f64,
    /// Removal probability for an exposed coral, `P_d`.
    pub depredation_prob: f64,
    /// Cells a larva may try before it is discarded.
    pub settle_attempts: usize,
}

impl Default for ReefParams {
    fn default() -> Self {
        Self {
            rows: 10,
            cols: 10,
            init_occupancy: 0.6,
            broadcast_fraction: 0.9,
            budding_fraction: 0.05,
            depredation_fraction: 0.1,
            depredation_prob: 0.1,
            settle_attempts: 3,
        }
    }
}

impl ReefParams {
    pub fn with_grid(rows: usize, cols: usize) -> Self {
        Self { rows, cols, ..Self::default() }
    }

    pub fn capacity(&self) -> usize {
        self.rows * self.cols
    }

    /// Number of corals placed at initialization, `ceil(rho_0 M N)`.
    pub fn initial_count(&self) -> usize {
        let exact = self.init_occupancy * self.capacity() as f64;
        ((exact - COUNT_EPS).ceil() as usize).clamp(1, self.capacity())
    }

    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, what: &str| if ok { Ok(()) } else { Err(Error::config(what.to_string())) };
        check(self.rows >= 1 && self.cols >= 1, "reef grid must be at least 1x1")?;
        check(
            self.init_occupancy > 0.0 && self.init_occupancy <= 1.0,
            "init_occupancy must lie in (0, 1]",
        )?;
        check(
            self.broadcast_fraction > 0.0 && self.broadcast_fraction < 1.0,
            "broadcast_fraction must lie in (0, 1)",
        )?;
        check((0.0..1.0).contains(&self.budding_fraction), "budding_fraction must lie in [0, 1)")?;
        check(
            (0.0..1.0).contains(&self.depredation_fraction),
            "depredation_fraction must lie in [0, 1)",
        )?;
        check((0.0..=1.0).contains(&self.depredation_prob), "depredation_prob must lie in [0, 1]")?;
        check(self.settle_attempts >= 1, "settle_attempts must be at least 1")?;
        Ok(())
    }
}

/// A candidate solution living in a reef cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Coral {
    pub genome: Vec<f64>,
    pub fitness: f64,
    /// Substrate that currently drives this coral's reproduction.
    pub tag: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LarvaOrigin {
    /// Produced by the substrate operator named by the larva's tag.
    Broadcast,
    Brooding,
    Budding,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Larva {
    pub coral: Coral,
    pub origin: LarvaOrigin,
}

/// Where a larva ended up after [`Reef::settle_larvae`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Settlement {
    pub settled: bool,
    pub cell: Option<usize>,
}

/// An `rows x cols` grid of optional corals with evaluation accounting.
#[derive(Debug, Clone, PartialEq)]
pub struct Reef {
    params: ReefParams,
    cells: Vec<Option<Coral>>,
    generation: usize,
    evaluations_used: u64,
    budget: Option<u64>,
}

impl Reef {
    /// Fills `ceil(rho_0 M N)` random distinct cells with uniform random
    /// genomes and evaluates them.
    pub fn init(params: &ReefParams, objective: &BoundedObjective, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::init_with_rng(params, objective, None, &mut rng)
    }

    pub(crate) fn init_with_rng<R: Rng + ?Sized>(
        params: &ReefParams,
        objective: &BoundedObjective,
        budget: Option<u64>,
        rng: &mut R,
    ) -> Result<Self> {
        params.validate()?;
        let capacity = params.capacity();
        let count = params.initial_count();
        if let Some(b) = budget {
            if b < count as u64 {
                return Err(Error::config(format!(
                    "evaluation budget {b} is smaller than the initial reef ({count} corals)"
                )));
            }
        }
        let mut cells = vec![None; capacity];
        let span = objective.span();
        for cell in index::sample(rng, capacity, count) {
            let genome: Vec<f64> = (0..objective.dimension())
                .map(|_| objective.lower() + span * rng.random::<f64>())
                .collect();
            let fitness = objective.evaluate(&genome);
            cells[cell] = Some(Coral { genome, fitness, tag: 0 });
        }
        Ok(Self { params: params.clone(), cells, generation: 0, evaluations_used: count as u64, budget })
    }

    pub fn params(&self) -> &ReefParams {
        &self.params
    }

    pub fn cells(&self) -> &[Option<Coral>] {
        &self.cells
    }

    pub fn capacity(&self) -> usize {
        self.cells.len()
    }

    pub fn generation(&self) -> usize {
        self.generation
    }

    pub fn evaluations_used(&self) -> u64 {
        self.evaluations_used
    }

    /// Evaluations left under the budget, if one is set.
    pub fn remaining(&self) -> Option<u64> {
        self.budget.map(|b| b.saturating_sub(self.evaluations_used))
    }

    pub fn budget_exhausted(&self) -> bool {
        self.remaining() == Some(0)
    }

    pub fn occupied(&self) -> usize {
        self.cells.iter().filter(|c| c.is_some()).count()
    }

    pub fn occupancy_mask(&self) -> Vec<bool> {
        self.cells.iter().map(Option::is_some).collect()
    }

    pub fn corals(&self) -> impl Iterator<Item = &Coral> {
        self.cells.iter().flatten()
    }

    fn occupied_cells(&self) -> Vec<usize> {
        (0..self.cells.len()).filter(|&c| self.cells[c].is_some()).collect()
    }

    /// Cell index of the lowest-fitness coral (first on ties).
    pub fn best_cell(&self) -> Option<usize> {
        self.occupied_cells()
            .into_iter()
            .min_by(|&a, &b| cmp_fitness(self.fitness_at(a), self.fitness_at(b)))
    }

    pub fn best(&self) -> Option<&Coral> {
        self.best_cell().and_then(|c| self.cells[c].as_ref())
    }

    pub fn mean_fitness(&self) -> f64 {
        let (sum, n) = self.corals().fold((0.0, 0usize), |(s, n), c| (s + c.fitness, n + 1));
        sum / n as f64
    }

    fn fitness_at(&self, cell: usize) -> f64 {
        self.cells[cell].as_ref().map_or(f64::INFINITY, |c| c.fitness)
    }

    /// Sets every occupied coral's tag; `tags` is indexed by cell.
    pub fn set_tags(&mut self, tags: &[Option<usize>]) {
        for (cell, tag) in self.cells.iter_mut().zip(tags) {
            if let (Some(coral), Some(t)) = (cell.as_mut(), tag) {
                coral.tag = *t;
            }
        }
    }

    /// Evaluates as many genomes as the budget allows, in order; genomes past
    /// the budget are dropped.
    fn evaluate_batch(&mut self, objective: &BoundedObjective, genomes: Vec<(Vec<f64>, usize, LarvaOrigin)>) -> Vec<Larva> {
        let allowed = self.remaining().map_or(genomes.len(), |r| genomes.len().min(r as usize));
        let larvae: Vec<Larva> = genomes
            .into_iter()
            .take(allowed)
            .map(|(genome, tag, origin)| {
                let fitness = objective.evaluate(&genome);
                Larva { coral: Coral { genome, fitness, tag }, origin }
            })
            .collect();
        self.evaluations_used += larvae.len() as u64;
        larvae
    }

    fn bounds_of(objective: &BoundedObjective) -> Bounds {
        Bounds::new(objective.lower(), objective.upper())
    }

    /// Broadcast spawning and brooding.
    ///
    /// A random `floor(F_b n)` of the `n` corals reproduce through their tagged
    /// substrate; the rest brood. A coral whose substrate cannot run on the
    /// current reef (too few members) broods instead.
    pub fn spawn_offspring<R: Rng + ?Sized>(
        &mut self,
        objective: &BoundedObjective,
        substrates: &[Substrate],
        ctx: &OperatorContext<'_>,
        rng: &mut R,
    ) -> Result<Vec<Larva>> {
        let cells = self.occupied_cells();
        if cells.is_empty() {
            return Err(Error::state("cannot spawn from an empty reef"));
        }
        let corals: Vec<&Coral> = cells.iter().map(|&c| self.cells[c].as_ref().unwrap()).collect();
        if let Some(bad) = corals.iter().find(|c| c.tag >= substrates.len()) {
            return Err(Error::state(format!("coral tag {} has no substrate", bad.tag)));
        }
        let population = Population::new(corals.iter().map(|c| (c.genome.as_slice(), c.fitness)));
        let mut order: Vec<usize> = (0..corals.len()).collect();
        order.shuffle(rng);
        let n_broadcast = fraction_count(self.params.broadcast_fraction, corals.len());
        let sigma = BROOD_SIGMA_FRACTION * ctx.bounds.span();

        let mut genomes = Vec::with_capacity(corals.len());
        for (k, &i) in order.iter().enumerate() {
            let parent = corals[i];
            let produced = if k < n_broadcast {
                match substrates[parent.tag].apply(i, &population, ctx, rng) {
                    Ok(g) => Some(g),
                    Err(Error::OperatorInapplicable { .. }) => None,
                    Err(e) => return Err(e),
                }
            } else {
                None
            };
            genomes.push(match produced {
                Some(g) => (g, parent.tag, LarvaOrigin::Broadcast),
                None => (gaussian(&parent.genome, sigma, ctx.bounds, rng), parent.tag, LarvaOrigin::Brooding),
            });
        }
        Ok(self.evaluate_batch(objective, genomes))
    }

    /// Larvae setting: each larva tries up to `settle_attempts` random cells
    /// and takes the first that is empty or held by a strictly worse coral.
    pub fn settle_larvae<R: Rng + ?Sized>(&mut self, larvae: &[Larva], rng: &mut R) -> Vec<Settlement> {
        let capacity = self.capacity();
        larvae
            .iter()
            .map(|larva| {
                for _ in 0..self.params.settle_attempts {
                    let cell = rng.random_range(0..capacity);
                    let take = match &self.cells[cell] {
                        None => true,
                        Some(incumbent) => larva.coral.fitness < incumbent.fitness,
                    };
                    if take {
                        self.cells[cell] = Some(larva.coral.clone());
                        return Settlement { settled: true, cell: Some(cell) };
                    }
                }
                Settlement { settled: false, cell: None }
            })
            .collect()
    }

    /// Asexual reproduction: the best `floor(F_a n)` corals are copied,
    /// perturbed like brooding, and evaluated.
    pub fn budding<R: Rng + ?Sized>(&mut self, objective: &BoundedObjective, rng: &mut R) -> Result<Vec<Larva>> {
        let mut cells = self.occupied_cells();
        if cells.is_empty() {
            return Err(Error::state("cannot bud from an empty reef"));
        }
        let count = fraction_count(self.params.budding_fraction, cells.len());
        cells.sort_by(|&a, &b| cmp_fitness(self.fitness_at(a), self.fitness_at(b)));
        let bounds = Self::bounds_of(objective);
        let sigma = BROOD_SIGMA_FRACTION * bounds.span();
        let genomes = cells[..count]
            .iter()
            .map(|&c| {
                let coral = self.cells[c].as_ref().unwrap();
                (gaussian(&coral.genome, sigma, bounds, rng), coral.tag, LarvaOrigin::Budding)
            })
            .collect();
        Ok(self.evaluate_batch(objective, genomes))
    }

    /// Each coral among the worst `floor(F_dep n)` is removed with probability
    /// `P_d`. The reef's best coral is never removed. Returns the removal count.
    pub fn depredation<R: Rng + ?Sized>(&mut self, rng: &mut R) -> usize {
        let mut cells = self.occupied_cells();
        let exposed = fraction_count(self.params.depredation_fraction, cells.len());
        if exposed == 0 {
            return 0;
        }
        cells.sort_by(|&a, &b| cmp_fitness(self.fitness_at(a), self.fitness_at(b)));
        let best = cells[0];
        let mut removed = 0;
        for &cell in cells.iter().rev().take(exposed) {
            if cell == best {
                continue;
            }
            if rng.random::<f64>() < self.params.depredation_prob {
                self.cells[cell] = None;
                removed += 1;
            }
        }
        removed
    }

    /// Replaces the coral in `cell` with a better genome found by local search.
    fn improve_cell(&mut self, cell: usize, genome: Vec<f64>, fitness: f64) {
        if let Some(coral) = self.cells[cell].as_mut() {
            debug_assert!(fitness <= coral.fitness);
            coral.genome = genome;
            coral.fitness = fitness;
        }
    }
}

/// When a run stops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Horizon {
    /// Total objective evaluations, initialization included.
    Evaluations(u64),
    Generations(usize),
}

/// Summary of one completed generation.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationStats {
    /// 1-based index of the generation just completed.
    pub generation: usize,
    pub best: f64,
    pub mean: f64,
    /// Cumulative objective evaluations.
    pub evaluations: u64,
    pub occupied: usize,
    pub settled: usize,
    pub removed: usize,
    pub probabilities: Vec<f64>,
    pub budget_exhausted: bool,
}

#[derive(Debug, Clone, Copy)]
enum Phase {
    Tags = 1,
    Spawn,
    Settle,
    Bud,
    BudSettle,
    LocalSearch,
    Depredation,
}

/// A configured CRO-SL run: reef, operator bank, assignment policy and
/// stopping rule.
#[derive(Debug)]
pub struct Optimizer {
    objective: BoundedObjective,
    reef: Reef,
    substrates: Vec<Substrate>,
    operator_params: OperatorParams,
    policy: AssignmentPolicy,
    state: ProbabilityState,
    horizon: Horizon,
    local_search: Option<LocalSearchParams>,
    evals_at_last_search: u64,
    seed: u64,
}

/// Builder-style inputs for [`Optimizer::new`].
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub reef: ReefParams,
    pub substrates: Vec<Substrate>,
    pub operators: OperatorParams,
    pub policy: AssignmentPolicy,
    pub horizon: Horizon,
    pub local_search: Option<LocalSearchParams>,
}

impl OptimizerConfig {
    pub fn new(substrates: Vec<Substrate>, mode: AssignmentMode, horizon: Horizon) -> Self {
        Self {
            reef: ReefParams::default(),
            substrates,
            operators: OperatorParams::default(),
            policy: AssignmentPolicy::with_mode(mode),
            horizon,
            local_search: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.reef.validate()?;
        self.operators.validate()?;
        self.policy.validate(self.substrates.len())?;
        if let Some(ls) = &self.local_search {
            ls.validate()?;
        }
        match self.horizon {
            Horizon::Evaluations(b) if b < self.reef.initial_count() as u64 => Err(Error::config(format!(
                "budget {} is below the initial reef size {}",
                b,
                self.reef.initial_count()
            ))),
            Horizon::Generations(0) => Err(Error::config("generation horizon must be at least 1")),
            _ => Ok(()),
        }
    }
}

impl Optimizer {
    pub fn new(objective: BoundedObjective, config: OptimizerConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let budget = match config.horizon {
            Horizon::Evaluations(b) => Some(b),
            Horizon::Generations(_) => None,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let reef = Reef::init_with_rng(&config.reef, &objective, budget, &mut rng)?;
        let state = ProbabilityState::new(config.substrates.len());
        let evals = reef.evaluations_used();
        Ok(Self {
            objective,
            reef,
            substrates: config.substrates,
            operator_params: config.operators,
            policy: config.policy,
            state,
            horizon: config.horizon,
            local_search: config.local_search,
            evals_at_last_search: evals,
            seed,
        })
    }

    pub fn objective(&self) -> &BoundedObjective {
        &self.objective
    }

    pub fn reef(&self) -> &Reef {
        &self.reef
    }

    pub fn state(&self) -> &ProbabilityState {
        &self.state
    }

    pub fn policy(&self) -> &AssignmentPolicy {
        &self.policy
    }

    pub fn substrates(&self) -> &[Substrate] {
        &self.substrates
    }

    pub fn best(&self) -> &Coral {
        self.reef.best().expect("reef keeps its best coral")
    }

    /// Probabilities as a trace should report them.
    pub fn probabilities(&self) -> Vec<f64> {
        self.state.reported(&self.policy)
    }

    pub fn is_finished(&self) -> bool {
        match self.horizon {
            Horizon::Evaluations(_) => self.reef.budget_exhausted(),
            Horizon::Generations(g) => self.reef.generation >= g,
        }
    }

    /// Fraction of the run elapsed, driving the Gaussian mutation schedule.
    pub fn progress(&self) -> f64 {
        match self.horizon {
            Horizon::Evaluations(b) => self.reef.evaluations_used as f64 / b as f64,
            Horizon::Generations(g) => self.reef.generation as f64 / g as f64,
        }
    }

    fn phase_rng(&self, phase: Phase) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.reef.generation as u64 * 8 + phase as u64);
        rng
    }

    /// Runs one generation. Once the horizon is reached further calls return
    /// [`Error::BudgetExhausted`].
    pub fn step(&mut self) -> Result<GenerationStats> {
        if self.is_finished() {
            return Err(Error::BudgetExhausted);
        }
        let previous_best = self.best().fitness;

        let tags = self
            .state
            .assign_tags(&self.policy, &self.reef.occupancy_mask(), &mut self.phase_rng(Phase::Tags));
        self.reef.set_tags(&tags);

        let bounds = Bounds::new(self.objective.lower(), self.objective.upper());
        let ctx = OperatorContext { params: &self.operator_params, bounds, progress: self.progress() };
        let larvae = self
            .reef
            .spawn_offspring(&self.objective, &self.substrates, &ctx, &mut self.phase_rng(Phase::Spawn))?;
        let report = self.reef.settle_larvae(&larvae, &mut self.phase_rng(Phase::Settle));
        for (larva, s) in larvae.iter().zip(&report) {
            if larva.origin == LarvaOrigin::Broadcast {
                self.state.record_outcome(larva.coral.tag, larva.coral.fitness, s.settled, previous_best);
            }
        }
        let mut settled = report.iter().filter(|s| s.settled).count();

        let buds = self.reef.budding(&self.objective, &mut self.phase_rng(Phase::Bud))?;
        settled += self
            .reef
            .settle_larvae(&buds, &mut self.phase_rng(Phase::BudSettle))
            .iter()
            .filter(|s| s.settled)
            .count();

        let window_closed = (self.reef.generation + 1).is_multiple_of(self.policy.update_period);
        if window_closed {
            if self.policy.mode == AssignmentMode::Dynamic && self.state.window_has_larvae() {
                self.state.update_probabilities(&self.policy)?;
            } else {
                self.state.reset_window();
            }
            self.run_local_search();
        }

        let removed = self.reef.depredation(&mut self.phase_rng(Phase::Depredation));
        self.reef.generation += 1;

        Ok(GenerationStats {
            generation: self.reef.generation,
            best: self.best().fitness,
            mean: self.reef.mean_fitness(),
            evaluations: self.reef.evaluations_used,
            occupied: self.reef.occupied(),
            settled,
            removed,
            probabilities: self.probabilities(),
            budget_exhausted: self.reef.budget_exhausted(),
        })
    }

    fn run_local_search(&mut self) {
        let Some(ls) = self.local_search.clone() else { return };
        let since = self.reef.evaluations_used - self.evals_at_last_search;
        let mut budget = (ls.budget_fraction * since as f64).floor() as u64;
        if let Some(r) = self.reef.remaining() {
            budget = budget.min(r);
        }
        if budget == 0 {
            return;
        }
        let cell = self.reef.best_cell().expect("non-empty reef");
        let coral = self.reef.cells[cell].as_ref().unwrap();
        let mut rng = self.phase_rng(Phase::LocalSearch);
        let out = cauchy_local_search(&coral.genome, coral.fitness, &self.objective, ls.eta, budget, &mut rng);
        self.reef.evaluations_used += out.evaluations;
        self.evals_at_last_search = self.reef.evaluations_used;
        if out.improvements > 0 {
            self.reef.improve_cell(cell, out.genome, out.fitness);
        }
    }

    /// Steps until the horizon is reached.
    pub fn run(&mut self) -> Result<Vec<GenerationStats>> {
        let mut out = Vec::new();
        while !self.is_finished() {
            out.push(self.step()?);
        }
        Ok(out)
    }
}
