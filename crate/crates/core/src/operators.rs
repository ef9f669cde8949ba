//! Substrate search operators.
//!
//! Every operator maps a parent genome (plus, for the recombining ones, other
//! reef members) to a single offspring genome clamped to the search box. All
//! randomness comes from the caller's generator, so an operator is a pure
//! function of its inputs and the generator state.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use rand_distr::{Cauchy, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Closed search interval applied to every coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
}

impl Bounds {
    pub fn new(lower: f64, upper: f64) -> Self {
        Self { lower, upper }
    }

    pub fn span(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn clamp(&self, x: &mut [f64]) {
        for v in x {
            *v = v.clamp(self.lower, self.upper);
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().all(|v| (self.lower..=self.upper).contains(v))
    }
}

/// Tunable constants of the operator bank.
///
/// The firefly noise amplitude and the Cauchy scale default to a fraction of
/// the search width when left as `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OperatorParams {
    /// DE scaling factor `F`, in `[0, 2]`.
    pub de_scale: f64,
    /// DE crossover probability `CR`.
    pub de_cross: f64,
    /// Fraction of the population eligible as `X_pbest`.
    pub pbest_fraction: f64,
    pub blx_alpha: f64,
    pub firefly_beta0: f64,
    pub firefly_gamma: f64,
    /// Absolute amplitude of the firefly random step; default `0.01 (A - B)`.
    pub firefly_alpha: Option<f64>,
    /// Size of the random sample of brighter corals the attractor is taken from.
    pub firefly_sample: usize,
    /// Gaussian mutation sigma at the start of the run, as a fraction of `A - B`.
    pub gm_start_fraction: f64,
    /// Gaussian mutation sigma at the end of the run, as a fraction of `A - B`.
    pub gm_end_fraction: f64,
    /// Multiplier `eta` of the Cauchy step; default `0.01 (A - B)`.
    pub cauchy_scale: Option<f64>,
    /// Scale `t` of the Cauchy density.
    pub cauchy_t: f64,
}

impl Default for OperatorParams {
    fn default() -> Self {
        Self {
            de_scale: 0.7,
            de_cross: 0.8,
            pbest_fraction: 0.1,
            blx_alpha: 0.5,
            firefly_beta0: 1.0,
            firefly_gamma: 1.0,
            firefly_alpha: None,
            firefly_sample: 5,
            gm_start_fraction: 0.2,
            gm_end_fraction: 0.02,
            cauchy_scale: None,
            cauchy_t: 1.0,
        }
    }
}

impl OperatorParams {
    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, what: &str| if ok { Ok(()) } else { Err(Error::config(what.to_string())) };
        check((0.0..=2.0).contains(&self.de_scale), "de_scale must lie in [0, 2]")?;
        check((0.0..=1.0).contains(&self.de_cross), "de_cross must lie in [0, 1]")?;
        check(self.pbest_fraction > 0.0 && self.pbest_fraction <= 1.0, "pbest_fraction must lie in (0, 1]")?;
        check(self.blx_alpha >= 0.0, "blx_alpha must be non-negative")?;
        check(self.firefly_beta0 > 0.0, "firefly_beta0 must be positive")?;
        check(self.firefly_gamma > 0.0, "firefly_gamma must be positive")?;
        check(self.firefly_alpha.is_none_or(|a| a >= 0.0), "firefly_alpha must be non-negative")?;
        check(self.firefly_sample >= 1, "firefly_sample must be at least 1")?;
        check(
            self.gm_start_fraction > self.gm_end_fraction && self.gm_end_fraction > 0.0,
            "gaussian sigma must decrease from start to a positive end value",
        )?;
        check(self.cauchy_scale.is_none_or(|e| e >= 0.0), "cauchy_scale must be non-negative")?;
        check(self.cauchy_t > 0.0, "cauchy_t must be positive")?;
        Ok(())
    }

    pub fn firefly_alpha_for(&self, bounds: Bounds) -> f64 {
        self.firefly_alpha.unwrap_or(0.01 * bounds.span())
    }

    pub fn cauchy_scale_for(&self, bounds: Bounds) -> f64 {
        self.cauchy_scale.unwrap_or(0.01 * bounds.span())
    }

    /// Gaussian sigma after a fraction `progress` of the run, interpolated
    /// linearly between the start and end widths.
    pub fn gaussian_sigma(&self, bounds: Bounds, progress: f64) -> f64 {
        let t = progress.clamp(0.0, 1.0);
        let frac = self.gm_start_fraction + (self.gm_end_fraction - self.gm_start_fraction) * t;
        frac * bounds.span()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DeVariant {
    Best1,
    Best2,
    CurrentToBest1,
    CurrentToPBest1,
    Rand2,
}

impl DeVariant {
    /// Number of distinct random members the mutation draws.
    pub fn random_picks(self) -> usize {
        match self {
            DeVariant::Best1 | DeVariant::CurrentToBest1 | DeVariant::CurrentToPBest1 => 2,
            DeVariant::Best2 => 4,
            DeVariant::Rand2 => 5,
        }
    }
}

/// One search strategy of the ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Substrate {
    De(DeVariant),
    Firefly,
    TwoPoint,
    Blx,
    Gaussian,
    Cauchy,
}

impl Substrate {
    pub const ALL: [Substrate; 10] = [
        Substrate::De(DeVariant::Best1),
        Substrate::De(DeVariant::Best2),
        Substrate::De(DeVariant::CurrentToBest1),
        Substrate::De(DeVariant::CurrentToPBest1),
        Substrate::De(DeVariant::Rand2),
        Substrate::Firefly,
        Substrate::TwoPoint,
        Substrate::Blx,
        Substrate::Gaussian,
        Substrate::Cauchy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Substrate::De(DeVariant::Best1) => "DE/best/1",
            Substrate::De(DeVariant::Best2) => "DE/best/2",
            Substrate::De(DeVariant::CurrentToBest1) => "DE/current-to-best/1",
            Substrate::De(DeVariant::CurrentToPBest1) => "DE/current-to-pbest/1",
            Substrate::De(DeVariant::Rand2) => "DE/rand/2",
            Substrate::Firefly => "Firefly",
            Substrate::TwoPoint => "2Px",
            Substrate::Blx => "BLX",
            Substrate::Gaussian => "GM",
            Substrate::Cauchy => "CM",
        }
    }

    /// Produces one offspring genome for `population.genome(parent)`.
    pub fn apply<R: Rng + ?Sized>(
        self,
        parent: usize,
        population: &Population<'_>,
        ctx: &OperatorContext<'_>,
        rng: &mut R,
    ) -> Result<Vec<f64>> {
        let x = population.genome(parent);
        match self {
            Substrate::De(variant) => de_variant(variant, parent, population, ctx.params, ctx.bounds, rng),
            Substrate::Firefly => Ok(firefly(parent, population, ctx.params, ctx.bounds, rng)),
            Substrate::TwoPoint => {
                let mate = pick_mate(parent, population.len(), self, rng)?;
                two_point(x, population.genome(mate), rng)
            }
            Substrate::Blx => {
                let mate = pick_mate(parent, population.len(), self, rng)?;
                Ok(blx(x, population.genome(mate), ctx.params.blx_alpha, ctx.bounds, rng))
            }
            Substrate::Gaussian => {
                let sigma = ctx.params.gaussian_sigma(ctx.bounds, ctx.progress);
                Ok(gaussian(x, sigma, ctx.bounds, rng))
            }
            Substrate::Cauchy => Ok(cauchy(
                x,
                ctx.params.cauchy_scale_for(ctx.bounds),
                ctx.params.cauchy_t,
                ctx.bounds,
                rng,
            )),
        }
    }
}

impl fmt::Display for Substrate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Substrate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim();
        Substrate::ALL
            .into_iter()
            .find(|sub| sub.name().eq_ignore_ascii_case(key))
            .or(match key.to_ascii_lowercase().as_str() {
                "fa" => Some(Substrate::Firefly),
                "blx-alpha" => Some(Substrate::Blx),
                _ => None,
            })
            .ok_or_else(|| Error::config(format!("unknown substrate '{s}'")))
    }
}

impl TryFrom<String> for Substrate {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Substrate> for String {
    fn from(s: Substrate) -> Self {
        s.name().to_string()
    }
}

/// Inputs shared by every operator call within one generation.
#[derive(Debug, Clone, Copy)]
pub struct OperatorContext<'a> {
    pub params: &'a OperatorParams,
    pub bounds: Bounds,
    /// Fraction of the run already elapsed, in `[0, 1]`.
    pub progress: f64,
}

/// Read-only snapshot of the occupied corals an operator may draw from.
#[derive(Debug, Clone)]
pub struct Population<'a> {
    genomes: Vec<&'a [f64]>,
    fitness: Vec<f64>,
    ranking: Vec<usize>,
}

impl<'a> Population<'a> {
    pub fn new(members: impl IntoIterator<Item = (&'a [f64], f64)>) -> Self {
        let (genomes, fitness): (Vec<_>, Vec<_>) = members.into_iter().unzip();
        let mut ranking: Vec<usize> = (0..fitness.len()).collect();
        ranking.sort_by(|&a, &b| cmp_fitness(fitness[a], fitness[b]));
        Self { genomes, fitness, ranking }
    }

    pub fn len(&self) -> usize {
        self.genomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.genomes.is_empty()
    }

    pub fn genome(&self, i: usize) -> &'a [f64] {
        self.genomes[i]
    }

    pub fn fitness(&self, i: usize) -> f64 {
        self.fitness[i]
    }

    /// Index of the lowest-fitness member (first one on ties).
    pub fn best(&self) -> usize {
        self.ranking[0]
    }

    /// Member indices ordered from best to worst.
    pub fn ranking(&self) -> &[usize] {
        &self.ranking
    }
}

pub(crate) fn cmp_fitness(a: f64, b: f64) -> Ordering {
    a.total_cmp(&b)
}

fn pick_mate<R: Rng + ?Sized>(parent: usize, n: usize, op: Substrate, rng: &mut R) -> Result<usize> {
    if n < 2 {
        return Err(Error::OperatorInapplicable {
            operator: op.name(),
            reason: "needs a second coral to recombine with".into(),
        });
    }
    let m = rng.random_range(0..n - 1);
    Ok(if m >= parent { m + 1 } else { m })
}

/// Draws `count` mutually distinct indices in `0..n`, all different from `exclude`.
pub fn distinct_picks<R: Rng + ?Sized>(n: usize, exclude: usize, count: usize, rng: &mut R) -> Vec<usize> {
    debug_assert!(n > count);
    let mut picks = Vec::with_capacity(count);
    while picks.len() < count {
        let r = rng.random_range(0..n);
        if r != exclude && !picks.contains(&r) {
            picks.push(r);
        }
    }
    picks
}

/// Builds a DE trial vector for member `parent`.
///
/// Randomness is consumed in a fixed order: the distinct random members,
/// then `U` (current-to-best) or the `X_pbest` pick (current-to-pbest), then
/// `j_rand`, then one uniform draw per coordinate for the crossover mask.
pub fn de_variant<R: Rng + ?Sized>(
    variant: DeVariant,
    parent: usize,
    population: &Population<'_>,
    params: &OperatorParams,
    bounds: Bounds,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let n = population.len();
    let need = variant.random_picks();
    if n < need + 1 {
        return Err(Error::OperatorInapplicable {
            operator: Substrate::De(variant).name(),
            reason: format!("needs {} corals besides the parent, reef has {}", need, n.saturating_sub(1)),
        });
    }
    let r = distinct_picks(n, parent, need, rng);
    let g = |i: usize| population.genome(i);
    let x = g(parent);
    let f = params.de_scale;
    let mutant: Vec<f64> = match variant {
        DeVariant::Best1 => {
            let best = g(population.best());
            (0..x.len()).map(|j| best[j] + f * (g(r[0])[j] - g(r[1])[j])).collect()
        }
        DeVariant::Best2 => {
            let best = g(population.best());
            (0..x.len())
                .map(|j| best[j] + f * (g(r[0])[j] - g(r[1])[j]) + f * (g(r[2])[j] - g(r[3])[j]))
                .collect()
        }
        DeVariant::CurrentToBest1 => {
            let u: f64 = rng.random();
            let best = g(population.best());
            (0..x.len())
                .map(|j| x[j] + u * (best[j] - x[j]) + f * (g(r[0])[j] - g(r[1])[j]))
                .collect()
        }
        DeVariant::CurrentToPBest1 => {
            let top = ((params.pbest_fraction * n as f64).ceil() as usize).clamp(1, n);
            let pbest = g(population.ranking()[rng.random_range(0..top)]);
            (0..x.len())
                .map(|j| x[j] + f * (pbest[j] - x[j]) + f * (g(r[0])[j] - g(r[1])[j]))
                .collect()
        }
        DeVariant::Rand2 => (0..x.len())
            .map(|j| g(r[0])[j] + f * (g(r[1])[j] - g(r[2])[j]) + f * (g(r[3])[j] - g(r[4])[j]))
            .collect(),
    };
    let mut trial = binomial_crossover(x, &mutant, params.de_cross, rng);
    bounds.clamp(&mut trial);
    Ok(trial)
}

/// DE binomial crossover: coordinate `j` comes from `mutant` when a uniform
/// draw falls below `cr` or `j == j_rand`, otherwise from `target`.
pub fn binomial_crossover<R: Rng + ?Sized>(target: &[f64], mutant: &[f64], cr: f64, rng: &mut R) -> Vec<f64> {
    let j_rand = rng.random_range(0..target.len());
    target
        .iter()
        .zip(mutant)
        .enumerate()
        .map(|(j, (&t, &v))| {
            let u: f64 = rng.random();
            if u < cr || j == j_rand {
                v
            } else {
                t
            }
        })
        .collect()
}

/// Firefly move of `parent` towards a brighter reef member.
///
/// The attractor is the best of up to `firefly_sample` corals drawn without
/// replacement from those strictly better than the parent. Distances are
/// measured in units of `(A - B) sqrt(N)`. When the parent is the brightest
/// coral only the random step applies.
pub fn firefly<R: Rng + ?Sized>(
    parent: usize,
    population: &Population<'_>,
    params: &OperatorParams,
    bounds: Bounds,
    rng: &mut R,
) -> Vec<f64> {
    let x = population.genome(parent);
    let fx = population.fitness(parent);
    let brighter: Vec<usize> = (0..population.len()).filter(|&i| population.fitness(i) < fx).collect();
    let mut out = x.to_vec();
    if !brighter.is_empty() {
        let amount = params.firefly_sample.min(brighter.len());
        let attractor = index::sample(rng, brighter.len(), amount)
            .into_iter()
            .map(|k| brighter[k])
            .min_by(|&a, &b| cmp_fitness(population.fitness(a), population.fitness(b)))
            .expect("sample is non-empty");
        let target = population.genome(attractor);
        let scale = bounds.span() * (x.len() as f64).sqrt();
        let r2 = x.iter().zip(target).map(|(a, b)| ((b - a) / scale).powi(2)).sum::<f64>();
        let beta = if r2 > 0.0 {
            params.firefly_beta0 * (-params.firefly_gamma * r2).exp()
        } else {
            params.firefly_beta0
        };
        for (o, (&a, &b)) in out.iter_mut().zip(x.iter().zip(target)) {
            *o = a + beta * (b - a);
        }
    }
    let alpha = params.firefly_alpha_for(bounds);
    for o in &mut out {
        let eps: f64 = rng.random::<f64>() - 0.5;
        *o += alpha * eps;
    }
    bounds.clamp(&mut out);
    out
}

/// Two-point crossover with explicit cut points: coordinates in the 0-based
/// half-open range `c1..c2` come from `mate`, the rest from `parent`.
pub fn two_point_with_cuts(parent: &[f64], mate: &[f64], c1: usize, c2: usize) -> Vec<f64> {
    debug_assert!(c1 < c2 && c2 <= parent.len());
    let mut child = parent.to_vec();
    child[c1..c2].copy_from_slice(&mate[c1..c2]);
    child
}

/// Two-point crossover with distinct cut points drawn uniformly from `0..=N`.
pub fn two_point<R: Rng + ?Sized>(parent: &[f64], mate: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    let n = parent.len();
    if n < 2 {
        return Err(Error::OperatorInapplicable {
            operator: Substrate::TwoPoint.name(),
            reason: "genome needs at least two coordinates".into(),
        });
    }
    let cuts = index::sample(rng, n + 1, 2);
    let (a, b) = (cuts.index(0), cuts.index(1));
    Ok(two_point_with_cuts(parent, mate, a.min(b), a.max(b)))
}

/// BLX-alpha blend crossover producing one offspring.
pub fn blx<R: Rng + ?Sized>(parent: &[f64], mate: &[f64], alpha: f64, bounds: Bounds, rng: &mut R) -> Vec<f64> {
    let mut child: Vec<f64> = parent
        .iter()
        .zip(mate)
        .map(|(&a, &b)| {
            let (lo, hi) = (a.min(b), a.max(b));
            let width = hi - lo;
            let (lo, hi) = (lo - width * alpha, hi + width * alpha);
            let u: f64 = rng.random();
            lo + (hi - lo) * u
        })
        .collect();
    bounds.clamp(&mut child);
    child
}

/// Adds independent `Normal(0, sigma^2)` noise to every coordinate.
pub fn gaussian<R: Rng + ?Sized>(parent: &[f64], sigma: f64, bounds: Bounds, rng: &mut R) -> Vec<f64> {
    let mut child: Vec<f64> = parent
        .iter()
        .map(|&v| {
            let z: f64 = StandardNormal.sample(rng);
            v + sigma * z
        })
        .collect();
    bounds.clamp(&mut child);
    child
}

/// Gaussian mutation on a generation schedule.
pub fn apply_gaussian<R: Rng + ?Sized>(
    parent: &[f64],
    generation: usize,
    total_generations: usize,
    params: &OperatorParams,
    bounds: Bounds,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if total_generations == 0 {
        return Err(Error::argument("total_generations must be at least 1"));
    }
    let sigma = params.gaussian_sigma(bounds, generation as f64 / total_generations as f64);
    Ok(gaussian(parent, sigma, bounds, rng))
}

/// Adds `eta * delta` to every coordinate with `delta ~ Cauchy(0, t)`.
pub fn cauchy<R: Rng + ?Sized>(parent: &[f64], eta: f64, t: f64, bounds: Bounds, rng: &mut R) -> Vec<f64> {
    let dist = Cauchy::new(0.0, t).expect("cauchy scale is positive");
    let mut child: Vec<f64> = parent.iter().map(|&v| v + eta * dist.sample(rng)).collect();
    bounds.clamp(&mut child);
    child
}
