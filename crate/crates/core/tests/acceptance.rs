//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the process exits non-zero if any fails.

#![allow(clippy::too_many_arguments, clippy::needless_range_loop, clippy::type_complexity)]

use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crosl::benchmark::Benchmark;
use crosl::harness::{run_experiment, ExperimentConfig, ObjectiveSpec, Variant};
use crosl::local_search::LocalSearchParams;
use crosl::operators::{de_variant, Bounds, DeVariant, Population};
use crosl::probability::{apply_floor, softmax};
use crosl::reef::OptimizerConfig;
use crosl::windfarm::{check_feasibility, power_curve, wake_free_aep, Layout, Scenario, TurbineSpec};
use crosl::{AssignmentMode, AssignmentPolicy, Horizon, OperatorParams, Optimizer, ProbabilityState, ReefParams, Substrate};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn main() -> ExitCode {
    let criteria: [(&str, Duration, fn() -> Outcome); 9] = [
        ("DE operators match formula oracle", Duration::from_secs(10), operator_oracle),
        ("benchmark spot values", Duration::from_secs(1), benchmark_spots),
        ("probability machinery", Duration::from_secs(60), probability_machinery),
        ("reef lifecycle properties", Duration::from_secs(60), reef_lifecycle),
        ("ensemble ordering at desk scale", Duration::from_secs(300), ensemble_ordering),
        ("power curve", Duration::from_secs(1), power_curve_spots),
        ("wind-farm feasibility oracle", Duration::from_secs(1), feasibility_oracle),
        ("wind-farm optimization sanity", Duration::from_secs(600), windfarm_sanity),
        ("CLI determinism", Duration::from_secs(120), cli_determinism),
    ];
    let mut failed = 0;
    for (k, (name, limit, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let out = check();
        let elapsed = start.elapsed();
        let pass = out.pass && elapsed <= limit;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {}: {} {} ({:.2}s, limit {}s) {}",
            k + 1,
            if pass { "PASS" } else { "FAIL" },
            name,
            elapsed.as_secs_f64(),
            limit.as_secs(),
            out.detail
        );
    }
    println!("acceptance: {} passed, {} failed", 9 - failed, failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

// ---- criterion 1 -------------------------------------------------------

fn clamp(v: f64, lo: f64, hi: f64) -> f64 {
    if v < lo {
        lo
    } else if v > hi {
        hi
    } else {
        v
    }
}

/// Straight-from-the-formula DE, drawing randomness in the documented order.
fn oracle_de(
    variant: DeVariant,
    parent: usize,
    genomes: &[Vec<f64>],
    fitness: &[f64],
    f: f64,
    cr: f64,
    p: f64,
    lo: f64,
    hi: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let n = genomes.len();
    let dim = genomes[0].len();
    let count = match variant {
        DeVariant::Best1 | DeVariant::CurrentToBest1 | DeVariant::CurrentToPBest1 => 2,
        DeVariant::Best2 => 4,
        DeVariant::Rand2 => 5,
    };
    let mut r: Vec<usize> = Vec::new();
    while r.len() < count {
        let c = rng.random_range(0..n);
        if c != parent && !r.contains(&c) {
            r.push(c);
        }
    }
    let mut best = 0;
    for i in 1..n {
        if fitness[i] < fitness[best] {
            best = i;
        }
    }
    let x = &genomes[parent];
    let xb = &genomes[best];
    let xr = |k: usize, j: usize| genomes[r[k]][j];
    let mut v = vec![0.0; dim];
    match variant {
        DeVariant::Best1 => {
            for j in 0..dim {
                v[j] = xb[j] + f * (xr(0, j) - xr(1, j));
            }
        }
        DeVariant::Best2 => {
            for j in 0..dim {
                v[j] = xb[j] + f * (xr(0, j) - xr(1, j)) + f * (xr(2, j) - xr(3, j));
            }
        }
        DeVariant::CurrentToBest1 => {
            let u: f64 = rng.random();
            for j in 0..dim {
                v[j] = x[j] + u * (xb[j] - x[j]) + f * (xr(0, j) - xr(1, j));
            }
        }
        DeVariant::CurrentToPBest1 => {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| fitness[a].partial_cmp(&fitness[b]).unwrap());
            let top = ((p * n as f64).ceil() as usize).max(1).min(n);
            let xp = &genomes[order[rng.random_range(0..top)]];
            for j in 0..dim {
                v[j] = x[j] + f * (xp[j] - x[j]) + f * (xr(0, j) - xr(1, j));
            }
        }
        DeVariant::Rand2 => {
            for j in 0..dim {
                v[j] = xr(0, j) + f * (xr(1, j) - xr(2, j)) + f * (xr(3, j) - xr(4, j));
            }
        }
    }
    let j_rand = rng.random_range(0..dim);
    let mut t = x.clone();
    for j in 0..dim {
        let u: f64 = rng.random();
        if u < cr || j == j_rand {
            t[j] = v[j];
        }
        t[j] = clamp(t[j], lo, hi);
    }
    t
}

fn operator_oracle() -> Outcome {
    let variants = [
        DeVariant::Best1,
        DeVariant::Best2,
        DeVariant::CurrentToBest1,
        DeVariant::CurrentToPBest1,
        DeVariant::Rand2,
    ];
    let mut setup = ChaCha8Rng::seed_from_u64(0xC0FFEE);
    let mut checked = 0;
    for state in 0..1000u64 {
        let dim = setup.random_range(1..=6);
        let n = setup.random_range(6..=14);
        let (lo, hi) = (-5.0, 5.0);
        let genomes: Vec<Vec<f64>> =
            (0..n).map(|_| (0..dim).map(|_| setup.random_range(lo..hi)).collect()).collect();
        // Coarse fitness values so ties occur.
        let fitness: Vec<f64> = (0..n).map(|_| setup.random_range(0..8) as f64).collect();
        let params = OperatorParams {
            de_scale: setup.random_range(0.0..=2.0),
            de_cross: setup.random_range(0.0..=1.0),
            pbest_fraction: setup.random_range(0.05..=1.0),
            ..OperatorParams::default()
        };
        let parent = setup.random_range(0..n);
        let pop = Population::new(genomes.iter().map(|g| g.as_slice()).zip(fitness.iter().copied()));
        for &variant in &variants {
            let mut a = ChaCha8Rng::seed_from_u64(state);
            a.set_stream(state % 7);
            let mut b = a.clone();
            let got = match de_variant(variant, parent, &pop, &params, Bounds::new(lo, hi), &mut a) {
                Ok(g) => g,
                Err(e) => return outcome(false, format!("state {state} {variant:?}: {e}")),
            };
            let want = oracle_de(
                variant,
                parent,
                &genomes,
                &fitness,
                params.de_scale,
                params.de_cross,
                params.pbest_fraction,
                lo,
                hi,
                &mut b,
            );
            let same = got.len() == want.len() && got.iter().zip(&want).all(|(x, y)| x.to_bits() == y.to_bits());
            if !same || a.random::<u64>() != b.random::<u64>() {
                return outcome(false, format!("state {state} {variant:?}: {got:?} vs {want:?}"));
            }
            checked += 1;
        }
    }
    outcome(true, format!("{checked} trial vectors bitwise equal"))
}

// ---- criterion 2 -------------------------------------------------------

fn benchmark_spots() -> Outcome {
    let mut problems = Vec::new();
    let mut check = |what: String, got: f64, want: f64, tol: f64| {
        if (got - want).abs() > tol || got.is_nan() {
            problems.push(format!("{what}: {got} vs {want}"));
        }
    };
    for n in [2usize, 10, 30] {
        let zero = vec![0.0; n];
        for b in [Benchmark::F1, Benchmark::F2, Benchmark::F3, Benchmark::F4, Benchmark::F6, Benchmark::F8, Benchmark::F9]
        {
            check(format!("{b}(0), N={n}"), b.evaluate(&zero).unwrap(), 0.0, 1e-12);
        }
        check(format!("F5(1), N={n}"), Benchmark::F5.evaluate(&vec![1.0; n]).unwrap(), 0.0, 1e-12);
        check(format!("F12(-1), N={n}"), Benchmark::F12.evaluate(&vec![-1.0; n]).unwrap(), 0.0, 1e-12);
        let mut e1 = zero.clone();
        e1[0] = 1.0;
        check(format!("F3(e1), N={n}"), Benchmark::F3.evaluate(&e1).unwrap(), 1.0, 1e-12);
        let nf = n as f64;
        check(
            format!("F7(0), N={n}"),
            Benchmark::F7.evaluate(&zero).unwrap(),
            -nf * (1.0 - 2f64.powi(-20)),
            1e-9,
        );
        check(format!("F11(0), N={n}"), Benchmark::F11.evaluate(&zero).unwrap(), 10.0 / (nf * nf), 1e-12);
    }
    let detail = if problems.is_empty() { "N in {2, 10, 30}, all within tolerance".into() } else { problems.join("; ") };
    outcome(problems.is_empty(), detail)
}

// ---- criterion 3 -------------------------------------------------------

fn probability_machinery() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut worst_sum = 0.0f64;
    for cycle in 0..1000 {
        let t = rng.random_range(2..=10);
        let floor = rng.random_range(0.0..1.0 / t as f64);
        let policy = AssignmentPolicy {
            temperature: rng.random_range(0.01..10.0),
            floor,
            ..AssignmentPolicy::with_mode(AssignmentMode::Dynamic)
        };
        let mut state = ProbabilityState::new(t);
        for _ in 0..rng.random_range(1..50) {
            let tag = rng.random_range(0..t);
            let f = rng.random_range(-1e3..1e3);
            state.record_outcome(tag, f, rng.random(), rng.random_range(-1e3..1e3));
        }
        let p = match state.update_probabilities(&policy) {
            Ok(p) => p.to_vec(),
            Err(e) => return outcome(false, format!("cycle {cycle}: {e}")),
        };
        let sum: f64 = p.iter().sum();
        worst_sum = worst_sum.max((sum - 1.0).abs());
        if (sum - 1.0).abs() > 1e-12 || p.iter().any(|&v| v < floor) {
            return outcome(false, format!("cycle {cycle}: p = {p:?}, floor {floor}"));
        }
    }
    let uniform = softmax(&[0.5; 4], 0.1);
    if uniform.iter().any(|&v| (v - 0.25).abs() > 1e-15) {
        return outcome(false, format!("equal metrics gave {uniform:?}"));
    }
    let p = apply_floor(&softmax(&[1.0, 0.0], 1.0), 0.0);
    if (p[0] - 0.7311).abs() > 1e-4 || (p[1] - 0.2689).abs() > 1e-4 {
        return outcome(false, format!("softmax((1,0), 1) = {p:?}"));
    }
    let policy = AssignmentPolicy::with_mode(AssignmentMode::UniformProbabilistic);
    let state = ProbabilityState::new(4);
    let mut counts = [0usize; 4];
    let mut draw_rng = ChaCha8Rng::seed_from_u64(77);
    let occupied = vec![true; 100];
    for _ in 0..100 {
        for tag in state.assign_tags(&policy, &occupied, &mut draw_rng).into_iter().flatten() {
            counts[tag] += 1;
        }
    }
    let expected = 10_000.0 / 4.0;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    // chi-square critical value, 3 degrees of freedom, alpha = 0.01
    let critical = 11.344866730144373;
    outcome(
        chi2 < critical,
        format!("max |sum-1| = {worst_sum:.1e}, chi2 = {chi2:.3} (critical {critical:.3}), counts {counts:?}"),
    )
}

// ---- criterion 4 -------------------------------------------------------

fn de_bank() -> Vec<Substrate> {
    vec![
        Substrate::De(DeVariant::Best1),
        Substrate::De(DeVariant::Best2),
        Substrate::De(DeVariant::CurrentToBest1),
        Substrate::De(DeVariant::CurrentToPBest1),
    ]
}

fn reef_lifecycle() -> Outcome {
    let modes = [AssignmentMode::Static, AssignmentMode::UniformProbabilistic, AssignmentMode::Dynamic];
    let results: Vec<Result<(), String>> = {
        use rayon::prelude::*;
        (0..200u64)
            .into_par_iter()
            .map(|seed| {
                let mode = modes[seed as usize % 3];
                let objective = Benchmark::F1.objective(10, -100.0, 100.0).unwrap();
                let cfg = OptimizerConfig::new(de_bank(), mode, Horizon::Generations(200));
                let cap = cfg.reef.capacity();
                let budding_max = (cfg.reef.budding_fraction * cap as f64).floor() as u64;
                let mut opt = Optimizer::new(objective, cfg, seed).map_err(|e| e.to_string())?;
                let mut best = opt.best().fitness;
                let mut evals = opt.reef().evaluations_used();
                for g in 0..200 {
                    let before = opt.reef().occupied() as u64;
                    let s = opt.step().map_err(|e| e.to_string())?;
                    if !(1..=cap).contains(&s.occupied) {
                        return Err(format!("seed {seed} gen {g}: occupancy {}", s.occupied));
                    }
                    if s.best > best {
                        return Err(format!("seed {seed} gen {g}: best rose {best} -> {}", s.best));
                    }
                    let delta = s.evaluations - evals;
                    if delta < before || delta > before + budding_max {
                        return Err(format!("seed {seed} gen {g}: {delta} evaluations from {before} corals"));
                    }
                    best = s.best;
                    evals = s.evaluations;
                }
                if opt.objective().evaluations() != evals {
                    return Err(format!("seed {seed}: counter {} vs reef {evals}", opt.objective().evaluations()));
                }
                if opt.step().is_ok() {
                    return Err(format!("seed {seed}: stepped past the horizon"));
                }
                // Evaluation budget: spent exactly.
                let objective = Benchmark::F1.objective(10, -100.0, 100.0).unwrap();
                let budget = 3000 + seed * 7;
                let mut cfg = OptimizerConfig::new(de_bank(), mode, Horizon::Evaluations(budget));
                if seed % 2 == 0 {
                    cfg.local_search = Some(LocalSearchParams { eta: 1.0, budget_fraction: 0.05 });
                }
                let mut opt = Optimizer::new(objective, cfg, seed).map_err(|e| e.to_string())?;
                opt.run().map_err(|e| e.to_string())?;
                if opt.objective().evaluations() != budget || opt.reef().evaluations_used() != budget {
                    return Err(format!("seed {seed}: spent {} of {budget}", opt.objective().evaluations()));
                }
                Ok(())
            })
            .collect()
    };
    let errors: Vec<String> = results.into_iter().filter_map(Result::err).collect();
    outcome(errors.is_empty(), if errors.is_empty() { "200 runs".into() } else { errors[..errors.len().min(3)].join("; ") })
}

// ---- criterion 5 -------------------------------------------------------

fn benchmark_config(id: Benchmark, variant: Variant) -> ExperimentConfig {
    ExperimentConfig {
        objective: ObjectiveSpec::Benchmark { id, dimension: 10, lower: -100.0, upper: 100.0 },
        variant,
        substrates: de_bank(),
        operators: OperatorParams::default(),
        reef: Some(ReefParams::default()),
        policy: Default::default(),
        budget: 50_000,
        repetitions: 10,
        seed: 2024,
        local_search: None,
    }
}

fn ensemble_ordering() -> Outcome {
    let mut wins = 0;
    let mut f1_ok = true;
    let mut lines = Vec::new();
    for id in [Benchmark::F1, Benchmark::F2, Benchmark::F9] {
        let mut means = Vec::new();
        for v in Variant::ALL {
            match run_experiment(&benchmark_config(id, v)) {
                Ok(r) => means.push(r.summary.mean),
                Err(e) => return outcome(false, format!("{id} {v}: {e}")),
            }
        }
        if means[2] <= means[0] {
            wins += 1;
        }
        if id == Benchmark::F1 && means.iter().any(|&m| m > 1e-6) {
            f1_ok = false;
        }
        lines.push(format!("{id} mean CRO-SL {:.3e} PCRO-SL {:.3e} DPCRO-SL {:.3e}", means[0], means[1], means[2]));
    }
    outcome(wins >= 2 && f1_ok, format!("DPCRO-SL <= CRO-SL on {wins}/3; {}", lines.join("; ")))
}

// ---- criterion 6 -------------------------------------------------------

fn power_curve_spots() -> Outcome {
    let t = TurbineSpec::default();
    let cases = [(9.8, 3.35), (3.0, 0.0), (6.9, 3.35 * (2.9f64 / 5.8).powi(3)), (26.0, 0.0)];
    let bad: Vec<String> = cases
        .iter()
        .filter_map(|&(v, want)| {
            let got = power_curve(v, &t).unwrap();
            ((got - want).abs() > 1e-9).then(|| format!("P({v}) = {got}, want {want}"))
        })
        .collect();
    let detail = if bad.is_empty() { "4 spot values within 1e-9".into() } else { bad.join("; ") };
    outcome(bad.is_empty(), detail)
}

// ---- criterion 7 -------------------------------------------------------

fn feasibility_oracle() -> Outcome {
    let s = Scenario::default();
    let layout = Layout::reference_case1();
    let p = layout.positions();
    let mut pairs = 0;
    let mut min_d = f64::INFINITY;
    let mut max_r = 0.0f64;
    for a in 0..p.len() {
        max_r = max_r.max((p[a][0] * p[a][0] + p[a][1] * p[a][1]).sqrt());
        for b in a + 1..p.len() {
            let d = ((p[a][0] - p[b][0]).powi(2) + (p[a][1] - p[b][1]).powi(2)).sqrt();
            min_d = min_d.min(d);
            pairs += 1;
        }
    }
    let oracle = max_r <= 1300.0 && min_d >= 260.0;
    let report = check_feasibility(&layout, &s);
    outcome(
        pairs == 120 && oracle && report.is_feasible(),
        format!("{pairs} pairs, max radius {max_r:.3} m, min distance {min_d:.3} m"),
    )
}

// ---- criterion 8 -------------------------------------------------------

fn random_feasible_layout(s: &Scenario, rng: &mut ChaCha8Rng) -> Layout {
    let mut pts: Vec<[f64; 2]> = Vec::new();
    while pts.len() < s.n_turbines {
        let r = s.boundary_radius * rng.random::<f64>().sqrt();
        let a = rng.random_range(0.0..std::f64::consts::TAU);
        let c = [r * a.cos(), r * a.sin()];
        if pts.iter().all(|q| (q[0] - c[0]).hypot(q[1] - c[1]) >= s.min_separation()) {
            pts.push(c);
        }
    }
    Layout::new(pts)
}

fn windfarm_sanity() -> Outcome {
    let s = Scenario::default();
    let bound = wake_free_aep(s.n_turbines, &s.turbine);
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let random_best = (0..100)
        .map(|_| s.aep(&random_feasible_layout(&s, &mut rng)))
        .fold(f64::NEG_INFINITY, f64::max);

    let config = ExperimentConfig {
        objective: ObjectiveSpec::Windfarm { scenario: None },
        variant: Variant::DpcroSl,
        substrates: ["DE/best/1", "Firefly", "BLX", "GM", "CM"].iter().map(|n| n.parse().unwrap()).collect(),
        operators: OperatorParams::default(),
        reef: None,
        policy: Default::default(),
        budget: 20_000,
        repetitions: 1,
        seed: 7,
        local_search: Some(LocalSearchParams { eta: 10.0, budget_fraction: 0.05 }),
    };
    let res = match run_experiment(&config) {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let layout = Layout::from_genome(&res.records[0].best_genome).unwrap();
    let feasible = check_feasibility(&layout, &s).is_feasible();
    let found = s.aep(&layout);
    let reference = s.aep(&Layout::reference_case1());
    let ratio = reference / bound;
    let a = feasible;
    let b = found >= 1.03 * random_best;
    let c = found <= bound;
    let d = (0.80..=1.00).contains(&ratio);
    outcome(
        a && b && c && d,
        format!(
            "feasible {a}; optimized {found:.1} vs best random {random_best:.1} (+{:.2}%); bound {bound:.0}; reference {reference:.1} = {ratio:.4} of bound",
            100.0 * (found / random_best - 1.0)
        ),
    )
}

// ---- criterion 9 -------------------------------------------------------

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn cli_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    fs::write(
        &config,
        r#"{
  "objective": {"type": "benchmark", "id": "F9", "dimension": 10},
  "variant": "dpcro-sl",
  "substrates": ["DE/best/1", "DE/current-to-pbest/1", "Firefly", "BLX", "GM", "CM"],
  "budget": 20000,
  "repetitions": 4,
  "seed": 5
}"#,
    )
    .unwrap();
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let status = Command::new(env!("CARGO_BIN_EXE_crosl"))
            .args(["run", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap();
        if !status.status.success() {
            return outcome(false, String::from_utf8_lossy(&status.stderr).into_owned());
        }
        outputs.push(read_dir_sorted(&out));
    }
    let n = outputs[0].len();
    let has_traces = outputs[0].iter().filter(|(n, _)| n.starts_with("trace_run")).count() == 4;
    outcome(outputs[0] == outputs[1] && has_traces, format!("{n} files byte-identical across two invocations"))
}
