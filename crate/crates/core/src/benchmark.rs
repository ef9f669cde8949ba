//! The fifteen-function continuous benchmark suite.
//!
//! Formulas follow the suite's published definitions literally: no shifts,
//! rotations or bias terms. A few definitions differ from their CEC namesakes
//! (Rosenbrock's single `(1 - x_1)^2` term, Ackley without the `1/N` inside
//! the square root, Katsuura with a floor-based inner sum); those are kept.

use std::f64::consts::{E, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{BoundedObjective, Error, Result};

pub const DEFAULT_DIMENSION: usize = 30;
pub const DEFAULT_LOWER: f64 = -100.0;
pub const DEFAULT_UPPER: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Benchmark {
    F1,
    F2,
    F3,
    F4,
    F5,
    F6,
    F7,
    F8,
    F9,
    F10,
    F11,
    F12,
    F13,
    F14,
    F15,
}

impl Benchmark {
    pub const ALL: [Benchmark; 15] = [
        Benchmark::F1,
        Benchmark::F2,
        Benchmark::F3,
        Benchmark::F4,
        Benchmark::F5,
        Benchmark::F6,
        Benchmark::F7,
        Benchmark::F8,
        Benchmark::F9,
        Benchmark::F10,
        Benchmark::F11,
        Benchmark::F12,
        Benchmark::F13,
        Benchmark::F14,
        Benchmark::F15,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Benchmark::F1 => "F1",
            Benchmark::F2 => "F2",
            Benchmark::F3 => "F3",
            Benchmark::F4 => "F4",
            Benchmark::F5 => "F5",
            Benchmark::F6 => "F6",
            Benchmark::F7 => "F7",
            Benchmark::F8 => "F8",
            Benchmark::F9 => "F9",
            Benchmark::F10 => "F10",
            Benchmark::F11 => "F11",
            Benchmark::F12 => "F12",
            Benchmark::F13 => "F13",
            Benchmark::F14 => "F14",
            Benchmark::F15 => "F15",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Benchmark::F1 => "Sphere",
            Benchmark::F2 => "High Condition Elliptic",
            Benchmark::F3 => "Bent Cigar",
            Benchmark::F4 => "Discus",
            Benchmark::F5 => "Rosenbrock",
            Benchmark::F6 => "Ackley",
            Benchmark::F7 => "Weierstrass",
            Benchmark::F8 => "Griewank",
            Benchmark::F9 => "Rastrigin",
            Benchmark::F10 => "Modified Schwefel",
            Benchmark::F11 => "Katsuura",
            Benchmark::F12 => "Happy Cat",
            Benchmark::F13 => "HGBat",
            Benchmark::F14 => "Griewank plus Rosenbrock",
            Benchmark::F15 => "Expanded Schaffer F6",
        }
    }

    /// Validates `x` and evaluates the function.
    pub fn evaluate(self, x: &[f64]) -> Result<f64> {
        if x.len() < 2 {
            return Err(Error::argument(format!(
                "{} needs at least 2 components, got {}",
                self.id(),
                x.len()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::argument("point has non-finite components"));
        }
        Ok(self.eval_unchecked(x))
    }

    /// Evaluates without validation; `x.len() >= 2` is assumed.
    pub fn eval_unchecked(self, x: &[f64]) -> f64 {
        match self {
            Benchmark::F1 => sphere(x),
            Benchmark::F2 => elliptic(x),
            Benchmark::F3 => bent_cigar(x),
            Benchmark::F4 => discus(x),
            Benchmark::F5 => rosenbrock(x),
            Benchmark::F6 => ackley(x),
            Benchmark::F7 => weierstrass(x),
            Benchmark::F8 => griewank(x),
            Benchmark::F9 => rastrigin(x),
            Benchmark::F10 => modified_schwefel(x),
            Benchmark::F11 => katsuura(x),
            Benchmark::F12 => happy_cat(x),
            Benchmark::F13 => hgbat(x),
            Benchmark::F14 => griewank_rosenbrock(x),
            Benchmark::F15 => expanded_schaffer(x),
        }
    }

    /// Builds a counted objective over `[lower, upper]^dimension`.
    pub fn objective(self, dimension: usize, lower: f64, upper: f64) -> Result<BoundedObjective> {
        if dimension < 2 {
            return Err(Error::config(format!("{} needs dimension >= 2", self.id())));
        }
        BoundedObjective::new(self.id(), dimension, lower, upper, move |x| self.eval_unchecked(x))
    }

    pub fn default_objective(self) -> BoundedObjective {
        self.objective(DEFAULT_DIMENSION, DEFAULT_LOWER, DEFAULT_UPPER)
            .expect("default benchmark parameters are valid")
    }
}

impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Benchmark {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Benchmark::ALL
            .into_iter()
            .find(|b| b.id().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::argument(format!("unknown benchmark '{s}'")))
    }
}

fn sq_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn sphere(x: &[f64]) -> f64 {
    sq_norm(x)
}

fn elliptic(x: &[f64]) -> f64 {
    let denom = (x.len() - 1) as f64;
    x.iter()
        .enumerate()
        .map(|(i, v)| 10f64.powf(6.0 * i as f64 / denom) * v * v)
        .sum()
}

fn bent_cigar(x: &[f64]) -> f64 {
    x[0] * x[0] + 1e6 * sq_norm(&x[1..])
}

fn discus(x: &[f64]) -> f64 {
    1e6 * x[0] * x[0] + sq_norm(&x[1..])
}

fn rosenbrock(x: &[f64]) -> f64 {
    let valley: f64 = x
        .windows(2)
        .map(|w| {
            let d = w[1] - w[0] * w[0];
            100.0 * d * d
        })
        .sum();
    valley + (1.0 - x[0]).powi(2)
}

fn ackley(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let cos_mean = x.iter().map(|v| (2.0 * PI * v).cos()).sum::<f64>() / n;
    E - 20.0 * (-0.2 * sq_norm(x).sqrt()).exp() - cos_mean.exp() + 20.0
}

const WEIERSTRASS_TERMS: i32 = 20;

fn weierstrass(x: &[f64]) -> f64 {
    x.iter()
        .map(|v| {
            (1..=WEIERSTRASS_TERMS)
                .map(|j| 0.5f64.powi(j) * (2.0 * PI * 3f64.powi(j) * (v + 0.5)).cos())
                .sum::<f64>()
        })
        .sum()
}

fn griewank(x: &[f64]) -> f64 {
    let prod: f64 = x
        .iter()
        .enumerate()
        .map(|(i, v)| (v / ((i + 1) as f64).sqrt()).cos())
        .product();
    1.0 + sq_norm(x) / 4000.0 - prod
}

fn rastrigin(x: &[f64]) -> f64 {
    10.0 * x.len() as f64 + x.iter().map(|v| v * v - 10.0 * (2.0 * PI * v).cos()).sum::<f64>()
}

fn modified_schwefel(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let scale = n * n * 100.0;
    let g = |v: f64| -> f64 {
        if v > 500.0 {
            let m = v.rem_euclid(500.0);
            -(500.0 - m * (500.0 - m).sqrt().sin()) + ((v - 500.0) / scale).powi(2)
        } else if v < -500.0 {
            let m = v.rem_euclid(500.0);
            -(-500.0 - m * (500.0 - m).sqrt().sin()) + ((v + 500.0) / scale).powi(2)
        } else {
            -v * v.abs().sqrt().sin()
        }
    };
    n * x.iter().map(|&v| g(v)).sum::<f64>()
}

fn katsuura(x: &[f64]) -> f64 {
    let n = x.len();
    let prod: f64 = x
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let inner: f64 = (1..=n as i32)
                .map(|k| {
                    let p = 2f64.powi(k);
                    (p * v).floor() / p
                })
                .sum();
            1.0 + (i + 2) as f64 * inner
        })
        .product();
    10.0 / (n * n) as f64 * prod
}

// The fourth roots below take the magnitude of their argument; without it the
// functions are undefined on most of the domain.
fn happy_cat(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let r2 = sq_norm(x);
    let sum: f64 = x.iter().sum();
    (r2 - n).abs().powf(0.25) + (0.5 * r2 + sum) / n + 0.5
}

fn hgbat(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let r2 = sq_norm(x);
    let sum: f64 = x.iter().sum();
    (r2 * r2 - sum * sum).abs().powf(0.25) + (0.5 * r2 + sum) / n + 0.5
}

fn griewank_rosenbrock(x: &[f64]) -> f64 {
    let g: f64 = x
        .windows(2)
        .map(|w| {
            let t = 100.0 * (w[0] * w[0] - w[1]) + (w[0] - 1.0).powi(2);
            t * t / 4000.0 - t.cos() + 1.0
        })
        .sum();
    let f5 = rosenbrock(x);
    g + f5 * f5 / 4000.0 - f5.cos() + 1.0
}

fn schaffer_term(s: f64) -> f64 {
    (s.sqrt().sin().powi(2) - 0.5) / (1.0 + 0.001 * s).powi(2)
}

fn expanded_schaffer(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let s: f64 = x.windows(2).map(|w| w[0] * w[0] + w[1] * w[1]).sum();
    1.0 + schaffer_term(s) + schaffer_term((n - 1.0).powi(2) + x[0] * x[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zeros(n: usize) -> Vec<f64> {
        vec![0.0; n]
    }

    #[test]
    fn origin_minima() {
        for b in [
            Benchmark::F1,
            Benchmark::F2,
            Benchmark::F3,
            Benchmark::F4,
            Benchmark::F6,
            Benchmark::F8,
            Benchmark::F9,
            Benchmark::F10,
        ] {
            let v = b.evaluate(&zeros(30)).unwrap();
            assert!(v.abs() <= 1e-12, "{b} at origin = {v}");
        }
    }

    #[test]
    fn rosenbrock_at_ones() {
        assert_eq!(Benchmark::F5.evaluate(&[1.0; 30]).unwrap(), 0.0);
    }

    #[test]
    fn happy_cat_at_minus_ones() {
        assert!(Benchmark::F12.evaluate(&[-1.0; 30]).unwrap().abs() < 1e-12);
    }

    #[test]
    fn bent_cigar_first_axis() {
        let mut e1 = zeros(30);
        e1[0] = 1.0;
        assert_eq!(Benchmark::F3.evaluate(&e1).unwrap(), 1.0);
    }

    #[test]
    fn weierstrass_origin() {
        // Frozen from a direct summation of the 20-term series.
        let v = Benchmark::F7.evaluate(&zeros(30)).unwrap();
        assert!((v - -29.999971389770508).abs() < 1e-9, "{v}");
    }

    #[test]
    fn katsuura_origin() {
        for n in [2, 10, 30] {
            let v = Benchmark::F11.evaluate(&zeros(n)).unwrap();
            assert!((v - 10.0 / (n * n) as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn schaffer_origin_matches_frozen_oracle() {
        // 1 + (sin^2(0) - 0.5) + (sin^2(29) - 0.5) / (1 + 0.001 * 841)^2
        let v = Benchmark::F15.evaluate(&zeros(30)).unwrap();
        assert!((v - 0.48241807990414204).abs() < 1e-12, "{v}");
    }

    #[test]
    fn schwefel_branches_are_continuous_enough_to_evaluate() {
        for v in [-1200.0, -500.5, -500.0, 0.0, 420.0, 500.0, 750.0, 1500.0] {
            let f = Benchmark::F10.evaluate(&[v, v]).unwrap();
            assert!(f.is_finite(), "g({v}) = {f}");
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Benchmark::F1.evaluate(&[1.0]).is_err());
        assert!(Benchmark::F1.evaluate(&[1.0, f64::NAN]).is_err());
        assert!(Benchmark::F1.evaluate(&[1.0, f64::INFINITY]).is_err());
    }

    #[test]
    fn parse_ids() {
        assert_eq!("f7".parse::<Benchmark>().unwrap(), Benchmark::F7);
        assert_eq!("F15".parse::<Benchmark>().unwrap(), Benchmark::F15);
        assert!("F16".parse::<Benchmark>().is_err());
    }

    #[test]
    fn all_finite_on_random_points() {
        let pts = [[-73.1, 12.5, 99.0, -0.3], [0.01, -0.02, 0.03, 1e-4], [100.0, -100.0, 50.0, 0.0]];
        for b in Benchmark::ALL {
            for p in &pts {
                assert!(b.evaluate(p).unwrap().is_finite(), "{b} at {p:?}");
            }
        }
    }
}
