//! Box-bounded objective functions with evaluation accounting.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::{Error, Result};

type EvalFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// A minimization objective over the box `[lower, upper]^dimension`.
///
/// The wrapped function is pure; the only side effect of [`evaluate`] is the
/// evaluation counter, which increments exactly once per call.
///
/// [`evaluate`]: BoundedObjective::evaluate
pub struct BoundedObjective {
    name: String,
    dimension: usize,
    lower: f64,
    upper: f64,
    func: Arc<EvalFn>,
    evaluations: AtomicU64,
}

impl BoundedObjective {
    pub fn new<F>(name: impl Into<String>, dimension: usize, lower: f64, upper: f64, func: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        if dimension == 0 {
            return Err(Error::config("objective dimension must be at least 1"));
        }
        if !(lower.is_finite() && upper.is_finite() && lower < upper) {
            return Err(Error::config(format!("invalid bounds [{lower}, {upper}]")));
        }
        Ok(Self {
            name: name.into(),
            dimension,
            lower,
            upper,
            func: Arc::new(func),
            evaluations: AtomicU64::new(0),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    /// Width of the search interval, `A - B`.
    pub fn span(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dimension);
        self.evaluations.fetch_add(1, Ordering::Relaxed);
        (self.func)(x)
    }

    /// Like [`evaluate`](Self::evaluate) but validates the point first.
    pub fn try_evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dimension {
            return Err(Error::argument(format!(
                "{} expects {} components, got {}",
                self.name,
                self.dimension,
                x.len()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::argument("point has non-finite components"));
        }
        Ok(self.evaluate(x))
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations.load(Ordering::Relaxed)
    }

    pub fn reset_evaluations(&self) {
        self.evaluations.store(0, Ordering::Relaxed);
    }

    pub fn clamp(&self, x: &mut [f64]) {
        for v in x {
            *v = v.clamp(self.lower, self.upper);
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dimension && x.iter().all(|v| (self.lower..=self.upper).contains(v))
    }
}

impl fmt::Debug for BoundedObjective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundedObjective")
            .field("name", &self.name)
            .field("dimension", &self.dimension)
            .field("lower", &self.lower)
            .field("upper", &self.upper)
            .field("evaluations", &self.evaluations())
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counter_increments_once_per_call() {
        let obj = BoundedObjective::new("sum", 3, -1.0, 1.0, |x| x.iter().sum()).unwrap();
        assert_eq!(obj.evaluations(), 0);
        for i in 1..=5 {
            obj.evaluate(&[0.1, 0.2, 0.3]);
            assert_eq!(obj.evaluations(), i);
        }
        assert!(obj.try_evaluate(&[0.0]).is_err());
        assert_eq!(obj.evaluations(), 5);
    }

    #[test]
    fn rejects_bad_bounds() {
        assert!(BoundedObjective::new("x", 2, 1.0, 1.0, |_| 0.0).is_err());
        assert!(BoundedObjective::new("x", 0, 0.0, 1.0, |_| 0.0).is_err());
    }

    #[test]
    fn clamp_projects_into_box() {
        let obj = BoundedObjective::new("x", 3, -1.0, 1.0, |_| 0.0).unwrap();
        let mut x = [-3.0, 0.5, 7.0];
        obj.clamp(&mut x);
        assert_eq!(x, [-1.0, 0.5, 1.0]);
        assert!(obj.contains(&x));
    }
}
