use crate::error::Result;
use rayon::prelude::*;

/// Largest observed value of a nonnegative defect, with the point where it
/// occurred. `NaN` observations dominate so that they can never pass.
#[derive(Clone, Debug, PartialEq)]
pub struct Residual {
    pub value: f64,
    pub witness: Option<Vec<f64>>,
    pub samples: usize,
}

impl Default for Residual {
    fn default() -> Self {
        Self::zero()
    }
}

impl Residual {
    pub fn zero() -> Self {
        Residual {
            value: 0.0,
            witness: None,
            samples: 0,
        }
    }

    pub fn at(value: f64, point: &[f64]) -> Self {
        Residual {
            value,
            witness: Some(point.to_vec()),
            samples: 1,
        }
    }

    pub fn merge(self, other: Residual) -> Residual {
        let samples = self.samples + other.samples;
        let pick_other = !self.value.is_nan() && (other.value.is_nan() || other.value > self.value);
        let mut out = if pick_other { other } else { self };
        out.samples = samples;
        out
    }

    pub fn below(&self, tol: f64) -> bool {
        self.value < tol
    }

    /// Evaluate `f` at every point (in parallel) and keep the maximum. The
    /// reduction is sequential in input order, so ties and errors resolve
    /// deterministically.
    pub fn over<F>(points: &[Vec<f64>], f: F) -> Result<Residual>
    where
        F: Fn(&[f64]) -> Result<f64> + Sync + Send,
    {
        let values: Vec<Result<f64>> = points.par_iter().map(|p| f(p)).collect();
        let mut acc = Residual::zero();
        for (p, v) in points.iter().zip(values) {
            acc = acc.merge(Residual::at(v?, p));
        }
        Ok(acc)
    }
}

/// Smallest value of `f` over the points, with its witness.
pub fn minimum_over<F>(points: &[Vec<f64>], f: F) -> Result<(f64, Vec<f64>)>
where
    F: Fn(&[f64]) -> Result<f64> + Sync + Send,
{
    let values: Vec<Result<f64>> = points.par_iter().map(|p| f(p)).collect();
    let mut best = (f64::INFINITY, Vec::new());
    for (p, v) in points.iter().zip(values) {
        let v = v?;
        if v < best.0 || v.is_nan() {
            best = (v, p.clone());
            if v.is_nan() {
                break;
            }
        }
    }
    Ok(best)
}

/// Componentwise maximum of `|a - b|`.
pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}
