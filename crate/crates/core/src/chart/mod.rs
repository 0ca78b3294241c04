//! Coordinate-chart tensor calculus.
//!
//! Everything here is evaluated pointwise: a field is a pure function of the
//! point, and derivatives come from [`HyperDual`](crate::jet::HyperDual)
//! perturbations of that point. Forms use the alternating-tensor convention in
//! which `(a ^ b)(X, Y) = (a(X) b(Y) - a(Y) b(X)) / 2` and the exterior
//! derivative of a `k`-form carries a factor `1 / (k + 1)`. Under this
//! convention the flat potential `|q|^2 / 2` generates exactly the Euclidean
//! Kähler forms, which is the normalization the potential theory needs.

mod field;
mod form;
mod indices;
mod ops;

pub use field::{EndomorphismField, Guard, MetricField, ScalarField};
pub use form::{ComplexForm, Form};
pub use indices::{permutation_sign, IndexSpace};
pub use ops::{
    form_inner_product_2, gradient_norm_sq, kahler_form, kahler_form_unchecked, nijenhuis, nijenhuis_fd,
    pullback_endomorphism, pullback_form, pullback_metric, pushforward, Nijenhuis,
};

use crate::error::{HktError, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::fmt;
use std::sync::Arc;

/// Region of `R^dim` where a chart's fields are defined and sampled.
#[derive(Clone, Debug, PartialEq)]
pub enum Domain {
    /// Axis-aligned box with per-axis bounds.
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// Spherical shell `inner <= |x| <= outer`; the origin is excluded.
    Annulus { inner: f64, outer: f64 },
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Box { lower, upper } => write!(f, "box {lower:?} .. {upper:?}"),
            Domain::Annulus { inner, outer } => write!(f, "annulus {inner} <= |x| <= {outer}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoordinateChart {
    dim: usize,
    labels: Vec<String>,
    domain: Domain,
}

pub type Chart = Arc<CoordinateChart>;

impl CoordinateChart {
    pub fn new(labels: Vec<String>, domain: Domain) -> Result<Chart> {
        let dim = labels.len();
        if dim == 0 {
            return Err(HktError::InvalidChart("dimension must be at least 1".into()));
        }
        if dim > IndexSpace::MAX_DIM {
            return Err(HktError::InvalidChart(format!(
                "dimension {dim} exceeds the supported {}",
                IndexSpace::MAX_DIM
            )));
        }
        match &domain {
            Domain::Box { lower, upper } => {
                if lower.len() != dim || upper.len() != dim {
                    return Err(HktError::InvalidChart("box bounds do not match dimension".into()));
                }
                if lower.iter().zip(upper).any(|(l, u)| !(l < u)) {
                    return Err(HktError::InvalidChart("box has empty interior".into()));
                }
            }
            Domain::Annulus { inner, outer } => {
                if !(*inner > 0.0 && inner < outer) {
                    return Err(HktError::InvalidChart("annulus needs 0 < inner < outer".into()));
                }
            }
        }
        Ok(Arc::new(CoordinateChart { dim, labels, domain }))
    }

    /// Chart with labels `x1..xdim` on a box `[-half, half]^dim`.
    pub fn cube(dim: usize, half: f64) -> Result<Chart> {
        Self::new(
            default_labels(dim),
            Domain::Box {
                lower: vec![-half; dim],
                upper: vec![half; dim],
            },
        )
    }

    pub fn annulus(labels: Vec<String>, inner: f64, outer: f64) -> Result<Chart> {
        Self::new(labels, Domain::Annulus { inner, outer })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        if point.len() != self.dim || point.iter().any(|x| !x.is_finite()) {
            return false;
        }
        match &self.domain {
            Domain::Box { lower, upper } => point
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(x, (l, u))| l <= x && x <= u),
            Domain::Annulus { inner, outer } => {
                let r = point.iter().map(|x| x * x).sum::<f64>().sqrt();
                *inner <= r && r <= *outer
            }
        }
    }

    pub fn check(&self, point: &[f64]) -> Result<()> {
        if point.len() != self.dim {
            return Err(HktError::DimensionMismatch {
                expected: self.dim,
                found: point.len(),
            });
        }
        if self.contains(point) {
            Ok(())
        } else {
            Err(HktError::Domain {
                point: point.to_vec(),
                domain: self.domain.to_string(),
            })
        }
    }

    /// Seeded uniform samples: per-axis uniform in a box, or a uniformly
    /// random direction with uniform radius in an annulus.
    pub fn sample(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| self.draw(&mut rng)).collect()
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        match &self.domain {
            Domain::Box { lower, upper } => lower.iter().zip(upper).map(|(l, u)| rng.random_range(*l..*u)).collect(),
            Domain::Annulus { inner, outer } => loop {
                let v: Vec<f64> = (0..self.dim).map(|_| rng.sample(StandardNormal)).collect();
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm < 1e-8 {
                    continue;
                }
                let r = rng.random_range(*inner..*outer);
                break v.iter().map(|x| x * r / norm).collect();
            },
        }
    }
}

pub fn default_labels(dim: usize) -> Vec<String> {
    (1..=dim).map(|i| format!("x{i}")).collect()
}

/// Labels `x_a, y_a, u_a, v_a` for `z_a = x_a + i y_a`, `w_a = u_a + i v_a`.
pub fn quaternionic_labels(n: usize) -> Vec<String> {
    (1..=n)
        .flat_map(|a| ["x", "y", "u", "v"].map(|s| format!("{s}{a}")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_charts() {
        assert!(CoordinateChart::new(vec![], Domain::Annulus { inner: 1.0, outer: 2.0 }).is_err());
        assert!(CoordinateChart::annulus(default_labels(4), 2.0, 1.0).is_err());
        assert!(CoordinateChart::new(
            default_labels(2),
            Domain::Box {
                lower: vec![0.0, 1.0],
                upper: vec![1.0, 1.0]
            }
        )
        .is_err());
    }

    #[test]
    fn annulus_samples_stay_inside_and_are_reproducible() {
        let chart = CoordinateChart::annulus(quaternionic_labels(2), 0.2, 5.0).unwrap();
        let a = chart.sample(50, 11);
        let b = chart.sample(50, 11);
        assert_eq!(a, b);
        assert!(a.iter().all(|p| chart.contains(p)));
        assert_ne!(a, chart.sample(50, 12));
    }

    #[test]
    fn domain_error_names_point() {
        let chart = CoordinateChart::cube(2, 1.0).unwrap();
        match chart.check(&[2.0, 0.0]) {
            Err(HktError::Domain { point, .. }) => assert_eq!(point, vec![2.0, 0.0]),
            other => panic!("unexpected {other:?}"),
        }
    }
}
