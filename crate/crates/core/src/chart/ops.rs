use super::field::{EndomorphismField, Guard, MetricField};
use super::form::Form;
use super::indices::IndexSpace;
use super::ScalarField;
use crate::error::{HktError, Result};
use crate::jet::{lift_point, point_depth, shifted_point, HyperDual};
use nalgebra::DMatrix;
use std::sync::Arc;

const HERMITIAN_TOL: f64 = 1e-9;

/// `F(X, Y) = g(JX, Y)` without the hermiticity check.
pub fn kahler_form_unchecked(g: &MetricField, j: &EndomorphismField) -> Form {
    let n = g.dim();
    let chart = g.chart().clone();
    let (g, j) = (g.clone(), j.clone());
    let pairs: Vec<(usize, usize)> = IndexSpace::get(n).combos(2).iter().map(|c| (c[0], c[1])).collect();
    Form::new(&chart, 2, move |p| {
        let gm = g.eval_jet(p);
        let jm = j.eval_jet(p);
        pairs
            .iter()
            .map(|&(a, b)| (0..n).map(|r| jm[r * n + a] * gm[r * n + b]).sum())
            .collect()
    })
}

/// Kähler form of a Hermitian pair. Evaluation fails with an integrity error
/// at points where `g(J., J.) != g`.
pub fn kahler_form(g: &MetricField, j: &EndomorphismField) -> Form {
    let (gc, jc) = (g.clone(), j.clone());
    let guard: Guard = Arc::new(move |p: &[f64]| {
        let gm = gc.eval_unchecked(p);
        let jm = jc.eval_unchecked(p);
        let r = (jm.transpose() * &gm * &jm - &gm).amax();
        if r > HERMITIAN_TOL * gm.amax().max(1.0) {
            Err(HktError::Integrity {
                point: p.to_vec(),
                what: format!("metric is not Hermitian for J (residual {r:e})"),
            })
        } else {
            Ok(())
        }
    });
    kahler_form_unchecked(g, j).with_guard(guard)
}

/// Nijenhuis tensor at a point, `N(e_i, e_j)^r`.
#[derive(Clone, Debug, PartialEq)]
pub struct Nijenhuis {
    dim: usize,
    components: Vec<f64>,
}

impl Nijenhuis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Component `r` of `N(e_i, e_j)`.
    pub fn get(&self, i: usize, j: usize, r: usize) -> f64 {
        self.components[(i * self.dim + j) * self.dim + r]
    }

    pub fn vector(&self, i: usize, j: usize) -> Vec<f64> {
        (0..self.dim).map(|r| self.get(i, j, r)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// `N(X, Y)` for arbitrary vectors.
    pub fn apply(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut out = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                let w = x[i] * y[j];
                if w != 0.0 {
                    for (r, o) in out.iter_mut().enumerate() {
                        *o += w * self.get(i, j, r);
                    }
                }
            }
        }
        out
    }
}

/// `N(X,Y) = ([X,Y] + J[JX,Y] + J[X,JY] - [JX,JY]) / 4` from the values and
/// first partials `dj[s][r*n + c] = ∂_s J[r][c]`.
fn assemble_nijenhuis(jm: &DMatrix<f64>, dj: &[Vec<f64>]) -> Nijenhuis {
    let n = jm.nrows();
    let partial = |s: usize, r: usize, c: usize| dj[s][r * n + c];
    let mut components = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            // [J e_i, e_j] = -∂_j J e_i and [e_i, J e_j] = ∂_i J e_j.
            let v: Vec<f64> = (0..n).map(|r| partial(i, r, j) - partial(j, r, i)).collect();
            for r in 0..n {
                let jv: f64 = (0..n).map(|k| jm[(r, k)] * v[k]).sum();
                let bracket: f64 = (0..n)
                    .map(|s| jm[(s, i)] * partial(s, r, j) - jm[(s, j)] * partial(s, r, i))
                    .sum();
                components[(i * n + j) * n + r] = 0.25 * (jv - bracket);
            }
        }
    }
    Nijenhuis { dim: n, components }
}

/// Nijenhuis tensor by forward-mode differentiation of `J`.
pub fn nijenhuis(j: &EndomorphismField, point: &[f64]) -> Result<Nijenhuis> {
    let jm = j.eval(point)?;
    let n = j.dim();
    if j.as_constant().is_some() {
        return Ok(Nijenhuis {
            dim: n,
            components: vec![0.0; n * n * n],
        });
    }
    let p = lift_point(point);
    let base = point_depth(&p);
    let dj: Vec<Vec<f64>> = (0..n)
        .map(|s| {
            j.eval_jet(&shifted_point(&p, base, s))
                .iter()
                .map(|e| e.derivative_part(base).value())
                .collect()
        })
        .collect();
    Ok(assemble_nijenhuis(&jm, &dj))
}

/// Nijenhuis tensor with central finite differences for the partials of `J`.
/// Test oracle.
pub fn nijenhuis_fd(j: &EndomorphismField, point: &[f64], step: f64) -> Result<Nijenhuis> {
    let jm = j.eval(point)?;
    let n = j.dim();
    let dj: Vec<Vec<f64>> = (0..n)
        .map(|s| {
            let mut plus = point.to_vec();
            let mut minus = point.to_vec();
            plus[s] += step;
            minus[s] -= step;
            let a = j.eval_unchecked(&plus);
            let b = j.eval_unchecked(&minus);
            (0..n * n)
                .map(|k| (a[(k / n, k % n)] - b[(k / n, k % n)]) / (2.0 * step))
                .collect()
        })
        .collect();
    Ok(assemble_nijenhuis(&jm, &dj))
}

/// Inverse of a metric matrix, or a singular-metric error with its condition
/// number.
pub(crate) fn inverse_metric(g: &DMatrix<f64>, point: &[f64]) -> Result<DMatrix<f64>> {
    let sv = g.clone().singular_values();
    let (max, min) = (sv.max(), sv.min());
    let condition = if min > 0.0 { max / min } else { f64::INFINITY };
    if !(condition < 1e14) {
        return Err(HktError::SingularMetric {
            point: point.to_vec(),
            condition,
        });
    }
    g.clone().try_inverse().ok_or(HktError::SingularMetric {
        point: point.to_vec(),
        condition,
    })
}

/// `|∇μ|^2 = g^{ij} ∂_i μ ∂_j μ` at a point.
pub fn gradient_norm_sq(g: &MetricField, mu: &ScalarField, point: &[f64]) -> Result<f64> {
    let gi = inverse_metric(&g.eval(point)?, point)?;
    let grad = nalgebra::DVector::from_vec(mu.gradient(point)?);
    Ok(grad.dot(&(&gi * &grad)))
}

/// Pointwise pairing of 2-forms, `g(α, β) = 1/4 sum g^{ik} g^{jl} α_{ij} β_{kl}`
/// over all index values. With this normalization a Euclidean Kähler form has
/// squared norm `dim / 4`.
pub fn form_inner_product_2(g: &MetricField, alpha: &Form, beta: &Form, point: &[f64]) -> Result<f64> {
    for f in [alpha, beta] {
        if f.degree() != 2 {
            return Err(HktError::DegreeMismatch {
                expected: 2,
                found: f.degree(),
            });
        }
    }
    let n = g.dim();
    let gi = inverse_metric(&g.eval(point)?, point)?;
    let full = |f: &Form| -> Result<DMatrix<f64>> {
        let comps = f.eval(point)?;
        let mut m = DMatrix::zeros(n, n);
        for (c, v) in IndexSpace::get(n).combos(2).iter().zip(comps) {
            m[(c[0], c[1])] = v;
            m[(c[1], c[0])] = -v;
        }
        Ok(m)
    };
    let (a, b) = (full(alpha)?, full(beta)?);
    // sum_{ijkl} g^{ik} a_{ij} g^{jl} b_{kl} = tr(a g^{-1} b^T g^{-1}) with g symmetric.
    let prod = &a * &gi * b.transpose() * &gi;
    Ok(0.25 * prod.trace())
}

fn check_invertible(phi: &DMatrix<f64>) -> Result<()> {
    let det = phi.determinant();
    if det.abs() < 1e-12 || !det.is_finite() {
        Err(HktError::NotInvertible { det })
    } else {
        Ok(())
    }
}

/// Pullback of a form along a linear map of the chart.
pub fn pullback_form(phi: &DMatrix<f64>, omega: &Form) -> Result<Form> {
    check_invertible(phi)?;
    assert_eq!(phi.nrows(), omega.dim());
    Ok(omega.pullback_linear(phi))
}

/// `(Φ*g)_p = Φ^T g(Φp) Φ`.
pub fn pullback_metric(phi: &DMatrix<f64>, g: &MetricField) -> Result<MetricField> {
    check_invertible(phi)?;
    let n = g.dim();
    let phi = phi.clone();
    let g2 = g.clone();
    Ok(MetricField::from_full(g.chart(), move |p| {
        let image = linear_image(&phi, p);
        let gm = g2.eval_jet(&image);
        let mut out = vec![HyperDual::ZERO; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = HyperDual::ZERO;
                for a in 0..n {
                    if phi[(a, i)] == 0.0 {
                        continue;
                    }
                    for b in 0..n {
                        if phi[(b, j)] != 0.0 {
                            acc += gm[a * n + b] * (phi[(a, i)] * phi[(b, j)]);
                        }
                    }
                }
                out[i * n + j] = acc;
            }
        }
        out
    }))
}

/// `Φ^{-1} J(Φp) Φ`, the endomorphism field transported by `Φ`.
pub fn pullback_endomorphism(phi: &DMatrix<f64>, j: &EndomorphismField) -> Result<EndomorphismField> {
    check_invertible(phi)?;
    let inv = phi
        .clone()
        .try_inverse()
        .ok_or(HktError::NotInvertible { det: phi.determinant() })?;
    if let Some(m) = j.as_constant() {
        return Ok(EndomorphismField::constant(j.chart(), &inv * m * phi));
    }
    let n = j.dim();
    let (phi, j2) = (phi.clone(), j.clone());
    Ok(EndomorphismField::new(j.chart(), move |p| {
        let jm = j2.eval_jet(&linear_image(&phi, p));
        let mut out = vec![HyperDual::ZERO; n * n];
        for r in 0..n {
            for c in 0..n {
                let mut acc = HyperDual::ZERO;
                for a in 0..n {
                    for b in 0..n {
                        let w = inv[(r, a)] * phi[(b, c)];
                        if w != 0.0 {
                            acc += jm[a * n + b] * w;
                        }
                    }
                }
                out[r * n + c] = acc;
            }
        }
        out
    }))
}

/// Image of a tangent vector under a linear map.
pub fn pushforward(phi: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    (phi * nalgebra::DVector::from_column_slice(v))
        .iter()
        .copied()
        .collect()
}

fn linear_image(phi: &DMatrix<f64>, p: &[HyperDual]) -> Vec<HyperDual> {
    let n = p.len();
    (0..n)
        .map(|r| (0..n).filter(|&c| phi[(r, c)] != 0.0).map(|c| p[c] * phi[(r, c)]).sum())
        .collect()
}
