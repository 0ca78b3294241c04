use super::Chart;
use crate::error::{HktError, Result};
use crate::jet::{gradient, lift_point, HyperDual};
use nalgebra::DMatrix;
use std::fmt;
use std::sync::Arc;

type ScalarFn = dyn Fn(&[HyperDual]) -> HyperDual + Send + Sync;
type MatrixFn = dyn Fn(&[HyperDual]) -> Vec<HyperDual> + Send + Sync;

/// A pointwise precondition checked whenever a derived object is evaluated at
/// a real point.
pub type Guard = Arc<dyn Fn(&[f64]) -> Result<()> + Send + Sync>;

/// Smooth real function on a chart.
#[derive(Clone)]
pub struct ScalarField {
    chart: Chart,
    eval: Arc<ScalarFn>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField").field("dim", &self.chart.dim()).finish()
    }
}

impl ScalarField {
    pub fn new<F>(chart: &Chart, f: F) -> Self
    where
        F: Fn(&[HyperDual]) -> HyperDual + Send + Sync + 'static,
    {
        ScalarField {
            chart: chart.clone(),
            eval: Arc::new(f),
        }
    }

    pub fn constant(chart: &Chart, c: f64) -> Self {
        Self::new(chart, move |_| HyperDual::constant(c))
    }

    pub fn coordinate(chart: &Chart, i: usize) -> Self {
        assert!(i < chart.dim());
        Self::new(chart, move |p| p[i])
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        self.chart.check(point)?;
        Ok((self.eval)(&lift_point(point)).value())
    }

    #[inline]
    pub fn eval_jet(&self, point: &[HyperDual]) -> HyperDual {
        (self.eval)(point)
    }

    /// Partial derivatives at a hyper-dual point, one level deeper.
    pub fn gradient_jet(&self, point: &[HyperDual]) -> Vec<HyperDual> {
        gradient(|p| (self.eval)(p), point)
    }

    /// Gradient by forward-mode differentiation.
    pub fn gradient(&self, point: &[f64]) -> Result<Vec<f64>> {
        self.chart.check(point)?;
        let f = self.eval.clone();
        Ok(gradient(|p| f(p), &lift_point(point))
            .iter()
            .map(HyperDual::value)
            .collect())
    }

    /// Hessian by two nested forward-mode passes.
    pub fn hessian(&self, point: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.chart.check(point)?;
        let f = self.eval.clone();
        let p = lift_point(point);
        let n = p.len();
        let mut out = vec![vec![0.0; n]; n];
        for (i, row) in out.iter_mut().enumerate() {
            let dfi = |q: &[HyperDual]| {
                let shifted = crate::jet::shifted_point(q, crate::jet::point_depth(q), i);
                f(&shifted).derivative_part(crate::jet::point_depth(q))
            };
            for (j, g) in gradient(dfi, &p).iter().enumerate() {
                row[j] = g.value();
            }
        }
        Ok(out)
    }

    /// Central finite-difference gradient. Test oracle only; the domain is
    /// not re-checked at the offset points.
    pub fn gradient_fd(&self, point: &[f64], step: f64) -> Vec<f64> {
        (0..point.len())
            .map(|i| {
                let mut plus = point.to_vec();
                let mut minus = point.to_vec();
                plus[i] += step;
                minus[i] -= step;
                let fp = (self.eval)(&lift_point(&plus)).value();
                let fm = (self.eval)(&lift_point(&minus)).value();
                (fp - fm) / (2.0 * step)
            })
            .collect()
    }

    /// `f(self)` for a function acting on hyper-duals.
    pub fn map<F>(&self, f: F) -> ScalarField
    where
        F: Fn(HyperDual) -> HyperDual + Send + Sync + 'static,
    {
        let inner = self.eval.clone();
        ScalarField::new(&self.chart, move |p| f(inner(p)))
    }

    pub fn zip_with<F>(&self, other: &ScalarField, f: F) -> ScalarField
    where
        F: Fn(HyperDual, HyperDual) -> HyperDual + Send + Sync + 'static,
    {
        let a = self.eval.clone();
        let b = other.eval.clone();
        ScalarField::new(&self.chart, move |p| f(a(p), b(p)))
    }

    pub fn scaled(&self, c: f64) -> ScalarField {
        self.map(move |v| v * c)
    }
}

/// Field of linear endomorphisms `J(p)` of the tangent space. Entries are
/// stored row-major: `J e_c = sum_r J[r][c] e_r`.
#[derive(Clone)]
pub struct EndomorphismField {
    chart: Chart,
    eval: Arc<MatrixFn>,
    constant: Option<Arc<DMatrix<f64>>>,
}

impl fmt::Debug for EndomorphismField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EndomorphismField")
            .field("dim", &self.chart.dim())
            .field("constant", &self.constant.is_some())
            .finish()
    }
}

impl EndomorphismField {
    pub fn new<F>(chart: &Chart, f: F) -> Self
    where
        F: Fn(&[HyperDual]) -> Vec<HyperDual> + Send + Sync + 'static,
    {
        EndomorphismField {
            chart: chart.clone(),
            eval: Arc::new(f),
            constant: None,
        }
    }

    pub fn constant(chart: &Chart, m: DMatrix<f64>) -> Self {
        let n = chart.dim();
        assert_eq!((m.nrows(), m.ncols()), (n, n), "matrix shape must match chart");
        let entries: Vec<HyperDual> = (0..n * n).map(|k| HyperDual::constant(m[(k / n, k % n)])).collect();
        EndomorphismField {
            chart: chart.clone(),
            eval: Arc::new(move |_| entries.clone()),
            constant: Some(Arc::new(m)),
        }
    }

    pub fn identity(chart: &Chart) -> Self {
        Self::constant(chart, DMatrix::identity(chart.dim(), chart.dim()))
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn as_constant(&self) -> Option<&DMatrix<f64>> {
        self.constant.as_deref()
    }

    #[inline]
    pub fn eval_jet(&self, point: &[HyperDual]) -> Vec<HyperDual> {
        (self.eval)(point)
    }

    pub fn eval(&self, point: &[f64]) -> Result<DMatrix<f64>> {
        self.chart.check(point)?;
        Ok(self.eval_unchecked(point))
    }

    pub(crate) fn eval_unchecked(&self, point: &[f64]) -> DMatrix<f64> {
        if let Some(m) = &self.constant {
            return (**m).clone();
        }
        let n = self.dim();
        let e = (self.eval)(&lift_point(point));
        DMatrix::from_fn(n, n, |r, c| e[r * n + c].value())
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &EndomorphismField) -> EndomorphismField {
        if let (Some(a), Some(b)) = (&self.constant, &other.constant) {
            return Self::constant(&self.chart, &**a * &**b);
        }
        let (a, b) = (self.eval.clone(), other.eval.clone());
        let n = self.dim();
        Self::new(&self.chart, move |p| {
            let (ma, mb) = (a(p), b(p));
            let mut out = vec![HyperDual::ZERO; n * n];
            for r in 0..n {
                for k in 0..n {
                    let x = ma[r * n + k];
                    if x.is_zero() {
                        continue;
                    }
                    for c in 0..n {
                        out[r * n + c] += x * mb[k * n + c];
                    }
                }
            }
            out
        })
    }

    /// `sum_i coeffs[i] * fields[i]`.
    pub fn linear_combination(coeffs: &[f64], fields: &[&EndomorphismField]) -> EndomorphismField {
        assert_eq!(coeffs.len(), fields.len());
        let chart = fields[0].chart.clone();
        if let Some(consts) = fields.iter().map(|f| f.constant.clone()).collect::<Option<Vec<_>>>() {
            let n = chart.dim();
            let mut m = DMatrix::zeros(n, n);
            for (c, f) in coeffs.iter().zip(consts) {
                m += &*f * *c;
            }
            return Self::constant(&chart, m);
        }
        let evals: Vec<_> = fields.iter().map(|f| f.eval.clone()).collect();
        let coeffs = coeffs.to_vec();
        Self::new(&chart, move |p| {
            let mut out: Option<Vec<HyperDual>> = None;
            for (c, e) in coeffs.iter().zip(&evals) {
                let m = e(p);
                match &mut out {
                    None => out = Some(m.into_iter().map(|x| x * *c).collect()),
                    Some(acc) => acc.iter_mut().zip(m).for_each(|(a, x)| *a += x * *c),
                }
            }
            out.unwrap_or_default()
        })
    }

    pub fn neg(&self) -> EndomorphismField {
        Self::linear_combination(&[-1.0], &[self])
    }

    /// Frobenius norm of `J^2 + Id` at a point.
    pub fn square_residual(&self, point: &[f64]) -> Result<f64> {
        let j = self.eval(point)?;
        let n = self.dim();
        Ok((&j * &j + DMatrix::<f64>::identity(n, n)).norm())
    }

    pub(crate) fn almost_complex_guard(&self, tol: f64) -> Guard {
        let j = self.clone();
        Arc::new(move |p: &[f64]| {
            let m = j.eval_unchecked(p);
            let n = m.nrows();
            let r = (&m * &m + DMatrix::<f64>::identity(n, n)).norm();
            if r > tol {
                Err(HktError::Integrity {
                    point: p.to_vec(),
                    what: format!("J^2 + Id has norm {r:e}; J is not almost complex"),
                })
            } else {
                Ok(())
            }
        })
    }
}

/// Symmetric bilinear form field, stored as its upper triangle.
#[derive(Clone)]
pub struct MetricField {
    chart: Chart,
    eval: Arc<MatrixFn>,
}

impl fmt::Debug for MetricField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricField").field("dim", &self.chart.dim()).finish()
    }
}

#[inline]
fn packed_index(n: usize, i: usize, j: usize) -> usize {
    let (r, c) = if i <= j { (i, j) } else { (j, i) };
    r * n - r * (r + 1) / 2 + c
}

impl MetricField {
    /// `f` returns the upper triangle row by row (`n (n + 1) / 2` entries).
    pub fn from_packed<F>(chart: &Chart, f: F) -> Self
    where
        F: Fn(&[HyperDual]) -> Vec<HyperDual> + Send + Sync + 'static,
    {
        MetricField {
            chart: chart.clone(),
            eval: Arc::new(f),
        }
    }

    /// Symmetric part of a full row-major matrix function.
    pub fn from_full<F>(chart: &Chart, f: F) -> Self
    where
        F: Fn(&[HyperDual]) -> Vec<HyperDual> + Send + Sync + 'static,
    {
        let n = chart.dim();
        Self::from_packed(chart, move |p| {
            let m = f(p);
            let mut out = Vec::with_capacity(n * (n + 1) / 2);
            for i in 0..n {
                for j in i..n {
                    out.push(if i == j {
                        m[i * n + i]
                    } else {
                        (m[i * n + j] + m[j * n + i]) * 0.5
                    });
                }
            }
            out
        })
    }

    pub fn constant(chart: &Chart, m: &DMatrix<f64>) -> Self {
        let n = chart.dim();
        assert_eq!((m.nrows(), m.ncols()), (n, n));
        let mut packed = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                packed.push(HyperDual::constant(0.5 * (m[(i, j)] + m[(j, i)])));
            }
        }
        Self::from_packed(chart, move |_| packed.clone())
    }

    pub fn euclidean(chart: &Chart) -> Self {
        Self::constant(chart, &DMatrix::identity(chart.dim(), chart.dim()))
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    /// Full row-major entries.
    pub fn eval_jet(&self, point: &[HyperDual]) -> Vec<HyperDual> {
        let n = self.dim();
        let packed = (self.eval)(point);
        let mut out = vec![HyperDual::ZERO; n * n];
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = packed[packed_index(n, i, j)];
            }
        }
        out
    }

    pub fn eval(&self, point: &[f64]) -> Result<DMatrix<f64>> {
        self.chart.check(point)?;
        Ok(self.eval_unchecked(point))
    }

    pub(crate) fn eval_unchecked(&self, point: &[f64]) -> DMatrix<f64> {
        let n = self.dim();
        let packed = (self.eval)(&lift_point(point));
        DMatrix::from_fn(n, n, |i, j| packed[packed_index(n, i, j)].value())
    }

    /// `e^phi * g`.
    pub fn conformal(&self, phi: &ScalarField) -> MetricField {
        let inner = self.eval.clone();
        let phi = phi.clone();
        Self::from_packed(&self.chart, move |p| {
            let scale = phi.eval_jet(p).exp();
            inner(p).into_iter().map(|x| x * scale).collect()
        })
    }

    /// Smallest eigenvalue at a point.
    pub fn min_eigenvalue(&self, point: &[f64]) -> Result<f64> {
        let m = self.eval(point)?;
        Ok(m.symmetric_eigenvalues().min())
    }

    pub fn is_positive_definite(&self, point: &[f64]) -> Result<bool> {
        Ok(self.eval(point)?.cholesky().is_some())
    }

    /// `max |g(JX, JY) - g(X, Y)|` over coordinate vectors.
    pub fn hermitian_residual(&self, j: &EndomorphismField, point: &[f64]) -> Result<f64> {
        let g = self.eval(point)?;
        let jm = j.eval(point)?;
        Ok((jm.transpose() * &g * &jm - &g).amax())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::CoordinateChart;

    #[test]
    fn gradient_matches_finite_differences() {
        let chart = CoordinateChart::cube(3, 2.0).unwrap();
        let f = ScalarField::new(&chart, |p| (p[0] * p[1]).sin() + p[2].exp() * p[0]);
        let x = [0.3, -0.7, 0.4];
        let ad = f.gradient(&x).unwrap();
        let fd = f.gradient_fd(&x, 1e-5);
        for (a, b) in ad.iter().zip(&fd) {
            assert!((a - b).abs() <= 1e-6 * a.abs().max(1.0));
        }
        let h = f.hessian(&x).unwrap();
        assert!((h[0][1] - h[1][0]).abs() < 1e-14);
    }

    #[test]
    fn metric_symmetry_is_structural() {
        let chart = CoordinateChart::cube(2, 1.0).unwrap();
        let g = MetricField::from_full(&chart, |p| vec![p[0] + 2.0, p[1], 3.0 * p[1], 4.0 + 0.0 * p[0]]);
        let m = g.eval(&[0.5, 0.5]).unwrap();
        assert_eq!(m[(0, 1)], m[(1, 0)]);
        assert_eq!(m[(0, 1)], 1.0);
    }

    #[test]
    fn square_residual_of_rotation() {
        let chart = CoordinateChart::cube(2, 1.0).unwrap();
        let j = EndomorphismField::constant(&chart, DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]));
        assert_eq!(j.square_residual(&[0.0, 0.0]).unwrap(), 0.0);
    }
}
