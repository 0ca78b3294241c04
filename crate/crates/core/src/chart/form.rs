use super::field::{EndomorphismField, Guard, ScalarField};
use super::indices::{permutation_sign, IndexSpace};
use super::Chart;
use crate::error::{HktError, Result};
use crate::jet::{lift_point, point_depth, shifted_point, HyperDual};
use num::complex::Complex64;
use std::fmt;
use std::sync::Arc;

type ComponentsFn = dyn Fn(&[HyperDual]) -> Vec<HyperDual> + Send + Sync;

/// Real differential form of degree `k`, stored as its components on
/// strictly increasing multi-indices (lexicographic order). The component on
/// `i_1 < ... < i_k` is the tensor value `ω(e_{i_1}, ..., e_{i_k})`.
#[derive(Clone)]
pub struct Form {
    chart: Chart,
    degree: usize,
    eval: Arc<ComponentsFn>,
    guards: Vec<Guard>,
}

impl fmt::Debug for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Form")
            .field("dim", &self.chart.dim())
            .field("degree", &self.degree)
            .finish()
    }
}

fn merge_guards(a: &[Guard], b: &[Guard]) -> Vec<Guard> {
    let mut out = a.to_vec();
    for g in b {
        if !out.iter().any(|h| Arc::ptr_eq(h, g)) {
            out.push(g.clone());
        }
    }
    out
}

impl Form {
    pub fn new<F>(chart: &Chart, degree: usize, f: F) -> Self
    where
        F: Fn(&[HyperDual]) -> Vec<HyperDual> + Send + Sync + 'static,
    {
        assert!(
            degree <= IndexSpace::MAX_DEGREE && degree <= chart.dim(),
            "form degree {degree} unsupported on a {}-dimensional chart",
            chart.dim()
        );
        Form {
            chart: chart.clone(),
            degree,
            eval: Arc::new(f),
            guards: Vec::new(),
        }
    }

    pub fn zero(chart: &Chart, degree: usize) -> Self {
        let count = IndexSpace::get(chart.dim()).count(degree);
        Self::new(chart, degree, move |_| vec![HyperDual::ZERO; count])
    }

    pub fn from_scalar(f: &ScalarField) -> Self {
        let chart = f.chart().clone();
        let f = f.clone();
        Self::new(&chart, 0, move |p| vec![f.eval_jet(p)])
    }

    /// Constant-coefficient form from its increasing-index components.
    pub fn constant(chart: &Chart, degree: usize, components: Vec<f64>) -> Self {
        assert_eq!(components.len(), IndexSpace::get(chart.dim()).count(degree));
        let c: Vec<HyperDual> = components.into_iter().map(HyperDual::constant).collect();
        Self::new(chart, degree, move |_| c.clone())
    }

    /// Form whose components are given scalar fields (increasing-index order).
    pub fn from_fields(chart: &Chart, degree: usize, fields: Vec<ScalarField>) -> Self {
        assert_eq!(fields.len(), IndexSpace::get(chart.dim()).count(degree));
        Self::new(chart, degree, move |p| fields.iter().map(|f| f.eval_jet(p)).collect())
    }

    /// `sum_I coeff_I dx^I` with the alternating-tensor normalization, i.e. the
    /// wedge product of coordinate differentials.
    pub fn coordinate_wedge(chart: &Chart, indices: &[usize]) -> Self {
        let k = indices.len();
        let space = IndexSpace::get(chart.dim());
        let mut sorted = indices.to_vec();
        sorted.sort_unstable();
        let sign = permutation_sign(indices) as f64;
        let mut comps = vec![0.0; space.count(k)];
        if sign != 0.0 {
            comps[space.rank(&sorted)] = sign / factorial(k);
        }
        Self::constant(chart, k, comps)
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn guards(&self) -> &[Guard] {
        &self.guards
    }

    pub fn with_guard(mut self, guard: Guard) -> Self {
        self.guards.push(guard);
        self
    }

    fn with_guards(mut self, guards: Vec<Guard>) -> Self {
        self.guards = guards;
        self
    }

    pub(crate) fn run_guards(&self, point: &[f64]) -> Result<()> {
        self.guards.iter().try_for_each(|g| g(point))
    }

    #[inline]
    pub fn eval_jet(&self, point: &[HyperDual]) -> Vec<HyperDual> {
        (self.eval)(point)
    }

    /// Increasing-index components at a real point.
    pub fn eval(&self, point: &[f64]) -> Result<Vec<f64>> {
        self.chart.check(point)?;
        self.run_guards(point)?;
        Ok((self.eval)(&lift_point(point)).iter().map(HyperDual::value).collect())
    }

    /// Component on an arbitrary index tuple (antisymmetric extension).
    pub fn component(&self, point: &[f64], indices: &[usize]) -> Result<f64> {
        if indices.len() != self.degree {
            return Err(HktError::DegreeMismatch {
                expected: self.degree,
                found: indices.len(),
            });
        }
        let sign = permutation_sign(indices);
        if sign == 0 {
            return Ok(0.0);
        }
        let mut sorted = indices.to_vec();
        sorted.sort_unstable();
        let comps = self.eval(point)?;
        Ok(sign as f64 * comps[IndexSpace::get(self.dim()).rank(&sorted)])
    }

    /// `ω(X_1, ..., X_k)` at a point.
    pub fn eval_on(&self, point: &[f64], vectors: &[Vec<f64>]) -> Result<f64> {
        if vectors.len() != self.degree {
            return Err(HktError::DegreeMismatch {
                expected: self.degree,
                found: vectors.len(),
            });
        }
        let comps = self.eval(point)?;
        let space = IndexSpace::get(self.dim());
        Ok(space
            .combos(self.degree)
            .iter()
            .zip(&comps)
            .filter(|(_, c)| **c != 0.0)
            .map(|(idx, c)| {
                let m: Vec<Vec<f64>> = idx.iter().map(|&i| vectors.iter().map(|v| v[i]).collect()).collect();
                c * determinant(&m)
            })
            .sum())
    }

    /// Largest component magnitude at a point.
    pub fn max_abs(&self, point: &[f64]) -> Result<f64> {
        Ok(self.eval(point)?.iter().fold(0.0, |m, c| m.max(c.abs())))
    }

    fn check_same(&self, other: &Form) {
        assert_eq!(self.degree, other.degree, "degree mismatch in form arithmetic");
        assert_eq!(self.dim(), other.dim(), "dimension mismatch in form arithmetic");
    }

    pub fn add(&self, other: &Form) -> Form {
        self.combine(other, 1.0, 1.0)
    }

    pub fn sub(&self, other: &Form) -> Form {
        self.combine(other, 1.0, -1.0)
    }

    /// `a * self + b * other`.
    pub fn combine(&self, other: &Form, a: f64, b: f64) -> Form {
        self.check_same(other);
        let (f, g) = (self.eval.clone(), other.eval.clone());
        Form::new(&self.chart, self.degree, move |p| {
            let mut x = f(p);
            for (xi, yi) in x.iter_mut().zip(g(p)) {
                *xi = *xi * a + yi * b;
            }
            x
        })
        .with_guards(merge_guards(&self.guards, &other.guards))
    }

    pub fn scale(&self, c: f64) -> Form {
        let f = self.eval.clone();
        Form::new(&self.chart, self.degree, move |p| {
            f(p).into_iter().map(|x| x * c).collect()
        })
        .with_guards(self.guards.clone())
    }

    /// Pointwise product with a function.
    pub fn times(&self, s: &ScalarField) -> Form {
        let f = self.eval.clone();
        let s = s.clone();
        Form::new(&self.chart, self.degree, move |p| {
            let v = s.eval_jet(p);
            f(p).into_iter().map(|x| x * v).collect()
        })
        .with_guards(self.guards.clone())
    }

    /// Wedge product, `(α ∧ β) = Alt(α ⊗ β)`.
    pub fn wedge(&self, other: &Form) -> Form {
        let (k, l) = (self.degree, other.degree);
        let n = self.dim();
        let (f, g) = (self.eval.clone(), other.eval.clone());
        let space = IndexSpace::get(n);
        let norm = factorial(k) * factorial(l) / factorial(k + l);
        // For each target index set, all (sign, rank_a, rank_b) splits.
        let splits: Vec<Vec<(f64, usize, usize)>> = space
            .combos(k + l)
            .iter()
            .map(|target| {
                space
                    .combos(k)
                    .iter()
                    .filter(|a| a.iter().all(|i| target.contains(i)))
                    .map(|a| {
                        let b: Vec<usize> = target.iter().copied().filter(|i| !a.contains(i)).collect();
                        let mut order = a.clone();
                        order.extend(&b);
                        (permutation_sign(&order) as f64 * norm, space.rank(a), space.rank(&b))
                    })
                    .collect()
            })
            .collect();
        Form::new(&self.chart, k + l, move |p| {
            let (a, b) = (f(p), g(p));
            splits
                .iter()
                .map(|terms| terms.iter().map(|&(s, ra, rb)| a[ra] * b[rb] * s).sum())
                .collect()
        })
        .with_guards(merge_guards(&self.guards, &other.guards))
    }

    /// Exterior derivative:
    /// `(dω)(e_{j_0}, ..., e_{j_k}) = 1/(k+1) sum_l (-1)^l ∂_{j_l} ω(..., ê_{j_l}, ...)`.
    pub fn d(&self) -> Form {
        let k = self.degree;
        let n = self.dim();
        let inner = self.eval.clone();
        let space = IndexSpace::get(n);
        let stencil: Vec<Vec<(usize, usize, f64)>> = space
            .combos(k + 1)
            .iter()
            .map(|target| {
                (0..=k)
                    .map(|l| {
                        let rest: Vec<usize> = target
                            .iter()
                            .enumerate()
                            .filter(|(m, _)| *m != l)
                            .map(|(_, &i)| i)
                            .collect();
                        let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
                        (target[l], space.rank(&rest), sign / (k as f64 + 1.0))
                    })
                    .collect()
            })
            .collect();
        Form::new(&self.chart, k + 1, move |p| {
            let base = point_depth(p);
            let partials: Vec<Vec<HyperDual>> = (0..n)
                .map(|i| {
                    inner(&shifted_point(p, base, i))
                        .iter()
                        .map(|c| c.derivative_part(base))
                        .collect()
                })
                .collect();
            stencil
                .iter()
                .map(|terms| terms.iter().map(|&(dir, rank, s)| partials[dir][rank] * s).sum())
                .collect()
        })
        .with_guards(self.guards.clone())
    }

    /// `(Jω)(X_1, ..., X_k) = (-1)^k ω(JX_1, ..., JX_k)`.
    pub fn apply_j(&self, j: &EndomorphismField) -> Form {
        let sign = if self.degree % 2 == 0 { 1.0 } else { -1.0 };
        self.contract(j, sign)
    }

    /// `ω(MX_1, ..., MX_k)` scaled by `sign`, evaluated at the same point.
    pub(crate) fn contract(&self, m: &EndomorphismField, sign: f64) -> Form {
        if self.degree == 0 {
            return self.scale(sign);
        }
        let k = self.degree;
        let n = self.dim();
        let inner = self.eval.clone();
        let m = m.clone();
        Form::new(&self.chart, k, move |p| {
            let comps = inner(p);
            let mat = m.eval_jet(p);
            contract_components(&comps, k, n, &mat, sign)
        })
        .with_guards(self.guards.clone())
    }

    /// `d^c ω = (-1)^k J d J ω` for a `k`-form, each `J` acting with the sign
    /// of the degree it is applied to.
    pub fn d_c(&self, j: &EndomorphismField) -> Form {
        let k = self.degree;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let inner = self.apply_j(j).d().apply_j(j).scale(sign);
        let guard = j.almost_complex_guard(1e-9);
        let guards = merge_guards(&inner.guards, &[guard]);
        inner.with_guards(guards)
    }

    /// Pull back along the linear map `phi`: `(Φ*ω)_p(X, ...) = ω_{Φp}(ΦX, ...)`.
    pub(crate) fn pullback_linear(&self, phi: &nalgebra::DMatrix<f64>) -> Form {
        let k = self.degree;
        let n = self.dim();
        let inner = self.eval.clone();
        let flat: Vec<HyperDual> = (0..n * n).map(|i| HyperDual::constant(phi[(i / n, i % n)])).collect();
        let phi = phi.clone();
        Form::new(&self.chart, k, move |p| {
            let image: Vec<HyperDual> = (0..n).map(|r| (0..n).map(|c| p[c] * phi[(r, c)]).sum()).collect();
            let comps = inner(&image);
            if k == 0 {
                comps
            } else {
                contract_components(&comps, k, n, &flat, 1.0)
            }
        })
    }
}

/// `result_I = sign * sum_a ω(a_1, ..., a_k) prod_j M[a_j][i_j]`, with `ω`
/// extended antisymmetrically. Zero matrix entries are skipped.
pub(crate) fn contract_components(
    comps: &[HyperDual],
    k: usize,
    n: usize,
    mat: &[HyperDual],
    sign: f64,
) -> Vec<HyperDual> {
    let space = IndexSpace::get(n);
    let columns: Vec<Vec<(usize, HyperDual)>> = (0..n)
        .map(|c| {
            (0..n)
                .filter_map(|r| {
                    let v = mat[r * n + c];
                    (!v.is_zero()).then_some((r, v))
                })
                .collect()
        })
        .collect();
    let mut tuple = [0usize; IndexSpace::MAX_DEGREE];
    space
        .combos(k)
        .iter()
        .map(|target| {
            let mut acc = HyperDual::ZERO;
            accumulate(
                target,
                0,
                0,
                HyperDual::constant(sign),
                &columns,
                &mut tuple,
                comps,
                space,
                &mut acc,
            );
            acc
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn accumulate(
    target: &[usize],
    pos: usize,
    used: usize,
    product: HyperDual,
    columns: &[Vec<(usize, HyperDual)>],
    tuple: &mut [usize; IndexSpace::MAX_DEGREE],
    comps: &[HyperDual],
    space: &IndexSpace,
    acc: &mut HyperDual,
) {
    if pos == target.len() {
        let s = permutation_sign(&tuple[..pos]);
        let c = comps[space.rank_of_mask(used)];
        if !c.is_zero() {
            *acc += c * product * s as f64;
        }
        return;
    }
    for &(row, v) in &columns[target[pos]] {
        if used & (1 << row) != 0 {
            continue;
        }
        tuple[pos] = row;
        accumulate(
            target,
            pos + 1,
            used | (1 << row),
            product * v,
            columns,
            tuple,
            comps,
            space,
            acc,
        );
    }
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

fn determinant(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    if n == 0 {
        return 1.0;
    }
    nalgebra::DMatrix::from_fn(n, n, |i, j| m[i][j]).determinant()
}

/// Complex-valued form `re + i im`.
#[derive(Clone, Debug)]
pub struct ComplexForm {
    pub re: Form,
    pub im: Form,
}

impl ComplexForm {
    pub fn new(re: Form, im: Form) -> Self {
        re.check_same(&im);
        ComplexForm { re, im }
    }

    pub fn real(re: &Form) -> Self {
        let im = Form::zero(re.chart(), re.degree());
        ComplexForm { re: re.clone(), im }
    }

    pub fn degree(&self) -> usize {
        self.re.degree()
    }

    pub fn eval(&self, point: &[f64]) -> Result<Vec<Complex64>> {
        let (a, b) = (self.re.eval(point)?, self.im.eval(point)?);
        Ok(a.into_iter().zip(b).map(|(x, y)| Complex64::new(x, y)).collect())
    }

    pub fn max_abs(&self, point: &[f64]) -> Result<f64> {
        Ok(self.eval(point)?.iter().fold(0.0, |m, c| m.max(c.norm())))
    }

    pub fn add(&self, other: &ComplexForm) -> ComplexForm {
        ComplexForm::new(self.re.add(&other.re), self.im.add(&other.im))
    }

    pub fn sub(&self, other: &ComplexForm) -> ComplexForm {
        ComplexForm::new(self.re.sub(&other.re), self.im.sub(&other.im))
    }

    /// Multiply by the complex constant `c`.
    pub fn scale(&self, c: Complex64) -> ComplexForm {
        ComplexForm::new(
            self.re.combine(&self.im, c.re, -c.im),
            self.im.combine(&self.re, c.re, c.im),
        )
    }

    pub fn conj(&self) -> ComplexForm {
        ComplexForm::new(self.re.clone(), self.im.scale(-1.0))
    }

    pub fn d(&self) -> ComplexForm {
        ComplexForm::new(self.re.d(), self.im.d())
    }

    pub fn apply_j(&self, j: &EndomorphismField) -> ComplexForm {
        ComplexForm::new(self.re.apply_j(j), self.im.apply_j(j))
    }

    pub fn d_c(&self, j: &EndomorphismField) -> ComplexForm {
        ComplexForm::new(self.re.d_c(j), self.im.d_c(j))
    }

    /// `∂ = (d + i d^c) / 2`.
    pub fn del(&self, j: &EndomorphismField) -> ComplexForm {
        let (da, db) = (self.re.d(), self.im.d());
        let (ca, cb) = (self.re.d_c(j), self.im.d_c(j));
        ComplexForm::new(da.combine(&cb, 0.5, -0.5), db.combine(&ca, 0.5, 0.5))
    }

    /// `∂̄ = (d - i d^c) / 2`.
    pub fn delbar(&self, j: &EndomorphismField) -> ComplexForm {
        let (da, db) = (self.re.d(), self.im.d());
        let (ca, cb) = (self.re.d_c(j), self.im.d_c(j));
        ComplexForm::new(da.combine(&cb, 0.5, 0.5), db.combine(&ca, 0.5, -0.5))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::CoordinateChart;
    use nalgebra::DMatrix;

    fn chart(n: usize) -> Chart {
        CoordinateChart::cube(n, 2.0).unwrap()
    }

    #[test]
    fn d_of_constant_is_zero() {
        let c = chart(3);
        let f = Form::from_scalar(&ScalarField::constant(&c, 4.2));
        assert_eq!(f.d().eval(&[0.1, 0.2, 0.3]).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn d_of_x1_dx2_is_dx1_wedge_dx2() {
        let c = chart(3);
        let x1 = ScalarField::coordinate(&c, 0);
        let zero = ScalarField::constant(&c, 0.0);
        let omega = Form::from_fields(&c, 1, vec![zero.clone(), x1, zero]);
        let expected = Form::coordinate_wedge(&c, &[0, 1]);
        let p = [0.3, -0.4, 1.1];
        assert_eq!(omega.d().eval(&p).unwrap(), expected.eval(&p).unwrap());
        let dx1 = Form::coordinate_wedge(&c, &[0]);
        let dx2 = Form::coordinate_wedge(&c, &[1]);
        assert_eq!(dx1.wedge(&dx2).eval(&p).unwrap(), expected.eval(&p).unwrap());
    }

    #[test]
    fn eval_on_is_antisymmetric() {
        let c = chart(4);
        let f = Form::new(&c, 2, |p| (0..6).map(|i| p[i % 4] * (i as f64 + 1.0)).collect());
        let p = [0.1, 0.5, -0.3, 0.7];
        let x = vec![1.0, 2.0, 0.5, -1.0];
        let y = vec![0.3, -0.2, 1.0, 0.4];
        let a = f.eval_on(&p, &[x.clone(), y.clone()]).unwrap();
        let b = f.eval_on(&p, &[y, x]).unwrap();
        assert_eq!(a, -b);
    }

    #[test]
    fn degree_zero_j_is_identity() {
        let c = chart(2);
        let j = EndomorphismField::constant(&c, DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]));
        let f = Form::from_scalar(&ScalarField::coordinate(&c, 1));
        assert_eq!(f.apply_j(&j).eval(&[0.5, 0.25]).unwrap(), vec![0.25]);
    }

    #[test]
    fn d_c_flags_non_complex_j() {
        let c = chart(2);
        let j = EndomorphismField::constant(&c, DMatrix::identity(2, 2) * 2.0);
        let f = Form::from_scalar(&ScalarField::coordinate(&c, 0));
        assert!(matches!(f.d_c(&j).eval(&[0.0, 0.0]), Err(HktError::Integrity { .. })));
    }

    #[test]
    fn degree_mismatch_is_reported() {
        let c = chart(3);
        let f = Form::zero(&c, 2);
        assert!(matches!(
            f.eval_on(&[0.0; 3], &[vec![1.0, 0.0, 0.0]]),
            Err(HktError::DegreeMismatch { expected: 2, found: 1 })
        ));
    }
}
