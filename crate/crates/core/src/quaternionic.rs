//! Hypercomplex and hyper-Hermitian structures, the two HKT criteria and the
//! Bismut torsion.

use crate::chart::{kahler_form, Chart, ComplexForm, EndomorphismField, Form, IndexSpace, MetricField, ScalarField};
use crate::error::{HktError, Result};
use crate::jet::HyperDual;
use crate::residual::{max_abs, max_abs_diff, minimum_over, Residual};
use nalgebra::DMatrix;
use num::complex::Complex64;

/// Triple `(I1, I2, I3)` of endomorphism fields on one chart.
#[derive(Clone, Debug)]
pub struct HypercomplexStructure {
    structures: [EndomorphismField; 3],
}

/// Matrices of the flat structure on `H^n`, coordinates `(x, y, u, v)` per
/// quaternionic index with `z = x + iy`, `w = u + iv`.
pub fn flat_matrices(n: usize) -> [DMatrix<f64>; 3] {
    let dim = 4 * n;
    let mut i1 = DMatrix::zeros(dim, dim);
    let mut i2 = DMatrix::zeros(dim, dim);
    for a in 0..n {
        let (x, y, u, v) = (4 * a, 4 * a + 1, 4 * a + 2, 4 * a + 3);
        // Column c holds the image of e_c.
        i1[(y, x)] = 1.0;
        i1[(x, y)] = -1.0;
        i1[(v, u)] = 1.0;
        i1[(u, v)] = -1.0;
        i2[(u, x)] = 1.0;
        i2[(v, y)] = -1.0;
        i2[(x, u)] = -1.0;
        i2[(y, v)] = 1.0;
    }
    let i3 = &i1 * &i2;
    [i1, i2, i3]
}

/// Matrices of the structure on `C^k x C^k` with
/// `I1(χ, ϱ) = (iχ, -iϱ)`, `I2(χ, ϱ) = (iϱ, iχ)`, `I3(χ, ϱ) = (-ϱ, χ)`.
/// Coordinates are `Re χ_1, Im χ_1, ..., Re ϱ_1, Im ϱ_1, ...`.
pub fn chi_rho_matrices(k: usize) -> [DMatrix<f64>; 3] {
    let dim = 4 * k;
    let half = 2 * k;
    let mut i1 = DMatrix::zeros(dim, dim);
    let mut i2 = DMatrix::zeros(dim, dim);
    let mut i3 = DMatrix::zeros(dim, dim);
    for s in 0..k {
        let (a, b) = (2 * s, 2 * s + 1);
        let (c, d) = (half + a, half + b);
        // i on χ, -i on ϱ.
        i1[(b, a)] = 1.0;
        i1[(a, b)] = -1.0;
        i1[(d, c)] = -1.0;
        i1[(c, d)] = 1.0;
        // χ' = iϱ, ϱ' = iχ.
        i2[(b, c)] = 1.0;
        i2[(a, d)] = -1.0;
        i2[(d, a)] = 1.0;
        i2[(c, b)] = -1.0;
        // χ' = -ϱ, ϱ' = χ.
        i3[(a, c)] = -1.0;
        i3[(b, d)] = -1.0;
        i3[(c, a)] = 1.0;
        i3[(d, b)] = 1.0;
    }
    [i1, i2, i3]
}

impl HypercomplexStructure {
    pub fn new(i1: EndomorphismField, i2: EndomorphismField, i3: EndomorphismField) -> Self {
        assert!(
            i1.dim() == i2.dim() && i2.dim() == i3.dim(),
            "structures must share a chart"
        );
        HypercomplexStructure {
            structures: [i1, i2, i3],
        }
    }

    pub fn from_matrices(chart: &Chart, m: [DMatrix<f64>; 3]) -> Self {
        let [a, b, c] = m;
        Self::new(
            EndomorphismField::constant(chart, a),
            EndomorphismField::constant(chart, b),
            EndomorphismField::constant(chart, c),
        )
    }

    /// Flat structure on a chart of dimension `4n`.
    pub fn flat(chart: &Chart) -> Result<Self> {
        let n = quaternionic_dim(chart)?;
        Ok(Self::from_matrices(chart, flat_matrices(n)))
    }

    /// The `(χ, ϱ)` structure on a chart of dimension `4k`.
    pub fn chi_rho(chart: &Chart) -> Result<Self> {
        let k = quaternionic_dim(chart)?;
        Ok(Self::from_matrices(chart, chi_rho_matrices(k)))
    }

    pub fn chart(&self) -> &Chart {
        self.structures[0].chart()
    }

    pub fn dim(&self) -> usize {
        self.structures[0].dim()
    }

    /// `I_a` for `a` in `1..=3`.
    pub fn i(&self, a: usize) -> &EndomorphismField {
        &self.structures[a - 1]
    }

    pub fn structures(&self) -> &[EndomorphismField; 3] {
        &self.structures
    }

    /// The triple `(I1, I2, -I3)`, which violates `I1 I2 = I3`.
    pub fn with_flipped_i3(&self) -> Self {
        Self::new(
            self.structures[0].clone(),
            self.structures[1].clone(),
            self.structures[2].neg(),
        )
    }

    /// `I_a φ` for a 1-form or any form.
    pub fn apply(&self, a: usize, form: &Form) -> Form {
        form.apply_j(self.i(a))
    }

    /// `d_a ω = (-1)^k I_a d I_a ω`.
    pub fn d_a(&self, a: usize, form: &Form) -> Form {
        form.d_c(self.i(a))
    }
}

fn quaternionic_dim(chart: &Chart) -> Result<usize> {
    let dim = chart.dim();
    if dim % 4 != 0 {
        return Err(HktError::InvalidChart(format!(
            "dimension {dim} is not a multiple of 4"
        )));
    }
    Ok(dim / 4)
}

/// Worst Frobenius norm of `I_a^2 + Id`, `I1 I2 - I3` and `I1 I2 + I2 I1`.
pub fn verify_quaternion_relations(h: &HypercomplexStructure, points: &[Vec<f64>]) -> Result<Residual> {
    let n = h.dim();
    Residual::over(points, |p| {
        let [a, b, c] = [h.i(1).eval(p)?, h.i(2).eval(p)?, h.i(3).eval(p)?];
        let id = DMatrix::<f64>::identity(n, n);
        let ab = &a * &b;
        Ok([
            (&a * &a + &id).norm(),
            (&b * &b + &id).norm(),
            (&c * &c + &id).norm(),
            (&ab - &c).norm(),
            (&ab + &b * &a).norm(),
        ]
        .into_iter()
        .fold(0.0, f64::max))
    })
}

/// `I_a = a1 I1 + a2 I2 + a3 I3` for a unit vector `a`.
pub fn complex_structure_at(h: &HypercomplexStructure, a: [f64; 3]) -> Result<EndomorphismField> {
    let norm = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(HktError::NotUnit(a));
    }
    Ok(EndomorphismField::linear_combination(&a, &[h.i(1), h.i(2), h.i(3)]))
}

/// `c = -1/2 d^c F` for the Hermitian pair `(g, J)`.
pub fn bismut_torsion(g: &MetricField, j: &EndomorphismField) -> Form {
    kahler_form(g, j).d_c(j).scale(-0.5)
}

/// A hypercomplex structure with a metric Hermitian for all three `I_a`, and
/// its three Kähler forms.
#[derive(Clone, Debug)]
pub struct HyperHermitianStructure {
    structure: HypercomplexStructure,
    metric: MetricField,
    forms: [Form; 3],
}

impl HyperHermitianStructure {
    pub fn new(structure: HypercomplexStructure, metric: MetricField) -> Self {
        let forms = [1, 2, 3].map(|a| kahler_form(&metric, structure.i(a)));
        HyperHermitianStructure {
            structure,
            metric,
            forms,
        }
    }

    /// Flat space with the Euclidean metric.
    pub fn flat(chart: &Chart) -> Result<Self> {
        Ok(Self::new(
            HypercomplexStructure::flat(chart)?,
            MetricField::euclidean(chart),
        ))
    }

    pub fn structure(&self) -> &HypercomplexStructure {
        &self.structure
    }

    pub fn metric(&self) -> &MetricField {
        &self.metric
    }

    pub fn chart(&self) -> &Chart {
        self.structure.chart()
    }

    /// `F_a(X, Y) = g(I_a X, Y)`.
    pub fn kahler(&self, a: usize) -> &Form {
        &self.forms[a - 1]
    }

    /// `d_a F_a`.
    pub fn twisted_differential(&self, a: usize) -> Form {
        self.structure.d_a(a, self.kahler(a))
    }

    /// Worst `|g(I_a X, I_a Y) - g(X, Y)|` over coordinate vectors.
    pub fn hermitian_residual(&self, points: &[Vec<f64>]) -> Result<Residual> {
        Residual::over(points, |p| {
            let mut worst: f64 = 0.0;
            for a in 1..=3 {
                worst = worst.max(self.metric.hermitian_residual(self.structure.i(a), p)?);
            }
            Ok(worst)
        })
    }
}

/// Worst of `|d1F1 - d2F2|` and `|d2F2 - d3F3|` over components and points.
pub fn hkt_residual(hh: &HyperHermitianStructure, points: &[Vec<f64>]) -> Result<Residual> {
    let [a, b, c] = [1, 2, 3].map(|k| hh.twisted_differential(k));
    Residual::over(points, |p| {
        let (x, y, z) = (a.eval(p)?, b.eval(p)?, c.eval(p)?);
        Ok(max_abs_diff(&x, &y).max(max_abs_diff(&y, &z)))
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct HolomorphicResidual {
    /// Largest component of `∂1(F2 + iF3)`.
    pub residual: Residual,
    /// Largest deviation between `∂̄1(F2 - iF3)` and the conjugate of `∂1(F2 + iF3)`.
    pub conjugate_symmetry: Residual,
}

pub fn holomorphic_residual(hh: &HyperHermitianStructure, points: &[Vec<f64>]) -> Result<HolomorphicResidual> {
    let i1 = hh.structure.i(1);
    let omega = ComplexForm::new(hh.kahler(2).clone(), hh.kahler(3).clone());
    let del = omega.del(i1);
    let delbar = omega.conj().delbar(i1);
    let pairs: Vec<Result<(Residual, Residual)>> = points
        .iter()
        .map(|p| {
            let x = del.eval(p)?;
            let y = delbar.eval(p)?;
            let r = x.iter().fold(0.0, |m: f64, c| m.max(c.norm()));
            let s = x
                .iter()
                .zip(&y)
                .fold(0.0, |m: f64, (a, b)| m.max((a.conj() - b).norm()));
            Ok((Residual::at(r, p), Residual::at(s, p)))
        })
        .collect();
    let mut out = HolomorphicResidual {
        residual: Residual::zero(),
        conjugate_symmetry: Residual::zero(),
    };
    for pair in pairs {
        let (r, s) = pair?;
        out.residual = out.residual.merge(r);
        out.conjugate_symmetry = out.conjugate_symmetry.merge(s);
    }
    Ok(out)
}

fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (1, 2, 3) | (2, 3, 1) | (3, 1, 2) => 1.0,
        (3, 2, 1) | (1, 3, 2) | (2, 1, 3) => -1.0,
        _ => 0.0,
    }
}

/// Residuals of `d_i F_j + 2 δ_ij c + ε_ijk dF_k` with `c` the Bismut torsion
/// of `(g, I1)`. Entry `[i-1][j-1]`.
pub fn difj_check(hh: &HyperHermitianStructure, points: &[Vec<f64>]) -> Result<[[Residual; 3]; 3]> {
    let c = bismut_torsion(hh.metric(), hh.structure.i(1));
    let df = [1, 2, 3].map(|k| hh.kahler(k).d());
    let mut out: [[Residual; 3]; 3] = Default::default();
    for i in 1..=3 {
        for j in 1..=3 {
            let mut expr = hh.structure.d_a(i, hh.kahler(j));
            if i == j {
                expr = expr.combine(&c, 1.0, 2.0);
            }
            for k in 1..=3 {
                let e = levi_civita(i, j, k);
                if e != 0.0 {
                    expr = expr.combine(&df[k - 1], 1.0, e);
                }
            }
            out[i - 1][j - 1] = Residual::over(points, |p| Ok(max_abs(&expr.eval(p)?)))?;
        }
    }
    Ok(out)
}

/// Outcome of reconstructing a metric from a `(0,2)`-form.
#[derive(Clone, Debug)]
pub struct MetricVerdict {
    pub metric: MetricField,
    /// Largest `|g(X,Y) - g(Y,X)|` before symmetrization.
    pub symmetry: Residual,
    /// Smallest eigenvalue over the points and where it occurred.
    pub min_eigenvalue: (f64, Vec<f64>),
    /// Largest `|g(I_a X, I_a Y) - g(X, Y)|`.
    pub hermitian: Residual,
}

impl MetricVerdict {
    pub fn positive_definite(&self) -> bool {
        self.min_eigenvalue.0 > 0.0
    }
}

fn full_matrix(comps: &[f64], n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for (c, v) in IndexSpace::get(n).combos(2).iter().zip(comps) {
        m[(c[0], c[1])] = *v;
        m[(c[1], c[0])] = -*v;
    }
    m
}

/// Given `F2 - iF3` of type `(0,2)` for `I1`, the bilinear form
/// `g(X, Y) = -F2(I2 X, Y)`.
pub fn metric_from_form(h: &HypercomplexStructure, form: &ComplexForm, points: &[Vec<f64>]) -> Result<MetricVerdict> {
    if form.degree() != 2 {
        return Err(HktError::DegreeMismatch {
            expected: 2,
            found: form.degree(),
        });
    }
    let n = h.dim();
    // (F2 - iF3)(X - i I1 X, Y) = 0 for all X, Y.
    let type_check = Residual::over(points, |p| {
        let a = full_matrix(&form.re.eval(p)?, n);
        let b = full_matrix(&form.im.eval(p)?, n);
        let j = h.i(1).eval(p)?;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for col in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for r in 0..n {
                    let x = Complex64::new(if r == i { 1.0 } else { 0.0 }, -j[(r, i)]);
                    acc += x * Complex64::new(a[(r, col)], b[(r, col)]);
                }
                worst = worst.max(acc.norm());
            }
        }
        Ok(worst)
    })?;
    if type_check.value > 1e-8 {
        return Err(HktError::NotType02 {
            residual: type_check.value,
            point: type_check.witness.unwrap_or_default(),
        });
    }
    let space = IndexSpace::get(n);
    let ranks: Vec<Vec<(usize, f64)>> = (0..n)
        .flat_map(|a| (0..n).map(move |b| (a, b)))
        .map(|(a, b)| {
            if a == b {
                vec![]
            } else if a < b {
                vec![(space.rank(&[a, b]), 1.0)]
            } else {
                vec![(space.rank(&[b, a]), -1.0)]
            }
        })
        .collect();
    let f2 = form.re.clone();
    let i2 = h.i(2).clone();
    let raw = move |p: &[HyperDual]| -> Vec<HyperDual> {
        let comps = f2.eval_jet(p);
        let j = i2.eval_jet(p);
        let mut out = vec![HyperDual::ZERO; n * n];
        for x in 0..n {
            for y in 0..n {
                let mut acc = HyperDual::ZERO;
                for r in 0..n {
                    let jr = j[r * n + x];
                    if jr.is_zero() {
                        continue;
                    }
                    for &(rank, s) in &ranks[r * n + y] {
                        acc -= jr * comps[rank] * s;
                    }
                }
                out[x * n + y] = acc;
            }
        }
        out
    };
    let raw = std::sync::Arc::new(raw);
    let raw2 = raw.clone();
    let metric = MetricField::from_full(h.chart(), move |p| raw2(p));
    let symmetry = Residual::over(points, |p| {
        h.chart().check(p)?;
        let m = raw(&crate::jet::lift_point(p));
        let mut worst: f64 = 0.0;
        for x in 0..n {
            for y in 0..n {
                worst = worst.max((m[x * n + y].value() - m[y * n + x].value()).abs());
            }
        }
        Ok(worst)
    })?;
    let min_eigenvalue = minimum_over(points, |p| metric.min_eigenvalue(p))?;
    let hermitian = HyperHermitianStructure::new(h.clone(), metric.clone()).hermitian_residual(points)?;
    Ok(MetricVerdict {
        metric,
        symmetry,
        min_eigenvalue,
        hermitian,
    })
}

/// The same structure with metric `e^φ g`.
pub fn conformal_change(hh: &HyperHermitianStructure, phi: &ScalarField) -> HyperHermitianStructure {
    HyperHermitianStructure::new(hh.structure.clone(), hh.metric.conformal(phi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{quaternionic_labels, CoordinateChart};

    fn flat(n: usize) -> HyperHermitianStructure {
        let chart = CoordinateChart::cube(4 * n, 1.0).unwrap();
        HyperHermitianStructure::flat(&chart).unwrap()
    }

    #[test]
    fn flat_relations_hold() {
        for n in 1..=3 {
            let hh = flat(n);
            let pts = hh.chart().sample(3, 1);
            assert_eq!(verify_quaternion_relations(hh.structure(), &pts).unwrap().value, 0.0);
        }
        let chart = CoordinateChart::cube(12, 1.0).unwrap();
        let h = HypercomplexStructure::chi_rho(&chart).unwrap();
        let pts = chart.sample(2, 1);
        assert_eq!(verify_quaternion_relations(&h, &pts).unwrap().value, 0.0);
        assert!(verify_quaternion_relations(&h.with_flipped_i3(), &pts).unwrap().value >= 2.0);
    }

    #[test]
    fn flat_i1_acts_on_dz_as_minus_i() {
        // I1 dx = dy and I1 dy = -dx, i.e. I1 dz = -i dz.
        let chart = CoordinateChart::new(
            quaternionic_labels(1),
            crate::chart::Domain::Box {
                lower: vec![-1.0; 4],
                upper: vec![1.0; 4],
            },
        )
        .unwrap();
        let h = HypercomplexStructure::flat(&chart).unwrap();
        let dx = Form::coordinate_wedge(&chart, &[0]);
        let dy = Form::coordinate_wedge(&chart, &[1]);
        let p = [0.1; 4];
        assert_eq!(h.apply(1, &dx).eval(&p).unwrap(), dy.eval(&p).unwrap());
        assert_eq!(h.apply(1, &dy).eval(&p).unwrap(), dx.scale(-1.0).eval(&p).unwrap());
        // I2 dz = d w̄: I2 dx = du, I2 dy = -dv.
        let du = Form::coordinate_wedge(&chart, &[2]);
        let dv = Form::coordinate_wedge(&chart, &[3]);
        assert_eq!(h.apply(2, &dx).eval(&p).unwrap(), du.eval(&p).unwrap());
        assert_eq!(h.apply(2, &dy).eval(&p).unwrap(), dv.scale(-1.0).eval(&p).unwrap());
    }

    #[test]
    fn non_unit_direction_rejected() {
        let hh = flat(1);
        assert_eq!(
            complex_structure_at(hh.structure(), [1.0, 1.0, 0.0]).err(),
            Some(HktError::NotUnit([1.0, 1.0, 0.0]))
        );
        let j = complex_structure_at(hh.structure(), [0.6, 0.8, 0.0]).unwrap();
        assert!(j.square_residual(&[0.0; 4]).unwrap() < 1e-12);
    }

    #[test]
    fn flat_is_hyperkahler() {
        let hh = flat(2);
        let pts = hh.chart().sample(3, 5);
        assert_eq!(hkt_residual(&hh, &pts).unwrap().value, 0.0);
        assert_eq!(holomorphic_residual(&hh, &pts).unwrap().residual.value, 0.0);
        for row in difj_check(&hh, &pts).unwrap() {
            for r in row {
                assert_eq!(r.value, 0.0);
            }
        }
    }

    #[test]
    fn flat_metric_round_trip() {
        let hh = flat(1);
        let pts = hh.chart().sample(3, 2);
        let form = ComplexForm::new(hh.kahler(2).clone(), hh.kahler(3).scale(-1.0));
        let v = metric_from_form(hh.structure(), &form, &pts).unwrap();
        assert!(v.positive_definite());
        for p in &pts {
            assert!((v.metric.eval(p).unwrap() - DMatrix::<f64>::identity(4, 4)).amax() < 1e-15);
        }
        let wrong = ComplexForm::new(hh.kahler(2).clone(), hh.kahler(3).clone());
        assert!(matches!(
            metric_from_form(hh.structure(), &wrong, &pts),
            Err(HktError::NotType02 { .. })
        ));
    }
}
