//! HKT potentials: Kähler forms generated by a function, the modification of
//! a hyper-Kähler metric by a one-variable function, and the Hopf family.

use crate::chart::{
    form_inner_product_2, gradient_norm_sq, Chart, ComplexForm, CoordinateChart, Form, MetricField, ScalarField,
};
use crate::error::{HktError, Result};
use crate::jet::HyperDual;
use crate::quaternionic::{HyperHermitianStructure, HypercomplexStructure};
use crate::residual::{max_abs, max_abs_diff, Residual};
use nalgebra::DMatrix;
use std::fmt;
use std::sync::Arc;

type UnaryFn = Arc<dyn Fn(HyperDual) -> HyperDual + Send + Sync>;

/// One-variable function `f` with closed-form `f'` and `f''`.
#[derive(Clone)]
pub struct GeneratorFunction {
    name: String,
    f: UnaryFn,
    f1: UnaryFn,
    f2: UnaryFn,
}

impl fmt::Debug for GeneratorFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GeneratorFunction({})", self.name)
    }
}

impl GeneratorFunction {
    pub fn identity() -> Self {
        Self::raw("identity", |t| t, |_| HyperDual::constant(1.0), |_| HyperDual::ZERO)
    }

    /// `t^m`.
    pub fn power(m: i32) -> Self {
        let m1 = m as f64;
        Self::raw(
            &format!("power-{m}"),
            move |t| t.powi(m),
            move |t| t.powi(m - 1) * m1,
            move |t| {
                if m == 1 {
                    HyperDual::ZERO
                } else {
                    t.powi(m - 2) * (m1 * (m1 - 1.0))
                }
            },
        )
    }

    pub fn log() -> Self {
        Self::raw("log", |t| t.ln(), |t| t.recip(), |t| -(t * t).recip())
    }

    pub fn exp() -> Self {
        Self::raw("exp", |t| t.exp(), |t| t.exp(), |t| t.exp())
    }

    /// User-supplied function with explicit derivatives, validated against
    /// forward-mode derivatives of `f` at the given sample values.
    pub fn custom<F, F1, F2>(name: &str, f: F, f1: F1, f2: F2, samples: &[f64]) -> Result<Self>
    where
        F: Fn(HyperDual) -> HyperDual + Send + Sync + 'static,
        F1: Fn(HyperDual) -> HyperDual + Send + Sync + 'static,
        F2: Fn(HyperDual) -> HyperDual + Send + Sync + 'static,
    {
        let g = Self::raw(name, f, f1, f2);
        g.validate(samples)?;
        Ok(g)
    }

    fn raw<F, F1, F2>(name: &str, f: F, f1: F1, f2: F2) -> Self
    where
        F: Fn(HyperDual) -> HyperDual + Send + Sync + 'static,
        F1: Fn(HyperDual) -> HyperDual + Send + Sync + 'static,
        F2: Fn(HyperDual) -> HyperDual + Send + Sync + 'static,
    {
        GeneratorFunction {
            name: name.to_string(),
            f: Arc::new(f),
            f1: Arc::new(f1),
            f2: Arc::new(f2),
        }
    }

    /// Built-in generator by name: `identity`, `log`, `exp` or `power-<m>`.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "identity" => Ok(Self::identity()),
            "log" | "ln" => Ok(Self::log()),
            "exp" => Ok(Self::exp()),
            other => match other.strip_prefix("power-").map(str::parse::<i32>) {
                Some(Ok(m)) if m >= 1 => Ok(Self::power(m)),
                _ => Err(HktError::Generator {
                    name: other.to_string(),
                    what: "unknown generator".into(),
                }),
            },
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn f(&self, t: HyperDual) -> HyperDual {
        (self.f)(t)
    }

    pub fn f1(&self, t: HyperDual) -> HyperDual {
        (self.f1)(t)
    }

    pub fn f2(&self, t: HyperDual) -> HyperDual {
        (self.f2)(t)
    }

    /// Relative agreement of `f'` and `f''` with forward-mode derivatives.
    pub fn validate(&self, samples: &[f64]) -> Result<()> {
        for &t in samples {
            let x = HyperDual::constant(t).perturbed(0, 1.0).perturbed(1, 1.0);
            let fx = self.f(x);
            let pairs = [
                ("f'", fx.coefficient(1), self.f1(HyperDual::constant(t)).value()),
                ("f''", fx.coefficient(3), self.f2(HyperDual::constant(t)).value()),
            ];
            for (what, ad, closed) in pairs {
                let err = (ad - closed).abs() / ad.abs().max(1.0);
                if !(err <= 1e-10) {
                    return Err(HktError::Generator {
                        name: self.name.clone(),
                        what: format!("{what} at {t} is {closed}, differentiation gives {ad}"),
                    });
                }
            }
        }
        Ok(())
    }
}

/// `(a, b, c)` cyclic with `a` first.
fn cyclic(a: usize) -> (usize, usize, usize) {
    match a {
        1 => (1, 2, 3),
        2 => (2, 3, 1),
        3 => (3, 1, 2),
        _ => panic!("structure index {a} out of range"),
    }
}

/// `d_a μ = I_a dμ`.
pub fn twisted_derivative(h: &HypercomplexStructure, a: usize, mu: &ScalarField) -> Form {
    h.d_a(a, &Form::from_scalar(mu))
}

/// `F_a = 1/2 (d d_a + d_b d_c) μ` for `(a, b, c)` cyclic.
pub fn kahler_forms_from_potential(h: &HypercomplexStructure, mu: &ScalarField) -> [Form; 3] {
    let m = Form::from_scalar(mu);
    [1, 2, 3].map(|a| {
        let (_, b, c) = cyclic(a);
        let first = h.d_a(a, &m).d();
        let second = h.d_a(b, &h.d_a(c, &m));
        first.combine(&second, 0.5, 0.5)
    })
}

/// Difference between `1/2 (d d_a + d_b d_c) μ` for the rotated triple
/// `(a, b, c)` (rows of `rotation`) and `sum_i a_i F_i`.
pub fn rotated_axis_residual(
    h: &HypercomplexStructure,
    mu: &ScalarField,
    rotation: [[f64; 3]; 3],
    points: &[Vec<f64>],
) -> Result<Residual> {
    let axes: Vec<_> = rotation
        .iter()
        .map(|r| crate::quaternionic::complex_structure_at(h, *r))
        .collect::<Result<_>>()?;
    let m = Form::from_scalar(mu);
    let direct = m.d_c(&axes[0]).d().combine(&m.d_c(&axes[2]).d_c(&axes[1]), 0.5, 0.5);
    let forms = kahler_forms_from_potential(h, mu);
    let combined = forms[0]
        .scale(rotation[0][0])
        .add(&forms[1].scale(rotation[0][1]))
        .add(&forms[2].scale(rotation[0][2]));
    Residual::over(points, |p| Ok(max_abs_diff(&direct.eval(p)?, &combined.eval(p)?)))
}

/// `2 ∂1 I2 ∂̄1 μ` as a complex 2-form.
pub fn potential_form(h: &HypercomplexStructure, mu: &ScalarField) -> ComplexForm {
    let i1 = h.i(1);
    let delbar = ComplexForm::real(&Form::from_scalar(mu)).delbar(i1);
    delbar
        .apply_j(h.i(2))
        .del(i1)
        .scale(num::complex::Complex64::new(2.0, 0.0))
}

/// Largest component of `F2 + iF3 - 2 ∂1 I2 ∂̄1 μ`, with `F_a` the Kähler
/// forms of `g`.
pub fn potential_residual(
    h: &HypercomplexStructure,
    mu: &ScalarField,
    g: &MetricField,
    points: &[Vec<f64>],
) -> Result<Residual> {
    let hh = HyperHermitianStructure::new(h.clone(), g.clone());
    let target = ComplexForm::new(hh.kahler(2).clone(), hh.kahler(3).clone());
    let diff = target.sub(&potential_form(h, mu));
    Residual::over(points, |p| diff.max_abs(p))
}

/// `1/2 d1 d2 d3 μ`.
pub fn torsion_from_potential(h: &HypercomplexStructure, mu: &ScalarField) -> Form {
    let m = Form::from_scalar(mu);
    h.d_a(1, &h.d_a(2, &h.d_a(3, &m))).scale(0.5)
}

#[derive(Clone, Debug, PartialEq)]
pub struct HyperKahlerResidual {
    /// Worst of `|d d_a μ - d_b d_c μ|` over cyclic `(a, b, c)`.
    pub cyclic: Residual,
    /// `|d d_2 μ - d_3 d_2 μ|`, the variant with repeated index.
    pub printed_variant: Residual,
}

pub fn hyperkahler_residual(
    h: &HypercomplexStructure,
    mu: &ScalarField,
    points: &[Vec<f64>],
) -> Result<HyperKahlerResidual> {
    let m = Form::from_scalar(mu);
    let diffs: Vec<Form> = [1, 2, 3]
        .iter()
        .map(|&a| {
            let (_, b, c) = cyclic(a);
            h.d_a(a, &m).d().sub(&h.d_a(b, &h.d_a(c, &m)))
        })
        .collect();
    let printed = h.d_a(2, &m).d().sub(&h.d_a(3, &h.d_a(2, &m)));
    let cyclic = Residual::over(points, |p| {
        let mut worst: f64 = 0.0;
        for d in &diffs {
            worst = worst.max(max_abs(&d.eval(p)?));
        }
        Ok(worst)
    })?;
    let printed_variant = Residual::over(points, |p| Ok(max_abs(&printed.eval(p)?)))?;
    Ok(HyperKahlerResidual {
        cyclic,
        printed_variant,
    })
}

/// A hyper-Kähler structure with a potential for its metric.
#[derive(Clone, Debug)]
pub struct PotentialStructure {
    hh: HyperHermitianStructure,
    mu: ScalarField,
}

impl PotentialStructure {
    pub fn new(hh: HyperHermitianStructure, mu: ScalarField) -> Self {
        PotentialStructure { hh, mu }
    }

    /// Flat `H^n` with `μ = (|z|^2 + |w|^2) / 2`.
    pub fn flat(chart: &Chart) -> Result<Self> {
        let hh = HyperHermitianStructure::flat(chart)?;
        Ok(Self::new(hh, flat_potential(chart)))
    }

    pub fn structure(&self) -> &HypercomplexStructure {
        self.hh.structure()
    }

    pub fn metric(&self) -> &MetricField {
        self.hh.metric()
    }

    pub fn potential(&self) -> &ScalarField {
        &self.mu
    }

    pub fn chart(&self) -> &Chart {
        self.hh.chart()
    }

    pub fn hyper_hermitian(&self) -> &HyperHermitianStructure {
        &self.hh
    }

    /// `f'(μ) + f''(μ) |∇μ|^2 / 4`.
    pub fn positivity_margin(&self, f: &GeneratorFunction, point: &[f64]) -> Result<f64> {
        let mu = HyperDual::constant(self.mu.eval(point)?);
        let grad = gradient_norm_sq(self.metric(), &self.mu, point)?;
        Ok(f.f1(mu).value() + 0.25 * f.f2(mu).value() * grad)
    }

    /// The candidates where the positivity margin is strictly positive, and
    /// the number excluded.
    pub fn admissible_points(&self, f: &GeneratorFunction, candidates: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, usize)> {
        let mut kept = Vec::new();
        for p in candidates {
            if self.positivity_margin(f, p)? > 0.0 {
                kept.push(p.clone());
            }
        }
        let excluded = candidates.len() - kept.len();
        if kept.is_empty() {
            return Err(HktError::NoAdmissiblePoints(candidates.len()));
        }
        Ok((kept, excluded))
    }

    /// `S = dμ⊗dμ + sum_a I_a dμ ⊗ I_a dμ` as a full row-major jet matrix.
    fn gradient_square(&self, p: &[HyperDual]) -> Vec<HyperDual> {
        let n = p.len();
        let grad = self.mu.gradient_jet(p);
        let mut covectors = vec![grad.clone()];
        for a in 1..=3 {
            let m = self.structure().i(a).eval_jet(p);
            covectors.push(
                (0..n)
                    .map(|i| -(0..n).map(|r| grad[r] * m[r * n + i]).sum::<HyperDual>())
                    .collect(),
            );
        }
        let mut out = vec![HyperDual::ZERO; n * n];
        for c in &covectors {
            for i in 0..n {
                if c[i].is_zero() {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += c[i] * c[j];
                }
            }
        }
        out
    }

    /// `ĝ = f'(μ) g + f''(μ) S / 4`.
    pub fn modified_metric(&self, f: &GeneratorFunction) -> MetricField {
        let this = self.clone();
        let f = f.clone();
        MetricField::from_full(self.chart(), move |p| {
            let mu = this.mu.eval_jet(p);
            let (a, b) = (f.f1(mu), f.f2(mu) * 0.25);
            let g = this.metric().eval_jet(p);
            let s = this.gradient_square(p);
            g.into_iter().zip(s).map(|(x, y)| x * a + y * b).collect()
        })
    }

    /// The structure `(I, ĝ)` together with its potential `f(μ)`.
    pub fn modify(&self, f: &GeneratorFunction) -> ModifiedStructure {
        let metric = self.modified_metric(f);
        let g = f.clone();
        let potential = self.mu.map(move |t| g.f(t));
        ModifiedStructure {
            hh: HyperHermitianStructure::new(self.structure().clone(), metric),
            potential,
            generator: f.clone(),
        }
    }

    /// `m μ^{m-2} (μ g + (m-1)/4 S)`.
    pub fn power_metric_closed_form(&self, m: i32) -> MetricField {
        let this = self.clone();
        let mf = m as f64;
        MetricField::from_full(self.chart(), move |p| {
            let mu = this.mu.eval_jet(p);
            let pre = mu.powi(m - 2) * mf;
            let g = this.metric().eval_jet(p);
            let s = this.gradient_square(p);
            g.into_iter()
                .zip(s)
                .map(|(x, y)| pre * (mu * x + y * ((mf - 1.0) / 4.0)))
                .collect()
        })
    }

    /// `e^μ (g + S / 4)`.
    pub fn exp_metric_closed_form(&self) -> MetricField {
        let this = self.clone();
        MetricField::from_full(self.chart(), move |p| {
            let e = this.mu.eval_jet(p).exp();
            let g = this.metric().eval_jet(p);
            let s = this.gradient_square(p);
            g.into_iter().zip(s).map(|(x, y)| e * (x + y * 0.25)).collect()
        })
    }
}

/// `μ = (|z|^2 + |w|^2) / 2` in real coordinates.
pub fn flat_potential(chart: &Chart) -> ScalarField {
    ScalarField::new(chart, |p| p.iter().map(|x| *x * *x).sum::<HyperDual>() * 0.5)
}

/// Result of the modification: the new hyper-Hermitian structure and its
/// potential `f(μ)`.
#[derive(Clone, Debug)]
pub struct ModifiedStructure {
    pub hh: HyperHermitianStructure,
    pub potential: ScalarField,
    pub generator: GeneratorFunction,
}

/// `△^c f = g(d d1 f, F1)` at a point.
pub fn complex_laplacian(hh: &HyperHermitianStructure, f: &ScalarField, point: &[f64]) -> Result<f64> {
    let ddf = hh.structure().d_a(1, &Form::from_scalar(f)).d();
    form_inner_product_2(hh.metric(), &ddf, hh.kahler(1), point)
}

/// `g(d2 d3 f, F1)` at a point, which equals the complex Laplacian on HKT
/// examples.
pub fn complex_laplacian_twisted(hh: &HyperHermitianStructure, f: &ScalarField, point: &[f64]) -> Result<f64> {
    let h = hh.structure();
    let form = h.d_a(2, &h.d_a(3, &Form::from_scalar(f)));
    form_inner_product_2(hh.metric(), &form, hh.kahler(1), point)
}

/// Real, `i`, `j` and `k` parts of `(d + i d1 + j d2 + k d3)(dμ - i d1μ - j d2μ - k d3μ)`,
/// with the quaternion units multiplied on the left.
pub fn quaternionic_dd(h: &HypercomplexStructure, mu: &ScalarField) -> [Form; 4] {
    let m = Form::from_scalar(mu);
    let op = |a: usize, f: &Form| if a == 0 { f.d() } else { h.d_a(a, f) };
    // β_0 = dμ, β_b = -d_b μ.
    let beta: Vec<Form> = (0..4)
        .map(|b| if b == 0 { m.d() } else { op(b, &m).scale(-1.0) })
        .collect();
    let mut parts: Vec<Option<Form>> = vec![None, None, None, None];
    for a in 0..4 {
        for (b, beta_b) in beta.iter().enumerate() {
            let (sign, unit) = quaternion_product(a, b);
            let term = op(a, beta_b).scale(sign);
            parts[unit] = Some(match parts[unit].take() {
                None => term,
                Some(acc) => acc.add(&term),
            });
        }
    }
    let [p0, p1, p2, p3]: [Option<Form>; 4] = parts.try_into().expect("four parts");
    [p0, p1, p2, p3].map(|p| p.expect("every unit is reached"))
}

/// `e_a e_b = sign * e_unit` for the units `1, i, j, k`.
pub fn quaternion_product(a: usize, b: usize) -> (f64, usize) {
    match (a, b) {
        (0, b) => (1.0, b),
        (a, 0) => (1.0, a),
        (a, b) if a == b => (-1.0, 0),
        (1, 2) => (1.0, 3),
        (2, 1) => (-1.0, 3),
        (2, 3) => (1.0, 1),
        (3, 2) => (-1.0, 1),
        (3, 1) => (1.0, 2),
        (1, 3) => (-1.0, 2),
        _ => unreachable!(),
    }
}

/// Annulus chart `inner <= |q| <= outer` in `H^n`.
pub fn hopf_chart(n: usize, inner: f64, outer: f64) -> Result<Chart> {
    CoordinateChart::annulus(crate::chart::quaternionic_labels(n), inner, outer)
}

/// The linear map `(z_α, w_α) -> (r e^{iθ_α} z_α, r e^{-iθ_α} w_α)`.
pub fn hopf_action(r: f64, thetas: &[f64]) -> DMatrix<f64> {
    let n = thetas.len();
    let mut m = DMatrix::zeros(4 * n, 4 * n);
    for (a, &t) in thetas.iter().enumerate() {
        let (c, s) = (t.cos(), t.sin());
        let (x, y, u, v) = (4 * a, 4 * a + 1, 4 * a + 2, 4 * a + 3);
        m[(x, x)] = r * c;
        m[(x, y)] = -r * s;
        m[(y, x)] = r * s;
        m[(y, y)] = r * c;
        m[(u, u)] = r * c;
        m[(u, v)] = r * s;
        m[(v, u)] = -r * s;
        m[(v, v)] = r * c;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(n: usize) -> PotentialStructure {
        PotentialStructure::flat(&hopf_chart(n, 0.2, 5.0).unwrap()).unwrap()
    }

    #[test]
    fn builtin_generators_validate() {
        let samples = [0.3, 1.0, 2.5];
        for g in [
            GeneratorFunction::identity(),
            GeneratorFunction::power(2),
            GeneratorFunction::power(3),
            GeneratorFunction::log(),
            GeneratorFunction::exp(),
        ] {
            g.validate(&samples).unwrap();
        }
        let bad = GeneratorFunction::custom("bad", |t| t * t, |t| t * 3.0, |_| HyperDual::constant(2.0), &samples);
        assert!(matches!(bad, Err(HktError::Generator { .. })));
        assert!(GeneratorFunction::by_name("power-0").is_err());
        assert_eq!(GeneratorFunction::by_name("power-3").unwrap().name(), "power-3");
    }

    #[test]
    fn flat_potential_generates_euclidean_forms() {
        let ps = flat(1);
        let pts = ps.chart().sample(5, 3);
        let forms = kahler_forms_from_potential(ps.structure(), ps.potential());
        for (a, f) in forms.iter().enumerate() {
            let k = ps.hyper_hermitian().kahler(a + 1);
            for p in &pts {
                assert!(max_abs_diff(&f.eval(p).unwrap(), &k.eval(p).unwrap()) < 1e-12);
            }
        }
    }

    #[test]
    fn identity_generator_keeps_metric() {
        let ps = flat(1);
        let g = ps.modified_metric(&GeneratorFunction::identity());
        for p in ps.chart().sample(3, 1) {
            assert_eq!(g.eval(&p).unwrap(), DMatrix::identity(4, 4));
        }
    }

    #[test]
    fn quaternion_units() {
        assert_eq!(quaternion_product(1, 2), (1.0, 3));
        assert_eq!(quaternion_product(3, 3), (-1.0, 0));
        assert_eq!(quaternion_product(3, 1), (1.0, 2));
    }

    #[test]
    fn hopf_action_is_conformal() {
        let m = hopf_action(0.5, &[1.0, 2.0]);
        let g = m.transpose() * &m;
        assert!((g - DMatrix::identity(8, 8) * 0.25).amax() < 1e-15);
    }

    #[test]
    fn constant_potential_gives_zero_forms() {
        let chart = hopf_chart(1, 0.2, 5.0).unwrap();
        let h = HypercomplexStructure::flat(&chart).unwrap();
        let mu = ScalarField::constant(&chart, 3.0);
        let p = vec![0.3, 0.4, -0.5, 0.6];
        for f in kahler_forms_from_potential(&h, &mu) {
            assert_eq!(max_abs(&f.eval(&p).unwrap()), 0.0);
        }
        for part in quaternionic_dd(&h, &mu) {
            assert_eq!(max_abs(&part.eval(&p).unwrap()), 0.0);
        }
        let hk = hyperkahler_residual(&h, &mu, &[p.clone()]).unwrap();
        assert_eq!(hk.cyclic.value, 0.0);
    }

    #[test]
    fn squared_potential_is_not_euclidean_potential() {
        let ps = flat(1);
        let sq = ps.potential().map(|t| t * t);
        let r = potential_residual(ps.structure(), &sq, ps.metric(), &ps.chart().sample(10, 2)).unwrap();
        assert!(r.value > 1e-3);
    }

    #[test]
    fn flat_gradient_norm_is_twice_potential() {
        let ps = flat(2);
        for p in ps.chart().sample(10, 4) {
            let g = gradient_norm_sq(ps.metric(), ps.potential(), &p).unwrap();
            assert!((g - 2.0 * ps.potential().eval(&p).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn log_margin_is_inverse_double_potential() {
        let ps = flat(2);
        let f = GeneratorFunction::log();
        for p in ps.chart().sample(20, 5) {
            let mu = ps.potential().eval(&p).unwrap();
            assert!((ps.positivity_margin(&f, &p).unwrap() - 0.5 / mu).abs() < 1e-10);
        }
    }

    #[test]
    fn inadmissible_points_are_counted() {
        let ps = flat(1);
        let f = GeneratorFunction::custom(
            "concave",
            |t| t - t * t,
            |t| -(t * 2.0) + 1.0,
            |_| HyperDual::constant(-2.0),
            &[0.5, 2.0],
        )
        .unwrap();
        // margin 1 - 3μ, so the small sphere survives and the large one does not
        let pts = vec![vec![0.3, 0.0, 0.0, 0.0], vec![2.0, 0.0, 0.0, 0.0]];
        let (kept, excluded) = ps.admissible_points(&f, &pts).unwrap();
        assert_eq!((kept.len(), excluded), (1, 1));
        let err = ps.admissible_points(&f, &pts[1..]).unwrap_err();
        assert!(matches!(err, HktError::NoAdmissiblePoints(1)));
    }

    #[test]
    fn frontier_direction_tracks_margin() {
        let ps = flat(1);
        let f = GeneratorFunction::custom(
            "concave",
            |t| t - t * t,
            |t| -(t * 2.0) + 1.0,
            |_| HyperDual::constant(-2.0),
            &[1.0],
        )
        .unwrap();
        let g = ps.modified_metric(&f);
        for p in ps.chart().sample(20, 8) {
            let grad: Vec<f64> = p.clone();
            let m = g.eval(&p).unwrap();
            let v = nalgebra::DVector::from_vec(grad);
            let along = (v.transpose() * &m * &v)[(0, 0)];
            let norm = v.norm_squared();
            let margin = ps.positivity_margin(&f, &p).unwrap();
            assert!((along - norm * margin).abs() < 1e-9 * (1.0 + along.abs()));
            if margin < 0.0 {
                assert!(g.min_eigenvalue(&p).unwrap() <= 0.0);
            }
        }
    }

    #[test]
    fn laplacian_of_complex_norm_matches_trace() {
        let chart = hopf_chart(1, 0.2, 5.0).unwrap();
        let hh = HyperHermitianStructure::flat(&chart).unwrap();
        let f = ScalarField::new(&chart, |p| p[0] * p[0] + p[1] * p[1]);
        // d1 f = 2x dy - 2y dx; components of d d1 f by central differences
        let d1f = |q: &[f64], i: usize| match i {
            0 => -2.0 * q[1],
            1 => 2.0 * q[0],
            _ => 0.0,
        };
        let p = vec![0.7, -0.4, 0.2, 1.1];
        let h = 1e-5;
        let mut dd = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                let mut plus = p.clone();
                let mut minus = p.clone();
                plus[i] += h;
                minus[i] -= h;
                let di_j = (d1f(&plus, j) - d1f(&minus, j)) / (2.0 * h);
                let mut plus = p.clone();
                let mut minus = p.clone();
                plus[j] += h;
                minus[j] -= h;
                let dj_i = (d1f(&plus, i) - d1f(&minus, i)) / (2.0 * h);
                dd[i][j] = 0.5 * (di_j - dj_i);
            }
        }
        let mut kahler = [[0.0; 4]; 4];
        kahler[0][1] = 1.0;
        kahler[1][0] = -1.0;
        kahler[2][3] = 1.0;
        kahler[3][2] = -1.0;
        let trace: f64 = (0..4)
            .flat_map(|i| (0..4).map(move |j| (i, j)))
            .map(|(i, j)| dd[i][j] * kahler[i][j])
            .sum::<f64>()
            * 0.25;
        let lap = complex_laplacian(&hh, &f, &p).unwrap();
        assert!(lap > 0.0);
        assert!((lap - trace).abs() < 1e-8);
        assert_eq!(
            complex_laplacian(&hh, &ScalarField::constant(&chart, 2.0), &p).unwrap(),
            0.0
        );
    }

    #[test]
    fn hopf_laplacian_chain() {
        let ps = flat(2);
        let m = ps.modify(&GeneratorFunction::log());
        for p in ps.chart().sample(5, 9) {
            let lap = complex_laplacian(&m.hh, &m.potential, &p).unwrap();
            let twisted = complex_laplacian_twisted(&m.hh, &m.potential, &p).unwrap();
            let norm = form_inner_product_2(m.hh.metric(), m.hh.kahler(1), m.hh.kahler(1), &p).unwrap();
            assert!(lap > 0.0);
            assert!((lap - twisted).abs() < 1e-8);
            assert!((2.0 * norm - 2.0 * lap).abs() < 1e-7);
        }
    }

    #[test]
    fn quaternionic_operator_on_flat_potential() {
        let ps = flat(1);
        let parts = quaternionic_dd(ps.structure(), ps.potential());
        let forms = kahler_forms_from_potential(ps.structure(), ps.potential());
        for p in ps.chart().sample(5, 10) {
            assert_eq!(max_abs(&parts[0].eval(&p).unwrap()), 0.0);
            for a in 0..3 {
                let lhs = parts[a + 1].eval(&p).unwrap();
                let rhs: Vec<f64> = forms[a].eval(&p).unwrap().iter().map(|x| -4.0 * x).collect();
                assert!(max_abs_diff(&lhs, &rhs) < 1e-8);
            }
        }
    }

    #[test]
    fn quartic_potential_is_hkt() {
        let ps = flat(2);
        let f = GeneratorFunction::custom(
            "quartic",
            |t| t + t * t * 0.25,
            |t| t * 0.5 + 1.0,
            |_| HyperDual::constant(0.5),
            &[0.5, 1.5],
        )
        .unwrap();
        let m = ps.modify(&f);
        let r = crate::quaternionic::hkt_residual(&m.hh, &ps.chart().sample(5, 11)).unwrap();
        assert!(r.value < 1e-8);
    }

    #[test]
    fn rotated_axes_generate_combined_form() {
        let ps = flat(1);
        let (c, s) = (0.6f64, 0.8f64);
        let rot = [[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]];
        let r = rotated_axis_residual(
            ps.structure(),
            &ps.potential().map(|t| t.ln()),
            rot,
            &ps.chart().sample(5, 12),
        )
        .unwrap();
        assert!(r.value < 1e-8);
    }
}
