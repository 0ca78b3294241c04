//! U(1) hypercomplex reduction of `C^3 x C^3` checked pointwise: moment map,
//! Killing action, level-set sampling and the horizontal distribution.

use crate::chart::{nijenhuis, Chart, ComplexForm, CoordinateChart, Form, MetricField, ScalarField};
use crate::error::{HktError, Result};
use crate::jet::HyperDual;
use crate::potential::{GeneratorFunction, ModifiedStructure, PotentialStructure};
use crate::quaternionic::{hkt_residual, verify_quaternion_relations, HyperHermitianStructure, HypercomplexStructure};
use crate::residual::{max_abs, minimum_over, Residual};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Complex dimension of each factor.
pub const FACTOR_DIM: usize = 3;
/// Real dimension of `C^3 x C^3`.
pub const DIM: usize = 4 * FACTOR_DIM;
/// `dim M - 4 dim u(1)`.
pub const HORIZONTAL_DIM: usize = DIM - 4;

const KERNEL_THRESHOLD: f64 = 1e-8;
const MAX_REDRAWS: usize = 64;

/// Linearity of the Hermitian product `<χ, ϱ>` entering `ν2 + iν3`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HermitianConvention {
    /// `<χ, ϱ> = sum χ_s conj(ϱ_s)`.
    #[default]
    ConjugateSecond,
    /// `<χ, ϱ> = sum conj(χ_s) ϱ_s`.
    ConjugateFirst,
}

impl HermitianConvention {
    pub fn name(self) -> &'static str {
        match self {
            HermitianConvention::ConjugateSecond => "conjugate-second",
            HermitianConvention::ConjugateFirst => "conjugate-first",
        }
    }
}

/// Coordinates `Re χ_s, Im χ_s` followed by `Re ϱ_s, Im ϱ_s`.
pub fn chi_rho_labels(k: usize) -> Vec<String> {
    let mut out = Vec::with_capacity(4 * k);
    for name in ["chi", "rho"] {
        for s in 1..=k {
            out.push(format!("{name}{s}_re"));
            out.push(format!("{name}{s}_im"));
        }
    }
    out
}

fn chi(s: usize) -> (usize, usize) {
    (2 * s, 2 * s + 1)
}

fn rho(s: usize) -> (usize, usize) {
    (2 * FACTOR_DIM + 2 * s, 2 * FACTOR_DIM + 2 * s + 1)
}

/// The annulus `inner <= |(χ, ϱ)| <= outer` in `C^3 x C^3`.
pub fn flat6_chart(inner: f64, outer: f64) -> Result<Chart> {
    CoordinateChart::annulus(chi_rho_labels(FACTOR_DIM), inner, outer)
}

/// The flat hyper-Kähler structure on `C^3 x C^3` with
/// `I1(χ, ϱ) = (iχ, -iϱ)`, `I2(χ, ϱ) = (iϱ, iχ)`, `I3(χ, ϱ) = (-ϱ, χ)`,
/// and its modification by `f = ln`.
#[derive(Clone, Debug)]
pub struct Flat6 {
    base: PotentialStructure,
    modified: ModifiedStructure,
}

pub fn flat6_structure(inner: f64, outer: f64) -> Result<Flat6> {
    let chart = flat6_chart(inner, outer)?;
    let h = HypercomplexStructure::chi_rho(&chart)?;
    let hh = HyperHermitianStructure::new(h, MetricField::euclidean(&chart));
    let base = PotentialStructure::new(hh, crate::potential::flat_potential(&chart));
    let modified = base.modify(&GeneratorFunction::log());
    Ok(Flat6 { base, modified })
}

impl Flat6 {
    pub fn chart(&self) -> &Chart {
        self.base.chart()
    }

    pub fn structure(&self) -> &HypercomplexStructure {
        self.base.structure()
    }

    /// `(I, g)` with `g` Euclidean.
    pub fn flat(&self) -> &HyperHermitianStructure {
        self.base.hyper_hermitian()
    }

    /// `(I, ĝ)` with `ĝ = g / μ - S / μ^2`.
    pub fn hyper_hermitian(&self) -> &HyperHermitianStructure {
        &self.modified.hh
    }

    /// `μ = (|χ|^2 + |ϱ|^2) / 2`.
    pub fn potential(&self) -> &ScalarField {
        self.base.potential()
    }

    /// Quaternion relations, Nijenhuis tensors and the HKT identity of `ĝ`.
    pub fn verify(&self, points: &[Vec<f64>]) -> Result<Flat6Verdict> {
        let hh = self.hyper_hermitian();
        let quaternion = verify_quaternion_relations(self.structure(), points)?;
        let nij = Residual::over(points, |p| {
            let mut worst: f64 = 0.0;
            for a in 1..=3 {
                worst = worst.max(nijenhuis(self.structure().i(a), p)?.max_abs());
            }
            Ok(worst)
        })?;
        let hermitian = hh.hermitian_residual(points)?;
        let hkt = hkt_residual(hh, points)?;
        Ok(Flat6Verdict {
            quaternion,
            nijenhuis: nij,
            hermitian,
            hkt,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Flat6Verdict {
    pub quaternion: Residual,
    pub nijenhuis: Residual,
    pub hermitian: Residual,
    pub hkt: Residual,
}

/// Holomorphic coordinates of `I_a` as `(re, im)` pairs: `(χ, conj ϱ)`,
/// `(χ + ϱ, conj χ - conj ϱ)` and `(ϱ - iχ, conj ϱ - i conj χ)`.
pub fn holomorphic_coordinates(chart: &Chart, a: usize) -> Vec<(ScalarField, ScalarField)> {
    let mut out = Vec::new();
    for s in 0..FACTOR_DIM {
        let (cr, ci) = chi(s);
        let (rr, ri) = rho(s);
        let field = |f: fn(&[HyperDual], [usize; 4]) -> HyperDual| {
            let idx = [cr, ci, rr, ri];
            ScalarField::new(chart, move |p| f(p, idx))
        };
        let pairs = match a {
            1 => [
                (field(|p, [c, _, _, _]| p[c]), field(|p, [_, c, _, _]| p[c])),
                (field(|p, [_, _, r, _]| p[r]), field(|p, [_, _, _, r]| -p[r])),
            ],
            2 => [
                (
                    field(|p, [c, _, r, _]| p[c] + p[r]),
                    field(|p, [_, c, _, r]| p[c] + p[r]),
                ),
                (
                    field(|p, [c, _, r, _]| p[c] - p[r]),
                    field(|p, [_, c, _, r]| p[r] - p[c]),
                ),
            ],
            3 => [
                // ϱ - iχ
                (
                    field(|p, [_, ci, rr, _]| p[rr] + p[ci]),
                    field(|p, [cr, _, _, ri]| p[ri] - p[cr]),
                ),
                // conj ϱ - i conj χ
                (
                    field(|p, [_, ci, rr, _]| p[rr] - p[ci]),
                    field(|p, [cr, _, _, ri]| -p[ri] - p[cr]),
                ),
            ],
            _ => panic!("structure index {a} out of range"),
        };
        out.extend(pairs);
    }
    out
}

/// Largest component of `∂̄_a f` over the given complex functions.
pub fn holomorphic_coordinate_residual(
    h: &HypercomplexStructure,
    a: usize,
    coordinates: &[(ScalarField, ScalarField)],
    points: &[Vec<f64>],
) -> Result<Residual> {
    let forms: Vec<ComplexForm> = coordinates
        .iter()
        .map(|(re, im)| ComplexForm::new(Form::from_scalar(re), Form::from_scalar(im)).delbar(h.i(a)))
        .collect();
    Residual::over(points, |p| {
        let mut worst: f64 = 0.0;
        for f in &forms {
            worst = worst.max(f.max_abs(p)?);
        }
        Ok(worst)
    })
}

/// Three real functions `ν = (ν1, ν2, ν3)` and a target level `ζ`.
#[derive(Clone, Debug)]
pub struct MomentMap {
    fields: [ScalarField; 3],
    level: [f64; 3],
}

impl MomentMap {
    pub fn new(fields: [ScalarField; 3], level: [f64; 3]) -> Self {
        MomentMap { fields, level }
    }

    pub fn field(&self, a: usize) -> &ScalarField {
        &self.fields[a - 1]
    }

    pub fn level(&self) -> [f64; 3] {
        self.level
    }

    pub fn eval(&self, point: &[f64]) -> Result<[f64; 3]> {
        Ok([
            self.fields[0].eval(point)?,
            self.fields[1].eval(point)?,
            self.fields[2].eval(point)?,
        ])
    }

    /// `|ν(p) - ζ|` in the max norm.
    pub fn level_residual(&self, point: &[f64]) -> Result<f64> {
        let v = self.eval(point)?;
        Ok((0..3).fold(0.0, |m, a| m.max((v[a] - self.level[a]).abs())))
    }

    /// Gradients of the three components.
    pub fn gradients(&self, point: &[f64]) -> Result<[Vec<f64>; 3]> {
        Ok([
            self.fields[0].gradient(point)?,
            self.fields[1].gradient(point)?,
            self.fields[2].gradient(point)?,
        ])
    }

    /// The map with `ν_a` multiplied by `c`.
    pub fn with_scaled_component(&self, a: usize, c: f64) -> MomentMap {
        let mut fields = self.fields.clone();
        fields[a - 1] = fields[a - 1].scaled(c);
        MomentMap::new(fields, self.level)
    }
}

/// `ν1 = |χ|^2 - |ϱ|^2`, `ν2 + iν3 = 2<χ, ϱ>` at level zero.
pub fn su3_moment_map(chart: &Chart, convention: HermitianConvention) -> MomentMap {
    let nu1 = ScalarField::new(chart, |p| {
        (0..FACTOR_DIM)
            .map(|s| {
                let ((cr, ci), (rr, ri)) = (chi(s), rho(s));
                p[cr] * p[cr] + p[ci] * p[ci] - p[rr] * p[rr] - p[ri] * p[ri]
            })
            .sum()
    });
    let nu2 = ScalarField::new(chart, |p| {
        (0..FACTOR_DIM)
            .map(|s| {
                let ((cr, ci), (rr, ri)) = (chi(s), rho(s));
                (p[cr] * p[rr] + p[ci] * p[ri]) * 2.0
            })
            .sum()
    });
    let sign = match convention {
        HermitianConvention::ConjugateSecond => 2.0,
        HermitianConvention::ConjugateFirst => -2.0,
    };
    let nu3 = ScalarField::new(chart, move |p| {
        (0..FACTOR_DIM)
            .map(|s| {
                let ((cr, ci), (rr, ri)) = (chi(s), rho(s));
                (p[ci] * p[rr] - p[cr] * p[ri]) * sign
            })
            .sum()
    });
    MomentMap::new([nu1, nu2, nu3], [0.0; 3])
}

/// Linear one-parameter group `Φ_t = exp(tA)` with generator field `X(p) = Ap`.
#[derive(Clone, Debug, PartialEq)]
pub struct KillingAction {
    generator: DMatrix<f64>,
}

impl KillingAction {
    pub fn new(generator: DMatrix<f64>) -> Self {
        assert!(generator.is_square(), "generator must be square");
        KillingAction { generator }
    }

    /// `(χ, ϱ) -> (e^{it} χ, e^{it} ϱ)` on `C^k x C^k`.
    pub fn gamma(k: usize) -> Self {
        let mut a = DMatrix::zeros(4 * k, 4 * k);
        for s in 0..2 * k {
            let (re, im) = (2 * s, 2 * s + 1);
            a[(im, re)] = 1.0;
            a[(re, im)] = -1.0;
        }
        Self::new(a)
    }

    /// The trivial action, whose field vanishes.
    pub fn zero(dim: usize) -> Self {
        Self::new(DMatrix::zeros(dim, dim))
    }

    pub fn generator(&self) -> &DMatrix<f64> {
        &self.generator
    }

    pub fn flow(&self, t: f64) -> DMatrix<f64> {
        (&self.generator * t).exp()
    }

    pub fn field(&self, point: &[f64]) -> Vec<f64> {
        (&self.generator * DVector::from_column_slice(point))
            .as_slice()
            .to_vec()
    }

    /// Relative deviation of the central difference of `t -> Φ_t p` at zero
    /// from `X(p)`.
    pub fn field_fd_residual(&self, point: &[f64], step: f64) -> f64 {
        let p = DVector::from_column_slice(point);
        let fd = (self.flow(step) * &p - self.flow(-step) * &p) / (2.0 * step);
        let x = DVector::from_vec(self.field(point));
        (fd - &x).amax() / x.amax().max(f64::MIN_POSITIVE)
    }

    /// `|Φ^T g(Φ p) Φ - g(p)|`.
    pub fn isometry_residual(&self, g: &MetricField, t: f64, point: &[f64]) -> Result<f64> {
        let phi = self.flow(t);
        let moved = phi.clone() * DVector::from_column_slice(point);
        let pulled = phi.transpose() * g.eval(moved.as_slice())? * &phi;
        Ok((pulled - g.eval(point)?).amax())
    }

    /// `|Φ I_a(p) - I_a(Φ p) Φ|` over `a`.
    pub fn commutation_residual(&self, h: &HypercomplexStructure, t: f64, point: &[f64]) -> Result<f64> {
        let phi = self.flow(t);
        let moved = phi.clone() * DVector::from_column_slice(point);
        let mut worst: f64 = 0.0;
        for a in 1..=3 {
            let lhs = &phi * h.i(a).eval(point)?;
            let rhs = h.i(a).eval(moved.as_slice())? * &phi;
            worst = worst.max((lhs - rhs).amax());
        }
        Ok(worst)
    }
}

/// `|ν(Φ_t p) - ν(p)|` over `(t, p)` pairs.
pub fn equivariance_residual(nu: &MomentMap, action: &KillingAction, samples: &[(f64, Vec<f64>)]) -> Result<Residual> {
    let values: Vec<Result<f64>> = samples
        .par_iter()
        .map(|(t, p)| {
            let moved = action.flow(*t) * DVector::from_column_slice(p);
            let (a, b) = (nu.eval(moved.as_slice())?, nu.eval(p)?);
            Ok((0..3).fold(0.0_f64, |m, k| m.max((a[k] - b[k]).abs())))
        })
        .collect();
    let mut acc = Residual::zero();
    for ((_, p), v) in samples.iter().zip(values) {
        acc = acc.merge(Residual::at(v?, p));
    }
    Ok(acc)
}

/// `(I_a α)_i = -sum_r α_r I_a[r][i]`.
fn twist(alpha: &[f64], m: &DMatrix<f64>) -> Vec<f64> {
    let n = alpha.len();
    (0..n)
        .map(|i| -(0..n).map(|r| alpha[r] * m[(r, i)]).sum::<f64>())
        .collect()
}

fn twisted_gradients(h: &HypercomplexStructure, nu: &MomentMap, point: &[f64]) -> Result<[Vec<f64>; 3]> {
    let grads = nu.gradients(point)?;
    let m = [h.i(1).eval(point)?, h.i(2).eval(point)?, h.i(3).eval(point)?];
    Ok([0, 1, 2].map(|a| twist(&grads[a], &m[a])))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Worst component of `I1 dν1 - I2 dν2` and `I2 dν2 - I3 dν3`.
pub fn cauchy_riemann_residual(h: &HypercomplexStructure, nu: &MomentMap, points: &[Vec<f64>]) -> Result<Residual> {
    let forms: Vec<Form> = (1..=3)
        .map(|a| h.apply(a, &Form::from_scalar(nu.field(a)).d()))
        .collect();
    let diffs = [forms[0].sub(&forms[1]), forms[1].sub(&forms[2])];
    Residual::over(points, |p| {
        Ok(max_abs(&diffs[0].eval(p)?).max(max_abs(&diffs[1].eval(p)?)))
    })
}

/// `(I_a dν_a)(X)` for `a = 1, 2, 3`.
pub fn twisted_pairings(
    h: &HypercomplexStructure,
    nu: &MomentMap,
    action: &KillingAction,
    point: &[f64],
) -> Result<[f64; 3]> {
    let tw = twisted_gradients(h, nu, point)?;
    let x = action.field(point);
    Ok([0, 1, 2].map(|a| dot(&tw[a], &x)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransversalityVerdict {
    /// Smallest `min_a |I_a dν_a(X)|` over the points.
    pub minimum: f64,
    pub witness: Vec<f64>,
    pub threshold: f64,
}

impl TransversalityVerdict {
    pub fn holds(&self) -> bool {
        self.minimum > self.threshold
    }
}

pub fn transversality_check(
    h: &HypercomplexStructure,
    nu: &MomentMap,
    action: &KillingAction,
    points: &[Vec<f64>],
    threshold: f64,
) -> Result<TransversalityVerdict> {
    let (minimum, witness) = minimum_over(points, |p| {
        let v = twisted_pairings(h, nu, action, p)?;
        Ok(v.iter().fold(f64::INFINITY, |m, x| m.min(x.abs())))
    })?;
    Ok(TransversalityVerdict {
        minimum,
        witness,
        threshold,
    })
}

/// Seeded points of `ν^{-1}(0)`: a random pair in `C^3 x C^3`, one
/// Gram–Schmidt step making `ϱ` orthogonal to `χ`, equal norms, and a total
/// radius drawn log-uniformly in `[inner, outer]`.
pub fn sample_level_set(count: usize, seed: u64, inner: f64, outer: f64) -> Result<Vec<Vec<f64>>> {
    if !(inner > 0.0 && inner < outer) {
        return Err(HktError::InvalidChart("annulus needs 0 < inner < outer".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| draw_level_point(&mut rng, inner, outer)).collect()
}

fn draw_level_point(rng: &mut ChaCha8Rng, inner: f64, outer: f64) -> Result<Vec<f64>> {
    type C = num::complex::Complex64;
    for _ in 0..MAX_REDRAWS {
        let mut draw = || -> Vec<C> {
            (0..FACTOR_DIM)
                .map(|_| C::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect()
        };
        let c = draw();
        let mut r = draw();
        let cc: f64 = c.iter().map(|z| z.norm_sqr()).sum();
        let overlap: C = c.iter().zip(&r).map(|(a, b)| a.conj() * b).sum();
        for (rs, cs) in r.iter_mut().zip(&c) {
            *rs -= overlap / cc * cs;
        }
        let rr: f64 = r.iter().map(|z| z.norm_sqr()).sum();
        if cc < 1e-12 || rr < 1e-6 * cc {
            continue;
        }
        let radius = rng.random_range(inner.ln()..outer.ln()).exp();
        let (sc, sr) = (radius / (2.0 * cc).sqrt(), radius / (2.0 * rr).sqrt());
        let mut p = vec![0.0; DIM];
        for s in 0..FACTOR_DIM {
            let ((a, b), (x, y)) = (chi(s), rho(s));
            p[a] = c[s].re * sc;
            p[b] = c[s].im * sc;
            p[x] = r[s].re * sr;
            p[y] = r[s].im * sr;
        }
        return Ok(p);
    }
    Err(HktError::SamplingExhausted(MAX_REDRAWS))
}

/// `ι_X F_a` with `F_a(Y, Z) = g(I_a Y, Z)`, from the metric and structure
/// matrices at a point.
pub fn contracted_kahler(hh: &HyperHermitianStructure, a: usize, x: &[f64], point: &[f64]) -> Result<Vec<f64>> {
    let g = hh.metric().eval(point)?;
    let i = hh.structure().i(a).eval(point)?;
    let ix = &i * DVector::from_column_slice(x);
    Ok((g.transpose() * ix).as_slice().to_vec())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProportionalityReport {
    /// Worst component of `dν_a - factor · ι_X F_a` over `a` and points.
    pub residual: Residual,
    /// The factor `-2μ` at each point.
    pub expected: Vec<f64>,
    /// Least-squares `f` in `dν_a ≈ f ι_X F_a`, per point, pooled over `a`.
    pub fitted: Vec<f64>,
}

/// Compares `dν_a` with `-2μ ι_X F_a` for the Kähler forms of `hh`.
pub fn proportionality_check(
    hh: &HyperHermitianStructure,
    mu: &ScalarField,
    nu: &MomentMap,
    action: &KillingAction,
    points: &[Vec<f64>],
) -> Result<ProportionalityReport> {
    let per_point: Vec<Result<(f64, f64, f64)>> = points
        .par_iter()
        .map(|p| {
            let factor = -2.0 * mu.eval(p)?;
            let grads = nu.gradients(p)?;
            let x = action.field(p);
            let (mut worst, mut num, mut den): (f64, f64, f64) = (0.0, 0.0, 0.0);
            for a in 1..=3 {
                let c = contracted_kahler(hh, a, &x, p)?;
                let g = &grads[a - 1];
                for (gi, ci) in g.iter().zip(&c) {
                    worst = worst.max((gi - factor * ci).abs());
                }
                num += dot(g, &c);
                den += dot(&c, &c);
            }
            let fitted = if den > 0.0 { num / den } else { f64::NAN };
            Ok((worst, factor, fitted))
        })
        .collect();
    let mut residual = Residual::zero();
    let (mut expected, mut fitted) = (Vec::new(), Vec::new());
    for (p, r) in points.iter().zip(per_point) {
        let (w, e, f) = r?;
        residual = residual.merge(Residual::at(w, p));
        expected.push(e);
        fitted.push(f);
    }
    Ok(ProportionalityReport {
        residual,
        expected,
        fitted,
    })
}

/// Orthonormal kernel of the rows by a full singular-value decomposition,
/// with all singular values (descending).
fn kernel(rows: &[Vec<f64>], dim: usize) -> (DMatrix<f64>, Vec<f64>) {
    let mut m = DMatrix::zeros(dim.max(rows.len()), dim);
    for (i, r) in rows.iter().enumerate() {
        for (j, v) in r.iter().enumerate() {
            m[(i, j)] = *v;
        }
    }
    let svd = m.svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sigma: Vec<f64> = order.iter().map(|&k| svd.singular_values[k]).collect();
    let cut = KERNEL_THRESHOLD * sigma.first().copied().unwrap_or(0.0);
    let null: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&k| svd.singular_values[k] <= cut)
        .collect();
    let basis = DMatrix::from_fn(dim, null.len(), |i, j| vt[(null[j], i)]);
    (basis, sigma)
}

fn rank(rows: &[Vec<f64>], dim: usize) -> usize {
    let (basis, _) = kernel(rows, dim);
    dim - basis.ncols()
}

/// Rank of `{dν_a} ∪ {I_a dν_a}` at a point.
pub fn constraint_rank(h: &HypercomplexStructure, nu: &MomentMap, point: &[f64]) -> Result<usize> {
    let grads = nu.gradients(point)?;
    let tw = twisted_gradients(h, nu, point)?;
    let rows: Vec<Vec<f64>> = grads.into_iter().chain(tw).collect();
    Ok(rank(&rows, point.len()))
}

/// A basis of `U_m` and the induced metric and structures in that basis.
#[derive(Clone, Debug)]
pub struct HorizontalFrame {
    pub point: Vec<f64>,
    /// Columns form a Euclidean-orthonormal basis of `U_m`.
    pub basis: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    /// `h = B^T ĝ B`.
    pub metric: DMatrix<f64>,
    /// `Î_a = B^T I_a B`.
    pub structures: [DMatrix<f64>; 3],
    /// `|I_a B - B Î_a|` over `a`.
    pub stability: f64,
    /// `|ĝ(b_j, X)|` over the basis.
    pub orthogonality: f64,
}

impl HorizontalFrame {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Worst of `Î_a^2 + Id`, `Î1 Î2 - Î3` and `Î1 Î2 + Î2 Î1`.
    pub fn quaternion_residual(&self) -> f64 {
        let [a, b, c] = &self.structures;
        let id = DMatrix::<f64>::identity(self.dim(), self.dim());
        let ab = a * b;
        [
            (a * a + &id).amax(),
            (b * b + &id).amax(),
            (c * c + &id).amax(),
            (&ab - c).amax(),
            (&ab + b * a).amax(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// `|Î_a^T h Î_a - h|` over `a`.
    pub fn hermitian_residual(&self) -> f64 {
        self.structures
            .iter()
            .map(|i| (i.transpose() * &self.metric * i - &self.metric).amax())
            .fold(0.0, f64::max)
    }

    /// Eigenvalues of `h`, ascending.
    pub fn metric_eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.metric.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn is_positive_definite(&self) -> bool {
        self.metric_eigenvalues().first().is_some_and(|&e| e > 0.0)
    }

    /// `tr(Î_a Î_b)`, which does not depend on the basis.
    pub fn structure_traces(&self) -> [[f64; 3]; 3] {
        let s = &self.structures;
        [0, 1, 2].map(|a| [0, 1, 2].map(|b| (&s[a] * &s[b]).trace()))
    }
}

/// `U_m = ker{dν1, dν2, dν3, I1 dν1}` at a point of the level set.
pub fn horizontal_frame(
    hh: &HyperHermitianStructure,
    nu: &MomentMap,
    action: &KillingAction,
    point: &[f64],
) -> Result<HorizontalFrame> {
    horizontal_frame_via(hh, nu, action, point, 1)
}

/// As [`horizontal_frame`] with `I_b dν_b` as the fourth constraint.
pub fn horizontal_frame_via(
    hh: &HyperHermitianStructure,
    nu: &MomentMap,
    action: &KillingAction,
    point: &[f64],
    b: usize,
) -> Result<HorizontalFrame> {
    let h = hh.structure();
    let grads = nu.gradients(point)?;
    let tw = twisted_gradients(h, nu, point)?;
    let mut rows: Vec<Vec<f64>> = grads.to_vec();
    rows.push(tw[b - 1].clone());
    let n = point.len();
    let (basis, singular_values) = kernel(&rows, n);
    if basis.ncols() != n - 4 {
        return Err(HktError::RankDeficient {
            expected: n - 4,
            found: basis.ncols(),
            singular_values,
        });
    }
    let g = hh.metric().eval(point)?;
    let metric = basis.transpose() * &g * &basis;
    let mut stability: f64 = 0.0;
    let structures = [1, 2, 3].map(|a| {
        let i = h.i(a).eval(point).expect("point already checked");
        let ib = &i * &basis;
        let hat = basis.transpose() * &ib;
        stability = stability.max((ib - &basis * &hat).amax());
        hat
    });
    let x = DVector::from_vec(action.field(point));
    let orthogonality = (basis.transpose() * &g * x).amax();
    Ok(HorizontalFrame {
        point: point.to_vec(),
        basis,
        singular_values,
        metric,
        structures,
        stability,
        orthogonality,
    })
}

/// Frames at every point, computed in parallel.
pub fn horizontal_frames(
    hh: &HyperHermitianStructure,
    nu: &MomentMap,
    action: &KillingAction,
    points: &[Vec<f64>],
) -> Result<Vec<HorizontalFrame>> {
    points.par_iter().map(|p| horizontal_frame(hh, nu, action, p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (Flat6, MomentMap, KillingAction) {
        let f = flat6_structure(0.5, 3.0).unwrap();
        let nu = su3_moment_map(f.chart(), HermitianConvention::default());
        (f, nu, KillingAction::gamma(FACTOR_DIM))
    }

    fn pair(c: [f64; 3], r: [f64; 3]) -> Vec<f64> {
        let mut p = vec![0.0; DIM];
        for s in 0..3 {
            p[chi(s).0] = c[s];
            p[rho(s).0] = r[s];
        }
        p
    }

    #[test]
    fn moment_map_values() {
        let (_, nu, _) = setup();
        assert_eq!(nu.eval(&pair([1.0, 0.0, 0.0], [0.0, 1.0, 0.0])).unwrap(), [0.0; 3]);
        assert_eq!(nu.eval(&pair([2.0, 0.0, 0.0], [0.0, 1.0, 0.0])).unwrap()[0], 3.0);
    }

    #[test]
    fn moment_map_matches_complex_arithmetic() {
        type C = num::complex::Complex64;
        let (f, _, _) = setup();
        let p = f.chart().sample(1, 3).remove(0);
        let c: Vec<C> = (0..3).map(|s| C::new(p[chi(s).0], p[chi(s).1])).collect();
        let r: Vec<C> = (0..3).map(|s| C::new(p[rho(s).0], p[rho(s).1])).collect();
        for (conv, inner) in [
            (
                HermitianConvention::ConjugateSecond,
                c.iter().zip(&r).map(|(a, b)| a * b.conj()).sum::<C>(),
            ),
            (
                HermitianConvention::ConjugateFirst,
                c.iter().zip(&r).map(|(a, b)| a.conj() * b).sum::<C>(),
            ),
        ] {
            let v = su3_moment_map(f.chart(), conv).eval(&p).unwrap();
            assert!((v[1] - 2.0 * inner.re).abs() < 1e-12);
            assert!((v[2] - 2.0 * inner.im).abs() < 1e-12);
        }
    }

    #[test]
    fn level_set_samples() {
        let (_, nu, _) = setup();
        let pts = sample_level_set(30, 7, 0.6, 2.5).unwrap();
        for p in &pts {
            assert!(nu.level_residual(p).unwrap() < 1e-12);
            let scaled: Vec<f64> = p.iter().map(|x| 0.9 * x).collect();
            assert!(nu.level_residual(&scaled).unwrap() < 1e-12);
            let r = p.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((0.6..=2.5).contains(&r));
        }
        assert_eq!(pts, sample_level_set(30, 7, 0.6, 2.5).unwrap());
        assert!(sample_level_set(1, 0, 2.0, 1.0).is_err());
    }

    #[test]
    fn cauchy_riemann_selects_the_hermitian_convention() {
        let (f, nu, _) = setup();
        let pts = f.chart().sample(10, 11);
        assert!(cauchy_riemann_residual(f.structure(), &nu, &pts).unwrap().value < 1e-9);
        let other = su3_moment_map(f.chart(), HermitianConvention::ConjugateFirst);
        assert!(cauchy_riemann_residual(f.structure(), &other, &pts).unwrap().value > 1e-2);
        let corrupted = nu.with_scaled_component(1, 2.0);
        assert!(cauchy_riemann_residual(f.structure(), &corrupted, &pts).unwrap().value > 1e-2);
    }

    #[test]
    fn killing_field_and_flow() {
        let (f, nu, act) = setup();
        let p = f.chart().sample(1, 5).remove(0);
        assert!(act.field_fd_residual(&p, 1e-6) < 1e-6);
        for t in [0.3, 1.7, -2.2] {
            assert!(act.isometry_residual(f.hyper_hermitian().metric(), t, &p).unwrap() < 1e-10);
            assert!(act.commutation_residual(f.structure(), t, &p).unwrap() < 1e-10);
        }
        let samples: Vec<(f64, Vec<f64>)> = (0..5).map(|k| (0.4 * k as f64, p.clone())).collect();
        assert!(equivariance_residual(&nu, &act, &samples).unwrap().value < 1e-10);
    }

    #[test]
    fn transversality_and_homogeneity() {
        let (f, nu, act) = setup();
        let pts = sample_level_set(10, 2, 0.6, 1.4).unwrap();
        let v = transversality_check(f.structure(), &nu, &act, &pts, 1e-6).unwrap();
        assert!(v.holds(), "{v:?}");
        let p = &pts[0];
        let q: Vec<f64> = p.iter().map(|x| 2.0 * x).collect();
        let (a, b) = (
            twisted_pairings(f.structure(), &nu, &act, p).unwrap(),
            twisted_pairings(f.structure(), &nu, &act, &q).unwrap(),
        );
        for k in 0..3 {
            assert!((b[k] - 4.0 * a[k]).abs() < 1e-10 * b[k].abs().max(1.0));
        }
        let none = transversality_check(f.structure(), &nu, &KillingAction::zero(DIM), &pts, 1e-6).unwrap();
        assert!(!none.holds());
    }

    #[test]
    fn proportionality_on_level_set() {
        let (f, nu, act) = setup();
        let pts = sample_level_set(10, 4, 0.5, 3.0).unwrap();
        let r = proportionality_check(f.hyper_hermitian(), f.potential(), &nu, &act, &pts).unwrap();
        assert!(r.residual.value < 1e-8, "{r:?}");
        for (e, fit) in r.expected.iter().zip(&r.fitted) {
            assert!((e - fit).abs() < 1e-8 * e.abs());
        }
        let flat = proportionality_check(f.flat(), f.potential(), &nu, &act, &pts).unwrap();
        assert!(flat.residual.value > 1e-2);
    }

    #[test]
    fn proportionality_matches_form_evaluation() {
        let (f, nu, act) = setup();
        let p = pair([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        let hh = f.hyper_hermitian();
        let x = act.field(&p);
        let mu = f.potential().eval(&p).unwrap();
        let grad = nu.field(1).gradient(&p).unwrap();
        for j in 0..DIM {
            let mut e = vec![0.0; DIM];
            e[j] = 1.0;
            let rhs = -2.0 * mu * hh.kahler(1).eval_on(&p, &[x.clone(), e]).unwrap();
            assert!((grad[j] - rhs).abs() < 1e-10, "{j}: {} vs {rhs}", grad[j]);
        }
    }

    #[test]
    fn horizontal_frames_are_hyper_hermitian() {
        let (f, nu, act) = setup();
        let pts = sample_level_set(8, 9, 0.5, 3.0).unwrap();
        for fr in horizontal_frames(f.hyper_hermitian(), &nu, &act, &pts).unwrap() {
            assert_eq!(fr.dim(), HORIZONTAL_DIM);
            assert!(fr.stability < 1e-8);
            assert!(fr.orthogonality < 1e-8);
            assert!(fr.quaternion_residual() < 1e-8);
            assert!(fr.hermitian_residual() < 1e-8);
            assert!(fr.is_positive_definite());
            assert_eq!(constraint_rank(f.structure(), &nu, &fr.point).unwrap(), 4);
        }
    }

    #[test]
    fn frame_invariants_do_not_depend_on_the_basis() {
        let (f, nu, act) = setup();
        let p = sample_level_set(1, 12, 0.5, 3.0).unwrap().remove(0);
        let a = horizontal_frame_via(f.hyper_hermitian(), &nu, &act, &p, 1).unwrap();
        let b = horizontal_frame_via(f.hyper_hermitian(), &nu, &act, &p, 3).unwrap();
        for (x, y) in a.metric_eigenvalues().iter().zip(b.metric_eigenvalues()) {
            assert!((x - y).abs() < 1e-8);
        }
        let (ta, tb) = (a.structure_traces(), b.structure_traces());
        for i in 0..3 {
            for j in 0..3 {
                assert!((ta[i][j] - tb[i][j]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn frame_rank_collapse_is_reported() {
        let (f, nu, act) = setup();
        let p = pair([1.0, 0.0, 0.0], [1.0, 0.0, 0.0]);
        let zero = MomentMap::new([0, 1, 2].map(|_| ScalarField::constant(f.chart(), 0.0)), [0.0; 3]);
        assert!(matches!(
            horizontal_frame(f.hyper_hermitian(), &zero, &act, &p),
            Err(HktError::RankDeficient { found: 12, .. })
        ));
        let q = sample_level_set(1, 1, 0.5, 3.0).unwrap().remove(0);
        let good = horizontal_frame_via(f.hyper_hermitian(), &nu, &act, &q, 3).unwrap();
        assert!(good.stability < 1e-8);
    }

    #[test]
    fn holomorphic_coordinates_are_holomorphic() {
        let (f, _, _) = setup();
        let pts = f.chart().sample(5, 8);
        for a in 1..=3 {
            let coords = holomorphic_coordinates(f.chart(), a);
            let r = holomorphic_coordinate_residual(f.structure(), a, &coords, &pts).unwrap();
            assert!(r.value < 1e-9, "I{a}: {r:?}");
        }
        let wrong = holomorphic_coordinates(f.chart(), 1);
        assert!(
            holomorphic_coordinate_residual(f.structure(), 2, &wrong, &pts)
                .unwrap()
                .value
                > 1e-2
        );
    }

    #[test]
    fn flat6_checks() {
        let (f, _, _) = setup();
        let pts = f.chart().sample(3, 21);
        let v = f.verify(&pts).unwrap();
        assert!(v.quaternion.value < 1e-12);
        assert!(v.nijenhuis.value < 1e-12);
        assert!(v.hermitian.value < 1e-10);
        assert!(v.hkt.value < 1e-8, "{v:?}");
    }
}
