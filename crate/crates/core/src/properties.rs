//! Property tests of the calculus kernels, sampler and report format.

use crate::chart::{pullback_endomorphism, pullback_metric};
use crate::chart::{CoordinateChart, Form, ScalarField};
use crate::invariant::builtin::{algebra_by_name, BUILTIN_ALGEBRAS};
use crate::invariant::{Exact, InvariantForm};
use crate::jet::HyperDual;
use crate::potential::{hopf_action, hopf_chart, GeneratorFunction, PotentialStructure};
use crate::quaternionic::{complex_structure_at, HypercomplexStructure};
use crate::reduction::{flat6_chart, sample_level_set, su3_moment_map, HermitianConvention};
use crate::residual::max_abs_diff;
use crate::suite::{CheckRecord, CheckReport};
use crate::Residual;
use proptest::prelude::*;

fn polynomial(chart: &crate::chart::Chart, c: Vec<f64>) -> ScalarField {
    ScalarField::new(chart, move |p| {
        let n = p.len();
        let mut s = HyperDual::constant(c[0]);
        for i in 0..n {
            s += p[i] * c[1 + i] + p[i] * p[(i + 1) % n] * p[(i + 2) % n] * c[1 + n + i];
        }
        s
    })
}

fn coeffs(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, 1 + 2 * n)
}

fn point(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn d_squared_vanishes_on_one_forms(a in coeffs(5), b in coeffs(5), p in point(5)) {
        let chart = CoordinateChart::cube(5, 1.0).unwrap();
        let alpha = Form::from_scalar(&polynomial(&chart, a))
            .d()
            .times(&polynomial(&chart, b))
            .add(&Form::coordinate_wedge(&chart, &[2]));
        let dd = alpha.d().d();
        prop_assert!(dd.max_abs(&p).unwrap() < 1e-9);
    }

    #[test]
    fn wedge_of_one_forms_is_antisymmetric(a in coeffs(4), b in coeffs(4), p in point(4)) {
        let chart = CoordinateChart::cube(4, 1.0).unwrap();
        let x = Form::from_scalar(&polynomial(&chart, a)).d();
        let y = Form::from_scalar(&polynomial(&chart, b)).d();
        let lhs = x.wedge(&y).eval(&p).unwrap();
        let rhs = y.wedge(&x).scale(-1.0).eval(&p).unwrap();
        prop_assert!(max_abs_diff(&lhs, &rhs) < 1e-12);
        prop_assert!(x.wedge(&x).max_abs(&p).unwrap() < 1e-12);
    }

    #[test]
    fn rotated_structures_square_to_minus_one(v in prop::array::uniform3(-1.0..1.0f64), p in point(8)) {
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        prop_assume!(norm > 1e-3);
        let chart = CoordinateChart::cube(8, 1.0).unwrap();
        let h = HypercomplexStructure::flat(&chart).unwrap();
        let j = complex_structure_at(&h, v.map(|x| x / norm)).unwrap();
        prop_assert!(j.square_residual(&p).unwrap() < 1e-12);
    }

    #[test]
    fn twisted_derivative_squares_to_zero(a in coeffs(4), p in point(4)) {
        let chart = CoordinateChart::cube(4, 1.0).unwrap();
        let h = HypercomplexStructure::flat(&chart).unwrap();
        let f = Form::from_scalar(&polynomial(&chart, a));
        for k in 1..=3 {
            prop_assert!(h.d_a(k, &h.d_a(k, &f)).max_abs(&p).unwrap() < 1e-9);
        }
    }

    #[test]
    fn hopf_action_preserves_log_structure(r in 0.3..1.5f64, t1 in 0.0..6.3f64, t2 in 0.0..6.3f64) {
        let chart = hopf_chart(2, 0.2, 5.0).unwrap();
        let base = PotentialStructure::flat(&chart).unwrap();
        let hh = base.modify(&GeneratorFunction::log()).hh;
        let phi = hopf_action(r, &[t1, t2]);
        let g = pullback_metric(&phi, hh.metric()).unwrap();
        let i2 = pullback_endomorphism(&phi, hh.structure().i(2)).unwrap();
        for p in chart.sample(3, (r * 1e6) as u64) {
            prop_assert!((g.eval(&p).unwrap() - hh.metric().eval(&p).unwrap()).amax() < 1e-10);
            prop_assert!((i2.eval(&p).unwrap() - hh.structure().i(2).eval(&p).unwrap()).amax() < 1e-10);
        }
    }

    #[test]
    fn level_set_samples_are_zeros(seed in any::<u64>()) {
        let chart = flat6_chart(0.5, 3.0).unwrap();
        let nu = su3_moment_map(&chart, HermitianConvention::default());
        for p in sample_level_set(4, seed, 0.5, 3.0).unwrap() {
            prop_assert!(nu.level_residual(&p).unwrap() < 1e-12);
        }
    }

    #[test]
    fn report_round_trips(
        values in prop::collection::vec((any::<f64>(), prop::num::f64::NORMAL | prop::num::f64::ZERO), 1..6),
        seed in any::<u64>(),
    ) {
        let mut rep = CheckReport::new("x", "round trip", Some(seed), values.len());
        for (k, (v, w)) in values.iter().enumerate() {
            rep.push(CheckRecord::below(&format!("c{k}"), &Residual::at(*v, &[*w, 1.0]), 1e-8));
        }
        let rep = rep.finish();
        let back = CheckReport::from_json(&rep.to_json()).unwrap();
        prop_assert_eq!(back.to_json(), rep.to_json());
        prop_assert_eq!(rep.pass, rep.checks.iter().all(|c| c.pass));
    }
}

fn exact_components(dim: usize, degree: usize, raw: &[i64]) -> InvariantForm {
    let combos = combinations(dim, degree);
    let entries: Vec<(Vec<usize>, Exact)> = combos
        .into_iter()
        .zip(raw.iter().cycle())
        .map(|(c, &v)| (c, Exact::ratio(v, 3)))
        .collect();
    InvariantForm::from_components(dim, degree, &entries)
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in 0..n {
        for mut rest in combinations(n, k - 1) {
            if rest.first().is_none_or(|&r| r > first) {
                rest.insert(0, first);
                out.push(rest);
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn chevalley_eilenberg_d_squared_is_zero(
        which in 0..BUILTIN_ALGEBRAS.len(),
        degree in 0..3usize,
        raw in prop::collection::vec(-6i64..6, 1..12),
    ) {
        let alg = algebra_by_name(BUILTIN_ALGEBRAS[which]).unwrap().algebra;
        let form = exact_components(alg.dim(), degree, &raw);
        prop_assert!(form.d(&alg).d(&alg).is_zero());
    }
}
