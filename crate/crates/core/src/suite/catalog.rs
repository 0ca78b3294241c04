//! Built-in examples and their check lists.

use super::config::SuiteConfig;
use super::report::{CheckRecord, CheckReport, Expectation, SweepPoint, SweepReport};
use crate::chart::{
    nijenhuis, pullback_endomorphism, pullback_metric, Chart, CoordinateChart, MetricField, ScalarField,
};
use crate::error::{HktError, Result};
use crate::invariant::builtin::{algebra_by_name, homogeneous_group};
use crate::invariant::forms::d_squared_defect;
use crate::invariant::heisenberg::heisenberg_structure;
use crate::invariant::joyce::{joyce_decompose, verify_group};
use crate::invariant::structure::{holomorphic_20_defect, nijenhuis_invariant, type_11_defect, HktVerdict};
use crate::invariant::{Exact, ExactMatrix, InvariantHypercomplex, LieAlgebra};
use crate::potential::{
    complex_laplacian, hopf_action, hopf_chart, hyperkahler_residual, potential_residual, GeneratorFunction,
    PotentialStructure,
};
use crate::quaternionic::{
    bismut_torsion, conformal_change, hkt_residual, holomorphic_residual, verify_quaternion_relations,
    HyperHermitianStructure, HypercomplexStructure,
};
use crate::reduction::{
    cauchy_riemann_residual, constraint_rank, equivariance_residual, flat6_structure, holomorphic_coordinate_residual,
    holomorphic_coordinates, horizontal_frame, proportionality_check, sample_level_set, su3_moment_map,
    transversality_check, KillingAction, FACTOR_DIM, HORIZONTAL_DIM,
};
use crate::residual::{max_abs, minimum_over, Residual};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExampleInfo {
    pub id: &'static str,
    pub description: &'static str,
    /// Needs a seed.
    pub randomized: bool,
    /// Some checks are expected to fail.
    pub negative_control: bool,
}

const fn info(id: &'static str, description: &'static str, randomized: bool, negative_control: bool) -> ExampleInfo {
    ExampleInfo {
        id,
        description,
        randomized,
        negative_control,
    }
}

pub const CATALOG: [ExampleInfo; 14] = [
    info("flat-hk-n1", "flat hyper-Kähler H^1", true, false),
    info("flat-hk-n2", "flat hyper-Kähler H^2", true, false),
    info("flat-hk-n3", "flat hyper-Kähler H^3", true, false),
    info(
        "hopf-log-n2",
        "HKT metric from f = ln on H^2 minus 0 (S^1 x S^7 family)",
        true,
        false,
    ),
    info(
        "hopf-log-n3",
        "HKT metric from f = ln on H^3 minus 0 (S^1 x S^11 family)",
        true,
        false,
    ),
    info(
        "hopf-power-m2",
        "HKT metric from f = t^2 on the flat potential",
        true,
        false,
    ),
    info(
        "hopf-power-m3",
        "HKT metric from f = t^3 on the flat potential",
        true,
        false,
    ),
    info("conformal-4d", "conformal change of flat H^1 (always HKT)", true, false),
    info(
        "conformal-8d",
        "conformal change e^x1 of flat H^2 (negative control: not HKT)",
        true,
        true,
    ),
    info(
        "heisenberg-n1",
        "abelian hypercomplex structure on h_2 + R^3 (exact)",
        false,
        false,
    ),
    info(
        "heisenberg-n2",
        "abelian hypercomplex structure on h_4 + R^3 (exact)",
        false,
        false,
    ),
    info(
        "su2-group",
        "Joyce structure on SU(2) x U(1) with extended Killing metric (exact)",
        false,
        false,
    ),
    info(
        "su3-group",
        "Joyce structure on SU(3) with Killing metric (exact)",
        false,
        false,
    ),
    info(
        "su3-reduction",
        "U(1) reduction of C^3 x C^3 towards S^1 x SU(3)/U(1)",
        true,
        false,
    ),
];

pub fn list_examples() -> &'static [ExampleInfo] {
    &CATALOG
}

pub fn example_info(id: &str) -> Result<&'static ExampleInfo> {
    CATALOG
        .iter()
        .find(|e| e.id == id)
        .ok_or_else(|| HktError::UnknownExample(id.to_string()))
}

/// Runs the full check list of one example.
pub fn verify(id: &str, cfg: &SuiteConfig) -> Result<CheckReport> {
    let info = example_info(id)?;
    let seed = if info.randomized {
        Some(cfg.require_seed(id)?)
    } else {
        None
    };
    let samples = if info.randomized { cfg.samples } else { 0 };
    let mut rep = CheckReport::new(id, info.description, seed, samples);
    let s = seed.unwrap_or(0);
    match id {
        "flat-hk-n1" => flat_checks(&mut rep, cfg, 1, s)?,
        "flat-hk-n2" => flat_checks(&mut rep, cfg, 2, s)?,
        "flat-hk-n3" => flat_checks(&mut rep, cfg, 3, s)?,
        "hopf-log-n2" => hopf_checks(&mut rep, cfg, 2, s)?,
        "hopf-log-n3" => hopf_checks(&mut rep, cfg, 3, s)?,
        "hopf-power-m2" => power_checks(&mut rep, cfg, 2, s)?,
        "hopf-power-m3" => power_checks(&mut rep, cfg, 3, s)?,
        "conformal-4d" => conformal_checks(&mut rep, cfg, 1, s)?,
        "conformal-8d" => conformal_checks(&mut rep, cfg, 2, s)?,
        "heisenberg-n1" => heisenberg_checks(&mut rep, 1)?,
        "heisenberg-n2" => heisenberg_checks(&mut rep, 2)?,
        "su2-group" => group_checks(&mut rep, "su2", (0, 3, 0))?,
        "su3-group" => group_checks(&mut rep, "su3", (1, 3, 4))?,
        "su3-reduction" => reduction_checks(&mut rep, cfg, s)?,
        _ => unreachable!("catalog ids are matched above"),
    }
    Ok(rep.finish())
}

/// One report per point of the cartesian product of the grid values.
pub fn sweep(id: &str, cfg: &SuiteConfig, grid: &[(String, Vec<String>)]) -> Result<SweepReport> {
    example_info(id)?;
    if grid.is_empty() || grid.iter().any(|(_, v)| v.is_empty()) {
        return Err(HktError::Config("sweep grid is empty".into()));
    }
    let mut combos: Vec<Vec<(String, String)>> = vec![Vec::new()];
    for (key, values) in grid {
        combos = combos
            .into_iter()
            .flat_map(|c| {
                values.iter().map(move |v| {
                    let mut c = c.clone();
                    c.push((key.clone(), v.clone()));
                    c
                })
            })
            .collect();
    }
    let mut points = Vec::with_capacity(combos.len());
    for combo in combos {
        let mut c = cfg.clone();
        for (k, v) in &combo {
            c.set(k, v)?;
        }
        points.push(SweepPoint {
            parameters: combo.into_iter().collect(),
            report: verify(id, &c)?,
        });
    }
    Ok(SweepReport::new(id, points))
}

fn exact_max<'a>(values: impl IntoIterator<Item = &'a Exact>) -> Exact {
    values
        .into_iter()
        .map(Exact::abs)
        .fold(Exact::zero(), |m, v| if v > m { v } else { m })
}

fn matrix_max(m: &ExactMatrix) -> Exact {
    let mut out = Exact::zero();
    for i in 0..m.rows() {
        let row_max = exact_max(m.row(i));
        if row_max > out {
            out = row_max;
        }
    }
    out
}

fn quaternion_exact(h: &InvariantHypercomplex) -> Exact {
    let [a, b, c] = [1, 2, 3].map(|k| h.i(k).matrix().clone());
    let id = ExactMatrix::identity(a.rows());
    let ab = a.mul(&b);
    [
        a.mul(&a).add(&id),
        b.mul(&b).add(&id),
        c.mul(&c).add(&id),
        ab.sub(&c),
        ab.add(&b.mul(&a)),
    ]
    .iter()
    .map(matrix_max)
    .fold(Exact::zero(), |m, v| if v > m { v } else { m })
}

fn hermitian_exact(metric: &ExactMatrix, h: &InvariantHypercomplex) -> Exact {
    (1..=3)
        .map(|a| {
            let m = h.i(a).matrix();
            matrix_max(&m.transpose().mul(metric).mul(m).sub(metric))
        })
        .fold(Exact::zero(), |m, v| if v > m { v } else { m })
}

fn hkt_exact(v: &HktVerdict) -> Exact {
    let [a, b, c] = &v.twisted;
    let d1 = a.sub(b).expect("same degree");
    let d2 = b.sub(c).expect("same degree");
    let m1 = exact_max(d1.components().map(|(_, x)| x));
    let m2 = exact_max(d2.components().map(|(_, x)| x));
    if m1 > m2 {
        m1
    } else {
        m2
    }
}

/// Largest Nijenhuis component over basis pairs, with the pair attaining it.
fn nijenhuis_exact(alg: &LieAlgebra, h: &InvariantHypercomplex, a: usize) -> (Exact, Option<Vec<usize>>) {
    let n = alg.dim();
    let mut best = (Exact::zero(), None);
    for i in 0..n {
        for j in i + 1..n {
            let v = nijenhuis_invariant(alg, h.i(a), &alg.basis_vector(i), &alg.basis_vector(j));
            let m = exact_max(&v);
            if m > best.0 {
                best = (m, Some(vec![i, j]));
            }
        }
    }
    best
}

fn abelian_exact(alg: &LieAlgebra, h: &InvariantHypercomplex, a: usize) -> (Exact, Option<Vec<usize>>) {
    let n = alg.dim();
    let i = h.i(a);
    let mut best = (Exact::zero(), None);
    for p in 0..n {
        for q in p + 1..n {
            let (x, y) = (alg.basis_vector(p), alg.basis_vector(q));
            let lhs = alg.bracket(&i.apply(&x), &i.apply(&y));
            let rhs = alg.bracket(&x, &y);
            let diff: Vec<Exact> = lhs.iter().zip(&rhs).map(|(u, v)| u - v).collect();
            let m = exact_max(&diff);
            if m > best.0 {
                best = (m, Some(vec![p, q]));
            }
        }
    }
    best
}

/// `0` when no defect was found, `1` with the defect's basis indices
/// otherwise.
fn indicator(name: &str, defect: Option<Vec<usize>>) -> CheckRecord {
    let value = if defect.is_some() { Exact::one() } else { Exact::zero() };
    CheckRecord::exact(name, &value, defect)
}

fn heisenberg_checks(rep: &mut CheckReport, n: usize) -> Result<()> {
    rep.parameter("n", n);
    let def = algebra_by_name(&format!("heisenberg-n{n}"))?;
    let alg = &def.algebra;
    let h = heisenberg_structure(n)?;
    let metric = ExactMatrix::identity(alg.dim());
    rep.push(CheckRecord::exact("quaternion_relations", &quaternion_exact(&h), None));
    rep.push(CheckRecord::exact(
        "hyper_hermitian",
        &hermitian_exact(&metric, &h),
        None,
    ));
    for a in 1..=3 {
        let (v, w) = nijenhuis_exact(alg, &h, a);
        rep.push(CheckRecord::exact(&format!("integrable_i{a}"), &v, w));
        let (v, w) = abelian_exact(alg, &h, a);
        rep.push(CheckRecord::exact(&format!("abelian_i{a}"), &v, w));
        rep.push(indicator(
            &format!("type_11_i{a}"),
            type_11_defect(alg, h.i(a)).map(|k| vec![k]),
        ));
        rep.push(indicator(
            &format!("holomorphic_20_i{a}"),
            holomorphic_20_defect(alg, h.i(a)).map(|(x, y)| vec![x, y]),
        ));
    }
    let hkt = crate::invariant::structure::hkt_identity(alg, &metric, &h);
    rep.push(CheckRecord::exact("hkt_identity", &hkt_exact(&hkt), None));
    rep.push(indicator("d_squared", d_squared_defect(alg).map(|(d, r)| vec![d, r])));
    Ok(())
}

fn group_checks(rep: &mut CheckReport, name: &str, dims: (usize, usize, usize)) -> Result<()> {
    let def = algebra_by_name(name)?;
    let roots = def
        .roots
        .as_ref()
        .ok_or_else(|| HktError::RootData(format!("{name} has no root data")))?;
    let dec = joyce_decompose(&def.algebra, roots)?;
    let found = dec.dimensions();
    rep.note("decomposition", format!("{found:?}"));
    let dims_ok = found.first() == Some(&dims) && found.len() == 1;
    rep.push(indicator("decomposition_dims", (!dims_ok).then(Vec::new)));
    let clauses = dec.verify();
    for (label, ok) in [
        ("joyce_abelian_and_sp1", clauses.abelian_and_sp1),
        ("joyce_contains_cartan", clauses.contains_cartan),
        ("joyce_centralizes", clauses.centralizes),
        ("joyce_preserves_f", clauses.preserves_f),
        ("joyce_quaternionic_blocks", clauses.quaternionic_blocks.is_some()),
        ("joyce_killing_orthogonal", clauses.killing_orthogonal),
    ] {
        rep.push(indicator(label, (!ok).then(Vec::new)));
    }
    let hom = homogeneous_group(&def)?;
    let alg = &hom.algebra;
    let h = &hom.structure;
    rep.parameter("dimension", alg.dim());
    let verdict = verify_group(&hom)?;
    let metric = hom.extended_killing.scale(&Exact::int(-1));
    rep.push(CheckRecord::exact("quaternion_relations", &quaternion_exact(h), None));
    for a in 1..=3 {
        let (v, w) = nijenhuis_exact(alg, h, a);
        rep.push(CheckRecord::exact(&format!("integrable_i{a}"), &v, w));
    }
    rep.push(indicator(
        "negative_definite",
        (!verdict.negative_definite).then(Vec::new),
    ));
    rep.push(CheckRecord::exact(
        "hyper_hermitian",
        &hermitian_exact(&metric, h),
        None,
    ));
    rep.push(indicator(
        "restricts_to_killing",
        (!verdict.restricts_to_killing).then(Vec::new),
    ));
    rep.push(CheckRecord::exact("hkt_identity", &hkt_exact(&verdict.hkt), None));
    rep.push(indicator(
        "torsion_antisymmetric",
        (!verdict.torsion.antisymmetric).then(Vec::new),
    ));
    if let Some(k) = &verdict.torsion.kappa {
        rep.note("torsion-ratio", format!("c = {k} * (-1/2 d1 F1)"));
    }
    rep.push(indicator("d_squared", d_squared_defect(alg).map(|(d, r)| vec![d, r])));
    Ok(())
}

fn annulus(cfg: &SuiteConfig, n: usize, inner: f64, outer: f64) -> Result<Chart> {
    let (i, o) = (cfg.inner.unwrap_or(inner), cfg.outer.unwrap_or(outer));
    hopf_chart(n, i, o)
}

fn record_chart(rep: &mut CheckReport, chart: &Chart) {
    rep.parameter("domain", chart.domain());
}

/// Smallest eigenvalue of the metric over the points.
fn positivity(name: &str, g: &MetricField, points: &[Vec<f64>]) -> Result<CheckRecord> {
    let (v, w) = minimum_over(points, |p| g.min_eigenvalue(p))?;
    Ok(CheckRecord::above(name, v, Some(w), points.len(), 0.0))
}

fn nijenhuis_residual(h: &HypercomplexStructure, points: &[Vec<f64>]) -> Result<Residual> {
    Residual::over(points, |p| {
        let mut worst: f64 = 0.0;
        for a in 1..=3 {
            worst = worst.max(nijenhuis(h.i(a), p)?.max_abs());
        }
        Ok(worst)
    })
}

/// Both HKT criteria, and whether their verdicts at `1e-6` agree.
fn hkt_pair(
    rep: &mut CheckReport,
    cfg: &SuiteConfig,
    hh: &HyperHermitianStructure,
    points: &[Vec<f64>],
    tol: f64,
    expected: Expectation,
) -> Result<()> {
    let hkt = hkt_residual(hh, points)?;
    let hol = holomorphic_residual(hh, points)?;
    let agree = (hkt.value < 1e-6) == (hol.residual.value < 1e-6);
    rep.push(CheckRecord::below("hkt_residual", &hkt, cfg.tol(tol)).expecting(expected));
    rep.push(CheckRecord::below("holomorphic_residual", &hol.residual, cfg.tol(tol)).expecting(expected));
    rep.push(CheckRecord::below(
        "holomorphic_conjugate_symmetry",
        &hol.conjugate_symmetry,
        cfg.tol(1e-10),
    ));
    rep.push(CheckRecord::flag("criteria_agree", agree, None));
    Ok(())
}

fn flat_checks(rep: &mut CheckReport, cfg: &SuiteConfig, n: usize, seed: u64) -> Result<()> {
    rep.parameter("n", n);
    let chart = annulus(cfg, n, 0.2, 5.0)?;
    record_chart(rep, &chart);
    let points = chart.sample(cfg.samples, seed);
    let ps = PotentialStructure::flat(&chart)?;
    let hh = ps.hyper_hermitian();
    let h = ps.structure();
    rep.push(CheckRecord::below(
        "quaternion_relations",
        &verify_quaternion_relations(h, &points)?,
        cfg.tol(1e-12),
    ));
    rep.push(CheckRecord::below(
        "nijenhuis",
        &nijenhuis_residual(h, &points)?,
        cfg.tol(1e-10),
    ));
    rep.push(CheckRecord::below(
        "hermitian",
        &hh.hermitian_residual(&points)?,
        cfg.tol(1e-12),
    ));
    hkt_pair(rep, cfg, hh, &points, 1e-8, Expectation::Holds)?;
    rep.push(CheckRecord::below(
        "potential_residual",
        &potential_residual(h, ps.potential(), ps.metric(), &points)?,
        cfg.tol(1e-9),
    ));
    let hk = hyperkahler_residual(h, ps.potential(), &points)?;
    rep.push(CheckRecord::below("hyperkahler_cyclic", &hk.cyclic, cfg.tol(1e-9)));
    let torsion = bismut_torsion(ps.metric(), h.i(1));
    rep.push(CheckRecord::below(
        "bismut_torsion",
        &Residual::over(&points, |p| Ok(max_abs(&torsion.eval(p)?)))?,
        cfg.tol(1e-10),
    ));
    rep.push(positivity("positive_definite", ps.metric(), &points)?);
    Ok(())
}

/// `(Φ*I, Φ*g)` for a linear map `Φ`.
fn pulled_back(hh: &HyperHermitianStructure, phi: &nalgebra::DMatrix<f64>) -> Result<HyperHermitianStructure> {
    let h = hh.structure();
    let [a, b, c] = [1, 2, 3].map(|k| pullback_endomorphism(phi, h.i(k)));
    Ok(HyperHermitianStructure::new(
        HypercomplexStructure::new(a?, b?, c?),
        pullback_metric(phi, hh.metric())?,
    ))
}

fn hopf_checks(rep: &mut CheckReport, cfg: &SuiteConfig, n: usize, seed: u64) -> Result<()> {
    let generator = GeneratorFunction::by_name(cfg.generator.as_deref().unwrap_or("log"))?;
    let r = cfg.r.unwrap_or(1.0);
    let thetas = cfg.angles(n)?;
    rep.parameter("n", n);
    rep.parameter("generator", generator.name());
    rep.parameter("r", r);
    rep.parameter("theta", format!("{thetas:?}"));
    let chart = annulus(cfg, n, 0.2, 5.0)?;
    record_chart(rep, &chart);
    let candidates = chart.sample(cfg.samples, seed);
    let base = PotentialStructure::flat(&chart)?;
    let (points, excluded) = base.admissible_points(&generator, &candidates)?;
    rep.note("excluded-points", excluded);
    let modified = base.modify(&generator);
    let hh = &modified.hh;
    let h = hh.structure();
    let phi = hopf_action(r, &thetas);
    let pulled = pulled_back(hh, &phi)?;
    rep.push(CheckRecord::below(
        "hermitian",
        &hh.hermitian_residual(&points)?,
        cfg.tol(1e-10),
    ));
    hkt_pair(rep, cfg, &pulled, &points, 1e-8, Expectation::Holds)?;
    let iso = Residual::over(
        &points,
        |p| Ok((pulled.metric().eval(p)? - hh.metric().eval(p)?).amax()),
    )?;
    rep.push(CheckRecord::below("action_isometry", &iso, cfg.tol(1e-10)));
    let com = Residual::over(&points, |p| {
        let mut worst: f64 = 0.0;
        for a in 1..=3 {
            worst = worst.max((pulled.structure().i(a).eval(p)? - h.i(a).eval(p)?).amax());
        }
        Ok(worst)
    })?;
    rep.push(CheckRecord::below("action_commutes", &com, cfg.tol(1e-10)));
    rep.push(CheckRecord::below(
        "potential_residual",
        &potential_residual(h, &modified.potential, hh.metric(), &points)?,
        cfg.tol(1e-8),
    ));
    let hk = hyperkahler_residual(h, &modified.potential, &points)?;
    rep.push(CheckRecord::above(
        "not_hyperkahler",
        hk.cyclic.value,
        hk.cyclic.witness.clone(),
        hk.cyclic.samples,
        1e-3,
    ));
    let (lap, w) = minimum_over(&points, |p| complex_laplacian(hh, &modified.potential, p))?;
    rep.push(CheckRecord::above(
        "laplacian_positive",
        lap,
        Some(w),
        points.len(),
        0.0,
    ));
    rep.push(positivity("positive_definite", hh.metric(), &points)?);
    Ok(())
}

fn power_checks(rep: &mut CheckReport, cfg: &SuiteConfig, m: i32, seed: u64) -> Result<()> {
    let m = cfg.m.unwrap_or(m);
    let n = cfg.n.unwrap_or(2);
    let generator = match &cfg.generator {
        Some(g) => GeneratorFunction::by_name(g)?,
        None => GeneratorFunction::power(m),
    };
    rep.parameter("n", n);
    rep.parameter("generator", generator.name());
    let chart = annulus(cfg, n, 0.2, 5.0)?;
    record_chart(rep, &chart);
    let candidates = chart.sample(cfg.samples, seed);
    let base = PotentialStructure::flat(&chart)?;
    let (points, excluded) = base.admissible_points(&generator, &candidates)?;
    rep.note("excluded-points", excluded);
    let modified = base.modify(&generator);
    let hh = &modified.hh;
    rep.push(CheckRecord::below(
        "hermitian",
        &hh.hermitian_residual(&points)?,
        cfg.tol(1e-10),
    ));
    hkt_pair(rep, cfg, hh, &points, 1e-8, Expectation::Holds)?;
    let closed = match generator.name() {
        "exp" => Some(base.exp_metric_closed_form()),
        name => name
            .strip_prefix("power-")
            .and_then(|k| k.parse().ok())
            .map(|k| base.power_metric_closed_form(k)),
    };
    if let Some(closed) = closed {
        // entries reach 1e6 for exp, so the comparison is relative
        let diff = Residual::over(&points, |p| {
            let c = closed.eval(p)?;
            Ok((hh.metric().eval(p)? - &c).amax() / c.amax().max(1.0))
        })?;
        rep.push(CheckRecord::below("closed_form", &diff, cfg.tol(1e-10)));
    }
    rep.push(positivity("positive_definite", hh.metric(), &points)?);
    Ok(())
}

/// `φ = 0.3 sin x1 + 0.2 x2 x3 + 0.1 x4^2` on `H^1`, `φ = x1` on `H^2`.
fn conformal_factor(chart: &Chart, n: usize) -> ScalarField {
    if n == 1 {
        ScalarField::new(chart, |p| p[0].sin() * 0.3 + p[1] * p[2] * 0.2 + p[3] * p[3] * 0.1)
    } else {
        ScalarField::coordinate(chart, 0)
    }
}

fn conformal_checks(rep: &mut CheckReport, cfg: &SuiteConfig, n: usize, seed: u64) -> Result<()> {
    rep.parameter("n", n);
    let chart = CoordinateChart::cube(4 * n, 1.0)?;
    record_chart(rep, &chart);
    rep.parameter(
        "factor",
        if n == 1 {
            "exp(0.3 sin x1 + 0.2 x2 x3 + 0.1 x4^2)"
        } else {
            "exp(x1)"
        },
    );
    let points = chart.sample(cfg.samples, seed);
    let flat = HyperHermitianStructure::flat(&chart)?;
    let hh = conformal_change(&flat, &conformal_factor(&chart, n));
    rep.push(CheckRecord::below(
        "hermitian",
        &hh.hermitian_residual(&points)?,
        cfg.tol(1e-10),
    ));
    let expected = if n == 1 { Expectation::Holds } else { Expectation::Fails };
    let tol = if n == 1 { 1e-8 } else { 1e-6 };
    hkt_pair(rep, cfg, &hh, &points, tol, expected)?;
    Ok(())
}

fn reduction_checks(rep: &mut CheckReport, cfg: &SuiteConfig, seed: u64) -> Result<()> {
    let (inner, outer) = (cfg.inner.unwrap_or(0.5), cfg.outer.unwrap_or(3.0));
    let convention = cfg.hermitian_convention;
    rep.parameter("convention", convention.name());
    rep.conventions.insert(
        "hermitian-product".into(),
        match convention {
            crate::reduction::HermitianConvention::ConjugateSecond => "<chi,rho> = sum chi_s conj(rho_s)",
            crate::reduction::HermitianConvention::ConjugateFirst => "<chi,rho> = sum conj(chi_s) rho_s",
        }
        .into(),
    );
    let f6 = flat6_structure(inner, outer)?;
    record_chart(rep, f6.chart());
    let hh = f6.hyper_hermitian();
    let h = f6.structure();
    let nu = su3_moment_map(f6.chart(), convention);
    let act = KillingAction::gamma(FACTOR_DIM);
    let level = sample_level_set(cfg.samples, seed, inner, outer)?;
    let generic = f6.chart().sample(cfg.samples, seed ^ 0x5eed);

    let v = f6.verify(&generic)?;
    rep.push(CheckRecord::below(
        "structure_quaternion",
        &v.quaternion,
        cfg.tol(1e-12),
    ));
    rep.push(CheckRecord::below("structure_nijenhuis", &v.nijenhuis, cfg.tol(1e-10)));
    rep.push(CheckRecord::below("structure_hermitian", &v.hermitian, cfg.tol(1e-10)));
    rep.push(CheckRecord::below("structure_hkt", &v.hkt, cfg.tol(1e-8)));
    for a in 1..=3 {
        let coords = holomorphic_coordinates(f6.chart(), a);
        rep.push(CheckRecord::below(
            &format!("holomorphic_coordinates_i{a}"),
            &holomorphic_coordinate_residual(h, a, &coords, &generic)?,
            cfg.tol(1e-9),
        ));
    }

    rep.push(CheckRecord::below(
        "level_set",
        &Residual::over(&level, |p| nu.level_residual(p))?,
        cfg.tol(1e-12),
    ));
    rep.push(CheckRecord::below(
        "cauchy_riemann",
        &cauchy_riemann_residual(h, &nu, &level)?,
        cfg.tol(1e-9),
    ));
    rep.push(CheckRecord::below(
        "cauchy_riemann_off_level",
        &cauchy_riemann_residual(h, &nu, &generic)?,
        cfg.tol(1e-9),
    ));
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let pairs: Vec<(f64, Vec<f64>)> = generic
        .iter()
        .map(|p| (rng.random_range(0.0..std::f64::consts::TAU), p.clone()))
        .collect();
    rep.push(CheckRecord::below(
        "equivariance",
        &equivariance_residual(&nu, &act, &pairs)?,
        cfg.tol(1e-10),
    ));
    let fd = Residual::over(&generic, |p| Ok(act.field_fd_residual(p, 1e-6)))?;
    rep.push(CheckRecord::below("killing_field", &fd, cfg.tol(1e-6)));
    let iso = Residual::over(&pairs.iter().map(|(_, p)| p.clone()).collect::<Vec<_>>(), |p| {
        let t = pairs
            .iter()
            .find(|(_, q)| q.as_slice() == p)
            .map(|(t, _)| *t)
            .unwrap_or(0.0);
        Ok(act
            .isometry_residual(hh.metric(), t, p)?
            .max(act.commutation_residual(h, t, p)?))
    })?;
    rep.push(CheckRecord::below("action_isometry", &iso, cfg.tol(1e-10)));

    let tr = transversality_check(h, &nu, &act, &level, 1e-6)?;
    rep.push(CheckRecord::above(
        "transversality",
        tr.minimum,
        Some(tr.witness),
        level.len(),
        tr.threshold,
    ));
    let prop = proportionality_check(hh, f6.potential(), &nu, &act, &level)?;
    rep.push(CheckRecord::below("proportionality", &prop.residual, cfg.tol(1e-8)));

    let mut dim_defect = None;
    let mut rank_defect = None;
    let mut stability = Residual::zero();
    let mut orthogonality = Residual::zero();
    let mut quaternion = Residual::zero();
    let mut hermitian = Residual::zero();
    let mut min_eig = (f64::INFINITY, Vec::new());
    for p in &level {
        if rank_defect.is_none() && constraint_rank(h, &nu, p)? != 4 {
            rank_defect = Some(p.clone());
        }
        match horizontal_frame(hh, &nu, &act, p) {
            Ok(fr) => {
                stability = stability.merge(Residual::at(fr.stability, p));
                orthogonality = orthogonality.merge(Residual::at(fr.orthogonality, p));
                quaternion = quaternion.merge(Residual::at(fr.quaternion_residual(), p));
                hermitian = hermitian.merge(Residual::at(fr.hermitian_residual(), p));
                let e = fr.metric_eigenvalues()[0];
                if e < min_eig.0 || e.is_nan() {
                    min_eig = (e, p.clone());
                }
            }
            Err(HktError::RankDeficient { .. }) => {
                if dim_defect.is_none() {
                    dim_defect = Some(p.clone());
                }
            }
            Err(e) => return Err(e),
        }
    }
    rep.parameter("horizontal_dim", HORIZONTAL_DIM);
    rep.push(CheckRecord::flag("horizontal_dim", dim_defect.is_none(), dim_defect));
    rep.push(CheckRecord::flag("constraint_rank", rank_defect.is_none(), rank_defect));
    rep.push(CheckRecord::below("horizontal_stability", &stability, cfg.tol(1e-8)));
    rep.push(CheckRecord::below(
        "horizontal_orthogonality",
        &orthogonality,
        cfg.tol(1e-8),
    ));
    rep.push(CheckRecord::below("induced_quaternion", &quaternion, cfg.tol(1e-8)));
    rep.push(CheckRecord::below("induced_hermitian", &hermitian, cfg.tol(1e-8)));
    let witness = (!min_eig.1.is_empty()).then_some(min_eig.1);
    rep.push(CheckRecord::above(
        "induced_positive",
        min_eig.0,
        witness,
        level.len(),
        0.0,
    ));
    Ok(())
}
