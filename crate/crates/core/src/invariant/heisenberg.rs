//! The 2-step nilpotent algebra `h_{2n} + R^3` with its abelian
//! hypercomplex structure.

use super::algebra::LieAlgebra;
use super::exact::Exact;
use super::forms::d_squared_defect;
use super::linalg::ExactMatrix;
use super::structure::{
    hkt_identity, holomorphic_20_defect, integrability_check_invariant, is_hyper_hermitian, type_11_defect, HktVerdict,
    IntegrabilityVerdict, InvariantHypercomplex, LinearComplexStructure,
};
use crate::error::{HktError, Result};

/// Basis order `X_1..X_2n, Y_1..Y_2n, Z, E_1, E_2, E_3`.
struct Layout {
    n: usize,
}

impl Layout {
    fn x(&self, i: usize) -> usize {
        i - 1
    }
    fn y(&self, i: usize) -> usize {
        2 * self.n + i - 1
    }
    fn z(&self) -> usize {
        4 * self.n
    }
    fn e(&self, a: usize) -> usize {
        4 * self.n + a
    }
    fn dim(&self) -> usize {
        4 * self.n + 4
    }
}

fn layout(n: usize) -> Result<Layout> {
    if n == 0 {
        return Err(HktError::InvalidAlgebra("Heisenberg index n must be at least 1".into()));
    }
    Ok(Layout { n })
}

/// `[X_i, Y_i] = Z`, with the first bracket multiplied by `first_scale`.
pub fn heisenberg_algebra_scaled(n: usize, first_scale: Exact) -> Result<LieAlgebra> {
    let l = layout(n)?;
    let mut labels: Vec<String> = (1..=2 * n).map(|i| format!("X{i}")).collect();
    labels.extend((1..=2 * n).map(|i| format!("Y{i}")));
    labels.push("Z".into());
    labels.extend((1..=3).map(|a| format!("E{a}")));
    let entries: Vec<_> = (1..=2 * n)
        .map(|i| {
            let c = if i == 1 { first_scale.clone() } else { Exact::one() };
            (l.x(i), l.y(i), l.z(), c)
        })
        .collect();
    LieAlgebra::from_brackets(labels, &entries)
}

pub fn heisenberg_algebra(n: usize) -> Result<LieAlgebra> {
    heisenberg_algebra_scaled(n, Exact::one())
}

/// `I1: X_{2i-1} -> Y_{2i-1}, X_{2i} -> -Y_{2i}, Z -> E_1, E_2 -> E_3` and
/// `I2: X_{2i-1} -> X_{2i}, Y_{2i-1} -> Y_{2i}, Z -> E_2, E_3 -> E_1`,
/// with `I3 = I1 I2`.
pub fn heisenberg_structure(n: usize) -> Result<InvariantHypercomplex> {
    let l = layout(n)?;
    let mut t1 = Vec::new();
    let mut t2 = Vec::new();
    for i in 1..=n {
        let (odd, even) = (2 * i - 1, 2 * i);
        t1.push((l.x(odd), l.y(odd), 1));
        t1.push((l.x(even), l.y(even), -1));
        t2.push((l.x(odd), l.x(even), 1));
        t2.push((l.y(odd), l.y(even), 1));
    }
    t1.extend([(l.z(), l.e(1), 1), (l.e(2), l.e(3), 1)]);
    t2.extend([(l.z(), l.e(2), 1), (l.e(3), l.e(1), 1)]);
    InvariantHypercomplex::from_pair(
        LinearComplexStructure::from_table(l.dim(), &t1)?,
        LinearComplexStructure::from_table(l.dim(), &t2)?,
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct NilmanifoldReport {
    pub dim: usize,
    pub quaternion_relations: bool,
    pub hyper_hermitian: bool,
    pub integrability: [IntegrabilityVerdict; 3],
    /// Per structure, the first covector whose (1,0) lift has a differential
    /// outside `Λ^{1,1}`.
    pub type_11_defect: [Option<usize>; 3],
    /// Per structure, the first pair of (1,0) covectors whose wedge is not
    /// `∂`-closed.
    pub holomorphic_20_defect: [Option<(usize, usize)>; 3],
    pub hkt: HktVerdict,
    pub d_squared_zero: bool,
}

impl NilmanifoldReport {
    pub fn all_hold(&self) -> bool {
        self.quaternion_relations
            && self.hyper_hermitian
            && self.integrability.iter().all(|v| v.integrable() && v.abelian)
            && self.type_11_defect.iter().all(Option::is_none)
            && self.holomorphic_20_defect.iter().all(Option::is_none)
            && self.hkt.holds
            && self.d_squared_zero
    }
}

/// Exact checks for an algebra with a hypercomplex structure and the metric
/// making the basis orthonormal.
pub fn nilmanifold_report(alg: &LieAlgebra, h: &InvariantHypercomplex) -> NilmanifoldReport {
    let metric = ExactMatrix::identity(alg.dim());
    NilmanifoldReport {
        dim: alg.dim(),
        quaternion_relations: h.quaternion_defect().is_none(),
        hyper_hermitian: is_hyper_hermitian(&metric, h),
        integrability: [1, 2, 3].map(|a| integrability_check_invariant(alg, h.i(a))),
        type_11_defect: [1, 2, 3].map(|a| type_11_defect(alg, h.i(a))),
        holomorphic_20_defect: [1, 2, 3].map(|a| holomorphic_20_defect(alg, h.i(a))),
        hkt: hkt_identity(alg, &metric, h),
        d_squared_zero: d_squared_defect(alg).is_none(),
    }
}

pub fn heisenberg_hkt(n: usize) -> Result<NilmanifoldReport> {
    Ok(nilmanifold_report(&heisenberg_algebra(n)?, &heisenberg_structure(n)?))
}

/// The same checks with `[X_1, Y_1] = 2Z` and the structure left unchanged.
pub fn corrupted_heisenberg_hkt(n: usize) -> Result<NilmanifoldReport> {
    Ok(nilmanifold_report(
        &heisenberg_algebra_scaled(n, Exact::int(2))?,
        &heisenberg_structure(n)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariant::forms::InvariantForm;

    #[test]
    fn central_covector_differential_matches_bracket() {
        let alg = heisenberg_algebra(1).unwrap();
        let dz = InvariantForm::basis_covector(8, 4).d(&alg);
        assert_eq!(dz.component(&[0, 2]), Exact::int(-1));
        assert_eq!(dz.component(&[1, 3]), Exact::int(-1));
        assert!(InvariantForm::basis_covector(8, 0).d(&alg).is_zero());
    }

    #[test]
    fn heisenberg_structures_are_abelian_and_hkt() {
        for n in [1, 2] {
            let r = heisenberg_hkt(n).unwrap();
            assert_eq!(r.dim, 4 * n + 4);
            assert!(r.all_hold(), "{r:?}");
        }
    }

    #[test]
    fn corrupted_bracket_is_flagged() {
        let r = corrupted_heisenberg_hkt(1).unwrap();
        assert!(r.quaternion_relations);
        assert!(!r.integrability[1].abelian);
        assert!(r.type_11_defect[1].is_some());
        assert!(!r.hkt.holds);
        assert_eq!(r.holomorphic_20_defect[0], None);
        assert!(r.holomorphic_20_defect[1].is_some());
    }

    #[test]
    fn zero_index_is_rejected() {
        assert!(heisenberg_algebra(0).is_err());
    }
}
