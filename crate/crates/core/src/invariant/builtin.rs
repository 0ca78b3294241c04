//! Built-in compact algebras with root data.

use super::algebra::{parse_algebra, AlgebraDefinition, LieAlgebra, Root, RootSystemData};
use super::exact::Exact;
use super::heisenberg::heisenberg_algebra;
use super::joyce::{build_hypercomplex, joyce_decompose, HomogeneousHypercomplex};
use super::linalg::ExactMatrix;
use crate::error::{HktError, Result};

const SU2: &str = "\
dimension 3
basis H X Y
bracket H X Y 2
bracket H Y X -2
bracket X Y H 2
cartan H
root 2 : X Y
";

pub fn su2() -> AlgebraDefinition {
    parse_algebra(SU2).expect("built-in su(2) is valid")
}

/// su(3) spanned by `h1 = diag(i, 0, -i)`, `h2 = diag(i, -2i, i)` and, for
/// `a < b`, `X_ab = E_ab - E_ba` and `Y_ab = i (E_ab + E_ba)`.
pub fn su3() -> AlgebraDefinition {
    let z = || ExactMatrix::zeros(3, 3);
    let diag = |d: [i64; 3]| {
        let mut m = z();
        for (k, v) in d.into_iter().enumerate() {
            m[(k, k)] = Exact::int(v);
        }
        (z(), m)
    };
    let pairs = [(0, 1), (0, 2), (1, 2)];
    let mut labels = vec!["h1".to_string(), "h2".to_string()];
    let mut basis = vec![diag([1, 0, -1]), diag([1, -2, 1])];
    for &(a, b) in &pairs {
        let mut x = z();
        x[(a, b)] = Exact::one();
        x[(b, a)] = Exact::int(-1);
        let mut y = z();
        y[(a, b)] = Exact::one();
        y[(b, a)] = Exact::one();
        labels.push(format!("X{}{}", a + 1, b + 1));
        labels.push(format!("Y{}{}", a + 1, b + 1));
        basis.push((x, z()));
        basis.push((z(), y));
    }
    let algebra = LieAlgebra::from_matrices(labels, &basis).expect("built-in su(3) is valid");
    let cartan = vec![algebra.basis_vector(0), algebra.basis_vector(1)];
    let h = [[1i64, 0, -1], [1, -2, 1]];
    let roots = pairs
        .iter()
        .enumerate()
        .map(|(k, &(a, b))| Root {
            coords: h.iter().map(|d| Exact::int(d[a] - d[b])).collect(),
            x: algebra.basis_vector(2 + 2 * k),
            y: algebra.basis_vector(3 + 2 * k),
        })
        .collect();
    let roots = RootSystemData::new(&algebra, cartan, roots).expect("built-in su(3) roots are valid");
    AlgebraDefinition {
        algebra,
        roots: Some(roots),
    }
}

/// Built-in algebra by name: `su2`, `su3`, `heisenberg-n1`, `heisenberg-n2`.
pub fn algebra_by_name(name: &str) -> Result<AlgebraDefinition> {
    match name {
        "su2" => Ok(su2()),
        "su3" => Ok(su3()),
        "heisenberg-n1" => Ok(AlgebraDefinition {
            algebra: heisenberg_algebra(1)?,
            roots: None,
        }),
        "heisenberg-n2" => Ok(AlgebraDefinition {
            algebra: heisenberg_algebra(2)?,
            roots: None,
        }),
        other => Err(HktError::UnknownExample(other.to_string())),
    }
}

pub const BUILTIN_ALGEBRAS: [&str; 4] = ["su2", "su3", "heisenberg-n1", "heisenberg-n2"];

/// Decomposition and hypercomplex structure on `T^k x G` for a compact
/// algebra with root data.
pub fn homogeneous_group(def: &AlgebraDefinition) -> Result<HomogeneousHypercomplex> {
    let roots = def
        .roots
        .as_ref()
        .ok_or_else(|| HktError::RootData("algebra has no root data".into()))?;
    build_hypercomplex(&joyce_decompose(&def.algebra, roots)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariant::algebra::is_negative_definite;
    use crate::invariant::forms::d_squared_defect;
    use crate::invariant::joyce::{joyce_decompose, verify_group};
    use crate::invariant::structure::integrability_check_invariant;

    #[test]
    fn su3_killing_form() {
        let def = su3();
        let b = def.algebra.killing_form();
        assert!(is_negative_definite(&b));
        // B(h1, h1) = 6 tr(h1^2) = -12, and distinct root spaces are orthogonal
        assert_eq!(b[(0, 0)], Exact::int(-12));
        assert_eq!(b[(1, 1)], Exact::int(-36));
        for i in 0..8 {
            for j in 0..8 {
                if i != j {
                    assert!(b[(i, j)].is_zero(), "B({i}, {j}) = {}", b[(i, j)]);
                }
            }
        }
    }

    #[test]
    fn su2_decomposition_has_no_complement() {
        let def = su2();
        let dec = joyce_decompose(&def.algebra, def.roots.as_ref().unwrap()).unwrap();
        assert_eq!(dec.dimensions(), vec![(0, 3, 0)]);
        assert!(dec.verify().all_hold());
    }

    #[test]
    fn su3_decomposition_dimensions() {
        let def = su3();
        let dec = joyce_decompose(&def.algebra, def.roots.as_ref().unwrap()).unwrap();
        assert_eq!(dec.dimensions(), vec![(1, 3, 4)]);
        let clauses = dec.verify();
        assert!(clauses.all_hold(), "{clauses:?}");
        assert_eq!(clauses.quaternionic_blocks, Some(vec![1]));
    }

    #[test]
    fn groups_are_exact_hkt() {
        for (def, dim, torus) in [(su2(), 4, 1), (su3(), 8, 0)] {
            let hom = homogeneous_group(&def).unwrap();
            assert_eq!((hom.algebra.dim(), hom.torus_rank), (dim, torus));
            let v = verify_group(&hom).unwrap();
            assert!(v.all_hold(), "{v:?}");
            assert!(v.torsion.kappa.is_some());
            assert!(!v.integrability[1].abelian || dim == 4);
        }
    }

    #[test]
    fn su3_second_structure_is_integrable_not_abelian() {
        let hom = homogeneous_group(&su3()).unwrap();
        let v = integrability_check_invariant(&hom.algebra, hom.structure.i(2));
        assert!(v.integrable());
        assert!(!v.abelian);
    }

    #[test]
    fn builtin_algebras_satisfy_d_squared() {
        for name in BUILTIN_ALGEBRAS {
            let def = algebra_by_name(name).unwrap();
            assert_eq!(d_squared_defect(&def.algebra), None, "{name}");
        }
        assert!(algebra_by_name("so5").is_err());
    }
}
