//! Constant complex and hypercomplex structures on a Lie algebra and the
//! exact verdicts built on them.

use super::algebra::LieAlgebra;
use super::exact::Exact;
use super::forms::InvariantForm;
use super::linalg::ExactMatrix;
use crate::chart::IndexSpace;
use crate::error::{HktError, Result};

/// A constant endomorphism `I` with `I^2 = -Id`; column `c` is `I e_c`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearComplexStructure(ExactMatrix);

impl LinearComplexStructure {
    pub fn new(m: ExactMatrix) -> Result<Self> {
        let n = m.rows();
        if m.cols() != n {
            return Err(HktError::DimensionMismatch {
                expected: n,
                found: m.cols(),
            });
        }
        if m.mul(&m).add(&ExactMatrix::identity(n)) != ExactMatrix::zeros(n, n) {
            return Err(HktError::InvalidAlgebra("endomorphism does not square to -Id".into()));
        }
        Ok(LinearComplexStructure(m))
    }

    /// From a table `e_from -> sign * e_to`, completed by `I^2 = -Id`.
    pub fn from_table(dim: usize, table: &[(usize, usize, i64)]) -> Result<Self> {
        let mut m = ExactMatrix::zeros(dim, dim);
        for &(from, to, sign) in table {
            m[(to, from)] = Exact::int(sign);
            m[(from, to)] = Exact::int(-sign);
        }
        Self::new(m)
    }

    pub fn matrix(&self) -> &ExactMatrix {
        &self.0
    }

    pub fn apply(&self, v: &[Exact]) -> Vec<Exact> {
        self.0.apply(v)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntegrabilityVerdict {
    /// First basis pair `(i, j)` with `N(e_i, e_j) != 0`.
    pub nijenhuis_witness: Option<(usize, usize)>,
    /// `[IX, IY] = [X, Y]` on all basis pairs.
    pub abelian: bool,
}

impl IntegrabilityVerdict {
    pub fn integrable(&self) -> bool {
        self.nijenhuis_witness.is_none()
    }
}

/// `N(X, Y) = 1/4 ([X, Y] + I[IX, Y] + I[X, IY] - [IX, IY])` on basis pairs.
pub fn nijenhuis_invariant(alg: &LieAlgebra, i: &LinearComplexStructure, x: &[Exact], y: &[Exact]) -> Vec<Exact> {
    let ix = i.apply(x);
    let iy = i.apply(y);
    let a = alg.bracket(x, y);
    let b = i.apply(&alg.bracket(&ix, y));
    let c = i.apply(&alg.bracket(x, &iy));
    let d = alg.bracket(&ix, &iy);
    let q = Exact::ratio(1, 4);
    (0..x.len()).map(|k| &(&a[k] + &b[k] + &c[k] - &d[k]) * &q).collect()
}

pub fn integrability_check_invariant(alg: &LieAlgebra, i: &LinearComplexStructure) -> IntegrabilityVerdict {
    let n = alg.dim();
    let mut witness = None;
    let mut abelian = true;
    for a in 0..n {
        for b in a + 1..n {
            let (x, y) = (alg.basis_vector(a), alg.basis_vector(b));
            if witness.is_none() && !nijenhuis_invariant(alg, i, &x, &y).iter().all(Exact::is_zero) {
                witness = Some((a, b));
            }
            if abelian && alg.bracket(&i.apply(&x), &i.apply(&y)) != alg.bracket(&x, &y) {
                abelian = false;
            }
        }
    }
    IntegrabilityVerdict {
        nijenhuis_witness: witness,
        abelian,
    }
}

/// Three constant complex structures with `I1 I2 = I3 = -I2 I1`.
#[derive(Clone, Debug, PartialEq)]
pub struct InvariantHypercomplex {
    structures: [LinearComplexStructure; 3],
}

impl InvariantHypercomplex {
    pub fn new(i1: LinearComplexStructure, i2: LinearComplexStructure, i3: LinearComplexStructure) -> Result<Self> {
        let h = InvariantHypercomplex {
            structures: [i1, i2, i3],
        };
        if let Some(what) = h.quaternion_defect() {
            return Err(HktError::InvalidAlgebra(what));
        }
        Ok(h)
    }

    /// `I3 = I1 I2`.
    pub fn from_pair(i1: LinearComplexStructure, i2: LinearComplexStructure) -> Result<Self> {
        let i3 = LinearComplexStructure::new(i1.matrix().mul(i2.matrix()))?;
        Self::new(i1, i2, i3)
    }

    /// Description of the first failing quaternion relation.
    pub fn quaternion_defect(&self) -> Option<String> {
        let [a, b, c] = self.structures.each_ref().map(LinearComplexStructure::matrix);
        let n = a.rows();
        let minus = ExactMatrix::identity(n).scale(&Exact::int(-1));
        for (k, m) in [a, b, c].iter().enumerate() {
            if m.mul(m) != minus {
                return Some(format!("I{} does not square to -Id", k + 1));
            }
        }
        if a.mul(b) != *c {
            return Some("I1 I2 != I3".into());
        }
        if b.mul(a) != c.scale(&Exact::int(-1)) {
            return Some("I2 I1 != -I3".into());
        }
        None
    }

    /// `I_a` for `a` in 1..=3.
    pub fn i(&self, a: usize) -> &LinearComplexStructure {
        &self.structures[a - 1]
    }

    pub fn dim(&self) -> usize {
        self.structures[0].matrix().rows()
    }
}

/// `g(IX, IY) = g(X, Y)` for all three structures.
pub fn is_hyper_hermitian(metric: &ExactMatrix, h: &InvariantHypercomplex) -> bool {
    (1..=3).all(|a| {
        let m = h.i(a).matrix();
        m.transpose().mul(metric).mul(m) == *metric
    })
}

/// `d_a F_a` for the three Kähler forms of `metric`.
pub fn twisted_kahler_differentials(
    alg: &LieAlgebra,
    metric: &ExactMatrix,
    h: &InvariantHypercomplex,
) -> [InvariantForm; 3] {
    [1, 2, 3].map(|a| {
        let j = h.i(a).matrix();
        InvariantForm::kahler(metric, j).d_c(alg, j)
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct HktVerdict {
    pub twisted: [InvariantForm; 3],
    pub holds: bool,
}

/// Exact check of `d1 F1 = d2 F2 = d3 F3`.
pub fn hkt_identity(alg: &LieAlgebra, metric: &ExactMatrix, h: &InvariantHypercomplex) -> HktVerdict {
    let twisted = twisted_kahler_differentials(alg, metric, h);
    let holds = twisted[0] == twisted[1] && twisted[1] == twisted[2];
    HktVerdict { twisted, holds }
}

/// First basis covector `e^k` for which `d` of the (1,0)-form
/// `e^k + i I e^k` has a (2,0) or (0,2) part.
pub fn type_11_defect(alg: &LieAlgebra, i: &LinearComplexStructure) -> Option<usize> {
    let n = alg.dim();
    (0..n).find(|&k| {
        let e = InvariantForm::basis_covector(n, k);
        let parts = [e.d(alg), e.apply_j(i.matrix()).d(alg)];
        parts.iter().any(|p| p.apply_j(i.matrix()) != *p)
    })
}

/// First pair `(a, b)` for which the (2,0)-form `θ_a ∧ θ_b` with
/// `θ_k = e^k + i I e^k` has a nonzero (3,0) part of its differential, which
/// is `∂` of the form.
pub fn holomorphic_20_defect(alg: &LieAlgebra, i: &LinearComplexStructure) -> Option<(usize, usize)> {
    let n = alg.dim();
    let j = i.matrix();
    let theta: Vec<(InvariantForm, InvariantForm)> = (0..n)
        .map(|k| {
            let e = InvariantForm::basis_covector(n, k);
            let ie = e.apply_j(j);
            (e, ie)
        })
        .collect();
    // (1,0)-vectors e_p - i I e_p
    let z: Vec<(Vec<Exact>, Vec<Exact>)> = (0..n)
        .map(|p| {
            let e = alg.basis_vector(p);
            let ie: Vec<Exact> = i.apply(&e).iter().map(|x| -x).collect();
            (e, ie)
        })
        .collect();
    let triples = IndexSpace::get(n).combos(3);
    for a in 0..n {
        for b in a + 1..n {
            let (ra, ia) = &theta[a];
            let (rb, ib) = &theta[b];
            let re = ra.wedge(rb).and_then(|x| x.sub(&ia.wedge(ib)?)).expect("1-forms");
            let im = ra.wedge(ib).and_then(|x| x.add(&ia.wedge(rb)?)).expect("1-forms");
            if re.is_zero() && im.is_zero() {
                continue;
            }
            let (dre, dim) = (re.d(alg), im.d(alg));
            if dre.is_zero() && dim.is_zero() {
                continue;
            }
            for t in triples {
                let args: Vec<_> = t.iter().map(|&p| z[p].clone()).collect();
                let (r1, i1) = dre.eval_complex(&args);
                let (r2, i2) = dim.eval_complex(&args);
                if !(&r1 - &i2).is_zero() || !(&i1 + &r2).is_zero() {
                    return Some((a, b));
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_complex_structure() {
        let m = ExactMatrix::identity(2);
        assert!(LinearComplexStructure::new(m).is_err());
    }

    #[test]
    fn constant_structure_on_abelian_algebra() {
        let alg = LieAlgebra::abelian((0..4).map(|i| format!("e{i}")).collect());
        let i = LinearComplexStructure::from_table(4, &[(0, 1, 1), (2, 3, 1)]).unwrap();
        let v = integrability_check_invariant(&alg, &i);
        assert!(v.integrable() && v.abelian);
        assert_eq!(type_11_defect(&alg, &i), None);
        assert_eq!(holomorphic_20_defect(&alg, &i), None);
    }

    #[test]
    fn flipped_structure_breaks_quaternion_relations() {
        let i1 = LinearComplexStructure::from_table(4, &[(0, 1, 1), (2, 3, 1)]).unwrap();
        let i2 = LinearComplexStructure::from_table(4, &[(0, 2, 1), (1, 3, -1)]).unwrap();
        let h = InvariantHypercomplex::from_pair(i1.clone(), i2.clone()).unwrap();
        let flipped = LinearComplexStructure::new(h.i(3).matrix().scale(&Exact::int(-1))).unwrap();
        assert!(InvariantHypercomplex::new(i1, i2, flipped).is_err());
        assert!(is_hyper_hermitian(&ExactMatrix::identity(4), &h));
    }
}
