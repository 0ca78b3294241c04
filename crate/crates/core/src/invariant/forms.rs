//! Left-invariant forms: exact components on increasing basis multi-indices,
//! with `ω_J = ω(e_j1, ..., e_jk)`, the determinant wedge, and the
//! Chevalley–Eilenberg differential.

use super::algebra::LieAlgebra;
use super::exact::Exact;
use super::linalg::ExactMatrix;
use crate::chart::{permutation_sign, IndexSpace};
use crate::error::{HktError, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct InvariantForm {
    dim: usize,
    degree: usize,
    comps: Vec<Exact>,
}

/// Sorts `indices` in place; returns the sign of the sorting permutation, or
/// zero on a repeated index.
fn sort_with_sign(indices: &mut [usize]) -> i32 {
    let sign = permutation_sign(indices);
    if sign != 0 {
        indices.sort_unstable();
    }
    sign
}

impl InvariantForm {
    pub fn zero(dim: usize, degree: usize) -> Self {
        let count = IndexSpace::get(dim).count(degree);
        InvariantForm {
            dim,
            degree,
            comps: vec![Exact::zero(); count],
        }
    }

    /// `c` times the dual basis covector `e^i`.
    pub fn basis_covector(dim: usize, i: usize) -> Self {
        let mut f = Self::zero(dim, 1);
        f.comps[i] = Exact::one();
        f
    }

    pub fn scalar(dim: usize, c: Exact) -> Self {
        InvariantForm {
            dim,
            degree: 0,
            comps: vec![c],
        }
    }

    /// Form with the given components on increasing index tuples.
    pub fn from_components(dim: usize, degree: usize, entries: &[(Vec<usize>, Exact)]) -> Self {
        let mut f = Self::zero(dim, degree);
        for (idx, c) in entries {
            let mut idx = idx.clone();
            let s = sort_with_sign(&mut idx);
            if s != 0 {
                let r = IndexSpace::get(dim).rank(&idx);
                f.comps[r] += &(c * &Exact::int(s as i64));
            }
        }
        f
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn components(&self) -> impl Iterator<Item = (&[usize], &Exact)> {
        IndexSpace::get(self.dim)
            .combos(self.degree)
            .iter()
            .map(|c| c.as_slice())
            .zip(&self.comps)
    }

    /// Component on an arbitrary index tuple.
    pub fn component(&self, indices: &[usize]) -> Exact {
        let mut idx = indices.to_vec();
        let s = sort_with_sign(&mut idx);
        if s == 0 {
            return Exact::zero();
        }
        let c = &self.comps[IndexSpace::get(self.dim).rank(&idx)];
        if s > 0 {
            c.clone()
        } else {
            -c
        }
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(Exact::is_zero)
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.degree != other.degree {
            return Err(HktError::DegreeMismatch {
                expected: self.degree,
                found: other.degree,
            });
        }
        if self.dim != other.dim {
            return Err(HktError::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(InvariantForm {
            comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a + b).collect(),
            ..self.clone()
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(InvariantForm {
            comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a - b).collect(),
            ..self.clone()
        })
    }

    pub fn scale(&self, c: &Exact) -> Self {
        InvariantForm {
            comps: self.comps.iter().map(|a| a * c).collect(),
            ..self.clone()
        }
    }

    /// `ω(v_1, ..., v_k)`, expanded multilinearly over the nonzero entries.
    pub fn eval(&self, vectors: &[Vec<Exact>]) -> Exact {
        assert_eq!(vectors.len(), self.degree, "wrong number of arguments");
        let mut total = Exact::zero();
        let mut idx = Vec::with_capacity(self.degree);
        self.expand(vectors, &mut idx, Exact::one(), &mut total);
        total
    }

    fn expand(&self, vectors: &[Vec<Exact>], idx: &mut Vec<usize>, weight: Exact, total: &mut Exact) {
        let depth = idx.len();
        if depth == vectors.len() {
            let c = self.component(idx);
            if !c.is_zero() {
                *total += &(&weight * &c);
            }
            return;
        }
        for (i, x) in vectors[depth].iter().enumerate() {
            if x.is_zero() || idx.contains(&i) {
                continue;
            }
            idx.push(i);
            self.expand(vectors, idx, &weight * x, total);
            idx.pop();
        }
    }

    /// Value on complex vectors `re + i im`, returned as (re, im).
    pub fn eval_complex(&self, vectors: &[(Vec<Exact>, Vec<Exact>)]) -> (Exact, Exact) {
        let k = vectors.len();
        let (mut re, mut im) = (Exact::zero(), Exact::zero());
        for mask in 0..(1usize << k) {
            let args: Vec<Vec<Exact>> = (0..k)
                .map(|a| {
                    if mask >> a & 1 == 1 {
                        vectors[a].1.clone()
                    } else {
                        vectors[a].0.clone()
                    }
                })
                .collect();
            let v = self.eval(&args);
            if v.is_zero() {
                continue;
            }
            // i^(number of imaginary slots)
            match mask.count_ones() % 4 {
                0 => re += &v,
                1 => im += &v,
                2 => re -= &v,
                _ => im -= &v,
            }
        }
        (re, im)
    }

    pub fn wedge(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(HktError::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let (k, l) = (self.degree, other.degree);
        let mut out = Self::zero(self.dim, k + l);
        for (a, x) in self.components() {
            if x.is_zero() {
                continue;
            }
            for (b, y) in other.components() {
                if y.is_zero() {
                    continue;
                }
                let mut idx: Vec<usize> = a.iter().chain(b).copied().collect();
                let s = sort_with_sign(&mut idx);
                if s == 0 {
                    continue;
                }
                let r = IndexSpace::get(self.dim).rank(&idx);
                out.comps[r] += &(x * y * Exact::int(s as i64));
            }
        }
        Ok(out)
    }

    /// Chevalley–Eilenberg differential
    /// `dω(X_0..X_k) = sum_{i<j} (-1)^{i+j} ω([X_i, X_j], X_0, ..^i..^j.., X_k)`.
    pub fn d(&self, alg: &LieAlgebra) -> Self {
        assert_eq!(alg.dim(), self.dim, "form and algebra dimensions differ");
        let k = self.degree;
        let mut out = Self::zero(self.dim, k + 1);
        if k == 0 {
            return out;
        }
        let combos = IndexSpace::get(self.dim).combos(k + 1);
        for (r, idx) in combos.iter().enumerate() {
            let mut total = Exact::zero();
            for i in 0..=k {
                for j in i + 1..=k {
                    let rest: Vec<usize> = (0..=k).filter(|&m| m != i && m != j).map(|m| idx[m]).collect();
                    let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
                    for t in 0..self.dim {
                        let c = alg.c(idx[i], idx[j], t);
                        if c.is_zero() {
                            continue;
                        }
                        let mut args = Vec::with_capacity(k);
                        args.push(t);
                        args.extend_from_slice(&rest);
                        let w = self.component(&args);
                        if w.is_zero() {
                            continue;
                        }
                        let term = c * &w;
                        if sign > 0 {
                            total += &term;
                        } else {
                            total -= &term;
                        }
                    }
                }
            }
            out.comps[r] = total;
        }
        out
    }

    /// `(Jω)(X_1..X_k) = (-1)^k ω(JX_1, .., JX_k)` for a matrix whose column
    /// `c` is the image of `e_c`.
    pub fn apply_j(&self, j: &ExactMatrix) -> Self {
        let k = self.degree;
        let images: Vec<Vec<Exact>> = (0..self.dim).map(|c| j.column(c)).collect();
        let sign = Exact::int(if k % 2 == 0 { 1 } else { -1 });
        let mut out = Self::zero(self.dim, k);
        for (r, idx) in IndexSpace::get(self.dim).combos(k).iter().enumerate() {
            let args: Vec<Vec<Exact>> = idx.iter().map(|&c| images[c].clone()).collect();
            out.comps[r] = &sign * &self.eval(&args);
        }
        out
    }

    /// `(-1)^k J d J ω`.
    pub fn d_c(&self, alg: &LieAlgebra, j: &ExactMatrix) -> Self {
        let out = self.apply_j(j).d(alg).apply_j(j);
        if self.degree % 2 == 0 {
            out
        } else {
            out.scale(&Exact::int(-1))
        }
    }

    /// `F(X, Y) = g(JX, Y)`.
    pub fn kahler(metric: &ExactMatrix, j: &ExactMatrix) -> Self {
        let n = metric.rows();
        let jg = j.transpose().mul(metric);
        let mut out = Self::zero(n, 2);
        for (r, idx) in IndexSpace::get(n).combos(2).iter().enumerate() {
            out.comps[r] = jg[(idx[0], idx[1])].clone();
        }
        out
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.comps.iter().map(Exact::to_f64).collect()
    }
}

/// First basis 1- or 2-form `ω` (degree, index) with `d d ω != 0`.
pub fn d_squared_defect(alg: &LieAlgebra) -> Option<(usize, usize)> {
    let n = alg.dim();
    for degree in 1..=2 {
        for (r, idx) in IndexSpace::get(n).combos(degree).iter().enumerate() {
            let f = InvariantForm::from_components(n, degree, &[(idx.clone(), Exact::one())]);
            if !f.d(alg).d(alg).is_zero() {
                return Some((degree, r));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariant::algebra::parse_algebra;

    fn heisenberg() -> LieAlgebra {
        parse_algebra("basis X Y Z E1 E2 E3\nbracket X Y Z 1\n")
            .unwrap()
            .algebra
    }

    #[test]
    fn central_covector_differential() {
        let alg = heisenberg();
        let dz = InvariantForm::basis_covector(6, 2).d(&alg);
        let expected = InvariantForm::basis_covector(6, 0)
            .wedge(&InvariantForm::basis_covector(6, 1))
            .unwrap()
            .scale(&Exact::int(-1));
        assert_eq!(dz, expected);
        assert!(InvariantForm::basis_covector(6, 0).d(&alg).is_zero());
    }

    #[test]
    fn wedge_is_graded_antisymmetric() {
        let a = InvariantForm::basis_covector(4, 1);
        let b = InvariantForm::basis_covector(4, 3);
        let ab = a.wedge(&b).unwrap();
        assert_eq!(ab, b.wedge(&a).unwrap().scale(&Exact::int(-1)));
        assert_eq!(ab.component(&[3, 1]), Exact::int(-1));
        assert!(a.wedge(&a).unwrap().is_zero());
    }

    #[test]
    fn complex_evaluation() {
        let a = InvariantForm::basis_covector(2, 0);
        let b = InvariantForm::basis_covector(2, 1);
        let w = a.wedge(&b).unwrap();
        // (e0 + i e1, e0 - i e1) -> -2i
        let z = (vec![Exact::one(), Exact::zero()], vec![Exact::zero(), Exact::one()]);
        let zbar = (z.0.clone(), vec![Exact::zero(), Exact::int(-1)]);
        assert_eq!(w.eval_complex(&[z, zbar]), (Exact::zero(), Exact::int(-2)));
    }

    #[test]
    fn degree_mismatch() {
        let a = InvariantForm::basis_covector(3, 0);
        let w = a.wedge(&InvariantForm::basis_covector(3, 1)).unwrap();
        assert!(matches!(a.add(&w), Err(HktError::DegreeMismatch { .. })));
    }
}
