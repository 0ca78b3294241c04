//! Inductive sp(1) decomposition of a compact semisimple algebra and the
//! left-invariant hypercomplex structure it carries on `T^k x G`.

use super::algebra::{is_negative_definite, LieAlgebra, RootSystemData};
use super::exact::Exact;
use super::forms::InvariantForm;
use super::linalg::ExactMatrix;
use super::structure::{
    hkt_identity, integrability_check_invariant, is_hyper_hermitian, HktVerdict, IntegrabilityVerdict,
    InvariantHypercomplex, LinearComplexStructure,
};
use crate::chart::IndexSpace;
use crate::error::{HktError, Result};

/// Basis `(H, X, Y)` of an sp(1) subalgebra with
/// `[H, X] = 2Y`, `[H, Y] = -2X`, `[X, Y] = 2H`.
#[derive(Clone, Debug, PartialEq)]
pub struct Sp1Triple {
    pub h: Vec<Exact>,
    pub x: Vec<Exact>,
    pub y: Vec<Exact>,
}

impl Sp1Triple {
    pub fn vectors(&self) -> [&Vec<Exact>; 3] {
        [&self.h, &self.x, &self.y]
    }

    pub fn check(&self, alg: &LieAlgebra) -> bool {
        let two = Exact::int(2);
        let scaled = |v: &[Exact], c: &Exact| v.iter().map(|x| x * c).collect::<Vec<_>>();
        alg.bracket(&self.h, &self.x) == scaled(&self.y, &two)
            && alg.bracket(&self.h, &self.y) == scaled(&self.x, &-two.clone())
            && alg.bracket(&self.x, &self.y) == scaled(&self.h, &two)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct JoyceBlock {
    /// The maximal root that produced this block.
    pub root: Vec<Exact>,
    pub triple: Sp1Triple,
    /// Real root vectors spanning the complement on which the block acts.
    pub f: Vec<Vec<Exact>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct JoyceDecomposition {
    pub algebra: LieAlgebra,
    pub cartan: Vec<Vec<Exact>>,
    /// Abelian remainder.
    pub b: Vec<Vec<Exact>>,
    pub blocks: Vec<JoyceBlock>,
}

fn coordinates_in(span: &[Vec<Exact>], v: &[Exact]) -> Option<Vec<Exact>> {
    ExactMatrix::from_columns(v.len(), span).solve(v)
}

fn in_span(span: &[Vec<Exact>], v: &[Exact]) -> bool {
    v.iter().all(Exact::is_zero) || (!span.is_empty() && coordinates_in(span, v).is_some())
}

fn is_zero_vec(v: &[Exact]) -> bool {
    v.iter().all(Exact::is_zero)
}

/// `β(h)` for `h` in the span of the Cartan basis.
fn root_value(cartan: &[Vec<Exact>], coords: &[Exact], h: &[Exact]) -> Result<Exact> {
    let c = coordinates_in(cartan, h)
        .ok_or_else(|| HktError::RootData("bracket of root vectors leaves the Cartan subalgebra".into()))?;
    Ok(c.iter().zip(coords).map(|(a, b)| a * b).sum())
}

pub fn joyce_decompose(alg: &LieAlgebra, roots: &RootSystemData) -> Result<JoyceDecomposition> {
    let cartan = roots.cartan.clone();
    let mut current_cartan = cartan.clone();
    let mut remaining = roots.roots.clone();
    let mut blocks = Vec::new();
    while let Some(top) = remaining.first().cloned() {
        // remaining is kept sorted, so the first root is maximal
        let h0 = alg.bracket(&top.x, &top.y);
        let s = root_value(&cartan, &top.coords, &h0)?;
        if s.signum() <= 0 {
            return Err(HktError::Decomposition(format!(
                "root {:?} pairs nonpositively with its coroot; the algebra is not compact",
                top.coords
            )));
        }
        let two = Exact::int(2);
        let h: Vec<Exact> = h0.iter().map(|v| &(v * &two) / &s).collect();
        let t = (&Exact::int(4) / &s)
            .sqrt()
            .ok_or_else(|| HktError::Normalization(format!("4/{s} has no exact square root")))?;
        let triple = Sp1Triple {
            h: h.clone(),
            x: top.x.iter().map(|v| v * &t).collect(),
            y: top.y.iter().map(|v| v * &t).collect(),
        };
        if !triple.check(alg) {
            return Err(HktError::Normalization(format!(
                "triple for root {:?} fails the sp(1) relations after rescaling",
                top.coords
            )));
        }
        let mut f = Vec::new();
        let mut next = Vec::new();
        for r in &remaining[1..] {
            if root_value(&cartan, &r.coords, &h)?.is_zero() {
                next.push(r.clone());
            } else {
                f.push(r.x.clone());
                f.push(r.y.clone());
            }
        }
        // kernel of the root on the current Cartan part
        let row: Vec<Exact> = current_cartan
            .iter()
            .map(|c| root_value(&cartan, &top.coords, c))
            .collect::<Result<_>>()?;
        let kernel = ExactMatrix::from_fn(1, row.len(), |_, j| row[j].clone()).kernel();
        current_cartan = kernel
            .iter()
            .map(|k| {
                let mut v = vec![Exact::zero(); alg.dim()];
                for (c, basis) in k.iter().zip(&current_cartan) {
                    for (o, b) in v.iter_mut().zip(basis) {
                        *o += &(c * b);
                    }
                }
                v
            })
            .collect();
        blocks.push(JoyceBlock {
            root: top.coords.clone(),
            triple,
            f,
        });
        remaining = next;
    }
    let total = current_cartan.len() + blocks.iter().map(|b| 3 + b.f.len()).sum::<usize>();
    if total != alg.dim() {
        return Err(HktError::Decomposition(format!(
            "summands have total dimension {total}, algebra has {}",
            alg.dim()
        )));
    }
    Ok(JoyceDecomposition {
        algebra: alg.clone(),
        cartan,
        b: current_cartan,
        blocks,
    })
}

/// Outcome of the five structural clauses and Killing orthogonality.
#[derive(Clone, Debug, PartialEq)]
pub struct JoyceClauses {
    pub abelian_and_sp1: bool,
    pub contains_cartan: bool,
    pub centralizes: bool,
    pub preserves_f: bool,
    /// Number of 4-dimensional invariant blocks per `f_j`, when every `f_j`
    /// splits into them.
    pub quaternionic_blocks: Option<Vec<usize>>,
    pub killing_orthogonal: bool,
}

impl JoyceClauses {
    pub fn all_hold(&self) -> bool {
        self.abelian_and_sp1
            && self.contains_cartan
            && self.centralizes
            && self.preserves_f
            && self.quaternionic_blocks.is_some()
            && self.killing_orthogonal
    }
}

impl JoyceDecomposition {
    pub fn n(&self) -> usize {
        self.blocks.len()
    }

    pub fn rank(&self) -> usize {
        self.cartan.len()
    }

    /// `(dim b, dim ∂_j, dim f_j)` for each block.
    pub fn dimensions(&self) -> Vec<(usize, usize, usize)> {
        self.blocks.iter().map(|b| (self.b.len(), 3, b.f.len())).collect()
    }

    fn block_basis(&self, j: usize) -> Vec<Vec<Exact>> {
        self.blocks[j].triple.vectors().into_iter().cloned().collect()
    }

    /// `b_k = b + sum_{j > k} (∂_j + f_j)` (0-based `k` means after block `k`).
    fn tail(&self, k: usize) -> Vec<Vec<Exact>> {
        let mut out = self.b.clone();
        for j in k + 1..self.n() {
            out.extend(self.block_basis(j));
            out.extend(self.blocks[j].f.iter().cloned());
        }
        out
    }

    /// Irreducible 4-dimensional pieces of `f_j` under `ρ(q) = [φ_j(q), ·]`.
    pub fn quaternionic_blocks(&self, j: usize) -> Option<Vec<Vec<Vec<Exact>>>> {
        let alg = &self.algebra;
        let block = &self.blocks[j];
        let f = &block.f;
        if f.len() % 4 != 0 {
            return None;
        }
        let act = |q: &Vec<Exact>, v: &Vec<Exact>| alg.bracket(q, v);
        for v in f {
            let hh = act(&block.triple.h, &act(&block.triple.h, v));
            if hh.iter().zip(v).any(|(a, b)| a != &-b) {
                return None;
            }
        }
        let mut pieces: Vec<Vec<Vec<Exact>>> = Vec::new();
        let mut covered: Vec<Vec<Exact>> = Vec::new();
        for v in f {
            if in_span(&covered, v) {
                continue;
            }
            let piece = vec![
                v.clone(),
                act(&block.triple.h, v),
                act(&block.triple.x, v),
                act(&block.triple.y, v),
            ];
            let mut all = covered.clone();
            all.extend(piece.iter().cloned());
            if ExactMatrix::from_columns(alg.dim(), &all).rank() != covered.len() + 4 {
                return None;
            }
            covered = all;
            pieces.push(piece);
        }
        Some(pieces)
    }

    pub fn verify(&self) -> JoyceClauses {
        let alg = &self.algebra;
        let abelian = self
            .b
            .iter()
            .all(|u| self.b.iter().all(|v| is_zero_vec(&alg.bracket(u, v))));
        let sp1 = self.blocks.iter().all(|b| b.triple.check(alg));

        let mut small: Vec<Vec<Exact>> = self.b.clone();
        for j in 0..self.n() {
            small.extend(self.block_basis(j));
        }
        let contains_cartan = self.cartan.iter().all(|h| in_span(&small, h));

        let centralizes = (0..self.n()).all(|j| {
            (j..self.n()).all(|k| {
                self.tail(k)
                    .iter()
                    .all(|u| self.block_basis(j).iter().all(|v| is_zero_vec(&alg.bracket(u, v))))
            })
        });

        let preserves_f = self.blocks.iter().all(|b| {
            b.triple
                .vectors()
                .into_iter()
                .all(|q| b.f.iter().all(|v| in_span(&b.f, &alg.bracket(q, v))))
        });

        let quaternionic_blocks = (0..self.n())
            .map(|j| self.quaternionic_blocks(j).map(|p| p.len()))
            .collect::<Option<Vec<_>>>();

        let killing = alg.killing_form();
        let form = |u: &[Exact], v: &[Exact]| -> Exact {
            let kv = killing.apply(v);
            u.iter().zip(&kv).map(|(a, b)| a * b).sum()
        };
        let mut summands: Vec<Vec<Vec<Exact>>> = vec![self.b.clone()];
        for j in 0..self.n() {
            summands.push(self.block_basis(j));
            summands.push(self.blocks[j].f.clone());
        }
        let mut killing_orthogonal = true;
        for a in 0..summands.len() {
            for b in a + 1..summands.len() {
                for u in &summands[a] {
                    for v in &summands[b] {
                        if !form(u, v).is_zero() {
                            killing_orthogonal = false;
                        }
                    }
                }
            }
        }

        JoyceClauses {
            abelian_and_sp1: abelian && sp1,
            contains_cartan,
            centralizes,
            preserves_f,
            quaternionic_blocks,
            killing_orthogonal,
        }
    }
}

/// The extended algebra `k u(1) + g` with its left-invariant hypercomplex
/// structure and extended Killing form.
#[derive(Clone, Debug)]
pub struct HomogeneousHypercomplex {
    pub algebra: LieAlgebra,
    pub structure: InvariantHypercomplex,
    /// `B̂`, negative definite.
    pub extended_killing: ExactMatrix,
    /// Number of adjoined `u(1)` summands.
    pub torus_rank: usize,
    /// Index range of the original algebra inside the new basis.
    pub algebra_dim: usize,
    /// `λ_j^2 = -B(H_j, H_j)`.
    pub lambda_sq: Vec<Exact>,
    /// The change of basis: column `c` is new basis vector `c` in the
    /// coordinates of `g + R^k`.
    pub basis: ExactMatrix,
}

/// Left multiplication by `i`, `j`, `k` on `1, i, j, k` as `(from, to, sign)`.
const QUATERNION_LEFT: [[(usize, usize, i64); 2]; 3] =
    [[(0, 1, 1), (2, 3, 1)], [(0, 2, 1), (3, 1, 1)], [(0, 3, 1), (1, 2, 1)]];

pub fn build_hypercomplex(dec: &JoyceDecomposition) -> Result<HomogeneousHypercomplex> {
    let alg = &dec.algebra;
    let n = dec.n();
    let r = dec.rank();
    let g_dim = alg.dim();
    if 2 * n < r {
        return Err(HktError::Decomposition(format!("{n} blocks for rank {r}")));
    }
    let torus_rank = 2 * n - r;
    let killing = alg.killing_form();
    let bform = |u: &[Exact], v: &[Exact]| -> Exact {
        let kv = killing.apply(v);
        u.iter().zip(&kv).map(|(a, b)| a * b).sum()
    };
    let lambda_sq: Vec<Exact> = dec.blocks.iter().map(|b| -bform(&b.triple.h, &b.triple.h)).collect();
    let total = g_dim + torus_rank;
    let lift = |v: &[Exact]| {
        let mut out = v.to_vec();
        out.resize(total, Exact::zero());
        out
    };

    // B-orthogonal basis of b, each vector scaled to B(E_j, E_j) = -λ_j^2
    let mut ortho: Vec<Vec<Exact>> = Vec::new();
    for v in &dec.b {
        let mut w = v.clone();
        for u in &ortho {
            let c = &bform(v, u) / &bform(u, u);
            for (a, b) in w.iter_mut().zip(u) {
                *a -= &(&c * b);
            }
        }
        ortho.push(w);
    }
    let mut es: Vec<Vec<Exact>> = Vec::with_capacity(n);
    for (j, w) in ortho.iter().enumerate() {
        let ratio = &lambda_sq[j] / &-bform(w, w);
        let s = ratio
            .sqrt()
            .ok_or_else(|| HktError::Normalization(format!("scale {ratio} has no exact square root")))?;
        es.push(lift(&w.iter().map(|x| x * &s).collect::<Vec<_>>()));
    }
    for t in 0..torus_rank {
        let mut e = vec![Exact::zero(); total];
        e[g_dim + t] = Exact::one();
        es.push(e);
    }

    let mut labels = Vec::with_capacity(total);
    let mut columns = Vec::with_capacity(total);
    let mut block_ranges = Vec::with_capacity(n);
    for (j, block) in dec.blocks.iter().enumerate() {
        let start = columns.len();
        labels.extend([
            format!("E{}", j + 1),
            format!("H{}", j + 1),
            format!("X{}", j + 1),
            format!("Y{}", j + 1),
        ]);
        columns.push(es[j].clone());
        for v in block.triple.vectors() {
            columns.push(lift(v));
        }
        for (m, v) in block.f.iter().enumerate() {
            labels.push(format!("F{}_{}", j + 1, m + 1));
            columns.push(lift(v));
        }
        block_ranges.push((start, columns.len()));
    }
    let big = alg.direct_sum(&LieAlgebra::abelian(
        (0..torus_rank).map(|t| format!("U{}", t + 1)).collect(),
    ));
    let extended = big.change_basis(labels, &columns)?;

    let mut mats = [0, 1, 2].map(|_| ExactMatrix::zeros(total, total));
    for (j, &(start, end)) in block_ranges.iter().enumerate() {
        for (a, table) in QUATERNION_LEFT.iter().enumerate() {
            for &(from, to, sign) in table {
                mats[a][(start + to, start + from)] = Exact::int(sign);
                mats[a][(start + from, start + to)] = Exact::int(-sign);
            }
            // ρ(ι_a) = [φ_j(ι_a), ·] on f_j
            let q = extended.basis_vector(start + 1 + a);
            for c in start + 4..end {
                let image = extended.bracket(&q, &extended.basis_vector(c));
                for (row, x) in image.into_iter().enumerate() {
                    if !x.is_zero() && !(start + 4..end).contains(&row) {
                        return Err(HktError::Decomposition(format!(
                            "block {} does not preserve its complement",
                            j + 1
                        )));
                    }
                    mats[a][(row, c)] = x;
                }
            }
        }
    }
    let [m1, m2, m3] = mats;
    let structure = InvariantHypercomplex::new(
        LinearComplexStructure::new(m1)?,
        LinearComplexStructure::new(m2)?,
        LinearComplexStructure::new(m3)?,
    )?;

    let mut b_ext = ExactMatrix::zeros(total, total);
    for i in 0..g_dim {
        for j in 0..g_dim {
            b_ext[(i, j)] = killing[(i, j)].clone();
        }
    }
    for t in 0..torus_rank {
        let j = ortho.len() + t;
        b_ext[(g_dim + t, g_dim + t)] = -lambda_sq[j].clone();
    }
    let p = ExactMatrix::from_columns(total, &columns);
    let extended_killing = p.transpose().mul(&b_ext).mul(&p);
    Ok(HomogeneousHypercomplex {
        algebra: extended,
        structure,
        extended_killing,
        torus_rank,
        algebra_dim: g_dim,
        lambda_sq,
        basis: p,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroupVerdict {
    pub quaternion_relations: bool,
    pub integrability: [IntegrabilityVerdict; 3],
    pub negative_definite: bool,
    pub hyper_hermitian: bool,
    /// `B̂` restricted to `g` equals the Killing form.
    pub restricts_to_killing: bool,
    pub hkt: HktVerdict,
    pub torsion: TorsionVerdict,
}

impl GroupVerdict {
    pub fn all_hold(&self) -> bool {
        self.quaternion_relations
            && self.integrability.iter().all(IntegrabilityVerdict::integrable)
            && self.negative_definite
            && self.hyper_hermitian
            && self.restricts_to_killing
            && self.hkt.holds
            && self.torsion.antisymmetric
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TorsionVerdict {
    pub antisymmetric: bool,
    /// `c = κ (-1/2 d_1 F_1)`, when both vanish or `κ` is the same on
    /// every component.
    pub kappa: Option<Exact>,
}

/// Total antisymmetry of `c(X, Y, Z) = -B̂([X, Y], Z)` and its exact ratio to
/// `-1/2 d_1 F_1` of the metric `-B̂`.
pub fn group_torsion_check(
    alg: &LieAlgebra,
    extended_killing: &ExactMatrix,
    h: &InvariantHypercomplex,
) -> Result<TorsionVerdict> {
    let n = alg.dim();
    let c = |i: usize, j: usize, k: usize| -> Exact {
        let br = alg.bracket(&alg.basis_vector(i), &alg.basis_vector(j));
        -(0..n).map(|m| &br[m] * &extended_killing[(m, k)]).sum::<Exact>()
    };
    let mut antisymmetric = true;
    let mut table = vec![Exact::zero(); n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                table[(i * n + j) * n + k] = c(i, j, k);
            }
        }
    }
    let at = |i: usize, j: usize, k: usize| &table[(i * n + j) * n + k];
    'outer: for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if at(i, j, k) != &-at(j, i, k) || at(i, j, k) != &-at(i, k, j) {
                    antisymmetric = false;
                    break 'outer;
                }
            }
        }
    }
    let metric = extended_killing.scale(&Exact::int(-1));
    let j1 = h.i(1).matrix();
    let tau = InvariantForm::kahler(&metric, j1)
        .d_c(alg, j1)
        .scale(&Exact::ratio(-1, 2));
    let mut kappa: Option<Exact> = None;
    for (r, idx) in IndexSpace::get(n).combos(3).iter().enumerate() {
        let cv = at(idx[0], idx[1], idx[2]);
        let tv = tau.components().nth(r).map(|(_, v)| v.clone()).unwrap_or_default();
        match (cv.is_zero(), tv.is_zero()) {
            (true, true) => continue,
            (false, false) => {
                let ratio = cv / &tv;
                match &kappa {
                    None => kappa = Some(ratio),
                    Some(k) if *k == ratio => {}
                    Some(k) => {
                        return Err(HktError::InconsistentTorsion(format!(
                            "ratio {ratio} on {idx:?} differs from {k}"
                        )))
                    }
                }
            }
            _ => {
                return Err(HktError::InconsistentTorsion(format!(
                    "component {idx:?} vanishes on one side only"
                )))
            }
        }
    }
    Ok(TorsionVerdict { antisymmetric, kappa })
}

/// All exact checks on a homogeneous hypercomplex group.
pub fn verify_group(hom: &HomogeneousHypercomplex) -> Result<GroupVerdict> {
    let alg = &hom.algebra;
    let h = &hom.structure;
    let metric = hom.extended_killing.scale(&Exact::int(-1));
    let integrability = [1, 2, 3].map(|a| integrability_check_invariant(alg, h.i(a)));
    // B̂ on g, read back through the change of basis
    let inv = hom.basis.inverse().expect("basis is invertible");
    let killing_back = inv.transpose().mul(&hom.extended_killing).mul(&inv);
    let g_dim = hom.algebra_dim;
    let original = hom.original_killing();
    let restricts_to_killing = (0..g_dim).all(|i| (0..g_dim).all(|j| killing_back[(i, j)] == original[(i, j)]));
    Ok(GroupVerdict {
        quaternion_relations: h.quaternion_defect().is_none(),
        integrability,
        negative_definite: is_negative_definite(&hom.extended_killing),
        hyper_hermitian: is_hyper_hermitian(&metric, h),
        restricts_to_killing,
        hkt: hkt_identity(alg, &metric, h),
        torsion: group_torsion_check(alg, &hom.extended_killing, h)?,
    })
}

impl HomogeneousHypercomplex {
    /// Killing form of `g` in its original basis, recomputed from the
    /// extended algebra.
    fn original_killing(&self) -> ExactMatrix {
        let g_dim = self.algebra_dim;
        let inv = self.basis.inverse().expect("basis is invertible");
        // brackets of the original basis vectors, computed in the new basis
        let total = self.algebra.dim();
        let olds: Vec<Vec<Exact>> = (0..g_dim)
            .map(|i| {
                let mut e = vec![Exact::zero(); total];
                e[i] = Exact::one();
                inv.apply(&e)
            })
            .collect();
        let ads: Vec<ExactMatrix> = olds.iter().map(|v| self.algebra.ad(v)).collect();
        ExactMatrix::from_fn(g_dim, g_dim, |i, j| {
            let p = ads[i].mul(&ads[j]);
            (0..total).map(|k| p[(k, k)].clone()).sum()
        })
    }
}
