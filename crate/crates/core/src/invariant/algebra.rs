use super::exact::Exact;
use super::linalg::ExactMatrix;
use crate::error::{HktError, Result};

/// Finite-dimensional real Lie algebra given by exact structure constants
/// `[e_i, e_j] = sum_k c^k_ij e_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct LieAlgebra {
    labels: Vec<String>,
    structure: Vec<Exact>,
}

impl LieAlgebra {
    /// Checks antisymmetry and the Jacobi identity exactly.
    pub fn new(labels: Vec<String>, structure: Vec<Exact>) -> Result<Self> {
        let n = labels.len();
        if structure.len() != n * n * n {
            return Err(HktError::InvalidAlgebra(format!(
                "{} structure constants for dimension {n}",
                structure.len()
            )));
        }
        let alg = LieAlgebra { labels, structure };
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if alg.c(i, j, k) != &-alg.c(j, i, k) {
                        return Err(HktError::InvalidAlgebra(format!(
                            "bracket [{}, {}] is not antisymmetric",
                            alg.labels[i], alg.labels[j]
                        )));
                    }
                }
            }
        }
        if let Some((i, j, k)) = alg.jacobi_defect() {
            return Err(HktError::InvalidAlgebra(format!(
                "Jacobi identity fails on ({}, {}, {})",
                alg.labels[i], alg.labels[j], alg.labels[k]
            )));
        }
        Ok(alg)
    }

    /// Builds from entries `[e_i, e_j] += c e_k`; the `[e_j, e_i]` entries
    /// are filled in by antisymmetry.
    pub fn from_brackets(labels: Vec<String>, entries: &[(usize, usize, usize, Exact)]) -> Result<Self> {
        let n = labels.len();
        let mut structure = vec![Exact::zero(); n * n * n];
        for (i, j, k, c) in entries {
            if *i >= n || *j >= n || *k >= n {
                return Err(HktError::InvalidAlgebra(format!(
                    "index out of range in [{i}, {j}] -> {k}"
                )));
            }
            if i == j {
                if !c.is_zero() {
                    return Err(HktError::InvalidAlgebra(format!(
                        "nonzero self-bracket of {}",
                        labels[*i]
                    )));
                }
                continue;
            }
            structure[(i * n + j) * n + k] += c;
            structure[(j * n + i) * n + k] -= c;
        }
        Self::new(labels, structure)
    }

    pub fn abelian(labels: Vec<String>) -> Self {
        let n = labels.len();
        LieAlgebra {
            labels,
            structure: vec![Exact::zero(); n * n * n],
        }
    }

    /// Algebra spanned by complex matrices `re + i im`, with brackets the
    /// matrix commutator expressed in the given basis.
    pub fn from_matrices(labels: Vec<String>, basis: &[(ExactMatrix, ExactMatrix)]) -> Result<Self> {
        let flat = |(re, im): &(ExactMatrix, ExactMatrix)| -> Vec<Exact> {
            let n = re.rows();
            let mut v = Vec::with_capacity(2 * n * n);
            for i in 0..n {
                for j in 0..n {
                    v.push(re[(i, j)].clone());
                    v.push(im[(i, j)].clone());
                }
            }
            v
        };
        let columns: Vec<Vec<Exact>> = basis.iter().map(flat).collect();
        let size = columns[0].len();
        let system = ExactMatrix::from_columns(size, &columns);
        if system.rank() != basis.len() {
            return Err(HktError::InvalidAlgebra("matrix basis is linearly dependent".into()));
        }
        let n = basis.len();
        let mut structure = vec![Exact::zero(); n * n * n];
        for i in 0..n {
            for j in 0..n {
                let (a, b) = &basis[i];
                let (c, d) = &basis[j];
                let re = a.mul(c).sub(&b.mul(d)).sub(&c.mul(a).sub(&d.mul(b)));
                let im = a.mul(d).add(&b.mul(c)).sub(&c.mul(b).add(&d.mul(a)));
                let coords = system.solve(&flat(&(re, im))).ok_or_else(|| {
                    HktError::InvalidAlgebra(format!("span is not closed under [{}, {}]", labels[i], labels[j]))
                })?;
                for (k, x) in coords.into_iter().enumerate() {
                    structure[(i * n + j) * n + k] = x;
                }
            }
        }
        Self::new(labels, structure)
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// `c^k_ij`.
    pub fn c(&self, i: usize, j: usize, k: usize) -> &Exact {
        let n = self.dim();
        &self.structure[(i * n + j) * n + k]
    }

    pub fn basis_vector(&self, i: usize) -> Vec<Exact> {
        let mut v = vec![Exact::zero(); self.dim()];
        v[i] = Exact::one();
        v
    }

    pub fn bracket(&self, u: &[Exact], v: &[Exact]) -> Vec<Exact> {
        let n = self.dim();
        let mut out = vec![Exact::zero(); n];
        for (i, ui) in u.iter().enumerate() {
            if ui.is_zero() {
                continue;
            }
            for (j, vj) in v.iter().enumerate() {
                if vj.is_zero() {
                    continue;
                }
                let uv = ui * vj;
                for (k, o) in out.iter_mut().enumerate() {
                    let c = self.c(i, j, k);
                    if !c.is_zero() {
                        *o += &uv * c;
                    }
                }
            }
        }
        out
    }

    /// Matrix of `ad x`, column `j` being `[x, e_j]`.
    pub fn ad(&self, x: &[Exact]) -> ExactMatrix {
        let n = self.dim();
        let cols: Vec<Vec<Exact>> = (0..n).map(|j| self.bracket(x, &self.basis_vector(j))).collect();
        ExactMatrix::from_columns(n, &cols)
    }

    pub fn jacobi_defect(&self) -> Option<(usize, usize, usize)> {
        let n = self.dim();
        let e: Vec<Vec<Exact>> = (0..n).map(|i| self.basis_vector(i)).collect();
        for i in 0..n {
            for j in i + 1..n {
                let ij = self.bracket(&e[i], &e[j]);
                for k in j + 1..n {
                    let a = self.bracket(&ij, &e[k]);
                    let b = self.bracket(&self.bracket(&e[j], &e[k]), &e[i]);
                    let c = self.bracket(&self.bracket(&e[k], &e[i]), &e[j]);
                    if a.iter().zip(&b).zip(&c).any(|((x, y), z)| !(x + y + z).is_zero()) {
                        return Some((i, j, k));
                    }
                }
            }
        }
        None
    }

    pub fn is_abelian(&self) -> bool {
        self.structure.iter().all(Exact::is_zero)
    }

    /// `B(x, y) = tr(ad x ad y)` on basis vectors.
    pub fn killing_form(&self) -> ExactMatrix {
        let n = self.dim();
        let ads: Vec<ExactMatrix> = (0..n).map(|i| self.ad(&self.basis_vector(i))).collect();
        let mut b = ExactMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let p = ads[i].mul(&ads[j]);
                let tr: Exact = (0..n).map(|k| p[(k, k)].clone()).sum();
                b[(i, j)] = tr.clone();
                b[(j, i)] = tr;
            }
        }
        b
    }

    pub fn direct_sum(&self, other: &LieAlgebra) -> LieAlgebra {
        let (n, m) = (self.dim(), other.dim());
        let t = n + m;
        let mut structure = vec![Exact::zero(); t * t * t];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    structure[(i * t + j) * t + k] = self.c(i, j, k).clone();
                }
            }
        }
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    structure[((n + i) * t + n + j) * t + n + k] = other.c(i, j, k).clone();
                }
            }
        }
        let labels = self.labels.iter().chain(&other.labels).cloned().collect();
        LieAlgebra { labels, structure }
    }

    /// Same algebra in a new basis, given as coordinate vectors in the old one.
    pub fn change_basis(&self, labels: Vec<String>, basis: &[Vec<Exact>]) -> Result<LieAlgebra> {
        let n = self.dim();
        if basis.len() != n || labels.len() != n {
            return Err(HktError::DimensionMismatch {
                expected: n,
                found: basis.len(),
            });
        }
        let p = ExactMatrix::from_columns(n, basis);
        let inv = p
            .inverse()
            .ok_or_else(|| HktError::InvalidAlgebra("new basis is linearly dependent".into()))?;
        let mut structure = vec![Exact::zero(); n * n * n];
        for i in 0..n {
            for j in 0..n {
                let coords = inv.apply(&self.bracket(&basis[i], &basis[j]));
                for (k, x) in coords.into_iter().enumerate() {
                    structure[(i * n + j) * n + k] = x;
                }
            }
        }
        Ok(LieAlgebra { labels, structure })
    }

    /// Structure constants with one symbol per label, as `(i, j, k, c)` with
    /// `i < j` and `c` nonzero.
    pub fn bracket_entries(&self) -> Vec<(usize, usize, usize, Exact)> {
        let n = self.dim();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                for k in 0..n {
                    let c = self.c(i, j, k);
                    if !c.is_zero() {
                        out.push((i, j, k, c.clone()));
                    }
                }
            }
        }
        out
    }

    /// Replaces `[e_i, e_j]` by `scale * [e_i, e_j]`. Used to build
    /// deliberately broken variants; the Jacobi identity is not rechecked.
    pub fn with_scaled_bracket(&self, i: usize, j: usize, scale: &Exact) -> LieAlgebra {
        let n = self.dim();
        let mut out = self.clone();
        for k in 0..n {
            out.structure[(i * n + j) * n + k] = self.c(i, j, k) * scale;
            out.structure[(j * n + i) * n + k] = self.c(j, i, k) * scale;
        }
        out
    }
}

/// `(-1)^k` times the `k`-th leading principal minor is positive for every `k`.
pub fn is_negative_definite(m: &ExactMatrix) -> bool {
    let n = m.rows();
    (1..=n).all(|k| {
        let minor = ExactMatrix::from_fn(k, k, |i, j| m[(i, j)].clone());
        let s = minor.determinant().signum();
        if k % 2 == 1 {
            s < 0
        } else {
            s > 0
        }
    })
}

/// One positive root of a compact algebra: with `h_k` the Cartan basis,
/// `[h_k, x] = α_k y` and `[h_k, y] = -α_k x`.
#[derive(Clone, Debug, PartialEq)]
pub struct Root {
    pub coords: Vec<Exact>,
    pub x: Vec<Exact>,
    pub y: Vec<Exact>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RootSystemData {
    /// Cartan subalgebra basis, as coordinate vectors.
    pub cartan: Vec<Vec<Exact>>,
    /// Positive roots, sorted decreasing in the lexicographic order.
    pub roots: Vec<Root>,
}

impl RootSystemData {
    /// Checks the root relations exactly, flips roots to be lexicographically
    /// positive and sorts them.
    pub fn new(alg: &LieAlgebra, cartan: Vec<Vec<Exact>>, roots: Vec<Root>) -> Result<Self> {
        for (a, h) in cartan.iter().enumerate() {
            for h2 in &cartan[a + 1..] {
                if !alg.bracket(h, h2).iter().all(Exact::is_zero) {
                    return Err(HktError::RootData("Cartan basis is not abelian".into()));
                }
            }
        }
        let mut out = Vec::with_capacity(roots.len());
        for mut r in roots {
            if r.coords.len() != cartan.len() {
                return Err(HktError::RootData(format!(
                    "root has {} coordinates for rank {}",
                    r.coords.len(),
                    cartan.len()
                )));
            }
            for (h, a) in cartan.iter().zip(&r.coords) {
                let hx = alg.bracket(h, &r.x);
                let hy = alg.bracket(h, &r.y);
                let ok_x = hx.iter().zip(&r.y).all(|(u, v)| u == &(a * v));
                let ok_y = hy.iter().zip(&r.x).all(|(u, v)| u == &-(a * v));
                if !ok_x || !ok_y {
                    return Err(HktError::RootData(format!(
                        "root {:?} does not act on its root vectors as declared",
                        r.coords
                    )));
                }
            }
            match r.coords.iter().map(Exact::signum).find(|s| *s != 0) {
                None => return Err(HktError::RootData("zero root".into())),
                Some(-1) => {
                    r.coords = r.coords.iter().map(|c| -c).collect();
                    r.y = r.y.iter().map(|c| -c).collect();
                }
                _ => {}
            }
            out.push(r);
        }
        out.sort_by(|a, b| lex_cmp(&b.coords, &a.coords));
        for w in out.windows(2) {
            if w[0].coords == w[1].coords {
                return Err(HktError::RootData(
                    "repeated root; refine the ordering or the root data".into(),
                ));
            }
        }
        Ok(RootSystemData { cartan, roots: out })
    }

    pub fn rank(&self) -> usize {
        self.cartan.len()
    }
}

pub(crate) fn lex_cmp(a: &[Exact], b: &[Exact]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y) {
            Some(std::cmp::Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    std::cmp::Ordering::Equal
}

/// An algebra read from the text format, with optional root data.
#[derive(Clone, Debug)]
pub struct AlgebraDefinition {
    pub algebra: LieAlgebra,
    pub roots: Option<RootSystemData>,
}

/// Parses the line-based algebra format:
///
/// ```text
/// # comment
/// dimension 3
/// basis H X Y
/// bracket H X Y 2        # [H, X] = 2 Y
/// cartan H
/// root 2 : X Y           # [H, X] = 2 Y, [H, Y] = -2 X
/// ```
///
/// Basis elements may be referred to by label or by zero-based index, and
/// coefficients are rationals such as `-3/2`.
pub fn parse_algebra(text: &str) -> Result<AlgebraDefinition> {
    let mut dimension = None;
    let mut labels: Option<Vec<String>> = None;
    let mut entries = Vec::new();
    let mut cartan = Vec::new();
    let mut roots = Vec::new();
    let mut seen_cartan = false;
    for (no, raw) in text.lines().enumerate() {
        let line_no = no + 1;
        let err = |what: String| HktError::Parse { line: line_no, what };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut words = line.split_whitespace();
        let key = words.next().unwrap_or_default();
        let rest: Vec<&str> = words.collect();
        let index = |tok: &str, labels: &Option<Vec<String>>| -> Result<usize> {
            let labels = labels
                .as_ref()
                .ok_or_else(|| err("`basis` must come before use".into()))?;
            labels
                .iter()
                .position(|l| l == tok)
                .or_else(|| tok.parse::<usize>().ok().filter(|i| *i < labels.len()))
                .ok_or_else(|| err(format!("unknown basis element `{tok}`")))
        };
        match key {
            "dimension" => {
                let [n] = rest[..] else {
                    return Err(err("expected `dimension <n>`".into()));
                };
                dimension = Some(n.parse::<usize>().map_err(|e| err(e.to_string()))?);
            }
            "basis" => {
                if rest.is_empty() {
                    return Err(err("empty basis".into()));
                }
                labels = Some(rest.iter().map(|s| s.to_string()).collect());
            }
            "bracket" => {
                let [i, j, k, c] = rest[..] else {
                    return Err(err("expected `bracket <i> <j> <k> <coefficient>`".into()));
                };
                let c: Exact = c.parse().map_err(err)?;
                entries.push((index(i, &labels)?, index(j, &labels)?, index(k, &labels)?, c));
            }
            "cartan" => {
                for tok in &rest {
                    cartan.push(index(tok, &labels)?);
                }
                seen_cartan = true;
            }
            "root" => {
                let sep = rest
                    .iter()
                    .position(|t| *t == ":")
                    .ok_or_else(|| err("expected `root <coords> : <x> <y>`".into()))?;
                let coords = rest[..sep]
                    .iter()
                    .map(|t| t.parse::<Exact>().map_err(err))
                    .collect::<Result<Vec<_>>>()?;
                let [x, y] = rest[sep + 1..] else {
                    return Err(err("a root needs exactly two root vectors".into()));
                };
                roots.push((coords, index(x, &labels)?, index(y, &labels)?));
            }
            other => return Err(err(format!("unknown directive `{other}`"))),
        }
    }
    let labels = labels.ok_or_else(|| HktError::Parse {
        line: 0,
        what: "missing `basis`".into(),
    })?;
    if let Some(n) = dimension {
        if n != labels.len() {
            return Err(HktError::Parse {
                line: 0,
                what: format!("dimension {n} but {} basis elements", labels.len()),
            });
        }
    }
    let algebra = LieAlgebra::from_brackets(labels, &entries)?;
    let roots = if seen_cartan || !roots.is_empty() {
        let e = |i: usize| algebra.basis_vector(i);
        let cartan = cartan.into_iter().map(e).collect();
        let roots = roots
            .into_iter()
            .map(|(coords, x, y)| Root {
                coords,
                x: e(x),
                y: e(y),
            })
            .collect();
        Some(RootSystemData::new(&algebra, cartan, roots)?)
    } else {
        None
    };
    Ok(AlgebraDefinition { algebra, roots })
}

/// Writes an algebra (and root data whose vectors are basis elements) in the
/// text format read by [`parse_algebra`].
pub fn format_algebra(alg: &LieAlgebra) -> String {
    let mut out = format!("dimension {}\nbasis {}\n", alg.dim(), alg.labels().join(" "));
    for (i, j, k, c) in alg.bracket_entries() {
        out.push_str(&format!(
            "bracket {} {} {} {}\n",
            alg.labels()[i],
            alg.labels()[j],
            alg.labels()[k],
            c
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SU2: &str = "\
# su(2) in the basis used for the sp(1) normalization
dimension 3
basis H X Y
bracket H X Y 2
bracket H Y X -2
bracket X Y H 2
cartan H
root 2 : X Y
";

    #[test]
    fn su2_killing_form_is_minus_eight() {
        let def = parse_algebra(SU2).unwrap();
        let b = def.algebra.killing_form();
        assert_eq!(b, ExactMatrix::identity(3).scale(&Exact::int(-8)));
        assert!(is_negative_definite(&b));
        assert_eq!(def.roots.unwrap().roots.len(), 1);
    }

    #[test]
    fn abelian_killing_form_vanishes() {
        let a = LieAlgebra::abelian(vec!["a".into(), "b".into()]);
        assert!(a.killing_form().is_zero());
        assert!(!is_negative_definite(&a.killing_form()));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad = "basis A B\nbracket A C A 1\n";
        assert!(matches!(parse_algebra(bad), Err(HktError::Parse { line: 2, .. })));
        let jacobi = "basis A B C\nbracket A B A 1\nbracket B C B 1\nbracket A C C 1\n";
        assert!(matches!(parse_algebra(jacobi), Err(HktError::InvalidAlgebra(_))));
        assert!(matches!(
            parse_algebra("dimension 2\nbasis A\n"),
            Err(HktError::Parse { .. })
        ));
        let wrong_root = "basis H X Y\nbracket H X Y 2\nbracket H Y X -2\nbracket X Y H 2\ncartan H\nroot 1 : X Y\n";
        assert!(matches!(parse_algebra(wrong_root), Err(HktError::RootData(_))));
    }

    #[test]
    fn format_round_trip() {
        let def = parse_algebra(SU2).unwrap();
        let again = parse_algebra(&format_algebra(&def.algebra)).unwrap();
        assert_eq!(again.algebra, def.algebra);
    }

    #[test]
    fn negative_roots_are_flipped() {
        let text = "basis H X Y\nbracket H X Y 2\nbracket H Y X -2\nbracket X Y H 2\ncartan H\nroot -2 : Y X\n";
        let roots = parse_algebra(text).unwrap().roots.unwrap();
        assert_eq!(roots.roots[0].coords, vec![Exact::int(2)]);
        assert_eq!(roots.roots[0].y, vec![Exact::zero(), Exact::int(-1), Exact::zero()]);
    }
}
