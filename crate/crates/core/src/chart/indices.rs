use std::sync::OnceLock;

/// Strictly increasing multi-indices over `0..dim`, grouped by length, with a
/// constant-time rank lookup by bitmask.
#[derive(Debug)]
pub struct IndexSpace {
    dim: usize,
    combos: Vec<Vec<Vec<usize>>>,
    rank: Vec<u32>,
}

static SPACES: [OnceLock<IndexSpace>; IndexSpace::MAX_DIM + 1] = [const { OnceLock::new() }; IndexSpace::MAX_DIM + 1];

impl IndexSpace {
    pub const MAX_DIM: usize = 16;
    pub const MAX_DEGREE: usize = 4;

    pub fn get(dim: usize) -> &'static IndexSpace {
        assert!(dim <= Self::MAX_DIM, "dimension {dim} exceeds {}", Self::MAX_DIM);
        SPACES[dim].get_or_init(|| Self::build(dim))
    }

    fn build(dim: usize) -> IndexSpace {
        let top = dim.min(Self::MAX_DEGREE + 1);
        let mut combos = vec![Vec::new(); top + 1];
        let mut rank = vec![u32::MAX; 1 << dim];
        for (k, list) in combos.iter_mut().enumerate() {
            let mut current = Vec::with_capacity(k);
            fill(dim, k, 0, &mut current, list);
            for (r, c) in list.iter().enumerate() {
                rank[mask_of(c)] = r as u32;
            }
        }
        IndexSpace { dim, combos, rank }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn combos(&self, degree: usize) -> &[Vec<usize>] {
        if degree > self.dim {
            return &[];
        }
        &self.combos[degree]
    }

    pub fn count(&self, degree: usize) -> usize {
        self.combos.get(degree).map_or(0, Vec::len)
    }

    #[inline]
    pub fn rank_of_mask(&self, mask: usize) -> usize {
        self.rank[mask] as usize
    }

    /// Rank of a strictly increasing index list.
    pub fn rank(&self, sorted: &[usize]) -> usize {
        self.rank_of_mask(sorted.iter().fold(0, |m, &i| m | (1 << i)))
    }
}

fn fill(dim: usize, k: usize, start: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if current.len() == k {
        out.push(current.clone());
        return;
    }
    for i in start..dim {
        current.push(i);
        fill(dim, k, i + 1, current, out);
        current.pop();
    }
}

fn mask_of(indices: &[usize]) -> usize {
    indices.iter().fold(0, |m, &i| m | (1 << i))
}

/// Sign of the permutation sorting `indices`, or `0` if an index repeats.
pub fn permutation_sign(indices: &[usize]) -> i32 {
    let mut sign = 1;
    for a in 0..indices.len() {
        for b in (a + 1)..indices.len() {
            if indices[a] == indices[b] {
                return 0;
            }
            if indices[a] > indices[b] {
                sign = -sign;
            }
        }
    }
    sign
}
