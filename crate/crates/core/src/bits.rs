//! Small helpers for packed bit rows (`u64` words, bit `i` lives in word `i / 64`).

#[inline]
pub(crate) fn words_for(bits: usize) -> usize {
    bits.div_ceil(64)
}

#[inline]
pub(crate) fn get(row: &[u64], i: usize) -> bool {
    (row[i >> 6] >> (i & 63)) & 1 == 1
}

#[inline]
pub(crate) fn set(row: &mut [u64], i: usize, value: bool) {
    let mask = 1u64 << (i & 63);
    if value {
        row[i >> 6] |= mask;
    } else {
        row[i >> 6] &= !mask;
    }
}

#[inline]
pub(crate) fn flip(row: &mut [u64], i: usize) {
    row[i >> 6] ^= 1u64 << (i & 63);
}

#[inline]
pub(crate) fn popcount(row: &[u64]) -> u32 {
    row.iter().map(|w| w.count_ones()).sum()
}

#[inline]
pub(crate) fn and_popcount(a: &[u64], b: &[u64]) -> u32 {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones()).sum()
}

#[inline]
pub(crate) fn is_zero(row: &[u64]) -> bool {
    row.iter().all(|&w| w == 0)
}

#[inline]
pub(crate) fn xor_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= s;
    }
}

/// Iterates the indices of set bits in ascending order.
pub(crate) fn ones(row: &[u64]) -> impl Iterator<Item = usize> + '_ {
    row.iter().enumerate().flat_map(|(wi, &w)| {
        let mut w = w;
        std::iter::from_fn(move || {
            if w == 0 {
                None
            } else {
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + t)
            }
        })
    })
}

/// Dense GF(2) matrix with packed rows, used for small linear-algebra tasks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct BitMatrix {
    pub cols: usize,
    pub words: usize,
    pub rows: Vec<Vec<u64>>,
}

impl BitMatrix {
    pub fn new(cols: usize) -> Self {
        BitMatrix {
            cols,
            words: words_for(cols),
            rows: Vec::new(),
        }
    }

    pub fn push_zero_row(&mut self) -> &mut Vec<u64> {
        self.rows.push(vec![0; self.words]);
        self.rows.last_mut().unwrap()
    }

    /// Reduces to reduced row echelon form in place, returning pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows.len() {
                break;
            }
            let Some(p) = (r..self.rows.len()).find(|&i| get(&self.rows[i], c)) else {
                continue;
            };
            self.rows.swap(r, p);
            let pivot_row = self.rows[r].clone();
            for (i, row) in self.rows.iter_mut().enumerate() {
                if i != r && get(row, c) {
                    xor_into(row, &pivot_row);
                }
            }
            pivots.push(c);
            r += 1;
        }
        self.rows.truncate(r);
        pivots
    }

    /// Basis of the right null space `{ v : M v = 0 }`.
    pub fn null_space(&self) -> Vec<Vec<u64>> {
        let mut m = self.clone();
        let pivots = m.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = vec![0u64; self.words];
            set(&mut v, free, true);
            for (row, &p) in m.rows.iter().zip(&pivots) {
                if get(row, free) {
                    set(&mut v, p, true);
                }
            }
            basis.push(v);
        }
        basis
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ones_lists_bits_across_words() {
        let mut row = vec![0u64; 3];
        for i in [0, 5, 63, 64, 130] {
            set(&mut row, i, true);
        }
        assert_eq!(ones(&row).collect::<Vec<_>>(), vec![0, 5, 63, 64, 130]);
        assert_eq!(popcount(&row), 5);
    }

    #[test]
    fn null_space_vectors_are_annihilated() {
        let mut m = BitMatrix::new(5);
        for bits in [[1, 1, 0, 0, 1], [0, 1, 1, 0, 0], [1, 0, 1, 0, 1]] {
            let row = m.push_zero_row();
            for (i, b) in bits.iter().enumerate() {
                set(row, i, *b == 1);
            }
        }
        assert_eq!(m.rank(), 2);
        let ns = m.null_space();
        assert_eq!(ns.len(), 3);
        for v in &ns {
            for row in &m.rows {
                assert_eq!(and_popcount(row, v) % 2, 0);
            }
        }
    }
}
