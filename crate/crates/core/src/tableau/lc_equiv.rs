//! Local-Clifford equivalence of graph states, by solving the linear
//! conditions on per-vertex symplectic 2×2 blocks and enumerating the
//! solution space for an invertible one.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bits::{self, BitMatrix};
use crate::graph::Graph;

use super::local::{LocalCliffordFrame, SingleQubitClifford};

/// Maximum number of solution-space vectors examined.
pub const LC_SEARCH_CAP: u64 = 1 << 20;

/// Finds local Cliffords `U = ⊗ U_v` with `U |g⟩ = P |h⟩` for some Pauli `P`.
///
/// Each `U_v` is returned as the element acting on Paulis by
/// `X ↦ (a_v, c_v)`, `Z ↦ (b_v, d_v)` with positive signs. Returns `None` if
/// no such operator exists, or if the search cap is exhausted.
pub fn find_lc_equivalence(g: &Graph, h: &Graph) -> Option<LocalCliffordFrame> {
    let n = g.n();
    if h.n() != n {
        return None;
    }
    if n == 0 {
        return Some(LocalCliffordFrame::identity(0));
    }
    if g.edge_count() != h.edge_count() && (g.is_edgeless() || h.is_edgeless()) {
        return None;
    }
    let var = |v: usize, k: usize| 4 * v + k;
    // Column space of [A + Bθ; C + Dθ] must equal that of [I; θ'], i.e.
    // θ'A + θ'Bθ + C + Dθ = 0 entrywise.
    let mut m = BitMatrix::new(4 * n);
    for u in 0..n {
        for w in 0..n {
            let row = m.push_zero_row();
            if h.has_edge(u, w) {
                bits::flip(row, var(w, 0));
            }
            for v in 0..n {
                if h.has_edge(u, v) && g.has_edge(v, w) {
                    bits::flip(row, var(v, 1));
                }
            }
            if u == w {
                bits::flip(row, var(u, 2));
            }
            if g.has_edge(u, w) {
                bits::flip(row, var(u, 3));
            }
        }
    }
    let basis = m.null_space();
    let invertible = |s: &[u64]| {
        (0..n).all(|v| {
            let b = |k| bits::get(s, var(v, k));
            (b(0) & b(3)) ^ (b(1) & b(2))
        })
    };
    let words = bits::words_for(4 * n);
    let mut current = vec![0u64; words];
    let found = if basis.len() < 64 && (1u64 << basis.len()) <= LC_SEARCH_CAP {
        let total = 1u64 << basis.len();
        let mut hit = None;
        for i in 1..total {
            bits::xor_into(&mut current, &basis[i.trailing_zeros() as usize]);
            if invertible(&current) {
                hit = Some(current.clone());
                break;
            }
        }
        hit
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x1c_e9);
        let mut hit = None;
        for _ in 0..LC_SEARCH_CAP {
            let k = rng.gen_range(0..basis.len());
            bits::xor_into(&mut current, &basis[k]);
            if invertible(&current) {
                hit = Some(current.clone());
                break;
            }
        }
        hit
    }?;
    let ops = (0..n)
        .map(|v| {
            let b = |k| bits::get(&found, var(v, k));
            SingleQubitClifford::from_symplectic(b(0), b(2), b(1), b(3)).expect("checked invertible")
        })
        .collect();
    Some(LocalCliffordFrame::from_ops(ops))
}
