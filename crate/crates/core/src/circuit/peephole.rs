use crate::gate::Gate;
use crate::tableau::{PauliString, SingleQubitClifford};

use super::{clifford_images, gates_commute, unitary_equivalent, Circuit};

/// Reads a one-qubit Clifford on local qubit `q` off two-qubit images, if the
/// images of `X_q` and `Z_q` stay on `q`.
fn local_part(images: &[PauliString], q: usize) -> Option<SingleQubitClifford> {
    let other = 1 - q;
    let xi = &images[2 * q];
    let zi = &images[2 * q + 1];
    if xi.get(other) != (false, false) || zi.get(other) != (false, false) {
        return None;
    }
    let (xx, xz) = xi.get(q);
    let (zx, zz) = zi.get(q);
    SingleQubitClifford::from_images((xx, xz, xi.is_negative()), (zx, zz, zi.is_negative()))
}

fn as_local(images: &[PauliString]) -> Option<(SingleQubitClifford, SingleQubitClifford)> {
    Some((local_part(images, 0)?, local_part(images, 1)?))
}

/// Cheapest replacement for `first` followed by `second`, both on the same
/// pair of qubits, expressed on local qubits 0 and 1. Returns `None` unless
/// it saves a two-qubit gate.
fn fuse(first: Gate, second: Gate) -> Option<Vec<Gate>> {
    let words = |(l0, l1): (SingleQubitClifford, SingleQubitClifford)| {
        let mut v = l0.gates(0);
        v.extend(l1.gates(1));
        v
    };
    let product = [first, second];
    if let Some(ls) = as_local(&clifford_images(2, &product)) {
        return Some(words(ls));
    }
    let candidates = [Gate::Cz(0, 1), Gate::Cx(0, 1), Gate::Cx(1, 0), Gate::Cy(0, 1), Gate::Cy(1, 0)];
    for g in candidates {
        // product = L then g  ⇔  L = product then g (g is an involution).
        if let Some(ls) = as_local(&clifford_images(2, &[first, second, g])) {
            let mut v = words(ls);
            v.push(g);
            return Some(v);
        }
        // product = g then L  ⇔  L = g then product.
        if let Some(ls) = as_local(&clifford_images(2, &[g, first, second])) {
            let mut v = vec![g];
            v.extend(words(ls));
            return Some(v);
        }
    }
    None
}

fn same_pair(a: &Gate, b: &Gate) -> Option<(usize, usize)> {
    let (a0, a1) = a.qubits();
    let (b0, b1) = b.qubits();
    let (a1, b1) = (a1?, b1?);
    if (a0 == b0 && a1 == b1) || (a0 == b1 && a1 == b0) {
        Some((a0, a1))
    } else {
        None
    }
}

/// Tries to merge the two-qubit gate at `i` with the next gate on the same
/// pair, sliding each through the gates in between that it commutes with.
fn try_pair(gates: &mut Vec<Gate>, i: usize) -> bool {
    let gi = gates[i];
    let mut between = Vec::new();
    let mut partner = None;
    for (k, gk) in gates.iter().enumerate().skip(i + 1) {
        if !gk.overlaps(&gi) {
            continue;
        }
        if same_pair(&gi, gk).is_some() {
            partner = Some(k);
            break;
        }
        between.push(k);
    }
    let Some(k) = partner else { return false };
    let gk = gates[k];
    let forward = between.iter().take_while(|&&m| gates_commute(&gi, &gates[m])).count();
    let backward = between.iter().rev().take_while(|&&m| gates_commute(&gk, &gates[m])).count();
    if forward + backward < between.len() {
        return false;
    }
    let (p, q) = same_pair(&gi, &gk).unwrap();
    let local = |x: usize| if x == p { 0 } else { 1 };
    let global = |x: usize| if x == 0 { p } else { q };
    let Some(replacement) = fuse(gi.remap(local), gk.remap(local)) else {
        return false;
    };
    // The fused block sits where the two gates meet.
    let at = if forward == between.len() { k } else { between[forward] };
    let mut out = Vec::with_capacity(gates.len());
    for (idx, g) in gates.iter().enumerate() {
        if idx == at {
            out.extend(replacement.iter().map(|r| r.remap(global)));
        }
        if idx != i && idx != k {
            out.push(*g);
        }
    }
    *gates = out;
    true
}

/// Merges runs of single-qubit gates that can be brought together by sliding
/// through commuting gates, replacing each run with a shortest word.
pub fn merge_single_qubit_runs(gates: &mut Vec<Gate>) -> bool {
    let mut changed = false;
    let mut i = 0;
    while i < gates.len() {
        let g = gates[i];
        if g.is_two_qubit() {
            i += 1;
            continue;
        }
        let (q, _) = g.qubits();
        let mut element = SingleQubitClifford::from_gate(&g);
        let mut absorbed = vec![i];
        for (k, gk) in gates.iter().enumerate().skip(i + 1) {
            if !gk.acts_on(q) {
                continue;
            }
            if gk.is_two_qubit() {
                // Only slide the accumulated element if it commutes as a whole.
                let word = element.gates(q);
                if word.iter().all(|w| gates_commute(w, gk)) {
                    continue;
                }
                break;
            }
            element = element.then_gate(gk);
            absorbed.push(k);
        }
        let word = element.gates(q);
        if word.len() < absorbed.len() {
            let last = *absorbed.last().unwrap();
            let mut out = Vec::with_capacity(gates.len());
            for (idx, gx) in gates.iter().enumerate() {
                if idx == last {
                    out.extend(word.iter().copied());
                }
                if !absorbed.contains(&idx) {
                    out.push(*gx);
                }
            }
            *gates = out;
            changed = true;
            continue;
        }
        i += 1;
    }
    changed
}

/// Rewrites to a fixed point: cancels and fuses two-qubit gates on the same
/// pair (up to single-qubit dressing) and merges single-qubit runs.
pub fn peephole(c: &Circuit) -> Circuit {
    let mut gates = c.gates().to_vec();
    loop {
        let mut changed = false;
        let mut i = 0;
        while i < gates.len() {
            if gates[i].is_two_qubit() && try_pair(&mut gates, i) {
                changed = true;
                continue;
            }
            i += 1;
        }
        changed |= merge_single_qubit_runs(&mut gates);
        if !changed {
            break;
        }
    }
    let out = Circuit::from_gates(c.n(), gates).expect("operands unchanged");
    debug_assert!(unitary_equivalent(c, &out), "peephole changed the unitary");
    out
}
