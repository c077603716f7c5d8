use crate::gate::Gate;
use crate::graph::{Action, ActionKind, Graph};
use crate::tableau::{local_dressing, LocalCliffordFrame, SingleQubitClifford, StabilizerTableau};

use super::{clifford_images, Circuit, CompileError};

/// Gates undoing one decimation action, in circuit order.
///
/// A graph-level CY is `S_c · CY` (controlled `ZX` rather than `Y`), so its
/// inverse carries an extra `S†` on the control.
pub fn action_gates(a: &Action) -> Vec<Gate> {
    match a.kind() {
        ActionKind::Cz => vec![Gate::Cz(a.a(), a.b())],
        ActionKind::Cx => vec![Gate::Cx(a.a(), a.b())],
        ActionKind::Cy => vec![Gate::Cy(a.a(), a.b()), Gate::Sdg(a.a())],
    }
}

/// Does the one-qubit Clifford `l` on `q` commute with the two-qubit gate `g`?
fn local_commutes(l: &SingleQubitClifford, q: usize, g: &Gate) -> bool {
    if l.is_identity() || !g.acts_on(q) {
        return true;
    }
    let (a, _) = g.qubits();
    let local = |x: usize| if x == a { 0 } else { 1 };
    let g2 = g.remap(local);
    let word = l.gates(local(q));
    let mut lg = word.clone();
    lg.push(g2);
    let mut gl = vec![g2];
    gl.extend(word);
    clifford_images(2, &lg) == clifford_images(2, &gl)
}

/// Builds the preparation circuit for `target` from a decimation log of
/// `initial`: `H` on every qubit, the inverted actions in reverse order, and a
/// final single-qubit layer. `frame`, when known, is the local Clifford with
/// `target = frame · |initial⟩`; otherwise it is solved for.
pub fn reconstruct(
    initial: &Graph,
    log: &[Action],
    frame: Option<&LocalCliffordFrame>,
    target: &StabilizerTableau,
) -> Result<Circuit, CompileError> {
    let n = initial.n();
    let mut g = initial.clone();
    for a in log {
        g.apply_action_in_place(a)?;
    }
    if !g.is_edgeless() {
        return Err(CompileError::NotTerminal(g.edge_count()));
    }

    let mut gates: Vec<Gate> = (0..n).map(Gate::H).collect();
    // Single-qubit Cliffords owed after the gates emitted so far.
    let mut pending = LocalCliffordFrame::identity(n);
    for a in log.iter().rev() {
        let seq = action_gates(a);
        let two = seq[0];
        for q in two.support() {
            let l = pending.get(q);
            if !local_commutes(&l, q, &two) {
                gates.extend(l.gates(q));
                pending.set(q, SingleQubitClifford::IDENTITY);
            }
        }
        gates.push(two);
        for s in &seq[1..] {
            pending.push_gate(s);
        }
    }

    let skeleton = StabilizerTableau::simulate(n, &gates)?;
    let finish = |tail: &LocalCliffordFrame| -> Option<LocalCliffordFrame> {
        let mut t = skeleton.clone();
        t.apply_frame(tail);
        let p = t.pauli_correction(target)?;
        let mut tail = tail.clone();
        for q in 0..n {
            match p.get(q) {
                (false, false) => {}
                (true, false) => tail.push_gate(&Gate::X(q)),
                (true, true) => tail.push_gate(&Gate::Y(q)),
                (false, true) => tail.push_gate(&Gate::Z(q)),
            }
        }
        Some(tail)
    };
    let tail = frame
        .and_then(|f| finish(&pending.then(f)))
        .or_else(|| local_dressing(&skeleton, target))
        .ok_or(CompileError::FrameUnsolvable)?;
    for q in 0..n {
        gates.extend(tail.get(q).gates(q));
    }
    let c = Circuit::from_gates(n, gates).expect("operands in range");
    if !c.simulate().same_state(target) {
        return Err(CompileError::FrameUnsolvable);
    }
    Ok(c)
}
