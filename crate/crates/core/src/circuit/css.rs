use crate::gate::Gate;
use crate::tableau::SingleQubitClifford;

use super::{merge_single_qubit_runs, Circuit, CompileError};

/// Conjugates the circuit by Hadamards on the qubits with `in_a[q]`, turning
/// CZ across the bipartition into CX targeting `A` and flipping CX inside `A`.
/// The outer Hadamards are merged into the surrounding single-qubit gates.
pub fn css_cx_form(c: &Circuit, in_a: &[bool]) -> Result<Circuit, CompileError> {
    assert_eq!(in_a.len(), c.n(), "one side flag per qubit");
    let n = c.n();
    let mut gates: Vec<Gate> = (0..n).filter(|&q| in_a[q]).map(Gate::H).collect();
    for (index, g) in c.gates().iter().enumerate() {
        let bad = || CompileError::NotCssForm { index, gate: *g };
        match *g {
            Gate::Cz(a, b) => match (in_a[a], in_a[b]) {
                (true, false) => gates.push(Gate::Cx(b, a)),
                (false, true) => gates.push(Gate::Cx(a, b)),
                _ => return Err(bad()),
            },
            Gate::Cx(a, b) => match (in_a[a], in_a[b]) {
                (true, true) => gates.push(Gate::Cx(b, a)),
                (false, false) => gates.push(Gate::Cx(a, b)),
                _ => return Err(bad()),
            },
            Gate::Cy(..) => return Err(bad()),
            single => {
                let (q, _) = single.qubits();
                if in_a[q] {
                    let h = Gate::H(q);
                    let conj = SingleQubitClifford::from_gate(&h).then_gate(&single).then_gate(&h);
                    gates.extend(conj.gates(q));
                } else {
                    gates.push(single);
                }
            }
        }
    }
    gates.extend((0..n).filter(|&q| in_a[q]).map(Gate::H));
    merge_single_qubit_runs(&mut gates);
    let out = Circuit::from_gates(n, gates).expect("operands unchanged");
    debug_assert!(super::unitary_equivalent(c, &out), "CX form changed the unitary");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::unitary_equivalent;

    #[test]
    fn converts_cz_and_cx() {
        let c = Circuit::from_gates(
            4,
            vec![Gate::H(0), Gate::H(1), Gate::H(2), Gate::H(3), Gate::Cz(0, 1), Gate::Cx(0, 2), Gate::Cz(2, 3)],
        )
        .unwrap();
        // Parts: A = {1, 3}, B = {0, 2}.
        let out = css_cx_form(&c, &[false, true, false, true]).unwrap();
        assert!(unitary_equivalent(&c, &out));
        assert_eq!(out.tq_count(), 3);
        assert!(out.gates().iter().filter(|g| g.is_two_qubit()).all(|g| matches!(g, Gate::Cx(..))));
    }

    #[test]
    fn rejects_cy_and_same_side_cz() {
        let c = Circuit::from_gates(2, vec![Gate::Cy(0, 1)]).unwrap();
        assert!(css_cx_form(&c, &[true, false]).is_err());
        let c = Circuit::from_gates(2, vec![Gate::Cz(0, 1)]).unwrap();
        assert!(matches!(css_cx_form(&c, &[true, true]), Err(CompileError::NotCssForm { index: 0, .. })));
    }
}
