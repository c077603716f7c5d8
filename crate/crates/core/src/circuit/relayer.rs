use crate::gate::Gate;

use super::{gates_commute, Circuit};

/// Greedy re-layering: each gate goes to the earliest layer reachable by
/// scanning backwards past layers it is disjoint from, or whose overlapping
/// gates it commutes with. Passes alternate over the circuit and its inverse
/// (which schedules as late as possible) while the two-qubit depth drops.
/// The input's own layering is kept when the passes cannot beat it.
pub fn relayer(c: &Circuit) -> Circuit {
    let mut layers = pass(c.gates());
    let mut best = tq_layers(&layers);
    let own = grouped(c);
    if tq_layers(&own) < best {
        best = tq_layers(&own);
        layers = own;
    }
    for _ in 0..4 {
        let back = invert(pass(&flatten(&invert(layers.clone()))));
        let fwd = pass(&flatten(&back));
        let d = tq_layers(&fwd);
        if d >= best {
            break;
        }
        best = d;
        layers = fwd;
    }
    let out = Circuit::from_layers(c.n(), layers).expect("layers are disjoint by construction");
    debug_assert!(super::unitary_equivalent(c, &out), "relayer changed the unitary");
    out
}

fn pass(gates: &[Gate]) -> Vec<Vec<Gate>> {
    let mut layers: Vec<Vec<Gate>> = Vec::new();
    for g in gates {
        let mut candidate = None;
        for (l, layer) in layers.iter().enumerate().rev() {
            let mut disjoint = true;
            let mut passable = true;
            for h in layer.iter().filter(|h| h.overlaps(g)) {
                disjoint = false;
                if !gates_commute(g, h) {
                    passable = false;
                    break;
                }
            }
            if disjoint {
                candidate = Some(l);
            } else if !passable {
                break;
            }
        }
        match candidate {
            Some(l) => layers[l].push(*g),
            None => layers.push(vec![*g]),
        }
    }
    layers
}

/// Layers of the inverse circuit.
fn invert(mut layers: Vec<Vec<Gate>>) -> Vec<Vec<Gate>> {
    layers.reverse();
    for layer in &mut layers {
        for g in layer.iter_mut() {
            *g = g.inverse();
        }
    }
    layers
}

fn flatten(layers: &[Vec<Gate>]) -> Vec<Gate> {
    layers.iter().flatten().copied().collect()
}

fn grouped(c: &Circuit) -> Vec<Vec<Gate>> {
    let idx = c.layer_indices();
    let mut layers = vec![Vec::new(); idx.iter().max().map_or(0, |m| m + 1)];
    for (g, &l) in c.gates().iter().zip(&idx) {
        layers[l].push(*g);
    }
    layers.retain(|l| !l.is_empty());
    layers
}

fn tq_layers(layers: &[Vec<Gate>]) -> usize {
    layers.iter().filter(|l| l.iter().any(|g| g.is_two_qubit())).count()
}
