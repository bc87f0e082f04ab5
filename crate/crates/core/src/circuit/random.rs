//! Seeded Sycamore-style random circuits on a rectangular grid.
//!
//! Every cycle applies a random `x_1_2`/`y_1_2`/`hz_1_2` layer (never
//! repeating a qubit's previous choice) followed by one coupler pattern of
//! two-qubit gates. Patterns cycle in the `ABCDCDAB` order.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_6};

use rand::Rng;

use super::{Circuit, Gate, GateKind};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Entangler {
    /// `fsim(π/2, π/6)`.
    Fsim,
    /// `cz`; gives circuits with diagonal two-qubit gates.
    Cz,
}

/// `(rows, cols)` with `rows` the largest divisor of `n` not exceeding `√n`.
pub fn grid_shape(n: usize) -> (usize, usize) {
    let mut rows = 1;
    for r in 1..=n {
        if r * r > n {
            break;
        }
        if n.is_multiple_of(r) {
            rows = r;
        }
    }
    (rows, n / rows.max(1))
}

fn coupler_patterns(n: usize) -> Vec<Vec<(usize, usize)>> {
    let (rows, cols) = grid_shape(n);
    let at = |r: usize, c: usize| r * cols + c;
    let horizontal = |parity: usize| {
        let mut v = Vec::new();
        for r in 0..rows {
            for c in (parity..cols.saturating_sub(1)).step_by(2) {
                v.push((at(r, c), at(r, c + 1)));
            }
        }
        v
    };
    let vertical = |parity: usize| {
        let mut v = Vec::new();
        for r in (parity..rows.saturating_sub(1)).step_by(2) {
            for c in 0..cols {
                v.push((at(r, c), at(r + 1, c)));
            }
        }
        v
    };
    if rows == 1 {
        vec![horizontal(0), horizontal(1)]
    } else {
        let (a, b, c, d) = (horizontal(0), horizontal(1), vertical(0), vertical(1));
        vec![a.clone(), b.clone(), c.clone(), d.clone(), c, d, a, b]
    }
}

pub fn random_circuit(n: usize, cycles: usize, entangler: Entangler, seed: u64) -> Circuit {
    let mut rng = rng::stream(seed, rng::CIRCUIT_GENERATION);
    let singles = [GateKind::X12, GateKind::Y12, GateKind::Hz12];
    let patterns = coupler_patterns(n);
    let mut previous: Vec<Option<usize>> = vec![None; n];
    let mut gates = Vec::new();
    for cycle in 0..cycles {
        for (q, prev) in previous.iter_mut().enumerate() {
            let choice = loop {
                let k = rng.random_range(0..singles.len());
                if Some(k) != *prev {
                    break k;
                }
            };
            *prev = Some(choice);
            gates.push(Gate::new(2 * cycle, singles[choice], vec![], vec![q]));
        }
        for &(a, b) in &patterns[cycle % patterns.len()] {
            let gate = match entangler {
                Entangler::Fsim => Gate::new(2 * cycle + 1, GateKind::Fsim, vec![FRAC_PI_2, FRAC_PI_6], vec![a, b]),
                Entangler::Cz => Gate::new(2 * cycle + 1, GateKind::Cz, vec![], vec![a, b]),
            };
            gates.push(gate);
        }
    }
    Circuit::new(n, gates).expect("generated circuits are well formed")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_shapes() {
        assert_eq!(grid_shape(12), (3, 4));
        assert_eq!(grid_shape(10), (2, 5));
        assert_eq!(grid_shape(13), (1, 13));
        assert_eq!(grid_shape(16), (4, 4));
    }

    #[test]
    fn generation_is_seeded() {
        let a = random_circuit(8, 6, Entangler::Fsim, 3).to_text();
        let b = random_circuit(8, 6, Entangler::Fsim, 3).to_text();
        let c = random_circuit(8, 6, Entangler::Fsim, 4).to_text();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn every_pattern_couples_disjoint_pairs() {
        for n in [6, 10, 12, 13, 14] {
            for pattern in coupler_patterns(n) {
                let mut seen = vec![false; n];
                for (a, b) in pattern {
                    assert!(!seen[a] && !seen[b]);
                    seen[a] = true;
                    seen[b] = true;
                }
            }
        }
    }
}
