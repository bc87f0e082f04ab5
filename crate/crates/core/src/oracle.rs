//! Dense statevector reference simulator for small circuits.

use rand::Rng;

use crate::circuit::{Circuit, Gate, VertexSet};
use crate::error::{Error, Result};
use crate::{rng, C64};

pub const DEFAULT_CAP: usize = 24;

fn check_cap(n: usize) -> Result<()> {
    if n > DEFAULT_CAP {
        return Err(Error::OracleCap { n, cap: DEFAULT_CAP });
    }
    Ok(())
}

fn apply_gate(amps: &mut [C64], n: usize, g: &Gate) {
    let m = &g.matrix;
    match g.qubits[..] {
        [q] => {
            let s = 1usize << (n - 1 - q);
            for base in 0..amps.len() {
                if base & s != 0 {
                    continue;
                }
                let (a0, a1) = (amps[base], amps[base | s]);
                amps[base] = m[0] * a0 + m[1] * a1;
                amps[base | s] = m[2] * a0 + m[3] * a1;
            }
        }
        [q0, q1] => {
            let (s0, s1) = (1usize << (n - 1 - q0), 1usize << (n - 1 - q1));
            for base in 0..amps.len() {
                if base & (s0 | s1) != 0 {
                    continue;
                }
                let idx = [base, base | s1, base | s0, base | s0 | s1];
                let v = idx.map(|i| amps[i]);
                for (r, &i) in idx.iter().enumerate() {
                    amps[i] = (0..4).map(|c| m[r * 4 + c] * v[c]).sum();
                }
            }
        }
        _ => unreachable!("gates act on one or two qubits"),
    }
}

fn zero_state(n: usize) -> Vec<C64> {
    let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
    amps[0] = C64::new(1.0, 0.0);
    amps
}

/// `C|0…0⟩`, indexed with qubit 0 as the high bit.
pub fn statevector(c: &Circuit) -> Result<Vec<C64>> {
    let n = c.num_qubits();
    check_cap(n)?;
    let mut amps = zero_state(n);
    for g in c.gates() {
        apply_gate(&mut amps, n, g);
    }
    Ok(amps)
}

fn project(amps: &mut [C64], n: usize, q: usize, bit: usize) {
    let s = 1usize << (n - 1 - q);
    for (i, a) in amps.iter_mut().enumerate() {
        if (i & s != 0) as usize != bit {
            *a = C64::new(0.0, 0.0);
        }
    }
}

/// The circuit with wire vertex `S[p]` projected onto bit `p` of `i`
/// (`S` ascending, first vertex as the high bit).
pub fn projected_state(c: &Circuit, s: &VertexSet, i: usize) -> Result<Vec<C64>> {
    let n = c.num_qubits();
    check_cap(n)?;
    let verts = s.to_vec();
    let k = verts.len();
    let mut after_gate: Vec<Vec<(usize, usize)>> = vec![Vec::new(); c.gates().len()];
    let mut at_start = Vec::new();
    for (p, &v) in verts.iter().enumerate() {
        let (q, _) = c.position(v)?;
        let bit = i >> (k - 1 - p) & 1;
        match c.producer(v) {
            Some(g) => after_gate[g].push((q, bit)),
            None => at_start.push((q, bit)),
        }
    }
    let mut amps = zero_state(n);
    for (q, bit) in at_start {
        project(&mut amps, n, q, bit);
    }
    for g in c.gates() {
        apply_gate(&mut amps, n, g);
        for &(q, bit) in &after_gate[g.index] {
            project(&mut amps, n, q, bit);
        }
    }
    Ok(amps)
}

/// Marginal probability of each bit pattern on the vertices of `s`, found by
/// simulating only their lightcone.
pub fn exact_slice_norms(c: &Circuit, s: &VertexSet) -> Result<Vec<f64>> {
    let cone = c.lightcone(s)?;
    let sub = c.subcircuit(&cone)?;
    let mut qubits = Vec::new();
    for v in s.iter() {
        let w = c.map_vertex(v, &sub)?;
        if !sub.is_output(w) {
            let outer = s
                .iter()
                .find(|&o| {
                    c.lightcone_inputs(&[o].into_iter().collect())
                        .is_ok_and(|l| l.contains(v))
                })
                .unwrap_or(v);
            return Err(Error::LightconeViolation { inner: v, outer });
        }
        qubits.push(c.position(v)?.0);
    }
    let n = c.num_qubits();
    let amps = statevector(&sub)?;
    let k = qubits.len();
    let mut norms = vec![0.0; 1 << k];
    for (x, a) in amps.iter().enumerate() {
        let mut idx = 0;
        for &q in &qubits {
            idx = idx << 1 | (x >> (n - 1 - q) & 1);
        }
        norms[idx] += a.norm_sqr();
    }
    Ok(norms)
}

pub fn exact_probabilities(c: &Circuit, bitstrings: &[usize]) -> Result<Vec<f64>> {
    let amps = statevector(c)?;
    bitstrings
        .iter()
        .map(|&b| {
            amps.get(b)
                .map(|a| a.norm_sqr())
                .ok_or_else(|| Error::InvalidArgument(format!("bitstring index {b} out of range")))
        })
        .collect()
}

/// `m` independent samples from the output distribution.
pub fn exact_sample(c: &Circuit, m: usize, seed: u64) -> Result<Vec<usize>> {
    let amps = statevector(c)?;
    let mut cdf = Vec::with_capacity(amps.len());
    let mut acc = 0.0;
    for a in &amps {
        acc += a.norm_sqr();
        cdf.push(acc);
    }
    let mut r = rng::stream(seed, rng::ORACLE_SAMPLING);
    Ok((0..m)
        .map(|_| {
            let u: f64 = r.random::<f64>() * acc;
            cdf.partition_point(|&x| x <= u).min(cdf.len() - 1)
        })
        .collect())
}
