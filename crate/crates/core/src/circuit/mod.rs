//! Quantum circuits, their wire vertices, and lightcone analysis.
//!
//! A vertex is one tensor leg of the circuit network: qubit `q` at time slot
//! `t`, where slot 0 is the `|0⟩` input and slot `t` is the output of the
//! `t`-th gate acting on `q`. Vertex ids are assigned qubit by qubit
//! (`offset[q] + t`), so they are stable for a given circuit.

pub mod gates;
mod parse;
pub mod random;

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::C64;

pub use gates::GateKind;
pub use parse::parse_circuit;

pub type VertexId = usize;

#[derive(Clone, Debug)]
pub struct Gate {
    /// Position in the circuit's gate list.
    pub index: usize,
    pub moment: usize,
    pub kind: GateKind,
    pub params: Vec<f64>,
    pub qubits: Vec<usize>,
    /// Row-major unitary, 2×2 or 4×4.
    pub matrix: Vec<C64>,
}

impl Gate {
    pub fn new(moment: usize, kind: GateKind, params: Vec<f64>, qubits: Vec<usize>) -> Gate {
        let matrix = gates::matrix(kind, &params);
        Gate {
            index: 0,
            moment,
            kind,
            params,
            qubits,
            matrix,
        }
    }

    pub fn is_diagonal(&self) -> bool {
        gates::is_diagonal(&self.matrix)
    }
}

/// Canonically ordered set of vertex ids.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct VertexSet(BTreeSet<VertexId>);

impl VertexSet {
    pub fn new() -> VertexSet {
        VertexSet(BTreeSet::new())
    }

    pub fn insert(&mut self, v: VertexId) -> bool {
        self.0.insert(v)
    }

    pub fn remove(&mut self, v: VertexId) -> bool {
        self.0.remove(&v)
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.0.contains(&v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.0.iter().copied()
    }

    pub fn to_vec(&self) -> Vec<VertexId> {
        self.0.iter().copied().collect()
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        VertexSet(self.0.union(&other.0).copied().collect())
    }

    pub fn difference(&self, other: &VertexSet) -> VertexSet {
        VertexSet(self.0.difference(&other.0).copied().collect())
    }
}

impl FromIterator<VertexId> for VertexSet {
    fn from_iter<T: IntoIterator<Item = VertexId>>(iter: T) -> Self {
        VertexSet(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a VertexSet {
    type Item = &'a VertexId;
    type IntoIter = std::collections::btree_set::Iter<'a, VertexId>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

#[derive(Clone, Debug)]
pub struct Circuit {
    n: usize,
    gates: Vec<Gate>,
    /// `offsets[q]` is the id of qubit `q`'s input vertex; `offsets[n]` is the vertex count.
    offsets: Vec<usize>,
    gate_inputs: Vec<Vec<VertexId>>,
    gate_outputs: Vec<Vec<VertexId>>,
    producer: Vec<Option<usize>>,
    consumer: Vec<Option<usize>>,
}

impl Circuit {
    /// Builds a circuit from gates in temporal order, validating qubit ranges,
    /// unitarity, and moment disjointness.
    pub fn new(n: usize, gates: Vec<Gate>) -> Result<Circuit> {
        let mut gates = gates;
        let mut slots = vec![0usize; n];
        let mut last_moment_use: Vec<Option<usize>> = vec![None; n];
        for (index, gate) in gates.iter_mut().enumerate() {
            gate.index = index;
            if gate.qubits.len() != gate.kind.arity() {
                return Err(Error::InvalidArgument(format!(
                    "gate {index} ({}) expects {} qubits, got {}",
                    gate.kind,
                    gate.kind.arity(),
                    gate.qubits.len()
                )));
            }
            for &q in &gate.qubits {
                if q >= n {
                    return Err(Error::InvalidArgument(format!(
                        "gate {index} uses qubit {q}, circuit has {n} qubits"
                    )));
                }
            }
            if gate.qubits.len() == 2 && gate.qubits[0] == gate.qubits[1] {
                return Err(Error::InvalidArgument(format!(
                    "gate {index} acts twice on qubit {}",
                    gate.qubits[0]
                )));
            }
            let deviation = gates::unitarity_deviation(&gate.matrix);
            if deviation >= 1e-12 {
                return Err(Error::InvalidArgument(format!(
                    "gate {index} is not unitary (deviation {deviation:e})"
                )));
            }
            for &q in &gate.qubits {
                if last_moment_use[q] == Some(gate.moment) {
                    return Err(Error::InvalidArgument(format!(
                        "moment {} uses qubit {q} twice",
                        gate.moment
                    )));
                }
                last_moment_use[q] = Some(gate.moment);
                slots[q] += 1;
            }
        }

        let mut offsets = Vec::with_capacity(n + 1);
        let mut acc = 0;
        for &s in &slots {
            offsets.push(acc);
            acc += s + 1;
        }
        offsets.push(acc);

        let mut producer = vec![None; acc];
        let mut consumer = vec![None; acc];
        let mut current: Vec<usize> = vec![0; n];
        let mut gate_inputs = Vec::with_capacity(gates.len());
        let mut gate_outputs = Vec::with_capacity(gates.len());
        for gate in &gates {
            let mut ins = Vec::with_capacity(gate.qubits.len());
            let mut outs = Vec::with_capacity(gate.qubits.len());
            for &q in &gate.qubits {
                let input = offsets[q] + current[q];
                current[q] += 1;
                let output = offsets[q] + current[q];
                consumer[input] = Some(gate.index);
                producer[output] = Some(gate.index);
                ins.push(input);
                outs.push(output);
            }
            gate_inputs.push(ins);
            gate_outputs.push(outs);
        }

        Ok(Circuit {
            n,
            gates,
            offsets,
            gate_inputs,
            gate_outputs,
            producer,
            consumer,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn num_vertices(&self) -> usize {
        self.offsets[self.n]
    }

    /// Number of gates acting on qubit `q`.
    pub fn wire_len(&self, q: usize) -> usize {
        self.offsets[q + 1] - self.offsets[q] - 1
    }

    pub fn vertex(&self, qubit: usize, slot: usize) -> Option<VertexId> {
        (qubit < self.n && slot <= self.wire_len(qubit)).then(|| self.offsets[qubit] + slot)
    }

    /// `(qubit, slot)` of a vertex.
    pub fn position(&self, v: VertexId) -> Result<(usize, usize)> {
        self.check_vertex(v)?;
        let q = self.offsets.partition_point(|&o| o <= v) - 1;
        Ok((q, v - self.offsets[q]))
    }

    pub fn input_vertex(&self, q: usize) -> VertexId {
        self.offsets[q]
    }

    pub fn output_vertex(&self, q: usize) -> VertexId {
        self.offsets[q + 1] - 1
    }

    pub fn is_input(&self, v: VertexId) -> bool {
        v < self.num_vertices() && self.producer[v].is_none()
    }

    pub fn is_output(&self, v: VertexId) -> bool {
        v < self.num_vertices() && self.consumer[v].is_none()
    }

    pub fn outputs(&self) -> VertexSet {
        (0..self.n).map(|q| self.output_vertex(q)).collect()
    }

    pub fn producer(&self, v: VertexId) -> Option<usize> {
        self.producer.get(v).copied().flatten()
    }

    pub fn consumer(&self, v: VertexId) -> Option<usize> {
        self.consumer.get(v).copied().flatten()
    }

    pub fn gate_inputs(&self, g: usize) -> &[VertexId] {
        &self.gate_inputs[g]
    }

    pub fn gate_outputs(&self, g: usize) -> &[VertexId] {
        &self.gate_outputs[g]
    }

    fn check_vertex(&self, v: VertexId) -> Result<()> {
        if v < self.num_vertices() {
            Ok(())
        } else {
            Err(Error::UnknownVertex(v))
        }
    }

    /// Gates that any vertex of `s` depends on, found by walking wires backwards.
    pub fn lightcone(&self, s: &VertexSet) -> Result<BTreeSet<usize>> {
        let mut cone = BTreeSet::new();
        let mut stack = Vec::new();
        for v in s.iter() {
            self.check_vertex(v)?;
            stack.push(v);
        }
        while let Some(v) = stack.pop() {
            if let Some(g) = self.producer[v] {
                if cone.insert(g) {
                    stack.extend_from_slice(&self.gate_inputs[g]);
                }
            }
        }
        Ok(cone)
    }

    /// All vertices that are inputs of gates in the lightcone of `s`.
    pub fn lightcone_inputs(&self, s: &VertexSet) -> Result<VertexSet> {
        let cone = self.lightcone(s)?;
        Ok(cone.iter().flat_map(|&g| self.gate_inputs[g].iter().copied()).collect())
    }

    /// Circuit made of the given gates, in original order. The set must be
    /// closed under dependency, which makes it a prefix of every wire, so
    /// `(qubit, slot)` positions carry over unchanged.
    pub fn subcircuit(&self, gates: &BTreeSet<usize>) -> Result<Circuit> {
        for &g in gates {
            if g >= self.gates.len() {
                return Err(Error::InvalidArgument(format!("unknown gate index {g}")));
            }
            for &v in &self.gate_inputs[g] {
                if let Some(p) = self.producer[v] {
                    if !gates.contains(&p) {
                        return Err(Error::NotDependencyClosed { gate: g, missing: p });
                    }
                }
            }
        }
        let selected = gates.iter().map(|&g| self.gates[g].clone()).collect();
        Circuit::new(self.n, selected)
    }

    /// Translates a vertex of `self` into the vertex at the same position in
    /// `other` (typically a subcircuit).
    pub fn map_vertex(&self, v: VertexId, other: &Circuit) -> Result<VertexId> {
        let (q, t) = self.position(v)?;
        other.vertex(q, t).ok_or(Error::UnknownVertex(v))
    }

    /// Circuit file text; `parse_circuit(&c.to_text())` reproduces `c`.
    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.n);
        for g in &self.gates {
            let _ = write!(out, "{} {}", g.moment, g.kind);
            if !g.params.is_empty() {
                let params: Vec<String> = g.params.iter().map(|p| format!("{p:?}")).collect();
                let _ = write!(out, "({})", params.join(","));
            }
            for q in &g.qubits {
                let _ = write!(out, " {q}");
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h_cz() -> Circuit {
        Circuit::new(
            2,
            vec![
                Gate::new(0, GateKind::H, vec![], vec![0]),
                Gate::new(1, GateKind::Cz, vec![], vec![0, 1]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn vertex_table_is_wire_major() {
        let c = h_cz();
        assert_eq!(c.num_vertices(), 5);
        assert_eq!(c.vertex(0, 0), Some(0));
        assert_eq!(c.vertex(0, 2), Some(2));
        assert_eq!(c.vertex(1, 0), Some(3));
        assert_eq!(c.position(4).unwrap(), (1, 1));
        assert!(c.is_input(0) && c.is_input(3));
        assert!(c.is_output(2) && c.is_output(4));
        assert!(!c.is_output(1) && !c.is_input(1));
    }

    #[test]
    fn lightcone_of_input_is_empty() {
        let c = h_cz();
        let s: VertexSet = [0].into_iter().collect();
        assert!(c.lightcone(&s).unwrap().is_empty());
        assert!(c.lightcone_inputs(&s).unwrap().is_empty());
    }

    #[test]
    fn lightcone_of_output_follows_both_gates() {
        let c = h_cz();
        let s: VertexSet = [c.output_vertex(0)].into_iter().collect();
        assert_eq!(c.lightcone(&s).unwrap(), [0, 1].into_iter().collect());
        assert_eq!(c.lightcone_inputs(&s).unwrap().to_vec(), vec![0, 1, 3]);
    }

    #[test]
    fn unknown_vertex_is_rejected() {
        let c = h_cz();
        let s: VertexSet = [99].into_iter().collect();
        assert!(matches!(c.lightcone(&s), Err(Error::UnknownVertex(99))));
    }

    #[test]
    fn subcircuit_identity_and_empty() {
        let c = h_cz();
        let all: BTreeSet<usize> = [0, 1].into_iter().collect();
        let sub = c.subcircuit(&all).unwrap();
        assert_eq!(sub.to_text(), c.to_text());
        let empty = c.subcircuit(&BTreeSet::new()).unwrap();
        assert_eq!(empty.num_qubits(), 2);
        assert!(empty.gates().is_empty());
        assert_eq!(empty.num_vertices(), 2);
    }

    #[test]
    fn subcircuit_requires_closure() {
        let c = h_cz();
        let only_cz: BTreeSet<usize> = [1].into_iter().collect();
        assert!(matches!(
            c.subcircuit(&only_cz),
            Err(Error::NotDependencyClosed { gate: 1, missing: 0 })
        ));
    }

    #[test]
    fn moment_conflicts_are_rejected() {
        let r = Circuit::new(
            2,
            vec![
                Gate::new(0, GateKind::H, vec![], vec![0]),
                Gate::new(0, GateKind::Cz, vec![], vec![0, 1]),
            ],
        );
        assert!(r.is_err());
    }
}
