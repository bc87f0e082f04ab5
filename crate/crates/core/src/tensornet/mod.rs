//! Tensor networks built from circuits, and their contraction.
//!
//! Every leg has dimension 2. A leg may be shared by more than two tensors:
//! a diagonal gate does not split its wire, so the wire's leg runs through the
//! gate and every tensor on that stretch of wire holds it.

mod contract;
pub mod kernel;
mod plan_file;
mod tree;

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use sha2::{Digest, Sha256};

use crate::circuit::{Circuit, Gate, VertexId, VertexSet};
use crate::error::{Error, Result};
use crate::C64;

pub use contract::{
    contract, contract_with, sliced_contract_sum, AmplitudeBatch, ContractOptions, ContractStats, SliceAssignment,
};
pub use plan_file::{read_plan, write_plan};
pub(crate) use tree::CostModel;
pub use tree::{annotate, contraction_cost, ContractionTree, CostReport, Node, NodeInfo};

pub type Leg = usize;

pub const BYTES_PER_ENTRY: u64 = 16;

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    pub legs: Vec<Leg>,
    pub data: Vec<C64>,
}

impl Tensor {
    pub fn new(legs: Vec<Leg>, data: Vec<C64>) -> Tensor {
        assert_eq!(data.len(), 1usize << legs.len(), "tensor data length must be 2^rank");
        Tensor { legs, data }
    }

    pub fn scalar(z: C64) -> Tensor {
        Tensor {
            legs: Vec::new(),
            data: vec![z],
        }
    }

    pub fn rank(&self) -> usize {
        self.legs.len()
    }

    pub fn permuted(&self, order: &[Leg]) -> Tensor {
        kernel::permute(self, order)
    }
}

#[derive(Clone, Debug)]
pub struct NetworkOptions {
    /// Keep a wire's leg unbroken through diagonal gates.
    pub diagonal_gates: bool,
    /// Absorb every tensor whose legs are a subset of a neighbour's.
    pub simplify: bool,
    /// Rejects output specs whose open part alone would exceed this.
    pub budget_bytes: Option<u64>,
}

impl Default for NetworkOptions {
    fn default() -> Self {
        NetworkOptions {
            diagonal_gates: true,
            simplify: true,
            budget_bytes: None,
        }
    }
}

/// What happens at each circuit output.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OutputSpec {
    /// Every qubit projected onto the given bit.
    Closed(Vec<u8>),
    /// `fixed` qubits projected, `free` qubits left open (kept sorted).
    Batch {
        fixed: BTreeMap<usize, u8>,
        free: Vec<usize>,
    },
    OpenAll,
}

enum WireEnd {
    Fixed(u8),
    Open,
}

impl OutputSpec {
    /// Closed spec for the bitstring `index`, qubit 0 being the high bit.
    pub fn closed_index(index: usize, n: usize) -> OutputSpec {
        OutputSpec::Closed((0..n).map(|q| (index >> (n - 1 - q) & 1) as u8).collect())
    }

    pub fn batch(fixed: BTreeMap<usize, u8>, free: impl IntoIterator<Item = usize>) -> OutputSpec {
        let mut free: Vec<usize> = free.into_iter().collect();
        free.sort_unstable();
        OutputSpec::Batch { fixed, free }
    }

    /// Batch spec given by output vertices instead of qubits.
    pub fn batch_vertices(c: &Circuit, fixed: &BTreeMap<VertexId, u8>, free: &VertexSet) -> Result<OutputSpec> {
        let qubit_of = |v: VertexId| -> Result<usize> {
            if !c.is_output(v) {
                return Err(Error::OutputSpec(format!("vertex {v} is not a circuit output")));
            }
            Ok(c.position(v)?.0)
        };
        let mut fq = BTreeMap::new();
        for (&v, &b) in fixed {
            fq.insert(qubit_of(v)?, b);
        }
        let free: Result<Vec<usize>> = free.iter().map(qubit_of).collect();
        Ok(OutputSpec::batch(fq, free?))
    }

    fn resolve(&self, n: usize) -> Result<Vec<WireEnd>> {
        let check_bit = |b: u8| {
            if b > 1 {
                Err(Error::OutputSpec(format!("bit value {b} is not 0 or 1")))
            } else {
                Ok(())
            }
        };
        match self {
            OutputSpec::Closed(bits) => {
                if bits.len() != n {
                    return Err(Error::OutputSpec(format!(
                        "closed spec has {} bits for {n} qubits",
                        bits.len()
                    )));
                }
                bits.iter().map(|&b| check_bit(b).map(|_| WireEnd::Fixed(b))).collect()
            }
            OutputSpec::OpenAll => Ok((0..n).map(|_| WireEnd::Open).collect()),
            OutputSpec::Batch { fixed, free } => {
                let mut ends: Vec<Option<WireEnd>> = (0..n).map(|_| None).collect();
                for (&q, &b) in fixed {
                    check_bit(b)?;
                    if q >= n {
                        return Err(Error::OutputSpec(format!("fixed qubit {q} out of range")));
                    }
                    ends[q] = Some(WireEnd::Fixed(b));
                }
                for &q in free {
                    if q >= n {
                        return Err(Error::OutputSpec(format!("free qubit {q} out of range")));
                    }
                    if ends[q].is_some() {
                        return Err(Error::OutputSpec(format!("qubit {q} is listed as both fixed and free")));
                    }
                    ends[q] = Some(WireEnd::Open);
                }
                ends.into_iter()
                    .enumerate()
                    .map(|(q, e)| e.ok_or_else(|| Error::OutputSpec(format!("qubit {q} is neither fixed nor free"))))
                    .collect()
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct TensorNetwork {
    tensors: Vec<Tensor>,
    open: Vec<Leg>,
    leg_vertex: BTreeMap<Leg, VertexId>,
    vertex_leg: BTreeMap<VertexId, Leg>,
}

impl TensorNetwork {
    /// Network without circuit provenance. Open legs must occur in some tensor.
    pub fn new(tensors: Vec<Tensor>, open: Vec<Leg>) -> Result<TensorNetwork> {
        let net = TensorNetwork {
            tensors,
            open,
            leg_vertex: BTreeMap::new(),
            vertex_leg: BTreeMap::new(),
        };
        net.validate()?;
        Ok(net)
    }

    fn validate(&self) -> Result<()> {
        let counts = self.leg_counts();
        let mut seen = BTreeSet::new();
        for &l in &self.open {
            if !counts.contains_key(&l) {
                return Err(Error::InvalidArgument(format!("open leg {l} is on no tensor")));
            }
            if !seen.insert(l) {
                return Err(Error::InvalidArgument(format!("open leg {l} listed twice")));
            }
        }
        for (i, t) in self.tensors.iter().enumerate() {
            let distinct: BTreeSet<_> = t.legs.iter().collect();
            if distinct.len() != t.legs.len() {
                return Err(Error::InvalidArgument(format!("tensor {i} repeats a leg")));
            }
        }
        Ok(())
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.tensors
    }

    pub fn num_tensors(&self) -> usize {
        self.tensors.len()
    }

    /// Open legs in output order.
    pub fn open(&self) -> &[Leg] {
        &self.open
    }

    pub fn is_open(&self, l: Leg) -> bool {
        self.open.contains(&l)
    }

    /// Number of tensors carrying each leg.
    pub fn leg_counts(&self) -> BTreeMap<Leg, usize> {
        let mut counts = BTreeMap::new();
        for t in &self.tensors {
            for &l in &t.legs {
                *counts.entry(l).or_insert(0) += 1;
            }
        }
        counts
    }

    pub fn legs(&self) -> BTreeSet<Leg> {
        self.tensors.iter().flat_map(|t| t.legs.iter().copied()).collect()
    }

    /// Earliest circuit vertex the leg stands for.
    pub fn vertex_of_leg(&self, l: Leg) -> Option<VertexId> {
        self.leg_vertex.get(&l).copied()
    }

    pub fn leg_of_vertex(&self, v: VertexId) -> Option<Leg> {
        self.vertex_leg.get(&v).copied()
    }

    /// Hex SHA-256 of the leg structure (not the tensor values).
    pub fn structure_digest(&self) -> String {
        let mut h = Sha256::new();
        for t in &self.tensors {
            h.update(b"T");
            for &l in &t.legs {
                h.update((l as u64).to_le_bytes());
            }
        }
        h.update(b"O");
        for &l in &self.open {
            h.update((l as u64).to_le_bytes());
        }
        hex::encode(h.finalize())
    }

    /// Repeatedly absorbs a tensor into the lowest-indexed other tensor whose
    /// legs contain all of its legs. Never grows a tensor.
    pub fn simplify(&mut self) {
        let mut slots: Vec<Option<Tensor>> = self.tensors.drain(..).map(Some).collect();
        let mut index: BTreeMap<Leg, BTreeSet<usize>> = BTreeMap::new();
        for (i, t) in slots.iter().enumerate() {
            for &l in &t.as_ref().unwrap().legs {
                index.entry(l).or_default().insert(i);
            }
        }
        let mut work: VecDeque<usize> = (0..slots.len()).collect();
        while let Some(a) = work.pop_front() {
            let Some(ta) = slots[a].as_ref() else { continue };
            let target = match ta.legs.first() {
                Some(l0) => index[l0].iter().copied().find(|&b| {
                    b != a && {
                        let tb = slots[b].as_ref().unwrap();
                        ta.legs.iter().all(|l| tb.legs.contains(l))
                    }
                }),
                None => (0..slots.len()).find(|&b| b != a && slots[b].is_some()),
            };
            let Some(b) = target else { continue };
            let ta = slots[a].take().unwrap();
            let tb = slots[b].take().unwrap();
            for l in ta.legs.iter().chain(&tb.legs) {
                if let Some(set) = index.get_mut(l) {
                    set.remove(&a);
                    set.remove(&b);
                }
            }
            let open = &self.open;
            let merged = kernel::contract_pair(&tb, &ta, |l| {
                open.contains(&l) || index.get(&l).is_some_and(|s| !s.is_empty())
            });
            let order: Vec<Leg> = tb.legs.iter().copied().filter(|l| merged.legs.contains(l)).collect();
            let merged = kernel::permute(&merged, &order);
            for &l in &merged.legs {
                index.entry(l).or_default().insert(b);
            }
            slots[b] = Some(merged);
            work.push_back(b);
        }
        self.tensors = slots.into_iter().flatten().collect();
        let live = self.legs();
        self.leg_vertex.retain(|l, _| live.contains(l));
        self.vertex_leg.retain(|_, l| live.contains(l));
    }
}

/// Leg label of every vertex: the vertex id itself, except that with
/// `diagonal` a diagonal gate's outputs reuse its input legs.
pub(crate) fn wire_legs(c: &Circuit, diagonal: bool) -> Vec<Leg> {
    let mut legs: Vec<Leg> = (0..c.num_vertices()).collect();
    for g in c.gates() {
        if diagonal && g.is_diagonal() {
            for (&i, &o) in c.gate_inputs(g.index).iter().zip(c.gate_outputs(g.index)) {
                legs[o] = legs[i];
            }
        }
    }
    legs
}

fn gate_tensor(g: &Gate, ins: &[Leg], outs: &[Leg], diagonal: bool, conj: bool) -> Tensor {
    let fix = |z: C64| if conj { z.conj() } else { z };
    if diagonal && g.is_diagonal() {
        let d = 1usize << ins.len();
        let data = (0..d).map(|k| fix(g.matrix[k * (d + 1)])).collect();
        Tensor::new(ins.to_vec(), data)
    } else {
        let legs = outs.iter().chain(ins).copied().collect();
        Tensor::new(legs, g.matrix.iter().map(|&z| fix(z)).collect())
    }
}

/// Appends the input states and gates of `c` (skipping qubits not in
/// `wires`), with leg labels `relabel(legs[v])`.
pub(crate) fn emit_circuit(
    c: &Circuit,
    legs: &[Leg],
    diagonal: bool,
    conj: bool,
    wires: &[bool],
    relabel: &dyn Fn(Leg) -> Leg,
    out: &mut Vec<Tensor>,
) {
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    for q in 0..c.num_qubits() {
        if wires[q] {
            out.push(Tensor::new(vec![relabel(legs[c.input_vertex(q)])], vec![one, zero]));
        }
    }
    for g in c.gates() {
        if !g.qubits.iter().all(|&q| wires[q]) {
            continue;
        }
        let ins: Vec<Leg> = c.gate_inputs(g.index).iter().map(|&v| relabel(legs[v])).collect();
        let outs: Vec<Leg> = c.gate_outputs(g.index).iter().map(|&v| relabel(legs[v])).collect();
        out.push(gate_tensor(g, &ins, &outs, diagonal, conj));
    }
}

/// Network for `⟨spec| C |0…0⟩`.
pub fn build_network(c: &Circuit, spec: &OutputSpec, opts: &NetworkOptions) -> Result<TensorNetwork> {
    let n = c.num_qubits();
    let ends = spec.resolve(n)?;
    let open_count = ends.iter().filter(|e| matches!(e, WireEnd::Open)).count();
    if let Some(budget) = opts.budget_bytes {
        let needed = (1u64 << open_count.min(63)).saturating_mul(BYTES_PER_ENTRY);
        if needed > budget {
            return Err(Error::OutputSpec(format!(
                "{open_count} free outputs need {needed} bytes, over the budget of {budget}"
            )));
        }
    }
    let legs = wire_legs(c, opts.diagonal_gates);
    let mut tensors = Vec::new();
    emit_circuit(
        c,
        &legs,
        opts.diagonal_gates,
        false,
        &vec![true; n],
        &|l| l,
        &mut tensors,
    );
    let mut open = Vec::new();
    for (q, end) in ends.iter().enumerate() {
        let l = legs[c.output_vertex(q)];
        match end {
            WireEnd::Fixed(b) => {
                let mut data = vec![C64::new(0.0, 0.0); 2];
                data[*b as usize] = C64::new(1.0, 0.0);
                tensors.push(Tensor::new(vec![l], data));
            }
            WireEnd::Open => open.push(l),
        }
    }
    let mut leg_vertex = BTreeMap::new();
    let mut vertex_leg = BTreeMap::new();
    for (v, &l) in legs.iter().enumerate() {
        leg_vertex.entry(l).or_insert(v);
        vertex_leg.insert(v, l);
    }
    let mut net = TensorNetwork {
        tensors,
        open,
        leg_vertex,
        vertex_leg,
    };
    if opts.simplify {
        net.simplify();
    }
    Ok(net)
}

/// Network with explicit provenance, used by builders outside this module.
pub(crate) fn network_with_provenance(
    tensors: Vec<Tensor>,
    open: Vec<Leg>,
    leg_vertex: BTreeMap<Leg, VertexId>,
    simplify: bool,
) -> Result<TensorNetwork> {
    let vertex_leg = leg_vertex.iter().map(|(&l, &v)| (v, l)).collect();
    let mut net = TensorNetwork {
        tensors,
        open,
        leg_vertex,
        vertex_leg,
    };
    net.validate()?;
    if simplify {
        net.simplify();
    }
    Ok(net)
}
