use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use super::tree::{annotate, ContractionTree, Node, NodeInfo};
use super::{kernel, Leg, Tensor, TensorNetwork, BYTES_PER_ENTRY};
use crate::error::{Error, Result};
use crate::C64;

/// Values of the sliced legs for one slice.
pub type SliceAssignment = BTreeMap<Leg, u8>;

#[derive(Clone, Debug, Default)]
pub struct ContractOptions {
    /// Refuse to run a contraction whose largest tensor exceeds this.
    pub budget_bytes: Option<u64>,
}

/// Measured while contracting.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ContractStats {
    /// Largest tensor actually allocated, in bytes.
    pub peak_bytes: u64,
    pub slices: usize,
}

/// Amplitudes of all bitstrings that agree with `fixed`, indexed by the
/// bits of `free` with the first free qubit as the high bit.
#[derive(Clone, Debug, PartialEq)]
pub struct AmplitudeBatch {
    pub num_qubits: usize,
    pub fixed: BTreeMap<usize, u8>,
    pub free: Vec<usize>,
    pub amplitudes: Vec<C64>,
}

impl AmplitudeBatch {
    /// Full bitstring index (qubit 0 high) of batch entry `i`.
    pub fn bitstring(&self, i: usize) -> usize {
        let n = self.num_qubits;
        let mut x = 0;
        for (&q, &b) in &self.fixed {
            x |= (b as usize) << (n - 1 - q);
        }
        let k = self.free.len();
        for (p, &q) in self.free.iter().enumerate() {
            x |= (i >> (k - 1 - p) & 1) << (n - 1 - q);
        }
        x
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }
}

fn check_assignment(tree: &ContractionTree, a: &SliceAssignment) -> Result<()> {
    let keys: BTreeSet<Leg> = a.keys().copied().collect();
    if &keys != tree.sliced() {
        return Err(Error::SliceMismatch(format!(
            "assignment covers legs {:?}, tree slices {:?}",
            keys,
            tree.sliced()
        )));
    }
    if let Some((l, v)) = a.iter().find(|(_, &v)| v > 1) {
        return Err(Error::SliceMismatch(format!("leg {l} assigned value {v}")));
    }
    Ok(())
}

fn check_budget(net: &TensorNetwork, tree: &ContractionTree, infos: &[NodeInfo], opts: &ContractOptions) -> Result<()> {
    let Some(budget) = opts.budget_bytes else { return Ok(()) };
    let mut needed = infos.iter().map(NodeInfo::bytes).max().unwrap_or(0);
    for t in net.tensors() {
        let rank = t.legs.iter().filter(|l| !tree.sliced().contains(l)).count();
        needed = needed.max((1u64 << rank.min(59)) * BYTES_PER_ENTRY);
    }
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    Ok(())
}

fn execute(net: &TensorNetwork, tree: &ContractionTree, infos: &[NodeInfo], a: &SliceAssignment) -> (Tensor, u64) {
    let mut vals: Vec<Option<Tensor>> = vec![None; infos.len()];
    let mut peak = 0u64;
    for (i, node) in tree.nodes().iter().enumerate() {
        let t = match *node {
            Node::Leaf(t) => {
                let mut x = net.tensors()[t].clone();
                for (&l, &v) in a {
                    if x.legs.contains(&l) {
                        x = kernel::fix_leg(&x, l, v);
                    }
                }
                let dangling: Vec<Leg> = x
                    .legs
                    .iter()
                    .copied()
                    .filter(|l| infos[i].legs.binary_search(l).is_err())
                    .collect();
                kernel::sum_legs(&x, &dangling)
            }
            Node::Pair(l, r) => {
                let tl = vals[l].take().expect("child computed");
                let tr = vals[r].take().expect("child computed");
                let keep = &infos[i].legs;
                kernel::contract_pair(&tl, &tr, |leg| keep.binary_search(&leg).is_ok())
            }
        };
        peak = peak.max(t.data.len() as u64 * BYTES_PER_ENTRY);
        vals[i] = Some(t);
    }
    let root = vals.pop().flatten().expect("root computed");
    (kernel::permute(&root, &sorted_open(net)), peak)
}

fn sorted_open(net: &TensorNetwork) -> Vec<Leg> {
    let mut open = net.open().to_vec();
    open.sort_unstable();
    open
}

/// Contracts one slice. The result's legs are the open legs in ascending order.
pub fn contract(net: &TensorNetwork, tree: &ContractionTree, a: &SliceAssignment) -> Result<Tensor> {
    contract_with(net, tree, a, &ContractOptions::default()).map(|(t, _)| t)
}

pub fn contract_with(
    net: &TensorNetwork,
    tree: &ContractionTree,
    a: &SliceAssignment,
    opts: &ContractOptions,
) -> Result<(Tensor, ContractStats)> {
    check_assignment(tree, a)?;
    let infos = annotate(net, tree)?;
    check_budget(net, tree, &infos, opts)?;
    let (t, peak_bytes) = execute(net, tree, &infos, a);
    Ok((t, ContractStats { peak_bytes, slices: 1 }))
}

const SLICE_CHUNK: usize = 64;

/// Sums the slices whose `partial` legs take one of the values in `accepted`
/// (bit patterns with `partial[0]` as the high bit) and whose remaining
/// sliced legs take every value. Slices are added in a fixed order, so the
/// result does not depend on the thread count.
pub fn sliced_contract_sum(
    net: &TensorNetwork,
    tree: &ContractionTree,
    partial: &[Leg],
    accepted: &[usize],
    opts: &ContractOptions,
) -> Result<(Tensor, ContractStats)> {
    for l in partial {
        if !tree.sliced().contains(l) {
            return Err(Error::SliceMismatch(format!(
                "partially sliced leg {l} is not sliced in the tree"
            )));
        }
    }
    let distinct: BTreeSet<Leg> = partial.iter().copied().collect();
    if distinct.len() != partial.len() {
        return Err(Error::SliceMismatch("partially sliced legs repeat".into()));
    }
    let k = partial.len();
    if let Some(&x) = accepted.iter().find(|&&x| x >> k != 0) {
        return Err(Error::SliceMismatch(format!("slice index {x} has more than {k} bits")));
    }
    let full: Vec<Leg> = tree
        .sliced()
        .iter()
        .copied()
        .filter(|l| !distinct.contains(l))
        .collect();
    let infos = annotate(net, tree)?;
    check_budget(net, tree, &infos, opts)?;

    let mut xs = accepted.to_vec();
    xs.sort_unstable();
    xs.dedup();
    let per_x = 1usize << full.len();
    let jobs = xs.len() * per_x;
    let assignment = |job: usize| -> SliceAssignment {
        let (x, y) = (xs[job / per_x], job % per_x);
        let mut a = SliceAssignment::new();
        for (p, &l) in partial.iter().enumerate() {
            a.insert(l, (x >> (k - 1 - p) & 1) as u8);
        }
        for (p, &l) in full.iter().enumerate() {
            a.insert(l, (y >> (full.len() - 1 - p) & 1) as u8);
        }
        a
    };

    let mut acc = Tensor::new(sorted_open(net), vec![C64::new(0.0, 0.0); 1 << net.open().len()]);
    let mut peak = 0;
    let mut start = 0;
    while start < jobs {
        let end = (start + SLICE_CHUNK).min(jobs);
        let parts: Vec<(Tensor, u64)> = (start..end)
            .into_par_iter()
            .map(|job| execute(net, tree, &infos, &assignment(job)))
            .collect();
        for (t, p) in parts {
            peak = peak.max(p);
            for (s, v) in acc.data.iter_mut().zip(&t.data) {
                *s += v;
            }
        }
        start = end;
    }
    Ok((
        acc,
        ContractStats {
            peak_bytes: peak,
            slices: jobs,
        },
    ))
}
