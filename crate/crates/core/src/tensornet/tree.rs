use std::collections::BTreeSet;

use super::{Leg, TensorNetwork, BYTES_PER_ENTRY};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    /// Tensor index in the network.
    Leaf(usize),
    /// Indices of two earlier nodes.
    Pair(usize, usize),
}

/// Binary contraction tree in postorder (children precede parents, root is
/// last), together with the legs sliced over when it is executed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContractionTree {
    nodes: Vec<Node>,
    sliced: BTreeSet<Leg>,
}

impl ContractionTree {
    /// Wraps nodes that are already in children-first order; they are
    /// rewritten into canonical depth-first postorder.
    pub fn new(nodes: Vec<Node>, sliced: BTreeSet<Leg>) -> Result<ContractionTree> {
        check_shape(&nodes)?;
        Ok(ContractionTree {
            nodes: canonical(&nodes),
            sliced,
        })
    }

    /// Tree from a pair list in SSA form: ids `0..num_leaves` are the
    /// tensors, and the `k`-th pair gets id `num_leaves + k`.
    pub fn from_pairs(num_leaves: usize, pairs: &[(usize, usize)]) -> Result<ContractionTree> {
        let mut nodes: Vec<Node> = (0..num_leaves).map(Node::Leaf).collect();
        nodes.extend(pairs.iter().map(|&(a, b)| Node::Pair(a, b)));
        ContractionTree::new(nodes, BTreeSet::new())
    }

    /// `((t0 t1) t2) …`.
    pub fn sequential(num_leaves: usize) -> ContractionTree {
        let pairs: Vec<(usize, usize)> = (1..num_leaves)
            .map(|k| (if k == 1 { 0 } else { num_leaves + k - 2 }, k))
            .collect();
        ContractionTree::from_pairs(num_leaves, &pairs).expect("sequential tree is well formed")
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn sliced(&self) -> &BTreeSet<Leg> {
        &self.sliced
    }

    pub fn with_sliced(mut self, sliced: BTreeSet<Leg>) -> ContractionTree {
        self.sliced = sliced;
        self
    }

    pub fn num_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf(_))).count()
    }

    /// Checks that the leaves are exactly the network's tensors.
    pub fn validate(&self, net: &TensorNetwork) -> Result<()> {
        let mut seen = vec![false; net.num_tensors()];
        for node in &self.nodes {
            if let Node::Leaf(t) = *node {
                if t >= seen.len() {
                    return Err(Error::TreeMismatch(format!("leaf {t} is not a tensor of the network")));
                }
                if seen[t] {
                    return Err(Error::TreeMismatch(format!("tensor {t} appears twice")));
                }
                seen[t] = true;
            }
        }
        if let Some(t) = seen.iter().position(|s| !s) {
            return Err(Error::TreeMismatch(format!("tensor {t} is missing from the tree")));
        }
        let legs = net.legs();
        for &l in &self.sliced {
            if !legs.contains(&l) {
                return Err(Error::TreeMismatch(format!("sliced leg {l} is not in the network")));
            }
            if net.is_open(l) {
                return Err(Error::TreeMismatch(format!("sliced leg {l} is an open leg")));
            }
        }
        Ok(())
    }
}

fn check_shape(nodes: &[Node]) -> Result<()> {
    if nodes.is_empty() {
        return Err(Error::TreeMismatch("empty tree".into()));
    }
    let mut used = vec![false; nodes.len()];
    for (i, node) in nodes.iter().enumerate() {
        if let Node::Pair(a, b) = *node {
            for c in [a, b] {
                if c >= i {
                    return Err(Error::TreeMismatch(format!("node {i} refers to later node {c}")));
                }
                if used[c] {
                    return Err(Error::TreeMismatch(format!("node {c} has two parents")));
                }
                used[c] = true;
            }
        }
    }
    if let Some(i) = used[..nodes.len() - 1].iter().position(|u| !u) {
        return Err(Error::TreeMismatch(format!("node {i} is not connected to the root")));
    }
    Ok(())
}

fn canonical(nodes: &[Node]) -> Vec<Node> {
    let mut out = Vec::with_capacity(nodes.len());
    enum Step {
        Visit(usize),
        Emit,
    }
    let mut stack = vec![Step::Visit(nodes.len() - 1)];
    let mut ids: Vec<usize> = Vec::new();
    while let Some(step) = stack.pop() {
        match step {
            Step::Visit(i) => match nodes[i] {
                Node::Leaf(t) => {
                    out.push(Node::Leaf(t));
                    ids.push(out.len() - 1);
                }
                Node::Pair(a, b) => {
                    stack.push(Step::Emit);
                    stack.push(Step::Visit(b));
                    stack.push(Step::Visit(a));
                }
            },
            Step::Emit => {
                let b = ids.pop().unwrap();
                let a = ids.pop().unwrap();
                out.push(Node::Pair(a, b));
                ids.push(out.len() - 1);
            }
        }
    }
    out
}

/// Legs of a tree node after summing everything that no longer appears
/// outside its subtree, plus the multiplication count that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeInfo {
    /// Sorted ascending.
    pub legs: Vec<Leg>,
    /// `log2` of the multiplications for this contraction; 0 for leaves.
    pub log_mults: u32,
}

impl NodeInfo {
    pub fn bytes(&self) -> u64 {
        (1u64 << self.legs.len().min(59)) * BYTES_PER_ENTRY
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CostReport {
    pub mults_per_slice: f64,
    pub num_sliced: usize,
    pub total_mults: f64,
    pub flops: f64,
    pub peak_bytes: u64,
    pub max_rank: usize,
}

impl CostReport {
    pub fn log2_total(&self) -> f64 {
        self.mults_per_slice.log2() + self.num_sliced as f64
    }
}

/// Leg bookkeeping with dense leg ids, shared by the annotator and the planners.
pub(crate) struct CostModel {
    labels: Vec<Leg>,
    total: Vec<u32>,
    open: Vec<bool>,
    leaves: Vec<Vec<(u32, u32)>>,
}

impl CostModel {
    pub fn new(net: &TensorNetwork, sliced: &BTreeSet<Leg>) -> CostModel {
        let counts = net.leg_counts();
        let labels: Vec<Leg> = counts.keys().copied().filter(|l| !sliced.contains(l)).collect();
        let dense = |l: Leg| labels.binary_search(&l).ok().map(|i| i as u32);
        let total: Vec<u32> = labels.iter().map(|l| counts[l] as u32).collect();
        let open: Vec<bool> = labels.iter().map(|&l| net.is_open(l)).collect();
        let mut model = CostModel {
            labels: labels.clone(),
            total,
            open,
            leaves: Vec::new(),
        };
        model.leaves = net
            .tensors()
            .iter()
            .map(|t| {
                let mut legs: Vec<(u32, u32)> = t.legs.iter().filter_map(|&l| dense(l)).map(|d| (d, 1)).collect();
                legs.sort_unstable();
                legs.retain(|&(d, c)| model.keep(d, c));
                legs
            })
            .collect();
        model
    }

    #[inline]
    fn keep(&self, d: u32, count: u32) -> bool {
        self.open[d as usize] || count < self.total[d as usize]
    }

    pub fn label(&self, d: u32) -> Leg {
        self.labels[d as usize]
    }

    pub fn leaf(&self, t: usize) -> &[(u32, u32)] {
        &self.leaves[t]
    }

    /// Writes the legs of the contraction of `a` and `b` into `out` and
    /// returns the size of the union of their legs.
    pub fn merge(&self, a: &[(u32, u32)], b: &[(u32, u32)], out: &mut Vec<(u32, u32)>) -> u32 {
        out.clear();
        let (mut i, mut j, mut union) = (0, 0, 0u32);
        while i < a.len() || j < b.len() {
            let next = if j >= b.len() || (i < a.len() && a[i].0 < b[j].0) {
                i += 1;
                a[i - 1]
            } else if i >= a.len() || b[j].0 < a[i].0 {
                j += 1;
                b[j - 1]
            } else {
                i += 1;
                j += 1;
                (a[i - 1].0, a[i - 1].1 + b[j - 1].1)
            };
            union += 1;
            if self.keep(next.0, next.1) {
                out.push(next);
            }
        }
        union
    }
}

pub fn annotate(net: &TensorNetwork, tree: &ContractionTree) -> Result<Vec<NodeInfo>> {
    tree.validate(net)?;
    let model = CostModel::new(net, &tree.sliced);
    let mut legs: Vec<Vec<(u32, u32)>> = Vec::with_capacity(tree.nodes.len());
    let mut infos = Vec::with_capacity(tree.nodes.len());
    for node in &tree.nodes {
        let (l, log_mults) = match *node {
            Node::Leaf(t) => (model.leaf(t).to_vec(), 0),
            Node::Pair(a, b) => {
                let mut out = Vec::new();
                let u = model.merge(&legs[a], &legs[b], &mut out);
                (out, u)
            }
        };
        infos.push(NodeInfo {
            legs: l.iter().map(|&(d, _)| model.label(d)).collect(),
            log_mults,
        });
        legs.push(l);
    }
    Ok(infos)
}

pub fn contraction_cost(net: &TensorNetwork, tree: &ContractionTree) -> Result<CostReport> {
    let infos = annotate(net, tree)?;
    let mut mults = 0.0;
    let mut peak = 0;
    let mut max_rank = 0;
    for (info, node) in infos.iter().zip(&tree.nodes) {
        if matches!(node, Node::Pair(..)) {
            mults += (info.log_mults as f64).exp2();
        }
        peak = peak.max(info.bytes());
        max_rank = max_rank.max(info.legs.len());
    }
    // leaves enter the contraction in full before slicing restricts them
    for t in net.tensors() {
        let rank = t.legs.iter().filter(|l| !tree.sliced.contains(l)).count();
        peak = peak.max((1u64 << rank.min(59)) * BYTES_PER_ENTRY);
    }
    let num_sliced = tree.sliced.len();
    let total = mults * (num_sliced as f64).exp2();
    Ok(CostReport {
        mults_per_slice: mults,
        num_sliced,
        total_mults: total,
        flops: 8.0 * total,
        peak_bytes: peak,
        max_rank,
    })
}
