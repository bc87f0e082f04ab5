//! Contraction-tree search: a greedy start, simulated annealing, and the
//! choice of fully sliced legs under a memory budget.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use rand::Rng;
use rayon::prelude::*;

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::rng;
use crate::tensornet::{
    annotate, build_network, contraction_cost, ContractionTree, CostModel, CostReport, Leg, NetworkOptions, Node,
    OutputSpec, TensorNetwork, BYTES_PER_ENTRY,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SliceStrategy {
    /// Slice only as much as the memory budget requires.
    Budget,
    /// Keep slicing past the budget until at least this many legs are sliced.
    MinCount(usize),
}

#[derive(Clone, Debug)]
pub struct PlannerConfig {
    pub budget_bytes: u64,
    pub initial_temperature: f64,
    /// Per-step temperature factor.
    pub cooling: f64,
    pub steps: usize,
    pub seed: u64,
    pub strategy: SliceStrategy,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            budget_bytes: 1 << 30,
            initial_temperature: 1.0,
            cooling: 0.995,
            steps: 2000,
            seed: 0,
            strategy: SliceStrategy::Budget,
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.budget_bytes == 0 {
            return Err(Error::InvalidArgument("memory budget must be positive".into()));
        }
        if !(self.cooling > 0.0 && self.cooling < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "cooling factor {} is not in (0, 1)",
                self.cooling
            )));
        }
        if !(self.initial_temperature >= 0.0) {
            return Err(Error::InvalidArgument("initial temperature must be nonnegative".into()));
        }
        Ok(())
    }
}

type Legs = Vec<(u32, u32)>;

/// Pairs the two tensors whose contraction gives the smallest result (then
/// the fewest multiplications, then the smallest id pair) until one remains.
pub fn greedy_tree(net: &TensorNetwork) -> ContractionTree {
    let model = CostModel::new(net, &BTreeSet::new());
    let leaves = net.num_tensors();
    let mut legs: Vec<Legs> = (0..leaves).map(|t| model.leaf(t).to_vec()).collect();
    let mut holders: HashMap<u32, BTreeSet<usize>> = HashMap::new();
    for (t, l) in legs.iter().enumerate() {
        for &(d, _) in l {
            holders.entry(d).or_default().insert(t);
        }
    }
    let mut active: BTreeSet<usize> = (0..leaves).collect();
    let mut queue: BTreeSet<(usize, u32, usize, usize)> = BTreeSet::new();
    let mut scored: HashMap<(usize, usize), (usize, u32)> = HashMap::new();
    let mut scratch = Vec::new();
    let score = |a: usize, b: usize, legs: &[Legs], scratch: &mut Legs| {
        let u = model.merge(&legs[a], &legs[b], scratch);
        (scratch.len(), u)
    };
    let mut add_pairs = |t: usize,
                         legs: &[Legs],
                         holders: &HashMap<u32, BTreeSet<usize>>,
                         queue: &mut BTreeSet<(usize, u32, usize, usize)>,
                         scored: &mut HashMap<(usize, usize), (usize, u32)>| {
        let neighbours: BTreeSet<usize> = legs[t]
            .iter()
            .flat_map(|(d, _)| holders[d].iter().copied())
            .filter(|&o| o != t)
            .collect();
        for o in neighbours {
            let key = (o.min(t), o.max(t));
            if scored.contains_key(&key) {
                continue;
            }
            let (size, u) = score(key.0, key.1, legs, &mut scratch);
            scored.insert(key, (size, u));
            queue.insert((size, u, key.0, key.1));
        }
    };
    for t in 0..leaves {
        add_pairs(t, &legs, &holders, &mut queue, &mut scored);
    }

    let mut pairs = Vec::new();
    while active.len() > 1 {
        let (a, b) = match queue.pop_first() {
            Some((_, _, a, b)) => (a, b),
            None => {
                let mut it = active.iter();
                (*it.next().unwrap(), *it.next().unwrap())
            }
        };
        let mut merged = Vec::new();
        model.merge(&legs[a], &legs[b], &mut merged);
        let c = legs.len();
        for t in [a, b] {
            active.remove(&t);
            for &(d, _) in &legs[t] {
                holders.get_mut(&d).unwrap().remove(&t);
            }
        }
        let stale: Vec<(usize, usize)> = scored
            .keys()
            .copied()
            .filter(|&(x, y)| x == a || x == b || y == a || y == b)
            .collect();
        for key in stale {
            let (size, u) = scored.remove(&key).unwrap();
            queue.remove(&(size, u, key.0, key.1));
        }
        for &(d, _) in &merged {
            holders.entry(d).or_default().insert(c);
        }
        legs.push(merged);
        active.insert(c);
        pairs.push((a, b));
        add_pairs(c, &legs, &holders, &mut queue, &mut scored);
    }
    ContractionTree::from_pairs(leaves, &pairs).expect("greedy pairs form a tree")
}

const NONE: usize = usize::MAX;

/// Pointer form of a tree for local moves. Node ids match the postorder
/// positions of the tree it was built from.
#[derive(Clone)]
struct MutTree {
    left: Vec<usize>,
    right: Vec<usize>,
    parent: Vec<usize>,
    leaf: Vec<Option<usize>>,
    root: usize,
}

impl MutTree {
    fn from_tree(tree: &ContractionTree) -> MutTree {
        let n = tree.nodes().len();
        let mut t = MutTree {
            left: vec![NONE; n],
            right: vec![NONE; n],
            parent: vec![NONE; n],
            leaf: vec![None; n],
            root: n - 1,
        };
        for (i, node) in tree.nodes().iter().enumerate() {
            match *node {
                Node::Leaf(x) => t.leaf[i] = Some(x),
                Node::Pair(a, b) => {
                    t.left[i] = a;
                    t.right[i] = b;
                    t.parent[a] = i;
                    t.parent[b] = i;
                }
            }
        }
        t
    }

    fn to_tree(&self, sliced: &BTreeSet<Leg>) -> ContractionTree {
        let mut nodes = Vec::with_capacity(self.left.len());
        let mut ids = vec![NONE; self.left.len()];
        for i in self.postorder() {
            let node = match self.leaf[i] {
                Some(x) => Node::Leaf(x),
                None => Node::Pair(ids[self.left[i]], ids[self.right[i]]),
            };
            ids[i] = nodes.len();
            nodes.push(node);
        }
        ContractionTree::new(nodes, sliced.clone()).expect("moves preserve tree shape")
    }

    fn postorder(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.left.len());
        let mut stack = vec![(self.root, false)];
        while let Some((i, expanded)) = stack.pop() {
            if self.leaf[i].is_some() || expanded {
                out.push(i);
            } else {
                stack.push((i, true));
                stack.push((self.right[i], false));
                stack.push((self.left[i], false));
            }
        }
        out
    }

    fn replace_child(&mut self, p: usize, old: usize, new: usize) {
        if p == NONE {
            self.root = new;
        } else if self.left[p] == old {
            self.left[p] = new;
        } else {
            self.right[p] = new;
        }
        self.parent[new] = p;
    }

    /// Swaps two subtrees, neither containing the other.
    fn swap(&mut self, u: usize, w: usize) {
        let (pu, pw) = (self.parent[u], self.parent[w]);
        if pu == pw {
            return;
        }
        self.replace_child(pu, u, w);
        self.replace_child(pw, w, u);
    }

    /// Moves leaf `l` next to node `target`, reusing its parent node.
    fn transplant(&mut self, l: usize, target: usize) {
        let p = self.parent[l];
        let s = if self.left[p] == l { self.right[p] } else { self.left[p] };
        self.replace_child(self.parent[p], p, s);
        let tp = self.parent[target];
        self.replace_child(tp, target, p);
        self.left[p] = target;
        self.right[p] = l;
        self.parent[target] = p;
        self.parent[l] = p;
    }

    /// `(log2 multiplications, largest rank)`.
    fn evaluate(&self, model: &CostModel, scratch: &mut Vec<Legs>) -> (f64, usize) {
        scratch.resize(self.left.len(), Vec::new());
        let mut mults = 0.0;
        let mut rank = 0;
        for i in self.postorder() {
            if let Some(x) = self.leaf[i] {
                scratch[i].clear();
                scratch[i].extend_from_slice(model.leaf(x));
            } else {
                let mut out = std::mem::take(&mut scratch[i]);
                let u = model.merge(&scratch[self.left[i]], &scratch[self.right[i]], &mut out);
                mults += (u as f64).exp2();
                scratch[i] = out;
            }
            rank = rank.max(scratch[i].len());
        }
        (if mults > 0.0 { mults.log2() } else { f64::NEG_INFINITY }, rank)
    }
}

fn budget_rank(budget: u64) -> usize {
    let entries = (budget / BYTES_PER_ENTRY).max(1);
    63 - entries.leading_zeros() as usize
}

/// Simulated annealing over subtree rotations and leaf transplants. The
/// objective is the log of the total multiplication count; trees whose
/// largest tensor exceeds the budget are never accepted. Returns the best
/// tree seen, which is never worse than `start`.
pub fn anneal_tree(net: &TensorNetwork, start: &ContractionTree, cfg: &PlannerConfig) -> Result<ContractionTree> {
    cfg.validate()?;
    start.validate(net)?;
    if cfg.steps == 0 || start.nodes().len() < 3 {
        return Ok(start.clone());
    }
    let model = CostModel::new(net, start.sliced());
    let mut rng = rng::stream(cfg.seed, rng::ANNEALING);
    let mut cur = MutTree::from_tree(start);
    let mut scratch = Vec::new();
    let (mut cur_cost, start_rank) = cur.evaluate(&model, &mut scratch);
    let max_rank = start_rank.max(budget_rank(cfg.budget_bytes));
    let mut best = cur.clone();
    let mut best_cost = cur_cost;
    let leaves: Vec<usize> = (0..cur.leaf.len()).filter(|&i| cur.leaf[i].is_some()).collect();
    let internal: Vec<usize> = (0..cur.leaf.len()).filter(|&i| cur.leaf[i].is_none()).collect();
    let mut temperature = cfg.initial_temperature;

    for _ in 0..cfg.steps {
        let mut next = cur.clone();
        let moved = if rng.random_bool(0.5) {
            // rotation: swap the sibling of an internal child with one of its children
            let x = internal[rng.random_range(0..internal.len())];
            let (y, z) = if rng.random_bool(0.5) {
                (next.left[x], next.right[x])
            } else {
                (next.right[x], next.left[x])
            };
            if next.leaf[y].is_some() {
                false
            } else {
                let a = if rng.random_bool(0.5) {
                    next.left[y]
                } else {
                    next.right[y]
                };
                next.swap(z, a);
                true
            }
        } else {
            let l = leaves[rng.random_range(0..leaves.len())];
            let p = next.parent[l];
            let target = rng.random_range(0..next.leaf.len());
            if target == l || target == p {
                false
            } else {
                next.transplant(l, target);
                true
            }
        };
        if moved {
            let (cost, rank) = next.evaluate(&model, &mut scratch);
            if rank <= max_rank {
                let delta = cost - cur_cost;
                let accept = delta <= 0.0 || (temperature > 0.0 && rng.random::<f64>() < (-delta / temperature).exp());
                if accept {
                    cur = next;
                    cur_cost = cost;
                    if cur_cost < best_cost {
                        best = cur.clone();
                        best_cost = cur_cost;
                    }
                }
            }
        }
        temperature *= cfg.cooling;
    }
    Ok(best.to_tree(start.sliced()))
}

/// Leg lists of every node (leaves in full, minus sliced legs).
fn node_legs(net: &TensorNetwork, tree: &ContractionTree) -> Result<Vec<Vec<Leg>>> {
    let infos = annotate(net, tree)?;
    Ok(tree
        .nodes()
        .iter()
        .zip(infos)
        .map(|(node, info)| match *node {
            Node::Leaf(t) => {
                let mut l: Vec<Leg> = net.tensors()[t]
                    .legs
                    .iter()
                    .copied()
                    .filter(|l| !tree.sliced().contains(l))
                    .collect();
                l.sort_unstable();
                l
            }
            Node::Pair(..) => info.legs,
        })
        .collect())
}

/// Adds sliced legs to `tree` until its largest tensor fits in `budget`
/// bytes (and, for [`SliceStrategy::MinCount`], until enough legs are
/// sliced). Each step slices the leg found in the most over-budget
/// tensors, preferring legs of larger tensors and then lower labels.
pub fn choose_fully_sliced(
    net: &TensorNetwork,
    tree: &ContractionTree,
    budget: u64,
    strategy: SliceStrategy,
) -> Result<(BTreeSet<Leg>, ContractionTree)> {
    let mut sliced = tree.sliced().clone();
    let limit = budget_rank(budget);
    loop {
        let current = tree.clone().with_sliced(sliced.clone());
        let legs = node_legs(net, &current)?;
        let over: Vec<&Vec<Leg>> = legs
            .iter()
            .filter(|l| l.len() > limit || (1u64 << l.len().min(63)) * BYTES_PER_ENTRY > budget)
            .collect();
        let want_more = match strategy {
            SliceStrategy::Budget => false,
            SliceStrategy::MinCount(n) => sliced.len() < n,
        };
        if over.is_empty() && !want_more {
            return Ok((sliced, current));
        }
        let pool: Vec<&Vec<Leg>> = if over.is_empty() {
            legs.iter().collect()
        } else {
            over.clone()
        };
        // leg -> (tensors containing it, largest such tensor)
        let mut score: BTreeMap<Leg, (usize, usize)> = BTreeMap::new();
        for l in &pool {
            for &leg in l.iter() {
                if net.is_open(leg) {
                    continue;
                }
                let e = score.entry(leg).or_insert((0, 0));
                e.0 += 1;
                e.1 = e.1.max(l.len());
            }
        }
        let best = score
            .iter()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
            .map(|(&leg, _)| leg);
        match best {
            Some(leg) => {
                sliced.insert(leg);
            }
            None if over.is_empty() => return Ok((sliced, current)),
            None => {
                let needed = over
                    .iter()
                    .map(|l| (1u64 << l.len().min(59)) * BYTES_PER_ENTRY)
                    .max()
                    .unwrap_or(0);
                return Err(Error::BudgetUnreachable { needed, budget });
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct Plan {
    pub tree: ContractionTree,
    pub cost: CostReport,
}

/// Greedy start, annealing, slicing under the budget, then annealing again
/// with the sliced legs fixed.
pub fn plan(net: &TensorNetwork, cfg: &PlannerConfig) -> Result<Plan> {
    cfg.validate()?;
    let greedy = greedy_tree(net);
    let free = PlannerConfig {
        budget_bytes: u64::MAX,
        ..cfg.clone()
    };
    let annealed = anneal_tree(net, &greedy, &free)?;
    let (_, sliced) = choose_fully_sliced(net, &annealed, cfg.budget_bytes, cfg.strategy)?;
    let tree = anneal_tree(net, &sliced, cfg)?;
    let cost = contraction_cost(net, &tree)?;
    Ok(Plan { tree, cost })
}

/// Runs [`plan`] once per seed and keeps the cheapest, ties going to the
/// earlier seed in `seeds`.
pub fn plan_best_of(net: &TensorNetwork, cfg: &PlannerConfig, seeds: &[u64]) -> Result<Plan> {
    let plans: Vec<Result<Plan>> = seeds
        .par_iter()
        .map(|&seed| plan(net, &PlannerConfig { seed, ..cfg.clone() }))
        .collect();
    let mut best: Option<Plan> = None;
    for p in plans {
        let p = p?;
        if best.as_ref().is_none_or(|b| p.cost.log2_total() < b.cost.log2_total()) {
            best = Some(p);
        }
    }
    best.ok_or_else(|| Error::InvalidArgument("no planner seeds given".into()))
}

fn interaction_order(c: &Circuit) -> Vec<usize> {
    let n = c.num_qubits();
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for g in c.gates() {
        if let [a, b] = g.qubits[..] {
            adj[a].insert(b);
            adj[b].insert(a);
        }
    }
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(q) = queue.pop_front() {
            order.push(q);
            for &r in &adj[q] {
                if !seen[r] {
                    seen[r] = true;
                    queue.push_back(r);
                }
            }
        }
    }
    order
}

fn layout_cost(c: &Circuit, free: &[usize], cfg: &PlannerConfig) -> Result<f64> {
    let fixed = (0..c.num_qubits())
        .filter(|q| !free.contains(q))
        .map(|q| (q, 0u8))
        .collect();
    let net = build_network(
        c,
        &OutputSpec::batch(fixed, free.iter().copied()),
        &NetworkOptions::default(),
    )?;
    let tree = greedy_tree(&net);
    let (_, tree) = choose_fully_sliced(&net, &tree, cfg.budget_bytes, SliceStrategy::Budget)?;
    Ok(contraction_cost(&net, &tree)?.log2_total())
}

/// Picks `count` outputs to leave open: a breadth-first cluster over the
/// two-qubit interaction graph from qubit 0, improved by single swaps while
/// the contraction cost drops. Returned sorted.
pub fn choose_free_outputs(c: &Circuit, count: usize, cfg: &PlannerConfig) -> Result<Vec<usize>> {
    let n = c.num_qubits();
    if count > n {
        return Err(Error::InvalidArgument(format!(
            "cannot leave {count} of {n} outputs open"
        )));
    }
    let mut free: Vec<usize> = interaction_order(c).into_iter().take(count).collect();
    free.sort_unstable();
    if count == 0 || count == n {
        return Ok(free);
    }
    let mut cost = layout_cost(c, &free, cfg)?;
    for _round in 0..2 {
        let mut best: Option<(f64, Vec<usize>)> = None;
        for i in 0..free.len() {
            for o in 0..n {
                if free.contains(&o) {
                    continue;
                }
                let mut cand = free.clone();
                cand[i] = o;
                cand.sort_unstable();
                let cc = layout_cost(c, &cand, cfg)?;
                if cc < cost - 1e-9 && best.as_ref().is_none_or(|(b, _)| cc < *b - 1e-9) {
                    best = Some((cc, cand));
                }
            }
        }
        match best {
            Some((cc, cand)) => {
                cost = cc;
                free = cand;
            }
            None => break,
        }
    }
    Ok(free)
}
