//! Partial slicing: choose a few early wire vertices, compute the norms of
//! every slice over them in one contraction, and keep only the heaviest
//! slices needed to reach a target fidelity.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use crate::circuit::{Circuit, VertexId, VertexSet};
use crate::error::{Error, Result};
use crate::tensornet::{
    build_network, emit_circuit, network_with_provenance, sliced_contract_sum, wire_legs, AmplitudeBatch,
    ContractOptions, ContractionTree, Leg, NetworkOptions, OutputSpec, TensorNetwork,
};
use crate::treeopt::{self, PlannerConfig, SliceStrategy};
use crate::C64;

/// `‖ψᵢ‖²` for every bit pattern `i` of the partially sliced vertices,
/// indexed with the lowest vertex id as the high bit.
#[derive(Clone, Debug, PartialEq)]
pub struct NormTable {
    pub vertices: VertexSet,
    pub values: Vec<f64>,
}

impl NormTable {
    pub fn k(&self) -> usize {
        self.vertices.len()
    }

    /// One line per index: `<k-bit binary index> <norm>`.
    pub fn to_text(&self) -> String {
        let k = self.k();
        let mut out = String::new();
        for (i, r) in self.values.iter().enumerate() {
            let _ = writeln!(out, "{} {r:e}", crate::bits::format_bits(i, k));
        }
        out
    }

    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_text().as_bytes()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SlicePlan {
    /// Vertices of the fully sliced legs the plan was chosen from.
    pub sliced: VertexSet,
    /// Partially sliced vertices.
    pub partial: VertexSet,
    /// Accepted slice indices, heaviest first.
    pub accepted: Vec<usize>,
    pub norms: NormTable,
    /// Achieved fidelity, the total norm of the accepted slices.
    pub fidelity: f64,
    pub target: f64,
}

impl SlicePlan {
    pub fn k(&self) -> usize {
        self.partial.len()
    }
}

const NORM_IMAG_TOL: f64 = 1e-9;
const NORM_NEG_TOL: f64 = 1e-12;
const NORM_SUM_TOL: f64 = 1e-6;
const TARGET_TOL: f64 = 1e-12;

/// Fails if some vertex of `s` lies in the lightcone of another.
pub fn check_lightcone_condition(c: &Circuit, s: &VertexSet) -> Result<()> {
    for v in s.iter() {
        let cone = c.lightcone_inputs(&[v].into_iter().collect())?;
        if let Some(w) = s.iter().find(|&w| cone.contains(w)) {
            return Err(Error::LightconeViolation { inner: w, outer: v });
        }
    }
    Ok(())
}

/// Network for the slice norms: the lightcone of `s` against its conjugate,
/// with the other outputs traced out and the legs of `s` left open.
pub fn build_norm_network(c: &Circuit, s: &VertexSet, opts: &NetworkOptions) -> Result<TensorNetwork> {
    check_lightcone_condition(c, s)?;
    let cone = c.lightcone(s)?;
    let sub = c.subcircuit(&cone)?;
    let n = c.num_qubits();
    let mut wires = vec![false; n];
    for g in sub.gates() {
        for &q in &g.qubits {
            wires[q] = true;
        }
    }
    let mut open_vertices = Vec::new();
    for v in s.iter() {
        wires[c.position(v)?.0] = true;
        open_vertices.push(c.map_vertex(v, &sub)?);
    }
    let legs = wire_legs(&sub, opts.diagonal_gates);
    let offset = sub.num_vertices();
    let outputs: BTreeSet<Leg> = (0..n)
        .filter(|&q| wires[q])
        .map(|q| legs[sub.output_vertex(q)])
        .collect();
    let conj = |l: Leg| if outputs.contains(&l) { l } else { l + offset };

    let mut tensors = Vec::new();
    emit_circuit(&sub, &legs, opts.diagonal_gates, false, &wires, &|l| l, &mut tensors);
    emit_circuit(&sub, &legs, opts.diagonal_gates, true, &wires, &conj, &mut tensors);

    let mut leg_vertex: BTreeMap<Leg, VertexId> = BTreeMap::new();
    for q in (0..n).filter(|&q| wires[q]) {
        for slot in 0..=sub.wire_len(q) {
            let w = sub.vertex(q, slot).unwrap();
            let v = c.vertex(q, slot).unwrap();
            leg_vertex.entry(legs[w]).or_insert(v);
            leg_vertex.entry(conj(legs[w])).or_insert(v);
        }
    }
    let open = open_vertices.iter().map(|&w| legs[w]).collect();
    network_with_provenance(tensors, open, leg_vertex, opts.simplify)
}

/// Contracts the norm network. Tiny imaginary parts and negative values
/// from rounding are dropped; anything larger is an error.
pub fn compute_norms(c: &Circuit, s: &VertexSet, planner: &PlannerConfig) -> Result<NormTable> {
    if s.is_empty() {
        return Ok(NormTable {
            vertices: VertexSet::new(),
            values: vec![1.0],
        });
    }
    let net = build_norm_network(c, s, &NetworkOptions::default())?;
    let cfg = PlannerConfig {
        strategy: SliceStrategy::Budget,
        ..planner.clone()
    };
    let plan = treeopt::plan(&net, &cfg)?;
    let (t, _) = sliced_contract_sum(&net, &plan.tree, &[], &[0], &ContractOptions::default())?;
    let t = t.permuted(net.open());
    let mut values = Vec::with_capacity(t.data.len());
    for (i, z) in t.data.iter().enumerate() {
        if z.im.abs() >= NORM_IMAG_TOL {
            return Err(Error::Numerical(format!(
                "slice norm {i} has imaginary part {:e}",
                z.im
            )));
        }
        if z.re < -NORM_NEG_TOL {
            return Err(Error::Numerical(format!("slice norm {i} is negative ({:e})", z.re)));
        }
        values.push(z.re.max(0.0));
    }
    let total: f64 = values.iter().sum();
    if (total - 1.0).abs() > NORM_SUM_TOL {
        return Err(Error::Numerical(format!("slice norms sum to {total}, not 1")));
    }
    Ok(NormTable {
        vertices: s.clone(),
        values,
    })
}

/// Greedy choice of up to `k` vertices of `i`, none in another's lightcone,
/// keeping the lightcone of the chosen set small.
pub fn sliced_vertex_select(c: &Circuit, i: &VertexSet, k: usize) -> Result<VertexSet> {
    let mut s = VertexSet::new();
    let mut cone = VertexSet::new();
    while s.len() < k {
        let mut best: Option<(usize, VertexId, VertexSet)> = None;
        for v in i.iter() {
            if cone.contains(v) || s.contains(v) {
                continue;
            }
            let mut with_v = s.clone();
            with_v.insert(v);
            let l = c.lightcone_inputs(&with_v)?;
            if best.as_ref().is_none_or(|(size, _, _)| l.len() < *size) {
                best = Some((l.len(), v, l));
            }
        }
        let Some((_, v, l)) = best else { break };
        let cone_v = c.lightcone_inputs(&[v].into_iter().collect())?;
        s = s.difference(&cone_v);
        s.insert(v);
        cone = l;
    }
    Ok(s)
}

/// Adds to the sliced legs of `tree` the legs of `k` vertices picked by
/// [`sliced_vertex_select`] among every non-open leg of `net`. These sit
/// as close to the inputs as the lightcone condition allows.
pub fn slice_early_vertices(
    c: &Circuit,
    net: &TensorNetwork,
    tree: &ContractionTree,
    k: usize,
) -> Result<ContractionTree> {
    let candidates: VertexSet = net
        .legs()
        .into_iter()
        .filter(|&l| !net.is_open(l))
        .filter_map(|l| net.vertex_of_leg(l))
        .collect();
    let s = sliced_vertex_select(c, &candidates, k)?;
    let mut sliced = tree.sliced().clone();
    for v in s.iter() {
        sliced.insert(net.leg_of_vertex(v).expect("candidate has a leg"));
    }
    Ok(tree.clone().with_sliced(sliced))
}

/// `⌈3 − log₂ f⌉`.
pub fn default_k(f: f64) -> usize {
    (3.0 - f.log2()).ceil().max(0.0) as usize
}

fn check_target(f: f64) -> Result<()> {
    if !(f > 0.0 && f <= 1.0) {
        return Err(Error::InvalidArgument(format!("target fidelity {f} is not in (0, 1]")));
    }
    Ok(())
}

/// Heaviest slices first (ties by index), up to the shortest prefix whose
/// norm reaches `f`.
pub fn plan_from_norms(norms: NormTable, sliced: VertexSet, f: f64) -> Result<SlicePlan> {
    check_target(f)?;
    let k = norms.k();
    let mut order: Vec<usize> = (0..norms.values.len()).collect();
    order.sort_by(|&a, &b| norms.values[b].total_cmp(&norms.values[a]).then(a.cmp(&b)));
    let mut accepted = Vec::new();
    let mut fidelity = 0.0;
    for &i in &order {
        if f < 1.0 && fidelity >= f - TARGET_TOL {
            break;
        }
        accepted.push(i);
        fidelity += norms.values[i];
    }
    let bound = (f * (1u64 << k) as f64 - TARGET_TOL).ceil() as usize;
    if accepted.len() > bound.max(1) {
        return Err(Error::Numerical(format!(
            "{} slices accepted, more than the bound {bound}",
            accepted.len()
        )));
    }
    if fidelity < f - NORM_SUM_TOL {
        return Err(Error::Numerical(format!(
            "achieved fidelity {fidelity} is below the target {f}"
        )));
    }
    Ok(SlicePlan {
        sliced,
        partial: norms.vertices.clone(),
        accepted,
        norms,
        fidelity,
        target: f,
    })
}

/// Chooses the partially sliced vertices among `sliced` (`k` of them, or
/// `⌈3 − log₂ f⌉` by default), computes their norms, and keeps the heaviest
/// slices reaching fidelity `f`.
pub fn select_partial_slices(
    c: &Circuit,
    sliced: &VertexSet,
    f: f64,
    k: Option<usize>,
    planner: &PlannerConfig,
) -> Result<SlicePlan> {
    check_target(f)?;
    let s = sliced_vertex_select(c, sliced, k.unwrap_or_else(|| default_k(f)))?;
    if s.is_empty() && f < 1.0 {
        return Err(Error::InvalidArgument(
            "no vertex available for partial slicing; slice more legs or use fidelity 1".into(),
        ));
    }
    let norms = compute_norms(c, &s, planner)?;
    plan_from_norms(norms, sliced.clone(), f)
}

/// `|X| / 2^k`, a lower bound on the achieved fidelity.
pub fn fidelity_lower_bound(plan: &SlicePlan) -> f64 {
    plan.accepted.len() as f64 / (1u64 << plan.k()) as f64
}

/// Multiplications when only the accepted slices are contracted.
pub fn cost_with_fidelity(full_cost: f64, plan: &SlicePlan) -> f64 {
    let cost = fidelity_lower_bound(plan) * full_cost;
    debug_assert!(full_cost == 0.0 || cost < (plan.target + (-(plan.k() as f64)).exp2()) * full_cost);
    cost
}

/// Legs of the partially sliced vertices in `net`.
pub fn partial_legs(net: &TensorNetwork, plan: &SlicePlan) -> Result<Vec<Leg>> {
    plan.partial
        .iter()
        .map(|v| {
            net.leg_of_vertex(v)
                .ok_or_else(|| Error::SliceMismatch(format!("vertex {v} has no leg in the network")))
        })
        .collect()
}

/// Amplitudes of `ψ_X / ‖ψ_X‖` on the outputs described by `spec`. The tree
/// must slice every partially sliced leg.
pub fn partial_amplitudes(
    c: &Circuit,
    plan: &SlicePlan,
    spec: &OutputSpec,
    tree: &ContractionTree,
    opts: &ContractOptions,
) -> Result<AmplitudeBatch> {
    let net = build_network(c, spec, &NetworkOptions::default())?;
    partial_amplitudes_in(c, &net, plan, spec, tree, opts)
}

/// As [`partial_amplitudes`] with the network already built from `spec`.
pub fn partial_amplitudes_in(
    c: &Circuit,
    net: &TensorNetwork,
    plan: &SlicePlan,
    spec: &OutputSpec,
    tree: &ContractionTree,
    opts: &ContractOptions,
) -> Result<AmplitudeBatch> {
    if plan.accepted.is_empty() || plan.fidelity <= 0.0 {
        return Err(Error::SliceMismatch("slice plan accepts no slices".into()));
    }
    let legs = partial_legs(net, plan)?;
    let (t, _) = sliced_contract_sum(net, tree, &legs, &plan.accepted, opts)?;
    let t = t.permuted(net.open());
    let scale = 1.0 / plan.fidelity.sqrt();
    let n = c.num_qubits();
    let (fixed, free) = match spec {
        OutputSpec::Closed(bits) => (bits.iter().enumerate().map(|(q, &b)| (q, b)).collect(), Vec::new()),
        OutputSpec::Batch { fixed, free } => (fixed.clone(), free.clone()),
        OutputSpec::OpenAll => (BTreeMap::new(), (0..n).collect()),
    };
    Ok(AmplitudeBatch {
        num_qubits: n,
        fixed,
        free,
        amplitudes: t.data.iter().map(|z| z * C64::new(scale, 0.0)).collect(),
    })
}

/// Text form: header lines, the accepted slices, then the full norm table.
pub fn write_slice_plan(plan: &SlicePlan) -> String {
    let list = |s: &VertexSet| s.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
    let mut out = String::from("sliceplan v1\n");
    let _ = writeln!(out, "k {}", plan.k());
    let _ = writeln!(out, "S {}", list(&plan.partial));
    let _ = writeln!(out, "I {}", list(&plan.sliced));
    let _ = writeln!(out, "X {}", plan.accepted.len());
    for &i in &plan.accepted {
        let _ = writeln!(out, "x {i:x} {:e}", plan.norms.values[i]);
    }
    let _ = writeln!(out, "F {:e}", plan.fidelity);
    let _ = writeln!(out, "f {:e}", plan.target);
    let _ = writeln!(out, "norms {}", plan.norms.digest());
    out.push_str(&plan.norms.to_text());
    out
}

pub fn read_slice_plan(text: &str) -> Result<SlicePlan> {
    let bad = |line: usize, message: String| Error::Format {
        kind: "slice plan",
        line,
        message,
    };
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    let mut pos = 0;
    let mut field = |name: &str| -> Result<(usize, Vec<String>)> {
        let &(no, l) = lines.get(pos).ok_or_else(|| bad(0, format!("missing `{name}` line")))?;
        pos += 1;
        let mut words = l.split_whitespace();
        if words.next() != Some(name) {
            return Err(bad(no, format!("expected `{name}`")));
        }
        Ok((no, words.map(str::to_string).collect()))
    };
    let num = |no: usize, w: &str| w.parse::<usize>().map_err(|_| bad(no, format!("bad number `{w}`")));
    let real = |no: usize, w: &str| w.parse::<f64>().map_err(|_| bad(no, format!("bad real `{w}`")));

    let (no, v) = field("sliceplan")?;
    if v != ["v1"] {
        return Err(bad(no, "unsupported version".into()));
    }
    let (no, v) = field("k")?;
    let k = num(no, v.first().map(String::as_str).unwrap_or(""))?;
    let (no, v) = field("S")?;
    let partial: VertexSet = v.iter().map(|w| num(no, w)).collect::<Result<_>>()?;
    let (no, v) = field("I")?;
    let sliced: VertexSet = v.iter().map(|w| num(no, w)).collect::<Result<_>>()?;
    let (no, v) = field("X")?;
    let count = num(no, v.first().map(String::as_str).unwrap_or(""))?;
    let mut accepted = Vec::with_capacity(count);
    for _ in 0..count {
        let (no, v) = field("x")?;
        let w = v.first().ok_or_else(|| bad(no, "missing slice index".into()))?;
        accepted.push(usize::from_str_radix(w, 16).map_err(|_| bad(no, format!("bad hex index `{w}`")))?);
    }
    let (no, v) = field("F")?;
    let fidelity = real(no, v.first().map(String::as_str).unwrap_or(""))?;
    let (no, v) = field("f")?;
    let target = real(no, v.first().map(String::as_str).unwrap_or(""))?;
    let (no, v) = field("norms")?;
    let digest = v.first().cloned().unwrap_or_default();
    if partial.len() != k {
        return Err(bad(no, format!("k is {k} but S has {} vertices", partial.len())));
    }
    let mut values = vec![0.0; 1 << k];
    let mut seen = vec![false; 1 << k];
    for &(no, l) in &lines[pos..] {
        let mut words = l.split_whitespace();
        let (Some(b), Some(r), None) = (words.next(), words.next(), words.next()) else {
            return Err(bad(no, "expected `<index> <norm>`".into()));
        };
        let i = crate::bits::parse_bits(b, k).map_err(|e| bad(no, e.to_string()))?;
        values[i] = real(no, r)?;
        seen[i] = true;
    }
    if seen.iter().any(|s| !s) {
        return Err(bad(0, "norm table is incomplete".into()));
    }
    let norms = NormTable {
        vertices: partial.clone(),
        values,
    };
    if norms.digest() != digest {
        return Err(bad(0, "norm table digest mismatch".into()));
    }
    if accepted.iter().any(|&i| i >= 1 << k) {
        return Err(bad(0, "slice index out of range".into()));
    }
    Ok(SlicePlan {
        sliced,
        partial,
        accepted,
        norms,
        fidelity,
        target,
    })
}
