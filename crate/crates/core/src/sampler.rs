//! Rejection sampling over batches of amplitudes, and the estimates of its
//! truncation error.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use statrs::function::gamma::gamma_ur;

use crate::circuit::{Circuit, VertexSet};
use crate::error::{Error, Result};
use crate::fidelity::{default_k, partial_amplitudes_in, select_partial_slices, slice_early_vertices, SlicePlan};
use crate::rng;
use crate::tensornet::{
    build_network, AmplitudeBatch, ContractOptions, ContractionTree, NetworkOptions, OutputSpec, TensorNetwork,
};
use crate::treeopt::{self, PlannerConfig};

/// Source of batches: batch `j` holds `batch_size()` bitstrings sharing the
/// same values on the batch-defining outputs.
pub trait BatchProvider: Sync {
    fn num_qubits(&self) -> usize;
    fn batch_count(&self) -> usize;
    fn batch_size(&self) -> usize;
    fn probabilities(&self, j: usize) -> Result<Vec<f64>>;
    /// Full bitstring index of entry `i` of batch `j`.
    fn bitstring(&self, j: usize, i: usize) -> usize;
}

/// Splits bitstrings into batches: the `free` qubits index within a batch,
/// the remaining qubits (ascending, first as the high bit) pick the batch.
#[derive(Clone, Debug, PartialEq)]
pub struct BatchLayout {
    pub num_qubits: usize,
    pub free: Vec<usize>,
    pub fixed: Vec<usize>,
}

impl BatchLayout {
    pub fn new(num_qubits: usize, free: &[usize]) -> Result<BatchLayout> {
        let mut free = free.to_vec();
        free.sort_unstable();
        free.dedup();
        if free.iter().any(|&q| q >= num_qubits) {
            return Err(Error::InvalidArgument("free output out of range".into()));
        }
        let fixed = (0..num_qubits).filter(|q| free.binary_search(q).is_err()).collect();
        Ok(BatchLayout {
            num_qubits,
            free,
            fixed,
        })
    }

    pub fn fixed_bits(&self, j: usize) -> BTreeMap<usize, u8> {
        let b = self.fixed.len();
        self.fixed
            .iter()
            .enumerate()
            .map(|(p, &q)| (q, (j >> (b - 1 - p) & 1) as u8))
            .collect()
    }

    pub fn bitstring(&self, j: usize, i: usize) -> usize {
        let n = self.num_qubits;
        let (a, b) = (self.free.len(), self.fixed.len());
        let mut x = 0;
        for (p, &q) in self.fixed.iter().enumerate() {
            x |= (j >> (b - 1 - p) & 1) << (n - 1 - q);
        }
        for (p, &q) in self.free.iter().enumerate() {
            x |= (i >> (a - 1 - p) & 1) << (n - 1 - q);
        }
        x
    }
}

/// Batches cut from a known distribution over all bitstrings.
pub struct DenseBatches {
    pub probs: Vec<f64>,
    pub layout: BatchLayout,
}

impl DenseBatches {
    pub fn new(probs: Vec<f64>, free: &[usize]) -> Result<DenseBatches> {
        let n = probs.len().trailing_zeros() as usize;
        if probs.len() != 1 << n {
            return Err(Error::InvalidArgument(
                "distribution length is not a power of two".into(),
            ));
        }
        Ok(DenseBatches {
            layout: BatchLayout::new(n, free)?,
            probs,
        })
    }

    /// The trailing `log₂ batch_size` qubits are free.
    pub fn with_batch_size(probs: Vec<f64>, batch_size: usize) -> Result<DenseBatches> {
        let n = probs.len().trailing_zeros() as usize;
        let a = batch_size.trailing_zeros() as usize;
        if batch_size != 1 << a || a > n {
            return Err(Error::InvalidArgument(format!(
                "batch size {batch_size} is not a power of two up to 2^{n}"
            )));
        }
        let free: Vec<usize> = (n - a..n).collect();
        DenseBatches::new(probs, &free)
    }
}

impl BatchProvider for DenseBatches {
    fn num_qubits(&self) -> usize {
        self.layout.num_qubits
    }
    fn batch_count(&self) -> usize {
        1 << self.layout.fixed.len()
    }
    fn batch_size(&self) -> usize {
        1 << self.layout.free.len()
    }
    fn probabilities(&self, j: usize) -> Result<Vec<f64>> {
        Ok((0..self.batch_size())
            .map(|i| self.probs[self.layout.bitstring(j, i)])
            .collect())
    }
    fn bitstring(&self, j: usize, i: usize) -> usize {
        self.layout.bitstring(j, i)
    }
}

/// Batches of a circuit computed by contracting the accepted slices of a
/// partial slicing plan.
pub struct CircuitBatches {
    pub circuit: Circuit,
    pub layout: BatchLayout,
    pub tree: ContractionTree,
    pub plan: SlicePlan,
    pub contract: ContractOptions,
}

impl CircuitBatches {
    /// Plans the batch contraction, slices `k` early vertices on top of the
    /// planner's choice, then selects the accepted slices for fidelity `f`.
    pub fn prepare(
        c: &Circuit,
        free: &[usize],
        f: f64,
        k: Option<usize>,
        planner: &PlannerConfig,
    ) -> Result<CircuitBatches> {
        let layout = BatchLayout::new(c.num_qubits(), free)?;
        let net = template_network(c, &layout)?;
        let k = k.unwrap_or_else(|| default_k(f));
        let tree = treeopt::plan(&net, planner)?.tree;
        let tree = slice_early_vertices(c, &net, &tree, k)?;
        let tree = treeopt::anneal_tree(&net, &tree, planner)?;
        let sliced = sliced_vertices(&net, &tree);
        let plan = select_partial_slices(c, &sliced, f, Some(k), planner)?;
        Ok(CircuitBatches {
            circuit: c.clone(),
            layout,
            tree,
            plan,
            contract: ContractOptions {
                budget_bytes: Some(planner.budget_bytes),
            },
        })
    }

    /// Uses a tree and plan made elsewhere, e.g. read from files.
    pub fn from_parts(c: &Circuit, free: &[usize], tree: ContractionTree, plan: SlicePlan) -> Result<CircuitBatches> {
        let layout = BatchLayout::new(c.num_qubits(), free)?;
        tree.validate(&template_network(c, &layout)?)?;
        Ok(CircuitBatches {
            circuit: c.clone(),
            layout,
            tree,
            plan,
            contract: ContractOptions::default(),
        })
    }

    pub fn spec(&self, j: usize) -> OutputSpec {
        OutputSpec::batch(self.layout.fixed_bits(j), self.layout.free.iter().copied())
    }

    pub fn amplitudes(&self, j: usize) -> Result<AmplitudeBatch> {
        let spec = self.spec(j);
        let net = build_network(&self.circuit, &spec, &NetworkOptions::default())?;
        partial_amplitudes_in(&self.circuit, &net, &self.plan, &spec, &self.tree, &self.contract)
    }
}

/// Batch network with every fixed output set to 0. Its structure is the
/// same for every batch.
pub fn template_network(c: &Circuit, layout: &BatchLayout) -> Result<TensorNetwork> {
    let fixed = layout.fixed.iter().map(|&q| (q, 0u8)).collect();
    build_network(
        c,
        &OutputSpec::batch(fixed, layout.free.iter().copied()),
        &NetworkOptions::default(),
    )
}

/// Circuit vertices behind the sliced legs of `tree`.
pub fn sliced_vertices(net: &TensorNetwork, tree: &ContractionTree) -> VertexSet {
    tree.sliced().iter().filter_map(|&l| net.vertex_of_leg(l)).collect()
}

impl BatchProvider for CircuitBatches {
    fn num_qubits(&self) -> usize {
        self.layout.num_qubits
    }
    fn batch_count(&self) -> usize {
        1 << self.layout.fixed.len()
    }
    fn batch_size(&self) -> usize {
        1 << self.layout.free.len()
    }
    fn probabilities(&self, j: usize) -> Result<Vec<f64>> {
        Ok(self.amplitudes(j)?.probabilities())
    }
    fn bitstring(&self, j: usize, i: usize) -> usize {
        self.layout.bitstring(j, i)
    }
}

#[derive(Clone, Debug)]
pub struct SamplerConfig {
    /// Oversampling parameter, above 1.
    pub alpha: f64,
    pub num_samples: usize,
    pub seed: u64,
    /// Batch indices drawn and computed ahead of the acceptance loop.
    pub lookahead: usize,
    /// Keep computed batches for repeated draws of the same index.
    pub memo: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            alpha: 2.0,
            num_samples: 1,
            seed: 0,
            lookahead: 64,
            memo: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleRecord {
    pub batch: usize,
    /// Acceptance probability of the batch.
    pub acceptance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleSummary {
    pub alpha: f64,
    pub batch_count: usize,
    pub batch_size: usize,
    /// Every batch drawn, in draw order, with its mass.
    pub drawn: Vec<(usize, f64)>,
    pub accepted: usize,
    pub acceptance_rate: f64,
    pub epsilon_empirical: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    pub num_qubits: usize,
    pub bitstrings: Vec<usize>,
    pub records: Vec<SampleRecord>,
    pub summary: SampleSummary,
}

impl SampleSet {
    /// One bitstring per line.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.bitstrings.len() * (self.num_qubits + 1));
        for &b in &self.bitstrings {
            out.push_str(&crate::bits::format_bits(b, self.num_qubits));
            out.push('\n');
        }
        out
    }

    pub fn summary_text(&self) -> String {
        let s = &self.summary;
        let mut out = String::new();
        let _ = writeln!(out, "samples {}", self.bitstrings.len());
        let _ = writeln!(out, "alpha {}", s.alpha);
        let _ = writeln!(out, "batches {}", s.drawn.len());
        let _ = writeln!(out, "acceptance_rate {}", s.acceptance_rate);
        let _ = writeln!(out, "epsilon_empirical {:e}", s.epsilon_empirical);
        out
    }
}

const MASS_TOL: f64 = 1e-9;

/// Draws batch indices uniformly with replacement, accepts batch `j` with
/// probability `min(1, p_j N_B / α)`, and on acceptance draws one bitstring
/// of the batch in proportion to its probability.
pub fn sample<P: BatchProvider + ?Sized>(provider: &P, cfg: &SamplerConfig) -> Result<SampleSet> {
    if !(cfg.alpha > 1.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha must exceed 1, got {}",
            cfg.alpha
        )));
    }
    let n_b = provider.batch_count();
    let n_a = provider.batch_size();
    if n_a * n_b != 1 << provider.num_qubits() {
        return Err(Error::InvalidArgument("batch count times batch size is not 2^n".into()));
    }
    let mut draw = rng::stream(cfg.seed, rng::BATCH_INDEX);
    let mut accept = rng::stream(cfg.seed, rng::ACCEPTANCE);
    let mut memo: HashMap<usize, (Vec<f64>, f64)> = HashMap::new();
    let mut bitstrings = Vec::with_capacity(cfg.num_samples);
    let mut records = Vec::with_capacity(cfg.num_samples);
    let mut drawn = Vec::new();
    let lookahead = cfg.lookahead.max(1);

    while bitstrings.len() < cfg.num_samples {
        let js: Vec<usize> = (0..lookahead).map(|_| draw.random_range(0..n_b)).collect();
        let mut missing: Vec<usize> = js.iter().copied().filter(|j| !memo.contains_key(j)).collect();
        missing.sort_unstable();
        missing.dedup();
        let computed: Vec<(usize, Result<Vec<f64>>)> =
            missing.par_iter().map(|&j| (j, provider.probabilities(j))).collect();
        let mut fresh: HashMap<usize, (Vec<f64>, f64)> = HashMap::new();
        for (j, probs) in computed {
            let probs = probs?;
            let mass: f64 = probs.iter().sum();
            if !(-MASS_TOL..=1.0 + MASS_TOL).contains(&mass) {
                return Err(Error::Numerical(format!("batch {j} has probability mass {mass}")));
            }
            fresh.insert(j, (probs, mass.clamp(0.0, 1.0)));
        }
        for j in js {
            if bitstrings.len() == cfg.num_samples {
                break;
            }
            let (probs, mass) = memo.get(&j).or_else(|| fresh.get(&j)).expect("batch computed");
            let t = (mass * n_b as f64 / cfg.alpha).min(1.0);
            drawn.push((j, *mass));
            if accept.random::<f64>() < t {
                let u = accept.random::<f64>() * mass;
                let mut acc = 0.0;
                let mut pick = probs.len() - 1;
                for (i, &p) in probs.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        pick = i;
                        break;
                    }
                }
                while probs[pick] <= 0.0 && pick > 0 {
                    pick -= 1;
                }
                bitstrings.push(provider.bitstring(j, pick));
                records.push(SampleRecord {
                    batch: j,
                    acceptance: t,
                });
            }
        }
        if cfg.memo {
            memo.extend(fresh);
        }
    }

    let masses: Vec<f64> = drawn.iter().map(|&(_, m)| m).collect();
    let epsilon_empirical = if masses.is_empty() {
        0.0
    } else {
        estimate_epsilon_empirical(&masses, cfg.alpha, n_b)?
    };
    let accepted = bitstrings.len();
    Ok(SampleSet {
        num_qubits: provider.num_qubits(),
        bitstrings,
        records,
        summary: SampleSummary {
            alpha: cfg.alpha,
            batch_count: n_b,
            batch_size: n_a,
            acceptance_rate: if drawn.is_empty() {
                0.0
            } else {
                accepted as f64 / drawn.len() as f64
            },
            drawn,
            accepted,
            epsilon_empirical,
        },
    })
}

/// `N_B · Γ(N_A, αN_A) / Γ(N_A)`.
pub fn estimate_epsilon_gamma(n_a: usize, n_b: usize, alpha: f64) -> Result<f64> {
    if n_a == 0 || !(alpha > 1.0) {
        return Err(Error::InvalidArgument("need N_A ≥ 1 and alpha > 1".into()));
    }
    if alpha.is_infinite() {
        return Ok(0.0);
    }
    let q = gamma_ur(n_a as f64, alpha * n_a as f64);
    Ok(if q.is_finite() { n_b as f64 * q } else { 0.0 })
}

/// `𝔼 max(0, Y − α)` for `Y ~ Gamma(N_A, rate N_A)`, the expected excess
/// mass of one batch in units of `1/N_B`.
pub fn expected_batch_excess(n_a: usize, alpha: f64) -> Result<f64> {
    if n_a == 0 || !(alpha > 1.0) {
        return Err(Error::InvalidArgument("need N_A ≥ 1 and alpha > 1".into()));
    }
    if alpha.is_infinite() {
        return Ok(0.0);
    }
    let (a, x) = (n_a as f64, alpha * n_a as f64);
    Ok((gamma_ur(a + 1.0, x) - alpha * gamma_ur(a, x)).max(0.0))
}

/// `N_B` times the mean excess `max(0, p_j − α/N_B)` over the drawn batches.
pub fn estimate_epsilon_empirical(masses: &[f64], alpha: f64, n_b: usize) -> Result<f64> {
    if masses.is_empty() {
        return Err(Error::InvalidArgument("no batches drawn".into()));
    }
    let cut = alpha / n_b as f64;
    let total: f64 = masses.iter().map(|&p| (p - cut).max(0.0)).sum();
    Ok(n_b as f64 * total / masses.len() as f64)
}

pub fn variational_distance_bound(epsilon: f64) -> f64 {
    epsilon
}

/// `f (1 − 4 √(d / f))`, valid only for `d < f / 16`.
pub fn fidelity_degradation_bound(f: f64, d: f64) -> Result<f64> {
    if !(f > 0.0) || !(d >= 0.0) || d >= f / 16.0 {
        return Err(Error::InvalidArgument(format!(
            "bound not applicable: needs d < f/16 (f = {f}, d = {d})"
        )));
    }
    Ok(f * (1.0 - 4.0 * (d / f).sqrt()))
}

/// Exact output distribution of the sampler for batches `probs[j][i]`.
pub fn acceptance_law(probs: &[Vec<f64>], alpha: f64) -> Vec<Vec<f64>> {
    let n_b = probs.len() as f64;
    let accept: Vec<f64> = probs
        .iter()
        .map(|b| (b.iter().sum::<f64>() * n_b / alpha).min(1.0))
        .collect();
    let total: f64 = accept.iter().sum();
    probs
        .iter()
        .zip(&accept)
        .map(|(b, &t)| {
            let mass: f64 = b.iter().sum();
            b.iter()
                .map(|&p| if mass > 0.0 { t * p / mass / total } else { 0.0 })
                .collect()
        })
        .collect()
}

/// Truncated mass `Σ_j max(0, p_j − α/N_B)`.
pub fn truncation_error(probs: &[Vec<f64>], alpha: f64) -> f64 {
    let cut = alpha / probs.len() as f64;
    probs.iter().map(|b| (b.iter().sum::<f64>() - cut).max(0.0)).sum()
}

pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(n: usize) -> Vec<f64> {
        vec![1.0 / (1 << n) as f64; 1 << n]
    }

    #[test]
    fn layout_round_trip() {
        let l = BatchLayout::new(4, &[3, 1]).unwrap();
        assert_eq!(l.fixed, vec![0, 2]);
        assert_eq!(l.bitstring(0b10, 0b01), 0b1001);
        assert_eq!(l.fixed_bits(0b10), [(0, 1), (2, 0)].into_iter().collect());
    }

    #[test]
    fn uniform_accepts_half() {
        let p = DenseBatches::with_batch_size(uniform(8), 16).unwrap();
        let cfg = SamplerConfig {
            num_samples: 4000,
            seed: 3,
            ..Default::default()
        };
        let s = sample(&p, &cfg).unwrap();
        assert_eq!(s.bitstrings.len(), 4000);
        assert!(s.records.iter().all(|r| r.acceptance == 0.5));
        assert!((s.summary.acceptance_rate - 0.5).abs() < 0.03);
        assert_eq!(s.summary.epsilon_empirical, 0.0);
        assert_eq!(sample(&p, &cfg).unwrap(), s);
    }

    #[test]
    fn deterministic_state() {
        let mut probs = vec![0.0; 64];
        probs[37] = 1.0;
        let p = DenseBatches::with_batch_size(probs, 8).unwrap();
        let s = sample(
            &p,
            &SamplerConfig {
                num_samples: 50,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(s.bitstrings.iter().all(|&b| b == 37));
    }

    #[test]
    fn rejects_bad_mass_and_alpha() {
        let p = DenseBatches::with_batch_size(vec![0.9; 4], 2).unwrap();
        assert!(matches!(
            sample(
                &p,
                &SamplerConfig {
                    num_samples: 1,
                    ..Default::default()
                }
            ),
            Err(Error::Numerical(_))
        ));
        let q = DenseBatches::with_batch_size(uniform(2), 2).unwrap();
        assert!(sample(
            &q,
            &SamplerConfig {
                alpha: 1.0,
                ..Default::default()
            }
        )
        .is_err());
    }

    #[test]
    fn estimator_arithmetic() {
        let e = estimate_epsilon_gamma(1, 4, 2.0).unwrap();
        assert!((e - 4.0 * (-2.0f64).exp()).abs() < 1e-12);
        assert_eq!(estimate_epsilon_gamma(4, 4, f64::INFINITY).unwrap(), 0.0);
        assert_eq!(estimate_epsilon_empirical(&[0.1, 0.2], 2.0, 4).unwrap(), 0.0);
        assert!((estimate_epsilon_empirical(&[1.0], 2.0, 4).unwrap() - 2.0).abs() < 1e-15);
        // Y ~ Exp(1): 𝔼 max(0, Y − α) = e^{−α}
        assert!((expected_batch_excess(1, 2.0).unwrap() - (-2.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn degradation_bound() {
        assert_eq!(fidelity_degradation_bound(0.3, 0.0).unwrap(), 0.3);
        let b = fidelity_degradation_bound(0.016, 1e-4).unwrap();
        assert!((b - 0.016 * (1.0 - 4.0 * (1e-4f64 / 0.016).sqrt())).abs() < 1e-15);
        assert!(fidelity_degradation_bound(0.016, 0.001).is_err());
    }

    #[test]
    fn acceptance_law_is_exact_without_truncation() {
        let probs = vec![vec![0.1, 0.2], vec![0.3, 0.4]];
        let law = acceptance_law(&probs, 10.0);
        for (a, b) in law.iter().flatten().zip(probs.iter().flatten()) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(truncation_error(&probs, 10.0), 0.0);
    }
}
