//! Linear cross-entropy benchmarking, spoofing by picking the largest
//! amplitudes of a batch, and distribution diagnostics.

use std::fmt::Write as _;

use statrs::function::gamma::gamma_lr;

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::fidelity::{NormTable, SlicePlan};
use crate::sampler::CircuitBatches;
use crate::stats::{harmonic, ks_test, mean_and_sd, Histogram, KsResult};
use crate::tensornet::AmplitudeBatch;
use crate::treeopt::{choose_free_outputs, PlannerConfig};

#[derive(Clone, Debug, PartialEq)]
pub struct XebReport {
    pub samples: usize,
    pub num_qubits: usize,
    /// Mean of `2^n p`.
    pub mean_normalized: f64,
    pub fidelity: f64,
    pub std_error: f64,
}

impl XebReport {
    pub fn to_text(&self) -> String {
        format!(
            "samples {}\nqubits {}\nmean_normalized {}\nxeb {}\nstd_error {}\n",
            self.samples, self.num_qubits, self.mean_normalized, self.fidelity, self.std_error
        )
    }
}

/// `F = (2^n / k) Σ p − 1`, with the standard error from the sample variance.
pub fn xeb_fidelity(probs: &[f64], n: usize) -> Result<XebReport> {
    if probs.is_empty() {
        return Err(Error::InvalidArgument("no probabilities given".into()));
    }
    if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::InvalidArgument(format!("probability {p} is not in [0, 1]")));
    }
    let scale = (n as f64).exp2();
    let normalized: Vec<f64> = probs.iter().map(|p| p * scale).collect();
    let (mean, sd) = mean_and_sd(&normalized);
    Ok(XebReport {
        samples: probs.len(),
        num_qubits: n,
        mean_normalized: mean,
        fidelity: mean - 1.0,
        std_error: sd / (probs.len() as f64).sqrt(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpoofConfig {
    /// Bitstrings wanted; ignored when `ratio` is set.
    pub num: usize,
    pub fidelity: f64,
    /// Keep `⌊r 2^b⌋` bitstrings instead of `num`.
    pub ratio: Option<f64>,
    /// Free outputs; `⌈log₂(10 N)⌉` by default, at most `n`.
    pub batch_bits: Option<usize>,
    /// Partially sliced vertex count; chosen from the fidelity by default.
    pub k: Option<usize>,
}

impl SpoofConfig {
    pub fn batch_bits(&self, n: usize) -> usize {
        self.batch_bits
            .unwrap_or_else(|| ((10 * self.num.max(1)) as f64).log2().ceil() as usize)
            .min(n)
    }

    pub fn count(&self, b: usize) -> usize {
        match self.ratio {
            Some(r) => (r * (b as f64).exp2()).floor() as usize,
            None => self.num,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(r) = self.ratio {
            if !(r > 0.0 && r <= 1.0) {
                return Err(Error::InvalidArgument(format!("ratio {r} is not in (0, 1]")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SpoofResult {
    pub bitstrings: Vec<usize>,
    pub batch: AmplitudeBatch,
    pub plan: SlicePlan,
    pub ratio: f64,
}

impl SpoofResult {
    pub fn predicted_xeb(&self) -> f64 {
        expected_spoof_xeb(self.plan.fidelity, self.ratio)
    }
}

/// Computes one batch over `b` free outputs with partial slicing at the
/// target fidelity and returns the bitstrings with the largest amplitudes.
pub fn spoof(c: &Circuit, cfg: &SpoofConfig, planner: &PlannerConfig) -> Result<SpoofResult> {
    cfg.validate()?;
    let n = c.num_qubits();
    let b = cfg.batch_bits(n);
    let count = cfg.count(b);
    if count > 1 << b {
        return Err(Error::InvalidArgument(format!(
            "{count} bitstrings requested from a batch of 2^{b}"
        )));
    }
    let free = choose_free_outputs(c, b, planner)?;
    let batches = CircuitBatches::prepare(c, &free, cfg.fidelity, cfg.k, planner)?;
    let batch = batches.amplitudes(0)?;
    let bitstrings = top_bitstrings(&batch, count);
    Ok(SpoofResult {
        bitstrings,
        ratio: count as f64 / (b as f64).exp2(),
        plan: batches.plan,
        batch,
    })
}

/// The `count` bitstrings of `batch` with the largest `|amplitude|`, ties
/// going to the smaller bitstring.
pub fn top_bitstrings(batch: &AmplitudeBatch, count: usize) -> Vec<usize> {
    let mut entries: Vec<(f64, usize)> = batch
        .amplitudes
        .iter()
        .enumerate()
        .map(|(i, a)| (a.norm_sqr(), batch.bitstring(i)))
        .collect();
    entries.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
    entries.into_iter().take(count).map(|(_, b)| b).collect()
}

/// `−f ln r`.
pub fn expected_spoof_xeb(f: f64, r: f64) -> f64 {
    -f * r.ln()
}

/// Mean of the `k`-th largest of `N` independent `Exp(λ)` draws,
/// `(H_N − H_{k−1}) / λ`.
pub fn order_stat_expectation(n: u64, k: u64, lambda: f64) -> Result<f64> {
    if k == 0 || k > n || !(lambda > 0.0) {
        return Err(Error::InvalidArgument("need 1 ≤ k ≤ N and λ > 0".into()));
    }
    Ok((harmonic(n) - harmonic(k - 1)) / lambda)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PorterThomasReport {
    /// `2^n p` against `Exp(1)`.
    pub exponential: KsResult,
    /// `N_B p_j` against `Gamma(N_A, rate N_A)`, when batch masses are given.
    pub gamma: Option<KsResult>,
    pub bitstring_histogram: Histogram,
    pub batch_histogram: Option<Histogram>,
}

impl PorterThomasReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "exponential_ks {} p {}",
            self.exponential.statistic, self.exponential.p_value
        );
        if let Some(g) = &self.gamma {
            let _ = writeln!(out, "gamma_ks {} p {}", g.statistic, g.p_value);
        }
        out.push_str("histogram bitstrings\n");
        out.push_str(&self.bitstring_histogram.to_text());
        if let Some(h) = &self.batch_histogram {
            out.push_str("histogram batches\n");
            out.push_str(&h.to_text());
        }
        out
    }
}

/// KS tests of bitstring probabilities against the exponential law and of
/// batch masses against the gamma law, with histograms of both.
pub fn porter_thomas_diagnostics(
    bitstring_probs: &[f64],
    batch_probs: &[f64],
    n: usize,
    n_a: usize,
) -> Result<PorterThomasReport> {
    let scale = (n as f64).exp2();
    let x: Vec<f64> = bitstring_probs.iter().map(|p| p * scale).collect();
    let exponential = ks_test(&x, |v| if v <= 0.0 { 0.0 } else { 1.0 - (-v).exp() })?;
    let (gamma, batch_histogram) = if batch_probs.is_empty() {
        (None, None)
    } else {
        if n_a == 0 || n_a > 1 << n {
            return Err(Error::InvalidArgument(format!(
                "batch size {n_a} does not fit {n} qubits"
            )));
        }
        let n_b = scale / n_a as f64;
        let y: Vec<f64> = batch_probs.iter().map(|p| p * n_b).collect();
        let a = n_a as f64;
        let ks = ks_test(&y, |v| if v <= 0.0 { 0.0 } else { gamma_lr(a, a * v) })?;
        (Some(ks), Some(Histogram::of(&y)))
    };
    Ok(PorterThomasReport {
        exponential,
        gamma,
        bitstring_histogram: Histogram::of(&x),
        batch_histogram,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormStatistics {
    /// Standard deviation of `2^k R`.
    pub stddev: f64,
    pub min: f64,
    pub max: f64,
}

/// Spread of the normalized slice norms `2^k R[i]`, whose mean is 1.
pub fn norm_statistics(r: &NormTable) -> Result<NormStatistics> {
    let scale = r.values.len() as f64;
    let x: Vec<f64> = r.values.iter().map(|v| v * scale).collect();
    let mean = x.iter().sum::<f64>() / scale;
    if (mean - 1.0).abs() > 1e-6 {
        return Err(Error::Numerical(format!(
            "normalized slice norms average {mean}, not 1"
        )));
    }
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / scale;
    Ok(NormStatistics {
        stddev: var.sqrt(),
        min: x.iter().copied().fold(f64::INFINITY, f64::min),
        max: x.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}
