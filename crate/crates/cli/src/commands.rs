use std::collections::BTreeMap;
use std::path::Path;

use serde_json::{json, Value};

use rqcsample::bits::format_bits;
use rqcsample::circuit::random::{random_circuit, Entangler};
use rqcsample::circuit::{Circuit, VertexSet};
use rqcsample::fidelity::{
    compute_norms, cost_with_fidelity, fidelity_lower_bound, partial_amplitudes_in, read_slice_plan,
    sliced_vertex_select, write_slice_plan, SlicePlan,
};
use rqcsample::oracle;
use rqcsample::sampler::{
    estimate_epsilon_gamma, fidelity_degradation_bound, sample, template_network, variational_distance_bound,
    BatchLayout, BatchProvider, CircuitBatches, DenseBatches, SamplerConfig,
};
use rqcsample::tensornet::{
    build_network, contraction_cost, read_plan, write_plan, NetworkOptions, OutputSpec, TensorNetwork,
};
use rqcsample::treeopt::{self, choose_free_outputs, PlannerConfig, SliceStrategy};
use rqcsample::xeb::{norm_statistics, porter_thomas_diagnostics, spoof, xeb_fidelity, SpoofConfig};

use crate::io::{
    parse_list, probability_lines, read_bitstrings, read_probabilities, CliResult, Failure, Files, Pattern, Report,
};
use crate::{Command, EntanglerArg, Format, Global, Layout, OracleCommand};

fn planner(g: &Global) -> PlannerConfig {
    PlannerConfig {
        budget_bytes: g.budget,
        steps: g.anneal_steps,
        seed: g.seed,
        ..Default::default()
    }
}

fn render(g: &Global, r: &Report) -> String {
    match g.format {
        Format::Text => r.text(),
        Format::Json => r.json(),
    }
}

/// Writes the artifact to `out` (or stdout) and the report to whichever
/// stream the artifact did not take.
fn emit(g: &Global, files: &mut Files, out: Option<&Path>, artifact: &str, report: &Report) -> CliResult<()> {
    files.write(out, artifact)?;
    let text = render(g, report);
    if out.is_some() {
        print!("{text}");
    } else {
        eprint!("{text}");
    }
    Ok(())
}

fn log2_exact(x: usize, what: &str) -> CliResult<usize> {
    if x == 0 || !x.is_power_of_two() {
        return Err(Failure::Usage(format!("{what} {x} is not a power of two")));
    }
    Ok(x.trailing_zeros() as usize)
}

/// The pattern given, or `batch_size` (capped at `2^n`) cheapest free outputs
/// with the rest fixed to zero.
fn resolve_layout(c: &Circuit, layout: &Layout, planner: &PlannerConfig) -> CliResult<Pattern> {
    let n = c.num_qubits();
    if let Some(p) = &layout.pattern {
        return Pattern::parse(p, n);
    }
    let a = log2_exact(layout.batch_size, "batch size")?.min(n);
    let free = choose_free_outputs(c, a, planner)?;
    Ok(Pattern::zeros_with_free(n, &free))
}

fn check_fidelity(f: f64) -> CliResult<()> {
    if !(f > 0.0 && f <= 1.0) {
        return Err(Failure::Usage(format!("fidelity {f} is not in (0, 1]")));
    }
    Ok(())
}

/// Batches from saved tree and slice files, or planned from scratch.
fn batches(
    files: &mut Files,
    c: &Circuit,
    free: &[usize],
    saved: Option<(&Path, &Path)>,
    f: f64,
    k: Option<usize>,
    planner: &PlannerConfig,
) -> CliResult<CircuitBatches> {
    match saved {
        Some((tree_path, slices_path)) => {
            let net = template_network(c, &BatchLayout::new(c.num_qubits(), free)?)?;
            let tree = read_plan(&files.read(tree_path)?, &net)?;
            let plan = read_slice_plan(&files.read(slices_path)?)?;
            let mut b = CircuitBatches::from_parts(c, free, tree, plan)?;
            b.contract.budget_bytes = Some(planner.budget_bytes);
            Ok(b)
        }
        None => {
            check_fidelity(f)?;
            Ok(CircuitBatches::prepare(c, free, f, k, planner)?)
        }
    }
}

fn plan_report(r: &mut Report, plan: &SlicePlan) {
    r.put("k", plan.k())
        .put("partial_vertices", plan.partial.to_vec())
        .put("accepted_slices", plan.accepted.len())
        .put("fidelity", plan.fidelity)
        .put("target", plan.target)
        .put("fidelity_lower_bound", fidelity_lower_bound(plan));
}

/// Vertices behind every sliceable leg of `net`.
fn sliceable_vertices(net: &TensorNetwork) -> VertexSet {
    net.legs()
        .into_iter()
        .filter(|&l| !net.is_open(l))
        .filter_map(|l| net.vertex_of_leg(l))
        .collect()
}

fn amplitude_lines(bits: impl Iterator<Item = usize>, amps: &[rqcsample::C64], n: usize) -> String {
    bits.zip(amps)
        .map(|(b, a)| format!("{} {:e} {:e}\n", format_bits(b, n), a.re, a.im))
        .collect()
}

fn bitstring_lines(bits: &[usize], n: usize) -> String {
    let mut out = String::with_capacity(bits.len() * (n + 1));
    for &b in bits {
        out.push_str(&format_bits(b, n));
        out.push('\n');
    }
    out
}

pub fn dispatch(g: &Global, command: Command, files: &mut Files) -> CliResult<()> {
    let planner = planner(g);
    planner.validate()?;
    match command {
        Command::Generate {
            qubits,
            cycles,
            entangler,
            out,
        } => {
            if qubits == 0 {
                return Err(Failure::Usage("--qubits must be positive".into()));
            }
            let e = match entangler {
                EntanglerArg::Fsim => Entangler::Fsim,
                EntanglerArg::Cz => Entangler::Cz,
            };
            let c = random_circuit(qubits, cycles, e, g.seed);
            let mut r = Report::default();
            r.put("qubits", qubits)
                .put("cycles", cycles)
                .put("gates", c.gates().len());
            emit(g, files, out.as_deref(), &c.to_text(), &r)
        }

        Command::Plan {
            circuit,
            layout,
            min_sliced,
            out,
        } => {
            let c = files.circuit(&circuit)?;
            let pattern = resolve_layout(&c, &layout, &planner)?;
            let net = template_network(&c, &BatchLayout::new(c.num_qubits(), &pattern.free)?)?;
            let cfg = PlannerConfig {
                strategy: min_sliced.map_or(SliceStrategy::Budget, SliceStrategy::MinCount),
                ..planner
            };
            let plan = treeopt::plan(&net, &cfg)?;
            let mut r = Report::default();
            r.put("pattern", pattern.to_text(c.num_qubits()))
                .put("tensors", net.num_tensors())
                .put("sliced_legs", plan.cost.num_sliced)
                .put("log2_mults", plan.cost.log2_total())
                .put("peak_bytes", plan.cost.peak_bytes)
                .put("max_rank", plan.cost.max_rank);
            emit(g, files, out.as_deref(), &write_plan(&net, &plan.tree)?, &r)
        }

        Command::Norms {
            circuit,
            vertices,
            k,
            layout,
            out,
        } => {
            let c = files.circuit(&circuit)?;
            let s: VertexSet = match vertices {
                Some(list) => parse_list(&list)?.into_iter().collect(),
                None => {
                    let pattern = resolve_layout(&c, &layout, &planner)?;
                    let net = template_network(&c, &BatchLayout::new(c.num_qubits(), &pattern.free)?)?;
                    sliced_vertex_select(&c, &sliceable_vertices(&net), k)?
                }
            };
            let table = compute_norms(&c, &s, &planner)?;
            let stats = norm_statistics(&table)?;
            let mut r = Report::default();
            r.put("k", table.k())
                .put("vertices", table.vertices.to_vec())
                .put("sum", table.values.iter().sum::<f64>())
                .put("normalized_stddev", stats.stddev)
                .put("normalized_min", stats.min)
                .put("normalized_max", stats.max)
                .put("digest", table.digest());
            emit(g, files, out.as_deref(), &table.to_text(), &r)
        }

        Command::SelectSlices {
            circuit,
            fidelity,
            k,
            layout,
            tree_out,
            out,
        } => {
            check_fidelity(fidelity)?;
            let c = files.circuit(&circuit)?;
            let pattern = resolve_layout(&c, &layout, &planner)?;
            let b = CircuitBatches::prepare(&c, &pattern.free, fidelity, k, &planner)?;
            let net = template_network(&c, &b.layout)?;
            let cost = contraction_cost(&net, &b.tree)?;
            let full = cost.log2_total().exp2();
            if let Some(path) = &tree_out {
                files.write(Some(path), &write_plan(&net, &b.tree)?)?;
            }
            let mut r = Report::default();
            r.put("pattern", pattern.to_text(c.num_qubits()));
            plan_report(&mut r, &b.plan);
            r.put("sliced_legs", b.tree.sliced().len())
                .put("log2_mults_full", cost.log2_total())
                .put("log2_mults_partial", cost_with_fidelity(full, &b.plan).log2());
            emit(g, files, out.as_deref(), &write_slice_plan(&b.plan), &r)
        }

        Command::Amplitudes {
            circuit,
            layout,
            plan,
            slices,
            fidelity,
            k,
            out,
        } => {
            let c = files.circuit(&circuit)?;
            let n = c.num_qubits();
            let pattern = resolve_layout(&c, &layout, &planner)?;
            let saved = plan.as_deref().zip(slices.as_deref());
            let b = batches(files, &c, &pattern.free, saved, fidelity, k, &planner)?;
            let spec = OutputSpec::batch(pattern.fixed.clone(), pattern.free.iter().copied());
            let net = build_network(&c, &spec, &NetworkOptions::default())?;
            let amps = partial_amplitudes_in(&c, &net, &b.plan, &spec, &b.tree, &b.contract)?;
            let mut r = Report::default();
            r.put("pattern", pattern.to_text(n))
                .put("amplitudes", amps.amplitudes.len());
            plan_report(&mut r, &b.plan);
            let text = amplitude_lines(
                (0..amps.amplitudes.len()).map(|i| amps.bitstring(i)),
                &amps.amplitudes,
                n,
            );
            emit(g, files, out.as_deref(), &text, &r)
        }

        Command::Sample {
            circuit,
            num,
            alpha,
            layout,
            fidelity,
            k,
            plan,
            slices,
            records,
            out,
        } => {
            if num == 0 {
                return Err(Failure::Usage("--num must be positive".into()));
            }
            if alpha.is_nan() || alpha <= 1.0 {
                return Err(Failure::Usage(format!("--alpha must exceed 1, got {alpha}")));
            }
            let c = files.circuit(&circuit)?;
            let n = c.num_qubits();
            let pattern = resolve_layout(&c, &layout, &planner)?;
            let saved = plan.as_deref().zip(slices.as_deref());
            let b = batches(files, &c, &pattern.free, saved, fidelity, k, &planner)?;
            let set = sample(
                &b,
                &SamplerConfig {
                    alpha,
                    num_samples: num,
                    seed: g.seed,
                    ..Default::default()
                },
            )?;
            if let Some(path) = &records {
                let text: String = set
                    .bitstrings
                    .iter()
                    .zip(&set.records)
                    .map(|(&b, r)| format!("{} {} {:e}\n", format_bits(b, n), r.batch, r.acceptance))
                    .collect();
                files.write(Some(path), &text)?;
            }
            let s = &set.summary;
            let distinct: std::collections::BTreeSet<usize> = s.drawn.iter().map(|&(j, _)| j).collect();
            let eps_gamma = estimate_epsilon_gamma(b.batch_size(), b.batch_count(), alpha)?;
            let d = variational_distance_bound(s.epsilon_empirical);
            let bound: Value = match fidelity_degradation_bound(b.plan.fidelity, d) {
                Ok(v) => json!(v),
                Err(_) => json!("not applicable"),
            };
            let mut r = Report::default();
            r.put("samples", set.bitstrings.len())
                .put("alpha", alpha)
                .put("pattern", pattern.to_text(n))
                .put("batch_size", b.batch_size())
                .put("batch_count", b.batch_count())
                .put("batches_drawn", s.drawn.len())
                .put("batches_computed", distinct.len())
                .put("acceptance_rate", s.acceptance_rate)
                .put("epsilon_empirical", s.epsilon_empirical)
                .put("epsilon_gamma", eps_gamma)
                .put("fidelity", b.plan.fidelity)
                .put("target", b.plan.target)
                .put("k", b.plan.k())
                .put("fidelity_bound", bound);
            emit(g, files, out.as_deref(), &set.to_text(), &r)
        }

        Command::Xeb { samples, probs, out } => {
            let text = files.read(&samples)?;
            let table = read_probabilities(&files.read(&probs)?)?;
            let n = text
                .lines()
                .find(|l| !l.trim().is_empty())
                .map(|l| l.trim().len())
                .unwrap_or(0);
            if n == 0 {
                return Err(Failure::Input(format!("{}: no samples", samples.display())));
            }
            let mut p = Vec::new();
            for (i, line) in text.lines().enumerate() {
                let bits = line.trim();
                if bits.is_empty() {
                    continue;
                }
                if bits.len() != n {
                    return Err(Failure::Input(format!("line {}: expected {n} bits", i + 1)));
                }
                let v = table
                    .get(bits)
                    .ok_or_else(|| Failure::Input(format!("no probability for bitstring {bits}")))?;
                p.push(*v);
            }
            let x = xeb_fidelity(&p, n)?;
            let mut r = Report::default();
            r.put("samples", x.samples)
                .put("qubits", x.num_qubits)
                .put("mean_normalized", x.mean_normalized)
                .put("xeb", x.fidelity)
                .put("std_error", x.std_error);
            files.write(out.as_deref(), &render(g, &r))
        }

        Command::Spoof {
            circuit,
            num,
            fidelity,
            ratio,
            batch_bits,
            k,
            out,
        } => {
            check_fidelity(fidelity)?;
            let c = files.circuit(&circuit)?;
            let n = c.num_qubits();
            let cfg = SpoofConfig {
                num,
                fidelity,
                ratio,
                batch_bits,
                k,
            };
            let res = spoof(&c, &cfg, &planner)?;
            let mut r = Report::default();
            r.put("selected", res.bitstrings.len())
                .put("batch_bits", res.batch.free.len())
                .put("ratio", res.ratio);
            plan_report(&mut r, &res.plan);
            r.put("predicted_xeb_gain", res.predicted_xeb());
            if n <= oracle::DEFAULT_CAP {
                let batch_bits: Vec<usize> = (0..res.batch.amplitudes.len())
                    .map(|i| res.batch.bitstring(i))
                    .collect();
                let picked = xeb_fidelity(&oracle::exact_probabilities(&c, &res.bitstrings)?, n)?;
                let whole = xeb_fidelity(&oracle::exact_probabilities(&c, &batch_bits)?, n)?;
                r.put("xeb_selected", picked.fidelity)
                    .put("xeb_batch", whole.fidelity)
                    .put("xeb_gain", picked.fidelity - whole.fidelity)
                    .put("std_error", picked.std_error);
            }
            emit(g, files, out.as_deref(), &bitstring_lines(&res.bitstrings, n), &r)
        }

        Command::Oracle { command } => oracle_command(g, command, files),

        Command::Diagnose {
            circuit,
            batch_size,
            k,
            out,
        } => {
            let c = files.circuit(&circuit)?;
            let n = c.num_qubits();
            let a = log2_exact(batch_size, "batch size")?.min(n);
            let probs: Vec<f64> = oracle::statevector(&c)?.iter().map(|z| z.norm_sqr()).collect();
            let free = choose_free_outputs(&c, a, &planner)?;
            let dense = DenseBatches::new(probs.clone(), &free)?;
            let masses = (0..dense.batch_count())
                .map(|j| dense.probabilities(j).map(|p| p.iter().sum::<f64>()))
                .collect::<Result<Vec<f64>, _>>()?;
            let pt = porter_thomas_diagnostics(&probs, &masses, n, 1 << a)?;
            let mut r = Report::default();
            r.put("qubits", n)
                .put("exponential_ks", pt.exponential.statistic)
                .put("exponential_p", pt.exponential.p_value);
            if let Some(gk) = &pt.gamma {
                r.put("batch_size", 1usize << a)
                    .put("gamma_ks", gk.statistic)
                    .put("gamma_p", gk.p_value);
            }
            if let Some(k) = k {
                let net = template_network(&c, &BatchLayout::new(n, &free)?)?;
                let s = sliced_vertex_select(&c, &sliceable_vertices(&net), k)?;
                let stats = norm_statistics(&compute_norms(&c, &s, &planner)?)?;
                r.put("norm_k", s.len())
                    .put("norm_stddev", stats.stddev)
                    .put("norm_min", stats.min)
                    .put("norm_max", stats.max);
            }
            let text = match g.format {
                Format::Text => {
                    let mut t = r.text();
                    t.push_str("histogram bitstrings\n");
                    t.push_str(&pt.bitstring_histogram.to_text());
                    if let Some(h) = &pt.batch_histogram {
                        t.push_str("histogram batches\n");
                        t.push_str(&h.to_text());
                    }
                    t
                }
                Format::Json => {
                    let hist = |h: &rqcsample::stats::Histogram| json!({ "lo": h.lo, "hi": h.hi, "counts": h.counts });
                    r.put("bitstring_histogram", hist(&pt.bitstring_histogram));
                    if let Some(h) = &pt.batch_histogram {
                        r.put("batch_histogram", hist(h));
                    }
                    r.json()
                }
            };
            files.write(out.as_deref(), &text)
        }
    }
}

fn oracle_command(g: &Global, command: OracleCommand, files: &mut Files) -> CliResult<()> {
    match command {
        OracleCommand::Probs { circuit, samples, out } => {
            let c = files.circuit(&circuit)?;
            let n = c.num_qubits();
            let bits: Vec<usize> = match samples {
                Some(path) => {
                    let mut b = read_bitstrings(&files.read(&path)?, n)?;
                    b.sort_unstable();
                    b.dedup();
                    b
                }
                None => (0..1usize << n).collect(),
            };
            let p = oracle::exact_probabilities(&c, &bits)?;
            let mut r = Report::default();
            r.put("bitstrings", bits.len()).put("total", p.iter().sum::<f64>());
            emit(g, files, out.as_deref(), &probability_lines(&bits, &p, n), &r)
        }
        OracleCommand::Sample { circuit, num, out } => {
            let c = files.circuit(&circuit)?;
            let bits = oracle::exact_sample(&c, num, g.seed)?;
            let mut r = Report::default();
            r.put("samples", bits.len());
            emit(g, files, out.as_deref(), &bitstring_lines(&bits, c.num_qubits()), &r)
        }
        OracleCommand::Amplitudes { circuit, pattern, out } => {
            let c = files.circuit(&circuit)?;
            let n = c.num_qubits();
            let pattern = match pattern {
                Some(p) => Pattern::parse(&p, n)?,
                None => Pattern {
                    fixed: BTreeMap::new(),
                    free: (0..n).collect(),
                },
            };
            let psi = oracle::statevector(&c)?;
            let layout = BatchLayout::new(n, &pattern.free)?;
            let fixed_index = layout
                .fixed
                .iter()
                .fold(0usize, |acc, q| acc << 1 | pattern.fixed[q] as usize);
            let bits: Vec<usize> = (0..1usize << pattern.free.len())
                .map(|i| layout.bitstring(fixed_index, i))
                .collect();
            let amps: Vec<_> = bits.iter().map(|&b| psi[b]).collect();
            let mut r = Report::default();
            r.put("pattern", pattern.to_text(n)).put("amplitudes", amps.len());
            emit(
                g,
                files,
                out.as_deref(),
                &amplitude_lines(bits.into_iter(), &amps, n),
                &r,
            )
        }
    }
}
