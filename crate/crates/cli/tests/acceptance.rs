//! Acceptance criteria 1 to 11. Prints one PASS/FAIL line per criterion,
//! followed by indented details, and exits nonzero if any criterion fails.

mod common;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Exp1, Gamma};
use serde_json::Value;

use common::{cli_ok, corpus, open_network, relative_diff};
use rqcsample::circuit::random::{random_circuit, Entangler};
use rqcsample::circuit::VertexSet;
use rqcsample::fidelity::{compute_norms, partial_amplitudes, plan_from_norms};
use rqcsample::oracle;
use rqcsample::sampler::{
    acceptance_law, estimate_epsilon_gamma, expected_batch_excess, fidelity_degradation_bound, sample, total_variation,
    truncation_error, BatchProvider, CircuitBatches, DenseBatches, SamplerConfig,
};
use rqcsample::stats::{chi_square, mean_and_sd};
use rqcsample::tensornet::{contract, sliced_contract_sum, Leg, OutputSpec, SliceAssignment};
use rqcsample::treeopt::{choose_free_outputs, choose_fully_sliced, greedy_tree, plan, PlannerConfig, SliceStrategy};
use rqcsample::xeb::{order_stat_expectation, spoof, xeb_fidelity, SpoofConfig};
use rqcsample::C64;

type Criterion = (usize, &'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn quick() -> PlannerConfig {
    PlannerConfig {
        steps: 300,
        ..Default::default()
    }
}

fn probs_of(c: &rqcsample::circuit::Circuit) -> Vec<f64> {
    oracle::statevector(c).unwrap().iter().map(|a| a.norm_sqr()).collect()
}

fn norm_network_correctness() -> Outcome {
    let start = Instant::now();
    let cfg = PlannerConfig::default();
    let (mut worst, mut worst_sum) = (0.0f64, 0.0f64);
    for i in 0..20 {
        let (c, s) = corpus(i);
        let got = compute_norms(&c, &s, &cfg).unwrap();
        let want = oracle::exact_slice_norms(&c, &s).unwrap();
        for (a, b) in got.values.iter().zip(&want) {
            worst = worst.max((a - b).abs());
        }
        worst_sum = worst_sum.max((got.values.iter().sum::<f64>() - 1.0).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        pass: worst < 1e-9 && worst_sum < 1e-9 && secs < 60.0,
        detail: format!("max |R - R_oracle| {worst:.2e}, max |sum R - 1| {worst_sum:.2e}, {secs:.1} s"),
    }
}

fn fidelity_identity() -> Outcome {
    let (mut worst, mut bound_ok, mut plans) = (0.0f64, true, 0);
    for i in 0..20 {
        let (c, s) = corpus(i);
        let net = open_network(&c);
        let tree = plan(&net, &quick()).unwrap().tree;
        let mut sliced = tree.sliced().clone();
        sliced.extend(s.iter().map(|v| net.leg_of_vertex(v).unwrap()));
        let tree = tree.with_sliced(sliced);
        let psi = oracle::statevector(&c).unwrap();
        let norms = compute_norms(&c, &s, &quick()).unwrap();
        for f in [0.05, 0.1, 0.25, 0.5] {
            let p = plan_from_norms(norms.clone(), VertexSet::new(), f).unwrap();
            let bar = partial_amplitudes(&c, &p, &OutputSpec::OpenAll, &tree, &Default::default()).unwrap();
            let inner: C64 = bar.amplitudes.iter().zip(&psi).map(|(a, b)| a.conj() * b).sum();
            worst = worst.max((inner.norm_sqr() - p.fidelity).abs());
            let floor = f.max(p.accepted.len() as f64 / (1u64 << p.k()) as f64);
            bound_ok &= p.fidelity >= floor - 1e-12;
            plans += 1;
        }
    }
    Outcome {
        pass: worst < 1e-9 && bound_ok,
        detail: format!("{plans} plans, max ||<psi_X|psi>|^2 - F| {worst:.2e}, F >= max(f, |X|/2^k) (1e-12 rounding slack): {bound_ok}"),
    }
}

fn orthogonality() -> Outcome {
    let mut worst = 0.0f64;
    let mut pairs = 0;
    for i in 0..20 {
        let (c, s) = corpus(i);
        let states: Vec<Vec<C64>> = (0..1usize << s.len())
            .map(|x| oracle::projected_state(&c, &s, x).unwrap())
            .collect();
        for a in 0..states.len() {
            for b in a + 1..states.len() {
                let z: C64 = states[a].iter().zip(&states[b]).map(|(x, y)| x.conj() * y).sum();
                worst = worst.max(z.norm());
                pairs += 1;
            }
        }
    }
    Outcome {
        pass: worst < 1e-10,
        detail: format!("{pairs} pairs, max |<psi_i|psi_j>| {worst:.2e}"),
    }
}

fn sampler_exactness() -> Outcome {
    let start = Instant::now();
    let c = random_circuit(12, 14, Entangler::Fsim, 4);
    let planner = PlannerConfig::default();
    let free = choose_free_outputs(&c, 6, &planner).unwrap();
    let batches = CircuitBatches::prepare(&c, &free, 1.0, None, &planner).unwrap();
    let m = 50_000;
    let set = sample(
        &batches,
        &SamplerConfig {
            alpha: 2.0,
            num_samples: m,
            seed: 4,
            ..Default::default()
        },
    )
    .unwrap();
    let p = probs_of(&c);
    // 64 bins of 64 bitstrings each, grouped by ascending probability
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&a, &b| p[a].total_cmp(&p[b]).then(a.cmp(&b)));
    let mut bin = vec![0usize; p.len()];
    let mut expected = vec![0.0; 64];
    for (rank, &b) in order.iter().enumerate() {
        bin[b] = rank / 64;
        expected[rank / 64] += p[b] * m as f64;
    }
    let mut observed = vec![0u64; 64];
    for &b in &set.bitstrings {
        observed[bin[b]] += 1;
    }
    let chi = chi_square(&observed, &expected).unwrap();
    let s = &set.summary;
    let drawn = s.drawn.len() as f64;
    let t = (1.0 - s.epsilon_empirical) / 2.0;
    let se = (t * (1.0 - t) / drawn).sqrt();
    let rate_ok = (s.acceptance_rate - t).abs() < 3.0 * se;
    let batches_ok = (drawn / (2.0 * m as f64) - 1.0).abs() < 0.1;
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        pass: chi.p_value > 0.01 && rate_ok && batches_ok && secs < 600.0,
        detail: format!(
            "chi2 {:.1} dof {} p {:.3}; acceptance {:.4} vs {:.4} +- {:.4}; batches {} vs alpha m = {}; {secs:.1} s",
            chi.statistic,
            chi.dof,
            chi.p_value,
            s.acceptance_rate,
            t,
            3.0 * se,
            s.drawn.len(),
            2 * m
        ),
    }
}

fn xeb_vs_fidelity() -> Outcome {
    let planner = PlannerConfig::default();
    let circuits = 8;
    let per = 50_000 / circuits;
    let mut pass = true;
    let mut detail = String::new();
    for f in [0.1, 0.25] {
        let mut pooled = Vec::new();
        let mut plan_f = Vec::new();
        let mut each = Vec::new();
        for s in 0..circuits as u64 {
            let c = random_circuit(12, 14, Entangler::Fsim, 500 + s);
            let free = choose_free_outputs(&c, 6, &planner).unwrap();
            let batches = CircuitBatches::prepare(&c, &free, f, None, &planner).unwrap();
            let set = sample(
                &batches,
                &SamplerConfig {
                    num_samples: per,
                    seed: s,
                    ..Default::default()
                },
            )
            .unwrap();
            let p = oracle::exact_probabilities(&c, &set.bitstrings).unwrap();
            let x = xeb_fidelity(&p, 12).unwrap();
            each.push(format!("{:.3}/{:.3}", x.fidelity, batches.plan.fidelity));
            pooled.extend(p);
            plan_f.push(batches.plan.fidelity);
        }
        let x = xeb_fidelity(&pooled, 12).unwrap();
        let mean_f = plan_f.iter().sum::<f64>() / plan_f.len() as f64;
        let ok = (x.fidelity - mean_f).abs() <= 0.03;
        pass &= ok;
        let _ = write!(
            detail,
            "\n  f {f}: F_XEB {:.4} +- {:.4} (m {}) vs mean F {:.4}, diff {:+.4} [{}]; per circuit XEB/F: {}",
            x.fidelity,
            x.std_error,
            x.samples,
            mean_f,
            x.fidelity - mean_f,
            if ok { "ok" } else { "out" },
            each.join(" ")
        );
    }
    Outcome { pass, detail }
}

fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = points.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn spoofing_law() -> Outcome {
    let planner = PlannerConfig::default();
    let laws = [(-1f64).exp(), 0.1, 0.5];
    let want = [(1.0, 0.1), (2.30, 0.25), (0.693, 0.08)];
    let mut points: Vec<Vec<(f64, f64)>> = vec![Vec::new(); 3];
    for s in 0..4u64 {
        let c = random_circuit(12, 14, Entangler::Fsim, 600 + s);
        let p = probs_of(&c);
        let score = |bits: &[usize]| {
            xeb_fidelity(&bits.iter().map(|&b| p[b]).collect::<Vec<_>>(), 12)
                .unwrap()
                .fidelity
        };
        for f in [0.2, 0.4, 0.6, 0.8, 1.0] {
            for (li, &r) in laws.iter().enumerate() {
                let cfg = SpoofConfig {
                    num: 0,
                    fidelity: f,
                    ratio: Some(r),
                    batch_bits: Some(12),
                    k: None,
                };
                let res = spoof(&c, &cfg, &planner).unwrap();
                let batch: Vec<usize> = (0..res.batch.amplitudes.len())
                    .map(|i| res.batch.bitstring(i))
                    .collect();
                points[li].push((res.plan.fidelity, score(&res.bitstrings) - score(&batch)));
            }
        }
    }
    let mut pass = true;
    let mut detail = String::new();
    for (li, &r) in laws.iter().enumerate() {
        let b = slope(&points[li]);
        let (target, tol) = want[li];
        let ok = (b - target).abs() <= tol;
        pass &= ok;
        let _ = write!(
            detail,
            "\n  r {r:.4}: slope {b:.3} vs {target} +- {tol} [{}]",
            if ok { "ok" } else { "out" }
        );
    }
    Outcome { pass, detail }
}

fn epsilon_calibration() -> Outcome {
    let mut detail = String::new();

    let v = estimate_epsilon_gamma(1, 4, 2.0).unwrap();
    let exact = 4.0 * (-2.0f64).exp();
    let a = (v - exact).abs() < 1e-12;
    let _ = write!(detail, "\n  N_A 1: {v:.15} vs 4e^-2 {exact:.15} [{}]", ok(a));

    // Gamma(64, rate 64) tail above 2, importance-sampled from Gamma(64, rate 32)
    let n_b = 1usize << 14;
    let draws = 10_000_000;
    let formula = estimate_epsilon_gamma(64, n_b, 2.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    let proposal = Gamma::new(64.0, 1.0 / 32.0).unwrap();
    let (mut weighted, mut weighted_sq) = (0.0, 0.0);
    for _ in 0..draws {
        let y: f64 = proposal.sample(&mut rng);
        if y > 2.0 {
            let w = (64.0 * 2f64.ln() - 32.0 * y).exp();
            weighted += w;
            weighted_sq += w * w;
        }
    }
    let tail = weighted / draws as f64;
    let tail_se = ((weighted_sq / draws as f64 - tail * tail) / draws as f64).sqrt();
    let mc = n_b as f64 * tail;
    let rel = (mc - formula).abs() / formula;
    let plain = {
        let target = Gamma::new(64.0, 1.0 / 64.0).unwrap();
        (0..draws).filter(|_| target.sample(&mut rng) > 2.0).count()
    };
    let b64 = rel < 0.05;
    let _ = write!(
        detail,
        "\n  N_A 64, N_B 2^14, alpha 2: formula {formula:.4e}, importance-sampled MC {mc:.4e} (tail se {:.1e}), rel {rel:.4} [{}]; plain count {plain}/{draws}",
        tail_se,
        ok(b64)
    );
    let target8 = Gamma::new(8.0, 1.0 / 8.0).unwrap();
    let count8 = (0..draws).filter(|_| target8.sample(&mut rng) > 2.0).count();
    let formula8 = estimate_epsilon_gamma(8, n_b, 2.0).unwrap();
    let mc8 = n_b as f64 * count8 as f64 / draws as f64;
    let rel8 = (mc8 - formula8).abs() / formula8;
    let b8 = rel8 < 0.05;
    let _ = write!(
        detail,
        "\n  N_A 8, plain MC: formula {formula8:.4e}, MC {mc8:.4e}, rel {rel8:.4} [{}]",
        ok(b8)
    );

    // empirical ε̃ on synthetic Porter-Thomas states
    let mut rng = ChaCha8Rng::seed_from_u64(72);
    let raw: Vec<f64> = (0..1usize << 16).map(|_| Exp1.sample(&mut rng)).collect();
    let total: f64 = raw.iter().sum();
    let state = DenseBatches::with_batch_size(raw.iter().map(|x| x / total).collect(), 64).unwrap();
    let n_b = state.batch_count();
    let mut c_ok = true;
    for alpha in [2.0, 1.25] {
        let set = sample(
            &state,
            &SamplerConfig {
                alpha,
                num_samples: 20_000,
                seed: 73,
                ..Default::default()
            },
        )
        .unwrap();
        let terms: Vec<f64> = set
            .summary
            .drawn
            .iter()
            .map(|&(_, m)| n_b as f64 * (m - alpha / n_b as f64).max(0.0))
            .collect();
        let (mean, sd) = mean_and_sd(&terms);
        let se = sd / (terms.len() as f64).sqrt();
        let formula = estimate_epsilon_gamma(64, n_b, alpha).unwrap();
        let excess = expected_batch_excess(64, alpha).unwrap();
        let lit = (set.summary.epsilon_empirical - formula).abs() < 3.0 * se;
        c_ok &= lit;
        let _ = write!(
            detail,
            "\n  synthetic N_A 64, N_B {n_b}, alpha {alpha}: eps~ {:.4e} +- {:.2e} vs gamma formula {formula:.4e} [{}]; partial-expectation form {excess:.4e} (mean {mean:.4e})",
            set.summary.epsilon_empirical,
            3.0 * se,
            ok(lit)
        );
    }

    let mut d_ok = true;
    let mut checked = 0;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(800 + seed);
        let raw: Vec<f64> = (0..64).map(|_| Exp1.sample(&mut rng)).collect();
        let total: f64 = raw.iter().sum();
        let probs: Vec<f64> = raw.iter().map(|x| x / total).collect();
        for n_a in [1, 2, 4, 8, 16] {
            let state = DenseBatches::with_batch_size(probs.clone(), n_a).unwrap();
            let rows: Vec<Vec<f64>> = (0..state.batch_count())
                .map(|j| state.probabilities(j).unwrap())
                .collect();
            for alpha in [1.1, 1.5, 2.0, 4.0] {
                let law = acceptance_law(&rows, alpha);
                let (mut p, mut q) = (vec![0.0; 64], vec![0.0; 64]);
                for j in 0..rows.len() {
                    for i in 0..n_a {
                        p[state.bitstring(j, i)] = rows[j][i];
                        q[state.bitstring(j, i)] = law[j][i];
                    }
                }
                d_ok &= total_variation(&p, &q) <= truncation_error(&rows, alpha) + 1e-15;
                checked += 1;
            }
        }
    }
    let _ = write!(
        detail,
        "\n  D(p, p~) <= eps on {checked} 6-qubit instances [{}]",
        ok(d_ok)
    );

    Outcome {
        pass: a && b64 && b8 && c_ok && d_ok,
        detail,
    }
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "out"
    }
}

fn bounds() -> Outcome {
    let f = 0.016;
    let cases = [
        (fidelity_degradation_bound(0.3, 0.0).unwrap(), 0.3),
        (fidelity_degradation_bound(f, 1e-4).unwrap(), 0.010940355743730592),
    ];
    let arithmetic = cases.iter().all(|(got, want)| (got - want).abs() < 1e-9);
    let edge = fidelity_degradation_bound(f, f / 16.0 * (1.0 - 1e-12)).unwrap();
    let edge_ok = (0.0..1e-6).contains(&edge);
    let refuses = fidelity_degradation_bound(f, f / 16.0).is_err() && fidelity_degradation_bound(f, 0.01).is_err();
    Outcome {
        pass: arithmetic && edge_ok && refuses,
        detail: format!(
            "d 0 -> {}, (0.016, 1e-4) -> {:.12}, d just under f/16 -> {edge:.2e}, refuses d >= f/16: {refuses}",
            cases[0].0, cases[1].0
        ),
    }
}

fn order_statistics() -> Outcome {
    let grid = [
        (10u64, 1u64),
        (10, 5),
        (100, 1),
        (100, 10),
        (1000, 1),
        (1000, 100),
        (1000, 1000),
    ];
    let trials = 1_000_000;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut pass = true;
    let mut detail = String::new();
    for (n, k) in grid {
        // the k-th largest of n uniforms is Beta(n - k + 1, k)
        let beta = Beta::new((n - k + 1) as f64, k as f64).unwrap();
        let xs: Vec<f64> = (0..trials).map(|_| -(1.0 - beta.sample(&mut rng)).ln()).collect();
        let (mean, sd) = mean_and_sd(&xs);
        let se = sd / (trials as f64).sqrt();
        let exact = order_stat_expectation(n, k, 1.0).unwrap();
        let mut good = (mean - exact).abs() < 3.0 * se;
        if (n, k) == (1000, 1) {
            good &= ((mean - exact) / exact).abs() < 0.01;
        }
        pass &= good;
        let _ = write!(
            detail,
            "\n  ({n}, {k}): exact {exact:.5}, MC {mean:.5} +- {:.5} [{}]",
            3.0 * se,
            ok(good)
        );
    }
    Outcome { pass, detail }
}

fn pipeline(dir: &std::path::Path, seed: &str, threads: &str) -> (BTreeMap<String, Value>, Vec<Vec<u8>>) {
    let steps: &[&[&str]] = &[
        &["generate", "--qubits", "10", "--cycles", "10", "--out", "circuit.txt"],
        &["plan", "--circuit", "circuit.txt", "--out", "plan.txt"],
        &["norms", "--circuit", "circuit.txt", "--k", "3", "--out", "norms.txt"],
        &[
            "select-slices",
            "--circuit",
            "circuit.txt",
            "--fidelity",
            "0.25",
            "--tree-out",
            "tree.txt",
            "--out",
            "slices.txt",
        ],
        &[
            "amplitudes",
            "--circuit",
            "circuit.txt",
            "--plan",
            "tree.txt",
            "--slices",
            "slices.txt",
            "--out",
            "amps.txt",
        ],
        &[
            "sample",
            "--circuit",
            "circuit.txt",
            "--num",
            "2000",
            "--plan",
            "tree.txt",
            "--slices",
            "slices.txt",
            "--out",
            "samples.txt",
        ],
        &[
            "sample",
            "--circuit",
            "circuit.txt",
            "--num",
            "1000",
            "--fidelity",
            "0.5",
            "--out",
            "samples2.txt",
        ],
        &["oracle", "probs", "--circuit", "circuit.txt", "--out", "probs.txt"],
        &[
            "oracle",
            "sample",
            "--circuit",
            "circuit.txt",
            "--num",
            "500",
            "--out",
            "exact.txt",
        ],
        &[
            "xeb",
            "--samples",
            "samples.txt",
            "--probs",
            "probs.txt",
            "--out",
            "xeb.txt",
        ],
        &[
            "spoof",
            "--circuit",
            "circuit.txt",
            "--num",
            "50",
            "--fidelity",
            "0.5",
            "--out",
            "spoof.txt",
        ],
        &[
            "diagnose",
            "--circuit",
            "circuit.txt",
            "--k",
            "3",
            "--out",
            "diagnose.txt",
        ],
    ];
    let mut digests = BTreeMap::new();
    let mut stdouts = Vec::new();
    for (i, step) in steps.iter().enumerate() {
        let manifest = format!("manifest{i}.json");
        let mut args = step.to_vec();
        args.extend(["--seed", seed, "--threads", threads, "--manifest", &manifest]);
        stdouts.push(cli_ok(dir, &args).stdout);
        let m: Value = serde_json::from_str(&fs::read_to_string(dir.join(&manifest)).unwrap()).unwrap();
        digests.insert(
            format!("{i} {}", step.join(" ")),
            serde_json::json!([m["inputs"], m["outputs"]]),
        );
    }
    (digests, stdouts)
}

fn determinism() -> Outcome {
    let (a, b, c) = (
        tempfile::tempdir().unwrap(),
        tempfile::tempdir().unwrap(),
        tempfile::tempdir().unwrap(),
    );
    let (da, sa) = pipeline(a.path(), "11", "1");
    let (db, sb) = pipeline(b.path(), "11", "4");
    let (dc, _) = pipeline(c.path(), "12", "4");
    let differing: Vec<&String> = da.keys().filter(|k| da[*k] != db[*k]).collect();
    let same_reports = sa == sb;
    let sample_key = da.keys().find(|k| k.contains("samples.txt")).unwrap();
    let seed_matters = da[sample_key] != dc[sample_key];
    Outcome {
        pass: differing.is_empty() && same_reports && seed_matters,
        detail: format!(
            "{} commands rerun (1 vs 4 threads): differing manifests {:?}, identical reports {same_reports}, other seed changes samples {seed_matters}",
            da.len(),
            differing
        ),
    }
}

fn structural() -> Outcome {
    let (mut worst_slice, mut worst_tree) = (0.0f64, 0.0f64);
    for i in 0..20 {
        let (c, _) = corpus(i);
        let net = open_network(&c);
        let greedy = greedy_tree(&net);
        let full = contract(&net, &greedy, &SliceAssignment::new()).unwrap();
        let budget = 16u64 << (c.num_qubits() + 3);
        let (sliced, tree) = choose_fully_sliced(&net, &greedy, budget, SliceStrategy::MinCount(4)).unwrap();
        let legs: Vec<Leg> = sliced.iter().copied().collect();
        let mut sum = vec![C64::new(0.0, 0.0); full.data.len()];
        for x in 0..1usize << legs.len() {
            let a: SliceAssignment = legs.iter().enumerate().map(|(p, &l)| (l, (x >> p & 1) as u8)).collect();
            for (s, v) in sum.iter_mut().zip(&contract(&net, &tree, &a).unwrap().data) {
                *s += v;
            }
        }
        worst_slice = worst_slice.max(relative_diff(&sum, &full.data));
        let (parallel, _) = sliced_contract_sum(&net, &tree, &[], &[0], &Default::default()).unwrap();
        worst_slice = worst_slice.max(relative_diff(&parallel.data, &full.data));
        let one = plan(&net, &PlannerConfig { seed: 1, ..quick() }).unwrap().tree;
        let two = plan(
            &net,
            &PlannerConfig {
                seed: 2,
                budget_bytes: budget,
                strategy: SliceStrategy::MinCount(2),
                ..quick()
            },
        )
        .unwrap()
        .tree;
        let (x, _) = sliced_contract_sum(&net, &one, &[], &[0], &Default::default()).unwrap();
        let (y, _) = sliced_contract_sum(&net, &two, &[], &[0], &Default::default()).unwrap();
        worst_tree = worst_tree
            .max(relative_diff(&x.data, &y.data))
            .max(relative_diff(&x.data, &full.data));
    }
    Outcome {
        pass: worst_slice < 1e-10 && worst_tree < 1e-10,
        detail: format!("20 networks: slice sum rel {worst_slice:.2e}, tree independence rel {worst_tree:.2e}"),
    }
}

fn main() {
    let criteria: [Criterion; 11] = [
        (1, "norm network correctness", norm_network_correctness),
        (2, "fidelity identity", fidelity_identity),
        (3, "orthogonality", orthogonality),
        (4, "sampler exactness", sampler_exactness),
        (5, "XEB vs fidelity", xeb_vs_fidelity),
        (6, "spoofing law", spoofing_law),
        (7, "epsilon calibration", epsilon_calibration),
        (8, "bounds", bounds),
        (9, "order statistics", order_statistics),
        (10, "determinism", determinism),
        (11, "structural", structural),
    ];
    let only: Vec<usize> = std::env::var("ACCEPTANCE_ONLY")
        .map(|v| v.split(',').filter_map(|w| w.trim().parse().ok()).collect())
        .unwrap_or_default();
    let mut failed = Vec::new();
    for (id, name, run) in criteria {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let o = run();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        let sep = if o.detail.starts_with('\n') { "" } else { " " };
        println!(
            "criterion {id} ({name}): {verdict} [{:.1} s]{sep}{}",
            start.elapsed().as_secs_f64(),
            o.detail
        );
        if !o.pass {
            failed.push(id);
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
