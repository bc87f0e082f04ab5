#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rqcsample::circuit::random::{random_circuit, Entangler};
use rqcsample::circuit::{Circuit, VertexSet};
use rqcsample::fidelity::sliced_vertex_select;
use rqcsample::tensornet::{build_network, NetworkOptions, OutputSpec, TensorNetwork};
use rqcsample::C64;

pub fn relative_diff(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum::<f64>().sqrt();
    num / den.max(f64::MIN_POSITIVE)
}

pub fn open_network(c: &Circuit) -> TensorNetwork {
    build_network(c, &OutputSpec::OpenAll, &NetworkOptions::default()).unwrap()
}

/// Seeded circuit `i` of the 20-circuit corpus: 10 to 14 qubits, 6 to 10
/// cycles, and 2 to 5 partially sliced vertices picked by the greedy from a
/// random half of the sliceable legs.
pub fn corpus(i: usize) -> (Circuit, VertexSet) {
    let n = 10 + i % 5;
    let cycles = 6 + (i / 5 + i) % 5;
    let entangler = if i % 4 == 3 { Entangler::Cz } else { Entangler::Fsim };
    let c = random_circuit(n, cycles, entangler, 1000 + i as u64);
    let net = open_network(&c);
    let mut cand: Vec<usize> = net
        .legs()
        .into_iter()
        .filter(|&l| !net.is_open(l))
        .filter_map(|l| net.vertex_of_leg(l))
        .collect();
    cand.shuffle(&mut ChaCha8Rng::seed_from_u64(i as u64));
    let want = 2 + i % 4;
    let half: VertexSet = cand.iter().copied().take(cand.len() / 2).collect();
    let mut s = sliced_vertex_select(&c, &half, want).unwrap();
    if s.len() < 2 {
        s = sliced_vertex_select(&c, &cand.into_iter().collect(), want).unwrap();
    }
    assert!((2..=5).contains(&s.len()), "corpus {i} has |S| = {}", s.len());
    (c, s)
}

pub fn cli(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rqcsample"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

/// Runs the binary and panics with its stderr unless it exits 0.
pub fn cli_ok(dir: &Path, args: &[&str]) -> Output {
    let out = cli(dir, args);
    assert!(
        out.status.success(),
        "rqcsample {args:?} exited {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}
