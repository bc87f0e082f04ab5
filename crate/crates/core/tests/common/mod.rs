#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rqcsample::circuit::random::{random_circuit, Entangler};
use rqcsample::circuit::{Circuit, VertexSet};
use rqcsample::fidelity::sliced_vertex_select;
use rqcsample::tensornet::{build_network, Leg, NetworkOptions, OutputSpec, Tensor, TensorNetwork};
use rqcsample::C64;

/// Brute-force einsum: sums the product of all tensors over every
/// assignment of every leg. The result is indexed by the open legs in
/// ascending label order.
pub fn naive_contract(net: &TensorNetwork) -> Vec<C64> {
    let mut legs: Vec<Leg> = net.legs().into_iter().collect();
    legs.sort_unstable();
    let mut open: Vec<Leg> = net.open().to_vec();
    open.sort_unstable();
    assert!(legs.len() <= 22, "network too large for brute force");
    let pos = |l: Leg| legs.binary_search(&l).unwrap();
    let mut out = vec![C64::new(0.0, 0.0); 1 << open.len()];
    for x in 0usize..1 << legs.len() {
        let bit = |l: Leg| (x >> pos(l)) & 1;
        let mut prod = C64::new(1.0, 0.0);
        for t in net.tensors() {
            let r = t.legs.len();
            let idx = t
                .legs
                .iter()
                .enumerate()
                .fold(0, |acc, (p, &l)| acc | bit(l) << (r - 1 - p));
            prod *= t.data[idx];
            if prod == C64::new(0.0, 0.0) {
                break;
            }
        }
        let o = open
            .iter()
            .enumerate()
            .fold(0, |acc, (p, &l)| acc | bit(l) << (open.len() - 1 - p));
        out[o] += prod;
    }
    out
}

pub fn max_abs_diff(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn relative_diff(a: &[C64], b: &[C64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum::<f64>().sqrt();
    num / den.max(f64::MIN_POSITIVE)
}

/// Open-all network of `c`, unsimplified when `simplify` is false.
pub fn open_network(c: &Circuit, simplify: bool) -> TensorNetwork {
    build_network(
        c,
        &OutputSpec::OpenAll,
        &NetworkOptions {
            simplify,
            ..Default::default()
        },
    )
    .unwrap()
}

/// Seeded test circuit `i` of the norm corpus: 10 to 14 qubits, 6 to 10
/// cycles, and a partially sliced set of 2 to 5 vertices chosen by the
/// greedy from a random half of the sliceable legs.
pub fn corpus(i: usize) -> (Circuit, VertexSet) {
    let n = 10 + i % 5;
    let cycles = 6 + (i / 5 + i) % 5;
    let entangler = if i % 4 == 3 { Entangler::Cz } else { Entangler::Fsim };
    let c = random_circuit(n, cycles, entangler, 1000 + i as u64);
    let net = open_network(&c, true);
    let mut cand: Vec<usize> = net
        .legs()
        .into_iter()
        .filter(|&l| !net.is_open(l))
        .filter_map(|l| net.vertex_of_leg(l))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(i as u64);
    cand.shuffle(&mut rng);
    let want = 2 + i % 4;
    let half: VertexSet = cand.iter().copied().take(cand.len() / 2).collect();
    let mut s = sliced_vertex_select(&c, &half, want).unwrap();
    if s.len() < 2 {
        s = sliced_vertex_select(&c, &cand.into_iter().collect(), want).unwrap();
    }
    assert!((2..=5).contains(&s.len()), "corpus {i} has |S| = {}", s.len());
    (c, s)
}

pub fn tensor(legs: &[Leg], vals: &[(f64, f64)]) -> Tensor {
    Tensor::new(legs.to_vec(), vals.iter().map(|&(r, i)| C64::new(r, i)).collect())
}
