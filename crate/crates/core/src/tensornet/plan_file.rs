//! Text form of a contraction tree.
//!
//! ```text
//! plan v1
//! network <sha256 of the network structure>
//! tensors 3
//! leaf 0
//! leaf 1
//! pair 0 1 -> 2 5
//! leaf 2
//! pair 2 3 ->
//! sliced 5
//! ```
//!
//! Node ids are line positions among the `leaf`/`pair` lines. The legs after
//! `->` are those of the intermediate and are checked on reading.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::tree::{annotate, ContractionTree, Node};
use super::{Leg, TensorNetwork};
use crate::error::{Error, Result};

pub fn write_plan(net: &TensorNetwork, tree: &ContractionTree) -> Result<String> {
    let infos = annotate(net, tree)?;
    let mut out = String::from("plan v1\n");
    let _ = writeln!(out, "network {}", net.structure_digest());
    let _ = writeln!(out, "tensors {}", net.num_tensors());
    for (node, info) in tree.nodes().iter().zip(&infos) {
        match *node {
            Node::Leaf(t) => {
                let _ = writeln!(out, "leaf {t}");
            }
            Node::Pair(a, b) => {
                let _ = write!(out, "pair {a} {b} ->");
                for l in &info.legs {
                    let _ = write!(out, " {l}");
                }
                out.push('\n');
            }
        }
    }
    out.push_str("sliced");
    for l in tree.sliced() {
        let _ = write!(out, " {l}");
    }
    out.push('\n');
    Ok(out)
}

fn bad(line: usize, message: impl Into<String>) -> Error {
    Error::Format {
        kind: "plan",
        line,
        message: message.into(),
    }
}

fn numbers(line: usize, words: &[&str]) -> Result<Vec<usize>> {
    words
        .iter()
        .map(|w| {
            w.parse::<usize>()
                .map_err(|_| bad(line, format!("expected a number, found `{w}`")))
        })
        .collect()
}

/// Reads a plan written for `net`; fails if it was written for another network.
pub fn read_plan(text: &str, net: &TensorNetwork) -> Result<ContractionTree> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let mut expect = |prefix: &str| -> Result<(usize, String)> {
        let (no, l) = lines.next().ok_or_else(|| bad(0, format!("missing `{prefix}` line")))?;
        match l.strip_prefix(prefix) {
            Some(rest) => Ok((no, rest.trim().to_string())),
            None => Err(bad(no, format!("expected `{prefix}`"))),
        }
    };
    let (no, version) = expect("plan")?;
    if version != "v1" {
        return Err(bad(no, format!("unsupported version `{version}`")));
    }
    let (no, digest) = expect("network")?;
    if digest != net.structure_digest() {
        return Err(Error::TreeMismatch(format!(
            "plan (line {no}) was written for a different network"
        )));
    }
    let (no, count) = expect("tensors")?;
    if numbers(no, &[count.as_str()])?[0] != net.num_tensors() {
        return Err(Error::TreeMismatch(format!("plan expects {count} tensors")));
    }

    let mut nodes = Vec::new();
    let mut recorded: Vec<Option<Vec<Leg>>> = Vec::new();
    let mut sliced = None;
    for (no, l) in lines {
        let words: Vec<&str> = l.split_whitespace().collect();
        match words[0] {
            "leaf" if words.len() == 2 => {
                nodes.push(Node::Leaf(numbers(no, &words[1..])?[0]));
                recorded.push(None);
            }
            "pair" if words.len() >= 4 && words[3] == "->" => {
                let ab = numbers(no, &words[1..3])?;
                if ab.iter().any(|&c| c >= nodes.len()) {
                    return Err(bad(no, "pair refers to a later node"));
                }
                nodes.push(Node::Pair(ab[0], ab[1]));
                recorded.push(Some(numbers(no, &words[4..])?));
            }
            "sliced" if sliced.is_none() => {
                sliced = Some(numbers(no, &words[1..])?.into_iter().collect::<BTreeSet<Leg>>());
            }
            _ => return Err(bad(no, format!("unexpected line `{l}`"))),
        }
    }
    let sliced = sliced.ok_or_else(|| bad(0, "missing `sliced` line"))?;
    let tree = ContractionTree::new(nodes.clone(), sliced)?;
    if tree.nodes() != nodes.as_slice() {
        return Err(Error::TreeMismatch("nodes are not in depth-first postorder".into()));
    }
    let infos = annotate(net, &tree)?;
    for (i, (rec, info)) in recorded.iter().zip(&infos).enumerate() {
        if let Some(legs) = rec {
            if legs != &info.legs {
                return Err(Error::TreeMismatch(format!(
                    "node {i} lists legs {legs:?}, expected {:?}",
                    info.legs
                )));
            }
        }
    }
    Ok(tree)
}
