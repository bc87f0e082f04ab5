use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use rqcsample::bits::{format_bits, parse_bits};
use rqcsample::circuit::{parse_circuit, Circuit};
use rqcsample::Error;

/// Exit status classes.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Input(String),
    Numerical(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Input(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Input(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

pub type CliResult<T> = Result<T, Failure>;

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Reads files and remembers their digests for the manifest.
#[derive(Default)]
pub struct Files {
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
}

impl Files {
    pub fn read(&mut self, path: &Path) -> CliResult<String> {
        let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        self.inputs.insert(path.display().to_string(), digest(text.as_bytes()));
        Ok(text)
    }

    pub fn circuit(&mut self, path: &Path) -> CliResult<Circuit> {
        let text = self.read(path)?;
        parse_circuit(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
    }

    /// Writes `text` to `path` through a temporary file and a rename, or to
    /// stdout when no path is given.
    pub fn write(&mut self, path: Option<&Path>, text: &str) -> CliResult<()> {
        let key = path.map_or("-".to_string(), |p| p.display().to_string());
        self.outputs.insert(key, digest(text.as_bytes()));
        match path {
            None => {
                print!("{text}");
                Ok(())
            }
            Some(p) => {
                let mut tmp = PathBuf::from(p);
                let name = p
                    .file_name()
                    .map(|n| n.to_string_lossy().into_owned())
                    .unwrap_or_default();
                tmp.set_file_name(format!(".{name}.tmp"));
                fs::write(&tmp, text)
                    .and_then(|_| fs::rename(&tmp, p))
                    .map_err(|e| Failure::Input(format!("{}: {e}", p.display())))
            }
        }
    }
}

/// Output pattern: one character per qubit, `0`/`1` fixed, `*` free.
#[derive(Clone, Debug, PartialEq)]
pub struct Pattern {
    pub fixed: BTreeMap<usize, u8>,
    pub free: Vec<usize>,
}

impl Pattern {
    pub fn parse(text: &str, n: usize) -> CliResult<Pattern> {
        let chars: Vec<char> = text.trim().chars().collect();
        if chars.len() != n {
            return Err(Failure::Input(format!(
                "pattern has {} characters for {n} qubits",
                chars.len()
            )));
        }
        let mut fixed = BTreeMap::new();
        let mut free = Vec::new();
        for (q, ch) in chars.into_iter().enumerate() {
            match ch {
                '0' => {
                    fixed.insert(q, 0);
                }
                '1' => {
                    fixed.insert(q, 1);
                }
                '*' => free.push(q),
                other => return Err(Failure::Input(format!("pattern character `{other}` is not 0, 1 or *"))),
            }
        }
        Ok(Pattern { fixed, free })
    }

    pub fn zeros_with_free(n: usize, free: &[usize]) -> Pattern {
        Pattern {
            fixed: (0..n).filter(|q| !free.contains(q)).map(|q| (q, 0)).collect(),
            free: free.to_vec(),
        }
    }

    pub fn to_text(&self, n: usize) -> String {
        (0..n)
            .map(|q| match self.fixed.get(&q) {
                Some(0) => '0',
                Some(_) => '1',
                None => '*',
            })
            .collect()
    }
}

pub fn parse_list(text: &str) -> CliResult<Vec<usize>> {
    text.split(',')
        .filter(|w| !w.trim().is_empty())
        .map(|w| {
            w.trim()
                .parse()
                .map_err(|_| Failure::Input(format!("`{w}` is not a non-negative integer")))
        })
        .collect()
}

pub fn read_bitstrings(text: &str, n: usize) -> CliResult<Vec<usize>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| parse_bits(l.trim(), n).map_err(|e| Failure::Input(format!("line {}: {e}", i + 1))))
        .collect()
}

/// `<bits> <probability>` lines.
pub fn read_probabilities(text: &str) -> CliResult<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for (i, l) in text.lines().enumerate() {
        let mut words = l.split_whitespace();
        let (Some(b), Some(p)) = (words.next(), words.next()) else {
            if l.trim().is_empty() {
                continue;
            }
            return Err(Failure::Input(format!(
                "line {}: expected `<bits> <probability>`",
                i + 1
            )));
        };
        let p: f64 = p
            .parse()
            .map_err(|_| Failure::Input(format!("line {}: bad probability `{p}`", i + 1)))?;
        out.insert(b.to_string(), p);
    }
    Ok(out)
}

pub fn probability_lines(bits: &[usize], probs: &[f64], n: usize) -> String {
    bits.iter()
        .zip(probs)
        .map(|(&b, p)| format!("{} {p:e}\n", format_bits(b, n)))
        .collect()
}

/// Ordered key-value report printed as `key value` lines or one JSON object.
#[derive(Default)]
pub struct Report {
    entries: Vec<(String, Value)>,
}

impl Report {
    pub fn put(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.entries.push((key.to_string(), value.into()));
        self
    }

    pub fn text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let shown = match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            out.push_str(&format!("{k} {shown}\n"));
        }
        out
    }

    pub fn json(&self) -> String {
        let map: Map<String, Value> = self.entries.iter().cloned().collect();
        let mut s = serde_json::to_string_pretty(&Value::Object(map)).expect("report serializes");
        s.push('\n');
        s
    }
}

pub fn manifest(command: &str, args: &[String], seed: u64, files: &Files, elapsed_ms: u128) -> String {
    let v = json!({
        "command": command,
        "args": args,
        "seed": seed,
        "versions": { "rqcsample": env!("CARGO_PKG_VERSION") },
        "inputs": files.inputs,
        "outputs": files.outputs,
        "elapsed_ms": elapsed_ms as u64,
    });
    let mut s = serde_json::to_string_pretty(&v).expect("manifest serializes");
    s.push('\n');
    s
}
