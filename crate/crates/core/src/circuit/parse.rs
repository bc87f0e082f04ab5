//! Circuit file reader.
//!
//! ```text
//! 4                      # qubit count
//! 0 h 0
//! 0 fsim(1.5707963,0.5235988) 1 2
//! 1 rz(0.25) 3
//! ```
//!
//! Each gate line is `<moment> <gate>[(<angle>,...)] <qubit>...`. Moments
//! must not decrease, and gates sharing a moment must act on disjoint qubits.

use super::{gates, Circuit, Gate, GateKind};
use crate::error::{Error, Result};

struct Cursor<'a> {
    line: usize,
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn column(&self) -> usize {
        self.text[..self.pos].chars().count() + 1
    }

    fn error(&self, message: impl Into<String>) -> Error {
        Error::Syntax {
            line: self.line,
            column: self.column(),
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while let Some(ch) = self.text[self.pos..].chars().next() {
            if ch.is_whitespace() {
                self.pos += ch.len_utf8();
            } else {
                break;
            }
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.text.len()
    }

    /// Next run of characters that are not whitespace and not in `stops`.
    fn word(&mut self, stops: &[char]) -> &'a str {
        self.skip_ws();
        let start = self.pos;
        while let Some(ch) = self.text[self.pos..].chars().next() {
            if ch.is_whitespace() || stops.contains(&ch) {
                break;
            }
            self.pos += ch.len_utf8();
        }
        &self.text[start..self.pos]
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn integer(&mut self, what: &str) -> Result<usize> {
        self.skip_ws();
        let start_col = self.column();
        let word = self.word(&[]);
        word.parse::<usize>().map_err(|_| Error::Syntax {
            line: self.line,
            column: start_col,
            message: format!("expected {what}, found `{word}`"),
        })
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

pub fn parse_circuit(text: &str) -> Result<Circuit> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, strip_comment(l)))
        .filter(|(_, l)| !l.trim().is_empty());

    let (first_line, header) = lines.next().ok_or(Error::Syntax {
        line: 1,
        column: 1,
        message: "missing qubit count".into(),
    })?;
    let mut cursor = Cursor {
        line: first_line,
        text: header,
        pos: 0,
    };
    let n = cursor.integer("qubit count")?;
    if !cursor.at_end() {
        return Err(cursor.error("unexpected text after qubit count"));
    }

    let mut gate_list = Vec::new();
    let mut last_moment = 0usize;
    let mut moment_qubits: Vec<usize> = Vec::new();
    for (line_no, body) in lines {
        let mut cur = Cursor {
            line: line_no,
            text: body,
            pos: 0,
        };
        let moment = cur.integer("moment")?;
        if moment < last_moment {
            return Err(cur.error(format!("moment {moment} follows moment {last_moment}")));
        }
        if moment != last_moment {
            moment_qubits.clear();
        }
        last_moment = moment;

        cur.skip_ws();
        let name = cur.word(&['(']);
        if name.is_empty() {
            return Err(cur.error("expected gate name"));
        }
        let kind = GateKind::from_name(name).ok_or_else(|| Error::UnknownGate {
            line: line_no,
            name: name.to_string(),
        })?;

        let mut params = Vec::new();
        if cur.peek() == Some('(') {
            cur.pos += 1;
            loop {
                cur.skip_ws();
                let col = cur.column();
                let tok = cur.word(&[',', ')']);
                let value = tok.parse::<f64>().map_err(|_| Error::Syntax {
                    line: line_no,
                    column: col,
                    message: format!("expected angle, found `{tok}`"),
                })?;
                params.push(value);
                cur.skip_ws();
                match cur.peek() {
                    Some(',') => cur.pos += 1,
                    Some(')') => {
                        cur.pos += 1;
                        break;
                    }
                    _ => return Err(cur.error("expected `,` or `)`")),
                }
            }
        }
        if params.len() != kind.param_count() {
            return Err(cur.error(format!(
                "gate `{name}` takes {} parameters, got {}",
                kind.param_count(),
                params.len()
            )));
        }

        let mut qubits = Vec::new();
        while !cur.at_end() {
            let col = cur.column();
            let q = cur.integer("qubit index")?;
            if q >= n {
                return Err(Error::QubitOutOfRange {
                    line: line_no,
                    qubit: q,
                    n,
                });
            }
            if moment_qubits.contains(&q) || qubits.contains(&q) {
                return Err(Error::Syntax {
                    line: line_no,
                    column: col,
                    message: format!("qubit {q} is already used in moment {moment}"),
                });
            }
            qubits.push(q);
        }
        if qubits.len() != kind.arity() {
            return Err(cur.error(format!(
                "gate `{name}` acts on {} qubits, got {}",
                kind.arity(),
                qubits.len()
            )));
        }
        moment_qubits.extend_from_slice(&qubits);

        let gate = Gate::new(moment, kind, params, qubits);
        let deviation = gates::unitarity_deviation(&gate.matrix);
        if deviation >= 1e-12 {
            return Err(Error::NonUnitary {
                line: line_no,
                deviation,
            });
        }
        gate_list.push(gate);
    }
    Circuit::new(n, gate_list)
}
