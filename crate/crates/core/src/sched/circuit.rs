//! The `.iqc` circuit format.
//!
//! ```text
//! # comment
//! qubits 3
//! H q0
//! MS q0 q2 0.785
//! GLOBAL_MS q0 q1 q2 1.5708
//! MEASURE q1
//! ```

use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GateKind {
    X,
    H,
    Rz,
    Ms,
    Cnot,
    GlobalMs,
    Measure,
}

impl GateKind {
    pub fn name(self) -> &'static str {
        match self {
            GateKind::X => "X",
            GateKind::H => "H",
            GateKind::Rz => "RZ",
            GateKind::Ms => "MS",
            GateKind::Cnot => "CNOT",
            GateKind::GlobalMs => "GLOBAL_MS",
            GateKind::Measure => "MEASURE",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "X" => GateKind::X,
            "H" => GateKind::H,
            "RZ" => GateKind::Rz,
            "MS" => GateKind::Ms,
            "CNOT" => GateKind::Cnot,
            "GLOBAL_MS" => GateKind::GlobalMs,
            "MEASURE" => GateKind::Measure,
            _ => return None,
        })
    }

    /// True for gates acting on exactly two qubits.
    pub fn is_two_qubit(self) -> bool {
        matches!(self, GateKind::Ms | GateKind::Cnot)
    }

    fn arity(self) -> Arity {
        match self {
            GateKind::X | GateKind::H | GateKind::Measure => Arity::Exactly(1),
            GateKind::Rz => Arity::Exactly(1),
            GateKind::Ms | GateKind::Cnot => Arity::Exactly(2),
            GateKind::GlobalMs => Arity::AtLeast(2),
        }
    }

    fn angle(self) -> AngleRule {
        match self {
            GateKind::Rz => AngleRule::Required,
            GateKind::Ms | GateKind::GlobalMs => AngleRule::Optional,
            _ => AngleRule::Forbidden,
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

enum Arity {
    Exactly(usize),
    AtLeast(usize),
}

enum AngleRule {
    Required,
    Optional,
    Forbidden,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateOp {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub angle: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub n_qubits: usize,
    pub ops: Vec<GateOp>,
}

impl Circuit {
    /// Two-qubit ops between each unordered qubit pair, with multiplicity.
    pub fn interaction_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.ops
            .iter()
            .filter(|op| op.kind.is_two_qubit())
            .map(|op| (op.qubits[0].min(op.qubits[1]), op.qubits[0].max(op.qubits[1])))
    }

    pub fn to_iqc(&self) -> String {
        let mut out = format!("qubits {}\n", self.n_qubits);
        for op in &self.ops {
            out.push_str(op.kind.name());
            for q in &op.qubits {
                out.push_str(&format!(" q{q}"));
            }
            if let Some(a) = op.angle {
                out.push_str(&format!(" {a}"));
            }
            out.push('\n');
        }
        out
    }
}

fn err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Splits a line into tokens with 1-based start columns, dropping `#` comments.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let line = line.split('#').next().unwrap_or("");
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push((s + 1, &line[s..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

pub fn parse_circuit(text: &str) -> Result<Circuit> {
    let mut n_qubits = None;
    let mut ops = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let ln = idx + 1;
        let toks = tokens(line);
        let Some(&(col, head)) = toks.first() else {
            continue;
        };
        let Some(n) = n_qubits else {
            if head != "qubits" {
                return Err(err(ln, col, format!("expected header `qubits <n>`, found `{head}`")));
            }
            let &(c, v) = toks
                .get(1)
                .ok_or_else(|| err(ln, col + head.len(), "missing qubit count"))?;
            let v: usize = v
                .parse()
                .map_err(|_| err(ln, c, format!("malformed qubit count `{v}`")))?;
            if let Some(&(c, extra)) = toks.get(2) {
                return Err(err(ln, c, format!("unexpected token `{extra}` after qubit count")));
            }
            n_qubits = Some(v);
            continue;
        };
        let kind = GateKind::parse(head).ok_or_else(|| err(ln, col, format!("unknown gate `{head}`")))?;
        let mut qubits = Vec::new();
        let mut angle = None;
        for &(c, tok) in &toks[1..] {
            if angle.is_some() {
                return Err(err(ln, c, format!("unexpected token `{tok}` after angle")));
            }
            if let Some(index) = tok.strip_prefix('q') {
                let q: usize = index
                    .parse()
                    .map_err(|_| err(ln, c, format!("malformed qubit `{tok}`")))?;
                if q >= n {
                    return Err(err(ln, c, format!("qubit q{q} out of range for {n} qubits")));
                }
                if qubits.contains(&q) {
                    return Err(err(ln, c, format!("duplicate operand q{q}")));
                }
                qubits.push(q);
            } else {
                let a: f64 = tok
                    .parse()
                    .map_err(|_| err(ln, c, format!("malformed number `{tok}`")))?;
                if !a.is_finite() {
                    return Err(err(ln, c, format!("angle `{tok}` is not finite")));
                }
                angle = Some((c, a));
            }
        }
        let end = line.split('#').next().unwrap_or("").trim_end().len() + 1;
        match kind.arity() {
            Arity::Exactly(k) if qubits.len() != k => {
                return Err(err(ln, col, format!("{kind} takes {k} qubit(s), got {}", qubits.len())));
            }
            Arity::AtLeast(k) if qubits.len() < k => {
                return Err(err(
                    ln,
                    col,
                    format!("{kind} takes at least {k} qubits, got {}", qubits.len()),
                ));
            }
            _ => {}
        }
        match (kind.angle(), angle) {
            (AngleRule::Required, None) => return Err(err(ln, end, format!("{kind} requires an angle"))),
            (AngleRule::Forbidden, Some((c, _))) => {
                return Err(err(ln, c, format!("{kind} takes no angle")));
            }
            _ => {}
        }
        ops.push(GateOp {
            kind,
            qubits,
            angle: angle.map(|(_, a)| a),
        });
    }
    let n_qubits = n_qubits.ok_or_else(|| err(1, 1, "missing header `qubits <n>`"))?;
    Ok(Circuit { n_qubits, ops })
}

pub fn load_circuit(path: impl AsRef<Path>) -> Result<Circuit> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_circuit(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn location(e: Error) -> (usize, usize) {
        match e {
            Error::Parse { line, column, .. } => (line, column),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn single_cnot() {
        let c = parse_circuit("qubits 2\nCNOT q0 q1").unwrap();
        assert_eq!(c.ops.len(), 1);
        assert_eq!(c.ops[0].qubits, vec![0, 1]);
    }

    #[test]
    fn duplicate_operand() {
        let e = parse_circuit("qubits 1\nCNOT q0 q0").unwrap_err();
        assert_eq!(location(e), (2, 9));
    }

    #[test]
    fn diagnostics_carry_location() {
        assert_eq!(location(parse_circuit("qubits 2\n  FOO q0").unwrap_err()), (2, 3));
        assert_eq!(location(parse_circuit("qubits 2\nX q2").unwrap_err()), (2, 3));
        assert_eq!(location(parse_circuit("qubits 2\nRZ q0 1.2.3").unwrap_err()), (2, 7));
        assert_eq!(location(parse_circuit("qubits 2\nRZ q0").unwrap_err()), (2, 6));
        assert_eq!(location(parse_circuit("qubits 2\nX q0 0.5").unwrap_err()), (2, 6));
        assert_eq!(location(parse_circuit("qubits 2\nCNOT q0").unwrap_err()), (2, 1));
        assert_eq!(location(parse_circuit("# c\nX q0").unwrap_err()), (2, 1));
        assert_eq!(location(parse_circuit("").unwrap_err()), (1, 1));
        assert_eq!(location(parse_circuit("qubits two").unwrap_err()), (1, 8));
    }

    #[test]
    fn comments_blank_lines_and_global() {
        let c = parse_circuit("# header\n\nqubits 3 # three\nGLOBAL_MS q0 q1 q2 1.5\nMS q0 q2\nMEASURE q1\n").unwrap();
        assert_eq!(c.ops.len(), 3);
        assert_eq!(c.ops[0].angle, Some(1.5));
        assert_eq!(c.ops[1].angle, None);
        assert_eq!(c.interaction_pairs().collect::<Vec<_>>(), vec![(0, 2)]);
    }

    proptest! {
        #[test]
        fn iqc_round_trip(ops in prop::collection::vec((0usize..7, 0usize..4, 1usize..4, -3.0f64..3.0), 0..20)) {
            let n = 4;
            let kinds = [GateKind::X, GateKind::H, GateKind::Rz, GateKind::Ms, GateKind::Cnot, GateKind::GlobalMs, GateKind::Measure];
            let ops: Vec<GateOp> = ops
                .into_iter()
                .map(|(k, q, d, a)| {
                    let kind = kinds[k];
                    let qubits = match kind {
                        GateKind::Ms | GateKind::Cnot => vec![q, (q + d) % n],
                        GateKind::GlobalMs => (0..=d).map(|i| (q + i) % n).collect(),
                        _ => vec![q],
                    };
                    let angle = matches!(kind, GateKind::Rz | GateKind::Ms).then_some(a);
                    GateOp { kind, qubits, angle }
                })
                .collect();
            let c = Circuit { n_qubits: n, ops };
            prop_assert_eq!(parse_circuit(&c.to_iqc()).unwrap(), c);
        }
    }
}
