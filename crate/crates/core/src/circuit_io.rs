//! JSON circuit documents.
//!
//! ```json
//! { "n": 2,
//!   "noise": { "model": "uniform", "gamma": 0.1 },
//!   "layers": [ { "gates": [ { "kind": "CNOT", "qubits": [0, 1] } ] },
//!               { "gates": [ { "kind": "H", "qubits": [0] } ] } ] }
//! ```
//!
//! Layers are listed from `t = 1` (next to the measurement) to `t = d`.
//! Explicit matrices use `"kind": "unitary"` and `"matrix"` rows whose entries are
//! either real numbers or `[re, im]` pairs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, GateKind, GateMatrix, Layer, NoiseModel, NoiseSpec};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CircuitDoc {
    n: usize,
    noise: NoiseDoc,
    layers: Vec<LayerDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NoiseDoc {
    model: NoiseModel,
    #[serde(default)]
    gamma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gamma_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerDoc {
    gates: Vec<GateDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GateDoc {
    kind: String,
    qubits: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    matrix: Option<Vec<Vec<Entry>>>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

fn gate_from_doc(g: GateDoc) -> Result<Gate> {
    let kind = if g.kind.eq_ignore_ascii_case("unitary") {
        let rows = g.matrix.ok_or_else(|| Error::Parse("unitary gate needs a matrix".into()))?;
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::Parse("gate matrix must be square".into()));
            }
            data.extend(row.into_iter().map(|e| match e {
                Entry::Real(x) => Complex64::new(x, 0.0),
                Entry::Complex([re, im]) => Complex64::new(re, im),
            }));
        }
        GateKind::Unitary(GateMatrix::new(dim, data)?)
    } else {
        if g.matrix.is_some() {
            return Err(Error::Parse(format!("gate {} does not take a matrix", g.kind)));
        }
        GateKind::from_name(&g.kind).ok_or(Error::UnknownGate(g.kind))?
    };
    Ok(Gate { kind, qubits: g.qubits })
}

/// Parses and validates a circuit document.
pub fn parse_circuit(text: &str) -> Result<Circuit> {
    let doc: CircuitDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let layers = doc
        .layers
        .into_iter()
        .map(|l| l.gates.into_iter().map(gate_from_doc).collect::<Result<Vec<_>>>().map(Layer::new))
        .collect::<Result<Vec<_>>>()?;
    let noise =
        NoiseSpec { model: doc.noise.model, gamma: doc.noise.gamma, gamma_s: doc.noise.gamma_s, seed: doc.noise.seed };
    Circuit::new(doc.n, layers, noise)
}

/// Pretty-printed JSON document for `circuit`.
pub fn format_circuit(circuit: &Circuit) -> String {
    let doc = CircuitDoc {
        n: circuit.n,
        noise: NoiseDoc {
            model: circuit.noise.model,
            gamma: circuit.noise.gamma,
            gamma_s: circuit.noise.gamma_s,
            seed: circuit.noise.seed,
        },
        layers: circuit
            .layers
            .iter()
            .map(|l| LayerDoc {
                gates: l
                    .gates
                    .iter()
                    .map(|g| GateDoc {
                        kind: g.kind.name().to_string(),
                        qubits: g.qubits.clone(),
                        matrix: match &g.kind {
                            GateKind::Unitary(m) => Some(
                                (0..m.dim())
                                    .map(|r| {
                                        (0..m.dim())
                                            .map(|c| {
                                                let z = m.get(r, c);
                                                Entry::Complex([z.re, z.im])
                                            })
                                            .collect()
                                    })
                                    .collect(),
                            ),
                            _ => None,
                        },
                    })
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("circuit documents always serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    const BELL: &str = r#"{"n":2,"noise":{"model":"uniform","gamma":0.1},
        "layers":[{"gates":[{"kind":"CNOT","qubits":[0,1]}]}]}"#;

    #[test]
    fn minimal_document() {
        let c = parse_circuit(BELL).unwrap();
        assert_eq!(c.depth(), 1);
        assert_eq!(c.noise.model, NoiseModel::Uniform);
        assert_eq!(parse_circuit(&format_circuit(&c)).unwrap(), c);
    }

    #[test]
    fn errors() {
        let dup = BELL.replace("[0,1]", "[0,0]");
        assert!(parse_circuit(&dup).unwrap_err().to_string().contains("duplicate qubit in gate"));

        let nu = r#"{"n":1,"noise":{"model":"uniform","gamma":0.1},
            "layers":[{"gates":[{"kind":"unitary","qubits":[0],"matrix":[[1,0],[0,2]]}]}]}"#;
        assert!(parse_circuit(nu).unwrap_err().to_string().contains("non-unitary"));

        let unk = BELL.replace("CNOT", "FOO");
        assert_eq!(parse_circuit(&unk).unwrap_err(), Error::UnknownGate("FOO".into()));

        assert!(matches!(parse_circuit("{\"n\":"), Err(Error::Parse(_))));
        let neg = BELL.replace("0.1", "-0.1");
        assert!(parse_circuit(&neg).unwrap_err().to_string().contains("negative noise rate"));
    }

    #[test]
    fn complex_matrix_round_trip() {
        let t = r#"{"n":1,"noise":{"model":"nonunital_random","gamma_s":0.2,"seed":7},
            "layers":[{"gates":[{"kind":"unitary","qubits":[0],
              "matrix":[[[1,0],[0,0]],[[0,0],[0.7071067811865476,0.7071067811865476]]]}]}]}"#;
        let c = parse_circuit(t).unwrap();
        assert_eq!(c.noise.seed, Some(7));
        assert_eq!(parse_circuit(&format_circuit(&c)).unwrap(), c);
    }
}
