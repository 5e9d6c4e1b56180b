//! Circuit description files and builtin circuits.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use mpoq::circuits::{
    inverse_qft_sequence, qfa_mpo, qfa_network_input_positions, qfa_network_mpo, qfa_network_output_positions,
    qft_sequence, shor_readout, shor_sequence, shor_uf_generic, shor_uf_mpo, simon_first_register, simon_sequence,
    GateGroupSequence, RegisterLayout, ShorInstance,
};
use mpoq::gates::hadamard_layer;
use mpoq::tensor::named_state;
use mpoq::{Error, GateMatrix, GatePlacement, Mpo, Mps, TruncationPolicy};

use crate::CliError;

/// A circuit file: register size, initial state, operations and policy.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitSpec {
    pub n: usize,
    #[serde(default)]
    pub initial: InitialSpec,
    pub ops: Vec<OpSpec>,
    #[serde(default)]
    pub policy: Option<TruncationPolicy>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialSpec {
    /// Only `"zeros"` is accepted.
    Keyword(String),
    Basis {
        basis: String,
    },
    Named {
        named: String,
    },
    Hadamard {
        hadamard_on: Vec<usize>,
    },
}

impl InitialSpec {
    pub fn zeros() -> Self {
        InitialSpec::Keyword("zeros".into())
    }
}

impl Default for InitialSpec {
    fn default() -> Self {
        Self::zeros()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OpSpec {
    Gate(GateOp),
    Builtin(BuiltinOp),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateOp {
    pub gate: String,
    pub target: usize,
    #[serde(default)]
    pub controls: Vec<usize>,
    #[serde(default)]
    pub k: Option<u32>,
    #[serde(default)]
    pub phi: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuiltinOp {
    pub builtin: String,
    #[serde(default)]
    pub params: Value,
}

fn schema(msg: impl Into<String>) -> CliError {
    CliError::Schema(msg.into())
}

impl CircuitSpec {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| schema(format!("invalid circuit file: {e}")))
    }

    pub fn policy(&self) -> Result<TruncationPolicy, CliError> {
        let policy = self.policy.unwrap_or_default();
        policy.validate().map_err(|e| schema(e.to_string()))?;
        Ok(policy)
    }

    /// Validates positions and builds the gate groups, one per operation.
    pub fn sequence(&self) -> Result<GateGroupSequence, CliError> {
        if self.n == 0 {
            return Err(schema("n must be positive"));
        }
        let groups = self
            .ops
            .iter()
            .enumerate()
            .map(|(i, op)| op_mpo(op, self.n).map_err(|e| schema(format!("op {}: {}", i + 1, e))))
            .collect::<Result<Vec<_>, _>>()?;
        GateGroupSequence::new("circuit", self.n, groups, RegisterLayout::contiguous(self.n)).map_err(CliError::from)
    }

    pub fn initial_state(&self) -> Result<Mps, CliError> {
        build_initial(&self.initial, self.n)
    }
}

pub fn build_initial(spec: &InitialSpec, n: usize) -> Result<Mps, CliError> {
    let state = match spec {
        InitialSpec::Keyword(k) if k == "zeros" => Mps::zeros(n),
        InitialSpec::Keyword(k) => return Err(schema(format!("unknown initial state `{k}`"))),
        InitialSpec::Basis { basis } => {
            if basis.len() != n {
                return Err(schema(format!(
                    "basis state `{basis}` has {} bits, register has {n}",
                    basis.len()
                )));
            }
            let bits = basis
                .chars()
                .map(|c| match c {
                    '0' => Ok(0u8),
                    '1' => Ok(1u8),
                    _ => Err(schema(format!("basis state `{basis}` must contain only 0 and 1"))),
                })
                .collect::<Result<Vec<_>, _>>()?;
            Mps::from_basis_state(&bits)
        }
        InitialSpec::Named { named } => named_state(&named.to_ascii_lowercase(), n),
        InitialSpec::Hadamard { hadamard_on } => hadamard_layer(hadamard_on, n).and_then(|h| h.apply(&Mps::zeros(n)?)),
    };
    state.map_err(|e| schema(e.to_string()))
}

/// Parses the `--initial` flag: `zeros`, `basis:0101`, `named:GHZ` or
/// `hadamard:2,3`.
pub fn parse_initial(text: &str) -> Result<InitialSpec, CliError> {
    let (kind, arg) = text.split_once(':').unwrap_or((text, ""));
    match kind.trim() {
        "zeros" if arg.is_empty() => Ok(InitialSpec::zeros()),
        "basis" => Ok(InitialSpec::Basis {
            basis: arg.trim().into(),
        }),
        "named" => Ok(InitialSpec::Named {
            named: arg.trim().into(),
        }),
        "hadamard" => Ok(InitialSpec::Hadamard {
            hadamard_on: parse_positions(arg)?,
        }),
        _ => Err(schema(format!("cannot parse initial state `{text}`"))),
    }
}

pub fn parse_positions(text: &str) -> Result<Vec<usize>, CliError> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| schema(format!("bad qubit position `{s}`")))
        })
        .collect()
}

/// Parses `--postselect "2=0,4=1"`.
pub fn parse_postselect(text: &str) -> Result<Vec<(usize, u8)>, CliError> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|item| {
            let (p, b) = item
                .split_once('=')
                .ok_or_else(|| schema(format!("postselection `{item}` must look like position=bit")))?;
            let p = p
                .trim()
                .parse::<usize>()
                .map_err(|_| schema(format!("bad qubit position `{p}`")))?;
            let b = match b.trim() {
                "0" => 0,
                "1" => 1,
                other => return Err(schema(format!("postselected value `{other}` is not a bit"))),
            };
            Ok((p, b))
        })
        .collect()
}

fn gate_matrix(op: &GateOp) -> Result<GateMatrix, Error> {
    let need_k = || {
        op.k.ok_or_else(|| Error::InvalidArgument(format!("gate `{}` needs k", op.gate)))
    };
    let gate = match op.gate.to_ascii_lowercase().as_str() {
        "h" => GateMatrix::hadamard(),
        "x" | "cnot" | "ccnot" => GateMatrix::x(),
        "phase" => GateMatrix::phase(
            op.phi
                .ok_or_else(|| Error::InvalidArgument("gate `phase` needs phi".into()))?,
        ),
        "rk" | "cphase" => GateMatrix::rk(need_k()?),
        other => return Err(Error::InvalidArgument(format!("unknown gate `{other}`"))),
    };
    let controls = match op.gate.to_ascii_lowercase().as_str() {
        "cnot" | "cphase" => Some(1),
        "ccnot" => Some(2),
        _ => None,
    };
    if let Some(c) = controls {
        if op.controls.len() != c {
            return Err(Error::InvalidArgument(format!(
                "gate `{}` needs {c} control(s)",
                op.gate
            )));
        }
    }
    Ok(gate)
}

fn op_mpo(op: &OpSpec, n: usize) -> Result<Mpo, Error> {
    match op {
        OpSpec::Gate(g) => GatePlacement::controlled(g.controls.clone(), gate_matrix(g)?, g.target).to_mpo(n),
        OpSpec::Builtin(b) => builtin_op_mpo(b, n),
    }
}

fn param(params: &Value, key: &str, default: Option<u64>) -> Result<u64, Error> {
    match params.get(key) {
        Some(v) => v
            .as_u64()
            .ok_or_else(|| Error::InvalidArgument(format!("parameter `{key}` must be a non-negative integer"))),
        None => default.ok_or_else(|| Error::InvalidArgument(format!("missing parameter `{key}`"))),
    }
}

// Places an operator on positions offset..offset+len-1 of an n-qubit chain.
fn embed(op: Mpo, offset: usize, n: usize) -> Result<Mpo, Error> {
    let len = op.len();
    if offset == 0 || offset + len - 1 > n {
        return Err(Error::InvalidArgument(format!(
            "a {len}-qubit block at position {offset} does not fit {n} qubits"
        )));
    }
    let mut out = if offset > 1 {
        Mpo::identity(offset - 1)?.kron(&op)
    } else {
        op
    };
    if offset + len - 1 < n {
        out = out.kron(&Mpo::identity(n - (offset + len - 1))?);
    }
    Ok(out)
}

fn builtin_op_mpo(b: &BuiltinOp, n: usize) -> Result<Mpo, Error> {
    let p = &b.params;
    if !(p.is_null() || p.is_object()) {
        return Err(Error::InvalidArgument("params must be an object".into()));
    }
    let offset = param(p, "offset", Some(1))? as usize;
    let op = match b.builtin.as_str() {
        "qfa" => qfa_mpo()?,
        "qfa-network" => qfa_network_mpo(param(p, "count", None)? as usize)?,
        "qft" | "inverse-qft" => {
            let width = param(p, "width", None)? as usize;
            let seq = if b.builtin == "qft" {
                qft_sequence(width)?
            } else {
                inverse_qft_sequence(width)?
            };
            Mpo::product_in_order(seq.groups())?.compress(&TruncationPolicy::default())?
        }
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown builtin `{other}` (expected qfa, qfa-network, qft or inverse-qft)"
            )))
        }
    };
    embed(op, offset, n)
}

/// A builtin selected with `--builtin name[:param]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Builtin {
    Qfa,
    QfaNetwork(usize),
    Simon,
    Qft(usize),
    InverseQft(usize),
    Shor { a: u64, m: u64 },
}

impl Builtin {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut parts = text.split(':');
        let name = parts.next().unwrap_or_default().trim();
        let args: Vec<&str> = parts.collect();
        let num = |i: usize, what: &str| -> Result<u64, CliError> {
            args.get(i)
                .ok_or_else(|| schema(format!("builtin `{name}` needs {what}, e.g. `{name}:4`")))?
                .trim()
                .parse::<u64>()
                .map_err(|_| schema(format!("builtin `{name}`: {what} must be a non-negative integer")))
        };
        let max_args = match name {
            "qfa" | "simon" => 0,
            "shor" => 2,
            _ => 1,
        };
        if args.len() > max_args {
            return Err(schema(format!(
                "builtin `{name}` takes at most {max_args} parameter(s)"
            )));
        }
        let positive = |v: u64, what: &str| {
            if v == 0 {
                Err(schema(format!("builtin `{name}`: {what} must be positive")))
            } else {
                Ok(v as usize)
            }
        };
        Ok(match name {
            "qfa" => Builtin::Qfa,
            "qfa-network" => Builtin::QfaNetwork(positive(num(0, "an adder count")?, "adder count")?),
            "simon" => Builtin::Simon,
            "qft" => Builtin::Qft(positive(num(0, "a qubit count")?, "qubit count")?),
            "inverse-qft" => Builtin::InverseQft(positive(num(0, "a qubit count")?, "qubit count")?),
            "shor" => Builtin::Shor {
                a: num(0, "a base")?,
                m: if args.len() > 1 { num(1, "a modulus")? } else { 15 },
            },
            other => {
                return Err(schema(format!(
                "unknown builtin `{other}` (expected qfa, qfa-network:count, simon, qft:n, inverse-qft:n, shor:a[:M])"
            )))
            }
        })
    }

    /// Builtin with its size parameter replaced, for benchmarks.
    pub fn with_size(&self, size: usize) -> Result<Self, CliError> {
        Ok(match self {
            Builtin::QfaNetwork(_) => Builtin::QfaNetwork(size),
            Builtin::Qft(_) => Builtin::Qft(size),
            Builtin::InverseQft(_) => Builtin::InverseQft(size),
            other => return Err(schema(format!("builtin {other:?} has no size parameter"))),
        })
    }
}

/// Everything needed to run a circuit and read it out.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub label: String,
    pub sequence: GateGroupSequence,
    pub initial: Mps,
    pub policy: TruncationPolicy,
    /// Default measured positions in rendering order.
    pub readout: Vec<usize>,
    pub shor: Option<ShorInstance>,
}

impl Prepared {
    pub fn from_spec(spec: &CircuitSpec, initial_override: Option<&InitialSpec>) -> Result<Self, CliError> {
        let initial = match initial_override {
            Some(init) => build_initial(init, spec.n)?,
            None => spec.initial_state()?,
        };
        Ok(Self {
            label: "circuit".into(),
            sequence: spec.sequence()?,
            initial,
            policy: spec.policy()?,
            readout: (1..=spec.n).collect(),
            shor: None,
        })
    }

    pub fn from_builtin(builtin: &Builtin, initial_override: Option<&InitialSpec>) -> Result<Self, CliError> {
        let policy = TruncationPolicy::default();
        let (label, sequence, default_initial, readout, shor) = match *builtin {
            Builtin::Qfa => {
                let seq = GateGroupSequence::new("qfa", 4, vec![qfa_mpo()?], RegisterLayout::contiguous(4))?;
                ("qfa".to_string(), seq, InitialSpec::zeros(), (1..=4).collect(), None)
            }
            Builtin::QfaNetwork(count) => {
                let n = 3 * count + 1;
                let seq = GateGroupSequence::new(
                    format!("qfa-network:{count}"),
                    n,
                    vec![qfa_network_mpo(count)?],
                    RegisterLayout::contiguous(n),
                )?;
                let init = InitialSpec::Hadamard {
                    hadamard_on: qfa_network_input_positions(count),
                };
                (
                    seq.label().to_string(),
                    seq,
                    init,
                    qfa_network_output_positions(count),
                    None,
                )
            }
            Builtin::Simon => (
                "simon".to_string(),
                simon_sequence()?,
                InitialSpec::zeros(),
                simon_first_register(),
                None,
            ),
            Builtin::Qft(n) => {
                // outputs come out qubit-reversed without SWAPs
                (
                    format!("qft:{n}"),
                    qft_sequence(n)?,
                    InitialSpec::zeros(),
                    (1..=n).rev().collect(),
                    None,
                )
            }
            Builtin::InverseQft(n) => (
                format!("inverse-qft:{n}"),
                inverse_qft_sequence(n)?,
                InitialSpec::zeros(),
                (1..=n).collect(),
                None,
            ),
            Builtin::Shor { a, m } => {
                let inst = ShorInstance::new(a, m).map_err(|e| schema(e.to_string()))?;
                let uf = if m == 15 {
                    shor_uf_mpo(a, m)?
                } else {
                    shor_uf_generic(a, m)?
                };
                let seq = shor_sequence(&inst, uf)?;
                (
                    format!("shor:{a}:{m}"),
                    seq,
                    InitialSpec::zeros(),
                    shor_readout(&inst),
                    Some(inst),
                )
            }
        };
        let n = sequence.n();
        let initial = build_initial(initial_override.unwrap_or(&default_initial), n)?;
        Ok(Self {
            label,
            sequence,
            initial,
            policy,
            readout,
            shor,
        })
    }
}
