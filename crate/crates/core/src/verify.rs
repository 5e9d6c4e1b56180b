//! Golden-value suite: Shor's outcomes for `M = 15`, Simon's support, the
//! full-adder truth table and QFT amplitudes.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::circuits::{
    extract_period, hidden_string_candidates, qfa_mpo, qft_group_mpo, run_gate_sequence, shor_run,
    simon_first_register, simon_gate_groups, simon_sequence, GateGroupSequence, RegisterLayout, SHOR_BASES_15,
    SIMON_HIDDEN, SIMON_QUBITS,
};
use crate::dense::{born_distribution_dense, full_adder_truth, marginal, shor_distribution_dense, DenseState};
use crate::sampling::probability_marginal_dense;
use crate::tensor::{Mpo, Mps, TruncationPolicy, C64};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Check {
    Shor,
    Simon,
    Qfa,
    Qft,
}

impl Check {
    pub const ALL: [Check; 4] = [Check::Shor, Check::Simon, Check::Qfa, Check::Qft];

    pub fn name(self) -> &'static str {
        match self {
            Check::Shor => "shor",
            Check::Simon => "simon",
            Check::Qfa => "qfa",
            Check::Qft => "qft",
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Check {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Check::ALL
            .into_iter()
            .find(|c| c.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidArgument(format!("unknown check `{s}` (expected shor, simon, qfa or qft)")))
    }
}

/// Builder for QFT group `G_i` on `n` qubits.
pub type GroupBuilder = fn(usize, usize) -> Result<Mpo>;

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub checks: Vec<Check>,
    /// Also compare against the dense statevector oracle.
    pub oracle: bool,
    pub qft_group: GroupBuilder,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            checks: Check::ALL.to_vec(),
            oracle: false,
            qft_group: qft_group_mpo,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub check: Check,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct VerifyReport {
    pub outcomes: Vec<CheckOutcome>,
    pub warnings: Vec<String>,
}

impl VerifyReport {
    /// True when no selected check failed; an empty selection passes.
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }
}

pub fn run_verify(options: &VerifyOptions) -> VerifyReport {
    let mut report = VerifyReport::default();
    let selected: BTreeSet<Check> = options.checks.iter().copied().collect();
    if selected.is_empty() {
        report.warnings.push("no checks selected; nothing was verified".into());
    }
    for check in selected {
        let result = match check {
            Check::Shor => check_shor(options.oracle),
            Check::Simon => check_simon(options.oracle),
            Check::Qfa => check_qfa(options.oracle),
            Check::Qft => check_qft(options.qft_group, options.oracle),
        };
        let (passed, detail) = match result {
            Ok(Ok(detail)) => (true, detail),
            Ok(Err(reason)) => (false, reason),
            Err(e) => (false, format!("error: {e}")),
        };
        report.outcomes.push(CheckOutcome { check, passed, detail });
    }
    report
}

// Outer error: the check could not run. Inner error: it ran and failed.
type CheckResult = Result<std::result::Result<String, String>>;

/// Rows `(y, q, factors)` for `a in {7, 13}`.
pub const SHOR_15_ROWS: [(u64, u64, Option<(u64, u64)>); 4] = [
    (0, 1, None),
    (64, 4, Some((3, 5))),
    (128, 2, Some((3, 1))),
    (192, 4, Some((3, 5))),
];

fn check_shor(oracle: bool) -> CheckResult {
    let policy = TruncationPolicy::default();
    for a in SHOR_BASES_15 {
        let out = shor_run(a, 15, &policy)?;
        let (support, rank): (Vec<u64>, usize) = if [4, 11, 14].contains(&a) {
            (vec![0, 128], 2)
        } else {
            (vec![0, 64, 128, 192], 4)
        };
        if out.support() != support {
            return Ok(Err(format!("a={a}: support {:?}, expected {support:?}", out.support())));
        }
        if out.final_max_rank() != rank {
            return Ok(Err(format!(
                "a={a}: final rank {}, expected {rank}",
                out.final_max_rank()
            )));
        }
        for (e, row) in out
            .estimates
            .iter()
            .zip(SHOR_15_ROWS.iter().filter(|r| support.contains(&r.0)))
        {
            if (e.y, e.q) != (row.0, row.1) {
                return Ok(Err(format!("a={a}: y={} gives q={}, expected {}", e.y, e.q, row.1)));
            }
            if [7, 13].contains(&a) && e.factors != row.2 {
                return Ok(Err(format!(
                    "a={a}: y={} factors {:?}, expected {:?}",
                    e.y, e.factors, row.2
                )));
            }
        }
        if oracle {
            let dense = shor_distribution_dense(a, 15, 8, 4)?;
            let mut got = vec![0.0; dense.len()];
            out.distribution.iter().for_each(|&(y, p)| got[y as usize] = p);
            let err = got.iter().zip(&dense).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            if err > 1e-10 {
                return Ok(Err(format!(
                    "a={a}: distribution differs from the dense oracle by {err:e}"
                )));
            }
        }
    }
    let e = extract_period(0, 256, 7, 15)?;
    if e.factors.is_some() {
        return Ok(Err("y=0 must not yield factors".into()));
    }
    Ok(Ok("supports, ranks and (y, q) rows match for all seven bases".into()))
}

fn check_simon(oracle: bool) -> CheckResult {
    let run = run_gate_sequence(
        &simon_sequence()?,
        &Mps::zeros(SIMON_QUBITS)?,
        &TruncationPolicy::default(),
    )?;
    let first = simon_first_register();
    let probs = probability_marginal_dense(&run.state, &first)?;
    let support: Vec<u64> = (0..probs.len() as u64).filter(|&z| probs[z as usize] > 1e-12).collect();
    let expected: Vec<u64> = vec![0b0000, 0b0001, 0b0100, 0b0101, 0b1010, 0b1011, 0b1110, 0b1111];
    if support != expected {
        return Ok(Err(format!("support {support:?}, expected {expected:?}")));
    }
    if let Some(&p) = support
        .iter()
        .map(|&z| &probs[z as usize])
        .find(|p| (*p - 0.125).abs() > 1e-12)
    {
        return Ok(Err(format!("probability {p} on the support, expected 0.125")));
    }
    if hidden_string_candidates(&support, 4) != vec![SIMON_HIDDEN] {
        return Ok(Err("hidden string is not uniquely 1010".into()));
    }
    if oracle {
        let mut dense = DenseState::basis(SIMON_QUBITS, 0)?;
        for group in simon_gate_groups() {
            dense.apply_all(&group)?;
        }
        let want = marginal(&born_distribution_dense(dense.amplitudes())?, SIMON_QUBITS, &first);
        let err = probs.iter().zip(&want).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        if err > 1e-12 {
            return Ok(Err(format!("marginal differs from the dense oracle by {err:e}")));
        }
    }
    Ok(Ok("first-register marginal is uniform on L, b = 1010".into()))
}

fn check_qfa(oracle: bool) -> CheckResult {
    let g = qfa_mpo()?;
    for input in 0..16u8 {
        let bits = [input >> 3, (input >> 2) & 1, (input >> 1) & 1, input & 1];
        let (s, c_out) = full_adder_truth(bits[0], bits[1], bits[2]);
        let want = [s, bits[1], bits[2], c_out ^ bits[3]];
        let out = g.apply(&Mps::from_basis_state(&bits)?)?;
        let idx: Vec<usize> = want.iter().map(|&b| b as usize).collect();
        let err = (out.element(&idx)? - C64::new(1.0, 0.0)).norm();
        if err > 1e-12 || (out.norm() - 1.0).abs() > 1e-12 {
            return Ok(Err(format!(
                "input {input:04b}: output is not |{s}{}{}{}>",
                want[1], want[2], want[3]
            )));
        }
        if oracle {
            let mut dense = DenseState::basis(4, input as usize)?;
            dense.apply_all(&crate::circuits::qfa_gates())?;
            let amps = out.to_dense()?;
            let err = amps
                .iter()
                .zip(dense.amplitudes())
                .map(|(x, y)| (x - y).norm())
                .fold(0.0, f64::max);
            if err > 1e-12 {
                return Ok(Err(format!(
                    "input {input:04b}: differs from the dense oracle by {err:e}"
                )));
            }
        }
    }
    Ok(Ok("all 16 basis inputs give the classical sum and carry".into()))
}

/// `G_n ... G_1 |x>` in the qubit-reversed output order.
pub fn qft_reference_amplitude(x: u64, y: u64, n: usize) -> C64 {
    let dim = 1u64 << n;
    let k = (crate::circuits::reverse_bits(y, n) * x) % dim;
    C64::from_polar(
        1.0 / (dim as f64).sqrt(),
        2.0 * std::f64::consts::PI * k as f64 / dim as f64,
    )
}

fn check_qft(builder: GroupBuilder, oracle: bool) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(0x9f7);
    let policy = TruncationPolicy::default();
    for n in [3usize, 5, 8] {
        let groups = (1..=n).map(|i| builder(i, n)).collect::<Result<Vec<_>>>()?;
        let seq = GateGroupSequence::new(format!("qft({n})"), n, groups, RegisterLayout::contiguous(n))?;
        for _ in 0..10 {
            let x = rng.random_range(0..1u64 << n);
            let run = run_gate_sequence(&seq, &Mps::from_index(x, n)?, &policy)?;
            if run.max_ranks().iter().any(|&r| r > 2) || run.state.max_rank() != 1 {
                return Ok(Err(format!(
                    "n={n}, x={x}: ranks {:?} exceed the bound",
                    run.max_ranks()
                )));
            }
            let amps = run.state.to_dense()?;
            let err = amps
                .iter()
                .enumerate()
                .map(|(y, a)| (a - qft_reference_amplitude(x, y as u64, n)).norm())
                .fold(0.0, f64::max);
            if err > 1e-10 {
                return Ok(Err(format!("n={n}, x={x}: amplitudes off by {err:e}")));
            }
            if oracle {
                let mut dense = DenseState::basis(n, x as usize)?;
                for i in 1..=n {
                    dense.apply_all(&crate::circuits::qft_group_gates(i, n)?)?;
                }
                let err = amps
                    .iter()
                    .zip(dense.amplitudes())
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max);
                if err > 1e-10 {
                    return Ok(Err(format!("n={n}, x={x}: differs from the dense oracle by {err:e}")));
                }
            }
        }
    }
    Ok(Ok("30 basis states match the reversed DFT with ranks <= 2".into()))
}
