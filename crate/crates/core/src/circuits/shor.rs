//! Shor's algorithm as a sequence of MPOs.
//!
//! The register holds `2n` input qubits followed by `n` target qubits with
//! `N = 2^n > M`. The pipeline is a Hadamard layer on the input register,
//! the modular exponentiation oracle `U_f`, and the inverse QFT on the input
//! register. The inverse QFT runs on the mirrored chain without SWAPs, so
//! measured input bitstrings are read in reverse to obtain `y`.

use nalgebra::Matrix2;

use super::qft::inverse_qft_group_mpo;
use super::sequence::{run_gate_sequence, GateGroupSequence, RegisterLayout};
use crate::dense::mod_exp;
use crate::gates::{c0, c1, eye, hadamard_layer, sigma_x};
use crate::sampling::probability_marginal_dense;
use crate::tensor::{Mpo, Mps, TruncationPolicy, C64};
use crate::{Error, Result};

/// Bases with hard-coded closed forms for `M = 15`.
pub const SHOR_BASES_15: [u64; 7] = [2, 4, 7, 8, 11, 13, 14];

/// One modulus/base pair with its register sizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShorInstance {
    pub a: u64,
    pub m: u64,
    /// Target register qubits; the input register has `2 * n`.
    pub n: usize,
}

impl ShorInstance {
    pub fn new(a: u64, m: u64) -> Result<Self> {
        let unsupported = |reason: &str| Error::UnsupportedShor {
            a,
            m,
            reason: reason.into(),
        };
        if m < 3 {
            return Err(unsupported("modulus must be at least 3"));
        }
        if a <= 1 || a >= m {
            return Err(unsupported("base must satisfy 1 < a < M"));
        }
        if gcd(a, m) != 1 {
            return Err(unsupported("base shares a factor with the modulus"));
        }
        let n = (64 - (m - 1).leading_zeros()) as usize;
        if 3 * n > 20 {
            return Err(unsupported("register larger than 20 qubits"));
        }
        Ok(Self { a, m, n })
    }

    pub fn input_qubits(&self) -> usize {
        2 * self.n
    }

    pub fn total_qubits(&self) -> usize {
        3 * self.n
    }

    /// `N^2`, the number of input basis states.
    pub fn input_states(&self) -> u64 {
        1 << self.input_qubits()
    }

    pub fn f(&self, x: u64) -> u64 {
        mod_exp(self.a, x, self.m)
    }
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

// Operators on the last two input qubits and the four target qubits of one
// summand; everything before is identity.
type Term = ([Matrix2<C64>; 2], [Matrix2<C64>; 4]);

fn closed_form_terms(a: u64) -> Option<Vec<Term>> {
    let (i, x, p0, p1) = (eye(), sigma_x(), c0(), c1());
    let t = |ctrl: [Matrix2<C64>; 2], tgt: [Matrix2<C64>; 4]| (ctrl, tgt);
    let terms = match a {
        2 => vec![
            t([p0, p0], [i, i, i, x]),
            t([p0, p1], [i, i, x, i]),
            t([p1, p0], [i, x, i, i]),
            t([p1, p1], [x, i, i, i]),
        ],
        4 => vec![t([i, p0], [i, i, i, x]), t([i, p1], [i, x, i, i])],
        7 => vec![
            t([p0, p0], [i, i, i, x]),
            t([p0, p1], [i, x, x, x]),
            t([p1, p0], [i, x, i, i]),
            t([p1, p1], [x, x, i, x]),
        ],
        8 => vec![
            t([p0, p0], [i, i, i, x]),
            t([p0, p1], [x, i, i, i]),
            t([p1, p0], [i, x, i, i]),
            t([p1, p1], [i, i, x, i]),
        ],
        11 => vec![t([i, p0], [i, i, i, x]), t([i, p1], [x, i, x, x])],
        13 => vec![
            t([p0, p0], [i, i, i, x]),
            t([p0, p1], [x, x, i, x]),
            t([p1, p0], [i, x, i, i]),
            t([p1, p1], [i, x, x, x]),
        ],
        14 => vec![t([i, p0], [i, i, i, x]), t([i, p1], [x, x, x, i])],
        _ => return None,
    };
    Some(terms)
}

/// Uncompressed sum of the rank-one summands of the closed form for
/// `M = 15`.
pub fn shor_uf_closed_form(a: u64) -> Result<Mpo> {
    let terms = closed_form_terms(a).ok_or_else(|| Error::UnsupportedShor {
        a,
        m: 15,
        reason: "no closed form for this base".into(),
    })?;
    let mut sum: Option<Mpo> = None;
    for (ctrl, tgt) in terms {
        let mut ops = vec![eye(); 6];
        ops.extend(ctrl);
        ops.extend(tgt);
        let term = Mpo::from_local_operators(&ops)?;
        sum = Some(match sum {
            None => term,
            Some(s) => s.add(&term)?,
        });
    }
    Ok(sum.expect("every closed form has at least one summand"))
}

/// `U_f` for `M = 15`, compressed to minimal ranks (4 for
/// `a in {2, 7, 8, 13}`, 2 for `a in {4, 11, 14}`).
pub fn shor_uf_mpo(a: u64, m: u64) -> Result<Mpo> {
    if m != 15 {
        return Err(Error::UnsupportedShor {
            a,
            m,
            reason: "closed forms exist only for M = 15; use shor_uf_generic".into(),
        });
    }
    ShorInstance::new(a, m)?;
    shor_uf_closed_form(a)?.compress(&TruncationPolicy::default())
}

/// `U_f = sum_z diag(1[f(x) = z]) ⊗ sigma_x^{z_1} ⊗ ... ⊗ sigma_x^{z_n}`
/// for any supported `(a, M)`, with each indicator assembled as a
/// compressed sum of basis states. `U_f` acts as `|x, 0> -> |x, f(x)>`.
pub fn shor_uf_generic(a: u64, m: u64) -> Result<Mpo> {
    let inst = ShorInstance::new(a, m)?;
    let policy = TruncationPolicy::default();
    let n_in = inst.input_qubits();
    let mut by_value: std::collections::BTreeMap<u64, Mps> = Default::default();
    for x in 0..inst.input_states() {
        let basis = Mps::from_index(x, n_in)?;
        let z = inst.f(x);
        let next = match by_value.remove(&z) {
            None => basis,
            Some(acc) => acc.add(&basis)?.compress(&policy)?,
        };
        by_value.insert(z, next);
    }
    let mut total: Option<Mpo> = None;
    for (z, indicator) in by_value {
        let flips: Vec<Matrix2<C64>> = (0..inst.n)
            .map(|k| {
                if (z >> (inst.n - 1 - k)) & 1 == 1 {
                    sigma_x()
                } else {
                    eye()
                }
            })
            .collect();
        let term = Mpo::diag(&indicator).kron(&Mpo::from_local_operators(&flips)?);
        total = Some(match total {
            None => term,
            Some(t) => t.add(&term)?.compress(&policy)?,
        });
    }
    total.expect("f takes at least one value").compress(&policy)
}

/// Hadamards, `U_f`, then the mirrored inverse QFT on the input register.
pub fn shor_sequence(inst: &ShorInstance, uf: Mpo) -> Result<GateGroupSequence> {
    let n_in = inst.input_qubits();
    let total = inst.total_qubits();
    let layout = RegisterLayout::new(
        total,
        vec![
            ("input".into(), (1..=n_in).collect()),
            ("target".into(), (n_in + 1..=total).collect()),
        ],
    )?;
    let input: Vec<usize> = (1..=n_in).collect();
    let mut groups = vec![hadamard_layer(&input, total)?, uf];
    let idle = Mpo::identity(inst.n)?;
    for i in (1..=n_in).rev() {
        groups.push(inverse_qft_group_mpo(i, n_in)?.reversed().kron(&idle));
    }
    GateGroupSequence::new(format!("shor(a={}, M={})", inst.a, inst.m), total, groups, layout)
}

/// Continued-fraction estimate of the period from one measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct PeriodEstimate {
    pub y: u64,
    /// Denominator of the last convergent of `y / N^2` below `M`.
    pub q: u64,
    /// Whether `a^q = 1 (mod M)`.
    pub verified: bool,
    /// `(gcd(a^{q/2} - 1, M), gcd(a^{q/2} + 1, M))` for even `q` with
    /// `a^{q/2} != -1 (mod M)`; `None` marks a failed run.
    pub factors: Option<(u64, u64)>,
}

/// Classical post-processing of a measured `y`.
pub fn extract_period(y: u64, n_sq: u64, a: u64, m: u64) -> Result<PeriodEstimate> {
    if n_sq == 0 || y >= n_sq {
        return Err(Error::InvalidArgument(format!("measurement {y} outside [0, {n_sq})")));
    }
    if m < 2 {
        return Err(Error::InvalidArgument("modulus must be at least 2".into()));
    }
    let q = convergent_denominator(y, n_sq, m);
    let verified = mod_exp(a, q, m) == 1 % m;
    let factors = if y != 0 && q % 2 == 0 {
        let half = mod_exp(a, q / 2, m);
        (half != m - 1).then(|| (gcd((half + m - 1) % m, m), gcd((half + 1) % m, m)))
    } else {
        None
    };
    Ok(PeriodEstimate {
        y,
        q,
        verified,
        factors,
    })
}

// Walks the continued fraction of num/den and keeps the last convergent
// denominator below `bound`.
fn convergent_denominator(num: u64, den: u64, bound: u64) -> u64 {
    let (mut p, mut q) = (num as u128, den as u128);
    let (mut q_prev, mut q_cur) = (1u128, 0u128);
    let mut best = 1u128;
    loop {
        let t = p / q;
        let q_next = t * q_cur + q_prev;
        if q_next >= bound as u128 {
            break;
        }
        best = q_next;
        (q_prev, q_cur) = (q_cur, q_next);
        let r = p - t * q;
        if r == 0 {
            break;
        }
        (p, q) = (q, r);
    }
    best as u64
}

/// Exact outcome of one Shor run.
#[derive(Clone, Debug)]
pub struct ShorOutcome {
    pub instance: ShorInstance,
    /// `(y, probability)` over the support, ascending in `y`.
    pub distribution: Vec<(u64, f64)>,
    pub final_ranks: Vec<usize>,
    pub rank_trajectory: Vec<usize>,
    pub estimates: Vec<PeriodEstimate>,
}

impl ShorOutcome {
    pub fn support(&self) -> Vec<u64> {
        self.distribution.iter().map(|&(y, _)| y).collect()
    }

    pub fn final_max_rank(&self) -> usize {
        self.final_ranks.iter().copied().max().unwrap_or(1)
    }
}

/// Positions of the input register listed in reversed-read order, so that
/// a bitstring rendered in this order is `y` most significant bit first.
pub fn shor_readout(inst: &ShorInstance) -> Vec<usize> {
    (1..=inst.input_qubits()).rev().collect()
}

/// Runs the pipeline and returns the exact input-register distribution.
/// Uses the closed form for `M = 15` and the generic oracle otherwise.
pub fn shor_run(a: u64, m: u64, policy: &TruncationPolicy) -> Result<ShorOutcome> {
    let inst = ShorInstance::new(a, m)?;
    let uf = if m == 15 {
        shor_uf_mpo(a, m)?
    } else {
        shor_uf_generic(a, m)?
    };
    let seq = shor_sequence(&inst, uf)?;
    let run = run_gate_sequence(&seq, &Mps::zeros(inst.total_qubits())?, policy)?;
    let readout = shor_readout(&inst);
    let probs = probability_marginal_dense(&run.state, &readout)?;
    let distribution: Vec<(u64, f64)> = probs
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 1e-12)
        .map(|(y, &p)| (y as u64, p))
        .collect();
    let estimates = distribution
        .iter()
        .map(|&(y, _)| extract_period(y, inst.input_states(), a, m))
        .collect::<Result<Vec<_>>>()?;
    Ok(ShorOutcome {
        instance: inst,
        final_ranks: run.state.ranks(),
        rank_trajectory: run.max_ranks(),
        distribution,
        estimates,
    })
}
