//! Born probabilities and generative sampling of MPS wave functions.
//!
//! The probability tensor is `P = diag(conj(Psi)) Psi / Z`. Marginals over a
//! measured set are contracted exactly with branching left environments.
//! Samples are drawn qubit by qubit in ascending position: with all cores
//! but the first right-orthonormal, the part of the network right of the
//! current qubit contracts to the identity, so the conditional
//! probabilities follow from a left environment `Theta` that is updated
//! after every qubit. Unmeasured qubits are summed into `Theta`.

use std::collections::{BTreeMap, HashMap};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::check_dense_cap;
use crate::tensor::{CMatrix, Core, Mps, TruncationPolicy, C64};
use crate::{Error, Result};

/// Conditional probabilities below this are a numerical error rather than
/// rounding noise.
pub const NEGATIVE_TOLERANCE: f64 = 1e-12;
/// Largest probability mass a single conditional may lose to clamping or
/// drift before sampling aborts.
pub const LOST_MASS_TOLERANCE: f64 = 1e-8;
/// Postselections with probability at or below this are rejected.
pub const ZERO_PROBABILITY: f64 = 1e-14;

/// Which qubits to measure, which to fix, how many samples and the seed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasurementPlan {
    n: usize,
    measured: Vec<usize>,
    readout: Vec<usize>,
    postselect: Vec<(usize, u8)>,
    samples: u64,
    seed: u64,
}

impl MeasurementPlan {
    /// `measured` holds distinct 1-based positions; it is sorted, so
    /// sampling always runs left to right along the chain.
    pub fn new(n: usize, measured: &[usize], samples: u64, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyRegister);
        }
        let mut sorted = measured.to_vec();
        sorted.sort_unstable();
        check_positions(&sorted, n)?;
        if sorted.is_empty() {
            return Err(Error::InvalidArgument("no qubits to measure".into()));
        }
        Ok(Self {
            n,
            readout: sorted.clone(),
            measured: sorted,
            postselect: Vec::new(),
            samples,
            seed,
        })
    }

    /// Measures every qubit.
    pub fn all(n: usize, samples: u64, seed: u64) -> Result<Self> {
        Self::new(n, &(1..=n).collect::<Vec<_>>(), samples, seed)
    }

    /// Order in which measured bits are rendered, most significant first.
    /// Must be a permutation of the measured positions.
    pub fn with_readout(mut self, readout: &[usize]) -> Result<Self> {
        let mut sorted = readout.to_vec();
        sorted.sort_unstable();
        if sorted != self.measured {
            return Err(Error::InvalidArgument(format!(
                "readout {readout:?} is not a permutation of the measured qubits {:?}",
                self.measured
            )));
        }
        self.readout = readout.to_vec();
        Ok(self)
    }

    /// Fixes qubits to given bits before sampling; they must not be measured.
    pub fn with_postselect(mut self, assignment: &[(usize, u8)]) -> Result<Self> {
        let mut positions: Vec<usize> = assignment.iter().map(|&(p, _)| p).collect();
        positions.sort_unstable();
        check_positions(&positions, self.n)?;
        if let Some(&(p, _)) = assignment.iter().find(|(p, _)| self.measured.contains(p)) {
            return Err(Error::InvalidArgument(format!(
                "qubit {p} is both postselected and measured"
            )));
        }
        if let Some(&(p, b)) = assignment.iter().find(|(_, b)| *b > 1) {
            return Err(Error::InvalidArgument(format!("qubit {p} fixed to non-bit value {b}")));
        }
        self.postselect = assignment.to_vec();
        self.postselect.sort_unstable();
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn measured(&self) -> &[usize] {
        &self.measured
    }

    pub fn readout(&self) -> &[usize] {
        &self.readout
    }

    pub fn postselect(&self) -> &[(usize, u8)] {
        &self.postselect
    }

    pub fn samples(&self) -> u64 {
        self.samples
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    // measured[readout_index[k]] == readout[k]
    fn readout_index(&self) -> Vec<usize> {
        self.readout
            .iter()
            .map(|p| self.measured.binary_search(p).expect("readout permutes measured"))
            .collect()
    }
}

fn check_positions(sorted: &[usize], n: usize) -> Result<()> {
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            return Err(Error::OverlappingPositions(sorted.to_vec()));
        }
    }
    match sorted.iter().find(|&&p| p == 0 || p > n) {
        Some(&position) => Err(Error::BadPosition { position, n }),
        None => Ok(()),
    }
}

/// Counts of sampled bitstrings and, when available, exact probabilities.
#[derive(Clone, Debug, Serialize)]
pub struct SampleReport {
    pub n: usize,
    /// Measured positions in rendering order.
    pub readout: Vec<usize>,
    pub postselect: Vec<(usize, u8)>,
    pub samples: u64,
    pub seed: u64,
    pub counts: BTreeMap<String, u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probabilities: Option<BTreeMap<String, f64>>,
    /// Wall time; excluded from serialized output so reports stay
    /// byte-stable.
    #[serde(skip)]
    pub elapsed: Duration,
}

impl SampleReport {
    pub fn frequency(&self, bitstring: &str) -> f64 {
        if self.samples == 0 {
            return 0.0;
        }
        self.counts.get(bitstring).copied().unwrap_or(0) as f64 / self.samples as f64
    }

    /// Total-variation distance between the empirical frequencies and the
    /// exact probabilities.
    pub fn total_variation(&self) -> Option<f64> {
        let probs = self.probabilities.as_ref()?;
        let mut keys: Vec<&String> = probs.keys().chain(self.counts.keys()).collect();
        keys.sort();
        keys.dedup();
        let sum: f64 = keys
            .into_iter()
            .map(|k| (self.frequency(k) - probs.get(k).copied().unwrap_or(0.0)).abs())
            .sum();
        Some(0.5 * sum)
    }

    /// CSV with header `bitstring,count,frequency[,probability]`, one row
    /// per bitstring that was drawn or has nonzero exact probability.
    pub fn to_csv(&self) -> Result<String> {
        let ser = |e: csv::Error| Error::Serialization(e.to_string());
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["bitstring", "count", "frequency"];
        if self.probabilities.is_some() {
            header.push("probability");
        }
        w.write_record(&header).map_err(ser)?;
        let mut keys: Vec<&String> = self.counts.keys().collect();
        if let Some(p) = &self.probabilities {
            keys.extend(p.keys());
            keys.sort();
            keys.dedup();
        }
        for key in keys {
            let count = self.counts.get(key).copied().unwrap_or(0);
            let mut row = vec![key.clone(), count.to_string(), self.frequency(key).to_string()];
            if let Some(p) = &self.probabilities {
                row.push(p.get(key).copied().unwrap_or(0.0).to_string());
            }
            w.write_record(&row).map_err(ser)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Serialization(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serialization(e.to_string()))
    }
}

/// Exact marginal distribution of the qubits at `positions` (1-based,
/// distinct, any order). The result has `2^m` entries indexed with
/// `positions[0]` as the most significant bit. Unnormalized states are
/// divided by their squared norm.
pub fn probability_marginal_dense(state: &Mps, positions: &[usize]) -> Result<Vec<f64>> {
    let n = state.len();
    let mut sorted = positions.to_vec();
    sorted.sort_unstable();
    check_positions(&sorted, n)?;
    let m = sorted.len();
    if m >= usize::BITS as usize - 1 {
        return Err(Error::DenseCapExceeded {
            requested: usize::MAX,
            cap: crate::dense_cap(),
        });
    }
    check_dense_cap(1 << m)?;

    let mut is_measured = vec![false; n];
    sorted.iter().for_each(|&p| is_measured[p - 1] = true);
    // branches[k] is the environment for the measured prefix with index k
    let mut branches = vec![CMatrix::from_element(1, 1, C64::new(1.0, 0.0))];
    for (core, &measured) in state.cores().iter().zip(&is_measured) {
        branches = if measured {
            branches
                .iter()
                .flat_map(|env| core.slices().iter().map(move |s| s.adjoint() * env * s))
                .collect()
        } else {
            branches
                .iter()
                .map(|env| {
                    let mut next = CMatrix::zeros(core.right_rank(), core.right_rank());
                    for s in core.slices() {
                        next += s.adjoint() * env * s;
                    }
                    next
                })
                .collect()
        };
    }
    let mut chain: Vec<f64> = branches.iter().map(|env| env[(0, 0)].re).collect();
    let z: f64 = chain.iter().sum();
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::ZeroNorm);
    }
    for p in &mut chain {
        if *p < -NEGATIVE_TOLERANCE * z {
            return Err(Error::NegativeProbability { site: n, value: *p / z });
        }
        *p = p.max(0.0) / z;
    }
    // chain is indexed in ascending position order; permute to the request
    let rank_of: Vec<usize> = positions
        .iter()
        .map(|p| sorted.binary_search(p).expect("position is measured"))
        .collect();
    let mut out = vec![0.0; chain.len()];
    for (x, p) in chain.into_iter().enumerate() {
        let y = rank_of
            .iter()
            .fold(0usize, |acc, &r| (acc << 1) | ((x >> (m - 1 - r)) & 1));
        out[y] = p;
    }
    Ok(out)
}

/// Full probability tensor `P` over all qubits.
pub fn probability_tensor(state: &Mps) -> Result<Vec<f64>> {
    probability_marginal_dense(state, &(1..=state.len()).collect::<Vec<_>>())
}

/// A state conditioned on fixed qubit values.
#[derive(Clone, Debug)]
pub struct Postselected {
    /// Normalized state with the fixed qubits projected; it still has all
    /// `n` qubits, the fixed ones now deterministic.
    pub state: Mps,
    /// Probability of the assignment under the original state.
    pub probability: f64,
}

/// Projects the qubits in `assignment` (1-based position, bit) onto the
/// given values by slicing their cores, then renormalizes.
pub fn postselect(state: &Mps, assignment: &[(usize, u8)]) -> Result<Postselected> {
    let n = state.len();
    let mut positions: Vec<usize> = assignment.iter().map(|&(p, _)| p).collect();
    positions.sort_unstable();
    check_positions(&positions, n)?;
    let z = state.norm();
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::ZeroNorm);
    }
    let mut cores: Vec<Core> = state.cores().to_vec();
    for &(p, bit) in assignment {
        let core = &cores[p - 1];
        if bit as usize >= core.slots() {
            return Err(Error::IndexOutOfRange {
                site: p - 1,
                index: bit as usize,
                dim: core.slots(),
            });
        }
        let slices = core
            .slices()
            .iter()
            .enumerate()
            .map(|(x, s)| {
                if x == bit as usize {
                    s.clone()
                } else {
                    CMatrix::zeros(s.nrows(), s.ncols())
                }
            })
            .collect();
        cores[p - 1] = Core::new(slices)?;
    }
    let projected = Mps::new(cores)?;
    let kept = projected.norm();
    let probability = (kept / z).powi(2);
    if !(probability > ZERO_PROBABILITY) {
        return Err(Error::ZeroProbabilityPostselection(probability));
    }
    Ok(Postselected {
        state: projected.normalize()?,
        probability,
    })
}

// Core slices flattened row-major for the sampling kernel.
struct FlatCore {
    left: usize,
    right: usize,
    slices: [Vec<C64>; 2],
}

impl FlatCore {
    fn new(core: &Core) -> Result<Self> {
        if core.slots() != 2 {
            return Err(Error::DimensionMismatch(format!(
                "sampling needs qubit sites, found local dimension {}",
                core.slots()
            )));
        }
        let flat = |m: &CMatrix| {
            (0..m.nrows())
                .flat_map(|i| (0..m.ncols()).map(move |j| m[(i, j)]))
                .collect::<Vec<_>>()
        };
        Ok(Self {
            left: core.left_rank(),
            right: core.right_rank(),
            slices: [flat(core.slice(0)), flat(core.slice(1))],
        })
    }
}

// out = s^H theta s for an r x r theta and an r x q slice s.
fn theta_step(theta: &[C64], s: &[C64], r: usize, q: usize, tmp: &mut [C64], out: &mut [C64]) {
    for i in 0..r {
        let row = &mut tmp[i * q..(i + 1) * q];
        row.fill(C64::new(0.0, 0.0));
        for a in 0..r {
            let t = theta[i * r + a];
            if t.re == 0.0 && t.im == 0.0 {
                continue;
            }
            for (dst, &v) in row.iter_mut().zip(&s[a * q..(a + 1) * q]) {
                *dst += t * v;
            }
        }
    }
    out[..q * q].fill(C64::new(0.0, 0.0));
    for i in 0..r {
        for c in 0..q {
            let sc = s[i * q + c].conj();
            if sc.re == 0.0 && sc.im == 0.0 {
                continue;
            }
            let dst = &mut out[c * q..(c + 1) * q];
            for (d, &v) in dst.iter_mut().zip(&tmp[i * q..(i + 1) * q]) {
                *d += sc * v;
            }
        }
    }
}

fn trace(m: &[C64], q: usize) -> f64 {
    (0..q).map(|i| m[i * q + i].re).sum()
}

struct Buffers {
    theta: Vec<C64>,
    tmp: Vec<C64>,
    m: [Vec<C64>; 2],
    bits: Vec<u8>,
}

impl Buffers {
    fn new(rmax: usize, measured: usize) -> Self {
        let sq = rmax * rmax;
        Self {
            theta: vec![C64::new(0.0, 0.0); sq],
            tmp: vec![C64::new(0.0, 0.0); sq],
            m: [vec![C64::new(0.0, 0.0); sq], vec![C64::new(0.0, 0.0); sq]],
            bits: Vec::with_capacity(measured),
        }
    }
}

// Draws bit values for the measured sites; right part must be orthonormal
// and the state normalized.
fn draw_one<R: Rng>(cores: &[FlatCore], measured: &[bool], last: usize, rng: &mut R, buf: &mut Buffers) -> Result<()> {
    buf.bits.clear();
    buf.theta[0] = C64::new(1.0, 0.0);
    for (site, core) in cores.iter().enumerate().take(last + 1) {
        let (r, q) = (core.left, core.right);
        for x in 0..2 {
            theta_step(&buf.theta, &core.slices[x], r, q, &mut buf.tmp, &mut buf.m[x]);
        }
        let p = [trace(&buf.m[0], q), trace(&buf.m[1], q)];
        if measured[site] {
            let bit = choose(p, site, rng)?;
            let norm = C64::new(1.0 / p[bit].max(f64::MIN_POSITIVE), 0.0);
            for (t, &v) in buf.theta[..q * q].iter_mut().zip(&buf.m[bit][..q * q]) {
                *t = v * norm;
            }
            buf.bits.push(bit as u8);
        } else {
            check_mass(p[0] + p[1], site)?;
            for ((t, &a), &b) in buf.theta[..q * q]
                .iter_mut()
                .zip(&buf.m[0][..q * q])
                .zip(&buf.m[1][..q * q])
            {
                *t = a + b;
            }
        }
    }
    Ok(())
}

fn check_mass(total: f64, site: usize) -> Result<()> {
    if (total - 1.0).abs() > LOST_MASS_TOLERANCE {
        return Err(Error::Numerical(format!(
            "conditional probabilities at site {site} sum to {total}"
        )));
    }
    Ok(())
}

fn choose<R: Rng>(mut p: [f64; 2], site: usize, rng: &mut R) -> Result<usize> {
    for v in &mut p {
        if *v < -NEGATIVE_TOLERANCE {
            return Err(Error::NegativeProbability { site, value: *v });
        }
        *v = v.max(0.0);
    }
    let total = p[0] + p[1];
    check_mass(total, site)?;
    Ok(usize::from(rng.random::<f64>() * total >= p[0]))
}

/// Seeded generator for sample `index`: one ChaCha8 stream per plan, one
/// substream per sample, so sample `i` does not depend on the sample count.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draws `plan.samples()` bitstrings. The state is right-orthonormalized
/// (losslessly) unless it already is, and normalized.
pub fn sample(state: &Mps, plan: &MeasurementPlan) -> Result<SampleReport> {
    let start = Instant::now();
    if plan.samples() == 0 {
        return Err(Error::InvalidArgument("sampling needs at least one sample".into()));
    }
    let prepared = prepare(state, plan)?;
    let counts = sample_prepared(&prepared, plan)?;
    Ok(SampleReport {
        n: plan.n(),
        readout: plan.readout().to_vec(),
        postselect: plan.postselect().to_vec(),
        samples: plan.samples(),
        seed: plan.seed(),
        counts,
        probabilities: None,
        elapsed: start.elapsed(),
    })
}

/// Samples and, if `exact` is set, attaches the exact marginal. With zero
/// samples only the exact marginal is computed and no generator is created.
pub fn measure(state: &Mps, plan: &MeasurementPlan, exact: bool) -> Result<SampleReport> {
    let start = Instant::now();
    let prepared = prepare(state, plan)?;
    let counts = if plan.samples() > 0 {
        sample_prepared(&prepared, plan)?
    } else {
        BTreeMap::new()
    };
    let probabilities = if exact || plan.samples() == 0 {
        let probs = probability_marginal_dense(&prepared, plan.readout())?;
        let m = plan.readout().len();
        Some(
            probs
                .into_iter()
                .enumerate()
                .filter(|&(_, p)| p > ZERO_PROBABILITY)
                .map(|(x, p)| (crate::dense::bitstring(x, m), p))
                .collect(),
        )
    } else {
        None
    };
    Ok(SampleReport {
        n: plan.n(),
        readout: plan.readout().to_vec(),
        postselect: plan.postselect().to_vec(),
        samples: plan.samples(),
        seed: plan.seed(),
        counts,
        probabilities,
        elapsed: start.elapsed(),
    })
}

fn prepare(state: &Mps, plan: &MeasurementPlan) -> Result<Mps> {
    if state.len() != plan.n() {
        return Err(Error::DimensionMismatch(format!(
            "plan is for {} qubits, state has {}",
            plan.n(),
            state.len()
        )));
    }
    let conditioned = if plan.postselect().is_empty() {
        state.clone()
    } else {
        postselect(state, plan.postselect())?.state
    };
    conditioned
        .ensure_right_orthonormal(&TruncationPolicy::lossless())?
        .normalize()
}

fn sample_prepared(state: &Mps, plan: &MeasurementPlan) -> Result<BTreeMap<String, u64>> {
    let cores = state.cores().iter().map(FlatCore::new).collect::<Result<Vec<_>>>()?;
    let mut measured = vec![false; plan.n()];
    plan.measured().iter().for_each(|&p| measured[p - 1] = true);
    let last = *plan.measured().last().expect("plans measure at least one qubit") - 1;
    let rmax = state.max_rank();
    let order = plan.readout_index();
    let m = plan.measured().len();

    let counts = (0..plan.samples())
        .into_par_iter()
        .map_init(
            || Buffers::new(rmax, m),
            |buf, i| -> Result<Vec<u8>> {
                let mut rng = sample_rng(plan.seed(), i);
                draw_one(&cores, &measured, last, &mut rng, buf)?;
                Ok(order.iter().map(|&k| b'0' + buf.bits[k]).collect())
            },
        )
        .try_fold(HashMap::new, |mut acc: HashMap<Vec<u8>, u64>, bits| {
            *acc.entry(bits?).or_insert(0) += 1;
            Ok::<_, Error>(acc)
        })
        .try_reduce(HashMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            Ok(a)
        })?;
    Ok(counts
        .into_iter()
        .map(|(k, v)| (String::from_utf8(k).expect("bitstrings are ASCII"), v))
        .collect())
}

/// Left environments `Theta` after each site for a fixed prefix assignment
/// (`Some(bit)` contracts with the basis vector, `None` sums the qubit),
/// computed by the iterative update used in sampling but without
/// renormalization.
pub fn left_environments(state: &Mps, prefix: &[Option<u8>]) -> Result<Vec<CMatrix>> {
    if prefix.len() > state.len() {
        return Err(Error::DimensionMismatch("prefix longer than the state".into()));
    }
    let mut theta = CMatrix::from_element(1, 1, C64::new(1.0, 0.0));
    let mut out = Vec::with_capacity(prefix.len());
    for (core, choice) in state.cores().iter().zip(prefix) {
        let flat = FlatCore::new(core)?;
        let (r, q) = (flat.left, flat.right);
        let theta_flat: Vec<C64> = (0..r)
            .flat_map(|i| (0..r).map(move |j| (i, j)))
            .map(|(i, j)| theta[(i, j)])
            .collect();
        let mut tmp = vec![C64::new(0.0, 0.0); r * q];
        let mut acc = vec![C64::new(0.0, 0.0); q * q];
        let mut part = vec![C64::new(0.0, 0.0); q * q];
        for x in 0..2u8 {
            if choice.is_some_and(|b| b != x) {
                continue;
            }
            theta_step(&theta_flat, &flat.slices[x as usize], r, q, &mut tmp, &mut part);
            acc.iter_mut().zip(&part).for_each(|(a, p)| *a += p);
        }
        theta = CMatrix::from_row_slice(q, q, &acc);
        out.push(theta.clone());
    }
    Ok(out)
}

/// Environment of the sites `from..n` (0-based) with every qubit summed.
/// Equals the identity when those cores are right-orthonormal.
pub fn right_environment(state: &Mps, from: usize) -> Result<CMatrix> {
    if from >= state.len() {
        return Err(Error::IndexOutOfRange {
            site: from,
            index: from,
            dim: state.len(),
        });
    }
    let mut env = CMatrix::from_element(1, 1, C64::new(1.0, 0.0));
    for core in state.cores()[from..].iter().rev() {
        let mut next = CMatrix::zeros(core.left_rank(), core.left_rank());
        for s in core.slices() {
            next += s * &env * s.adjoint();
        }
        env = next;
    }
    Ok(env)
}
