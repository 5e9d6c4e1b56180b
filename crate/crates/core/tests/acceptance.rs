//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so every line is printed. The process
//! fails if a criterion fails unexpectedly or if a criterion listed in
//! `KNOWN_GAPS` starts passing (the list must then be updated).

mod common;

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use mpoq::circuits::{
    extract_period, hidden_string_candidates, inverse_qft_group_gates, inverse_qft_group_mpo, inverse_qft_sequence,
    qfa_gates, qfa_mpo, qfa_network_input_positions, qfa_network_mpo, qfa_network_output_positions, qfa_product_mpo,
    qft_group_gates, qft_group_mpo, qft_sequence, reverse_bits, run_gate_sequence, shor_run, shor_uf_mpo,
    simon_circuit_mpo, simon_first_register, simon_gate_groups, simon_sequence, SHOR_BASES_15, SIMON_QUBITS,
};
use mpoq::dense::{circuit_matrix, full_adder_truth, shor_distribution_dense};
use mpoq::sampling::{probability_marginal_dense, sample, MeasurementPlan};
use mpoq::{Mpo, Mps, TruncationPolicy, C64};
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria that cannot be met as stated, with the reason.
const KNOWN_GAPS: [(usize, &str); 1] = [(
    6,
    "the reference factor column is not reproducible by any gcd rule: a^(q/2) mod 15 \
     gives (1,3) for a in {2,8}, (3,5) for a=4, (5,3) for a=11 and no factors for a=14 at y=128",
)];

struct Failure {
    detail: String,
    /// Only the known gap was hit; everything else in the criterion held.
    known: bool,
}

type Outcome = Result<String, Failure>;

fn fail(detail: impl Into<String>) -> Failure {
    Failure {
        detail: detail.into(),
        known: false,
    }
}

fn check(ok: bool, detail: impl FnOnce() -> String) -> Result<(), Failure> {
    if ok {
        Ok(())
    } else {
        Err(fail(detail()))
    }
}

fn lift<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, Failure> {
    r.map_err(|e| fail(e.to_string()))
}

fn max_dev(a: impl IntoIterator<Item = C64>, b: impl IntoIterator<Item = C64>) -> f64 {
    a.into_iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let g = lift(qfa_mpo())?;
    for input in 0..8u8 {
        let (c_in, a, b) = (input >> 2 & 1, input >> 1 & 1, input & 1);
        let out = lift(g.apply(&lift(Mps::from_basis_state(&[c_in, a, b, 0]))?))?;
        let (s, c_out) = full_adder_truth(c_in, a, b);
        let want = usize::from(s) << 3 | usize::from(a) << 2 | usize::from(b) << 1 | usize::from(c_out);
        let amps = lift(out.to_dense())?;
        let err = max_dev(
            amps.iter().copied(),
            (0..16).map(|x| C64::new(if x == want { 1.0 } else { 0.0 }, 0.0)),
        );
        check(err <= 1e-12, || {
            format!("|{c_in}{a}{b}0> maps off |{want:04b}> by {err:e}")
        })?;
        if a == 0 && b == 0 {
            check(want == usize::from(c_in) << 3, || {
                format!("|{c_in}000> is not a fixed point")
            })?;
        }
    }
    // the ancilla-one half of the truth table: the carry bit is flipped
    for input in 0..8u8 {
        let (c_in, a, b) = (input >> 2 & 1, input >> 1 & 1, input & 1);
        let out = lift(g.apply(&lift(Mps::from_basis_state(&[c_in, a, b, 1]))?))?;
        let (s, c_out) = full_adder_truth(c_in, a, b);
        let want = usize::from(s) << 3 | usize::from(a) << 2 | usize::from(b) << 1 | usize::from(c_out ^ 1);
        let err = (lift(out.element(&common::bits(want, 4)))? - C64::new(1.0, 0.0)).norm();
        check(err <= 1e-12, || {
            format!("|{c_in}{a}{b}1> maps off |{want:04b}> by {err:e}")
        })?;
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "16 inputs match the classical adder, |C_in,0,0,0> fixed, {elapsed:.1?}"
    ))
}

fn dense_gap(mpo: &Mpo, reference: &mpoq::tensor::CMatrix) -> Result<f64, Failure> {
    let dense = lift(mpo.to_dense())?;
    Ok(max_dev(dense.iter().copied(), reference.iter().copied()))
}

fn criterion_2() -> Outcome {
    let qfa = lift(qfa_mpo())?;
    let reference = lift(circuit_matrix(&qfa_gates(), 4))?;
    let err = dense_gap(&qfa, &reference)?;
    check(err <= 1e-12, || format!("QFA closed form vs gates: {err:e}"))?;
    let err = dense_gap(&lift(qfa_product_mpo())?, &reference)?;
    check(err <= 1e-12, || format!("QFA gate-product MPO vs gates: {err:e}"))?;
    let simon: Vec<_> = simon_gate_groups().into_iter().flatten().collect();
    let err = dense_gap(
        &lift(simon_circuit_mpo())?,
        &lift(circuit_matrix(&simon, SIMON_QUBITS))?,
    )?;
    check(err <= 1e-12, || format!("Simon closed form vs G4G3G2G1: {err:e}"))?;
    let mut groups = 0;
    for n in 1..=6 {
        for i in 1..=n {
            let err = dense_gap(
                &lift(qft_group_mpo(i, n))?,
                &lift(circuit_matrix(&lift(qft_group_gates(i, n))?, n))?,
            )?;
            check(err <= 1e-12, || format!("QFT group {i} of {n}: {err:e}"))?;
            let err = dense_gap(
                &lift(inverse_qft_group_mpo(i, n))?,
                &lift(circuit_matrix(&lift(inverse_qft_group_gates(i, n))?, n))?,
            )?;
            check(err <= 1e-12, || format!("inverse QFT group {i} of {n}: {err:e}"))?;
            groups += 2;
        }
    }
    Ok(format!(
        "QFA, Simon and {groups} QFT groups (n <= 6) equal their gate products within 1e-12"
    ))
}

fn criterion_3() -> Outcome {
    let policy = TruncationPolicy::default();
    let qfa = lift(qfa_mpo().and_then(|g| g.compress(&policy)))?;
    check(qfa.ranks() == [1, 3, 4, 2, 1], || {
        format!("QFA bond profile {:?}", qfa.ranks())
    })?;
    let simon = lift(simon_circuit_mpo().and_then(|g| g.compress(&policy)))?;
    check(simon.max_rank() == 4, || format!("Simon max rank {}", simon.max_rank()))?;
    for n in 2..=10 {
        for i in 1..=n {
            let g = lift(qft_group_mpo(i, n).and_then(|g| g.compress(&policy)))?;
            let want = if i < n { 2 } else { 1 };
            check(g.max_rank() == want, || {
                format!("QFT group {i} of {n} has rank {}", g.max_rank())
            })?;
        }
    }
    let mut oracle_ranks = Vec::new();
    for a in SHOR_BASES_15 {
        let want = if [4, 11, 14].contains(&a) { 2 } else { 4 };
        let out = lift(shor_run(a, 15, &policy))?;
        check(out.final_max_rank() == want, || {
            format!("Shor a={a}: final state rank {}", out.final_max_rank())
        })?;
        oracle_ranks.push(format!("{a}:{}", lift(shor_uf_mpo(a, 15))?.max_rank()));
    }
    Ok(format!(
        "QFA 3,4,2; Simon 4; QFT groups 2 (last 1); Shor final states 4/2; U_f ranks {}",
        oracle_ranks.join(" ")
    ))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let run = lift(run_gate_sequence(
        &lift(simon_sequence())?,
        &lift(Mps::zeros(SIMON_QUBITS))?,
        &TruncationPolicy::default(),
    ))?;
    let first = simon_first_register();
    let probs = lift(probability_marginal_dense(&run.state, &first))?;
    let support: [usize; 8] = [0b0000, 0b0001, 0b0100, 0b0101, 0b1010, 0b1011, 0b1110, 0b1111];
    for (z, p) in probs.iter().enumerate() {
        let want = if support.contains(&z) { 0.125 } else { 0.0 };
        check((p - want).abs() <= 1e-12, || format!("P({z:04b}) = {p}"))?;
    }
    let samples = 100_000u64;
    let plan = lift(MeasurementPlan::new(SIMON_QUBITS, &first, samples, 2024))?;
    let report = lift(sample(&run.state, &plan))?;
    let sigma = (0.125f64 * 0.875 / samples as f64).sqrt();
    let mut observed = Vec::new();
    for (key, &count) in &report.counts {
        let z = lift(u64::from_str_radix(key, 2))?;
        check(support.contains(&(z as usize)), || {
            format!("sampled {key} outside the support")
        })?;
        let freq = count as f64 / samples as f64;
        check((freq - 0.125).abs() <= 4.0 * sigma, || {
            format!("{key}: frequency {freq} beyond 4 sigma")
        })?;
        observed.push(z);
    }
    check(observed.len() == 8, || {
        format!("only {} support strings drawn", observed.len())
    })?;
    let candidates = hidden_string_candidates(&observed, 4);
    check(candidates == [0b1010], || {
        format!("hidden string candidates {candidates:?}")
    })?;
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "marginal 1/8 on L, 1e5 samples within 4 sigma, b = 1010, {elapsed:.1?}"
    ))
}

fn criterion_5() -> Outcome {
    let policy = TruncationPolicy::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for n in [4usize, 8, 10] {
        let forward = lift(qft_sequence(n))?;
        let backward = lift(inverse_qft_sequence(n))?;
        let dim = 1u64 << n;
        for _ in 0..50 {
            let x = rng.random_range(0..dim);
            let input = lift(Mps::from_index(x, n))?;
            let run = lift(run_gate_sequence(&forward, &input, &policy))?;
            let peak = run.max_ranks().into_iter().max().unwrap_or(1);
            check(peak <= 2, || format!("n={n}, x={x}: intermediate rank {peak}"))?;
            check(run.state.max_rank() == 1, || {
                format!("n={n}, x={x}: final rank {}", run.state.max_rank())
            })?;
            let amps = lift(run.state.to_dense())?;
            let scale = 1.0 / (dim as f64).sqrt();
            // the output register is read qubit-reversed
            let want = (0..dim).map(|z| {
                let y = reverse_bits(z, n);
                let angle = 2.0 * std::f64::consts::PI * ((x * y) % dim) as f64 / dim as f64;
                C64::from_polar(scale, angle)
            });
            let err = max_dev(amps.iter().copied(), want);
            check(err <= 1e-10, || format!("n={n}, x={x}: amplitude error {err:e}"))?;
            worst = worst.max(err);
            let back = lift(run_gate_sequence(&backward, &run.state, &policy))?;
            let amps = lift(back.state.to_dense())?;
            let err = max_dev(
                amps.iter().copied(),
                (0..dim).map(|z| C64::new(if z == x { 1.0 } else { 0.0 }, 0.0)),
            );
            check(err <= 1e-10, || format!("n={n}, x={x}: round trip error {err:e}"))?;
        }
    }
    Ok(format!(
        "150 basis states, ranks <= 2, final rank 1, max amplitude error {worst:.1e}"
    ))
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let policy = TruncationPolicy::default();
    type Row = (u64, u64, Option<(u64, u64)>);
    let rank_four: [Row; 4] = [
        (0, 1, None),
        (64, 4, Some((3, 5))),
        (128, 2, Some((3, 1))),
        (192, 4, Some((3, 5))),
    ];
    let rank_two: [Row; 2] = [(0, 1, None), (128, 2, Some((3, 1)))];
    let mut factor_gaps = Vec::new();
    for a in SHOR_BASES_15 {
        let rows: &[Row] = if [4, 11, 14].contains(&a) {
            &rank_two
        } else {
            &rank_four
        };
        let out = lift(shor_run(a, 15, &policy))?;
        let support: Vec<u64> = rows.iter().map(|r| r.0).collect();
        check(out.support() == support, || {
            format!("a={a}: support {:?}", out.support())
        })?;
        let dense = lift(shor_distribution_dense(a, 15, 8, 4))?;
        let mass: f64 = support.iter().map(|&y| dense[y as usize]).sum();
        check((mass - 1.0).abs() <= 1e-10, || {
            format!("a={a}: oracle support mass {mass}")
        })?;
        for &(y, p) in &out.distribution {
            let err = (p - dense[y as usize]).abs();
            check(err <= 1e-10, || {
                format!("a={a}, y={y}: probability off the oracle by {err:e}")
            })?;
        }
        for &(y, q, factors) in rows {
            let e = lift(extract_period(y, 256, a, 15))?;
            check(e.q == q, || format!("a={a}, y={y}: q = {}, table {q}", e.q))?;
            if y == 0 {
                check(e.factors.is_none(), || format!("a={a}: y=0 returned factors"))?;
            }
            if e.factors != factors {
                factor_gaps.push(format!("a={a} y={y} {:?}", e.factors));
            }
        }
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    if factor_gaps.is_empty() {
        Ok(format!(
            "supports, q, factors and oracle probabilities match for all bases, {elapsed:.1?}"
        ))
    } else {
        Err(Failure {
            detail: format!(
                "supports, q and oracle probabilities match ({elapsed:.1?}); factor column differs: {}",
                factor_gaps.join(", ")
            ),
            known: true,
        })
    }
}

fn criterion_7() -> Outcome {
    let cases = 256;
    for (name, property) in common::PROPERTIES {
        let mut runner = TestRunner::new(Config {
            cases,
            failure_persistence: None,
            ..Config::default()
        });
        let strategy = (proptest::num::u64::ANY, 1usize..=6, 1usize..=4);
        runner
            .run(&strategy, |(seed, n, rank)| {
                property(seed, n, rank).map_err(TestCaseError::fail)
            })
            .map_err(|e| fail(format!("{name}: {e}")))?;
    }
    Ok(format!("{} properties x {cases} cases", common::PROPERTIES.len()))
}

fn criterion_8() -> Outcome {
    let n = 6;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let state = lift(Mps::random(&vec![2; n], 4, &mut rng).and_then(|s| s.normalize()))?;
    check(state.max_rank() <= 4, || "rank above 4".into())?;
    let amps = common::state_by_elements(&state);
    let total: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    let samples = 100_000u64;
    let plan = lift(MeasurementPlan::all(n, samples, 77))?;
    let report = lift(sample(&state, &plan))?;
    let tv = 0.5
        * (0..1usize << n)
            .map(|x| {
                let key = mpoq::dense::bitstring(x, n);
                let freq = report.counts.get(&key).copied().unwrap_or(0) as f64 / samples as f64;
                (freq - amps[x].norm_sqr() / total).abs()
            })
            .sum::<f64>();
    check(tv <= 0.01, || format!("TV distance {tv}"))?;
    let first = lift(report.to_csv())?;
    let again = lift(sample(&state, &plan).and_then(|r| r.to_csv()))?;
    check(first == again, || "same seed produced different CSV bytes".into())?;
    let other = lift(sample(&state, &lift(MeasurementPlan::all(n, samples, 78))?).map(|r| r.counts))?;
    check(other != report.counts, || {
        "a different seed reproduced the counts".into()
    })?;
    Ok(format!("TV {tv:.4} over 1e5 samples, CSV byte-identical across runs"))
}

fn adder_network(count: usize) -> Result<Mps, Failure> {
    let n = 3 * count + 1;
    let inputs = qfa_network_input_positions(count);
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let local: Vec<Vec<C64>> = (1..=n)
        .map(|p| {
            if inputs.contains(&p) {
                vec![h, h]
            } else {
                vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]
            }
        })
        .collect();
    let initial = lift(Mps::product(&local))?;
    lift(qfa_network_mpo(count).and_then(|g| g.apply(&initial)?.compress(&TruncationPolicy::default())))
}

fn time_network(count: usize, samples: u64) -> Result<(Duration, usize), Failure> {
    let start = Instant::now();
    let state = adder_network(count)?;
    let plan = lift(MeasurementPlan::new(
        3 * count + 1,
        &qfa_network_output_positions(count),
        samples,
        9,
    ))?;
    let report = lift(sample(&state, &plan))?;
    check(report.counts.values().sum::<u64>() == samples, || "lost samples".into())?;
    Ok((start.elapsed(), state.max_rank()))
}

fn criterion_9() -> Outcome {
    time_network(8, 1_000)?;
    let mut times = BTreeMap::new();
    let mut ranks = Vec::new();
    for count in [8usize, 32, 96] {
        let mut runs = Vec::new();
        for _ in 0..3 {
            let (t, r) = time_network(count, 10_000)?;
            runs.push(t);
            ranks.push(r);
        }
        runs.sort();
        times.insert(count, runs[1]);
    }
    check(ranks.iter().all(|&r| r == ranks[0]), || {
        format!("ranks vary with size: {ranks:?}")
    })?;
    let ratio = times[&96].as_secs_f64() / times[&8].as_secs_f64();
    check(ratio <= 24.0, || format!("time ratio 96/8 = {ratio:.1}"))?;
    let (big, _) = time_network(100, 1_000_000)?;
    check(big < Duration::from_secs(300), || {
        format!("100 adders, 1e6 samples took {big:?}")
    })?;
    Ok(format!(
        "s=1e4: 8 {:.0?}, 32 {:.0?}, 96 {:.0?} (ratio {ratio:.1}, rank {}); 100 adders x 1e6 samples {big:.1?}",
        times[&8], times[&32], times[&96], ranks[0]
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("QFA truth table", criterion_1),
        ("closed-form equivalence", criterion_2),
        ("rank certificates", criterion_3),
        ("Simon distribution", criterion_4),
        ("QFT correctness", criterion_5),
        ("Shor M=15", criterion_6),
        ("tensor-algebra properties", criterion_7),
        ("sampling statistics", criterion_8),
        ("scaling", criterion_9),
    ];
    let mut unexpected = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let id = k + 1;
        let gap = KNOWN_GAPS.iter().find(|g| g.0 == id).map(|g| g.1);
        match (run(), gap) {
            (Ok(detail), None) => println!("criterion {id} ({name}): PASS - {detail}"),
            (Ok(detail), Some(_)) => {
                unexpected += 1;
                println!("criterion {id} ({name}): PASS - {detail} [listed as a known gap; update KNOWN_GAPS]");
            }
            (Err(f), Some(reason)) if f.known => {
                println!("criterion {id} ({name}): FAIL (known gap: {reason}) - {}", f.detail)
            }
            (Err(f), _) => {
                unexpected += 1;
                println!("criterion {id} ({name}): FAIL - {}", f.detail);
            }
        }
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
