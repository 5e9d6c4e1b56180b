//! Randomized tensor-algebra invariants shared by the property tests and the
//! acceptance runner. Each property takes a seed plus sizes and returns a
//! description of the first violation.
//!
//! Dense references are assembled entry by entry from `element`, which
//! multiplies selected core slices and never touches the sweep code, and are
//! combined with plain nalgebra matrix products.

#![allow(dead_code)]

use mpoq::dense::marginal;
use mpoq::sampling::{left_environments, postselect, right_environment};
use mpoq::tensor::CMatrix;
use mpoq::{Mpo, Mps, TruncationPolicy, C64};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Check = Result<(), String>;

pub const TOL: f64 = 1e-10;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn bits(x: usize, n: usize) -> Vec<usize> {
    (0..n).map(|k| (x >> (n - 1 - k)) & 1).collect()
}

pub fn state_by_elements(t: &Mps) -> DVector<C64> {
    let n = t.len();
    DVector::from_iterator(1 << n, (0..1usize << n).map(|x| t.element(&bits(x, n)).unwrap()))
}

pub fn operator_by_elements(g: &Mpo) -> CMatrix {
    let n = g.len();
    CMatrix::from_fn(1 << n, 1 << n, |x, y| g.element(&bits(x, n), &bits(y, n)).unwrap())
}

/// Largest entrywise deviation relative to the reference magnitude.
pub fn rel_err<'a>(got: impl IntoIterator<Item = &'a C64>, want: impl IntoIterator<Item = &'a C64>) -> f64 {
    let pairs: Vec<(C64, C64)> = got.into_iter().copied().zip(want.into_iter().copied()).collect();
    let scale = pairs.iter().map(|(_, w)| w.norm()).fold(1e-300, f64::max);
    pairs.iter().map(|(g, w)| (g - w).norm()).fold(0.0, f64::max) / scale
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_state(seed: u64, n: usize, rank: usize) -> Mps {
    Mps::random(&vec![2; n], rank, &mut rng(seed)).unwrap()
}

fn random_operator(seed: u64, n: usize, rank: usize) -> Mpo {
    Mpo::random(n, rank, &mut rng(seed ^ 0x9e37_79b9_7f4a_7c15)).unwrap()
}

pub fn element_round_trip(seed: u64, n: usize, rank: usize) -> Check {
    let t = random_state(seed, n, rank);
    let dense = t.to_dense().map_err(|e| e.to_string())?;
    let by_elements = state_by_elements(&t);
    let err = rel_err(&dense, by_elements.iter());
    ensure(err <= TOL, || format!("to_dense vs element: {err:e}"))?;
    let g = random_operator(seed, n, rank);
    let dense = g.to_dense().map_err(|e| e.to_string())?;
    let err = rel_err(dense.iter(), operator_by_elements(&g).iter());
    ensure(err <= TOL, || format!("operator to_dense vs element: {err:e}"))
}

pub fn apply_matches_dense(seed: u64, n: usize, rank: usize) -> Check {
    let t = random_state(seed, n, rank);
    let g = random_operator(seed, n, rank);
    let out = g.apply(&t).map_err(|e| e.to_string())?;
    let want = operator_by_elements(&g) * state_by_elements(&t);
    let err = rel_err(state_by_elements(&out).iter(), want.iter());
    ensure(err <= TOL, || format!("MPO*MPS vs dense: {err:e}"))
}

pub fn multiply_matches_dense(seed: u64, n: usize, rank: usize) -> Check {
    let g = random_operator(seed, n, rank);
    let h = random_operator(seed.wrapping_add(1), n, rank.max(2) - 1);
    let gh = g.multiply(&h).map_err(|e| e.to_string())?;
    let want = operator_by_elements(&g) * operator_by_elements(&h);
    let err = rel_err(operator_by_elements(&gh).iter(), want.iter());
    ensure(err <= TOL, || format!("MPO*MPO vs dense: {err:e}"))
}

pub fn rank_product_law(seed: u64, n: usize, rank: usize) -> Check {
    let t = random_state(seed, n, rank);
    let g = random_operator(seed, n, rank);
    let h = random_operator(seed.wrapping_add(7), n, rank.max(2) - 1);
    let product = |a: Vec<usize>, b: Vec<usize>| a.iter().zip(&b).map(|(x, y)| x * y).collect::<Vec<_>>();
    let applied = g.apply(&t).map_err(|e| e.to_string())?.ranks();
    ensure(applied == product(g.ranks(), t.ranks()), || {
        format!("apply ranks {applied:?}")
    })?;
    let multiplied = g.multiply(&h).map_err(|e| e.to_string())?.ranks();
    ensure(multiplied == product(g.ranks(), h.ranks()), || {
        format!("multiply ranks {multiplied:?}")
    })
}

pub fn pair_transform_invariance(seed: u64, n: usize, rank: usize) -> Check {
    if n < 2 {
        return Ok(());
    }
    let t = random_state(seed, n, rank);
    let mut r = rng(seed.wrapping_mul(31).wrapping_add(5));
    let i = r.random_range(0..n - 1);
    let k = t.core(i).right_rank();
    // diagonally dominant, hence well conditioned
    let q = CMatrix::from_fn(k, k, |a, b| {
        let off = C64::new(r.random::<f64>() - 0.5, r.random::<f64>() - 0.5) / k as f64;
        if a == b {
            off + C64::new(2.0, 0.0)
        } else {
            off
        }
    });
    let moved = t.transform_pair(i, &q).map_err(|e| e.to_string())?;
    let err = rel_err(state_by_elements(&moved).iter(), state_by_elements(&t).iter());
    ensure(err <= TOL, || format!("paired state transform at {i}: {err:e}"))?;
    let g = random_operator(seed, n, rank);
    let k = g.core(i).right_rank();
    let q = CMatrix::from_fn(k, k, |a, b| {
        if a == b {
            C64::new(1.5, 0.5)
        } else {
            C64::new(0.1, -0.2) / k as f64
        }
    });
    let moved = g.transform_pair(i, &q).map_err(|e| e.to_string())?;
    let err = rel_err(operator_by_elements(&moved).iter(), operator_by_elements(&g).iter());
    ensure(err <= TOL, || format!("paired operator transform at {i}: {err:e}"))
}

pub fn orthonormalization(seed: u64, n: usize, rank: usize) -> Check {
    let t = random_state(seed, n, rank);
    // a sum of a state with itself has redundant bonds to strip
    let t = t.add(&t.scale(C64::new(0.0, 1.0))).map_err(|e| e.to_string())?;
    let want = state_by_elements(&t);
    let policy = TruncationPolicy::default();
    for (label, s) in [
        ("right", t.orthonormalize_right(&policy)),
        ("left", t.orthonormalize_left(&policy)),
        ("compress", t.compress(&policy)),
    ] {
        let s = s.map_err(|e| e.to_string())?;
        let err = rel_err(state_by_elements(&s).iter(), want.iter());
        ensure(err <= TOL, || format!("{label} sweep changes the tensor by {err:e}"))?;
        let grew = s.ranks().iter().zip(t.ranks()).any(|(a, b)| *a > b);
        ensure(!grew, || {
            format!("{label} sweep grew ranks {:?} -> {:?}", t.ranks(), s.ranks())
        })?;
        let ortho = if label == "left" {
            s.left_orthonormality_error()
        } else {
            s.right_orthonormality_error()
        };
        ensure(ortho <= TOL, || format!("{label} sweep orthonormality error {ortho:e}"))?;
    }
    let g = random_operator(seed, n, rank);
    let s = g.orthonormalize_right(&policy).map_err(|e| e.to_string())?;
    let err = rel_err(operator_by_elements(&s).iter(), operator_by_elements(&g).iter());
    ensure(err <= TOL, || format!("operator sweep changes the tensor by {err:e}"))?;
    let grew = s.ranks().iter().zip(g.ranks()).any(|(a, b)| *a > b);
    ensure(!grew, || {
        format!("operator sweep grew ranks {:?} -> {:?}", g.ranks(), s.ranks())
    })?;
    for core in &s.cores()[1..] {
        let u = core.right_unfolding();
        let err = (&u * u.adjoint() - CMatrix::identity(u.nrows(), u.nrows())).camax();
        ensure(err <= TOL, || format!("operator core not right-orthonormal: {err:e}"))?;
    }
    Ok(())
}

pub fn diag_squares(seed: u64, n: usize, rank: usize) -> Check {
    let t = random_state(seed, n, rank);
    let out = Mpo::diag(&t).apply(&t).map_err(|e| e.to_string())?;
    let want: Vec<C64> = state_by_elements(&t).iter().map(|v| v * v).collect();
    let err = rel_err(state_by_elements(&out).iter(), &want);
    ensure(err <= TOL, || format!("diag(T)T vs T*T: {err:e}"))
}

/// Left environments reproduce unnormalized prefix marginals, and a
/// right-orthonormal suffix has the identity as its environment.
pub fn environment_invariants(seed: u64, n: usize, rank: usize) -> Check {
    let t = random_state(seed, n, rank);
    let probs: Vec<f64> = state_by_elements(&t).iter().map(|a| a.norm_sqr()).collect();
    let mut r = rng(seed.wrapping_add(99));
    let prefix: Vec<Option<u8>> = (0..n).map(|_| [None, Some(0), Some(1)][r.random_range(0..3)]).collect();
    let envs = left_environments(&t, &prefix).map_err(|e| e.to_string())?;
    let total: f64 = probs.iter().sum();
    for (k, env) in envs.iter().enumerate() {
        let fixed: Vec<usize> = (0..=k).filter(|&j| prefix[j].is_some()).collect();
        let want: f64 = (0..probs.len())
            .filter(|&x| fixed.iter().all(|&j| bits(x, n)[j] == prefix[j].unwrap() as usize))
            .map(|x| probs[x])
            .sum();
        // the remaining sites are summed by the right environment
        let rest = if k + 1 < n {
            right_environment(&t, k + 1).map_err(|e| e.to_string())?
        } else {
            CMatrix::identity(1, 1)
        };
        let got = (env * rest).trace().re;
        let err = (got - want).abs() / total;
        ensure(err <= TOL, || format!("environment after site {k}: {got} vs {want}"))?;
    }
    let s = t
        .orthonormalize_right(&TruncationPolicy::lossless())
        .map_err(|e| e.to_string())?;
    for from in 1..n {
        let env = right_environment(&s, from).map_err(|e| e.to_string())?;
        let err = (&env - CMatrix::identity(env.nrows(), env.nrows())).camax();
        ensure(err <= TOL, || {
            format!("right environment from {from} is not the identity: {err:e}")
        })?;
    }
    Ok(())
}

/// The postselected state is the normalized projection and its probability
/// is the dense marginal of the assignment.
pub fn postselection_identity(seed: u64, n: usize, rank: usize) -> Check {
    let t = random_state(seed, n, rank);
    let mut r = rng(seed.wrapping_add(17));
    let count = r.random_range(1..=n);
    let mut positions: Vec<usize> = (1..=n).collect();
    for i in (1..n).rev() {
        positions.swap(i, r.random_range(0..=i));
    }
    let assignment: Vec<(usize, u8)> = positions[..count]
        .iter()
        .map(|&p| (p, r.random_range(0..2u8)))
        .collect();
    let amps = state_by_elements(&t);
    let total: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    let keep = |x: usize| assignment.iter().all(|&(p, b)| bits(x, n)[p - 1] == b as usize);
    let mass: f64 = (0..amps.len()).filter(|&x| keep(x)).map(|x| amps[x].norm_sqr()).sum();
    let probs: Vec<f64> = amps.iter().map(|a| a.norm_sqr() / total).collect();
    let measured: Vec<usize> = assignment.iter().map(|&(p, _)| p).collect();
    let index = assignment.iter().fold(0usize, |acc, &(_, b)| acc * 2 + b as usize);
    let via_marginal = marginal(&probs, n, &measured)[index];
    ensure((mass / total - via_marginal).abs() <= TOL, || {
        "dense marginal disagrees with direct sum".into()
    })?;
    let post = postselect(&t, &assignment).map_err(|e| e.to_string())?;
    ensure((post.probability - mass / total).abs() <= TOL, || {
        format!("probability {} vs {}", post.probability, mass / total)
    })?;
    let scale = C64::new((1.0 / mass).sqrt(), 0.0);
    let want: Vec<C64> = (0..amps.len())
        .map(|x| if keep(x) { amps[x] * scale } else { C64::new(0.0, 0.0) })
        .collect();
    let got = state_by_elements(&post.state);
    let err = got.iter().zip(&want).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    ensure(err <= TOL, || format!("postselected state differs by {err:e}"))
}

pub type Property = fn(u64, usize, usize) -> Check;

pub const PROPERTIES: [(&str, Property); 9] = [
    ("element/dense round trip", element_round_trip),
    ("MPO*MPS dense equivalence", apply_matches_dense),
    ("MPO*MPO dense equivalence", multiply_matches_dense),
    ("rank-product law", rank_product_law),
    ("paired core-transform invariance", pair_transform_invariance),
    ("orthonormalization", orthonormalization),
    ("diag(T)T = T*T", diag_squares),
    ("environment invariants", environment_invariants),
    ("postselection identity", postselection_identity),
];
