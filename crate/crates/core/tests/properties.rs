//! Randomized invariants of the tensor-train algebra, sampler environments
//! and postselection.

mod common;

use proptest::prelude::*;

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(256)
}

// sizes: 1..=6 qubits, bulk rank 1..=4
fn sizes() -> impl Strategy<Value = (u64, usize, usize)> {
    (any::<u64>(), 1usize..=6, 1usize..=4)
}

macro_rules! property {
    ($name:ident, $check:path) => {
        proptest! {
            #![proptest_config(config())]
            #[test]
            fn $name((seed, n, rank) in sizes()) {
                if let Err(msg) = $check(seed, n, rank) {
                    return Err(TestCaseError::fail(msg));
                }
            }
        }
    };
}

property!(element_round_trip, common::element_round_trip);
property!(apply_matches_dense, common::apply_matches_dense);
property!(multiply_matches_dense, common::multiply_matches_dense);
property!(rank_product_law, common::rank_product_law);
property!(pair_transform_invariance, common::pair_transform_invariance);
property!(orthonormalization, common::orthonormalization);
property!(diag_squares, common::diag_squares);
property!(environment_invariants, common::environment_invariants);
property!(postselection_identity, common::postselection_identity);
