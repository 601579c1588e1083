//! Randomized DC power flow checked against a dense reference solve.

mod common;

use common::{build, dense_oracle, random_net, scale, solve, RandomNet};
use gridcascade::grid::BusKind;
use gridcascade::powerflow::SusceptanceVector;
use gridcascade::PreparedCase;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn flows_match_dense_reference(s in random_net()) {
        let case = PreparedCase::new(&build(&s)).unwrap();
        let (_, flows, balanced) = solve(&case, &case.injection);
        let (_, oracle_flows, oracle_balanced) = dense_oracle(&s, &s.p);
        let tol = 1e-9 * scale(&oracle_flows);
        for (a, b) in flows.iter().zip(&oracle_flows) {
            prop_assert!((a - b).abs() <= tol, "{a} vs {b}");
        }
        for (a, b) in balanced.iter().zip(&oracle_balanced) {
            prop_assert!((a - b).abs() <= 1e-12 * scale(&s.p));
        }
    }

    #[test]
    fn islands_balance_and_flows_reproduce_injections(s in random_net()) {
        let case = PreparedCase::new(&build(&s)).unwrap();
        let b = case.base_susceptance();
        let partition = case.partition(&b);
        let (_, flows, balanced) = solve(&case, &case.injection);
        for island in &partition.islands {
            let sum: f64 = island.bus_columns().iter().map(|&c| balanced[c]).sum();
            prop_assert!(sum.abs() < 1e-10, "island sum {sum}");
            if !island.has_generation {
                for &r in island.branch_rows() {
                    prop_assert_eq!(flows[r], 0.0);
                }
            }
        }
        // Aᵀ P_e = −P_b with P_e = B A θ and B < 0.
        let recon = case.incidence.mul_transpose(&flows);
        let err = recon.iter().zip(&balanced).map(|(r, p)| (r - p).abs()).fold(0.0, f64::max);
        prop_assert!(err < 1e-8 * scale(&balanced), "flow residual {err}");
    }

    #[test]
    fn flows_scale_linearly(s in random_net(), c in -3.0f64..3.0) {
        let case = PreparedCase::new(&build(&s)).unwrap();
        let (theta, flows, _) = solve(&case, &case.injection);
        let scaled: Vec<f64> = case.injection.iter().map(|p| c * p).collect();
        let (theta_c, flows_c, _) = solve(&case, &scaled);
        let tol = 1e-9 * scale(&flows) * c.abs().max(1.0);
        for (a, b) in flows_c.iter().zip(&flows) {
            prop_assert!((a - c * b).abs() <= tol);
        }
        for (a, b) in theta_c.iter().zip(&theta) {
            prop_assert!((a - c * b).abs() <= 1e-9 * scale(&theta) * c.abs().max(1.0));
        }
    }

    #[test]
    fn shifting_angles_within_an_island_keeps_flows(s in random_net(), shift in -1.0f64..1.0) {
        let case = PreparedCase::new(&build(&s)).unwrap();
        let b: SusceptanceVector = case.base_susceptance();
        let partition = case.partition(&b);
        let (mut theta, flows, _) = solve(&case, &case.injection);
        for &c in partition.islands[0].bus_columns() {
            theta[c] += shift;
        }
        let shifted = gridcascade::powerflow::branch_flows(&case.incidence, &b, &theta);
        for (a, b) in shifted.iter().zip(&flows) {
            prop_assert!((a - b).abs() <= 1e-12 * scale(&flows));
        }
    }
}

#[test]
fn slack_bus_kind_is_inferred() {
    let s = RandomNet {
        p: vec![1.0, -1.0],
        generator: vec![false, false],
        branches: vec![(0, 1, 0.1, true)],
    };
    let case = PreparedCase::new(&build(&s)).unwrap();
    assert_eq!(case.kinds[0], BusKind::Slack);
}
