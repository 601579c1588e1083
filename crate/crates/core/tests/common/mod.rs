//! Random small networks and a dense reference solve, shared by the
//! power-flow property tests and the acceptance suite.
#![allow(dead_code)]

use std::collections::BTreeMap;

use gridcascade::{NetworkCase, PreparedCase};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

#[derive(Debug, Clone)]
pub struct RandomNet {
    pub p: Vec<f64>,
    pub generator: Vec<bool>,
    pub branches: Vec<(usize, usize, f64, bool)>,
}

pub fn random_net() -> impl Strategy<Value = RandomNet> {
    (2usize..=12).prop_flat_map(|n| {
        let branch = (0..n, 0..n - 1, 0.01f64..1.0, prop::bool::weighted(0.8))
            .prop_map(|(f, t, x, live)| (f, if t >= f { t + 1 } else { t }, x, live));
        (
            prop::collection::vec(-2.0f64..2.0, n),
            prop::collection::vec(prop::bool::weighted(0.3), n),
            prop::collection::vec(branch, 1..=2 * n),
        )
            .prop_map(|(p, generator, branches)| RandomNet { p, generator, branches })
    })
}

pub fn build(s: &RandomNet) -> NetworkCase {
    let buses: Vec<_> =
        s.p.iter()
            .enumerate()
            .map(|(i, p)| {
                if i == 0 {
                    serde_json::json!({"id": 1, "p": p})
                } else {
                    let kind = if s.generator[i] { "generator" } else { "load" };
                    serde_json::json!({"id": i + 1, "p": p, "kind": kind})
                }
            })
            .collect();
    let branches: Vec<_> = s
        .branches
        .iter()
        .enumerate()
        .map(|(k, &(f, t, x, live))| {
            serde_json::json!({"id": k + 1, "from": f + 1, "to": t + 1, "x": x, "sigma": 10.0, "live": live})
        })
        .collect();
    let doc = serde_json::json!({"base_mva": 100, "slack_bus": 1, "buses": buses, "branches": branches});
    NetworkCase::from_json_str(&doc.to_string()).unwrap()
}

fn find(parent: &mut [usize], i: usize) -> usize {
    if parent[i] != i {
        parent[i] = find(parent, parent[i]);
    }
    parent[i]
}

/// Angles and flows from a dense grounded Laplacian per island.
pub fn dense_oracle(s: &RandomNet, p: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = p.len();
    let mut parent: Vec<usize> = (0..n).collect();
    for &(f, t, _, live) in &s.branches {
        if live {
            let (a, b) = (find(&mut parent, f), find(&mut parent, t));
            parent[a] = b;
        }
    }
    let mut islands: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        islands.entry(r).or_default().push(i);
    }

    let mut theta = vec![0.0; n];
    let mut balanced = p.to_vec();
    for buses in islands.values() {
        let generating = |i: usize| i == 0 || s.generator[i];
        let reference = if buses.contains(&0) {
            0
        } else {
            buses.iter().copied().find(|&i| generating(i)).unwrap_or(buses[0])
        };
        if buses.iter().any(|&i| generating(i)) {
            let imbalance: f64 = buses.iter().map(|&i| p[i]).sum();
            balanced[reference] -= imbalance;
        } else {
            buses.iter().for_each(|&i| balanced[i] = 0.0);
        }
        let others: Vec<usize> = buses.iter().copied().filter(|&i| i != reference).collect();
        if others.is_empty() {
            continue;
        }
        let pos = |i: usize| others.iter().position(|&o| o == i);
        let mut l = DMatrix::zeros(others.len(), others.len());
        for &(f, t, x, live) in &s.branches {
            if !live || !buses.contains(&f) {
                continue;
            }
            let w = 1.0 / x;
            match (pos(f), pos(t)) {
                (Some(a), Some(b)) => {
                    l[(a, a)] += w;
                    l[(b, b)] += w;
                    l[(a, b)] -= w;
                    l[(b, a)] -= w;
                }
                (Some(a), None) | (None, Some(a)) => l[(a, a)] += w,
                (None, None) => {}
            }
        }
        // With B = −1/x the system reads −L θ = P.
        let rhs = DVector::from_iterator(others.len(), others.iter().map(|&i| -balanced[i]));
        let x = l.lu().solve(&rhs).expect("connected island Laplacian is nonsingular");
        for (k, &i) in others.iter().enumerate() {
            theta[i] = x[k];
        }
    }
    let flows = s
        .branches
        .iter()
        .map(|&(f, t, x, live)| if live { -(theta[f] - theta[t]) / x } else { 0.0 })
        .collect();
    (theta, flows, balanced)
}

pub fn solve(case: &PreparedCase, p: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let b = case.base_susceptance();
    let partition = case.partition(&b);
    let a = &case.incidence;
    let angles = gridcascade::powerflow::solve_angles(a, &b, p, &partition).unwrap();
    let flows = gridcascade::powerflow::branch_flows(a, &b, &angles.theta);
    (angles.theta, flows.0, angles.balanced_injection)
}

pub fn scale(v: &[f64]) -> f64 {
    v.iter().fold(1.0f64, |m, x| m.max(x.abs()))
}
