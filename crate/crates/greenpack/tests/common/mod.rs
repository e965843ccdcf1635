//! Helpers shared by the integration test suites: the 500-server reference
//! inventory, the utilization-threshold rules that partition it, and an
//! exhaustive bin-packing oracle.

use greenpack::{
    ClassificationRules, Inventory, Pool, Rule, RuleField, RuleOp, RuleValue, ServerRecord, Status,
};

/// A plain two-socket, four-core server at the given utilization.
pub fn server(id: &str, utilization: f64) -> ServerRecord {
    ServerRecord {
        id: id.to_string(),
        make_model: "TestBox".to_string(),
        sockets: 2,
        cores_per_socket: 4,
        threads_per_core: 2,
        cache_mb: 25.0,
        memory_gb: 64.0,
        memory_speed_mhz: 2933.0,
        network_ports: 4,
        port_speed_gbps: 10.0,
        disk_count: 2,
        disk_capacity_gb: 960.0,
        raid_level: None,
        os_name: "linux".to_string(),
        patch_level: "p1".to_string(),
        applications: vec![],
        services: vec![],
        utilization,
        status: Status::Active,
        peak_efficiency: 1.0,
    }
}

/// The reference fleet: 250 servers at 3%, 175 at 6%, 75 at 10%.
pub fn reference_inventory() -> Inventory {
    let mut servers = Vec::new();
    for i in 0..500 {
        let utilization = if i < 250 {
            0.03
        } else if i < 425 {
            0.06
        } else {
            0.10
        };
        servers.push(server(&format!("s{i:03}"), utilization));
    }
    Inventory::new(servers, "generated")
}

/// Utilization-threshold rules that split the reference fleet into its three
/// pools.
pub fn reference_rules() -> ClassificationRules {
    let rule = |value: f64, op: RuleOp, pool: Pool| Rule {
        field: RuleField::Utilization,
        op,
        value: RuleValue::Number(value),
        pool,
    };
    ClassificationRules {
        rules: vec![
            rule(0.05, RuleOp::Lt, Pool::Innovation),
            rule(0.08, RuleOp::Lt, Pool::Production),
            rule(0.0, RuleOp::Gt, Pool::MissionCritical),
        ],
        default_pool: Pool::Innovation,
    }
}

/// Minimum number of bins of size `budget` that can hold `loads`, found by
/// exhaustive branch-and-bound. Every load must individually fit a bin.
/// Feasible for small instances only (intended for n <= 8).
pub fn optimal_bin_count(loads: &[f64], budget: f64) -> usize {
    fn search(loads: &[f64], idx: usize, bins: &mut Vec<f64>, budget: f64, best: &mut usize) {
        if bins.len() >= *best {
            return;
        }
        if idx == loads.len() {
            *best = bins.len();
            return;
        }
        let load = loads[idx];
        let slack = budget * 1e-9;
        for i in 0..bins.len() {
            if bins[i] + load <= budget + slack {
                bins[i] += load;
                search(loads, idx + 1, bins, budget, best);
                bins[i] -= load;
            }
        }
        bins.push(load);
        search(loads, idx + 1, bins, budget, best);
        bins.pop();
    }

    if loads.is_empty() {
        return 0;
    }
    let mut sorted = loads.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    assert!(
        sorted[0] <= budget + budget * 1e-9,
        "oracle precondition: every load fits one bin"
    );
    let mut best = loads.len();
    let mut bins = Vec::new();
    search(&sorted, 0, &mut bins, budget, &mut best);
    best
}

#[allow(dead_code)]
fn keep_helpers_referenced() {
    // Each integration test binary compiles this module independently and
    // uses a different subset of it.
    let _ = (server, reference_inventory, reference_rules, optimal_bin_count);
}
