//! Normalized workloads and consolidation planning: the fixed-ratio scheme
//! and generalized first-fit-decreasing packing against utilization targets.

use serde::{Deserialize, Serialize};

use crate::classify::{Pool, PoolAssignment};
use crate::error::{Error, Result};
use crate::inventory::ServerRecord;
use crate::power::PowerCurve;
use crate::util;

/// Target utilization at which fixed-ratio hosts are billed. Fixed-ratio
/// accounting always plans hosts to run at half capacity.
pub const FIXED_RATIO_UTILIZATION: f64 = 0.50;

/// Relative slack applied to capacity comparisons so packing decisions are not
/// flipped by floating-point rounding in load sums.
const FIT_SLACK: f64 = 1e-9;

/// A server's demand in hardware-independent capacity units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedWorkload {
    pub server_id: String,
    /// peak_efficiency x sockets x cores_per_socket.
    pub capacity: f64,
    /// utilization x capacity. Always within [0, capacity].
    pub load: f64,
}

/// Normalize a server's measured utilization into capacity units.
pub fn normalized_workload(record: &ServerRecord) -> NormalizedWorkload {
    let capacity = record.capacity_units();
    NormalizedWorkload {
        server_id: record.id.clone(),
        capacity,
        load: record.utilization * capacity,
    }
}

/// Planned post-consolidation utilization ceilings per pool. Production and
/// mission-critical pools carry an operating range; packing uses the range's
/// upper bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UtilizationTargets {
    pub innovation: f64,
    pub production: (f64, f64),
    pub mission_critical: (f64, f64),
}

impl Default for UtilizationTargets {
    fn default() -> Self {
        UtilizationTargets {
            innovation: 0.50,
            production: (0.25, 0.50),
            mission_critical: (0.25, 0.30),
        }
    }
}

impl UtilizationTargets {
    pub fn validate(&self) -> Result<()> {
        let fraction = |name: &str, value: f64| {
            if !value.is_finite() || !(value > 0.0 && value <= 1.0) {
                return Err(Error::domain(format!(
                    "target `{name}` must be in (0, 1], got {value}"
                )));
            }
            Ok(())
        };
        fraction("innovation", self.innovation)?;
        for (name, (lo, hi)) in [
            ("production", self.production),
            ("mission_critical", self.mission_critical),
        ] {
            fraction(name, lo)?;
            fraction(name, hi)?;
            if lo > hi {
                return Err(Error::domain(format!(
                    "target `{name}` range is inverted: {lo} > {hi}"
                )));
            }
        }
        Ok(())
    }

    /// The utilization ceiling packing uses for `pool`: the innovation target,
    /// or the upper bound of the pool's range.
    pub fn target_for(&self, pool: Pool) -> f64 {
        match pool {
            Pool::Innovation => self.innovation,
            Pool::Production => self.production.1,
            Pool::MissionCritical => self.mission_critical.1,
        }
    }
}

/// How many servers collapse onto one host per pool in fixed-ratio mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsolidationRatios {
    pub innovation: u32,
    pub production: u32,
    pub mission_critical: u32,
}

impl Default for ConsolidationRatios {
    fn default() -> Self {
        ConsolidationRatios {
            innovation: 15,
            production: 10,
            mission_critical: 5,
        }
    }
}

impl ConsolidationRatios {
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("innovation", self.innovation),
            ("production", self.production),
            ("mission_critical", self.mission_critical),
        ] {
            if value < 1 {
                return Err(Error::domain(format!(
                    "consolidation ratio `{name}` must be >= 1, got {value}"
                )));
            }
        }
        Ok(())
    }

    pub fn ratio_for(&self, pool: Pool) -> u32 {
        match pool {
            Pool::Innovation => self.innovation,
            Pool::Production => self.production,
            Pool::MissionCritical => self.mission_critical,
        }
    }
}

/// Planning strategy: collapse each pool by a fixed integer ratio, or pack
/// workloads host by host against the pool's utilization target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanMode {
    FixedRatio,
    Packed,
}

impl std::fmt::Display for PlanMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PlanMode::FixedRatio => f.write_str("fixed_ratio"),
            PlanMode::Packed => f.write_str("packed"),
        }
    }
}

/// Largest integer consolidation ratio whose combined load stays within the
/// target: floor(target / mean), never below 1.
///
/// The quotient gets a hair of slack before flooring so ratios like
/// 0.3 / 0.1 land on 3 instead of being truncated by floating-point
/// round-down.
pub fn derive_ratio(pool_mean_utilization: f64, target: f64) -> Result<u32> {
    if !(target > 0.0 && target <= 1.0) || !target.is_finite() {
        return Err(Error::domain(format!(
            "target must be in (0, 1], got {target}"
        )));
    }
    if pool_mean_utilization <= 0.0 || !pool_mean_utilization.is_finite() {
        return Err(Error::domain(format!(
            "pool mean utilization must be positive, got {pool_mean_utilization}"
        )));
    }
    if pool_mean_utilization > target {
        return Err(Error::domain(format!(
            "pool mean utilization {pool_mean_utilization} exceeds target {target}"
        )));
    }
    let ratio = (target / pool_mean_utilization + FIT_SLACK).floor() as u32;
    Ok(ratio.max(1))
}

/// Outcome of collapsing one pool by a fixed ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedRatioOutcome {
    pub host_count: usize,
    pub post_total_watts: f64,
}

/// Collapse `pool_count` servers at `ratio`:1, billing each surviving host at
/// a flat `post_per_server_watts`. Host count rounds up so every server has a
/// home.
pub fn fixed_ratio_consolidate(
    pool_count: usize,
    ratio: u32,
    post_per_server_watts: f64,
) -> FixedRatioOutcome {
    assert!(ratio >= 1, "consolidation ratio must be >= 1");
    let host_count = pool_count.div_ceil(ratio as usize);
    FixedRatioOutcome {
        host_count,
        post_total_watts: host_count as f64 * post_per_server_watts,
    }
}

/// One post-consolidation host and the guests packed onto it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HostPlacement {
    pub host_id: String,
    pub capacity: f64,
    /// Guest server ids, in placement order.
    pub guests: Vec<String>,
    pub load: f64,
    /// load / capacity.
    pub utilization: f64,
}

impl HostPlacement {
    fn new(host_id: String, capacity: f64) -> Self {
        HostPlacement {
            host_id,
            capacity,
            guests: Vec::new(),
            load: 0.0,
            utilization: 0.0,
        }
    }

    fn place(&mut self, workload: &NormalizedWorkload) {
        self.guests.push(workload.server_id.clone());
        self.load += workload.load;
        self.utilization = self.load / self.capacity;
    }
}

fn sorted_decreasing(workloads: &[NormalizedWorkload]) -> Vec<&NormalizedWorkload> {
    let mut sorted: Vec<&NormalizedWorkload> = workloads.iter().collect();
    sorted.sort_by(|a, b| {
        b.load
            .total_cmp(&a.load)
            .then_with(|| a.server_id.cmp(&b.server_id))
    });
    sorted
}

/// Pack workloads onto identical hosts of `host_capacity` using first-fit
/// decreasing: sort by load descending (ties by server id ascending), place
/// each on the first host with room under `target x host_capacity`, and open
/// a fresh host when none fits.
///
/// Fully deterministic; host ids are `host-1`, `host-2`, ... in opening
/// order.
pub fn pack_first_fit_decreasing(
    workloads: &[NormalizedWorkload],
    host_capacity: f64,
    target: f64,
) -> Result<Vec<HostPlacement>> {
    if host_capacity <= 0.0 || !host_capacity.is_finite() {
        return Err(Error::domain(format!(
            "host capacity must be positive, got {host_capacity}"
        )));
    }
    if !(target > 0.0 && target <= 1.0) || !target.is_finite() {
        return Err(Error::domain(format!(
            "target must be in (0, 1], got {target}"
        )));
    }
    let budget = target * host_capacity;
    let slack = budget * FIT_SLACK;
    let mut hosts: Vec<HostPlacement> = Vec::new();
    for workload in sorted_decreasing(workloads) {
        if workload.load > budget + slack {
            return Err(Error::InfeasibleGuest {
                server_id: workload.server_id.clone(),
                load: workload.load,
                budget,
            });
        }
        let slot = hosts
            .iter_mut()
            .find(|host| host.load + workload.load <= budget + slack);
        match slot {
            Some(host) => host.place(workload),
            None => {
                let mut host =
                    HostPlacement::new(format!("host-{}", hosts.len() + 1), host_capacity);
                host.place(workload);
                hosts.push(host);
            }
        }
    }
    Ok(hosts)
}

/// Pack workloads onto a heterogeneous fleet of candidate host machines,
/// typically the pool's own servers. Hosts open largest capacity first (ties
/// by id ascending), so consolidation re-uses the biggest existing machines;
/// each host's budget is `target x` its own capacity.
///
/// A guest too big for even the largest candidate is infeasible. Running out
/// of candidates while guests remain is an insufficient-capacity error
/// labeled with `scope`.
pub fn pack_into_host_machines(
    workloads: &[NormalizedWorkload],
    host_candidates: &[NormalizedWorkload],
    target: f64,
    scope: &str,
) -> Result<Vec<HostPlacement>> {
    if !(target > 0.0 && target <= 1.0) || !target.is_finite() {
        return Err(Error::domain(format!(
            "target must be in (0, 1], got {target}"
        )));
    }
    if workloads.is_empty() {
        return Ok(Vec::new());
    }
    if host_candidates.is_empty() {
        return Err(Error::InsufficientCapacity {
            scope: scope.to_string(),
        });
    }

    let mut candidates: Vec<&NormalizedWorkload> = host_candidates.iter().collect();
    candidates.sort_by(|a, b| {
        b.capacity
            .total_cmp(&a.capacity)
            .then_with(|| a.server_id.cmp(&b.server_id))
    });
    let max_budget = target * candidates[0].capacity;

    let mut hosts: Vec<HostPlacement> = Vec::new();
    let mut next_candidate = 0;
    for workload in sorted_decreasing(workloads) {
        if workload.load > max_budget + max_budget * FIT_SLACK {
            return Err(Error::InfeasibleGuest {
                server_id: workload.server_id.clone(),
                load: workload.load,
                budget: max_budget,
            });
        }
        let fits = |host: &HostPlacement| {
            let budget = target * host.capacity;
            host.load + workload.load <= budget + budget * FIT_SLACK
        };
        if let Some(host) = hosts.iter_mut().find(|h| fits(h)) {
            host.place(workload);
            continue;
        }
        // Open candidates until one can take this guest. Budgets shrink with
        // capacity order, so the first open failure past the end is final.
        let mut placed = false;
        while next_candidate < candidates.len() {
            let candidate = candidates[next_candidate];
            next_candidate += 1;
            let mut host = HostPlacement::new(candidate.server_id.clone(), candidate.capacity);
            if fits(&host) {
                host.place(workload);
                hosts.push(host);
                placed = true;
                break;
            }
            hosts.push(host);
        }
        if !placed {
            return Err(Error::InsufficientCapacity {
                scope: scope.to_string(),
            });
        }
    }
    hosts.retain(|h| !h.guests.is_empty());
    Ok(hosts)
}

/// Post-consolidation shape of one pool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolPlan {
    pub pool: Pool,
    pub server_count: usize,
    pub host_count: usize,
    /// Consolidation ratio: the configured ratio in fixed-ratio mode, the
    /// achieved servers-per-host in packed mode.
    pub ratio: f64,
    /// The utilization the plan aims hosts at.
    pub target_utilization: f64,
    /// The utilization hosts actually reach: total load over total host
    /// capacity.
    pub post_utilization: f64,
    pub post_per_server_watts: f64,
    pub post_total_watts: f64,
    /// Summed capacity of the surviving hosts.
    pub post_capacity: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub placement: Option<Vec<HostPlacement>>,
}

/// A full consolidation plan across the three pools.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsolidationPlan {
    pub mode: PlanMode,
    /// Pool plans in canonical order: Innovation, Production, MissionCritical.
    pub pools: Vec<PoolPlan>,
    pub total_server_count: usize,
    pub total_host_count: usize,
    /// total_server_count / total_host_count.
    pub total_ratio: f64,
    pub total_post_utilization: f64,
    pub total_watts: f64,
}

impl ConsolidationPlan {
    pub fn pool(&self, pool: Pool) -> &PoolPlan {
        self.pools
            .iter()
            .find(|p| p.pool == pool)
            .expect("plan holds all three pools")
    }
}

/// Produce a consolidation plan for every pool, processed in canonical order
/// (innovation first).
///
/// Fixed-ratio mode collapses each pool by its configured ratio and bills
/// hosts flat at the curve's half-capacity draw. Packed mode packs each
/// pool's workloads onto its own largest machines and bills each host at its
/// achieved utilization through the curve.
pub fn plan(
    assignment: &PoolAssignment,
    workloads: &[NormalizedWorkload],
    ratios: &ConsolidationRatios,
    targets: &UtilizationTargets,
    curve: &PowerCurve,
    mode: PlanMode,
) -> Result<ConsolidationPlan> {
    ratios.validate()?;
    targets.validate()?;
    if workloads.len() != assignment.assignments.len()
        || workloads
            .iter()
            .any(|w| !assignment.assignments.contains_key(&w.server_id))
    {
        return Err(Error::domain(
            "workloads and pool assignment cover different server ids",
        ));
    }

    let mut pools = Vec::with_capacity(Pool::ALL.len());
    for pool in Pool::ALL {
        let members: Vec<&NormalizedWorkload> = workloads
            .iter()
            .filter(|w| assignment.assignments.get(&w.server_id) == Some(&pool))
            .collect();
        pools.push(plan_pool(pool, &members, ratios, targets, curve, mode)?);
    }

    let total_server_count = pools.iter().map(|p| p.server_count).sum::<usize>();
    let total_host_count = pools.iter().map(|p| p.host_count).sum::<usize>();
    let total_watts = util::kahan_sum(pools.iter().map(|p| p.post_total_watts));
    let total_capacity = util::kahan_sum(pools.iter().map(|p| p.post_capacity));
    let total_load = util::kahan_sum(
        pools
            .iter()
            .map(|p| p.post_utilization * p.post_capacity),
    );
    Ok(ConsolidationPlan {
        mode,
        pools,
        total_server_count,
        total_host_count,
        total_ratio: if total_host_count == 0 {
            0.0
        } else {
            total_server_count as f64 / total_host_count as f64
        },
        total_post_utilization: if total_capacity > 0.0 {
            total_load / total_capacity
        } else {
            0.0
        },
        total_watts,
    })
}

fn plan_pool(
    pool: Pool,
    members: &[&NormalizedWorkload],
    ratios: &ConsolidationRatios,
    targets: &UtilizationTargets,
    curve: &PowerCurve,
    mode: PlanMode,
) -> Result<PoolPlan> {
    let server_count = members.len();
    let total_load = util::kahan_sum(members.iter().map(|w| w.load));
    match mode {
        PlanMode::FixedRatio => {
            let ratio = ratios.ratio_for(pool);
            let per_host_watts = curve.power_at(FIXED_RATIO_UTILIZATION)?;
            let outcome = fixed_ratio_consolidate(server_count, ratio, per_host_watts);
            // Surviving hosts are pool machines; with no placement decided,
            // bill capacity at the pool's mean machine size.
            let mean_capacity =
                util::mean(&members.iter().map(|w| w.capacity).collect::<Vec<_>>());
            let post_capacity = outcome.host_count as f64 * mean_capacity;
            Ok(PoolPlan {
                pool,
                server_count,
                host_count: outcome.host_count,
                ratio: ratio as f64,
                target_utilization: FIXED_RATIO_UTILIZATION,
                post_utilization: if post_capacity > 0.0 {
                    total_load / post_capacity
                } else {
                    0.0
                },
                post_per_server_watts: per_host_watts,
                post_total_watts: outcome.post_total_watts,
                post_capacity,
                placement: None,
            })
        }
        PlanMode::Packed => {
            let target = targets.target_for(pool);
            let owned: Vec<NormalizedWorkload> = members.iter().map(|w| (*w).clone()).collect();
            let placement = pack_into_host_machines(&owned, &owned, target, pool.label())?;
            let host_count = placement.len();
            let post_capacity = util::kahan_sum(placement.iter().map(|h| h.capacity));
            let post_total_watts = {
                let mut per_host = Vec::with_capacity(host_count);
                for host in &placement {
                    // Packed loads respect the target, so utilization stays
                    // within the curve's domain up to rounding slack.
                    per_host.push(curve.power_at(host.utilization.min(1.0))?);
                }
                util::kahan_sum(per_host)
            };
            Ok(PoolPlan {
                pool,
                server_count,
                host_count,
                ratio: if host_count == 0 {
                    0.0
                } else {
                    server_count as f64 / host_count as f64
                },
                target_utilization: target,
                post_utilization: if post_capacity > 0.0 {
                    total_load / post_capacity
                } else {
                    0.0
                },
                post_per_server_watts: if host_count == 0 {
                    0.0
                } else {
                    post_total_watts / host_count as f64
                },
                post_total_watts,
                post_capacity,
                placement: Some(placement),
            })
        }
    }
}

/// Optional planning configuration file: either or both sections may appear.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlanConfig {
    pub ratios: Option<ConsolidationRatios>,
    pub targets: Option<UtilizationTargets>,
}

impl PlanConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: PlanConfig = serde_json::from_str(text).map_err(|e| {
            Error::parse(
                format!("line {} column {}", e.line(), e.column()),
                e.to_string(),
            )
        })?;
        if let Some(ratios) = &config.ratios {
            ratios.validate()?;
        }
        if let Some(targets) = &config.targets {
            targets.validate()?;
        }
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{partition, ClassificationRules, Rule, RuleField, RuleOp, RuleValue};
    use crate::inventory::{Inventory, Status};

    fn record(id: &str, utilization: f64) -> ServerRecord {
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

    fn load(id: &str, load: f64) -> NormalizedWorkload {
        NormalizedWorkload {
            server_id: id.to_string(),
            capacity: 1.0,
            load,
        }
    }

    fn reference_inventory() -> Inventory {
        let mut servers = Vec::new();
        for i in 0..500 {
            let utilization = if i < 250 {
                0.03
            } else if i < 425 {
                0.06
            } else {
                0.10
            };
            servers.push(record(&format!("s{i:03}"), utilization));
        }
        Inventory::new(servers, "gen")
    }

    fn reference_rules() -> ClassificationRules {
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

    #[test]
    fn normalized_workload_examples() {
        let mut r = record("s1", 0.0);
        assert_eq!(normalized_workload(&r).load, 0.0);

        r.utilization = 1.0;
        r.sockets = 1;
        r.cores_per_socket = 1;
        let w = normalized_workload(&r);
        assert_eq!(w.capacity, 1.0);
        assert_eq!(w.load, 1.0);

        let r = record("s2", 0.5);
        let w = normalized_workload(&r);
        assert_eq!(w.capacity, 8.0);
        assert_eq!(w.load, 4.0);
    }

    #[test]
    fn derive_ratio_reference_values() {
        assert_eq!(derive_ratio(0.10, 0.50).unwrap(), 5);
        assert_eq!(derive_ratio(0.05, 0.50).unwrap(), 10);
        assert_eq!(derive_ratio(0.03, 0.50).unwrap(), 16);
    }

    #[test]
    fn derive_ratio_survives_decimal_rounding() {
        // 0.3 / 0.1 rounds below 3.0 in binary floating point.
        assert_eq!(derive_ratio(0.1, 0.3).unwrap(), 3);
        assert_eq!(derive_ratio(0.5, 0.5).unwrap(), 1);
    }

    #[test]
    fn derive_ratio_rejects_bad_domains() {
        assert!(derive_ratio(0.0, 0.5).is_err());
        assert!(derive_ratio(-0.1, 0.5).is_err());
        assert!(derive_ratio(0.6, 0.5).is_err());
        assert!(derive_ratio(0.1, 0.0).is_err());
        assert!(derive_ratio(0.1, 1.5).is_err());
    }

    #[test]
    fn fixed_ratio_reference_outcomes() {
        let cases = [
            (250, 15, 17, 3910.0),
            (175, 10, 18, 4140.0),
            (75, 5, 15, 3450.0),
            (0, 15, 0, 0.0),
        ];
        for (count, ratio, hosts, watts) in cases {
            let outcome = fixed_ratio_consolidate(count, ratio, 230.0);
            assert_eq!(outcome.host_count, hosts);
            assert_eq!(outcome.post_total_watts, watts);
        }
    }

    #[test]
    fn fixed_ratio_host_count_uses_ceiling() {
        assert_eq!(fixed_ratio_consolidate(16, 15, 230.0).host_count, 2);
        assert_eq!(fixed_ratio_consolidate(15, 15, 230.0).host_count, 1);
        assert_eq!(fixed_ratio_consolidate(1, 15, 230.0).host_count, 1);
    }

    #[test]
    fn ffd_three_large_loads_need_three_hosts() {
        let loads = vec![load("a", 0.3), load("b", 0.3), load("c", 0.3)];
        let hosts = pack_first_fit_decreasing(&loads, 1.0, 0.5).unwrap();
        assert_eq!(hosts.len(), 3);
    }

    #[test]
    fn ffd_empty_input_opens_no_hosts() {
        let hosts = pack_first_fit_decreasing(&[], 1.0, 0.5).unwrap();
        assert!(hosts.is_empty());
    }

    #[test]
    fn ffd_fifteen_small_loads_share_one_host() {
        let loads: Vec<NormalizedWorkload> = (0..15)
            .map(|i| load(&format!("s{i:02}"), 0.03))
            .collect();
        let hosts = pack_first_fit_decreasing(&loads, 1.0, 0.5).unwrap();
        assert_eq!(hosts.len(), 1);
        assert_eq!(hosts[0].guests.len(), 15);
        assert!((hosts[0].load - 0.45).abs() < 1e-9);
    }

    #[test]
    fn ffd_pairs_loads_to_fill_hosts() {
        let loads = vec![
            load("a", 0.26),
            load("b", 0.26),
            load("c", 0.24),
            load("d", 0.24),
        ];
        let hosts = pack_first_fit_decreasing(&loads, 1.0, 0.5).unwrap();
        assert_eq!(hosts.len(), 2);
        assert_eq!(hosts[0].guests, vec!["a", "c"]);
        assert_eq!(hosts[1].guests, vec!["b", "d"]);
    }

    #[test]
    fn ffd_breaks_load_ties_by_id() {
        let loads = vec![load("z", 0.3), load("a", 0.3)];
        let hosts = pack_first_fit_decreasing(&loads, 1.0, 0.5).unwrap();
        assert_eq!(hosts[0].guests, vec!["a"]);
        assert_eq!(hosts[1].guests, vec!["z"]);
    }

    #[test]
    fn ffd_oversized_guest_is_infeasible() {
        let loads = vec![load("big", 0.6)];
        let err = pack_first_fit_decreasing(&loads, 1.0, 0.5).unwrap_err();
        match err {
            Error::InfeasibleGuest { server_id, .. } => assert_eq!(server_id, "big"),
            other => panic!("expected infeasible guest, got {other}"),
        }
    }

    #[test]
    fn ffd_rejects_bad_parameters() {
        assert!(pack_first_fit_decreasing(&[], 0.0, 0.5).is_err());
        assert!(pack_first_fit_decreasing(&[], 1.0, 0.0).is_err());
        assert!(pack_first_fit_decreasing(&[], 1.0, 1.5).is_err());
    }

    #[test]
    fn ffd_conserves_total_load() {
        let loads: Vec<NormalizedWorkload> = (0..40)
            .map(|i| load(&format!("s{i:02}"), 0.01 + (i as f64) * 0.007))
            .collect();
        let total: f64 = loads.iter().map(|w| w.load).sum();
        let hosts = pack_first_fit_decreasing(&loads, 1.0, 0.6).unwrap();
        let placed: f64 = hosts.iter().map(|h| h.load).sum();
        assert!((placed - total).abs() < 1e-9);
        let guests: usize = hosts.iter().map(|h| h.guests.len()).sum();
        assert_eq!(guests, loads.len());
    }

    #[test]
    fn machine_packing_reuses_largest_machines_first() {
        let workloads = vec![
            NormalizedWorkload {
                server_id: "small".into(),
                capacity: 2.0,
                load: 0.5,
            },
            NormalizedWorkload {
                server_id: "large".into(),
                capacity: 8.0,
                load: 1.0,
            },
        ];
        let hosts = pack_into_host_machines(&workloads, &workloads, 0.5, "test").unwrap();
        assert_eq!(hosts.len(), 1);
        assert_eq!(hosts[0].host_id, "large");
        assert_eq!(hosts[0].guests, vec!["large", "small"]);
        assert!((hosts[0].load - 1.5).abs() < 1e-12);
    }

    #[test]
    fn machine_packing_can_exhaust_candidates() {
        // The big machine fills up; the straggler fits no remaining budget.
        let guest = |id: &str, capacity: f64, load: f64| NormalizedWorkload {
            server_id: id.into(),
            capacity,
            load,
        };
        let workloads = vec![guest("a", 10.0, 4.8), guest("b", 1.0, 0.9)];
        let err = pack_into_host_machines(&workloads, &workloads, 0.5, "test").unwrap_err();
        assert!(matches!(err, Error::InsufficientCapacity { scope } if scope == "test"));
    }

    #[test]
    fn machine_packing_flags_oversized_guest() {
        let guest = |id: &str, capacity: f64, load: f64| NormalizedWorkload {
            server_id: id.into(),
            capacity,
            load,
        };
        let workloads = vec![guest("a", 4.0, 3.0)];
        let err = pack_into_host_machines(&workloads, &workloads, 0.5, "test").unwrap_err();
        assert!(matches!(err, Error::InfeasibleGuest { ref server_id, .. } if server_id == "a"));
    }

    #[test]
    fn fixed_ratio_plan_reproduces_reference_watts() {
        let inventory = reference_inventory();
        let assignment = partition(&inventory, &reference_rules());
        let workloads: Vec<NormalizedWorkload> =
            inventory.servers.iter().map(normalized_workload).collect();
        let plan = plan(
            &assignment,
            &workloads,
            &ConsolidationRatios::default(),
            &UtilizationTargets::default(),
            &PowerCurve::default(),
            PlanMode::FixedRatio,
        )
        .unwrap();

        let innovation = plan.pool(Pool::Innovation);
        let production = plan.pool(Pool::Production);
        let mission = plan.pool(Pool::MissionCritical);
        assert_eq!(innovation.host_count, 17);
        assert_eq!(production.host_count, 18);
        assert_eq!(mission.host_count, 15);
        assert_eq!(innovation.post_total_watts, 3910.0);
        assert_eq!(production.post_total_watts, 4140.0);
        assert_eq!(mission.post_total_watts, 3450.0);
        assert_eq!(plan.total_watts, 11500.0);
        assert_eq!(plan.total_host_count, 50);
        assert_eq!(plan.total_ratio, 10.0);

        assert!((innovation.post_utilization - 60.0 / 136.0).abs() < 1e-9);
        assert!((production.post_utilization - 84.0 / 144.0).abs() < 1e-9);
        assert!((mission.post_utilization - 0.5).abs() < 1e-9);
        assert!((plan.total_post_utilization - 0.51).abs() < 1e-9);
    }

    #[test]
    fn ratio_one_plan_is_identity_on_count() {
        let inventory = Inventory::new(vec![record("s1", 0.4)], "gen");
        let assignment = partition(&inventory, &reference_rules());
        let workloads: Vec<NormalizedWorkload> =
            inventory.servers.iter().map(normalized_workload).collect();
        let ratios = ConsolidationRatios {
            innovation: 1,
            production: 1,
            mission_critical: 1,
        };
        let plan = plan(
            &assignment,
            &workloads,
            &ratios,
            &UtilizationTargets::default(),
            &PowerCurve::default(),
            PlanMode::FixedRatio,
        )
        .unwrap();
        assert_eq!(plan.total_host_count, 1);
        assert_eq!(plan.total_watts, 230.0);
    }

    #[test]
    fn packed_plan_places_every_guest_once() {
        let inventory = reference_inventory();
        let assignment = partition(&inventory, &reference_rules());
        let workloads: Vec<NormalizedWorkload> =
            inventory.servers.iter().map(normalized_workload).collect();
        let plan = plan(
            &assignment,
            &workloads,
            &ConsolidationRatios::default(),
            &UtilizationTargets::default(),
            &PowerCurve::default(),
            PlanMode::Packed,
        )
        .unwrap();

        let mut placed: Vec<&str> = Vec::new();
        for pool in &plan.pools {
            let placement = plan_placement(pool);
            for host in placement {
                assert!(host.load <= pool.target_utilization * host.capacity * (1.0 + 1e-9));
                placed.extend(host.guests.iter().map(|g| g.as_str()));
            }
        }
        placed.sort_unstable();
        let mut expected: Vec<&str> =
            inventory.servers.iter().map(|r| r.id.as_str()).collect();
        expected.sort_unstable();
        assert_eq!(placed, expected);
        assert!(plan.total_host_count < inventory.len());
    }

    fn plan_placement(pool: &PoolPlan) -> &[HostPlacement] {
        pool.placement.as_deref().expect("packed plans carry placements")
    }

    #[test]
    fn packed_pool_of_fifteen_small_servers_collapses_to_one_host() {
        let inventory = Inventory::new(
            (0..15).map(|i| record(&format!("s{i:02}"), 0.03)).collect(),
            "gen",
        );
        let assignment = partition(&inventory, &reference_rules());
        let workloads: Vec<NormalizedWorkload> =
            inventory.servers.iter().map(normalized_workload).collect();
        let plan = plan(
            &assignment,
            &workloads,
            &ConsolidationRatios::default(),
            &UtilizationTargets::default(),
            &PowerCurve::default(),
            PlanMode::Packed,
        )
        .unwrap();
        let innovation = plan.pool(Pool::Innovation);
        assert_eq!(innovation.host_count, 1);
        assert_eq!(innovation.ratio, 15.0);
        assert!((innovation.post_utilization - 0.45).abs() < 1e-9);
    }

    #[test]
    fn plan_rejects_mismatched_workloads() {
        let inventory = Inventory::new(vec![record("s1", 0.4)], "gen");
        let assignment = partition(&inventory, &reference_rules());
        let workloads = vec![load("other", 0.1)];
        let err = plan(
            &assignment,
            &workloads,
            &ConsolidationRatios::default(),
            &UtilizationTargets::default(),
            &PowerCurve::default(),
            PlanMode::FixedRatio,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn plan_config_parses_partial_documents() {
        let full = r#"{"ratios":{"innovation":15,"production":10,"mission_critical":5},
            "targets":{"innovation":0.5,"production":[0.25,0.5],"mission_critical":[0.25,0.3]}}"#;
        let config = PlanConfig::from_json(full).unwrap();
        assert_eq!(config.ratios.unwrap(), ConsolidationRatios::default());
        assert_eq!(config.targets.unwrap(), UtilizationTargets::default());

        let ratios_only = r#"{"ratios":{"innovation":4,"production":3,"mission_critical":2}}"#;
        let config = PlanConfig::from_json(ratios_only).unwrap();
        assert!(config.targets.is_none());
        assert_eq!(config.ratios.unwrap().innovation, 4);

        assert!(PlanConfig::from_json("{}").unwrap().ratios.is_none());
    }

    #[test]
    fn plan_config_rejects_invalid_sections() {
        let zero_ratio = r#"{"ratios":{"innovation":0,"production":10,"mission_critical":5}}"#;
        assert!(PlanConfig::from_json(zero_ratio).is_err());
        let inverted = r#"{"targets":{"innovation":0.5,"production":[0.6,0.5],"mission_critical":[0.25,0.3]}}"#;
        assert!(PlanConfig::from_json(inverted).is_err());
    }

    #[test]
    fn targets_upper_bounds_drive_packing() {
        let targets = UtilizationTargets::default();
        assert_eq!(targets.target_for(Pool::Innovation), 0.50);
        assert_eq!(targets.target_for(Pool::Production), 0.50);
        assert_eq!(targets.target_for(Pool::MissionCritical), 0.30);
    }
}
