//! Consolidation planning for over-provisioned server fleets.
//!
//! The pipeline ingests a server inventory (CSV or JSON), sorts servers into
//! three resource pools, normalizes their workloads, collapses each pool onto
//! fewer hosts (by fixed ratios or first-fit-decreasing packing against
//! utilization targets), and reports the electrical and CO2 savings through a
//! configurable utilization-to-watts curve.
//!
//! ```
//! use greenpack::{parse_inventory, run_pipeline, InventoryFormat, PipelineOptions};
//!
//! let csv = "\
//! id,make_model,sockets,cores_per_socket,threads_per_core,cache_mb,memory_gb,\
//! memory_speed_mhz,network_ports,port_speed_gbps,disk_count,disk_capacity_gb,\
//! raid_level,os_name,patch_level,applications,services,utilization,status,peak_efficiency
//! s1,DellR740,2,4,2,25,64,2933,4,10,2,960,1,linux,p1,\"db\",\"sqld\",0.03,active,1.0
//! ";
//! let inventory = parse_inventory(csv, InventoryFormat::Csv)?;
//! let report = run_pipeline(&inventory, &PipelineOptions::default())?;
//! assert_eq!(report.total.pre_watts, 173.0);
//! # Ok::<(), greenpack::Error>(())
//! ```

pub mod classify;
pub mod consolidate;
pub mod error;
pub mod inventory;
pub mod power;
pub mod report;
pub mod util;

pub use classify::{
    classify_application, classify_application_with, classify_pool, classify_role, partition,
    ApplicationCategory, ClassificationRules, Pool, PoolAssignment, PoolStats, Rule, RuleField,
    RuleOp, RuleValue, ServerRole,
};
pub use consolidate::{
    derive_ratio, fixed_ratio_consolidate, normalized_workload, pack_first_fit_decreasing,
    pack_into_host_machines, plan, ConsolidationPlan, ConsolidationRatios, FixedRatioOutcome,
    HostPlacement, NormalizedWorkload, PlanConfig, PlanMode, PoolPlan, UtilizationTargets,
};
pub use error::{Error, Result, Violation};
pub use inventory::{
    parse_inventory, parse_inventory_lenient, serialize_inventory, Inventory, InventoryFormat,
    RaidLevel, ServerRecord, Status,
};
pub use power::{
    annual_energy, co2_mass, performance_to_power, pool_energy, EmissionFactor, EnergyFigure,
    PowerAnchor, PowerCurve,
};
pub use report::{
    build_report, render, run_pipeline, EnergyModel, EnergyReport, OutputFormat, PipelineOptions,
    PoolReport, ReportRow, DEFAULT_DEAD_THRESHOLD, DEFAULT_HOURS_PER_YEAR,
};
