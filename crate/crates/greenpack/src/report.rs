//! Pre/post consolidation energy reports and their text, CSV, and JSON
//! renderings, plus the one-call pipeline the CLI drives.

use serde::{Deserialize, Serialize};

use crate::classify::{partition, ClassificationRules, Pool, PoolAssignment};
use crate::consolidate::{
    normalized_workload, plan, ConsolidationPlan, ConsolidationRatios, PlanMode,
    UtilizationTargets,
};
use crate::error::{Error, Result};
use crate::inventory::Inventory;
use crate::power::{annual_energy, co2_mass, EmissionFactor, PowerCurve};
use crate::util;

/// Hours in a non-leap year: the default accounting period for a machine
/// that never powers down.
pub const DEFAULT_HOURS_PER_YEAR: f64 = 8760.0;

/// Default utilization floor below which a server counts as dead.
pub const DEFAULT_DEAD_THRESHOLD: f64 = 0.005;

/// How pre-consolidation power is accounted.
///
/// `Rated` bills every server flat at the curve's lowest-anchor draw, the
/// accounting that treats all under-utilized machines alike. `Curve`
/// evaluates each server's own utilization through the power curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnergyModel {
    #[serde(rename = "paper")]
    Rated,
    #[serde(rename = "curve")]
    Curve,
}

impl EnergyModel {
    /// The model each plan mode pairs with: fixed-ratio plans use flat rated
    /// accounting, packed plans use per-server curve evaluation.
    pub fn default_for(mode: PlanMode) -> Self {
        match mode {
            PlanMode::FixedRatio => EnergyModel::Rated,
            PlanMode::Packed => EnergyModel::Curve,
        }
    }
}

impl std::fmt::Display for EnergyModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EnergyModel::Rated => f.write_str("paper"),
            EnergyModel::Curve => f.write_str("curve"),
        }
    }
}

/// One row of the energy report: the before/after figures for a pool or for
/// the whole fleet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub pre_count: usize,
    pub pre_utilization: f64,
    pub pre_watts: f64,
    pub ratio: f64,
    pub post_host_count: usize,
    /// The utilization the plan aims hosts at.
    pub post_utilization_stated: f64,
    /// The utilization hosts arithmetically reach: load over host capacity.
    pub post_utilization_computed: f64,
    pub post_watts: f64,
    pub saving_watts: f64,
    /// Fraction of the pre-consolidation draw saved; 0.0 when pre_watts is 0.
    pub saving_percent: f64,
}

/// A report row tagged with its pool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolReport {
    pub pool: Pool,
    #[serde(flatten)]
    pub row: ReportRow,
}

/// The full consolidation energy report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub mode: PlanMode,
    pub energy_model: EnergyModel,
    pub hours_per_year: f64,
    pub emission_factor_kg_per_kwh: f64,
    pub dead_threshold: f64,
    /// Pool rows in canonical order: Innovation, Production, MissionCritical.
    pub pools: Vec<PoolReport>,
    /// Fleet-wide row; watt figures are exact sums of the pool rows.
    pub total: ReportRow,
    pub annual_kwh_saved: f64,
    pub co2_kg_saved: f64,
    pub dead_server_ids: Vec<String>,
}

impl EnergyReport {
    pub fn pool(&self, pool: Pool) -> &ReportRow {
        &self
            .pools
            .iter()
            .find(|p| p.pool == pool)
            .expect("report holds all three pools")
            .row
    }
}

/// Assemble the energy report for a plan.
///
/// Under the rated model each pre-consolidation server is billed flat at the
/// curve's base watts; under the curve model each server's own utilization is
/// evaluated through the curve. Post figures come from the plan unchanged,
/// and the total row sums the pool rows rather than recomputing anything.
#[allow(clippy::too_many_arguments)]
pub fn build_report(
    inventory: &Inventory,
    assignment: &PoolAssignment,
    plan: &ConsolidationPlan,
    curve: &PowerCurve,
    energy_model: EnergyModel,
    emission_factor: EmissionFactor,
    hours_per_year: f64,
    dead_threshold: f64,
) -> Result<EnergyReport> {
    let mut pools = Vec::with_capacity(Pool::ALL.len());
    for pool_plan in &plan.pools {
        let pool = pool_plan.pool;
        let stats = assignment.stats(pool);
        let pre_watts = match energy_model {
            EnergyModel::Rated => stats.count as f64 * curve.base_watts(),
            EnergyModel::Curve => {
                let mut per_server = Vec::with_capacity(stats.count);
                for record in &inventory.servers {
                    if assignment.assignments.get(&record.id) == Some(&pool) {
                        per_server.push(curve.power_at(record.utilization)?);
                    }
                }
                util::kahan_sum(per_server)
            }
        };
        let post_watts = pool_plan.post_total_watts;
        let saving_watts = pre_watts - post_watts;
        pools.push(PoolReport {
            pool,
            row: ReportRow {
                pre_count: stats.count,
                pre_utilization: stats.mean_utilization,
                pre_watts,
                ratio: pool_plan.ratio,
                post_host_count: pool_plan.host_count,
                post_utilization_stated: pool_plan.target_utilization,
                post_utilization_computed: pool_plan.post_utilization,
                post_watts,
                saving_watts,
                saving_percent: if pre_watts > 0.0 {
                    saving_watts / pre_watts
                } else {
                    0.0
                },
            },
        });
    }

    let pre_count = pools.iter().map(|p| p.row.pre_count).sum::<usize>();
    let pre_watts = util::kahan_sum(pools.iter().map(|p| p.row.pre_watts));
    let post_watts = util::kahan_sum(pools.iter().map(|p| p.row.post_watts));
    let saving_watts = pre_watts - post_watts;
    let host_count = plan.total_host_count;
    let total = ReportRow {
        pre_count,
        // Count-weighted mean utilization across pools.
        pre_utilization: if pre_count == 0 {
            0.0
        } else {
            util::kahan_sum(
                pools
                    .iter()
                    .map(|p| p.row.pre_utilization * p.row.pre_count as f64),
            ) / pre_count as f64
        },
        pre_watts,
        ratio: plan.total_ratio,
        post_host_count: host_count,
        // Host-count-weighted mean of the per-pool targets.
        post_utilization_stated: if host_count == 0 {
            0.0
        } else {
            util::kahan_sum(
                pools
                    .iter()
                    .map(|p| p.row.post_utilization_stated * p.row.post_host_count as f64),
            ) / host_count as f64
        },
        post_utilization_computed: plan.total_post_utilization,
        post_watts,
        saving_watts,
        saving_percent: if pre_watts > 0.0 {
            saving_watts / pre_watts
        } else {
            0.0
        },
    };

    let annual_kwh_saved = annual_energy(total.saving_watts, hours_per_year);
    Ok(EnergyReport {
        mode: plan.mode,
        energy_model,
        hours_per_year,
        emission_factor_kg_per_kwh: emission_factor.0,
        dead_threshold,
        pools,
        total,
        annual_kwh_saved,
        co2_kg_saved: co2_mass(annual_kwh_saved, emission_factor),
        dead_server_ids: inventory
            .identify_dead(dead_threshold)
            .into_iter()
            .map(str::to_string)
            .collect(),
    })
}

/// Report output encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Text,
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(OutputFormat::Text),
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::UnknownFormat(other.to_string())),
        }
    }
}

/// Render a report. Text output mirrors the two-table pre/post layout; CSV
/// and JSON are lossless encodings. Identical reports render byte-identically.
pub fn render(report: &EnergyReport, format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Text => Ok(render_text(report)),
        OutputFormat::Csv => render_csv(report),
        OutputFormat::Json => {
            let mut out = serde_json::to_string_pretty(report)?;
            out.push('\n');
            Ok(out)
        }
    }
}

fn render_text(report: &EnergyReport) -> String {
    use std::fmt::Write;

    let mut out = String::new();
    let cols = |label: &str, cells: [String; 4]| {
        format!(
            "{label:<26}{:>14}{:>14}{:>18}{:>12}\n",
            cells[0], cells[1], cells[2], cells[3]
        )
    };
    let per_pool = |f: &dyn Fn(&ReportRow) -> String| -> [String; 4] {
        [
            f(report.pool(Pool::Innovation)),
            f(report.pool(Pool::Production)),
            f(report.pool(Pool::MissionCritical)),
            f(&report.total),
        ]
    };
    let header = [
        "Innovation".to_string(),
        "Production".to_string(),
        "Mission Critical".to_string(),
        "Total".to_string(),
    ];

    out.push_str("Pre-consolidation\n");
    out.push_str(&cols("Category", header.clone()));
    out.push_str(&cols(
        "Server count",
        per_pool(&|r| r.pre_count.to_string()),
    ));
    out.push_str(&cols(
        "Utilization",
        per_pool(&|r| util::fmt_percent_trim(r.pre_utilization)),
    ));
    out.push_str(&cols(
        "Watts",
        per_pool(&|r| util::fmt_num(r.pre_watts)),
    ));

    out.push_str("\nPost-consolidation\n");
    out.push_str(&cols("Category", header));
    out.push_str(&cols(
        "Consolidation ratio",
        per_pool(&|r| format!("{}:1", util::fmt_trim1(r.ratio))),
    ));
    out.push_str(&cols(
        "Host count",
        per_pool(&|r| r.post_host_count.to_string()),
    ));
    out.push_str(&cols(
        "Target utilization",
        per_pool(&|r| util::fmt_percent_trim(r.post_utilization_stated)),
    ));
    out.push_str(&cols(
        "Achieved utilization",
        per_pool(&|r| util::fmt_percent_trim(r.post_utilization_computed)),
    ));
    out.push_str(&cols(
        "Watts",
        per_pool(&|r| util::fmt_num(r.post_watts)),
    ));
    out.push_str(&cols(
        "Energy saving (watts)",
        per_pool(&|r| util::fmt_num(r.saving_watts)),
    ));
    out.push_str(&cols(
        "Energy saving",
        per_pool(&|r| util::fmt_percent(r.saving_percent)),
    ));

    let _ = write!(
        out,
        "\nAnnual saving: {} kWh over {} h\n\
         CO2 avoided: {} kg at {} kg/kWh\n",
        util::fmt_num(report.annual_kwh_saved),
        util::fmt_num(report.hours_per_year),
        util::fmt_num(report.co2_kg_saved),
        report.emission_factor_kg_per_kwh,
    );
    if report.dead_server_ids.is_empty() {
        let _ = writeln!(
            out,
            "Dead servers (utilization < {}): none",
            util::fmt_percent_trim(report.dead_threshold)
        );
    } else {
        let _ = writeln!(
            out,
            "Dead servers (utilization < {}): {}",
            util::fmt_percent_trim(report.dead_threshold),
            report.dead_server_ids.join(", ")
        );
    }
    out
}

fn render_csv(report: &EnergyReport) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let to_io = |e: csv::Error| Error::parse("csv output", e.to_string());
    writer
        .write_record([
            "pool",
            "pre_count",
            "pre_utilization",
            "pre_watts",
            "ratio",
            "post_host_count",
            "post_utilization_stated",
            "post_utilization_computed",
            "post_watts",
            "saving_watts",
            "saving_percent",
            "mode",
            "energy_model",
            "hours_per_year",
            "emission_factor_kg_per_kwh",
            "dead_threshold",
            "annual_kwh_saved",
            "co2_kg_saved",
            "dead_server_ids",
        ])
        .map_err(to_io)?;
    let row_cells = |row: &ReportRow| {
        [
            row.pre_count.to_string(),
            row.pre_utilization.to_string(),
            row.pre_watts.to_string(),
            row.ratio.to_string(),
            row.post_host_count.to_string(),
            row.post_utilization_stated.to_string(),
            row.post_utilization_computed.to_string(),
            row.post_watts.to_string(),
            row.saving_watts.to_string(),
            row.saving_percent.to_string(),
        ]
    };
    for pool in &report.pools {
        let mut record = vec![pool.pool.wire_label().to_string()];
        record.extend(row_cells(&pool.row));
        record.extend(["", "", "", "", "", "", "", ""].map(str::to_string));
        writer.write_record(&record).map_err(to_io)?;
    }
    let mut record = vec!["total".to_string()];
    record.extend(row_cells(&report.total));
    record.push(report.mode.to_string());
    record.push(report.energy_model.to_string());
    record.push(report.hours_per_year.to_string());
    record.push(report.emission_factor_kg_per_kwh.to_string());
    record.push(report.dead_threshold.to_string());
    record.push(report.annual_kwh_saved.to_string());
    record.push(report.co2_kg_saved.to_string());
    record.push(report.dead_server_ids.join(";"));
    writer.write_record(&record).map_err(to_io)?;

    let bytes = writer
        .into_inner()
        .map_err(|e| Error::parse("csv output", e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::parse("csv output", e.to_string()))
}

/// Everything the pipeline needs besides the inventory itself. `Default`
/// gives the stock configuration: built-in rules, 15/10/5 ratios, standard
/// targets, the built-in curve, fixed-ratio mode with its paired energy
/// model, 0.5 kg/kWh, 8760 h, 0.5% dead threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOptions {
    pub rules: ClassificationRules,
    pub ratios: ConsolidationRatios,
    pub targets: UtilizationTargets,
    pub curve: PowerCurve,
    pub mode: PlanMode,
    /// `None` picks the model paired with the plan mode.
    pub energy_model: Option<EnergyModel>,
    pub emission_factor: EmissionFactor,
    pub hours_per_year: f64,
    pub dead_threshold: f64,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            rules: ClassificationRules::default(),
            ratios: ConsolidationRatios::default(),
            targets: UtilizationTargets::default(),
            curve: PowerCurve::default(),
            mode: PlanMode::FixedRatio,
            energy_model: None,
            emission_factor: EmissionFactor::default(),
            hours_per_year: DEFAULT_HOURS_PER_YEAR,
            dead_threshold: DEFAULT_DEAD_THRESHOLD,
        }
    }
}

/// Classify, plan, and report in one call.
pub fn run_pipeline(inventory: &Inventory, options: &PipelineOptions) -> Result<EnergyReport> {
    let assignment = partition(inventory, &options.rules);
    let workloads: Vec<_> = inventory.servers.iter().map(normalized_workload).collect();
    let consolidation = plan(
        &assignment,
        &workloads,
        &options.ratios,
        &options.targets,
        &options.curve,
        options.mode,
    )?;
    let energy_model = options
        .energy_model
        .unwrap_or_else(|| EnergyModel::default_for(options.mode));
    build_report(
        inventory,
        &assignment,
        &consolidation,
        &options.curve,
        energy_model,
        options.emission_factor,
        options.hours_per_year,
        options.dead_threshold,
    )
}
