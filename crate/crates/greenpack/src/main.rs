use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use greenpack::{
    classify, consolidate, parse_inventory, parse_inventory_lenient, partition, render,
    run_pipeline, ClassificationRules, EmissionFactor, EnergyModel, Error, Inventory,
    InventoryFormat, OutputFormat, PipelineOptions, PlanMode, PowerCurve, Result,
    DEFAULT_DEAD_THRESHOLD, DEFAULT_HOURS_PER_YEAR,
};

#[derive(Parser)]
#[command(
    name = "greenpack",
    version,
    about = "Server consolidation planning and energy accounting",
    long_about = "Reads a data-center server inventory, sorts servers into resource pools, \
                  plans their consolidation onto fewer hosts, and reports the energy and \
                  CO2 savings."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check an inventory file and report every invariant violation.
    Validate {
        #[command(flatten)]
        inventory: InventoryArgs,
    },
    /// Assign every server to a resource pool.
    Classify {
        #[command(flatten)]
        inventory: InventoryArgs,
        /// Classification rules file (JSON); built-in keyword rules when
        /// omitted.
        #[arg(long, value_name = "PATH")]
        rules: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutArg::Json)]
        out: OutArg,
    },
    /// Produce a consolidation plan without the energy report.
    Plan {
        #[command(flatten)]
        inventory: InventoryArgs,
        #[command(flatten)]
        planning: PlanningArgs,
        #[arg(long, value_enum, default_value_t = OutArg::Json)]
        out: OutArg,
    },
    /// Run the full pipeline and report energy and CO2 savings.
    Report {
        #[command(flatten)]
        inventory: InventoryArgs,
        #[command(flatten)]
        planning: PlanningArgs,
        /// Pre-consolidation accounting: flat per-server watts (`paper`) or
        /// per-server curve evaluation (`curve`). Defaults to the model
        /// paired with the plan mode.
        #[arg(long, value_enum, value_name = "MODEL")]
        energy_model: Option<EnergyModelArg>,
        /// Grid carbon intensity in kg CO2 per kWh.
        #[arg(long, value_name = "F", default_value_t = 0.5, value_parser = parse_nonneg)]
        emission_factor: f64,
        /// Accounting period in hours.
        #[arg(long, value_name = "H", default_value_t = DEFAULT_HOURS_PER_YEAR, value_parser = parse_nonneg)]
        hours: f64,
        /// Utilization below which a server counts as dead.
        #[arg(long, value_name = "T", default_value_t = DEFAULT_DEAD_THRESHOLD, value_parser = parse_fraction)]
        dead_threshold: f64,
        #[arg(long, value_enum, default_value_t = OutArg::Text)]
        out: OutArg,
    },
    /// Evaluate the power curve at one utilization.
    Power {
        /// Utilization to evaluate, as a fraction in [0, 1].
        #[arg(long, value_name = "U", value_parser = parse_fraction)]
        utilization: f64,
        /// Power curve file (JSON); built-in curve when omitted.
        #[arg(long, value_name = "PATH")]
        power_curve: Option<PathBuf>,
    },
    /// List servers running below the dead threshold.
    Dead {
        #[command(flatten)]
        inventory: InventoryArgs,
        /// Utilization below which a server counts as dead.
        #[arg(long, value_name = "T", default_value_t = DEFAULT_DEAD_THRESHOLD, value_parser = parse_fraction)]
        dead_threshold: f64,
        #[arg(long, value_enum, default_value_t = OutArg::Text)]
        out: OutArg,
    },
}

#[derive(Args)]
struct InventoryArgs {
    /// Inventory file (CSV or JSON).
    #[arg(long, value_name = "PATH")]
    inventory: PathBuf,
    /// Inventory format; inferred from the file extension when omitted.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Args)]
struct PlanningArgs {
    /// Classification rules file (JSON); built-in keyword rules when omitted.
    #[arg(long, value_name = "PATH")]
    rules: Option<PathBuf>,
    /// Config file supplying the `ratios` section.
    #[arg(long, value_name = "PATH")]
    ratios: Option<PathBuf>,
    /// Config file supplying the `targets` section.
    #[arg(long, value_name = "PATH")]
    targets: Option<PathBuf>,
    /// Power curve file (JSON); built-in curve when omitted.
    #[arg(long, value_name = "PATH")]
    power_curve: Option<PathBuf>,
    /// Planning strategy.
    #[arg(long, value_enum, default_value_t = ModeArg::Fixed)]
    mode: ModeArg,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    /// Collapse each pool by its configured integer ratio.
    Fixed,
    /// Pack each pool's workloads onto its own largest machines.
    Packed,
}

impl From<ModeArg> for PlanMode {
    fn from(mode: ModeArg) -> Self {
        match mode {
            ModeArg::Fixed => PlanMode::FixedRatio,
            ModeArg::Packed => PlanMode::Packed,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EnergyModelArg {
    Paper,
    Curve,
}

impl From<EnergyModelArg> for EnergyModel {
    fn from(model: EnergyModelArg) -> Self {
        match model {
            EnergyModelArg::Paper => EnergyModel::Rated,
            EnergyModelArg::Curve => EnergyModel::Curve,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutArg {
    Text,
    Csv,
    Json,
}

impl From<OutArg> for OutputFormat {
    fn from(out: OutArg) -> Self {
        match out {
            OutArg::Text => OutputFormat::Text,
            OutArg::Csv => OutputFormat::Csv,
            OutArg::Json => OutputFormat::Json,
        }
    }
}

fn parse_fraction(s: &str) -> std::result::Result<f64, String> {
    let value: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if !value.is_finite() || !(0.0..=1.0).contains(&value) {
        return Err(format!("`{s}` must be in [0.0, 1.0]"));
    }
    Ok(value)
}

fn parse_nonneg(s: &str) -> std::result::Result<f64, String> {
    let value: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if !value.is_finite() || value < 0.0 {
        return Err(format!("`{s}` must be non-negative"));
    }
    Ok(value)
}

fn main() -> ExitCode {
    // Die quietly like other line-oriented tools when a downstream pipe
    // closes early, instead of panicking on the failed write.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                // Ambiguous or unknown format choices are usage errors; every
                // other failure is a data problem.
                Error::UnknownFormat(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::domain(format!("cannot read `{}`: {e}", path.display())))
}

fn resolve_format(args: &InventoryArgs) -> Result<InventoryFormat> {
    match args.format {
        Some(FormatArg::Csv) => Ok(InventoryFormat::Csv),
        Some(FormatArg::Json) => Ok(InventoryFormat::Json),
        None => {
            let extension = args
                .inventory
                .extension()
                .and_then(|e| e.to_str())
                .map(str::to_lowercase);
            match extension.as_deref() {
                Some("csv") => Ok(InventoryFormat::Csv),
                Some("json") => Ok(InventoryFormat::Json),
                _ => Err(Error::UnknownFormat(format!(
                    "cannot infer inventory format from `{}`; pass --format",
                    args.inventory.display()
                ))),
            }
        }
    }
}

fn load_inventory(args: &InventoryArgs) -> Result<Inventory> {
    let format = resolve_format(args)?;
    let text = read_file(&args.inventory)?;
    let mut inventory = parse_inventory(&text, format)?;
    inventory.source = args.inventory.display().to_string();
    Ok(inventory)
}

fn load_rules(path: &Option<PathBuf>) -> Result<ClassificationRules> {
    match path {
        Some(path) => ClassificationRules::from_json(&read_file(path)?),
        None => Ok(ClassificationRules::default()),
    }
}

fn load_curve(path: &Option<PathBuf>) -> Result<PowerCurve> {
    match path {
        Some(path) => PowerCurve::from_json(&read_file(path)?),
        None => Ok(PowerCurve::default()),
    }
}

fn pipeline_options(planning: &PlanningArgs) -> Result<PipelineOptions> {
    let mut options = PipelineOptions {
        rules: load_rules(&planning.rules)?,
        curve: load_curve(&planning.power_curve)?,
        mode: planning.mode.into(),
        ..PipelineOptions::default()
    };
    if let Some(path) = &planning.ratios {
        options.ratios = consolidate::PlanConfig::from_json(&read_file(path)?)
            .and_then(|config| {
                config.ratios.ok_or_else(|| {
                    Error::domain(format!("no `ratios` section in `{}`", path.display()))
                })
            })?;
    }
    if let Some(path) = &planning.targets {
        options.targets = consolidate::PlanConfig::from_json(&read_file(path)?)
            .and_then(|config| {
                config.targets.ok_or_else(|| {
                    Error::domain(format!("no `targets` section in `{}`", path.display()))
                })
            })?;
    }
    Ok(options)
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Validate { inventory } => cmd_validate(&inventory),
        Command::Classify {
            inventory,
            rules,
            out,
        } => cmd_classify(&inventory, &rules, out),
        Command::Plan {
            inventory,
            planning,
            out,
        } => cmd_plan(&inventory, &planning, out),
        Command::Report {
            inventory,
            planning,
            energy_model,
            emission_factor,
            hours,
            dead_threshold,
            out,
        } => cmd_report(
            &inventory,
            &planning,
            energy_model,
            emission_factor,
            hours,
            dead_threshold,
            out,
        ),
        Command::Power {
            utilization,
            power_curve,
        } => cmd_power(utilization, &power_curve),
        Command::Dead {
            inventory,
            dead_threshold,
            out,
        } => cmd_dead(&inventory, dead_threshold, out),
    }
}

fn cmd_validate(args: &InventoryArgs) -> Result<ExitCode> {
    let format = resolve_format(args)?;
    let text = read_file(&args.inventory)?;
    let inventory = parse_inventory_lenient(&text, format)?;
    let violations = inventory.validate();
    if violations.is_empty() {
        println!("ok: {} server(s) valid", inventory.len());
        return Ok(ExitCode::SUCCESS);
    }
    for violation in &violations {
        println!("{violation}");
    }
    eprintln!(
        "error: {} validation failure(s) in `{}`",
        violations.len(),
        args.inventory.display()
    );
    Ok(ExitCode::from(1))
}

fn cmd_classify(args: &InventoryArgs, rules: &Option<PathBuf>, out: OutArg) -> Result<ExitCode> {
    let inventory = load_inventory(args)?;
    let rules = load_rules(rules)?;
    let assignment = partition(&inventory, &rules);
    match out {
        OutArg::Json => println!("{}", serde_json::to_string_pretty(&assignment)?),
        OutArg::Csv => {
            println!("id,pool");
            for (id, pool) in &assignment.assignments {
                println!("{id},{}", pool.wire_label());
            }
        }
        OutArg::Text => {
            for pool in classify::Pool::ALL {
                let stats = assignment.stats(pool);
                println!(
                    "{}: {} server(s), mean utilization {}",
                    pool.label(),
                    stats.count,
                    greenpack::util::fmt_percent_trim(stats.mean_utilization)
                );
            }
            for (id, pool) in &assignment.assignments {
                println!("{id}\t{}", pool.wire_label());
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_plan(args: &InventoryArgs, planning: &PlanningArgs, out: OutArg) -> Result<ExitCode> {
    let inventory = load_inventory(args)?;
    let options = pipeline_options(planning)?;
    let assignment = partition(&inventory, &options.rules);
    let workloads: Vec<_> = inventory
        .servers
        .iter()
        .map(consolidate::normalized_workload)
        .collect();
    let plan = consolidate::plan(
        &assignment,
        &workloads,
        &options.ratios,
        &options.targets,
        &options.curve,
        options.mode,
    )?;
    match out {
        OutArg::Json => println!("{}", serde_json::to_string_pretty(&plan)?),
        OutArg::Csv => {
            println!(
                "pool,server_count,host_count,ratio,target_utilization,post_utilization,\
                 post_per_server_watts,post_total_watts"
            );
            for pool in &plan.pools {
                println!(
                    "{},{},{},{},{},{},{},{}",
                    pool.pool.wire_label(),
                    pool.server_count,
                    pool.host_count,
                    pool.ratio,
                    pool.target_utilization,
                    pool.post_utilization,
                    pool.post_per_server_watts,
                    pool.post_total_watts
                );
            }
            println!(
                "total,{},{},{},,{},,{}",
                plan.total_server_count,
                plan.total_host_count,
                plan.total_ratio,
                plan.total_post_utilization,
                plan.total_watts
            );
        }
        OutArg::Text => {
            for pool in &plan.pools {
                println!(
                    "{}: {} server(s) -> {} host(s) ({}:1), {} W",
                    pool.pool.label(),
                    pool.server_count,
                    pool.host_count,
                    greenpack::util::fmt_trim1(pool.ratio),
                    greenpack::util::fmt_num(pool.post_total_watts)
                );
            }
            println!(
                "Total: {} server(s) -> {} host(s) ({}:1), {} W",
                plan.total_server_count,
                plan.total_host_count,
                greenpack::util::fmt_trim1(plan.total_ratio),
                greenpack::util::fmt_num(plan.total_watts)
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn cmd_report(
    args: &InventoryArgs,
    planning: &PlanningArgs,
    energy_model: Option<EnergyModelArg>,
    emission_factor: f64,
    hours: f64,
    dead_threshold: f64,
    out: OutArg,
) -> Result<ExitCode> {
    let inventory = load_inventory(args)?;
    let mut options = pipeline_options(planning)?;
    options.energy_model = energy_model.map(EnergyModel::from);
    options.emission_factor = EmissionFactor::new(emission_factor)?;
    options.hours_per_year = hours;
    options.dead_threshold = dead_threshold;
    let report = run_pipeline(&inventory, &options)?;
    print!("{}", render(&report, out.into())?);
    Ok(ExitCode::SUCCESS)
}

fn cmd_power(utilization: f64, power_curve: &Option<PathBuf>) -> Result<ExitCode> {
    let curve = load_curve(power_curve)?;
    let watts = curve.power_at(utilization)?;
    println!("{}", greenpack::util::fmt_num(watts));
    Ok(ExitCode::SUCCESS)
}

fn cmd_dead(args: &InventoryArgs, threshold: f64, out: OutArg) -> Result<ExitCode> {
    let inventory = load_inventory(args)?;
    let dead = inventory.identify_dead(threshold);
    match out {
        OutArg::Json => println!("{}", serde_json::to_string_pretty(&dead)?),
        OutArg::Csv => {
            println!("id");
            for id in dead {
                println!("{id}");
            }
        }
        OutArg::Text => {
            for id in dead {
                println!("{id}");
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
