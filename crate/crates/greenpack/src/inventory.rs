//! Server inventory: the schema produced by a discovery pass over a data
//! center, plus parsing, validation, and dead-server detection.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};

/// Column order of the CSV interchange format. The header row is required
/// and must match exactly.
pub const CSV_HEADER: [&str; 20] = [
    "id",
    "make_model",
    "sockets",
    "cores_per_socket",
    "threads_per_core",
    "cache_mb",
    "memory_gb",
    "memory_speed_mhz",
    "network_ports",
    "port_speed_gbps",
    "disk_count",
    "disk_capacity_gb",
    "raid_level",
    "os_name",
    "patch_level",
    "applications",
    "services",
    "utilization",
    "status",
    "peak_efficiency",
];

/// Whether the server was seen doing work at discovery time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Active,
    Idle,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Active => f.write_str("active"),
            Status::Idle => f.write_str("idle"),
        }
    }
}

impl FromStr for Status {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "active" => Ok(Status::Active),
            "idle" => Ok(Status::Idle),
            other => Err(format!("expected `active` or `idle`, got `{other}`")),
        }
    }
}

/// RAID level of the local disk set, when any is configured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RaidLevel {
    #[serde(rename = "none")]
    None,
    #[serde(rename = "0")]
    Raid0,
    #[serde(rename = "1")]
    Raid1,
    #[serde(rename = "5")]
    Raid5,
    #[serde(rename = "6")]
    Raid6,
    #[serde(rename = "10")]
    Raid10,
}

impl fmt::Display for RaidLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RaidLevel::None => "none",
            RaidLevel::Raid0 => "0",
            RaidLevel::Raid1 => "1",
            RaidLevel::Raid5 => "5",
            RaidLevel::Raid6 => "6",
            RaidLevel::Raid10 => "10",
        };
        f.write_str(s)
    }
}

impl FromStr for RaidLevel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "none" => Ok(RaidLevel::None),
            "0" => Ok(RaidLevel::Raid0),
            "1" => Ok(RaidLevel::Raid1),
            "5" => Ok(RaidLevel::Raid5),
            "6" => Ok(RaidLevel::Raid6),
            "10" => Ok(RaidLevel::Raid10),
            other => Err(format!(
                "expected one of none, 0, 1, 5, 6, 10, got `{other}`"
            )),
        }
    }
}

fn default_peak_efficiency() -> f64 {
    1.0
}

/// One inventoried physical server: hardware facts, software facts, and the
/// measured average processor utilization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServerRecord {
    pub id: String,
    pub make_model: String,
    pub sockets: u32,
    pub cores_per_socket: u32,
    pub threads_per_core: u32,
    pub cache_mb: f64,
    pub memory_gb: f64,
    pub memory_speed_mhz: f64,
    pub network_ports: u32,
    pub port_speed_gbps: f64,
    pub disk_count: u32,
    pub disk_capacity_gb: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raid_level: Option<RaidLevel>,
    pub os_name: String,
    pub patch_level: String,
    pub applications: Vec<String>,
    pub services: Vec<String>,
    /// Measured average processor utilization, as a fraction in [0, 1].
    pub utilization: f64,
    pub status: Status,
    /// Abstract capacity units delivered per core at 100% utilization.
    /// Defaults to 1.0, in which case capacity reduces to sockets x cores.
    #[serde(default = "default_peak_efficiency")]
    pub peak_efficiency: f64,
}

impl ServerRecord {
    /// Total processor capacity of this machine, in abstract capacity units:
    /// per-core peak efficiency x sockets x cores per socket.
    pub fn capacity_units(&self) -> f64 {
        self.peak_efficiency * self.sockets as f64 * self.cores_per_socket as f64
    }

    fn check(&self, out: &mut Vec<Violation>) {
        let id = &self.id;
        if id.is_empty() {
            out.push(Violation::new(id.clone(), "id", "id must be non-empty"));
        }
        if !(0.0..=1.0).contains(&self.utilization) || !self.utilization.is_finite() {
            out.push(Violation::new(
                id.clone(),
                "utilization",
                format!("must be in [0.0, 1.0], got {}", self.utilization),
            ));
        }
        if self.sockets < 1 {
            out.push(Violation::new(id.clone(), "sockets", "must be >= 1"));
        }
        if self.cores_per_socket < 1 {
            out.push(Violation::new(id.clone(), "cores_per_socket", "must be >= 1"));
        }
        if self.threads_per_core < 1 {
            out.push(Violation::new(id.clone(), "threads_per_core", "must be >= 1"));
        }
        if self.peak_efficiency <= 0.0 || !self.peak_efficiency.is_finite() {
            out.push(Violation::new(
                id.clone(),
                "peak_efficiency",
                format!("must be a positive number, got {}", self.peak_efficiency),
            ));
        }
        for (field, value) in [
            ("cache_mb", self.cache_mb),
            ("memory_gb", self.memory_gb),
            ("memory_speed_mhz", self.memory_speed_mhz),
            ("port_speed_gbps", self.port_speed_gbps),
            ("disk_capacity_gb", self.disk_capacity_gb),
        ] {
            if value < 0.0 || !value.is_finite() {
                out.push(Violation::new(
                    id.clone(),
                    field,
                    format!("must be a non-negative number, got {value}"),
                ));
            }
        }
    }
}

/// The full discovered server population, in stable input order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inventory {
    pub servers: Vec<ServerRecord>,
    /// Where the data came from (format label or file path).
    pub source: String,
}

/// Interchange format of an inventory document.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InventoryFormat {
    Csv,
    Json,
}

impl InventoryFormat {
    pub fn label(self) -> &'static str {
        match self {
            InventoryFormat::Csv => "csv",
            InventoryFormat::Json => "json",
        }
    }
}

impl FromStr for InventoryFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(InventoryFormat::Csv),
            "json" => Ok(InventoryFormat::Json),
            other => Err(Error::UnknownFormat(other.to_string())),
        }
    }
}

impl Inventory {
    pub fn new(servers: Vec<ServerRecord>, source: impl Into<String>) -> Self {
        Self {
            servers,
            source: source.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.servers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.servers.is_empty()
    }

    /// Collect every invariant violation in the inventory. Empty result means
    /// the inventory is valid. Duplicate-id checks flag the second and later
    /// occurrences.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for record in &self.servers {
            record.check(&mut out);
            if !seen.insert(record.id.as_str()) {
                out.push(Violation::new(
                    record.id.clone(),
                    "id",
                    "duplicate id within inventory",
                ));
            }
        }
        out
    }

    /// Ids of servers running below `threshold` utilization (strictly below,
    /// so a server sitting exactly at the threshold is not flagged), in input
    /// order. These are shutdown candidates rather than consolidation guests.
    pub fn identify_dead(&self, threshold: f64) -> Vec<&str> {
        self.servers
            .iter()
            .filter(|r| r.utilization < threshold)
            .map(|r| r.id.as_str())
            .collect()
    }
}

/// Parse an inventory document and enforce all record invariants.
///
/// Syntax problems report the offending line or record; invariant violations
/// name the record id and field; a repeated id is a dedicated error.
pub fn parse_inventory(text: &str, format: InventoryFormat) -> Result<Inventory> {
    let inventory = parse_inventory_lenient(text, format)?;
    let mut seen = std::collections::HashSet::new();
    for record in &inventory.servers {
        if !seen.insert(record.id.as_str()) {
            return Err(Error::DuplicateId(record.id.clone()));
        }
    }
    let mut violations = inventory.validate();
    violations.retain(|v| v.rule != "duplicate id within inventory");
    if !violations.is_empty() {
        return Err(Error::Invalid(violations));
    }
    Ok(inventory)
}

/// Parse syntax only, leaving invariant checks to [`Inventory::validate`].
/// This is what `validate`-style tooling uses to report all violations in a
/// broken file instead of stopping at the first.
pub fn parse_inventory_lenient(text: &str, format: InventoryFormat) -> Result<Inventory> {
    match format {
        InventoryFormat::Csv => parse_csv(text),
        InventoryFormat::Json => parse_json(text),
    }
}

/// Serialize an inventory back to one of the interchange formats. Round-trips
/// through [`parse_inventory`] to an equal `Inventory`.
pub fn serialize_inventory(inventory: &Inventory, format: InventoryFormat) -> Result<String> {
    match format {
        InventoryFormat::Csv => serialize_csv(inventory),
        InventoryFormat::Json => {
            let mut out = serde_json::to_string_pretty(&inventory.servers)?;
            out.push('\n');
            Ok(out)
        }
    }
}

fn parse_json(text: &str) -> Result<Inventory> {
    let servers: Vec<ServerRecord> = serde_json::from_str(text).map_err(|e| {
        Error::parse(
            format!("line {} column {}", e.line(), e.column()),
            e.to_string(),
        )
    })?;
    Ok(Inventory::new(servers, "json"))
}

fn parse_csv(text: &str) -> Result<Inventory> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(text.as_bytes());

    let headers = reader
        .headers()
        .map_err(|e| Error::parse("line 1", e.to_string()))?
        .clone();
    if headers.iter().collect::<Vec<_>>() != CSV_HEADER {
        return Err(Error::parse(
            "line 1",
            format!(
                "header mismatch: expected `{}`, got `{}`",
                CSV_HEADER.join(","),
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }

    let mut servers = Vec::new();
    for result in reader.records() {
        let record = result.map_err(|e| {
            let locus = match e.position() {
                Some(p) => format!("line {}", p.line()),
                None => "unknown line".to_string(),
            };
            Error::parse(locus, e.to_string())
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != CSV_HEADER.len() {
            return Err(Error::parse(
                format!("line {line}"),
                format!("expected {} fields, got {}", CSV_HEADER.len(), record.len()),
            ));
        }
        servers.push(record_from_csv(&record, line)?);
    }
    Ok(Inventory::new(servers, "csv"))
}

fn record_from_csv(record: &csv::StringRecord, line: u64) -> Result<ServerRecord> {
    let id = record.get(0).unwrap_or("").to_string();

    let field = |idx: usize| record.get(idx).unwrap_or("");
    let parse_with = |idx: usize, what: &str| -> Result<f64> {
        let raw = field(idx);
        raw.parse::<f64>().map_err(|_| {
            Error::parse(
                format!("line {line}"),
                format!(
                    "record `{id}`: field `{}`: invalid {what} `{raw}`",
                    CSV_HEADER[idx]
                ),
            )
        })
    };
    let parse_uint = |idx: usize| -> Result<u32> {
        let raw = field(idx);
        raw.parse::<u32>().map_err(|_| {
            Error::parse(
                format!("line {line}"),
                format!(
                    "record `{id}`: field `{}`: invalid integer `{raw}`",
                    CSV_HEADER[idx]
                ),
            )
        })
    };
    let parse_list = |idx: usize| -> Vec<String> {
        field(idx)
            .split(';')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect()
    };

    let raid_level = {
        let raw = field(12);
        if raw.is_empty() {
            None
        } else {
            Some(raw.parse::<RaidLevel>().map_err(|msg| {
                Error::parse(
                    format!("line {line}"),
                    format!("record `{id}`: field `raid_level`: {msg}"),
                )
            })?)
        }
    };
    let status = field(18).parse::<Status>().map_err(|msg| {
        Error::parse(
            format!("line {line}"),
            format!("record `{id}`: field `status`: {msg}"),
        )
    })?;
    let peak_efficiency = if field(19).is_empty() {
        default_peak_efficiency()
    } else {
        parse_with(19, "number")?
    };

    Ok(ServerRecord {
        id: id.clone(),
        make_model: field(1).to_string(),
        sockets: parse_uint(2)?,
        cores_per_socket: parse_uint(3)?,
        threads_per_core: parse_uint(4)?,
        cache_mb: parse_with(5, "number")?,
        memory_gb: parse_with(6, "number")?,
        memory_speed_mhz: parse_with(7, "number")?,
        network_ports: parse_uint(8)?,
        port_speed_gbps: parse_with(9, "number")?,
        disk_count: parse_uint(10)?,
        disk_capacity_gb: parse_with(11, "number")?,
        raid_level,
        os_name: field(13).to_string(),
        patch_level: field(14).to_string(),
        applications: parse_list(15),
        services: parse_list(16),
        utilization: parse_with(17, "number")?,
        status,
        peak_efficiency,
    })
}

fn serialize_csv(inventory: &Inventory) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(CSV_HEADER)
        .map_err(|e| Error::parse("header", e.to_string()))?;
    for r in &inventory.servers {
        let row = [
            r.id.clone(),
            r.make_model.clone(),
            r.sockets.to_string(),
            r.cores_per_socket.to_string(),
            r.threads_per_core.to_string(),
            r.cache_mb.to_string(),
            r.memory_gb.to_string(),
            r.memory_speed_mhz.to_string(),
            r.network_ports.to_string(),
            r.port_speed_gbps.to_string(),
            r.disk_count.to_string(),
            r.disk_capacity_gb.to_string(),
            r.raid_level.map(|l| l.to_string()).unwrap_or_default(),
            r.os_name.clone(),
            r.patch_level.clone(),
            r.applications.join(";"),
            r.services.join(";"),
            r.utilization.to_string(),
            r.status.to_string(),
            r.peak_efficiency.to_string(),
        ];
        writer
            .write_record(&row)
            .map_err(|e| Error::parse(format!("record `{}`", r.id), e.to_string()))?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::parse("flush", e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::parse("encoding", e.to_string()))
}
