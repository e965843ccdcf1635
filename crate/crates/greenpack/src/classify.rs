//! Rule-driven assignment of servers to resource pools, plus coarse keyword
//! categorization of server roles and application names.

use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inventory::{Inventory, ServerRecord};
use crate::util;

/// The three consolidation resource pools.
///
/// Innovation holds short-lived test, deployment, quality-assurance, and
/// volume servers; Production holds SLA-bound steady workloads; MissionCritical
/// holds realtime and availability-sensitive workloads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pool {
    Innovation,
    Production,
    MissionCritical,
}

impl Pool {
    /// All pools, in canonical reporting order.
    pub const ALL: [Pool; 3] = [Pool::Innovation, Pool::Production, Pool::MissionCritical];

    /// Human-readable label used in text reports.
    pub fn label(self) -> &'static str {
        match self {
            Pool::Innovation => "Innovation",
            Pool::Production => "Production",
            Pool::MissionCritical => "Mission Critical",
        }
    }

    /// Machine-readable label matching the serialized form.
    pub fn wire_label(self) -> &'static str {
        match self {
            Pool::Innovation => "innovation",
            Pool::Production => "production",
            Pool::MissionCritical => "mission_critical",
        }
    }
}

impl fmt::Display for Pool {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Functional role a server plays, inferred from its application and service
/// names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ServerRole {
    NetworkInfrastructure,
    Terminal,
    FilePrint,
    Application,
    Web,
    IdentityManagement,
    Collaboration,
    Database,
}

/// Coarse category of an application name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApplicationCategory {
    CommercialVsInHouse,
    Custom,
    LegacyVsUpdated,
    Infrastructure,
    BusinessSupport,
    LineOfBusiness,
    MissionCritical,
}

/// Server field a classification rule inspects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleField {
    Id,
    MakeModel,
    OsName,
    Applications,
    Services,
    Status,
    Utilization,
}

impl RuleField {
    fn is_numeric(self) -> bool {
        matches!(self, RuleField::Utilization)
    }
}

/// Comparison a rule applies to its field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleOp {
    Contains,
    Eq,
    Lt,
    Gt,
}

/// Rule comparison operand: a number for numeric fields, text otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RuleValue {
    Number(f64),
    Text(String),
}

/// One classification predicate: if `field` `op` `value` holds for a server,
/// the server lands in `pool`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub field: RuleField,
    #[serde(rename = "operator")]
    pub op: RuleOp,
    pub value: RuleValue,
    pub pool: Pool,
}

impl Rule {
    fn keyword(field: RuleField, word: &str, pool: Pool) -> Self {
        Rule {
            field,
            op: RuleOp::Contains,
            value: RuleValue::Text(word.to_string()),
            pool,
        }
    }

    /// Shape check performed at load time so matching never has to guess:
    /// ordering ops need a numeric field and operand, `contains` needs text.
    fn check(&self, index: usize) -> Result<()> {
        let fail = |why: &str| {
            Err(Error::domain(format!(
                "classification rule {index}: {why}"
            )))
        };
        match self.op {
            RuleOp::Lt | RuleOp::Gt => {
                if !self.field.is_numeric() {
                    return fail("lt/gt apply only to numeric fields");
                }
                if !matches!(self.value, RuleValue::Number(_)) {
                    return fail("lt/gt need a numeric value");
                }
            }
            RuleOp::Contains => {
                if self.field.is_numeric() {
                    return fail("contains applies only to text fields");
                }
                if !matches!(self.value, RuleValue::Text(_)) {
                    return fail("contains needs a text value");
                }
            }
            RuleOp::Eq => {
                let ok = match self.value {
                    RuleValue::Number(_) => self.field.is_numeric(),
                    RuleValue::Text(_) => !self.field.is_numeric(),
                };
                if !ok {
                    return fail("eq operand type must match the field type");
                }
            }
        }
        Ok(())
    }

    /// Whether the rule matches `record`. Text comparison is case-insensitive;
    /// list fields match when any element does.
    pub fn matches(&self, record: &ServerRecord) -> bool {
        match self.field {
            RuleField::Utilization => self.matches_number(record.utilization),
            RuleField::Id => self.matches_text(&record.id),
            RuleField::MakeModel => self.matches_text(&record.make_model),
            RuleField::OsName => self.matches_text(&record.os_name),
            RuleField::Status => self.matches_text(&record.status.to_string()),
            RuleField::Applications => self.matches_list(&record.applications),
            RuleField::Services => self.matches_list(&record.services),
        }
    }

    fn matches_number(&self, x: f64) -> bool {
        let RuleValue::Number(v) = self.value else {
            return false;
        };
        match self.op {
            RuleOp::Lt => x < v,
            RuleOp::Gt => x > v,
            RuleOp::Eq => x == v,
            RuleOp::Contains => false,
        }
    }

    fn matches_text(&self, text: &str) -> bool {
        let RuleValue::Text(v) = &self.value else {
            return false;
        };
        let text = text.to_lowercase();
        let v = v.to_lowercase();
        match self.op {
            RuleOp::Contains => text.contains(&v),
            RuleOp::Eq => text == v,
            RuleOp::Lt | RuleOp::Gt => false,
        }
    }

    fn matches_list(&self, items: &[String]) -> bool {
        items.iter().any(|item| self.matches_text(item))
    }
}

/// An ordered rule list plus the pool used when nothing matches. Rules are
/// evaluated top to bottom and the first match wins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationRules {
    pub rules: Vec<Rule>,
    pub default_pool: Pool,
}

impl Default for ClassificationRules {
    /// Built-in keyword rules. Mission-critical tags are checked first so the
    /// most protective pool wins for multi-tagged servers, then production,
    /// then innovation; untagged servers fall back to Innovation, the pool a
    /// typical data center has the most of.
    fn default() -> Self {
        let mut rules = Vec::new();
        let groups: [(&[&str], Pool); 3] = [
            (&["realtime", "critical", "mission"], Pool::MissionCritical),
            (&["sla", "production", "prod"], Pool::Production),
            (
                &["test", "qa", "quality", "deploy", "staging", "volume", "dev"],
                Pool::Innovation,
            ),
        ];
        for (words, pool) in groups {
            for word in words {
                rules.push(Rule::keyword(RuleField::Applications, word, pool));
                rules.push(Rule::keyword(RuleField::Services, word, pool));
            }
        }
        ClassificationRules {
            rules,
            default_pool: Pool::Innovation,
        }
    }
}

impl ClassificationRules {
    /// Load rules from JSON: either a bare array of rules (default pool
    /// Innovation) or an object `{"rules": [...], "default_pool": "..."}`.
    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Doc {
            Bare(Vec<Rule>),
            Full {
                rules: Vec<Rule>,
                #[serde(default = "innovation")]
                default_pool: Pool,
            },
        }
        fn innovation() -> Pool {
            Pool::Innovation
        }

        let doc: Doc = serde_json::from_str(text).map_err(|e| {
            Error::parse(
                format!("line {} column {}", e.line(), e.column()),
                e.to_string(),
            )
        })?;
        let rules = match doc {
            Doc::Bare(rules) => ClassificationRules {
                rules,
                default_pool: Pool::Innovation,
            },
            Doc::Full { rules, default_pool } => ClassificationRules { rules, default_pool },
        };
        rules.validate()?;
        Ok(rules)
    }

    pub fn validate(&self) -> Result<()> {
        for (index, rule) in self.rules.iter().enumerate() {
            rule.check(index)?;
        }
        Ok(())
    }
}

/// Pool of a single server under `rules`: first matching rule wins, otherwise
/// the default pool. Total and order-stable by construction.
pub fn classify_pool(record: &ServerRecord, rules: &ClassificationRules) -> Pool {
    rules
        .rules
        .iter()
        .find(|rule| rule.matches(record))
        .map(|rule| rule.pool)
        .unwrap_or(rules.default_pool)
}

/// Size and mean utilization of one pool's membership.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoolStats {
    pub count: usize,
    /// Unweighted arithmetic mean of member utilizations; 0.0 for an empty
    /// pool.
    pub mean_utilization: f64,
}

/// Result of partitioning an inventory: every server id mapped to its pool,
/// in input order, plus per-pool membership statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolAssignment {
    pub assignments: IndexMap<String, Pool>,
    pub innovation: PoolStats,
    pub production: PoolStats,
    pub mission_critical: PoolStats,
}

impl PoolAssignment {
    pub fn stats(&self, pool: Pool) -> PoolStats {
        match pool {
            Pool::Innovation => self.innovation,
            Pool::Production => self.production,
            Pool::MissionCritical => self.mission_critical,
        }
    }

    /// Ids assigned to `pool`, in inventory order.
    pub fn ids_in(&self, pool: Pool) -> Vec<&str> {
        self.assignments
            .iter()
            .filter(|(_, p)| **p == pool)
            .map(|(id, _)| id.as_str())
            .collect()
    }
}

/// Assign every server in the inventory to a pool and compute per-pool counts
/// and mean utilizations.
pub fn partition(inventory: &Inventory, rules: &ClassificationRules) -> PoolAssignment {
    let mut assignments = IndexMap::with_capacity(inventory.len());
    let mut utilizations: [Vec<f64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for record in &inventory.servers {
        let pool = classify_pool(record, rules);
        assignments.insert(record.id.clone(), pool);
        let slot = Pool::ALL.iter().position(|p| *p == pool).unwrap();
        utilizations[slot].push(record.utilization);
    }
    let stats = |slot: usize| PoolStats {
        count: utilizations[slot].len(),
        mean_utilization: util::mean(&utilizations[slot]),
    };
    PoolAssignment {
        assignments,
        innovation: stats(0),
        production: stats(1),
        mission_critical: stats(2),
    }
}

const ROLE_KEYWORDS: [(&[&str], ServerRole); 7] = [
    (
        &["dns", "dhcp", "firewall", "vpn", "proxy", "router", "nat", "ntp"],
        ServerRole::NetworkInfrastructure,
    ),
    (
        &["terminal", "rdp", "citrix", "vdi"],
        ServerRole::Terminal,
    ),
    (
        &["file", "print", "smb", "nfs", "ftp", "samba"],
        ServerRole::FilePrint,
    ),
    (
        &["web", "http", "nginx", "apache", "iis"],
        ServerRole::Web,
    ),
    (
        &["ldap", "auth", "identity", "sso", "kerberos", "directory"],
        ServerRole::IdentityManagement,
    ),
    (
        &["mail", "chat", "calendar", "collab", "wiki", "conference"],
        ServerRole::Collaboration,
    ),
    (
        &["postgres", "mysql", "oracle", "mongo", "redis", "mariadb", "sql", "db"],
        ServerRole::Database,
    ),
];

/// Functional role of a server, from keyword matches over its application and
/// service names. Categories are tried in a fixed order and the first hit
/// wins; servers matching nothing are generic Application servers.
pub fn classify_role(record: &ServerRecord) -> ServerRole {
    let names = record
        .applications
        .iter()
        .chain(record.services.iter())
        .map(|s| s.to_lowercase())
        .collect::<Vec<_>>();
    for (words, role) in ROLE_KEYWORDS {
        if names
            .iter()
            .any(|name| words.iter().any(|w| name.contains(w)))
        {
            return role;
        }
    }
    ServerRole::Application
}

const APPLICATION_KEYWORDS: [(&[&str], ApplicationCategory); 6] = [
    (
        &["mission", "critical", "realtime"],
        ApplicationCategory::MissionCritical,
    ),
    (
        &["legacy", "updated"],
        ApplicationCategory::LegacyVsUpdated,
    ),
    (&["custom"], ApplicationCategory::Custom),
    (
        &["commercial", "vendor", "inhouse", "in-house"],
        ApplicationCategory::CommercialVsInHouse,
    ),
    (
        &["billing", "payroll", "crm", "erp", "ledger"],
        ApplicationCategory::LineOfBusiness,
    ),
    (
        &["hr", "helpdesk", "support", "finance"],
        ApplicationCategory::BusinessSupport,
    ),
];

/// Category of an application name using the built-in keyword tables only.
/// Unrecognized names count as infrastructure plumbing.
pub fn classify_application(name: &str) -> ApplicationCategory {
    classify_application_with(name, &IndexMap::new())
}

/// Category of an application name, consulting an exact-name override table
/// before the keyword pass.
pub fn classify_application_with(
    name: &str,
    overrides: &IndexMap<String, ApplicationCategory>,
) -> ApplicationCategory {
    if let Some(category) = overrides.get(name) {
        return *category;
    }
    let lower = name.to_lowercase();
    for (words, category) in APPLICATION_KEYWORDS {
        if words.iter().any(|w| lower.contains(w)) {
            return category;
        }
    }
    ApplicationCategory::Infrastructure
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inventory::Status;

    fn record(id: &str, utilization: f64, apps: &[&str], services: &[&str]) -> ServerRecord {
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
            applications: apps.iter().map(|s| s.to_string()).collect(),
            services: services.iter().map(|s| s.to_string()).collect(),
            utilization,
            status: Status::Active,
            peak_efficiency: 1.0,
        }
    }

    fn table1_rules() -> ClassificationRules {
        ClassificationRules {
            rules: vec![
                Rule {
                    field: RuleField::Utilization,
                    op: RuleOp::Lt,
                    value: RuleValue::Number(0.05),
                    pool: Pool::Innovation,
                },
                Rule {
                    field: RuleField::Utilization,
                    op: RuleOp::Lt,
                    value: RuleValue::Number(0.08),
                    pool: Pool::Production,
                },
                Rule {
                    field: RuleField::Utilization,
                    op: RuleOp::Gt,
                    value: RuleValue::Number(0.0),
                    pool: Pool::MissionCritical,
                },
            ],
            default_pool: Pool::Innovation,
        }
    }

    fn table1_inventory() -> Inventory {
        let mut servers = Vec::new();
        for i in 0..500 {
            let utilization = if i < 250 {
                0.03
            } else if i < 425 {
                0.06
            } else {
                0.10
            };
            servers.push(record(&format!("s{i:03}"), utilization, &[], &[]));
        }
        Inventory::new(servers, "gen")
    }

    #[test]
    fn qa_service_lands_in_innovation_by_default() {
        let rules = ClassificationRules::default();
        let r = record("s1", 0.03, &[], &["qa"]);
        assert_eq!(classify_pool(&r, &rules), Pool::Innovation);
    }

    #[test]
    fn unmatched_record_takes_default_pool() {
        let rules = ClassificationRules {
            rules: vec![],
            default_pool: Pool::Production,
        };
        let r = record("s1", 0.03, &[], &[]);
        assert_eq!(classify_pool(&r, &rules), Pool::Production);
    }

    #[test]
    fn realtime_tag_matches_mission_critical_rule() {
        let rules = ClassificationRules::default();
        let r = record("s1", 0.5, &["realtime-billing"], &[]);
        assert_eq!(classify_pool(&r, &rules), Pool::MissionCritical);
    }

    #[test]
    fn most_protective_pool_wins_on_multi_tagged_servers() {
        let rules = ClassificationRules::default();
        let r = record("s1", 0.5, &["qa"], &["critical-feed"]);
        assert_eq!(classify_pool(&r, &rules), Pool::MissionCritical);
    }

    #[test]
    fn partition_reproduces_reference_counts_and_means() {
        let assignment = partition(&table1_inventory(), &table1_rules());
        assert_eq!(assignment.innovation.count, 250);
        assert_eq!(assignment.production.count, 175);
        assert_eq!(assignment.mission_critical.count, 75);
        assert_eq!(assignment.innovation.mean_utilization, 0.03);
        assert_eq!(assignment.production.mean_utilization, 0.06);
        assert_eq!(assignment.mission_critical.mean_utilization, 0.10);
    }

    #[test]
    fn partition_covers_every_id_and_counts_sum() {
        let inventory = table1_inventory();
        let assignment = partition(&inventory, &table1_rules());
        assert_eq!(assignment.assignments.len(), inventory.len());
        let total = Pool::ALL
            .iter()
            .map(|p| assignment.stats(*p).count)
            .sum::<usize>();
        assert_eq!(total, inventory.len());
    }

    #[test]
    fn partition_of_empty_inventory_is_all_zeros() {
        let assignment = partition(&Inventory::new(vec![], "gen"), &table1_rules());
        for pool in Pool::ALL {
            assert_eq!(assignment.stats(pool).count, 0);
            assert_eq!(assignment.stats(pool).mean_utilization, 0.0);
        }
    }

    #[test]
    fn single_rule_collects_all_matching_servers() {
        let rules = ClassificationRules {
            rules: vec![Rule {
                field: RuleField::Utilization,
                op: RuleOp::Gt,
                value: RuleValue::Number(-1.0),
                pool: Pool::Production,
            }],
            default_pool: Pool::Innovation,
        };
        let servers = (0..10)
            .map(|i| record(&format!("s{i}"), 0.1, &[], &[]))
            .collect();
        let assignment = partition(&Inventory::new(servers, "gen"), &rules);
        assert_eq!(assignment.production.count, 10);
        assert_eq!(assignment.innovation.count, 0);
        assert_eq!(assignment.mission_critical.count, 0);
    }

    #[test]
    fn classification_ignores_inventory_order() {
        let inventory = table1_inventory();
        let rules = table1_rules();
        let forward = partition(&inventory, &rules);
        let mut reversed = inventory.clone();
        reversed.servers.reverse();
        let backward = partition(&reversed, &rules);
        for (id, pool) in &forward.assignments {
            assert_eq!(backward.assignments.get(id), Some(pool));
        }
    }

    #[test]
    fn rules_load_from_bare_array_or_object() {
        let bare = r#"[{"field":"services","operator":"contains","value":"qa","pool":"innovation"}]"#;
        let rules = ClassificationRules::from_json(bare).unwrap();
        assert_eq!(rules.rules.len(), 1);
        assert_eq!(rules.default_pool, Pool::Innovation);

        let full = r#"{"rules":[{"field":"utilization","operator":"lt","value":0.05,"pool":"innovation"}],"default_pool":"mission_critical"}"#;
        let rules = ClassificationRules::from_json(full).unwrap();
        assert_eq!(rules.default_pool, Pool::MissionCritical);
    }

    #[test]
    fn ill_typed_rules_are_rejected_at_load() {
        let text_lt = r#"[{"field":"services","operator":"lt","value":"qa","pool":"innovation"}]"#;
        assert!(ClassificationRules::from_json(text_lt).is_err());
        let contains_number =
            r#"[{"field":"utilization","operator":"contains","value":0.5,"pool":"innovation"}]"#;
        assert!(ClassificationRules::from_json(contains_number).is_err());
    }

    #[test]
    fn role_keywords_hit_expected_categories() {
        let dns = record("s1", 0.1, &[], &["dns"]);
        assert_eq!(classify_role(&dns), ServerRole::NetworkInfrastructure);
        let pg = record("s2", 0.1, &["postgres"], &[]);
        assert_eq!(classify_role(&pg), ServerRole::Database);
        let plain = record("s3", 0.1, &["widget-factory"], &[]);
        assert_eq!(classify_role(&plain), ServerRole::Application);
        let web = record("s4", 0.1, &[], &["nginx"]);
        assert_eq!(classify_role(&web), ServerRole::Web);
    }

    #[test]
    fn application_keywords_hit_expected_categories() {
        assert_eq!(
            classify_application("legacy-payroll"),
            ApplicationCategory::LegacyVsUpdated
        );
        assert_eq!(
            classify_application("unknown-thing"),
            ApplicationCategory::Infrastructure
        );
        assert_eq!(
            classify_application("custom-etl"),
            ApplicationCategory::Custom
        );
    }

    #[test]
    fn application_override_table_wins_over_keywords() {
        let mut overrides = IndexMap::new();
        overrides.insert(
            "billing-core".to_string(),
            ApplicationCategory::MissionCritical,
        );
        assert_eq!(
            classify_application_with("billing-core", &overrides),
            ApplicationCategory::MissionCritical
        );
        assert_eq!(
            classify_application("billing-core"),
            ApplicationCategory::LineOfBusiness
        );
    }

    #[test]
    fn pool_serde_labels_are_snake_case() {
        assert_eq!(
            serde_json::to_string(&Pool::MissionCritical).unwrap(),
            r#""mission_critical""#
        );
        assert_eq!(Pool::MissionCritical.to_string(), "Mission Critical");
    }
}
