use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// One record-level rule violation found while checking an inventory.
///
/// Violations are data, not errors: `Inventory::validate` collects them all
/// instead of stopping at the first problem.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// Id of the offending record ("" when the record has no id at all).
    pub record_id: String,
    /// Field the rule applies to.
    pub field: String,
    /// Human-readable statement of the violated rule.
    pub rule: String,
}

impl Violation {
    pub fn new(
        record_id: impl Into<String>,
        field: impl Into<String>,
        rule: impl Into<String>,
    ) -> Self {
        Self {
            record_id: record_id.into(),
            field: field.into(),
            rule: rule.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "record `{}`: field `{}`: {}",
            self.record_id, self.field, self.rule
        )
    }
}

fn join_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(Violation::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input syntax; `locus` names the line or record where parsing stopped.
    #[error("parse error at {locus}: {message}")]
    Parse { locus: String, message: String },

    /// The input parsed but breaks one or more record invariants.
    #[error("invalid inventory: {}", join_violations(.0))]
    Invalid(Vec<Violation>),

    /// Two records share the same id.
    #[error("duplicate server id `{0}`")]
    DuplicateId(String),

    /// An argument is outside the domain an operation is defined on.
    #[error("{0}")]
    Domain(String),

    /// A single workload is too large for every available host budget.
    #[error(
        "workload `{server_id}` (load {load}) exceeds the largest host budget ({budget}); \
         it cannot be placed at this target"
    )]
    InfeasibleGuest {
        server_id: String,
        load: f64,
        budget: f64,
    },

    /// The combined load of a pool does not fit on its own hosts at the target.
    #[error("{scope}: combined load exceeds the available host capacity at the target")]
    InsufficientCapacity { scope: String },

    /// A format name not in the accepted set; callers should treat this as a usage error.
    #[error("unknown format `{0}`")]
    UnknownFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Convenience constructor for [`Error::Parse`].
    pub fn parse(locus: impl fmt::Display, message: impl Into<String>) -> Self {
        Error::Parse {
            locus: locus.to_string(),
            message: message.into(),
        }
    }

    /// Convenience constructor for [`Error::Domain`].
    pub fn domain(message: impl Into<String>) -> Self {
        Error::Domain(message.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
