//! Utilization-to-power mapping, pool energy aggregation, and emissions
//! figures.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inventory::ServerRecord;

/// One measured point on a power curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerAnchor {
    /// Processor utilization, as a fraction in [0, 1].
    pub utilization: f64,
    /// Electrical draw at that utilization.
    pub watts: f64,
}

/// Piecewise-linear map from processor utilization to electrical power.
///
/// Between anchors the curve interpolates linearly; outside the anchored range
/// it clamps to the nearest anchor's watts. Immutable once constructed, so the
/// invariants below hold for the curve's whole lifetime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CurveRepr")]
pub struct PowerCurve {
    name: String,
    anchors: Vec<PowerAnchor>,
}

#[derive(Deserialize)]
struct CurveRepr {
    name: String,
    anchors: Vec<PowerAnchor>,
}

impl TryFrom<CurveRepr> for PowerCurve {
    type Error = Error;

    fn try_from(repr: CurveRepr) -> Result<Self> {
        PowerCurve::new(repr.name, repr.anchors)
    }
}

impl Default for PowerCurve {
    /// The built-in curve: 173 W at 5% utilization, 230 W at 50%, 275 W at
    /// 100%.
    fn default() -> Self {
        PowerCurve::new(
            "default",
            vec![
                PowerAnchor {
                    utilization: 0.05,
                    watts: 173.0,
                },
                PowerAnchor {
                    utilization: 0.50,
                    watts: 230.0,
                },
                PowerAnchor {
                    utilization: 1.00,
                    watts: 275.0,
                },
            ],
        )
        .expect("built-in curve is valid")
    }
}

impl PowerCurve {
    /// Build a curve after checking its invariants: at least one anchor,
    /// utilizations strictly increasing within [0, 1], watts positive and
    /// non-decreasing.
    pub fn new(name: impl Into<String>, anchors: Vec<PowerAnchor>) -> Result<Self> {
        if anchors.is_empty() {
            return Err(Error::domain("power curve needs at least one anchor"));
        }
        for (i, anchor) in anchors.iter().enumerate() {
            if !anchor.utilization.is_finite() || !(0.0..=1.0).contains(&anchor.utilization) {
                return Err(Error::domain(format!(
                    "anchor {i}: utilization {} outside [0.0, 1.0]",
                    anchor.utilization
                )));
            }
            if !anchor.watts.is_finite() || anchor.watts <= 0.0 {
                return Err(Error::domain(format!(
                    "anchor {i}: watts must be positive, got {}",
                    anchor.watts
                )));
            }
            if i > 0 {
                let prev = &anchors[i - 1];
                if anchor.utilization <= prev.utilization {
                    return Err(Error::domain(format!(
                        "anchor {i}: utilization {} does not increase past {}",
                        anchor.utilization, prev.utilization
                    )));
                }
                if anchor.watts < prev.watts {
                    return Err(Error::domain(format!(
                        "anchor {i}: watts {} falls below {}",
                        anchor.watts, prev.watts
                    )));
                }
            }
        }
        Ok(PowerCurve {
            name: name.into(),
            anchors,
        })
    }

    /// Parse a curve document: `{"name": ..., "anchors": [{"utilization": U,
    /// "watts": W}, ...]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            Error::parse(
                format!("line {} column {}", e.line(), e.column()),
                e.to_string(),
            )
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn anchors(&self) -> &[PowerAnchor] {
        &self.anchors
    }

    /// Watts at the lowest anchored utilization: the draw charged to an
    /// under-utilized server under flat accounting.
    pub fn base_watts(&self) -> f64 {
        self.anchors[0].watts
    }

    /// Electrical draw at `utilization`.
    ///
    /// Anchor utilizations return their anchored watts exactly. Between
    /// adjacent anchors the value is linearly interpolated; utilizations below
    /// the first anchor or above the last clamp to that anchor's watts.
    pub fn power_at(&self, utilization: f64) -> Result<f64> {
        if !utilization.is_finite() || !(0.0..=1.0).contains(&utilization) {
            return Err(Error::domain(format!(
                "utilization {utilization} outside [0.0, 1.0]"
            )));
        }
        let first = self.anchors[0];
        if utilization <= first.utilization {
            return Ok(first.watts);
        }
        let last = self.anchors[self.anchors.len() - 1];
        if utilization >= last.utilization {
            return Ok(last.watts);
        }
        for pair in self.anchors.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if utilization == b.utilization {
                return Ok(b.watts);
            }
            if utilization < b.utilization {
                let t = (utilization - a.utilization) / (b.utilization - a.utilization);
                return Ok(a.watts + (b.watts - a.watts) * t);
            }
        }
        unreachable!("utilization bracketed by first/last anchors");
    }
}

/// Aggregate electrical draw of a group of servers billed at a flat
/// per-server rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyFigure {
    pub watts: f64,
    pub servers: usize,
    pub per_server_watts: f64,
}

/// Total draw of `count` servers each consuming `per_server` watts.
pub fn pool_energy(count: usize, per_server: f64) -> EnergyFigure {
    EnergyFigure {
        watts: count as f64 * per_server,
        servers: count,
        per_server_watts: per_server,
    }
}

/// Grid carbon intensity in kg CO2 per kWh. The default of 0.5 is a
/// configuration placeholder; substitute the factor for the actual grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EmissionFactor(pub f64);

impl Default for EmissionFactor {
    fn default() -> Self {
        EmissionFactor(0.5)
    }
}

impl EmissionFactor {
    pub fn new(kg_co2_per_kwh: f64) -> Result<Self> {
        if !kg_co2_per_kwh.is_finite() || kg_co2_per_kwh < 0.0 {
            return Err(Error::domain(format!(
                "emission factor must be non-negative, got {kg_co2_per_kwh}"
            )));
        }
        Ok(EmissionFactor(kg_co2_per_kwh))
    }
}

/// Capacity units delivered per watt when `record` runs at `utilization`:
/// a server's work output divided by its electrical draw. Improves with
/// utilization because power grows sub-linearly.
pub fn performance_to_power(
    record: &ServerRecord,
    utilization: f64,
    curve: &PowerCurve,
) -> Result<f64> {
    let watts = curve.power_at(utilization)?;
    if watts <= 0.0 {
        return Err(Error::domain(
            "performance-to-power undefined at zero watts",
        ));
    }
    Ok(utilization * record.capacity_units() / watts)
}

/// Energy over a period, in kWh: watts / 1000 x hours.
pub fn annual_energy(watts: f64, hours: f64) -> f64 {
    watts / 1000.0 * hours
}

/// Mass of CO2 attributed to `kwh` of grid energy.
pub fn co2_mass(kwh: f64, factor: EmissionFactor) -> f64 {
    kwh * factor.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inventory::{Status};

    fn hw(sockets: u32, cores: u32) -> ServerRecord {
        ServerRecord {
            id: "s1".to_string(),
            make_model: "TestBox".to_string(),
            sockets,
            cores_per_socket: cores,
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
            utilization: 0.5,
            status: Status::Active,
            peak_efficiency: 1.0,
        }
    }

    #[test]
    fn anchors_evaluate_exactly() {
        let curve = PowerCurve::default();
        assert_eq!(curve.power_at(0.05).unwrap(), 173.0);
        assert_eq!(curve.power_at(0.50).unwrap(), 230.0);
        assert_eq!(curve.power_at(1.00).unwrap(), 275.0);
    }

    #[test]
    fn interpolates_between_anchors() {
        let curve = PowerCurve::default();
        let mid = curve.power_at(0.275).unwrap();
        assert!((mid - 201.5).abs() < 1e-9, "{mid}");
    }

    #[test]
    fn clamps_outside_anchored_range() {
        let curve = PowerCurve::default();
        assert_eq!(curve.power_at(0.03).unwrap(), 173.0);
        assert_eq!(curve.power_at(0.0).unwrap(), 173.0);

        let short = PowerCurve::new(
            "short",
            vec![
                PowerAnchor {
                    utilization: 0.2,
                    watts: 100.0,
                },
                PowerAnchor {
                    utilization: 0.8,
                    watts: 200.0,
                },
            ],
        )
        .unwrap();
        assert_eq!(short.power_at(0.9).unwrap(), 200.0);
        assert_eq!(short.power_at(1.0).unwrap(), 200.0);
    }

    #[test]
    fn rejects_out_of_range_utilization() {
        let curve = PowerCurve::default();
        assert!(curve.power_at(-0.1).is_err());
        assert!(curve.power_at(1.5).is_err());
        assert!(curve.power_at(f64::NAN).is_err());
    }

    #[test]
    fn rejects_malformed_curves() {
        assert!(PowerCurve::new("empty", vec![]).is_err());
        let anchor = |u, w| PowerAnchor {
            utilization: u,
            watts: w,
        };
        assert!(PowerCurve::new("dup", vec![anchor(0.5, 100.0), anchor(0.5, 120.0)]).is_err());
        assert!(PowerCurve::new("drop", vec![anchor(0.2, 150.0), anchor(0.8, 100.0)]).is_err());
        assert!(PowerCurve::new("range", vec![anchor(1.5, 100.0)]).is_err());
        assert!(PowerCurve::new("zero", vec![anchor(0.5, 0.0)]).is_err());
        assert!(PowerCurve::new("one", vec![anchor(0.5, 100.0)]).is_ok());
    }

    #[test]
    fn curve_json_round_trip() {
        let curve = PowerCurve::default();
        let text = serde_json::to_string(&curve).unwrap();
        let back = PowerCurve::from_json(&text).unwrap();
        assert_eq!(back, curve);

        let invalid = r#"{"name":"bad","anchors":[{"utilization":0.9,"watts":5},{"utilization":0.1,"watts":9}]}"#;
        assert!(PowerCurve::from_json(invalid).is_err());
    }

    #[test]
    fn pool_energy_reference_values() {
        assert_eq!(pool_energy(250, 173.0).watts, 43250.0);
        assert_eq!(pool_energy(500, 173.0).watts, 86500.0);
        assert_eq!(pool_energy(0, 173.0).watts, 0.0);
    }

    #[test]
    fn pool_energy_is_linear_in_count() {
        let a = pool_energy(37, 173.0).watts;
        let b = pool_energy(63, 173.0).watts;
        assert_eq!(pool_energy(100, 173.0).watts, a + b);
    }

    #[test]
    fn performance_to_power_examples() {
        let curve = PowerCurve::default();
        assert_eq!(performance_to_power(&hw(1, 1), 0.0, &curve).unwrap(), 0.0);
        let mid = performance_to_power(&hw(2, 4), 0.5, &curve).unwrap();
        assert_eq!(mid, 4.0 / 230.0);
        let full = performance_to_power(&hw(2, 4), 1.0, &curve).unwrap();
        assert_eq!(full, 8.0 / 275.0);
        assert!(full > mid);
    }

    #[test]
    fn performance_to_power_increases_with_utilization() {
        let curve = PowerCurve::default();
        let record = hw(2, 4);
        let mut prev = performance_to_power(&record, 0.05, &curve).unwrap();
        let mut u = 0.10;
        while u <= 1.0 {
            let next = performance_to_power(&record, u, &curve).unwrap();
            assert!(next > prev, "ratio fell at utilization {u}");
            prev = next;
            u += 0.05;
        }
    }

    #[test]
    fn annual_energy_conversion() {
        assert_eq!(annual_energy(75000.0, 8760.0), 657000.0);
        assert_eq!(annual_energy(0.0, 8760.0), 0.0);
        assert_eq!(annual_energy(1000.0, 1.0), 1.0);
    }

    #[test]
    fn co2_mass_scales_with_factor() {
        assert_eq!(co2_mass(1800.0, EmissionFactor(1.0)), 1800.0);
        assert_eq!(co2_mass(123.0, EmissionFactor(0.0)), 0.0);
        assert_eq!(co2_mass(657000.0, EmissionFactor(0.5)), 328500.0);
        assert!(EmissionFactor::new(-0.1).is_err());
        assert_eq!(EmissionFactor::default().0, 0.5);
    }
}
