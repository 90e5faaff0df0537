//! Single-zone CO2 physics: stack-effect airflow through large openings,
//! the exact constant-coefficient mass-balance step, and discretization of
//! the concentration into comfort levels.
//!
//! Units: concentrations in ppm, flows in m3/s, CO2 generation in m3/s of
//! pure CO2, temperatures in degrees Celsius, durations in seconds.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const STANDARD_GRAVITY: f64 = 9.81;
pub const SEA_LEVEL_PRESSURE: f64 = 101_325.0;
pub const DRY_AIR_GAS_CONSTANT: f64 = 287.05;

/// Outflows below this are treated as zero when stepping the concentration.
pub const FLOW_EPSILON: f64 = 1e-9;

/// Sedentary adult CO2 exhalation, 0.005 L/s.
pub const DEFAULT_GENERATION_PER_PERSON: f64 = 5e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhysicsError {
    #[error("opening ratio {0} is outside [0, 1]")]
    InvalidRatio(f64),
    #[error("zone volume must be positive, got {0}")]
    NonPositiveVolume(f64),
    #[error("time step must be positive, got {0}")]
    NonPositiveTimeStep(f64),
    #[error("invalid opening geometry: {0}")]
    InvalidGeometry(String),
    #[error("invalid zone parameters: {0}")]
    InvalidZone(String),
}

/// A large vertical opening (door or window) between the zone and one boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpeningGeometry {
    pub height: f64,
    pub width: f64,
    pub discharge_coefficient: f64,
    /// Height of zero pressure difference, measured from the sill.
    pub neutral_plane: f64,
    /// Label of the space on the other side, e.g. `corridor` or `outdoor`.
    pub boundary: String,
}

impl OpeningGeometry {
    /// `neutral_plane` defaults to mid-height.
    pub fn new(
        height: f64,
        width: f64,
        discharge_coefficient: f64,
        neutral_plane: Option<f64>,
        boundary: impl Into<String>,
    ) -> Result<Self, PhysicsError> {
        let g = Self {
            height,
            width,
            discharge_coefficient,
            neutral_plane: neutral_plane.unwrap_or(height / 2.0),
            boundary: boundary.into(),
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), PhysicsError> {
        let bad = |m: String| Err(PhysicsError::InvalidGeometry(m));
        if !(self.height > 0.0 && self.height.is_finite()) {
            return bad(format!("height {} must be positive", self.height));
        }
        if !(self.width > 0.0 && self.width.is_finite()) {
            return bad(format!("width {} must be positive", self.width));
        }
        if !(self.discharge_coefficient > 0.0 && self.discharge_coefficient <= 1.0) {
            return bad(format!(
                "discharge coefficient {} must lie in (0, 1]",
                self.discharge_coefficient
            ));
        }
        if !(0.0..=self.height).contains(&self.neutral_plane) {
            return bad(format!(
                "neutral plane {} must lie in [0, {}]",
                self.neutral_plane, self.height
            ));
        }
        Ok(())
    }
}

/// Boundaries between the three concentration levels, in ppm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Co2Thresholds {
    /// Lowest concentration classed as medium.
    pub medium: f64,
    /// Lowest concentration classed as high.
    pub high: f64,
}

impl Default for Co2Thresholds {
    fn default() -> Self {
        Self {
            medium: 1000.0,
            high: 1700.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Co2Level {
    Low,
    Medium,
    High,
}

impl Co2Level {
    pub const LABELS: [&'static str; 3] = ["low", "medium", "high"];

    pub fn label(self) -> &'static str {
        Self::LABELS[self as usize]
    }
}

impl fmt::Display for Co2Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZoneParams {
    pub volume: f64,
    pub per_person_generation: f64,
    pub gravity: f64,
    pub thresholds: Co2Thresholds,
    pub boundary_concentrations: BTreeMap<String, f64>,
}

impl ZoneParams {
    pub fn validate(&self) -> Result<(), PhysicsError> {
        let bad = |m: String| Err(PhysicsError::InvalidZone(m));
        if !(self.volume > 0.0 && self.volume.is_finite()) {
            return Err(PhysicsError::NonPositiveVolume(self.volume));
        }
        if !(self.per_person_generation >= 0.0 && self.per_person_generation.is_finite()) {
            return bad(format!("per-person generation {} must be >= 0", self.per_person_generation));
        }
        if !(self.gravity > 0.0 && self.gravity.is_finite()) {
            return bad(format!("gravity {} must be positive", self.gravity));
        }
        let t = self.thresholds;
        if !(t.medium >= 0.0 && t.medium < t.high && t.high.is_finite()) {
            return bad(format!("thresholds must be strictly increasing, got {} / {}", t.medium, t.high));
        }
        if let Some((k, v)) = self
            .boundary_concentrations
            .iter()
            .find(|(_, v)| !(**v >= 0.0 && v.is_finite()))
        {
            return bad(format!("boundary concentration for `{k}` is {v}"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FlowPair {
    pub q_in: f64,
    pub q_out: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TotalFlows {
    pub q_in: f64,
    pub q_out: f64,
    /// Inflow-weighted concentration of the incoming air, ppm.
    pub c_supply: f64,
}

/// Ideal-gas density of dry air at sea-level pressure, kg/m3.
pub fn air_density(temperature_c: f64) -> f64 {
    SEA_LEVEL_PRESSURE / (DRY_AIR_GAS_CONSTANT * (temperature_c + 273.15))
}

/// Bidirectional buoyancy flow through a large opening.
///
/// Across a band `[z1, z2]` on one side of the neutral plane `HN` the flow is
///
/// ```text
/// Q = 2/(3 rho) * Cd * L * sqrt(2 rho |d_rho| g) * | |HN - z1|^1.5 - |HN - z2|^1.5 |
/// ```
///
/// with `rho` the mean of the two air densities. The warmer side exhausts
/// above the neutral plane and draws in below it. Both directions are scaled
/// by `opening_ratio`, the fraction of the slot the opening stands open.
pub fn stack_airflow(
    geom: &OpeningGeometry,
    t_in: f64,
    t_out: f64,
    opening_ratio: f64,
    gravity: f64,
) -> Result<FlowPair, PhysicsError> {
    if !(0.0..=1.0).contains(&opening_ratio) {
        return Err(PhysicsError::InvalidRatio(opening_ratio));
    }
    let delta_t = t_in - t_out;
    if delta_t == 0.0 || opening_ratio == 0.0 {
        return Ok(FlowPair::default());
    }
    let (rho_in, rho_out) = (air_density(t_in), air_density(t_out));
    let rho = 0.5 * (rho_in + rho_out);
    let delta_rho = (rho_in - rho_out).abs();
    let prefactor = 2.0 / (3.0 * rho)
        * geom.discharge_coefficient
        * geom.width
        * (2.0 * rho * delta_rho * gravity).sqrt();

    let hn = geom.neutral_plane;
    let band = |z1: f64, z2: f64| prefactor * ((hn - z1).abs().powf(1.5) - (hn - z2).abs().powf(1.5)).abs();
    let below = band(0.0, hn);
    let above = band(hn, geom.height);

    let (q_in, q_out) = if delta_t > 0.0 { (below, above) } else { (above, below) };
    Ok(FlowPair {
        q_in: q_in * opening_ratio,
        q_out: q_out * opening_ratio,
    })
}

/// Advance the zone concentration over `dt` seconds with constant flows.
///
/// `C(dt) = C_inf + (C_k - C_inf) * exp(-Q_out dt / V)` with
/// `C_inf = (Q_in C_supply + S 1e6) / Q_out`. When `Q_out` is below
/// [`FLOW_EPSILON`] the zero-flow limit `C_k + S 1e6 dt / V` is used.
pub fn co2_step(
    c_k: f64,
    flows: FlowPair,
    generation: f64,
    c_supply: f64,
    dt: f64,
    volume: f64,
) -> Result<f64, PhysicsError> {
    if volume.is_nan() || volume <= 0.0 {
        return Err(PhysicsError::NonPositiveVolume(volume));
    }
    if dt.is_nan() || dt <= 0.0 {
        return Err(PhysicsError::NonPositiveTimeStep(dt));
    }
    let source = generation * 1e6;
    if flows.q_out < FLOW_EPSILON {
        return Ok(c_k + source * dt / volume);
    }
    let steady = steady_state(flows, generation, c_supply);
    Ok(steady + (c_k - steady) * (-flows.q_out * dt / volume).exp())
}

/// Fixed point of the mass balance; infinite when there is no outflow and
/// generation is positive.
pub fn steady_state(flows: FlowPair, generation: f64, c_supply: f64) -> f64 {
    (flows.q_in * c_supply + generation * 1e6) / flows.q_out
}

/// Superpose flows through several openings, each paired with the
/// concentration of the space it draws from.
///
/// With no inflow the supply concentration is that of the first opening's
/// boundary (0 for an empty list).
pub fn total_flows(openings: &[(FlowPair, f64)]) -> TotalFlows {
    let q_in: f64 = openings.iter().map(|(f, _)| f.q_in).sum();
    let q_out: f64 = openings.iter().map(|(f, _)| f.q_out).sum();
    let c_supply = if q_in > 0.0 {
        openings.iter().map(|(f, c)| f.q_in * c).sum::<f64>() / q_in
    } else {
        openings.first().map_or(0.0, |(_, c)| *c)
    };
    TotalFlows { q_in, q_out, c_supply }
}

pub fn generation_rate(occupant_count: u32, per_person: f64) -> f64 {
    occupant_count as f64 * per_person
}

/// Low below `medium`, medium on `[medium, high)`, high from `high` up.
pub fn discretize_co2(concentration: f64, thresholds: Co2Thresholds) -> Co2Level {
    if concentration >= thresholds.high {
        Co2Level::High
    } else if concentration >= thresholds.medium {
        Co2Level::Medium
    } else {
        Co2Level::Low
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn door() -> OpeningGeometry {
        OpeningGeometry::new(2.0, 0.9, 0.6, None, "corridor").unwrap()
    }

    #[test]
    fn equal_temperatures_give_no_flow() {
        assert_eq!(stack_airflow(&door(), 20.0, 20.0, 1.0, STANDARD_GRAVITY).unwrap(), FlowPair::default());
    }

    #[test]
    fn closed_opening_gives_no_flow() {
        assert_eq!(stack_airflow(&door(), 25.0, 15.0, 0.0, STANDARD_GRAVITY).unwrap(), FlowPair::default());
    }

    #[test]
    fn ratio_out_of_range() {
        assert_eq!(
            stack_airflow(&door(), 25.0, 15.0, 1.5, STANDARD_GRAVITY).unwrap_err(),
            PhysicsError::InvalidRatio(1.5)
        );
        assert!(stack_airflow(&door(), 25.0, 15.0, f64::NAN, STANDARD_GRAVITY).is_err());
    }

    #[test]
    fn warm_zone_exhausts_above_neutral_plane() {
        let g = OpeningGeometry::new(2.0, 0.9, 0.6, Some(0.8), "corridor").unwrap();
        let f = stack_airflow(&g, 25.0, 15.0, 1.0, STANDARD_GRAVITY).unwrap();
        // band above HN is taller, so the exhaust exceeds the intake
        assert!(f.q_out > f.q_in);
    }

    #[test]
    fn geometry_validation() {
        assert!(OpeningGeometry::new(0.0, 0.9, 0.6, None, "c").is_err());
        assert!(OpeningGeometry::new(2.0, -1.0, 0.6, None, "c").is_err());
        assert!(OpeningGeometry::new(2.0, 0.9, 1.2, None, "c").is_err());
        assert!(OpeningGeometry::new(2.0, 0.9, 0.6, Some(2.5), "c").is_err());
        assert_eq!(door().neutral_plane, 1.0);
    }

    #[test]
    fn equilibrium_is_a_fixed_point() {
        let flows = FlowPair { q_in: 0.03, q_out: 0.03 };
        let c = co2_step(400.0, flows, 0.0, 400.0, 3600.0, 50.0).unwrap();
        assert!((c - 400.0).abs() < 1e-9);
    }

    #[test]
    fn zero_flow_limit_is_linear() {
        let c = co2_step(400.0, FlowPair::default(), 5e-6, 400.0, 3600.0, 50.0).unwrap();
        assert!((c - 760.0).abs() < 1e-9);
    }

    #[test]
    fn step_errors() {
        let f = FlowPair::default();
        assert_eq!(co2_step(400.0, f, 0.0, 400.0, 3600.0, 0.0).unwrap_err(), PhysicsError::NonPositiveVolume(0.0));
        assert_eq!(co2_step(400.0, f, 0.0, 400.0, -1.0, 50.0).unwrap_err(), PhysicsError::NonPositiveTimeStep(-1.0));
    }

    #[test]
    fn superposition() {
        let door = FlowPair { q_in: 0.1, q_out: 0.12 };
        let t = total_flows(&[(door, 500.0), (FlowPair::default(), 400.0)]);
        assert_eq!(t, TotalFlows { q_in: 0.1, q_out: 0.12, c_supply: 500.0 });

        let even = FlowPair { q_in: 0.05, q_out: 0.05 };
        let t = total_flows(&[(even, 500.0), (even, 400.0)]);
        assert!((t.c_supply - 450.0).abs() < 1e-12);

        let t = total_flows(&[(FlowPair::default(), 500.0), (FlowPair::default(), 400.0)]);
        assert_eq!(t.c_supply, 500.0);
    }

    // Steady state of the merged flows equals the balance of the individual
    // openings: sum(q_in_i c_i) + S = C_inf * sum(q_out_i).
    #[test]
    fn superposed_steady_state_balances_mass() {
        let a = FlowPair { q_in: 0.031, q_out: 0.027 };
        let b = FlowPair { q_in: 0.012, q_out: 0.019 };
        let s = 2e-5;
        let t = total_flows(&[(a, 520.0), (b, 410.0)]);
        let merged = steady_state(FlowPair { q_in: t.q_in, q_out: t.q_out }, s, t.c_supply);
        let direct = (a.q_in * 520.0 + b.q_in * 410.0 + s * 1e6) / (a.q_out + b.q_out);
        assert!((merged - direct).abs() < 1e-9 * direct);
    }

    #[test]
    fn generation() {
        assert_eq!(generation_rate(0, 5e-6), 0.0);
        assert!((generation_rate(4, 5e-6) - 2e-5).abs() < 1e-20);
    }

    #[test]
    fn levels() {
        let t = Co2Thresholds::default();
        assert_eq!(discretize_co2(800.0, t), Co2Level::Low);
        assert_eq!(discretize_co2(1200.0, t), Co2Level::Medium);
        assert_eq!(discretize_co2(2000.0, t), Co2Level::High);
        assert_eq!(discretize_co2(1000.0, t), Co2Level::Medium);
        assert_eq!(discretize_co2(1700.0, t), Co2Level::High);
    }

    #[test]
    fn zone_validation() {
        let mut z = ZoneParams {
            volume: 50.0,
            per_person_generation: 5e-6,
            gravity: STANDARD_GRAVITY,
            thresholds: Co2Thresholds::default(),
            boundary_concentrations: BTreeMap::from([("corridor".to_string(), 500.0)]),
        };
        assert!(z.validate().is_ok());
        z.thresholds = Co2Thresholds { medium: 1700.0, high: 1000.0 };
        assert!(z.validate().is_err());
        z.thresholds = Co2Thresholds::default();
        z.volume = 0.0;
        assert_eq!(z.validate().unwrap_err(), PhysicsError::NonPositiveVolume(0.0));
    }

    proptest! {
        #[test]
        fn semigroup(c in 0.0f64..3000.0, qi in 0.0f64..0.2, qo in 1e-4f64..0.2, s in 0.0f64..4e-5,
                     dt1 in 1.0f64..4000.0, dt2 in 1.0f64..4000.0) {
            let f = FlowPair { q_in: qi, q_out: qo };
            let whole = co2_step(c, f, s, 450.0, dt1 + dt2, 50.0).unwrap();
            let split = co2_step(co2_step(c, f, s, 450.0, dt1, 50.0).unwrap(), f, s, 450.0, dt2, 50.0).unwrap();
            prop_assert!((whole - split).abs() <= 1e-9 * whole.abs().max(1.0));
        }

        #[test]
        fn no_overshoot(c in 0.0f64..3000.0, qi in 0.0f64..0.2, qo in 1e-4f64..0.2, s in 0.0f64..4e-5, dt in 1.0f64..1e5) {
            let f = FlowPair { q_in: qi, q_out: qo };
            let next = co2_step(c, f, s, 450.0, dt, 50.0).unwrap();
            let inf = steady_state(f, s, 450.0);
            let (lo, hi) = if c < inf { (c, inf) } else { (inf, c) };
            prop_assert!(next >= lo - 1e-9 * hi && next <= hi + 1e-9 * hi);
        }

        #[test]
        fn steady_state_falls_with_ventilation(q in 1e-4f64..0.5, dq in 1e-5f64..0.5, s in 1e-7f64..4e-5) {
            let a = steady_state(FlowPair { q_in: q, q_out: q }, s, 400.0);
            let b = steady_state(FlowPair { q_in: q + dq, q_out: q + dq }, s, 400.0);
            prop_assert!(b < a);
        }

        #[test]
        fn antisymmetric_in_temperature(t1 in -10.0f64..40.0, t2 in -10.0f64..40.0, hn in 0.0f64..2.0, r in 0.0f64..1.0) {
            let g = OpeningGeometry::new(2.0, 0.9, 0.6, Some(hn), "corridor").unwrap();
            let a = stack_airflow(&g, t1, t2, r, STANDARD_GRAVITY).unwrap();
            let b = stack_airflow(&g, t2, t1, r, STANDARD_GRAVITY).unwrap();
            prop_assert_eq!(a.q_in, b.q_out);
            prop_assert_eq!(a.q_out, b.q_in);
        }

        #[test]
        fn linear_in_ratio(t1 in -10.0f64..40.0, t2 in -10.0f64..40.0, r in 0.0f64..1.0) {
            let full = stack_airflow(&door(), t1, t2, 1.0, STANDARD_GRAVITY).unwrap();
            let part = stack_airflow(&door(), t1, t2, r, STANDARD_GRAVITY).unwrap();
            prop_assert!((part.q_in - r * full.q_in).abs() <= 1e-12 * full.q_in.max(1e-300));
            prop_assert!((part.q_out - r * full.q_out).abs() <= 1e-12 * full.q_out.max(1e-300));
        }

        #[test]
        fn mid_height_neutral_plane_balances(t1 in -10.0f64..40.0, t2 in -10.0f64..40.0) {
            let f = stack_airflow(&door(), t1, t2, 1.0, STANDARD_GRAVITY).unwrap();
            prop_assert!((f.q_in - f.q_out).abs() <= 0.01 * f.q_in.max(f.q_out));
        }

        #[test]
        fn discretization_is_monotone(a in 0.0f64..5000.0, b in 0.0f64..5000.0) {
            let t = Co2Thresholds::default();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(discretize_co2(lo, t) <= discretize_co2(hi, t));
        }
    }
}
