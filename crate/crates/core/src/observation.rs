//! The six agent input layouts and their flat observation vectors.
//!
//! Every layout starts with the 360 scan ranges followed by the goal as
//! `(rho, theta)`. Depending on the variant it continues with the subgoal
//! `(rho, theta)`, 50 waypoints as interleaved `(rho, theta)` pairs in plan
//! order, and the summed plan length, in that order.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{NavError, Result};
use crate::geometry::Vec2;
use crate::sensing::{relative_polar, LidarScan, SCAN_BEAMS};
use crate::waypoints::{WaypointSet, WAYPOINT_COUNT};
use crate::world::RobotState;

pub const GOAL_OFFSET: usize = SCAN_BEAMS;
pub const SHARED_PREFIX: usize = SCAN_BEAMS + 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentVariant {
    Agent1,
    Agent2,
    Agent3,
    Agent4,
    Agent5,
    Agent6,
}

impl AgentVariant {
    pub const ALL: [AgentVariant; 6] = [
        AgentVariant::Agent1,
        AgentVariant::Agent2,
        AgentVariant::Agent3,
        AgentVariant::Agent4,
        AgentVariant::Agent5,
        AgentVariant::Agent6,
    ];

    pub fn uses_subgoal(self) -> bool {
        matches!(self, AgentVariant::Agent1 | AgentVariant::Agent3 | AgentVariant::Agent4)
    }

    pub fn uses_waypoints(self) -> bool {
        matches!(self, AgentVariant::Agent1 | AgentVariant::Agent6)
    }

    pub fn uses_length(self) -> bool {
        matches!(self, AgentVariant::Agent3 | AgentVariant::Agent5)
    }

    pub fn observation_size(self) -> usize {
        self.layout().len
    }

    pub fn layout(self) -> Layout {
        let mut next = SHARED_PREFIX;
        let mut take = |used: bool, n: usize| {
            used.then(|| {
                let at = next;
                next += n;
                at
            })
        };
        let subgoal = take(self.uses_subgoal(), 2);
        let waypoints = take(self.uses_waypoints(), 2 * WAYPOINT_COUNT);
        let length = take(self.uses_length(), 1);
        Layout { subgoal, waypoints, length, len: next }
    }

    pub fn name(self) -> &'static str {
        match self {
            AgentVariant::Agent1 => "agent1",
            AgentVariant::Agent2 => "agent2",
            AgentVariant::Agent3 => "agent3",
            AgentVariant::Agent4 => "agent4",
            AgentVariant::Agent5 => "agent5",
            AgentVariant::Agent6 => "agent6",
        }
    }
}

impl fmt::Display for AgentVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AgentVariant {
    type Err = NavError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace(['-', '_', ' '], "");
        AgentVariant::ALL
            .into_iter()
            .find(|v| v.name() == key || key == v.name()[5..])
            .ok_or_else(|| NavError::InvalidConfig(format!("unknown agent variant {s:?} (expected agent1..agent6)")))
    }
}

/// Start offsets of the optional blocks within an observation vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub subgoal: Option<usize>,
    pub waypoints: Option<usize>,
    pub length: Option<usize>,
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationVector {
    pub values: Vec<f64>,
    pub variant: AgentVariant,
}

impl ObservationVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scan(&self) -> &[f64] {
        &self.values[..SCAN_BEAMS]
    }

    /// Goal as `(rho, theta)`.
    pub fn goal(&self) -> (f64, f64) {
        (self.values[GOAL_OFFSET], self.values[GOAL_OFFSET + 1])
    }

    /// Subgoal as `(rho, theta)` when the layout carries one.
    pub fn subgoal(&self) -> Option<(f64, f64)> {
        self.variant.layout().subgoal.map(|at| (self.values[at], self.values[at + 1]))
    }
}

/// Everything an observation can be assembled from; unused parts are ignored.
#[derive(Debug, Clone, Copy)]
pub struct ObservationInputs<'a> {
    pub scan: &'a LidarScan,
    pub state: &'a RobotState,
    pub goal: Vec2,
    pub subgoal: Vec2,
    pub waypoints: &'a WaypointSet,
    pub plan_length: f64,
}

pub fn build_observation(variant: AgentVariant, inputs: ObservationInputs<'_>) -> Result<ObservationVector> {
    let ObservationInputs { scan, state, goal, subgoal, waypoints, plan_length } = inputs;
    if scan.ranges.len() != SCAN_BEAMS {
        return Err(NavError::DimensionMismatch { what: "scan beams", expected: SCAN_BEAMS, actual: scan.ranges.len() });
    }
    if waypoints.points().len() != WAYPOINT_COUNT {
        return Err(NavError::DimensionMismatch { what: "waypoints", expected: WAYPOINT_COUNT, actual: waypoints.points().len() });
    }
    let mut values = Vec::with_capacity(variant.observation_size());
    values.extend_from_slice(&scan.ranges);
    let push_point = |values: &mut Vec<f64>, p: Vec2| {
        let polar = relative_polar(state, p);
        values.push(polar.rho);
        values.push(polar.theta);
    };
    push_point(&mut values, goal);
    if variant.uses_subgoal() {
        push_point(&mut values, subgoal);
    }
    if variant.uses_waypoints() {
        for &p in waypoints.points() {
            push_point(&mut values, p);
        }
    }
    if variant.uses_length() {
        values.push(plan_length);
    }
    debug_assert_eq!(values.len(), variant.observation_size());
    Ok(ObservationVector { values, variant })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inputs<'a>(scan: &'a LidarScan, state: &'a RobotState, wp: &'a WaypointSet) -> ObservationInputs<'a> {
        ObservationInputs {
            scan,
            state,
            goal: Vec2::new(1.0, 0.0),
            subgoal: Vec2::new(0.0, 2.0),
            waypoints: wp,
            plan_length: 7.5,
        }
    }

    #[test]
    fn sizes_follow_input_table() {
        let sizes: Vec<usize> = AgentVariant::ALL.iter().map(|v| v.observation_size()).collect();
        assert_eq!(sizes, vec![464, 362, 365, 364, 363, 462]);
        assert_eq!(AgentVariant::Agent1.layout().waypoints, Some(364));
        assert_eq!(AgentVariant::Agent3.layout().length, Some(364));
        assert_eq!(AgentVariant::Agent6.layout().waypoints, Some(362));
        assert_eq!(AgentVariant::Agent5.layout().length, Some(362));
    }

    #[test]
    fn agent2_composition() {
        let scan = LidarScan { ranges: vec![10.0; 360], max_range: 10.0 };
        let state = RobotState::at(Vec2::ZERO, 0.0);
        let wp = WaypointSet::from_points(vec![Vec2::ZERO; 50]).unwrap();
        let obs = build_observation(AgentVariant::Agent2, inputs(&scan, &state, &wp)).unwrap();
        let mut expected = vec![10.0; 360];
        expected.extend([1.0, 0.0]);
        assert_eq!(obs.values, expected);
    }

    #[test]
    fn agent4_appends_subgoal() {
        let scan = LidarScan { ranges: vec![10.0; 360], max_range: 10.0 };
        let state = RobotState::at(Vec2::ZERO, 0.0);
        let wp = WaypointSet::from_points(vec![Vec2::ZERO; 50]).unwrap();
        let a2 = build_observation(AgentVariant::Agent2, inputs(&scan, &state, &wp)).unwrap();
        let a4 = build_observation(AgentVariant::Agent4, inputs(&scan, &state, &wp)).unwrap();
        assert_eq!(a4.values[..362], a2.values[..]);
        assert_eq!(a4.values[362], 2.0);
        assert!((a4.values[363] - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert_eq!(a4.subgoal(), Some((a4.values[362], a4.values[363])));
    }

    #[test]
    fn waypoints_at_robot_encode_to_zero() {
        let scan = LidarScan { ranges: vec![3.0; 360], max_range: 10.0 };
        let state = RobotState::at(Vec2::new(2.0, 3.0), 0.4);
        let wp = WaypointSet::from_points(vec![state.position; 50]).unwrap();
        let obs = build_observation(AgentVariant::Agent1, inputs(&scan, &state, &wp)).unwrap();
        assert!(obs.values[364..464].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn length_slot() {
        let scan = LidarScan { ranges: vec![3.0; 360], max_range: 10.0 };
        let state = RobotState::at(Vec2::ZERO, 0.0);
        let wp = WaypointSet::from_points(vec![Vec2::ZERO; 50]).unwrap();
        assert_eq!(build_observation(AgentVariant::Agent3, inputs(&scan, &state, &wp)).unwrap().values[364], 7.5);
        assert_eq!(build_observation(AgentVariant::Agent5, inputs(&scan, &state, &wp)).unwrap().values[362], 7.5);
    }

    #[test]
    fn rejects_wrong_scan_width() {
        let scan = LidarScan { ranges: vec![3.0; 359], max_range: 10.0 };
        let state = RobotState::at(Vec2::ZERO, 0.0);
        let wp = WaypointSet::from_points(vec![Vec2::ZERO; 50]).unwrap();
        assert!(matches!(
            build_observation(AgentVariant::Agent2, inputs(&scan, &state, &wp)),
            Err(NavError::DimensionMismatch { expected: 360, actual: 359, .. })
        ));
        assert!(WaypointSet::from_points(vec![Vec2::ZERO; 49]).is_err());
    }

    #[test]
    fn parses_variant_names() {
        assert_eq!("agent3".parse::<AgentVariant>().unwrap(), AgentVariant::Agent3);
        assert_eq!("Agent-6".parse::<AgentVariant>().unwrap(), AgentVariant::Agent6);
        assert_eq!("1".parse::<AgentVariant>().unwrap(), AgentVariant::Agent1);
        assert!("agent7".parse::<AgentVariant>().is_err());
    }
}
