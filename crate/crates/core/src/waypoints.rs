//! Plan-derived inputs for the local agent: strided waypoints, a lookahead
//! subgoal and the summed plan length.

use serde::{Deserialize, Serialize};

use crate::error::{NavError, Result};
use crate::geometry::Vec2;
use crate::planner::GlobalPlan;

pub const WAYPOINT_COUNT: usize = 50;
pub const WAYPOINT_STRIDE: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaypointSet {
    points: Vec<Vec2>,
}

impl WaypointSet {
    /// Wraps an explicit list; it must hold exactly [`WAYPOINT_COUNT`] points.
    pub fn from_points(points: Vec<Vec2>) -> Result<Self> {
        if points.len() != WAYPOINT_COUNT {
            return Err(NavError::DimensionMismatch { what: "waypoints", expected: WAYPOINT_COUNT, actual: points.len() });
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }
}

/// Plan points at indices 5, 10, 15, ... (at most 50). Short plans pad with
/// the last extracted point; plans with fewer than six points yield their
/// final point fifty times.
pub fn subsample_waypoints(plan: &GlobalPlan) -> Result<WaypointSet> {
    let last = *plan.points.last().ok_or(NavError::EmptyPlan)?;
    let mut points: Vec<Vec2> = plan
        .points
        .iter()
        .skip(WAYPOINT_STRIDE)
        .step_by(WAYPOINT_STRIDE)
        .take(WAYPOINT_COUNT)
        .copied()
        .collect();
    let fill = points.last().copied().unwrap_or(last);
    points.resize(WAYPOINT_COUNT, fill);
    Ok(WaypointSet { points })
}

pub fn plan_length(plan: &GlobalPlan) -> f64 {
    path_length(&plan.points)
}

pub fn path_length(points: &[Vec2]) -> f64 {
    points.windows(2).map(|w| w[0].distance(w[1])).sum()
}

/// Index of the plan point closest to `p`; lowest index wins ties.
pub fn nearest_index(points: &[Vec2], p: Vec2) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, q) in points.iter().enumerate() {
        let d = q.distance(p);
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((i, d));
        }
    }
    best.map(|(i, _)| i)
}

/// Distance from `p` to the closest plan point.
pub fn distance_to_plan(points: &[Vec2], p: Vec2) -> Option<f64> {
    points.iter().map(|q| q.distance(p)).reduce(f64::min)
}

/// Index of the subgoal when the robot's nearest plan point is `from`.
pub fn subgoal_index(points: &[Vec2], from: usize, lookahead: f64) -> usize {
    let mut arc = 0.0;
    let mut idx = from;
    while idx + 1 < points.len() {
        let next = arc + points[idx].distance(points[idx + 1]);
        if next > lookahead {
            break;
        }
        arc = next;
        idx += 1;
    }
    idx
}

/// Farthest plan point within `lookahead` of arc length past the plan point
/// nearest the robot; the plan's goal once less than `lookahead` remains.
pub fn compute_subgoal(plan: &GlobalPlan, position: Vec2, lookahead: f64) -> Result<Vec2> {
    if lookahead.is_nan() || lookahead <= 0.0 {
        return Err(NavError::RejectedInput(format!("lookahead must be positive, got {lookahead}")));
    }
    let from = nearest_index(&plan.points, position).ok_or(NavError::EmptyPlan)?;
    Ok(plan.points[subgoal_index(&plan.points, from, lookahead)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::OctileCost;
    use proptest::prelude::*;

    fn plan_of(points: Vec<Vec2>) -> GlobalPlan {
        GlobalPlan { cells: Vec::new(), points, cost: OctileCost::ZERO, expanded: 0 }
    }

    fn line(n: usize, spacing: f64) -> GlobalPlan {
        plan_of((0..n).map(|i| Vec2::new(i as f64 * spacing, 0.0)).collect())
    }

    #[test]
    fn eleven_points_pad_with_tenth() {
        let plan = line(11, 1.0);
        let wp = subsample_waypoints(&plan).unwrap();
        assert_eq!(wp.points()[0], plan.points[5]);
        assert!(wp.points()[1..].iter().all(|&p| p == plan.points[10]));
    }

    #[test]
    fn long_plan_fills_exactly() {
        let plan = line(300, 0.1);
        let wp = subsample_waypoints(&plan).unwrap();
        let expected: Vec<Vec2> = (1..=50).map(|k| plan.points[5 * k]).collect();
        assert_eq!(wp.points(), expected.as_slice());
    }

    #[test]
    fn short_plan_repeats_final_point() {
        let plan = line(3, 1.0);
        let wp = subsample_waypoints(&plan).unwrap();
        assert!(wp.points().iter().all(|&p| p == plan.points[2]));
        assert!(matches!(subsample_waypoints(&plan_of(vec![])), Err(NavError::EmptyPlan)));
    }

    #[test]
    fn lengths() {
        assert_eq!(plan_length(&line(1, 1.0)), 0.0);
        let p = plan_of(vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(1.0, 1.0)]);
        assert_eq!(plan_length(&p), 2.0);
    }

    #[test]
    fn subgoal_two_meters_along_straight_plan() {
        let plan = line(101, 0.1);
        let sg = compute_subgoal(&plan, Vec2::ZERO, 2.0).unwrap();
        assert!((sg.x - 2.0).abs() <= 0.1 + 1e-9 && sg.y == 0.0);
    }

    #[test]
    fn subgoal_clamps_to_goal() {
        let plan = line(101, 0.1);
        assert_eq!(compute_subgoal(&plan, Vec2::new(9.5, 0.0), 2.0).unwrap(), plan.points[100]);
        assert_eq!(compute_subgoal(&plan, Vec2::new(10.0, 0.0), 2.0).unwrap(), plan.points[100]);
        assert!(compute_subgoal(&plan, Vec2::ZERO, 0.0).is_err());
        assert!(matches!(compute_subgoal(&plan_of(vec![]), Vec2::ZERO, 1.0), Err(NavError::EmptyPlan)));
    }

    #[test]
    fn nearest_ties_pick_lowest_index() {
        let pts = vec![Vec2::new(-1.0, 0.0), Vec2::new(1.0, 0.0)];
        assert_eq!(nearest_index(&pts, Vec2::ZERO), Some(0));
    }

    proptest! {
        #[test]
        fn waypoint_count_is_always_fifty(n in 1usize..400) {
            prop_assert_eq!(subsample_waypoints(&line(n, 0.1)).unwrap().points().len(), WAYPOINT_COUNT);
        }

        #[test]
        fn plan_length_zero_iff_single_point(n in 1usize..50) {
            let len = plan_length(&line(n, 0.1));
            prop_assert!(len >= 0.0);
            prop_assert_eq!(len == 0.0, n == 1);
        }

        #[test]
        fn subgoal_progress_is_monotone(n in 2usize..200, look in 0.05f64..5.0) {
            let plan = line(n, 0.1);
            let mut last = 0;
            for from in 0..n {
                let k = subgoal_index(&plan.points, from, look);
                prop_assert!(k >= last);
                prop_assert!(path_length(&plan.points[from..=k]) <= look + 0.1 * std::f64::consts::SQRT_2);
                last = k;
            }
        }
    }
}
