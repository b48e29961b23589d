//! Unicycle robot state and velocity commands.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{NavError, Result};
use crate::geometry::{normalize_angle, Vec2};

pub const ROBOT_RADIUS: f64 = 0.3;

/// A twist command: forward speed and yaw rate.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Action {
    pub linear_vel: f64,
    pub angular_vel: f64,
}

impl Action {
    pub const STOP: Action = Action { linear_vel: 0.0, angular_vel: 0.0 };

    pub const fn new(linear_vel: f64, angular_vel: f64) -> Self {
        Self { linear_vel, angular_vel }
    }

    pub fn is_finite(&self) -> bool {
        self.linear_vel.is_finite() && self.angular_vel.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VelocityLimits {
    pub linear_min: f64,
    pub linear_max: f64,
    pub angular_min: f64,
    pub angular_max: f64,
}

impl Default for VelocityLimits {
    fn default() -> Self {
        Self { linear_min: -0.5, linear_max: 1.5, angular_min: -PI, angular_max: PI }
    }
}

impl VelocityLimits {
    pub fn clamp(&self, action: Action) -> Action {
        Action {
            linear_vel: action.linear_vel.clamp(self.linear_min, self.linear_max),
            angular_vel: action.angular_vel.clamp(self.angular_min, self.angular_max),
        }
    }

    /// Maps a point of `[-1, 1]^2` affinely onto the limit box.
    pub fn from_unit(&self, u_linear: f64, u_angular: f64) -> Action {
        let lerp = |lo: f64, hi: f64, u: f64| lo + 0.5 * (u + 1.0) * (hi - lo);
        Action {
            linear_vel: lerp(self.linear_min, self.linear_max, u_linear),
            angular_vel: lerp(self.angular_min, self.angular_max, u_angular),
        }
    }

    pub fn contains(&self, action: Action) -> bool {
        (self.linear_min..=self.linear_max).contains(&action.linear_vel)
            && (self.angular_min..=self.angular_max).contains(&action.angular_vel)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotState {
    pub position: Vec2,
    /// Always in (-pi, pi].
    pub heading: f64,
    pub linear_vel: f64,
    pub angular_vel: f64,
    pub prev_angular_vel: f64,
    pub radius: f64,
}

impl RobotState {
    pub fn at(position: Vec2, heading: f64) -> Self {
        Self {
            position,
            heading: normalize_angle(heading),
            linear_vel: 0.0,
            angular_vel: 0.0,
            prev_angular_vel: 0.0,
            radius: ROBOT_RADIUS,
        }
    }

    /// Heading-first explicit Euler step of the unicycle model. The action
    /// is clamped to `limits` before integration and stored as the current
    /// command; the previous yaw rate is kept for the smoothness penalty.
    pub fn apply_action(&self, action: Action, dt: f64, limits: &VelocityLimits) -> Result<RobotState> {
        if !action.is_finite() {
            return Err(NavError::RejectedInput(format!("non-finite action {action:?}")));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(NavError::RejectedInput(format!("dt must be positive, got {dt}")));
        }
        let cmd = limits.clamp(action);
        let heading = normalize_angle(self.heading + cmd.angular_vel * dt);
        let position = self.position + Vec2::from_angle(heading) * (cmd.linear_vel * dt);
        Ok(RobotState {
            position,
            heading,
            linear_vel: cmd.linear_vel,
            angular_vel: cmd.angular_vel,
            prev_angular_vel: self.angular_vel,
            radius: self.radius,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn origin() -> RobotState {
        RobotState::at(Vec2::ZERO, 0.0)
    }

    #[test]
    fn straight_line_step() {
        let s = origin().apply_action(Action::new(1.0, 0.0), 0.1, &VelocityLimits::default()).unwrap();
        assert!((s.position.x - 0.1).abs() < 1e-15);
        assert_eq!(s.position.y, 0.0);
    }

    #[test]
    fn pure_rotation_reaches_pi() {
        let s = origin().apply_action(Action::new(0.0, PI), 1.0, &VelocityLimits::default()).unwrap();
        assert_eq!(s.heading, PI);
        assert_eq!(s.position, Vec2::ZERO);
    }

    #[test]
    fn heading_first_arc_step() {
        let s = origin().apply_action(Action::new(1.0, PI / 2.0), 0.1, &VelocityLimits::default()).unwrap();
        let expected = Vec2::new(0.1 * (0.05 * PI).cos(), 0.1 * (0.05 * PI).sin());
        assert!((s.position.x - expected.x).abs() < 1e-15);
        assert!((s.position.y - expected.y).abs() < 1e-15);
        assert!((s.heading - 0.05 * PI).abs() < 1e-15);
    }

    #[test]
    fn clamps_and_tracks_previous_yaw_rate() {
        let limits = VelocityLimits::default();
        let s1 = origin().apply_action(Action::new(9.0, 1.0), 0.1, &limits).unwrap();
        assert_eq!(s1.linear_vel, 1.5);
        let s2 = s1.apply_action(Action::new(0.0, -9.0), 0.1, &limits).unwrap();
        assert_eq!(s2.prev_angular_vel, 1.0);
        assert_eq!(s2.angular_vel, -PI);
    }

    #[test]
    fn rejects_non_finite_commands() {
        let limits = VelocityLimits::default();
        assert!(origin().apply_action(Action::new(f64::NAN, 0.0), 0.1, &limits).is_err());
        assert!(origin().apply_action(Action::new(0.0, f64::INFINITY), 0.1, &limits).is_err());
        assert!(origin().apply_action(Action::STOP, 0.0, &limits).is_err());
    }

    #[test]
    fn unit_box_midpoint() {
        let a = VelocityLimits::default().from_unit(0.0, 0.0);
        assert_eq!(a, Action::new(0.5, 0.0));
    }

    proptest! {
        #[test]
        fn zero_command_is_identity(x in -5.0f64..5.0, y in -5.0f64..5.0, h in -3.0f64..3.0) {
            let s = RobotState::at(Vec2::new(x, y), h);
            let n = s.apply_action(Action::STOP, 0.1, &VelocityLimits::default()).unwrap();
            prop_assert_eq!(n.position, s.position);
            prop_assert_eq!(n.heading, s.heading);
        }

        #[test]
        fn displacement_equals_speed_times_dt(v in -0.5f64..1.5, w in -3.0f64..3.0, h in -3.0f64..3.0) {
            let s = RobotState::at(Vec2::new(1.0, 2.0), h);
            let n = s.apply_action(Action::new(v, w), 0.1, &VelocityLimits::default()).unwrap();
            prop_assert!((n.position.distance(s.position) - v.abs() * 0.1).abs() < 1e-12);
            prop_assert!(n.heading > -PI && n.heading <= PI);
        }
    }
}
