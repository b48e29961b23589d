//! Dense per-transition reward: goal and collision terminal terms, goal
//! approach, obstacle safety distance, plan following and yaw-rate smoothness.

use serde::{Deserialize, Serialize};

use crate::error::{NavError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardConstants {
    pub goal_reached: f64,
    pub collision: f64,
    pub approach_gain: f64,
    pub retreat_gain: f64,
    /// Robot-center to obstacle-surface distance below which the safety penalty applies.
    pub safe_distance: f64,
    pub safety_penalty: f64,
    pub plan_proximity: f64,
    pub plan_speed_gain: f64,
    pub plan_approach_gain: f64,
    pub yaw_change_scale: f64,
}

impl Default for RewardConstants {
    fn default() -> Self {
        Self {
            goal_reached: 45.0,
            collision: -50.0,
            approach_gain: 0.8,
            retreat_gain: 0.6,
            safe_distance: 0.345,
            safety_penalty: -1.25,
            plan_proximity: 0.5,
            plan_speed_gain: 0.1,
            plan_approach_gain: 0.2,
            yaw_change_scale: 1000.0,
        }
    }
}

/// Quantities of one transition `t-1 -> t` that the reward depends on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionSnapshot {
    pub prev_dist_goal: f64,
    pub curr_dist_goal: f64,
    pub prev_dist_plan: f64,
    pub curr_dist_plan: f64,
    /// May be `f64::INFINITY` when nothing is in range.
    pub min_obstacle_dist: f64,
    pub linear_vel: f64,
    pub prev_angular_vel: f64,
    pub angular_vel: f64,
    pub goal_reached: bool,
    pub collided: bool,
}

impl TransitionSnapshot {
    /// A transition where nothing happens: all terms evaluate to zero.
    pub fn neutral() -> Self {
        Self {
            prev_dist_goal: 5.0,
            curr_dist_goal: 5.0,
            prev_dist_plan: 1.0,
            curr_dist_plan: 1.0,
            min_obstacle_dist: f64::INFINITY,
            linear_vel: 0.0,
            prev_angular_vel: 0.0,
            angular_vel: 0.0,
            goal_reached: false,
            collided: false,
        }
    }

    fn validate(&self) -> Result<()> {
        let finite_distances = [
            ("prev_dist_goal", self.prev_dist_goal),
            ("curr_dist_goal", self.curr_dist_goal),
            ("prev_dist_plan", self.prev_dist_plan),
            ("curr_dist_plan", self.curr_dist_plan),
        ];
        for (name, v) in finite_distances {
            if !v.is_finite() || v < 0.0 {
                return Err(NavError::RejectedInput(format!("{name} must be a finite non-negative distance, got {v}")));
            }
        }
        if self.min_obstacle_dist.is_nan() || self.min_obstacle_dist < 0.0 {
            return Err(NavError::RejectedInput(format!("min_obstacle_dist must be >= 0 or +inf, got {}", self.min_obstacle_dist)));
        }
        for (name, v) in [
            ("linear_vel", self.linear_vel),
            ("prev_angular_vel", self.prev_angular_vel),
            ("angular_vel", self.angular_vel),
        ] {
            if !v.is_finite() {
                return Err(NavError::RejectedInput(format!("{name} must be finite, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub r_gr: f64,
    pub r_c: f64,
    pub r_ga: f64,
    pub r_sd: f64,
    pub r_fgp: f64,
    pub r_dgp: f64,
    pub r_adc: f64,
    pub total: f64,
}

impl RewardBreakdown {
    pub fn terms(&self) -> [f64; 7] {
        [self.r_gr, self.r_c, self.r_ga, self.r_sd, self.r_fgp, self.r_dgp, self.r_adc]
    }

    fn from_terms(r_gr: f64, r_c: f64, r_ga: f64, r_sd: f64, r_fgp: f64, r_dgp: f64, r_adc: f64) -> Self {
        let total = r_gr + r_c + r_ga + r_sd + r_fgp + r_dgp + r_adc;
        Self { r_gr, r_c, r_ga, r_sd, r_fgp, r_dgp, r_adc, total }
    }
}

pub fn compute_reward(snap: &TransitionSnapshot) -> Result<RewardBreakdown> {
    compute_reward_with(snap, &RewardConstants::default())
}

pub fn compute_reward_with(snap: &TransitionSnapshot, k: &RewardConstants) -> Result<RewardBreakdown> {
    snap.validate()?;

    let r_gr = if snap.goal_reached { k.goal_reached } else { 0.0 };
    let r_c = if snap.collided { k.collision } else { 0.0 };

    let diff_goal = snap.prev_dist_goal - snap.curr_dist_goal;
    let r_ga = if diff_goal > 0.0 { k.approach_gain * diff_goal } else { k.retreat_gain * diff_goal };

    let r_sd = if snap.min_obstacle_dist < k.safe_distance { k.safety_penalty } else { 0.0 };

    let r_fgp = if snap.curr_dist_plan < k.plan_proximity { k.plan_speed_gain * snap.linear_vel } else { 0.0 };

    // The distance to the plan is non-negative, so the ratio condition
    // reduces to the sign of the change.
    let diff_plan = snap.prev_dist_plan - snap.curr_dist_plan;
    let r_dgp = if diff_plan > 0.0 { k.plan_approach_gain * diff_plan } else { 0.0 };

    let r_adc = -(snap.prev_angular_vel - snap.angular_vel).abs().powi(4) / k.yaw_change_scale;

    Ok(RewardBreakdown::from_terms(r_gr, r_c, r_ga, r_sd, r_fgp, r_dgp, r_adc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn goal_bonus() {
        let r = compute_reward(&TransitionSnapshot { goal_reached: true, ..TransitionSnapshot::neutral() }).unwrap();
        assert_eq!(r.r_gr, 45.0);
        assert_eq!(r.total, 45.0);
    }

    #[test]
    fn collision_with_contact() {
        let r = compute_reward(&TransitionSnapshot { collided: true, min_obstacle_dist: 0.0, ..TransitionSnapshot::neutral() }).unwrap();
        assert_eq!((r.r_c, r.r_sd, r.total), (-50.0, -1.25, -51.25));
    }

    #[test]
    fn approach_and_retreat() {
        let toward = compute_reward(&TransitionSnapshot { prev_dist_goal: 5.0, curr_dist_goal: 4.9, ..TransitionSnapshot::neutral() }).unwrap();
        assert!((toward.r_ga - 0.08).abs() < 1e-12);
        assert_eq!(toward.total, toward.r_ga);
        let away = compute_reward(&TransitionSnapshot { prev_dist_goal: 4.9, curr_dist_goal: 5.0, ..TransitionSnapshot::neutral() }).unwrap();
        assert!((away.r_ga + 0.06).abs() < 1e-12);
    }

    #[test]
    fn yaw_jump_penalty() {
        let r = compute_reward(&TransitionSnapshot { angular_vel: 1.0, ..TransitionSnapshot::neutral() }).unwrap();
        assert_eq!(r.r_adc, -0.001);
    }

    #[test]
    fn plan_following_speed_bonus() {
        let r = compute_reward(&TransitionSnapshot { curr_dist_plan: 0.3, prev_dist_plan: 0.3, linear_vel: 1.0, ..TransitionSnapshot::neutral() }).unwrap();
        assert!((r.r_fgp - 0.1).abs() < 1e-15);
    }

    #[test]
    fn neutral_is_zero() {
        let r = compute_reward(&TransitionSnapshot::neutral()).unwrap();
        assert_eq!(r.terms(), [0.0; 7]);
        assert_eq!(r.total, 0.0);
    }

    #[test]
    fn safe_distance_boundary_is_strict() {
        let r = compute_reward(&TransitionSnapshot { min_obstacle_dist: 0.345, ..TransitionSnapshot::neutral() }).unwrap();
        assert_eq!(r.r_sd, 0.0);
    }

    #[test]
    fn rejects_non_finite_fields() {
        assert!(compute_reward(&TransitionSnapshot { linear_vel: f64::NAN, ..TransitionSnapshot::neutral() }).is_err());
        assert!(compute_reward(&TransitionSnapshot { curr_dist_goal: f64::INFINITY, ..TransitionSnapshot::neutral() }).is_err());
        assert!(compute_reward(&TransitionSnapshot { min_obstacle_dist: f64::NAN, ..TransitionSnapshot::neutral() }).is_err());
        assert!(compute_reward(&TransitionSnapshot { min_obstacle_dist: f64::INFINITY, ..TransitionSnapshot::neutral() }).is_ok());
    }

    fn any_snapshot() -> impl Strategy<Value = TransitionSnapshot> {
        (
            (0.0f64..20.0, 0.0f64..20.0, 0.0f64..3.0, 0.0f64..3.0),
            prop_oneof![Just(f64::INFINITY), 0.0f64..2.0],
            (-0.5f64..1.5, -3.2f64..3.2, -3.2f64..3.2),
            (any::<bool>(), any::<bool>()),
        )
            .prop_map(|((pg, cg, pp, cp), obst, (v, w0, w1), (gr, c))| TransitionSnapshot {
                prev_dist_goal: pg,
                curr_dist_goal: cg,
                prev_dist_plan: pp,
                curr_dist_plan: cp,
                min_obstacle_dist: obst,
                linear_vel: v,
                prev_angular_vel: w0,
                angular_vel: w1,
                goal_reached: gr,
                collided: c,
            })
    }

    proptest! {
        #[test]
        fn total_is_term_sum(s in any_snapshot()) {
            let r = compute_reward(&s).unwrap();
            let [a, b, c, d, e, f, g] = r.terms();
            prop_assert_eq!(r.total, a + b + c + d + e + f + g);
        }

        #[test]
        fn approach_asymmetry(d in 1e-6f64..5.0, base in 5.0f64..10.0) {
            let toward = compute_reward(&TransitionSnapshot { prev_dist_goal: base, curr_dist_goal: base - d, ..TransitionSnapshot::neutral() }).unwrap();
            let away = compute_reward(&TransitionSnapshot { prev_dist_goal: base - d, curr_dist_goal: base, ..TransitionSnapshot::neutral() }).unwrap();
            let diff = base - (base - d);
            prop_assert_eq!(toward.r_ga, 0.8 * diff);
            prop_assert_eq!(away.r_ga, 0.6 * -diff);
        }

        #[test]
        fn smoothness_penalty_sign(s in any_snapshot()) {
            let r = compute_reward(&s).unwrap();
            prop_assert!(r.r_adc <= 0.0);
            prop_assert_eq!(r.r_adc == 0.0, s.prev_angular_vel == s.angular_vel);
        }

        #[test]
        fn plan_speed_bonus_sign(s in any_snapshot()) {
            let r = compute_reward(&s).unwrap();
            if s.curr_dist_plan >= 0.5 {
                prop_assert_eq!(r.r_fgp, 0.0);
            } else {
                prop_assert_eq!(r.r_fgp >= 0.0, s.linear_vel >= 0.0);
            }
        }
    }
}
