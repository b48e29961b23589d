//! Policies map observations to velocity commands.

mod cem;
mod mlp;

pub use cem::{refit_elite, train_cem, train_curriculum, CemConfig, CemTrainer, IterationReport, TrainingRow};
pub use mlp::{MlpPolicy, PolicyParams, POLICY_FORMAT, POLICY_VERSION};

use crate::error::{NavError, Result};
use crate::observation::ObservationVector;
use crate::world::{Action, VelocityLimits};

pub trait Policy: Sync {
    fn act(&self, obs: &ObservationVector) -> Result<Action>;

    fn name(&self) -> String;
}

/// Heading gain of the proportional baselines.
pub const BASELINE_GAIN: f64 = 1.5;

/// Proportional steering toward a bearing, slowing down as it turns away.
fn steer(limits: &VelocityLimits, gain: f64, bearing: f64) -> Action {
    let angular = (gain * bearing).clamp(limits.angular_min, limits.angular_max);
    let linear = limits.linear_max * bearing.cos().max(0.0);
    limits.clamp(Action::new(linear, angular))
}

/// Drives straight at the global goal, ignoring the plan and the scan.
#[derive(Debug, Clone, Copy)]
pub struct GoToGoal {
    pub limits: VelocityLimits,
    pub gain: f64,
}

impl GoToGoal {
    pub fn new(limits: VelocityLimits) -> Self {
        Self { limits, gain: BASELINE_GAIN }
    }
}

impl Policy for GoToGoal {
    fn act(&self, obs: &ObservationVector) -> Result<Action> {
        check_width(obs)?;
        Ok(steer(&self.limits, self.gain, obs.goal().1))
    }

    fn name(&self) -> String {
        "goto-goal".into()
    }
}

/// Follows the lookahead subgoal of the global plan. Needs a layout with a subgoal slot.
#[derive(Debug, Clone, Copy)]
pub struct GoToSubgoal {
    pub limits: VelocityLimits,
    pub gain: f64,
}

impl GoToSubgoal {
    pub fn new(limits: VelocityLimits) -> Self {
        Self { limits, gain: BASELINE_GAIN }
    }
}

impl Policy for GoToSubgoal {
    fn act(&self, obs: &ObservationVector) -> Result<Action> {
        check_width(obs)?;
        let (_, bearing) = obs
            .subgoal()
            .ok_or_else(|| NavError::InvalidConfig(format!("goto-subgoal needs a subgoal input; {} has none", obs.variant)))?;
        Ok(steer(&self.limits, self.gain, bearing))
    }

    fn name(&self) -> String {
        "goto-subgoal".into()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroPolicy;

impl Policy for ZeroPolicy {
    fn act(&self, obs: &ObservationVector) -> Result<Action> {
        check_width(obs)?;
        Ok(Action::STOP)
    }

    fn name(&self) -> String {
        "zero".into()
    }
}

fn check_width(obs: &ObservationVector) -> Result<()> {
    let expected = obs.variant.observation_size();
    if obs.len() != expected {
        return Err(NavError::DimensionMismatch { what: "observation", expected, actual: obs.len() });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observation::AgentVariant;
    use std::f64::consts::FRAC_PI_2;

    fn obs_with_subgoal(bearing: f64) -> ObservationVector {
        let mut values = vec![10.0; 364];
        values[360] = 5.0;
        values[362] = 2.0;
        values[363] = bearing;
        ObservationVector { values, variant: AgentVariant::Agent4 }
    }

    #[test]
    fn subgoal_dead_ahead() {
        let a = GoToSubgoal::new(VelocityLimits::default()).act(&obs_with_subgoal(0.0)).unwrap();
        assert_eq!(a, Action::new(1.5, 0.0));
    }

    #[test]
    fn subgoal_abeam() {
        let a = GoToSubgoal::new(VelocityLimits::default()).act(&obs_with_subgoal(FRAC_PI_2)).unwrap();
        assert_eq!(a.angular_vel, 1.5 * FRAC_PI_2);
        assert!(a.linear_vel.abs() < 1e-12);
        let b = GoToSubgoal::new(VelocityLimits::default()).act(&obs_with_subgoal(0.5)).unwrap();
        assert!((b.angular_vel - 0.75).abs() < 1e-15);
        assert!((b.linear_vel - 1.5 * 0.5f64.cos()).abs() < 1e-15);
    }

    #[test]
    fn subgoal_baseline_needs_subgoal_slot() {
        let obs = ObservationVector { values: vec![1.0; 362], variant: AgentVariant::Agent2 };
        assert!(GoToSubgoal::new(VelocityLimits::default()).act(&obs).is_err());
        assert!(GoToGoal::new(VelocityLimits::default()).act(&obs).is_ok());
    }

    #[test]
    fn width_mismatch_rejected() {
        let obs = ObservationVector { values: vec![1.0; 300], variant: AgentVariant::Agent2 };
        assert!(matches!(ZeroPolicy.act(&obs), Err(NavError::DimensionMismatch { .. })));
    }
}
