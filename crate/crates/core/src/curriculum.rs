//! Seven-stage training curriculum with success-rate advancement.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{NavError, Result};
use crate::world::{MapKind, MapSpec, ScenarioConfig};

pub const STAGE_COUNT: usize = 7;
pub const ADVANCE_THRESHOLD: f64 = 0.80;
pub const DEFAULT_WINDOW: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageSpec {
    pub index: usize,
    pub map_kind: MapKind,
    /// Square map side in cells at 0.1 m per cell.
    pub size_cells: usize,
    pub known_static: usize,
    pub unknown_static: usize,
    pub unknown_dynamic: usize,
}

pub const STAGE_RESOLUTION: f64 = 0.1;

impl StageSpec {
    pub fn scenario(&self) -> ScenarioConfig {
        ScenarioConfig {
            map: MapSpec::Generated { kind: self.map_kind, width: self.size_cells, height: self.size_cells, resolution: STAGE_RESOLUTION },
            known_static: self.known_static,
            unknown_static: self.unknown_static,
            dynamic: self.unknown_dynamic,
            ..ScenarioConfig::default()
        }
    }

    pub fn obstacle_count(&self) -> usize {
        self.known_static + self.unknown_static + self.unknown_dynamic
    }
}

pub fn stage_table() -> Vec<StageSpec> {
    use MapKind::*;
    let rows = [
        (Outdoor, 100, 0, 0, 0),
        (Mixed, 150, 6, 0, 0),
        (Outdoor, 200, 6, 6, 0),
        (Indoor, 200, 6, 6, 0),
        (Outdoor, 200, 6, 6, 6),
        (Indoor, 200, 6, 6, 6),
        (Outdoor, 200, 6, 10, 10),
    ];
    rows.iter()
        .enumerate()
        .map(|(k, &(map_kind, size_cells, known_static, unknown_static, unknown_dynamic))| StageSpec {
            index: k + 1,
            map_kind,
            size_cells,
            known_static,
            unknown_static,
            unknown_dynamic,
        })
        .collect()
}

pub fn stage_config(index: usize) -> Result<StageSpec> {
    if !(1..=STAGE_COUNT).contains(&index) {
        return Err(NavError::StageOutOfRange(index));
    }
    Ok(stage_table().swap_remove(index - 1))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurriculumState {
    stage: usize,
    window: VecDeque<bool>,
    window_size: usize,
    threshold: f64,
}

impl Default for CurriculumState {
    fn default() -> Self {
        Self::new(DEFAULT_WINDOW)
    }
}

impl CurriculumState {
    pub fn new(window_size: usize) -> Self {
        Self::starting_at(1, window_size)
    }

    pub fn starting_at(stage: usize, window_size: usize) -> Self {
        let window_size = window_size.max(1);
        Self {
            stage: stage.clamp(1, STAGE_COUNT),
            window: VecDeque::with_capacity(window_size),
            window_size,
            threshold: ADVANCE_THRESHOLD,
        }
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self
    }

    pub fn stage(&self) -> usize {
        self.stage
    }

    pub fn window_len(&self) -> usize {
        self.window.len()
    }

    pub fn window_size(&self) -> usize {
        self.window_size
    }

    pub fn is_window_full(&self) -> bool {
        self.window.len() == self.window_size
    }

    pub fn success_rate(&self) -> f64 {
        if self.window.is_empty() {
            return 0.0;
        }
        self.window.iter().filter(|&&s| s).count() as f64 / self.window.len() as f64
    }

    pub fn record_episode(&mut self, success: bool) {
        if self.window.len() == self.window_size {
            self.window.pop_front();
        }
        self.window.push_back(success);
    }

    /// Moves to the next stage when the window is full and its success rate
    /// reaches the threshold. Returns whether the stage changed.
    pub fn maybe_advance(&mut self) -> bool {
        // Count-based comparison so that exactly 80 of 100 advances.
        let successes = self.window.iter().filter(|&&s| s).count() as f64;
        let reached = successes >= self.threshold * self.window_size as f64 - 1e-9;
        if self.is_window_full() && reached && self.stage < STAGE_COUNT {
            self.stage += 1;
            self.window.clear();
            true
        } else {
            false
        }
    }

    /// Records an outcome and applies the advancement rule.
    pub fn observe(&mut self, success: bool) -> bool {
        self.record_episode(success);
        self.maybe_advance()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stage_table_rows() {
        let s1 = stage_config(1).unwrap();
        assert_eq!((s1.map_kind, s1.size_cells, s1.obstacle_count()), (MapKind::Outdoor, 100, 0));
        let s5 = stage_config(5).unwrap();
        assert_eq!(s5.map_kind, MapKind::Outdoor);
        assert_eq!(s5.size_cells, 200);
        assert!(s5.known_static > 0 && s5.unknown_static > 0 && s5.unknown_dynamic > 0);
        let s7 = stage_config(7).unwrap();
        assert!(s7.unknown_static > s5.unknown_static && s7.unknown_dynamic > s5.unknown_dynamic);
        assert_eq!(stage_config(4).unwrap().map_kind, MapKind::Indoor);
        assert_eq!(stage_config(2).unwrap().map_kind, MapKind::Mixed);
        assert!(matches!(stage_config(8), Err(NavError::StageOutOfRange(8))));
        assert!(stage_config(0).is_err());
    }

    #[test]
    fn window_mechanics() {
        let mut c = CurriculumState::new(100);
        c.record_episode(true);
        assert_eq!(c.window_len(), 1);
        for _ in 0..99 {
            c.record_episode(true);
        }
        c.record_episode(false);
        assert_eq!(c.window_len(), 100);
        assert!((c.success_rate() - 0.99).abs() < 1e-12);
    }

    #[test]
    fn advances_at_85_percent() {
        let mut c = CurriculumState::starting_at(3, 100);
        for k in 0..100 {
            c.record_episode(k % 20 < 17);
        }
        assert!(c.maybe_advance());
        assert_eq!(c.stage(), 4);
        assert_eq!(c.window_len(), 0);
    }

    #[test]
    fn holds_at_79_percent() {
        let mut c = CurriculumState::starting_at(3, 100);
        for k in 0..100 {
            c.record_episode(k < 79);
        }
        assert!(!c.maybe_advance());
        assert_eq!(c.stage(), 3);
    }

    #[test]
    fn stage_seven_is_terminal() {
        let mut c = CurriculumState::starting_at(7, 10);
        for _ in 0..10 {
            c.record_episode(true);
        }
        assert!(!c.maybe_advance());
        assert_eq!(c.stage(), 7);
    }

    #[test]
    fn partial_window_never_advances() {
        let mut c = CurriculumState::new(100);
        for _ in 0..99 {
            assert!(!c.observe(true));
        }
        assert!(c.observe(true));
    }

    #[test]
    fn stage_scenarios_are_consistent() {
        for spec in stage_table() {
            let sc = spec.scenario();
            assert_eq!(sc.dynamic, spec.unknown_dynamic);
            assert_eq!(sc.known_static, spec.known_static);
        }
    }
}
