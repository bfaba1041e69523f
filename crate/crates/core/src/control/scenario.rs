use serde::{Deserialize, Serialize};

use super::config::TaskKind;

/// Representative `(J/J', δ)` grid nodes of the three phases.
pub const XXZ_TR: [f64; 2] = [2.4, 0.6];
pub const XXZ_TP: [f64; 2] = [0.45, 0.6];
pub const XXZ_SB: [f64; 2] = [1.05, 3.0];
/// Next to the TR/TP transition at `J = J'`.
pub const XXZ_BOUNDARY: [f64; 2] = [1.05, 0.6];
pub const CAT_TARGET: [f64; 2] = [0.5, -1.8];

/// A named (initial, target) pair. `None` draws from the task's training
/// distribution separately in every experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub task: TaskKind,
    pub initial: Option<Vec<f64>>,
    pub target: Option<Vec<f64>>,
}

impl Scenario {
    pub fn new(name: &str, task: TaskKind, initial: Option<Vec<f64>>, target: Option<Vec<f64>>) -> Self {
        Self { name: name.into(), task, initial, target }
    }
}

/// Couplings of the fourth Ising scenario: a fixed disordered draw on the
/// 0.1 lattice.
pub const ISING_RANDOM_TARGET: [f64; 5] = [0.3, -0.6, 0.9, 0.1, -0.4];

pub fn scenario_catalog() -> Vec<Scenario> {
    use TaskKind::*;
    let s = |name: &str, task, i: Option<&[f64]>, t: Option<&[f64]>| Scenario::new(name, task, i.map(<[f64]>::to_vec), t.map(<[f64]>::to_vec));
    let zeros = [0.0; 5];
    let ferro = [0.8; 5];
    let antiferro = [0.8, -0.8, 0.8, -0.8, 0.8];
    let blocks = [0.8, 0.8, 0.8, -0.8, -0.8];
    vec![
        s("xxz-sb-tp", Xxz, Some(&XXZ_SB), Some(&XXZ_TP)),
        s("xxz-tr-sb", Xxz, Some(&XXZ_TR), Some(&XXZ_SB)),
        s("xxz-tr-tp", Xxz, Some(&XXZ_TR), Some(&XXZ_TP)),
        s("xxz-tp-sb", Xxz, Some(&XXZ_TP), Some(&XXZ_SB)),
        s("xxz-tr-boundary", Xxz, Some(&XXZ_TR), Some(&XXZ_BOUNDARY)),
        s("cat-1", Cat, Some(&[0.4, 0.3]), Some(&CAT_TARGET)),
        s("cat-2", Cat, Some(&[-1.0, 0.8]), Some(&CAT_TARGET)),
        s("cat-3", Cat, Some(&[1.5, 1.1]), Some(&CAT_TARGET)),
        s("cat-4", Cat, Some(&[-2.1, -1.0]), Some(&CAT_TARGET)),
        s("ising-1", Ising, Some(&zeros), Some(&ferro)),
        s("ising-2", Ising, Some(&zeros), Some(&antiferro)),
        s("ising-3", Ising, Some(&zeros), Some(&blocks)),
        s("ising-4", Ising, None, Some(&ISING_RANDOM_TARGET)),
        s("process-random", ProcessOutput, None, None),
    ]
}
