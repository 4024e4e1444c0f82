//! Runtime configuration shared by the library and the CLI.

use serde::{Deserialize, Serialize};

/// Tunables with validated defaults. Every tolerance used by the pipeline
/// lives here so tests and the CLI pin the same values.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Config {
    /// Relative tolerance for the expansion defect `lambda*v(a) - sum v(w_i)`.
    pub eps_expand: f64,
    /// Relative tolerance for geometric conservation checks (tile widths,
    /// anchor relations).
    pub eps_geom: f64,
    /// Convergence threshold for power iteration.
    pub eps_power: f64,
    /// Iteration cap for power iteration.
    pub power_iter_cap: usize,
    /// Base sampling grid for symbol enumeration (per axis). Clamped to >= 64.
    pub grid_n: usize,
    /// Number of grid doublings attempted before enumeration gives up.
    pub max_refinements: usize,
    /// Cap on the product of per-letter rule counts explored when searching
    /// an expanding eigenvalue of a non-deterministic substitution.
    pub restriction_cap: usize,
    /// Cap on the rule count of an iterated substitution power.
    pub power_rule_cap: usize,
    /// Node budget for the patch solver.
    pub solver_budget: u64,
    /// Lower bound enforced on letter widths by normalization.
    pub v_floor: f64,
    /// Slack added above the floor when rescaling widths.
    pub v_floor_delta: f64,
    /// Worker threads for parallel sweeps; 0 means "let rayon decide".
    pub jobs: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            eps_expand: 1e-9,
            eps_geom: 1e-9,
            eps_power: 1e-12,
            power_iter_cap: 100_000,
            grid_n: 256,
            max_refinements: 4,
            restriction_cap: 4096,
            power_rule_cap: 200_000,
            solver_budget: 1_000_000,
            v_floor: 4.0,
            v_floor_delta: 0.1,
            jobs: 0,
        }
    }
}

impl Config {
    /// Grid size with the documented lower bound applied.
    pub fn effective_grid(&self) -> usize {
        self.grid_n.max(64)
    }
}
