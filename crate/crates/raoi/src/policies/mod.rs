//! The three schedulers and the bound calculators.
//!
//! - [`srp`]: stationary randomized policy — a convex solve for the
//!   scheduling probabilities μ_i(k,P) plus renewal-formula analytics and
//!   the age lower bound.
//! - [`dpp`]: drift-plus-penalty — virtual queues for the power and
//!   distortion constraints, greedy per-slot score minimization.
//! - [`prr`]: periodic round-robin — deterministic, age-agnostic baseline.

pub mod dpp;
pub mod prr;
pub mod srp;

pub use dpp::{dpp_step, dpp_update, theorem2_bound, DppState};
pub use prr::{prr_action, CycleAdvance, PrrParams};
pub use srp::{analytic_srp_raoi, lower_bound, solve_srp, SrpSolution};

use serde::{Deserialize, Serialize};

/// What the scheduler does in one slot. At most one user transmits; the
/// indices refer to that user's configured `k_values` / `p_values` grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SlotAction {
    Idle,
    Transmit {
        user: usize,
        k_index: usize,
        p_index: usize,
    },
}

impl SlotAction {
    pub fn is_idle(&self) -> bool {
        matches!(self, SlotAction::Idle)
    }

    /// Message length for a transmit action.
    pub fn k(&self, config: &crate::config::SystemConfig) -> Option<usize> {
        match *self {
            SlotAction::Idle => None,
            SlotAction::Transmit { user, k_index, .. } => {
                Some(config.users[user].k_values[k_index])
            }
        }
    }

    /// Transmit power for a transmit action.
    pub fn power(&self, config: &crate::config::SystemConfig) -> Option<f64> {
        match *self {
            SlotAction::Idle => None,
            SlotAction::Transmit { user, p_index, .. } => {
                Some(config.users[user].p_values[p_index])
            }
        }
    }
}
