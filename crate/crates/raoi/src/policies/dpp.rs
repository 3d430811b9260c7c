//! Drift-plus-penalty scheduler.
//!
//! Two families of virtual queues turn the average power and distortion
//! constraints into stability problems: `Q1` accumulates transmit power
//! above the budget P̄, `Q2[i]` accumulates delivered distortion above
//! d̄_i. Each slot the policy greedily minimizes
//!
//! `V₁·Q1·P + V₂·Q2[i]·ε_i(k,P)·d_i(k) − β_i·ε_i(k,P)·Δ_i`
//!
//! over Idle (score 0) and all transmit cells `(i, k, P)`, with the queues
//! at their pre-update values. Ties break toward Idle, then lowest
//! `(i, k, P)` lexicographically, so runs are reproducible.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::SystemConfig;
use crate::phy::PacketOutcome;
use crate::policies::srp::SrpSolution;
use crate::policies::SlotAction;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DppError {
    #[error("transmit action requires a packet outcome")]
    MissingOutcome,
}

/// Virtual queues and ages carried across slots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DppState {
    /// Power virtual queue.
    pub q1: f64,
    /// Per-user distortion virtual queues.
    pub q2: Vec<f64>,
    /// Reported ages Δ_i, in slots.
    pub reported_age: Vec<f64>,
    /// Ages under perfect error detection.
    pub genie_age: Vec<f64>,
    /// Completed slots.
    pub t: u64,
}

impl DppState {
    /// Fresh state: zero queues, ages at the post-delivery value `n_i/N`.
    pub fn init(config: &SystemConfig) -> Self {
        let ages: Vec<f64> = (0..config.m()).map(|i| config.reset_age(i)).collect();
        DppState {
            q1: 0.0,
            q2: vec![0.0; config.m()],
            reported_age: ages.clone(),
            genie_age: ages,
            t: 0,
        }
    }
}

/// Score of a transmit cell with the given pre-update state.
fn cell_score(state: &DppState, config: &SystemConfig, i: usize, ki: usize, pi: usize) -> f64 {
    let u = &config.users[i];
    let eps = config.success(i, ki, pi);
    let power = u.p_values[pi];
    let dist = u.distortion_at(u.k_values[ki]);
    config.v1 * state.q1 * power + config.v2 * state.q2[i] * eps * dist
        - u.beta * eps * state.reported_age[i]
}

/// Pick the slot action: argmin of the per-slot score, Idle first on ties.
pub fn dpp_step(state: &DppState, config: &SystemConfig) -> SlotAction {
    let mut best = (0.0, SlotAction::Idle);
    for i in 0..config.m() {
        let u = &config.users[i];
        for ki in 0..u.k_values.len() {
            for pi in 0..u.p_values.len() {
                let score = cell_score(state, config, i, ki, pi);
                if score < best.0 {
                    best = (
                        score,
                        SlotAction::Transmit {
                            user: i,
                            k_index: ki,
                            p_index: pi,
                        },
                    );
                }
            }
        }
    }
    best.1
}

/// Advance one slot: drain/charge the queues and run the age recursions.
/// The distortion queue charges on the *realized* reported-success verdict;
/// the reported age resets on the same verdict, the genie age on the true
/// one.
pub fn dpp_update(
    state: &DppState,
    action: SlotAction,
    outcome: Option<&PacketOutcome>,
    config: &SystemConfig,
) -> Result<DppState, DppError> {
    let mut next = state.clone();
    next.t += 1;
    for i in 0..config.m() {
        next.reported_age[i] += 1.0;
        next.genie_age[i] += 1.0;
    }
    next.q1 = (next.q1 - config.p_bar).max(0.0);
    for i in 0..config.m() {
        next.q2[i] = (next.q2[i] - config.users[i].d_bar).max(0.0);
    }
    match action {
        SlotAction::Idle => Ok(next),
        SlotAction::Transmit {
            user,
            k_index,
            p_index,
        } => {
            let out = outcome.ok_or(DppError::MissingOutcome)?;
            let u = &config.users[user];
            next.q1 += u.p_values[p_index];
            if out.reported_success {
                next.q2[user] += u.distortion_at(u.k_values[k_index]);
                next.reported_age[user] = config.reset_age(user);
            }
            if out.genie_success {
                next.genie_age[user] = config.reset_age(user);
            }
            Ok(next)
        }
    }
}

/// Performance-ratio diagnostic: with `B₁ = (V₁/2M)(P̄² + Pmax²)` and
/// `B₂ = (V₂/2M)·Σ_i (d̄_i² + d_i(min k_i)²)`, the long-run age under this
/// policy is within `2 + (1/L)·(2(B₁+B₂) − (1/MN)·Σ_i w_i·n_i)` times the
/// lower bound `L`.
pub fn theorem2_bound(config: &SystemConfig, srp: &SrpSolution) -> f64 {
    let m = config.m() as f64;
    let p_max = config
        .users
        .iter()
        .flat_map(|u| u.p_values.iter().cloned())
        .fold(f64::NEG_INFINITY, f64::max);
    let b1 = config.v1 / (2.0 * m) * (config.p_bar * config.p_bar + p_max * p_max);
    let b2: f64 = config.v2 / (2.0 * m)
        * config
            .users
            .iter()
            .map(|u| {
                let k_min = *u.k_values.iter().min().expect("validated: nonempty grid");
                let d = u.distortion_at(k_min);
                u.d_bar * u.d_bar + d * d
            })
            .sum::<f64>();
    let age_term: f64 = config
        .users
        .iter()
        .map(|u| u.weight * u.n as f64)
        .sum::<f64>()
        / (m * config.slot_symbols as f64);
    2.0 + (2.0 * (b1 + b2) - age_term) / srp.lower_bound
}
