//! Periodic round-robin: serve user `r` in slot `t` when
//! `r = (t−1) mod period` is a valid user index, otherwise idle; fixed
//! message length, transmit power cycling through a configured list. The
//! policy ignores ages, queues and outcomes entirely.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::SystemConfig;
use crate::policies::SlotAction;

#[derive(Debug, Error, PartialEq)]
pub enum PrrError {
    #[error("period must be at least the user count ({m}), got {period}")]
    PeriodTooShort { period: usize, m: usize },
    #[error("fixed k = {k} is not on user {user}'s grid")]
    KNotOnGrid { k: usize, user: usize },
    #[error("power {power} is not on user {user}'s grid")]
    PowerNotOnGrid { power: f64, user: usize },
    #[error("power cycle is empty")]
    EmptyCycle,
    #[error("slot index must start at 1")]
    ZeroSlot,
}

/// When the power cycle pointer moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CycleAdvance {
    /// One step per slot, idle slots included.
    #[default]
    PerSlot,
    /// One step per completed round of transmissions.
    PerTransmission,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PrrParams {
    pub period: usize,
    pub fixed_k: usize,
    pub power_cycle: Vec<f64>,
    pub advance: CycleAdvance,
}

impl Default for PrrParams {
    fn default() -> Self {
        PrrParams {
            period: 2,
            fixed_k: 10,
            power_cycle: vec![1.0, 2.0, 3.0, 4.0],
            advance: CycleAdvance::PerSlot,
        }
    }
}

/// The deterministic action for 1-based slot `t`.
pub fn prr_action(
    t: u64,
    config: &SystemConfig,
    params: &PrrParams,
) -> Result<SlotAction, PrrError> {
    if t == 0 {
        return Err(PrrError::ZeroSlot);
    }
    if params.power_cycle.is_empty() {
        return Err(PrrError::EmptyCycle);
    }
    if params.period < config.m() {
        return Err(PrrError::PeriodTooShort {
            period: params.period,
            m: config.m(),
        });
    }
    let phase = ((t - 1) % params.period as u64) as usize;
    if phase >= config.m() {
        return Ok(SlotAction::Idle);
    }
    let user = phase;
    let u = &config.users[user];
    let k_index = u
        .k_values
        .iter()
        .position(|&k| k == params.fixed_k)
        .ok_or(PrrError::KNotOnGrid {
            k: params.fixed_k,
            user,
        })?;
    let cycle_pos = match params.advance {
        CycleAdvance::PerSlot => (t - 1) % params.power_cycle.len() as u64,
        CycleAdvance::PerTransmission => {
            (t - 1) / params.period as u64 % params.power_cycle.len() as u64
        }
    };
    let power = params.power_cycle[cycle_pos as usize];
    let p_index = u
        .p_values
        .iter()
        .position(|&p| p == power)
        .ok_or(PrrError::PowerNotOnGrid { power, user })?;
    Ok(SlotAction::Transmit {
        user,
        k_index,
        p_index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::UserConfig;
    use crate::tables::{ppv_table, DistortionModel};

    fn system(m: usize) -> SystemConfig {
        let ks: Vec<usize> = (4..=11).collect();
        let ps = vec![1.0, 2.0, 3.0, 4.0];
        let table = ppv_table(15, 15, &ks, &ps).unwrap();
        SystemConfig {
            slot_symbols: 15,
            p_bar: 2.0,
            v1: 1.0,
            v2: 1.0,
            allow_idle: false,
            users: (0..m)
                .map(|_| UserConfig {
                    n: 15,
                    k_values: ks.clone(),
                    p_values: ps.clone(),
                    weight: 1.0,
                    d_bar: (2.0f64).powf(-0.1),
                    beta: 100.0,
                    distortion: DistortionModel::default(),
                    table: table.clone(),
                })
                .collect(),
        }
    }

    #[test]
    fn alternates_users_with_period_two() {
        let sys = system(2);
        let params = PrrParams::default();
        for t in 1..=8u64 {
            let action = prr_action(t, &sys, &params).unwrap();
            match action {
                SlotAction::Transmit { user, .. } => {
                    assert_eq!(user as u64, (t - 1) % 2, "slot {t}");
                }
                SlotAction::Idle => panic!("period equals user count, never idle"),
            }
        }
    }

    #[test]
    fn fixed_k_and_per_slot_power_cycle() {
        let sys = system(2);
        let params = PrrParams::default();
        for t in 1..=8u64 {
            let action = prr_action(t, &sys, &params).unwrap();
            assert_eq!(action.k(&sys), Some(10));
            let expect = params.power_cycle[((t - 1) % 4) as usize];
            assert_eq!(action.power(&sys), Some(expect), "slot {t}");
        }
    }

    #[test]
    fn per_transmission_cycle_advances_each_round() {
        let sys = system(2);
        let params = PrrParams {
            advance: CycleAdvance::PerTransmission,
            ..PrrParams::default()
        };
        // slots 1,2 -> P=1; slots 3,4 -> P=2; ...
        for t in 1..=8u64 {
            let action = prr_action(t, &sys, &params).unwrap();
            let expect = params.power_cycle[(((t - 1) / 2) % 4) as usize];
            assert_eq!(action.power(&sys), Some(expect), "slot {t}");
        }
    }

    #[test]
    fn longer_period_inserts_idle_slots() {
        let sys = system(2);
        let params = PrrParams {
            period: 3,
            ..PrrParams::default()
        };
        assert!(!prr_action(1, &sys, &params).unwrap().is_idle());
        assert!(!prr_action(2, &sys, &params).unwrap().is_idle());
        assert!(prr_action(3, &sys, &params).unwrap().is_idle());
        assert!(!prr_action(4, &sys, &params).unwrap().is_idle());
    }

    #[test]
    fn cycle_mean_matches_config() {
        let params = PrrParams::default();
        let mean: f64 =
            params.power_cycle.iter().sum::<f64>() / params.power_cycle.len() as f64;
        assert_eq!(mean, 2.5);
    }

    #[test]
    fn validation_errors() {
        let sys = system(2);
        assert_eq!(
            prr_action(0, &sys, &PrrParams::default()),
            Err(PrrError::ZeroSlot)
        );
        let short = PrrParams {
            period: 1,
            ..PrrParams::default()
        };
        assert!(matches!(
            prr_action(1, &sys, &short),
            Err(PrrError::PeriodTooShort { .. })
        ));
        let bad_k = PrrParams {
            fixed_k: 3,
            ..PrrParams::default()
        };
        assert!(matches!(
            prr_action(1, &sys, &bad_k),
            Err(PrrError::KNotOnGrid { .. })
        ));
        let bad_p = PrrParams {
            power_cycle: vec![5.0],
            ..PrrParams::default()
        };
        assert!(matches!(
            prr_action(1, &sys, &bad_p),
            Err(PrrError::PowerNotOnGrid { .. })
        ));
    }
}
