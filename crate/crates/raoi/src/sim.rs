//! Slot-level episode engine.
//!
//! Runs one policy against one system for `T` slots, producing long-run
//! [`Metrics`]. Outcomes are realized either through the full physical
//! pipeline ([`SimMode::FullPhy`]) or by coupled draws from the success
//! table ([`SimMode::FastTable`]): one uniform `u` per transmission, genie
//! success iff `u < genie_eps`, reported success iff `u < reported_eps`.
//! Since `genie_eps ≤ reported_eps`, the monotone coupling matches both
//! marginals and preserves the genie ⇒ reported implication.
//!
//! Everything is driven by one sequential generator derived from the seed,
//! so `(policy, config, T, mode, seed)` fully determines the result.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::code::CodeSpec;
use crate::config::{ConfigError, SystemConfig};
use crate::phy::{transmit_packet, PacketOutcome, PhyError, RngStream};
use crate::policies::dpp::{dpp_step, dpp_update, DppError, DppState};
use crate::policies::prr::{prr_action, PrrError, PrrParams};
use crate::policies::srp::{solve_srp, SrpSolution};
use crate::policies::SlotAction;
use crate::tables::Detection;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("episode needs at least one slot")]
    NoSlots,
    #[error("randomized policy has no feasible solution")]
    InfeasibleSrp,
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Prr(#[from] PrrError),
    #[error(transparent)]
    Dpp(#[from] DppError),
    #[error(transparent)]
    Phy(#[from] PhyError),
}

/// How transmission outcomes are realized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimMode {
    /// Encode, modulate, add noise, decode every packet.
    FullPhy,
    /// Draw coupled verdicts from the success table.
    FastTable,
}

/// The scheduler an episode runs, with its per-policy inputs.
#[derive(Debug, Clone, Copy)]
pub enum EpisodePolicy<'a> {
    Srp(&'a SrpSolution),
    Dpp,
    Prr(&'a PrrParams),
}

/// One decimated state sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSample {
    pub t: u64,
    pub reported_age: Vec<f64>,
    pub q1: f64,
    pub q2: Vec<f64>,
}

/// Long-run averages over one episode. Ages are recorded at slot end; all
/// time averages use the slot count as denominator, including distortion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// `(1/MT)·Σ_t Σ_i w_i·Δ_i(t)`.
    pub avg_reported_raoi: f64,
    /// Same average under the true (genie) reset verdicts.
    pub avg_genie_aoi: f64,
    pub per_user_reported: Vec<f64>,
    pub per_user_genie: Vec<f64>,
    pub avg_power: f64,
    /// Delivered distortion per slot, per user.
    pub avg_distortion: Vec<f64>,
    pub success_count: u64,
    pub undetected_count: u64,
    pub slot_count: u64,
    /// Weighted-age averages over consecutive equal slot blocks, for
    /// renewal-CLT standard errors.
    pub batch_means: Vec<f64>,
    /// Mean of `Q1 + Σ_i Q2[i]` per tenth of the horizon (zero unless DPP).
    pub decile_queue_means: Vec<f64>,
    pub max_q1: f64,
    pub max_q2: f64,
    pub time_series: Vec<TimeSample>,
}

struct SrpSampler {
    /// `(user, k_index, p_index, cumulative probability)` in lexicographic
    /// cell order; a draw above the final cumulative value means idle.
    cells: Vec<(usize, usize, usize, f64)>,
}

impl SrpSampler {
    fn new(srp: &SrpSolution, config: &SystemConfig) -> Self {
        let mut cells = Vec::new();
        let mut cum = 0.0;
        for (i, u) in config.users.iter().enumerate() {
            for ki in 0..u.k_values.len() {
                for pi in 0..u.p_values.len() {
                    cum += srp.mu[i][ki][pi];
                    cells.push((i, ki, pi, cum));
                }
            }
        }
        SrpSampler { cells }
    }

    fn sample(&self, u: f64) -> SlotAction {
        for &(i, ki, pi, cum) in &self.cells {
            if u < cum {
                return SlotAction::Transmit {
                    user: i,
                    k_index: ki,
                    p_index: pi,
                };
            }
        }
        SlotAction::Idle
    }
}

/// Grid-to-table index maps, resolved once per episode.
struct TableView {
    k_map: Vec<Vec<usize>>,
    p_map: Vec<Vec<usize>>,
}

impl TableView {
    fn new(config: &SystemConfig) -> Self {
        let k_map = config
            .users
            .iter()
            .map(|u| {
                u.k_values
                    .iter()
                    .map(|&k| u.table.k_index(k).expect("validated"))
                    .collect()
            })
            .collect();
        let p_map = config
            .users
            .iter()
            .map(|u| {
                u.p_values
                    .iter()
                    .map(|&p| u.table.p_index(p).expect("validated"))
                    .collect()
            })
            .collect();
        TableView { k_map, p_map }
    }
}

pub fn run_episode(
    policy: EpisodePolicy,
    config: &SystemConfig,
    t_slots: u64,
    mode: SimMode,
    seed: u64,
) -> Result<Metrics, SimError> {
    if t_slots == 0 {
        return Err(SimError::NoSlots);
    }
    config.validate()?;
    if let EpisodePolicy::Srp(sol) = policy {
        if !sol.feasible {
            return Err(SimError::InfeasibleSrp);
        }
    }
    let m = config.m();
    let view = TableView::new(config);
    let sampler = match policy {
        EpisodePolicy::Srp(sol) => Some(SrpSampler::new(sol, config)),
        _ => None,
    };
    let codes: HashMap<(usize, usize), CodeSpec> = if mode == SimMode::FullPhy {
        let mut map = HashMap::new();
        for (i, u) in config.users.iter().enumerate() {
            for &k in &u.k_values {
                map.insert(
                    (i, k),
                    CodeSpec::build(u.n, k + u.table.crc.len()).map_err(PhyError::from)?,
                );
            }
        }
        map
    } else {
        HashMap::new()
    };

    let root = RngStream::new(seed);
    let mut rng = root.substream([2, 0, 0, 0]).rng();
    let mut state = DppState::init(config);
    let is_dpp = matches!(policy, EpisodePolicy::Dpp);

    let n_batches = 30u64.min(t_slots);
    let mut batch_sums = vec![0.0; n_batches as usize];
    let mut batch_counts = vec![0u64; n_batches as usize];
    let mut decile_sums = [0.0f64; 10];
    let mut decile_counts = [0u64; 10];
    let mut reported_sum = vec![0.0; m];
    let mut genie_sum = vec![0.0; m];
    let mut power_sum = 0.0;
    let mut dist_sum = vec![0.0; m];
    let mut success_count = 0u64;
    let mut undetected_count = 0u64;
    let mut max_q1 = 0.0f64;
    let mut max_q2 = 0.0f64;
    let mut series = Vec::new();
    let stride = (t_slots / 200).max(1);

    for t in 1..=t_slots {
        let action = match policy {
            EpisodePolicy::Srp(_) => sampler
                .as_ref()
                .expect("sampler built for srp")
                .sample(rng.random_range(0.0..1.0)),
            EpisodePolicy::Dpp => dpp_step(&state, config),
            EpisodePolicy::Prr(params) => prr_action(t, config, params)?,
        };
        let outcome = match action {
            SlotAction::Idle => None,
            SlotAction::Transmit {
                user,
                k_index,
                p_index,
            } => {
                let u = &config.users[user];
                let power = u.p_values[p_index];
                let out = match mode {
                    SimMode::FastTable => {
                        let tki = view.k_map[user][k_index];
                        let tpi = view.p_map[user][p_index];
                        let reported_eps = u.table.reported_success[tki][tpi];
                        let genie_eps = u.table.genie_success[tki][tpi];
                        let draw: f64 = rng.random_range(0.0..1.0);
                        let reported_success = draw < reported_eps;
                        let genie_success = draw < genie_eps;
                        PacketOutcome {
                            reported_success,
                            genie_success,
                            undetected: reported_success && !genie_success,
                            power_used: power,
                        }
                    }
                    SimMode::FullPhy => {
                        let k = u.k_values[k_index];
                        let msg: Vec<u8> = (0..k).map(|_| rng.random_range(0..2u8)).collect();
                        let code = &codes[&(user, k)];
                        let noise = root.substream([3, t, 0, 0]);
                        let mut out = transmit_packet(&msg, &u.table.crc, code, power, &noise)?;
                        if u.table.detection != Detection::Crc {
                            out.reported_success = out.genie_success;
                            out.undetected = false;
                        }
                        out
                    }
                };
                Some(out)
            }
        };

        if is_dpp {
            state = dpp_update(&state, action, outcome.as_ref(), config)?;
        } else {
            state.t += 1;
            for i in 0..m {
                state.reported_age[i] += 1.0;
                state.genie_age[i] += 1.0;
            }
            if let SlotAction::Transmit { user, .. } = action {
                let out = outcome.as_ref().expect("transmit has an outcome");
                if out.reported_success {
                    state.reported_age[user] = config.reset_age(user);
                }
                if out.genie_success {
                    state.genie_age[user] = config.reset_age(user);
                }
            }
        }

        if let Some(out) = &outcome {
            power_sum += out.power_used;
            if out.reported_success {
                success_count += 1;
                if let SlotAction::Transmit { user, k_index, .. } = action {
                    let u = &config.users[user];
                    dist_sum[user] += u.distortion_at(u.k_values[k_index]);
                }
            }
            if out.undetected {
                undetected_count += 1;
            }
        }
        let mut weighted = 0.0;
        for i in 0..m {
            reported_sum[i] += state.reported_age[i];
            genie_sum[i] += state.genie_age[i];
            weighted += config.users[i].weight * state.reported_age[i];
        }
        weighted /= m as f64;
        let batch = ((t - 1) * n_batches / t_slots) as usize;
        batch_sums[batch] += weighted;
        batch_counts[batch] += 1;
        let queue_total = state.q1 + state.q2.iter().sum::<f64>();
        let decile = ((t - 1) * 10 / t_slots) as usize;
        decile_sums[decile] += queue_total;
        decile_counts[decile] += 1;
        max_q1 = max_q1.max(state.q1);
        max_q2 = state.q2.iter().fold(max_q2, |a, &q| a.max(q));
        if (t - 1) % stride == 0 {
            series.push(TimeSample {
                t,
                reported_age: state.reported_age.clone(),
                q1: state.q1,
                q2: state.q2.clone(),
            });
        }
    }

    let tf = t_slots as f64;
    let per_user_reported: Vec<f64> = reported_sum.iter().map(|s| s / tf).collect();
    let per_user_genie: Vec<f64> = genie_sum.iter().map(|s| s / tf).collect();
    let weighted_avg = |per: &[f64]| {
        per.iter()
            .zip(&config.users)
            .map(|(a, u)| u.weight * a)
            .sum::<f64>()
            / m as f64
    };
    Ok(Metrics {
        avg_reported_raoi: weighted_avg(&per_user_reported),
        avg_genie_aoi: weighted_avg(&per_user_genie),
        per_user_reported,
        per_user_genie,
        avg_power: power_sum / tf,
        avg_distortion: dist_sum.iter().map(|s| s / tf).collect(),
        success_count,
        undetected_count,
        slot_count: t_slots,
        batch_means: batch_sums
            .iter()
            .zip(&batch_counts)
            .map(|(s, &c)| s / c.max(1) as f64)
            .collect(),
        decile_queue_means: decile_sums
            .iter()
            .zip(&decile_counts)
            .map(|(s, &c)| s / c.max(1) as f64)
            .collect(),
        max_q1,
        max_q2,
        time_series: series,
    })
}

/// Renewal-formula cross-check: solve the randomized policy, simulate it,
/// and compare against the analytic value with a batch-means CLT error bar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SrpAgreement {
    pub analytic: f64,
    pub simulated: f64,
    pub stderr: f64,
    pub gap: f64,
    pub within_three_sigma: bool,
}

pub fn simulated_vs_analytic_srp(
    config: &SystemConfig,
    t_slots: u64,
    seed: u64,
) -> Result<SrpAgreement, SimError> {
    let sol = solve_srp(config)?;
    if !sol.feasible {
        return Err(SimError::InfeasibleSrp);
    }
    let metrics = run_episode(
        EpisodePolicy::Srp(&sol),
        config,
        t_slots,
        SimMode::FastTable,
        seed,
    )?;
    let stderr = batch_stderr(&metrics.batch_means);
    let gap = (metrics.avg_reported_raoi - sol.analytic_raoi).abs();
    let within = if stderr > 0.0 {
        gap <= 3.0 * stderr
    } else {
        gap <= 1e-9
    };
    Ok(SrpAgreement {
        analytic: sol.analytic_raoi,
        simulated: metrics.avg_reported_raoi,
        stderr,
        gap,
        within_three_sigma: within,
    })
}

/// Standard error of the overall mean from batch means.
pub fn batch_stderr(batch_means: &[f64]) -> f64 {
    let b = batch_means.len() as f64;
    if batch_means.len() < 2 {
        return 0.0;
    }
    let mean = batch_means.iter().sum::<f64>() / b;
    let var = batch_means.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (b - 1.0);
    (var / b).sqrt()
}

/// Post-episode check that the queue-based policy met its constraints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub avg_power: f64,
    pub power_ok: bool,
    pub avg_distortion: Vec<f64>,
    pub distortion_ok: Vec<bool>,
    /// Final-decile mean queue mass vs the middle deciles: stable runs do
    /// not grow toward the end of the horizon.
    pub queue_stable: bool,
    pub decile_queue_means: Vec<f64>,
    pub ok: bool,
}

pub fn constraint_audit(metrics: &Metrics, config: &SystemConfig) -> AuditReport {
    let slack = 1.01;
    let power_ok = metrics.avg_power <= config.p_bar * slack;
    let distortion_ok: Vec<bool> = metrics
        .avg_distortion
        .iter()
        .zip(&config.users)
        .map(|(&d, u)| d <= u.d_bar * slack)
        .collect();
    let deciles = &metrics.decile_queue_means;
    let middle = (deciles[4] + deciles[5]) / 2.0;
    let queue_stable = deciles[9] <= (2.0 * middle).max(1e-9);
    let ok = power_ok && distortion_ok.iter().all(|&b| b) && queue_stable;
    AuditReport {
        avg_power: metrics.avg_power,
        power_ok,
        avg_distortion: metrics.avg_distortion.clone(),
        distortion_ok,
        queue_stable,
        decile_queue_means: deciles.clone(),
        ok,
    }
}
