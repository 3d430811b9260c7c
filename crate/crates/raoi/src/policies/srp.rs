//! Stationary randomized policy: solve for scheduling probabilities
//! μ_i(k,P) minimizing the average reported age
//!
//! `A(μ) = (1/M)·Σ_i w_i·(1/p_i + n_i/N − 1)`,  `p_i = Σ_{k,P} ε_i(k,P)·μ_i(k,P)`
//!
//! subject to `μ ≥ 0`, `Σ μ = 1`, `Σ P·μ ≤ P̄` and per-user
//! `Σ ε_i·d_i(k)·μ_i ≤ d̄_i`. The objective is convex in μ (composition of
//! the convex 1/x with the linear p_i), so a saddle-point iteration
//! converges: entropic mirror descent on the simplex for μ, dual
//! subgradient ascent for the power/distortion multipliers, uniform
//! initialization, steps ∝ 1/√t, stopping at KKT residual ≤ 1e−6 or 10⁵
//! iterations, with a final least-squares polish of the duals on the
//! support.
//!
//! Infeasibility is a value, not an error: the solver first minimizes the
//! maximum constraint violation over the simplex; a positive minimum yields
//! `feasible = false` plus the names of the violated constraints.

use serde::{Deserialize, Serialize};

use crate::config::{ConfigError, SystemConfig};

const KKT_TOL: f64 = 1e-6;
const MAX_ITERS: usize = 100_000;
const SUPPORT_TOL: f64 = 1e-8;

/// Result of the convex solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SrpSolution {
    /// Scheduling probabilities, `mu[i][ki][pi]` over each user's grids.
    pub mu: Vec<Vec<Vec<f64>>>,
    /// Per-user delivery probability per slot, `p_i`.
    pub success_rates: Vec<f64>,
    /// Objective value at `mu` (weighted average reported age).
    pub analytic_raoi: f64,
    /// `(1/2M)·Σ_i w_i·(1/p_i + n_i/N)`; the age of any policy meeting the
    /// constraints is at least this, and `analytic_raoi ≤ 2·lower_bound`.
    pub lower_bound: f64,
    /// Multiplier on the average-power constraint.
    pub dual_power: f64,
    /// Multipliers on the per-user distortion constraints.
    pub dual_distortion: Vec<f64>,
    /// Final KKT residual (max of primal violation, complementary
    /// slackness, and stationarity over the support).
    pub kkt_residual: f64,
    pub feasible: bool,
    /// Violated constraints at the minimum-violation point when infeasible.
    pub certificate: Vec<String>,
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    user: usize,
    ki: usize,
    pi: usize,
    eps: f64,
    power: f64,
    /// ε·d(k), the distortion-constraint coefficient.
    dist_cost: f64,
    idle: bool,
}

fn enumerate_cells(config: &SystemConfig) -> Vec<Cell> {
    let mut cells = Vec::new();
    for (i, u) in config.users.iter().enumerate() {
        for ki in 0..u.k_values.len() {
            for pi in 0..u.p_values.len() {
                let eps = config.success(i, ki, pi);
                cells.push(Cell {
                    user: i,
                    ki,
                    pi,
                    eps,
                    power: u.p_values[pi],
                    dist_cost: eps * u.distortion_at(u.k_values[ki]),
                    idle: false,
                });
            }
        }
    }
    if config.allow_idle {
        cells.push(Cell {
            user: usize::MAX,
            ki: 0,
            pi: 0,
            eps: 0.0,
            power: 0.0,
            dist_cost: 0.0,
            idle: true,
        });
    }
    cells
}

/// Inequality rows `c·μ ≤ b`: row 0 is power, rows 1..=M are distortion.
struct Rows {
    coeff: Vec<Vec<f64>>,
    bound: Vec<f64>,
    name: Vec<String>,
}

fn build_rows(config: &SystemConfig, cells: &[Cell]) -> Rows {
    let m = config.m();
    let mut coeff = vec![vec![0.0; cells.len()]; m + 1];
    let mut bound = vec![0.0; m + 1];
    let mut name = vec![String::new(); m + 1];
    bound[0] = config.p_bar;
    name[0] = format!("average power ≤ {}", config.p_bar);
    for (c, cell) in cells.iter().enumerate() {
        coeff[0][c] = cell.power;
    }
    for i in 0..m {
        bound[i + 1] = config.users[i].d_bar;
        name[i + 1] = format!("user {i} average distortion ≤ {}", config.users[i].d_bar);
        for (c, cell) in cells.iter().enumerate() {
            if !cell.idle && cell.user == i {
                coeff[i + 1][c] = cell.dist_cost;
            }
        }
    }
    Rows { coeff, bound, name }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn success_rates(config: &SystemConfig, cells: &[Cell], mu: &[f64]) -> Vec<f64> {
    let mut p = vec![0.0; config.m()];
    for (c, cell) in cells.iter().enumerate() {
        if !cell.idle {
            p[cell.user] += cell.eps * mu[c];
        }
    }
    p
}

fn objective(config: &SystemConfig, p: &[f64]) -> f64 {
    let m = config.m() as f64;
    let mut acc = 0.0;
    for (i, u) in config.users.iter().enumerate() {
        if u.weight > 0.0 && p[i] <= 0.0 {
            return f64::INFINITY;
        }
        acc += u.weight * (1.0 / p[i] + config.reset_age(i) - 1.0);
    }
    acc / m
}

/// `∂/∂μ_c` of the Lagrangian: `−w_i·ε_c/(M·p_i²) + λ_P·P_c + λ_i·ε_c·d_c`.
fn lagrangian_grad(
    config: &SystemConfig,
    cells: &[Cell],
    p: &[f64],
    lam: &[f64],
    out: &mut Vec<f64>,
) {
    let m = config.m() as f64;
    out.clear();
    for cell in cells {
        if cell.idle {
            out.push(lam[0] * cell.power);
            continue;
        }
        let pi = p[cell.user].max(1e-12);
        let w = config.users[cell.user].weight;
        let g = -w * cell.eps / (m * pi * pi)
            + lam[0] * cell.power
            + lam[1 + cell.user] * cell.dist_cost;
        out.push(g);
    }
}

/// One multiplicative-weights step on the simplex.
fn mirror_step(mu: &mut [f64], grad: &[f64], eta: f64) {
    let gmin = grad.iter().cloned().fold(f64::INFINITY, f64::min);
    let gmax = grad.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let scale = (gmax - gmin).max(1e-12);
    let mut z = 0.0;
    for (m, &g) in mu.iter_mut().zip(grad) {
        *m *= (-eta * (g - gmin) / scale).exp();
        z += *m;
    }
    for m in mu.iter_mut() {
        *m /= z;
    }
}

/// Minimize `max_j (c_j·μ − b_j)/max(b_j,1)` over the simplex by
/// subgradient mirror descent; returns the best point and its violation.
fn min_violation_point(rows: &Rows, dim: usize) -> (Vec<f64>, f64) {
    let max_viol = |mu: &[f64]| -> (f64, usize) {
        let mut best = (f64::NEG_INFINITY, 0);
        for j in 0..rows.bound.len() {
            let v = (dot(&rows.coeff[j], mu) - rows.bound[j]) / rows.bound[j].max(1.0);
            if v > best.0 {
                best = (v, j);
            }
        }
        best
    };
    let mut mu = vec![1.0 / dim as f64; dim];
    let mut best_mu = mu.clone();
    let mut best_v = max_viol(&mu).0;
    for it in 1..=20_000usize {
        let (v, j) = max_viol(&mu);
        if v < best_v {
            best_v = v;
            best_mu.copy_from_slice(&mu);
        }
        if best_v <= 0.0 {
            break;
        }
        let eta = 2.0 / (it as f64).sqrt();
        mirror_step(&mut mu, &rows.coeff[j], eta);
    }
    (best_mu, best_v)
}

/// Pull `mu` back inside the polytope along the segment toward a feasible
/// reference point; exact because the constraints are linear.
fn repair(mu: &[f64], reference: &[f64], rows: &Rows) -> Vec<f64> {
    let mut theta: f64 = 0.0;
    for j in 0..rows.bound.len() {
        let at_mu = dot(&rows.coeff[j], mu);
        let at_ref = dot(&rows.coeff[j], reference);
        if at_mu > rows.bound[j] && at_mu > at_ref {
            theta = theta.max((at_mu - rows.bound[j]) / (at_mu - at_ref));
        }
    }
    let theta = theta.min(1.0);
    mu.iter()
        .zip(reference)
        .map(|(a, b)| (1.0 - theta) * a + theta * b)
        .collect()
}

fn kkt_residual(
    config: &SystemConfig,
    cells: &[Cell],
    rows: &Rows,
    mu: &[f64],
    lam: &[f64],
) -> f64 {
    let p = success_rates(config, cells, mu);
    let mut grad = Vec::new();
    lagrangian_grad(config, cells, &p, lam, &mut grad);
    let mut primal: f64 = 0.0;
    let mut slackness: f64 = 0.0;
    for j in 0..rows.bound.len() {
        let slack = rows.bound[j] - dot(&rows.coeff[j], mu);
        primal = primal.max(-slack / rows.bound[j].max(1.0));
        slackness = slackness.max(lam[j] * slack.abs() / rows.bound[j].max(1.0));
    }
    let gmin = grad.iter().cloned().fold(f64::INFINITY, f64::min);
    let gscale = grad
        .iter()
        .map(|g| g.abs())
        .fold(f64::NEG_INFINITY, f64::max)
        .max(1.0);
    let mut stationarity: f64 = 0.0;
    for (c, &g) in grad.iter().enumerate() {
        if mu[c] > SUPPORT_TOL {
            stationarity = stationarity.max((g - gmin) / gscale);
        }
    }
    primal.max(slackness).max(stationarity)
}

/// Solve a small dense system by Gaussian elimination with partial pivoting.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&r, &s| {
            a[r][col].abs().partial_cmp(&a[s][col].abs()).unwrap()
        })?;
        if a[pivot][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for cc in col..n {
                a[r][cc] -= f * a[col][cc];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut acc = b[r];
        for cc in r + 1..n {
            acc -= a[r][cc] * x[cc];
        }
        x[r] = acc / a[r][r];
    }
    Some(x)
}

/// Least-squares fit of the multipliers on the support: find `λ ≥ 0`, `ν`
/// minimizing `Σ_{c in support} (base_c + λ·a_c − ν)²`, then zero the
/// multipliers of constraints that are slack.
fn polish_duals(
    config: &SystemConfig,
    cells: &[Cell],
    rows: &Rows,
    mu: &[f64],
    lam: &[f64],
) -> Vec<f64> {
    let m = config.m();
    let p = success_rates(config, cells, mu);
    let mf = config.m() as f64;
    let support: Vec<usize> = (0..cells.len()).filter(|&c| mu[c] > SUPPORT_TOL).collect();
    if support.is_empty() {
        return lam.to_vec();
    }
    // only active constraints carry multipliers; everything else is zero
    let active: Vec<usize> = (0..=m)
        .filter(|&j| {
            rows.bound[j] - dot(&rows.coeff[j], mu) <= 1e-6 * rows.bound[j].max(1.0)
        })
        .collect();
    // unknowns: one multiplier per active constraint, plus nu
    let nu_idx = active.len();
    let dim = active.len() + 1;
    let mut ata = vec![vec![0.0; dim]; dim];
    let mut atb = vec![0.0; dim];
    for &c in &support {
        let cell = cells[c];
        let base = if cell.idle {
            0.0
        } else {
            let pi = p[cell.user].max(1e-12);
            -config.users[cell.user].weight * cell.eps / (mf * pi * pi)
        };
        let mut row = vec![0.0; dim];
        for (col, &j) in active.iter().enumerate() {
            row[col] = rows.coeff[j][c];
        }
        row[nu_idx] = -1.0;
        for a in 0..dim {
            for b in 0..dim {
                ata[a][b] += row[a] * row[b];
            }
            atb[a] += row[a] * (-base);
        }
    }
    // ridge for rank-deficient supports
    for d in 0..dim {
        ata[d][d] += 1e-10;
    }
    let Some(sol) = solve_dense(ata, atb) else {
        return lam.to_vec();
    };
    let mut polished = vec![0.0; m + 1];
    for (col, &j) in active.iter().enumerate() {
        polished[j] = sol[col].max(0.0);
    }
    polished
}

/// The least-squares fit only sees the support, so on degenerate supports
/// it can land outside the set of valid multipliers. Pull each multiplier
/// back by a coordinate-wise grid scan (the residual need not be unimodal
/// in one multiplier) plus a local ternary polish between the grid
/// neighbors of the best point; the caller keeps whichever dual set scores
/// lower.
fn refine_duals(
    config: &SystemConfig,
    cells: &[Cell],
    rows: &Rows,
    mu: &[f64],
    start: &[f64],
) -> Vec<f64> {
    let mut grid = vec![0.0f64];
    for i in 0..=64 {
        grid.push(1e-4 * (8.0f64 / 1e-4).powf(i as f64 / 64.0));
    }
    let mut lam = start.to_vec();
    for _ in 0..3 {
        for j in 0..lam.len() {
            let eval = |v: f64, lam: &mut Vec<f64>| {
                let old = lam[j];
                lam[j] = v;
                let r = kkt_residual(config, cells, rows, mu, lam);
                lam[j] = old;
                r
            };
            let mut best_idx = 0;
            let mut best_val = f64::INFINITY;
            for (idx, &v) in grid.iter().enumerate() {
                let r = eval(v, &mut lam);
                if r < best_val {
                    best_val = r;
                    best_idx = idx;
                }
            }
            let mut lo = grid[best_idx.saturating_sub(1)];
            let mut hi = grid[(best_idx + 1).min(grid.len() - 1)];
            for _ in 0..40 {
                let m1 = lo + (hi - lo) / 3.0;
                let m2 = hi - (hi - lo) / 3.0;
                if eval(m1, &mut lam) <= eval(m2, &mut lam) {
                    hi = m2;
                } else {
                    lo = m1;
                }
            }
            let mid = 0.5 * (lo + hi);
            if eval(mid, &mut lam) <= eval(lam[j], &mut lam) {
                lam[j] = mid;
            }
        }
    }
    lam
}

/// Average reported age of a stationary policy given its probabilities.
/// Returns infinity when some weighted user never succeeds.
pub fn analytic_srp_raoi(mu: &[Vec<Vec<f64>>], config: &SystemConfig) -> f64 {
    let mut p = vec![0.0; config.m()];
    for (i, u) in config.users.iter().enumerate() {
        for ki in 0..u.k_values.len() {
            for pi in 0..u.p_values.len() {
                p[i] += config.success(i, ki, pi) * mu[i][ki][pi];
            }
        }
    }
    objective(config, &p)
}

/// `L = (1/2M)·Σ_i w_i·(1/p_i + n_i/N)`; equals
/// `analytic_raoi/2 + (1/2M)·Σ_i w_i` identically.
pub fn lower_bound(srp: &SrpSolution, config: &SystemConfig) -> f64 {
    let m = config.m() as f64;
    let mut acc = 0.0;
    for (i, u) in config.users.iter().enumerate() {
        let p = srp.success_rates[i];
        if u.weight > 0.0 && p <= 0.0 {
            return f64::INFINITY;
        }
        acc += u.weight * (1.0 / p + config.reset_age(i));
    }
    acc / (2.0 * m)
}

pub fn solve_srp(config: &SystemConfig) -> Result<SrpSolution, ConfigError> {
    config.validate()?;
    let cells = enumerate_cells(config);
    let rows = build_rows(config, &cells);
    let m = config.m();

    let (reference, min_viol) = min_violation_point(&rows, cells.len());
    if min_viol > 1e-9 {
        let certificate: Vec<String> = (0..rows.bound.len())
            .filter(|&j| dot(&rows.coeff[j], &reference) > rows.bound[j])
            .map(|j| rows.name[j].clone())
            .collect();
        return Ok(SrpSolution {
            mu: pack_mu(config, &cells, &vec![0.0; cells.len()]),
            success_rates: vec![0.0; m],
            analytic_raoi: f64::INFINITY,
            lower_bound: f64::INFINITY,
            dual_power: 0.0,
            dual_distortion: vec![0.0; m],
            kkt_residual: f64::INFINITY,
            feasible: false,
            certificate,
        });
    }

    let mut mu = vec![1.0 / cells.len() as f64; cells.len()];
    let mut lam = vec![0.0; m + 1];
    let mut grad = Vec::new();
    let mut best: Option<(Vec<f64>, Vec<f64>, f64, f64)> = None; // mu, lam, objective, residual
    for it in 1..=MAX_ITERS {
        let p = success_rates(config, &cells, &mu);
        lagrangian_grad(config, &cells, &p, &lam, &mut grad);
        let eta = 2.0 / (it as f64).sqrt();
        mirror_step(&mut mu, &grad, eta);

        let dual_eta = 2.0 / (it as f64).sqrt();
        for j in 0..=m {
            let viol = (dot(&rows.coeff[j], &mu) - rows.bound[j]) / rows.bound[j].max(1.0);
            lam[j] = (lam[j] + dual_eta * viol).max(0.0);
        }

        if it % 200 == 0 || it == MAX_ITERS {
            // trim stray mass off the support, renormalize, pull back into
            // the polytope, then fit the multipliers to what remains; the
            // aggressive level also clears slowly-decaying near-ties
            let mut done = false;
            for trim in [SUPPORT_TOL, 1e-2] {
                let mut candidate: Vec<f64> =
                    mu.iter().map(|&v| if v > trim { v } else { 0.0 }).collect();
                let total: f64 = candidate.iter().sum();
                if total <= 0.0 {
                    continue;
                }
                for v in candidate.iter_mut() {
                    *v /= total;
                }
                let candidate = repair(&candidate, &reference, &rows);
                let mut duals = polish_duals(config, &cells, &rows, &candidate, &lam);
                let mut residual = kkt_residual(config, &cells, &rows, &candidate, &duals);
                if residual > KKT_TOL {
                    let refined = refine_duals(config, &cells, &rows, &candidate, &duals);
                    let refined_res = kkt_residual(config, &cells, &rows, &candidate, &refined);
                    if refined_res < residual {
                        duals = refined;
                        residual = refined_res;
                    }
                }
                let obj = objective(config, &success_rates(config, &cells, &candidate));
                // below tolerance, prefer the better objective; otherwise
                // chase the smaller residual
                let improves = match &best {
                    None => true,
                    Some((_, _, best_obj, best_res)) => {
                        (residual.max(KKT_TOL), obj) < (best_res.max(KKT_TOL), *best_obj)
                    }
                };
                if improves {
                    best = Some((candidate, duals, obj, residual));
                }
                if residual <= KKT_TOL {
                    done = true;
                }
            }
            if done {
                break;
            }
        }
    }
    let (mu, duals, obj, residual) = best.expect("at least one candidate evaluated");
    let p = success_rates(config, &cells, &mu);
    let mut solution = SrpSolution {
        mu: pack_mu(config, &cells, &mu),
        success_rates: p,
        analytic_raoi: obj,
        lower_bound: 0.0,
        dual_power: duals[0],
        dual_distortion: duals[1..].to_vec(),
        kkt_residual: residual,
        feasible: true,
        certificate: Vec::new(),
    };
    solution.lower_bound = lower_bound(&solution, config);
    Ok(solution)
}

fn pack_mu(config: &SystemConfig, cells: &[Cell], flat: &[f64]) -> Vec<Vec<Vec<f64>>> {
    let mut mu: Vec<Vec<Vec<f64>>> = config
        .users
        .iter()
        .map(|u| vec![vec![0.0; u.p_values.len()]; u.k_values.len()])
        .collect();
    for (c, cell) in cells.iter().enumerate() {
        if !cell.idle {
            mu[cell.user][cell.ki][cell.pi] = flat[c];
        }
    }
    mu
}
