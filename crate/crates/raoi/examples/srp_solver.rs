//! Solve for the optimal stationary randomized schedule under average
//! power and distortion budgets, and inspect the certificate when the
//! budgets cannot be met.

use raoi::config::ExperimentConfig;
use raoi::policies::srp::{lower_bound, solve_srp};
use raoi::tables::ppv_table;

fn main() {
    let config = ExperimentConfig::default();
    let table = ppv_table(config.n, config.slot_symbols, &config.k_values, &config.p_values).unwrap();
    let system = config.build_system(&table).unwrap();

    let sol = solve_srp(&system).unwrap();
    println!("analytic reported age  {:.5}", sol.analytic_raoi);
    println!("lower bound            {:.5}", sol.lower_bound);
    println!("kkt residual           {:.2e}", sol.kkt_residual);
    println!("power multiplier       {:.5}", sol.dual_power);
    println!("success rates          {:?}", sol.success_rates);
    println!("\nschedule support (probability per user, k, P):");
    for (i, user_mu) in sol.mu.iter().enumerate() {
        for (ki, row) in user_mu.iter().enumerate() {
            for (pi, &m) in row.iter().enumerate() {
                if m > 1e-6 {
                    println!(
                        "  user {i}  k={:2}  P={}  mu={:.5}",
                        config.k_values[ki], config.p_values[pi], m
                    );
                }
            }
        }
    }

    // the age of any feasible schedule is at most twice the lower bound
    let l = lower_bound(&sol, &system);
    println!("\nage / lower bound = {:.4} (always <= 2)", sol.analytic_raoi / l);

    // an unmeetable power budget yields a certificate instead of a schedule
    let mut tight = ExperimentConfig::default();
    tight.p_bar = 0.5;
    let system = tight.build_system(&table).unwrap();
    let sol = solve_srp(&system).unwrap();
    println!("\nP_bar = 0.5: feasible = {}", sol.feasible);
    for line in &sol.certificate {
        println!("  violated: {line}");
    }
}
