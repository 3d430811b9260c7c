//! Run the drift-plus-penalty scheduler for one episode and audit whether
//! its virtual queues actually enforced the budgets.

use raoi::config::ExperimentConfig;
use raoi::policies::srp::solve_srp;
use raoi::policies::dpp::theorem2_bound;
use raoi::sim::{constraint_audit, run_episode, EpisodePolicy, SimMode};
use raoi::tables::ppv_table;

fn main() {
    let config = ExperimentConfig::default();
    let table = ppv_table(config.n, config.slot_symbols, &config.k_values, &config.p_values).unwrap();
    let system = config.build_system(&table).unwrap();

    let t_slots = 200_000;
    let metrics = run_episode(EpisodePolicy::Dpp, &system, t_slots, SimMode::FastTable, 1).unwrap();
    println!("T = {t_slots} slots");
    println!("avg reported age  {:.5}", metrics.avg_reported_raoi);
    println!("avg genie age     {:.5}", metrics.avg_genie_aoi);
    println!("avg power         {:.5} (budget {})", metrics.avg_power, config.p_bar);
    println!("avg distortion    {:?} (budget {:.4})", metrics.avg_distortion, config.d_bar);
    println!("max queues        Q1 {:.2}, Q2 {:.2}", metrics.max_q1, metrics.max_q2);

    let audit = constraint_audit(&metrics, &system);
    println!("\naudit: power_ok {}, distortion_ok {:?}, queues stable {}",
        audit.power_ok, audit.distortion_ok, audit.queue_stable);
    println!("queue mass per decile: {:?}",
        audit.decile_queue_means.iter().map(|q| (q * 100.0).round() / 100.0).collect::<Vec<_>>());

    // the performance guarantee is loose but finite; the realized age sits
    // well inside it
    let srp = solve_srp(&system).unwrap();
    println!(
        "\nrealized age {:.4} vs randomized policy {:.4} vs guarantee ratio bound {:.2}",
        metrics.avg_reported_raoi,
        srp.analytic_raoi,
        theorem2_bound(&system, &srp)
    );
}
