//! All three schedulers on the same channel tables: the fixed round robin,
//! the optimal stationary randomized schedule, and the queue-driven
//! drift-plus-penalty policy. Reproduces the reported-age ordering
//! PRR > SRP > DPP on the default two-user setup.

use raoi::config::ExperimentConfig;
use raoi::crc::CrcSpec;
use raoi::policies::prr::PrrParams;
use raoi::policies::srp::solve_srp;
use raoi::sim::{run_episode, EpisodePolicy, SimMode};
use raoi::tables::{estimate_table, ppv_table, Detection, ErrorTable};

fn compare(label: &str, table: &ErrorTable, config: &ExperimentConfig, t_slots: u64) {
    let system = config.build_system(table).unwrap();
    let prr = run_episode(
        EpisodePolicy::Prr(&PrrParams::default()),
        &system,
        t_slots,
        SimMode::FastTable,
        config.seed,
    )
    .unwrap();
    let sol = solve_srp(&system).unwrap();
    let dpp = run_episode(EpisodePolicy::Dpp, &system, t_slots, SimMode::FastTable, config.seed)
        .unwrap();
    println!(
        "{label:<24} PRR {:.4}  SRP {:.4}  DPP {:.4}",
        prr.avg_reported_raoi, sol.analytic_raoi, dpp.avg_reported_raoi
    );
}

fn main() {
    let config = ExperimentConfig::default();
    let t_slots = 200_000;
    let trials = 20_000;

    let ppv = ppv_table(config.n, config.slot_symbols, &config.k_values, &config.p_values).unwrap();
    compare("normal approximation", &ppv, &config, t_slots);

    let genie = estimate_table(
        config.n,
        config.slot_symbols,
        &config.k_values,
        &config.p_values,
        CrcSpec::crc1(),
        Detection::GenieCrcOverhead,
        trials,
        config.seed,
    )
    .unwrap();
    compare("cyclic, genie verdicts", &genie, &config, t_slots);

    let crc = estimate_table(
        config.n,
        config.slot_symbols,
        &config.k_values,
        &config.p_values,
        CrcSpec::crc1(),
        Detection::Crc,
        trials,
        config.seed,
    )
    .unwrap();
    compare("cyclic, 1-bit CRC", &crc, &config, t_slots);

    println!("\nthe CRC row beats its genie counterpart on reported age because\nundetected decoding errors also reset the reported-age counter");
}
