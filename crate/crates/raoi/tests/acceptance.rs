//! End-to-end acceptance checks, one test per criterion. Each prints a
//! single pass/fail line (visible with `--nocapture` or on failure) and
//! then asserts, so a red run names exactly which bar was missed.

use std::time::Instant;

use raoi::code::CodeSpec;
use raoi::config::ExperimentConfig;
use raoi::crc::CrcSpec;
use raoi::phy::{transmit_packet, RngStream};
use raoi::policies::prr::PrrParams;
use raoi::policies::srp::solve_srp;
use raoi::sim::{
    batch_stderr, constraint_audit, run_episode, simulated_vs_analytic_srp, EpisodePolicy,
    Metrics, SimMode,
};
use raoi::tables::{estimate_table, ppv_table, q_function, Detection, ErrorTable};

fn report(criterion: u32, ok: bool, detail: &str) {
    println!(
        "criterion {criterion}: {} — {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {criterion}: {detail}");
}

fn default_ppv() -> ErrorTable {
    let c = ExperimentConfig::default();
    ppv_table(c.n, c.slot_symbols, &c.k_values, &c.p_values).unwrap()
}

fn dpp_default_metrics() -> Metrics {
    let config = ExperimentConfig::default();
    let system = config.build_system(&default_ppv()).unwrap();
    run_episode(EpisodePolicy::Dpp, &system, 1_000_000, SimMode::FastTable, config.seed).unwrap()
}

#[test]
fn criterion_1_randomized_policy_analytic_age() {
    let start = Instant::now();
    let system = ExperimentConfig::default().build_system(&default_ppv()).unwrap();
    let sol = solve_srp(&system).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let ok = sol.feasible && (sol.analytic_raoi - 2.0).abs() <= 0.05 && elapsed < 10.0;
    report(
        1,
        ok,
        &format!(
            "analytic age {:.5} (target 2.00 ± 0.05), {elapsed:.2}s (< 10s)",
            sol.analytic_raoi
        ),
    );
}

#[test]
fn criterion_2_queue_policy_simulated_age() {
    let start = Instant::now();
    let metrics = dpp_default_metrics();
    let elapsed = start.elapsed().as_secs_f64();
    let ok = (metrics.avg_reported_raoi - 1.506).abs() <= 0.05 && elapsed < 60.0;
    report(
        2,
        ok,
        &format!(
            "simulated age {:.5} (target 1.506 ± 0.05), {elapsed:.2}s (< 60s)",
            metrics.avg_reported_raoi
        ),
    );
}

#[test]
fn criterion_3_round_robin_simulated_age() {
    let start = Instant::now();
    let config = ExperimentConfig::default();
    let system = config.build_system(&default_ppv()).unwrap();
    let metrics = run_episode(
        EpisodePolicy::Prr(&PrrParams::default()),
        &system,
        1_000_000,
        SimMode::FastTable,
        config.seed,
    )
    .unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let ok = (metrics.avg_reported_raoi - 1.84).abs() <= 0.10 && elapsed < 30.0;
    report(
        3,
        ok,
        &format!(
            "simulated age {:.5} (target 1.84 ± 0.10), {elapsed:.2}s (< 30s)",
            metrics.avg_reported_raoi
        ),
    );
}

#[test]
fn criterion_4_policy_and_detection_orderings() {
    let config = ExperimentConfig::default();
    let ppv = default_ppv();
    let cyclic_genie = estimate_table(
        config.n,
        config.slot_symbols,
        &config.k_values,
        &config.p_values,
        CrcSpec::crc1(),
        Detection::GenieCrcOverhead,
        100_000,
        config.seed,
    )
    .unwrap();
    let cyclic_crc1 = estimate_table(
        config.n,
        config.slot_symbols,
        &config.k_values,
        &config.p_values,
        CrcSpec::crc1(),
        Detection::Crc,
        100_000,
        config.seed,
    )
    .unwrap();

    let mut details = Vec::new();
    let mut ok = true;
    let mut srp_sim = Vec::new();
    for (label, table) in [
        ("ppv", &ppv),
        ("cyclic-genie", &cyclic_genie),
        ("cyclic-crc1", &cyclic_crc1),
    ] {
        let system = config.build_system(table).unwrap();
        let sol = solve_srp(&system).unwrap();
        assert!(sol.feasible, "{label} must be feasible");
        let dpp = run_episode(
            EpisodePolicy::Dpp,
            &system,
            1_000_000,
            SimMode::FastTable,
            config.seed,
        )
        .unwrap();
        let srp = run_episode(
            EpisodePolicy::Srp(&sol),
            &system,
            1_000_000,
            SimMode::FastTable,
            config.seed,
        )
        .unwrap();
        srp_sim.push((
            label,
            srp.avg_reported_raoi,
            batch_stderr(&srp.batch_means),
        ));
        let row_ok = dpp.avg_reported_raoi < sol.analytic_raoi;
        ok &= row_ok;
        details.push(format!(
            "{label}: dpp {:.4} < srp {:.4} {}",
            dpp.avg_reported_raoi,
            sol.analytic_raoi,
            if row_ok { "ok" } else { "VIOLATED" }
        ));
    }
    let genie = srp_sim.iter().find(|r| r.0 == "cyclic-genie").unwrap();
    let crc = srp_sim.iter().find(|r| r.0 == "cyclic-crc1").unwrap();
    let slack = 3.0 * (genie.2 * genie.2 + crc.2 * crc.2).sqrt();
    let detect_ok = crc.1 <= genie.1 + slack;
    ok &= detect_ok;
    details.push(format!(
        "crc-verdict srp {:.4} ≤ genie srp {:.4} + 3σ ({:.4}) {}",
        crc.1,
        genie.1,
        slack,
        if detect_ok { "ok" } else { "VIOLATED" }
    ));
    report(4, ok, &details.join("; "));
}

#[test]
fn criterion_5_loose_budgets_limit_values() {
    let mut config = ExperimentConfig::default();
    config.p_bar = 100.0;
    config.d_bar = 0.99;
    let system = config.build_system(&default_ppv()).unwrap();
    let sol = solve_srp(&system).unwrap();
    let dpp = run_episode(
        EpisodePolicy::Dpp,
        &system,
        1_000_000,
        SimMode::FastTable,
        config.seed,
    )
    .unwrap();
    let srp_ok = sol.feasible && (sol.analytic_raoi - 2.0).abs() <= 0.02;
    let dpp_ok = (dpp.avg_reported_raoi - 1.5).abs() <= 0.02;
    report(
        5,
        srp_ok && dpp_ok,
        &format!(
            "loose budgets: srp {:.5} (2.00 ± 0.02), dpp {:.5} (1.50 ± 0.02)",
            sol.analytic_raoi, dpp.avg_reported_raoi
        ),
    );
}

#[test]
fn criterion_6_lower_bound_identity_on_random_configs() {
    use rand::Rng;
    use rand::SeedableRng;
    let start = Instant::now();
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(606);
    let mut checked = 0;
    let mut worst_gap: f64 = 0.0;
    while checked < 20 {
        let mut config = ExperimentConfig::default();
        config.m = rng.random_range(1..=3);
        config.p_bar = rng.random_range(1.0..5.0);
        config.d_bar = rng.random_range(0.3..1.0);
        config.weights = Some((0..config.m).map(|_| rng.random_range(0.2..3.0)).collect());
        let system = match config.build_system(&default_ppv()) {
            Ok(s) => s,
            Err(_) => continue,
        };
        let sol = solve_srp(&system).unwrap();
        if !sol.feasible {
            continue;
        }
        let w_bar: f64 = system.users.iter().map(|u| u.weight).sum::<f64>()
            / (2.0 * system.m() as f64);
        let gap = (sol.lower_bound - sol.analytic_raoi / 2.0 - w_bar).abs();
        worst_gap = worst_gap.max(gap);
        assert!(
            sol.analytic_raoi <= 2.0 * sol.lower_bound + 1e-9,
            "age {} exceeds twice the bound {}",
            sol.analytic_raoi,
            sol.lower_bound
        );
        checked += 1;
    }
    let elapsed = start.elapsed().as_secs_f64();
    let ok = worst_gap <= 1e-9 && elapsed < 60.0;
    report(
        6,
        ok,
        &format!("20 configs: worst identity gap {worst_gap:.2e} (≤ 1e-9), {elapsed:.2}s (< 60s)"),
    );
}

#[test]
fn criterion_7_queue_policy_constraint_audit() {
    let config = ExperimentConfig::default();
    let system = config.build_system(&default_ppv()).unwrap();
    let metrics = dpp_default_metrics();
    let audit = constraint_audit(&metrics, &system);
    report(
        7,
        audit.ok,
        &format!(
            "avg power {:.4} ≤ 1.01·{}, distortion {:?} ≤ 1.01·{:.4}, queue deciles {:?} stable: {}",
            audit.avg_power,
            system.p_bar,
            audit.avg_distortion,
            system.users[0].d_bar,
            audit.decile_queue_means,
            audit.queue_stable
        ),
    );
}

#[test]
fn criterion_8_renewal_formula_agreement() {
    let table = default_ppv();
    let variants: Vec<ExperimentConfig> = vec![
        ExperimentConfig::default(),
        {
            let mut c = ExperimentConfig::default();
            c.p_bar = 1.5;
            c
        },
        {
            let mut c = ExperimentConfig::default();
            c.p_bar = 4.0;
            c
        },
        {
            let mut c = ExperimentConfig::default();
            c.d_bar = 0.6;
            c
        },
        {
            let mut c = ExperimentConfig::default();
            c.weights = Some(vec![1.0, 2.0]);
            c
        },
    ];
    let mut details = Vec::new();
    let mut ok = true;
    for (idx, config) in variants.iter().enumerate() {
        let system = config.build_system(&table).unwrap();
        let agreement = simulated_vs_analytic_srp(&system, 1_000_000, config.seed + idx as u64)
            .unwrap();
        ok &= agreement.within_three_sigma;
        details.push(format!(
            "config {idx}: analytic {:.4}, simulated {:.4}, gap {:.4} vs 3σ {:.4}",
            agreement.analytic,
            agreement.simulated,
            agreement.gap,
            3.0 * agreement.stderr
        ));
    }
    report(8, ok, &details.join("; "));
}

#[test]
fn criterion_9_coding_oracles() {
    let mut details = Vec::new();

    // (7,4): minimum distance 3
    let hamming = CodeSpec::build(7, 4).unwrap();
    let d7 = hamming.min_distance();
    details.push(format!("(7,4) d_min {d7}"));
    assert_eq!(d7, 3);

    // (15,5): corrects every pattern of weight ≤ t = (d_min-1)/2
    let bch = CodeSpec::build(15, 5).unwrap();
    let d15 = bch.min_distance();
    let t = (d15 - 1) / 2;
    details.push(format!("(15,5) d_min {d15}, t {t}"));
    let codeword = bch.encode(&[1, 0, 1, 1, 0]).unwrap();
    let mut patterns = 0u32;
    for mask in 1u32..(1 << 15) {
        if mask.count_ones() > t as u32 {
            continue;
        }
        patterns += 1;
        let corrupted: Vec<u8> = codeword
            .iter()
            .enumerate()
            .map(|(j, &b)| b ^ ((mask >> j) & 1) as u8)
            .collect();
        let decoded = bch.decode(&corrupted).unwrap();
        assert_eq!(decoded, vec![1, 0, 1, 1, 0], "pattern {mask:#x} not corrected");
    }
    details.push(format!("{patterns} patterns corrected"));

    // CRC-3 on 7-bit words: exactly 15 of 127 nonzero errors pass
    let crc3 = CrcSpec::crc3();
    let base = raoi::crc::crc_append(&[1, 0, 0, 1], &crc3);
    let undetected = (1u32..128)
        .filter(|e| {
            let word: Vec<u8> = base
                .iter()
                .enumerate()
                .map(|(j, &b)| b ^ ((e >> (6 - j)) & 1) as u8)
                .collect();
            raoi::crc::crc_check(&word, &crc3).unwrap()
        })
        .count();
    details.push(format!("crc-3 undetected {undetected}/127"));
    assert_eq!(undetected, 15);

    // Monte Carlo correct-decoding rate vs exact coset-leader enumeration
    let p = q_function(1.0f64.sqrt());
    let mut exact = 0.0;
    for s in 0..hamming.syndrome_count() {
        let w: i32 = hamming
            .coset_leader(s as u64)
            .iter()
            .map(|&b| i32::from(b))
            .sum();
        exact += p.powi(w) * (1.0 - p).powi(7 - w);
    }
    let trials = 200_000u64;
    let root = RngStream::new(909);
    let crc = CrcSpec::none();
    let mut hits = 0u64;
    for trial in 0..trials {
        let out = transmit_packet(
            &[0, 1, 1, 0],
            &crc,
            &hamming,
            1.0,
            &root.substream([0, 0, 0, trial]),
        )
        .unwrap();
        hits += u64::from(out.genie_success);
    }
    let rate = hits as f64 / trials as f64;
    let sigma = (exact * (1.0 - exact) / trials as f64).sqrt();
    let mc_ok = (rate - exact).abs() <= 3.0 * sigma;
    details.push(format!("mc rate {rate:.5} vs exact {exact:.5} (3σ {:.5})", 3.0 * sigma));
    report(9, mc_ok, &details.join("; "));
}

#[test]
fn criterion_10_bit_exact_across_thread_counts() {
    let config = ExperimentConfig::default();
    let build = || {
        let table = estimate_table(
            config.n,
            config.slot_symbols,
            &config.k_values,
            &config.p_values,
            CrcSpec::crc1(),
            Detection::Crc,
            20_000,
            config.seed,
        )
        .unwrap();
        let system = config.build_system(&table).unwrap();
        let metrics = run_episode(
            EpisodePolicy::Dpp,
            &system,
            100_000,
            SimMode::FastTable,
            config.seed,
        )
        .unwrap();
        (table, metrics)
    };
    let mut results = Vec::new();
    for threads in [1usize, 4, 8] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        results.push((threads, pool.install(build)));
    }
    let (_, reference) = &results[0];
    let ok = results.iter().all(|(_, r)| r == reference);
    report(
        10,
        ok,
        &format!(
            "tables and metrics identical across thread counts {:?}",
            results.iter().map(|(t, _)| *t).collect::<Vec<_>>()
        ),
    );
}
