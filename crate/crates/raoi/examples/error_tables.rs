//! Build success-probability tables two ways: the normal-approximation
//! closed form and Monte Carlo over the cyclic-code pipeline, then save and
//! reload one to show the JSON round trip.

use raoi::crc::CrcSpec;
use raoi::tables::{estimate_table, load_table, ppv_table, save_table, Detection};

fn print_table(label: &str, table: &raoi::tables::ErrorTable) {
    println!("{label} (n={}, N={}):", table.n, table.slot_symbols);
    for (ki, &k) in table.k_values.iter().enumerate() {
        let row: Vec<String> = table
            .p_values
            .iter()
            .enumerate()
            .map(|(pi, &p)| format!("P={p}: {:.4}", table.reported_success[ki][pi]))
            .collect();
        println!("  k={k:2}  {}", row.join("  "));
    }
}

fn main() {
    let k_values = [4, 6, 8, 10];
    let p_values = [1.0, 2.0, 4.0];

    let ppv = ppv_table(15, 15, &k_values, &p_values).unwrap();
    print_table("normal approximation", &ppv);

    let cyclic = estimate_table(
        15,
        15,
        &k_values,
        &p_values,
        CrcSpec::crc1(),
        Detection::Crc,
        20_000,
        1,
    )
    .unwrap();
    print_table("\ncyclic Monte Carlo, 1-bit CRC", &cyclic);
    println!(
        "  undetected at k=10, P=1: {:.4} (reported minus genie)",
        cyclic.undetected[3][0]
    );

    let dir = std::env::temp_dir().join("raoi_example_table.json");
    save_table(&cyclic, &dir).unwrap();
    let loaded = load_table(&dir).unwrap();
    println!("\nsaved and reloaded: identical = {}", loaded == cyclic);
    std::fs::remove_file(&dir).ok();
}
