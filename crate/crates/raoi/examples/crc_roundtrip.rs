//! Append a CRC to a message, corrupt the word, and watch which errors the
//! check catches. The 1-bit CRC is a parity bit; the 3-bit CRC divides by
//! x^3 + x + 1.

use raoi::crc::{crc_append, crc_check, CrcSpec};

fn main() {
    let msg = [1, 0, 1, 1, 0, 0, 1];
    for (name, crc) in [("parity", CrcSpec::crc1()), ("crc-3", CrcSpec::crc3())] {
        let word = crc_append(&msg, &crc);
        println!("{name}: {msg:?} -> {word:?}");
        println!("  clean word passes: {}", crc_check(&word, &crc).unwrap());

        let mut one_flip = word.clone();
        one_flip[2] ^= 1;
        println!("  single flip caught: {}", !crc_check(&one_flip, &crc).unwrap());

        // an even number of flips defeats the parity bit but not always the
        // longer generator
        let mut two_flips = word.clone();
        two_flips[0] ^= 1;
        two_flips[4] ^= 1;
        println!(
            "  double flip caught: {}",
            !crc_check(&two_flips, &crc).unwrap()
        );
    }

    // count undetected patterns exhaustively for a short word
    let crc = CrcSpec::crc3();
    let word = crc_append(&[1, 0, 1], &crc);
    let mut undetected = 0u32;
    for pattern in 1u32..(1 << word.len()) {
        let corrupted: Vec<u8> = word
            .iter()
            .enumerate()
            .map(|(j, &b)| b ^ ((pattern >> j) & 1) as u8)
            .collect();
        if crc_check(&corrupted, &crc).unwrap() {
            undetected += 1;
        }
    }
    println!(
        "crc-3 over a {}-bit word: {undetected} of {} nonzero error patterns slip through",
        word.len(),
        (1u32 << word.len()) - 1
    );
}
