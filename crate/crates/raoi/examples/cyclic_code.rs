//! Build systematic cyclic codes, inspect their generators, and correct a
//! channel error via syndrome decoding.

use raoi::code::CodeSpec;

fn main() {
    for (n, k_dim) in [(7, 4), (15, 5), (15, 7), (15, 11)] {
        let code = CodeSpec::build(n, k_dim).unwrap();
        println!(
            "({n},{k_dim}): generator {}, d_min {}, {} syndromes",
            code.generator(),
            code.min_distance(),
            code.syndrome_count()
        );
    }

    let code = CodeSpec::build(15, 5).unwrap();
    let msg = [1, 0, 1, 1, 0];
    let codeword = code.encode(&msg).unwrap();
    println!("\nencode {msg:?} -> {codeword:?}");

    let mut received = codeword.clone();
    received[9] ^= 1;
    let syndrome = code.syndrome(&received).unwrap();
    println!(
        "flip bit 9: syndrome {syndrome}, coset leader {:?}",
        code.coset_leader(syndrome)
    );
    let decoded = code.decode(&received).unwrap();
    println!("decoded {decoded:?}, recovered: {}", decoded == msg);

    // the (7,4) code is perfect, so every double error lands in the coset
    // of some single-bit pattern and decodes to a wrong codeword
    let hamming = CodeSpec::build(7, 4).unwrap();
    let msg = [1, 0, 1, 1];
    let mut heavy = hamming.encode(&msg).unwrap();
    heavy[0] ^= 1;
    heavy[3] ^= 1;
    let wrong = hamming.decode(&heavy).unwrap();
    println!("(7,4) with 2 flips: decoded {wrong:?}, recovered: {}", wrong == msg);
}
