//! Parse a genome, check it, decode it and count its parameters.
//!
//!     cargo run --example decode_genome -- "S:64:128-P:max-S:128:128"

use cnnga::{count_parameters, decode, Genome, InputShape};

fn main() {
    let text = std::env::args().nth(1).unwrap_or_else(|| "S:64:128-P:max-S:128:128".to_string());
    let genome: Genome = match text.parse() {
        Ok(g) => g,
        Err(e) => {
            eprintln!("cannot parse `{text}`: {e}");
            std::process::exit(2);
        }
    };
    let shape = InputShape::square(32, 3);

    let report = genome.validate(shape.min_side());
    println!("genome      {genome}");
    println!("identifier  {}", genome.identifier());
    println!(
        "pools       {} of at most {} ({})",
        report.pool_count,
        report.max_pools_allowed,
        if report.valid { "valid" } else { "invalid" }
    );

    match decode(&genome, shape, 10) {
        Ok(arch) => {
            println!("parameters  {}", count_parameters(&arch));
            println!("output      {} channels at {:?}", arch.output_channels(), arch.output_spatial());
            println!("{}", arch.to_json_pretty());
        }
        Err(e) => println!("not decodable: {e}"),
    }
}
