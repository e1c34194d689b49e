//! Write a seeded synthetic prediction corpus as JSONL.
//!
//! Usage: `cargo run -p bnlf --example synthetic -- OUT [RECORDS_PER_CORPUS] [SEED]`

use std::fs::File;
use std::io::BufWriter;

use bnlf::data::write_records;
use bnlf::synthetic::SyntheticSpec;

fn main() -> std::io::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let Some(out) = args.first() else {
        eprintln!("usage: synthetic OUT [RECORDS_PER_CORPUS] [SEED]");
        std::process::exit(2);
    };
    let n = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(1000);
    let seed = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(0);
    let records = SyntheticSpec::home_corpus(n, [0.9; 3], 0.55, seed).generate();
    write_records(BufWriter::new(File::create(out)?), &records)?;
    eprintln!("wrote {} records to {out}", records.len());
    Ok(())
}
