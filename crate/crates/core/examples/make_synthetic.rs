//! Writes synthetic five-class and two-class beat CSVs for trying out the
//! command-line tool without the real databases.
//!
//!     cargo run --release -p ecgnet --example make_synthetic -- data 10000 6000

use ecgnet::data::{synth, write_beats_csv};
use std::path::PathBuf;

fn main() -> ecgnet::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| "data".into()));
    let n_mit: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(10_000);
    let n_ptb: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(6_000);
    std::fs::create_dir_all(&dir).map_err(|e| ecgnet::EcgError::io(&dir, e))?;
    let mit = dir.join("mitbih_synthetic.csv");
    let ptb = dir.join("ptb_synthetic.csv");
    write_beats_csv(&synth::mit_bih_like(n_mit, 187, 42), &mit)?;
    write_beats_csv(&synth::ptb_like(n_ptb, 187, 42), &ptb)?;
    println!("wrote {} and {}", mit.display(), ptb.display());
    Ok(())
}
