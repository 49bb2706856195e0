//! Sample a clustered deployment, print its noise-normalized gains and save
//! it as a fixture that `backcom-noma solve` can read.
//!
//! `cargo run --example channel -- [num_users] [seed]`

use backcom_noma::channel::{sample_instance, ScenarioConfig};
use backcom_noma::format::{parse_instance, write_instance};

fn main() -> backcom_noma::Result<()> {
    let mut args = std::env::args().skip(1);
    let cfg = ScenarioConfig {
        num_users: args.next().map_or(3, |a| a.parse().expect("user count")),
        seed: args.next().map_or(1, |a| a.parse().expect("seed")),
        ..Default::default()
    };
    cfg.validate()?;
    let inst = sample_instance(&cfg, &mut cfg.rng())?;
    let text = write_instance(&inst);
    print!("{text}");
    assert_eq!(parse_instance(&text)?, inst);
    std::fs::write("instance.txt", &text)?;
    eprintln!("wrote instance.txt");
    Ok(())
}
