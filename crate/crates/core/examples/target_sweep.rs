//! Sensitivity of the final score to the target `y_h`.

use bdi::harness::{sweep, RunConfig, SeedList, SweepParam};

fn main() -> bdi::Result<()> {
    let cfg = RunConfig {
        dim: Some(10),
        seed: SeedList::range(0, 4),
        ..RunConfig::default()
    };
    let table = sweep(&cfg, SweepParam::Yh, &[5.0, 10.0, 15.0, 20.0, 25.0, 30.0])?;
    print!("{}", table.render());
    Ok(())
}
