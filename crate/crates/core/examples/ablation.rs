//! Full loss against forward-only, backward-only and the RBF kernel, over
//! five shared seeds.

use bdi::harness::{ablate, RunConfig, SeedList};
use bdi::tasks::TaskKind;

fn main() -> bdi::Result<()> {
    let cfg = RunConfig {
        task: TaskKind::QuadBowl,
        dim: Some(10),
        seed: SeedList::range(0, 4),
        ..RunConfig::default()
    };
    let table = ablate(&cfg)?;
    print!("{}", table.render());
    Ok(())
}
