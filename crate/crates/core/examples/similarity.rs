//! Mean kernel similarity between each variant's design and the top decile
//! of the offline data.

use bdi::harness::{ablate, RunConfig, SeedList, Variant};
use bdi::tasks::TaskKind;

fn main() -> bdi::Result<()> {
    let cfg = RunConfig {
        task: TaskKind::NegAckley,
        dim: Some(60),
        seed: SeedList::range(0, 2),
        ..RunConfig::default()
    };
    let table = ablate(&cfg)?;
    for v in [Variant::WithoutL2h, Variant::Full, Variant::WithoutH2l] {
        let s = table.variant(v).expect("all variants run");
        let per_seed: Vec<String> = s
            .reports
            .iter()
            .map(|r| format!("{:.3}", r.similarity.final_))
            .collect();
        println!("{:<26} {}", s.label, per_seed.join("  "));
    }
    Ok(())
}
