//! The enumerable length-8, 4-letter sequence task and BDI on its logits.

use bdi::harness::{run_once, RunConfig};
use bdi::tasks::{decode_discrete, encode_discrete, Task, TaskKind, TaskSpec, ALPHABET};

fn main() -> bdi::Result<()> {
    let task = Task::new(TaskSpec::new(TaskKind::Discrete8, None, 0))?;
    let land = task.discrete().expect("discrete task");
    println!("sequences      {}", land.sorted_scores().len());
    println!(
        "score range    [{:.4}, {:.4}]",
        land.min_score(),
        land.max_score()
    );
    println!("best sequence  {:?}", land.argmax());

    let logits = encode_discrete(&[3, 1, 0, 2, 2, 1, 0, 3], 1.0, ALPHABET);
    println!("round trip     {:?}", decode_discrete(&logits, ALPHABET)?);

    let cfg = RunConfig {
        task: TaskKind::Discrete8,
        ..RunConfig::default()
    };
    let report = run_once(&cfg, 0)?;
    let tokens = report.result.tokens.clone().unwrap_or_default();
    println!("bdi sequence   {tokens:?}");
    println!("bdi score      {:.4}", report.result.score_raw);
    println!(
        "share better   {:.2}%",
        100.0 * land.fraction_above(report.result.score_raw)
    );
    Ok(())
}
