//! Generate a censored offline dataset, run bidirectional learning once and
//! compare the result with the best design the dataset already had.

use bdi::harness::{run_once, RunConfig};
use bdi::tasks::TaskKind;

fn main() -> bdi::Result<()> {
    let cfg = RunConfig {
        task: TaskKind::QuadBowl,
        dim: Some(10),
        ..RunConfig::default()
    };
    let report = run_once(&cfg, 0)?;

    println!(
        "task            {} (D = {})",
        report.task.name, report.task.dim
    );
    println!("dataset rows    {}", report.dataset.rows);
    println!("dataset best    {:.4}", report.dataset.best_normalized);
    println!("bdi design      {:.4}", report.result.score_normalized);
    println!("proxy predicted {:.4}", report.result.prediction);
    let last = report.trace.last().expect("200 steps by default");
    println!(
        "final losses    l2h {:.4}  h2l {:.4}  total {:.4}",
        last.l2h, last.h2l, last.total
    );
    Ok(())
}
