//! Plain gradient ascent on the NTK ridge proxy, for comparison with BDI.

use bdi::bidirectional::{grad_ascent, BdiConfig, Objective};
use bdi::tasks::{generate_offline, Task, TaskKind, TaskSpec};
use bdi::KernelSpec;

fn main() -> bdi::Result<()> {
    let task = Task::new(TaskSpec::new(TaskKind::QuadBowl, Some(10), 0))?;
    let data = generate_offline(&task, 1000, 0.5)?;
    let cfg = BdiConfig::continuous();
    let objective = Objective::new(&data.designs, &data.scores, KernelSpec::default(), &cfg)?;

    let best = bdi::bidirectional::rank_by_score(&data.scores)[0];
    let init: Vec<f64> = data.designs.row(best).iter().copied().collect();
    let out = grad_ascent(&objective, &init, cfg.steps, cfg.learning_rate)?;

    let mut x = data.to_task_space(&out.design);
    task.clip(&mut x);
    let score = data.normalized_ground_truth(task.oracle(&x)?)?;
    println!("dataset best     {:.4}", data.best_normalized()?);
    println!("ascent design    {score:.4}");
    println!(
        "proxy            {:.4} -> {:.4}",
        out.predictions.first().copied().unwrap_or(f64::NAN),
        out.predictions.last().copied().unwrap_or(f64::NAN)
    );
    Ok(())
}
