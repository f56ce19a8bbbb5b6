//! `M = 4` designs, either all learnable or with only the first one learnable.

use bdi::bidirectional::MultiDesignMode;
use bdi::harness::{run_once, RunConfig};

fn main() -> bdi::Result<()> {
    for mode in [MultiDesignMode::All, MultiDesignMode::One] {
        let cfg = RunConfig {
            dim: Some(10),
            m: 4,
            m_mode: mode,
            top_k: 4,
            ..RunConfig::default()
        };
        let r = run_once(&cfg, 1)?;
        println!("m-mode {mode}: reported row {}", r.result.row);
        for e in &r.top_k {
            println!(
                "  row {}  predicted {:>8.4}  normalized {:.4}",
                e.row, e.prediction, e.score_normalized
            );
        }
        println!(
            "  100th {:.4}  50th {:.4}",
            r.percentile_100, r.percentile_50
        );
    }
    Ok(())
}
