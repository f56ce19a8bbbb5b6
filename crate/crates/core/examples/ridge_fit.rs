//! Closed-form kernel ridge regression on a 1-D toy problem.

use bdi::ridge;
use bdi::KernelSpec;
use nalgebra::{DMatrix, DVector};

fn main() -> bdi::Result<()> {
    let xs: Vec<f64> = (0..12).map(|i| -2.0 + i as f64 / 3.0).collect();
    let train = DMatrix::from_column_slice(xs.len(), 1, &xs);
    let y = DVector::from_iterator(xs.len(), xs.iter().map(|x| (1.5 * x).sin()));

    let spec = KernelSpec::default();
    let k = spec.gram(&train, &train)?;
    let fit = ridge::fit(&k, &y, ridge::DEFAULT_REGULARIZATION)?;
    println!(
        "beta used: {:e} (escalated: {})",
        fit.regularization,
        fit.escalated()
    );

    let grid = DMatrix::from_fn(9, 1, |i, _| -2.0 + i as f64 * 0.5);
    let pred = ridge::predict(&spec.gram(&grid, &train)?, &fit)?;
    println!("{:>6} {:>9} {:>9}", "x", "sin(1.5x)", "ridge");
    for i in 0..grid.nrows() {
        let x = grid[(i, 0)];
        println!("{x:>6.2} {:>9.4} {:>9.4}", (1.5 * x).sin(), pred[i]);
    }
    Ok(())
}
