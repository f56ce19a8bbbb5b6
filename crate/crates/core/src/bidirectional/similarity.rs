use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::kernel::{rows_of, KernelSpec};

/// Mean kernel value between `x` and the rows of `set`.
pub fn similarity(spec: &KernelSpec, x: &[f64], set: &DMatrix<f64>) -> Result<f64> {
    if set.nrows() == 0 {
        return Err(Error::Empty("reference set"));
    }
    let rows = rows_of(set);
    let mut total = 0.0;
    for r in &rows {
        total += spec.pair(x, r)?;
    }
    Ok(total / rows.len() as f64)
}
