//! NTK values, Gram matrices and input gradients.

use bdi::KernelSpec;
use nalgebra::DMatrix;

fn main() -> bdi::Result<()> {
    let ntk = KernelSpec::default();
    let x = [1.0, 0.0];
    let z = [0.0, 1.0];
    println!("{} k(x, z) = {:.6}", ntk.name(), ntk.pair(&x, &z)?);
    println!("{} k(x, x) = {:.6}", ntk.name(), ntk.pair(&x, &x)?);
    println!("dk/dz    = {:?}", ntk.grad_second(&x, &z)?);

    // depth 0 with unit weight variance and no bias is the linear kernel x·z/D
    let linear = KernelSpec::ntk(0, 1.0, 0.0)?;
    println!(
        "linear k((1,1),(1,1)) = {}",
        linear.pair(&[1.0, 1.0], &[1.0, 1.0])?
    );

    let a = DMatrix::from_fn(4, 3, |i, j| ((i * 3 + j) as f64 * 0.7).sin());
    let gram = ntk.gram(&a, &a)?;
    let eig = gram.entries.clone().symmetric_eigenvalues();
    println!("gram:\n{:.4}", gram.entries);
    println!("min eigenvalue {:.3e}", eig.min());

    let rbf = KernelSpec::rbf(0.5)?;
    println!("rbf k(x, z) = {:.6}", rbf.pair(&x, &z)?);
    Ok(())
}
