// Solve the restricted Lyapunov equation `JᵀX + XJ = −(I−P)ᵀH(I−P)` for a Jacobian with a
// two-dimensional kernel, and check the residual on the fast subspace.
//
// Run with `cargo run --example lyapunov`.

use nalgebra::DMatrix;
use slowmani::linalg::SplitOptions;
use slowmani::reduction::{lyapunov_residual, lyapunov_solve_matrix};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    // J = S·diag(0, 0, −1, −2.5)·S⁻¹ with a non-orthogonal S
    let s = DMatrix::from_row_slice(4, 4, &[1.0, 0.2, 0.0, 0.3, 0.0, 1.0, 0.5, 0.0, 0.1, 0.0, 1.0, 0.4, 0.0, 0.3, 0.0, 1.0]);
    let lambda = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.0, 0.0, -1.0, -2.5]));
    let s_inv = s.clone().try_inverse().ok_or("singular basis")?;
    let j = &s * lambda * &s_inv;
    let h = DMatrix::from_fn(4, 4, |a, b| 1.0 / (1.0 + a as f64 + b as f64));

    let opts = SplitOptions::default().with_slow_dim(2);
    let x = lyapunov_solve_matrix(&j, &h, &opts)?;
    // projector onto the kernel along the fast directions
    let mut p = DMatrix::zeros(4, 4);
    for c in 0..2 {
        p += s.column(c) * s_inv.row(c);
    }
    let residual = lyapunov_residual(&j, &x, &h, &p);
    println!("X =\n{x:.5}");
    println!("fast-subspace residual: {residual:.2e}");
    assert!(residual < 1e-10);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
