// Simulate the full Michaelis–Menten SDE and its one-dimensional reduction and compare the
// moments of π₁(x(t)) with those of z(t).
//
// Run with `cargo run --release --example full_vs_reduced`.

use nalgebra::DVector;
use slowmani::models::MichaelisMenten;
use slowmani::simulate::{
    compare_projected, simulate_full, simulate_reduced, EnsembleOptions, FullView, MmReducedScalar, MomentTolerance,
    Projector, StepGrid, DEFAULT_REPROJECT_EVERY,
};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mm = MichaelisMenten::new(1.0, 1.0, 0.01, 0.01)?;
    let x0 = DVector::from_vec(vec![1.0, 0.0]);
    let grid = StepGrid::new(0.1, 1500.0, 30)?;
    let full = simulate_full(mm.sde(), &x0, &EnsembleOptions { grid, n_rep: 200, seed: 11 })?;

    let z0 = DVector::from_element(1, mm.project_scalar(x0[0], x0[1])?);
    let reduced = simulate_reduced(&MmReducedScalar(mm.clone()), &z0, &EnsembleOptions { grid, n_rep: 200, seed: 12 }, DEFAULT_REPROJECT_EVERY)?;

    let closed = mm.clone();
    let view = FullView::Projected(Projector::closed_form(move |x| closed.project(x)));
    let cmp = compare_projected(&full, &view, 0, &reduced, 0, MomentTolerance::default())?;
    for row in cmp.rows.iter().step_by(5) {
        println!(
            "t = {:6.0}: E π₁ = {:.4}  E z = {:.4}  (±{:.4})",
            row.time, row.mean_full, row.mean_reduced, row.se_mean
        );
    }
    println!("means within 3 SE at {:.0}% of times", 100.0 * cmp.fraction_mean_ok());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
