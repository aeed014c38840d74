// Exact Gillespie simulation of the stochastic logistic process beside Euler–Maruyama on its
// diffusion approximation.
//
// Run with `cargo run --release --example ssa_logistic`.

use nalgebra::DVector;
use slowmani::models::StochasticLogistic;
use slowmani::simulate::{simulate_full, simulate_ssa, EnsembleOptions, SsaOptions, StepGrid};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let model = StochasticLogistic::new(2.0, 1.0, 500.0)?;
    let x0 = DVector::from_element(1, 0.1);
    let ssa = simulate_ssa(model.jump(), &x0, &SsaOptions { t_end: 10.0, n_out: 10, n_rep: 200, seed: 3 })?;
    let sde = simulate_full(
        model.sde(),
        &x0,
        &EnsembleOptions {
            grid: StepGrid::new(0.01, 10.0, 10)?,
            n_rep: 200,
            seed: 4,
        },
    )?;
    let (a, b) = (ssa.moments(), sde.moments());
    for (t, time) in ssa.times().iter().enumerate() {
        println!("t = {time:4.1}: SSA {:.4} ± {:.4}   SDE {:.4} ± {:.4}", a.mean(t, 0), a.se_mean(t, 0), b.mean(t, 0), b.se_mean(t, 0));
    }
    println!("deterministic equilibrium {}", model.equilibrium());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
