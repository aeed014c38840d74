// Branching diffusing particles with competitive deaths: the mean-square spread saturates at
// 2ε/μ instead of growing linearly.
//
// Run with `cargo run --release --example competition_spread`.

use slowmani::models::CompetitionDiffusion;
use slowmani::simulate::{simulate_particles_competition, ParticleOptions, StepGrid};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let model = CompetitionDiffusion::new(0.005, 0.01, 100)?;
    let grid = StepGrid::new(0.1, 200.0, 10)?;
    let with_competition = simulate_particles_competition(&model, &ParticleOptions { grid, n_rep: 40, seed: 5, births: true, deaths: true })?;
    let free = simulate_particles_competition(&model, &ParticleOptions { grid, n_rep: 40, seed: 5, births: false, deaths: false })?;
    for (t, &time) in with_competition.times.iter().enumerate() {
        println!(
            "t = {time:5.0}: Δ = {:.3} (prediction {:.3}), free diffusers {:.3}",
            with_competition.mean[t],
            model.predicted_spread(time),
            free.mean[t]
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
