// Integrate the outer flow to its limit π(x) and differentiate it numerically: a brute-force
// check of P and Q that needs no description of the manifold.
//
// Run with `cargo run --example flow_oracle`.

use nalgebra::DVector;
use slowmani::flow::{pi_jet_fd, pi_map, PiOptions};
use slowmani::models::MichaelisMenten;
use slowmani::{reduce_at, ManifoldPoint, Method, ReductionOptions};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mm = MichaelisMenten::new(1.0, 1.0, 0.01, 0.01)?;
    let opts = PiOptions::default();

    let x0 = DVector::from_vec(vec![1.0, 0.0]);
    let end = pi_map(mm.sde(), &x0, &opts)?;
    println!(
        "π(1, 0) = {:.10?} after t = {:.1} ({} steps); closed form {:.10?}",
        end.endpoint.as_slice(),
        end.integration_time,
        end.step_count,
        mm.project(&x0)?.as_slice()
    );

    let z = mm.gamma(1.0);
    let (p_fd, q_fd) = pi_jet_fd(mm.sde(), &z, 1e-3, &opts)?;
    let general = reduce_at(mm.sde(), &mm.curve_manifold(), &ManifoldPoint::State(z), Some(Method::General), &ReductionOptions::default())?;
    println!("P (oracle)  = {:.6?}", p_fd.row(0).iter().collect::<Vec<_>>());
    println!("P (general) = {:.6?}", general.p.row(0).iter().collect::<Vec<_>>());
    let dq = q_fd
        .iter()
        .zip(general.q.slices())
        .map(|(a, b)| (a - b).amax())
        .fold(0.0, f64::max);
    println!("max |ΔQ| = {dq:.2e}");
    assert!(dq < 1e-3);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
