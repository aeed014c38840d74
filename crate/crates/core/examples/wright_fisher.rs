// Competitive Lotka–Volterra dynamics reduce to a Wright–Fisher diffusion on the simplex.
//
// Run with `cargo run --example wright_fisher`.

use nalgebra::DVector;
use slowmani::models::{LotkaVolterra, Selection};
use slowmani::{reduce_at, ManifoldPoint, Method, ReductionOptions};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let (b, d, c, k) = (2.0, 1.0, 1.0, 1000.0);
    let neutral = LotkaVolterra::neutral(3, b, d, c, k)?;
    println!("N_e = {}", neutral.effective_population_size());

    let p = DVector::from_vec(vec![0.2, 0.3, 0.5]);
    let x = neutral.from_frequency(&p);
    let r = reduce_at(neutral.sde(), &neutral.manifold(), &ManifoldPoint::State(x.clone()), Some(Method::CoDimOne), &ReductionOptions::default())?;
    let (drift, cov) = neutral.frequency_coefficients(&r);
    println!("neutral drift in p: {:.2e}", drift.amax());
    // Wright–Fisher covariance p_i(δ_ij − p_j)/N_e
    let n_e = neutral.effective_population_size();
    for i in 0..3 {
        for j in 0..3 {
            let wf = p[i] * (f64::from(u8::from(i == j)) - p[j]) / n_e;
            assert!((cov[(i, j)] - wf).abs() < 1e-12);
        }
    }
    println!("covariance matches p_i(δ_ij − p_j)/N_e");

    // weak fecundity advantage for species 1
    let mut sel = Selection::neutral(3);
    sel.fecundity[0] = 5.0;
    let lv = LotkaVolterra::new(3, b, d, c, k, sel)?;
    let r = reduce_at(lv.sde(), &lv.manifold(), &ManifoldPoint::State(lv.from_frequency(&p)), None, &ReductionOptions::default())?;
    let (drift, _) = lv.frequency_coefficients(&r);
    let s = lv.selection_coefficients(&p);
    println!("drift in p: {}", fmt(drift.as_slice()));
    println!("s_i(p)/K:   {}", fmt((s / k).as_slice()));
    println!("Σ drift = {:.1e}", drift.sum());
    Ok(())
}

fn fmt(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:+.4e}")).collect::<Vec<_>>().join("  ")
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
