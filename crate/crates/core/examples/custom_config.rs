// Define a model in TOML with expression strings and reduce it: a parabola of equilibria
// `x₂ = x₁²` attracting along the `x₂` axis.
//
// Run with `cargo run --example custom_config`.

use nalgebra::DVector;
use slowmani::config::ModelConfig;
use slowmani::{reduce_at, ManifoldPoint, Method, ReductionOptions};

const MODEL: &str = r#"
dim = 2
noise_dim = 2
epsilon = 0.1
mu = 0.05
f = ["0", "-k * (x2 - x1^2)"]
h = ["-x1", "0"]
G = [["1", "0"], ["0", "sqrt(1 + x2)"]]

[params]
k = 3.0

[manifold]
kind = "curve"
gamma = ["s", "s^2"]
parameter = "x1"
"#;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let model = ModelConfig::from_toml_str(MODEL)?;
    let sde = model.sde().ok_or("expression models always have an SDE")?;
    let spec = model.manifold();
    let opts = ReductionOptions::default();
    let at = ManifoldPoint::State(DVector::from_vec(vec![0.5, 0.25]));
    for method in [Method::OneD, Method::General, Method::Oracle] {
        let r = reduce_at(sde, &spec, &at, Some(method), &opts)?;
        println!("{method:>8}: P = {:.5?}, g = {:.5?}", r.p.as_slice(), r.g.as_slice());
    }
    // π keeps x₁ fixed, so P = [[1, 0], [2x₁, 0]] and only the x₂ row of Q is nonzero (Q₂₁₁ = 2)
    let r = reduce_at(sde, &spec, &at, None, &opts)?;
    assert!((r.p[(1, 0)] - 1.0).abs() < 1e-8 && (r.q.get(1, 0, 0) - 2.0).abs() < 1e-6);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
