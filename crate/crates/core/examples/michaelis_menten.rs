// Reduce the Michaelis–Menten SDE along its slow curve with every applicable route and
// compare with the closed-form projection, curvature and noise-induced drift.
//
// Run with `cargo run --example michaelis_menten`.

use slowmani::models::{MichaelisMenten, MmPhysical};
use slowmani::{reduce_at, ManifoldPoint, ManifoldSpec, Method, ReductionOptions};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mm = MichaelisMenten::new(1.0, 1.0, 0.01, 0.01)?;
    let opts = ReductionOptions::default();
    let routes = [
        (mm.curve_manifold(), Method::OneD),
        (mm.codim_manifold(), Method::CoDimOne),
        (ManifoldSpec::General { slow_dim: 1 }, Method::General),
    ];

    for z in [0.25, 1.0, 4.0] {
        let at = ManifoldPoint::State(mm.gamma(z));
        let reference = mm.reference_reduced(&mm.gamma(z))?;
        println!("z = {z}: P row {:.6?}, g1 = {:.3e}", mm.reference_p_row(z).as_slice(), mm.reference_g1(z));
        for (spec, method) in &routes {
            let r = reduce_at(mm.sde(), spec, &at, Some(*method), &opts)?;
            let err = (&r.p - &reference.p).amax().max(r.q.max_abs_diff(&reference.q));
            println!("  {method:>8}: max |Δ(P, Q)| = {err:.2e}, drift = {:.4e}", r.drift()[0]);
            assert!(err < 1e-8);
        }
    }

    // the reduced substrate equation, rescaled to physical units, gives the production law
    let physical = MmPhysical {
        k_f: 1.0,
        k_r: 0.5,
        k_cat: 0.5,
        e0: 0.1,
        s0: 10.0,
        volume: 100.0,
    };
    for s in [1.0, 5.0] {
        let (rate, noise) = physical.production_law_via_reduction(s)?;
        let (rate_ref, noise_ref) = physical.production_law_closed(s);
        println!("S = {s}: production {rate:.6} (vS/(k+S) = {rate_ref:.6}), noise {noise:.6} ({noise_ref:.6})");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
