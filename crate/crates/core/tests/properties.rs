//! Property tests for the reduction, flow-map and simulation invariants.

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use slowmani::diff::FdStep;
use slowmani::flow::{integrate_outer, pi_map, FlowOptions, PiOptions};
use slowmani::model::{eval_jet, JetOptions};
use slowmani::models::{LotkaVolterra, MichaelisMenten, Selection};
use slowmani::reduction::{a3_residual, build_local_frame_1d, projection_from_bases, q_1d};
use slowmani::simulate::{replicate_rng, simulate_full, simulate_ssa, EnsembleOptions, SsaOptions, StepGrid};
use slowmani::{reduce_at, ManifoldPoint, ManifoldSpec, Method, ReducedSystem, ReductionOptions, SdeSystem};

fn mm(alpha: f64, beta: f64) -> MichaelisMenten {
    MichaelisMenten::new(alpha, beta, 0.01, 0.01).unwrap()
}

fn lv_with_selection(weights: &[f64], fecundity: &[f64]) -> (LotkaVolterra, DVector<f64>) {
    let n = weights.len();
    let mut sel = Selection::neutral(n);
    sel.fecundity = fecundity[..n].to_vec();
    let lv = LotkaVolterra::new(n, 2.0, 0.6, 0.9, 400.0, sel).unwrap();
    let w = DVector::from_column_slice(weights);
    let x = lv.from_frequency(&(&w / w.sum()));
    (lv, x)
}

fn reduce(system: &SdeSystem, spec: &ManifoldSpec, x: &DVector<f64>, method: Method) -> ReducedSystem {
    reduce_at(system, spec, &ManifoldPoint::State(x.clone()), Some(method), &ReductionOptions::default()).unwrap()
}

/// Invariants every reduction must satisfy; `m` is the slow dimension.
fn check_reduction(system: &SdeSystem, x: &DVector<f64>, r: &ReducedSystem, m: usize) -> Result<(), TestCaseError> {
    let j = system.jacobian(x, FdStep::Auto).unwrap();
    let hs = system.hessians(x, FdStep::Auto).unwrap();
    prop_assert!(r.idempotence_defect() <= 1e-8);
    prop_assert!((&j * &r.p).amax() <= 1e-8 * j.norm().max(1.0));
    let sv = r.projector_singular_values();
    prop_assert!(sv[..m].iter().all(|&s| s > 0.5), "{sv:?}");
    prop_assert!(sv[m..].iter().all(|&s| s < 1e-8), "{sv:?}");
    prop_assert!(r.q.symmetry_defect() == 0.0);
    prop_assert!(a3_residual(&j, &hs, &r.p, &r.q) <= 1e-6);
    // P annihilates h_jk, the vector with entries [PᵀH_iP]_jk
    let d = x.len();
    let php: Vec<DMatrix<f64>> = hs.iter().map(|h| r.p.transpose() * h * &r.p).collect();
    for a in 0..d {
        for b in 0..d {
            let h_ab = DVector::from_fn(d, |i, _| php[i][(a, b)]);
            prop_assert!((&r.p * h_ab).amax() <= 1e-8);
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mm_reductions_satisfy_invariants(alpha in 0.2..5.0f64, beta in 0.2..5.0f64, z in 0.01..8.0f64) {
        let model = mm(alpha, beta);
        let x = model.gamma(z);
        let general = reduce(model.sde(), &model.curve_manifold(), &x, Method::General);
        for (spec, method) in [(model.curve_manifold(), Method::OneD), (model.codim_manifold(), Method::CoDimOne)] {
            let r = reduce(model.sde(), &spec, &x, method);
            check_reduction(model.sde(), &x, &r, 1)?;
            prop_assert!(r.q.max_abs_diff(&general.q) <= 1e-8);
        }
        check_reduction(model.sde(), &x, &general, 1)?;
        let reference = model.reference_reduced(&x).unwrap();
        check_reduction(model.sde(), &x, &reference, 1)?;
    }

    #[test]
    fn lv_reductions_satisfy_invariants(
        weights in prop::collection::vec(0.05..1.0f64, 2..=5),
        fecundity in prop::collection::vec(-3.0..3.0f64, 5),
    ) {
        let (lv, x) = lv_with_selection(&weights, &fecundity);
        let m = weights.len() - 1;
        for method in [Method::CoDimOne, Method::General] {
            check_reduction(lv.sde(), &x, &reduce(lv.sde(), &lv.manifold(), &x, method), m)?;
        }
        check_reduction(lv.sde(), &x, &lv.reference_reduced(&x).unwrap(), m)?;
    }

    #[test]
    fn lv_reduced_dynamics_conserve_the_simplex(
        weights in prop::collection::vec(0.05..1.0f64, 2..=5),
        fecundity in prop::collection::vec(-3.0..3.0f64, 5),
    ) {
        let (lv, x) = lv_with_selection(&weights, &fecundity);
        let r = reduce(lv.sde(), &lv.manifold(), &x, Method::CoDimOne);
        let (drift, _) = lv.frequency_coefficients(&r);
        prop_assert!(drift.sum().abs() <= 1e-15);
        let noise = r.noise();
        for c in 0..noise.ncols() {
            prop_assert!(noise.column(c).sum().abs() <= 1e-15);
        }
    }

    #[test]
    fn one_d_route_is_gauge_invariant(alpha in 0.2..5.0f64, beta in 0.2..5.0f64, z in 0.05..5.0f64) {
        let model = mm(alpha, beta);
        let opts = JetOptions::default().with_slow_dim(1);
        let jet = eval_jet(model.sde(), &model.gamma(z), &opts).unwrap();
        let frame = build_local_frame_1d(model.sde(), &jet, &model.curve_chart(), z, &opts).unwrap();
        let (row, mat) = q_1d(&frame).unwrap();
        let (row2, mat2) = q_1d(&frame.regauged(1.0 + z * z, 2.0 * z)).unwrap();
        prop_assert!((row - row2).amax() <= 1e-10);
        prop_assert!((mat - mat2).amax() <= 1e-10);
    }

    #[test]
    fn projection_ignores_the_choice_of_slow_basis(
        weights in prop::collection::vec(0.05..1.0f64, 3),
        mix in prop::collection::vec(-1.0..1.0f64, 4),
    ) {
        let (lv, x) = lv_with_selection(&weights, &[0.0; 5]);
        let p = lv.reference_p(&x);
        // right slow vectors span Σv = 0; left rows are the tangent covectors of P
        let u = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, -1.0, -1.0]);
        let v = p.rows(0, 2).into_owned();
        let c = DMatrix::from_row_slice(2, 2, &[2.0 + mix[0], mix[1], mix[2], 2.0 + mix[3]]);
        let c_inv = c.clone().try_inverse().unwrap();
        let base = projection_from_bases(&u, &v).unwrap();
        let mixed = projection_from_bases(&(&u * &c), &(&c_inv * &v)).unwrap();
        prop_assert!((&base - &p).amax() <= 1e-12);
        prop_assert!((&mixed - &base).amax() <= 1e-10);
    }

    #[test]
    fn general_route_is_permutation_equivariant(
        weights in prop::collection::vec(0.05..1.0f64, 3),
        fecundity in prop::collection::vec(-3.0..3.0f64, 5),
        shift in 1usize..3,
    ) {
        // relabelling species permutes P and Q; the eigenvector order inside the solver changes
        let (lv, x) = lv_with_selection(&weights, &fecundity);
        let perm = |i: usize| (i + shift) % 3;
        let w2: Vec<f64> = (0..3).map(|i| weights[perm(i)]).collect();
        let f2: Vec<f64> = (0..3).map(|i| fecundity[perm(i)]).chain([0.0, 0.0]).collect();
        let (lv2, x2) = lv_with_selection(&w2, &f2);
        let spec = ManifoldSpec::General { slow_dim: 2 };
        let r = reduce(lv.sde(), &spec, &x, Method::General);
        let r2 = reduce(lv2.sde(), &spec, &x2, Method::General);
        for i in 0..3 {
            for j in 0..3 {
                prop_assert!((r2.p[(i, j)] - r.p[(perm(i), perm(j))]).abs() <= 1e-10);
                for k in 0..3 {
                    prop_assert!((r2.q.get(i, j, k) - r.q.get(perm(i), perm(j), perm(k))).abs() <= 1e-10);
                }
            }
        }
    }

    #[test]
    fn analytic_derivatives_match_finite_differences(
        alpha in 0.2..5.0f64,
        beta in 0.2..5.0f64,
        x1 in 0.0..2.0f64,
        x2 in 0.0..1.0f64,
        weights in prop::collection::vec(0.05..1.0f64, 3),
    ) {
        let step = 1e-4;
        let model = mm(alpha, beta);
        let (lv, _) = lv_with_selection(&weights, &[0.0; 5]);
        let mm_x = DVector::from_vec(vec![x1, x2]);
        let lv_x = DVector::from_column_slice(&weights);
        for (sde, x) in [(model.sde(), &mm_x), (lv.sde(), &lv_x)] {
            let fd = sde.without_derivatives();
            let scale = 1.0 + x.amax();
            let j_err = (sde.jacobian(x, FdStep::Auto).unwrap() - fd.jacobian(x, FdStep::Fixed(step)).unwrap()).amax();
            prop_assert!(j_err <= 100.0 * step * step * scale);
            let exact = sde.hessians(x, FdStep::Auto).unwrap();
            let approx = fd.hessians(x, FdStep::Fixed(step)).unwrap();
            for (a, b) in exact.iter().zip(&approx) {
                prop_assert!((a - b).amax() <= 1e-5 * scale);
                prop_assert!(b == &b.transpose());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn flow_map_is_idempotent_and_flow_invariant(
        alpha in 0.3..3.0f64,
        beta in 0.3..3.0f64,
        x1 in 0.1..2.0f64,
        x2 in 0.0..1.0f64,
        t in 0.05..3.0f64,
    ) {
        let model = mm(alpha, beta);
        let opts = PiOptions::default();
        let x = DVector::from_vec(vec![x1, x2]);
        let pi = pi_map(model.sde(), &x, &opts).unwrap().endpoint;
        let again = pi_map(model.sde(), &pi, &opts).unwrap().endpoint;
        prop_assert!((&again - &pi).amax() <= 2.0 * opts.pi_tol);
        let moved = integrate_outer(model.sde(), &x, &[0.0, t], &FlowOptions::default()).unwrap().states[1].clone();
        let pi_moved = pi_map(model.sde(), &moved, &opts).unwrap().endpoint;
        prop_assert!((&pi_moved - &pi).amax() <= 1e-8, "{:e}", (&pi_moved - &pi).amax());
    }

    #[test]
    fn ensembles_are_reproducible(seed in any::<u64>(), rep in 0usize..1000) {
        use rand::Rng;
        let a: Vec<u64> = (0..4).map(|_| replicate_rng(seed, rep).gen()).collect();
        let b: Vec<u64> = (0..4).map(|_| replicate_rng(seed, rep).gen()).collect();
        prop_assert_eq!(&a, &b);
        let other: u64 = replicate_rng(seed, rep + 1).gen();
        prop_assert_ne!(a[0], other);

        let model = mm(1.0, 1.0);
        let opts = EnsembleOptions { grid: StepGrid::new(0.1, 2.0, 4).unwrap(), n_rep: 4, seed };
        let x0 = DVector::from_vec(vec![1.0, 0.0]);
        prop_assert_eq!(simulate_full(model.sde(), &x0, &opts).unwrap(), simulate_full(model.sde(), &x0, &opts).unwrap());
        let lv = LotkaVolterra::neutral(2, 2.0, 1.0, 1.0, 100.0).unwrap();
        let ssa = SsaOptions { t_end: 1.0, n_out: 4, n_rep: 4, seed };
        let y0 = DVector::from_vec(vec![0.25, 0.25]);
        prop_assert_eq!(simulate_ssa(lv.jump(), &y0, &ssa).unwrap(), simulate_ssa(lv.jump(), &y0, &ssa).unwrap());
    }
}
