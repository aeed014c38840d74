//! Stochastic simulation of the full, reduced, jump and particle models.

mod compare;
mod em;
mod ensemble;
mod particles;
mod reduced;
mod rng;
mod ssa;

pub use compare::{compare_moments, compare_projected, ComparisonRow, FullView, MomentComparison, MomentTolerance};
pub use em::{simulate_full, EnsembleOptions, StepGrid};
pub use ensemble::{csv_writer, MomentTable, TrajectoryEnsemble, CSV_HEADER_COMMENT};
pub use particles::{simulate_particles_competition, spread, ParticleOptions, SpreadSeries};
pub use reduced::{
    clamp_to_simplex, simulate_reduced, AssembledReduced, MmReducedScalar, ProjectFn, Projector, ReducedDynamics,
    WrightFisherFrequencies, DEFAULT_REPROJECT_EVERY,
};
pub use rng::replicate_rng;
pub use ssa::{simulate_ssa, SsaOptions};
