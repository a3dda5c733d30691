//! Constrained ergodic optimization on subshifts of finite type with locally
//! constant data.
//!
//! Everything is computed on the higher-block graph presentation: vertices
//! are allowed words, edges carry a floating-point potential value and an
//! exact rational constraint vector. On that graph the crate provides
//!
//! * rotation sets (exact rational polygons for one or two constraint
//!   coordinates, support-sampled outer approximations above),
//! * the beta function (supremum of the potential integral over invariant
//!   measures with a fixed rotation vector, via a stationary-measure linear
//!   program) and its Fenchel-dual alpha function (a minimum mean cycle),
//! * a cutting-plane dual route to beta for strictly interior rotation
//!   vectors,
//! * calibrated sub-actions via the max-plus eigenproblem, contact loci and
//!   optimal trajectories realizing the differential of alpha,
//! * exact periodic-orbit search: the best orbit of bounded period whose
//!   rotation vector equals a prescribed rational exactly, and
//! * an empirical joint-recurrence diagnostic.

pub mod beta_alpha;
pub mod cycles;
mod error;
pub mod graph;
pub mod io;
pub mod measure;
pub mod periodic;
pub mod polygon;
pub mod rational;
pub mod sample;
pub mod sft;
mod simplex;
pub mod subaction;
mod util;

pub use crate::beta_alpha::{
    alpha, alpha_gradient, alpha_with_witness, beta_dual, fenchel_check,
    is_cohomologous_to_constant, rotation_set, FenchelRecord, RotationSet, RotationSetMode,
};
pub use crate::cycles::{
    cycle_measure, enumerate_simple_cycles, max_mean_cycle, min_mean_cycle, Cycle,
};
pub use crate::error::{Error, Result};
pub use crate::graph::WeightedDigraph;
pub use crate::measure::{
    decompose_into_cycles, markov_extension, maximizing_face_extents, solve_beta_primal,
    LpSolution, LpStatus, StationaryEdgeMeasure,
};
pub use crate::periodic::{
    alpha_periodic_approx, best_periodic_with_rotation, periodic_beta_gap, PeriodicQuery,
    PeriodicResult, PeriodicStatus,
};
pub use crate::rational::Rational;
pub use crate::sft::{add_coboundary, Constraint, LocallyConstantFn, Potential, SftSpec};
pub use crate::subaction::{
    calibrated_subaction, contact_locus, optimal_trajectory, recurrence_defect,
    verify_alpha_differential, CalibratedSubaction, RecurrenceReport, SamplingSource, Trajectory,
};
