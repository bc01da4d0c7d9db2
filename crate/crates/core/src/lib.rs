//! Capacity analysis of the half-duplex diamond relay channel: a source, two
//! parallel half-duplex relays and a destination, with no direct link and no
//! relay-relay link.
//!
//! The crate computes the decode-and-forward rate of the two-phase
//! successive relaying schedule ([`sr_rate`]), the half-duplex cut-set upper
//! bound as an exact four-state linear program ([`cutset`]), and checks the
//! sufficient condition `c01 * c02 = c13 * c23` under which the two meet
//! ([`optimality`]). [`experiments`] runs seeded sweeps over random channels.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`). Sweeps and
//! the CLI work in `f64`; the `*F64` / `*F32` aliases below name the
//! concrete types.
//!
//! ```
//! use diamond_relay::{certify, ChannelSpec};
//!
//! // capacities (2, 3, 3, 2): 2 * 3 = 3 * 2
//! let report = certify(&ChannelSpec::<f64>::unit(3.0, 7.0, 7.0, 3.0)).unwrap();
//! assert!(report.capacity_certified);
//! assert!((report.bound - 2.4).abs() < 1e-12);
//! ```

pub mod channel;
pub mod cli;
pub mod cutset;
pub mod error;
pub mod experiments;
pub mod optimality;
pub mod scalar;
pub mod sr_rate;

pub use channel::{derive_capacities, gain_for_capacity, link_capacity, ChannelSpec, LinkCapacities};
pub use cutset::{cut_values, solve_bound, CutSetSolution};
pub use error::{Error, Result};
pub use experiments::{run_sweep, sample_instance, Conditioning, GainDistribution, SweepConfig, SweepRecord, SweepSummary};
pub use optimality::{
    certify, certify_capacities, classify, perturbation_check, predicted_rate, t_star, LemmaCase,
    OptimalityReport, PerturbationSpec,
};
pub use scalar::Scalar;
pub use sr_rate::{
    normalized_form, sr_rate_closed_form, sr_rate_min_form, time_fractions, Branch, SrRateResult,
};

pub type ChannelSpecF64 = ChannelSpec<f64>;
pub type ChannelSpecF32 = ChannelSpec<f32>;
pub type LinkCapacitiesF64 = LinkCapacities<f64>;
pub type LinkCapacitiesF32 = LinkCapacities<f32>;
pub type SrRateResultF64 = SrRateResult<f64>;
pub type SrRateResultF32 = SrRateResult<f32>;
pub type CutSetSolutionF64 = CutSetSolution<f64>;
pub type CutSetSolutionF32 = CutSetSolution<f32>;
pub type OptimalityReportF64 = OptimalityReport<f64>;
pub type OptimalityReportF32 = OptimalityReport<f32>;
