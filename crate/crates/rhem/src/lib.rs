//! Relational hyperevent models for polyadic interaction event streams.
//!
//! One sender addressing a set of receivers at a time stamp is a
//! *hyperevent*; this crate models the rate of such events as a function of
//! hyperedge covariates — statistics of the sender, the whole receiver set,
//! and the decayed event history. It provides:
//!
//! - [`model`]: actors, attributes, event streams, and their validation;
//! - [`history`]: decayed hyperedge-degree statistics, updatable
//!   event-by-event and queryable at any later time;
//! - [`covariates`]: the hyperedge covariate catalog (attribute averages and
//!   heterophily, repetition, subset repetition, reciprocation, triadic
//!   closure, ...);
//! - [`sampler`]: case-control sampling of receiver sets per event;
//! - [`estimator`]: conditional partial-likelihood maximization with one
//!   case per stratum, plus contribution and resampling reports;
//! - [`generator`]: simulation from known parameters for end-to-end
//!   recovery checks;
//! - [`io`]: the event/attribute/sample file formats.

pub mod comb;
pub mod covariates;
pub mod error;
pub mod estimator;
pub mod generator;
pub mod history;
pub mod io;
pub mod model;
pub mod sampler;

pub use covariates::{CovariateKind, CovariateSet, CovariateSpec, CovariateVector};
pub use error::{Error, Result};
pub use estimator::{
    contribution_report, fit, full_risk_set_problem, gradient, hessian, loglik, resample_study,
    resample_study_with_seeds, ContributionReport, EstimationProblem, EstimationResult,
    FitOptions, ResampleStudy,
};
pub use generator::{simulate, AttrGen, GeneratorConfig, Simulation};
pub use history::{DecayConfig, DecayedCounter, HistoryState};
pub use io::{
    parse_attributes, parse_events, read_sample_table_from_path, write_events, ArtifactMeta,
    EventFileSpec, SampleRow, SampleTable,
};
pub use model::{
    stream_stats, ActorId, ActorTable, AttrColumn, AttrKind, AttributeTable, EventStream,
    Hyperevent, RiskPolicy, SizeHistogram,
};
pub use sampler::{sample_stratum, sample_stream, SampledStratum, SamplerConfig};
