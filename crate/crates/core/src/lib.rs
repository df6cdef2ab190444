//! Motif analysis of information cascades.
//!
//! A cascade's participants are cut into fixed-size windows, consecutive
//! windows are fused with historical diffusion edges into temporal networks,
//! and a Hawkes-intensity curve over the windows locates the steep and
//! inhibition phases. Each network gets a motif census (3 to 5 nodes), a
//! z-score against degree-preserving null models and a 4-to-5 node transition
//! count. Those feed penalised linear models that predict the inhibition
//! network's edge count.
//!
//! Numeric kernels are generic over [`Scalar`]; the `*F64` aliases below name
//! the `f64` instantiations the pipeline uses.

pub mod cascade;
pub mod error;
pub mod graph;
pub mod scalar;
pub mod motif;
pub mod windows;
pub mod lifecycle;
pub mod synth;
pub mod significance;
pub mod transitions;
pub mod prediction;
pub mod pipeline;

pub use cascade::{
    build_corating_cascades, classify_cascade_type, filter_by_size, growth_curve, parse_cascade_log, parse_diffusion_edges,
    Cascade, CascadeType, DiffusionNetwork, GrowthCurve, ReshareEvent, UserId, UserRegistry,
};
pub use error::{Error, Result};
pub use graph::Graph;
pub use lifecycle::{
    calibrate_thresholds, detect_inhibition, detect_steep, find_extrema, hawkes_intensity, interval_intensity_curve,
    HawkesConfig, InhibitionThresholds, ThresholdGrid, UserWeighting,
};
pub use motif::{canonical_form, enumerate_connected, motif_census, pattern_catalog, sample_connected, CensusMode, MotifCensus, PatternId};
pub use prediction::{
    cross_validate, fit_regularized_linear, impute_missing, polynomial_features, select_eta, Centralities, CvConfig,
    EvaluationReport, FeatureMatrix, Penalty, RegressionModel,
};
pub use scalar::Scalar;
pub use significance::{build_ensemble, edge_switch_randomize, zscore, zscore_report, NullEnsemble, SignificanceReport, ZScore};
pub use synth::{synthesize_cascade, GrowthShape, SynthParams};
pub use transitions::{count_transitions, CensusCache, pattern_subgraph_relation, transition_series, TransitionMatrix, TransitionThresholds};
pub use windows::{
    build_temporal_network, build_window_network, locate_lifecycle_networks, partition_subsequences, LifecycleIndices,
    Subsequence, TemporalNetwork, TemporalSeries,
};

pub type HawkesConfigF64 = HawkesConfig<f64>;
pub type ZScoreF64 = ZScore<f64>;
pub type SignificanceReportF64 = SignificanceReport<f64>;
pub type CentralitiesF64 = Centralities<f64>;
pub type FeatureMatrixF64 = FeatureMatrix<f64>;
pub type RegressionModelF64 = RegressionModel<f64>;
pub type EvaluationReportF64 = EvaluationReport<f64>;
pub type CvConfigF64 = CvConfig<f64>;
