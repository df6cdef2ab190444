//! Features, penalised regression and cross-validated evaluation for
//! predicting the edge count of the inhibition network.

mod centrality;
mod features;
mod matrix;
mod regression;

pub use centrality::{
    betweenness, centrality_summary, clustering, degree_centrality, degree_entropy, pagerank, top_mean, Centralities,
    CENTRALITY_NAMES, PAGERANK_DAMPING, PAGERANK_TOLERANCE, TOP_NODES,
};
pub use features::{extract_centrality_features, extract_motif_features, targets, CascadeAnalysis, FeatureOptions, NetworkRecord};
pub use matrix::{impute_missing, polynomial_features, FeatureMatrix, Imputer};
pub use regression::{
    cross_validate, fit_regularized_linear, fold_assignment, mae, r_squared, select_eta, CvConfig, EvaluationReport, Penalty,
    RegressionModel, DEFAULT_ETA_GRID, MAX_SWEEPS, SWEEP_TOLERANCE,
};
