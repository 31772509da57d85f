//! # lapoleaf
//!
//! Semi-supervised label propagation on an optimal leading forest.
//!
//! Points are linked to their nearest denser neighbour, giving a leading
//! tree. The tree is cut at the points with the highest center potential
//! (density times δ-distance) into the number of subtrees that minimizes a
//! granulation objective. Labels then flow through the forest in three
//! non-iterative passes: children to parent, root to root, parent to
//! children. Every pass is linear in the number of points; only the
//! pairwise distance matrix is quadratic.
//!
//! ## Pipeline
//!
//! | Step | Function |
//! |------|----------|
//! | merge duplicate rows into fat nodes | [`dataset::merge_duplicates`] |
//! | pairwise distances | [`leading_tree::pairwise_distances`] |
//! | cut-off distance | [`leading_tree::cutoff_distance`] |
//! | local density | [`leading_tree::local_density`] |
//! | leading tree | [`leading_tree::build_leading_tree`] |
//! | objective curve | [`lodog::evaluate_objective`] |
//! | forest split | [`lodog::split_forest`] |
//! | propagation | [`propagation::propagate`] |
//!
//! [`Model::fit`] runs all of it; [`Model::predict_new`] labels a new point
//! by updating the fitted structures in place.
//!
//! ```
//! use lapoleaf::{Dataset, Label, Mode, Model, Params};
//!
//! let rows = vec![vec![0.0], vec![0.2], vec![0.5], vec![8.0], vec![8.3], vec![8.9]];
//! let mut labels = vec![None; 6];
//! labels[0] = Some(Label::Class(0));
//! labels[4] = Some(Label::Class(1));
//! let data = Dataset::new(rows, labels, Mode::Classification { classes: 2 }).unwrap();
//!
//! let (mut model, _) = Model::fit(&data, Params { percent: 20.0, ..Params::default() }).unwrap();
//! assert_eq!(model.predictions()[2], Label::Class(0));
//! assert_eq!(model.predict_new(&[8.6]).unwrap(), Label::Class(1));
//! ```
//!
//! Features are used as given; scale them beforehand when attributes have
//! different units.

pub mod baseline;
pub mod bench;
pub mod config;
pub mod dataset;
pub mod error;
pub mod incremental;
pub mod leading_tree;
pub mod lodog;
pub mod metrics;
pub mod model;
pub mod propagation;
pub mod synth;

pub use config::Config;
pub use dataset::{Dataset, Label, Mode, Schema, TaskKind};
pub use error::{Error, Result};
pub use incremental::Insertion;
pub use leading_tree::{DistanceMatrix, LeadingTree, Metric};
pub use lodog::{HSpec, LeadingForest, LodogCurve};
pub use model::{FitReport, Model, Params, StageTimings};
pub use propagation::{LabelState, PropagationOptions, Stage};
