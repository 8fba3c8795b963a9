//! Expected outbreak sizes for the discrete-time SIR epidemic on finite
//! graphs: BFS lower bounds, degree upper bounds, exact oracles for small
//! graphs and trees, Monte Carlo estimators, and experiment drivers for the
//! large-graph limits of locally tree-like families.

pub mod bounds;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod generators;
pub mod graph;
pub mod io;
pub mod oracle;
pub mod rng;
pub mod sim;

pub use bounds::{lower_bound, make_report, upper_bound_degree, BoundReport, ReportOptions};
pub use error::{Error, Result};
pub use graph::{
    bfs_distances, degree_stats, extract_ball, is_tree, tree_like_radius, Ball, DegreeStats,
    DistanceMap, Graph, SeedSet,
};
pub use oracle::{exact_distribution_bruteforce, exact_mean_bruteforce, exact_mean_tree};
pub use sim::{estimate_mean, EpidemicParams, Estimate, Method};
