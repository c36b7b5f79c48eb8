//! Exact and sampled tools for dense-graph property testing: graph storage,
//! four-vertex census, weighted density properties, quasirandomness checks
//! and tester simulation.

pub mod density;
pub mod error;
pub mod graph;
pub mod iso;
pub mod property;
pub mod quasirandom;
pub mod rational;
pub mod seed;
pub mod stats;
pub mod tester;

pub use density::{four_profile, CensusMode, DensityEstimate, FourProfile, SubgraphFamily};
pub use error::{Error, Result};
pub use graph::{blowup, named_graph, parse_graph, random_graph, BlowupStructure, Graph};
pub use iso::{Class4, SmallGraphClass};
pub use property::{phi_value, PotSpec, WeightedDensityProperty};
pub use quasirandom::{is_delta_quasirandom, QuasirandomReport};
pub use rational::Rational;
pub use tester::{run_canonical, run_pot, TesterSpec};
