//! Entropy measures over discrete distributions and the generalized relative
//! entropy, a bounded symmetric divergence that satisfies the triangle
//! inequality, together with an exact vantage-point index built on it.
//!
//! ```
//! use gre_core::{gre_breakdown, GreParams, ProbVector};
//!
//! let p = ProbVector::new(vec![1.0, 0.0]).unwrap();
//! let q = ProbVector::new(vec![0.0, 1.0]).unwrap();
//! let d = gre_breakdown(&p, &q, &GreParams::default()).unwrap();
//! assert_eq!((d.forward_sum, d.backward_sum, d.r_term, d.total), (1.0, 1.0, 2.0, 4.0));
//! ```

pub mod entropy;
pub mod error;
pub mod gre;
pub mod index;
pub mod io;
pub mod prob;
pub mod sample;
pub mod selfcheck;

pub use entropy::{cross_entropy, kl_divergence, mutual_information, shannon_entropy};
pub use error::{Error, Result};
pub use gre::{
    gre_breakdown, gre_distance, gre_lower_bound_distinct, gre_upper_bound, jsd_oracle,
    GreBreakdown, GreParams,
};
pub use index::{Metric, MetricIndex, NeighborResult, SearchStats};
pub use prob::{
    approx_equal, marginals, normalize, validate_pair, CountHistogram, JointTable, NumericPolicy,
    ProbVector,
};
