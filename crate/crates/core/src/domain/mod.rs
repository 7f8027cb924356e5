pub mod distribution;
pub mod emd;
pub mod inequality;
pub mod metric;
pub mod point;

pub use distribution::{tv_distance, DiscreteDistribution, Sampler};
pub use emd::{emd_exact, emd_with_cost, Coupling};
pub use inequality::{emd_tv_diameter_check, hierarchical_bound, hierarchical_check, EmdTvReport};
pub use metric::{convex_hull_2d, MetricKind, MetricSpace};
pub use point::{Domain, LatticeBox, Point, MAX_DIM};
