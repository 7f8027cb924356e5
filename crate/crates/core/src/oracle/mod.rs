pub mod clustering;
pub mod density;
pub mod lattice;
pub mod random_draw;
pub mod session;
pub mod universe;

pub use clustering::{induced_distribution, Clustering, Partition};
pub use density::{BlockDensity, Density, GridDensity};
pub use lattice::{BoxPartition, LatticePartition, VoronoiPartition};
pub use random_draw::{draw_random_clustering, GraphKind, RandomClusterDraw};
pub use session::{OracleSession, Resources, TraceEvent};
pub use universe::{
    box_grid, check_universe, generate_adversarial_clustering, generate_lattice_partition, GenParams, UniverseTag,
};
