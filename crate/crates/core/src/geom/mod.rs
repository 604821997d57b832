//! Polyhedral geometry of finite-dimensional subspaces of free spaces.

pub mod claim5;
pub mod isometry;
pub mod subspace;
pub mod vertices;

pub use claim5::{claim5_grid_approximation, Claim5Outcome};
pub use isometry::{amalgam_l1_check, scaling_isometry_map, AmalgamSplit};
pub use subspace::{
    bm_upper_bound, domination_constant, inverse_domination_transport, operator_norm_poly, SubspaceBasis,
    SubspaceMap,
};
pub use vertices::{lip_ball_vertices, lip_ball_vertices_capped, vertex_cap, LipBall, DEFAULT_CAP};
