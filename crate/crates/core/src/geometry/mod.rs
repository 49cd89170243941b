//! Direction nets, strip intersection, minimum enclosing balls and Jung checks.

mod jung;
mod meb;
mod net;
mod strips;

pub use jung::{check_generalized_jung, check_jung_inequality, diameter, GeneralizedJungReport, JungReport};
pub use meb::{brute_force_meb, meb_of_region, min_enclosing_ball, Ball};
pub use net::{build_rho_net, build_subspace_net, DirectionNet, SubspaceNet, DEFAULT_SUBSPACE_SEED};
pub use strips::{intersect_strips, min_max_violation_point, ConvexRegion, Strip};

pub type Vec2<T> = [T; 2];
