//! From a relative depth map to the dominant crowd plane: back-projection,
//! RANSAC, the inlier hull in plane coordinates, and focal-length recovery
//! from vanishing points.

mod cloud;
mod focal;
mod hull;
mod ransac;

pub use cloud::{depth_to_cloud, DepthMap, PointCloud};
pub use focal::{estimate_focal, vanishing_points, VanishingPoint, VpParams};
pub use hull::{hull_on_plane, PlaneHull};
pub use ransac::{ransac_plane, PlaneFit, RansacParams};
