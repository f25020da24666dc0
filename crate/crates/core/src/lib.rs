//! Procedural synthesis of articulated 3D objects from grid layouts, forward
//! kinematics over the part tree, URDF round-tripping, and the evaluation
//! metrics used to compare predicted objects with ground truth.
//!
//! Geometry, metrics and the attention reference are generic over the scalar
//! type (see [`scalar`]); the domain model is fixed to `f64`, and the aliases
//! below name the concrete instantiations.

pub mod agents;
pub mod assembly;
pub mod augment;
pub mod encoding;
pub mod fmt;
pub mod geometry;
pub mod kinematics;
pub mod layout;
pub mod metrics;
pub mod model;
pub mod retrieval;
pub mod scalar;
pub mod urdf;
pub mod violation;

pub use assembly::{assemble, AssemblyConfig, AssemblyError};
pub use model::{
    max_float_difference, normalize_object, object_from_json, object_to_json, validate_graph, validate_object,
    ArticulatedObject, ArticulationGraph, Category, JointSpec, JointType, Part, PartLabel,
};
pub use scalar::{Field, Scalar};
pub use violation::{Rule, Violation};

pub type Vec3 = geometry::Vec3<f64>;
pub type Aabb = geometry::Aabb<f64>;
pub type Mat3 = geometry::Mat3<f64>;
pub type RigidTransform = geometry::RigidTransform<f64>;

pub type Vec3f = geometry::Vec3<f32>;
pub type Aabbf = geometry::Aabb<f32>;
