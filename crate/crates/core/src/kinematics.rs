//! Forward kinematics over the part tree, open-state poses, surface point
//! sampling and the deterministic plausibility checks.
//!
//! Poses are always applied from the rest state; there is no incremental
//! re-posing.

use crate::fmt::f6;
use crate::geometry::BOX_EDGES;
use crate::model::{ArticulatedObject, JointSpec, JointType, PartLabel};
use crate::violation::{Rule, Violation};
use crate::{Aabb, RigidTransform, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KinematicsError {
    #[error("joint value {value} outside range [{lower}, {upper}]")]
    OutOfRange { value: f64, lower: f64, upper: f64 },
    #[error("pose has {found} joint values, object has {expected} parts")]
    PoseLength { expected: usize, found: usize },
    #[error("part {part}: {source}")]
    Part {
        part: usize,
        #[source]
        source: Box<KinematicsError>,
    },
    #[error("part graph is not a tree")]
    NotATree,
}

/// One scalar per part, indexed by part id: radians for revolute joints,
/// meters for prismatic ones, 0 for fixed ones.
#[derive(Clone, Debug, PartialEq)]
pub struct Pose {
    pub joint_values: Vec<f64>,
}

impl Pose {
    /// Every joint at its lower bound.
    pub fn rest(obj: &ArticulatedObject) -> Self {
        Pose {
            joint_values: obj.parts.iter().map(|p| p.joint.lower()).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PosedPart {
    pub part_id: usize,
    /// Rest coordinates to posed coordinates.
    pub frame: RigidTransform,
    pub corners: [Vec3; 8],
}

impl PosedPart {
    pub fn centroid(&self) -> Vec3 {
        let s = self.corners.iter().fold(Vec3::zero(), |a, &c| a + c);
        s * 0.125
    }

    /// Axis-aligned hull of the posed corners.
    pub fn hull(&self) -> Aabb {
        Aabb::from_points(self.corners)
    }
}

pub fn joint_transform(joint: &JointSpec, value: f64) -> Result<RigidTransform, KinematicsError> {
    let [lower, upper] = joint.range;
    if !(lower <= value && value <= upper) {
        return Err(KinematicsError::OutOfRange { value, lower, upper });
    }
    Ok(match joint.joint_type {
        JointType::Fixed => RigidTransform::identity(),
        JointType::Revolute => RigidTransform::rotation_about_line(&joint.origin, &joint.direction, value),
        JointType::Prismatic => RigidTransform::translation(joint.direction * value),
    })
}

/// Posed geometry of every part, in part-id order. A child's frame is its
/// parent's frame composed with its own joint transform.
pub fn pose_object(obj: &ArticulatedObject, pose: &Pose) -> Result<Vec<PosedPart>, KinematicsError> {
    let n = obj.parts.len();
    if pose.joint_values.len() != n {
        return Err(KinematicsError::PoseLength {
            expected: n,
            found: pose.joint_values.len(),
        });
    }
    let order = obj.topological_order().ok_or(KinematicsError::NotATree)?;
    let mut frames: Vec<Option<RigidTransform>> = vec![None; n];
    for id in order {
        let part = &obj.parts[id];
        let local = joint_transform(&part.joint, pose.joint_values[id]).map_err(|e| KinematicsError::Part {
            part: id,
            source: Box::new(e),
        })?;
        let frame = match part.parent_id {
            // A root's world joint is ignored: the object sits at its origin.
            None => RigidTransform::identity(),
            Some(p) => frames[p].ok_or(KinematicsError::NotATree)?.compose(&local),
        };
        frames[id] = Some(frame);
    }
    Ok(obj
        .parts
        .iter()
        .zip(frames)
        .map(|(p, f)| {
            let frame = f.expect("every part visited");
            let corners = if frame.is_identity() {
                p.bbox_rest.corners()
            } else {
                p.bbox_rest.corners().map(|c| frame.apply(&c))
            };
            PosedPart {
                part_id: p.id,
                frame,
                corners,
            }
        })
        .collect())
}

/// Open-state pose. With `seed`, each movable joint is drawn uniformly from
/// `[0.3, 1.0]` of its range and `ratio` is ignored; otherwise every movable
/// joint sits at `lower + ratio * (upper - lower)`.
pub fn open_pose(obj: &ArticulatedObject, ratio: f64, seed: Option<u64>) -> Pose {
    let mut rng = seed.map(ChaCha8Rng::seed_from_u64);
    let joint_values = obj
        .parts
        .iter()
        .map(|p| {
            let [lo, hi] = p.joint.range;
            if !p.joint.joint_type.is_movable() || p.parent_id.is_none() {
                return lo;
            }
            let t = match rng.as_mut() {
                Some(r) => r.gen_range(0.3..=1.0),
                None => ratio.clamp(0.0, 1.0),
            };
            (lo + t * (hi - lo)).clamp(lo, hi)
        })
        .collect();
    Pose { joint_values }
}

/// Corner indices of the six box faces, each as a quad in cyclic order.
fn box_faces() -> [[usize; 4]; 6] {
    let mut out = [[0; 4]; 6];
    for axis in 0..3 {
        let (b, c) = ((axis + 1) % 3, (axis + 2) % 3);
        for side in 0..2 {
            let corner = |u: usize, v: usize| (side << axis) | (u << b) | (v << c);
            out[axis * 2 + side] = [corner(0, 0), corner(1, 0), corner(1, 1), corner(0, 1)];
        }
    }
    out
}

/// The 12 triangles of a (possibly rotated) box surface.
pub fn box_triangles(corners: &[Vec3; 8]) -> Vec<[Vec3; 3]> {
    box_faces()
        .iter()
        .flat_map(|q| {
            [
                [corners[q[0]], corners[q[1]], corners[q[2]]],
                [corners[q[0]], corners[q[2]], corners[q[3]]],
            ]
        })
        .collect()
}

fn triangle_area(t: &[Vec3; 3]) -> f64 {
    (t[1] - t[0]).cross(&(t[2] - t[0])).norm() * 0.5
}

/// `n` area-weighted uniform samples on a triangle soup. A soup with zero
/// total area yields no points.
pub fn sample_triangles(triangles: &[[Vec3; 3]], n: usize, rng: &mut impl Rng) -> Vec<Vec3> {
    let mut cumulative = Vec::with_capacity(triangles.len());
    let mut total = 0.0;
    for t in triangles {
        total += triangle_area(t);
        cumulative.push(total);
    }
    if !(total > 0.0) {
        return Vec::new();
    }
    (0..n)
        .map(|_| {
            let pick = rng.gen_range(0.0..total);
            let i = cumulative.partition_point(|&c| c <= pick).min(triangles.len() - 1);
            let [a, b, c] = triangles[i];
            let (mut u, mut v): (f64, f64) = (rng.gen(), rng.gen());
            if u + v > 1.0 {
                (u, v) = (1.0 - u, 1.0 - v);
            }
            a + (b - a) * u + (c - a) * v
        })
        .collect()
}

/// `n_per_part` surface samples per posed box, concatenated in part order.
pub fn sample_surface_points(posed: &[PosedPart], n_per_part: usize, seed: u64) -> Vec<Vec3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    posed
        .iter()
        .flat_map(|p| sample_triangles(&box_triangles(&p.corners), n_per_part, &mut rng))
        .collect()
}

pub fn points_to_ply(points: &[Vec3]) -> String {
    let mut s = format!(
        "ply\nformat ascii 1.0\nelement vertex {}\nproperty float x\nproperty float y\nproperty float z\nend_header\n",
        points.len()
    );
    for p in points {
        let _ = writeln!(s, "{} {} {}", f6(p[0]), f6(p[1]), f6(p[2]));
    }
    s
}

pub fn write_ply(points: &[Vec3], path: &Path) -> std::io::Result<()> {
    std::fs::write(path, points_to_ply(points))
        .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

const OVERLAP_REL: f64 = 1e-6;
const MIN_DISPLACEMENT: f64 = 1e-3;
const TOL: f64 = 1e-9;

/// Deterministic plausibility checks; empty when all pass.
///
/// * `P1` sibling movable parts do not interpenetrate at rest.
/// * `P2` every movable joint visibly moves its part when fully open.
/// * `P3` doors swing outward (toward +z).
/// * `P4` handles and knobs stay on their parent's box at rest and open.
pub fn check_plausibility(obj: &ArticulatedObject) -> Vec<Violation> {
    let mut out = Vec::new();
    let movable = |i: usize| obj.parts[i].parent_id.is_some() && obj.parts[i].joint.joint_type.is_movable();

    for (i, a) in obj.parts.iter().enumerate() {
        if !movable(i) {
            continue;
        }
        for (j, b) in obj.parts.iter().enumerate().skip(i + 1) {
            if !movable(j) || a.parent_id != b.parent_id {
                continue;
            }
            let overlap = a.bbox_rest.intersection_volume(&b.bbox_rest);
            let limit = OVERLAP_REL * a.bbox_rest.volume().min(b.bbox_rest.volume());
            if overlap > limit {
                out.push(Violation::new(
                    Rule::P1,
                    format!("{} {i} and {} {j} overlap by {overlap:.3e} at rest", a.label, b.label),
                ));
            }
        }
    }

    for (i, p) in obj.parts.iter().enumerate() {
        if !movable(i) {
            continue;
        }
        let Ok(t) = joint_transform(&p.joint, p.joint.upper()) else {
            continue;
        };
        let c = p.bbox_rest.center();
        let moved = t.apply(&c).distance(&c);
        if !(moved >= MIN_DISPLACEMENT) {
            out.push(Violation::new(
                Rule::P2,
                format!("{} {i} moves its centroid by only {moved:.3e} when open", p.label),
            ));
        }
        if p.label == PartLabel::Door && p.joint.joint_type == JointType::Revolute {
            let (o, d) = (p.joint.origin, p.joint.direction);
            let on_axis = o + d * (c - o).dot(&d);
            let free_edge = c + (c - on_axis);
            let rise = t.apply(&free_edge)[2] - free_edge[2];
            if moved >= MIN_DISPLACEMENT && rise <= 0.0 {
                out.push(Violation::new(
                    Rule::P3,
                    format!("door {i} swings inward (free edge z changes by {rise:.3e})"),
                ));
            }
        }
    }

    let states = [Pose::rest(obj), open_pose(obj, 1.0, None)];
    let posed: Vec<Vec<PosedPart>> = states.iter().filter_map(|s| pose_object(obj, s).ok()).collect();
    for (i, p) in obj.parts.iter().enumerate() {
        if !p.label.is_attachment() {
            continue;
        }
        let Some(parent) = p.parent_id.and_then(|q| obj.part(q)) else {
            continue;
        };
        let depth = p.bbox_rest.extents()[2];
        let allowed = parent.bbox_rest.inflate(depth);
        for (state, parts) in ["rest", "open"].iter().zip(&posed) {
            // Judge the attachment in its parent's rest frame.
            let back = parts[parent.id].frame.inverse();
            let inside = parts[i].corners.iter().all(|c| allowed.contains_point(&back.apply(c), TOL));
            if !inside {
                out.push(Violation::new(
                    Rule::P4,
                    format!("{} {i} leaves its {} {} at {state}", p.label, parent.label, parent.id),
                ));
            }
        }
    }
    out
}

/// Edge lengths of a posed box, in [`BOX_EDGES`] order.
pub fn edge_lengths(corners: &[Vec3; 8]) -> [f64; 12] {
    BOX_EDGES.map(|(a, b)| corners[a].distance(&corners[b]))
}
