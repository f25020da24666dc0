//! Turns a grid layout into an articulated object with metric boxes and
//! full joint parameters.
//!
//! The base shell spans `x ∈ [-W/2, W/2]`, `y ∈ [0, H]`, `z ∈ [-D/2, D/2]`,
//! so its front face sits at `z = D/2`. Doors are thin slabs flush with the
//! front face, drawers and trays extrude inward from it, and handles and knobs
//! protrude outward from their parent's front face.

use crate::layout::{describe_layout, validate_layout, Attach, GridLayout, HingeSide, JointMeta};
use crate::model::{ArticulatedObject, JointSpec, Part, PartLabel};
use crate::violation::{summarize, Violation};
use crate::{Aabb, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_2, PI};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq)]
pub struct AssemblyConfig {
    /// Door slab thickness as a fraction of base depth.
    pub door_thickness_ratio: f64,
    /// Drawer/tray depth as a fraction of base depth.
    pub drawer_depth_ratio: f64,
    /// Drawer travel as a fraction of drawer depth.
    pub drawer_travel_ratio: f64,
    pub door_max_angle: f64,
    /// Handle bar `(w, h, d)` in meters, vertical orientation.
    pub handle_size: [f64; 3],
    pub knob_radius: f64,
    /// Max attachment jitter as a fraction of the parent face extent.
    pub attachment_jitter: f64,
}

impl Default for AssemblyConfig {
    fn default() -> Self {
        AssemblyConfig {
            door_thickness_ratio: 0.05,
            drawer_depth_ratio: 0.9,
            drawer_travel_ratio: 0.8,
            door_max_angle: FRAC_PI_2,
            handle_size: [0.02, 0.12, 0.03],
            knob_radius: 0.02,
            attachment_jitter: 0.1,
        }
    }
}

impl AssemblyConfig {
    pub fn check(&self) -> Result<(), AssemblyError> {
        let ratio = |v: f64| v > 0.0 && v <= 1.0;
        let ok = ratio(self.door_thickness_ratio)
            && ratio(self.drawer_depth_ratio)
            && ratio(self.drawer_travel_ratio)
            && self.door_max_angle > 0.0
            && self.door_max_angle <= PI
            && self.handle_size.iter().all(|&v| v > 0.0)
            && self.knob_radius > 0.0
            && (0.0..=0.5).contains(&self.attachment_jitter);
        if ok {
            Ok(())
        } else {
            Err(AssemblyError::Config(format!("{self:?}")))
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AssemblyError {
    #[error("layout violates rules: {}", summarize(.0))]
    Layout(Vec<Violation>),
    #[error("inconsistent joint metadata: {label} with {meta:?}")]
    InconsistentJointMeta { label: PartLabel, meta: JointMeta },
    #[error("invalid assembly config: {0}")]
    Config(String),
    #[error("part {0} has no parent panel")]
    Orphan(usize),
}

fn base_box(layout: &GridLayout) -> Aabb {
    let [w, h, d] = layout.base_size;
    Aabb::new(Vec3::new(-w / 2.0, 0.0, -d / 2.0), Vec3::new(w / 2.0, h, d / 2.0))
}

/// Front-face rectangle of a cell range, `(x_min, x_max, y_min, y_max)`.
fn face_rect(layout: &GridLayout, index: usize) -> [f64; 4] {
    let [w, h, _] = layout.base_size;
    let [gx, gy] = layout.grid.map(f64::from);
    let c = layout.parts[index].cells;
    [
        -w / 2.0 + f64::from(c.x1) * w / gx,
        -w / 2.0 + f64::from(c.x2) * w / gx,
        f64::from(c.y1) * h / gy,
        f64::from(c.y2) * h / gy,
    ]
}

/// Attachment footprint `(half_w, half_h, depth)` for a face of the given
/// size, shrunk so it never exceeds 80% of the face.
fn attachment_extent(
    label: PartLabel,
    vertical_bar: bool,
    face_w: f64,
    face_h: f64,
    siblings: usize,
    cfg: &AssemblyConfig,
) -> (f64, f64, f64) {
    let (w, h, d) = match label {
        PartLabel::Knob => (2.0 * cfg.knob_radius, 2.0 * cfg.knob_radius, 2.0 * cfg.knob_radius),
        _ if vertical_bar => (cfg.handle_size[0], cfg.handle_size[1], cfg.handle_size[2]),
        _ => (cfg.handle_size[1], cfg.handle_size[0], cfg.handle_size[2]),
    };
    // Two attachments share the face along the axis they are spread over.
    let (room_w, room_h) = match (siblings, vertical_bar) {
        (2, true) => (face_w, face_h / 2.0),
        (2, false) => (face_w / 2.0, face_h),
        _ => (face_w, face_h),
    };
    ((w.min(0.8 * room_w)) / 2.0, (h.min(0.8 * room_h)) / 2.0, d)
}

/// Canonical attachment center on the parent face (before jitter).
fn attachment_center(face: [f64; 4], meta: JointMeta, k: usize, n: usize, half: (f64, f64)) -> (f64, f64) {
    let [x0, x1, y0, y1] = face;
    let (fw, fh) = (x1 - x0, y1 - y0);
    let spread = |lo: f64, len: f64| {
        if n == 2 {
            lo + len * if k == 0 { 0.25 } else { 0.75 }
        } else {
            lo + len / 2.0
        }
    };
    // Door handles sit near the free edge.
    match meta {
        JointMeta::Hinge(HingeSide::Left) => (x1 - 0.1 * fw - half.0, spread(y1, -fh)),
        JointMeta::Hinge(HingeSide::Right) => (x0 + 0.1 * fw + half.0, spread(y1, -fh)),
        JointMeta::Hinge(HingeSide::Top) => (spread(x0, fw), y0 + 0.1 * fh + half.1),
        JointMeta::Hinge(HingeSide::Bottom) => (spread(x0, fw), y1 - 0.1 * fh - half.1),
        JointMeta::SlideOut | JointMeta::None => (spread(x0, fw), y0 + fh / 2.0),
    }
}

fn attachment_box(
    layout: &GridLayout,
    index: usize,
    parent_box: &Aabb,
    cfg: &AssemblyConfig,
    jitter: (f64, f64),
) -> Result<Aabb, AssemblyError> {
    let part = &layout.parts[index];
    let Attach::Part(pi) = part.attach_to else {
        return Err(AssemblyError::Orphan(index));
    };
    let parent = &layout.parts[pi];
    let siblings: Vec<usize> = (0..layout.parts.len())
        .filter(|&j| layout.parts[j].name.is_attachment() && layout.parts[j].attach_to == Attach::Part(pi))
        .collect();
    let k = siblings.iter().position(|&j| j == index).unwrap_or(0);
    let n = siblings.len();

    let face = [parent_box.min[0], parent_box.max[0], parent_box.min[1], parent_box.max[1]];
    let (fw, fh) = (face[1] - face[0], face[3] - face[2]);
    let vertical_bar = matches!(parent.joint_meta, JointMeta::Hinge(s) if s.is_vertical_axis());
    let (hw, hh, depth) = attachment_extent(part.name, vertical_bar, fw, fh, n, cfg);
    let (cx, cy) = attachment_center(face, parent.joint_meta, k, n, (hw, hh));
    let cx = (cx + jitter.0 * fw).clamp(face[0] + hw, face[1] - hw);
    let cy = (cy + jitter.1 * fh).clamp(face[2] + hh, face[3] - hh);
    let z = parent_box.max[2];
    Ok(Aabb::new(Vec3::new(cx - hw, cy - hh, z), Vec3::new(cx + hw, cy + hh, z + depth)))
}

/// Metric box of grid part `index`. Panels map their cells linearly onto the
/// base front face; attachments are placed on their parent's front face.
pub fn resolve_grid(layout: &GridLayout, index: usize, cfg: &AssemblyConfig) -> Result<Aabb, AssemblyError> {
    resolve_with_jitter(layout, index, cfg, (0.0, 0.0))
}

fn resolve_with_jitter(
    layout: &GridLayout,
    index: usize,
    cfg: &AssemblyConfig,
    jitter: (f64, f64),
) -> Result<Aabb, AssemblyError> {
    let part = &layout.parts[index];
    let d = layout.base_size[2];
    let front = d / 2.0;
    if part.name.is_attachment() {
        let Attach::Part(pi) = part.attach_to else {
            return Err(AssemblyError::Orphan(index));
        };
        let parent_box = resolve_with_jitter(layout, pi, cfg, (0.0, 0.0))?;
        return attachment_box(layout, index, &parent_box, cfg, jitter);
    }
    let [x0, x1, y0, y1] = face_rect(layout, index);
    let back = match part.name {
        PartLabel::Door => front - cfg.door_thickness_ratio * d,
        _ => front - cfg.drawer_depth_ratio * d,
    };
    Ok(Aabb::new(Vec3::new(x0, y0, back), Vec3::new(x1, y1, front)))
}

/// Joint for a part given its rest box. Doors hinge on the named edge at the
/// front face and swing outward for positive angles; drawers and trays slide
/// along +z; attachments are fixed.
pub fn assign_joint(
    label: PartLabel,
    bbox: &Aabb,
    meta: JointMeta,
    cfg: &AssemblyConfig,
) -> Result<JointSpec, AssemblyError> {
    let (lo, hi) = (bbox.min, bbox.max);
    let c = bbox.center();
    match (label, meta) {
        (PartLabel::Door, JointMeta::Hinge(side)) => {
            let (origin, direction) = match side {
                HingeSide::Left => (Vec3::new(lo[0], lo[1], hi[2]), Vec3::new(0.0, -1.0, 0.0)),
                HingeSide::Right => (Vec3::new(hi[0], lo[1], hi[2]), Vec3::new(0.0, 1.0, 0.0)),
                HingeSide::Top => (Vec3::new(lo[0], hi[1], hi[2]), Vec3::new(-1.0, 0.0, 0.0)),
                HingeSide::Bottom => (Vec3::new(lo[0], lo[1], hi[2]), Vec3::new(1.0, 0.0, 0.0)),
            };
            Ok(JointSpec::revolute(origin, direction, cfg.door_max_angle))
        }
        (PartLabel::Drawer | PartLabel::Tray, JointMeta::SlideOut) => {
            let depth = hi[2] - lo[2];
            Ok(JointSpec::prismatic(
                Vec3::new(c[0], c[1], hi[2]),
                Vec3::new(0.0, 0.0, 1.0),
                cfg.drawer_travel_ratio * depth,
            ))
        }
        (PartLabel::Handle | PartLabel::Knob, JointMeta::None) => Ok(JointSpec::fixed(Vec3::new(c[0], c[1], lo[2]))),
        _ => Err(AssemblyError::InconsistentJointMeta { label, meta }),
    }
}

/// Builds the object: part 0 is the base shell, grid part `i` becomes part
/// `i + 1`. The seed only jitters attachment placement.
pub fn assemble(layout: &GridLayout, cfg: &AssemblyConfig, seed: u64) -> Result<ArticulatedObject, AssemblyError> {
    cfg.check()?;
    let violations = validate_layout(layout);
    if !violations.is_empty() {
        return Err(AssemblyError::Layout(violations));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut parts = vec![Part {
        id: 0,
        label: PartLabel::Base,
        bbox_rest: base_box(layout),
        joint: JointSpec::fixed(Vec3::zero()),
        parent_id: None,
    }];
    for (i, gp) in layout.parts.iter().enumerate() {
        let jitter = if gp.name.is_attachment() && cfg.attachment_jitter > 0.0 {
            let j = cfg.attachment_jitter;
            (rng.gen_range(-j..=j), rng.gen_range(-j..=j))
        } else {
            (0.0, 0.0)
        };
        let bbox = resolve_with_jitter(layout, i, cfg, jitter)?;
        let joint = assign_joint(gp.name, &bbox, gp.joint_meta, cfg)?;
        let parent_id = match gp.attach_to {
            Attach::Base => 0,
            Attach::Part(j) => j + 1,
        };
        parts.push(Part {
            id: i + 1,
            label: gp.name,
            bbox_rest: bbox,
            joint,
            parent_id: Some(parent_id),
        });
    }
    Ok(ArticulatedObject {
        category: layout.category,
        description: describe_layout(layout),
        parts,
    })
}
