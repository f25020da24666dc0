//! Seeded object-to-object augmentations: part-level (attachment swap,
//! rescale, upside-down, stacking) and joint-level (revolute→prismatic,
//! re-hinging, fixing a joint).
//!
//! Every transform refuses invalid input and re-validates its output.

use crate::model::{ArticulatedObject, JointSpec, JointType, Part, PartLabel};
use crate::violation::{summarize, Violation};
use crate::{validate_object, Aabb, Vec3};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub const RESCALE_RANGE: (f64, f64) = (0.7, 1.3);
/// Attachment jitter bound as a fraction of the parent face.
pub const JITTER: f64 = 0.1;
pub const DEFAULT_TRAVEL_RATIO: f64 = 0.8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AugmentError {
    #[error("object violates rules: {}", summarize(.0))]
    Invalid(Vec<Violation>),
    #[error("no eligible joint")]
    NoEligibleJoint,
    #[error("no eligible part")]
    NoEligiblePart,
    #[error("stacked objects overlap: {0}")]
    Overlap(String),
}

#[derive(Clone, Copy, Debug)]
pub enum PartAugment<'a> {
    ReplaceAttachment,
    Rescale,
    UpsideDown,
    /// Place the given object on top.
    Stack(&'a ArticulatedObject),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JointAugment {
    RevoluteToPrismatic,
    FlipRevoluteDirection,
    FixJoint,
}

impl JointAugment {
    pub const ALL: [JointAugment; 3] = [
        JointAugment::RevoluteToPrismatic,
        JointAugment::FlipRevoluteDirection,
        JointAugment::FixJoint,
    ];
}

fn checked(obj: &ArticulatedObject) -> Result<(), AugmentError> {
    let v = validate_object(obj);
    if v.is_empty() {
        Ok(())
    } else {
        Err(AugmentError::Invalid(v))
    }
}

fn finish(obj: ArticulatedObject) -> Result<ArticulatedObject, AugmentError> {
    checked(&obj)?;
    Ok(obj)
}

pub fn augment_part_level(
    obj: &ArticulatedObject,
    kind: PartAugment,
    seed: u64,
) -> Result<ArticulatedObject, AugmentError> {
    checked(obj)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let out = match kind {
        PartAugment::ReplaceAttachment => replace_attachment(obj, &mut rng)?,
        PartAugment::Rescale => rescale_by(obj, rng.gen_range(RESCALE_RANGE.0..=RESCALE_RANGE.1)),
        PartAugment::UpsideDown => upside_down(obj),
        PartAugment::Stack(other) => {
            checked(other)?;
            stack_objects(obj, other, 0.0)?
        }
    };
    finish(out)
}

pub fn augment_joint_level(
    obj: &ArticulatedObject,
    kind: JointAugment,
    seed: u64,
) -> Result<ArticulatedObject, AugmentError> {
    checked(obj)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eligible: Vec<usize> = obj
        .parts
        .iter()
        .filter(|p| {
            p.parent_id.is_some()
                && match kind {
                    JointAugment::RevoluteToPrismatic | JointAugment::FlipRevoluteDirection => {
                        p.joint.joint_type == JointType::Revolute
                    }
                    JointAugment::FixJoint => p.joint.joint_type.is_movable(),
                }
        })
        .map(|p| p.id)
        .collect();
    let &id = eligible.choose(&mut rng).ok_or(AugmentError::NoEligibleJoint)?;
    let mut out = obj.clone();
    let part = &mut out.parts[id];
    part.joint = match kind {
        JointAugment::RevoluteToPrismatic => revolute_to_prismatic(part, DEFAULT_TRAVEL_RATIO),
        JointAugment::FlipRevoluteDirection => flip_revolute(part),
        JointAugment::FixJoint => JointSpec {
            joint_type: JointType::Fixed,
            range: [0.0, 0.0],
            ..part.joint
        },
    };
    finish(out)
}

/// Prismatic joint along +z from the front-face center, travel
/// `ratio × depth`.
pub fn revolute_to_prismatic(part: &Part, ratio: f64) -> JointSpec {
    let b = &part.bbox_rest;
    let c = b.center();
    JointSpec::prismatic(
        Vec3::new(c[0], c[1], b.max[2]),
        JointSpec::DEFAULT_DIRECTION,
        ratio * b.extents()[2],
    )
}

/// Moves the hinge to the opposite edge of the panel and negates the axis,
/// so the panel still swings outward over `[0, max]`.
pub fn flip_revolute(part: &Part) -> JointSpec {
    let b = &part.bbox_rest;
    let j = &part.joint;
    let mut origin = j.origin;
    for k in 0..2 {
        if j.direction[k].abs() < 0.5 {
            origin[k] = b.min[k] + b.max[k] - origin[k];
        }
    }
    JointSpec {
        origin,
        direction: -j.direction,
        ..*j
    }
}

/// Uniform scale about the object origin of boxes, joint origins and
/// prismatic ranges.
pub fn rescale_by(obj: &ArticulatedObject, factor: f64) -> ArticulatedObject {
    let mut out = obj.clone();
    for p in &mut out.parts {
        p.bbox_rest = Aabb::new(p.bbox_rest.min * factor, p.bbox_rest.max * factor);
        p.joint.origin = p.joint.origin * factor;
        if p.joint.joint_type == JointType::Prismatic {
            p.joint.range = p.joint.range.map(|r| r * factor);
        }
    }
    out
}

/// Mirrors `y ↦ y_min + y_max − y` over the rest bounds. Revolute axes
/// become `−M·d` and prismatic ones `M·d` (`M` the mirror), which keeps
/// `[0, max]` swinging outward. An involution.
pub fn upside_down(obj: &ArticulatedObject) -> ArticulatedObject {
    let Some(bounds) = obj.rest_bounds() else {
        return obj.clone();
    };
    let span = bounds.min[1] + bounds.max[1];
    let flip = |mut v: Vec3| {
        v[1] = span - v[1];
        v
    };
    let mut out = obj.clone();
    for p in &mut out.parts {
        let (lo, hi) = (flip(p.bbox_rest.max), flip(p.bbox_rest.min));
        p.bbox_rest = Aabb::new(
            Vec3::new(p.bbox_rest.min[0], lo[1], p.bbox_rest.min[2]),
            Vec3::new(p.bbox_rest.max[0], hi[1], p.bbox_rest.max[2]),
        );
        if p.parent_id.is_some() {
            p.joint.origin = flip(p.joint.origin);
        }
        let mut d = p.joint.direction;
        d[1] = -d[1];
        if p.joint.joint_type == JointType::Revolute {
            d = -d;
        }
        // Keep exact zeros positive so the involution is bitwise.
        p.joint.direction = d.map(|c| if c == 0.0 { 0.0 } else { c });
    }
    out
}

/// Puts `upper` on top of `lower` (front faces flush, centered in x) and
/// merges both bases into one base spanning the pair. Part ids: base 0,
/// then `lower`'s parts, then `upper`'s, each in original order.
pub fn stack_objects(
    lower: &ArticulatedObject,
    upper: &ArticulatedObject,
    gap: f64,
) -> Result<ArticulatedObject, AugmentError> {
    let (Some(lb), Some(ub)) = (lower.rest_bounds(), upper.rest_bounds()) else {
        return Err(AugmentError::NoEligiblePart);
    };
    // Align base front faces rather than protruding handles.
    let (lf, uf) = (
        lower.root().map_or(lb, |p| p.bbox_rest),
        upper.root().map_or(ub, |p| p.bbox_rest),
    );
    let shift = Vec3::new(
        lf.center()[0] - uf.center()[0],
        lb.max[1] + gap - ub.min[1],
        lf.max[2] - uf.max[2],
    );
    let moved: Vec<Part> = upper
        .parts
        .iter()
        .map(|p| {
            let mut q = p.clone();
            q.bbox_rest = p.bbox_rest.translate(&shift);
            if p.parent_id.is_some() {
                q.joint.origin = p.joint.origin + shift;
            }
            q
        })
        .collect();

    for a in lower.parts.iter().filter(|p| p.parent_id.is_some()) {
        for b in moved.iter().filter(|p| p.parent_id.is_some()) {
            if a.bbox_rest.intersection_volume(&b.bbox_rest) > 0.0 {
                return Err(AugmentError::Overlap(format!(
                    "{} {} of the lower object meets {} {} of the upper one",
                    a.label, a.id, b.label, b.id
                )));
            }
        }
    }

    let lower_root = lower.root().map(|p| p.id);
    let upper_root = upper.root().map(|p| p.id);
    let mut base_box = None::<Aabb>;
    for p in lower.parts.iter().filter(|p| Some(p.id) == lower_root) {
        base_box = Some(p.bbox_rest);
    }
    for p in moved.iter().filter(|p| Some(p.id) == upper_root) {
        base_box = Some(base_box.map_or(p.bbox_rest, |b| b.union(&p.bbox_rest)));
    }
    let mut parts = vec![Part {
        id: 0,
        label: PartLabel::Base,
        bbox_rest: base_box.ok_or(AugmentError::NoEligiblePart)?,
        joint: JointSpec::fixed(Vec3::zero()),
        parent_id: None,
    }];

    for (src, root) in [(&lower.parts, lower_root), (&moved, upper_root)] {
        let offset = parts.len();
        // Old ids shift by `offset - 1` once the old root is dropped; ids
        // below the root shift one less.
        let new_id = |old: usize| -> usize {
            match root {
                Some(r) if old == r => 0,
                Some(r) if old > r => old + offset - 1,
                _ => old + offset,
            }
        };
        for p in src.iter().filter(|p| Some(p.id) != root) {
            let mut q = p.clone();
            q.id = new_id(p.id);
            q.parent_id = p.parent_id.map(new_id);
            parts.push(q);
        }
    }
    Ok(ArticulatedObject {
        category: lower.category,
        description: stacked_description(&upper.description, &lower.description),
        parts,
    })
}

fn stacked_description(top: &str, bottom: &str) -> String {
    let top = top.trim().trim_end_matches('.');
    let mut chars = bottom.trim().chars();
    let bottom: String = chars.next().map_or(String::new(), |c| c.to_lowercase().chain(chars).collect());
    let bottom = bottom.trim_end_matches('.');
    format!("{top} stacked on {bottom}.")
}

/// Attachment bar/knob presets `(w, h, d)` and the reference length their
/// longest side stands for.
const SHAPES: [(PartLabel, [f64; 3]); 3] = [
    (PartLabel::Handle, [0.02, 0.12, 0.03]),
    (PartLabel::Handle, [0.12, 0.02, 0.03]),
    (PartLabel::Knob, [0.04, 0.04, 0.04]),
];

fn reference_length(label: PartLabel) -> f64 {
    match label {
        PartLabel::Knob => 0.04,
        _ => 0.12,
    }
}

fn replace_attachment(obj: &ArticulatedObject, rng: &mut ChaCha8Rng) -> Result<ArticulatedObject, AugmentError> {
    let eligible: Vec<usize> = obj
        .parts
        .iter()
        .filter(|p| p.label.is_attachment() && p.parent_id.is_some())
        .map(|p| p.id)
        .collect();
    let &id = eligible.choose(rng).ok_or(AugmentError::NoEligiblePart)?;
    let old = &obj.parts[id];
    let parent = &obj.parts[old.parent_id.expect("filtered")];
    let (label, size) = *SHAPES.choose(rng).expect("non-empty");

    let e = old.bbox_rest.extents();
    let s = e[0].max(e[1]).max(e[2]) / reference_length(old.label);
    let face = parent.bbox_rest;
    let fe = face.extents();
    let half_w = (size[0] * s).min(0.8 * fe[0]) / 2.0;
    let half_h = (size[1] * s).min(0.8 * fe[1]) / 2.0;
    let depth = size[2] * s;

    let c = old.bbox_rest.center();
    let jx = rng.gen_range(-JITTER..=JITTER) * fe[0];
    let jy = rng.gen_range(-JITTER..=JITTER) * fe[1];
    let cx = (c[0] + jx).clamp(face.min[0] + half_w, face.max[0] - half_w);
    let cy = (c[1] + jy).clamp(face.min[1] + half_h, face.max[1] - half_h);
    let z = old.bbox_rest.min[2];

    let mut out = obj.clone();
    let p = &mut out.parts[id];
    p.label = label;
    p.bbox_rest = Aabb::new(Vec3::new(cx - half_w, cy - half_h, z), Vec3::new(cx + half_w, cy + half_h, z + depth));
    p.joint = JointSpec {
        origin: Vec3::new(cx, cy, z),
        ..p.joint
    };
    Ok(out)
}
