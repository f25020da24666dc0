#![allow(dead_code)]

use articraft::augment::{augment_joint_level, augment_part_level, JointAugment, PartAugment};
use articraft::layout::{sample_layout, Complexity};
use articraft::{assemble, ArticulatedObject, AssemblyConfig, Category};

/// Deterministic object `i`: category and complexity cycle with `i`.
pub fn object(i: u64) -> ArticulatedObject {
    let cat = Category::ALL[(i % Category::ALL.len() as u64) as usize];
    let cx = Complexity::ALL[(i / 7 % 3) as usize];
    let layout = sample_layout(cat, cx, i).expect("sampler");
    assemble(&layout, &AssemblyConfig::default(), i).expect("assembly")
}

/// Object `i`, pushed through one augmentation picked by `i` when eligible.
pub fn augmented(i: u64) -> ArticulatedObject {
    let base = object(i);
    let out = match i % 8 {
        0 => augment_part_level(&base, PartAugment::ReplaceAttachment, i),
        1 => augment_part_level(&base, PartAugment::Rescale, i),
        2 => augment_part_level(&base, PartAugment::UpsideDown, i),
        3 => augment_part_level(&base, PartAugment::Stack(&object(i + 700)), i),
        4 => augment_joint_level(&base, JointAugment::RevoluteToPrismatic, i),
        5 => augment_joint_level(&base, JointAugment::FlipRevoluteDirection, i),
        6 => augment_joint_level(&base, JointAugment::FixJoint, i),
        _ => Ok(base.clone()),
    };
    out.unwrap_or(base)
}
