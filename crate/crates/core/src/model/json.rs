//! Object JSON: the on-disk form of [`ArticulatedObject`]. Floats are written
//! with exactly six decimals so identical objects produce identical bytes.

use super::{ArticulatedObject, Category, JointSpec, JointType, Part, PartLabel};
use crate::fmt::f6;
use crate::{Aabb, Vec3};
use serde::Deserialize;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ObjectJsonError {
    #[error("malformed object JSON: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("{0}")]
    Field(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawObject {
    category: String,
    description: String,
    parts: Vec<RawPart>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPart {
    id: usize,
    label: String,
    parent_id: Option<usize>,
    bbox_rest: RawBox,
    joint: RawJoint,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBox {
    min: [f64; 3],
    max: [f64; 3],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawJoint {
    #[serde(rename = "type")]
    joint_type: String,
    origin: [f64; 3],
    direction: [f64; 3],
    range: [f64; 2],
}

fn vec_json(v: &Vec3) -> String {
    format!("[{}, {}, {}]", f6(v[0]), f6(v[1]), f6(v[2]))
}

pub fn object_to_json(obj: &ArticulatedObject) -> String {
    let q = |s: &str| serde_json::to_string(s).expect("strings always serialize");
    let mut out = String::new();
    out.push_str("{\n");
    let _ = writeln!(out, "  \"category\": {},", q(obj.category.name()));
    let _ = writeln!(out, "  \"description\": {},", q(&obj.description));
    out.push_str("  \"parts\": [");
    for (i, p) in obj.parts.iter().enumerate() {
        out.push_str(if i == 0 { "\n" } else { ",\n" });
        let parent = p.parent_id.map_or("null".to_string(), |v| v.to_string());
        let _ = write!(
            out,
            "    {{\"id\": {}, \"label\": {}, \"parent_id\": {}, \
             \"bbox_rest\": {{\"min\": {}, \"max\": {}}}, \
             \"joint\": {{\"type\": {}, \"origin\": {}, \"direction\": {}, \"range\": [{}, {}]}}}}",
            p.id,
            q(p.label.name()),
            parent,
            vec_json(&p.bbox_rest.min),
            vec_json(&p.bbox_rest.max),
            q(p.joint.joint_type.name()),
            vec_json(&p.joint.origin),
            vec_json(&p.joint.direction),
            f6(p.joint.range[0]),
            f6(p.joint.range[1]),
        );
    }
    out.push_str(if obj.parts.is_empty() { "]\n}\n" } else { "\n  ]\n}\n" });
    out
}

/// Parses object JSON. Field-level checks only; run
/// [`validate_object`](super::validate_object) for the structural rules.
pub fn object_from_json(text: &str) -> Result<ArticulatedObject, ObjectJsonError> {
    let raw: RawObject = serde_json::from_str(text)?;
    let category: Category = raw.category.parse().map_err(ObjectJsonError::Field)?;
    let parts = raw
        .parts
        .into_iter()
        .map(|p| {
            let label: PartLabel = p
                .label
                .parse()
                .map_err(|e: super::UnknownLabel| ObjectJsonError::Field(e.to_string()))?;
            let joint_type: JointType = p.joint.joint_type.parse().map_err(ObjectJsonError::Field)?;
            Ok(Part {
                id: p.id,
                label,
                parent_id: p.parent_id,
                bbox_rest: Aabb::new(Vec3::from(p.bbox_rest.min), Vec3::from(p.bbox_rest.max)),
                joint: JointSpec {
                    joint_type,
                    origin: Vec3::from(p.joint.origin),
                    direction: Vec3::from(p.joint.direction),
                    range: p.joint.range,
                },
            })
        })
        .collect::<Result<Vec<_>, ObjectJsonError>>()?;
    Ok(ArticulatedObject {
        category,
        description: raw.description,
        parts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ArticulatedObject {
        ArticulatedObject {
            category: Category::Microwave,
            description: "A microwave with one \"tray\".".into(),
            parts: vec![
                Part {
                    id: 0,
                    label: PartLabel::Base,
                    bbox_rest: Aabb::new(Vec3::new(-0.3, 0.0, -0.2), Vec3::new(0.3, 0.35, 0.2)),
                    joint: JointSpec::fixed(Vec3::zero()),
                    parent_id: None,
                },
                Part {
                    id: 1,
                    label: PartLabel::Tray,
                    bbox_rest: Aabb::new(Vec3::new(-0.25, 0.0, -0.15), Vec3::new(0.25, 0.05, 0.2)),
                    joint: JointSpec::prismatic(Vec3::zero(), Vec3::new(0.0, 0.0, 1.0), 0.28),
                    parent_id: Some(0),
                },
            ],
        }
    }

    #[test]
    fn field_names_and_formatting() {
        let s = object_to_json(&sample());
        assert!(s.contains("\"category\": \"Microwave\""));
        assert!(s.contains(
            "\"joint\": {\"type\": \"prismatic\", \"origin\": [0.000000, 0.000000, 0.000000], \
             \"direction\": [0.000000, 0.000000, 1.000000], \"range\": [0.000000, 0.280000]}"
        ));
        assert!(s.contains("\"parent_id\": null"));
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["parts"][1]["bbox_rest"]["min"][0], -0.25);
    }

    #[test]
    fn round_trip() {
        let o = sample();
        let back = object_from_json(&object_to_json(&o)).unwrap();
        assert_eq!(back, o);
    }

    #[test]
    fn unknown_label_rejected() {
        let s = object_to_json(&sample()).replace("\"tray\"", "\"shelf\"");
        let err = object_from_json(&s).unwrap_err();
        assert!(err.to_string().contains("unknown part name"), "{err}");
    }

    #[test]
    fn unknown_field_rejected() {
        let s = object_to_json(&sample()).replacen("\"id\"", "\"mass\": 1, \"id\"", 1);
        assert!(object_from_json(&s).is_err());
    }
}
