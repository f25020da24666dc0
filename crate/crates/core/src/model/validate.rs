use super::{ArticulatedObject, ArticulationGraph, Category, JointType, PartLabel};
use crate::violation::{Rule, Violation};
use crate::Vec3;
use thiserror::Error;

const UNIT_TOL: f64 = 1e-9;

/// Structural rules on a bare connectivity graph. `R4` is only checked when
/// the category is known.
pub fn validate_graph(graph: &ArticulationGraph, category: Option<Category>) -> Vec<Violation> {
    let mut out = Vec::new();
    let bases = graph.labels.iter().filter(|&&l| l == PartLabel::Base).count();
    if bases != 1 {
        out.push(Violation::new(
            Rule::R1,
            format!("exactly one base required, found {bases}"),
        ));
    }

    let parents = match graph.parents() {
        Ok(p) => p,
        Err(e) => {
            out.push(Violation::new(Rule::R5, e));
            return out;
        }
    };
    if !graph.is_tree() {
        out.push(Violation::new(Rule::R5, "parent links do not form a single tree"));
    } else if let Some(root) = graph.root() {
        if graph.labels[root] != PartLabel::Base {
            out.push(Violation::new(
                Rule::R5,
                format!("root node {root} is a {}, not a base", graph.labels[root]),
            ));
        }
    }

    for (i, &label) in graph.labels.iter().enumerate() {
        if label.is_attachment() {
            let parent_label = parents[i].map(|p| graph.labels[p]);
            if !parent_label.is_some_and(PartLabel::accepts_attachments) {
                let on = parent_label.map_or("nothing".to_string(), |l| l.to_string());
                out.push(Violation::new(
                    Rule::R2,
                    format!("{label} {i} is attached to {on}, expected a door or drawer"),
                ));
            }
        }
        if label.accepts_attachments() {
            let n = graph
                .children_of(i)
                .into_iter()
                .filter(|&c| graph.labels[c].is_attachment())
                .count();
            if n > 2 {
                out.push(Violation::new(
                    Rule::R3,
                    format!("{label} {i} carries {n} handles/knobs, at most 2 allowed"),
                ));
            }
        }
    }

    if let Some(cat) = category {
        let trays = graph.labels.iter().filter(|&&l| l == PartLabel::Tray).count();
        if trays > 0 && !cat.allows_trays() {
            out.push(Violation::new(
                Rule::R4,
                format!("{trays} tray(s) in a {cat}; trays are only allowed in microwaves"),
            ));
        }
    }
    out
}

/// Every violated rule, empty when the object is well formed.
pub fn validate_object(obj: &ArticulatedObject) -> Vec<Violation> {
    let mut out = Vec::new();
    for (i, p) in obj.parts.iter().enumerate() {
        if p.id != i {
            out.push(Violation::new(
                Rule::R5,
                format!("part at position {i} has id {}; ids must be 0..n-1 in order", p.id),
            ));
        }
        if let Some(pid) = p.parent_id {
            if pid >= obj.parts.len() {
                out.push(Violation::new(
                    Rule::R5,
                    format!("part {i} references missing parent {pid}"),
                ));
            }
        }
    }
    if out.is_empty() {
        out.extend(validate_graph(&obj.graph(), Some(obj.category)));
    }
    for p in &obj.parts {
        check_part_fields(p, &mut out);
    }
    out
}

fn check_part_fields(p: &super::Part, out: &mut Vec<Violation>) {
    let bad = |msg: String| Violation::new(Rule::Invariant, format!("part {}: {msg}", p.id));
    let b = &p.bbox_rest;
    let coords = b.min.0.iter().chain(b.max.0.iter());
    let joint = p.joint.origin.0.iter().chain(p.joint.direction.0.iter());
    if coords.chain(joint).chain(p.joint.range.iter()).any(|v| !v.is_finite()) {
        out.push(bad("non-finite coordinate".into()));
        return;
    }
    if !b.is_ordered() {
        out.push(bad("bbox min exceeds max".into()));
    } else if b.volume() <= 0.0 && !p.label.is_attachment() {
        out.push(bad(format!("degenerate box on a {}", p.label)));
    }
    if (p.joint.direction.norm() - 1.0).abs() > UNIT_TOL {
        out.push(bad("joint direction is not a unit vector".into()));
    }
    let [lo, hi] = p.joint.range;
    if lo > hi {
        out.push(bad(format!("joint range [{lo}, {hi}] is reversed")));
    }
    if p.joint.joint_type == JointType::Fixed && p.joint.range != [0.0, 0.0] {
        out.push(bad("fixed joint range must be [0, 0]".into()));
    }
    if p.label.is_attachment() && p.joint.joint_type != JointType::Fixed {
        out.push(bad(format!("{} must use a fixed joint", p.label)));
    }
    if p.parent_id.is_none() && p.joint.joint_type != JointType::Fixed {
        out.push(bad("root must be fixed to the world".into()));
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NormalizeError {
    #[error("degenerate object")]
    Degenerate,
}

/// Uniform scale plus translation that puts the rest-state union box at the
/// origin with longest side 1. Returns `(object, scale, offset)` where a point
/// maps as `p * scale + offset`.
///
/// The root's world joint is left at the object origin.
pub fn normalize_object(
    obj: &ArticulatedObject,
) -> Result<(ArticulatedObject, f64, Vec3), NormalizeError> {
    if !obj.parts.iter().any(|p| p.bbox_rest.volume() > 0.0) {
        return Err(NormalizeError::Degenerate);
    }
    let bounds = obj.rest_bounds().ok_or(NormalizeError::Degenerate)?;
    let e = bounds.extents();
    let longest = e[0].max(e[1]).max(e[2]);
    if bounds.volume() <= 0.0 || !longest.is_finite() {
        return Err(NormalizeError::Degenerate);
    }
    let scale = 1.0 / longest;
    let offset = -bounds.center() * scale;
    let map = |v: Vec3| v * scale + offset;

    let mut out = obj.clone();
    for p in &mut out.parts {
        p.bbox_rest.min = map(p.bbox_rest.min);
        p.bbox_rest.max = map(p.bbox_rest.max);
        if p.parent_id.is_some() {
            p.joint.origin = map(p.joint.origin);
        }
        if p.joint.joint_type == JointType::Prismatic {
            p.joint.range = p.joint.range.map(|r| r * scale);
        }
    }
    Ok((out, scale, offset))
}
