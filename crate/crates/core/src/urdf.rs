//! URDF emission and parsing for the subset produced here: box visuals,
//! tree joints of type fixed/revolute/prismatic, zero `rpy`.
//!
//! Link frames sit at the part's joint origin (the root link at the object
//! origin) and stay axis-aligned at rest; the visual origin carries the box
//! offset. Links are named `<label>_<id>`, joints `joint_<child id>`.
//!
//! Printed values go through 6-decimal rounding, so emitted offsets are
//! computed against the *rounded* parent frame. Parsing then recovers every
//! coordinate within 1e-6 regardless of tree depth.

use crate::fmt::f6;
use crate::model::{ArticulatedObject, Category, JointSpec, JointType, Part, PartLabel};
use crate::violation::{summarize, Violation};
use crate::{validate_object, Aabb, Vec3};
use std::collections::HashMap;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UrdfError {
    #[error("object violates rules: {}", summarize(.0))]
    Invalid(Vec<Violation>),
    #[error("malformed XML: {0}")]
    Xml(String),
    #[error("unsupported geometry in link {0:?}")]
    UnsupportedGeometry(String),
    #[error("unsupported joint type {0:?}")]
    UnsupportedJointType(String),
    #[error("unknown part name {0:?}")]
    UnknownPartName(String),
    #[error("not a tree: {0}")]
    NotATree(String),
    #[error("{0}")]
    Malformed(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct UrdfLink {
    pub name: String,
    pub size: [f64; 3],
    pub visual_origin: [f64; 3],
}

#[derive(Clone, Debug, PartialEq)]
pub struct UrdfJoint {
    pub name: String,
    pub joint_type: JointType,
    pub parent: String,
    pub child: String,
    pub origin_xyz: [f64; 3],
    pub origin_rpy: [f64; 3],
    pub axis: [f64; 3],
    /// Present for movable joints only.
    pub limit: Option<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct UrdfDocument {
    pub robot_name: String,
    pub description: String,
    pub links: Vec<UrdfLink>,
    pub joints: Vec<UrdfJoint>,
}

/// The value a 6-decimal print of `v` parses back to.
fn printed(v: f64) -> f64 {
    f6(v).parse().expect("f6 output parses")
}

fn printed3(v: Vec3) -> [f64; 3] {
    v.0.map(printed)
}

fn link_name(p: &Part) -> String {
    format!("{}_{}", p.label.name(), p.id)
}

fn robot_name(c: Category) -> String {
    c.name().to_lowercase().replace(' ', "_")
}

impl UrdfDocument {
    pub fn from_object(obj: &ArticulatedObject) -> Result<Self, UrdfError> {
        let v = validate_object(obj);
        if !v.is_empty() {
            return Err(UrdfError::Invalid(v));
        }
        let order = obj.topological_order().ok_or_else(|| UrdfError::NotATree("cycle".into()))?;
        // Link frame positions as a parser will reconstruct them.
        let mut frame = vec![Vec3::zero(); obj.parts.len()];
        let mut rel = vec![[0.0; 3]; obj.parts.len()];
        for id in order {
            let p = &obj.parts[id];
            if let Some(parent) = p.parent_id {
                rel[id] = printed3(p.joint.origin - frame[parent]);
                frame[id] = frame[parent] + Vec3::from(rel[id]);
            }
        }
        let links = obj
            .parts
            .iter()
            .map(|p| UrdfLink {
                name: link_name(p),
                size: printed3(p.bbox_rest.extents()),
                visual_origin: printed3(p.bbox_rest.center() - frame[p.id]),
            })
            .collect();
        let joints = obj
            .parts
            .iter()
            .filter_map(|p| {
                let parent = &obj.parts[p.parent_id?];
                let j = &p.joint;
                Some(UrdfJoint {
                    name: format!("joint_{}", p.id),
                    joint_type: j.joint_type,
                    parent: link_name(parent),
                    child: link_name(p),
                    origin_xyz: rel[p.id],
                    origin_rpy: [0.0; 3],
                    axis: printed3(j.direction),
                    limit: j.joint_type.is_movable().then(|| j.range.map(printed)),
                })
            })
            .collect();
        Ok(UrdfDocument {
            robot_name: robot_name(obj.category),
            description: obj.description.clone(),
            links,
            joints,
        })
    }

    pub fn to_object(&self) -> Result<ArticulatedObject, UrdfError> {
        let category: Category = self
            .robot_name
            .parse()
            .map_err(|_| UrdfError::Malformed(format!("unknown category {:?}", self.robot_name)))?;
        let n = self.links.len();
        let mut index: HashMap<&str, usize> = HashMap::new();
        let mut labels = vec![PartLabel::Base; n];
        let mut seen = vec![false; n];
        for link in &self.links {
            let (label, id) = link
                .name
                .rsplit_once('_')
                .ok_or_else(|| UrdfError::UnknownPartName(link.name.clone()))?;
            let label: PartLabel = label.parse().map_err(|_| UrdfError::UnknownPartName(label.to_string()))?;
            let id: usize = id
                .parse()
                .ok()
                .filter(|&i| i < n)
                .ok_or_else(|| UrdfError::Malformed(format!("link {:?}: ids must be 0..{n}", link.name)))?;
            if std::mem::replace(&mut seen[id], true) || index.insert(&link.name, id).is_some() {
                return Err(UrdfError::Malformed(format!("duplicate link id in {:?}", link.name)));
            }
            labels[id] = label;
        }

        let mut parent: Vec<Option<usize>> = vec![None; n];
        let mut joint_of: Vec<Option<&UrdfJoint>> = vec![None; n];
        for j in &self.joints {
            let find = |name: &str| {
                index
                    .get(name)
                    .copied()
                    .ok_or_else(|| UrdfError::Malformed(format!("joint {:?} names missing link {name:?}", j.name)))
            };
            let (p, c) = (find(&j.parent)?, find(&j.child)?);
            if p == c {
                return Err(UrdfError::NotATree(format!("joint {:?} connects {:?} to itself", j.name, j.child)));
            }
            if parent[c].is_some() {
                return Err(UrdfError::NotATree(format!("link {:?} has two parents", j.child)));
            }
            if j.origin_rpy != [0.0; 3] {
                return Err(UrdfError::Malformed(format!("joint {:?}: only zero rpy is supported", j.name)));
            }
            parent[c] = Some(p);
            joint_of[c] = Some(j);
        }
        let roots: Vec<usize> = (0..n).filter(|&i| parent[i].is_none()).collect();
        if roots.len() != 1 {
            return Err(UrdfError::NotATree(format!("{} root links", roots.len())));
        }

        // Breadth-first from the root; anything unreached sits on a cycle.
        let mut order = vec![roots[0]];
        let mut k = 0;
        while k < order.len() {
            let u = order[k];
            order.extend((0..n).filter(|&c| parent[c] == Some(u)));
            k += 1;
        }
        if order.len() != n {
            return Err(UrdfError::NotATree("cyclic joints".into()));
        }

        let link_of: Vec<&UrdfLink> = {
            let mut v: Vec<Option<&UrdfLink>> = vec![None; n];
            for link in &self.links {
                v[index[link.name.as_str()]] = Some(link);
            }
            v.into_iter().map(|l| l.expect("ids are a permutation")).collect()
        };
        let mut frame = vec![Vec3::zero(); n];
        let mut parts: Vec<Option<Part>> = vec![None; n];
        for id in order {
            let link = link_of[id];
            let joint = match (parent[id], joint_of[id]) {
                (Some(p), Some(j)) => {
                    frame[id] = frame[p] + Vec3::from(j.origin_xyz);
                    let direction = Vec3::from(j.axis)
                        .normalized()
                        .ok_or_else(|| UrdfError::Malformed(format!("joint {:?} has a zero axis", j.name)))?;
                    let range = match (j.joint_type.is_movable(), j.limit) {
                        (true, Some(l)) => l,
                        (true, None) => {
                            return Err(UrdfError::Malformed(format!("joint {:?} lacks a limit", j.name)));
                        }
                        (false, _) => [0.0, 0.0],
                    };
                    JointSpec {
                        joint_type: j.joint_type,
                        origin: frame[id],
                        direction,
                        range,
                    }
                }
                _ => JointSpec::fixed(Vec3::zero()),
            };
            let center = frame[id] + Vec3::from(link.visual_origin);
            let half = Vec3::from(link.size) * 0.5;
            parts[id] = Some(Part {
                id,
                label: labels[id],
                bbox_rest: Aabb::new(center - half, center + half),
                joint,
                parent_id: parent[id],
            });
        }
        Ok(ArticulatedObject {
            category,
            description: self.description.clone(),
            parts: parts.into_iter().map(|p| p.expect("visited")).collect(),
        })
    }

    pub fn to_xml(&self) -> String {
        let mut s = String::from("<?xml version=\"1.0\"?>\n");
        let _ = writeln!(s, "<robot name=\"{}\">", self.robot_name);
        let _ = writeln!(s, "  <!-- description: {} -->", encode_comment(&self.description));
        for l in &self.links {
            let _ = writeln!(s, "  <link name=\"{}\">", l.name);
            s.push_str("    <visual>\n");
            let _ = writeln!(s, "      <origin xyz=\"{}\" rpy=\"{}\"/>", triple(l.visual_origin), triple([0.0; 3]));
            let _ = writeln!(s, "      <geometry>\n        <box size=\"{}\"/>\n      </geometry>", triple(l.size));
            s.push_str("    </visual>\n  </link>\n");
        }
        for j in &self.joints {
            let _ = writeln!(s, "  <joint name=\"{}\" type=\"{}\">", j.name, j.joint_type.name());
            let _ = writeln!(s, "    <parent link=\"{}\"/>", j.parent);
            let _ = writeln!(s, "    <child link=\"{}\"/>", j.child);
            let _ = writeln!(s, "    <origin xyz=\"{}\" rpy=\"{}\"/>", triple(j.origin_xyz), triple(j.origin_rpy));
            let _ = writeln!(s, "    <axis xyz=\"{}\"/>", axis_triple(j.axis));
            if let Some([lo, hi]) = j.limit {
                let _ = writeln!(s, "    <limit lower=\"{}\" upper=\"{}\"/>", f6(lo), f6(hi));
            }
            s.push_str("  </joint>\n");
        }
        s.push_str("</robot>\n");
        s
    }

    pub fn from_xml(xml: &str) -> Result<Self, UrdfError> {
        let doc = roxmltree::Document::parse(xml).map_err(|e| UrdfError::Xml(e.to_string()))?;
        let robot = doc.root_element();
        if robot.tag_name().name() != "robot" {
            return Err(UrdfError::Malformed("root element must be <robot>".into()));
        }
        let robot_name = attr(robot, "name")?.to_string();
        let description = robot
            .children()
            .filter(|c| c.is_comment())
            .find_map(|c| c.text()?.trim().strip_prefix("description:").map(|d| decode_comment(d.trim())))
            .unwrap_or_default();

        let mut links = Vec::new();
        let mut joints = Vec::new();
        for node in robot.children().filter(|c| c.is_element()) {
            match node.tag_name().name() {
                "link" => links.push(parse_link(node)?),
                "joint" => joints.push(parse_joint(node)?),
                _ => {}
            }
        }
        Ok(UrdfDocument {
            robot_name,
            description,
            links,
            joints,
        })
    }
}

fn triple(v: [f64; 3]) -> String {
    format!("{} {} {}", f6(v[0]), f6(v[1]), f6(v[2]))
}

/// Axis components that are exact integers print bare (`0 1 0`).
fn axis_triple(v: [f64; 3]) -> String {
    let one = |c: f64| {
        if c.fract() == 0.0 && c.abs() <= 1.0 {
            format!("{}", c as i64)
        } else {
            f6(c)
        }
    };
    format!("{} {} {}", one(v[0]), one(v[1]), one(v[2]))
}

/// XML comments may not contain `--` or end in `-`; `%` escapes keep the
/// text lossless.
fn encode_comment(s: &str) -> String {
    let chars: Vec<char> = s.chars().collect();
    let mut out = String::with_capacity(s.len());
    for (i, &c) in chars.iter().enumerate() {
        let risky_dash = c == '-' && chars.get(i + 1).is_none_or(|&n| n == '-');
        if c == '%' || risky_dash || (c.is_ascii_control()) {
            let _ = write!(out, "%{:02X}", c as u32);
        } else {
            out.push(c);
        }
    }
    out
}

fn decode_comment(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(i) = rest.find('%') {
        out.push_str(&rest[..i]);
        let code = rest.get(i + 1..i + 3).and_then(|h| u8::from_str_radix(h, 16).ok());
        match code {
            Some(b) => {
                out.push(char::from(b));
                rest = &rest[i + 3..];
            }
            None => {
                out.push('%');
                rest = &rest[i + 1..];
            }
        }
    }
    out.push_str(rest);
    out
}

fn attr<'a>(node: roxmltree::Node<'a, '_>, name: &str) -> Result<&'a str, UrdfError> {
    node.attribute(name).ok_or_else(|| {
        UrdfError::Malformed(format!("<{}> lacks attribute {name:?}", node.tag_name().name()))
    })
}

fn child<'a, 'i>(node: roxmltree::Node<'a, 'i>, tag: &str) -> Option<roxmltree::Node<'a, 'i>> {
    node.children().find(|c| c.is_element() && c.tag_name().name() == tag)
}

fn floats<const N: usize>(s: &str) -> Result<[f64; N], UrdfError> {
    let vals: Vec<f64> = s
        .split_whitespace()
        .map(str::parse)
        .collect::<Result<_, _>>()
        .map_err(|_| UrdfError::Malformed(format!("bad number list {s:?}")))?;
    vals.try_into()
        .map_err(|_| UrdfError::Malformed(format!("expected {N} numbers, got {s:?}")))
}

fn origin(node: roxmltree::Node) -> Result<([f64; 3], [f64; 3]), UrdfError> {
    match child(node, "origin") {
        None => Ok(([0.0; 3], [0.0; 3])),
        Some(o) => Ok((
            o.attribute("xyz").map_or(Ok([0.0; 3]), floats)?,
            o.attribute("rpy").map_or(Ok([0.0; 3]), floats)?,
        )),
    }
}

fn parse_link(node: roxmltree::Node) -> Result<UrdfLink, UrdfError> {
    let name = attr(node, "name")?.to_string();
    let visual = child(node, "visual").ok_or_else(|| UrdfError::Malformed(format!("link {name:?} has no visual")))?;
    let geometry =
        child(visual, "geometry").ok_or_else(|| UrdfError::Malformed(format!("link {name:?} has no geometry")))?;
    let shape = geometry
        .children()
        .find(|c| c.is_element())
        .ok_or_else(|| UrdfError::Malformed(format!("link {name:?} has empty geometry")))?;
    if shape.tag_name().name() != "box" {
        return Err(UrdfError::UnsupportedGeometry(name));
    }
    let size = floats(attr(shape, "size")?)?;
    let (xyz, rpy) = origin(visual)?;
    if rpy != [0.0; 3] {
        return Err(UrdfError::Malformed(format!("link {name:?}: only zero rpy is supported")));
    }
    Ok(UrdfLink {
        name,
        size,
        visual_origin: xyz,
    })
}

fn parse_joint(node: roxmltree::Node) -> Result<UrdfJoint, UrdfError> {
    let name = attr(node, "name")?.to_string();
    let ty = attr(node, "type")?;
    let joint_type: JointType = ty.parse().map_err(|_| UrdfError::UnsupportedJointType(ty.to_string()))?;
    let link_of = |tag: &str| -> Result<String, UrdfError> {
        let n = child(node, tag).ok_or_else(|| UrdfError::Malformed(format!("joint {name:?} lacks <{tag}>")))?;
        Ok(attr(n, "link")?.to_string())
    };
    let (origin_xyz, origin_rpy) = origin(node)?;
    let axis = child(node, "axis").map_or(Ok([1.0, 0.0, 0.0]), |a| floats(attr(a, "xyz")?))?;
    let limit = match child(node, "limit") {
        Some(l) => Some([floats::<1>(attr(l, "lower")?)?[0], floats::<1>(attr(l, "upper")?)?[0]]),
        None => None,
    };
    Ok(UrdfJoint {
        parent: link_of("parent")?,
        child: link_of("child")?,
        name,
        joint_type,
        origin_xyz,
        origin_rpy,
        axis,
        limit,
    })
}

/// Serializes a valid object; invalid objects are refused with their
/// violations.
pub fn emit_urdf(obj: &ArticulatedObject) -> Result<String, UrdfError> {
    Ok(UrdfDocument::from_object(obj)?.to_xml())
}

pub fn parse_urdf(xml: &str) -> Result<ArticulatedObject, UrdfError> {
    UrdfDocument::from_xml(xml)?.to_object()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::max_float_difference;
    use std::f64::consts::FRAC_PI_2;

    fn bx(min: [f64; 3], max: [f64; 3]) -> Aabb {
        Aabb::new(Vec3::from(min), Vec3::from(max))
    }

    fn sample() -> ArticulatedObject {
        ArticulatedObject {
            category: Category::StorageFurniture,
            description: "A storage furniture with one door on the left with one handle.".into(),
            parts: vec![
                Part {
                    id: 0,
                    label: PartLabel::Base,
                    bbox_rest: bx([-0.5, 0.0, -0.25], [0.5, 1.0, 0.25]),
                    joint: JointSpec::fixed(Vec3::zero()),
                    parent_id: None,
                },
                Part {
                    id: 1,
                    label: PartLabel::Door,
                    bbox_rest: bx([-0.5, 0.0, 0.225], [0.0, 1.0, 0.25]),
                    joint: JointSpec::revolute(Vec3::new(-0.5, 0.0, 0.25), Vec3::new(0.0, 1.0, 0.0), FRAC_PI_2),
                    parent_id: Some(0),
                },
                Part {
                    id: 2,
                    label: PartLabel::Handle,
                    bbox_rest: bx([-0.1234567, 0.4, 0.25], [-0.1034567, 0.5234561, 0.28]),
                    joint: JointSpec::fixed(Vec3::new(-0.1134567, 0.46172805, 0.25)),
                    parent_id: Some(1),
                },
            ],
        }
    }

    #[test]
    fn door_joint_xml() {
        let xml = emit_urdf(&sample()).unwrap();
        assert!(xml.contains("<joint name=\"joint_1\" type=\"revolute\">"));
        assert!(xml.contains("<axis xyz=\"0 1 0\"/>"));
        assert!(xml.contains("<limit lower=\"0.000000\" upper=\"1.570796\"/>"));
        assert_eq!(xml.matches("<link ").count(), 3);
        assert_eq!(xml.matches("<limit").count(), 1);
        let first_joint = xml.find("<joint").unwrap();
        assert!(xml.rfind("<link").unwrap() < first_joint);
    }

    #[test]
    fn round_trip_within_tolerance() {
        let obj = sample();
        let back = parse_urdf(&emit_urdf(&obj).unwrap()).unwrap();
        let d = max_float_difference(&obj, &back).unwrap();
        assert!(d <= 1e-6, "{d}");
        assert!(validate_object(&back).is_empty());
    }

    #[test]
    fn errors() {
        let xml = emit_urdf(&sample()).unwrap();
        let wheel = xml.replace("handle_2", "wheel_2");
        assert_eq!(parse_urdf(&wheel).unwrap_err().to_string(), "unknown part name \"wheel\"");
        let sphere = xml.replacen("<box size=\"1.000000 1.000000 0.500000\"/>", "<sphere radius=\"1\"/>", 1);
        assert!(parse_urdf(&sphere).unwrap_err().to_string().starts_with("unsupported geometry"));
        let loop_ = xml.replace("<parent link=\"door_1\"/>", "<parent link=\"handle_2\"/>");
        assert!(parse_urdf(&loop_).unwrap_err().to_string().starts_with("not a tree"));
        let cont = xml.replace("type=\"revolute\"", "type=\"continuous\"");
        assert!(matches!(parse_urdf(&cont), Err(UrdfError::UnsupportedJointType(_))));
    }

    #[test]
    fn invalid_object_refused() {
        let mut o = sample();
        o.parts[2].parent_id = Some(0);
        assert!(matches!(emit_urdf(&o), Err(UrdfError::Invalid(_))));
    }

    #[test]
    fn comment_escaping() {
        for s in ["plain", "a--b", "ends-", "100% - done", "%2D"] {
            let e = encode_comment(s);
            assert!(!e.contains("--") && !e.ends_with('-'));
            assert_eq!(decode_comment(&e), s);
        }
    }
}
