mod common;

use articraft::augment::{augment_part_level, PartAugment};
use articraft::urdf::{emit_urdf, parse_urdf, UrdfError};
use articraft::{max_float_difference, ArticulatedObject};
use regex::Regex;

fn round_trip(obj: &ArticulatedObject) -> f64 {
    let xml = emit_urdf(obj).unwrap();
    let back = parse_urdf(&xml).unwrap_or_else(|e| panic!("{e}\n{xml}"));
    max_float_difference(obj, &back).unwrap_or_else(|| panic!("structure changed\n{xml}"))
}

#[test]
fn thousand_objects_round_trip() {
    let mut worst: f64 = 0.0;
    let mut stacked = 0;
    for i in 0..1000 {
        let obj = if i % 50 == 49 {
            // Same category as the lower object, so trays stay legal.
            let s = augment_part_level(&common::object(i), PartAugment::Stack(&common::object(i + 7)), i).unwrap();
            stacked += 1;
            s
        } else {
            common::augmented(i)
        };
        worst = worst.max(round_trip(&obj));
    }
    assert!(stacked > 0);
    assert!(worst <= 1e-6, "max float difference {worst}");
}

/// Checks the emitted XML against the documented grammar with an
/// independent reader: element order, name patterns, number formats, and
/// box sizes equal to the part extents.
#[test]
fn emitted_xml_matches_grammar() {
    let triple = Regex::new(r"^-?\d+(\.\d{6})? -?\d+(\.\d{6})? -?\d+(\.\d{6})?$").unwrap();
    let fixed6 = Regex::new(r"^-?\d+\.\d{6}$").unwrap();
    let link_name = Regex::new(r"^(base|door|drawer|tray|handle|knob)_\d+$").unwrap();
    for i in 0..50 {
        let obj = common::augmented(i);
        let xml = emit_urdf(&obj).unwrap();
        let doc = roxmltree::Document::parse(&xml).unwrap();
        let robot = doc.root_element();
        assert_eq!(robot.tag_name().name(), "robot");
        let kids: Vec<_> = robot.children().filter(|n| n.is_element()).collect();
        let n_links = kids.iter().take_while(|n| n.has_tag_name("link")).count();
        assert_eq!(n_links, obj.parts.len());
        assert!(kids[n_links..].iter().all(|n| n.has_tag_name("joint")));
        assert_eq!(kids.len() - n_links, obj.parts.len() - 1);
        for (link, part) in kids[..n_links].iter().zip(&obj.parts) {
            assert!(link_name.is_match(link.attribute("name").unwrap()));
            let size = link.descendants().find(|n| n.has_tag_name("box")).unwrap().attribute("size").unwrap();
            assert!(triple.is_match(size), "{size}");
            let v: Vec<f64> = size.split(' ').map(|s| s.parse().unwrap()).collect();
            let e = part.bbox_rest.extents();
            for k in 0..3 {
                assert!((v[k] - e[k]).abs() <= 5e-7);
            }
        }
        for j in &kids[n_links..] {
            let ty = j.attribute("type").unwrap();
            let limit = j.children().find(|n| n.has_tag_name("limit"));
            assert_eq!(limit.is_some(), ty != "fixed");
            if let Some(l) = limit {
                assert!(fixed6.is_match(l.attribute("lower").unwrap()));
                assert!(fixed6.is_match(l.attribute("upper").unwrap()));
            }
            for n in j.children().filter(|n| n.has_tag_name("origin") || n.has_tag_name("axis")) {
                assert!(triple.is_match(n.attribute("xyz").unwrap()));
            }
        }
    }
}

#[test]
fn import_errors() {
    let ok = emit_urdf(&common::object(2)).unwrap();
    let cyl = ok.replacen("<box size=", "<cylinder radius=\"0.1\" length=", 1);
    assert!(matches!(parse_urdf(&cyl), Err(UrdfError::UnsupportedGeometry(_))), "{:?}", parse_urdf(&cyl));
    let wheel = ok.replace("door_", "wheel_");
    if wheel != ok {
        let e = parse_urdf(&wheel).unwrap_err();
        assert!(e.to_string().contains("unknown part name"), "{e}");
    }
    assert!(parse_urdf("<robot").is_err());
}

#[test]
fn invalid_object_not_emitted() {
    let mut obj = common::object(4);
    obj.parts[0].label = articraft::PartLabel::Door;
    assert!(matches!(emit_urdf(&obj), Err(UrdfError::Invalid(_))));
}
