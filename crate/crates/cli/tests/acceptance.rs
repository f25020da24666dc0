//! One PASS/FAIL line per acceptance criterion. Every check runs even if an
//! earlier one fails; exits non-zero if any line is red.

use articraft::agents::parse_graph_tree;
use articraft::augment::{augment_joint_level, augment_part_level, JointAugment, PartAugment};
use articraft::encoding::{attention_weights, dual_state_jacobian, dual_state_update, AttentionWeights, Matrix};
use articraft::geometry::{Aabb, Vec3};
use articraft::kinematics::{edge_lengths, pose_object, Pose};
use articraft::layout::{sample_layout, Complexity};
use articraft::metrics::{d_cd, d_giou, evaluate, giou, graph_accuracy, EvalConfig};
use articraft::urdf::{emit_urdf, parse_urdf};
use articraft::{
    assemble, max_float_difference, validate_object, ArticulatedObject, AssemblyConfig, Category, JointSpec, Part,
    PartLabel, Rule,
};
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

type Q = Ratio<i64>;
type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn object(i: u64) -> ArticulatedObject {
    let cat = Category::ALL[(i % 7) as usize];
    let cx = Complexity::ALL[(i / 7 % 3) as usize];
    assemble(&sample_layout(cat, cx, i).unwrap(), &AssemblyConfig::default(), i).unwrap()
}

/// Cycles through every augmentation; stacks pair same-category objects.
fn augmented(i: u64) -> ArticulatedObject {
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

fn articraft(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_articraft")).args(args).output().expect("binary runs")
}

fn dataset_statistics() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path().join("data");
    let out = out.to_str().unwrap();
    let t = Instant::now();
    let g = articraft(&["gen", "--count", "600", "--seed", "1", "--out", out]);
    let elapsed = t.elapsed();
    ensure!(g.status.success(), "gen failed: {}", String::from_utf8_lossy(&g.stderr));
    let s = articraft(&["stats", "--data", out]);
    ensure!(s.status.success(), "stats failed");
    let line = String::from_utf8_lossy(&s.stdout).trim().to_string();
    let (n, avg) = line
        .strip_suffix(" parts")
        .and_then(|r| r.split_once(" objects, avg "))
        .ok_or(format!("unexpected stats output {line:?}"))?;
    let avg: f64 = avg.parse().map_err(|_| line.clone())?;
    ensure!(n == "600", "{line}");
    ensure!((12.0..=25.0).contains(&avg), "{line}");
    ensure!(elapsed <= Duration::from_secs(600), "took {elapsed:?}");
    Ok(format!("{line} in {:.1}s", elapsed.as_secs_f64()))
}

fn self_evaluation() -> Check {
    let cfg = EvalConfig {
        points_per_part: 256,
        ..EvalConfig::default()
    };
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let obj = augmented(i);
        let r = evaluate(&obj, &obj, &cfg).map_err(|e| e.to_string())?;
        worst = r.distances().iter().fold(worst, |w, d| w.max(d.abs()));
        ensure!(r.graph_correct, "object {i}: graph mismatch against itself");
    }
    ensure!(worst <= 1e-9, "largest distance {worst:e}");
    Ok(format!("200 objects, max distance {worst:e}, Acc 100%"))
}

const N: i64 = 64;

fn voxel_giou(a: &[[i64; 2]; 3], b: &[[i64; 2]; 3]) -> Q {
    let inside = |bx: &[[i64; 2]; 3], v: [i64; 3]| (0..3).all(|k| bx[k][0] <= v[k] && v[k] < bx[k][1]);
    let hull: [[i64; 2]; 3] = std::array::from_fn(|k| [a[k][0].min(b[k][0]), a[k][1].max(b[k][1])]);
    let (mut na, mut nb, mut both, mut nh) = (0i64, 0i64, 0i64, 0i64);
    for x in 0..N {
        for y in 0..N {
            for z in 0..N {
                let v = [x, y, z];
                let (ia, ib) = (inside(a, v), inside(b, v));
                na += ia as i64;
                nb += ib as i64;
                both += (ia && ib) as i64;
                nh += inside(&hull, v) as i64;
            }
        }
    }
    let union = na + nb - both;
    Q::new(both, union) - Q::new(nh - union, nh)
}

fn giou_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let mut bx = || -> [[i64; 2]; 3] {
            std::array::from_fn(|_| {
                let lo = rng.gen_range(0..N);
                [lo, rng.gen_range(lo + 1..=N)]
            })
        };
        let (a, b) = (bx(), bx());
        let f = |c: &[[i64; 2]; 3]| {
            Aabb::new(
                Vec3(std::array::from_fn(|k| c[k][0] as f64 / N as f64)),
                Vec3(std::array::from_fn(|k| c[k][1] as f64 / N as f64)),
            )
        };
        let oracle = voxel_giou(&a, &b);
        let oracle = *oracle.numer() as f64 / *oracle.denom() as f64;
        worst = worst.max((giou(&f(&a), &f(&b)).unwrap() - oracle).abs());
    }
    ensure!(worst <= 1e-3, "worst gap {worst:e}");
    let q = |v: i64| Q::from_integer(v);
    let half = Q::new(1, 2);
    let unit = Aabb::new(Vec3([q(0); 3]), Vec3([q(1); 3]));
    let offset = Aabb::new(Vec3([half, q(0), q(0)]), Vec3([q(1) + half, q(1), q(1)]));
    let gap = Aabb::new(Vec3([q(2), q(0), q(0)]), Vec3([q(3), q(1), q(1)]));
    let (d1, d2) = (d_giou(&[unit], &[offset], &[(0, 0)]), d_giou(&[unit], &[gap], &[(0, 0)]));
    ensure!(d1 == Q::new(2, 3), "offset cubes gave {d1}");
    ensure!(d2 == Q::new(4, 3), "gap cubes gave {d2}");
    Ok(format!("100 pairs, worst gap {worst:e}; hand cases {d1} and {d2}"))
}

fn chamfer_oracle() -> Check {
    fn side(a: &[Vec3<f64>], b: &[Vec3<f64>]) -> f64 {
        let mut total = 0.0;
        for x in a {
            let mut best = f64::INFINITY;
            for y in b {
                let (dx, dy, dz) = (x.0[0] - y.0[0], x.0[1] - y.0[1], x.0[2] - y.0[2]);
                best = best.min(dx * dx + dy * dy + dz * dz);
            }
            total += best;
        }
        total / a.len() as f64
    }
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for t in 0..50 {
        let mut pts = |k: usize| -> Vec<Vec3<f64>> {
            (0..k).map(|_| Vec3(std::array::from_fn(|_| rng.gen_range(-1.0..1.0)))).collect()
        };
        let (n, m) = (1 + t * 10 % 500, 500 - t * 7 % 499);
        let (p, q) = (pts(n), pts(m));
        let fast = d_cd(&p, &q).map_err(|e| e.to_string())?;
        let slow = side(&p, &q) + side(&q, &p);
        ensure!(fast.to_bits() == slow.to_bits(), "pair {t}: {fast:e} vs {slow:e}");
    }
    Ok("50 pairs bit-identical".into())
}

fn urdf_round_trip() -> Check {
    let (mut worst, mut stacked, mut changed): (f64, usize, usize) = (0.0, 0, 0);
    for i in 0..1000u64 {
        let obj = if i % 50 == 49 {
            stacked += 1;
            augment_part_level(&object(i), PartAugment::Stack(&object(i + 7)), i).map_err(|e| e.to_string())?
        } else {
            augmented(i)
        };
        changed += (obj != object(i)) as usize;
        let xml = emit_urdf(&obj).map_err(|e| format!("object {i}: {e}"))?;
        let back = parse_urdf(&xml).map_err(|e| format!("object {i}: {e}"))?;
        let d = max_float_difference(&obj, &back).ok_or(format!("object {i}: structure or labels differ"))?;
        worst = worst.max(d);
    }
    ensure!(worst <= 1e-6, "max float difference {worst:e}");
    Ok(format!("1000 objects ({changed} augmented, {stacked} stacked), max diff {worst:e}"))
}

fn fk_rigidity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let volume = |c: &[Vec3<f64>; 8]| (c[1] - c[0]).cross(&(c[2] - c[0])).dot(&(c[4] - c[0]));
    let mut worst: f64 = 0.0;
    for k in 0..1000u64 {
        let obj = augmented(k / 10);
        let values = obj
            .parts
            .iter()
            .map(|p| {
                let [lo, hi] = p.joint.range;
                if hi > lo {
                    rng.gen_range(lo..=hi)
                } else {
                    lo
                }
            })
            .collect();
        let posed = pose_object(&obj, &Pose { joint_values: values }).map_err(|e| e.to_string())?;
        for (p, pp) in obj.parts.iter().zip(&posed) {
            let rest = p.bbox_rest.corners();
            for (a, b) in edge_lengths(&rest).iter().zip(edge_lengths(&pp.corners)) {
                worst = worst.max((a - b).abs() / a.max(1e-12));
            }
            let (v0, v1) = (volume(&rest), volume(&pp.corners));
            worst = worst.max((v0 - v1).abs() / v0);
        }
        if k % 10 == 0 {
            let rest = pose_object(&obj, &Pose::rest(&obj)).map_err(|e| e.to_string())?;
            for (p, pp) in obj.parts.iter().zip(&rest) {
                ensure!(pp.corners == p.bbox_rest.corners(), "object {}: rest pose moved part {}", k / 10, p.id);
            }
        }
    }
    ensure!(worst <= 1e-9, "relative error {worst:e}");
    Ok(format!("1000 poses, worst relative error {worst:e}; rest exact"))
}

fn cabinet(category: Category) -> ArticulatedObject {
    let part = |id, label, min: [f64; 3], max: [f64; 3], joint, parent| Part {
        id,
        label,
        bbox_rest: Aabb::new(Vec3::from(min), Vec3::from(max)),
        joint,
        parent_id: parent,
    };
    let fixed = |x: f64, y: f64| JointSpec::fixed(Vec3::new(x, y, 0.25));
    ArticulatedObject {
        category,
        description: String::new(),
        parts: vec![
            part(0, PartLabel::Base, [-0.5, 0.0, -0.25], [0.5, 1.0, 0.25], JointSpec::fixed(Vec3::zero()), None),
            part(
                1,
                PartLabel::Door,
                [-0.5, 0.5, 0.2],
                [0.0, 1.0, 0.25],
                JointSpec::revolute(Vec3::new(-0.5, 0.5, 0.25), Vec3::new(0.0, -1.0, 0.0), 1.5),
                Some(0),
            ),
            part(2, PartLabel::Handle, [-0.1, 0.7, 0.25], [-0.08, 0.8, 0.28], fixed(-0.09, 0.75), Some(1)),
            part(
                3,
                PartLabel::Drawer,
                [-0.5, 0.0, -0.2],
                [0.5, 0.5, 0.25],
                JointSpec::prismatic(Vec3::new(0.0, 0.25, 0.25), Vec3::new(0.0, 0.0, 1.0), 0.3),
                Some(0),
            ),
        ],
    }
}

fn validator_coverage() -> Check {
    let rules = |o: &ArticulatedObject| validate_object(o).into_iter().map(|v| v.rule).collect::<Vec<_>>();
    let ok = cabinet(Category::StorageFurniture);
    ensure!(rules(&ok).is_empty(), "clean fixture rejected: {:?}", rules(&ok));
    let add = |o: &mut ArticulatedObject, label, parent| {
        let mut p = o.parts[2].clone();
        p.id = o.parts.len();
        p.label = label;
        p.parent_id = Some(parent);
        o.parts.push(p);
    };

    let mut r1 = ok.clone();
    add(&mut r1, PartLabel::Base, 0);
    ensure!(rules(&r1).contains(&Rule::R1), "second base not caught");
    let mut r2 = ok.clone();
    r2.parts[2].parent_id = Some(0);
    ensure!(rules(&r2).contains(&Rule::R2), "handle on base not caught");
    let mut two = ok.clone();
    add(&mut two, PartLabel::Knob, 1);
    ensure!(rules(&two).is_empty(), "two handles rejected");
    let mut three = two.clone();
    add(&mut three, PartLabel::Handle, 1);
    ensure!(rules(&three).contains(&Rule::R3), "three handles not caught");
    let mut tray = ok.clone();
    tray.parts[3].label = PartLabel::Tray;
    ensure!(rules(&tray).contains(&Rule::R4), "tray outside microwave not caught");
    tray.category = Category::Microwave;
    ensure!(rules(&tray).is_empty(), "microwave tray rejected: {:?}", rules(&tray));
    Ok("R1-R4 caught; passing fixtures accepted".into())
}

fn graph_parsing() -> Check {
    let parse = |s: &str| parse_graph_tree(s).map_err(|e| e.to_string());
    let g = parse(r#"{"base": [{"door": [{"handle": []}]}, {"drawer": [{"handle": []}]}]}"#)?;
    ensure!(g.labels.len() == 5 && g.edges.len() == 4, "{} nodes / {} edges", g.labels.len(), g.edges.len());
    let permuted = parse(r#"{"base": [{"drawer": [{"handle": []}]}, {"door": [{"handle": []}]}]}"#)?;
    ensure!(graph_accuracy(&permuted, &g), "sibling permutation rejected");
    let moved = parse(r#"{"base": [{"door": [{"handle": []}, {"handle": []}]}, {"drawer": []}]}"#)?;
    ensure!(!graph_accuracy(&moved, &g), "re-parented handle accepted");
    Ok("5 nodes / 4 edges; permutation accepted; re-parenting rejected".into())
}

fn matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix<f64> {
    Matrix {
        rows,
        cols,
        data: (0..rows * cols).map(|_| rng.gen_range(-1.5..1.5)).collect(),
    }
}

fn weights(d: usize, rng: &mut ChaCha8Rng) -> AttentionWeights<f64> {
    AttentionWeights {
        wq: matrix(d, d, rng),
        wk: matrix(d, d, rng),
        wv: matrix(d, d, rng),
    }
}

fn attention_reference() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut row_err: f64 = 0.0;
    for _ in 0..50 {
        let (n, m, d) = (rng.gen_range(1..7), rng.gen_range(1..9), rng.gen_range(1..6));
        let a = attention_weights(&matrix(n, d, &mut rng), &matrix(m, d, &mut rng), &weights(d, &mut rng));
        for i in 0..n {
            row_err = row_err.max((a.row(i).iter().sum::<f64>() - 1.0).abs());
        }
    }
    ensure!(row_err <= 1e-9, "row sum off by {row_err:e}");

    let x = matrix(2, 3, &mut rng);
    let (f_r, f_a) = (matrix(4, 3, &mut rng), matrix(4, 3, &mut rng));
    let zeros = [AttentionWeights::zeros(3), AttentionWeights::zeros(3), AttentionWeights::zeros(3)];
    let y = dual_state_update(&x, &f_r, &f_a, &zeros).map_err(|e| e.to_string())?;
    ensure!(y == x, "zero weights changed X");

    let p = [weights(3, &mut rng), weights(3, &mut rng), weights(3, &mut rng)];
    let jac = dual_state_jacobian(&x, &f_r, &f_a, &p).map_err(|e| e.to_string())?;
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for c in 0..6 {
        let (mut xp, mut xm) = (x.clone(), x.clone());
        xp.data[c] += h;
        xm.data[c] -= h;
        let yp = dual_state_update(&xp, &f_r, &f_a, &p).map_err(|e| e.to_string())?;
        let ym = dual_state_update(&xm, &f_r, &f_a, &p).map_err(|e| e.to_string())?;
        for r in 0..6 {
            let fd = (yp.data[r] - ym.data[r]) / (2.0 * h);
            worst = worst.max((fd - jac.at(r, c)).abs() / jac.at(r, c).abs().max(1.0));
        }
    }
    ensure!(worst <= 1e-4, "Jacobian relative error {worst:e}");
    Ok(format!("row sums within {row_err:e}; zero weights return X; Jacobian error {worst:e}"))
}

fn tree(root: &Path) -> Vec<(String, Vec<u8>)> {
    fn walk(dir: &Path, root: &Path, out: &mut Vec<(String, Vec<u8>)>) {
        for e in std::fs::read_dir(dir).unwrap() {
            let path = e.unwrap().path();
            if path.is_dir() {
                walk(&path, root, out);
            } else {
                let rel = path.strip_prefix(root).unwrap().display().to_string();
                out.push((rel, std::fs::read(&path).unwrap()));
            }
        }
    }
    let mut out = Vec::new();
    walk(root, root, &mut out);
    out.sort();
    out
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut trees = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let o = articraft(&["gen", "--count", "120", "--seed", "9", "--augment", "full", "--out", out.to_str().unwrap()]);
        ensure!(o.status.success(), "gen failed: {}", String::from_utf8_lossy(&o.stderr));
        trees.push(tree(&out));
    }
    ensure!(!trees[0].is_empty(), "empty output");
    ensure!(trees[0].len() == trees[1].len(), "file counts differ");
    for (a, b) in trees[0].iter().zip(&trees[1]) {
        ensure!(a == b, "{} differs", a.0);
    }
    Ok(format!("{} files byte-identical", trees[0].len()))
}

fn main() {
    let checks: [(&str, fn() -> Check); 10] = [
        ("dataset statistics", dataset_statistics),
        ("self-evaluation identity", self_evaluation),
        ("GIoU oracle equivalence", giou_oracle),
        ("Chamfer oracle equivalence", chamfer_oracle),
        ("URDF round-trip", urdf_round_trip),
        ("FK rigidity", fk_rigidity),
        ("validator coverage", validator_coverage),
        ("graph parsing", graph_parsing),
        ("attention reference", attention_reference),
        ("determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (name, check) in checks {
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match result {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                println!("FAIL  {name}: {why}");
                failed.push(name);
            }
        }
    }
    println!("{} of {} criteria pass", checks.len() - failed.len(), checks.len());
    if !failed.is_empty() {
        eprintln!("failing criteria: {failed:?}");
        std::process::exit(1);
    }
}
