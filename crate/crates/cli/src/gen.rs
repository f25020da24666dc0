//! Dataset generation: layout → description → assembly → optional
//! augmentation → filter → files on disk.

use crate::config::{AgentMode, AugmentMode, GenConfig};
use anyhow::{bail, Context, Result};
use articraft::agents::{extract_json, filter_object, AgentClient, AgentKind, AgentRequest, FilterInput, HttpClient};
use articraft::augment::{augment_joint_level, augment_part_level, JointAugment, PartAugment};
use articraft::kinematics::{open_pose, pose_object, points_to_ply, Pose};
use articraft::layout::{
    describe_layout, parse_layout, sample_layout, validate_layout, Complexity, GridLayout, LAYOUT_SCHEMA,
};
use articraft::retrieval::{object_mesh_obj, sample_object_points, Catalog};
use articraft::urdf::emit_urdf;
use articraft::violation::summarize;
use articraft::{assemble, object_to_json, validate_object, ArticulatedObject, AssemblyConfig, Category};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};
use std::path::Path;

/// Tries per sample before the run fails.
pub const MAX_ATTEMPTS: u64 = 5;

struct Accepted {
    obj: ArticulatedObject,
    category: Category,
    complexity: Complexity,
    seed: u64,
    attempts: u64,
    augment: &'static str,
}

struct Rejection {
    index: usize,
    seed: u64,
    reason: String,
}

/// Seed of attempt `a` for sample `i`: attempts never collide across
/// samples, and nothing depends on scheduling.
fn attempt_seed(cfg: &GenConfig, i: usize, a: u64) -> u64 {
    cfg.seed.wrapping_add(i as u64).wrapping_add(a.wrapping_mul(cfg.count as u64))
}

fn remote_layout(client: &dyn AgentClient, category: Category, complexity: Complexity) -> Result<(GridLayout, String)> {
    let roller = AgentRequest::new(
        AgentKind::DescriptionRoller,
        format!("Category: {category}. Complexity level: {complexity}."),
        vec![],
    )?;
    let description = client.complete(&roller)?.trim().trim_matches('"').to_string();
    let builder = AgentRequest::new(
        AgentKind::LayoutBuilder,
        format!(
            "Description: \"{description}\"\nCategory: {category}\nOutput the info dict as JSON conforming to this schema:\n{LAYOUT_SCHEMA}"
        ),
        vec![],
    )?;
    let reply = client.complete(&builder)?;
    let layout = parse_layout(extract_json(&reply).context("layout builder reply has no JSON")?)?;
    let v = validate_layout(&layout);
    if !v.is_empty() {
        bail!("layout builder output invalid: {}", summarize(&v));
    }
    Ok((layout, description))
}

fn augment(obj: ArticulatedObject, rng: &mut ChaCha8Rng) -> (ArticulatedObject, &'static str) {
    let seed = rng.gen();
    let result = match rng.gen_range(0..7) {
        0 => augment_part_level(&obj, PartAugment::ReplaceAttachment, seed).map(|o| (o, "replace_attachment")),
        1 => augment_part_level(&obj, PartAugment::Rescale, seed).map(|o| (o, "rescale")),
        2 => augment_part_level(&obj, PartAugment::UpsideDown, seed).map(|o| (o, "upside_down")),
        3 => {
            let partner = sample_layout(obj.category, Complexity::Simple, seed)
                .ok()
                .and_then(|l| assemble(&l, &AssemblyConfig::default(), seed).ok());
            match partner {
                Some(p) => augment_part_level(&obj, PartAugment::Stack(&p), seed).map(|o| (o, "stack")),
                None => return (obj, "none"),
            }
        }
        4 => augment_joint_level(&obj, JointAugment::RevoluteToPrismatic, seed).map(|o| (o, "revolute_to_prismatic")),
        5 => augment_joint_level(&obj, JointAugment::FlipRevoluteDirection, seed).map(|o| (o, "flip_revolute_direction")),
        _ => augment_joint_level(&obj, JointAugment::FixJoint, seed).map(|o| (o, "fix_joint")),
    };
    // Ineligible objects (no door to flip, no handle to swap) stay as they are.
    result.unwrap_or((obj, "none"))
}

fn attempt(cfg: &GenConfig, client: Option<&(dyn AgentClient + Sync)>, seed: u64) -> Result<(ArticulatedObject, Category, Complexity, &'static str)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let category = cfg
        .category
        .unwrap_or_else(|| Category::ALL[rng.gen_range(0..Category::ALL.len())]);
    let complexity = cfg.complexity.unwrap_or_else(|| cfg.mix.pick(rng.gen()));
    let (layout, description) = match (cfg.agents, client) {
        (AgentMode::Remote, Some(c)) => remote_layout(c, category, complexity)?,
        _ => {
            let l = sample_layout(category, complexity, seed)?;
            let d = describe_layout(&l);
            (l, d)
        }
    };
    let mut obj = assemble(&layout, &AssemblyConfig::default(), seed)?;
    obj.description = description;
    let (obj, aug) = match cfg.augment {
        AugmentMode::Full => augment(obj, &mut rng),
        AugmentMode::None => (obj, "none"),
    };
    let v = validate_object(&obj);
    if !v.is_empty() {
        bail!("invalid object: {}", summarize(&v));
    }
    // No renderer here, so the visual filter always judges geometry.
    if !filter_object(None, FilterInput::Offline(&obj))? {
        let v = articraft::kinematics::check_plausibility(&obj);
        bail!("rejected by filter: {}", summarize(&v));
    }
    Ok((obj, category, complexity, aug))
}

fn generate(cfg: &GenConfig, client: Option<&(dyn AgentClient + Sync)>, i: usize) -> (Option<Accepted>, Vec<Rejection>) {
    let mut rejected = Vec::new();
    for a in 0..MAX_ATTEMPTS {
        let seed = attempt_seed(cfg, i, a);
        match attempt(cfg, client, seed) {
            Ok((obj, category, complexity, augment)) => {
                let acc = Accepted {
                    obj,
                    category,
                    complexity,
                    seed,
                    attempts: a + 1,
                    augment,
                };
                return (Some(acc), rejected);
            }
            Err(e) => rejected.push(Rejection {
                index: i,
                seed,
                reason: format!("{e:#}"),
            }),
        }
    }
    (None, rejected)
}

fn write_object(dir: &Path, obj: &ArticulatedObject, points_per_part: usize, seed: u64, catalog: &Catalog) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let write = |name: &str, text: String| {
        let p = dir.join(name);
        std::fs::write(&p, text).with_context(|| format!("writing {}", p.display()))
    };
    write("object.json", object_to_json(obj))?;
    write("object.urdf", emit_urdf(obj)?)?;
    write("description.txt", format!("{}\n", obj.description))?;
    let rest = Pose::rest(obj);
    let open = open_pose(obj, 1.0, None);
    for (tag, pose) in [("rest", &rest), ("open", &open)] {
        write(&format!("{tag}.obj"), object_mesh_obj(obj, pose, Some(catalog))?)?;
        let posed = pose_object(obj, pose)?;
        let pts = sample_object_points(obj, &posed, Some(catalog), points_per_part, seed);
        write(&format!("{tag}.ply"), points_to_ply(&pts))?;
    }
    Ok(())
}

pub struct GenSummary {
    pub written: usize,
    pub rejected: usize,
}

pub fn run(cfg: &GenConfig) -> Result<GenSummary> {
    std::fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    let http = match cfg.agents {
        AgentMode::Remote => Some(HttpClient::from_env()?),
        AgentMode::Offline => None,
    };
    let client = http.as_ref().map(|c| c as &(dyn AgentClient + Sync));
    let catalog = Catalog::builtin();

    let results: Vec<(Option<Accepted>, Vec<Rejection>)> = (0..cfg.count)
        .into_par_iter()
        .map(|i| generate(cfg, client, i))
        .collect();

    let mut objects = Vec::new();
    let mut rejections = Vec::new();
    let mut failed = Vec::new();
    for (i, (acc, rej)) in results.into_iter().enumerate() {
        for r in &rej {
            eprintln!("sample {} (seed {}) rejected: {}", r.index, r.seed, r.reason);
        }
        rejections.extend(rej);
        match acc {
            Some(a) => objects.push((format!("obj_{i:05}"), a)),
            None => failed.push(i),
        }
    }
    if !failed.is_empty() {
        bail!(
            "{} sample(s) failed {MAX_ATTEMPTS} attempts each (first: {}); see rejection log above",
            failed.len(),
            failed[0]
        );
    }

    objects
        .par_iter()
        .try_for_each(|(id, a)| write_object(&cfg.out.join(id), &a.obj, cfg.points_per_part, a.seed, &catalog))?;

    let entries: Vec<Value> = objects
        .iter()
        .map(|(id, a)| {
            json!({
                "id": id,
                "category": a.category.name(),
                "complexity": a.complexity.name(),
                "seed": a.seed,
                "attempts": a.attempts,
                "n_parts": a.obj.parts.len(),
                "augment": a.augment,
                "description": a.obj.description,
            })
        })
        .collect();
    let rejected: Vec<Value> = rejections
        .iter()
        .map(|r| json!({"sample": r.index, "seed": r.seed, "reason": r.reason}))
        .collect();
    let n_parts: usize = objects.iter().map(|(_, a)| a.obj.parts.len()).sum();
    let manifest = json!({
        "config": cfg.to_value(),
        "count": objects.len(),
        "mean_parts": if objects.is_empty() { 0.0 } else { n_parts as f64 / objects.len() as f64 },
        "objects": entries,
        "rejected": rejected,
    });
    let path = cfg.out.join("manifest.json");
    std::fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(GenSummary {
        written: objects.len(),
        rejected: rejections.len(),
    })
}
