use crate::Failure;
use anyhow::{anyhow, Context, Result};
use articraft::agents::{extract_json, graph_tree_json, parse_graph_tree_for, reason_graph, AgentError, FewShot, HttpClient};
use articraft::kinematics::check_plausibility;
use articraft::metrics::{canonical_form, evaluate, reports_to_csv, EvalConfig};
use articraft::urdf::{emit_urdf, parse_urdf};
use articraft::violation::summarize;
use articraft::{object_from_json, object_to_json, validate_object, ArticulatedObject, Category};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn load_object(path: &Path) -> Result<ArticulatedObject> {
    object_from_json(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

/// Object files of a dataset keyed by sample id: `<id>/object.json`
/// subdirectories and loose `<id>.json` files (the manifest excluded).
fn dataset(dir: &Path) -> Result<BTreeMap<String, PathBuf>> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let path = entry?.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()).map(str::to_string) else {
            continue;
        };
        if path.is_dir() {
            let obj = path.join("object.json");
            if obj.is_file() {
                out.insert(name, obj);
            }
        } else if let Some(stem) = name.strip_suffix(".json") {
            if stem != "manifest" {
                out.insert(stem.to_string(), path);
            }
        }
    }
    Ok(out)
}

pub fn eval(pred: &Path, gt: &Path, as_ratio: f64, points: usize, seed: u64, out: Option<&Path>) -> Result<(), Failure> {
    let cfg = EvalConfig {
        as_ratio,
        points_per_part: points,
        seed,
    };
    let pairs: Vec<(String, PathBuf, PathBuf)> = if pred.is_file() && gt.is_file() {
        let id = pred.file_stem().and_then(|s| s.to_str()).unwrap_or("sample").to_string();
        vec![(id, pred.to_path_buf(), gt.to_path_buf())]
    } else {
        let (p, g) = (dataset(pred)?, dataset(gt)?);
        for id in p.keys().filter(|k| !g.contains_key(*k)) {
            eprintln!("skipping {id}: no ground truth");
        }
        for id in g.keys().filter(|k| !p.contains_key(*k)) {
            eprintln!("skipping {id}: no prediction");
        }
        p.into_iter()
            .filter_map(|(id, pp)| g.get(&id).map(|gp| (id, pp, gp.clone())))
            .collect()
    };
    let mut rows = Vec::new();
    for (id, pp, gp) in pairs {
        let report = evaluate(&load_object(&pp)?, &load_object(&gp)?, &cfg).with_context(|| format!("evaluating {id}"))?;
        rows.push((id, report));
    }
    let csv = reports_to_csv(&rows);
    match out {
        Some(p) => write(p, &csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

pub fn stats(data: &Path) -> Result<(), Failure> {
    let files = dataset(data)?;
    let mut errors = Vec::new();
    let mut parts = 0usize;
    let mut n = 0usize;
    for (id, path) in &files {
        match load_object(path) {
            Ok(o) => {
                n += 1;
                parts += o.parts.len();
            }
            Err(e) => errors.push(format!("{id}: {e:#}")),
        }
    }
    let avg = if n == 0 { 0.0 } else { parts as f64 / n as f64 };
    println!("{n} objects, avg {avg:.2} parts");
    if errors.is_empty() {
        Ok(())
    } else {
        Err(Failure::Validation(errors.join("\n")))
    }
}

pub fn validate(data: &Path) -> Result<(), Failure> {
    let files = dataset(data)?;
    let mut errors = Vec::new();
    for (id, path) in &files {
        let obj = match load_object(path) {
            Ok(o) => o,
            Err(e) => {
                errors.push(format!("{id}: {e:#}"));
                continue;
            }
        };
        let mut v = validate_object(&obj);
        if v.is_empty() {
            v = check_plausibility(&obj);
        }
        if !v.is_empty() {
            errors.push(format!("{id}: {}", summarize(&v)));
        }
    }
    if errors.is_empty() {
        println!("{} objects valid", files.len());
        Ok(())
    } else {
        Err(Failure::Validation(format!(
            "{} of {} objects failed:\n{}",
            errors.len(),
            files.len(),
            errors.join("\n")
        )))
    }
}

pub fn urdf_export(input: &Path, output: &Path) -> Result<(), Failure> {
    let obj = load_object(input)?;
    let xml = emit_urdf(&obj).map_err(|e| Failure::Validation(format!("{}: {e}", input.display())))?;
    write(output, &xml)?;
    Ok(())
}

pub fn urdf_import(input: &Path, output: &Path) -> Result<(), Failure> {
    let obj = parse_urdf(&read(input)?).map_err(|e| Failure::Validation(format!("{}: {e}", input.display())))?;
    write(output, &object_to_json(&obj))?;
    Ok(())
}

pub fn graph(images: &[PathBuf], reply: Option<&Path>, examples: &[PathBuf], category: Option<&str>) -> Result<(), Failure> {
    let category: Option<Category> = category.map(str::parse).transpose().map_err(|e: String| anyhow!(e))?;
    let invalid = |e: AgentError| Failure::Validation(e.to_string());
    let graph = match reply {
        Some(path) => {
            let text = read(path)?;
            let json = extract_json(&text).ok_or(AgentError::NoJson).map_err(invalid)?;
            parse_graph_tree_for(json, category).map_err(invalid)?
        }
        None => {
            let pair: [PathBuf; 2] = images
                .to_vec()
                .try_into()
                .map_err(|_| anyhow!("--images CLOSED OPEN is required without --reply"))?;
            let few_shot = examples
                .chunks(3)
                .map(|c| {
                    Ok(FewShot {
                        images: [c[0].clone(), c[1].clone()],
                        answer: read(&c[2])?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let client = HttpClient::from_env().map_err(anyhow::Error::from)?;
            match reason_graph(&client, pair, &few_shot, category) {
                Ok(g) => g,
                Err(e @ (AgentError::Transport(_) | AgentError::Image { .. } | AgentError::Config(_))) => {
                    return Err(Failure::System(e.into()))
                }
                Err(e) => return Err(invalid(e)),
            }
        }
    };
    println!("{}", graph_tree_json(&graph).unwrap_or_default());
    println!("{}", canonical_form(&graph).unwrap_or_default());
    Ok(())
}
