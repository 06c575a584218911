//! Manifest templates that regenerate the data behind each figure.

use std::path::Path;

use serde_json::{json, Value};

use crate::manifest::ManifestError;
use crate::Failure;
use fbx::measures::MeasureSpec;
use fbx::scaling::class_member;

pub const NAMES: [&str; 13] = [
    "fbes1", "fbes2", "wave2", "wave4", "fbes3", "figwave", "fbes4", "fjulal", "fjula2", "distr", "zorro", "distr2",
    "bernardo",
];

/// One manifest file and the subcommands to run on it.
pub struct Recipe {
    pub file: String,
    pub commands: Vec<&'static str>,
    pub manifest: Value,
}

const FOUR_PER_DECADE: &str = "10:*1.7782794100389228:10000";
const OMEGA_SURFACE: &str = "0.0001:*1.333521432163324:0.1";
const N_SURFACE: &str = "1:*1.4142135623730951:1024";

fn julia29() -> Value {
    json!({ "variant": "julia", "lambda": 2.9 })
}

fn class_d0() -> f64 {
    2f64.ln() / (5f64.ln() - 2f64.ln())
}

/// The three two-map members with `D_q = D_0` for all q.
fn members() -> Vec<(&'static str, Value)> {
    [("a", 0.4), ("b", 0.3), ("c", 0.2)]
        .iter()
        .map(|&(tag, d1)| {
            let ifs = class_member(class_d0(), d1).expect("class members are valid");
            (tag, MeasureSpec::LinearIfs(ifs).to_json_value())
        })
        .collect()
}

fn one(file: &str, commands: Vec<&'static str>, mut manifest: Value) -> Recipe {
    manifest["out"] = json!(file);
    Recipe { file: file.to_string(), commands, manifest }
}

pub fn recipe(name: &str) -> Option<Vec<Recipe>> {
    let member_b = members()[1].1.clone();
    let r = match name {
        "fbes1" => vec![one("fbes1", vec!["evolve"], json!({ "measure": julia29(), "t": "0:0.02:10", "n": 4 }))],
        "fbes2" => vec![one("fbes2", vec!["evolve"], json!({ "measure": member_b, "t": "0:0.5:2000", "n": 1 }))],
        "wave2" => {
            vec![one("wave2", vec!["evolve"], json!({ "measure": { "variant": "arcsine" }, "t": "0:0.5:100", "n": 128 }))]
        }
        "wave4" => vec![one("wave4", vec!["evolve"], json!({ "measure": julia29(), "t": "0:0.5:100", "n": 128 }))],
        "fbes3" => vec![one(
            "fbes3",
            vec!["moments"],
            json!({ "measure": julia29(), "alphas": [0.0], "omega_grid": OMEGA_SURFACE, "n_grid": N_SURFACE }),
        )],
        "fbes4" => vec![one(
            "fbes4",
            vec!["fit-gamma"],
            json!({ "measure": julia29(), "omega_grid": OMEGA_SURFACE, "n_grid": N_SURFACE }),
        )],
        "figwave" => vec![one(
            "figwave",
            vec!["evolve", "fit-front"],
            json!({
                "measure": member_b,
                "t": "10:*3.1622776601683795:3200",
                "n": 4096,
                "t_grid": FOUR_PER_DECADE,
                "epsilon": 1e-3
            }),
        )],
        "fjulal" | "fjula2" => {
            let averaging = if name == "fjulal" { "gaussian" } else { "instantaneous" };
            vec![one(
                name,
                vec!["moments"],
                json!({
                    "measure": julia29(),
                    "alphas": [1.0],
                    "omega_grid": OMEGA_SURFACE,
                    "n_grid": N_SURFACE,
                    "averaging": averaging
                }),
            )]
        }
        "distr" => members()
            .into_iter()
            .map(|(tag, m)| one(&format!("distr_{tag}"), vec!["measure-info"], json!({ "measure": m, "level": 12 })))
            .collect(),
        "zorro" => vec![
            one(
                "zorro_class",
                vec!["exp-class"],
                json!({
                    "d0": class_d0(),
                    "delta1": [0.4, 0.3, 0.2],
                    "alphas": "0.5:0.5:3",
                    "t_grid": FOUR_PER_DECADE
                }),
            ),
            one(
                "zorro_threemap",
                vec!["exp-threemap"],
                json!({
                    "delta": 3f64.powf(-1.0 / class_d0()),
                    "offsets": [0.0, 0.25],
                    "alphas": "0.5:0.5:3",
                    "t_grid": FOUR_PER_DECADE
                }),
            ),
        ],
        "distr2" => members()
            .into_iter()
            .map(|(tag, m)| {
                one(&format!("distr2_{tag}"), vec!["dims"], json!({ "measure": m, "equilibrium": 512, "q": "0.5,1,2" }))
            })
            .collect(),
        "bernardo" => members()
            .into_iter()
            .flat_map(|(tag, m)| {
                [
                    one(&format!("bernardo_{tag}_exact"), vec!["dims"], json!({ "measure": m, "q": "-2:0.25:3" })),
                    one(
                        &format!("bernardo_{tag}_equilibrium"),
                        vec!["dims"],
                        json!({ "measure": m, "equilibrium": 512, "q": "-2:0.25:3" }),
                    ),
                ]
            })
            .collect(),
        _ => return None,
    };
    Some(r)
}

/// Writes `<file>.json` manifests into `out` and prints the commands to run.
pub fn write(names: &[String], out: &Path) -> Result<Vec<Recipe>, Failure> {
    let names: Vec<String> = if names.is_empty() { NAMES.iter().map(|s| s.to_string()).collect() } else { names.to_vec() };
    let mut all = Vec::new();
    for name in &names {
        let rs = recipe(name).ok_or_else(|| ManifestError(format!("unknown recipe {name:?}; known: {}", NAMES.join(", "))))?;
        all.extend(rs);
    }
    std::fs::create_dir_all(out)?;
    for r in &all {
        let path = out.join(format!("{}.json", r.file));
        std::fs::write(&path, serde_json::to_string_pretty(&r.manifest).expect("json") + "\n")?;
        for c in &r.commands {
            println!("fbx {c} --manifest {}", path.display());
        }
    }
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifest::Manifest;

    #[test]
    fn every_recipe_parses_as_a_manifest() {
        for name in NAMES {
            for r in recipe(name).unwrap() {
                let m: Manifest = serde_json::from_value(r.manifest.clone()).unwrap();
                if let Some(spec) = m.measure().unwrap() {
                    spec.validate().unwrap();
                }
                assert!(!r.commands.is_empty());
            }
        }
        assert!(recipe("nope").is_none());
    }
}
