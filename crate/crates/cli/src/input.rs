//! Graph and configuration inputs shared by the subcommands.

use std::path::Path;

use anyhow::{bail, Context};
use multilayout_core::config::EngineConfig;
use multilayout_core::io::load_graph;
use multilayout_core::synth::{preset, Preset};
use multilayout_core::Graph;
use serde_json::Value;

/// A graph file, or a synthetic preset name when no such file exists.
pub fn graph(arg: &str) -> anyhow::Result<Graph> {
    let path = Path::new(arg);
    if path.exists() {
        let (g, report) = load_graph(path, None).with_context(|| format!("loading {arg}"))?;
        if report.merged_parallel > 0 || report.self_loops > 0 {
            eprintln!(
                "note: {} parallel edges merged, {} self-loops kept",
                report.merged_parallel, report.self_loops
            );
        }
        return Ok(g);
    }
    match arg.parse::<Preset>() {
        Ok(p) => Ok(preset(p, 0).graph),
        Err(_) => bail!("{arg}: no such file and not a preset (easy, medium, hard, stress)"),
    }
}

/// `a.b.c=value`, where the value is JSON or else a plain string.
fn assignment(text: &str) -> anyhow::Result<Value> {
    let (key, raw) = text
        .split_once('=')
        .with_context(|| format!("--set {text}: expected key=value"))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_owned()));
    let mut doc = value;
    for part in key.rsplit('.') {
        doc = serde_json::json!({ part: doc });
    }
    Ok(doc)
}

/// Defaults, then the config file, then `--set` overrides, then the seed.
pub fn config(file: Option<&Path>, sets: &[String], seed: Option<u64>) -> anyhow::Result<EngineConfig> {
    let mut cfg = match file {
        Some(p) => EngineConfig::load(p).with_context(|| format!("reading config {}", p.display()))?,
        None => EngineConfig::default(),
    };
    for s in sets {
        cfg = cfg.merged(&assignment(s)?)?;
    }
    if let Some(seed) = seed {
        cfg.louvain.seed = seed;
        cfg.force.seed = seed;
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dotted_assignments_nest() {
        assert_eq!(
            assignment("force.kRepulsion=4").unwrap(),
            serde_json::json!({"force":{"kRepulsion":4}})
        );
        let cfg = config(None, &["bundling.expandedIntraStyle=spline".into()], Some(5)).unwrap();
        assert_eq!(cfg.force.seed, 5);
        assert!(config(None, &["force".into()], None).is_err());
    }
}
