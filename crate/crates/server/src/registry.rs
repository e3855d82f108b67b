//! Graph lookup and the per-graph cache of scene assets shared by sessions.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use multilayout_core::config::EngineConfig;
use multilayout_core::io::load_graph;
use multilayout_core::scene::SceneAssets;
use multilayout_core::synth::{preset, Preset};
use multilayout_core::{Error, Graph, Result};

const EXTENSIONS: [&str; 7] = ["json", "gml", "graphml", "xml", "txt", "edges", "csv"];

#[derive(Debug, Default)]
pub struct GraphRegistry {
    dir: Option<PathBuf>,
    /// Keyed by graph name and the canonical JSON of the engine config.
    cache: Mutex<HashMap<(String, String), Arc<SceneAssets>>>,
}

impl GraphRegistry {
    pub fn new(dir: Option<PathBuf>) -> Self {
        GraphRegistry {
            dir,
            cache: Mutex::default(),
        }
    }

    fn file_for(&self, name: &str) -> Option<PathBuf> {
        let dir = self.dir.as_deref()?;
        let direct = dir.join(name);
        if direct.is_file() {
            return Some(direct);
        }
        EXTENSIONS
            .iter()
            .map(|ext| dir.join(format!("{name}.{ext}")))
            .find(|p| p.is_file())
    }

    /// A file in the graph directory, else a synthetic preset.
    pub fn resolve(&self, name: &str) -> Result<Graph> {
        if name.is_empty() || name.contains(['/', '\\']) || name.contains("..") {
            return Err(Error::UnknownId(format!("graph {name:?}")));
        }
        if let Some(path) = self.file_for(name) {
            return load_graph(&path, None).map(|(g, _)| g);
        }
        match name.parse::<Preset>() {
            Ok(p) => Ok(preset(p, 0).graph),
            Err(_) => Err(Error::UnknownId(format!("graph {name:?}"))),
        }
    }

    /// Scene assets for `name` under `config`, computed once and shared.
    pub fn load(&self, name: &str, config: &EngineConfig) -> Result<Arc<SceneAssets>> {
        let key = (
            name.to_owned(),
            serde_json::to_string(config).map_err(|e| Error::InvalidConfig(e.to_string()))?,
        );
        if let Some(hit) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(Arc::clone(hit));
        }
        let assets = Arc::new(SceneAssets::from_graph(self.resolve(name)?, config.clone())?);
        let mut cache = self.cache.lock().expect("cache lock");
        Ok(Arc::clone(cache.entry(key).or_insert(assets)))
    }

    /// Graph files in the directory (by stem) followed by the presets.
    pub fn available(&self) -> Vec<String> {
        let mut names: Vec<String> = self
            .dir
            .as_deref()
            .and_then(|d| std::fs::read_dir(d).ok())
            .into_iter()
            .flatten()
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file() && has_graph_extension(p))
            .filter_map(|p| p.file_stem().map(|s| s.to_string_lossy().into_owned()))
            .collect();
        names.sort();
        names.extend(Preset::ALL.iter().map(|p| p.name().to_owned()));
        names
    }
}

fn has_graph_extension(p: &Path) -> bool {
    p.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
}
