//! Engine configuration: one JSON document overriding any module default.
//!
//! ```json
//! {
//!   "louvain":   { "resolution": 1.0, "seed": 0, "maxLevels": 10, "minModularityGain": 1e-7 },
//!   "force":     { "kRepulsion": 10.0, "kGravity": 1.0, "maxIterations": 500, "convergenceTol": 0.001,
//!                  "seed": 0, "useWeights": true },
//!   "overview":  { "miniatureRadius": 0.35, "center": [0.0, 1.4, 1.0], "leafRadius": 1.0, "packingConstant": 1.15 },
//!   "spherical": { "sphereRadius": 10.0, "fovHorizontal": 178.0, "fovVertical": 178.0, "cellMargin": 0.05,
//!                  "forward": [0.0, 0.0, 1.0], "eye": [0.0, 1.6, 0.0] },
//!   "bundling":  { "overviewBeta": 0.0, "sphericalBeta": 0.7, "projectedMainBeta": 0.9,
//!                  "expandedIntraStyle": "straight", "radialDip": 0.3, "samples": 24 },
//!   "scene":     { "transitionDuration": 1.5, "floatingDistance": 1.6, "floatingRadius": 0.8,
//!                  "floatingArcDegrees": 40.0, "projectedRadius": 3.0, "floorHeight": 0.0, "floorOffset": 0.02 }
//! }
//! ```
//!
//! Every key is optional. The force section's `dims` and `bounds` are set per
//! use by the layouts and ignored here.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bundling::BundlePolicy;
use crate::community::LouvainConfig;
use crate::error::{Error, Result};
use crate::force::ForceConfig;
use crate::overview::OverviewConfig;
use crate::scene::SceneConfig;
use crate::spherical::SphericalConfig;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    pub louvain: LouvainConfig,
    pub force: ForceConfig,
    pub overview: OverviewConfig,
    pub spherical: SphericalConfig,
    pub bundling: BundlePolicy,
    pub scene: SceneConfig,
}

impl EngineConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: EngineConfig = serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Applies a partial JSON document on top of this configuration.
    pub fn merged(&self, patch: &serde_json::Value) -> Result<Self> {
        let mut base = serde_json::to_value(self).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        merge(&mut base, patch);
        let cfg: EngineConfig = serde_json::from_value(base).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.louvain.validate()?;
        self.force.validate()?;
        self.overview.validate()?;
        self.spherical.validate()?;
        self.bundling.validate()?;
        self.scene.validate()
    }
}

fn merge(base: &mut serde_json::Value, patch: &serde_json::Value) {
    match (base, patch) {
        (serde_json::Value::Object(b), serde_json::Value::Object(p)) => {
            for (k, v) in p {
                merge(b.entry(k.clone()).or_insert(serde_json::Value::Null), v);
            }
        }
        (b, p) => *b = p.clone(),
    }
}
