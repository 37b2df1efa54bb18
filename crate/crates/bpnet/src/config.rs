//! Run configuration: model, training and data settings in one JSON file.
//! Every field is required and unknown fields are rejected.

use std::fs;
use std::path::Path;

use bpnet_core::dataset::{SplitSpec, TargetScaling};
use bpnet_core::model::ModelConfig;
use bpnet_core::train::TrainConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CoreContext, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub window_len: usize,
    pub stride: usize,
    pub split: SplitSpec,
    pub scaling: TargetScaling,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            window_len: 1024,
            stride: 256,
            split: SplitSpec::default(),
            scaling: TargetScaling::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub data: DataConfig,
}

impl RunConfig {
    pub fn validate(&self) -> bpnet_core::Result<()> {
        self.model.validate()?;
        self.train.validate()?;
        self.data.split.validate()?;
        if self.data.window_len == 0 || self.data.stride == 0 {
            return Err(bpnet_core::Error::InvalidConfig("window_len and stride must be >= 1".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str, origin: &Path) -> Result<Self> {
        let config: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })?;
        config.validate().context(|| origin.display().to_string())?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, path)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }
}
