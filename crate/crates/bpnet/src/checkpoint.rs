//! Versioned JSON checkpoints: model config, data settings and every
//! parameter tensor. Floats are written in shortest round-trip form, so a
//! save/load cycle is bit-exact.

use std::fs;
use std::path::Path;

use bpnet_core::model::{BPNetModel, ModelConfig};
use bpnet_core::nn::ParamStore;
use serde::{Deserialize, Serialize};

use crate::config::DataConfig;
use crate::error::{CoreContext, Error, Result};
use crate::records::write_atomic;

pub const CHECKPOINT_MAGIC: &str = "bpnet-checkpoint";
pub const CHECKPOINT_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CheckpointFile {
    magic: String,
    format_version: u64,
    model: ModelConfig,
    data: DataConfig,
    params: ParamStore,
}

pub fn checkpoint_json(model: &BPNetModel, data: &DataConfig) -> String {
    let file = CheckpointFile {
        magic: CHECKPOINT_MAGIC.into(),
        format_version: CHECKPOINT_VERSION,
        model: model.config.clone(),
        data: data.clone(),
        params: model.params.clone(),
    };
    let mut s = serde_json::to_string(&file).expect("checkpoint serializes");
    s.push('\n');
    s
}

pub fn save_checkpoint(path: &Path, model: &BPNetModel, data: &DataConfig) -> Result<()> {
    write_atomic(path, checkpoint_json(model, data).as_bytes())
}

pub fn parse_checkpoint(text: &str) -> Result<(BPNetModel, DataConfig)> {
    let value: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| Error::IncompatibleCheckpoint(format!("unreadable JSON: {e}")))?;
    if value.get("magic").and_then(|m| m.as_str()) != Some(CHECKPOINT_MAGIC) {
        return Err(Error::IncompatibleCheckpoint("missing or wrong magic".into()));
    }
    match value.get("format_version").and_then(|v| v.as_u64()) {
        Some(CHECKPOINT_VERSION) => {}
        Some(v) => return Err(Error::IncompatibleCheckpoint(format!("unknown format version {v}"))),
        None => return Err(Error::IncompatibleCheckpoint("missing format_version".into())),
    }
    let file: CheckpointFile =
        serde_json::from_value(value).map_err(|e| Error::IncompatibleCheckpoint(e.to_string()))?;
    let model = BPNetModel::from_parts(&file.model, file.params).context(|| "checkpoint parameters".into())?;
    Ok((model, file.data))
}

pub fn load_checkpoint(path: &Path) -> Result<(BPNetModel, DataConfig)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_checkpoint(&text)
}
