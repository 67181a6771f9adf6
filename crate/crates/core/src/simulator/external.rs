//! File-exchange hook for external field solvers.
//!
//! The configured command template may contain `{layout}` and `{result}`
//! placeholders, which are replaced by the request and response paths. The
//! tool must write `{"L_h": .., "R_ohm": .., "SRF_hz": .., "Q": ..}` to the
//! response path. Area is always computed locally from the layout.

use super::Metrics;
use crate::layout_file::LayoutRecord;
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExternalError {
    #[error("external tool failed: {0}")]
    ToolFailure(String),
    #[error("cannot parse external result: {0}")]
    Parse(String),
    #[error("external tool timed out after {0:?}")]
    Timeout(Duration),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalToolConfig {
    pub command: String,
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
}

fn default_timeout() -> f64 {
    60.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ToolResponse {
    #[serde(rename = "L_h")]
    inductance: f64,
    #[serde(rename = "R_ohm")]
    resistance: f64,
    #[serde(rename = "SRF_hz")]
    srf: f64,
    #[serde(rename = "Q")]
    q_factor: f64,
}

/// Runs the external tool on an already written layout file.
pub fn external_adapter(
    tool: &ExternalToolConfig,
    layout_file: &Path,
    result_file: &Path,
) -> Result<Metrics, ExternalError> {
    let record = LayoutRecord::read(layout_file).map_err(|e| ExternalError::Parse(e.to_string()))?;
    let layout = record
        .to_layout()
        .map_err(|e| ExternalError::Parse(e.to_string()))?;
    let area = layout
        .bounding_box_area()
        .map_err(|e| ExternalError::Parse(e.to_string()))?;

    let command = tool
        .command
        .replace("{layout}", &layout_file.display().to_string())
        .replace("{result}", &result_file.display().to_string());
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(&command)
        .stdin(Stdio::null())
        .stdout(Stdio::null())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| ExternalError::ToolFailure(e.to_string()))?;

    let timeout = Duration::from_secs_f64(tool.timeout_secs);
    let started = Instant::now();
    let status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break status,
            Ok(None) if started.elapsed() >= timeout => {
                let _ = child.kill();
                let _ = child.wait();
                return Err(ExternalError::Timeout(timeout));
            }
            Ok(None) => std::thread::sleep(Duration::from_millis(10)),
            Err(e) => return Err(ExternalError::ToolFailure(e.to_string())),
        }
    };
    if !status.success() {
        let mut stderr = String::new();
        if let Some(mut err) = child.stderr.take() {
            use std::io::Read;
            let _ = err.read_to_string(&mut stderr);
        }
        return Err(ExternalError::ToolFailure(format!("{status}: {}", stderr.trim())));
    }

    let text = std::fs::read_to_string(result_file).map_err(|e| ExternalError::Parse(e.to_string()))?;
    let resp: ToolResponse = serde_json::from_str(&text).map_err(|e| ExternalError::Parse(e.to_string()))?;
    Ok(Metrics {
        inductance: resp.inductance,
        resistance: resp.resistance,
        srf: resp.srf,
        q_factor: resp.q_factor,
        area,
    })
}
