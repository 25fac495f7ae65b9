//! One JSON file per request digest.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{ChatRequest, ChatResponse, GatewayError};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Transcript {
    pub request: ChatRequest,
    pub response: ChatResponse,
}

#[derive(Debug, Clone)]
pub struct TranscriptStore {
    dir: PathBuf,
}

impl TranscriptStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, digest: &str) -> PathBuf {
        self.dir.join(format!("{digest}.json"))
    }

    /// Store an exchange. An existing transcript for the digest is kept.
    pub fn save(&self, req: &ChatRequest, resp: &ChatResponse) -> Result<(), GatewayError> {
        let path = self.path_for(&req.request_digest);
        if path.exists() {
            return Ok(());
        }
        let t = Transcript {
            request: req.clone(),
            response: resp.clone(),
        };
        crate::fsutil::write_json(&path, &t).map_err(|e| GatewayError::Store(e.to_string()))
    }

    pub fn load(&self, digest: &str) -> Result<Option<ChatResponse>, GatewayError> {
        let path = self.path_for(digest);
        if !path.exists() {
            return Ok(None);
        }
        let t: Transcript = crate::fsutil::read_json(&path).map_err(|e| GatewayError::Store(e.to_string()))?;
        if t.request.request_digest != digest {
            return Err(GatewayError::Store(format!(
                "{} holds a transcript for digest {}",
                path.display(),
                t.request.request_digest
            )));
        }
        Ok(Some(t.response))
    }
}
