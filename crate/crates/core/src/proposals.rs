//! Object proposal files: a JSON array of `{"id": ..., "indices": [...]}`.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scene::{ObjectProposal, Scene, MIN_PROPOSAL_POINTS};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProposalRecord {
    pub id: String,
    pub indices: Vec<usize>,
    /// Accepted for compatibility with annotated exports; always recomputed.
    #[serde(default, skip_serializing)]
    pub bbox: Option<serde_json::Value>,
}

pub fn load_proposals(path: impl AsRef<Path>, scene: &Scene) -> Result<Vec<ObjectProposal>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_proposals(&text, scene)
}

pub fn parse_proposals(text: &str, scene: &Scene) -> Result<Vec<ObjectProposal>> {
    let records: Vec<ProposalRecord> =
        serde_json::from_str(text).map_err(|e| Error::ProposalFormat(e.to_string()))?;
    proposals_from_records(records, scene)
}

pub fn proposals_from_records(records: Vec<ProposalRecord>, scene: &Scene) -> Result<Vec<ObjectProposal>> {
    let mut ids = HashSet::new();
    let mut out = Vec::with_capacity(records.len());
    for rec in records {
        if !ids.insert(rec.id.clone()) {
            return Err(Error::DuplicateObject(rec.id));
        }
        if rec.indices.len() < MIN_PROPOSAL_POINTS {
            return Err(Error::InvalidProposal {
                id: rec.id,
                reason: format!(
                    "{} points listed, at least {MIN_PROPOSAL_POINTS} required",
                    rec.indices.len()
                ),
            });
        }
        out.push(ObjectProposal::new(rec.id, rec.indices, scene)?);
    }
    Ok(out)
}

pub fn save_proposals(proposals: &[ObjectProposal], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let records: Vec<ProposalRecord> = proposals
        .iter()
        .map(|p| ProposalRecord {
            id: p.id().to_owned(),
            indices: p.point_indices().to_vec(),
            bbox: None,
        })
        .collect();
    let text = serde_json::to_string(&records)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
