//! Versioned JSON certificates bound to a digraph by a content fingerprint.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::chains::{validate_structure, StructureDescriptor};
use crate::cycle_rank::{cycle_rank, validate_cr_decomposition, CycleRankDecomposition};
use crate::decomposition::{validate_chain_decomposition, validate_dtd, ChainDecomposition, DirectedTreeDecomposition};
use crate::graph::Digraph;
use crate::io::serialize_digraph;
use crate::minor::{validate_model, ButterflyMinorModel};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub vertices: usize,
    pub edges: usize,
    pub sha256: String,
}

impl Fingerprint {
    /// Hash of the canonical edge-list text.
    pub fn of(g: &Digraph) -> Self {
        let digest = Sha256::digest(serialize_digraph(g).as_bytes());
        let sha256 = digest.iter().map(|b| format!("{b:02x}")).collect();
        Fingerprint { vertices: g.n(), edges: g.m(), sha256 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "kebab-case")]
pub enum Payload {
    CrDecomposition { rank: usize, decomposition: CycleRankDecomposition },
    BfModel { pattern: Digraph, model: ButterflyMinorModel },
    Dtd(DirectedTreeDecomposition),
    ChainDecomposition(ChainDecomposition),
    StructureDescriptor(StructureDescriptor),
}

impl Payload {
    pub fn kind(&self) -> &'static str {
        match self {
            Payload::CrDecomposition { .. } => "cr-decomposition",
            Payload::BfModel { .. } => "bf-model",
            Payload::Dtd(_) => "dtd",
            Payload::ChainDecomposition(_) => "chain-decomposition",
            Payload::StructureDescriptor(_) => "structure-descriptor",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub schema: u32,
    pub graph: Fingerprint,
    #[serde(flatten)]
    pub payload: Payload,
}

#[derive(Debug, Error)]
pub enum CertError {
    #[error("malformed certificate: {0}")]
    Malformed(#[from] serde_json::Error),
    #[error("unsupported schema version {0}")]
    Schema(u32),
}

impl Certificate {
    pub fn new(g: &Digraph, payload: Payload) -> Self {
        Certificate { schema: SCHEMA_VERSION, graph: Fingerprint::of(g), payload }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificates serialize") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, CertError> {
        let c: Certificate = serde_json::from_str(text)?;
        if c.schema != SCHEMA_VERSION {
            return Err(CertError::Schema(c.schema));
        }
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub valid: bool,
    pub detail: String,
}

fn verdict(valid: bool, detail: impl Into<String>) -> Verdict {
    Verdict { valid, detail: detail.into() }
}

/// Checks a certificate against `g` without trusting anything it claims.
pub fn verify_certificate(g: &Digraph, cert: &Certificate) -> Verdict {
    if cert.graph != Fingerprint::of(g) {
        return verdict(false, "fingerprint does not match the digraph");
    }
    match &cert.payload {
        Payload::CrDecomposition { rank, decomposition } => {
            let r = validate_cr_decomposition(g, decomposition);
            if !r.valid {
                return verdict(false, format!("invalid decomposition: {:?}", r.witness));
            }
            if r.height.saturating_sub(1) != *rank {
                return verdict(false, format!("height {} does not certify rank {rank}", r.height));
            }
            match cycle_rank(g) {
                Ok(best) if best.rank == *rank => verdict(true, format!("cycle rank {rank}")),
                Ok(best) => verdict(false, format!("claimed rank {rank}, optimum is {}", best.rank)),
                Err(e) => verdict(true, format!("upper bound {rank} certified; optimality unchecked: {e}")),
            }
        }
        Payload::BfModel { pattern, model } => {
            let r = validate_model(pattern, g, model);
            verdict(r.valid, r.witness.map_or("valid model".into(), |w| format!("{w:?}")))
        }
        Payload::Dtd(d) => {
            let r = validate_dtd(g, d);
            verdict(r.valid, r.witness.map_or(format!("valid, width {}", r.width), |w| format!("{w:?}")))
        }
        Payload::ChainDecomposition(cd) => {
            if cd.nodes.is_empty() || cd.root_graph() != g {
                return verdict(false, "root digraph differs from the input");
            }
            let r = validate_chain_decomposition(cd);
            verdict(
                r.valid,
                r.witness.map_or(format!("valid, full height {}", r.full_height), |w| format!("{w:?}")),
            )
        }
        Payload::StructureDescriptor(desc) => {
            let r = validate_structure(g, desc);
            verdict(r.valid, r.witness.map_or(format!("valid, measure {}", r.measure), |w| w.clause))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::cycle_chain;

    #[test]
    fn rank_certificate_round_trips() {
        let g = cycle_chain(8).unwrap().graph;
        let cr = cycle_rank(&g).unwrap();
        let c = Certificate::new(&g, Payload::CrDecomposition { rank: cr.rank, decomposition: cr.decomposition });
        let back = Certificate::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
        assert!(verify_certificate(&g, &back).valid);
        let other = cycle_chain(7).unwrap().graph;
        assert!(!verify_certificate(&other, &back).valid);
    }

    #[test]
    fn wrong_rank_rejected() {
        let g = cycle_chain(4).unwrap().graph;
        let cr = cycle_rank(&g).unwrap();
        let c = Certificate::new(&g, Payload::CrDecomposition { rank: cr.rank + 1, decomposition: cr.decomposition });
        assert!(!verify_certificate(&g, &c).valid);
    }
}
