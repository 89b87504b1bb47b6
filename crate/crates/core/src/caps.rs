//! Desk-scale size limits.
//!
//! Defaults can be raised with the `LIFTGAP_SIZE_CAPS` environment variable,
//! a comma-separated list of `key=value` pairs, e.g.
//! `LIFTGAP_SIZE_CAPS=lp_nonzeros=1000000,edge_n=7`. Unknown keys are
//! rejected so typos do not silently fall back to defaults.

use std::sync::OnceLock;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SizeCaps {
    /// Nonzero coefficients accepted by the LP solver.
    pub lp_nonzeros: usize,
    /// Variables of a dense boolean function table.
    pub boolfn_n: usize,
    /// Variables for exhaustive optimisation.
    pub brute_force_n: usize,
    /// Vertices and level of the edge-based relaxation.
    pub edge_n: usize,
    pub edge_r: usize,
    /// Variables for slack tables.
    pub slack_n: usize,
    /// Variables for Farkas decomposition.
    pub farkas_n: usize,
    /// Message space of the protocol factorisation.
    pub protocol_messages: usize,
    /// Variables for symmetric-structure detection.
    pub symmetric_n: usize,
}

impl Default for SizeCaps {
    fn default() -> Self {
        SizeCaps {
            lp_nonzeros: 200_000,
            boolfn_n: 24,
            brute_force_n: 24,
            edge_n: 6,
            edge_r: 2,
            slack_n: 20,
            farkas_n: 12,
            protocol_messages: 1_000_000,
            symmetric_n: 16,
        }
    }
}

impl SizeCaps {
    pub fn parse(spec: &str) -> Result<Self> {
        let mut caps = SizeCaps::default();
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::Parameter(format!("size cap entry {item:?} lacks '='")))?;
            let value: usize = value
                .trim()
                .parse()
                .map_err(|_| Error::Parameter(format!("size cap {key:?} is not a count")))?;
            let slot = match key.trim() {
                "lp_nonzeros" => &mut caps.lp_nonzeros,
                "boolfn_n" => &mut caps.boolfn_n,
                "brute_force_n" => &mut caps.brute_force_n,
                "edge_n" => &mut caps.edge_n,
                "edge_r" => &mut caps.edge_r,
                "slack_n" => &mut caps.slack_n,
                "farkas_n" => &mut caps.farkas_n,
                "protocol_messages" => &mut caps.protocol_messages,
                "symmetric_n" => &mut caps.symmetric_n,
                other => return Err(Error::Parameter(format!("unknown size cap {other:?}"))),
            };
            *slot = value;
        }
        Ok(caps)
    }

    pub fn from_env() -> Result<Self> {
        match std::env::var("LIFTGAP_SIZE_CAPS") {
            Ok(spec) => SizeCaps::parse(&spec),
            Err(_) => Ok(SizeCaps::default()),
        }
    }

    /// Process-wide caps, read once from the environment. A malformed
    /// variable falls back to defaults with a warning.
    pub fn global() -> &'static SizeCaps {
        static CAPS: OnceLock<SizeCaps> = OnceLock::new();
        CAPS.get_or_init(|| {
            SizeCaps::from_env().unwrap_or_else(|e| {
                log::warn!("ignoring LIFTGAP_SIZE_CAPS: {e}");
                SizeCaps::default()
            })
        })
    }
}

pub(crate) fn check(what: &'static str, actual: usize, limit: usize) -> Result<()> {
    if actual > limit {
        Err(Error::SizeCap { what, actual, limit })
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_overrides() {
        let caps = SizeCaps::parse("lp_nonzeros=10, edge_n=8").unwrap();
        assert_eq!(caps.lp_nonzeros, 10);
        assert_eq!(caps.edge_n, 8);
        assert_eq!(caps.farkas_n, 12);
        assert!(SizeCaps::parse("bogus=1").is_err());
        assert!(SizeCaps::parse("edge_n").is_err());
        assert_eq!(SizeCaps::parse("").unwrap(), SizeCaps::default());
    }
}
