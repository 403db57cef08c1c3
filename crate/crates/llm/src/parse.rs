//! Decision parsing with one error variant per failure mode.

use crate::prompt::{cav_label, ACTIONS_PREFIX};
use ldpd_core::sim::{Action, JointAction, VehicleId, VehicleKind, VehicleLabel};
use serde::de::{Deserializer, MapAccess, Visitor};
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("no ACTIONS line in the response")]
    MissingActionsLine,
    #[error("ACTIONS line is not a JSON object of strings: {0}")]
    Malformed(String),
    #[error("unknown action token {0:?}")]
    UnknownAction(String),
    #[error("decision lacks CAV {0}")]
    MissingCav(String),
    #[error("CAV {0} appears twice")]
    DuplicateCav(String),
    #[error("{0:?} is not a live CAV")]
    UnknownCav(String),
}

/// Object entries in source order, duplicates preserved.
struct Entries(Vec<(String, String)>);

impl<'de> serde::Deserialize<'de> for Entries {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = Entries;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an object mapping CAV ids to action strings")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut m: A) -> Result<Entries, A::Error> {
                let mut out = Vec::new();
                while let Some((k, v)) = m.next_entry::<String, String>()? {
                    out.push((k, v));
                }
                Ok(Entries(out))
            }
        }
        d.deserialize_map(V)
    }
}

fn actions_payload(line: &str) -> Option<&str> {
    let line = line.trim().trim_matches('`').trim();
    let idx = line.find(ACTIONS_PREFIX)?;
    let rest = line[idx + ACTIONS_PREFIX.len()..].trim();
    rest.starts_with('{').then_some(rest)
}

/// Finds the last `ACTIONS:` line, if any.
pub fn find_actions_line(text: &str) -> Option<&str> {
    text.lines().rev().find_map(actions_payload)
}

pub fn parse_decision(text: &str, live: &[VehicleId]) -> Result<JointAction, ParseError> {
    let payload = find_actions_line(text).ok_or(ParseError::MissingActionsLine)?;
    let payload = payload.trim_end_matches('`').trim();
    let entries: Entries = serde_json::from_str(payload).map_err(|e| ParseError::Malformed(e.to_string()))?;
    let live_set: BTreeSet<VehicleId> = live.iter().copied().collect();
    let mut out = JointAction::new();
    for (key, token) in entries.0 {
        let id = match key.parse::<VehicleLabel>() {
            Ok(VehicleLabel { id, kind: VehicleKind::Cav }) if live_set.contains(&id) => id,
            _ => return Err(ParseError::UnknownCav(key)),
        };
        let action: Action = token.parse().map_err(|_| ParseError::UnknownAction(token.clone()))?;
        if out.insert(id, action).is_some() {
            return Err(ParseError::DuplicateCav(cav_label(id)));
        }
    }
    if let Some(missing) = live_set.iter().find(|id| !out.contains_key(id)) {
        return Err(ParseError::MissingCav(cav_label(*missing)));
    }
    Ok(out)
}
