//! JSON system-spec files: alphabet, optional transition matrix, potential
//! and constraint. Rational entries are "p/q" strings parsed bit-exactly.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedDigraph;
use crate::rational::format_rational;
use crate::sft::{format_word, parse_word, Constraint, Potential, SftSpec};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawPotential {
    pub depth: usize,
    pub default: f64,
    #[serde(default)]
    pub words: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawConstraint {
    pub depth: usize,
    pub dim: usize,
    pub default: Vec<String>,
    #[serde(default)]
    pub words: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawSystem {
    pub alphabet: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transitions: Option<Vec<Vec<u8>>>,
    pub potential: RawPotential,
    pub constraint: RawConstraint,
}

/// A validated spec plus its two locally constant functions.
#[derive(Debug, Clone)]
pub struct System {
    pub spec: SftSpec,
    pub potential: Potential,
    pub constraint: Constraint,
}

impl System {
    pub fn graph(&self) -> Result<WeightedDigraph> {
        WeightedDigraph::build(&self.spec, &self.potential, &self.constraint)
    }
}

/// Validates the alphabet/transition part of a raw system.
pub fn validate_spec(raw: &RawSystem) -> Result<SftSpec> {
    let transitions = match &raw.transitions {
        None => None,
        Some(rows) => {
            let mut issues = Vec::new();
            for (i, row) in rows.iter().enumerate() {
                for &v in row {
                    if v > 1 {
                        issues.push(format!("transition matrix row {i} has entry {v}, expected 0/1"));
                        break;
                    }
                }
            }
            if !issues.is_empty() {
                return Err(Error::InvalidSpec { issues });
            }
            Some(rows.iter().map(|row| row.iter().map(|&v| v == 1).collect()).collect())
        }
    };
    SftSpec::new(raw.alphabet, transitions)
}

pub fn system_from_raw(raw: &RawSystem) -> Result<System> {
    let spec = validate_spec(raw)?;
    let mut pot_values = BTreeMap::new();
    for (key, &value) in &raw.potential.words {
        pot_values.insert(parse_word(key)?, value);
    }
    let potential = Potential::new(spec.clone(), raw.potential.depth, raw.potential.default, pot_values)?;

    if raw.constraint.default.len() != raw.constraint.dim {
        return Err(Error::DimensionMismatch {
            expected: raw.constraint.dim,
            found: raw.constraint.default.len(),
        });
    }
    let default = crate::rational::parse_rational_vec(&raw.constraint.default)?;
    let mut con_values = BTreeMap::new();
    for (key, parts) in &raw.constraint.words {
        if parts.len() != raw.constraint.dim {
            return Err(Error::DimensionMismatch {
                expected: raw.constraint.dim,
                found: parts.len(),
            });
        }
        con_values.insert(parse_word(key)?, crate::rational::parse_rational_vec(parts)?);
    }
    let constraint = Constraint::new(spec.clone(), raw.constraint.depth, default, con_values)?;
    Ok(System { spec, potential, constraint })
}

pub fn system_to_raw(system: &System) -> RawSystem {
    let spec = &system.spec;
    let full = (0..spec.alphabet_size())
        .all(|i| (0..spec.alphabet_size()).all(|j| spec.allows(i as u32, j as u32)));
    RawSystem {
        alphabet: spec.alphabet_size(),
        transitions: if full {
            None
        } else {
            Some(
                spec.transitions()
                    .iter()
                    .map(|row| row.iter().map(|&b| u8::from(b)).collect())
                    .collect(),
            )
        },
        potential: RawPotential {
            depth: system.potential.depth(),
            default: *system.potential.default_value(),
            words: system
                .potential
                .values()
                .iter()
                .map(|(w, &v)| (format_word(w), v))
                .collect(),
        },
        constraint: RawConstraint {
            depth: system.constraint.depth(),
            dim: system.constraint.dim(),
            default: system
                .constraint
                .default_value()
                .iter()
                .map(format_rational)
                .collect(),
            words: system
                .constraint
                .values()
                .iter()
                .map(|(w, v)| (format_word(w), v.iter().map(format_rational).collect()))
                .collect(),
        },
    }
}

pub fn parse_system(json: &str) -> Result<System> {
    let raw: RawSystem = serde_json::from_str(json)?;
    system_from_raw(&raw)
}

pub fn read_system(path: &std::path::Path) -> Result<System> {
    parse_system(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rational_from_i64;

    const INTRO: &str = r#"{
        "alphabet": 3,
        "potential": {"depth": 1, "default": 0.0, "words": {"1,2": 1.0, "2,1": 1.0}},
        "constraint": {"depth": 0, "dim": 1, "default": ["0/1"], "words": {"0": ["1/1"]}}
    }"#;

    #[test]
    fn parses_the_intro_example() {
        let system = parse_system(INTRO).unwrap();
        assert_eq!(system.spec.alphabet_size(), 3);
        assert_eq!(system.potential.eval(&[1, 2]), 1.0);
        assert_eq!(system.constraint.eval(&[0, 0])[0], rational_from_i64(1, 1));
        let g = system.graph().unwrap();
        assert_eq!(g.edge_count(), 9);
    }

    #[test]
    fn round_trip_through_raw() {
        let system = parse_system(INTRO).unwrap();
        let raw = system_to_raw(&system);
        let json = serde_json::to_string(&raw).unwrap();
        let again = parse_system(&json).unwrap();
        assert_eq!(again.potential, system.potential);
        assert_eq!(again.constraint, system.constraint);
    }

    #[test]
    fn rejects_bad_rationals() {
        let bad = INTRO.replace("1/1", "1/0.5");
        assert!(matches!(parse_system(&bad), Err(Error::ParseRational { .. })));
    }

    #[test]
    fn rejects_non_binary_transitions() {
        let json = r#"{
            "alphabet": 2,
            "transitions": [[1, 2], [1, 0]],
            "potential": {"depth": 0, "default": 0.0, "words": {}},
            "constraint": {"depth": 0, "dim": 1, "default": ["0/1"], "words": {}}
        }"#;
        assert!(matches!(parse_system(json), Err(Error::InvalidSpec { .. })));
    }

    #[test]
    fn rejects_wrong_constraint_dim() {
        let json = r#"{
            "alphabet": 2,
            "potential": {"depth": 0, "default": 0.0, "words": {}},
            "constraint": {"depth": 0, "dim": 2, "default": ["0/1"], "words": {}}
        }"#;
        assert!(matches!(parse_system(json), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn rejects_disallowed_word_keys() {
        let json = r#"{
            "alphabet": 2,
            "transitions": [[1, 1], [1, 0]],
            "potential": {"depth": 1, "default": 0.0, "words": {"1,1": 3.0}},
            "constraint": {"depth": 0, "dim": 1, "default": ["0/1"], "words": {}}
        }"#;
        assert!(matches!(parse_system(json), Err(Error::WordNotAllowed { .. })));
    }
}
