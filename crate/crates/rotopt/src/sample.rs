//! Seeded random instances and perturbations, used by the diagnostic `check`
//! command and the oracle test suites.

use std::collections::BTreeMap;

use rand::Rng;

use crate::graph::WeightedDigraph;
use crate::rational::{rational_from_i64, Rational};
use crate::sft::{Constraint, Potential, SftSpec};

#[derive(Debug, Clone)]
pub struct InstanceParams {
    pub max_alphabet: usize,
    pub max_depth: usize,
    pub dim: usize,
    pub max_edges: usize,
    /// Denominator bound for constraint entries.
    pub max_denominator: i64,
    /// Restrict constraint entries to {0, 1}; keeps the integer offsets of
    /// the periodic search small.
    pub binary_constraint: bool,
}

impl Default for InstanceParams {
    fn default() -> Self {
        InstanceParams {
            max_alphabet: 4,
            max_depth: 2,
            dim: 1,
            max_edges: 60,
            max_denominator: 4,
            binary_constraint: false,
        }
    }
}

fn random_spec(rng: &mut impl Rng, max_alphabet: usize, force_full: bool) -> Option<SftSpec> {
    let alphabet = rng.gen_range(2..=max_alphabet.max(2));
    if force_full {
        return SftSpec::full_shift(alphabet).ok();
    }
    let keep = rng.gen_range(0.6..1.0);
    let transitions: Vec<Vec<bool>> = (0..alphabet)
        .map(|_| (0..alphabet).map(|_| rng.gen_bool(keep)).collect())
        .collect();
    SftSpec::new(alphabet, Some(transitions)).ok()
}

fn random_rational(rng: &mut impl Rng, params: &InstanceParams) -> Rational {
    if params.binary_constraint {
        rational_from_i64(i64::from(rng.gen_bool(0.5)), 1)
    } else {
        let q = rng.gen_range(1..=params.max_denominator.max(1));
        let p = rng.gen_range(-2 * q..=2 * q);
        rational_from_i64(p, q)
    }
}

/// A random potential over every allowed word of the given depth.
pub fn random_potential(rng: &mut impl Rng, spec: &SftSpec, depth: usize) -> Potential {
    let mut values = BTreeMap::new();
    for w in spec.allowed_words(depth + 1) {
        values.insert(w, rng.gen_range(-2.0..2.0));
    }
    Potential::new(spec.clone(), depth, 0.0, values).expect("keys enumerate allowed words")
}

pub fn random_constraint(
    rng: &mut impl Rng,
    spec: &SftSpec,
    depth: usize,
    params: &InstanceParams,
) -> Constraint {
    let mut values = BTreeMap::new();
    for w in spec.allowed_words(depth + 1) {
        let v: Vec<Rational> = (0..params.dim).map(|_| random_rational(rng, params)).collect();
        values.insert(w, v);
    }
    Constraint::new(spec.clone(), depth, crate::rational::vec_zero(params.dim), values)
        .expect("keys enumerate allowed words")
}

/// A random valid system within the size bounds. Retries until the spec is
/// transitive and the edge budget holds; every fourth attempt falls back to
/// a full shift, so termination is guaranteed.
pub fn random_system(
    rng: &mut impl Rng,
    params: &InstanceParams,
) -> (SftSpec, Potential, Constraint) {
    for attempt in 0u32.. {
        let Some(spec) = random_spec(rng, params.max_alphabet, attempt % 4 == 3) else {
            continue;
        };
        let depth_a = rng.gen_range(0..=params.max_depth);
        let depth_phi = rng.gen_range(0..=params.max_depth);
        let block = depth_a.max(depth_phi).max(1);
        if spec.allowed_words(block + 1).len() > params.max_edges {
            continue;
        }
        let potential = random_potential(rng, &spec, depth_a);
        let constraint = random_constraint(rng, &spec, depth_phi, params);
        if WeightedDigraph::build(&spec, &potential, &constraint).is_ok() {
            return (spec, potential, constraint);
        }
    }
    unreachable!("full shifts always build");
}

/// Convenience wrapper returning the built graph alongside the data.
pub fn random_instance(
    rng: &mut impl Rng,
    params: &InstanceParams,
) -> (WeightedDigraph, Potential, Constraint) {
    let (spec, potential, constraint) = random_system(rng, params);
    let graph = WeightedDigraph::build(&spec, &potential, &constraint)
        .expect("random_system only returns buildable data");
    (graph, potential, constraint)
}

/// Adds independent uniform noise of the given magnitude to every word value.
pub fn perturb_potential(
    rng: &mut impl Rng,
    potential: &Potential,
    magnitude: f64,
) -> Potential {
    let spec = potential.spec().clone();
    let depth = potential.depth();
    let mut values = BTreeMap::new();
    for w in spec.allowed_words(depth + 1) {
        let v = potential.eval(&w) + rng.gen_range(-magnitude..magnitude);
        values.insert(w, v);
    }
    Potential::new(spec, depth, *potential.default_value(), values)
        .expect("perturbation keeps keys")
}

/// Adds small rational noise with the given denominator to every entry.
pub fn perturb_constraint(
    rng: &mut impl Rng,
    constraint: &Constraint,
    max_numerator: i64,
    denominator: i64,
) -> Constraint {
    let spec = constraint.spec().clone();
    let depth = constraint.depth();
    let mut values = BTreeMap::new();
    for w in spec.allowed_words(depth + 1) {
        let v: Vec<Rational> = constraint
            .eval(&w)
            .iter()
            .map(|x| x + rational_from_i64(rng.gen_range(-max_numerator..=max_numerator), denominator))
            .collect();
        values.insert(w, v);
    }
    Constraint::new(spec, depth, constraint.default_value().clone(), values)
        .expect("perturbation keeps keys")
}
