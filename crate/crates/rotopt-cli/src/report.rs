//! Output documents. Results go to standard output as JSON (or CSV for
//! curves and error sequences); all maps are ordered so a fixed config and
//! seed produce identical bytes.

use std::collections::BTreeMap;

use serde::Serialize;

use rotopt::rational::{format_rational, Rational};
use rotopt::sft::format_word;
use rotopt::{Cycle, StationaryEdgeMeasure, WeightedDigraph};

#[derive(Serialize)]
pub struct MeasureDoc {
    /// Edge weights keyed by the (k+1)-words the edges read; support only.
    pub weights: BTreeMap<String, f64>,
    pub rotation_vector: Vec<f64>,
    pub potential_integral: f64,
}

pub fn measure_doc(graph: &WeightedDigraph, measure: &StationaryEdgeMeasure) -> MeasureDoc {
    let mut weights = BTreeMap::new();
    for (e, &w) in measure.weights().iter().enumerate() {
        if w > 1e-12 {
            weights.insert(format_word(&graph.edge_word(e)), w);
        }
    }
    MeasureDoc {
        weights,
        rotation_vector: measure.rotation_vector().to_vec(),
        potential_integral: measure.potential_integral(),
    }
}

#[derive(Serialize)]
pub struct OrbitDoc {
    /// The periodic symbol word.
    pub word: String,
    pub period: usize,
    pub mean_potential: f64,
    pub rotation_vector: Vec<String>,
}

pub fn orbit_doc(graph: &WeightedDigraph, cycle: &Cycle) -> OrbitDoc {
    OrbitDoc {
        word: format_word(&cycle.symbol_word(graph)),
        period: cycle.period(),
        mean_potential: cycle.mean_potential(),
        rotation_vector: cycle.rotation_vector().iter().map(format_rational).collect(),
    }
}

#[derive(Serialize)]
pub struct BetaDoc {
    pub h: Vec<String>,
    pub beta: f64,
    pub dual_multipliers: Vec<f64>,
    pub measure: MeasureDoc,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_dual: Option<f64>,
}

#[derive(Serialize)]
pub struct GradientDoc {
    pub vector: Vec<String>,
    pub unique: bool,
}

#[derive(Serialize)]
pub struct AlphaDoc {
    pub c: Vec<f64>,
    pub alpha: f64,
    pub witness: OrbitDoc,
    pub gradient: GradientDoc,
}

#[derive(Serialize)]
pub struct SupportSampleDoc {
    pub direction: Vec<f64>,
    pub value: f64,
    pub witness_rotation: Vec<String>,
}

#[derive(Serialize)]
pub struct RotationSetDoc {
    pub dim: usize,
    pub exact: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<Vec<String>>>,
    pub support_samples: Vec<SupportSampleDoc>,
}

#[derive(Serialize)]
pub struct SubactionDoc {
    pub eigenvalue: f64,
    /// u keyed by vertex word.
    pub u: BTreeMap<String, f64>,
    pub critical_edges: Vec<String>,
    pub contact_locus: Vec<String>,
}

#[derive(Serialize)]
pub struct TrajectoryDoc {
    pub x0: String,
    pub steps: usize,
    /// Backward orbit in generation order: vertices[j+1] maps forward onto
    /// vertices[j] under the shift.
    pub vertices: Vec<String>,
    pub final_phi_mean: Vec<String>,
    pub final_potential_mean: f64,
}

#[derive(Serialize)]
pub struct PeriodicDoc {
    pub status: String,
    pub r: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub orbit: Option<OrbitDoc>,
    pub by_period: Vec<Option<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gaps: Option<Vec<Option<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub states_needed: Option<u128>,
}

#[derive(Serialize)]
pub struct CheckFamilyDoc {
    pub family: String,
    pub cases: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

pub fn print_json<T: Serialize>(doc: &T) {
    println!("{}", serde_json::to_string_pretty(doc).expect("documents serialize"));
}

/// CSV with '.' decimal and ',' separator; `rows` already formatted.
pub fn print_csv(header: &str, rows: impl IntoIterator<Item = String>) {
    println!("{header}");
    for row in rows {
        println!("{row}");
    }
}

pub fn format_rationals(v: &[Rational]) -> Vec<String> {
    v.iter().map(format_rational).collect()
}
