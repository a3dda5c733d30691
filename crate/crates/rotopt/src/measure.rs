//! The stationary-edge-measure polytope and the primal linear program whose
//! value is the constrained maximum `beta(h)`.
//!
//! Stationary edge frequencies are exactly the `(k+1)`-cylinder marginals of
//! shift-invariant measures, so optimizing over the polytope {mu >= 0,
//! sum mu = 1, inflow = outflow} computes suprema over invariant measures
//! exactly for locally constant data.

use crate::cycles::Cycle;
use crate::error::{Error, Result};
use crate::graph::WeightedDigraph;
use crate::rational::{to_f64, Rational};
use crate::simplex::{self, Problem, Relation, Status};

/// Flow-conservation and normalization tolerance for measures.
pub const MEASURE_TOL: f64 = 1e-9;

/// A shift-invariant measure's edge-frequency vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryEdgeMeasure {
    weights: Vec<f64>,
    rotation_vector: Vec<f64>,
    potential_integral: f64,
}

impl StationaryEdgeMeasure {
    /// Validates nonnegativity, normalization and flow conservation, then
    /// caches the rotation vector and potential integral.
    pub fn new(graph: &WeightedDigraph, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != graph.edge_count() {
            return Err(Error::MeasureInvariant {
                detail: format!(
                    "expected {} edge weights, found {}",
                    graph.edge_count(),
                    weights.len()
                ),
            });
        }
        if let Some((e, &w)) = weights.iter().enumerate().find(|(_, &w)| w < -MEASURE_TOL) {
            return Err(Error::MeasureInvariant {
                detail: format!("edge {e} carries negative mass {w}"),
            });
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > MEASURE_TOL {
            return Err(Error::MeasureInvariant {
                detail: format!("total mass {total} is not 1"),
            });
        }
        for v in 0..graph.vertex_count() {
            let out: f64 = graph.out_edges(v).iter().map(|&e| weights[e]).sum();
            let inn: f64 = graph.in_edges(v).iter().map(|&e| weights[e]).sum();
            if (out - inn).abs() > MEASURE_TOL {
                return Err(Error::MeasureInvariant {
                    detail: format!("vertex {v}: outflow {out} != inflow {inn}"),
                });
            }
        }
        let mut rotation_vector = vec![0.0; graph.dim()];
        let mut potential_integral = 0.0;
        for (e, edge) in graph.edges().iter().enumerate() {
            potential_integral += weights[e] * edge.potential;
            for (r, p) in rotation_vector.iter_mut().zip(&edge.constraint_f64) {
                *r += weights[e] * p;
            }
        }
        Ok(StationaryEdgeMeasure { weights, rotation_vector, potential_integral })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn rotation_vector(&self) -> &[f64] {
        &self.rotation_vector
    }

    pub fn potential_integral(&self) -> f64 {
        self.potential_integral
    }

    /// Integral of an arbitrary per-edge weight.
    pub fn integral(&self, weight: &[f64]) -> f64 {
        self.weights.iter().zip(weight).map(|(m, w)| m * w).sum()
    }

    /// Edges carrying more than `tol` mass.
    pub fn support(&self, tol: f64) -> Vec<usize> {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > tol)
            .map(|(e, _)| e)
            .collect()
    }

    /// Mass leaving each vertex (equals the vertex marginal).
    pub fn vertex_marginal(&self, graph: &WeightedDigraph) -> Vec<f64> {
        (0..graph.vertex_count())
            .map(|v| graph.out_edges(v).iter().map(|&e| self.weights[e]).sum())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
}

/// Result of a polytope linear program.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub value: f64,
    pub measure: Option<StationaryEdgeMeasure>,
    /// Multipliers of the rotation rows: a supergradient of beta at h.
    pub dual_multipliers: Vec<f64>,
}

/// Builds the polytope rows shared by every LP here: normalization plus flow
/// conservation with one redundant row dropped.
fn polytope_rows(graph: &WeightedDigraph, p: &mut Problem) {
    let ne = graph.edge_count();
    p.push_row(vec![1.0; ne], Relation::Eq, 1.0);
    for v in 1..graph.vertex_count() {
        let mut row = vec![0.0; ne];
        for &e in graph.out_edges(v) {
            row[e] += 1.0;
        }
        for &e in graph.in_edges(v) {
            row[e] -= 1.0;
        }
        p.push_row(row, Relation::Eq, 0.0);
    }
}

fn clamp_weights(x: &[f64]) -> Vec<f64> {
    x.iter().map(|&w| if w < 0.0 && w > -MEASURE_TOL { 0.0 } else { w }).collect()
}

/// Maximum of `sum mu_e weight_e` over the stationary polytope, without any
/// rotation constraint. Equals the maximum cycle mean of the weight.
pub fn solve_max_integral(graph: &WeightedDigraph, weight: &[f64]) -> Result<LpSolution> {
    let mut p = Problem::new(graph.edge_count(), weight.to_vec());
    polytope_rows(graph, &mut p);
    let sol = simplex::solve(&p)?;
    match sol.status {
        Status::Optimal => Ok(LpSolution {
            status: LpStatus::Optimal,
            value: sol.value,
            measure: Some(StationaryEdgeMeasure::new(graph, clamp_weights(&sol.x))?),
            dual_multipliers: Vec::new(),
        }),
        Status::Infeasible => Err(Error::Internal(
            "stationary polytope reported empty on a validated graph".into(),
        )),
        Status::Unbounded => Err(Error::Internal("bounded polytope reported unbounded".into())),
    }
}

/// beta(h): maximize the potential integral over measures with rotation
/// vector exactly h. `Infeasible` status means h is outside the rotation set.
pub fn solve_beta_primal(graph: &WeightedDigraph, h: &[Rational]) -> Result<LpSolution> {
    if h.len() != graph.dim() {
        return Err(Error::DimensionMismatch { expected: graph.dim(), found: h.len() });
    }
    let ne = graph.edge_count();
    let mut p = Problem::new(ne, graph.potential_weights());
    polytope_rows(graph, &mut p);
    let fixed_rows = p.rows.len();
    for i in 0..graph.dim() {
        let row: Vec<f64> = graph.edges().iter().map(|e| e.constraint_f64[i]).collect();
        p.push_row(row, Relation::Eq, to_f64(&h[i]));
    }
    let sol = simplex::solve(&p)?;
    match sol.status {
        Status::Optimal => Ok(LpSolution {
            status: LpStatus::Optimal,
            value: sol.value,
            measure: Some(StationaryEdgeMeasure::new(graph, clamp_weights(&sol.x))?),
            dual_multipliers: sol.duals[fixed_rows..].to_vec(),
        }),
        Status::Infeasible => Ok(LpSolution {
            status: LpStatus::Infeasible,
            value: f64::NEG_INFINITY,
            measure: None,
            dual_multipliers: Vec::new(),
        }),
        Status::Unbounded => Err(Error::Internal("bounded polytope reported unbounded".into())),
    }
}

/// Convex decomposition of a stationary measure into cycle measures:
/// weights lambda_gamma >= 0 summing to 1 with
/// `sum lambda_gamma (indicator/period) = mu` up to the flow tolerance.
pub fn decompose_into_cycles(
    graph: &WeightedDigraph,
    measure: &StationaryEdgeMeasure,
) -> Result<Vec<(Cycle, f64)>> {
    // Re-validate: callers may hand-construct measures.
    StationaryEdgeMeasure::new(graph, measure.weights().to_vec())?;
    let mut residual = measure.weights().to_vec();
    let mut out = Vec::new();
    let floor = 10.0 * MEASURE_TOL;
    loop {
        let (start, &max_res) = residual
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        if max_res <= floor {
            break;
        }
        // Follow the heaviest outgoing residual edge until a vertex repeats.
        let mut path: Vec<usize> = vec![start];
        let mut seen_at = std::collections::HashMap::new();
        seen_at.insert(graph.edge(start).src, 0usize);
        let cycle_edges = loop {
            let v = graph.edge(*path.last().unwrap()).dst;
            if let Some(&p) = seen_at.get(&v) {
                break path[p..].to_vec();
            }
            seen_at.insert(v, path.len());
            let next = graph
                .out_edges(v)
                .iter()
                .copied()
                .max_by(|&a, &b| residual[a].partial_cmp(&residual[b]).unwrap())
                .ok_or_else(|| Error::Internal("vertex with no outgoing edge".into()))?;
            if residual[next] <= floor / 10.0 {
                return Err(Error::Internal(
                    "residual flow is not conserved; cannot close a cycle".into(),
                ));
            }
            path.push(next);
        };
        let flow = cycle_edges
            .iter()
            .map(|&e| residual[e])
            .fold(f64::INFINITY, f64::min);
        for &e in &cycle_edges {
            residual[e] -= flow;
        }
        let cycle = Cycle::from_edges(graph, cycle_edges)?;
        let lambda = flow * cycle.period() as f64;
        out.push((cycle, lambda));
        if out.len() > graph.edge_count() + 4 {
            return Err(Error::Internal("cycle decomposition failed to terminate".into()));
        }
    }
    Ok(out)
}

/// Coordinate-wise [min, max] of the rotation vector over the measures
/// maximizing `integral(a - <c, phi>)`. A width below 1e-8 in every
/// coordinate certifies a unique rotation vector on the maximizing face.
pub fn maximizing_face_extents(graph: &WeightedDigraph, c: &[f64]) -> Result<Vec<(f64, f64)>> {
    let weight = graph.tilted_weights(c);
    let base = solve_max_integral(graph, &weight)?;
    let optimal = base.value;
    let ne = graph.edge_count();
    let mut extents = Vec::with_capacity(graph.dim());
    for i in 0..graph.dim() {
        let phi_row: Vec<f64> = graph.edges().iter().map(|e| e.constraint_f64[i]).collect();
        let mut bounds = [0.0; 2];
        for (k, sign) in [(0usize, -1.0f64), (1usize, 1.0f64)] {
            let obj: Vec<f64> = phi_row.iter().map(|p| sign * p).collect();
            let mut p = Problem::new(ne, obj);
            polytope_rows(graph, &mut p);
            p.push_row(weight.clone(), Relation::Eq, optimal);
            let sol = simplex::solve(&p)?;
            if sol.status != Status::Optimal {
                return Err(Error::Internal(
                    "optimal-face restriction reported infeasible".into(),
                ));
            }
            bounds[k] = sign * sol.value;
        }
        extents.push((bounds[0], bounds[1]));
    }
    Ok(extents)
}

/// Row-stochastic transition matrix of the Markov extension of a measure,
/// restricted to its support vertices.
#[derive(Debug, Clone)]
pub struct MarkovExtension {
    /// Graph vertex ids carrying positive marginal, ascending.
    pub vertices: Vec<usize>,
    /// matrix[i][j]: probability of moving from vertices[i] to vertices[j].
    pub matrix: Vec<Vec<f64>>,
    /// Stationary distribution over `vertices` (the vertex marginal).
    pub stationary: Vec<f64>,
}

pub fn markov_extension(
    graph: &WeightedDigraph,
    measure: &StationaryEdgeMeasure,
) -> Result<MarkovExtension> {
    StationaryEdgeMeasure::new(graph, measure.weights().to_vec())?;
    let marginal = measure.vertex_marginal(graph);
    let vertices: Vec<usize> = (0..graph.vertex_count())
        .filter(|&v| marginal[v] > MEASURE_TOL)
        .collect();
    let pos: std::collections::HashMap<usize, usize> =
        vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut matrix = vec![vec![0.0; vertices.len()]; vertices.len()];
    for (i, &v) in vertices.iter().enumerate() {
        for &e in graph.out_edges(v) {
            let w = measure.weights()[e];
            if w > 0.0 {
                if let Some(&j) = pos.get(&graph.edge(e).dst) {
                    matrix[i][j] += w / marginal[v];
                }
            }
        }
    }
    let stationary: Vec<f64> = vertices.iter().map(|&v| marginal[v]).collect();
    Ok(MarkovExtension { vertices, matrix, stationary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cycles::{cycle_measure, enumerate_simple_cycles};
    use crate::rational::rational_from_i64;
    use crate::sft::{Constraint, Potential, SftSpec};
    use std::collections::BTreeMap;

    fn rat(n: i64, d: i64) -> Rational {
        rational_from_i64(n, d)
    }

    /// The introduction example: 3-shift, A(1,2)=A(2,1)=1 else 0, phi=1_[0].
    pub(crate) fn intro_graph() -> WeightedDigraph {
        let spec = SftSpec::full_shift(3).unwrap();
        let mut av = BTreeMap::new();
        av.insert(vec![1, 2], 1.0);
        av.insert(vec![2, 1], 1.0);
        let a = Potential::new(spec.clone(), 1, 0.0, av).unwrap();
        let mut cv = BTreeMap::new();
        cv.insert(vec![0], vec![rat(1, 1)]);
        let phi = Constraint::new(spec.clone(), 0, vec![rat(0, 1)], cv).unwrap();
        WeightedDigraph::build(&spec, &a, &phi).unwrap()
    }

    fn identity_graph() -> WeightedDigraph {
        // 2-shift with A = phi = 1_[0]
        let spec = SftSpec::full_shift(2).unwrap();
        let mut av = BTreeMap::new();
        av.insert(vec![0], 1.0);
        let a = Potential::new(spec.clone(), 0, 0.0, av).unwrap();
        let mut cv = BTreeMap::new();
        cv.insert(vec![0], vec![rat(1, 1)]);
        let phi = Constraint::new(spec.clone(), 0, vec![rat(0, 1)], cv).unwrap();
        WeightedDigraph::build(&spec, &a, &phi).unwrap()
    }

    #[test]
    fn intro_beta_at_one_is_fixed_point() {
        let g = intro_graph();
        let sol = solve_beta_primal(&g, &[rat(1, 1)]).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!(sol.value.abs() < 1e-9, "beta(1) = {}", sol.value);
        let m = sol.measure.unwrap();
        // point mass on the loop at symbol 0
        let loop0 = g
            .out_edges(g.vertex_index(&[0]).unwrap())
            .iter()
            .copied()
            .find(|&e| g.edge(e).dst == g.edge(e).src)
            .unwrap();
        assert!((m.weights()[loop0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn intro_beta_at_zero_is_two_cycle() {
        let g = intro_graph();
        let sol = solve_beta_primal(&g, &[rat(0, 1)]).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.value - 1.0).abs() < 1e-9, "beta(0) = {}", sol.value);
        let m = sol.measure.unwrap();
        let v1 = g.vertex_index(&[1]).unwrap();
        let v2 = g.vertex_index(&[2]).unwrap();
        for &e in m.support(1e-9).iter() {
            let edge = g.edge(e);
            assert!(
                (edge.src == v1 && edge.dst == v2) || (edge.src == v2 && edge.dst == v1),
                "support outside the 1<->2 cycle"
            );
        }
    }

    #[test]
    fn intro_beta_at_half() {
        // cycle-combination oracle gives 1/2 (mix of the two optima)
        let g = intro_graph();
        let sol = solve_beta_primal(&g, &[rat(1, 2)]).unwrap();
        assert!((sol.value - 0.5).abs() < 1e-9);
    }

    #[test]
    fn objective_equal_constraint_gives_h() {
        let g = identity_graph();
        for (num, den) in [(0i64, 1i64), (1, 4), (1, 2), (3, 4), (1, 1)] {
            let sol = solve_beta_primal(&g, &[rat(num, den)]).unwrap();
            assert_eq!(sol.status, LpStatus::Optimal);
            let h = num as f64 / den as f64;
            assert!((sol.value - h).abs() < 1e-9, "beta({h}) = {}", sol.value);
        }
    }

    #[test]
    fn infeasible_h_is_a_status() {
        let g = identity_graph();
        let sol = solve_beta_primal(&g, &[rat(2, 1)]).unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
        let sol = solve_beta_primal(&g, &[rat(-1, 8)]).unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
    }

    #[test]
    fn decompose_cycle_measure_is_identity() {
        let g = identity_graph();
        let cycles = enumerate_simple_cycles(&g, 100).unwrap();
        for c in &cycles {
            let m = cycle_measure(&g, c).unwrap();
            let parts = decompose_into_cycles(&g, &m).unwrap();
            assert_eq!(parts.len(), 1);
            assert!((parts[0].1 - 1.0).abs() < 1e-9);
            assert_eq!(parts[0].0.period(), c.period());
        }
    }

    #[test]
    fn decompose_mixture_of_loops() {
        let g = identity_graph();
        let mut weights = vec![0.0; g.edge_count()];
        for (e, edge) in g.edges().iter().enumerate() {
            if edge.src == edge.dst {
                weights[e] = 0.5;
            }
        }
        let m = StationaryEdgeMeasure::new(&g, weights).unwrap();
        let parts = decompose_into_cycles(&g, &m).unwrap();
        assert_eq!(parts.len(), 2);
        for (c, lambda) in &parts {
            assert_eq!(c.period(), 1);
            assert!((lambda - 0.5).abs() < 1e-9);
        }
    }

    #[test]
    fn recomposition_error_is_small() {
        let g = intro_graph();
        let sol = solve_beta_primal(&g, &[rat(1, 3)]).unwrap();
        let m = sol.measure.unwrap();
        let parts = decompose_into_cycles(&g, &m).unwrap();
        let mut rebuilt = vec![0.0; g.edge_count()];
        let mut total = 0.0;
        for (c, lambda) in &parts {
            total += lambda;
            for &e in c.edges() {
                rebuilt[e] += lambda / c.period() as f64;
            }
        }
        assert!((total - 1.0).abs() < 1e-9);
        for (a, b) in rebuilt.iter().zip(m.weights()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn face_extents_unique_cycle() {
        // c = 0: maximize A alone; the 1<->2 cycle is the unique optimum
        let g = intro_graph();
        let extents = maximizing_face_extents(&g, &[0.0]).unwrap();
        assert!(extents[0].0.abs() < 1e-9);
        assert!(extents[0].1.abs() < 1e-9);
    }

    #[test]
    fn face_extents_flat_objective() {
        // A = 0, c = 0: every measure is optimal; extents span [0, 1]
        let spec = SftSpec::full_shift(2).unwrap();
        let a = Potential::constant(spec.clone(), 0.0);
        let mut cv = BTreeMap::new();
        cv.insert(vec![0], vec![rat(1, 1)]);
        let phi = Constraint::new(spec.clone(), 0, vec![rat(0, 1)], cv).unwrap();
        let g = WeightedDigraph::build(&spec, &a, &phi).unwrap();
        let extents = maximizing_face_extents(&g, &[0.0]).unwrap();
        assert!(extents[0].0.abs() < 1e-9);
        assert!((extents[0].1 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn markov_extension_of_loop_is_identity() {
        let g = identity_graph();
        let cycles = enumerate_simple_cycles(&g, 100).unwrap();
        let loop0 = cycles.iter().find(|c| c.vertices() == [0]).unwrap();
        let m = cycle_measure(&g, loop0).unwrap();
        let ext = markov_extension(&g, &m).unwrap();
        assert_eq!(ext.vertices, vec![0]);
        assert_eq!(ext.matrix, vec![vec![1.0]]);
    }

    #[test]
    fn markov_extension_of_two_cycle_is_permutation() {
        let g = identity_graph();
        let cycles = enumerate_simple_cycles(&g, 100).unwrap();
        let two = cycles.iter().find(|c| c.period() == 2).unwrap();
        let m = cycle_measure(&g, two).unwrap();
        let ext = markov_extension(&g, &m).unwrap();
        assert_eq!(ext.vertices.len(), 2);
        assert_eq!(ext.matrix[0], vec![0.0, 1.0]);
        assert_eq!(ext.matrix[1], vec![1.0, 0.0]);
    }

    #[test]
    fn markov_stationarity() {
        let g = intro_graph();
        let sol = solve_beta_primal(&g, &[rat(1, 3)]).unwrap();
        let m = sol.measure.unwrap();
        let ext = markov_extension(&g, &m).unwrap();
        let n = ext.vertices.len();
        for j in 0..n {
            let pushed: f64 = (0..n).map(|i| ext.stationary[i] * ext.matrix[i][j]).sum();
            assert!((pushed - ext.stationary[j]).abs() < 1e-9);
        }
    }
}
