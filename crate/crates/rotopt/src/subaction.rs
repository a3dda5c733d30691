//! Calibrated sub-actions via the max-plus eigenproblem, contact loci,
//! optimal trajectories, the differential-of-alpha average law, and an
//! empirical joint-recurrence diagnostic.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cycles::{max_mean_cycle, walk_dp, Cycle};
use crate::error::{Error, Result};
use crate::graph::WeightedDigraph;
use crate::measure::{markov_extension, StationaryEdgeMeasure};
use crate::rational::Rational;
use crate::sft::Symbol;
use crate::util::{component_is_cyclic, strongly_connected_components};

/// Relative tolerance for recognizing critical (max-mean) structure.
const CRITICAL_TOL: f64 = 1e-10;

/// A vertex function u with `a_e + u(src) - u(tgt) <= eigenvalue` everywhere
/// and equality propagated backward from the critical graph.
#[derive(Debug, Clone)]
pub struct CalibratedSubaction {
    u: Vec<f64>,
    eigenvalue: f64,
    critical_edges: Vec<usize>,
    base_potential: Vec<f64>,
}

impl CalibratedSubaction {
    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn eigenvalue(&self) -> f64 {
        self.eigenvalue
    }

    /// Edges lying on maximum-mean cycles.
    pub fn critical_edges(&self) -> &[usize] {
        &self.critical_edges
    }

    /// The per-edge weight this sub-action calibrates.
    pub fn base_potential(&self) -> &[f64] {
        &self.base_potential
    }

    /// a_e + u(src) - u(tgt) - eigenvalue; nonpositive up to roundoff.
    pub fn residual(&self, graph: &WeightedDigraph, e: usize) -> f64 {
        let edge = graph.edge(e);
        self.base_potential[e] + self.u[edge.src] - self.u[edge.dst] - self.eigenvalue
    }
}

/// Solves the max-plus eigenproblem for the given edge weight.
///
/// The eigenvalue is the maximum cycle mean; u(y) is the best normalized
/// (weight minus eigenvalue) walk weight from the critical graph to y, built
/// by |V| Bellman sweeps, anchored to zero at the smallest critical vertex.
pub fn calibrated_subaction(
    graph: &WeightedDigraph,
    weight: &[f64],
) -> Result<CalibratedSubaction> {
    let n = graph.vertex_count();
    assert_eq!(weight.len(), graph.edge_count());
    {
        let adj: Vec<Vec<usize>> = (0..n)
            .map(|v| graph.out_edges(v).iter().map(|&e| graph.edge(e).dst).collect())
            .collect();
        if strongly_connected_components(n, &adj).len() != 1 {
            return Err(Error::NotStronglyConnected);
        }
    }
    let (eigenvalue, _) = max_mean_cycle(graph, weight);
    let reduced: Vec<f64> = weight.iter().map(|w| w - eigenvalue).collect();
    let tol = CRITICAL_TOL * eigenvalue.abs().max(1.0);

    // Critical vertices: best closed-walk mean reaches the eigenvalue.
    let mut critical = vec![false; n];
    for s in 0..n {
        let dist = walk_dp(graph, weight, s, n);
        for (m, row) in dist.iter().enumerate().skip(1) {
            if let Some(w) = row[s] {
                if w / m as f64 >= eigenvalue - tol {
                    critical[s] = true;
                    break;
                }
            }
        }
    }
    let anchor = (0..n).find(|&v| critical[v]).expect("some vertex lies on a max-mean cycle");

    // Multi-source Bellman sweep: u = sup over walks from the critical set.
    let mut u = vec![f64::NEG_INFINITY; n];
    for v in 0..n {
        if critical[v] {
            u[v] = 0.0;
        }
    }
    for _ in 0..n {
        for (e, edge) in graph.edges().iter().enumerate() {
            if u[edge.src] != f64::NEG_INFINITY {
                let cand = u[edge.src] + reduced[e];
                if cand > u[edge.dst] {
                    u[edge.dst] = cand;
                }
            }
        }
    }
    debug_assert!(u.iter().all(|x| x.is_finite()), "strong connectivity reaches every vertex");
    let shift = u[anchor];
    for x in u.iter_mut() {
        *x -= shift;
    }

    // Critical edges: edges on cycles of the tight subgraph. A cycle is
    // maximal-mean exactly when every edge of it is tight.
    let tight: Vec<usize> = (0..graph.edge_count())
        .filter(|&e| {
            let edge = graph.edge(e);
            (weight[e] + u[edge.src] - u[edge.dst] - eigenvalue).abs() <= tol
        })
        .collect();
    let mut tight_adj = vec![Vec::new(); n];
    for &e in &tight {
        tight_adj[graph.edge(e).src].push(graph.edge(e).dst);
    }
    let comps = strongly_connected_components(n, &tight_adj);
    let mut comp_of = vec![usize::MAX; n];
    let mut cyclic = vec![false; comps.len()];
    for (i, comp) in comps.iter().enumerate() {
        cyclic[i] = component_is_cyclic(comp, &tight_adj);
        for &v in comp {
            comp_of[v] = i;
        }
    }
    let critical_edges: Vec<usize> = tight
        .into_iter()
        .filter(|&e| {
            let edge = graph.edge(e);
            comp_of[edge.src] == comp_of[edge.dst] && cyclic[comp_of[edge.src]]
        })
        .collect();

    Ok(CalibratedSubaction { u, eigenvalue, critical_edges, base_potential: weight.to_vec() })
}

/// Edges where the sub-action inequality is an equality within `tol`: the
/// support of every maximizing measure lives inside this set.
pub fn contact_locus(graph: &WeightedDigraph, sub: &CalibratedSubaction, tol: f64) -> Vec<usize> {
    (0..graph.edge_count())
        .filter(|&e| sub.residual(graph, e).abs() <= tol)
        .collect()
}

/// A backward orbit x_0, x_1, ... along which the calibration maximum is
/// attained at every step; the edge list pairs x_{j+1} -> x_j.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
    /// S_k phi / k over the first k traversed edges, exact.
    pub running_phi_means: Vec<Vec<Rational>>,
    /// S_k a / k over the first k traversed edges.
    pub running_a_means: Vec<f64>,
}

/// The deterministic calibrated-predecessor map: among incoming edges of v,
/// the best value of weight - eigenvalue + u(source), ties to the smallest
/// source word.
fn calibrated_predecessor(
    graph: &WeightedDigraph,
    sub: &CalibratedSubaction,
    v: usize,
) -> usize {
    let mut best: Option<(f64, usize)> = None;
    for &e in graph.in_edges(v) {
        let edge = graph.edge(e);
        let value = sub.base_potential[e] - sub.eigenvalue + sub.u[edge.src];
        let better = match best {
            None => true,
            Some((bv, be)) => value > bv || (value == bv && edge.src < graph.edge(be).src),
        };
        if better {
            best = Some((value, e));
        }
    }
    best.expect("every vertex has an incoming edge").1
}

pub fn optimal_trajectory(
    graph: &WeightedDigraph,
    sub: &CalibratedSubaction,
    x0: usize,
    steps: usize,
) -> Trajectory {
    let dim = graph.dim();
    let mut vertices = Vec::with_capacity(steps + 1);
    let mut edges = Vec::with_capacity(steps);
    let mut running_phi_means = Vec::with_capacity(steps);
    let mut running_a_means = Vec::with_capacity(steps);
    let mut phi_sum = crate::rational::vec_zero(dim);
    let mut a_sum = 0.0;
    vertices.push(x0);
    let mut cur = x0;
    for k in 1..=steps {
        let e = calibrated_predecessor(graph, sub, cur);
        let edge = graph.edge(e);
        cur = edge.src;
        vertices.push(cur);
        edges.push(e);
        phi_sum = crate::rational::vec_add(&phi_sum, &edge.constraint);
        a_sum += edge.potential;
        let kk = Rational::from_integer(k.into());
        running_phi_means.push(phi_sum.iter().map(|x| x / &kk).collect());
        running_a_means.push(a_sum / k as f64);
    }
    Trajectory { vertices, edges, running_phi_means, running_a_means }
}

/// Summary of the differential law along an optimal trajectory.
#[derive(Debug, Clone)]
pub struct DifferentialCheck {
    /// ||S_k phi / k - D alpha(c)|| for k = 1..steps.
    pub errors: Vec<f64>,
    /// True when the maximizing face certifies a unique rotation vector.
    pub unique: bool,
    /// Rotation vector of the maximizing face witness (the differential
    /// whenever `unique`).
    pub gradient: Vec<Rational>,
    /// First step at which the backward orbit enters its eventual cycle.
    pub absorption_step: usize,
    /// Period of the eventual cycle.
    pub cycle_period: usize,
    pub trajectory: Trajectory,
}

/// Builds the weight a - <c, phi>, its calibrated sub-action and an optimal
/// trajectory from x0, and compares running phi-means to the differential of
/// alpha at c.
pub fn verify_alpha_differential(
    graph: &WeightedDigraph,
    c: &[f64],
    steps: usize,
    x0: usize,
) -> Result<DifferentialCheck> {
    let weight = graph.tilted_weights(c);
    let sub = calibrated_subaction(graph, &weight)?;
    let trajectory = optimal_trajectory(graph, &sub, x0, steps);
    let (gradient, unique) = crate::beta_alpha::alpha_gradient(graph, c)?;
    let grad_f = crate::rational::vec_to_f64(&gradient);
    let errors: Vec<f64> = trajectory
        .running_phi_means
        .iter()
        .map(|mean| {
            mean.iter()
                .zip(&grad_f)
                .map(|(m, g)| (crate::rational::to_f64(m) - g).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .collect();

    // The predecessor map is deterministic, so the backward orbit is
    // eventually periodic within |V| steps.
    let mut seen = vec![usize::MAX; graph.vertex_count()];
    let mut v = x0;
    let mut step = 0;
    let (absorption_step, cycle_period) = loop {
        if seen[v] != usize::MAX {
            break (seen[v], step - seen[v]);
        }
        seen[v] = step;
        v = graph.edge(calibrated_predecessor(graph, &sub, v)).src;
        step += 1;
    };

    Ok(DifferentialCheck { errors, unique, gradient, absorption_step, cycle_period, trajectory })
}

/// Where the sampled orbits for the recurrence diagnostic come from.
#[derive(Debug, Clone, Copy)]
pub enum SamplingSource<'a> {
    /// Deterministic periodic orbit.
    Periodic(&'a Cycle),
    /// Random orbits of the Markov extension of a stationary measure.
    Stationary(&'a StationaryEdgeMeasure),
}

#[derive(Debug, Clone)]
pub struct RecurrenceStats {
    pub visits: usize,
    pub eps_grid: Vec<f64>,
    /// fractions[i]: share of sampled cylinder visits admitting a return
    /// time L <= l_max with ||S_L phi - L rot|| < eps_grid[i].
    pub fractions: Vec<f64>,
}

#[derive(Debug, Clone)]
pub enum RecurrenceReport {
    /// The cylinder was never visited in the sample.
    NoVisits,
    Stats(RecurrenceStats),
}

/// Empirical joint-recurrence diagnostic: the fraction of visits to the
/// cylinder that return to it with Birkhoff constraint sum within eps of its
/// expectation, for each eps in the grid.
pub fn recurrence_defect(
    graph: &WeightedDigraph,
    source: SamplingSource,
    cylinder: &[Symbol],
    l_max: usize,
    samples: usize,
    eps_grid: &[f64],
    seed: u64,
) -> Result<RecurrenceReport> {
    if cylinder.is_empty() {
        return Err(Error::Internal("empty cylinder word".into()));
    }
    let dim = graph.dim();
    let rot: Vec<f64> = match source {
        SamplingSource::Periodic(cycle) => cycle.rotation_vector_f64(),
        SamplingSource::Stationary(m) => m.rotation_vector().to_vec(),
    };

    // Simulate one orbit of vertices and traversed edges.
    let horizon = match source {
        SamplingSource::Periodic(cycle) => cycle.period() + l_max + cylinder.len(),
        SamplingSource::Stationary(_) => 4 * samples + l_max + cylinder.len() + 64,
    };
    let mut vertex_orbit = Vec::with_capacity(horizon + 1);
    let mut edge_orbit = Vec::with_capacity(horizon);
    match source {
        SamplingSource::Periodic(cycle) => {
            Cycle::from_edges(graph, cycle.edges().to_vec())?;
            let m = cycle.period();
            vertex_orbit.push(cycle.vertices()[0]);
            for t in 0..horizon {
                let e = cycle.edges()[t % m];
                edge_orbit.push(e);
                vertex_orbit.push(graph.edge(e).dst);
            }
        }
        SamplingSource::Stationary(measure) => {
            let ext = markov_extension(graph, measure)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut pick = |dist: &[f64]| -> usize {
                let total: f64 = dist.iter().sum();
                let mut x = rng.gen_range(0.0..total);
                for (i, &p) in dist.iter().enumerate() {
                    x -= p;
                    if x <= 0.0 {
                        return i;
                    }
                }
                dist.len() - 1
            };
            let mut local = pick(&ext.stationary);
            vertex_orbit.push(ext.vertices[local]);
            for _ in 0..horizon {
                let next_local = pick(&ext.matrix[local]);
                let v = ext.vertices[local];
                let w = ext.vertices[next_local];
                let e = graph
                    .out_edges(v)
                    .iter()
                    .copied()
                    .find(|&e| graph.edge(e).dst == w)
                    .ok_or_else(|| Error::Internal("markov step without edge".into()))?;
                edge_orbit.push(e);
                vertex_orbit.push(w);
                local = next_local;
            }
        }
    }
    let symbols: Vec<Symbol> = vertex_orbit.iter().map(|&v| graph.vertex_word(v)[0]).collect();

    let is_visit = |t: usize| -> bool {
        t + cylinder.len() <= symbols.len()
            && symbols[t..t + cylinder.len()] == *cylinder
    };
    let last_start = horizon.saturating_sub(l_max + cylinder.len());
    let mut visit_times = Vec::new();
    for t in 0..=last_start {
        if is_visit(t) {
            visit_times.push(t);
            if visit_times.len() == samples {
                break;
            }
        }
    }
    if visit_times.is_empty() {
        return Ok(RecurrenceReport::NoVisits);
    }

    let eps_min = eps_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let mut min_defects = Vec::with_capacity(visit_times.len());
    for &t in &visit_times {
        let mut sum = vec![0.0; dim];
        let mut best = f64::INFINITY;
        for l in 1..=l_max {
            let e = edge_orbit[t + l - 1];
            for (s, p) in sum.iter_mut().zip(&graph.edge(e).constraint_f64) {
                *s += p;
            }
            if is_visit(t + l) {
                let defect = sum
                    .iter()
                    .zip(&rot)
                    .map(|(s, r)| (s - l as f64 * r).powi(2))
                    .sum::<f64>()
                    .sqrt();
                if defect < best {
                    best = defect;
                    if best < eps_min {
                        break;
                    }
                }
            }
        }
        min_defects.push(best);
    }
    let fractions = eps_grid
        .iter()
        .map(|&eps| {
            min_defects.iter().filter(|&&d| d < eps).count() as f64 / min_defects.len() as f64
        })
        .collect();
    Ok(RecurrenceReport::Stats(RecurrenceStats {
        visits: min_defects.len(),
        eps_grid: eps_grid.to_vec(),
        fractions,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cycles::enumerate_simple_cycles;
    use crate::rational::rational_from_i64;
    use crate::sft::{Constraint, Potential, SftSpec};
    use std::collections::BTreeMap;

    fn rat(n: i64, d: i64) -> Rational {
        rational_from_i64(n, d)
    }

    fn two_shift(a_on_zero: f64) -> WeightedDigraph {
        let spec = SftSpec::full_shift(2).unwrap();
        let mut av = BTreeMap::new();
        av.insert(vec![0], a_on_zero);
        let a = Potential::new(spec.clone(), 0, 0.0, av).unwrap();
        let mut cv = BTreeMap::new();
        cv.insert(vec![0], vec![rat(1, 1)]);
        let phi = Constraint::new(spec.clone(), 0, vec![rat(0, 1)], cv).unwrap();
        WeightedDigraph::build(&spec, &a, &phi).unwrap()
    }

    fn intro_graph() -> WeightedDigraph {
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

    fn assert_calibrated(graph: &WeightedDigraph, sub: &CalibratedSubaction) {
        for e in 0..graph.edge_count() {
            assert!(sub.residual(graph, e) <= 1e-9, "sub-action inequality violated");
        }
        for v in 0..graph.vertex_count() {
            let best = graph
                .in_edges(v)
                .iter()
                .map(|&e| {
                    sub.base_potential()[e] + sub.u()[graph.edge(e).src] - sub.eigenvalue()
                })
                .fold(f64::NEG_INFINITY, f64::max);
            assert!((best - sub.u()[v]).abs() <= 1e-9, "calibration fails at vertex {v}");
        }
        for &e in sub.critical_edges() {
            assert!(sub.residual(graph, e).abs() <= 1e-9);
        }
    }

    #[test]
    fn two_shift_subaction_is_flat() {
        let g = two_shift(1.0);
        let sub = calibrated_subaction(&g, &g.potential_weights()).unwrap();
        assert_eq!(sub.eigenvalue(), 1.0);
        assert!(sub.u().iter().all(|&x| x.abs() < 1e-12), "{:?}", sub.u());
        assert_calibrated(&g, &sub);
    }

    #[test]
    fn constant_weight_everything_critical() {
        let g = two_shift(0.0);
        let w = vec![0.4; g.edge_count()];
        let sub = calibrated_subaction(&g, &w).unwrap();
        assert_eq!(sub.eigenvalue(), 0.4);
        assert!(sub.u().iter().all(|&x| x.abs() < 1e-12));
        assert_eq!(sub.critical_edges().len(), g.edge_count());
        assert_eq!(contact_locus(&g, &sub, 1e-9).len(), g.edge_count());
        assert_calibrated(&g, &sub);
    }

    #[test]
    fn contact_locus_contains_maximizing_loop() {
        let g = two_shift(1.0);
        let sub = calibrated_subaction(&g, &g.potential_weights()).unwrap();
        let locus = contact_locus(&g, &sub, 1e-9);
        let loop0 = g
            .out_edges(0)
            .iter()
            .copied()
            .find(|&e| g.edge(e).dst == 0)
            .unwrap();
        assert!(locus.contains(&loop0));
        // critical edges attain equality and sit on the maximum-mean cycle
        assert_eq!(sub.critical_edges(), &[loop0]);
    }

    #[test]
    fn trajectory_enters_maximizing_loop() {
        let g = two_shift(1.0);
        let sub = calibrated_subaction(&g, &g.potential_weights()).unwrap();
        let v1 = g.vertex_index(&[1]).unwrap();
        let traj = optimal_trajectory(&g, &sub, v1, 6);
        assert_eq!(traj.vertices[0], v1);
        for &v in &traj.vertices[1..] {
            assert_eq!(v, 0, "trajectory should sit on the loop at 0 after one step");
        }
        // running a-means approach the eigenvalue like 1/k
        let last = traj.running_a_means.last().unwrap();
        assert!((last - 1.0).abs() <= 1.0 / 6.0 + 1e-12);
    }

    #[test]
    fn trajectory_steps_attain_calibration() {
        let g = intro_graph();
        let sub = calibrated_subaction(&g, &g.potential_weights()).unwrap();
        let traj = optimal_trajectory(&g, &sub, 0, 32);
        for (j, &e) in traj.edges.iter().enumerate() {
            let y = traj.vertices[j];
            let best = g
                .in_edges(y)
                .iter()
                .map(|&ie| {
                    sub.base_potential()[ie] + sub.u()[g.edge(ie).src] - sub.eigenvalue()
                })
                .fold(f64::NEG_INFINITY, f64::max);
            let taken =
                sub.base_potential()[e] + sub.u()[g.edge(e).src] - sub.eigenvalue();
            assert!((taken - best).abs() <= 1e-9);
        }
    }

    #[test]
    fn differential_law_unique_case() {
        // A = 0, phi = 1_[0], c = 1: D alpha = 0, trajectory absorbed at the
        // loop over symbol 1.
        let g = two_shift(0.0);
        let check = verify_alpha_differential(&g, &[1.0], 500, 0).unwrap();
        assert!(check.unique);
        assert_eq!(check.gradient, vec![rat(0, 1)]);
        let k = check.errors.len();
        assert!(check.errors[k - 1] <= 1.5 / k as f64 + 1e-12);
    }

    #[test]
    fn differential_law_intro_case() {
        let g = intro_graph();
        let check = verify_alpha_differential(&g, &[-2.0], 400, 1).unwrap();
        assert!(check.unique);
        assert_eq!(check.gradient, vec![rat(1, 1)]);
        let k = check.errors.len();
        assert!(check.errors[k - 1] <= 2.0 * g.vertex_count() as f64 / k as f64);
    }

    #[test]
    fn differential_law_non_unique() {
        let g = two_shift(0.0);
        let check = verify_alpha_differential(&g, &[0.0], 50, 0).unwrap();
        assert!(!check.unique);
    }

    #[test]
    fn eventual_cycle_lies_in_contact_locus() {
        let g = intro_graph();
        let sub = calibrated_subaction(&g, &g.potential_weights()).unwrap();
        let traj = optimal_trajectory(&g, &sub, 0, 64);
        let locus = contact_locus(&g, &sub, 1e-9);
        // after |V| steps every further edge lies on the eventual cycle
        for &e in &traj.edges[g.vertex_count()..] {
            assert!(locus.contains(&e));
        }
    }

    #[test]
    fn periodic_source_returns_exactly() {
        let g = two_shift(1.0);
        let cycles = enumerate_simple_cycles(&g, 100).unwrap();
        let two = cycles.iter().find(|c| c.period() == 2).unwrap();
        let report = recurrence_defect(
            &g,
            SamplingSource::Periodic(two),
            &[0],
            8,
            4,
            &[1e-9, 0.1],
            7,
        )
        .unwrap();
        match report {
            RecurrenceReport::Stats(stats) => {
                assert!(stats.visits >= 1);
                assert_eq!(stats.fractions, vec![1.0, 1.0]);
            }
            RecurrenceReport::NoVisits => panic!("cycle visits the cylinder"),
        }
    }

    #[test]
    fn forbidden_cylinder_reports_no_visits() {
        let g = two_shift(1.0);
        let cycles = enumerate_simple_cycles(&g, 100).unwrap();
        let loop0 = cycles.iter().find(|c| c.vertices() == [0]).unwrap();
        let report = recurrence_defect(
            &g,
            SamplingSource::Periodic(loop0),
            &[1],
            8,
            4,
            &[0.1],
            7,
        )
        .unwrap();
        assert!(matches!(report, RecurrenceReport::NoVisits));
    }
}
