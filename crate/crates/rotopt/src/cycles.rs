//! Periodic-orbit machinery: simple-cycle enumeration (the brute-force
//! oracle) and maximum/minimum mean cycle computation.
//!
//! The mean-cycle routine runs the length-indexed walk dynamic program from
//! every source and takes the best closed walk of length at most |V|; every
//! closed walk decomposes into simple cycles whose means average to the walk
//! mean, so the best value equals the best simple-cycle mean with no
//! tolerance entering the selection. The witness is reduced to a simple
//! cycle by walk decomposition.

use std::collections::HashMap;



use crate::error::{Error, Result};
use crate::graph::WeightedDigraph;
use crate::measure::StationaryEdgeMeasure;
use crate::rational::Rational;
use crate::sft::Word;
use crate::util::strongly_connected_components;

/// A closed walk in the graph: the support data of a periodic probability
/// measure. Not necessarily vertex-simple.
#[derive(Debug, Clone, PartialEq)]
pub struct Cycle {
    edges: Vec<usize>,
    vertices: Vec<usize>,
    mean_potential: f64,
    rotation_vector: Vec<Rational>,
}

impl Cycle {
    /// Validates the chaining invariants against `graph` and computes the
    /// per-period means.
    pub fn from_edges(graph: &WeightedDigraph, edges: Vec<usize>) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::MalformedCycle { detail: "empty edge list".into() });
        }
        if let Some(&e) = edges.iter().find(|&&e| e >= graph.edge_count()) {
            return Err(Error::MalformedCycle { detail: format!("edge id {e} out of range") });
        }
        for pair in edges.windows(2) {
            if graph.edge(pair[0]).dst != graph.edge(pair[1]).src {
                return Err(Error::MalformedCycle {
                    detail: format!("edges {} and {} do not chain", pair[0], pair[1]),
                });
            }
        }
        if graph.edge(*edges.last().unwrap()).dst != graph.edge(edges[0]).src {
            return Err(Error::MalformedCycle { detail: "walk does not close".into() });
        }
        let vertices: Vec<usize> = edges.iter().map(|&e| graph.edge(e).src).collect();
        let m = edges.len();
        let mean_potential =
            edges.iter().map(|&e| graph.edge(e).potential).sum::<f64>() / m as f64;
        let mut sum = crate::rational::vec_zero(graph.dim());
        for &e in &edges {
            sum = crate::rational::vec_add(&sum, &graph.edge(e).constraint);
        }
        let div = Rational::from_integer(m.into());
        let rotation_vector = sum.into_iter().map(|x| x / &div).collect();
        Ok(Cycle { edges, vertices, mean_potential, rotation_vector })
    }

    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    /// Source vertex of each edge, in traversal order.
    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn period(&self) -> usize {
        self.edges.len()
    }

    pub fn mean_potential(&self) -> f64 {
        self.mean_potential
    }

    pub fn rotation_vector(&self) -> &[Rational] {
        &self.rotation_vector
    }

    pub fn rotation_vector_f64(&self) -> Vec<f64> {
        crate::rational::vec_to_f64(&self.rotation_vector)
    }

    /// Mean of an arbitrary per-edge weight along the cycle.
    pub fn mean_weight(&self, weight: &[f64]) -> f64 {
        self.edges.iter().map(|&e| weight[e]).sum::<f64>() / self.period() as f64
    }

    pub fn mean_weight_rational(&self, weight: &[Rational]) -> Rational {
        let sum: Rational = self.edges.iter().map(|&e| weight[e].clone()).sum();
        sum / Rational::from_integer(self.period().into())
    }

    /// The periodic symbol word (first symbol of each visited vertex word).
    pub fn symbol_word(&self, graph: &WeightedDigraph) -> Word {
        self.vertices.iter().map(|&v| graph.vertex_word(v)[0]).collect()
    }

    /// Rotates the edge list so the vertex-index sequence is the
    /// lexicographically smallest among all rotations.
    pub fn canonicalize(&mut self) {
        let m = self.vertices.len();
        let mut best = 0usize;
        for s in 1..m {
            for k in 0..m {
                let a = self.vertices[(s + k) % m];
                let b = self.vertices[(best + k) % m];
                if a != b {
                    if a < b {
                        best = s;
                    }
                    break;
                }
            }
        }
        self.edges.rotate_left(best);
        self.vertices.rotate_left(best);
    }
}

/// Weight scalars the walk dynamic program can run over.
pub trait WalkWeight: Clone + PartialOrd {
    fn add(&self, rhs: &Self) -> Self;
    fn div_len(&self, len: usize) -> Self;
    fn neg(&self) -> Self;
}

impl WalkWeight for f64 {
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn div_len(&self, len: usize) -> Self {
        self / len as f64
    }
    fn neg(&self) -> Self {
        -self
    }
}

impl WalkWeight for Rational {
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn div_len(&self, len: usize) -> Self {
        self / Rational::from_integer(len.into())
    }
    fn neg(&self) -> Self {
        -self.clone()
    }
}

/// dist[m][v] = best weight of a length-m walk source -> v, None if none.
pub(crate) fn walk_dp<W: WalkWeight>(
    graph: &WeightedDigraph,
    weight: &[W],
    source: usize,
    max_len: usize,
) -> Vec<Vec<Option<W>>> {
    let n = graph.vertex_count();
    let mut dist: Vec<Vec<Option<W>>> = vec![vec![None; n]; max_len + 1];
    dist[0][source] = Some(weight[0].add(&weight[0].neg())); // zero of W
    for m in 1..=max_len {
        for (e, edge) in graph.edges().iter().enumerate() {
            if let Some(d) = &dist[m - 1][edge.src] {
                let cand = d.add(&weight[e]);
                let cell = &mut dist[m][edge.dst];
                if cell.as_ref().map_or(true, |cur| cand > *cur) {
                    *cell = Some(cand);
                }
            }
        }
    }
    dist
}

/// Same as [`walk_dp`] but records the chosen incoming edge for backtracking.
fn walk_dp_with_preds<W: WalkWeight>(
    graph: &WeightedDigraph,
    weight: &[W],
    source: usize,
    max_len: usize,
) -> (Vec<Vec<Option<W>>>, Vec<Vec<u32>>) {
    let n = graph.vertex_count();
    let mut dist: Vec<Vec<Option<W>>> = vec![vec![None; n]; max_len + 1];
    let mut pred: Vec<Vec<u32>> = vec![vec![u32::MAX; n]; max_len + 1];
    dist[0][source] = Some(weight[0].add(&weight[0].neg()));
    for m in 1..=max_len {
        for (e, edge) in graph.edges().iter().enumerate() {
            if let Some(d) = &dist[m - 1][edge.src] {
                let cand = d.add(&weight[e]);
                let cell = &mut dist[m][edge.dst];
                if cell.as_ref().map_or(true, |cur| cand > *cur) {
                    *cell = Some(cand);
                    pred[m][edge.dst] = e as u32;
                }
            }
        }
    }
    (dist, pred)
}

/// Splits a closed walk (edge list) into vertex-simple cycles.
fn decompose_closed_walk(graph: &WeightedDigraph, walk: &[usize]) -> Vec<Vec<usize>> {
    let mut cycles = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    let mut pos: HashMap<usize, usize> = HashMap::new();
    pos.insert(graph.edge(walk[0]).src, 0);
    for &e in walk {
        stack.push(e);
        let v = graph.edge(e).dst;
        if let Some(&p) = pos.get(&v) {
            let loop_edges: Vec<usize> = stack.drain(p..).collect();
            for &le in &loop_edges {
                let d = graph.edge(le).dst;
                if d != v {
                    pos.remove(&d);
                }
            }
            cycles.push(loop_edges);
        } else {
            pos.insert(v, stack.len());
        }
    }
    debug_assert!(stack.is_empty());
    cycles
}

fn best_mean_closed_walk<W: WalkWeight>(
    graph: &WeightedDigraph,
    weight: &[W],
) -> (usize, usize, W) {
    let n = graph.vertex_count();
    let mut best: Option<(usize, usize, W)> = None;
    for s in 0..n {
        let dist = walk_dp(graph, weight, s, n);
        for (m, row) in dist.iter().enumerate().skip(1) {
            if let Some(w) = &row[s] {
                let mean = w.div_len(m);
                if best.as_ref().map_or(true, |(_, _, b)| mean > *b) {
                    best = Some((s, m, mean));
                }
            }
        }
    }
    best.expect("strongly connected graph has a cycle")
}

fn max_mean_cycle_generic<W: WalkWeight>(graph: &WeightedDigraph, weight: &[W]) -> (W, Cycle) {
    assert_eq!(weight.len(), graph.edge_count());
    let (src, len, _) = best_mean_closed_walk(graph, weight);
    let (_, pred) = walk_dp_with_preds(graph, weight, src, graph.vertex_count());
    let mut walk = Vec::with_capacity(len);
    let mut v = src;
    for m in (1..=len).rev() {
        let e = pred[m][v] as usize;
        walk.push(e);
        v = graph.edge(e).src;
    }
    walk.reverse();
    // Every simple cycle inside an optimal closed walk is itself optimal;
    // pick the one with the best recomputed mean to settle float noise.
    let mean_of = |edges: &[usize]| -> W {
        let mut sum = weight[edges[0]].clone();
        for &e in &edges[1..] {
            sum = sum.add(&weight[e]);
        }
        sum.div_len(edges.len())
    };
    let mut best: Option<(W, Vec<usize>)> = None;
    for cyc in decompose_closed_walk(graph, &walk) {
        let mean = mean_of(&cyc);
        if best.as_ref().map_or(true, |(b, _)| mean > *b) {
            best = Some((mean, cyc));
        }
    }
    let (_, edges) = best.expect("closed walk contains a cycle");
    let mut cycle = Cycle::from_edges(graph, edges).expect("decomposition yields closed walks");
    cycle.canonicalize();
    // Recompute in canonical edge order so the value equals the witness mean
    // bit for bit, also under negation.
    let mean = mean_of(cycle.edges());
    (mean, cycle)
}

/// Maximum mean-weight cycle with a simple-cycle witness attaining it.
pub fn max_mean_cycle(graph: &WeightedDigraph, weight: &[f64]) -> (f64, Cycle) {
    max_mean_cycle_generic(graph, weight)
}

/// Minimum mean-weight cycle; computed as the negated maximum over negated
/// weights, so `max_mean_cycle(w) == -min_mean_cycle(-w)` exactly.
pub fn min_mean_cycle(graph: &WeightedDigraph, weight: &[f64]) -> (f64, Cycle) {
    let neg: Vec<f64> = weight.iter().map(|w| -w).collect();
    let (v, c) = max_mean_cycle(graph, &neg);
    (-v, c)
}

/// Exact-rational variant, used for rotation-interval endpoints.
pub fn max_mean_cycle_rational(graph: &WeightedDigraph, weight: &[Rational]) -> (Rational, Cycle) {
    max_mean_cycle_generic(graph, weight)
}

pub fn min_mean_cycle_rational(graph: &WeightedDigraph, weight: &[Rational]) -> (Rational, Cycle) {
    let neg: Vec<Rational> = weight.iter().map(|w| -w.clone()).collect();
    let (v, c) = max_mean_cycle_rational(graph, &neg);
    (-v, c)
}

/// All simple directed cycles, canonically rotated (smallest vertex first)
/// and sorted lexicographically by vertex sequence. Errors with the count so
/// far when more than `cap` cycles exist.
pub fn enumerate_simple_cycles(graph: &WeightedDigraph, cap: usize) -> Result<Vec<Cycle>> {
    struct Johnson<'g> {
        graph: &'g WeightedDigraph,
        blocked: Vec<bool>,
        block_map: Vec<Vec<usize>>,
        stack: Vec<usize>, // edge stack
        start: usize,
        allowed: Vec<bool>,
        cap: usize,
        out: Vec<Vec<usize>>,
    }

    impl Johnson<'_> {
        fn unblock(&mut self, v: usize) {
            self.blocked[v] = false;
            let list = std::mem::take(&mut self.block_map[v]);
            for w in list {
                if self.blocked[w] {
                    self.unblock(w);
                }
            }
        }

        fn circuit(&mut self, v: usize) -> Result<bool> {
            let mut found = false;
            self.blocked[v] = true;
            for &e in self.graph.out_edges(v) {
                let w = self.graph.edge(e).dst;
                if !self.allowed[w] {
                    continue;
                }
                if w == self.start {
                    let mut cyc = self.stack.clone();
                    cyc.push(e);
                    if self.out.len() >= self.cap {
                        return Err(Error::CycleCapExceeded {
                            found: self.out.len() + 1,
                            cap: self.cap,
                        });
                    }
                    self.out.push(cyc);
                    found = true;
                } else if !self.blocked[w] {
                    self.stack.push(e);
                    let sub = self.circuit(w)?;
                    self.stack.pop();
                    found |= sub;
                }
            }
            if found {
                self.unblock(v);
            } else {
                for &e in self.graph.out_edges(v) {
                    let w = self.graph.edge(e).dst;
                    if self.allowed[w] && !self.block_map[w].contains(&v) {
                        self.block_map[w].push(v);
                    }
                }
            }
            Ok(found)
        }
    }

    let n = graph.vertex_count();
    let mut raw: Vec<Vec<usize>> = Vec::new();
    for start in 0..n {
        // Restrict to vertices >= start and keep the strongly connected
        // component of start; every cycle is reported at its least vertex.
        let adj: Vec<Vec<usize>> = (0..n)
            .map(|v| {
                if v < start {
                    return Vec::new();
                }
                graph
                    .out_edges(v)
                    .iter()
                    .map(|&e| graph.edge(e).dst)
                    .filter(|&w| w >= start)
                    .collect()
            })
            .collect();
        let comps = strongly_connected_components(n, &adj);
        let comp = comps.iter().find(|c| c.contains(&start)).unwrap();
        let mut allowed = vec![false; n];
        for &v in comp {
            allowed[v] = true;
        }
        let has_self_loop =
            graph.out_edges(start).iter().any(|&e| graph.edge(e).dst == start);
        if comp.len() == 1 && !has_self_loop {
            continue;
        }
        let mut state = Johnson {
            graph,
            blocked: vec![false; n],
            block_map: vec![Vec::new(); n],
            stack: Vec::new(),
            start,
            allowed,
            cap,
            out: std::mem::take(&mut raw),
        };
        state.circuit(start)?;
        raw = state.out;
    }
    let mut cycles: Vec<Cycle> = raw
        .into_iter()
        .map(|edges| Cycle::from_edges(graph, edges).expect("johnson emits closed walks"))
        .collect();
    cycles.sort_by(|a, b| a.vertices().cmp(b.vertices()));
    Ok(cycles)
}

/// The periodic probability measure carried by a cycle: mass 1/M on each
/// traversed edge, multiplicities summed for non-simple walks.
pub fn cycle_measure(graph: &WeightedDigraph, cycle: &Cycle) -> Result<StationaryEdgeMeasure> {
    // Re-validate against this graph: the cycle may have been built elsewhere.
    Cycle::from_edges(graph, cycle.edges().to_vec())?;
    let mut weights = vec![0.0; graph.edge_count()];
    let share = 1.0 / cycle.period() as f64;
    for &e in cycle.edges() {
        weights[e] += share;
    }
    StationaryEdgeMeasure::new(graph, weights)
}
