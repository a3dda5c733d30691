//! Higher-block presentation of a subshift with edge weights.
//!
//! Vertices are allowed words of length `L`, edges are allowed `(L+1)`-words;
//! a depth-`k` function with `k <= L` becomes an edge weight read off the
//! first `k+1` symbols of the edge word. Birkhoff sums of the original
//! functions over periodic symbol sequences equal edge-weight sums over the
//! lifted cycles, exactly for rationals.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::rational::{to_f64, Rational};
use crate::sft::{Constraint, Potential, SftSpec, Symbol, Word};
use crate::util::strongly_connected_components;

#[derive(Debug, Clone)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    /// Potential value a_e.
    pub potential: f64,
    /// Constraint vector phi_e, exact.
    pub constraint: Vec<Rational>,
    /// phi_e converted once to f64 for weight assembly.
    pub constraint_f64: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct WeightedDigraph {
    spec: SftSpec,
    block_len: usize,
    dim: usize,
    vertices: Vec<Word>,
    vertex_index: BTreeMap<Word, usize>,
    edges: Vec<Edge>,
    out_edges: Vec<Vec<usize>>,
    in_edges: Vec<Vec<usize>>,
}

impl WeightedDigraph {
    /// Builds the common higher-block graph for a potential and a constraint
    /// defined over `spec`. Vertices with no outgoing or no incoming edge are
    /// pruned iteratively; the surviving graph must be strongly connected.
    pub fn build(spec: &SftSpec, potential: &Potential, constraint: &Constraint) -> Result<Self> {
        if potential.spec() != spec || constraint.spec() != spec {
            return Err(Error::SpecMismatch);
        }
        let depth = potential.depth().max(constraint.depth());
        // Vertices of length zero are degenerate; the 1-block graph already
        // carries every depth-0 function on its edges.
        let block_len = depth.max(1);
        let dim = constraint.dim();

        let words = spec.allowed_words(block_len);
        let mut index: BTreeMap<Word, usize> = BTreeMap::new();
        for (i, w) in words.iter().enumerate() {
            index.insert(w.clone(), i);
        }
        // edge = allowed (L+1)-word
        let mut alive = vec![true; words.len()];
        let mut raw_edges: Vec<(usize, usize, Word)> = Vec::new();
        for w in spec.allowed_words(block_len + 1) {
            let src = index[&w[..block_len]];
            let dst = index[&w[1..]];
            raw_edges.push((src, dst, w));
        }

        // Iterated removal of vertices missing an in- or out-edge.
        loop {
            let mut out_deg = vec![0usize; words.len()];
            let mut in_deg = vec![0usize; words.len()];
            for &(s, d, _) in &raw_edges {
                if alive[s] && alive[d] {
                    out_deg[s] += 1;
                    in_deg[d] += 1;
                }
            }
            let mut changed = false;
            for v in 0..words.len() {
                if alive[v] && (out_deg[v] == 0 || in_deg[v] == 0) {
                    alive[v] = false;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        if !alive.iter().any(|&a| a) {
            return Err(Error::NoCycle);
        }

        let mut relabel = vec![usize::MAX; words.len()];
        let mut vertices = Vec::new();
        for (old, w) in words.iter().enumerate() {
            if alive[old] {
                relabel[old] = vertices.len();
                vertices.push(w.clone());
            }
        }
        let mut edges = Vec::new();
        for (s, d, w) in raw_edges {
            if alive[s] && alive[d] {
                let phi = constraint.eval(&w);
                let phi_f: Vec<f64> = phi.iter().map(to_f64).collect();
                edges.push(Edge {
                    src: relabel[s],
                    dst: relabel[d],
                    potential: potential.eval(&w),
                    constraint: phi,
                    constraint_f64: phi_f,
                });
            }
        }
        edges.sort_by_key(|e| (e.src, e.dst));

        let n = vertices.len();
        let mut out_edges = vec![Vec::new(); n];
        let mut in_edges = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            out_edges[e.src].push(i);
            in_edges[e.dst].push(i);
        }

        let adj: Vec<Vec<usize>> =
            out_edges.iter().map(|es| es.iter().map(|&i| edges[i].dst).collect()).collect();
        if strongly_connected_components(n, &adj).len() != 1 {
            return Err(Error::NotTransitive);
        }

        let vertex_index = vertices.iter().cloned().zip(0..).collect();
        Ok(WeightedDigraph {
            spec: spec.clone(),
            block_len,
            dim,
            vertices,
            vertex_index,
            edges,
            out_edges,
            in_edges,
        })
    }

    pub fn spec(&self) -> &SftSpec {
        &self.spec
    }

    /// Length of the vertex words.
    pub fn block_len(&self) -> usize {
        self.block_len
    }

    /// Constraint dimension n.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn vertex_word(&self, v: usize) -> &Word {
        &self.vertices[v]
    }

    pub fn vertex_index(&self, w: &[Symbol]) -> Option<usize> {
        self.vertex_index.get(w).copied()
    }

    /// The (L+1)-word an edge reads.
    pub fn edge_word(&self, e: usize) -> Word {
        let edge = &self.edges[e];
        let mut w = self.vertices[edge.src].clone();
        w.push(*self.vertices[edge.dst].last().unwrap());
        w
    }

    pub fn out_edges(&self, v: usize) -> &[usize] {
        &self.out_edges[v]
    }

    pub fn in_edges(&self, v: usize) -> &[usize] {
        &self.in_edges[v]
    }

    /// Per-edge potential weights a_e.
    pub fn potential_weights(&self) -> Vec<f64> {
        self.edges.iter().map(|e| e.potential).collect()
    }

    /// Per-edge weights ⟨c, phi_e⟩.
    pub fn constraint_weights(&self, c: &[f64]) -> Vec<f64> {
        assert_eq!(c.len(), self.dim);
        self.edges
            .iter()
            .map(|e| e.constraint_f64.iter().zip(c).map(|(p, ci)| p * ci).sum())
            .collect()
    }

    /// Per-edge weights a_e − ⟨c, phi_e⟩ (the potential of the tilted problem).
    pub fn tilted_weights(&self, c: &[f64]) -> Vec<f64> {
        let cw = self.constraint_weights(c);
        self.edges.iter().zip(cw).map(|(e, s)| e.potential - s).collect()
    }

    /// Per-edge exact rational weights for one constraint coordinate.
    pub fn constraint_coordinate(&self, i: usize) -> Vec<Rational> {
        self.edges.iter().map(|e| e.constraint[i].clone()).collect()
    }

    /// Max |a_e| over edges: the sup-norm of the potential on the recurrent
    /// part of the shift.
    pub fn potential_sup_norm(&self) -> f64 {
        self.edges.iter().map(|e| e.potential.abs()).fold(0.0, f64::max)
    }

    /// Max Euclidean norm of phi_e over edges.
    pub fn constraint_sup_norm(&self) -> f64 {
        self.edges
            .iter()
            .map(|e| e.constraint_f64.iter().map(|x| x * x).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    /// Lifts a periodic symbol word to its edge cycle; `None` when the word
    /// is not allowed (including the wrap-around) or visits pruned vertices.
    pub fn lift_periodic_word(&self, word: &[Symbol]) -> Option<Vec<usize>> {
        let m = word.len();
        if m == 0 {
            return None;
        }
        let at = |i: usize| word[i % m];
        let mut cycle = Vec::with_capacity(m);
        for j in 0..m {
            let v_word: Word = (0..self.block_len).map(|i| at(j + i)).collect();
            let w_word: Word = (0..self.block_len).map(|i| at(j + 1 + i)).collect();
            let (v, w) = (self.vertex_index(&v_word)?, self.vertex_index(&w_word)?);
            let e = *self.out_edges[v].iter().find(|&&e| self.edges[e].dst == w)?;
            cycle.push(e);
        }
        Some(cycle)
    }
}
