//! Rotation sets, the alpha function and its differential, the dual route to
//! beta, Fenchel checks, and the cohomology-degeneracy detector.

use crate::cycles::{
    enumerate_simple_cycles, max_mean_cycle, max_mean_cycle_rational, min_mean_cycle,
    min_mean_cycle_rational, Cycle,
};
use crate::error::{Error, Result};
use crate::graph::WeightedDigraph;
use crate::measure::{self, LpStatus};
use crate::polygon;
use crate::rational::{to_f64, Rational};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Default cap for exact-mode cycle enumeration.
pub const ENUMERATION_CAP: usize = 1_000_000;
/// Margin below which a rotation vector is not certified interior.
pub const INTERIOR_MARGIN: f64 = 1e-8;
/// Face-extent width below which the rotation vector is considered unique.
pub const UNIQUENESS_TOL: f64 = 1e-8;

/// One support-function evaluation of the rotation set.
#[derive(Debug, Clone)]
pub struct SupportSample {
    pub direction: Vec<f64>,
    /// max over measures of <direction, rotation vector>.
    pub value: f64,
    /// Exact rotation vector of the attaining cycle.
    pub witness_rotation: Vec<Rational>,
}

/// The rotation set phi_*(M_sigma), exactly (n <= 2) or via support samples.
#[derive(Debug, Clone)]
pub struct RotationSet {
    pub dim: usize,
    pub exact: bool,
    /// Extreme points, exact rationals; present only in exact mode.
    pub exact_polygon: Option<Vec<Vec<Rational>>>,
    pub support_samples: Vec<SupportSample>,
}

#[derive(Debug, Clone)]
pub enum RotationSetMode {
    /// Convex hull of all simple-cycle rotation vectors; requires n <= 2.
    Exact,
    /// Outer approximation by support values along the given directions.
    SupportSampled(Vec<Vec<f64>>),
}

/// Standard direction sets: the two endpoints for n = 1, a uniform angular
/// grid for n = 2, seeded random unit vectors above.
pub fn default_directions(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    match dim {
        0 => Vec::new(),
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count.max(4))
            .map(|i| {
                let th = 2.0 * std::f64::consts::PI * i as f64 / count.max(4) as f64;
                vec![th.cos(), th.sin()]
            })
            .collect(),
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..count.max(16))
                .map(|_| {
                    loop {
                        let v: Vec<f64> =
                            (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
                        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                        if norm > 1e-3 {
                            return v.into_iter().map(|x| x / norm).collect();
                        }
                    }
                })
                .collect()
        }
    }
}

fn support_sample(graph: &WeightedDigraph, direction: Vec<f64>) -> SupportSample {
    let weight = graph.constraint_weights(&direction);
    let (value, witness) = max_mean_cycle(graph, &weight);
    SupportSample { direction, value, witness_rotation: witness.rotation_vector().to_vec() }
}

pub fn rotation_set(graph: &WeightedDigraph, mode: RotationSetMode) -> Result<RotationSet> {
    let dim = graph.dim();
    match mode {
        RotationSetMode::Exact => {
            if dim > 2 {
                return Err(Error::ExactModeUnavailable { dim });
            }
            let cycles = enumerate_simple_cycles(graph, ENUMERATION_CAP)?;
            let points: Vec<Vec<Rational>> =
                cycles.iter().map(|c| c.rotation_vector().to_vec()).collect();
            let hull = polygon::convex_hull(&points);
            let samples = default_directions(dim, 64, 0)
                .into_iter()
                .map(|d| support_sample(graph, d))
                .collect();
            Ok(RotationSet {
                dim,
                exact: true,
                exact_polygon: Some(hull),
                support_samples: samples,
            })
        }
        RotationSetMode::SupportSampled(directions) => {
            let samples = directions.into_iter().map(|d| support_sample(graph, d)).collect();
            Ok(RotationSet { dim, exact: false, exact_polygon: None, support_samples: samples })
        }
    }
}

/// min over sampled directions of (support value - <direction, h>); positive
/// when h looks interior, negative when some sampled direction separates h.
pub fn sampled_interior_margin(set: &RotationSet, h: &[f64]) -> f64 {
    set.support_samples
        .iter()
        .map(|s| s.value - s.direction.iter().zip(h).map(|(d, x)| d * x).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

/// Exact rotation-interval endpoints for scalar constraints.
pub fn rotation_interval(graph: &WeightedDigraph) -> (Rational, Rational) {
    assert_eq!(graph.dim(), 1, "rotation_interval requires n = 1");
    let phi = graph.constraint_coordinate(0);
    let (hi, _) = max_mean_cycle_rational(graph, &phi);
    let (lo, _) = min_mean_cycle_rational(graph, &phi);
    (lo, hi)
}

/// alpha(c) = min over invariant measures of the integral of <c, phi> - A,
/// computed as a minimum mean cycle.
pub fn alpha(graph: &WeightedDigraph, c: &[f64]) -> f64 {
    alpha_with_witness(graph, c).0
}

/// alpha value together with the attaining cycle.
pub fn alpha_with_witness(graph: &WeightedDigraph, c: &[f64]) -> (f64, Cycle) {
    let weight: Vec<f64> = graph.tilted_weights(c).iter().map(|w| -w).collect();
    min_mean_cycle(graph, &weight)
}

/// Interior margin of h, exact for n = 1 and support-sampled otherwise.
fn interior_margin(graph: &WeightedDigraph, h: &[Rational]) -> Result<f64> {
    if graph.dim() == 1 {
        let (lo, hi) = rotation_interval(graph);
        let m1 = to_f64(&(h[0].clone() - lo));
        let m2 = to_f64(&(hi - h[0].clone()));
        Ok(m1.min(m2))
    } else {
        let set = rotation_set(
            graph,
            RotationSetMode::SupportSampled(default_directions(graph.dim(), 64, 0)),
        )?;
        Ok(sampled_interior_margin(&set, &crate::rational::vec_to_f64(h)))
    }
}

#[derive(Debug, Clone)]
struct Cut {
    slope: Vec<f64>,
    intercept: f64,
}

fn eval_cuts(cuts: &[Cut], c: &[f64]) -> f64 {
    cuts.iter()
        .map(|k| k.intercept + k.slope.iter().zip(c).map(|(s, x)| s * x).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Minimizes the cut model over the sup-norm box of radius r.
/// Returns (model minimum, argmin, argmin-on-boundary flag).
fn minimize_model(cuts: &[Cut], dim: usize, r: f64) -> Result<(f64, Vec<f64>, bool)> {
    if dim == 1 {
        let mut candidates = vec![-r, r];
        for i in 0..cuts.len() {
            for j in (i + 1)..cuts.len() {
                let ds = cuts[i].slope[0] - cuts[j].slope[0];
                if ds.abs() > 1e-14 {
                    let x = (cuts[j].intercept - cuts[i].intercept) / ds;
                    if x.abs() <= r {
                        candidates.push(x);
                    }
                }
            }
        }
        let mut best = (f64::INFINITY, 0.0);
        for &x in &candidates {
            let v = eval_cuts(cuts, &[x]);
            if v < best.0 - 1e-15 || (v <= best.0 + 1e-15 && x < best.1) {
                best = (v, x);
            }
        }
        let on_boundary = best.1.abs() >= r * (1.0 - 1e-9);
        return Ok((best.0, vec![best.1], on_boundary));
    }
    // Epigraph LP over the shifted box u = c + r in [0, 2r]^dim, z free.
    let nv = dim + 2; // u_1..u_dim, z_plus, z_minus
    let mut objective = vec![0.0; nv];
    objective[dim] = -1.0;
    objective[dim + 1] = 1.0;
    let mut p = crate::simplex::Problem::new(nv, objective);
    for cut in cuts {
        let mut row = vec![0.0; nv];
        for (j, s) in cut.slope.iter().enumerate() {
            row[j] = -s;
        }
        row[dim] = 1.0;
        row[dim + 1] = -1.0;
        let rhs = cut.intercept - r * cut.slope.iter().sum::<f64>();
        p.push_row(row, crate::simplex::Relation::Ge, rhs);
    }
    for j in 0..dim {
        let mut row = vec![0.0; nv];
        row[j] = 1.0;
        p.push_row(row, crate::simplex::Relation::Le, 2.0 * r);
    }
    let sol = crate::simplex::solve(&p)?;
    if sol.status != crate::simplex::Status::Optimal {
        return Err(Error::Internal("cut model LP not optimal".into()));
    }
    let c: Vec<f64> = (0..dim).map(|j| sol.x[j] - r).collect();
    let on_boundary = c.iter().any(|x| x.abs() >= r * (1.0 - 1e-9));
    Ok((-sol.value, c, on_boundary))
}

/// Dual route to beta: minimizes g(c) = <c,h> + max-mean-cycle(a - <c,phi>)
/// by cutting planes. Requires h strictly inside the rotation set.
///
/// Each oracle call at c yields the exact affine minorant
/// g(.) >= mean_a(witness) + <. , h - rot(witness)>, so the model minimum is
/// a certified lower bound and the loop stops when the gap reaches `tol`.
pub fn beta_dual(
    graph: &WeightedDigraph,
    h: &[Rational],
    tol: f64,
    max_iters: usize,
) -> Result<f64> {
    if h.len() != graph.dim() {
        return Err(Error::DimensionMismatch { expected: graph.dim(), found: h.len() });
    }
    let margin = interior_margin(graph, h)?;
    if margin <= INTERIOR_MARGIN {
        return Err(Error::NotInterior);
    }
    let h_f = crate::rational::vec_to_f64(h);
    let mut radius = 2.0 * (1.0 + graph.potential_sup_norm()) / margin;
    let mut cuts: Vec<Cut> = Vec::new();
    let mut c = vec![0.0; graph.dim()];
    let mut best = f64::INFINITY;
    let mut expansions = 0;
    for _ in 0..max_iters {
        let weight = graph.tilted_weights(&c);
        let (val, witness) = max_mean_cycle(graph, &weight);
        let g = h_f.iter().zip(&c).map(|(x, y)| x * y).sum::<f64>() + val;
        if g < best {
            best = g;
        }
        let rot = witness.rotation_vector_f64();
        cuts.push(Cut {
            slope: h_f.iter().zip(&rot).map(|(a, b)| a - b).collect(),
            intercept: witness.mean_potential(),
        });
        let (model_min, c_next, on_boundary) = minimize_model(&cuts, graph.dim(), radius)?;
        if best - model_min <= tol {
            return Ok(best);
        }
        if on_boundary && expansions < 30 {
            radius *= 2.0;
            expansions += 1;
        }
        c = c_next;
    }
    Err(Error::MaxIters { best })
}

/// The differential of alpha at c when it exists.
///
/// `unique` is true when the face extents certify a single rotation vector
/// (width <= 1e-8 in every coordinate); the returned vector is the exact
/// rotation vector of the witness cycle, which lies in the maximizing face.
pub fn alpha_gradient(graph: &WeightedDigraph, c: &[f64]) -> Result<(Vec<Rational>, bool)> {
    let extents = measure::maximizing_face_extents(graph, c)?;
    let unique = extents.iter().all(|(lo, hi)| hi - lo <= UNIQUENESS_TOL);
    let (_, witness) = alpha_with_witness(graph, c);
    Ok((witness.rotation_vector().to_vec(), unique))
}

/// Fenchel inequality record: gap = <c,h> - beta(h) - alpha(c) >= 0.
#[derive(Debug, Clone)]
pub struct FenchelRecord {
    pub h: Vec<Rational>,
    pub c: Vec<f64>,
    pub beta_h: f64,
    pub alpha_c: f64,
    pub gap: f64,
}

pub fn fenchel_check(graph: &WeightedDigraph, h: &[Rational], c: &[f64]) -> Result<FenchelRecord> {
    let sol = measure::solve_beta_primal(graph, h)?;
    if sol.status == LpStatus::Infeasible {
        return Err(Error::InfeasibleH);
    }
    let beta_h = sol.value;
    let alpha_c = alpha(graph, c);
    let pairing: f64 =
        c.iter().zip(h).map(|(ci, hi)| ci * to_f64(hi)).sum();
    Ok(FenchelRecord { h: h.to_vec(), c: c.to_vec(), beta_h, alpha_c, gap: pairing - beta_h - alpha_c })
}

/// Degenerate rotation interval detector: for locally constant data the
/// weight is cohomologous to a constant exactly when all cycle means agree.
pub fn is_cohomologous_to_constant(graph: &WeightedDigraph, weight: &[f64]) -> bool {
    let (hi, _) = max_mean_cycle(graph, weight);
    let (lo, _) = min_mean_cycle(graph, weight);
    hi - lo <= 1e-10
}

/// Exact variant for rational weights (used for constraint coordinates).
pub fn is_cohomologous_to_constant_rational(
    graph: &WeightedDigraph,
    weight: &[Rational],
) -> bool {
    let (hi, _) = max_mean_cycle_rational(graph, weight);
    let (lo, _) = min_mean_cycle_rational(graph, weight);
    hi == lo
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rational_from_i64;
    use crate::sft::{add_coboundary, Constraint, Potential, SftSpec};
    use std::collections::BTreeMap;

    fn rat(n: i64, d: i64) -> Rational {
        rational_from_i64(n, d)
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

    #[test]
    fn two_shift_rotation_interval_is_unit() {
        let g = two_shift(1.0);
        let set = rotation_set(&g, RotationSetMode::Exact).unwrap();
        let hull = set.exact_polygon.unwrap();
        assert_eq!(hull, vec![vec![rat(0, 1)], vec![rat(1, 1)]]);
    }

    #[test]
    fn constant_constraint_is_singleton() {
        let spec = SftSpec::full_shift(2).unwrap();
        let a = Potential::constant(spec.clone(), 0.0);
        let phi = Constraint::constant(spec.clone(), vec![rat(3, 7)]);
        let g = WeightedDigraph::build(&spec, &a, &phi).unwrap();
        let set = rotation_set(&g, RotationSetMode::Exact).unwrap();
        assert_eq!(set.exact_polygon.unwrap(), vec![vec![rat(3, 7)]]);
    }

    #[test]
    fn intro_rotation_set_is_unit_interval() {
        let g = intro_graph();
        let set = rotation_set(&g, RotationSetMode::Exact).unwrap();
        assert_eq!(set.exact_polygon.unwrap(), vec![vec![rat(0, 1)], vec![rat(1, 1)]]);
    }

    #[test]
    fn intro_alpha_is_min_of_c_and_minus_one() {
        let g = intro_graph();
        for (c, expect) in [(-3.0, -3.0), (-2.0, -2.0), (-1.0, -1.0), (0.0, -1.0), (1.0, -1.0)] {
            let a = alpha(&g, &[c]);
            assert!((a - expect).abs() < 1e-12, "alpha({c}) = {a}, expected {expect}");
        }
    }

    #[test]
    fn alpha_zero_weights() {
        let spec = SftSpec::full_shift(2).unwrap();
        let a = Potential::constant(spec.clone(), 0.0);
        let phi = Constraint::constant(spec.clone(), vec![rat(0, 1)]);
        let g = WeightedDigraph::build(&spec, &a, &phi).unwrap();
        assert_eq!(alpha(&g, &[0.0]), 0.0);
    }

    #[test]
    fn alpha_matches_cycle_enumeration() {
        let g = intro_graph();
        let cycles = enumerate_simple_cycles(&g, 10_000).unwrap();
        for c in [-2.5, -1.0, 0.3, 2.0] {
            let brute = cycles
                .iter()
                .map(|cy| {
                    c * to_f64(&cy.rotation_vector()[0]) - cy.mean_potential()
                })
                .fold(f64::INFINITY, f64::min);
            assert!((alpha(&g, &[c]) - brute).abs() < 1e-12);
        }
    }

    #[test]
    fn beta_dual_identity_instance() {
        let g = two_shift(1.0); // A = phi = 1_[0], beta(h) = h
        let v = beta_dual(&g, &[rat(1, 3)], 1e-7, 400).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-6, "{v}");
    }

    #[test]
    fn beta_dual_intro_instance() {
        let g = intro_graph();
        let v = beta_dual(&g, &[rat(1, 2)], 1e-7, 400).unwrap();
        assert!((v - 0.5).abs() < 1e-6, "{v}");
    }

    #[test]
    fn beta_dual_rejects_boundary() {
        let g = intro_graph();
        assert!(matches!(beta_dual(&g, &[rat(0, 1)], 1e-6, 100), Err(Error::NotInterior)));
        assert!(matches!(beta_dual(&g, &[rat(3, 2)], 1e-6, 100), Err(Error::NotInterior)));
    }

    #[test]
    fn gradient_unique_when_single_minimizer() {
        // A = 0, phi = 1_[0], c = 1: unique minimizer is the loop at 1
        let g = two_shift(0.0);
        let (grad, unique) = alpha_gradient(&g, &[1.0]).unwrap();
        assert!(unique);
        assert_eq!(grad, vec![rat(0, 1)]);
    }

    #[test]
    fn gradient_not_unique_on_flat_objective() {
        let g = two_shift(0.0);
        let (_, unique) = alpha_gradient(&g, &[0.0]).unwrap();
        assert!(!unique);
    }

    #[test]
    fn gradient_intro_at_minus_two() {
        let g = intro_graph();
        let (grad, unique) = alpha_gradient(&g, &[-2.0]).unwrap();
        assert!(unique);
        assert_eq!(grad, vec![rat(1, 1)]);
    }

    #[test]
    fn fenchel_gap_zero_at_conjugate_pair() {
        let g = intro_graph();
        let rec = fenchel_check(&g, &[rat(0, 1)], &[0.0]).unwrap();
        assert!((rec.beta_h - 1.0).abs() < 1e-9);
        assert!((rec.alpha_c + 1.0).abs() < 1e-9);
        assert!(rec.gap.abs() < 1e-9);
    }

    #[test]
    fn fenchel_infeasible_h_errors() {
        let g = intro_graph();
        assert!(matches!(
            fenchel_check(&g, &[rat(5, 1)], &[0.0]),
            Err(Error::InfeasibleH)
        ));
    }

    #[test]
    fn coboundary_weight_is_degenerate() {
        let spec = SftSpec::full_shift(2).unwrap();
        let zero = Potential::constant(spec.clone(), 0.0);
        let mut gv = BTreeMap::new();
        gv.insert(vec![0], 0.8);
        let gfun = Potential::new(spec.clone(), 0, 0.0, gv).unwrap();
        let w = add_coboundary(&zero, &gfun, &0.25).unwrap();
        let phi = Constraint::constant(spec.clone(), vec![rat(0, 1)]);
        let g = WeightedDigraph::build(&spec, &w, &phi).unwrap();
        assert!(is_cohomologous_to_constant(&g, &g.potential_weights()));
    }

    #[test]
    fn indicator_weight_is_not_degenerate() {
        let g = two_shift(1.0);
        assert!(!is_cohomologous_to_constant(&g, &g.potential_weights()));
    }
}
