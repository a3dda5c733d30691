//! The `check` command: runs the calculus, Lipschitz, Fenchel and sub-action
//! invariant families over the supplied system plus seeded perturbations and
//! reports the worst residual per family.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rotopt::rational::{to_f64, Rational};
use rotopt::sample;
use rotopt::{
    add_coboundary, alpha, beta_alpha, io::System, measure, polygon, subaction, LpStatus,
    Potential, Result, RotationSetMode, WeightedDigraph,
};

use crate::report::CheckFamilyDoc;

struct Family {
    name: &'static str,
    tolerance: f64,
    max_residual: f64,
    cases: usize,
}

impl Family {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Family { name, tolerance, max_residual: 0.0, cases: 0 }
    }

    fn record(&mut self, residual: f64) {
        self.cases += 1;
        self.max_residual = self.max_residual.max(residual);
    }

    fn into_doc(self) -> CheckFamilyDoc {
        CheckFamilyDoc {
            family: self.name.to_string(),
            cases: self.cases,
            max_residual: self.max_residual,
            tolerance: self.tolerance,
            passed: self.cases > 0 && self.max_residual <= self.tolerance,
        }
    }
}

fn beta_at(graph: &WeightedDigraph, h: &[Rational]) -> Option<f64> {
    let sol = measure::solve_beta_primal(graph, h).ok()?;
    match sol.status {
        LpStatus::Optimal => Some(sol.value),
        LpStatus::Infeasible => None,
    }
}

/// Interior rational grid of the scalar rotation interval; empty when the
/// constraint is degenerate or vector-valued.
fn scalar_grid(graph: &WeightedDigraph, parts: i64) -> Vec<Rational> {
    if graph.dim() != 1 {
        return Vec::new();
    }
    let (lo, hi) = beta_alpha::rotation_interval(graph);
    if lo == hi {
        return Vec::new();
    }
    (1..parts)
        .map(|i| &lo + (&hi - &lo) * Rational::new(i.into(), parts.into()))
        .collect()
}

pub fn run_check(system: &System, seed: u64, cases: usize) -> Result<Vec<CheckFamilyDoc>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = &system.spec;
    let graph = system.graph()?;
    let dim = graph.dim();
    let grid = scalar_grid(&graph, 4);

    let mut coboundary = Family::new("prop2-coboundary-shift", 1e-9);
    let mut scaling = Family::new("constraint-scaling", 1e-9);
    let mut monotone = Family::new("potential-monotonicity", 1e-9);
    let mut lipschitz = Family::new("lipschitz-alpha", 1e-9);
    let mut rot_lip = Family::new("rotation-set-lipschitz", 1e-9);
    let mut fenchel = Family::new("fenchel-inequality", 1e-6);
    let mut subact = Family::new("subaction-residuals", 1e-8);
    let mut concave = Family::new("concavity", 1e-8);

    for _ in 0..cases {
        let c: Vec<f64> = (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect();

        // Proposition 2(ii): beta and alpha shift under coboundary + constant
        let g_depth = rng.gen_range(0..=1usize.min(system.potential.depth() + 1));
        let gfun = sample::random_potential(&mut rng, spec, g_depth);
        let a = rng.gen_range(-1.0..1.0);
        let shifted = add_coboundary(&system.potential, &gfun, &a)?;
        let g1 = WeightedDigraph::build(spec, &shifted, &system.constraint)?;
        coboundary.record((alpha(&g1, &c) - (alpha(&graph, &c) - a)).abs());
        if let Some(h) = grid.first() {
            if let (Some(b0), Some(b1)) =
                (beta_at(&graph, std::slice::from_ref(h)), beta_at(&g1, std::slice::from_ref(h)))
            {
                coboundary.record((b1 - b0 - a).abs());
            }
        }

        // section 3 (i): rescaling the constraint
        let s = Rational::new(
            [-3i64, -1, 2, 5][rng.gen_range(0..4)].into(),
            2.into(),
        );
        let scaled = system.constraint.scale(&s);
        let g2 = WeightedDigraph::build(spec, &system.potential, &scaled)?;
        let sf = to_f64(&s);
        let c_scaled: Vec<f64> = c.iter().map(|x| x * sf).collect();
        scaling.record((alpha(&g2, &c) - alpha(&graph, &c_scaled)).abs());
        if let Some(h) = grid.first() {
            if let (Some(b0), Some(b2)) =
                (beta_at(&graph, std::slice::from_ref(h)), beta_at(&g2, &[h * &s]))
            {
                scaling.record((b2 - b0).abs());
            }
        }

        // Proposition 2(v): pointwise larger potentials raise beta, lower alpha
        let mut bigger = BTreeMap::new();
        for w in spec.allowed_words(system.potential.depth() + 1) {
            bigger.insert(w.clone(), system.potential.eval(&w) + rng.gen_range(0.0..1.0));
        }
        let b_pot = Potential::new(spec.clone(), system.potential.depth(), 0.0, bigger)?;
        let gb = WeightedDigraph::build(spec, &b_pot, &system.constraint)?;
        monotone.record((alpha(&gb, &c) - alpha(&graph, &c)).max(0.0));
        if let Some(h) = grid.first() {
            if let (Some(b0), Some(bu)) =
                (beta_at(&graph, std::slice::from_ref(h)), beta_at(&gb, std::slice::from_ref(h)))
            {
                monotone.record((b0 - bu).max(0.0));
            }
        }

        // Lipschitz: in c, in the potential, in the constraint (Prop 7.II)
        let c2: Vec<f64> = c.iter().map(|x| x + rng.gen_range(-1.0..1.0)).collect();
        let dc = c.iter().zip(&c2).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let bound = graph.constraint_sup_norm() * dc;
        lipschitz.record(((alpha(&graph, &c) - alpha(&graph, &c2)).abs() - bound).max(0.0));

        let other = sample::perturb_potential(&mut rng, &system.potential, 0.5);
        let g_other = WeightedDigraph::build(spec, &other, &system.constraint)?;
        let pot_dist = graph
            .edges()
            .iter()
            .zip(g_other.edges())
            .map(|(x, y)| (x.potential - y.potential).abs())
            .fold(0.0, f64::max);
        lipschitz
            .record(((alpha(&graph, &c) - alpha(&g_other, &c)).abs() - pot_dist).max(0.0));

        let psi = sample::perturb_constraint(&mut rng, &system.constraint, 2, 4);
        let g_psi = WeightedDigraph::build(spec, &system.potential, &psi)?;
        let con_dist = graph
            .edges()
            .iter()
            .zip(g_psi.edges())
            .map(|(x, y)| {
                x.constraint_f64
                    .iter()
                    .zip(&y.constraint_f64)
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max);
        let c_norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        lipschitz.record(
            ((alpha(&graph, &c) - alpha(&g_psi, &c)).abs() - c_norm * con_dist).max(0.0),
        );

        // Proposition 4: rotation sets move at most as fast as the constraint
        if dim <= 2 {
            let exact = |g: &WeightedDigraph| {
                beta_alpha::rotation_set(g, RotationSetMode::Exact)
                    .ok()
                    .and_then(|s| s.exact_polygon)
            };
            if let (Some(p0), Some(p1)) = (exact(&graph), exact(&g_psi)) {
                rot_lip.record((polygon::hausdorff_distance(&p0, &p1) - con_dist).max(0.0));
            }
        }

        // Fenchel: nonnegative gap, closed by the dual multipliers
        for h in &grid {
            let rec = beta_alpha::fenchel_check(&graph, std::slice::from_ref(h), &c)?;
            fenchel.record((-rec.gap).max(0.0));
            let sol = measure::solve_beta_primal(&graph, std::slice::from_ref(h))?;
            let rec2 =
                beta_alpha::fenchel_check(&graph, std::slice::from_ref(h), &sol.dual_multipliers)?;
            fenchel.record(rec2.gap.max(0.0));
        }

        // Sub-action residuals for the tilted weight
        let weight = graph.tilted_weights(&c);
        let sub = subaction::calibrated_subaction(&graph, &weight)?;
        for e in 0..graph.edge_count() {
            subact.record(sub.residual(&graph, e).max(0.0));
        }
        for v in 0..graph.vertex_count() {
            let best = graph
                .in_edges(v)
                .iter()
                .map(|&e| weight[e] + sub.u()[graph.edge(e).src] - sub.eigenvalue())
                .fold(f64::NEG_INFINITY, f64::max);
            subact.record((best - sub.u()[v]).abs());
        }
        let lp = measure::solve_max_integral(&graph, &weight)?;
        subact.record((sub.eigenvalue() - lp.value).abs());
        let locus = subaction::contact_locus(&graph, &sub, 1e-9);
        for e in lp.measure.expect("unconstrained LP is feasible").support(1e-9) {
            if !locus.contains(&e) {
                subact.record(sub.residual(&graph, e).abs());
            }
        }

        // concavity: midpoint in c, and in h for scalar constraints
        let mid: Vec<f64> = c.iter().zip(&c2).map(|(a, b)| 0.5 * (a + b)).collect();
        concave.record(
            (0.5 * (alpha(&graph, &c) + alpha(&graph, &c2)) - alpha(&graph, &mid)).max(0.0),
        );
        if grid.len() >= 3 {
            if let (Some(b1), Some(b2), Some(bm)) = (
                beta_at(&graph, &[grid[0].clone()]),
                beta_at(&graph, &[grid[2].clone()]),
                beta_at(&graph, &[(&grid[0] + &grid[2]) / Rational::new(2.into(), 1.into())]),
            ) {
                concave.record((0.5 * (b1 + b2) - bm).max(0.0));
            }
        }
    }

    let mut docs: Vec<CheckFamilyDoc> = vec![
        coboundary.into_doc(),
        scaling.into_doc(),
        monotone.into_doc(),
        lipschitz.into_doc(),
        rot_lip.into_doc(),
        fenchel.into_doc(),
        subact.into_doc(),
        concave.into_doc(),
    ];
    // families with no applicable cases (e.g. exact rotation sets above n=2)
    docs.retain(|d| d.cases > 0);
    for doc in &docs {
        eprintln!(
            "{}: {} (cases {}, max residual {:.3e}, tolerance {:.0e})",
            doc.family,
            if doc.passed { "pass" } else { "FAIL" },
            doc.cases,
            doc.max_residual,
            doc.tolerance
        );
    }
    Ok(docs)
}
