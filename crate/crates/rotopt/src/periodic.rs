//! Exact search for the best periodic orbit of bounded period whose rotation
//! vector equals a prescribed rational target.
//!
//! The dynamic program tracks the integer offset D * (S_m phi - m r) per
//! coordinate (D a common denominator), so a closed walk with offset zero has
//! rotation vector exactly r in integer arithmetic. Offsets are bounded a
//! priori by reachability and co-reachability within the period cap, and the
//! table is allocated densely.

use num::ToPrimitive;

use crate::beta_alpha;
use crate::cycles::Cycle;
use crate::error::{Error, Result};
use crate::graph::WeightedDigraph;
use crate::measure::{self, LpStatus};
use crate::polygon;
use crate::rational::{common_denominator, to_f64, Rational};

#[derive(Debug, Clone)]
pub struct PeriodicQuery {
    /// Target rotation vector r.
    pub target: Vec<Rational>,
    /// Maximum period K.
    pub max_period: usize,
    /// Cap on dense DP states (table cells across all layers).
    pub state_cap: u128,
}

pub const DEFAULT_STATE_CAP: u128 = 100_000_000;

impl PeriodicQuery {
    pub fn new(target: Vec<Rational>, max_period: usize) -> Self {
        PeriodicQuery { target, max_period, state_cap: DEFAULT_STATE_CAP }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeriodicStatus {
    Found,
    NotFoundUpToK,
    InfeasibleR,
    CapExceeded,
}

#[derive(Debug, Clone)]
pub struct PeriodicResult {
    pub status: PeriodicStatus,
    pub best_value: Option<f64>,
    pub orbit: Option<Cycle>,
    /// Best mean potential per period M = 1..=K among orbits with exact
    /// rotation vector r.
    pub by_period: Vec<Option<f64>>,
    /// Dense states the request would need; set when status is CapExceeded.
    pub states_needed: Option<u128>,
}

impl PeriodicResult {
    fn plain(status: PeriodicStatus, k: usize) -> Self {
        PeriodicResult {
            status,
            best_value: None,
            orbit: None,
            by_period: vec![None; k],
            states_needed: None,
        }
    }
}

/// Exact feasibility test where possible: rational interval comparison for
/// n = 1, exact polygon membership for n = 2 (falling back to sampled
/// separation when enumeration is capped).
fn certified_infeasible(graph: &WeightedDigraph, r: &[Rational]) -> Result<bool> {
    match graph.dim() {
        1 => {
            let (lo, hi) = beta_alpha::rotation_interval(graph);
            Ok(r[0] < lo || r[0] > hi)
        }
        2 => match beta_alpha::rotation_set(graph, beta_alpha::RotationSetMode::Exact) {
            Ok(set) => {
                let hull = set.exact_polygon.expect("exact mode fills the polygon");
                Ok(!polygon::contains_point(&hull, &r.to_vec()))
            }
            Err(Error::CycleCapExceeded { .. }) => {
                let set = beta_alpha::rotation_set(
                    graph,
                    beta_alpha::RotationSetMode::SupportSampled(
                        beta_alpha::default_directions(2, 64, 0),
                    ),
                )?;
                let margin =
                    beta_alpha::sampled_interior_margin(&set, &crate::rational::vec_to_f64(r));
                Ok(margin < -1e-9)
            }
            Err(e) => Err(e),
        },
        _ => Ok(false),
    }
}

struct OffsetTable {
    deltas: Vec<Vec<i64>>, // per edge, per coordinate
    lo: Vec<i64>,
    hi: Vec<i64>,
    ranges: Vec<usize>,
    cells: usize, // one layer, one vertex
}

/// Per-coordinate offset bounds: a state on a closed walk of length <= K
/// satisfies t_i >= max(m min_delta, -(K-m) max_delta) for its layer m, and
/// symmetrically above; minimizing over layers gives a safe dense box.
fn offset_table(graph: &WeightedDigraph, r: &[Rational], k: usize) -> Option<OffsetTable> {
    let dim = graph.dim();
    let mut denom = common_denominator(r.iter());
    for e in graph.edges() {
        denom = num::Integer::lcm(&denom, &common_denominator(e.constraint.iter()));
    }
    let d_rat = Rational::from_integer(denom);
    let mut deltas = Vec::with_capacity(graph.edge_count());
    for e in graph.edges() {
        let mut row = Vec::with_capacity(dim);
        for i in 0..dim {
            let v = (&e.constraint[i] - &r[i]) * &d_rat;
            debug_assert!(num::Integer::is_multiple_of(v.denom(), &1.into()));
            let as_int = v.numer().to_i64()?;
            if v.denom() != &1.into() || as_int.abs() > (1 << 40) {
                return None;
            }
            row.push(as_int);
        }
        deltas.push(row);
    }
    let mut lo = vec![0i64; dim];
    let mut hi = vec![0i64; dim];
    for i in 0..dim {
        let dmin = deltas.iter().map(|d| d[i]).min().unwrap();
        let dmax = deltas.iter().map(|d| d[i]).max().unwrap();
        let mut lo_i = i64::MAX;
        let mut hi_i = i64::MIN;
        for m in 0..=k as i64 {
            let rest = k as i64 - m;
            lo_i = lo_i.min((m * dmin).max(-rest * dmax));
            hi_i = hi_i.max((m * dmax).min(rest * (-dmin)));
        }
        lo[i] = lo_i.min(0);
        hi[i] = hi_i.max(0);
    }
    let ranges: Vec<usize> = (0..dim).map(|i| (hi[i] - lo[i] + 1) as usize).collect();
    let cells = ranges.iter().product();
    Some(OffsetTable { deltas, lo, hi, ranges, cells })
}

impl OffsetTable {
    fn zero_index(&self) -> usize {
        let mut idx = 0;
        for i in 0..self.lo.len() {
            idx = idx * self.ranges[i] + (-self.lo[i]) as usize;
        }
        idx
    }

    /// Flat index after stepping by edge `e` from the state with coordinates
    /// `t`; None when any coordinate leaves the box (such states cannot lie
    /// on a closed walk within the period cap).
    fn step(&self, t: &[i64], e: usize) -> Option<(Vec<i64>, usize)> {
        let mut next = Vec::with_capacity(t.len());
        let mut idx = 0;
        for i in 0..t.len() {
            let ti = t[i] + self.deltas[e][i];
            if ti < self.lo[i] || ti > self.hi[i] {
                return None;
            }
            idx = idx * self.ranges[i] + (ti - self.lo[i]) as usize;
            next.push(ti);
        }
        Some((next, idx))
    }

    fn coords_of(&self, mut idx: usize) -> Vec<i64> {
        let dim = self.lo.len();
        let mut t = vec![0i64; dim];
        for i in (0..dim).rev() {
            t[i] = (idx % self.ranges[i]) as i64 + self.lo[i];
            idx /= self.ranges[i];
        }
        t
    }
}

/// Dynamic program over (vertex, length, integer offset), maximizing the
/// accumulated potential; orbits close where the offset returns to zero.
pub fn best_periodic_with_rotation(
    graph: &WeightedDigraph,
    query: &PeriodicQuery,
) -> Result<PeriodicResult> {
    let dim = graph.dim();
    let k = query.max_period;
    if query.target.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: query.target.len() });
    }
    if k == 0 {
        return Err(Error::Internal("max_period must be at least 1".into()));
    }
    if dim > 2 {
        // refuse: the dense offset table explodes with the dimension
        return Ok(PeriodicResult {
            states_needed: None,
            ..PeriodicResult::plain(PeriodicStatus::CapExceeded, k)
        });
    }
    if certified_infeasible(graph, &query.target)? {
        return Ok(PeriodicResult::plain(PeriodicStatus::InfeasibleR, k));
    }
    let table = match offset_table(graph, &query.target, k) {
        Some(t) => t,
        None => {
            return Ok(PeriodicResult {
                states_needed: Some(u128::MAX),
                ..PeriodicResult::plain(PeriodicStatus::CapExceeded, k)
            })
        }
    };
    let nv = graph.vertex_count();
    let states = (k as u128 + 1) * nv as u128 * table.cells as u128;
    if states > query.state_cap {
        return Ok(PeriodicResult {
            states_needed: Some(states),
            ..PeriodicResult::plain(PeriodicStatus::CapExceeded, k)
        });
    }

    let cells = table.cells;
    let layer = nv * cells;
    let zero = table.zero_index();
    let mut by_period: Vec<Option<f64>> = vec![None; k];
    let mut best: Option<(f64, usize, usize)> = None; // (value_sum/m, m, start)

    let run_start = |s: usize, with_pred: bool| -> (Vec<(usize, f64)>, Vec<u32>) {
        let mut prev = vec![f64::NEG_INFINITY; layer];
        let mut cur = vec![f64::NEG_INFINITY; layer];
        let mut pred = if with_pred { vec![u32::MAX; (k + 1) * layer] } else { Vec::new() };
        let mut closes = Vec::new();
        prev[s * cells + zero] = 0.0;
        for m in 1..=k {
            cur.iter_mut().for_each(|x| *x = f64::NEG_INFINITY);
            for v in 0..nv {
                for c in 0..cells {
                    let val = prev[v * cells + c];
                    if val == f64::NEG_INFINITY {
                        continue;
                    }
                    let t = table.coords_of(c);
                    for &e in graph.out_edges(v) {
                        if let Some((_, idx)) = table.step(&t, e) {
                            let edge = graph.edge(e);
                            let cand = val + edge.potential;
                            let cell = edge.dst * cells + idx;
                            if cand > cur[cell] {
                                cur[cell] = cand;
                                if with_pred {
                                    pred[m * layer + cell] = e as u32;
                                }
                            }
                        }
                    }
                }
            }
            let closed = cur[s * cells + zero];
            if closed != f64::NEG_INFINITY {
                closes.push((m, closed));
            }
            std::mem::swap(&mut prev, &mut cur);
        }
        (closes, pred)
    };

    for s in 0..nv {
        let (closes, _) = run_start(s, false);
        for (m, sum) in closes {
            let mean = sum / m as f64;
            let slot = &mut by_period[m - 1];
            if slot.map_or(true, |b| mean > b) {
                *slot = Some(mean);
            }
            let better = match &best {
                None => true,
                Some((bv, bm, bs)) => {
                    mean > *bv
                        || (mean == *bv && (m < *bm || (m == *bm && s < *bs)))
                }
            };
            if better {
                best = Some((mean, m, s));
            }
        }
    }

    let (value, m_best, s_best) = match best {
        None => return Ok(PeriodicResult::plain(PeriodicStatus::NotFoundUpToK, k)),
        Some(b) => b,
    };
    let (_, pred) = run_start(s_best, true);
    let mut edges = Vec::with_capacity(m_best);
    let mut v = s_best;
    let mut t = vec![0i64; dim];
    for m in (1..=m_best).rev() {
        let idx = {
            let mut idx = 0;
            for i in 0..dim {
                idx = idx * table.ranges[i] + (t[i] - table.lo[i]) as usize;
            }
            idx
        };
        let e = pred[m * layer + v * cells + idx] as usize;
        edges.push(e);
        for i in 0..dim {
            t[i] -= table.deltas[e][i];
        }
        v = graph.edge(e).src;
    }
    debug_assert_eq!(v, s_best);
    edges.reverse();
    let mut orbit = Cycle::from_edges(graph, edges)?;
    orbit.canonicalize();
    debug_assert_eq!(orbit.rotation_vector(), &query.target[..]);
    Ok(PeriodicResult {
        status: PeriodicStatus::Found,
        best_value: Some(value),
        orbit: Some(orbit),
        by_period,
        states_needed: None,
    })
}

/// Nonincreasing gap sequence beta(r) - best periodic value of period <= K'.
/// Entries are +infinity until the first feasible period.
pub fn periodic_beta_gap(graph: &WeightedDigraph, r: &[Rational], k: usize) -> Result<Vec<f64>> {
    let sol = measure::solve_beta_primal(graph, r)?;
    if sol.status == LpStatus::Infeasible {
        return Err(Error::InfeasibleH);
    }
    let beta = sol.value;
    let result = best_periodic_with_rotation(graph, &PeriodicQuery::new(r.to_vec(), k))?;
    match result.status {
        PeriodicStatus::Found | PeriodicStatus::NotFoundUpToK => {}
        PeriodicStatus::InfeasibleR => return Err(Error::InfeasibleH),
        PeriodicStatus::CapExceeded => {
            return Err(Error::Internal(format!(
                "periodic search needs {} states; raise the cap or lower K",
                result.states_needed.map_or_else(|| "many".to_string(), |s| s.to_string())
            )))
        }
    }
    let mut best_so_far = f64::NEG_INFINITY;
    let gaps = result
        .by_period
        .iter()
        .map(|v| {
            if let Some(x) = v {
                best_so_far = best_so_far.max(*x);
            }
            if best_so_far == f64::NEG_INFINITY {
                f64::INFINITY
            } else {
                beta - best_so_far
            }
        })
        .collect();
    Ok(gaps)
}

/// A periodic orbit whose value `c . r - mean potential` approximates (or
/// attains) alpha(c).
#[derive(Debug, Clone)]
pub struct PeriodicApprox {
    pub target: Vec<Rational>,
    pub orbit: Cycle,
    pub value: f64,
    /// True when the witness sat on the boundary and was replaced by an
    /// interior-rotation orbit within `epsilon` of alpha.
    pub spliced: bool,
}

/// The minimum-mean-cycle witness realizes alpha(c) exactly with a rational
/// rotation vector. With `want_interior`, a boundary witness is replaced by
/// the best orbit at a target nudged toward the rotation-set centroid until
/// the value is within `epsilon` of alpha(c).
pub fn alpha_periodic_approx(
    graph: &WeightedDigraph,
    c: &[f64],
    want_interior: bool,
    epsilon: f64,
) -> Result<PeriodicApprox> {
    let (alpha_value, witness) = beta_alpha::alpha_with_witness(graph, c);
    let r = witness.rotation_vector().to_vec();
    if !want_interior {
        return Ok(PeriodicApprox { target: r, orbit: witness, value: alpha_value, spliced: false });
    }

    let (hull, centroid) = match graph.dim() {
        1 => {
            let (lo, hi) = beta_alpha::rotation_interval(graph);
            if lo == hi {
                return Err(Error::DegenerateRotationSet);
            }
            let mid = (&lo + &hi) / Rational::from_integer(2.into());
            (vec![vec![lo], vec![hi]], vec![mid])
        }
        2 => {
            for dir in [[1i64, 0i64], [0, 1], [1, 1], [1, -1]] {
                let w: Vec<Rational> = graph
                    .edges()
                    .iter()
                    .map(|e| {
                        &e.constraint[0] * Rational::from_integer(dir[0].into())
                            + &e.constraint[1] * Rational::from_integer(dir[1].into())
                    })
                    .collect();
                if beta_alpha::is_cohomologous_to_constant_rational(graph, &w) {
                    return Err(Error::DegenerateRotationSet);
                }
            }
            let set = beta_alpha::rotation_set(graph, beta_alpha::RotationSetMode::Exact)?;
            let hull = set.exact_polygon.expect("exact mode fills the polygon");
            if hull.len() < 3 {
                return Err(Error::DegenerateRotationSet);
            }
            let centroid = polygon::vertex_centroid(&hull);
            (hull, centroid)
        }
        d => return Err(Error::ExactModeUnavailable { dim: d }),
    };

    if !polygon::on_boundary(&hull, &r) {
        return Ok(PeriodicApprox { target: r, orbit: witness, value: alpha_value, spliced: false });
    }

    // Nudge the target toward the centroid; small steps keep denominators
    // (and hence the required period) manageable.
    for j in 2..=9u32 {
        let theta = Rational::new(1.into(), (1i64 << j).into());
        let target: Vec<Rational> = r
            .iter()
            .zip(&centroid)
            .map(|(ri, ci)| ri + (ci - ri) * &theta)
            .collect();
        let q = common_denominator(target.iter());
        let q_small = match q.to_i64() {
            Some(v) if v <= 96 => v as usize,
            _ => continue,
        };
        let k_try = (8 * q_small + 2 * graph.vertex_count()).min(640);
        let result = best_periodic_with_rotation(graph, &PeriodicQuery::new(target.clone(), k_try))?;
        if result.status == PeriodicStatus::Found {
            let orbit = result.orbit.unwrap();
            let value = c
                .iter()
                .zip(target.iter())
                .map(|(ci, ti)| ci * to_f64(ti))
                .sum::<f64>()
                - orbit.mean_potential();
            if value < alpha_value + epsilon {
                return Ok(PeriodicApprox { target, orbit, value, spliced: true });
            }
        }
    }
    Err(Error::Internal(
        "no interior periodic approximation within the period caps".into(),
    ))
}
