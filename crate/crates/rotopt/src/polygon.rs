//! Exact rational convex hulls in dimension one and two, with the small
//! amount of geometry the rotation-set computations need.
//!
//! A "polygon" here is the vertex list of a convex set: one point, two
//! endpoints of a segment, or counter-clockwise extreme points starting from
//! the lexicographically smallest. Dimension-1 sets use length-1 vectors.

use num::Zero;

use crate::rational::{to_f64, Rational};

type Point = Vec<Rational>;

fn cross(o: &Point, a: &Point, b: &Point) -> Rational {
    (&a[0] - &o[0]) * (&b[1] - &o[1]) - (&a[1] - &o[1]) * (&b[0] - &o[0])
}

/// Convex hull of exact points in dimension 1 or 2.
///
/// Returns deduplicated extreme points: a single point, a two-point segment,
/// or a CCW polygon starting at the lexicographically smallest vertex.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    assert!(!points.is_empty(), "hull of empty point set");
    let dim = points[0].len();
    assert!(dim == 1 || dim == 2, "exact hulls only in dimension <= 2");
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort();
    pts.dedup();
    if dim == 1 {
        return if pts.len() == 1 {
            pts
        } else {
            vec![pts.first().unwrap().clone(), pts.last().unwrap().clone()]
        };
    }
    if pts.len() <= 2 {
        return pts;
    }
    // Andrew monotone chain, strict turns only (collinear points dropped).
    let mut lower: Vec<Point> = Vec::new();
    for p in &pts {
        while lower.len() >= 2
            && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= Rational::zero()
        {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<Point> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2
            && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= Rational::zero()
        {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() == 1 {
        // all input points collinear reduces to the segment case
        return vec![pts.first().unwrap().clone(), pts.last().unwrap().clone()];
    }
    lower
}

/// Exact membership test (boundary counts as inside).
pub fn contains_point(hull: &[Point], p: &Point) -> bool {
    match (hull.len(), hull[0].len()) {
        (1, _) => hull[0] == *p,
        (_, 1) => hull[0][0] <= p[0] && p[0] <= hull[1][0],
        (2, 2) => on_segment(&hull[0], &hull[1], p),
        (_, 2) => hull.iter().enumerate().all(|(i, a)| {
            let b = &hull[(i + 1) % hull.len()];
            cross(a, b, p) >= Rational::zero()
        }),
        _ => unreachable!(),
    }
}

fn on_segment(a: &Point, b: &Point, p: &Point) -> bool {
    if cross(a, b, p) != Rational::zero() {
        return false;
    }
    (0..2).all(|i| {
        let (lo, hi) = if a[i] <= b[i] { (&a[i], &b[i]) } else { (&b[i], &a[i]) };
        lo <= &p[i] && &p[i] <= hi
    })
}

/// Exact test for `p` on the relative boundary of the hull. For a point the
/// whole set is boundary; for a segment the two endpoints.
pub fn on_boundary(hull: &[Point], p: &Point) -> bool {
    match (hull.len(), hull[0].len()) {
        (1, _) => hull[0] == *p,
        (_, 1) => p[0] == hull[0][0] || p[0] == hull[1][0],
        (2, 2) => p == &hull[0] || p == &hull[1],
        (_, 2) => {
            contains_point(hull, p)
                && hull.iter().enumerate().any(|(i, a)| {
                    let b = &hull[(i + 1) % hull.len()];
                    cross(a, b, p) == Rational::zero()
                })
        }
        _ => unreachable!(),
    }
}

pub fn translate(hull: &[Point], b: &[Rational]) -> Vec<Point> {
    hull.iter().map(|p| crate::rational::vec_add(p, b)).collect()
}

/// Rational centroid of the vertex list: interior for full-dimensional hulls.
pub fn vertex_centroid(hull: &[Point]) -> Point {
    let dim = hull[0].len();
    let n = Rational::from_integer(hull.len().into());
    (0..dim)
        .map(|i| hull.iter().map(|p| p[i].clone()).sum::<Rational>() / n.clone())
        .collect()
}

fn point_to_segment_f64(a: &[f64], b: &[f64], p: &[f64]) -> f64 {
    let ab: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
    let ap: Vec<f64> = a.iter().zip(p).map(|(x, y)| y - x).collect();
    let denom: f64 = ab.iter().map(|x| x * x).sum();
    let t = if denom == 0.0 {
        0.0
    } else {
        (ab.iter().zip(&ap).map(|(x, y)| x * y).sum::<f64>() / denom).clamp(0.0, 1.0)
    };
    ap.iter()
        .zip(&ab)
        .map(|(x, y)| (x - t * y).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn point_to_hull_f64(hull: &[Point], p: &Point) -> f64 {
    if contains_point(hull, p) {
        return 0.0;
    }
    let pf: Vec<f64> = p.iter().map(to_f64).collect();
    let vf: Vec<Vec<f64>> = hull.iter().map(|v| v.iter().map(to_f64).collect()).collect();
    if vf.len() == 1 {
        return vf[0]
            .iter()
            .zip(&pf)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
    }
    if vf[0].len() == 1 {
        return (pf[0] - vf[0][0]).abs().min((pf[0] - vf[1][0]).abs());
    }
    (0..vf.len())
        .map(|i| point_to_segment_f64(&vf[i], &vf[(i + 1) % vf.len()], &pf))
        .fold(f64::INFINITY, f64::min)
}

/// Hausdorff distance between two convex hulls (vertex lists). For convex
/// sets the supremum is attained at a vertex, so scanning vertices suffices.
pub fn hausdorff_distance(a: &[Point], b: &[Point]) -> f64 {
    let d_ab = a.iter().map(|p| point_to_hull_f64(b, p)).fold(0.0, f64::max);
    let d_ba = b.iter().map(|p| point_to_hull_f64(a, p)).fold(0.0, f64::max);
    d_ab.max(d_ba)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rational_from_i64;

    fn pt(coords: &[(i64, i64)]) -> Point {
        coords.iter().map(|&(n, d)| rational_from_i64(n, d)).collect()
    }

    #[test]
    fn hull_of_square_with_interior_points() {
        let pts = vec![
            pt(&[(0, 1), (0, 1)]),
            pt(&[(1, 1), (0, 1)]),
            pt(&[(1, 1), (1, 1)]),
            pt(&[(0, 1), (1, 1)]),
            pt(&[(1, 2), (1, 2)]),
            pt(&[(1, 2), (0, 1)]), // collinear on the bottom edge
        ];
        let hull = convex_hull(&pts);
        assert_eq!(hull.len(), 4);
        assert_eq!(hull[0], pt(&[(0, 1), (0, 1)]));
        assert!(contains_point(&hull, &pt(&[(1, 2), (1, 2)])));
        assert!(contains_point(&hull, &pt(&[(1, 1), (1, 1)])));
        assert!(!contains_point(&hull, &pt(&[(2, 1), (0, 1)])));
        assert!(on_boundary(&hull, &pt(&[(1, 2), (0, 1)])));
        assert!(!on_boundary(&hull, &pt(&[(1, 2), (1, 2)])));
    }

    #[test]
    fn hull_dimension_one() {
        let pts = vec![pt(&[(1, 2)]), pt(&[(0, 1)]), pt(&[(3, 4)])];
        let hull = convex_hull(&pts);
        assert_eq!(hull, vec![pt(&[(0, 1)]), pt(&[(3, 4)])]);
        assert!(contains_point(&hull, &pt(&[(1, 3)])));
        assert!(on_boundary(&hull, &pt(&[(3, 4)])));
        assert!(!on_boundary(&hull, &pt(&[(1, 3)])));
    }

    #[test]
    fn hull_degenerate_cases() {
        let single = convex_hull(&[pt(&[(1, 2), (1, 2)]), pt(&[(1, 2), (1, 2)])]);
        assert_eq!(single.len(), 1);
        let collinear = convex_hull(&[
            pt(&[(0, 1), (0, 1)]),
            pt(&[(1, 1), (1, 1)]),
            pt(&[(2, 1), (2, 1)]),
        ]);
        assert_eq!(collinear.len(), 2);
        assert!(contains_point(&collinear, &pt(&[(1, 1), (1, 1)])));
        assert!(!contains_point(&collinear, &pt(&[(1, 1), (0, 1)])));
    }

    #[test]
    fn hausdorff_translated_square() {
        let sq = convex_hull(&[
            pt(&[(0, 1), (0, 1)]),
            pt(&[(1, 1), (0, 1)]),
            pt(&[(1, 1), (1, 1)]),
            pt(&[(0, 1), (1, 1)]),
        ]);
        let shifted = translate(&sq, &pt(&[(1, 4), (0, 1)]));
        let d = hausdorff_distance(&sq, &shifted);
        assert!((d - 0.25).abs() < 1e-12);
        assert_eq!(hausdorff_distance(&sq, &sq), 0.0);
    }

    #[test]
    fn centroid_is_interior() {
        let sq = convex_hull(&[
            pt(&[(0, 1), (0, 1)]),
            pt(&[(1, 1), (0, 1)]),
            pt(&[(1, 1), (1, 1)]),
            pt(&[(0, 1), (1, 1)]),
        ]);
        let c = vertex_centroid(&sq);
        assert_eq!(c, pt(&[(1, 2), (1, 2)]));
        assert!(contains_point(&sq, &c));
        assert!(!on_boundary(&sq, &c));
    }
}
