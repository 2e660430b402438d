//! Hull validity, decided with exact arithmetic only.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::exact::orient_exact;
use super::hull::HullFacets;
use super::point::{OrientationSign, Point3};

/// Witness lists are truncated to this many entries; `violations` keeps the
/// full count.
pub const MAX_WITNESSES: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult<W> {
    pub passed: bool,
    pub violations: usize,
    pub witnesses: Vec<W>,
}

impl<W> CheckResult<W> {
    fn from_violations(all: impl IntoIterator<Item = W>) -> Self {
        let mut violations = 0;
        let mut witnesses = Vec::new();
        for w in all {
            violations += 1;
            if witnesses.len() < MAX_WITNESSES {
                witnesses.push(w);
            }
        }
        Self {
            passed: violations == 0,
            violations,
            witnesses,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EulerCheck {
    pub passed: bool,
    pub vertices: usize,
    pub edges: usize,
    pub facets: usize,
    pub characteristic: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContainmentWitness {
    pub point: usize,
    pub facet: [usize; 3],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub schema_version: u32,
    pub valid: bool,
    /// Facets with an out-of-range or repeated index; excluded from the other checks.
    pub facet_indices: CheckResult<usize>,
    /// Every undirected edge lies on exactly two facets.
    pub closure: CheckResult<[usize; 2]>,
    /// `V - E + F = 2` over referenced vertices.
    pub euler: EulerCheck,
    /// The two facets on an edge traverse it in opposite directions.
    pub orientation: CheckResult<[usize; 2]>,
    /// No input point lies strictly above a facet.
    pub containment: CheckResult<ContainmentWitness>,
}

pub fn validate_hull(points: &[Point3], hull: &HullFacets) -> ValidityReport {
    let well_formed = |t: &[usize; 3]| {
        t.iter().all(|&i| i < points.len()) && t[0] != t[1] && t[1] != t[2] && t[0] != t[2]
    };
    let facet_indices = CheckResult::from_violations(
        hull.facets
            .iter()
            .enumerate()
            .filter(|(_, t)| !well_formed(t))
            .map(|(i, _)| i),
    );
    let facets: Vec<[usize; 3]> = hull.facets.iter().copied().filter(well_formed).collect();

    let mut directed: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut undirected: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut vertices = BTreeSet::new();
    for tri in &facets {
        for k in 0..3 {
            let (u, v) = (tri[k], tri[(k + 1) % 3]);
            *directed.entry((u, v)).or_default() += 1;
            *undirected.entry((u.min(v), u.max(v))).or_default() += 1;
            vertices.insert(u);
        }
    }

    let closure = CheckResult::from_violations(
        undirected
            .iter()
            .filter(|(_, &n)| n != 2)
            .map(|(&(u, v), _)| [u, v]),
    );

    let (v, e, f) = (vertices.len(), undirected.len(), facets.len());
    let characteristic = v as i64 - e as i64 + f as i64;
    let euler = EulerCheck {
        passed: characteristic == 2,
        vertices: v,
        edges: e,
        facets: f,
        characteristic,
    };

    let count = |u, v| directed.get(&(u, v)).copied().unwrap_or(0);
    let orientation = CheckResult::from_violations(
        undirected
            .iter()
            .filter(|(_, &n)| n == 2)
            .filter(|(&(u, v), _)| count(u, v) != 1 || count(v, u) != 1)
            .map(|(&(u, v), _)| [u, v]),
    );

    let containment = CheckResult::from_violations(facets.iter().flat_map(|&tri| {
        let [i, j, k] = tri;
        points.iter().enumerate().filter_map(move |(point, p)| {
            (orient_exact(&points[i], &points[j], &points[k], p) == OrientationSign::Above)
                .then_some(ContainmentWitness { point, facet: tri })
        })
    }));

    ValidityReport {
        schema_version: crate::SCHEMA_VERSION,
        valid: facet_indices.passed
            && closure.passed
            && euler.passed
            && orientation.passed
            && containment.passed,
        facet_indices,
        closure,
        euler,
        orientation,
        containment,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{incremental_hull, HullPredicate};

    fn p(x: f64, y: f64, z: f64) -> Point3 {
        Point3::new(x, y, z).unwrap()
    }

    fn tetra() -> (Vec<Point3>, HullFacets) {
        let pts = vec![p(0., 0., 0.), p(1., 0., 0.), p(0., 1., 0.), p(0., 0., 1.)];
        let hull = incremental_hull(&pts, HullPredicate::Exact)
            .unwrap()
            .built()
            .unwrap()
            .clone();
        (pts, hull)
    }

    #[test]
    fn exact_tetrahedron_passes() {
        let (pts, hull) = tetra();
        let report = validate_hull(&pts, &hull);
        assert!(report.valid, "{report:?}");
        assert_eq!(
            (
                report.euler.vertices,
                report.euler.edges,
                report.euler.facets
            ),
            (4, 6, 4)
        );
    }

    #[test]
    fn reversed_facet_breaks_orientation() {
        let (pts, mut hull) = tetra();
        hull.facets[0].reverse();
        let report = validate_hull(&pts, &hull);
        assert!(!report.orientation.passed);
        assert!(report.closure.passed && report.euler.passed);
        let [a, b, c] = hull.facets[0];
        let edges: BTreeSet<[usize; 2]> = [[a, b], [b, c], [c, a]]
            .map(|[u, v]| [u.min(v), u.max(v)])
            .into_iter()
            .collect();
        assert!(report
            .orientation
            .witnesses
            .iter()
            .all(|w| edges.contains(w)));
        assert_eq!(report.orientation.violations, 3);
        // Reversed facet faces inward: the opposite vertex is above it.
        assert!(!report.containment.passed);
    }

    #[test]
    fn missing_facet_breaks_closure_and_euler() {
        let (pts, mut hull) = tetra();
        hull.facets.pop();
        let report = validate_hull(&pts, &hull);
        assert!(!report.closure.passed);
        assert_eq!(report.closure.violations, 3);
        assert!(!report.euler.passed);
        assert_eq!(report.euler.characteristic, 1);
    }

    #[test]
    fn outside_point_breaks_containment() {
        let (mut pts, hull) = tetra();
        pts.push(p(1., 1., 1.));
        let report = validate_hull(&pts, &hull);
        assert!(!report.containment.passed);
        assert!(report.containment.witnesses.iter().all(|w| w.point == 4));
    }

    #[test]
    fn malformed_facets_are_reported_not_panicking() {
        let (pts, mut hull) = tetra();
        hull.facets.push([0, 0, 1]);
        hull.facets.push([0, 1, 99]);
        let report = validate_hull(&pts, &hull);
        assert_eq!(report.facet_indices.witnesses, vec![4, 5]);
        assert!(report.closure.passed);
        assert!(!report.valid);
    }

    #[test]
    fn cube_passes() {
        let pts: Vec<_> = (0..8)
            .map(|i| p((i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64))
            .collect();
        let hull = incremental_hull(&pts, HullPredicate::Exact).unwrap();
        let report = validate_hull(&pts, hull.built().unwrap());
        assert!(report.valid);
        assert_eq!(report.euler.characteristic, 2);
        assert_eq!(report.euler.edges, 18);
    }
}
