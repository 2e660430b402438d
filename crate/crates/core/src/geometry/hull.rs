//! Minimal incremental convex hull. Points are inserted in input order; the
//! facets a point sees are removed and the hole is closed by fanning the
//! horizon to the new point. No outside sets, no furthest-point selection.
//!
//! Facets are index triples into the input, counterclockwise seen from
//! outside, so interior points are `Below` every facet.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::exact::{collinear_exact, orient_exact};
use super::point::{OrientationSign, Point3};
use super::predicate::{orient_base, orient_majority, Base};

/// Orientation test driving the hull construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HullPredicate {
    /// Binary64, first spanning point as base.
    FloatSingle,
    /// Binary64 majority vote over the three bases.
    Majority,
    Exact,
}

impl HullPredicate {
    pub fn orient(self, a: &Point3, b: &Point3, c: &Point3, d: &Point3) -> OrientationSign {
        match self {
            HullPredicate::FloatSingle => orient_base(a, b, c, d, Base::First),
            HullPredicate::Majority => orient_majority(a, b, c, d).sign,
            HullPredicate::Exact => orient_exact(a, b, c, d),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HullError {
    #[error("a 3D hull needs at least 4 points, got {0}")]
    TooFewPoints(usize),
    #[error("degenerate input: all points are coplanar")]
    Degenerate,
}

/// Closed triangle mesh over the input points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullFacets {
    pub vertices: Vec<Point3>,
    pub facets: Vec<[usize; 3]>,
}

impl HullFacets {
    /// Directed edge `(u, v)` to the facets that contain it in that direction.
    /// In a valid hull every directed edge belongs to exactly one facet.
    pub fn edge_map(&self) -> BTreeMap<(usize, usize), Vec<usize>> {
        let mut map: BTreeMap<_, Vec<usize>> = BTreeMap::new();
        for (f, tri) in self.facets.iter().enumerate() {
            for k in 0..3 {
                map.entry((tri[k], tri[(k + 1) % 3])).or_default().push(f);
            }
        }
        map
    }
}

/// Why a construction step could not continue.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FailureReason {
    /// No four points were found non-coplanar by the predicate.
    NoInitialSimplex,
    /// The point was judged above every facet.
    EmptyHorizon,
    /// A visible facet's edge has no neighbour across it.
    OpenEdge { edge: [usize; 2] },
    /// A horizon edge ends at a vertex where no horizon edge starts.
    OpenHorizon { vertex: usize },
    /// A horizon vertex starts more than one horizon edge.
    BranchingHorizon { vertex: usize },
    /// The horizon splits into several loops.
    DisconnectedHorizon { loops: usize },
}

/// Structured report of an aborted construction, with the mesh as it stood.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullFailure {
    pub point_index: Option<usize>,
    pub reason: FailureReason,
    pub facets: Vec<[usize; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum HullOutcome {
    Built(HullFacets),
    Failed(HullFailure),
}

impl HullOutcome {
    pub fn built(&self) -> Option<&HullFacets> {
        match self {
            HullOutcome::Built(h) => Some(h),
            HullOutcome::Failed(_) => None,
        }
    }
}

struct Mesh<'a> {
    points: &'a [Point3],
    predicate: HullPredicate,
    facets: Vec<Option<[usize; 3]>>,
    edges: HashMap<(usize, usize), usize>,
}

impl<'a> Mesh<'a> {
    fn add(&mut self, tri: [usize; 3]) {
        let id = self.facets.len();
        for k in 0..3 {
            self.edges.insert((tri[k], tri[(k + 1) % 3]), id);
        }
        self.facets.push(Some(tri));
    }

    fn remove(&mut self, id: usize) {
        if let Some(tri) = self.facets[id].take() {
            for k in 0..3 {
                self.edges.remove(&(tri[k], tri[(k + 1) % 3]));
            }
        }
    }

    fn alive(&self) -> Vec<[usize; 3]> {
        self.facets.iter().flatten().copied().collect()
    }

    fn fail(&self, point_index: usize, reason: FailureReason) -> HullFailure {
        HullFailure {
            point_index: Some(point_index),
            reason,
            facets: self.alive(),
        }
    }

    fn insert(&mut self, index: usize) -> Result<(), HullFailure> {
        let p = &self.points[index];
        let visible: Vec<usize> = self
            .facets
            .iter()
            .enumerate()
            .filter_map(|(id, f)| f.map(|t| (id, t)))
            .filter(|(_, [i, j, k])| {
                let pts = self.points;
                self.predicate.orient(&pts[*i], &pts[*j], &pts[*k], p) == OrientationSign::Above
            })
            .map(|(id, _)| id)
            .collect();
        if visible.is_empty() {
            return Ok(());
        }
        let mut is_visible = vec![false; self.facets.len()];
        for &id in &visible {
            is_visible[id] = true;
        }

        // Horizon: edges of visible facets whose twin lies in an invisible facet.
        let mut next: BTreeMap<usize, usize> = BTreeMap::new();
        let mut order = Vec::new();
        for &id in &visible {
            let tri = self.facets[id].expect("visible facets are alive");
            for k in 0..3 {
                let (u, v) = (tri[k], tri[(k + 1) % 3]);
                let twin = *self
                    .edges
                    .get(&(v, u))
                    .ok_or_else(|| self.fail(index, FailureReason::OpenEdge { edge: [u, v] }))?;
                if is_visible[twin] {
                    continue;
                }
                if next.insert(u, v).is_some() {
                    return Err(self.fail(index, FailureReason::BranchingHorizon { vertex: u }));
                }
                order.push(u);
            }
        }
        if next.is_empty() {
            return Err(self.fail(index, FailureReason::EmptyHorizon));
        }

        // The horizon must be one simple loop.
        let start = order[0];
        let mut loop_len = 0;
        let mut at = start;
        loop {
            at = match next.get(&at) {
                Some(&v) => v,
                None => return Err(self.fail(index, FailureReason::OpenHorizon { vertex: at })),
            };
            loop_len += 1;
            if at == start || loop_len > next.len() {
                break;
            }
        }
        if at != start || loop_len != next.len() {
            let loops = count_loops(&next);
            return Err(self.fail(index, FailureReason::DisconnectedHorizon { loops }));
        }

        for id in visible {
            self.remove(id);
        }
        let mut u = start;
        for _ in 0..loop_len {
            let v = next[&u];
            self.add([u, v, index]);
            u = v;
        }
        Ok(())
    }
}

fn count_loops(next: &BTreeMap<usize, usize>) -> usize {
    let mut seen = std::collections::BTreeSet::new();
    let mut loops = 0;
    for &start in next.keys() {
        if seen.contains(&start) {
            continue;
        }
        loops += 1;
        let mut at = start;
        while seen.insert(at) {
            match next.get(&at) {
                Some(&v) => at = v,
                None => break,
            }
        }
    }
    loops
}

/// Initial simplex: the first point, the first point distinct from it, the
/// first point not collinear with those two (both decided exactly), and the
/// first remaining point the predicate finds off their plane.
fn initial_simplex(points: &[Point3], predicate: HullPredicate) -> Option<[usize; 4]> {
    let i0 = 0;
    let i1 = (1..points.len()).find(|&j| points[j] != points[i0])?;
    let i2 =
        (i1 + 1..points.len()).find(|&k| !collinear_exact(&points[i0], &points[i1], &points[k]))?;
    let (a, b, c) = (&points[i0], &points[i1], &points[i2]);
    let i3 = (0..points.len())
        .filter(|l| ![i0, i1, i2].contains(l))
        .find(|&l| predicate.orient(a, b, c, &points[l]) != OrientationSign::Coplanar)?;
    Some([i0, i1, i2, i3])
}

fn all_coplanar_exact(points: &[Point3]) -> bool {
    initial_simplex(points, HullPredicate::Exact).is_none()
}

/// Builds the hull with the chosen predicate.
///
/// With [`HullPredicate::Exact`] the result is a closed convex hull, and
/// all-coplanar input is rejected with [`HullError::Degenerate`]. Floating
/// predicates are not pre-checked; a step that cannot be carried out yields
/// [`HullOutcome::Failed`].
pub fn incremental_hull(
    points: &[Point3],
    predicate: HullPredicate,
) -> Result<HullOutcome, HullError> {
    if points.len() < 4 {
        return Err(HullError::TooFewPoints(points.len()));
    }
    if predicate == HullPredicate::Exact && all_coplanar_exact(points) {
        return Err(HullError::Degenerate);
    }
    let Some([i0, i1, i2, i3]) = initial_simplex(points, predicate) else {
        return Ok(HullOutcome::Failed(HullFailure {
            point_index: None,
            reason: FailureReason::NoInitialSimplex,
            facets: Vec::new(),
        }));
    };

    let mut mesh = Mesh {
        points,
        predicate,
        facets: Vec::new(),
        edges: HashMap::new(),
    };
    let above = predicate.orient(&points[i0], &points[i1], &points[i2], &points[i3])
        == OrientationSign::Above;
    let tets = if above {
        [[i0, i2, i1], [i0, i1, i3], [i1, i2, i3], [i0, i3, i2]]
    } else {
        [[i0, i1, i2], [i0, i3, i1], [i1, i3, i2], [i0, i2, i3]]
    };
    for tri in tets {
        mesh.add(tri);
    }

    for index in 0..points.len() {
        if [i0, i1, i2, i3].contains(&index) {
            continue;
        }
        if let Err(failure) = mesh.insert(index) {
            return Ok(HullOutcome::Failed(failure));
        }
    }
    Ok(HullOutcome::Built(HullFacets {
        vertices: points.to_vec(),
        facets: mesh.alive(),
    }))
}
