//! Incremental Delaunay triangulation.
//!
//! Points are inserted in Hilbert-curve order with a visibility walk for
//! point location and Bowyer–Watson cavity retriangulation. The convex hull
//! is closed off by ghost triangles that share a single vertex at infinity,
//! which lets hull growth go through the same cavity code as interior
//! insertion. After construction, cocircular quadrilaterals are flipped so
//! that their diagonal is the lexicographically smallest index pair.

use crate::error::{Error, Result};
use crate::geometry::predicates::{incircle, orient2d};
use crate::rng_ppp::{Point, PointSet2D};

const GHOST: u32 = u32::MAX;
const DEAD: u32 = u32::MAX - 1;

/// A Delaunay triangulation of a planar point set.
///
/// Triangles are counterclockwise. `neighbors[t][i]` is the triangle across
/// the edge opposite `triangles[t][i]`, or `None` on the convex hull.
#[derive(Debug, Clone)]
pub struct Triangulation {
    pub points: PointSet2D,
    pub triangles: Vec<[u32; 3]>,
    pub neighbors: Vec<[Option<u32>; 3]>,
    pub hull: Vec<bool>,
}

impl Triangulation {
    pub fn num_hull_points(&self) -> usize {
        self.hull.iter().filter(|&&h| h).count()
    }

    pub fn point(&self, i: u32) -> Point {
        self.points.points[i as usize]
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.point(a), self.point(b), self.point(c)]
    }

    /// Circumcenter and circumradius of every triangle.
    pub fn circumcircles(&self) -> Result<Vec<(Point, f64)>> {
        (0..self.triangles.len())
            .map(|t| {
                let [a, b, c] = self.triangle_points(t);
                let center = circumcenter(a, b, c)?;
                Ok((center, center.dist(a)))
            })
            .collect()
    }

    /// For each point, one incident triangle (hull points get a triangle
    /// whose clockwise neighbor around the point is the hull).
    pub fn incident_triangles(&self) -> Vec<Option<u32>> {
        let mut first = vec![None; self.points.len()];
        for (t, tri) in self.triangles.iter().enumerate() {
            for (i, &v) in tri.iter().enumerate() {
                let slot = &mut first[v as usize];
                // prefer a triangle with no neighbor on its clockwise side so
                // a counterclockwise pivot covers the whole fan
                let cw_open = self.neighbors[t][(i + 2) % 3].is_none();
                if slot.is_none() || cw_open {
                    *slot = Some(t as u32);
                }
            }
        }
        first
    }
}

/// Center of the circle through `a`, `b`, `c`.
pub fn circumcenter(a: Point, b: Point, c: Point) -> Result<Point> {
    let (bx, by) = (b.x - a.x, b.y - a.y);
    let (cx, cy) = (c.x - a.x, c.y - a.y);
    let d = 2.0 * (bx * cy - by * cx);
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    let scale = b2.max(c2);
    if !(d.abs() > 1e-14 * scale) || !d.is_finite() {
        return Err(Error::DegenerateInput(format!(
            "triangle ({}, {}), ({}, {}), ({}, {}) has near-zero area",
            a.x, a.y, b.x, b.y, c.x, c.y
        )));
    }
    let ux = (cy * b2 - by * c2) / d;
    let uy = (bx * c2 - cx * b2) / d;
    Ok(Point::new(a.x + ux, a.y + uy))
}

#[derive(Debug, Clone, Copy)]
struct Tri {
    v: [u32; 3],
    n: [u32; 3],
}

impl Tri {
    fn ghost_slot(&self) -> Option<usize> {
        self.v.iter().position(|&v| v == GHOST)
    }

    fn is_dead(&self) -> bool {
        self.v[0] == DEAD
    }
}

struct Builder<'a> {
    pts: &'a [Point],
    tris: Vec<Tri>,
    free: Vec<u32>,
    last: u32,
    stamp: Vec<u32>,
    epoch: u32,
    walk_offset: usize,
}

/// Delaunay triangulation of `points`.
///
/// Fails with [`Error::DegenerateInput`] for fewer than three points, all
/// points collinear, or duplicate points.
pub fn triangulate(points: PointSet2D) -> Result<Triangulation> {
    let n = points.len();
    if n < 3 {
        return Err(Error::DegenerateInput(format!(
            "need at least 3 points, got {n}"
        )));
    }
    if n >= (u32::MAX - 2) as usize {
        return Err(Error::DegenerateInput(format!("too many points: {n}")));
    }
    if let Some(p) = points
        .points
        .iter()
        .find(|p| !p.x.is_finite() || !p.y.is_finite())
    {
        return Err(Error::DegenerateInput(format!(
            "non-finite point ({}, {})",
            p.x, p.y
        )));
    }
    let order = hilbert_order(&points.points);
    let mut builder = Builder::new(&points.points);
    let rest = builder.seed_triangle(&order)?;
    for idx in rest {
        builder.insert(idx)?;
    }
    builder.canonicalize_cocircular();
    let (triangles, neighbors, hull) = builder.finish(n);
    Ok(Triangulation {
        points,
        triangles,
        neighbors,
        hull,
    })
}

impl<'a> Builder<'a> {
    fn new(pts: &'a [Point]) -> Self {
        let cap = 2 * pts.len() + 8;
        Builder {
            pts,
            tris: Vec::with_capacity(cap),
            free: Vec::new(),
            last: 0,
            stamp: Vec::with_capacity(cap),
            epoch: 0,
            walk_offset: 0,
        }
    }

    fn p(&self, v: u32) -> Point {
        self.pts[v as usize]
    }

    fn alloc(&mut self, tri: Tri) -> u32 {
        if let Some(t) = self.free.pop() {
            self.tris[t as usize] = tri;
            t
        } else {
            self.tris.push(tri);
            self.stamp.push(0);
            (self.tris.len() - 1) as u32
        }
    }

    /// Builds the first triangle and its three ghosts; returns the remaining
    /// points in insertion order.
    fn seed_triangle(&mut self, order: &[u32]) -> Result<Vec<u32>> {
        let i0 = order[0];
        let p0 = self.p(i0);
        let j1 = order
            .iter()
            .position(|&i| self.p(i) != p0)
            .ok_or_else(|| Error::DegenerateInput("all points coincide".into()))?;
        let i1 = order[j1];
        let p1 = self.p(i1);
        let j2 = order
            .iter()
            .position(|&i| orient2d(p0, p1, self.p(i)) != 0.0)
            .ok_or_else(|| Error::DegenerateInput("all points are collinear".into()))?;
        let i2 = order[j2];
        let (a, b, c) = if orient2d(p0, p1, self.p(i2)) > 0.0 {
            (i0, i1, i2)
        } else {
            (i0, i2, i1)
        };
        // slots: 0 = finite, 1..=3 ghosts across the edges opposite a, b, c
        self.tris.extend_from_slice(&[
            Tri {
                v: [a, b, c],
                n: [1, 2, 3],
            },
            Tri {
                v: [c, b, GHOST],
                n: [3, 2, 0],
            },
            Tri {
                v: [a, c, GHOST],
                n: [1, 3, 0],
            },
            Tri {
                v: [b, a, GHOST],
                n: [2, 1, 0],
            },
        ]);
        self.stamp.resize(4, 0);
        self.last = 0;
        Ok(order
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != 0 && k != j1 && k != j2)
            .map(|(_, &i)| i)
            .collect())
    }

    fn in_conflict(&self, t: u32, p: Point) -> bool {
        let tri = &self.tris[t as usize];
        match tri.ghost_slot() {
            None => {
                let [a, b, c] = tri.v;
                incircle(self.p(a), self.p(b), self.p(c), p) > 0.0
            }
            Some(g) => {
                let a = self.p(tri.v[(g + 1) % 3]);
                let b = self.p(tri.v[(g + 2) % 3]);
                let o = orient2d(a, b, p);
                o > 0.0 || (o == 0.0 && strictly_between(a, b, p))
            }
        }
    }

    fn locate(&mut self, p: Point) -> Result<u32> {
        let mut t = self.last;
        let max_steps = 4 * self.tris.len() + 16;
        for _ in 0..max_steps {
            let tri = self.tris[t as usize];
            if tri.ghost_slot().is_some() {
                return Ok(t);
            }
            self.walk_offset = (self.walk_offset + 1) % 3;
            let mut next = None;
            for k in 0..3 {
                let i = (k + self.walk_offset) % 3;
                let a = self.p(tri.v[(i + 1) % 3]);
                let b = self.p(tri.v[(i + 2) % 3]);
                if orient2d(a, b, p) < 0.0 {
                    next = Some(tri.n[i]);
                    break;
                }
            }
            match next {
                Some(nt) => t = nt,
                None => return Ok(t),
            }
        }
        // walk failed to settle; fall back to a scan
        (0..self.tris.len() as u32)
            .find(|&t| !self.tris[t as usize].is_dead() && self.in_conflict(t, p))
            .ok_or_else(|| Error::DegenerateInput("point location failed".into()))
    }

    fn insert(&mut self, pi: u32) -> Result<()> {
        let p = self.p(pi);
        let start = self.locate(p)?;
        let start_tri = self.tris[start as usize];
        if let Some(&dup) = start_tri.v.iter().find(|&&v| v != GHOST && self.p(v) == p) {
            return Err(Error::DegenerateInput(format!(
                "duplicate points {dup} and {pi}"
            )));
        }
        if !self.in_conflict(start, p) {
            return Err(Error::DegenerateInput(format!(
                "point {pi} located in a triangle it does not conflict with"
            )));
        }

        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
        let epoch = self.epoch;

        // (edge start, edge end, outer neighbor, cavity triangle)
        let mut boundary: Vec<(u32, u32, u32, u32)> = Vec::with_capacity(12);
        let mut cavity: Vec<u32> = Vec::with_capacity(8);
        let mut stack = vec![start];
        self.stamp[start as usize] = epoch;
        while let Some(t) = stack.pop() {
            cavity.push(t);
            let tri = self.tris[t as usize];
            for i in 0..3 {
                let nb = tri.n[i];
                if self.stamp[nb as usize] == epoch {
                    continue;
                }
                if self.in_conflict(nb, p) {
                    self.stamp[nb as usize] = epoch;
                    stack.push(nb);
                } else {
                    boundary.push((tri.v[(i + 1) % 3], tri.v[(i + 2) % 3], nb, t));
                }
            }
        }

        for &t in &cavity {
            self.tris[t as usize] = Tri {
                v: [DEAD; 3],
                n: [DEAD; 3],
            };
            self.free.push(t);
        }

        // new fan; remember (edge start, edge end, new triangle)
        let mut fan: Vec<(u32, u32, u32)> = Vec::with_capacity(boundary.len());
        for &(a, b, nb, _) in &boundary {
            let nt = self.alloc(Tri {
                v: [a, b, pi],
                n: [DEAD, DEAD, nb],
            });
            let outer = &mut self.tris[nb as usize];
            let j = (0..3)
                .find(|&j| outer.v[j] != a && outer.v[j] != b)
                .expect("outer neighbor shares the boundary edge");
            outer.n[j] = nt;
            fan.push((a, b, nt));
        }
        fan.sort_unstable_by_key(|&(a, _, _)| a);
        let by_start = |v: u32| -> u32 {
            let k = fan
                .binary_search_by_key(&v, |&(a, _, _)| a)
                .expect("cavity boundary is a closed cycle");
            fan[k].2
        };
        // (b, p) is opposite `a` in (a, b, p) and opposite the middle vertex
        // of the fan triangle that starts at `b`
        let links: Vec<(u32, u32)> = fan.iter().map(|&(_, b, nt)| (nt, by_start(b))).collect();
        for &(nt, next) in &links {
            self.tris[nt as usize].n[0] = next;
            self.tris[next as usize].n[1] = nt;
        }

        self.last = links
            .iter()
            .map(|&(nt, _)| nt)
            .find(|&nt| self.tris[nt as usize].ghost_slot().is_none())
            .unwrap_or(self.last);
        if self.tris[self.last as usize].is_dead()
            || self.tris[self.last as usize].ghost_slot().is_some()
        {
            self.last = (0..self.tris.len() as u32)
                .find(|&t| {
                    let tri = &self.tris[t as usize];
                    !tri.is_dead() && tri.ghost_slot().is_none()
                })
                .unwrap_or(0);
        }
        Ok(())
    }

    /// Flips cocircular diagonals until every such quadrilateral uses the
    /// diagonal with the lexicographically smallest sorted index pair.
    fn canonicalize_cocircular(&mut self) {
        loop {
            let mut flipped = false;
            for t in 0..self.tris.len() as u32 {
                let tri = self.tris[t as usize];
                if tri.is_dead() || tri.ghost_slot().is_some() {
                    continue;
                }
                for i in 0..3 {
                    let u = tri.n[i];
                    let utri = self.tris[u as usize];
                    if utri.ghost_slot().is_some() {
                        continue;
                    }
                    let (v1, v2) = (tri.v[(i + 1) % 3], tri.v[(i + 2) % 3]);
                    let j = (0..3)
                        .find(|&j| utri.v[j] != v1 && utri.v[j] != v2)
                        .unwrap();
                    let w = utri.v[j];
                    let [a, b, c] = tri.v;
                    if incircle(self.p(a), self.p(b), self.p(c), self.p(w)) != 0.0 {
                        continue;
                    }
                    let current = sorted_pair(v1, v2);
                    let alternative = sorted_pair(tri.v[i], w);
                    if alternative < current {
                        self.flip(t, i);
                        flipped = true;
                        break;
                    }
                }
            }
            if !flipped {
                break;
            }
        }
    }

    /// Flips the edge opposite vertex slot `i` of triangle `t`.
    fn flip(&mut self, t: u32, i: usize) {
        let tri = self.tris[t as usize];
        let u = tri.n[i];
        let utri = self.tris[u as usize];
        let v0 = tri.v[i];
        let v1 = tri.v[(i + 1) % 3];
        let v2 = tri.v[(i + 2) % 3];
        let j = (0..3)
            .find(|&j| utri.v[j] != v1 && utri.v[j] != v2)
            .unwrap();
        let w = utri.v[j];
        // outer neighbors of the quad v0 -> v1 -> w -> v2
        let n_v0v1 = tri.n[(i + 2) % 3];
        let n_v2v0 = tri.n[(i + 1) % 3];
        let slot_of = |vv: u32| (0..3).find(|&k| utri.v[k] == vv).unwrap();
        let n_v1w = utri.n[slot_of(v2)];
        let n_wv2 = utri.n[slot_of(v1)];

        self.tris[t as usize] = Tri {
            v: [v0, v1, w],
            n: [n_v1w, u, n_v0v1],
        };
        self.tris[u as usize] = Tri {
            v: [v0, w, v2],
            n: [n_wv2, n_v2v0, t],
        };
        self.replace_neighbor(n_v1w, u, t);
        self.replace_neighbor(n_v2v0, t, u);
    }

    fn replace_neighbor(&mut self, tri: u32, old: u32, new: u32) {
        let n = &mut self.tris[tri as usize].n;
        if let Some(k) = n.iter().position(|&x| x == old) {
            n[k] = new;
        }
    }

    #[allow(clippy::type_complexity)]
    fn finish(self, n_points: usize) -> (Vec<[u32; 3]>, Vec<[Option<u32>; 3]>, Vec<bool>) {
        let mut remap = vec![u32::MAX; self.tris.len()];
        let mut triangles = Vec::with_capacity(2 * n_points);
        let mut hull = vec![false; n_points];
        for (t, tri) in self.tris.iter().enumerate() {
            if tri.is_dead() {
                continue;
            }
            match tri.ghost_slot() {
                None => {
                    remap[t] = triangles.len() as u32;
                    triangles.push(tri.v);
                }
                Some(_) => {
                    for &v in &tri.v {
                        if v != GHOST {
                            hull[v as usize] = true;
                        }
                    }
                }
            }
        }
        let mut neighbors = Vec::with_capacity(triangles.len());
        for (t, tri) in self.tris.iter().enumerate() {
            if remap[t] == u32::MAX {
                continue;
            }
            neighbors.push(tri.n.map(|nb| {
                let r = remap[nb as usize];
                (r != u32::MAX).then_some(r)
            }));
        }
        (triangles, neighbors, hull)
    }
}

fn sorted_pair(a: u32, b: u32) -> (u32, u32) {
    if a < b { (a, b) } else { (b, a) }
}

/// `p` is collinear with `a`, `b`; true when it lies strictly between them.
fn strictly_between(a: Point, b: Point, p: Point) -> bool {
    let within = |lo: f64, hi: f64, v: f64| {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        lo < v && v < hi
    };
    if a.x != b.x {
        within(a.x, b.x, p.x)
    } else {
        within(a.y, b.y, p.y)
    }
}

/// Insertion order along a Hilbert curve over the bounding box.
fn hilbert_order(points: &[Point]) -> Vec<u32> {
    const ORDER: u32 = 16;
    let side = (1u32 << ORDER) - 1;
    let (mut xmin, mut ymin, mut xmax, mut ymax) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for p in points {
        xmin = xmin.min(p.x);
        ymin = ymin.min(p.y);
        xmax = xmax.max(p.x);
        ymax = ymax.max(p.y);
    }
    let span = (xmax - xmin).max(ymax - ymin).max(f64::MIN_POSITIVE);
    let mut keyed: Vec<(u64, u32)> = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let gx = (((p.x - xmin) / span) * side as f64) as u32;
            let gy = (((p.y - ymin) / span) * side as f64) as u32;
            (hilbert_index(ORDER, gx.min(side), gy.min(side)), i as u32)
        })
        .collect();
    keyed.sort_unstable();
    keyed.into_iter().map(|(_, i)| i).collect()
}

fn hilbert_index(order: u32, mut x: u32, mut y: u32) -> u64 {
    let full = (1u32 << order) - 1;
    let mut d: u64 = 0;
    let mut s = 1u32 << (order - 1);
    while s > 0 {
        let rx = u32::from(x & s > 0);
        let ry = u32::from(y & s > 0);
        d += u64::from(s) * u64::from(s) * u64::from((3 * rx) ^ ry);
        if ry == 0 {
            if rx == 1 {
                x = full - x;
                y = full - y;
            }
            std::mem::swap(&mut x, &mut y);
        }
        s >>= 1;
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pts(v: &[(f64, f64)]) -> PointSet2D {
        v.iter().map(|&p| Point::from(p)).collect()
    }

    fn random_points(n: usize, seed: u64) -> PointSet2D {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| Point::new(rng.random(), rng.random()))
            .collect()
    }

    fn check_empty_circumcircles(tri: &Triangulation) {
        for (t, v) in tri.triangles.iter().enumerate() {
            let [a, b, c] = tri.triangle_points(t);
            assert!(orient2d(a, b, c) > 0.0, "triangle {t} not counterclockwise");
            for (i, &p) in tri.points.points.iter().enumerate() {
                if v.contains(&(i as u32)) {
                    continue;
                }
                assert!(
                    incircle(a, b, c, p) <= 0.0,
                    "point {i} inside circumcircle of {t}"
                );
            }
        }
    }

    #[test]
    fn three_points_one_triangle() {
        let tri = triangulate(pts(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)])).unwrap();
        assert_eq!(tri.triangles.len(), 1);
        assert_eq!(tri.num_hull_points(), 3);
        assert_eq!(tri.neighbors[0], [None, None, None]);
    }

    #[test]
    fn unit_square_picks_smallest_diagonal() {
        let tri = triangulate(pts(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])).unwrap();
        assert_eq!(tri.triangles.len(), 2);
        for t in &tri.triangles {
            assert!(
                t.contains(&0) && t.contains(&2),
                "diagonal must be (0, 2): {t:?}"
            );
        }
    }

    #[test]
    fn random_sets_are_delaunay_and_satisfy_euler() {
        for seed in 0..4 {
            let tri = triangulate(random_points(200, seed)).unwrap();
            check_empty_circumcircles(&tri);
            let h = tri.num_hull_points();
            assert_eq!(tri.triangles.len(), 2 * 200 - 2 - h);
            for (t, nb) in tri.neighbors.iter().enumerate() {
                for (i, n) in nb.iter().enumerate() {
                    if let Some(n) = n {
                        let back = tri.neighbors[*n as usize];
                        assert!(
                            back.contains(&Some(t as u32)),
                            "asymmetric adjacency {t}/{i}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn integer_grid_is_canonical() {
        let mut v = Vec::new();
        for i in 0..6 {
            for j in 0..6 {
                v.push((i as f64, j as f64));
            }
        }
        let tri = triangulate(pts(&v)).unwrap();
        check_empty_circumcircles(&tri);
        assert_eq!(tri.triangles.len(), 2 * 36 - 2 - 20);
        let mut shuffled = v.clone();
        shuffled.reverse();
        let other = triangulate(pts(&shuffled)).unwrap();
        let edges = |t: &Triangulation, map: &dyn Fn(u32) -> u32| {
            let mut e: Vec<(u32, u32)> = t
                .triangles
                .iter()
                .flat_map(|&[a, b, c]| [(a, b), (b, c), (c, a)])
                .map(|(a, b)| sorted_pair(map(a), map(b)))
                .collect();
            e.sort();
            e.dedup();
            e
        };
        let n = v.len() as u32;
        assert_eq!(edges(&tri, &|i| i), edges(&other, &|i| n - 1 - i));
    }

    #[test]
    fn circumcenter_examples() {
        let c = circumcenter(
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        )
        .unwrap();
        assert_abs_diff_eq!(c.x, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(c.y, 0.5, epsilon = 1e-15);
        let c = circumcenter(
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.5, 3f64.sqrt() / 2.0),
        )
        .unwrap();
        assert_abs_diff_eq!(c.x, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(c.y, 3f64.sqrt() / 6.0, epsilon = 1e-15);
        let bad = circumcenter(
            Point::new(0.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(2.0, 2.0),
        );
        assert!(matches!(bad, Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn degenerate_inputs_rejected() {
        assert!(matches!(
            triangulate(pts(&[(0.0, 0.0), (1.0, 0.0)])),
            Err(Error::DegenerateInput(_))
        ));
        let line = pts(&[(0.0, 0.0), (1.0, 1.0), (2.0, 2.0), (3.0, 3.0)]);
        assert!(matches!(triangulate(line), Err(Error::DegenerateInput(_))));
        let dup = pts(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 0.0)]);
        assert!(matches!(triangulate(dup), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn collinear_prefix_then_off_line_point() {
        let tri = triangulate(pts(&[
            (0.0, 0.0),
            (1.0, 0.0),
            (2.0, 0.0),
            (3.0, 0.0),
            (1.5, 1.0),
        ]))
        .unwrap();
        check_empty_circumcircles(&tri);
        assert_eq!(tri.triangles.len(), 3);
    }

    #[test]
    fn hilbert_index_is_bijective_on_small_grid() {
        let mut seen = std::collections::HashSet::new();
        for x in 0..16 {
            for y in 0..16 {
                assert!(seen.insert(hilbert_index(4, x, y)));
            }
        }
        assert!(seen.iter().all(|&d| d < 256));
    }
}
