//! Voronoi cells as the dual of a Delaunay triangulation.

use crate::error::Result;
use crate::geometry::delaunay::Triangulation;
use crate::rng_ppp::Point;

#[derive(Debug, Clone, PartialEq)]
pub struct VoronoiCell {
    pub generator: usize,
    /// Circumcenters of the incident Delaunay triangles, counterclockwise
    /// around the generator.
    pub vertices: Vec<Point>,
    /// Incident triangles, in the same order as `vertices`.
    pub triangles: Vec<u32>,
    /// Generators that share a Voronoi edge with this one.
    pub neighbors: Vec<usize>,
    /// Bounded cell whose incident circumdisks all lie inside the window.
    /// Cells built without a window only carry the boundedness part.
    pub interior: bool,
}

/// Axis-aligned square simulation window `[0, side]^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub side: f64,
}

impl Window {
    pub fn new(side: f64) -> Self {
        Window { side }
    }

    pub fn contains_disk(&self, center: Point, radius: f64) -> bool {
        center.x - radius >= 0.0
            && center.y - radius >= 0.0
            && center.x + radius <= self.side
            && center.y + radius <= self.side
    }
}

/// One cell per generator. Hull generators have unbounded cells; they get
/// their partial vertex fan and `interior = false`.
pub fn voronoi_cells(tri: &Triangulation) -> Result<Vec<VoronoiCell>> {
    let circles = tri.circumcircles()?;
    Ok(build_cells(tri, &circles))
}

/// Cells with `interior` set by [`is_interior`] against `window`.
pub fn voronoi_cells_in_window(tri: &Triangulation, window: Window) -> Result<Vec<VoronoiCell>> {
    let circles = tri.circumcircles()?;
    let mut cells = build_cells(tri, &circles);
    for cell in &mut cells {
        cell.interior = cell.interior && incident_disks_inside(cell, &circles, window);
    }
    Ok(cells)
}

pub(crate) fn build_cells(tri: &Triangulation, circles: &[(Point, f64)]) -> Vec<VoronoiCell> {
    let incident = tri.incident_triangles();
    (0..tri.points.len())
        .map(|g| match incident[g] {
            Some(start) => cell_around(tri, circles, g, start),
            None => VoronoiCell {
                generator: g,
                vertices: Vec::new(),
                triangles: Vec::new(),
                neighbors: Vec::new(),
                interior: false,
            },
        })
        .collect()
}

fn cell_around(tri: &Triangulation, circles: &[(Point, f64)], g: usize, start: u32) -> VoronoiCell {
    let mut vertices = Vec::with_capacity(8);
    let mut triangles = Vec::with_capacity(8);
    let mut neighbors = Vec::with_capacity(8);
    let mut t = start;
    loop {
        let verts = tri.triangles[t as usize];
        let i = verts
            .iter()
            .position(|&v| v as usize == g)
            .expect("generator in fan");
        vertices.push(circles[t as usize].0);
        triangles.push(t);
        neighbors.push(verts[(i + 1) % 3] as usize);
        match tri.neighbors[t as usize][(i + 1) % 3] {
            Some(next) if next == start => break,
            Some(next) => t = next,
            None => {
                // open fan on the hull: record the last spoke too
                neighbors.push(verts[(i + 2) % 3] as usize);
                break;
            }
        }
    }
    VoronoiCell {
        generator: g,
        vertices,
        triangles,
        neighbors,
        interior: !tri.hull[g],
    }
}

fn incident_disks_inside(cell: &VoronoiCell, circles: &[(Point, f64)], window: Window) -> bool {
    cell.triangles.iter().all(|&t| {
        let (c, r) = circles[t as usize];
        window.contains_disk(c, r)
    })
}

/// True iff the generator is off the convex hull and every incident
/// Delaunay circumdisk lies inside `window`.
pub fn is_interior(cell: &VoronoiCell, tri: &Triangulation, window: Window) -> Result<bool> {
    if tri.hull[cell.generator] || cell.triangles.is_empty() {
        return Ok(false);
    }
    for &t in &cell.triangles {
        let [a, b, c] = tri.triangle_points(t as usize);
        let center = crate::geometry::delaunay::circumcenter(a, b, c)?;
        if !window.contains_disk(center, center.dist(a)) {
            return Ok(false);
        }
    }
    Ok(true)
}
