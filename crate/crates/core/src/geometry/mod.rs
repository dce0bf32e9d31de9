//! Planar Delaunay triangulation and its Voronoi dual.

pub mod delaunay;
pub mod predicates;
pub mod voronoi;

pub use delaunay::{Triangulation, circumcenter, triangulate};
pub use voronoi::{VoronoiCell, Window, is_interior, voronoi_cells, voronoi_cells_in_window};
