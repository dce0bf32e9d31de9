//! Orientation and in-circle tests with adaptive exact fallback.

use robust::Coord;

use crate::rng_ppp::Point;

#[inline]
fn coord(p: Point) -> Coord<f64> {
    Coord { x: p.x, y: p.y }
}

/// Positive when `a, b, c` turn counterclockwise, negative when clockwise,
/// exactly zero when collinear.
#[inline]
pub fn orient2d(a: Point, b: Point, c: Point) -> f64 {
    robust::orient2d(coord(a), coord(b), coord(c))
}

/// Positive when `d` lies strictly inside the circle through the
/// counterclockwise triangle `a, b, c`, zero when cocircular.
#[inline]
pub fn incircle(a: Point, b: Point, c: Point, d: Point) -> f64 {
    robust::incircle(coord(a), coord(b), coord(c), coord(d))
}
