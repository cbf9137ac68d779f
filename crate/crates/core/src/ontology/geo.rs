use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Latitude/longitude in decimal degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Self {
        Self { lat, lon }
    }

    pub fn check(self) -> Result<Self> {
        if !self.lat.is_finite() || !self.lon.is_finite() {
            return Err(Error::invalid(format!("non-finite coordinate ({}, {})", self.lat, self.lon)));
        }
        if !(-90.0..=90.0).contains(&self.lat) || !(-180.0..=180.0).contains(&self.lon) {
            return Err(Error::invalid(format!(
                "coordinate ({}, {}) out of range",
                self.lat, self.lon
            )));
        }
        Ok(self)
    }
}

/// Planar shoelace area in squared degrees. Only used to rank fences, so the
/// equirectangular distortion does not matter at building/campus scale.
pub fn polygon_area(ring: &[[f64; 2]]) -> f64 {
    if ring.len() < 3 {
        return 0.0;
    }
    let mut twice = 0.0;
    for i in 0..ring.len() {
        let [y0, x0] = ring[i];
        let [y1, x1] = ring[(i + 1) % ring.len()];
        twice += x0 * y1 - x1 * y0;
    }
    (twice / 2.0).abs()
}

/// Even-odd containment; points on an edge count as inside.
pub fn polygon_contains(ring: &[[f64; 2]], point: GeoPoint) -> bool {
    let (px, py) = (point.lon, point.lat);
    let n = ring.len();
    let mut inside = false;
    for i in 0..n {
        let [ay, ax] = ring[i];
        let [by, bx] = ring[(i + 1) % n];
        if on_segment(px, py, ax, ay, bx, by) {
            return true;
        }
        if (ay > py) != (by > py) {
            let x_cross = ax + (py - ay) * (bx - ax) / (by - ay);
            if px < x_cross {
                inside = !inside;
            }
        }
    }
    inside
}

fn on_segment(px: f64, py: f64, ax: f64, ay: f64, bx: f64, by: f64) -> bool {
    let cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax);
    if cross != 0.0 {
        return false;
    }
    px >= ax.min(bx) && px <= ax.max(bx) && py >= ay.min(by) && py <= ay.max(by)
}
