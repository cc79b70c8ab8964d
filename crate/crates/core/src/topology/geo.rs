use crate::error::{Error, Result};

pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// Computed link lengths are floored here so co-located endpoints still yield
/// a strictly positive weight.
pub const MIN_LINK_KM: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Result<Self> {
        let p = GeoPoint { lat, lon };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.lat.is_finite()
            && self.lon.is_finite()
            && self.lat.abs() <= 90.0
            && self.lon.abs() <= 180.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidCoordinate { lat: self.lat, lon: self.lon })
        }
    }

    fn to_unit(self) -> [f64; 3] {
        let (la, lo) = (self.lat.to_radians(), self.lon.to_radians());
        [la.cos() * lo.cos(), la.cos() * lo.sin(), la.sin()]
    }
}

/// Great-circle distance in km (haversine, mean Earth radius).
pub fn edge_length(a: GeoPoint, b: GeoPoint) -> Result<f64> {
    a.validate()?;
    b.validate()?;
    let (lat1, lat2) = (a.lat.to_radians(), b.lat.to_radians());
    let dlat = lat2 - lat1;
    let dlon = (b.lon - a.lon).to_radians();
    let h = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    Ok(2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin())
}

/// Spherical centroid of a set of points. `None` for an empty set or when the
/// points cancel out (e.g. two antipodes).
pub fn centroid(points: &[GeoPoint]) -> Option<GeoPoint> {
    if points.is_empty() {
        return None;
    }
    let mut acc = [0.0; 3];
    for p in points {
        let u = p.to_unit();
        for i in 0..3 {
            acc[i] += u[i];
        }
    }
    let norm = (acc[0] * acc[0] + acc[1] * acc[1] + acc[2] * acc[2]).sqrt();
    if norm < 1e-12 {
        return None;
    }
    let lat = (acc[2] / norm).clamp(-1.0, 1.0).asin().to_degrees();
    let lon = acc[1].atan2(acc[0]).to_degrees();
    Some(GeoPoint { lat, lon })
}
