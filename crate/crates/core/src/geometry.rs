//! Spherical-Earth geometry: satellite ground tracks, UE placement,
//! elevation/slant range, and the ECEF displacement cube that gates
//! LOS resampling.

use rand::Rng;

pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoPosition {
    pub lat_deg: f64,
    pub lon_deg: f64,
    pub alt_m: f64,
}

impl GeoPosition {
    /// Longitude is wrapped into [-180, 180); latitude clamped to [-90, 90].
    pub fn new(lat_deg: f64, lon_deg: f64, alt_m: f64) -> Self {
        Self {
            lat_deg: lat_deg.clamp(-90.0, 90.0),
            lon_deg: wrap_lon(lon_deg),
            alt_m: alt_m.max(0.0),
        }
    }

    pub fn to_ecef(&self) -> [f64; 3] {
        let r = EARTH_RADIUS_M + self.alt_m;
        let (lat, lon) = (self.lat_deg.to_radians(), self.lon_deg.to_radians());
        [
            r * lat.cos() * lon.cos(),
            r * lat.cos() * lon.sin(),
            r * lat.sin(),
        ]
    }

    /// Point reached by travelling `angle_rad` of arc along the great circle
    /// leaving this point at `bearing_deg` (clockwise from north), at the same altitude.
    pub fn destination(&self, bearing_deg: f64, angle_rad: f64) -> GeoPosition {
        let lat1 = self.lat_deg.to_radians();
        let lon1 = self.lon_deg.to_radians();
        let brg = bearing_deg.to_radians();
        let lat2 = (lat1.sin() * angle_rad.cos() + lat1.cos() * angle_rad.sin() * brg.cos()).asin();
        let lon2 = lon1
            + (brg.sin() * angle_rad.sin() * lat1.cos())
                .atan2(angle_rad.cos() - lat1.sin() * lat2.sin());
        GeoPosition::new(lat2.to_degrees(), lon2.to_degrees(), self.alt_m)
    }
}

fn wrap_lon(lon: f64) -> f64 {
    let w = (lon + 180.0).rem_euclid(360.0) - 180.0;
    if w >= 180.0 {
        w - 360.0
    } else {
        w
    }
}

/// Satellite moving at constant speed along a constant-altitude great circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SatelliteState {
    pub start: GeoPosition,
    /// Orbital speed at altitude.
    pub speed_mps: f64,
    /// Initial bearing of the track; 270° is due west.
    pub heading_deg: f64,
}

impl SatelliteState {
    pub fn westward(start: GeoPosition, speed_mps: f64) -> Self {
        Self {
            start,
            speed_mps,
            heading_deg: 270.0,
        }
    }

    pub fn propagate(&self, t_secs: f64) -> GeoPosition {
        let t = t_secs.max(0.0);
        let arc = self.speed_mps * t / (EARTH_RADIUS_M + self.start.alt_m);
        self.start.destination(self.heading_deg, arc)
    }
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

pub fn slant_range(sat: &GeoPosition, ue: &GeoPosition) -> f64 {
    norm(sub(sat.to_ecef(), ue.to_ecef()))
}

/// Angle of the UE→satellite ray above the UE's local horizon, in degrees.
pub fn elevation_angle(sat: &GeoPosition, ue: &GeoPosition) -> f64 {
    let u = ue.to_ecef();
    let los = sub(sat.to_ecef(), u);
    let up_norm = norm(u);
    let d = norm(los);
    if d == 0.0 || up_norm == 0.0 {
        return 90.0;
    }
    let sin_el = (los[0] * u[0] + los[1] * u[1] + los[2] * u[2]) / (d * up_norm);
    sin_el.clamp(-1.0, 1.0).asin().to_degrees()
}

/// Satellite ECEF position at the last LOS resampling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LosAnchor {
    pub anchor: [f64; 3],
    pub cube_side_m: f64,
}

impl LosAnchor {
    pub fn new(sat: &GeoPosition, cube_side_m: f64) -> Self {
        Self {
            anchor: sat.to_ecef(),
            cube_side_m,
        }
    }

    pub fn reset(&mut self, sat: &GeoPosition) {
        self.anchor = sat.to_ecef();
    }

    /// True iff any ECEF axis displacement from the anchor exceeds the cube side.
    pub fn displacement_exceeds(&self, ecef: [f64; 3]) -> bool {
        sub(ecef, self.anchor)
            .iter()
            .any(|d| d.abs() > self.cube_side_m)
    }
}

pub fn los_resample_due(link: &LosAnchor, sat_now: &GeoPosition) -> bool {
    link.displacement_exceeds(sat_now.to_ecef())
}

/// Uniform draw over a spherical cap of ground radius `radius_m` around `center`.
pub fn place_uniform_disc<R: Rng + ?Sized>(
    center: &GeoPosition,
    radius_m: f64,
    rng: &mut R,
) -> GeoPosition {
    let r = radius_m * rng.random::<f64>().sqrt();
    let bearing = rng.random::<f64>() * 360.0;
    let ground = GeoPosition::new(center.lat_deg, center.lon_deg, 0.0);
    let mut p = ground.destination(bearing, r / EARTH_RADIUS_M);
    p.alt_m = center.alt_m;
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const H: f64 = 600_000.0;

    fn haversine(a: &GeoPosition, b: &GeoPosition) -> f64 {
        let (p1, p2) = (a.lat_deg.to_radians(), b.lat_deg.to_radians());
        let dp = p2 - p1;
        let dl = (b.lon_deg - a.lon_deg).to_radians();
        let h = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
        2.0 * EARTH_RADIUS_M * h.sqrt().asin()
    }

    /// Satellite at altitude `H` placed due north of a ground UE at (0, 0) with
    /// the central angle that yields elevation `alpha`.
    fn sat_at_elevation(alpha_deg: f64) -> (GeoPosition, GeoPosition) {
        let a = alpha_deg.to_radians();
        let ratio = EARTH_RADIUS_M / (EARTH_RADIUS_M + H);
        let gamma = (ratio * a.cos()).acos() - a;
        (
            GeoPosition::new(gamma.to_degrees(), 0.0, H),
            GeoPosition::new(0.0, 0.0, 0.0),
        )
    }

    fn oracle_slant(alpha_deg: f64) -> f64 {
        let a = alpha_deg.to_radians();
        let re = EARTH_RADIUS_M;
        re * ((((re + H) / re).powi(2) - a.cos().powi(2)).sqrt() - a.sin())
    }

    fn table1_sat() -> SatelliteState {
        SatelliteState::westward(GeoPosition::new(62.38, 20.0, H), 7560.0)
    }

    #[test]
    fn propagate_starts_at_table_position() {
        let p = table1_sat().propagate(0.0);
        assert!((p.lat_deg - 62.38).abs() < 1e-12);
        assert!((p.lon_deg - 20.0).abs() < 1e-12);
        assert_eq!(p.alt_m, H);
    }

    #[test]
    fn propagate_moves_west() {
        let s = table1_sat();
        let mut last = s.propagate(0.0).lon_deg;
        for k in 1..=20 {
            let lon = s.propagate(k as f64 * 0.5).lon_deg;
            assert!(lon < last);
            last = lon;
        }
    }

    #[test]
    fn propagate_ground_distance_matches_speed() {
        let s = table1_sat();
        for t in [1.0, 5.0, 10.0, 60.0] {
            let p = s.propagate(t);
            let ground = haversine(&s.start, &p);
            let expect = 7560.0 * t * EARTH_RADIUS_M / (EARTH_RADIUS_M + H);
            assert!((ground - expect).abs() / expect < 1e-3, "t={t}: {ground} vs {expect}");
        }
    }

    #[test]
    fn nadir_slant_equals_altitude() {
        let ue = GeoPosition::new(62.25, 25.74, 0.0);
        let sat = GeoPosition::new(62.25, 25.74, H);
        assert!((slant_range(&sat, &ue) - H).abs() < 1e-6);
        assert!((elevation_angle(&sat, &ue) - 90.0).abs() < 1e-9);
    }

    #[test]
    fn slant_matches_spherical_oracle() {
        // d(0°) = sqrt((Re+h)^2 - Re^2) ≈ 2830 km, d(30°) ≈ 1075 km
        let horizon = ((EARTH_RADIUS_M + H).powi(2) - EARTH_RADIUS_M.powi(2)).sqrt();
        assert!((oracle_slant(0.0) - horizon).abs() < 1e-6);
        assert!((horizon / 1e3 - 2830.0).abs() < 1.0);
        assert!((oracle_slant(30.0) / 1e3 - 1075.0).abs() < 1.0);
        for alpha in [0.0, 10.0, 30.0, 60.0, 90.0] {
            let (sat, ue) = sat_at_elevation(alpha);
            assert!((slant_range(&sat, &ue) - oracle_slant(alpha)).abs() < 100.0);
            assert!((elevation_angle(&sat, &ue) - alpha).abs() < 0.01);
        }
    }

    #[test]
    fn horizon_elevation_is_zero() {
        let (sat, ue) = sat_at_elevation(0.0);
        assert!(elevation_angle(&sat, &ue).abs() < 1e-6);
    }

    #[test]
    fn cube_trigger_is_per_axis() {
        let origin = GeoPosition::new(62.38, 20.0, H);
        let anchor = LosAnchor::new(&origin, 3500.0);
        let base = anchor.anchor;
        let shifted = |d: [f64; 3]| [base[0] + d[0], base[1] + d[1], base[2] + d[2]];
        assert!(!anchor.displacement_exceeds(shifted([0.0, 0.0, 0.0])));
        assert!(anchor.displacement_exceeds(shifted([3600.0, 0.0, 0.0])));
        assert!(!anchor.displacement_exceeds(shifted([2000.0, 2000.0, 2000.0])));
        assert!(anchor.displacement_exceeds(shifted([0.0, 0.0, -3500.1])));
        assert!(!los_resample_due(&anchor, &origin));
    }

    #[test]
    fn satellite_triggers_resample_within_a_second() {
        let s = table1_sat();
        let anchor = LosAnchor::new(&s.propagate(0.0), 3500.0);
        assert!(!los_resample_due(&anchor, &s.propagate(0.1)));
        assert!(los_resample_due(&anchor, &s.propagate(1.0)));
    }

    #[test]
    fn disc_placement_stays_inside_radius() {
        let mut rng = crate::engine::rng_stream(3, "ue-placement").unwrap();
        let c = GeoPosition::new(62.25, 25.74, 0.0);
        for _ in 0..1000 {
            let p = place_uniform_disc(&c, 30_000.0, &mut rng);
            assert!(haversine(&c, &p) <= 30_000.0 + 1e-6);
        }
    }

    #[test]
    fn longitude_wraps() {
        assert_eq!(GeoPosition::new(0.0, 180.0, 0.0).lon_deg, -180.0);
        assert!((GeoPosition::new(0.0, -190.0, 0.0).lon_deg - 170.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn slant_decreases_with_elevation(a in 0.5f64..89.0, step in 0.1f64..1.0) {
            let (s1, u1) = sat_at_elevation(a);
            let (s2, u2) = sat_at_elevation(a + step);
            prop_assert!(slant_range(&s2, &u2) < slant_range(&s1, &u1));
        }

        #[test]
        fn slant_bounded_by_altitude_and_horizon(a in 0.01f64..=90.0) {
            let (s, u) = sat_at_elevation(a);
            let d = slant_range(&s, &u);
            let horizon = ((EARTH_RADIUS_M + H).powi(2) - EARTH_RADIUS_M.powi(2)).sqrt();
            prop_assert!(d >= H - 1e-3 && d <= horizon + 1e-3);
        }

        #[test]
        fn propagate_is_continuous(t in 0.0f64..100.0) {
            let s = table1_sat();
            let a = s.propagate(t).to_ecef();
            let b = s.propagate(t + 1e-3).to_ecef();
            prop_assert!(norm(sub(a, b)) < 7560.0 * 1e-3 * 1.01);
        }
    }
}
