mod common;

use chrono::{Duration, TimeZone, Utc};
use irrcast::solar::{self, GeoLocation, SOLAR_CONSTANT};

#[test]
fn zenith_matches_reference_positions() {
    let cases = common::zenith_fixture();
    assert!(cases.len() >= 1000);
    let mut worst = 0.0_f64;
    for c in &cases {
        let z = solar::solar_zenith(&c.location, c.timestamp).unwrap();
        worst = worst.max((z - c.zenith).abs());
    }
    assert!(worst <= 0.2, "max zenith deviation {worst}");
}

#[test]
fn golden_summer_afternoon() {
    let golden = GeoLocation::new(39.74, -105.18, 1829.0, -7 * 60).unwrap();
    let t = Utc.with_ymd_and_hms(2020, 6, 21, 19, 0, 0).unwrap();
    let z = solar::solar_zenith(&golden, t).unwrap();
    assert!((z - 16.32).abs() < 0.2, "{z}");
}

#[test]
fn extraterrestrial_anchors() {
    assert_eq!(solar::extraterrestrial_from_zenith(0.0, 1.0), SOLAR_CONSTANT);
    for z in [90.0, 90.5, 95.0, 120.0, 180.0] {
        assert_eq!(solar::extraterrestrial_from_zenith(z, 1.03), 0.0);
    }
}

#[test]
fn zenith_is_continuous_minute_to_minute() {
    let loc = GeoLocation::new(-33.9, 18.4, 10.0, 120).unwrap();
    let start = Utc.with_ymd_and_hms(2023, 3, 1, 0, 0, 0).unwrap();
    let mut prev = solar::solar_zenith(&loc, start).unwrap();
    for m in 1..(3 * 1440) {
        let z = solar::solar_zenith(&loc, start + Duration::minutes(m)).unwrap();
        // the sun moves at most 0.25 degrees per minute
        assert!((z - prev).abs() < 0.26, "jump at minute {m}");
        prev = z;
    }
}
