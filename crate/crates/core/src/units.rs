//! dB / linear conversions.

/// Thermal noise density at 290 K.
pub const THERMAL_NOISE_DBM_PER_HZ: f64 = -174.0;

#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[inline]
pub fn linear_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

/// dBm to milliwatts. `-inf` maps to zero.
#[inline]
pub fn dbm_to_mw(dbm: f64) -> f64 {
    db_to_linear(dbm)
}

#[inline]
pub fn mw_to_dbm(mw: f64) -> f64 {
    linear_to_db(mw)
}

/// Noise power in dBm over `bandwidth_hz` for a receiver with the given noise figure.
pub fn noise_power_dbm(bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
    THERMAL_NOISE_DBM_PER_HZ + linear_to_db(bandwidth_hz) + noise_figure_db
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        for db in [-120.0, -3.0, 0.0, 10.0, 23.0] {
            assert!((linear_to_db(db_to_linear(db)) - db).abs() < 1e-9);
        }
        assert_eq!(dbm_to_mw(f64::NEG_INFINITY), 0.0);
    }

    #[test]
    fn noise_per_resource_block() {
        // 180 kHz, 9 dB noise figure.
        let n = noise_power_dbm(180e3, 9.0);
        assert!((n - (-174.0 + 52.5527 + 9.0)).abs() < 1e-3);
    }
}
