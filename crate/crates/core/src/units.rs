//! Decibel conversions. All powers inside the crate are linear milliwatts.

/// `10^(db/10)`.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// `10·log10(x)`; returns `-inf` for zero and NaN for negative input.
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// dBm to mW.
pub fn dbm_to_mw(dbm: f64) -> f64 {
    db_to_linear(dbm)
}

/// mW to dBm.
pub fn mw_to_dbm(mw: f64) -> f64 {
    linear_to_db(mw)
}

/// Amplifier gain given in dB is read as a power gain, so the amplitude cap is
/// `10^(db/20)`.
pub fn gain_db_to_amplitude(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        assert!((db_to_linear(30.0) - 1000.0).abs() < 1e-9);
        assert!((linear_to_db(1e-3) + 30.0).abs() < 1e-12);
        assert!((mw_to_dbm(dbm_to_mw(-94.0)) + 94.0).abs() < 1e-12);
        assert!((gain_db_to_amplitude(10.0) - 10f64.sqrt()).abs() < 1e-12);
        assert_eq!(linear_to_db(0.0), f64::NEG_INFINITY);
    }
}
