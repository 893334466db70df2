//! Random streams and the complex linear-algebra kernel.

mod linalg;
mod rng;

pub use linalg::{
    frobenius_norm_sq, gram, hermitian_eigen, hermitian_eigvals, svd, CMat, CVec, Svd,
};
pub use rng::RngStream;

/// Wrap an angle in degrees to `[-180, 180)`.
pub fn wrap_degrees(deg: f64) -> f64 {
    let w = (deg + 180.0).rem_euclid(360.0) - 180.0;
    if w >= 180.0 {
        w - 360.0
    } else {
        w
    }
}

/// Reflect a zenith angle in degrees back into `[0, 180]`.
pub fn reflect_zenith(deg: f64) -> f64 {
    let mut z = deg.rem_euclid(360.0);
    if z > 180.0 {
        z = 360.0 - z;
    }
    z
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}
