/// Equal-width interval binning: `floor(x / z) + 1` in double precision.
///
/// Used with `z = 1` for click counts and `z = 0.01` for cosine values.
/// Negative inputs yield non-positive bin ids, which are valid vocabulary
/// entries. No epsilon nudging is applied at bin boundaries; callers that
/// care about exact boundary values must avoid them.
pub fn binning(x: f64, z: f64) -> i64 {
    assert!(z > 0.0, "bin width must be positive, got {z}");
    assert!(x.is_finite(), "binning input must be finite");
    (x / z).floor() as i64 + 1
}
