/// Range of the fixed distance colormap, in millimeters.
pub const COLOR_RANGE_MM: (f64, f64) = (0.0, 10.0);

/// Fixed blue-to-red map for distance fields: 0 mm is pure blue, values at
/// or above 10 mm are pure red, interpolation is linear per channel with
/// round-half-away-from-zero quantization (5 mm gives (128, 0, 128)).
pub fn distance_color(value_mm: f64) -> [u8; 3] {
    let (lo, hi) = COLOR_RANGE_MM;
    let t = if value_mm.is_nan() {
        0.0
    } else {
        ((value_mm - lo) / (hi - lo)).clamp(0.0, 1.0)
    };
    let r = (255.0 * t).round() as u8;
    let b = (255.0 * (1.0 - t)).round() as u8;
    [r, 0, b]
}
