use crate::error::{CglError, Result};

/// Haar function on `[0, 1)`: `None` selects the father function `h_0 ≡ 1`,
/// `Some((j, m))` the L²-normalized wavelet `h_{jm}` with `j >= 1` and
/// `0 <= m < 2^{j-1}`. Returns 0 outside `[0, 1)`.
pub fn haar_basis(index: Option<(u32, u64)>, t: f64) -> Result<f64> {
    let Some((j, m)) = index else {
        return Ok(if (0.0..1.0).contains(&t) { 1.0 } else { 0.0 });
    };
    if j == 0 || j > 62 || m >= 1u64 << (j - 1) {
        return Err(CglError::IndexOutOfRange(format!("haar index (j={j}, m={m})")));
    }
    Ok(haar_value(j, m, t))
}

#[inline]
pub(crate) fn haar_value(j: u32, m: u64, t: f64) -> f64 {
    let scale = (1u64 << (j - 1)) as f64;
    let s = t * scale - m as f64;
    let amp = scale.sqrt();
    if (0.0..0.5).contains(&s) {
        amp
    } else if (0.5..1.0).contains(&s) {
        -amp
    } else {
        0.0
    }
}
