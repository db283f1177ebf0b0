//! Value parsers for command-line flags.

use nonlocal_lab::BlochVector;

/// `x,y,z`, rescaled to unit length.
pub fn bloch(s: &str) -> Result<BlochVector, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<_, _>>()?;
    let [x, y, z] = parts[..] else {
        return Err(format!("expected three comma-separated numbers, got {}", parts.len()));
    };
    BlochVector::normalized(x, y, z).map_err(|e| e.to_string())
}

/// Positive integer, also written as `1e6`.
pub fn count(s: &str) -> Result<u64, String> {
    let v: f64 = s.trim().parse().map_err(|e| format!("`{s}`: {e}"))?;
    if !v.is_finite() || v < 1.0 || v.fract() != 0.0 || v > 9.0e15 {
        return Err(format!("`{s}` is not a positive integer"));
    }
    Ok(v as u64)
}

/// One ε in (0, 1].
pub fn epsilon(s: &str) -> Result<f64, String> {
    let e: f64 = s.trim().parse().map_err(|e| format!("`{s}`: {e}"))?;
    if !(e > 0.0 && e <= 1.0) {
        return Err(format!("ε = {e} is outside (0, 1]"));
    }
    Ok(e)
}
