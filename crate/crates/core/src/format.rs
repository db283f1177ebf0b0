//! Number formatting shared by reports and the CLI.

/// Rounds to `digits` significant digits. Non-finite values pass through.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x).parse().unwrap_or(x)
}

/// 12 significant digits, printed without trailing zeros.
pub fn fmt12(x: f64) -> String {
    let r = round_sig(x, 12);
    if r.is_finite() && r != 0.0 && (r.abs() < 1e-4 || r.abs() >= 1e12) {
        let text = format!("{:.11e}", r);
        let (mantissa, exp) = text.split_once('e').expect("scientific format");
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{mantissa}e{exp}")
    } else {
        format!("{r}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(round_sig(2.0f64.sqrt() * 2.0, 12), 2.82842712475);
        assert_eq!(round_sig(0.0, 12), 0.0);
        assert!(round_sig(f64::NAN, 12).is_nan());
        assert_eq!(fmt12(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt12(-0.5), "-0.5");
        assert_eq!(fmt12(1.0 / 27.0), "0.037037037037");
        assert_eq!(fmt12(1.5e-6), "1.5e-6");
        assert_eq!(fmt12(9.0001215e-6), "9.0001215e-6");
        assert_eq!(fmt12(2e12), "2e12");
    }
}
