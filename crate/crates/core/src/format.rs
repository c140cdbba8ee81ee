//! Fixed-precision number formatting shared by every CSV writer.

/// Formats `x` with `digits` significant digits in the style of C's `%.*g`:
/// fixed notation for moderate exponents, scientific otherwise, trailing
/// zeros removed. Output only depends on the bits of `x`.
pub fn sig(x: f64, digits: usize) -> String {
    assert!(digits >= 1);
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    // Round once in scientific form; the exponent of the rounded value picks
    // the notation.
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        format!("{}e{}", trim_zeros(mantissa), exp)
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Twelve significant digits, the precision of every CSV column.
pub fn csv(x: f64) -> String {
    sig(x, 12)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_g() {
        assert_eq!(csv(0.0), "0");
        assert_eq!(csv(1.0), "1");
        assert_eq!(csv(-2.0), "-2");
        assert_eq!(csv(0.15), "0.15");
        assert_eq!(csv(1.0 / 3.0), "0.333333333333");
        assert_eq!(csv(2.0 / 3.0 * 1e-7), "6.66666666667e-8");
        assert_eq!(csv(123456789012345.0), "1.23456789012e14");
        assert_eq!(csv(999999999999.5), "1e12");
        assert_eq!(csv(0.0001), "0.0001");
        assert_eq!(csv(-1.999999999999999), "-2");
    }
}
