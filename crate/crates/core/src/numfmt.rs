//! Locale-free float formatting for CSV output.

/// Formats like C's `%.12g`: 12 significant digits, trailing zeros removed,
/// scientific notation outside 1e-4 ≤ |v| < 1e12.
pub fn fmt_sig(v: f64) -> String {
    fmt_sig_digits(v, 12)
}

pub fn fmt_sig_digits(v: f64, digits: usize) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let m = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let prec = (digits as i32 - 1 - exp).max(0) as usize;
        strip_zeros(&format!("{v:.prec$}")).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_g() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(1.0), "1");
        assert_eq!(fmt_sig(-2.5), "-2.5");
        assert_eq!(fmt_sig(7.324), "7.324");
        assert_eq!(fmt_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_sig(9.313225746154785e-10), "9.31322574615e-10");
        assert_eq!(fmt_sig(123456789012345.0), "1.23456789012e+14");
        assert_eq!(fmt_sig(0.0001), "0.0001");
        assert_eq!(fmt_sig(0.00001), "1e-05");
        assert_eq!(fmt_sig(999999999999.9), "1e+12");
        assert_eq!(fmt_sig(f64::NAN), "nan");
    }

    #[test]
    fn roundtrip_precision() {
        for v in [std::f64::consts::PI, 1e-7 * std::f64::consts::E, 12345.678901234] {
            let back: f64 = fmt_sig(v).parse().unwrap();
            assert!((back - v).abs() <= v.abs() * 1e-11);
        }
    }
}
