//! `%g`-style formatting with a fixed number of significant digits.

/// Formats `v` with `digits` significant digits, dropping trailing zeros.
/// Infinities print as `inf` / `-inf`. The output parses back with
/// `str::parse::<f64>`.
pub fn sig(v: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if v.is_nan() {
        return "nan".to_owned();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.to_owned();
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0" } else { "0" }.to_owned();
    }
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent in scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        format!("{}e{}", trim_zeros(mantissa), exp)
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_owned()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::sig;

    #[test]
    fn formats_like_printf_g() {
        assert_eq!(sig(2.0, 6), "2");
        assert_eq!(sig(-0.1, 6), "-0.1");
        assert_eq!(sig(1.0 / 3.0, 6), "0.333333");
        assert_eq!(sig(123456.7, 6), "123457");
        assert_eq!(sig(1234567.0, 6), "1.23457e6");
        assert_eq!(sig(0.0001234567, 6), "0.000123457");
        assert_eq!(sig(0.00001234567, 6), "1.23457e-5");
        assert_eq!(sig(9.9999995, 6), "10");
        assert_eq!(sig(f64::INFINITY, 6), "inf");
        assert_eq!(sig(f64::NEG_INFINITY, 9), "-inf");
        assert_eq!(sig(0.0, 9), "0");
        assert_eq!(sig(15.123456789, 9), "15.1234568");
    }

    #[test]
    fn parses_back() {
        for v in [1e-300, -7.25e12, 2.71, 42.0, -0.000321] {
            let s = sig(v, 6);
            let back: f64 = s.parse().unwrap();
            assert!((back - v).abs() <= v.abs() * 1e-5, "{v} -> {s}");
            assert_eq!(sig(back, 6), s);
        }
    }
}
