//! Decimal formatting shared by the CSV writers.

/// Formats `x` in plain decimal notation rounded to `digits` significant
/// digits. Non-finite values render as `nan`, `inf` or `-inf`.
pub fn significant(x: f64, digits: usize) -> String {
    assert!(digits >= 1);
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    // Scientific rendering settles the decimal exponent after rounding.
    let sci = format!("{:.*e}", digits - 1, x);
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    let s = format!("{:.*}", decimals, x);
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}
