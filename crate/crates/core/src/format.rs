//! Fixed 9-significant-digit decimal rendering used by the index file and
//! query output.

/// Renders `x` positionally with exactly nine significant digits, e.g.
/// `0.906000000`, `1.61600000`, `-0.0898999989`. Zero renders as
/// `0.00000000`.
pub fn format_sig9(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0.00000000".to_string();
    }
    let sci = format!("{:.8e}", x.abs());
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    debug_assert_eq!(digits.len(), 9);

    let mut out = String::with_capacity(24);
    if x < 0.0 {
        out.push('-');
    }
    if exp < 0 {
        out.push_str("0.");
        for _ in 0..(-exp - 1) {
            out.push('0');
        }
        out.push_str(&digits);
    } else if exp >= 8 {
        out.push_str(&digits);
        for _ in 0..(exp - 8) {
            out.push('0');
        }
    } else {
        let split = exp as usize + 1;
        out.push_str(&digits[..split]);
        out.push('.');
        out.push_str(&digits[split..]);
    }
    out
}

/// The value that survives a write/read cycle through [`format_sig9`].
pub fn quantize_sig9(x: f64) -> f64 {
    format_sig9(x).parse().unwrap_or(x)
}
