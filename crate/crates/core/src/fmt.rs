//! Number formatting shared by every textual output.

/// Formats like C's `%.9g`: 9 significant digits, trailing zeros removed,
/// exponent form outside `1e-4 ≤ |x| < 1e9`.
pub fn g9(x: f64) -> String {
    const PREC: i32 = 9;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", (PREC - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..PREC).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (PREC - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `[a, b, ...]` with [`g9`] entries.
pub fn g9_list(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|&v| g9(v)).collect();
    format!("[{}]", parts.join(", "))
}
