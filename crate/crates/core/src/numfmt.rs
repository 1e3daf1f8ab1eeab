//! Significant-digit formatting shared by every text output.

/// Format `x` with `digits` significant digits, trimming trailing zeros.
/// Uses plain decimal notation for moderate magnitudes and scientific
/// notation otherwise.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..=15).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        trim_zeros(s)
    } else {
        let mantissa = digits.saturating_sub(1);
        format!("{x:.mantissa$e}")
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    if t == "-0" {
        "0".to_string()
    } else {
        t.to_string()
    }
}
