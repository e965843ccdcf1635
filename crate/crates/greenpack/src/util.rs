//! Small numeric helpers shared across modules.

/// Compensated (Kahan) summation.
///
/// Plain left-to-right accumulation of a few hundred equal terms already
/// drifts by ~1e-16 per step, which is enough to break exact-equality checks
/// on pool means; compensation keeps those sums exact.
pub fn kahan_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for value in values {
        let y = value - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Mean of an f64 slice via compensated summation; 0.0 for an empty slice.
pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    kahan_sum(values.iter().copied()) / values.len() as f64
}

/// Format a number for human-readable output: whole values print without a
/// fractional part, everything else prints with float noise rounded away at
/// the sixth decimal.
pub fn fmt_num(x: f64) -> String {
    let rounded = (x * 1e6).round() / 1e6;
    if rounded == rounded.trunc() && rounded.abs() < 1e15 {
        format!("{}", rounded as i64)
    } else {
        format!("{}", rounded)
    }
}

/// Format a fraction as a percentage with one decimal, e.g. 0.051 -> "5.1%".
pub fn fmt_percent(fraction: f64) -> String {
    format!("{:.1}%", fraction * 100.0)
}

/// Format a number to at most one decimal, dropping a trailing ".0" so whole
/// values stay whole: 15.0 -> "15", 14.71 -> "14.7".
pub fn fmt_trim1(x: f64) -> String {
    let s = format!("{x:.1}");
    s.strip_suffix(".0").map(str::to_string).unwrap_or(s)
}

/// Format a fraction as a percentage like [`fmt_trim1`]: 0.03 -> "3%",
/// 0.051 -> "5.1%".
pub fn fmt_percent_trim(fraction: f64) -> String {
    format!("{}%", fmt_trim1(fraction * 100.0))
}
