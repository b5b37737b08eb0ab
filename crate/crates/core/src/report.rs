//! Number formatting shared by the JSON and CSV emitters.

use serde_json::Value;

/// Percentage of `numer / denom` rounded half-up to one decimal, computed in
/// integer arithmetic so that e.g. 631/1000 always renders as `63.1`.
/// A zero denominator renders as `0.0`.
pub fn percent_ratio(numer: u64, denom: u64) -> String {
    if denom == 0 {
        return "0.0".to_owned();
    }
    let numer = u128::from(numer);
    let denom = u128::from(denom);
    let tenths = (2 * numer * 1000 + denom) / (2 * denom);
    format!("{}.{}", tenths / 10, tenths % 10)
}

/// Percentage of a real-valued fraction, half-up to one decimal.
pub fn percent(value: f64) -> String {
    if !value.is_finite() {
        return value.to_string();
    }
    let tenths = (value * 1000.0 + 0.5).floor();
    let tenths = if tenths == 0.0 { 0.0 } else { tenths };
    format!("{:.1}", tenths / 10.0)
}

/// Round to six significant digits.
pub fn sig6(value: f64) -> f64 {
    if value == 0.0 || !value.is_finite() {
        return value;
    }
    format!("{value:.5e}").parse().unwrap_or(value)
}

pub fn sig6_json(value: f64) -> Value {
    serde_json::Number::from_f64(sig6(value))
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

/// Pretty JSON with keys in sorted order and a trailing newline.
pub fn to_sorted_json(value: &Value) -> String {
    // serde_json's default map is a BTreeMap, so keys come out sorted.
    let mut out = serde_json::to_string_pretty(value).expect("Value serialization cannot fail");
    out.push('\n');
    out
}

pub fn csv_field(field: &str) -> String {
    if field.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_owned()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percent_ratio_half_up() {
        assert_eq!(percent_ratio(631, 1000), "63.1");
        assert_eq!(percent_ratio(5, 7), "71.4");
        assert_eq!(percent_ratio(2, 3), "66.7");
        assert_eq!(percent_ratio(1, 1), "100.0");
        assert_eq!(percent_ratio(0, 5), "0.0");
        // 1/8 = 12.5% exactly; 1/16 = 6.25% rounds up to 6.3
        assert_eq!(percent_ratio(1, 8), "12.5");
        assert_eq!(percent_ratio(1, 16), "6.3");
        assert_eq!(percent_ratio(0, 0), "0.0");
    }

    #[test]
    fn percent_float() {
        assert_eq!(percent(0.631), "63.1");
        assert_eq!(percent(1.0), "100.0");
        assert_eq!(percent(0.0), "0.0");
        assert_eq!(percent(0.0625), "6.3");
    }

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6((-1.0f64).exp()), 0.367879);
        assert_eq!(sig6(1.0), 1.0);
        assert_eq!(sig6(123456789.0), 123457000.0);
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    }
}
