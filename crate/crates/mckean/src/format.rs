//! Number, CSV and JSON formatting shared by the command-line tools.
//!
//! Every number is rounded to 15 significant digits and printed in plain
//! decimal with a `.` separator, independent of locale.

use serde_json::{Map, Number, Value};

/// Schema version stamped into every JSON document.
pub const SCHEMA_VERSION: &str = "1.0";

/// `x` rounded to 15 significant digits.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.14e}").parse().unwrap()
}

/// Decimal text for `x` at 15 significant digits; non-finite values are empty.
pub fn number(x: f64) -> String {
    if !x.is_finite() {
        return String::new();
    }
    let r = round_sig(x);
    if r == 0.0 {
        return "0".to_owned();
    }
    format!("{r}")
}

/// JSON number at 15 significant digits, `null` for `None` or non-finite.
pub fn json_number(x: Option<f64>) -> Value {
    x.and_then(|v| Number::from_f64(round_sig(v))).map_or(Value::Null, Value::Number)
}

/// A JSON object opening with the schema version.
pub fn document() -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("spec_version".to_owned(), Value::from(SCHEMA_VERSION));
    m
}

/// Minimal CSV writer: `,` separator, LF line endings, no quoting (every
/// field is a number, an empty string or a bare word).
#[derive(Debug, Default)]
pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut csv = Csv::default();
        csv.row(header.iter().map(|s| s.to_string()));
        csv
    }

    pub fn row<I: IntoIterator<Item = String>>(&mut self, fields: I) {
        let mut first = true;
        for f in fields {
            if !first {
                self.buf.push(',');
            }
            self.buf.push_str(&f);
            first = false;
        }
        self.buf.push('\n');
    }

    pub fn finish(self) -> String {
        self.buf
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fifteen_significant_digits() {
        assert_eq!(number(1.0 / 3.0), "0.333333333333333");
        assert_eq!(number(2.0 / 3.0 * 1e5), "66666.6666666667");
        assert_eq!(number(1.5), "1.5");
        assert_eq!(number(-0.0), "0");
        assert_eq!(number(f64::NAN), "");
        assert_eq!(number(1e-7), "0.0000001");
    }

    #[test]
    fn json_nulls() {
        assert_eq!(json_number(None), Value::Null);
        assert_eq!(json_number(Some(f64::INFINITY)), Value::Null);
        assert_eq!(json_number(Some(0.1 + 0.2)).to_string(), "0.3");
    }

    #[test]
    fn csv_layout() {
        let mut csv = Csv::new(&["a", "b"]);
        csv.row([number(1.0), String::new()]);
        assert_eq!(csv.finish(), "a,b\n1,\n");
    }
}
