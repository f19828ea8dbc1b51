//! Locale-independent number formatting and CSV documents.

use std::fmt::Write as _;
use std::path::Path;

use crate::CliError;

/// Rounds `x` to `digits` significant digits and prints the shortest
/// representation of the rounded value. Magnitudes below 1e-4 or at or above
/// 1e15 use exponent notation.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let rounded: f64 = format!("{:.*e}", digits.max(1) - 1, x)
        .parse()
        .expect("exponent formatting round-trips");
    let a = rounded.abs();
    if !(1e-4..1e15).contains(&a) {
        format!("{rounded:e}")
    } else {
        format!("{rounded}")
    }
}

/// CSV text with `# key=value` comment lines, one header line and numeric rows.
#[derive(Clone, Debug)]
pub struct CsvDoc {
    precision: usize,
    text: String,
    columns: usize,
}

impl CsvDoc {
    pub fn new(precision: usize, meta: &[(&str, String)], header: &[&str]) -> Self {
        let mut text = String::new();
        for (k, v) in meta {
            let _ = writeln!(text, "# {k}={v}");
        }
        text.push_str(&header.join(","));
        text.push('\n');
        Self {
            precision,
            text,
            columns: header.len(),
        }
    }

    pub fn push(&mut self, row: &[f64]) {
        debug_assert_eq!(row.len(), self.columns);
        for (i, x) in row.iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            self.text.push_str(&format_sig(*x, self.precision));
        }
        self.text.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    /// Writes to `path`, or to stdout when `path` is `None`.
    pub fn write(&self, path: Option<&Path>) -> Result<(), CliError> {
        match path {
            Some(p) => std::fs::write(p, &self.text).map_err(|source| CliError::Io {
                path: p.display().to_string(),
                source,
            }),
            None => {
                use std::io::Write;
                std::io::stdout()
                    .lock()
                    .write_all(self.text.as_bytes())
                    .map_err(|source| CliError::Io {
                        path: "<stdout>".into(),
                        source,
                    })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digit_rounding() {
        assert_eq!(format_sig(8.0 / 11.0, 9), "0.727272727");
        assert_eq!(format_sig(1.0, 9), "1");
        assert_eq!(format_sig(0.0, 9), "0");
        assert_eq!(format_sig(-0.0, 9), "0");
        assert_eq!(format_sig(std::f64::consts::PI, 3), "3.14");
        assert_eq!(format_sig(12345.678, 4), "12350");
        assert_eq!(format_sig(1.234567e-7, 3), "1.23e-7");
        assert_eq!(format_sig(2.5e20, 9), "2.5e20");
        assert_eq!(format_sig(0.1 + 0.2, 9), "0.3");
    }

    #[test]
    fn csv_layout() {
        let mut doc = CsvDoc::new(4, &[("gamma", "0.5".into())], &["a", "b"]);
        doc.push(&[1.0, 0.333333]);
        assert_eq!(doc.as_str(), "# gamma=0.5\na,b\n1,0.3333\n");
    }
}
