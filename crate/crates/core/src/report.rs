//! Small helpers shared by the CSV writers.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Format with six significant digits. Plain notation for moderate
/// magnitudes, scientific otherwise.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_nan() { "NaN".into() } else if x == 0.0 { "0".into() } else { format!("{x}") };
    }
    let mag = x.abs().log10().floor() as i32;
    if (-4..15).contains(&mag) {
        let decimals = (5 - mag).max(0) as usize;
        let x = if mag > 5 {
            let unit = 10f64.powi(mag - 5);
            (x / unit).round() * unit
        } else {
            x
        };
        let s = format!("{x:.decimals$}");
        let s = if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        };
        if s == "-0" {
            "0".into()
        } else {
            s
        }
    } else {
        format!("{x:.5e}")
    }
}

pub(crate) fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

pub(crate) fn finish(mut w: impl Write, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::sig6;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(0.0), "0");
        assert_eq!(sig6(1.0), "1");
        assert_eq!(sig6(224.96789), "224.968");
        assert_eq!(sig6(-0.000123456789), "-0.000123457");
        assert_eq!(sig6(1722240.0), "1722240");
        assert_eq!(sig6(123456789.0), "123457000");
        assert_eq!(sig6(1.5e-9), "1.50000e-9");
        for x in [3.14159265, -2.71828e7, 6.02214e23, 0.9091916] {
            let back: f64 = sig6(x).parse().unwrap();
            assert!(((back - x) / x).abs() < 5e-6);
        }
    }
}
