//! CSV tables with the provenance header.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

pub const OUT_DIR_ENV: &str = "USCSTIRAP_OUT_DIR";

/// Fixed 12-significant-digit float format; non-finite values as `nan`,
/// `inf`, `-inf`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.11e}")
    }
}

/// Comment lines opening every output file.
pub fn provenance(digest: &str) -> String {
    format!(
        "# units: hbar=1, omega_c=1\n# config-digest: {digest}\n# tool-version: uscstirap {}\n",
        env!("CARGO_PKG_VERSION")
    )
}

/// `--out`, then the config path, then `$USCSTIRAP_OUT_DIR/<default_name>`,
/// then `./<default_name>`.
pub fn resolve_path(cli: Option<&Path>, config: Option<&Path>, env_dir: Option<&Path>, default_name: &str) -> PathBuf {
    if let Some(p) = cli.or(config) {
        return p.to_path_buf();
    }
    match env_dir {
        Some(d) => d.join(default_name),
        None => PathBuf::from(default_name),
    }
}

/// Sibling file for the run summary: `hist.csv` -> `hist.summary.txt`.
pub fn summary_path(table: &Path) -> PathBuf {
    table.with_extension("summary.txt")
}

pub struct Table {
    inner: csv::Writer<BufWriter<File>>,
}

impl Table {
    pub fn create(path: &Path, digest: &str, header: &[String]) -> Result<Self> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        let mut w = BufWriter::new(file);
        w.write_all(provenance(digest).as_bytes())?;
        let mut inner = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        inner.write_record(header)?;
        Ok(Self { inner })
    }

    pub fn row(&mut self, fields: &[String]) -> Result<()> {
        self.inner.write_record(fields)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_is_fixed() {
        assert_eq!(fmt_f64(1.0), "1.00000000000e0");
        assert_eq!(fmt_f64(-0.0228097), "-2.28097000000e-2");
        assert_eq!(fmt_f64(f64::NAN), "nan");
        assert_eq!(fmt_f64(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn header_order() {
        let h = provenance("ab12");
        let lines: Vec<&str> = h.lines().collect();
        assert_eq!(lines[0], "# units: hbar=1, omega_c=1");
        assert_eq!(lines[1], "# config-digest: ab12");
        assert!(lines[2].starts_with("# tool-version: uscstirap "));
    }

    #[test]
    fn path_precedence() {
        let d = Path::new("/tmp/o");
        assert_eq!(resolve_path(Some(Path::new("a.csv")), Some(Path::new("b.csv")), Some(d), "x.csv"), PathBuf::from("a.csv"));
        assert_eq!(resolve_path(None, Some(Path::new("b.csv")), Some(d), "x.csv"), PathBuf::from("b.csv"));
        assert_eq!(resolve_path(None, None, Some(d), "x.csv"), PathBuf::from("/tmp/o/x.csv"));
        assert_eq!(resolve_path(None, None, None, "x.csv"), PathBuf::from("x.csv"));
        assert_eq!(summary_path(Path::new("r/h.csv")), PathBuf::from("r/h.summary.txt"));
    }
}
