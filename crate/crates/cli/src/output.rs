use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use magspec::zero_finder::EigenvalueRecord;
use serde::Serialize;

/// Scientific notation with 17 significant digits, enough to round-trip any `f64`.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        Ok(Self {
            root: root.to_path_buf(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// Writes a CSV whose cells are already formatted.
    pub fn csv(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf> {
        let path = self.path(name);
        let mut w = csv::Writer::from_path(&path)
            .with_context(|| format!("creating {}", path.display()))?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        log::info!("wrote {}", path.display());
        Ok(path)
    }

    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf> {
        let path = self.path(name);
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        log::info!("wrote {}", path.display());
        Ok(path)
    }

    pub fn eigenvalues(&self, name: &str, eigs: &[EigenvalueRecord]) -> Result<PathBuf> {
        let rows: Vec<Vec<String>> = eigs
            .iter()
            .map(|e| {
                vec![
                    float(e.z.re),
                    float(e.z.im),
                    float(e.k.re),
                    float(e.k.im),
                    e.multiplicity.to_string(),
                    e.method.to_string(),
                    e.stable.to_string(),
                ]
            })
            .collect();
        self.csv(
            name,
            &[
                "re_z",
                "im_z",
                "re_k",
                "im_k",
                "multiplicity",
                "method",
                "stable",
            ],
            &rows,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, -1.0 / 3.0, 6.02214076e23, 5e-324] {
            assert_eq!(float(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(float(0.5), "5.0000000000000000e-1");
    }
}
