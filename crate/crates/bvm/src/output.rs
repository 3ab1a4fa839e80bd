use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Rendered experiment output: `summary.json` plus named CSV files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifacts {
    pub summary: String,
    pub files: Vec<(String, String)>,
}

impl Artifacts {
    pub fn new<S: Serialize>(summary: &S) -> Result<Self> {
        let mut text = serde_json::to_string_pretty(summary).map_err(std::io::Error::from)?;
        text.push('\n');
        Ok(Self {
            summary: text,
            files: Vec::new(),
        })
    }

    pub fn with_file(mut self, name: &str, contents: String) -> Self {
        self.files.push((name.to_string(), contents));
        self
    }

    pub fn file(&self, name: &str) -> Option<&str> {
        self.files
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, c)| c.as_str())
    }

    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("summary.json"), &self.summary)?;
        for (name, contents) in &self.files {
            fs::write(dir.join(name), contents)?;
        }
        Ok(())
    }
}

/// Renders rows under `header` as CSV.
pub fn csv_string<I, R>(header: &[&str], rows: I) -> Result<String>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_rendering() {
        let s = csv_string(&["a", "b"], vec![vec!["1".to_string(), "2.5".to_string()]]).unwrap();
        assert_eq!(s, "a,b\n1,2.5\n");
    }

    #[test]
    fn writes_all_files() {
        let dir = tempfile::tempdir().unwrap();
        let a = Artifacts::new(&serde_json::json!({"x": 1}))
            .unwrap()
            .with_file("hist.csv", "bin_left,bin_right,count\n".into());
        a.write_to(&dir.path().join("out")).unwrap();
        let s = fs::read_to_string(dir.path().join("out/summary.json")).unwrap();
        assert_eq!(s, "{\n  \"x\": 1\n}\n");
        assert!(dir.path().join("out/hist.csv").exists());
        assert_eq!(a.file("hist.csv"), Some("bin_left,bin_right,count\n"));
    }
}
