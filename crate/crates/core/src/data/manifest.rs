//! Tab-separated dataset manifests: `<relative-path>\t<cg|pg>` per line.

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Cg = 0,
    Pg = 1,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::Cg, Label::Pg];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Result<Self> {
        match i {
            0 => Ok(Label::Cg),
            1 => Ok(Label::Pg),
            _ => Err(Error::LabelOutOfRange(i)),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Cg => "cg",
            Label::Pg => "pg",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cg" => Ok(Label::Cg),
            "pg" => Ok(Label::Pg),
            other => Err(Error::unknown("label", other)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub path: String,
    pub label: Label,
}

/// Labelled image list. Record paths are relative to `root`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    pub root: PathBuf,
    pub records: Vec<Record>,
}

impl Manifest {
    pub fn new(root: impl Into<PathBuf>, records: Vec<Record>) -> Result<Self> {
        let m = Manifest { root: root.into(), records };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.records.is_empty() {
            return Err(Error::Data("manifest has no records".into()));
        }
        let mut seen = HashSet::new();
        for r in &self.records {
            if !seen.insert(r.path.as_str()) {
                return Err(Error::Data(format!("duplicate manifest path `{}`", r.path)));
            }
        }
        Ok(())
    }

    pub fn parse(text: &str, root: impl Into<PathBuf>) -> Result<Self> {
        let mut records = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (path, label) = line
                .split_once('\t')
                .ok_or_else(|| Error::Data(format!("manifest line {}: expected `<path>\\t<cg|pg>`", lineno + 1)))?;
            let label = label
                .trim()
                .parse()
                .map_err(|_| Error::Data(format!("manifest line {}: unknown label `{}`", lineno + 1, label.trim())))?;
            records.push(Record { path: path.to_owned(), label });
        }
        Manifest::new(root, records)
    }

    /// Reads a manifest; relative paths resolve against the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let root = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Manifest::parse(&text, root)
    }

    pub fn to_text(&self) -> String {
        self.records.iter().map(|r| format!("{}\t{}\n", r.path, r.label)).collect()
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn resolve(&self, record: &Record) -> PathBuf {
        self.root.join(&record.path)
    }

    pub fn count(&self, label: Label) -> usize {
        self.records.iter().filter(|r| r.label == label).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_render_round_trip() {
        let text = "cg/a.png\tcg\npg/b.png\tpg\n";
        let m = Manifest::parse(text, "/data").unwrap();
        assert_eq!(m.records[1], Record { path: "pg/b.png".into(), label: Label::Pg });
        assert_eq!(m.to_text(), text);
        assert_eq!(m.resolve(&m.records[0]), PathBuf::from("/data/cg/a.png"));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Manifest::parse("", ".").is_err());
        assert!(Manifest::parse("a.png\tcg\na.png\tpg\n", ".").is_err());
        assert!(Manifest::parse("a.png\tcgi\n", ".").is_err());
        assert!(Manifest::parse("a.png cg\n", ".").is_err());
    }

    #[test]
    fn label_indices() {
        assert_eq!(Label::from_index(1).unwrap(), Label::Pg);
        assert!(matches!(Label::from_index(2), Err(Error::LabelOutOfRange(2))));
    }
}
