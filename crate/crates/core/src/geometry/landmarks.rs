use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use nalgebra::Point3;

use crate::error::{Error, Result};

/// Labeled landmark positions. A landmark may be present with a position or
/// explicitly absent (written as `label -`), which keeps label sets stable
/// across subjects with missing annotations.
///
/// Order is preserved: file round-trips keep lines in their original order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LandmarkSet {
    entries: Vec<(String, Option<Point3<f64>>)>,
    by_label: HashMap<String, usize>,
}

impl LandmarkSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Insert or overwrite a landmark. Labels must be non-empty and free of
    /// whitespace (they are written space-separated).
    pub fn insert(&mut self, label: &str, position: Option<Point3<f64>>) -> Result<()> {
        if label.is_empty() || label.chars().any(char::is_whitespace) {
            return Err(Error::InvalidArgument(format!(
                "invalid landmark label {label:?}"
            )));
        }
        if let Some(pos) = position {
            if !(pos.x.is_finite() && pos.y.is_finite() && pos.z.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "non-finite landmark position for {label:?}"
                )));
            }
        }
        match self.by_label.get(label) {
            Some(&i) => self.entries[i].1 = position,
            None => {
                self.by_label.insert(label.to_string(), self.entries.len());
                self.entries.push((label.to_string(), position));
            }
        }
        Ok(())
    }

    pub fn get(&self, label: &str) -> Option<Point3<f64>> {
        self.by_label.get(label).and_then(|&i| self.entries[i].1)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Option<Point3<f64>>)> {
        self.entries.iter().map(|(l, p)| (l.as_str(), *p))
    }

    /// Labels present (with a position) in both sets, in `self`'s order.
    pub fn common_labels(&self, other: &LandmarkSet) -> Vec<String> {
        self.entries
            .iter()
            .filter(|(l, p)| p.is_some() && other.get(l).is_some())
            .map(|(l, _)| l.clone())
            .collect()
    }

    /// Corresponding position pairs (self, other) for common labels.
    pub fn paired_positions(&self, other: &LandmarkSet) -> Vec<(Point3<f64>, Point3<f64>)> {
        self.common_labels(other)
            .iter()
            .map(|l| (self.get(l).unwrap(), other.get(l).unwrap()))
            .collect()
    }

    /// Parse a landmark file: one `label x y z` or `label -` per line.
    /// Blank lines and lines starting with `#` are skipped.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let reader = BufReader::new(std::fs::File::open(path)?);
        let mut set = LandmarkSet::new();
        for (lineno, line) in reader.lines().enumerate() {
            let lineno = lineno + 1;
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let label = parts.next().unwrap();
            let rest: Vec<&str> = parts.collect();
            let position = match rest.as_slice() {
                ["-"] => None,
                [x, y, z] => {
                    let parse = |s: &str, what: &str| {
                        s.parse::<f64>().map_err(|_| {
                            Error::parse(path, lineno, format!("bad {what} coordinate {s:?}"))
                        })
                    };
                    Some(Point3::new(
                        parse(x, "x")?,
                        parse(y, "y")?,
                        parse(z, "z")?,
                    ))
                }
                _ => {
                    return Err(Error::parse(
                        path,
                        lineno,
                        format!("expected `label x y z` or `label -`, got {line:?}"),
                    ))
                }
            };
            if set.by_label.contains_key(label) {
                return Err(Error::parse(
                    path,
                    lineno,
                    format!("duplicate landmark label {label:?}"),
                ));
            }
            set.insert(label, position)?;
        }
        Ok(set)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        for (label, pos) in &self.entries {
            match pos {
                Some(p) => writeln!(out, "{label} {} {} {}", p.x, p.y, p.z)?,
                None => writeln!(out, "{label} -")?,
            }
        }
        out.flush()?;
        Ok(())
    }
}
