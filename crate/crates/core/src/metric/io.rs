//! JSON space files.
//!
//! ```json
//! { "kind": "finite", "points": ["0", "a"], "base": "0",
//!   "d": [["0", "1/2"], [0.5, 0]] }
//! { "kind": "gallery", "gallery": { "name": "ag", "N": 8 } }
//! ```
//!
//! The matrix is always full; asymmetric input is rejected. Gallery files
//! may omit `points`/`d`; when present they must match the closed form.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{gallery, MetricSpace, SpaceKind};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GalleryEntry {
    pub name: String,
    #[serde(rename = "N")]
    pub n: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SnowflakeParams {
    pub p: String,
    pub exact: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpaceFile {
    pub kind: String,
    #[serde(default)]
    pub points: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<String>,
    #[serde(default)]
    pub d: Vec<Vec<Value>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gallery: Option<GalleryEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snowflake: Option<SnowflakeParams>,
}

fn malformed(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Malformed { path: path.into(), message: message.into() }
}

pub fn load_space(path: &Path) -> Result<MetricSpace> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_space(&text)
}

pub fn parse_space(text: &str) -> Result<MetricSpace> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: SpaceFile = serde_path_to_error::deserialize(de)
        .map_err(|e| malformed(e.path().to_string(), e.inner().to_string()))?;
    from_file(file)
}

fn from_file(file: SpaceFile) -> Result<MetricSpace> {
    match file.kind.as_str() {
        "gallery" => {
            let entry = file
                .gallery
                .as_ref()
                .ok_or_else(|| malformed("gallery", "gallery files need a `gallery` object"))?;
            let space = gallery(&entry.name, entry.n)?;
            if !file.d.is_empty() || !file.points.is_empty() {
                let explicit = finite_from_parts(&file)?;
                if explicit.labels() != space.labels() || explicit.matrix() != space.matrix() {
                    return Err(malformed("d", "explicit matrix disagrees with the gallery closed form"));
                }
            }
            Ok(space)
        }
        "finite" => {
            let space = finite_from_parts(&file)?;
            match &file.snowflake {
                None => Ok(space),
                Some(params) => {
                    let exponent = rational::parse(&params.p).map_err(|e| e.at("snowflake.p"))?;
                    let (labels, dist) = (space.labels().to_vec(), space.matrix().to_vec());
                    MetricSpace::with_kind(labels, dist, SpaceKind::Snowflake { exponent, exact: params.exact })
                }
            }
        }
        other => Err(malformed("kind", format!("expected \"finite\" or \"gallery\", found \"{other}\""))),
    }
}

fn finite_from_parts(file: &SpaceFile) -> Result<MetricSpace> {
    let n = file.points.len();
    if n == 0 {
        return Err(malformed("points", "at least one point is required"));
    }
    if file.d.len() != n {
        return Err(malformed("d", format!("expected {n} rows, found {}", file.d.len())));
    }
    let mut dist: Vec<Vec<Rational>> = Vec::with_capacity(n);
    for (i, row) in file.d.iter().enumerate() {
        if row.len() != n {
            return Err(malformed(format!("d[{i}]"), format!("expected {n} entries, found {}", row.len())));
        }
        let parsed = row
            .iter()
            .enumerate()
            .map(|(j, v)| rational::from_json(v).map_err(|e| e.at(&format!("d[{i}][{j}]"))))
            .collect::<Result<Vec<_>>>()?;
        dist.push(parsed);
    }
    for i in 0..n {
        for j in i + 1..n {
            if dist[i][j] != dist[j][i] {
                return Err(malformed(
                    format!("d[{j}][{i}]"),
                    format!(
                        "matrix is not symmetric: d[{i}][{j}] = {} but d[{j}][{i}] = {}",
                        rational::format(&dist[i][j]),
                        rational::format(&dist[j][i])
                    ),
                ));
            }
        }
    }
    let base = file.base.clone().unwrap_or_else(|| file.points[0].clone());
    let b = file
        .points
        .iter()
        .position(|p| *p == base)
        .ok_or_else(|| malformed("base", format!("base `{base}` is not among the points")))?;
    // reorder so the base point sits at index 0
    let order: Vec<usize> = std::iter::once(b).chain((0..n).filter(|&i| i != b)).collect();
    let labels = order.iter().map(|&i| file.points[i].clone()).collect();
    let dist = order
        .iter()
        .map(|&i| order.iter().map(|&j| dist[i][j].clone()).collect())
        .collect();
    MetricSpace::new(labels, dist).map_err(|e| match e {
        Error::InvalidParameter(m) => malformed("points", m),
        other => other,
    })
}

/// Serializes a space, always writing the full matrix as rational strings.
pub fn space_to_json(space: &MetricSpace) -> SpaceFile {
    let d = space
        .matrix()
        .iter()
        .map(|row| row.iter().map(|r| Value::String(rational::format(r))).collect())
        .collect();
    let (kind, gallery, snowflake) = match space.kind() {
        SpaceKind::Finite => ("finite", None, None),
        SpaceKind::Gallery { family, n } => (
            "gallery",
            Some(GalleryEntry { name: family.name().to_string(), n: *n }),
            None,
        ),
        SpaceKind::Snowflake { exponent, exact } => (
            "finite",
            None,
            Some(SnowflakeParams { p: rational::format(exponent), exact: *exact }),
        ),
    };
    SpaceFile {
        kind: kind.to_string(),
        points: space.labels().to_vec(),
        base: Some(space.labels()[0].clone()),
        d,
        gallery,
        snowflake,
    }
}
