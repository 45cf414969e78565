//! Line-oriented dataset directory: `graph.tsv`, `features.csv`, `labels.csv`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::Array2;

use super::{FeatureMatrix, LabelVector, SparseGraph};
use crate::error::{CegaError, Result};

pub const GRAPH_FILE: &str = "graph.tsv";
pub const FEATURES_FILE: &str = "features.csv";
pub const LABELS_FILE: &str = "labels.csv";

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub graph: SparseGraph,
    pub features: FeatureMatrix,
    pub labels: LabelVector,
}

impl Dataset {
    pub fn new(graph: SparseGraph, features: FeatureMatrix, labels: LabelVector) -> Result<Self> {
        let n = graph.num_nodes();
        if features.num_nodes() != n || labels.num_nodes() != n {
            return Err(CegaError::Structural(format!(
                "node counts disagree: graph {n}, features {}, labels {}",
                features.num_nodes(),
                labels.num_nodes()
            )));
        }
        Ok(Dataset {
            graph,
            features,
            labels,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.graph.num_nodes()
    }

    pub fn num_classes(&self) -> usize {
        self.labels.num_classes()
    }
}

pub(crate) fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

pub(crate) fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("")
    ));
    fs::write(&tmp, contents).map_err(|e| CegaError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| CegaError::io(path, e))
}

pub fn save_dataset(dir: &Path, ds: &Dataset) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CegaError::io(dir, e))?;

    let mut g = format!(
        "#nodes={} undirected={}\n",
        ds.graph.num_nodes(),
        u8::from(ds.graph.is_undirected())
    );
    for (u, v) in ds.graph.edges() {
        writeln!(g, "{u}\t{v}").unwrap();
    }
    write_atomic(&dir.join(GRAPH_FILE), &g)?;

    let mut f = format!("#dim={}\n", ds.features.dim());
    for row in ds.features.values().rows() {
        let cells: Vec<String> = row.iter().map(|&v| fmt_real(v)).collect();
        f.push_str(&cells.join(","));
        f.push('\n');
    }
    write_atomic(&dir.join(FEATURES_FILE), &f)?;

    let mut l = format!("#classes={}\n", ds.labels.num_classes());
    for &y in ds.labels.labels() {
        writeln!(l, "{y}").unwrap();
    }
    write_atomic(&dir.join(LABELS_FILE), &l)
}

fn header_value<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    line.trim_start_matches('#')
        .split_whitespace()
        .find_map(|tok| tok.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
}

struct Lines {
    path: std::path::PathBuf,
    text: String,
}

impl Lines {
    fn read(dir: &Path, name: &str) -> Result<Self> {
        let path = dir.join(name);
        let text = fs::read_to_string(&path).map_err(|e| CegaError::io(&path, e))?;
        Ok(Lines { path, text })
    }

    /// Header and body lines with 1-based line numbers, skipping blank lines.
    fn split(&self) -> Result<(&str, Vec<(usize, &str)>)> {
        let mut it = self
            .text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (_, header) = it
            .next()
            .ok_or_else(|| CegaError::load(&self.path, 1, "empty file"))?;
        if !header.starts_with('#') {
            return Err(CegaError::load(&self.path, 1, "missing '#' header line"));
        }
        Ok((header, it.collect()))
    }

    fn err(&self, line: usize, msg: impl Into<String>) -> CegaError {
        CegaError::load(&self.path, line, msg)
    }
}

fn parse_header_count(src: &Lines, header: &str, key: &str) -> Result<usize> {
    header_value(header, key)
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| src.err(1, format!("header must contain {key}=<int>")))
}

pub fn load_dataset(dir: &Path) -> Result<Dataset> {
    let gsrc = Lines::read(dir, GRAPH_FILE)?;
    let (header, body) = gsrc.split()?;
    let n = parse_header_count(&gsrc, header, "nodes")?;
    let undirected = match header_value(header, "undirected") {
        Some("1") => true,
        Some("0") => false,
        _ => return Err(gsrc.err(1, "header must contain undirected=<0|1>")),
    };
    let mut edges = Vec::with_capacity(body.len());
    for (ln, line) in body {
        let mut parts = line.split('\t');
        let parse = |p: Option<&str>| p.and_then(|s| s.trim().parse::<usize>().ok());
        match (parse(parts.next()), parse(parts.next()), parts.next()) {
            (Some(u), Some(v), None) if u < n && v < n => edges.push((u, v)),
            (Some(u), Some(v), None) => {
                return Err(gsrc.err(ln, format!("edge ({u}, {v}) out of range for {n} nodes")))
            }
            _ => return Err(gsrc.err(ln, "expected '<u>\\t<v>'")),
        }
    }
    let graph = SparseGraph::from_edges(&edges, n, undirected)?;

    let fsrc = Lines::read(dir, FEATURES_FILE)?;
    let (header, body) = fsrc.split()?;
    let dim = parse_header_count(&fsrc, header, "dim")?;
    if dim == 0 {
        return Err(fsrc.err(1, "dim must be at least 1"));
    }
    if body.len() != n {
        let line = body.get(n).map(|(l, _)| *l).unwrap_or(1);
        return Err(fsrc.err(
            line,
            format!("{} feature rows but graph has {n} nodes", body.len()),
        ));
    }
    let mut values = Array2::<f64>::zeros((n, dim));
    for (row, (ln, line)) in body.into_iter().enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != dim {
            return Err(fsrc.err(ln, format!("expected {dim} values, found {}", cells.len())));
        }
        for (col, cell) in cells.into_iter().enumerate() {
            let v: f64 = cell
                .trim()
                .parse()
                .map_err(|_| fsrc.err(ln, format!("bad number '{cell}'")))?;
            if !v.is_finite() {
                return Err(fsrc.err(ln, format!("non-finite value '{cell}'")));
            }
            values[[row, col]] = v;
        }
    }
    let features = FeatureMatrix::new(values)?;

    let lsrc = Lines::read(dir, LABELS_FILE)?;
    let (header, body) = lsrc.split()?;
    let classes = parse_header_count(&lsrc, header, "classes")?;
    if classes == 0 {
        return Err(lsrc.err(1, "classes must be at least 1"));
    }
    if body.len() != n {
        let line = body.get(n).map(|(l, _)| *l).unwrap_or(1);
        return Err(lsrc.err(line, format!("{} labels but graph has {n} nodes", body.len())));
    }
    let mut labels = Vec::with_capacity(n);
    for (ln, line) in body {
        let y: usize = line
            .parse()
            .map_err(|_| lsrc.err(ln, format!("bad label '{line}'")))?;
        if y >= classes {
            return Err(lsrc.err(ln, format!("label {y} not below classes={classes}")));
        }
        labels.push(y);
    }
    Dataset::new(graph, features, LabelVector::new(labels, classes)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_sbm, SbmConfig};

    fn sample() -> Dataset {
        let cfg = SbmConfig {
            num_nodes: 30,
            num_classes: 3,
            intra_p: 0.3,
            inter_p: 0.02,
            feature_dim: 5,
            feature_separation: 1.5,
            noise_sigma: 0.7,
        };
        let (g, x, y) = generate_sbm(&cfg, 4).unwrap();
        Dataset::new(g, x, y).unwrap()
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let ds = sample();
        save_dataset(dir.path(), &ds).unwrap();
        assert_eq!(load_dataset(dir.path()).unwrap(), ds);
    }

    #[test]
    fn label_above_class_count() {
        let dir = tempfile::tempdir().unwrap();
        save_dataset(dir.path(), &sample()).unwrap();
        let p = dir.path().join(LABELS_FILE);
        let text = fs::read_to_string(&p).unwrap().replacen("#classes=3", "#classes=5", 1);
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        lines[4] = "7".into();
        fs::write(&p, lines.join("\n")).unwrap();
        let err = load_dataset(dir.path()).unwrap_err();
        match err {
            CegaError::Load { file, line, .. } => {
                assert!(file.ends_with(LABELS_FILE));
                assert_eq!(line, 5);
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn feature_row_count_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        save_dataset(dir.path(), &sample()).unwrap();
        let p = dir.path().join(FEATURES_FILE);
        let text = fs::read_to_string(&p).unwrap();
        let trimmed: Vec<&str> = text.lines().take(20).collect();
        fs::write(&p, trimmed.join("\n")).unwrap();
        let err = load_dataset(dir.path()).unwrap_err();
        assert!(matches!(&err, CegaError::Load { file, .. } if file.ends_with(FEATURES_FILE)), "{err}");
    }

    #[test]
    fn malformed_edge_line() {
        let dir = tempfile::tempdir().unwrap();
        save_dataset(dir.path(), &sample()).unwrap();
        let p = dir.path().join(GRAPH_FILE);
        let mut text = fs::read_to_string(&p).unwrap();
        text.push_str("3 x\n");
        fs::write(&p, text).unwrap();
        assert!(matches!(load_dataset(dir.path()), Err(CegaError::Load { .. })));
    }

    #[test]
    fn decimals_have_enough_digits() {
        assert_eq!(fmt_real(0.5), "5.0000000000000000e-1");
        let v = 0.1f64 + 0.2;
        assert_eq!(fmt_real(v).parse::<f64>().unwrap(), v);
    }
}
