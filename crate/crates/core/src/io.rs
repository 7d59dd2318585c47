//! CSV and JSON files exchanged by the command line tool.
//!
//! * clouds: `x0,x1,...,label_value`, label empty on unlabeled rows;
//! * graphs: `i,j,w` with `i < j`, plus a JSON sidecar `{n, h, kernel, seed}`;
//! * labels and vertex functions: `vertex,value`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{LabelSet, PointCloud};
use crate::graph::GeometricGraph;
use crate::kernel::KernelProfile;
use crate::shortest_path::GraphFunction;

fn format_error(path: &Path, reason: impl Into<String>) -> Error {
    Error::Format { path: Some(path.to_path_buf()), reason: reason.into() }
}

fn parse_f64(path: &Path, line: usize, s: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| format_error(path, format!("record {line}: `{s}` is not a number")))
}

fn parse_usize(path: &Path, line: usize, s: &str) -> Result<usize> {
    s.trim().parse().map_err(|_| format_error(path, format!("record {line}: `{s}` is not a vertex index")))
}

pub fn write_cloud(path: &Path, cloud: &PointCloud, labels: Option<&LabelSet>) -> Result<()> {
    let mut label_of = vec![None; cloud.len()];
    if let Some(l) = labels {
        for (i, v) in l.iter() {
            if i >= cloud.len() {
                return Err(format_error(path, format!("label vertex {i} outside the cloud")));
            }
            label_of[i] = Some(v);
        }
    }
    let mut w = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = (0..cloud.dim()).map(|k| format!("x{k}")).collect();
    header.push("label_value".into());
    w.write_record(&header)?;
    for (i, p) in cloud.points().enumerate() {
        let mut row: Vec<String> = p.iter().map(|x| format!("{x:.16e}")).collect();
        row.push(label_of[i].map_or(String::new(), |v: f64| format!("{v:.16e}")));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a cloud file; the label set is `None` when no row carries a label.
pub fn read_cloud(path: &Path) -> Result<(PointCloud, Option<LabelSet>)> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let dim = headers.len().checked_sub(1).filter(|&d| d > 0).ok_or_else(|| format_error(path, "too few columns"))?;
    if headers.get(dim) != Some("label_value") || (0..dim).any(|k| headers.get(k) != Some(&format!("x{k}"))) {
        return Err(format_error(path, "expected header x0,...,label_value"));
    }
    let mut coords = Vec::new();
    let (mut indices, mut values) = (Vec::new(), Vec::new());
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        for k in 0..dim {
            coords.push(parse_f64(path, line + 1, &record[k])?);
        }
        let label = record[dim].trim();
        if !label.is_empty() {
            indices.push(line);
            values.push(parse_f64(path, line + 1, label)?);
        }
    }
    let cloud = PointCloud::new(dim, coords)?;
    let labels = if indices.is_empty() { None } else { Some(LabelSet::new(indices, values)?) };
    Ok((cloud, labels))
}

/// Contents of the JSON file stored next to a graph's edge list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSidecar {
    pub n: usize,
    pub h: Option<f64>,
    pub kernel: Option<KernelProfile>,
    pub seed: Option<u64>,
}

/// `g.csv` keeps its metadata in `g.json`.
pub fn sidecar_path(graph_path: &Path) -> PathBuf {
    graph_path.with_extension("json")
}

pub fn write_graph(path: &Path, graph: &GeometricGraph, seed: Option<u64>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["i", "j", "w"])?;
    for (i, j, wt) in graph.edges() {
        w.write_record(&[i.to_string(), j.to_string(), format!("{wt:.16e}")])?;
    }
    w.flush()?;
    let sidecar = GraphSidecar { n: graph.len(), h: graph.bandwidth(), kernel: graph.kernel().copied(), seed };
    write_json(&sidecar_path(path), &sidecar)
}

/// Reads an edge list and its sidecar, which supplies the vertex count.
pub fn read_graph(path: &Path) -> Result<(GeometricGraph, GraphSidecar)> {
    let side_path = sidecar_path(path);
    let sidecar: GraphSidecar = serde_json::from_reader(File::open(&side_path).map_err(|e| {
        format_error(&side_path, format!("graph metadata missing: {e}"))
    })?)?;
    let mut reader = csv::Reader::from_path(path)?;
    if reader.headers()?.iter().ne(["i", "j", "w"]) {
        return Err(format_error(path, "expected header i,j,w"));
    }
    let mut edges = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != 3 {
            return Err(format_error(path, format!("record {} has {} fields", line + 1, record.len())));
        }
        edges.push((
            parse_usize(path, line + 1, &record[0])?,
            parse_usize(path, line + 1, &record[1])?,
            parse_f64(path, line + 1, &record[2])?,
        ));
    }
    let mut graph = GeometricGraph::from_edges(sidecar.n, &edges)?;
    if let (Some(h), Some(k)) = (sidecar.h, sidecar.kernel) {
        graph = graph.with_metadata(h, k);
    }
    Ok((graph, sidecar))
}

fn read_pairs(path: &Path) -> Result<Vec<(usize, f64)>> {
    let mut reader = csv::Reader::from_path(path)?;
    if reader.headers()?.iter().ne(["vertex", "value"]) {
        return Err(format_error(path, "expected header vertex,value"));
    }
    let mut out = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != 2 {
            return Err(format_error(path, format!("record {} has {} fields", line + 1, record.len())));
        }
        out.push((parse_usize(path, line + 1, &record[0])?, parse_f64(path, line + 1, &record[1])?));
    }
    Ok(out)
}

fn write_pairs(path: &Path, pairs: impl Iterator<Item = (usize, f64)>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["vertex", "value"])?;
    for (i, v) in pairs {
        w.write_record(&[i.to_string(), format!("{v:.16e}")])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_labels(path: &Path) -> Result<LabelSet> {
    let pairs = read_pairs(path)?;
    LabelSet::new(pairs.iter().map(|p| p.0).collect(), pairs.iter().map(|p| p.1).collect())
}

pub fn write_labels(path: &Path, labels: &LabelSet) -> Result<()> {
    write_pairs(path, labels.iter())
}

/// Reads `vertex,value` rows covering vertices `0..n` exactly once each.
pub fn read_function(path: &Path) -> Result<GraphFunction> {
    let mut pairs = read_pairs(path)?;
    pairs.sort_by_key(|p| p.0);
    if pairs.iter().enumerate().any(|(k, p)| p.0 != k) {
        return Err(format_error(path, "vertices must be 0..n, each listed once"));
    }
    Ok(GraphFunction::new(pairs.into_iter().map(|p| p.1).collect()))
}

pub fn write_function(path: &Path, u: &GraphFunction) -> Result<()> {
    write_pairs(path, u.iter().copied().enumerate())
}

/// `vertex,distance` rows; unreachable vertices are written as `inf`.
pub fn write_distances(path: &Path, d: &GraphFunction) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["vertex", "distance"])?;
    for (i, v) in d.iter().enumerate() {
        w.write_record(&[i.to_string(), format!("{v:.16e}")])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}
