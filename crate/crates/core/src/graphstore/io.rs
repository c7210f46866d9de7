//! Text formats for edges, labels and splits.
//!
//! All formats are whitespace-separated UTF-8 lines; blank lines and lines
//! starting with `#` are skipped. Paths ending in `.gz` are decompressed
//! transparently.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use flate2::read::GzDecoder;

use super::{Edge, Label, Layer, MultilayerGraph, NodeId, NodeLabels, Role, SplitAssignment};
use crate::error::{Error, Result};

/// How to interpret an edge list file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EdgeListFormat {
    /// Size of the node universe; inferred as `max id + 1` when absent.
    pub node_count: Option<usize>,
    /// Number of layers; inferred as `max layer + 1` when absent.
    pub layer_count: Option<usize>,
    pub directed: bool,
}

pub(crate) fn open_text(path: &Path) -> Result<Box<dyn BufRead>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    if path.extension().is_some_and(|ext| ext == "gz") {
        Ok(Box::new(BufReader::new(GzDecoder::new(file))))
    } else {
        Ok(Box::new(BufReader::new(file)))
    }
}

/// Iterates over `(line_number, fields)` of the non-comment lines.
pub(crate) fn for_each_record<R: BufRead>(
    reader: R,
    path: &Path,
    mut f: impl FnMut(usize, &[&str]) -> Result<()>,
) -> Result<()> {
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .collect();
        f(idx + 1, &fields)?;
    }
    Ok(())
}

fn parse_field<T: std::str::FromStr>(path: &Path, line: usize, field: &str, what: &str) -> Result<T> {
    field
        .parse()
        .map_err(|_| Error::parse(path, line, format!("invalid {what} `{field}`")))
}

pub fn load_edgelist(path: impl AsRef<Path>, format: &EdgeListFormat) -> Result<MultilayerGraph> {
    let path = path.as_ref();
    read_edgelist(open_text(path)?, path, format)
}

/// Parses `source target layer [weight]` rows; weight defaults to 1.
pub fn read_edgelist<R: BufRead>(reader: R, path: &Path, format: &EdgeListFormat) -> Result<MultilayerGraph> {
    let mut rows: Vec<(usize, Edge)> = Vec::new();
    let mut max_node = None::<NodeId>;
    let mut max_layer = None::<usize>;
    for_each_record(reader, path, |line, f| {
        if f.len() != 3 && f.len() != 4 {
            return Err(Error::parse(
                path,
                line,
                format!("expected `source target layer weight`, got {} fields", f.len()),
            ));
        }
        let source: NodeId = parse_field(path, line, f[0], "source")?;
        let target: NodeId = parse_field(path, line, f[1], "target")?;
        let layer: usize = parse_field(path, line, f[2], "layer")?;
        let weight: f64 = match f.get(3) {
            Some(w) => parse_field(path, line, w, "weight")?,
            None => 1.0,
        };
        if !weight.is_finite() || weight < 0.0 {
            return Err(Error::parse(
                path,
                line,
                format!("weight {weight} must be finite and >= 0"),
            ));
        }
        if source == target {
            return Err(Error::parse(path, line, "self-loops are not supported"));
        }
        if let Some(n) = format.node_count {
            let hi = source.max(target) as usize;
            if hi >= n {
                return Err(Error::Range {
                    what: "node id",
                    value: hi,
                    limit: n,
                });
            }
        }
        if let Some(k) = format.layer_count {
            if layer >= k {
                return Err(Error::Range {
                    what: "layer id",
                    value: layer,
                    limit: k,
                });
            }
        }
        max_node = max_node.max(Some(source.max(target)));
        max_layer = max_layer.max(Some(layer));
        rows.push((layer, Edge { source, target, weight }));
        Ok(())
    })?;

    let node_count = format
        .node_count
        .unwrap_or_else(|| max_node.map_or(0, |m| m as usize + 1));
    let layer_count = format
        .layer_count
        .unwrap_or_else(|| max_layer.map_or(1, |m| m + 1))
        .max(1);

    let mut per_layer: Vec<Vec<Edge>> = vec![Vec::new(); layer_count];
    for (k, e) in rows {
        per_layer[k].push(e);
    }
    let layers = per_layer
        .into_iter()
        .enumerate()
        .map(|(k, edges)| Layer::from_edges(k, format.directed, node_count, edges))
        .collect::<Result<Vec<_>>>()?;
    MultilayerGraph::new(node_count, layers)
}

/// Writes `source target layer weight` rows in canonical edge order.
pub fn write_edgelist<W: Write>(g: &MultilayerGraph, mut out: W) -> std::io::Result<()> {
    writeln!(out, "# nodes {} layers {}", g.node_count(), g.layer_count())?;
    for layer in g.layers() {
        for e in layer.edges() {
            writeln!(out, "{} {} {} {}", e.source, e.target, layer.id(), e.weight)?;
        }
    }
    Ok(())
}

pub fn load_labels(path: impl AsRef<Path>, node_count: usize) -> Result<NodeLabels> {
    let path = path.as_ref();
    read_labels(open_text(path)?, path, node_count)
}

/// Parses `node task label` rows.
pub fn read_labels<R: BufRead>(reader: R, path: &Path, node_count: usize) -> Result<NodeLabels> {
    let mut rows: Vec<(NodeId, usize, Label)> = Vec::new();
    for_each_record(reader, path, |line, f| {
        if f.len() != 3 {
            return Err(Error::parse(path, line, "expected `node task label`"));
        }
        let node: NodeId = parse_field(path, line, f[0], "node")?;
        let task: usize = parse_field(path, line, f[1], "task")?;
        let label = Label::parse(f[2])
            .ok_or_else(|| Error::parse(path, line, format!("label `{}` not in {{+1, -1, 1, 0}}", f[2])))?;
        if node as usize >= node_count {
            return Err(Error::Range {
                what: "node id",
                value: node as usize,
                limit: node_count,
            });
        }
        rows.push((node, task, label));
        Ok(())
    })?;
    let task_count = rows.iter().map(|r| r.1 + 1).max().unwrap_or(1);
    let mut labels = NodeLabels::new(node_count, task_count);
    for (node, task, label) in rows {
        labels.set(task, node, Some(label))?;
    }
    Ok(labels)
}

pub fn write_labels<W: Write>(labels: &NodeLabels, mut out: W) -> std::io::Result<()> {
    for t in 0..labels.task_count() {
        for v in 0..labels.node_count() as NodeId {
            if let Some(l) = labels.get(t, v) {
                writeln!(out, "{v} {t} {:+}", l.sign())?;
            }
        }
    }
    Ok(())
}

pub fn load_split(path: impl AsRef<Path>, node_count: usize) -> Result<SplitAssignment> {
    let path = path.as_ref();
    read_split(open_text(path)?, path, node_count)
}

/// Parses `node role` rows; a node listed twice is an error.
pub fn read_split<R: BufRead>(reader: R, path: &Path, node_count: usize) -> Result<SplitAssignment> {
    let mut split = SplitAssignment::new(node_count);
    for_each_record(reader, path, |line, f| {
        if f.len() != 2 {
            return Err(Error::parse(path, line, "expected `node role`"));
        }
        let node: NodeId = parse_field(path, line, f[0], "node")?;
        let role = Role::parse(f[1])
            .ok_or_else(|| Error::parse(path, line, format!("role `{}` not in {{train, valid, test}}", f[1])))?;
        if node as usize >= node_count {
            return Err(Error::Range {
                what: "node id",
                value: node as usize,
                limit: node_count,
            });
        }
        if split.role(node).is_some() {
            return Err(Error::parse(path, line, format!("node {node} assigned twice")));
        }
        split.set(node, Some(role))
    })?;
    Ok(split)
}

pub fn write_split<W: Write>(split: &SplitAssignment, mut out: W) -> std::io::Result<()> {
    for v in 0..split.node_count() as NodeId {
        if let Some(r) = split.role(v) {
            writeln!(out, "{v} {}", r.as_str())?;
        }
    }
    Ok(())
}
