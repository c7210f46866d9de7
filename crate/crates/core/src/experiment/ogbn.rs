//! Reader for the ogbn-proteins directory layout as published by the
//! benchmark (`raw/*.csv.gz`, `split/species/*.csv.gz`). The dataset is not
//! bundled; point the reader at a downloaded and unzipped copy.

use std::path::{Path, PathBuf};

use super::config::OgbnLayout;
use crate::error::{Error, Result};
use crate::graphstore::io::{for_each_record, open_text};
use crate::graphstore::{Edge, Label, Layer, MultilayerGraph, NodeId, NodeLabels, Role, SplitAssignment};

/// Environment variable naming a local ogbn-proteins directory.
pub const OGBN_DIR_ENV: &str = "OGBN_PROTEINS_DIR";

pub const FEATURE_COUNT: usize = 8;

fn file(dir: &Path, parts: &[&str]) -> PathBuf {
    let mut p = dir.to_path_buf();
    for part in parts {
        p.push(part);
    }
    p
}

/// Whether `dir` looks like an ogbn-proteins download.
pub fn ogbn_available(dir: &Path) -> bool {
    ["edge.csv.gz", "edge-feat.csv.gz", "node-label.csv.gz"]
        .iter()
        .all(|f| file(dir, &["raw", f]).is_file())
        && file(dir, &["split", "species", "train.csv.gz"]).is_file()
}

/// Per-node 0/1 labels for all 112 tasks; the row count fixes `N`.
pub fn load_ogbn_labels(dir: &Path) -> Result<NodeLabels> {
    let path = file(dir, &["raw", "node-label.csv.gz"]);
    let mut rows: Vec<Vec<Option<Label>>> = Vec::new();
    for_each_record(open_text(&path)?, &path, |line, fields| {
        if !rows.is_empty() && fields.len() != rows[0].len() {
            return Err(Error::parse(
                &path,
                line,
                format!("expected {} labels, got {}", rows[0].len(), fields.len()),
            ));
        }
        let row = fields
            .iter()
            .map(|f| match *f {
                "1" | "1.0" => Ok(Some(Label::Pos)),
                "0" | "0.0" => Ok(Some(Label::Neg)),
                other => Err(Error::parse(&path, line, format!("invalid label `{other}`"))),
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
        Ok(())
    })?;
    let n = rows.len();
    let t = rows.first().map_or(0, Vec::len);
    let tasks: Vec<Vec<Option<Label>>> = (0..t).map(|k| rows.iter().map(|r| r[k]).collect()).collect();
    NodeLabels::from_tasks(n, tasks)
}

/// The published species split.
pub fn load_ogbn_split(dir: &Path, node_count: usize) -> Result<SplitAssignment> {
    let mut split = SplitAssignment::new(node_count);
    for (name, role) in [
        ("train", Role::Train),
        ("valid", Role::Validation),
        ("test", Role::Test),
    ] {
        let path = file(dir, &["split", "species", &format!("{name}.csv.gz")]);
        for_each_record(open_text(&path)?, &path, |line, fields| {
            let v: NodeId = fields[0]
                .parse()
                .map_err(|_| Error::parse(&path, line, format!("invalid node id `{}`", fields[0])))?;
            split
                .set(v, Some(role))
                .map_err(|e| Error::parse(&path, line, e.to_string()))
        })?;
    }
    Ok(split)
}

/// Undirected graph from `edge.csv.gz` and `edge-feat.csv.gz`, read in
/// lockstep.
pub fn load_ogbn_graph(dir: &Path, node_count: usize, layout: OgbnLayout) -> Result<MultilayerGraph> {
    let edge_path = file(dir, &["raw", "edge.csv.gz"]);
    let feat_path = file(dir, &["raw", "edge-feat.csv.gz"]);
    let mut endpoints: Vec<(NodeId, NodeId)> = Vec::new();
    for_each_record(open_text(&edge_path)?, &edge_path, |line, fields| {
        let parse = |f: &str| -> Result<NodeId> {
            let v: NodeId = f
                .parse()
                .map_err(|_| Error::parse(&edge_path, line, format!("invalid node id `{f}`")))?;
            if v as usize >= node_count {
                return Err(Error::parse(
                    &edge_path,
                    line,
                    format!("node {v} outside 0..{node_count}"),
                ));
            }
            Ok(v)
        };
        if fields.len() < 2 {
            return Err(Error::parse(&edge_path, line, "expected two node ids"));
        }
        endpoints.push((parse(fields[0])?, parse(fields[1])?));
        Ok(())
    })?;
    let layer_count = match layout {
        OgbnLayout::SingleLayer => 1,
        OgbnLayout::Multilayer => FEATURE_COUNT,
    };
    let mut per_layer: Vec<Vec<Edge>> = vec![Vec::with_capacity(endpoints.len()); layer_count];
    let mut row = 0usize;
    for_each_record(open_text(&feat_path)?, &feat_path, |line, fields| {
        if fields.len() != FEATURE_COUNT {
            return Err(Error::parse(
                &feat_path,
                line,
                format!("expected {FEATURE_COUNT} features, got {}", fields.len()),
            ));
        }
        let &(s, t) = endpoints
            .get(row)
            .ok_or_else(|| Error::parse(&feat_path, line, "more feature rows than edges"))?;
        row += 1;
        if s == t {
            return Ok(());
        }
        let feats = fields
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| Error::parse(&feat_path, line, format!("invalid feature `{f}`")))
            })
            .collect::<Result<Vec<f64>>>()?;
        match layout {
            OgbnLayout::SingleLayer => per_layer[0].push(Edge {
                source: s,
                target: t,
                weight: feats.iter().sum::<f64>() / FEATURE_COUNT as f64,
            }),
            OgbnLayout::Multilayer => {
                for (k, &w) in feats.iter().enumerate() {
                    if w > 0.0 {
                        per_layer[k].push(Edge {
                            source: s,
                            target: t,
                            weight: w,
                        });
                    }
                }
            }
        }
        Ok(())
    })?;
    if row != endpoints.len() {
        return Err(Error::Value(format!(
            "{} edges but {row} feature rows",
            endpoints.len()
        )));
    }
    drop(endpoints);
    let layers = per_layer
        .into_iter()
        .enumerate()
        .map(|(k, edges)| Layer::from_edges(k, false, node_count, edges))
        .collect::<Result<Vec<_>>>()?;
    MultilayerGraph::new(node_count, layers)
}
