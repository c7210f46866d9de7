use std::collections::HashSet;
use std::io::{BufRead, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::PairSample;
use crate::error::{Error, Result};
use crate::graphstore::io::{for_each_record, open_text};
use crate::graphstore::{GraphBuilder, Label, MultilayerGraph, NodeId};

/// Reads `z1 z2 label` lines.
pub fn read_pairs<R: BufRead>(reader: R, path: &Path, node_count: usize) -> Result<Vec<PairSample>> {
    let mut pairs = Vec::new();
    for_each_record(reader, path, |line, fields| {
        if fields.len() != 3 {
            return Err(Error::parse(
                path,
                line,
                format!("expected `z1 z2 label`, got {} fields", fields.len()),
            ));
        }
        let node = |f: &str| -> Result<NodeId> {
            let v: NodeId = f
                .parse()
                .map_err(|_| Error::parse(path, line, format!("invalid node id `{f}`")))?;
            if v as usize >= node_count {
                return Err(Error::parse(path, line, format!("node {v} outside 0..{node_count}")));
            }
            Ok(v)
        };
        let (z1, z2) = (node(fields[0])?, node(fields[1])?);
        if z1 == z2 {
            return Err(Error::parse(path, line, format!("self-pair ({z1}, {z2})")));
        }
        let label = Label::parse(fields[2])
            .ok_or_else(|| Error::parse(path, line, format!("invalid label `{}`", fields[2])))?;
        pairs.push(PairSample { z1, z2, label });
        Ok(())
    })?;
    Ok(pairs)
}

pub fn load_pairs(path: impl AsRef<Path>, node_count: usize) -> Result<Vec<PairSample>> {
    let path = path.as_ref();
    read_pairs(open_text(path)?, path, node_count)
}

pub fn write_pairs<W: Write>(pairs: &[PairSample], mut out: W) -> std::io::Result<()> {
    writeln!(out, "# z1 z2 label")?;
    for p in pairs {
        writeln!(out, "{} {} {}", p.z1, p.z2, p.label.sign())?;
    }
    Ok(())
}

/// How to carve labeled pairs out of a graph's edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSplitOptions {
    /// Fractions of the distinct edges withheld as positive train,
    /// validation and test pairs. The remaining edges stay observable.
    pub train: f64,
    pub validation: f64,
    pub test: f64,
    /// Sampled non-edges per positive pair in each split.
    pub negative_ratio: f64,
    pub seed: u64,
}

impl Default for LinkSplitOptions {
    fn default() -> Self {
        LinkSplitOptions {
            train: 0.2,
            validation: 0.1,
            test: 0.1,
            negative_ratio: 1.0,
            seed: 0,
        }
    }
}

/// Observable graph plus labeled pairs for each role.
#[derive(Debug, Clone)]
pub struct LinkSplit {
    pub observed: MultilayerGraph,
    pub train: Vec<PairSample>,
    pub valid: Vec<PairSample>,
    pub test: Vec<PairSample>,
}

/// Withholds random edges of `layers` as positive pairs and samples
/// non-adjacent pairs as negatives. Withheld edges are removed from every
/// listed layer of the observable graph. Pairs are unordered when all
/// listed layers are undirected.
pub fn sample_link_pairs(g: &MultilayerGraph, layers: &[usize], opts: &LinkSplitOptions) -> Result<LinkSplit> {
    let fracs = [opts.train, opts.validation, opts.test];
    if fracs.iter().any(|f| !(f.is_finite() && *f > 0.0)) || fracs.iter().sum::<f64>() > 1.0 + 1e-9 {
        return Err(Error::Split(format!(
            "withheld edge fractions must be positive and sum to at most 1, got {fracs:?}"
        )));
    }
    if !(opts.negative_ratio.is_finite() && opts.negative_ratio > 0.0) {
        return Err(Error::Split(format!(
            "negative ratio must be positive, got {}",
            opts.negative_ratio
        )));
    }
    if layers.is_empty() {
        return Err(Error::Config("link prediction needs at least one layer".into()));
    }
    for &k in layers {
        g.layer(k)?;
    }
    let unordered = layers.iter().all(|&k| !g.layers()[k].is_directed());
    let key = |a: NodeId, b: NodeId| if unordered && b < a { (b, a) } else { (a, b) };

    let mut edges: Vec<(NodeId, NodeId)> = Vec::new();
    for &k in layers {
        edges.extend(g.layers()[k].edges().map(|e| key(e.source, e.target)));
    }
    edges.sort_unstable();
    edges.dedup();
    let m = edges.len();
    let counts: Vec<usize> = fracs
        .iter()
        .map(|f| ((m as f64) * f).round().max(1.0) as usize)
        .collect();
    if counts.iter().sum::<usize>() > m {
        return Err(Error::Split(format!(
            "{m} edges are too few to withhold {counts:?} positive pairs"
        )));
    }
    let edge_set: HashSet<(NodeId, NodeId)> = edges.iter().copied().collect();

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    edges.shuffle(&mut rng);
    let mut withheld = HashSet::new();
    let mut positives = Vec::new();
    let mut start = 0;
    for &c in &counts {
        positives.push(edges[start..start + c].to_vec());
        withheld.extend(edges[start..start + c].iter().copied());
        start += c;
    }

    let n = g.node_count() as NodeId;
    let possible = if unordered {
        n as u64 * (n as u64 - 1) / 2
    } else {
        n as u64 * (n as u64 - 1)
    };
    let wanted: Vec<usize> = counts
        .iter()
        .map(|&c| ((c as f64) * opts.negative_ratio).round().max(1.0) as usize)
        .collect();
    if wanted.iter().sum::<usize>() as u64 > possible - m as u64 {
        return Err(Error::Split(
            "graph is too dense to sample the requested negative pairs".into(),
        ));
    }
    let mut used = HashSet::new();
    let mut splits: Vec<Vec<PairSample>> = Vec::new();
    for (pos, &w) in positives.iter().zip(&wanted) {
        let mut pairs: Vec<PairSample> = pos
            .iter()
            .map(|&(z1, z2)| PairSample {
                z1,
                z2,
                label: Label::Pos,
            })
            .collect();
        let mut added = 0;
        while added < w {
            let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
            if a == b {
                continue;
            }
            let p = key(a, b);
            if edge_set.contains(&p) || !used.insert(p) {
                continue;
            }
            pairs.push(PairSample {
                z1: p.0,
                z2: p.1,
                label: Label::Neg,
            });
            added += 1;
        }
        pairs.shuffle(&mut rng);
        splits.push(pairs);
    }

    let mut b = GraphBuilder::new(g.node_count());
    for (k, layer) in g.layers().iter().enumerate() {
        b.add_layer(layer.is_directed());
        let listed = layers.contains(&k);
        for e in layer.edges() {
            if listed && withheld.contains(&key(e.source, e.target)) {
                continue;
            }
            b.add_edge(k, e.source, e.target, e.weight)?;
        }
    }
    let test = splits.pop().unwrap();
    let valid = splits.pop().unwrap();
    let train = splits.pop().unwrap();
    Ok(LinkSplit {
        observed: b.build()?,
        train,
        valid,
        test,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(n: u32) -> MultilayerGraph {
        let mut b = GraphBuilder::new(n as usize);
        b.add_layer(false);
        for i in 0..n {
            b.add_edge(0, i, (i + 1) % n, 1.0).unwrap();
            b.add_edge(0, i, (i + 3) % n, 1.0).unwrap();
        }
        b.build().unwrap()
    }

    #[test]
    fn withheld_edges_leave_observed_graph() {
        let g = ring(50);
        let s = sample_link_pairs(&g, &[0], &LinkSplitOptions::default()).unwrap();
        let withheld = s.train.len() / 2 + s.valid.len() / 2 + s.test.len() / 2;
        assert_eq!(s.observed.edge_count() + withheld, g.edge_count());
        for p in s.train.iter().chain(&s.valid).chain(&s.test) {
            assert!(p.z1 < p.z2);
            assert_eq!(g.layers()[0].weight(p.z1, p.z2).is_some(), p.label.is_pos());
            assert!(s.observed.layers()[0].weight(p.z1, p.z2).is_none());
        }
        let again = sample_link_pairs(&g, &[0], &LinkSplitOptions::default()).unwrap();
        assert_eq!(again.test, s.test);
    }

    #[test]
    fn pair_file_round_trip() {
        let pairs = vec![
            PairSample {
                z1: 0,
                z2: 3,
                label: Label::Pos,
            },
            PairSample {
                z1: 2,
                z2: 1,
                label: Label::Neg,
            },
        ];
        let mut buf = Vec::new();
        write_pairs(&pairs, &mut buf).unwrap();
        let back = read_pairs(buf.as_slice(), Path::new("p"), 4).unwrap();
        assert_eq!(back, pairs);
        assert!(read_pairs("0 0 1\n".as_bytes(), Path::new("p"), 4).is_err());
        assert!(read_pairs("0 9 1\n".as_bytes(), Path::new("p"), 4).is_err());
    }
}
