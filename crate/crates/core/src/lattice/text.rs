use std::fmt::Write;

use super::{fmt_half, parse_half, BoundaryKind, BoundaryPartition, Coord, FiniteGraph, GraphKind};
use crate::error::{Error, Result};

/// A graph read from the text format, with its optional boundary partition.
#[derive(Clone, Debug)]
pub struct GraphFile {
    pub graph: FiniteGraph,
    pub partition: Option<BoundaryPartition>,
}

/// Serializes a graph (and optionally a boundary partition) to the
/// line-oriented text format.
pub fn write_graph(g: &FiniteGraph, partition: Option<&BoundaryPartition>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "graph {} {} {}", g.kind().name(), g.num_vertices(), g.num_edges());
    for (i, c) in g.coords().iter().enumerate() {
        let _ = write!(out, "v {i} {} {}", fmt_half(c.x), fmt_half(c.y));
        if let Some(s) = c.sheet {
            let _ = write!(out, " {s}");
        }
        out.push('\n');
    }
    for (i, [u, v]) in g.edges().iter().enumerate() {
        let _ = writeln!(out, "e {i} {u} {v}");
    }
    out.push_str("boundary");
    for v in g.boundary() {
        let _ = write!(out, " {v}");
    }
    out.push('\n');
    if let Some(p) = partition {
        let blocks: Vec<String> = p
            .blocks()
            .iter()
            .map(|b| b.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" "))
            .collect();
        let _ = writeln!(out, "partition {} {}", p.kind().name(), blocks.join(";"));
    }
    out
}

fn field<'a>(it: &mut impl Iterator<Item = &'a str>, line: usize) -> Result<&'a str> {
    it.next().ok_or_else(|| Error::Parse(format!("line {line}: missing field")))
}

fn index(s: &str, line: usize) -> Result<usize> {
    s.parse().map_err(|_| Error::Parse(format!("line {line}: bad index `{s}`")))
}

/// Parses the text format produced by [`write_graph`].
pub fn read_graph(text: &str) -> Result<GraphFile> {
    let mut kind = None;
    let mut coords: Vec<Option<Coord>> = Vec::new();
    let mut edges: Vec<Option<[usize; 2]>> = Vec::new();
    let mut boundary = None;
    let mut partition_spec = None;
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let mut it = raw.split_whitespace();
        let Some(tag) = it.next() else { continue };
        match tag {
            "graph" => {
                kind = Some(GraphKind::from_name(field(&mut it, line)?)?);
                coords = vec![None; index(field(&mut it, line)?, line)?];
                edges = vec![None; index(field(&mut it, line)?, line)?];
            }
            "v" => {
                let i = index(field(&mut it, line)?, line)?;
                let x = parse_half(field(&mut it, line)?)?;
                let y = parse_half(field(&mut it, line)?)?;
                let sheet = match it.next() {
                    Some(s) => Some(s.parse().map_err(|_| Error::Parse(format!("line {line}: bad sheet")))?),
                    None => None,
                };
                *coords
                    .get_mut(i)
                    .ok_or_else(|| Error::Parse(format!("line {line}: vertex index out of range")))? =
                    Some(Coord { x, y, sheet });
            }
            "e" => {
                let i = index(field(&mut it, line)?, line)?;
                let u = index(field(&mut it, line)?, line)?;
                let v = index(field(&mut it, line)?, line)?;
                *edges
                    .get_mut(i)
                    .ok_or_else(|| Error::Parse(format!("line {line}: edge index out of range")))? =
                    Some([u, v]);
            }
            "boundary" => {
                boundary = Some(it.map(|s| index(s, line)).collect::<Result<Vec<_>>>()?);
            }
            "partition" => {
                let label = BoundaryKind::from_name(field(&mut it, line)?)?;
                let rest: Vec<&str> = it.collect();
                let blocks = rest
                    .join(" ")
                    .split(';')
                    .map(|b| b.split_whitespace().map(|s| index(s, line)).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()?;
                partition_spec = Some((label, blocks));
            }
            other => return Err(Error::Parse(format!("line {line}: unknown record `{other}`"))),
        }
    }
    let kind = kind.ok_or_else(|| Error::Parse("missing graph header".into()))?;
    let coords = coords
        .into_iter()
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::Parse("missing vertex record".into()))?;
    let edges = edges
        .into_iter()
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::Parse("missing edge record".into()))?;
    let graph = match boundary {
        Some(b) => FiniteGraph::with_boundary(kind, coords, edges, b)?,
        None => FiniteGraph::new(kind, coords, edges)?,
    };
    let partition = match partition_spec {
        Some((label, blocks)) => Some(BoundaryPartition::from_blocks(&graph, label, blocks)?),
        None => None,
    };
    Ok(GraphFile { graph, partition })
}
