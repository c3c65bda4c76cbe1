//! Plain-text mesh format.
//!
//! ```text
//! $header
//! gravity off
//! $nodes
//! id x y z
//! $elements
//! id dim n0 .. n_dim k_11 k_12 .. k_dd delta source [sigma]
//! $boundary
//! n0 .. n_{d-1} natural|essential value
//! $end
//! ```
//!
//! Ids are dense and ascending from 0. `#` starts a comment. The optional
//! `sigma` column gives the transition coefficient of a lower-dimensional
//! element and defaults to 1.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{BoundaryKind, Conductivity, Element, Mesh, Point};
use crate::error::{Error, Result};

pub fn write_mesh_string(mesh: &Mesh) -> String {
    let mut s = String::new();
    s.push_str("$header\n");
    let _ = writeln!(s, "gravity {}", if mesh.gravity() { "on" } else { "off" });
    s.push_str("$nodes\n");
    for (i, p) in mesh.nodes().iter().enumerate() {
        let _ = writeln!(s, "{i} {:.16e} {:.16e} {:.16e}", p[0], p[1], p[2]);
    }
    s.push_str("$elements\n");
    for (i, e) in mesh.elements().iter().enumerate() {
        let _ = write!(s, "{i} {}", e.dim);
        for n in &e.nodes {
            let _ = write!(s, " {n}");
        }
        for k in e.conductivity.values() {
            let _ = write!(s, " {k:.16e}");
        }
        let _ = write!(s, " {:.16e} {:.16e}", e.cross_section, e.source);
        if e.dim < 3 {
            let _ = write!(s, " {:.16e}", e.sigma);
        }
        s.push('\n');
    }
    s.push_str("$boundary\n");
    for (key, kind) in mesh.boundary() {
        for n in key {
            let _ = write!(s, "{n} ");
        }
        match kind {
            BoundaryKind::Natural(p) => {
                let _ = writeln!(s, "natural {p:.16e}");
            }
            BoundaryKind::Essential => s.push_str("essential 0\n"),
        }
    }
    s.push_str("$end\n");
    s
}

pub fn write_mesh(mesh: &Mesh, path: &Path) -> Result<()> {
    std::fs::write(path, write_mesh_string(mesh)).map_err(|e| Error::io(path, e))
}

pub fn read_mesh(path: &Path) -> Result<Mesh> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_mesh(&text, &path.display().to_string())
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Section {
    None,
    Header,
    Nodes,
    Elements,
    Boundary,
    End,
}

/// Parses the mesh format. `source` names the input in error messages.
pub fn parse_mesh(text: &str, source: &str) -> Result<Mesh> {
    let err = |line: usize, msg: String| Error::Parse {
        path: source.into(),
        line,
        msg,
    };
    let mut section = Section::None;
    let mut gravity = false;
    let mut nodes: Vec<Point> = Vec::new();
    let mut elements: Vec<Element> = Vec::new();
    let mut element_lines: Vec<usize> = Vec::new();
    let mut boundary = BTreeMap::new();

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('$') {
            let next = match name {
                "header" => Section::Header,
                "nodes" => Section::Nodes,
                "elements" => Section::Elements,
                "boundary" => Section::Boundary,
                "end" => Section::End,
                _ => return Err(err(lineno, format!("unknown section ${name}"))),
            };
            let order = |s: Section| s as usize;
            if order(next) <= order(section) {
                return Err(err(lineno, format!("section ${name} out of order")));
            }
            if next == Section::Elements && section != Section::Nodes {
                return Err(err(lineno, "$elements must follow $nodes".into()));
            }
            section = next;
            continue;
        }
        let tok: Vec<&str> = line.split_whitespace().collect();
        let num = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| err(lineno, format!("expected a number, found {s:?}")))
        };
        let id = |s: &str| -> Result<usize> {
            s.parse::<usize>()
                .map_err(|_| err(lineno, format!("expected an id, found {s:?}")))
        };
        match section {
            Section::None => return Err(err(lineno, "data before the first section".into())),
            Section::End => return Err(err(lineno, "data after $end".into())),
            Section::Header => match tok.as_slice() {
                ["gravity", "on"] => gravity = true,
                ["gravity", "off"] => gravity = false,
                _ => return Err(err(lineno, format!("unknown header entry {line:?}"))),
            },
            Section::Nodes => {
                if tok.len() != 4 {
                    return Err(err(lineno, "node line needs id x y z".into()));
                }
                if id(tok[0])? != nodes.len() {
                    return Err(err(lineno, format!("expected node id {}", nodes.len())));
                }
                nodes.push([num(tok[1])?, num(tok[2])?, num(tok[3])?]);
            }
            Section::Elements => {
                if tok.len() < 2 {
                    return Err(err(lineno, "element line too short".into()));
                }
                if id(tok[0])? != elements.len() {
                    return Err(err(
                        lineno,
                        format!("expected element id {}", elements.len()),
                    ));
                }
                let dim = id(tok[1])?;
                if !(1..=3).contains(&dim) {
                    return Err(err(lineno, format!("element dimension {dim} not in 1..=3")));
                }
                let base = 2 + (dim + 1) + dim * dim + 2;
                let with_sigma = dim < 3 && tok.len() == base + 1;
                if tok.len() != base && !with_sigma {
                    return Err(err(
                        lineno,
                        format!(
                            "a {dim}D element line needs {base} fields, found {}",
                            tok.len()
                        ),
                    ));
                }
                let mut el_nodes = Vec::with_capacity(dim + 1);
                for t in &tok[2..3 + dim] {
                    let n = id(t)?;
                    if n >= nodes.len() {
                        return Err(err(
                            lineno,
                            format!("node {n} does not exist ({} nodes)", nodes.len()),
                        ));
                    }
                    el_nodes.push(n);
                }
                let kstart = 3 + dim;
                let kvals = tok[kstart..kstart + dim * dim]
                    .iter()
                    .map(|t| num(t))
                    .collect::<Result<Vec<f64>>>()?;
                let conductivity =
                    Conductivity::new(dim, kvals).map_err(|e| err(lineno, e.to_string()))?;
                let mut e = Element::new(dim, el_nodes, conductivity);
                e.cross_section = num(tok[kstart + dim * dim])?;
                e.source = num(tok[kstart + dim * dim + 1])?;
                if with_sigma {
                    e.sigma = num(tok[base])?;
                }
                elements.push(e);
                element_lines.push(lineno);
            }
            Section::Boundary => {
                if tok.len() < 3 {
                    return Err(err(
                        lineno,
                        "boundary line needs nodes, kind and value".into(),
                    ));
                }
                let (tuple, rest) = tok.split_at(tok.len() - 2);
                let mut key = tuple
                    .iter()
                    .map(|t| id(t))
                    .collect::<Result<Vec<usize>>>()?;
                if let Some(&n) = key.iter().find(|&&n| n >= nodes.len()) {
                    return Err(err(lineno, format!("node {n} does not exist")));
                }
                key.sort_unstable();
                let value = num(rest[1])?;
                let kind = match rest[0] {
                    "natural" => BoundaryKind::Natural(value),
                    "essential" => BoundaryKind::Essential,
                    other => return Err(err(lineno, format!("unknown boundary kind {other:?}"))),
                };
                if boundary.insert(key, kind).is_some() {
                    return Err(err(lineno, "duplicate boundary face".into()));
                }
            }
        }
    }
    if section != Section::End {
        return Err(err(text.lines().count(), "missing $end".into()));
    }
    Mesh::new(nodes, elements, boundary, gravity).map_err(|e| match &e {
        Error::DegenerateElement { element, .. } => err(element_lines[*element], e.to_string()),
        _ => e,
    })
}
