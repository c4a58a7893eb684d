//! Mesh type, plain-text serialization with bit-exact round-trip, structural
//! validation, and the two built-in generators (rectangular strip, cosine
//! double-edge notched strip quarter model).
//!
//! File format, one record per line:
//!
//! ```text
//! nodes N elements M
//! <id> <x> <y>          N node lines, ids 1..N in order
//! <id> <n1> ... <n8>    M element lines, ids 1..M, 1-based node ids
//! set <NAME> <id>...    node sets
//! eset <NAME> <id>...   element sets
//! ```
//!
//! Floats are written in Rust's shortest round-trip notation, so
//! `parse(format(mesh)) == mesh` bit for bit.

use std::fmt::Write as _;

use crate::error::{FemError, Result};
use crate::quad8::{gp_geometry, GAUSS_2X2};

/// 2D mesh of 8-node quadrilaterals. Node indices are 0-based in memory and
/// 1-based in files. Corner nodes come first in each connectivity row
/// (counterclockwise), then the four midside nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    /// Node coordinates (mm).
    pub nodes: Vec<[f64; 2]>,
    pub elements: Vec<[usize; 8]>,
    pub node_sets: Vec<(String, Vec<usize>)>,
    pub element_sets: Vec<(String, Vec<usize>)>,
}

impl Mesh {
    /// Node coordinates of one element in connectivity order.
    pub fn element_coords(&self, e: usize) -> [[f64; 2]; 8] {
        let conn = &self.elements[e];
        let mut out = [[0.0; 2]; 8];
        for (slot, &n) in out.iter_mut().zip(conn.iter()) {
            *slot = self.nodes[n];
        }
        out
    }

    /// Nodes of a named set; error if the set does not exist.
    pub fn node_set(&self, name: &str) -> Result<&[usize]> {
        self.node_sets
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, ids)| ids.as_slice())
            .ok_or_else(|| FemError::Mesh(format!("no node set named `{name}`")))
    }

    /// Checks connectivity ranges, set ranges, and Jacobian positivity at
    /// every Gauss point of every element.
    pub fn validate(&self) -> Result<()> {
        for (e, conn) in self.elements.iter().enumerate() {
            for &n in conn {
                if n >= self.nodes.len() {
                    return Err(FemError::Mesh(format!(
                        "element {e}: node index {n} out of range"
                    )));
                }
            }
            let coords = self.element_coords(e);
            for (g, gp) in GAUSS_2X2.iter().enumerate() {
                let geom = gp_geometry(&coords, gp.0[0], gp.0[1]);
                match geom {
                    Ok(_) => {}
                    Err(_) => {
                        return Err(FemError::Mesh(format!(
                            "element {e}: non-positive Jacobian at gauss point {g}"
                        )))
                    }
                }
            }
        }
        for (sets, bound) in [
            (&self.node_sets, self.nodes.len()),
            (&self.element_sets, self.elements.len()),
        ] {
            for (name, ids) in sets {
                if let Some(&i) = ids.iter().find(|&&i| i >= bound) {
                    return Err(FemError::Mesh(format!(
                        "set `{name}`: index {i} out of range"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> FemError {
    FemError::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    tok.parse::<f64>()
        .map_err(|_| parse_err(line, format!("bad float `{tok}`")))
}

fn parse_usize(tok: &str, line: usize) -> Result<usize> {
    tok.parse::<usize>()
        .map_err(|_| parse_err(line, format!("bad integer `{tok}`")))
}

/// Parses the plain-text mesh format; errors carry 1-based line numbers.
pub fn parse_mesh(text: &str) -> Result<Mesh> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (hline, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty mesh file"))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 4 || h[0] != "nodes" || h[2] != "elements" {
        return Err(parse_err(hline, "expected header `nodes N elements M`"));
    }
    let n_nodes = parse_usize(h[1], hline)?;
    let n_elems = parse_usize(h[3], hline)?;

    let mut nodes = Vec::with_capacity(n_nodes);
    for want in 1..=n_nodes {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| parse_err(hline, "unexpected end of file in node block"))?;
        let t: Vec<&str> = l.split_whitespace().collect();
        if t.len() != 3 {
            return Err(parse_err(ln, "expected node line `id x y`"));
        }
        if parse_usize(t[0], ln)? != want {
            return Err(parse_err(ln, format!("node ids must be sequential; expected {want}")));
        }
        nodes.push([parse_f64(t[1], ln)?, parse_f64(t[2], ln)?]);
    }

    let mut elements = Vec::with_capacity(n_elems);
    for want in 1..=n_elems {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| parse_err(hline, "unexpected end of file in element block"))?;
        let t: Vec<&str> = l.split_whitespace().collect();
        if t.len() != 9 {
            return Err(parse_err(ln, "expected element line `id n1 ... n8`"));
        }
        if parse_usize(t[0], ln)? != want {
            return Err(parse_err(
                ln,
                format!("element ids must be sequential; expected {want}"),
            ));
        }
        let mut conn = [0usize; 8];
        for (slot, tok) in conn.iter_mut().zip(&t[1..]) {
            let id = parse_usize(tok, ln)?;
            if id == 0 || id > n_nodes {
                return Err(parse_err(ln, format!("node id {id} out of range")));
            }
            *slot = id - 1;
        }
        elements.push(conn);
    }

    let mut node_sets = Vec::new();
    let mut element_sets = Vec::new();
    for (ln, l) in lines {
        if l.trim().is_empty() {
            return Err(parse_err(ln, "blank lines are not allowed"));
        }
        let t: Vec<&str> = l.split_whitespace().collect();
        let (kind, bound, target) = match t[0] {
            "set" => ("set", n_nodes, &mut node_sets),
            "eset" => ("eset", n_elems, &mut element_sets),
            other => return Err(parse_err(ln, format!("unknown record `{other}`"))),
        };
        if t.len() < 2 {
            return Err(parse_err(ln, format!("`{kind}` needs a name")));
        }
        let mut ids = Vec::with_capacity(t.len() - 2);
        for tok in &t[2..] {
            let id = parse_usize(tok, ln)?;
            if id == 0 || id > bound {
                return Err(parse_err(ln, format!("id {id} out of range in `{kind}`")));
            }
            ids.push(id - 1);
        }
        target.push((t[1].to_string(), ids));
    }

    Ok(Mesh {
        nodes,
        elements,
        node_sets,
        element_sets,
    })
}

/// Serializes a mesh; inverse of [`parse_mesh`] bit for bit.
pub fn format_mesh(mesh: &Mesh) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "nodes {} elements {}",
        mesh.nodes.len(),
        mesh.elements.len()
    );
    for (i, n) in mesh.nodes.iter().enumerate() {
        let _ = writeln!(out, "{} {} {}", i + 1, n[0], n[1]);
    }
    for (i, c) in mesh.elements.iter().enumerate() {
        let _ = write!(out, "{}", i + 1);
        for &n in c {
            let _ = write!(out, " {}", n + 1);
        }
        out.push('\n');
    }
    for (kind, sets) in [("set", &mesh.node_sets), ("eset", &mesh.element_sets)] {
        for (name, ids) in sets.iter() {
            let _ = write!(out, "{kind} {name}");
            for &i in ids {
                let _ = write!(out, " {}", i + 1);
            }
            out.push('\n');
        }
    }
    out
}

/// Serendipity lattice: corner rows keep every column, midside rows skip the
/// odd columns (no element-center nodes). `width_of(j)` gives the physical
/// row width so generators can taper the strip.
fn lattice_mesh(
    nx: usize,
    ny: usize,
    height: f64,
    width_of: impl Fn(f64) -> f64,
) -> Mesh {
    let cols = 2 * nx + 1;
    let rows = 2 * ny + 1;
    let mut index = vec![usize::MAX; cols * rows];
    let mut nodes = Vec::new();
    for j in 0..rows {
        let y = height * j as f64 / (rows - 1) as f64;
        let w = width_of(y);
        for i in 0..cols {
            if i % 2 == 1 && j % 2 == 1 {
                continue;
            }
            index[j * cols + i] = nodes.len();
            nodes.push([w * i as f64 / (cols - 1) as f64, y]);
        }
    }
    let at = |i: usize, j: usize| index[j * cols + i];
    let mut elements = Vec::with_capacity(nx * ny);
    for ej in 0..ny {
        for ei in 0..nx {
            let (i0, j0) = (2 * ei, 2 * ej);
            elements.push([
                at(i0, j0),
                at(i0 + 2, j0),
                at(i0 + 2, j0 + 2),
                at(i0, j0 + 2),
                at(i0 + 1, j0),
                at(i0 + 2, j0 + 1),
                at(i0 + 1, j0 + 2),
                at(i0, j0 + 1),
            ]);
        }
    }
    let pick = |f: &dyn Fn(usize, usize) -> bool| {
        let mut ids = Vec::new();
        for j in 0..rows {
            for i in 0..cols {
                let n = index[j * cols + i];
                if n != usize::MAX && f(i, j) {
                    ids.push(n);
                }
            }
        }
        ids
    };
    let node_sets = vec![
        ("bottom".to_string(), pick(&|_, j| j == 0)),
        ("top".to_string(), pick(&|_, j| j == rows - 1)),
        ("left".to_string(), pick(&|i, _| i == 0)),
        ("right".to_string(), pick(&|i, _| i == cols - 1)),
    ];
    Mesh {
        nodes,
        elements,
        node_sets,
        element_sets: Vec::new(),
    }
}

/// Rectangular strip of `nx` by `ny` elements with straight edges and node
/// sets `bottom`, `top`, `left`, `right`.
pub fn structured_strip(width: f64, height: f64, nx: usize, ny: usize) -> Mesh {
    lattice_mesh(nx, ny, height, |_| width)
}

/// Quarter model of a double-edge-notched strip: symmetry axis at x = 0,
/// minimum section at y = 0, and a cosine notch of depth `radius` carved
/// from the outer edge, `depth(y) = radius * cos(pi y / (2 radius))` for
/// `y <= radius`. Same node sets as the plain strip; `bottom` is the minimum
/// section, `left` the symmetry axis.
pub fn notched_strip(width: f64, height: f64, radius: f64, nx: usize, ny: usize) -> Mesh {
    lattice_mesh(nx, ny, height, |y| {
        let depth = if y < radius {
            radius * (std::f64::consts::FRAC_PI_2 * y / radius).cos()
        } else {
            0.0
        };
        width - depth
    })
}
