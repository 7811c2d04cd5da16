//! TSPLIB instance and tour files.
//!
//! Supports the symmetric `TYPE: TSP` families `EUC_2D`, `GEO`, `ATT` and
//! `EXPLICIT` (all five row/matrix layouts), plus `.opt.tour` files and the
//! plain edge-list format written by the command-line tool.
//!
//! TSPLIB numbers vertices from 1. Everything outside this module works with
//! 0-indexed vertices; the conversion happens only here.

use crate::error::{Error, Result};
use crate::graph::Edge;
use std::fmt::Write as _;

/// TSPLIB `EDGE_WEIGHT_TYPE` values this crate understands.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum EdgeWeightKind {
    #[serde(rename = "EUC_2D")]
    Euc2d,
    #[serde(rename = "GEO")]
    Geo,
    #[serde(rename = "ATT")]
    Att,
    #[serde(rename = "EXPLICIT")]
    Explicit,
}

impl EdgeWeightKind {
    fn parse(s: &str) -> Result<Self> {
        match s {
            "EUC_2D" => Ok(EdgeWeightKind::Euc2d),
            "GEO" => Ok(EdgeWeightKind::Geo),
            "ATT" => Ok(EdgeWeightKind::Att),
            "EXPLICIT" => Ok(EdgeWeightKind::Explicit),
            other => Err(Error::UnsupportedFormat(format!("EDGE_WEIGHT_TYPE {other}"))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            EdgeWeightKind::Euc2d => "EUC_2D",
            EdgeWeightKind::Geo => "GEO",
            EdgeWeightKind::Att => "ATT",
            EdgeWeightKind::Explicit => "EXPLICIT",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum MatrixLayout {
    FullMatrix,
    UpperRow,
    LowerRow,
    UpperDiagRow,
    LowerDiagRow,
}

impl MatrixLayout {
    fn parse(s: &str) -> Result<Self> {
        match s {
            "FULL_MATRIX" => Ok(MatrixLayout::FullMatrix),
            "UPPER_ROW" => Ok(MatrixLayout::UpperRow),
            "LOWER_ROW" => Ok(MatrixLayout::LowerRow),
            "UPPER_DIAG_ROW" => Ok(MatrixLayout::UpperDiagRow),
            "LOWER_DIAG_ROW" => Ok(MatrixLayout::LowerDiagRow),
            other => Err(Error::UnsupportedFormat(format!("EDGE_WEIGHT_FORMAT {other}"))),
        }
    }

    fn entry_count(self, n: usize) -> usize {
        match self {
            MatrixLayout::FullMatrix => n * n,
            MatrixLayout::UpperRow | MatrixLayout::LowerRow => n * (n - 1) / 2,
            MatrixLayout::UpperDiagRow | MatrixLayout::LowerDiagRow => n * (n + 1) / 2,
        }
    }

    /// The (row, column) cell of each value, in file order.
    fn cells(self, n: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.entry_count(n));
        for i in 0..n {
            let cols = match self {
                MatrixLayout::FullMatrix => 0..n,
                MatrixLayout::UpperRow => i + 1..n,
                MatrixLayout::LowerRow => 0..i,
                MatrixLayout::UpperDiagRow => i..n,
                MatrixLayout::LowerDiagRow => 0..i + 1,
            };
            out.extend(cols.map(|j| (i, j)));
        }
        out
    }
}

/// A symmetric TSP instance.
///
/// Exactly one of `coords` / `matrix` is populated: coordinates for the
/// geometric kinds, a full `n * n` row-major matrix for `EXPLICIT`.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub name: String,
    pub n: usize,
    pub kind: EdgeWeightKind,
    pub coords: Option<Vec<(f64, f64)>>,
    pub matrix: Option<Vec<f64>>,
}

impl Instance {
    /// Builds an `EUC_2D` instance from raw coordinates.
    pub fn euclidean(name: impl Into<String>, coords: Vec<(f64, f64)>) -> Result<Self> {
        Self::from_coords(name, EdgeWeightKind::Euc2d, coords)
    }

    pub fn from_coords(
        name: impl Into<String>,
        kind: EdgeWeightKind,
        coords: Vec<(f64, f64)>,
    ) -> Result<Self> {
        if kind == EdgeWeightKind::Explicit {
            return Err(Error::contract("EXPLICIT instances carry a matrix, not coordinates"));
        }
        let n = coords.len();
        if n < 4 {
            return Err(Error::TooFewVertices(n));
        }
        if coords.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::contract("non-finite coordinate"));
        }
        Ok(Instance {
            name: name.into(),
            n,
            kind,
            coords: Some(coords),
            matrix: None,
        })
    }

    /// Builds an `EXPLICIT` instance from a full symmetric matrix (row-major).
    pub fn explicit(name: impl Into<String>, n: usize, matrix: Vec<f64>) -> Result<Self> {
        if n < 4 {
            return Err(Error::TooFewVertices(n));
        }
        if matrix.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: matrix.len(),
            });
        }
        for i in 0..n {
            for j in 0..n {
                let w = matrix[i * n + j];
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::contract(format!(
                        "distance ({}, {}) = {w} is not a finite nonnegative number",
                        i + 1,
                        j + 1
                    )));
                }
                if i != j && w != matrix[j * n + i] {
                    return Err(Error::UnsupportedFormat(format!(
                        "asymmetric matrix at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(Instance {
            name: name.into(),
            n,
            kind: EdgeWeightKind::Explicit,
            coords: None,
            matrix: Some(matrix),
        })
    }

    /// TSPLIB distance between 0-indexed vertices `u` and `v`.
    pub fn distance(&self, u: usize, v: usize) -> Result<i64> {
        if u == v {
            return Err(Error::SelfLoop(u + 1));
        }
        for x in [u, v] {
            if x >= self.n {
                return Err(Error::VertexOutOfRange {
                    vertex: x + 1,
                    n: self.n,
                });
            }
        }
        Ok(self.distance_unchecked(u, v))
    }

    pub(crate) fn distance_unchecked(&self, u: usize, v: usize) -> i64 {
        match (&self.coords, &self.matrix) {
            (Some(c), _) => {
                let (p, q) = (c[u], c[v]);
                match self.kind {
                    EdgeWeightKind::Euc2d => euc_2d(p, q),
                    EdgeWeightKind::Att => att(p, q),
                    EdgeWeightKind::Geo => geo(p, q),
                    EdgeWeightKind::Explicit => unreachable!("explicit instance with coordinates"),
                }
            }
            (None, Some(m)) => nint(m[u * self.n + v]),
            (None, None) => unreachable!("instance without distance source"),
        }
    }

    /// Full distance matrix (row-major, zero diagonal).
    pub fn distance_matrix(&self) -> Vec<i64> {
        let n = self.n;
        let mut out = vec![0; n * n];
        for u in 0..n {
            for v in u + 1..n {
                let d = self.distance_unchecked(u, v);
                out[u * n + v] = d;
                out[v * n + u] = d;
            }
        }
        out
    }
}

#[inline]
fn nint(x: f64) -> i64 {
    (x + 0.5).floor() as i64
}

fn euc_2d(p: (f64, f64), q: (f64, f64)) -> i64 {
    let (dx, dy) = (p.0 - q.0, p.1 - q.1);
    nint((dx * dx + dy * dy).sqrt())
}

fn att(p: (f64, f64), q: (f64, f64)) -> i64 {
    let (dx, dy) = (p.0 - q.0, p.1 - q.1);
    let r = ((dx * dx + dy * dy) / 10.0).sqrt();
    let t = nint(r);
    if (t as f64) < r {
        t + 1
    } else {
        t
    }
}

// TSPLIB's own constants; the truncated PI is part of the definition.
#[allow(clippy::approx_constant)]
const GEO_PI: f64 = 3.141592;
const GEO_RADIUS: f64 = 6378.388;

fn geo_radians(x: f64) -> f64 {
    let deg = x.trunc();
    let min = x - deg;
    GEO_PI * (deg + 5.0 * min / 3.0) / 180.0
}

fn geo(p: (f64, f64), q: (f64, f64)) -> i64 {
    let (lat_i, lon_i) = (geo_radians(p.0), geo_radians(p.1));
    let (lat_j, lon_j) = (geo_radians(q.0), geo_radians(q.1));
    let q1 = (lon_i - lon_j).cos();
    let q2 = (lat_i - lat_j).cos();
    let q3 = (lat_i + lat_j).cos();
    (GEO_RADIUS * (0.5 * ((1.0 + q1) * q2 - (1.0 - q1) * q3)).acos() + 1.0) as i64
}

/// Splits `KEY : VALUE` / `KEY: VALUE` header lines.
fn header(line: &str) -> Option<(&str, &str)> {
    let (k, v) = line.split_once(':')?;
    Some((k.trim(), v.trim()))
}

fn section_name(line: &str) -> &str {
    line.trim().trim_end_matches(':').trim()
}

const SECTIONS: &[&str] = &[
    "NODE_COORD_SECTION",
    "EDGE_WEIGHT_SECTION",
    "DISPLAY_DATA_SECTION",
    "TOUR_SECTION",
    "FIXED_EDGES_SECTION",
    "DEPOT_SECTION",
    "DEMAND_SECTION",
];

fn parse_num(tok: &str, line: usize) -> Result<f64> {
    tok.parse::<f64>()
        .map_err(|_| Error::parse(line, format!("expected a number, found {tok:?}")))
}

/// Parses a TSPLIB `.tsp` document.
pub fn parse_instance(text: &str) -> Result<Instance> {
    let mut name = String::new();
    let mut dimension: Option<usize> = None;
    let mut kind: Option<EdgeWeightKind> = None;
    let mut layout: Option<MatrixLayout> = None;
    let mut coords: Option<Vec<(f64, f64)>> = None;
    let mut weights: Option<Vec<f64>> = None;

    let lines: Vec<&str> = text.lines().collect();
    let mut i = 0;
    while i < lines.len() {
        let lineno = i + 1;
        let line = lines[i].trim();
        i += 1;
        if line.is_empty() {
            continue;
        }
        if line == "EOF" {
            break;
        }
        let sec = section_name(line);
        if SECTIONS.contains(&sec) {
            let n = dimension
                .ok_or_else(|| Error::parse(lineno, format!("{sec} before DIMENSION")))?;
            match sec {
                "NODE_COORD_SECTION" => {
                    let mut pts = vec![None; n];
                    for _ in 0..n {
                        let Some(raw) = lines.get(i) else {
                            return Err(Error::parse(i, "truncated NODE_COORD_SECTION"));
                        };
                        let toks: Vec<&str> = raw.split_whitespace().collect();
                        if toks.len() != 3 {
                            return Err(Error::parse(
                                i + 1,
                                "truncated NODE_COORD_SECTION: expected `index x y`",
                            ));
                        }
                        let idx = toks[0]
                            .parse::<usize>()
                            .map_err(|_| Error::parse(i + 1, "bad node index"))?;
                        if idx == 0 || idx > n {
                            return Err(Error::parse(i + 1, format!("node index {idx} out of range")));
                        }
                        pts[idx - 1] = Some((parse_num(toks[1], i + 1)?, parse_num(toks[2], i + 1)?));
                        i += 1;
                    }
                    let pts: Option<Vec<_>> = pts.into_iter().collect();
                    coords = Some(pts.ok_or_else(|| Error::parse(i, "duplicate node index"))?);
                }
                "EDGE_WEIGHT_SECTION" => {
                    let lay = layout.ok_or_else(|| {
                        Error::parse(lineno, "EDGE_WEIGHT_SECTION without EDGE_WEIGHT_FORMAT")
                    })?;
                    let want = lay.entry_count(n);
                    let mut vals = Vec::with_capacity(want);
                    while vals.len() < want {
                        let Some(raw) = lines.get(i) else {
                            return Err(Error::parse(
                                i,
                                format!("truncated EDGE_WEIGHT_SECTION: {} of {want} values", vals.len()),
                            ));
                        };
                        for tok in raw.split_whitespace() {
                            if vals.len() == want {
                                return Err(Error::parse(i + 1, "excess values in EDGE_WEIGHT_SECTION"));
                            }
                            let w = tok.parse::<f64>().map_err(|_| {
                                Error::parse(
                                    i + 1,
                                    format!("truncated EDGE_WEIGHT_SECTION: {} of {want} values", vals.len()),
                                )
                            })?;
                            vals.push(w);
                        }
                        i += 1;
                    }
                    let mut full = vec![f64::NAN; n * n];
                    for ((r, c), w) in lay.cells(n).into_iter().zip(vals) {
                        full[r * n + c] = w;
                        if lay != MatrixLayout::FullMatrix {
                            full[c * n + r] = w;
                        }
                    }
                    for d in 0..n {
                        full[d * n + d] = 0.0;
                    }
                    weights = Some(full);
                }
                "DISPLAY_DATA_SECTION" => {
                    // Display coordinates carry no distance information.
                    i = (i + n).min(lines.len());
                }
                other => {
                    return Err(Error::UnsupportedFormat(format!("section {other}")));
                }
            }
            continue;
        }
        let Some((key, value)) = header(line) else {
            return Err(Error::parse(lineno, format!("unrecognized line {line:?}")));
        };
        match key {
            "NAME" => name = value.to_string(),
            "TYPE" => {
                if value != "TSP" {
                    return Err(Error::UnsupportedFormat(format!("TYPE {value}")));
                }
            }
            "DIMENSION" => {
                let n = value
                    .parse::<usize>()
                    .map_err(|_| Error::parse(lineno, format!("bad DIMENSION {value:?}")))?;
                if n < 4 {
                    return Err(Error::TooFewVertices(n));
                }
                dimension = Some(n);
            }
            "EDGE_WEIGHT_TYPE" => kind = Some(EdgeWeightKind::parse(value)?),
            "EDGE_WEIGHT_FORMAT" if value != "FUNCTION" => layout = Some(MatrixLayout::parse(value)?),
            _ => {}
        }
    }

    let n = dimension.ok_or_else(|| Error::parse(lines.len(), "missing DIMENSION"))?;
    let kind = kind.ok_or_else(|| Error::parse(lines.len(), "missing EDGE_WEIGHT_TYPE"))?;
    let name = if name.is_empty() { "unnamed".to_string() } else { name };
    match kind {
        EdgeWeightKind::Explicit => {
            let m = weights.ok_or_else(|| Error::parse(lines.len(), "missing EDGE_WEIGHT_SECTION"))?;
            Instance::explicit(name, n, m)
        }
        _ => {
            let c = coords.ok_or_else(|| Error::parse(lines.len(), "missing NODE_COORD_SECTION"))?;
            Instance::from_coords(name, kind, c)
        }
    }
}

/// A Hamiltonian cycle over `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tour {
    order: Vec<u32>,
    edges: Vec<Edge>,
}

impl Tour {
    /// Validates `order` (0-indexed) as a permutation of `0..n`.
    pub fn from_order(order: Vec<u32>, n: usize) -> Result<Self> {
        if order.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: order.len(),
            });
        }
        let mut seen = vec![false; n];
        for &v in &order {
            let v = v as usize;
            if v >= n {
                return Err(Error::NotPermutation(format!("vertex {} out of range 1..={n}", v + 1)));
            }
            if seen[v] {
                return Err(Error::NotPermutation(format!("vertex {} repeated", v + 1)));
            }
            seen[v] = true;
        }
        if n < 4 {
            return Err(Error::TooFewVertices(n));
        }
        let mut edges: Vec<Edge> = (0..n)
            .map(|i| Edge::new(order[i], order[(i + 1) % n]))
            .collect();
        edges.sort_unstable();
        Ok(Tour { order, edges })
    }

    pub fn n(&self) -> usize {
        self.order.len()
    }

    pub fn order(&self) -> &[u32] {
        &self.order
    }

    /// The `n` tour edges, sorted.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn contains(&self, e: Edge) -> bool {
        self.edges.binary_search(&e).is_ok()
    }

    pub fn length(&self, inst: &Instance) -> i64 {
        self.edges
            .iter()
            .map(|e| inst.distance_unchecked(e.u as usize, e.v as usize))
            .sum()
    }

    /// Renders the tour as a TSPLIB `.tour` document.
    pub fn to_tsplib(&self, name: &str) -> String {
        let mut s = format!(
            "NAME : {name}\nTYPE : TOUR\nDIMENSION : {}\nTOUR_SECTION\n",
            self.order.len()
        );
        for v in &self.order {
            let _ = writeln!(s, "{}", v + 1);
        }
        s.push_str("-1\nEOF\n");
        s
    }
}

/// Parses a TSPLIB tour document with `n` vertices.
pub fn parse_tour(text: &str, n: usize) -> Result<Tour> {
    parse_tour_impl(text, Some(n))
}

/// Parses a tour whose vertex count is taken from its `DIMENSION` header,
/// or from the number of listed vertices when the header is absent.
pub fn parse_tour_unsized(text: &str) -> Result<Tour> {
    parse_tour_impl(text, None)
}

fn parse_tour_impl(text: &str, expected: Option<usize>) -> Result<Tour> {
    let mut n = expected;
    let mut order: Vec<u32> = Vec::new();
    let mut in_section = false;
    let mut terminated = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if !in_section {
            if section_name(line) == "TOUR_SECTION" {
                in_section = true;
                continue;
            }
            if line == "EOF" {
                break;
            }
            if let Some((key, value)) = header(line) {
                match key {
                    "DIMENSION" => {
                        let d = value
                            .parse::<usize>()
                            .map_err(|_| Error::parse(idx + 1, format!("bad DIMENSION {value:?}")))?;
                        match n {
                            Some(n) if d != n => {
                                return Err(Error::DimensionMismatch { expected: n, found: d });
                            }
                            _ => n = Some(d),
                        }
                    }
                    "TYPE" if value != "TOUR" => {
                        return Err(Error::UnsupportedFormat(format!("TYPE {value}")));
                    }
                    _ => {}
                }
            }
            continue;
        }
        for tok in line.split_whitespace() {
            let v: i64 = tok
                .parse()
                .map_err(|_| Error::parse(idx + 1, format!("expected a vertex index, found {tok:?}")))?;
            if v == -1 {
                terminated = true;
                break;
            }
            if v < 1 {
                return Err(Error::NotPermutation(format!("vertex {v} is not a valid index")));
            }
            order.push((v - 1) as u32);
        }
        if terminated {
            break;
        }
    }
    if !in_section {
        return Err(Error::parse(text.lines().count(), "missing TOUR_SECTION"));
    }
    let n = n.unwrap_or(order.len());
    if order.len() < n {
        let mut seen = vec![false; n];
        for &v in &order {
            if let Some(s) = seen.get_mut(v as usize) {
                if *s {
                    return Err(Error::NotPermutation(format!("vertex {} repeated", v + 1)));
                }
                *s = true;
            }
        }
    }
    Tour::from_order(order, n)
}

/// One line of an edge-list file: `u v original_distance fbar`.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeListEntry {
    pub edge: Edge,
    pub distance: i64,
    pub fbar: f64,
}

/// Writes entries 1-indexed in the given order, `fbar` with six decimals.
pub fn write_edge_list(entries: &[EdgeListEntry]) -> String {
    let mut s = String::with_capacity(entries.len() * 24);
    for e in entries {
        let _ = writeln!(
            s,
            "{} {} {} {:.6}",
            e.edge.u + 1,
            e.edge.v + 1,
            e.distance,
            e.fbar
        );
    }
    s
}

/// Parses an edge-list file. Lines starting with `#` are ignored; the
/// distance and fbar columns are optional when reading.
pub fn parse_edge_list(text: &str) -> Result<Vec<EdgeListEntry>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() < 2 {
            return Err(Error::parse(idx + 1, "expected `u v [distance [fbar]]`"));
        }
        let vert = |t: &str| -> Result<u32> {
            let v: u32 = t
                .parse()
                .map_err(|_| Error::parse(idx + 1, format!("bad vertex {t:?}")))?;
            if v == 0 {
                return Err(Error::parse(idx + 1, "vertices are numbered from 1"));
            }
            Ok(v - 1)
        };
        let (a, b) = (vert(toks[0])?, vert(toks[1])?);
        if a == b {
            return Err(Error::SelfLoop(a as usize + 1));
        }
        let distance = match toks.get(2) {
            Some(t) => t
                .parse()
                .map_err(|_| Error::parse(idx + 1, format!("bad distance {t:?}")))?,
            None => 0,
        };
        let fbar = match toks.get(3) {
            Some(t) => parse_num(t, idx + 1)?,
            None => 0.0,
        };
        out.push(EdgeListEntry {
            edge: Edge::new(a, b),
            distance,
            fbar,
        });
    }
    Ok(out)
}
