//! State files: one JSON header line, then a CSV node table.
//!
//! ```text
//! {"format":"gaussflow-state","version":1,"representation":"graph",...}
//! node,x1,x2,f1,f2
//! 0,-3.14...,...
//! ```
//!
//! Graph tables hold grid coordinates and `f^α`; parametric tables hold
//! parameter coordinates and all `m + n` position components.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::numerics::{Grid, Signature};

use super::state::{GraphState, ParametricState, Representation};

const FORMAT: &str = "gaussflow-state";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    format: String,
    version: u32,
    representation: Representation,
    signature: Signature,
    grid: Grid,
    t: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tilt: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lattice: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StateFile {
    Graph(GraphState),
    Parametric(ParametricState),
}

fn io_err(e: impl std::fmt::Display) -> crate::Error {
    invalid(format!("state file: {e}"))
}

type Columns<'a> = Vec<(String, &'a Vec<f64>)>;

pub fn write_state(w: &mut impl Write, state: &StateFile) -> Result<()> {
    let (header, coords, columns, grid): (Header, Vec<String>, Columns<'_>, &Grid) = match state {
        StateFile::Graph(s) => (
            Header {
                format: FORMAT.into(),
                version: 1,
                representation: Representation::Graph,
                signature: s.sig,
                grid: s.grid.clone(),
                t: s.t,
                tilt: Some(s.tilt.clone()),
                lattice: None,
            },
            (1..=s.sig.m).map(|i| format!("x{i}")).collect(),
            s.values.iter().enumerate().map(|(a, v)| (format!("f{}", a + 1), v)).collect(),
            &s.grid,
        ),
        StateFile::Parametric(s) => (
            Header {
                format: FORMAT.into(),
                version: 1,
                representation: Representation::Parametric,
                signature: s.sig,
                grid: s.grid.clone(),
                t: s.t,
                tilt: None,
                lattice: Some(s.lattice.clone()),
            },
            (1..=s.sig.m).map(|i| format!("u{i}")).collect(),
            s.positions.iter().enumerate().map(|(c, v)| (format!("F{}", c + 1), v)).collect(),
            &s.grid,
        ),
    };
    serde_json::to_writer(&mut *w, &header).map_err(io_err)?;
    writeln!(w).map_err(io_err)?;
    let mut csv = csv::Writer::from_writer(w);
    let mut head = vec!["node".to_string()];
    head.extend(coords);
    head.extend(columns.iter().map(|(n, _)| n.clone()));
    csv.write_record(&head).map_err(io_err)?;
    for k in 0..grid.len() {
        let mut row = vec![k.to_string()];
        row.extend((0..grid.dim()).map(|i| format!("{:.16e}", grid.coord(k, i))));
        row.extend(columns.iter().map(|(_, v)| format!("{:.16e}", v[k])));
        csv.write_record(&row).map_err(io_err)?;
    }
    csv.flush().map_err(io_err)?;
    Ok(())
}

pub fn read_state(r: &mut impl BufRead) -> Result<StateFile> {
    let mut first = String::new();
    r.read_line(&mut first).map_err(io_err)?;
    let header: Header = serde_json::from_str(first.trim()).map_err(io_err)?;
    if header.format != FORMAT || header.version != 1 {
        return Err(invalid(format!("unsupported state format {} v{}", header.format, header.version)));
    }
    let sig = Signature::new(header.signature.m, header.signature.n, header.signature.kind)?;
    let grid = Grid::with_origin(header.grid.sizes.clone(), header.grid.periods.clone(), header.grid.origin.clone())?;
    let ncols = match header.representation {
        Representation::Graph => sig.n,
        Representation::Parametric => sig.ambient_dim(),
    };
    let mut cols = vec![vec![0.0; grid.len()]; ncols];
    let mut seen = vec![false; grid.len()];
    let mut csv = csv::Reader::from_reader(r);
    for rec in csv.records() {
        let rec = rec.map_err(io_err)?;
        if rec.len() != 1 + sig.m + ncols {
            return Err(invalid(format!("state row has {} fields, expected {}", rec.len(), 1 + sig.m + ncols)));
        }
        let k: usize = rec[0].parse().map_err(io_err)?;
        if k >= grid.len() || seen[k] {
            return Err(invalid(format!("state row for node {k} is out of range or repeated")));
        }
        seen[k] = true;
        for (c, col) in cols.iter_mut().enumerate() {
            col[k] = rec[1 + sig.m + c].trim().parse().map_err(io_err)?;
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(invalid("state table is missing nodes"));
    }
    match header.representation {
        Representation::Graph => {
            let tilt = header.tilt.unwrap_or_else(|| vec![vec![0.0; sig.m]; sig.n]);
            Ok(StateFile::Graph(GraphState::new(sig, grid, tilt, cols, header.t)?))
        }
        Representation::Parametric => {
            let lattice = header.lattice.ok_or_else(|| invalid("parametric state needs a lattice"))?;
            Ok(StateFile::Parametric(ParametricState::new(sig, grid, lattice, cols, header.t)?))
        }
    }
}

/// One field as CSV: node index, grid coordinates, value.
pub fn write_field_csv(w: &mut impl Write, grid: &Grid, name: &str, values: &[f64]) -> Result<()> {
    if values.len() != grid.len() {
        return Err(invalid("field length does not match the grid"));
    }
    let mut csv = csv::Writer::from_writer(w);
    let mut head = vec!["node".to_string()];
    head.extend((1..=grid.dim()).map(|i| format!("x{i}")));
    head.push(name.to_string());
    csv.write_record(&head).map_err(io_err)?;
    for (k, v) in values.iter().enumerate() {
        let mut row = vec![k.to_string()];
        row.extend((0..grid.dim()).map(|i| format!("{:.16e}", grid.coord(k, i))));
        row.push(format!("{v:.16e}"));
        csv.write_record(&row).map_err(io_err)?;
    }
    csv.flush().map_err(io_err)?;
    Ok(())
}
