//! CSV writers. Floats are written with 17 significant digits, which
//! round-trips `f64` exactly.

use std::io::{self, Write};

use crate::diagnostics::{ConvergenceTable, DiagnosticsRecord};
use crate::mesh::MeshND;

/// `x` with 17 significant digits; NaN is written as `nan`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:.16e}")
    }
}

const AXES: [&str; 3] = ["x", "y", "z"];

fn coordinate_header(dim: usize) -> String {
    AXES[..dim].join(",")
}

fn coordinates(mesh: &MeshND<f64>, cell: usize) -> String {
    let c = mesh.center(cell);
    c[..mesh.dim()].iter().map(|&v| fmt_f64(v)).collect::<Vec<_>>().join(",")
}

/// Columns `x[,y[,z]],u`, one row per cell in storage order.
pub fn write_snapshot<W: Write>(out: &mut W, mesh: &MeshND<f64>, values: &[f64]) -> io::Result<()> {
    writeln!(out, "{},u", coordinate_header(mesh.dim()))?;
    for (cell, &u) in values.iter().enumerate() {
        writeln!(out, "{},{}", coordinates(mesh, cell), fmt_f64(u))?;
    }
    Ok(())
}

/// Columns `x[,y],N,P,V`.
pub fn write_dd_snapshot<W: Write>(out: &mut W, mesh: &MeshND<f64>, n: &[f64], p: &[f64], v: &[f64]) -> io::Result<()> {
    writeln!(out, "{},N,P,V", coordinate_header(mesh.dim()))?;
    for cell in 0..mesh.n_cells() {
        writeln!(
            out,
            "{},{},{},{}",
            coordinates(mesh, cell),
            fmt_f64(n[cell]),
            fmt_f64(p[cell]),
            fmt_f64(v[cell])
        )?;
    }
    Ok(())
}

pub fn write_diagnostics<W: Write>(out: &mut W, records: &[DiagnosticsRecord<f64>]) -> io::Result<()> {
    writeln!(out, "time,mass,entropy,dissipation,l1_to_equilibrium")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{}",
            fmt_f64(r.time),
            fmt_f64(r.mass),
            fmt_f64(r.entropy),
            fmt_f64(r.dissipation),
            fmt_f64(r.l1_to_equilibrium)
        )?;
    }
    Ok(())
}

/// Columns `n_cells,l1_error,order`; the order is empty on the first row.
pub fn write_convergence<W: Write>(out: &mut W, table: &ConvergenceTable<f64>) -> io::Result<()> {
    writeln!(out, "n_cells,l1_error,order")?;
    for row in &table.rows {
        let order = row.order.map(fmt_f64).unwrap_or_default();
        writeln!(out, "{},{},{}", row.n_cells, fmt_f64(row.l1_error), order)?;
    }
    Ok(())
}
