//! CSV and JSON export of fields, traces, flow lines and phase-space arrays.
//!
//! Every CSV has a header row. Floats are written in Rust's shortest
//! round-trip form, so identical inputs give byte-identical files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::field::{RealField, WaveFunction};
use crate::grid::{Boundary, Grid};
use crate::madelung::MadelungFields;
use crate::phasespace::{Lattice, PhaseSpaceDistribution, Symbol, SymplecticGrid};
use crate::solver::Trace;
use crate::trajectory::FlowLine;
use crate::units::UnitSystem;
use crate::weak::WeakMomentumField;

/// Coordinate column names of a grid.
pub fn coordinate_names(grid: &Grid) -> Vec<String> {
    match (grid.dims(), grid.boundary()) {
        (1, Boundary::Radial) => vec!["r".into()],
        (1, _) => vec!["x".into()],
        (d, _) => (1..=d).map(|i| format!("x{i}")).collect(),
    }
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    Ok(BufWriter::new(File::create(path)?))
}

/// Path with the extension replaced by `json`.
pub fn header_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

/// Pretty-printed JSON file.
pub fn write_json<T: Serialize + ?Sized>(value: &T, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// Named columns over the points of `grid`, preceded by the coordinates.
pub fn write_columns(grid: &Grid, columns: &[(&str, &[f64])], path: &Path) -> Result<()> {
    for (name, col) in columns {
        if col.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "column `{name}` has {} values, grid has {}",
                col.len(),
                grid.len()
            )));
        }
    }
    let mut w = csv::Writer::from_writer(create(path)?);
    let mut header = coordinate_names(grid);
    header.extend(columns.iter().map(|(n, _)| n.to_string()));
    w.write_record(&header)?;
    for i in 0..grid.len() {
        let mut rec: Vec<String> = grid.coords(i).into_iter().map(fmt).collect();
        rec.extend(columns.iter().map(|(_, c)| fmt(c[i])));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn field_header(grid: &Grid, units: Option<&UnitSystem>, time: f64) -> serde_json::Value {
    json!({ "grid": grid, "units": units, "time": time })
}

/// `coords, re, im` plus a JSON header next to it.
pub fn write_wavefunction(psi: &WaveFunction, path: &Path) -> Result<()> {
    let re: Vec<f64> = psi.values.iter().map(|v| v.re).collect();
    let im: Vec<f64> = psi.values.iter().map(|v| v.im).collect();
    write_columns(&psi.grid, &[("re", &re), ("im", &im)], path)?;
    write_json(
        &field_header(&psi.grid, Some(&psi.units), psi.time),
        &header_path(path),
    )
}

/// `coords, value` plus a JSON header next to it.
pub fn write_real_field(field: &RealField, path: &Path) -> Result<()> {
    write_columns(&field.grid, &[("value", &field.values)], path)?;
    write_json(
        &field_header(&field.grid, None, field.time),
        &header_path(path),
    )
}

fn mask_column(mask: &[bool]) -> Vec<f64> {
    mask.iter().map(|m| if *m { 1.0 } else { 0.0 }).collect()
}

/// Madelung split with derived fields and the node mask (1 = masked).
pub fn write_madelung(fields: &MadelungFields, path: &Path) -> Result<()> {
    let q = fields.quantum_potential();
    let mask = mask_column(&fields.node_mask);
    let mut owned: Vec<(String, Vec<f64>)> = vec![
        ("R".into(), fields.r.clone()),
        ("S".into(), fields.s.clone()),
        ("rho".into(), fields.rho.clone()),
    ];
    owned.push(("Q".into(), q));
    let d = fields.grid.dims();
    for axis in 0..d {
        let sfx = if d == 1 {
            String::new()
        } else {
            format!("_{}", axis + 1)
        };
        owned.push((format!("p_bohm{sfx}"), fields.grad_s[axis].clone()));
        owned.push((format!("v_osmotic{sfx}"), fields.v_osmotic(axis)));
    }
    owned.push(("mask".into(), mask));
    let cols: Vec<(&str, &[f64])> = owned
        .iter()
        .map(|(n, v)| (n.as_str(), v.as_slice()))
        .collect();
    write_columns(&fields.grid, &cols, path)
}

/// Weak momentum field: `coords, re, im, rho` (per-axis suffixes in 2D).
pub fn write_weak_momentum(w: &WeakMomentumField, path: &Path) -> Result<()> {
    let d = w.grid.dims();
    let mut owned: Vec<(String, Vec<f64>)> = Vec::new();
    for axis in 0..d {
        let sfx = if d == 1 {
            String::new()
        } else {
            format!("_{}", axis + 1)
        };
        owned.push((format!("re{sfx}"), w.real_part[axis].clone()));
        owned.push((format!("im{sfx}"), w.imag_part[axis].clone()));
    }
    owned.push(("rho".into(), w.rho.clone()));
    let cols: Vec<(&str, &[f64])> = owned
        .iter()
        .map(|(n, v)| (n.as_str(), v.as_slice()))
        .collect();
    write_columns(&w.grid, &cols, path)
}

/// One wavefunction CSV per sample (`psi_0000.csv`, ...) and `manifest.json`
/// with times, norms and energies.
pub fn write_trace(trace: &Trace, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut files = Vec::with_capacity(trace.samples.len());
    for (k, psi) in trace.samples.iter().enumerate() {
        let name = format!("psi_{k:04}.csv");
        write_wavefunction(psi, &dir.join(&name))?;
        files.push(name);
    }
    let manifest = json!({
        "dt": trace.dt,
        "times": trace.times(),
        "norm": trace.norms,
        "energy": trace.energies,
        "files": files,
    });
    write_json(&manifest, &dir.join("manifest.json"))?;
    Ok(files.into_iter().map(|f| dir.join(f)).collect())
}

/// Long-format flow lines: `line_id, t, x.., v.., q, e_bohm, status`.
pub fn write_flowlines(lines: &[FlowLine], path: &Path) -> Result<()> {
    let d = lines.first().map(|l| l.seed.len()).unwrap_or(1);
    let mut w = csv::Writer::from_writer(create(path)?);
    let mut header = vec!["line_id".to_string(), "t".to_string()];
    if d == 1 {
        header.extend(["x".to_string(), "v".to_string()]);
    } else {
        header.extend((1..=d).map(|i| format!("x{i}")));
        header.extend((1..=d).map(|i| format!("v{i}")));
    }
    header.extend(["q".to_string(), "e_bohm".to_string(), "status".to_string()]);
    w.write_record(&header)?;
    for line in lines {
        for s in &line.samples {
            let mut rec = vec![line.id.to_string(), fmt(s.t)];
            rec.extend(s.x.iter().copied().map(fmt));
            rec.extend(s.v.iter().copied().map(fmt));
            rec.extend([fmt(s.q), fmt(s.e_bohm), line.status.as_str().to_string()]);
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Gnuplot script that draws every line of a 1D flow-line CSV in the `(t, x)` plane.
pub fn gnuplot_script(csv_name: &str, title: &str) -> String {
    format!(
        "# run with `gnuplot -p` from the directory holding {csv_name}\n\
         set datafile separator ','\n\
         set key off\n\
         set title '{title}'\n\
         set xlabel 't'\n\
         set ylabel 'x'\n\
         # consecutive rows of one line_id form a curve; a blank line separates curves\n\
         plot '< awk -F, ''NR > 1 {{ if (NR > 2 && $1 != id) print \"\"; id = $1; print }}'' {csv_name}' \
         using 2:3 with lines lw 0.5 lc rgb '#1f4e79'\n"
    )
}

fn configuration_rows(g: &SymplecticGrid) -> impl Iterator<Item = usize> + '_ {
    (0..g.nx).filter(move |j| g.lattice == Lattice::Periodic || g.x_weights[*j] > 0.0)
}

fn phase_space_manifest(g: &SymplecticGrid, time: Option<f64>) -> serde_json::Value {
    json!({ "grid": g, "time": time, "layout": "x slow, p fast" })
}

/// `x, p, F` plus a JSON manifest. Rows outside a Dirichlet box are omitted.
pub fn write_phase_space(f: &PhaseSpaceDistribution, path: &Path) -> Result<()> {
    let g = &f.grid;
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["x", "p", "F"])?;
    for j in configuration_rows(g) {
        for m in 0..g.np {
            w.write_record([fmt(g.x(j)), fmt(g.p(m)), fmt(f.value(j, m))])?;
        }
    }
    w.flush()?;
    write_json(&phase_space_manifest(g, Some(f.time)), &header_path(path))
}

/// `x, p, re, im` plus a JSON manifest.
pub fn write_symbol(a: &Symbol, path: &Path) -> Result<()> {
    let g = &a.grid;
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["x", "p", "re", "im"])?;
    for j in configuration_rows(g) {
        for m in 0..g.np {
            let v = a.value(j, m);
            w.write_record([fmt(g.x(j)), fmt(g.p(m)), fmt(v.re), fmt(v.im)])?;
        }
    }
    w.flush()?;
    write_json(&phase_space_manifest(g, None), &header_path(path))
}
