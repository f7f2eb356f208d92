//! Fixed-format MPS export.
//!
//! Conventions: a maximized objective announced through an `OBJSENSE` section;
//! row names are the three-letter family tag plus a five-digit counter;
//! column names are `A`/`D` plus a seven-digit event counter for arrival and
//! departure times, `S` plus the pair number for overlaps and `Y` plus the
//! pair number for indicators. Indicator columns are contiguous and wrapped
//! in a single `INTORG`/`INTEND` marker block. Output depends only on the
//! model, so repeated exports are byte-identical.

use std::collections::HashSet;
use std::io::Write;

use crate::error::{Error, Result};
use crate::mip::MipModel;

/// Formats a number for an MPS value field: fixed six decimals, falling back
/// to scientific notation when the fixed form would overflow the field.
fn fmt_num(v: f64) -> String {
    let s = format!("{v:.6}");
    if s.len() <= 12 {
        s
    } else {
        format!("{v:.6E}")
    }
}

fn field(name: &str) -> String {
    format!("{name:<8}")
}

/// Writes the model as fixed-format MPS.
pub fn export_mps<W: Write>(model: &MipModel, out: &mut W) -> Result<()> {
    // Unique names are a hard requirement: a clash would silently merge
    // rows or columns in the reader.
    let mut seen: HashSet<&str> = HashSet::new();
    for reserved in ["OBJ", "RHS", "BND"] {
        seen.insert(reserved);
    }
    for row in &model.rows {
        if !seen.insert(&row.name) {
            return Err(Error::MpsExport(format!("duplicate row name {}", row.name)));
        }
    }
    for var in &model.vars {
        if !seen.insert(&var.name) {
            return Err(Error::MpsExport(format!(
                "duplicate column name {}",
                var.name
            )));
        }
    }

    // The integer columns must be one contiguous block for the single
    // marker section.
    let first_int = model.vars.iter().position(|v| v.integer);
    if let Some(first) = first_int {
        let last = model.vars.iter().rposition(|v| v.integer).unwrap();
        if model.vars[first..=last].iter().any(|v| !v.integer) {
            return Err(Error::MpsExport(
                "integer columns are not contiguous".to_string(),
            ));
        }
    }

    // Column-major view of the row coefficients.
    let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); model.vars.len()];
    for (r, row) in model.rows.iter().enumerate() {
        for &(v, c) in &row.terms {
            columns[v.0].push((r, c));
        }
    }
    let mut obj_coeff = vec![0.0; model.vars.len()];
    for &(v, c) in &model.objective {
        obj_coeff[v.0] = c;
    }

    writeln!(out, "NAME          RAILSYNC")?;
    writeln!(out, "OBJSENSE")?;
    writeln!(out, "    MAX")?;

    writeln!(out, "ROWS")?;
    writeln!(out, " N  OBJ")?;
    for row in &model.rows {
        let kind = match row.sense {
            crate::mip::Sense::Le => "L",
            crate::mip::Sense::Ge => "G",
        };
        writeln!(out, " {}  {}", kind, row.name)?;
    }

    writeln!(out, "COLUMNS")?;
    let mut in_int_block = false;
    for (v, var) in model.vars.iter().enumerate() {
        if var.integer && !in_int_block {
            writeln!(
                out,
                "    MARKER                 'MARKER'                 'INTORG'"
            )?;
            in_int_block = true;
        }
        if !var.integer && in_int_block {
            writeln!(
                out,
                "    MARKER                 'MARKER'                 'INTEND'"
            )?;
            in_int_block = false;
        }
        let mut wrote_any = false;
        if obj_coeff[v] != 0.0 {
            writeln!(
                out,
                "    {}  {}  {}",
                field(&var.name),
                field("OBJ"),
                fmt_num(obj_coeff[v])
            )?;
            wrote_any = true;
        }
        for &(r, c) in &columns[v] {
            writeln!(
                out,
                "    {}  {}  {}",
                field(&var.name),
                field(&model.rows[r].name),
                fmt_num(c)
            )?;
            wrote_any = true;
        }
        // A column absent from COLUMNS would vanish in most readers.
        if !wrote_any {
            writeln!(
                out,
                "    {}  {}  {}",
                field(&var.name),
                field("OBJ"),
                fmt_num(0.0)
            )?;
        }
    }
    if in_int_block {
        writeln!(
            out,
            "    MARKER                 'MARKER'                 'INTEND'"
        )?;
    }

    writeln!(out, "RHS")?;
    for row in &model.rows {
        if row.rhs != 0.0 {
            writeln!(
                out,
                "    {}  {}  {}",
                field("RHS"),
                field(&row.name),
                fmt_num(row.rhs)
            )?;
        }
    }

    writeln!(out, "BOUNDS")?;
    for var in &model.vars {
        if var.integer {
            writeln!(out, " LO {}  {}  {}", field("BND"), field(&var.name), fmt_num(var.lo))?;
            writeln!(out, " UP {}  {}  {}", field("BND"), field(&var.name), fmt_num(var.hi))?;
            continue;
        }
        if var.lo != 0.0 {
            writeln!(out, " LO {}  {}  {}", field("BND"), field(&var.name), fmt_num(var.lo))?;
        }
        if var.hi.is_finite() {
            writeln!(out, " UP {}  {}  {}", field("BND"), field(&var.name), fmt_num(var.hi))?;
        }
    }

    writeln!(out, "ENDATA")?;
    Ok(())
}

/// [`export_mps`] into a `String`.
pub fn export_mps_string(model: &MipModel) -> Result<String> {
    let mut buf = Vec::new();
    export_mps(model, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::MpsExport(e.to_string()))
}
