//! LP (CPLEX-style) and free-MPS serialization. Output depends only on the
//! model, so writing the same model twice gives identical bytes.

use super::model::{MilpModel, Relation};
use std::fmt::Write as _;
use std::path::Path;

fn num(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".to_string()
    } else if x == f64::NEG_INFINITY {
        "-inf".to_string()
    } else if x == x.trunc() && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

fn linear(out: &mut String, terms: &[(usize, f64)], model: &MilpModel) {
    let mut first = true;
    let mut width = 0usize;
    for &(i, a) in terms {
        if a == 0.0 {
            continue;
        }
        let sign = if a < 0.0 { "-" } else { "+" };
        let coef = if a.abs() == 1.0 { String::new() } else { format!("{} ", num(a.abs())) };
        let piece = if first && a > 0.0 {
            format!("{coef}{}", model.variables[i].name)
        } else {
            format!("{sign} {coef}{}", model.variables[i].name)
        };
        if width > 200 {
            out.push_str("\n  ");
            width = 0;
        }
        if !first {
            out.push(' ');
        }
        width += piece.len() + 1;
        out.push_str(&piece);
        first = false;
    }
    if first {
        out.push('0');
    }
}

pub fn render_lp(model: &MilpModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "\\ Problem: {}", model.name);
    out.push_str("Minimize\n obj: ");
    let objective: Vec<(usize, f64)> = model
        .variables
        .iter()
        .enumerate()
        .filter(|(_, v)| v.objective != 0.0)
        .map(|(i, v)| (i, v.objective))
        .collect();
    linear(&mut out, &objective, model);
    out.push_str("\nSubject To\n");
    for c in &model.constraints {
        let _ = write!(out, " {}: ", c.name);
        linear(&mut out, &c.terms, model);
        let op = match c.relation {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        };
        let _ = writeln!(out, " {op} {}", num(c.rhs));
    }
    out.push_str("Bounds\n");
    for v in &model.variables {
        if v.upper == f64::INFINITY {
            let _ = writeln!(out, " {} >= {}", v.name, num(v.lower));
        } else {
            let _ = writeln!(out, " {} <= {} <= {}", num(v.lower), v.name, num(v.upper));
        }
    }
    let ints: Vec<&str> = model.variables.iter().filter(|v| v.integer).map(|v| v.name.as_str()).collect();
    if !ints.is_empty() {
        out.push_str("General\n");
        for chunk in ints.chunks(8) {
            let _ = writeln!(out, " {}", chunk.join(" "));
        }
    }
    out.push_str("End\n");
    out
}

pub fn render_mps(model: &MilpModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "NAME {}", model.name);
    out.push_str("ROWS\n N obj\n");
    for c in &model.constraints {
        let kind = match c.relation {
            Relation::Le => "L",
            Relation::Ge => "G",
            Relation::Eq => "E",
        };
        let _ = writeln!(out, " {kind} {}", c.name);
    }

    let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); model.variables.len()];
    for (r, c) in model.constraints.iter().enumerate() {
        for &(i, a) in &c.terms {
            if a != 0.0 {
                columns[i].push((r, a));
            }
        }
    }
    out.push_str("COLUMNS\n");
    let mut in_int = false;
    let mut marker = 0;
    for (i, v) in model.variables.iter().enumerate() {
        if v.integer != in_int {
            let kind = if v.integer { "INTORG" } else { "INTEND" };
            let _ = writeln!(out, " MARKER{marker} 'MARKER' '{kind}'");
            marker += 1;
            in_int = v.integer;
        }
        let mut wrote = false;
        if v.objective != 0.0 {
            let _ = writeln!(out, " {} obj {}", v.name, num(v.objective));
            wrote = true;
        }
        for &(r, a) in &columns[i] {
            let _ = writeln!(out, " {} {} {}", v.name, model.constraints[r].name, num(a));
            wrote = true;
        }
        if !wrote {
            let _ = writeln!(out, " {} obj 0", v.name);
        }
    }
    if in_int {
        let _ = writeln!(out, " MARKER{marker} 'MARKER' 'INTEND'");
    }

    out.push_str("RHS\n");
    for c in &model.constraints {
        if c.rhs != 0.0 {
            let _ = writeln!(out, " RHS {} {}", c.name, num(c.rhs));
        }
    }
    out.push_str("BOUNDS\n");
    for v in &model.variables {
        let _ = writeln!(out, " LO BND {} {}", v.name, num(v.lower));
        if v.upper == f64::INFINITY {
            let _ = writeln!(out, " PL BND {}", v.name);
        } else {
            let _ = writeln!(out, " UP BND {} {}", v.name, num(v.upper));
        }
    }
    out.push_str("ENDATA\n");
    out
}

pub fn write_lp(model: &MilpModel, path: impl AsRef<Path>) -> std::io::Result<()> {
    std::fs::write(path, render_lp(model))
}

pub fn write_mps(model: &MilpModel, path: impl AsRef<Path>) -> std::io::Result<()> {
    std::fs::write(path, render_mps(model))
}
