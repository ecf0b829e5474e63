//! Reader for the free-MPS subset produced by [`super::render_mps`]: one
//! objective row, integer markers, an `RHS` section and `LO`/`UP`/`PL`/`FX`/`BV`
//! bounds.

use super::model::{Constraint, MilpModel, Relation, Variable};
use std::collections::HashMap;
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum MpsError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    Start,
    Rows,
    Columns,
    Rhs,
    Bounds,
}

pub fn parse_mps(text: &str) -> Result<MilpModel, MpsError> {
    let mut model = MilpModel::default();
    let mut section = Section::Start;
    let mut objective_row: Option<String> = None;
    let mut rows: HashMap<String, usize> = HashMap::new();
    let mut cols: HashMap<String, usize> = HashMap::new();
    let mut integer = false;

    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let err = |message: String| MpsError::Parse { line: line_no, message };
        if line.trim().is_empty() || line.starts_with('*') {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        if !line.starts_with(char::is_whitespace) {
            section = match f[0] {
                "NAME" => {
                    model.name = f.get(1).copied().unwrap_or("").to_string();
                    Section::Start
                }
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "BOUNDS" => Section::Bounds,
                "ENDATA" => break,
                other => return Err(err(format!("unsupported section {other}"))),
            };
            continue;
        }
        let number = |s: &str| s.parse::<f64>().map_err(|e| err(format!("{s:?}: {e}")));
        let row = |name: &str| rows.get(name).copied().ok_or_else(|| err(format!("unknown row {name}")));
        match section {
            Section::Start => return Err(err("data before ROWS".into())),
            Section::Rows => {
                let [kind, name] = f[..] else {
                    return Err(err("expected `kind name`".into()));
                };
                let relation = match kind {
                    "N" => {
                        objective_row.get_or_insert_with(|| name.to_string());
                        continue;
                    }
                    "L" => Relation::Le,
                    "G" => Relation::Ge,
                    "E" => Relation::Eq,
                    k => return Err(err(format!("row kind {k}"))),
                };
                rows.insert(name.to_string(), model.constraints.len());
                model.constraints.push(Constraint {
                    name: name.to_string(),
                    terms: Vec::new(),
                    relation,
                    rhs: 0.0,
                });
            }
            Section::Columns => {
                if f.len() == 3 && f[1] == "'MARKER'" {
                    integer = f[2] == "'INTORG'";
                    continue;
                }
                if f.len() != 3 && f.len() != 5 {
                    return Err(err("expected `column row value [row value]`".into()));
                }
                let i = *cols.entry(f[0].to_string()).or_insert_with(|| {
                    model.variables.push(Variable {
                        name: f[0].to_string(),
                        lower: 0.0,
                        upper: f64::INFINITY,
                        integer,
                        objective: 0.0,
                    });
                    model.variables.len() - 1
                });
                for pair in f[1..].chunks(2) {
                    let a = number(pair[1])?;
                    if objective_row.as_deref() == Some(pair[0]) {
                        model.variables[i].objective = a;
                    } else if a != 0.0 {
                        model.constraints[row(pair[0])?].terms.push((i, a));
                    }
                }
            }
            Section::Rhs => {
                if f.len() != 3 && f.len() != 5 {
                    return Err(err("expected `set row value [row value]`".into()));
                }
                for pair in f[1..].chunks(2) {
                    if objective_row.as_deref() != Some(pair[0]) {
                        model.constraints[row(pair[0])?].rhs = number(pair[1])?;
                    }
                }
            }
            Section::Bounds => {
                if f.len() < 3 {
                    return Err(err("expected `kind set column [value]`".into()));
                }
                let i = *cols.get(f[2]).ok_or_else(|| err(format!("unknown column {}", f[2])))?;
                let value = || f.get(3).ok_or_else(|| err("missing bound value".into())).and_then(|s| number(s));
                let v = &mut model.variables[i];
                match f[0] {
                    "LO" => v.lower = value()?,
                    "UP" => v.upper = value()?,
                    "FX" => {
                        v.lower = value()?;
                        v.upper = v.lower;
                    }
                    "PL" => v.upper = f64::INFINITY,
                    "MI" => v.lower = f64::NEG_INFINITY,
                    "BV" => {
                        v.lower = 0.0;
                        v.upper = 1.0;
                        v.integer = true;
                    }
                    k => return Err(err(format!("bound kind {k}"))),
                }
            }
        }
    }
    Ok(model)
}

pub fn read_mps(path: impl AsRef<Path>) -> Result<MilpModel, MpsError> {
    parse_mps(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_entry_columns_and_fixed_bounds() {
        let text = "NAME t\nROWS\n N cost\n L a\n G b\nCOLUMNS\n x cost 2 a 1\n x b 3\n y a 1\nRHS\n RHS a 4 b 1\nBOUNDS\n FX BND y 2\n BV BND x\nENDATA\n";
        let m = parse_mps(text).unwrap();
        assert_eq!(m.name, "t");
        assert_eq!(m.variables[0].objective, 2.0);
        assert!(m.variables[0].is_binary());
        assert_eq!((m.variables[1].lower, m.variables[1].upper), (2.0, 2.0));
        assert_eq!(m.constraints[0].rhs, 4.0);
        assert_eq!(m.constraints[1].terms, vec![(0, 3.0)]);
    }

    #[test]
    fn errors_name_the_line() {
        let err = parse_mps("NAME t\nROWS\n Q bad\n").unwrap_err();
        assert!(err.to_string().starts_with("line 3:"), "{err}");
        assert!(parse_mps("NAME t\nROWS\n L a\nCOLUMNS\n x nope 1\n").is_err());
    }
}
