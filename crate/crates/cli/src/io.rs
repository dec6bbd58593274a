//! CSV field dumps with header `r,theta,<a>,<b>`, one row per node in `(r, θ)` order.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use hamsys::{DomainSpec, Field, Grid};

use crate::CliError;

/// Four numeric columns read from a CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub r: Vec<f64>,
    pub theta: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

/// 17 significant digits, enough for an exact round trip.
pub fn format_fields(u: &Field, v: &Field) -> String {
    let g = u.grid();
    let mut out = String::from("r,theta,u,v\n");
    for i in 0..g.n_r() {
        for j in 0..g.n_theta() {
            let k = g.index(i, j);
            let _ = writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                g.radii()[i],
                g.angles()[j],
                u.values()[k],
                v.values()[k]
            );
        }
    }
    out
}

pub fn write_fields(path: &Path, u: &Field, v: &Field) -> Result<(), CliError> {
    std::fs::write(path, format_fields(u, v)).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn parse_table(text: &str, header: [&str; 4]) -> Result<Table, CliError> {
    let bad = |msg: String| CliError::Validation(msg);
    let mut lines = text.lines();
    let head: Vec<&str> = lines.next().unwrap_or("").split(',').map(str::trim).collect();
    if head != header {
        return Err(bad(format!("expected header {}, found {}", header.join(","), head.join(","))));
    }
    let mut t = Table {
        r: Vec::new(),
        theta: Vec::new(),
        a: Vec::new(),
        b: Vec::new(),
    };
    for (ln, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let vals: Result<Vec<f64>, _> = line.split(',').map(|s| s.trim().parse::<f64>()).collect();
        match vals.as_deref() {
            Ok([r, th, a, b]) => {
                t.r.push(*r);
                t.theta.push(*th);
                t.a.push(*a);
                t.b.push(*b);
            }
            _ => return Err(bad(format!("line {}: expected 4 numbers, found `{line}`", ln + 2))),
        }
    }
    if t.r.is_empty() {
        return Err(bad("no data rows".into()));
    }
    Ok(t)
}

pub fn read_table(path: &Path, header: [&str; 4]) -> Result<Table, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_table(&text, header)
}

/// Domain spec implied by the node coordinates, for the given decomposition.
pub fn spec_from_table(t: &Table, m: usize, n: usize) -> Result<DomainSpec, CliError> {
    let r0 = t.r[0];
    let n_theta = t.r.iter().take_while(|&&r| r == r0).count();
    if n_theta < 3 || t.r.len() % n_theta != 0 {
        return Err(CliError::Validation(format!(
            "{} rows do not form a tensor grid with {n_theta} angles",
            t.r.len()
        )));
    }
    let n_r = t.r.len() / n_theta;
    let r1 = t.r[t.r.len() - 1];
    let spec = DomainSpec::new(m, n, r0, n_r, n_theta).with_outer_radius(r1);
    spec.validate()?;
    Ok(spec)
}

/// Nodal fields from the last two columns after checking every coordinate against `grid`.
pub fn fields_on(grid: &Arc<Grid>, t: &Table) -> Result<(Field, Field), CliError> {
    if t.r.len() != grid.len() {
        return Err(CliError::GridMismatch(format!(
            "{} rows for a grid of {} nodes",
            t.r.len(),
            grid.len()
        )));
    }
    let scale = grid.spec().outer_radius;
    for i in 0..grid.n_r() {
        for j in 0..grid.n_theta() {
            let k = grid.index(i, j);
            let dr = (t.r[k] - grid.radii()[i]).abs();
            let dt = (t.theta[k] - grid.angles()[j]).abs();
            if dr > 1e-12 * scale || dt > 1e-12 {
                return Err(CliError::GridMismatch(format!(
                    "node ({i}, {j}) at (r, θ) = ({}, {}) is off the uniform grid",
                    t.r[k], t.theta[k]
                )));
            }
        }
    }
    Ok((
        Field::from_values(grid.clone(), t.a.clone())?,
        Field::from_values(grid.clone(), t.b.clone())?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use hamsys::build_grid;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn any_values_round_trip(vals in prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::ZERO, 30)) {
            let g = build_grid(DomainSpec::new(2, 2, 1.3, 5, 3)).unwrap();
            let u = Field::from_values(g.clone(), vals[..15].to_vec()).unwrap();
            let v = Field::from_values(g.clone(), vals[15..].to_vec()).unwrap();
            let t = parse_table(&format_fields(&u, &v), ["r", "theta", "u", "v"]).unwrap();
            let (u2, v2) = fields_on(&g, &t).unwrap();
            prop_assert_eq!(u2.values(), u.values());
            prop_assert_eq!(v2.values(), v.values());
        }
    }

    #[test]
    fn fields_round_trip_exactly() {
        let g = build_grid(DomainSpec::new(3, 2, 0.7, 9, 5)).unwrap();
        let u = Field::from_fn(g.clone(), |r, t| (r * 1.234567).sin() * t.cos() / 3.0);
        let v = u.map(|x| x.exp() * std::f64::consts::PI);
        let t = parse_table(&format_fields(&u, &v), ["r", "theta", "u", "v"]).unwrap();
        let spec = spec_from_table(&t, 3, 2).unwrap();
        assert_eq!(spec.n_r, 9);
        assert_eq!(spec.n_theta, 5);
        assert_eq!(spec.inner_radius, 0.7);
        let g2 = build_grid(spec).unwrap();
        let (u2, v2) = fields_on(&g2, &t).unwrap();
        assert_eq!(u2.values(), u.values());
        assert_eq!(v2.values(), v.values());
    }

    #[test]
    fn malformed_tables_are_rejected() {
        assert!(parse_table("r,theta,u\n1,2,3\n", ["r", "theta", "u", "v"]).is_err());
        assert!(parse_table("r,theta,u,v\n1,2,x,4\n", ["r", "theta", "u", "v"]).is_err());
        assert!(parse_table("r,theta,u,v\n", ["r", "theta", "u", "v"]).is_err());
        let g = build_grid(DomainSpec::new(2, 2, 1.0, 5, 4)).unwrap();
        let z = Field::zeros(g.clone());
        let mut text = format_fields(&z, &z);
        text = text.replacen("1.0000000000000000e0,0.0000000000000000e0", "1.0000000000000000e0,1.0000000000000000e-3", 1);
        let t = parse_table(&text, ["r", "theta", "u", "v"]).unwrap();
        assert!(matches!(fields_on(&g, &t), Err(CliError::GridMismatch(_))));
    }
}
