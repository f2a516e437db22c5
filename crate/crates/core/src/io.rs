//! CSV text formats for configurations, trajectories and discrete paths.
//!
//! Numbers are written with the shortest decimal text that parses back to the same `f64`.
//! Header lines starting with `#` carry `key=value` metadata.

use std::io::{BufRead, Write};

use crate::action::DiscretePath;
use crate::dynamics::{total_energy, PhasePoint, PotentialParams, Trajectory};
use crate::error::{Error, Result};
use crate::space::{Configuration, MassVector};

fn io_err(e: std::io::Error) -> Error {
    Error::Parse(format!("i/o: {e}"))
}

fn columns(prefix: char, bodies: usize, dim: usize) -> impl Iterator<Item = String> {
    (0..bodies).flat_map(move |i| (0..dim).map(move |k| format!("{prefix}{i}_{k}")))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(format!("csv: {e}"))
}

fn write_record<W: Write>(w: &mut csv::Writer<W>, values: &[f64]) -> Result<()> {
    w.write_record(values.iter().map(|v| v.to_string())).map_err(csv_err)
}

/// One configuration per row under a `# N=.. n=..` line and an `x{i}_{k}` header.
pub fn write_configurations<W: Write>(mut w: W, configs: &[Configuration]) -> Result<()> {
    let first = configs
        .first()
        .ok_or_else(|| Error::InvalidParameter("no configurations".into()))?;
    let (bodies, dim) = (first.bodies(), first.dim());
    writeln!(w, "# N={bodies} n={dim}").map_err(io_err)?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(columns('x', bodies, dim)).map_err(csv_err)?;
    for c in configs {
        first.check_shape(c)?;
        write_record(&mut out, c.coords())?;
    }
    out.flush().map_err(io_err)
}

struct Table {
    meta: Vec<(String, String)>,
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    fn meta(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    fn meta_parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.meta(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| Error::Parse(format!("bad value for `{key}`: `{v}`")))
            })
            .transpose()
    }
}

fn read_table<R: BufRead>(r: R) -> Result<Table> {
    // Metadata lines are collected here; the rest goes to the CSV reader verbatim.
    let mut meta = Vec::new();
    let mut body = String::new();
    for line in r.lines() {
        let line = line.map_err(io_err)?;
        match line.trim_start().strip_prefix('#') {
            Some(rest) => {
                meta.extend(
                    rest.split_whitespace()
                        .filter_map(|item| item.split_once('='))
                        .map(|(k, v)| (k.to_string(), v.to_string())),
                );
                body.push('\n');
            }
            None => {
                body.push_str(&line);
                body.push('\n');
            }
        }
    }
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(body.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Parse(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.iter().all(String::is_empty) {
        return Err(Error::Parse("missing header row".into()));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse(e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        let row = record
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("line {line}: `{f}` is not a number")))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(Table { meta, header, rows })
}

/// Infers `(N, n)` from `x{i}_{k}` columns starting at `offset` when no metadata is present.
fn shape_from_columns(header: &[String], prefix: char, offset: usize) -> Result<(usize, usize)> {
    let mut bodies = 0;
    let mut dim = 0;
    for name in header.iter().skip(offset) {
        let Some(rest) = name.strip_prefix(prefix) else { break };
        let (i, k) = rest
            .split_once('_')
            .and_then(|(i, k)| Some((i.parse::<usize>().ok()?, k.parse::<usize>().ok()?)))
            .ok_or_else(|| Error::Parse(format!("bad column name `{name}`")))?;
        bodies = bodies.max(i + 1);
        dim = dim.max(k + 1);
    }
    Ok((bodies, dim))
}

fn check_columns(header: &[String], prefix: char, offset: usize, bodies: usize, dim: usize) -> Result<()> {
    for (idx, name) in columns(prefix, bodies, dim).enumerate() {
        match header.get(offset + idx) {
            Some(h) if *h == name => {}
            Some(h) => return Err(Error::Parse(format!("expected column `{name}`, found `{h}`"))),
            None => return Err(Error::Parse(format!("missing column `{name}`"))),
        }
    }
    Ok(())
}

pub fn read_configurations<R: BufRead>(r: R) -> Result<Vec<Configuration>> {
    let table = read_table(r)?;
    let (bodies, dim) = match (table.meta_parsed::<usize>("N")?, table.meta_parsed::<usize>("n")?) {
        (Some(b), Some(d)) => (b, d),
        _ => shape_from_columns(&table.header, 'x', 0)?,
    };
    check_columns(&table.header, 'x', 0, bodies, dim)?;
    if table.header.len() != bodies * dim {
        return Err(Error::Parse("unexpected extra columns".into()));
    }
    table
        .rows
        .into_iter()
        .map(|row| Configuration::new(bodies, dim, row))
        .collect()
}

fn write_meta<W: Write>(w: &mut W, bodies: usize, dim: usize, p: &PotentialParams) -> Result<()> {
    writeln!(w, "# N={bodies}").map_err(io_err)?;
    writeln!(w, "# n={dim}").map_err(io_err)?;
    writeln!(w, "# alpha={}", p.alpha()).map_err(io_err)?;
    let masses: Vec<String> = p.masses().as_slice().iter().map(|m| m.to_string()).collect();
    writeln!(w, "# masses={}", masses.join(";")).map_err(io_err)?;
    Ok(())
}

fn write_rows<W: Write>(
    mut w: W,
    p: &PotentialParams,
    times: &[f64],
    states: &[PhasePoint],
    drift: Option<&[f64]>,
) -> Result<()> {
    let first = states
        .first()
        .ok_or_else(|| Error::InvalidParameter("empty trajectory".into()))?;
    let (bodies, dim) = (first.x.bodies(), first.x.dim());
    write_meta(&mut w, bodies, dim, p)?;
    let mut header = vec!["t".to_string()];
    header.extend(columns('x', bodies, dim));
    header.extend(columns('v', bodies, dim));
    if drift.is_some() {
        header.push("energy_drift".into());
    }
    let mut out = csv::Writer::from_writer(w);
    out.write_record(&header).map_err(csv_err)?;
    let mut row = Vec::with_capacity(header.len());
    for (idx, (t, s)) in times.iter().zip(states).enumerate() {
        row.clear();
        row.push(*t);
        row.extend_from_slice(s.x.coords());
        row.extend_from_slice(s.v.coords());
        if let Some(d) = drift {
            row.push(d[idx]);
        }
        write_record(&mut out, &row)?;
    }
    out.flush().map_err(io_err)
}

/// Trajectory CSV: `t`, positions, velocities and optionally the relative energy drift.
pub fn write_trajectory<W: Write>(w: W, p: &PotentialParams, traj: &Trajectory, with_drift: bool) -> Result<()> {
    let drift = with_drift.then(|| traj.energy_drift_series());
    write_rows(w, p, &traj.times, &traj.states, drift.as_deref())
}

/// A discrete path in trajectory format, with node velocities and the energy error `|h - E|`
/// as drift column when `energy` is given.
pub fn write_path<W: Write>(w: W, p: &PotentialParams, path: &DiscretePath, energy: Option<f64>) -> Result<()> {
    let states: Vec<PhasePoint> = path
        .nodes()
        .into_iter()
        .zip(path.velocities(p)?)
        .map(|(x, v)| PhasePoint { x, v })
        .collect();
    let drift = match energy {
        Some(e) => Some(
            states
                .iter()
                .map(|s| Ok((total_energy(s, p)? - e).abs() / e))
                .collect::<Result<Vec<_>>>()?,
        ),
        None => None,
    };
    write_rows(w, p, &path.times(), &states, drift.as_deref())
}

/// Parsed trajectory CSV.
#[derive(Debug, Clone)]
pub struct TrajectoryTable {
    pub bodies: usize,
    pub dim: usize,
    pub alpha: Option<f64>,
    pub masses: Option<MassVector>,
    pub times: Vec<f64>,
    pub states: Vec<PhasePoint>,
    pub energy_drift: Option<Vec<f64>>,
}

pub fn read_trajectory<R: BufRead>(r: R) -> Result<TrajectoryTable> {
    let table = read_table(r)?;
    if table.header.first().map(String::as_str) != Some("t") {
        return Err(Error::Parse("first column must be `t`".into()));
    }
    let (bodies, dim) = match (table.meta_parsed::<usize>("N")?, table.meta_parsed::<usize>("n")?) {
        (Some(b), Some(d)) => (b, d),
        _ => shape_from_columns(&table.header, 'x', 1)?,
    };
    let stride = bodies * dim;
    check_columns(&table.header, 'x', 1, bodies, dim)?;
    check_columns(&table.header, 'v', 1 + stride, bodies, dim)?;
    let with_drift = match table.header.len() - (1 + 2 * stride) {
        0 => false,
        1 if table.header[1 + 2 * stride] == "energy_drift" => true,
        _ => return Err(Error::Parse("unexpected extra columns".into())),
    };
    let masses = match table.meta("masses") {
        Some(v) => Some(MassVector::new(
            v.split(';')
                .map(|s| s.parse::<f64>().map_err(|_| Error::Parse(format!("bad mass `{s}`"))))
                .collect::<Result<Vec<_>>>()?,
        )?),
        None => None,
    };
    let mut out = TrajectoryTable {
        bodies,
        dim,
        alpha: table.meta_parsed("alpha")?,
        masses,
        times: Vec::with_capacity(table.rows.len()),
        states: Vec::with_capacity(table.rows.len()),
        energy_drift: with_drift.then(Vec::new),
    };
    for row in table.rows {
        out.times.push(row[0]);
        let x = Configuration::new(bodies, dim, row[1..1 + stride].to_vec())?;
        let v = Configuration::new(bodies, dim, row[1 + stride..1 + 2 * stride].to_vec())?;
        out.states.push(PhasePoint { x, v });
        if let Some(d) = out.energy_drift.as_mut() {
            d.push(row[1 + 2 * stride]);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn configuration_round_trip_is_exact() {
        let a = Configuration::from_points(&[[0.1, -2.0 / 3.0], [1e-300, 12345.678901234567]]).unwrap();
        let b = Configuration::from_points(&[[std::f64::consts::PI, 0.0], [-0.0, 7.0]]).unwrap();
        let mut buf = Vec::new();
        write_configurations(&mut buf, &[a.clone(), b.clone()]).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# N=2 n=2\nx0_0,x0_1,x1_0,x1_1\n"));
        let back = read_configurations(&buf[..]).unwrap();
        assert_eq!(back, vec![a, b]);
    }

    #[test]
    fn configuration_shape_inferred_without_metadata() {
        let text = "x0_0,x0_1,x0_2,x1_0,x1_1,x1_2\n1,2,3,4,5,6\n";
        let c = read_configurations(text.as_bytes()).unwrap();
        assert_eq!((c[0].bodies(), c[0].dim()), (2, 3));
    }

    #[test]
    fn malformed_input_is_rejected() {
        assert!(read_configurations("x0_0,x0_1\n1,2\n".as_bytes()).is_err());
        assert!(read_configurations("x0_0,x0_1,x1_0,x1_1\n1,2,3\n".as_bytes()).is_err());
        assert!(read_configurations("x0_0,x0_1,x1_0,x1_1\n1,2,3,abc\n".as_bytes()).is_err());
        assert!(read_configurations("".as_bytes()).is_err());
    }
}
