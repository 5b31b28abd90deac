//! Plain-text tables: header row, space or comma delimited, blank lines
//! between blocks. Numbers are written in shortest round-trip form.

use std::io::{BufRead, Write};

use crate::diagnostics::EntropyRecord;
use crate::error::{Error, Result};
use crate::mechanics::DeformedMesh;
use crate::state::{reconstruct_unchecked, DensityPair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Delimiter {
    #[default]
    Space,
    Comma,
}

impl Delimiter {
    pub fn as_str(&self) -> &'static str {
        match self {
            Delimiter::Space => " ",
            Delimiter::Comma => ",",
        }
    }
}

impl std::str::FromStr for Delimiter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "space" | " " => Ok(Delimiter::Space),
            "comma" | "," => Ok(Delimiter::Comma),
            other => Err(Error::Parse(format!("unknown delimiter '{other}' (use space or comma)"))),
        }
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::Parse(format!("i/o: {e}"))
}

fn write_row<W: Write>(w: &mut W, values: &[f64], d: Delimiter) -> Result<()> {
    let line: Vec<String> = values.iter().map(|v| v.to_string()).collect();
    writeln!(w, "{}", line.join(d.as_str())).map_err(io_err)
}

/// Generic table with a header row.
pub fn write_table<W: Write>(w: &mut W, header: &[&str], rows: &[Vec<f64>], d: Delimiter) -> Result<()> {
    writeln!(w, "{}", header.join(d.as_str())).map_err(io_err)?;
    for r in rows {
        if r.len() != header.len() {
            return Err(Error::LengthMismatch {
                what: "table row",
                expected: header.len(),
                got: r.len(),
            });
        }
        write_row(w, r, d)?;
    }
    Ok(())
}

/// One block per snapshot, each preceded by `# time = t`.
///
/// Rows are the grid nodes with columns x, rho, kappa, theta_plus,
/// theta_minus; nodal θ± is the mean of the adjacent cells (the single
/// adjacent cell at a wall).
pub fn write_snapshots<W: Write>(w: &mut W, snapshots: &[DensityPair], d: Delimiter) -> Result<()> {
    for (k, s) in snapshots.iter().enumerate() {
        if k > 0 {
            writeln!(w).map_err(io_err)?;
        }
        writeln!(w, "# time = {}", s.time).map_err(io_err)?;
        writeln!(w, "{}", ["x", "rho", "kappa", "theta_plus", "theta_minus"].join(d.as_str()))
            .map_err(io_err)?;
        let state = reconstruct_unchecked(s);
        let n = s.theta_plus.len();
        let nodal = |f: &[f64], j: usize| match j {
            0 => f[0],
            j if j == n => f[n - 1],
            j => 0.5 * (f[j - 1] + f[j]),
        };
        for (j, &x) in s.grid.nodes().iter().enumerate() {
            write_row(
                w,
                &[
                    x,
                    state.rho[j],
                    state.kappa[j],
                    nodal(&s.theta_plus, j),
                    nodal(&s.theta_minus, j),
                ],
                d,
            )?;
        }
    }
    Ok(())
}

pub fn write_entropy_records<W: Write>(w: &mut W, records: &[EntropyRecord], d: Delimiter) -> Result<()> {
    let rows: Vec<Vec<f64>> = records.iter().map(|r| r.values().to_vec()).collect();
    write_table(w, &EntropyRecord::FIELDS, &rows, d)
}

/// Every lattice row, then every lattice column, as a polyline of
/// displaced points.
pub fn write_mesh<W: Write>(w: &mut W, mesh: &DeformedMesh, d: Delimiter) -> Result<()> {
    writeln!(w, "{}", ["x1", "x2"].join(d.as_str())).map_err(io_err)?;
    let mut first = true;
    let mut block = |w: &mut W, pts: &[(f64, f64)]| -> Result<()> {
        if !first {
            writeln!(w).map_err(io_err)?;
        }
        first = false;
        pts.iter().try_for_each(|&(a, b)| write_row(w, &[a, b], d))
    };
    for r in 0..mesh.rows {
        block(w, mesh.row(r))?;
    }
    for c in 0..mesh.cols {
        block(w, &mesh.column(c))?;
    }
    Ok(())
}

/// Reads two numeric columns (x, value), separated by whitespace or commas.
/// Blank lines, `#` comments and a non-numeric header line are skipped.
pub fn read_two_columns<R: BufRead>(r: R) -> Result<(Vec<f64>, Vec<f64>)> {
    let (mut xs, mut vs) = (Vec::new(), Vec::new());
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(io_err)?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        let parsed: std::result::Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
        match parsed {
            Ok(v) if v.len() == 2 => {
                xs.push(v[0]);
                vs.push(v[1]);
            }
            Ok(v) => {
                return Err(Error::Parse(format!(
                    "line {}: expected 2 columns, found {}",
                    i + 1,
                    v.len()
                )))
            }
            Err(_) if xs.is_empty() => continue,
            Err(e) => return Err(Error::Parse(format!("line {}: {e}", i + 1))),
        }
    }
    if xs.is_empty() {
        return Err(Error::Parse("no numeric rows found".into()));
    }
    Ok((xs, vs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::Grid;

    #[test]
    fn delimiter_parse() {
        assert_eq!("comma".parse::<Delimiter>().unwrap(), Delimiter::Comma);
        assert_eq!("space".parse::<Delimiter>().unwrap(), Delimiter::Space);
        assert!("tab".parse::<Delimiter>().is_err());
    }

    #[test]
    fn snapshot_blocks() {
        let d = DensityPair::uniform(Grid::new(4).unwrap(), 0.5, 0.5);
        let mut e = d.clone();
        e.time = 0.25;
        let mut buf = Vec::new();
        write_snapshots(&mut buf, &[d, e], Delimiter::Comma).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let blocks: Vec<&str> = text.split("\n\n").collect();
        assert_eq!(blocks.len(), 2);
        assert!(blocks[1].starts_with("# time = 0.25\nx,rho,kappa,theta_plus,theta_minus\n"));
        assert!(blocks[0].contains("\n-0.5,0,-0.5,0.5,0.5\n"));
    }

    #[test]
    fn round_trip_precision() {
        let v = 0.1 + 0.2;
        let mut buf = Vec::new();
        write_table(&mut buf, &["a"], &[vec![v]], Delimiter::Space).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().nth(1).unwrap().parse::<f64>().unwrap(), v);
    }

    #[test]
    fn two_column_reader() {
        let text = "# profile\nx value\n-1 0\n0, 0.5\n\n1 1\n";
        let (x, v) = read_two_columns(text.as_bytes()).unwrap();
        assert_eq!(x, vec![-1.0, 0.0, 1.0]);
        assert_eq!(v, vec![0.0, 0.5, 1.0]);
        assert!(read_two_columns("1 2 3\n".as_bytes()).is_err());
        assert!(read_two_columns("1 2\nfoo bar\n".as_bytes()).is_err());
        assert!(read_two_columns("".as_bytes()).is_err());
    }

    #[test]
    fn table_row_length_checked() {
        let mut buf = Vec::new();
        assert!(write_table(&mut buf, &["a", "b"], &[vec![1.0]], Delimiter::Space).is_err());
    }
}
