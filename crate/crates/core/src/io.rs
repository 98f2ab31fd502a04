//! Text formats: `qbaker-matrix v1`, `qbaker-state v1`, and the CSV tables.
//!
//! Every real number is written with 17 significant digits in scientific
//! notation with a lower-case exponent, so output is byte-reproducible.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use num_complex::Complex64;

use crate::classical::TorusPoint;
use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::semiclassics::{LimitReport, LocalizationRow, PortraitPoint};
use crate::torus::{Basis, Sector, StateVector};

pub const MATRIX_MAGIC: &str = "qbaker-matrix v1";
pub const STATE_MAGIC: &str = "qbaker-state v1";

pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn fmt_complex(z: Complex64) -> String {
    format!("{},{}", fmt_real(z.re), fmt_real(z.im))
}

fn parse_complex(token: &str, line: usize) -> Result<Complex64> {
    let (re, im) = token.split_once(',').ok_or_else(|| Error::Parse {
        line,
        msg: format!("expected re,im but found {token:?}"),
    })?;
    let parse = |s: &str| {
        s.parse::<f64>().map_err(|e| Error::Parse {
            line,
            msg: format!("{s:?}: {e}"),
        })
    };
    Ok(Complex64::new(parse(re)?, parse(im)?))
}

/// Header `key=value` tokens following the magic string.
fn parse_header(line: &str, magic: &str) -> Result<BTreeMap<String, String>> {
    let rest = line.strip_prefix(magic).ok_or_else(|| Error::Parse {
        line: 1,
        msg: format!("expected header starting with {magic:?}"),
    })?;
    rest.split_whitespace()
        .map(|tok| {
            tok.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| Error::Parse {
                    line: 1,
                    msg: format!("malformed header token {tok:?}"),
                })
        })
        .collect()
}

fn header_dim(attrs: &BTreeMap<String, String>) -> Result<usize> {
    let raw = attrs.get("dim").ok_or_else(|| Error::Parse {
        line: 1,
        msg: "missing dim".into(),
    })?;
    match raw.parse::<usize>() {
        Ok(0) => Err(Error::ZeroDimension),
        Ok(d) => Ok(d),
        Err(e) => Err(Error::Parse {
            line: 1,
            msg: format!("dim {raw:?}: {e}"),
        }),
    }
}

fn data_lines<R: BufRead>(reader: R) -> Result<Vec<String>> {
    let mut lines = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if !line.trim().is_empty() {
            lines.push(line);
        }
    }
    Ok(lines)
}

/// Matrix contents plus any extra header attributes besides `dim`.
#[derive(Debug, Clone)]
pub struct MatrixFile {
    pub matrix: ComplexMatrix,
    pub attrs: BTreeMap<String, String>,
}

pub fn write_matrix<W: Write>(mut w: W, matrix: &ComplexMatrix, attrs: &[(&str, &str)]) -> Result<()> {
    write!(w, "{MATRIX_MAGIC} dim={}", matrix.dim())?;
    for (k, v) in attrs {
        write!(w, " {k}={v}")?;
    }
    writeln!(w)?;
    for i in 0..matrix.dim() {
        let row: Vec<String> = matrix.row(i).iter().map(|&z| fmt_complex(z)).collect();
        writeln!(w, "{}", row.join(" "))?;
    }
    Ok(())
}

pub fn read_matrix<R: BufRead>(reader: R) -> Result<MatrixFile> {
    let lines = data_lines(reader)?;
    let first = lines.first().ok_or_else(|| Error::Parse {
        line: 1,
        msg: "empty input".into(),
    })?;
    let mut attrs = parse_header(first, MATRIX_MAGIC)?;
    let dim = header_dim(&attrs)?;
    attrs.remove("dim");
    if lines.len() - 1 != dim {
        return Err(Error::Parse {
            line: lines.len(),
            msg: format!("expected {dim} rows, found {}", lines.len() - 1),
        });
    }
    let mut entries = Vec::with_capacity(dim * dim);
    for (i, line) in lines[1..].iter().enumerate() {
        let before = entries.len();
        for tok in line.split_whitespace() {
            entries.push(parse_complex(tok, i + 2)?);
        }
        if entries.len() - before != dim {
            return Err(Error::Parse {
                line: i + 2,
                msg: format!("expected {dim} entries, found {}", entries.len() - before),
            });
        }
    }
    Ok(MatrixFile {
        matrix: ComplexMatrix::from_row_major(dim, entries)?,
        attrs,
    })
}

pub fn write_state<W: Write>(mut w: W, state: &StateVector) -> Result<()> {
    writeln!(
        w,
        "{STATE_MAGIC} dim={} basis={} sector={}",
        state.dim(),
        state.basis.name(),
        state.sector.name()
    )?;
    for &z in &state.coeffs {
        writeln!(w, "{}", fmt_complex(z))?;
    }
    Ok(())
}

pub fn read_state<R: BufRead>(reader: R) -> Result<StateVector> {
    let lines = data_lines(reader)?;
    let first = lines.first().ok_or_else(|| Error::Parse {
        line: 1,
        msg: "empty input".into(),
    })?;
    let attrs = parse_header(first, STATE_MAGIC)?;
    let dim = header_dim(&attrs)?;
    let basis = match attrs.get("basis").map(String::as_str) {
        Some("position") => Basis::Position,
        Some("momentum") => Basis::Momentum,
        other => {
            return Err(Error::Parse {
                line: 1,
                msg: format!("unknown basis {other:?}"),
            })
        }
    };
    let sector = match attrs.get("sector").map(String::as_str) {
        Some("theta_00") => Sector::Theta00,
        Some("theta_0half") => Sector::Theta0Half,
        other => {
            return Err(Error::Parse {
                line: 1,
                msg: format!("unknown sector {other:?}"),
            })
        }
    };
    if lines.len() - 1 != dim {
        return Err(Error::Parse {
            line: lines.len(),
            msg: format!("expected {dim} coefficients, found {}", lines.len() - 1),
        });
    }
    let coeffs = lines[1..]
        .iter()
        .enumerate()
        .map(|(i, l)| parse_complex(l.trim(), i + 2))
        .collect::<Result<Vec<_>>>()?;
    StateVector::new(coeffs, basis, sector)
}

pub fn write_orbit_csv<W: Write>(mut w: W, orbit: &[TorusPoint]) -> Result<()> {
    writeln!(w, "step,x,p")?;
    for (i, pt) in orbit.iter().enumerate() {
        writeln!(w, "{i},{},{}", fmt_real(pt.x()), fmt_real(pt.p()))?;
    }
    Ok(())
}

pub fn write_eigenphases_csv<W: Write>(mut w: W, phases: &[f64]) -> Result<()> {
    writeln!(w, "index,phase")?;
    for (i, &phi) in phases.iter().enumerate() {
        writeln!(w, "{i},{}", fmt_real(phi))?;
    }
    Ok(())
}

pub fn read_eigenphases_csv<R: BufRead>(reader: R) -> Result<Vec<f64>> {
    let lines = data_lines(reader)?;
    if lines.first().map(String::as_str) != Some("index,phase") {
        return Err(Error::Parse {
            line: 1,
            msg: "expected header index,phase".into(),
        });
    }
    lines[1..]
        .iter()
        .enumerate()
        .map(|(i, l)| {
            l.split_once(',')
                .and_then(|(_, v)| v.parse::<f64>().ok())
                .ok_or_else(|| Error::Parse {
                    line: i + 2,
                    msg: format!("bad row {l:?}"),
                })
        })
        .collect()
}

pub fn write_limit_csv<W: Write>(mut w: W, report: &LimitReport) -> Result<()> {
    writeln!(w, "N,re_q,im_q,re_c,im_c,error")?;
    for r in &report.rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.n,
            fmt_real(r.quantum.re),
            fmt_real(r.quantum.im),
            fmt_real(r.classical.re),
            fmt_real(r.classical.im),
            fmt_real(r.error)
        )?;
    }
    Ok(())
}

pub fn write_localization_csv<W: Write>(mut w: W, rows: &[LocalizationRow]) -> Result<()> {
    writeln!(w, "operator,region,measured_mass,expected_limit")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{}",
            r.operator,
            r.region,
            fmt_real(r.measured_mass),
            fmt_real(r.expected_limit)
        )?;
    }
    Ok(())
}

/// One line of a verification report.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub check: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

pub fn write_verify_csv<W: Write>(mut w: W, checks: &[CheckResult]) -> Result<()> {
    writeln!(w, "check,value,threshold,pass")?;
    for c in checks {
        writeln!(
            w,
            "{},{},{},{}",
            c.check,
            fmt_real(c.value),
            fmt_real(c.threshold),
            c.pass
        )?;
    }
    Ok(())
}

pub fn write_portrait_csv<W: Write>(mut w: W, points: &[PortraitPoint]) -> Result<()> {
    writeln!(w, "x0,p0,overlap")?;
    for p in points {
        writeln!(w, "{},{},{}", fmt_real(p.x0), fmt_real(p.p0), fmt_real(p.overlap))?;
    }
    Ok(())
}
