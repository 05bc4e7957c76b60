//! Line-oriented graph persistence and the CSV emitters behind the CLI.
//!
//! Graph files are text: a header, one `param` line, `v` lines in birth
//! order, `e` lines, and optional `s` snapshot lines. Positions are written
//! with 17 significant digits so a write/read round trip reproduces the
//! graph bit for bit.

use crate::analysis::{DegreeHistogram, EdgeLengthCurve, EdgeLengthRow, PairEstimate};
use crate::model::{DegreeSnapshot, ModelParams, SpaGraph};
use crate::theory::{Regime, TheoryContext};
use crate::torus::{Norm, TorusMetric};
use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

pub const GRAPH_HEADER: &str = "spa-graph v1";

#[derive(Debug)]
pub enum FormatError {
    Io(io::Error),
    Parse { line: usize, message: String },
}

impl fmt::Display for FormatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormatError::Io(e) => write!(f, "i/o error: {e}"),
            FormatError::Parse { line, message } => write!(f, "parse error at line {line}: {message}"),
        }
    }
}

impl std::error::Error for FormatError {}

impl From<io::Error> for FormatError {
    fn from(e: io::Error) -> Self {
        FormatError::Io(e)
    }
}

fn parse_err<T>(line: usize, message: impl Into<String>) -> Result<T, FormatError> {
    Err(FormatError::Parse {
        line,
        message: message.into(),
    })
}

/// Full-precision float: 17 significant digits, enough to round-trip f64.
fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_graph(g: &SpaGraph, path: &Path) -> Result<(), FormatError> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    write_graph_to(g, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn write_graph_to<W: Write>(g: &SpaGraph, w: &mut W) -> Result<(), FormatError> {
    let p = &g.params;
    writeln!(w, "{GRAPH_HEADER}")?;
    writeln!(
        w,
        "param {} {} {} {} {} {} {}",
        p.n,
        fmt_f64(p.p),
        fmt_f64(p.a1),
        fmt_f64(p.a2),
        p.metric.m(),
        p.metric.norm().token(),
        p.seed
    )?;
    let m = p.metric.m() as usize;
    for id in 1..=g.n() {
        write!(w, "v {id}")?;
        let pos = g.position(id as u32);
        for axis in 0..m {
            write!(w, " {}", fmt_f64(pos[axis]))?;
        }
        writeln!(w)?;
    }
    for &(s, u) in &g.edges {
        writeln!(w, "e {s} {u}")?;
    }
    for snap in &g.snapshots {
        write!(w, "s {}", snap.t)?;
        for &d in &snap.in_degree {
            write!(w, " {d}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn read_graph(path: &Path) -> Result<SpaGraph, FormatError> {
    let file = File::open(path)?;
    read_graph_from(BufReader::new(file))
}

pub fn read_graph_from<R: Read>(reader: R) -> Result<SpaGraph, FormatError> {
    let mut lines = BufReader::new(reader).lines();
    let mut line_no = 0usize;

    let mut next_line = |line_no: &mut usize| -> Result<Option<String>, FormatError> {
        match lines.next() {
            None => Ok(None),
            Some(Err(e)) => Err(FormatError::Io(e)),
            Some(Ok(l)) => {
                *line_no += 1;
                Ok(Some(l))
            }
        }
    };

    let header = match next_line(&mut line_no)? {
        Some(h) => h,
        None => return parse_err(1, "empty file"),
    };
    if header != GRAPH_HEADER {
        return parse_err(line_no, format!("expected header {GRAPH_HEADER:?}, got {header:?}"));
    }

    let param_line = match next_line(&mut line_no)? {
        Some(l) => l,
        None => return parse_err(line_no + 1, "missing param line"),
    };
    let fields: Vec<&str> = param_line.split_whitespace().collect();
    if fields.len() != 8 || fields[0] != "param" {
        return parse_err(
            line_no,
            "param line must read: param <n> <p> <A1> <A2> <m> <norm> <seed>",
        );
    }
    let n: u64 = parse_field(fields[1], "n", line_no)?;
    let p: f64 = parse_field(fields[2], "p", line_no)?;
    let a1: f64 = parse_field(fields[3], "A1", line_no)?;
    let a2: f64 = parse_field(fields[4], "A2", line_no)?;
    let m: u32 = parse_field(fields[5], "m", line_no)?;
    let norm = match Norm::parse(fields[6]) {
        Ok(norm) => norm,
        Err(e) => return parse_err(line_no, e.to_string()),
    };
    let seed: u64 = parse_field(fields[7], "seed", line_no)?;
    let metric = match TorusMetric::new(m, norm) {
        Ok(metric) => metric,
        Err(e) => return parse_err(line_no, e.to_string()),
    };
    let params = match ModelParams::new(n, p, a1, a2, metric, seed) {
        Ok(params) => params,
        Err(e) => return parse_err(line_no, e.to_string()),
    };

    let mut coords: Vec<f64> = Vec::with_capacity(n as usize * m as usize);
    for expected_id in 1..=n {
        let line = match next_line(&mut line_no)? {
            Some(l) => l,
            None => return parse_err(line_no + 1, format!("missing vertex line for id {expected_id}")),
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 + m as usize || fields[0] != "v" {
            return parse_err(
                line_no,
                format!("expected a vertex line with {m} coordinates, got {line:?}"),
            );
        }
        let id: u64 = parse_field(fields[1], "vertex id", line_no)?;
        if id != expected_id {
            return parse_err(
                line_no,
                format!("vertex ids must be 1..=n in ascending order; expected {expected_id}, got {id}"),
            );
        }
        for axis in 0..m as usize {
            let c: f64 = parse_field(fields[2 + axis], "coordinate", line_no)?;
            if !(0.0..1.0).contains(&c) {
                return parse_err(line_no, format!("coordinate {c} outside [0,1)"));
            }
            coords.push(c);
        }
    }

    let mut edges: Vec<(u32, u32)> = Vec::new();
    let mut in_degree = vec![0u32; n as usize];
    let mut snapshots: Vec<DegreeSnapshot> = Vec::new();
    loop {
        let line = match next_line(&mut line_no)? {
            Some(l) => l,
            None => break,
        };
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields[0] {
            "e" => {
                if !snapshots.is_empty() {
                    return parse_err(line_no, "edge lines must precede snapshot lines");
                }
                if fields.len() != 3 {
                    return parse_err(line_no, "edge line must read: e <src> <dst>");
                }
                let s: u32 = parse_field(fields[1], "edge source", line_no)?;
                let u: u32 = parse_field(fields[2], "edge target", line_no)?;
                if s <= u {
                    return parse_err(
                        line_no,
                        format!("edge ({s},{u}) violates the younger-to-older orientation"),
                    );
                }
                if s as u64 > n || u == 0 {
                    return parse_err(line_no, format!("edge ({s},{u}) references ids outside 1..={n}"));
                }
                in_degree[u as usize - 1] += 1;
                edges.push((s, u));
            }
            "s" => {
                if fields.len() != 2 + n as usize {
                    return parse_err(
                        line_no,
                        format!("snapshot line must carry exactly {n} degrees"),
                    );
                }
                let t: u64 = parse_field(fields[1], "snapshot time", line_no)?;
                if t > n {
                    return parse_err(line_no, format!("snapshot time {t} beyond n = {n}"));
                }
                let mut degs = Vec::with_capacity(n as usize);
                for f in &fields[2..] {
                    degs.push(parse_field(f, "snapshot degree", line_no)?);
                }
                snapshots.push(DegreeSnapshot { t, in_degree: degs });
            }
            other => {
                return parse_err(line_no, format!("unexpected record type {other:?}"));
            }
        }
    }

    match SpaGraph::from_parts(params, coords, edges, in_degree, snapshots) {
        Ok(g) => Ok(g),
        Err(e) => parse_err(line_no, e.to_string()),
    }
}

fn parse_field<T: std::str::FromStr>(
    s: &str,
    what: &str,
    line: usize,
) -> Result<T, FormatError> {
    s.parse()
        .map_err(|_| FormatError::Parse {
            line,
            message: format!("cannot parse {what} from {s:?}"),
        })
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// Pair CSV: one row per estimated pair.
pub fn write_pairs_csv<W: Write>(w: &mut W, rows: &[PairEstimate]) -> Result<(), FormatError> {
    writeln!(w, "id_k,id_l,deg_k,deg_l,cn,d_actual,d_hat,d_hat_adjusted,regime")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            r.id_k,
            r.id_ell,
            r.k,
            r.ell,
            r.cn,
            fmt_f64(r.d_actual),
            fmt_f64(r.d_hat),
            fmt_f64(r.d_hat_adjusted),
            r.regime
        )?;
    }
    Ok(())
}

pub fn read_pairs_csv<R: Read>(r: R) -> Result<Vec<PairEstimate>, FormatError> {
    let mut rows = Vec::new();
    for (line_no, line) in BufReader::new(r).lines().enumerate() {
        let line = line?;
        let line_no = line_no + 1;
        if line_no == 1 {
            if line != "id_k,id_l,deg_k,deg_l,cn,d_actual,d_hat,d_hat_adjusted,regime" {
                return parse_err(1, "unexpected pair CSV header");
            }
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 9 {
            return parse_err(line_no, "pair rows need 9 fields");
        }
        rows.push(PairEstimate {
            id_k: parse_field(f[0], "id_k", line_no)?,
            id_ell: parse_field(f[1], "id_l", line_no)?,
            k: parse_field(f[2], "deg_k", line_no)?,
            ell: parse_field(f[3], "deg_l", line_no)?,
            cn: parse_field(f[4], "cn", line_no)?,
            d_actual: parse_field(f[5], "d_actual", line_no)?,
            d_hat: parse_field(f[6], "d_hat", line_no)?,
            d_hat_adjusted: parse_field(f[7], "d_hat_adjusted", line_no)?,
            regime: Regime::parse(f[8]).map_err(|e| FormatError::Parse {
                line: line_no,
                message: e.to_string(),
            })?,
        });
    }
    Ok(rows)
}

/// Edge-length CSV: alpha grid with empirical counts and predictions where
/// defined (empty fields otherwise). Counts are plotted against alpha on a
/// log10 y-axis to reproduce the survival figures.
pub fn write_edge_curve_csv<W: Write>(w: &mut W, curve: &EdgeLengthCurve) -> Result<(), FormatError> {
    writeln!(w, "alpha,r_alpha,e_alpha,e_alpha_predicted,log_slope_predicted")?;
    for r in &curve.rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            fmt_f64(r.alpha),
            fmt_f64(r.r_alpha),
            r.e_alpha,
            fmt_opt(r.e_alpha_predicted),
            fmt_opt(r.log_slope_predicted)
        )?;
    }
    Ok(())
}

pub fn read_edge_curve_csv<R: Read>(r: R) -> Result<EdgeLengthCurve, FormatError> {
    let mut rows = Vec::new();
    for (line_no, line) in BufReader::new(r).lines().enumerate() {
        let line = line?;
        let line_no = line_no + 1;
        if line_no == 1 {
            if line != "alpha,r_alpha,e_alpha,e_alpha_predicted,log_slope_predicted" {
                return parse_err(1, "unexpected edge CSV header");
            }
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 5 {
            return parse_err(line_no, "edge rows need 5 fields");
        }
        let opt = |s: &str, what: &str| -> Result<Option<f64>, FormatError> {
            if s.is_empty() {
                Ok(None)
            } else {
                Ok(Some(parse_field(s, what, line_no)?))
            }
        };
        rows.push(EdgeLengthRow {
            alpha: parse_field(f[0], "alpha", line_no)?,
            r_alpha: parse_field(f[1], "r_alpha", line_no)?,
            e_alpha: parse_field(f[2], "e_alpha", line_no)?,
            e_alpha_predicted: opt(f[3], "e_alpha_predicted")?,
            log_slope_predicted: opt(f[4], "log_slope_predicted")?,
        });
    }
    Ok(EdgeLengthCurve { rows })
}

/// Degree CSV: observed histogram with the exact and asymptotic coefficient
/// predictions (columns empty when no theory context exists, i.e. p = 0).
pub fn write_degree_csv<W: Write>(
    w: &mut W,
    hist: &DegreeHistogram,
    ctx: Option<&TheoryContext>,
) -> Result<(), FormatError> {
    writeln!(w, "k,N_k,ck_exact,ck_asymptotic")?;
    let mut series = ctx.map(|c| (c, c.ck_exact_series(), 0u64));
    for (&k, &count) in &hist.counts {
        let (exact, asym) = match series.as_mut() {
            None => (String::new(), String::new()),
            Some((ctx, series, at)) => {
                let mut value = f64::NAN;
                while *at <= k as u64 {
                    value = series.next_value();
                    *at += 1;
                }
                let asym = if k >= 1 {
                    fmt_f64(ctx.ck_asymptotic(k as f64).expect("k >= 1"))
                } else {
                    String::new()
                };
                (fmt_f64(value), asym)
            }
        };
        writeln!(w, "{k},{count},{exact},{asym}")?;
    }
    Ok(())
}

pub fn read_degree_csv<R: Read>(r: R) -> Result<BTreeMap<u32, u64>, FormatError> {
    let mut counts = BTreeMap::new();
    for (line_no, line) in BufReader::new(r).lines().enumerate() {
        let line = line?;
        let line_no = line_no + 1;
        if line_no == 1 {
            if line != "k,N_k,ck_exact,ck_asymptotic" {
                return parse_err(1, "unexpected degree CSV header");
            }
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 4 {
            return parse_err(line_no, "degree rows need 4 fields");
        }
        let k: u32 = parse_field(f[0], "k", line_no)?;
        let c: u64 = parse_field(f[1], "N_k", line_no)?;
        counts.insert(k, c);
    }
    Ok(counts)
}
