//! File formats: Matrix Market matrices, plain-text vectors, CSV traces and
//! TOML solver configurations.
//!
//! Writers are deterministic. Matrix and vector values use the shortest
//! representation that parses back to the same `f64`; trace floats use 17
//! significant digits.

use std::fmt::Write as _;
use std::path::Path;

use crate::diagnostics::{IterationRecord, IterationTrace, TraceEvent};
use crate::error::{Error, Result};
use crate::linalg::{ColumnAction, ColumnOperator, SparseSymMatrix};
use crate::solvers::SolverConfig;

const MM_BANNER: &str = "%%MatrixMarket";

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<SparseSymMatrix> {
    parse_matrix_market(&std::fs::read_to_string(path)?)
}

/// Parses a `coordinate real symmetric` Matrix Market file. Entries are read
/// as the lower triangle (entries given above the diagonal are transposed)
/// and mirrored; duplicates are summed.
pub fn parse_matrix_market(text: &str) -> Result<SparseSymMatrix> {
    let (symmetry, rows, cols, entries) = parse_coordinate(text)?;
    if symmetry != "symmetric" {
        return Err(Error::UnsupportedSymmetry(symmetry));
    }
    if rows != cols {
        return Err(Error::MalformedHeader(format!("symmetric matrix must be square, got {rows}x{cols}")));
    }
    let lower: Vec<_> = entries.into_iter().map(|(i, j, v)| (i.max(j), i.min(j), v)).collect();
    SparseSymMatrix::from_lower_triplets(rows, &lower)
}

pub fn read_operator_market(path: impl AsRef<Path>) -> Result<ColumnOperator> {
    parse_operator_market(&std::fs::read_to_string(path)?)
}

/// Parses a `coordinate real general` Matrix Market file into a column
/// operator; duplicates are summed.
pub fn parse_operator_market(text: &str) -> Result<ColumnOperator> {
    let (symmetry, rows, cols, entries) = parse_coordinate(text)?;
    if symmetry != "general" {
        return Err(Error::UnsupportedSymmetry(symmetry));
    }
    let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); cols];
    for (i, j, v) in entries {
        columns[j].push((i, v));
    }
    for col in &mut columns {
        col.sort_by_key(|e| e.0);
        col.dedup_by(|later, kept| {
            let same = later.0 == kept.0;
            if same {
                kept.1 += later.1;
            }
            same
        });
    }
    ColumnOperator::from_columns(rows, columns)
}

pub fn write_operator_market(c: &ColumnOperator, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, operator_market_string(c))?;
    Ok(())
}

/// Column-major entries, 1-based indices.
pub fn operator_market_string(c: &ColumnOperator) -> String {
    let nnz: usize = (0..c.cols()).map(|j| c.column(j).count()).sum();
    let mut s = format!("{MM_BANNER} matrix coordinate real general\n{} {} {nnz}\n", c.rows(), c.cols());
    for j in 0..c.cols() {
        for (i, v) in c.column(j) {
            writeln!(s, "{} {} {v:e}", i + 1, j + 1).expect("write to string");
        }
    }
    s
}

type Coordinate = (String, usize, usize, Vec<(usize, usize, f64)>);

/// Banner, size line and 0-based entries of a coordinate real file.
fn parse_coordinate(text: &str) -> Result<Coordinate> {
    let mut lines = text.lines().enumerate();
    let (_, banner) = lines.next().ok_or_else(|| Error::MalformedHeader("empty file".into()))?;
    let fields: Vec<String> = banner.split_whitespace().map(str::to_ascii_lowercase).collect();
    if fields.len() != 5 || fields[0] != MM_BANNER.to_ascii_lowercase() || fields[1] != "matrix" {
        return Err(Error::MalformedHeader(format!("bad banner `{banner}`")));
    }
    if fields[2] != "coordinate" {
        return Err(Error::MalformedHeader(format!("format `{}` is not supported", fields[2])));
    }
    if fields[3] != "real" && fields[3] != "integer" {
        return Err(Error::MalformedHeader(format!("field `{}` is not supported", fields[3])));
    }
    if fields[4] != "symmetric" && fields[4] != "general" {
        return Err(Error::UnsupportedSymmetry(fields[4].clone()));
    }

    let mut data = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (size_line, size) = data.next().ok_or_else(|| Error::MalformedHeader("missing size line".into()))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::MalformedHeader(format!("bad size line `{size}`"))))
        .collect::<Result<_>>()?;
    let [rows, cols, nnz] = dims[..] else {
        return Err(Error::MalformedHeader(format!("bad size line `{size}`")));
    };

    let mut entries = Vec::with_capacity(nnz);
    for (idx, line) in data {
        let parse_err = |msg: String| Error::Parse { line: idx + 1, msg };
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(parse_err(format!("expected `row col value`, got `{line}`")));
        }
        let index = |t: &str, max: usize| -> Result<usize> {
            match t.parse::<usize>() {
                Ok(k) if (1..=max).contains(&k) => Ok(k - 1),
                _ => Err(parse_err(format!("index `{t}` out of range 1..={max}"))),
            }
        };
        let (i, j) = (index(toks[0], rows)?, index(toks[1], cols)?);
        let v: f64 = toks[2].parse().map_err(|_| parse_err(format!("bad value `{}`", toks[2])))?;
        entries.push((i, j, v));
    }
    if entries.len() != nnz {
        return Err(Error::Parse {
            line: size_line + 1,
            msg: format!("size line announces {nnz} entries, found {}", entries.len()),
        });
    }
    Ok((fields[4].clone(), rows, cols, entries))
}

pub fn write_matrix_market(a: &SparseSymMatrix, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, matrix_market_string(a))?;
    Ok(())
}

/// Lower triangle in row-major order, 1-based indices.
pub fn matrix_market_string(a: &SparseSymMatrix) -> String {
    let lower = a.lower_triplets();
    let mut s = format!("{MM_BANNER} matrix coordinate real symmetric\n{n} {n} {}\n", lower.len(), n = a.dim());
    for (i, j, v) in lower {
        writeln!(s, "{} {} {v:e}", i + 1, j + 1).expect("write to string");
    }
    s
}

pub fn read_vector(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    parse_vector(&std::fs::read_to_string(path)?)
}

/// One value per line; `#` lines are comments, and a `# n=<dim>` comment
/// fixes the expected length.
pub fn parse_vector(text: &str) -> Result<Vec<f64>> {
    let mut expected = None;
    let mut v = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let t = line.trim();
        if let Some(comment) = t.strip_prefix('#') {
            if let Some(n) = comment.trim().strip_prefix("n=") {
                let n = n.trim().parse::<usize>().map_err(|_| Error::MalformedHeader(format!("bad `{t}`")))?;
                expected = Some(n);
            }
            continue;
        }
        if t.is_empty() {
            continue;
        }
        let x = t.parse().map_err(|_| Error::Parse { line: idx + 1, msg: format!("bad value `{t}`") })?;
        v.push(x);
    }
    if let Some(n) = expected {
        crate::error::check_len(n, v.len())?;
    }
    Ok(v)
}

pub fn write_vector(v: &[f64], path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, vector_string(v))?;
    Ok(())
}

pub fn vector_string(v: &[f64]) -> String {
    let mut s = format!("# n={}\n", v.len());
    for x in v {
        writeln!(s, "{x:e}").expect("write to string");
    }
    s
}

pub const TRACE_HEADER: &str = "iter,delta_norm,objective,omega,h,kkt_residual,d,s,event";

/// CSV rendering of a trace; `iter` counts from 1.
pub fn trace_csv_string(trace: &IterationTrace) -> String {
    let mut s = String::with_capacity(160 * (trace.len() + 1));
    s.push_str(TRACE_HEADER);
    s.push('\n');
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
    for (k, r) in trace.records().iter().enumerate() {
        writeln!(
            s,
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{},{:.16e},{},{}",
            k + 1,
            r.delta_norm,
            r.objective,
            r.omega,
            r.h,
            opt(r.kkt_residual),
            r.decrement,
            opt(r.slope),
            r.event.map(|e| e.to_string()).unwrap_or_default(),
        )
        .expect("write to string");
    }
    s
}

pub fn write_trace_csv(trace: &IterationTrace, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, trace_csv_string(trace))?;
    Ok(())
}

pub fn read_trace_csv(path: impl AsRef<Path>) -> Result<IterationTrace> {
    parse_trace_csv(&std::fs::read_to_string(path)?)
}

pub fn parse_trace_csv(text: &str) -> Result<IterationTrace> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == TRACE_HEADER => {}
        other => return Err(Error::MalformedHeader(format!("bad trace header `{}`", other.unwrap_or("")))),
    }
    let mut trace = IterationTrace::new();
    for (idx, line) in lines.enumerate() {
        let err = |msg: String| Error::Parse { line: idx + 2, msg };
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 9 {
            return Err(err(format!("expected 9 fields, got {}", f.len())));
        }
        let num = |t: &str| t.parse::<f64>().map_err(|_| err(format!("bad number `{t}`")));
        let opt = |t: &str| if t.is_empty() { Ok(None) } else { num(t).map(Some) };
        let event = if f[8].is_empty() {
            None
        } else {
            Some(f[8].parse::<TraceEvent>().map_err(|_| err(format!("bad event `{}`", f[8])))?)
        };
        trace.push_record(IterationRecord {
            delta_norm: num(f[1])?,
            objective: num(f[2])?,
            omega: num(f[3])?,
            h: num(f[4])?,
            kkt_residual: opt(f[5])?,
            decrement: num(f[6])?,
            slope: opt(f[7])?,
            event,
        });
    }
    Ok(trace)
}

pub fn read_config(path: impl AsRef<Path>) -> Result<SolverConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}

/// Parses a TOML solver configuration; absent keys take their defaults.
pub fn parse_config(text: &str) -> Result<SolverConfig> {
    let cfg: SolverConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn config_to_toml(cfg: &SolverConfig) -> Result<String> {
    toml::to_string(cfg).map_err(|e| Error::Config(e.to_string()))
}
