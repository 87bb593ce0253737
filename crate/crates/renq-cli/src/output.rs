//! Row assembly and serialization.
//!
//! Every evaluation — single point, sweep grid, figure dataset or
//! simulation — produces [`Row`] values that serialize to one fixed CSV
//! schema (and, under `--json`, to an NDJSON stream with the same fields
//! in the same order).  Columns:
//!
//! ```text
//! lambda, mu, s, n1, n2, theta1, theta2, [n3, theta3,] route,
//! pi_s, p_q, p_a, l,
//! h_tilde, h1_tilde, h2_tilde, r1_tilde, r2_tilde,
//! ci_pq, ci_pa, ci_l,
//! warning, raw_p_q, raw_p_a, dominant
//! ```
//!
//! * Floats are printed with 17 significant digits (`{:.16e}`), which
//!   round-trips `f64` exactly; infinite capacities print as `inf`.
//! * The `h*`/`r*` diagnostics hold the route's subchain summary (the
//!   exact sums or their normal approximations); they are empty for the
//!   oracle routes, which have no subchain decomposition.
//! * `ci_*` are 95% confidence half-widths, filled only by `oracle-sim`.
//! * Probabilities are clamped to [0, 1] at this presentation layer only:
//!   when clamping fires, `warning` names the affected columns and the
//!   untouched values move to `raw_p_q`/`raw_p_a`.
//! * `dominant` tags the subchain contributing the largest of
//!   h̃, h̃₁, h̃₂ (`pool`, `stage1`, `stage2`, and `stage3` for
//!   three-stage rows).

use renq::exact::{Measures, Route};
use renq::model::Capacity;
use std::io::{self, Write};

/// Subchain diagnostics carried into the CSV columns.
#[derive(Debug, Clone, Copy)]
pub struct SummaryCols {
    pub h: f64,
    pub h1: f64,
    pub h2: f64,
    pub r1: f64,
    pub r2: f64,
    /// Third-stage sum, used only for the dominance tag (the CSV schema
    /// carries two stages of diagnostics).
    pub h3: Option<f64>,
}

/// One output row: a parameter point, the route that evaluated it, and
/// the results.
#[derive(Debug, Clone)]
pub struct Row {
    pub lambda: f64,
    pub mu: f64,
    pub s: u32,
    pub n1: Capacity,
    pub n2: Capacity,
    pub theta1: f64,
    pub theta2: f64,
    /// Present only for three-stage rows; both or neither.
    pub n3: Option<Capacity>,
    pub theta3: Option<f64>,
    pub route: Route,
    pub measures: Measures,
    pub summary: Option<SummaryCols>,
    /// 95% half-widths for (P_Q, P_A, L) from the simulation route.
    pub ci: Option<(f64, f64, f64)>,
}

/// One serialized cell.
enum Cell {
    Float(f64),
    Int(u64),
    Cap(Capacity),
    Text(String),
    Empty,
}

/// 17 significant digits: enough to reproduce the `f64` bit pattern on
/// re-parse.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Float(x) => fmt_f64(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Cap(c) => c.to_string(),
            Cell::Text(t) => t.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> String {
        match self {
            Cell::Float(x) => {
                if x.is_finite() {
                    fmt_f64(*x)
                } else {
                    // JSON has no Infinity/NaN literals.
                    serde_json::Value::String(x.to_string()).to_string()
                }
            }
            Cell::Int(n) => n.to_string(),
            Cell::Cap(Capacity::Finite(n)) => n.to_string(),
            Cell::Cap(Capacity::Infinite) => "\"inf\"".to_string(),
            Cell::Text(t) => serde_json::Value::String(t.clone()).to_string(),
            Cell::Empty => "null".to_string(),
        }
    }
}

fn header(three_stage: bool) -> Vec<&'static str> {
    let mut cols = vec!["lambda", "mu", "s", "n1", "n2", "theta1", "theta2"];
    if three_stage {
        cols.extend(["n3", "theta3"]);
    }
    cols.extend([
        "route", "pi_s", "p_q", "p_a", "l", "h_tilde", "h1_tilde", "h2_tilde", "r1_tilde",
        "r2_tilde", "ci_pq", "ci_pa", "ci_l", "warning", "raw_p_q", "raw_p_a", "dominant",
    ]);
    cols
}

fn clamp_unit(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

fn dominant_tag(sc: &SummaryCols) -> String {
    let mut label = "pool";
    let mut best = sc.h;
    for (name, value) in [("stage1", sc.h1), ("stage2", sc.h2)] {
        if value > best {
            best = value;
            label = name;
        }
    }
    if let Some(h3) = sc.h3 {
        if h3 > best {
            label = "stage3";
        }
    }
    label.to_string()
}

fn cells(row: &Row, three_stage: bool) -> Vec<Cell> {
    let mut out = vec![
        Cell::Float(row.lambda),
        Cell::Float(row.mu),
        Cell::Int(u64::from(row.s)),
        Cell::Cap(row.n1),
        Cell::Cap(row.n2),
        Cell::Float(row.theta1),
        Cell::Float(row.theta2),
    ];
    if three_stage {
        out.push(row.n3.map_or(Cell::Empty, Cell::Cap));
        out.push(row.theta3.map_or(Cell::Empty, Cell::Float));
    }
    out.push(Cell::Text(row.route.to_string()));

    let m = &row.measures;
    let p_q = clamp_unit(m.p_q);
    let p_a = clamp_unit(m.p_a);
    let mut warnings = Vec::new();
    if p_q != m.p_q {
        warnings.push("p_q clamped");
    }
    if p_a != m.p_a {
        warnings.push("p_a clamped");
    }

    out.push(Cell::Float(m.pi_s));
    out.push(Cell::Float(p_q));
    out.push(Cell::Float(p_a));
    out.push(Cell::Float(m.l));

    match &row.summary {
        Some(sc) => {
            out.push(Cell::Float(sc.h));
            out.push(Cell::Float(sc.h1));
            out.push(Cell::Float(sc.h2));
            out.push(Cell::Float(sc.r1));
            out.push(Cell::Float(sc.r2));
        }
        None => out.extend([Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty]),
    }

    match row.ci {
        Some((ci_pq, ci_pa, ci_l)) => {
            out.push(Cell::Float(ci_pq));
            out.push(Cell::Float(ci_pa));
            out.push(Cell::Float(ci_l));
        }
        None => out.extend([Cell::Empty, Cell::Empty, Cell::Empty]),
    }

    if warnings.is_empty() {
        out.extend([Cell::Empty, Cell::Empty, Cell::Empty]);
    } else {
        out.push(Cell::Text(warnings.join("; ")));
        out.push(Cell::Float(m.p_q));
        out.push(Cell::Float(m.p_a));
    }

    out.push(match &row.summary {
        Some(sc) => Cell::Text(dominant_tag(sc)),
        None => Cell::Empty,
    });

    out
}

/// Streams rows as CSV or NDJSON with a fixed column order.
pub struct TableWriter<'w> {
    sink: &'w mut dyn Write,
    json: bool,
    three_stage: bool,
    header_pending: bool,
}

impl<'w> TableWriter<'w> {
    pub fn new(sink: &'w mut dyn Write, json: bool, three_stage: bool) -> Self {
        TableWriter {
            sink,
            json,
            three_stage,
            header_pending: !json,
        }
    }

    pub fn emit(&mut self, row: &Row) -> io::Result<()> {
        let cols = header(self.three_stage);
        if self.header_pending {
            writeln!(self.sink, "{}", cols.join(","))?;
            self.header_pending = false;
        }
        let cells = cells(row, self.three_stage);
        debug_assert_eq!(cells.len(), cols.len());
        if self.json {
            let fields: Vec<String> = cols
                .iter()
                .zip(&cells)
                .map(|(name, cell)| format!("\"{}\":{}", name, cell.json()))
                .collect();
            writeln!(self.sink, "{{{}}}", fields.join(","))
        } else {
            let fields: Vec<String> = cells.iter().map(Cell::csv).collect();
            writeln!(self.sink, "{}", fields.join(","))
        }
    }
}

/// A generic small table (reproduce comparisons, rule recommendations)
/// sharing the same CSV/NDJSON conventions.
pub struct NamedWriter<'w> {
    sink: &'w mut dyn Write,
    json: bool,
    columns: &'static [&'static str],
    header_pending: bool,
}

impl<'w> NamedWriter<'w> {
    pub fn new(sink: &'w mut dyn Write, json: bool, columns: &'static [&'static str]) -> Self {
        NamedWriter {
            sink,
            json,
            columns,
            header_pending: !json,
        }
    }

    pub fn emit(&mut self, values: &[Value]) -> io::Result<()> {
        debug_assert_eq!(values.len(), self.columns.len());
        if self.header_pending {
            writeln!(self.sink, "{}", self.columns.join(","))?;
            self.header_pending = false;
        }
        if self.json {
            let fields: Vec<String> = self
                .columns
                .iter()
                .zip(values)
                .map(|(name, v)| format!("\"{}\":{}", name, v.as_cell().json()))
                .collect();
            writeln!(self.sink, "{{{}}}", fields.join(","))
        } else {
            let fields: Vec<String> = values.iter().map(|v| v.as_cell().csv()).collect();
            writeln!(self.sink, "{}", fields.join(","))
        }
    }
}

/// Public cell values for [`NamedWriter`] callers.
pub enum Value {
    Float(f64),
    Int(u64),
    Text(&'static str),
    Owned(String),
    Bool(bool),
    Empty,
}

impl Value {
    fn as_cell(&self) -> Cell {
        match self {
            Value::Float(x) => Cell::Float(*x),
            Value::Int(n) => Cell::Int(*n),
            Value::Text(t) => Cell::Text((*t).to_string()),
            Value::Owned(t) => Cell::Text(t.clone()),
            Value::Bool(b) => Cell::Text(b.to_string()),
            Value::Empty => Cell::Empty,
        }
    }
}
