//! Tabular output: CSV for machines, aligned text for people.
//!
//! Every table builder is a pure function of a library result, so the same
//! bytes come out whatever thread count produced the result.

use std::io::{self, Write};

use num_rational::BigRational;

use crate::counting::{CountResult, GrowthReport};
use crate::density::{ConvergenceReport, PiecewiseConstant};
use crate::garsia::{DiscreteMeasure, GarsiaTable};
use crate::numeric::Backend;
use crate::random_beta::{BoundReport, CBeta};

/// Significant digits used when rendering floats.
pub const DEFAULT_PRECISION: usize = 17;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(headers: impl IntoIterator<Item = S>) -> Self {
        Table { headers: headers.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.headers)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()
    }

    pub fn write_pretty<W: Write>(&self, mut out: W) -> io::Result<()> {
        let mut widths: Vec<usize> = self.headers.iter().map(|h| h.chars().count()).collect();
        for row in &self.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let line = |out: &mut W, cells: &[String]| -> io::Result<()> {
            let padded: Vec<String> =
                cells.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}", w = *w)).collect();
            writeln!(out, "{}", padded.join("  ").trim_end())
        };
        line(&mut out, &self.headers)?;
        let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
        writeln!(out, "{}", rule.join("  "))?;
        for row in &self.rows {
            line(&mut out, row)?;
        }
        Ok(())
    }
}

/// Scientific notation with `precision` significant digits. Non-finite
/// values render as `inf`, `-inf` and `nan`.
pub fn fmt_float(v: f64, precision: usize) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{:.*e}", precision.max(1) - 1, v)
    }
}

fn rational_parts(r: &BigRational) -> [String; 2] {
    [r.numer().to_string(), r.denom().to_string()]
}

/// `left,right,value`, one row per piece, optionally followed by the exact
/// value `p + qβ` as `p_num,p_den,q_num,q_den`.
pub fn density_table<B: Backend>(
    f: &PiecewiseConstant<B::Num>,
    beta: &B,
    precision: usize,
    exact_columns: bool,
) -> Table {
    let exact_columns = exact_columns && beta.is_exact();
    let mut headers = vec!["left", "right", "value"];
    if exact_columns {
        headers.extend(["p_num", "p_den", "q_num", "q_den"]);
    }
    let mut t = Table::new(headers);
    for (l, r, v) in f.pieces() {
        let mut row = vec![
            fmt_float(beta.to_f64(l), precision),
            fmt_float(beta.to_f64(r), precision),
            fmt_float(beta.to_f64(v), precision),
        ];
        if exact_columns {
            let (p, q) = beta.exact_parts(v).expect("exact backend");
            row.extend(rational_parts(&p));
            row.extend(rational_parts(&q));
        }
        t.push(row);
    }
    t
}

/// `atom,mass_num,mass_den` with exact reduced masses.
pub fn measure_table<B: Backend>(m: &DiscreteMeasure<B::Num>, beta: &B, precision: usize) -> Table {
    let mut t = Table::new(["atom", "mass_num", "mass_den"]);
    for (i, atom) in m.atoms().iter().enumerate() {
        let [num, den] = rational_parts(&m.mass(i));
        t.push(vec![fmt_float(beta.to_f64(atom), precision), num, den]);
    }
    t
}

/// `n,H,H_over_n,ln_beta`.
pub fn entropy_table(g: &GarsiaTable, precision: usize) -> Table {
    let mut t = Table::new(["n", "H", "H_over_n", "ln_beta"]);
    for row in &g.rows {
        t.push(vec![
            row.n.to_string(),
            fmt_float(row.entropy, precision),
            fmt_float(row.ratio, precision),
            fmt_float(g.ln_beta, precision),
        ]);
    }
    t
}

/// Per-orbit rows `orbit,seed,steps,hits,hit_rate`.
pub fn simulation_table(c: &CBeta, precision: usize) -> Table {
    let mut t = Table::new(["orbit", "seed", "steps", "hits", "hit_rate"]);
    for o in &c.mu.orbits {
        t.push(vec![
            o.orbit.to_string(),
            o.seed.to_string(),
            o.steps.to_string(),
            o.hits.to_string(),
            fmt_float(o.hit_rate, precision),
        ]);
    }
    t
}

/// The one-row summary `mu_S_estimate,std_error,c_beta`.
pub fn simulation_summary(c: &CBeta, precision: usize) -> Table {
    let mut t = Table::new(["mu_S_estimate", "std_error", "c_beta"]);
    t.push(vec![
        fmt_float(c.mu.estimate, precision),
        fmt_float(c.mu.std_error, precision),
        fmt_float(c.value, precision),
    ]);
    t
}

/// `n,count,f_n,garsia_erdos,log_rate,near_boundary`.
pub fn count_table(results: &[CountResult], precision: usize) -> Table {
    let mut t = Table::new(["n", "count", "f_n", "garsia_erdos", "log_rate", "near_boundary"]);
    for r in results {
        t.push(vec![
            r.n.to_string(),
            r.count.to_string(),
            fmt_float(r.f_n_value, precision),
            fmt_float(r.garsia_erdos, precision),
            r.log_rate.map(|v| fmt_float(v, precision)).unwrap_or_default(),
            r.near_boundary.to_string(),
        ]);
    }
    t
}

/// The count table plus the running maximum of `(β/2)^n N_n`.
pub fn growth_table(g: &GrowthReport, precision: usize) -> Table {
    let mut t = count_table(&g.results, precision);
    t.headers.push("running_max_garsia_erdos".into());
    for (row, m) in t.rows.iter_mut().zip(&g.running_max_garsia_erdos) {
        row.push(fmt_float(*m, precision));
    }
    t
}

/// `x,log_rate,margin,satisfied,seed,n,c_beta,slack`.
pub fn bound_table(b: &BoundReport, seed: u64, precision: usize) -> Table {
    let mut t = Table::new(["x", "log_rate", "margin", "satisfied", "seed", "n", "c_beta", "slack"]);
    for s in &b.samples {
        t.push(vec![
            fmt_float(s.x, precision),
            fmt_float(s.log_rate, precision),
            fmt_float(s.margin, precision),
            s.satisfied.to_string(),
            seed.to_string(),
            b.n.to_string(),
            fmt_float(b.c_beta, precision),
            fmt_float(b.slack, precision),
        ]);
    }
    t
}

/// `x,tail_min,tail_max,oscillation,seed,n_max,tail_start`.
pub fn diagnose_table(r: &ConvergenceReport, seed: u64, precision: usize) -> Table {
    let mut t = Table::new(["x", "tail_min", "tail_max", "oscillation", "seed", "n_max", "tail_start"]);
    for s in &r.samples {
        t.push(vec![
            fmt_float(s.x, precision),
            fmt_float(s.tail_min, precision),
            fmt_float(s.tail_max, precision),
            fmt_float(s.oscillation, precision),
            seed.to_string(),
            r.n_max.to_string(),
            r.tail_start.to_string(),
        ]);
    }
    t
}
