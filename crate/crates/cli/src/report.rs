//! Serialization of results: RFC 4180 CSV with LF line endings, numbers at
//! 12 significant digits, and lattice snapshots as PGM grids or SVG heatmaps.

use std::fmt::Write as _;

use zdlab::evolution::LatticeState;

pub const SIGNIFICANT_DIGITS: usize = 12;

/// Shortest decimal that agrees with `x` to 12 significant digits.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let rounded: f64 = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .expect("scientific notation parses");
    // `Display` never uses an exponent; fall back to one for extreme values.
    if rounded != 0.0 && !(1e-6..1e16).contains(&rounded.abs()) {
        format!("{rounded:e}")
    } else if rounded == 0.0 {
        // Normalizes -0.
        "0".into()
    } else {
        rounded.to_string()
    }
}

/// A CSV table built row by row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }
}

/// Plain PGM (P2): one gray level per site, equal to the strategy index.
pub fn pgm(state: &LatticeState, strategies: usize) -> Vec<u8> {
    let side = state.side();
    let mut out = format!("P2\n{side} {side}\n{}\n", strategies.saturating_sub(1).max(1));
    for row in state.sites().chunks(side) {
        let line: Vec<String> = row.iter().map(u8::to_string).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out.into_bytes()
}

/// Heatmap with cooperators in blue and everything else in red; runs of
/// equal sites along a row share one rectangle.
pub fn svg(state: &LatticeState, cooperative: &[bool], cell: usize) -> Vec<u8> {
    let side = state.side();
    let px = side * cell;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{px}" height="{px}" viewBox="0 0 {px} {px}" shape-rendering="crispEdges">"#
    );
    for (r, row) in state.sites().chunks(side).enumerate() {
        let mut c = 0;
        while c < side {
            let coop = cooperative[row[c] as usize];
            let start = c;
            while c < side && cooperative[row[c] as usize] == coop {
                c += 1;
            }
            let fill = if coop { "#2b6cb0" } else { "#c53030" };
            let _ = writeln!(
                out,
                r#"<rect x="{}" y="{}" width="{}" height="{cell}" fill="{fill}"/>"#,
                start * cell,
                r * cell,
                (c - start) * cell
            );
        }
    }
    out.push_str("</svg>\n");
    out.into_bytes()
}
