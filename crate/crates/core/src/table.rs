//! Aligned-column text tables with CSV export.

use std::fmt::Write as _;
use std::io;

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Table {
    pub title: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// Four decimal places, the precision used for every reported metric.
pub fn fmt4(x: f64) -> String {
    format!("{x:.4}")
}

impl Table {
    pub fn new<S: Into<String>>(title: impl Into<String>, headers: impl IntoIterator<Item = S>) -> Self {
        Self {
            title: title.into(),
            headers: headers.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push<S: Into<String>>(&mut self, row: impl IntoIterator<Item = S>) {
        self.rows.push(row.into_iter().map(Into::into).collect());
    }

    /// Title line, then header and rows; first column left-aligned, the rest
    /// right-aligned.
    pub fn render_text(&self) -> String {
        let cols = self.headers.len();
        let mut widths: Vec<usize> = self.headers.iter().map(|h| h.chars().count()).collect();
        for row in &self.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let line = |cells: &[String]| {
            let mut s = String::new();
            for (i, w) in widths.iter().enumerate().take(cols) {
                let cell = cells.get(i).map(String::as_str).unwrap_or("");
                if i > 0 {
                    s.push_str("  ");
                }
                if i == 0 {
                    let _ = write!(s, "{cell:<w$}");
                } else {
                    let _ = write!(s, "{cell:>w$}");
                }
            }
            s.trim_end().to_string()
        };
        let mut out = String::new();
        out.push_str(&self.title);
        out.push('\n');
        let header = line(&self.headers);
        let rule = "-".repeat(widths.iter().sum::<usize>() + 2 * cols.saturating_sub(1));
        out.push_str(&header);
        out.push('\n');
        out.push_str(&rule);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&line(row));
            out.push('\n');
        }
        out
    }

    pub fn write_csv<W: io::Write>(&self, w: W) -> csv::Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(&self.headers)?;
        for row in &self.rows {
            wtr.write_record(row)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}

/// Render several tables, blank-line separated.
pub fn render_all(tables: &[Table]) -> String {
    tables.iter().map(Table::render_text).collect::<Vec<_>>().join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aligned_text() {
        let mut t = Table::new("Scores", ["Model", "Accuracy"]);
        t.push(["finbert", "0.7210"]);
        t.push(["bnlf", "0.7860"]);
        let text = t.render_text();
        assert_eq!(
            text,
            "Scores\nModel    Accuracy\n-----------------\nfinbert    0.7210\nbnlf       0.7860\n"
        );
    }

    #[test]
    fn csv_quotes() {
        let mut t = Table::new("x", ["a", "b"]);
        t.push(["1,2", "3"]);
        assert_eq!(t.to_csv(), "a,b\n\"1,2\",3\n");
    }

    #[test]
    fn four_places() {
        assert_eq!(fmt4(2.0 / 3.0), "0.6667");
        assert_eq!(fmt4(1.0), "1.0000");
    }
}
