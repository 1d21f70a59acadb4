//! CSV output. Each file opens with `#` comment lines naming the columns and
//! their units, then a plain header row. Floats carry 17 significant digits
//! so values survive a text round trip.

use std::fmt::Write as _;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// A CSV table built in memory.
#[derive(Debug, Clone)]
pub struct Table {
    columns: Vec<String>,
    text: String,
}

impl Table {
    /// `columns` pairs each name with its unit.
    pub fn new(title: &str, columns: &[(&str, &str)]) -> Self {
        let mut text = format!("# {title}\n# columns:");
        for (name, unit) in columns {
            let _ = write!(text, " {name} [{unit}]");
        }
        text.push('\n');
        let names: Vec<String> = columns.iter().map(|(n, _)| n.to_string()).collect();
        text.push_str(&names.join(","));
        text.push('\n');
        Table {
            columns: names,
            text,
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width differs from header");
        let cells: Vec<String> = row
            .into_iter()
            .map(|c| match c {
                Cell::Int(v) => v.to_string(),
                Cell::Float(v) => fmt_f64(v),
                Cell::Text(s) => s,
            })
            .collect();
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

#[macro_export]
macro_rules! row {
    ($($x:expr),* $(,)?) => {
        vec![$($crate::table::Cell::from($x)),*]
    };
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 12345.678901234567] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn layout() {
        let mut t = Table::new("demo", &[("t", "step"), ("x", "payoff")]);
        t.push(row![3usize, 0.5]);
        assert_eq!(
            t.into_string(),
            "# demo\n# columns: t [step] x [payoff]\nt,x\n3,5.0000000000000000e-1\n"
        );
    }
}
