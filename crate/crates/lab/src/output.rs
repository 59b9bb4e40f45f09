use std::path::Path;

use stochtrace_core::ComplexMatrix;

use crate::LabError;

/// One CSV field.
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

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.into())
    }
}

/// Floats carry 15 significant digits.
pub fn format_float(x: f64) -> String {
    format!("{x:.14e}")
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(n) => n.to_string(),
            Cell::Float(x) => format_float(*x),
            Cell::Text(s) => s.clone(),
        }
    }
}

pub fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<(), LabError>
where
    I: IntoIterator<Item = Vec<Cell>>,
{
    let io = |e: csv::Error| LabError::io(path, e.into());
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path).map_err(io)?;
    w.write_record(header).map_err(io)?;
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        w.write_record(row.iter().map(Cell::render)).map_err(io)?;
    }
    w.flush().map_err(|e| LabError::io(path, e))
}

/// Real part of a matrix, row-major, as `i,j,value`.
pub fn write_operator(dir: &Path, label: &str, m: &ComplexMatrix) -> Result<(), LabError> {
    let n = m.dim();
    let rows = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| vec![i.into(), j.into(), m[(i, j)].re.into()]);
    write_csv(&dir.join(format!("operator_{label}.csv")), &["i", "j", "value"], rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        write_csv(&p, &["a", "b", "c"], vec![vec![1usize.into(), 0.1.into(), "x".into()], vec![2usize.into(), (-2.5e-20).into(), "y".into()]]).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text, "a,b,c\n1,1.00000000000000e-1,x\n2,-2.50000000000000e-20,y\n");
        assert_eq!(format_float(1.0 / 3.0).parse::<f64>().unwrap(), 0.333333333333333);
    }
}
