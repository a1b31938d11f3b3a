use std::io::Write;
use std::path::Path;

use num_complex::Complex64;

use super::grid::{GridSpec, RadialGrid};
use crate::error::{Error, Result};

/// Complex samples of a radial function at the nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialField {
    spec: GridSpec,
    values: Vec<Complex64>,
}

impl RadialField {
    pub fn zeros(grid: &RadialGrid) -> Self {
        RadialField {
            spec: grid.spec(),
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_values(grid: &RadialGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a grid with {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(RadialField {
            spec: grid.spec(),
            values,
        })
    }

    pub fn from_real(grid: &RadialGrid, re: &[f64]) -> Result<Self> {
        Self::from_values(grid, re.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn from_parts(grid: &RadialGrid, re: &[f64], im: &[f64]) -> Result<Self> {
        if re.len() != im.len() {
            return Err(Error::GridMismatch("real and imaginary parts differ in length".into()));
        }
        Self::from_values(
            grid,
            re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect(),
        )
    }

    pub fn from_fn<F: Fn(f64) -> Complex64>(grid: &RadialGrid, f: F) -> Self {
        RadialField {
            spec: grid.spec(),
            values: grid.nodes().iter().map(|&r| f(r)).collect(),
        }
    }

    pub(crate) fn with_values(&self, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        RadialField {
            spec: self.spec,
            values,
        }
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn re(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.re).collect()
    }

    pub fn im(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.im).collect()
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn map<F: Fn(Complex64) -> Complex64>(&self, f: F) -> Self {
        self.with_values(self.values.iter().map(|&z| f(z)).collect())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|z| z * c)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a - b)
    }

    pub fn zip<F: Fn(Complex64, Complex64) -> Complex64>(&self, other: &Self, f: F) -> Result<Self> {
        if self.spec != other.spec {
            return Err(Error::GridMismatch(format!(
                "{:?} vs {:?}",
                self.spec, other.spec
            )));
        }
        Ok(self.with_values(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    /// `self += c * other`.
    pub fn axpy(&mut self, c: Complex64, other: &Self) -> Result<()> {
        if self.spec != other.spec {
            return Err(Error::GridMismatch(format!(
                "{:?} vs {:?}",
                self.spec, other.spec
            )));
        }
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += c * b;
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Writes the field as CSV with columns `r,re,im`, preceded by a comment
    /// line carrying `d`, `r_max` and `n`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_csv_to(&mut file)?;
        file.flush()?;
        Ok(())
    }

    pub fn write_csv_to<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "# d={} r_max={} n={}",
            self.spec.d, self.spec.r_max, self.spec.n
        )?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["r", "re", "im"])?;
        let h = self.spec.r_max / self.spec.n as f64;
        for (i, z) in self.values.iter().enumerate() {
            w.serialize((i as f64 * h, z.re, z.im))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a field written by [`RadialField::write_csv`].
    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let bad = |message: String| Error::Format {
            path: path.to_path_buf(),
            message,
        };
        let first = text.lines().next().ok_or_else(|| bad("empty file".into()))?;
        let spec = parse_header(first).ok_or_else(|| bad(format!("bad header line `{first}`")))?;
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let mut values = Vec::with_capacity(spec.n + 1);
        for row in reader.deserialize::<(f64, f64, f64)>() {
            let (_, re, im) = row?;
            values.push(Complex64::new(re, im));
        }
        if values.len() != spec.n + 1 {
            return Err(bad(format!(
                "header says n={} but found {} rows",
                spec.n,
                values.len()
            )));
        }
        Ok(RadialField { spec, values })
    }
}

fn parse_header(line: &str) -> Option<GridSpec> {
    let body = line.strip_prefix('#')?;
    let mut d = None;
    let mut r_max = None;
    let mut n = None;
    for item in body.split_whitespace() {
        let (k, v) = item.split_once('=')?;
        match k {
            "d" => d = v.parse().ok(),
            "r_max" => r_max = v.parse().ok(),
            "n" => n = v.parse().ok(),
            _ => {}
        }
    }
    Some(GridSpec {
        d: d?,
        r_max: r_max?,
        n: n?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let g = RadialGrid::new(6, 3.0, 32).unwrap();
        let f = RadialField::from_fn(&g, |r| Complex64::new((-r).exp() / 3.0, r.sin() * 1e-7));
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.csv");
        f.write_csv(&p).unwrap();
        let back = RadialField::read_csv(&p).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn mismatched_fields_do_not_combine() {
        let a = RadialField::zeros(&RadialGrid::new(6, 3.0, 32).unwrap());
        let b = RadialField::zeros(&RadialGrid::new(6, 3.0, 64).unwrap());
        assert!(matches!(a.add(&b), Err(Error::GridMismatch(_))));
    }
}
