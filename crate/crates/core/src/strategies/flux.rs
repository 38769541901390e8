//! Per-cell tallies shared by every solver, with a small CSV format:
//!
//! ```text
//! # n_x,n_y,normalization
//! # n_samples=N
//! row y = 0: 2^n_x comma-separated values
//! ...
//! ```

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// Tallies divided by the number of source particles.
    PerShot,
    /// Raw tallies summed over walk steps.
    PerStepSum,
    /// Tallies sum to one.
    UnitSum,
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Normalization::PerShot => "per-shot",
            Normalization::PerStepSum => "per-step-sum",
            Normalization::UnitSum => "unit-sum",
        })
    }
}

impl FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "per-shot" => Ok(Normalization::PerShot),
            "per-step-sum" => Ok(Normalization::PerStepSum),
            "unit-sum" => Ok(Normalization::UnitSum),
            other => Err(Error::Csv(format!("unknown normalization `{other}`"))),
        }
    }
}

/// Row-major tallies over a `2^n_x x 2^n_y` grid; entry `y * 2^n_x + x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluxMap {
    n_x: usize,
    n_y: usize,
    tallies: Vec<f64>,
    n_samples: u64,
    normalization: Normalization,
}

impl FluxMap {
    pub fn new(
        n_x: usize,
        n_y: usize,
        tallies: Vec<f64>,
        n_samples: u64,
        normalization: Normalization,
    ) -> Result<Self> {
        let len = 1usize << (n_x + n_y);
        if tallies.len() != len {
            return Err(Error::ShapeMismatch(format!(
                "{} tallies for a {}x{} grid",
                tallies.len(),
                1usize << n_x,
                1usize << n_y
            )));
        }
        if let Some(v) = tallies.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidParameter(format!("tally {v} is not a finite nonnegative value")));
        }
        Ok(Self {
            n_x,
            n_y,
            tallies,
            n_samples,
            normalization,
        })
    }

    pub fn zeros(n_x: usize, n_y: usize, normalization: Normalization) -> Self {
        Self {
            n_x,
            n_y,
            tallies: vec![0.0; 1 << (n_x + n_y)],
            n_samples: 0,
            normalization,
        }
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn n_y(&self) -> usize {
        self.n_y
    }

    pub fn width(&self) -> usize {
        1 << self.n_x
    }

    pub fn height(&self) -> usize {
        1 << self.n_y
    }

    pub fn tallies(&self) -> &[f64] {
        &self.tallies
    }

    pub fn n_samples(&self) -> u64 {
        self.n_samples
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.tallies[y * self.width() + x]
    }

    pub fn total(&self) -> f64 {
        self.tallies.iter().sum()
    }

    pub fn same_shape(&self, other: &FluxMap) -> bool {
        self.n_x == other.n_x && self.n_y == other.n_y
    }

    /// Copy rescaled to sum to one.
    pub fn to_unit_sum(&self) -> Result<FluxMap> {
        let total = self.total();
        if total <= 0.0 {
            return Err(Error::ZeroMap);
        }
        Ok(FluxMap {
            tallies: self.tallies.iter().map(|v| v / total).collect(),
            normalization: Normalization::UnitSum,
            ..self.clone()
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# {},{},{}\n", self.n_x, self.n_y, self.normalization);
        out.push_str(&format!("# n_samples={}\n", self.n_samples));
        for row in self.tallies.chunks(self.width()) {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<FluxMap> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .and_then(|l| l.strip_prefix('#'))
            .ok_or_else(|| Error::Csv("missing `# n_x,n_y,normalization` header".into()))?;
        let fields: Vec<&str> = header.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(Error::Csv(format!("malformed header `{header}`")));
        }
        let parse_dim = |s: &str| {
            s.parse::<usize>()
                .ok()
                .filter(|&n| n <= 16)
                .ok_or_else(|| Error::Csv(format!("bad qubit count `{s}`")))
        };
        let n_x = parse_dim(fields[0])?;
        let n_y = parse_dim(fields[1])?;
        let normalization: Normalization = fields[2].parse()?;
        let mut n_samples = 0;
        let mut tallies = Vec::with_capacity(1 << (n_x + n_y));
        let mut rows = 0;
        for line in lines {
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(v) = comment.trim().strip_prefix("n_samples=") {
                    n_samples = v
                        .trim()
                        .parse()
                        .map_err(|_| Error::Csv(format!("bad sample count `{v}`")))?;
                }
                continue;
            }
            let before = tallies.len();
            for cell in line.split(',') {
                let v: f64 = cell
                    .trim()
                    .parse()
                    .map_err(|_| Error::Csv(format!("bad value `{cell}` in row {rows}")))?;
                tallies.push(v);
            }
            if tallies.len() - before != 1 << n_x {
                return Err(Error::Csv(format!(
                    "row {rows} has {} values, expected {}",
                    tallies.len() - before,
                    1usize << n_x
                )));
            }
            rows += 1;
        }
        if rows != 1 << n_y {
            return Err(Error::Csv(format!("{rows} rows, expected {}", 1usize << n_y)));
        }
        FluxMap::new(n_x, n_y, tallies, n_samples, normalization)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<FluxMap> {
        FluxMap::from_csv(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let t: Vec<f64> = (0..8).map(|i| (i as f64).sqrt() / 3.0).collect();
        let m = FluxMap::new(2, 1, t, 17, Normalization::PerShot).unwrap();
        let text = m.to_csv();
        assert!(text.starts_with("# 2,1,per-shot\n# n_samples=17\n"));
        assert_eq!(FluxMap::from_csv(&text).unwrap(), m);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(FluxMap::new(1, 1, vec![0.0; 3], 0, Normalization::UnitSum).is_err());
        assert!(FluxMap::from_csv("# 1,1,unit-sum\n1,2\n").is_err());
        assert!(FluxMap::from_csv("# 1,1,unit-sum\n1,2,3\n4,5\n").is_err());
        assert!(FluxMap::new(1, 1, vec![0.0, -1.0, 0.0, 0.0], 0, Normalization::UnitSum).is_err());
    }

    #[test]
    fn unit_sum() {
        let m = FluxMap::new(1, 1, vec![1.0, 1.0, 2.0, 0.0], 0, Normalization::PerShot).unwrap();
        let u = m.to_unit_sum().unwrap();
        assert_eq!(u.tallies(), &[0.25, 0.25, 0.5, 0.0]);
        assert!(matches!(
            FluxMap::zeros(1, 1, Normalization::PerShot).to_unit_sum(),
            Err(Error::ZeroMap)
        ));
    }
}
