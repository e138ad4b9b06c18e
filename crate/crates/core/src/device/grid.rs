use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::Rect;
use crate::error::{Error, Result};

/// Uniform square-cell grid of interior nodes.
///
/// Nodes sit at `x0 + i·spacing`, `y0 + j·spacing`. The Dirichlet wall is one
/// spacing beyond the outermost node on every side. Values are stored
/// row-major: index `j·nx + i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridGeometry {
    pub nx: usize,
    pub ny: usize,
    pub spacing: f64,
    pub x0: f64,
    pub y0: f64,
}

impl GridGeometry {
    /// Grid centred on `domain` whose cell size is fixed by the x extent.
    /// Fails if the resulting y extent does not cover the domain.
    pub fn covering(domain: &Rect, nx: usize, ny: usize) -> Result<Self> {
        domain.validate()?;
        if nx < 2 || ny < 2 {
            return Err(Error::Config(format!("grid {nx}x{ny} too small")));
        }
        let spacing = domain.width() / (nx + 1) as f64;
        let covered = spacing * (ny + 1) as f64;
        if covered < domain.height() * (1.0 - 1e-9) {
            let need = (domain.height() / spacing).ceil() as usize - 1;
            return Err(Error::Config(format!(
                "grid {nx}x{ny} does not cover the {:.1} nm tall domain; use ny >= {need}",
                domain.height()
            )));
        }
        Ok(Self::centered(domain.center(), nx, ny, spacing))
    }

    pub fn centered(center: (f64, f64), nx: usize, ny: usize, spacing: f64) -> Self {
        Self {
            nx,
            ny,
            spacing,
            x0: center.0 - 0.5 * (nx - 1) as f64 * spacing,
            y0: center.1 - 0.5 * (ny - 1) as f64 * spacing,
        }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    // Offsets are built from half-integers so mirrored nodes are exact negatives.
    pub fn x(&self, i: usize) -> f64 {
        let c = self.x0 + 0.5 * (self.nx - 1) as f64 * self.spacing;
        c + (i as f64 - 0.5 * (self.nx - 1) as f64) * self.spacing
    }

    pub fn y(&self, j: usize) -> f64 {
        let c = self.y0 + 0.5 * (self.ny - 1) as f64 * self.spacing;
        c + (j as f64 - 0.5 * (self.ny - 1) as f64) * self.spacing
    }

    /// Area element h².
    pub fn cell_area(&self) -> f64 {
        self.spacing * self.spacing
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    GateModel,
    BiquadraticModel,
    File,
}

/// Potential energy (meV) sampled on a [`GridGeometry`].
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialGrid {
    pub geometry: GridGeometry,
    pub values: Vec<f64>,
    pub provenance: Provenance,
}

impl PotentialGrid {
    pub fn new(geometry: GridGeometry, values: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if values.len() != geometry.len() {
            return Err(Error::InvalidInput(format!(
                "potential has {} values for a {}x{} grid",
                values.len(),
                geometry.nx,
                geometry.ny
            )));
        }
        if !(geometry.spacing > 0.0) || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(
                "potential grid must have positive spacing and finite values".into(),
            ));
        }
        Ok(Self {
            geometry,
            values,
            provenance,
        })
    }

    pub fn nx(&self) -> usize {
        self.geometry.nx
    }

    pub fn ny(&self) -> usize {
        self.geometry.ny
    }

    pub fn spacing(&self) -> f64 {
        self.geometry.spacing
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.geometry.index(i, j)]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Adds a constant to every node.
    pub fn shifted(&self, c: f64) -> Self {
        Self {
            geometry: self.geometry,
            values: self.values.iter().map(|v| v + c).collect(),
            provenance: self.provenance,
        }
    }

    /// Plain-text matrix: header `# nx ny spacing_nm`, then one grid row
    /// (fixed y) per line.
    pub fn to_text(&self) -> String {
        let g = &self.geometry;
        let mut out = format!("# {} {} {:.16e}\n", g.nx, g.ny, g.spacing);
        write_rows(&mut out, g, &self.values);
        out
    }

    /// Parses [`PotentialGrid::to_text`] output. The grid is centred on the origin.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty potential file".into()))?;
        let fields: Vec<&str> = header
            .trim_start_matches('#')
            .split_whitespace()
            .collect();
        if !header.starts_with('#') || fields.len() != 3 {
            return Err(Error::Parse(format!(
                "bad potential header {header:?}, expected \"# nx ny spacing_nm\""
            )));
        }
        let parse_usize = |s: &str| {
            s.parse::<usize>()
                .map_err(|e| Error::Parse(format!("header field {s:?}: {e}")))
        };
        let nx = parse_usize(fields[0])?;
        let ny = parse_usize(fields[1])?;
        let spacing: f64 = fields[2]
            .parse()
            .map_err(|e| Error::Parse(format!("header spacing {:?}: {e}", fields[2])))?;
        let mut values = Vec::with_capacity(nx * ny);
        for (row, line) in lines.enumerate() {
            let before = values.len();
            for tok in line.split_whitespace() {
                values.push(tok.parse::<f64>().map_err(|e| {
                    Error::Parse(format!("row {row}: value {tok:?}: {e}"))
                })?);
            }
            if values.len() - before != nx {
                return Err(Error::Parse(format!(
                    "row {row} has {} values, expected {nx}",
                    values.len() - before
                )));
            }
        }
        let geometry = GridGeometry::centered((0.0, 0.0), nx, ny, spacing);
        Self::new(geometry, values, Provenance::File)
    }
}

pub(crate) fn write_rows(out: &mut String, g: &GridGeometry, values: &[f64]) {
    for j in 0..g.ny {
        let row = &values[j * g.nx..(j + 1) * g.nx];
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{v:.16e}");
        }
        out.push('\n');
    }
}
