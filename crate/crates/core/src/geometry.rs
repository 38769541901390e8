//! Grid discretisation of the 2D transport problem.
//!
//! Cells are addressed as `(x, y)` with `x` the column (0 = left) and `y`
//! the row (0 = bottom). Flat cell indices are row-major: `y * width + x`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance on `sigma_s + sigma_a == sigma_t`.
pub const SIGMA_TOL: f64 = 1e-12;

/// Physical extent of the bypass preset along x, in cm.
pub const BYPASS_DOMAIN_CM: f64 = 10.0;

pub const ARM: &str = "arm";
pub const OBSTACLE: &str = "obstacle";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub sigma_t: f64,
    pub sigma_s: f64,
    pub sigma_a: f64,
}

impl Material {
    pub fn new(sigma_t: f64, sigma_s: f64, sigma_a: f64) -> Self {
        Self {
            sigma_t,
            sigma_s,
            sigma_a,
        }
    }

    /// Material with the given scattering cross section and the remainder of
    /// `sigma_t` as absorption.
    pub fn with_scattering(sigma_t: f64, sigma_s: f64) -> Self {
        Self::new(sigma_t, sigma_s, sigma_t - sigma_s)
    }

    pub fn validate(&self, name: &str) -> Result<()> {
        let err = |reason: String| Error::Material {
            name: name.to_string(),
            reason,
        };
        if !(self.sigma_t > 0.0) || !self.sigma_t.is_finite() {
            return Err(err(format!("sigma_t = {} must be positive", self.sigma_t)));
        }
        if !(self.sigma_s >= 0.0) || !(self.sigma_a >= 0.0) {
            return Err(err(format!(
                "sigma_s = {} and sigma_a = {} must be non-negative",
                self.sigma_s, self.sigma_a
            )));
        }
        let sum = self.sigma_s + self.sigma_a;
        if (sum - self.sigma_t).abs() > SIGMA_TOL {
            return Err(err(format!(
                "sigma_s + sigma_a = {} differs from sigma_t = {}",
                sum, self.sigma_t
            )));
        }
        Ok(())
    }
}

/// Interaction probabilities of one cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellProbabilities {
    /// Probability of the stay (absorption) outcome.
    pub p_a: f64,
    /// Probability of each of the four scattering directions.
    pub p_s_dir: [f64; 4],
}

impl CellProbabilities {
    pub fn total(&self) -> f64 {
        self.p_a + self.p_s_dir.iter().sum::<f64>()
    }
}

/// Lattice directions in the order right, up, left, down.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Right,
    Up,
    Left,
    Down,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::Right, Direction::Up, Direction::Left, Direction::Down];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn opposite(self) -> Direction {
        match self {
            Direction::Right => Direction::Left,
            Direction::Left => Direction::Right,
            Direction::Up => Direction::Down,
            Direction::Down => Direction::Up,
        }
    }

    pub fn delta(self) -> (isize, isize) {
        match self {
            Direction::Right => (1, 0),
            Direction::Up => (0, 1),
            Direction::Left => (-1, 0),
            Direction::Down => (0, -1),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridGeometry {
    n_x: usize,
    n_y: usize,
    cell_size: f64,
    material_names: Vec<String>,
    materials: Vec<Material>,
    cell_material: Vec<usize>,
}

impl GridGeometry {
    /// Builds a grid of `2^n_x` by `2^n_y` cells. `cell_material` is
    /// row-major and holds indices into `materials`.
    pub fn new(
        n_x: usize,
        n_y: usize,
        cell_size: f64,
        materials: Vec<(String, Material)>,
        cell_material: Vec<usize>,
    ) -> Result<Self> {
        if n_x == 0 || n_y == 0 || n_x + n_y > 24 {
            return Err(Error::Geometry(format!(
                "grid qubit counts n_x = {n_x}, n_y = {n_y} must be in 1..=24 combined"
            )));
        }
        if !(cell_size > 0.0) || !cell_size.is_finite() {
            return Err(Error::Geometry(format!("cell_size {cell_size} must be positive")));
        }
        if materials.is_empty() {
            return Err(Error::Geometry("no materials defined".into()));
        }
        for (i, (name, m)) in materials.iter().enumerate() {
            m.validate(name)?;
            if materials[..i].iter().any(|(other, _)| other == name) {
                return Err(Error::Geometry(format!("material `{name}` defined twice")));
            }
        }
        let width = 1usize << n_x;
        let height = 1usize << n_y;
        if cell_material.len() != width * height {
            return Err(Error::Geometry(format!(
                "cell map has {} entries, expected {}x{}",
                cell_material.len(),
                width,
                height
            )));
        }
        if let Some(i) = cell_material.iter().position(|&m| m >= materials.len()) {
            return Err(Error::Geometry(format!(
                "cell ({}, {}) refers to undefined material id {}",
                i % width,
                i / width,
                cell_material[i]
            )));
        }
        let (material_names, materials) = materials.into_iter().unzip();
        Ok(Self {
            n_x,
            n_y,
            cell_size,
            material_names,
            materials,
            cell_material,
        })
    }

    /// Single-material grid.
    pub fn homogeneous(n_x: usize, n_y: usize, cell_size: f64, material: Material) -> Result<Self> {
        let cells = (1usize << n_x) * (1usize << n_y);
        Self::new(n_x, n_y, cell_size, vec![("medium".into(), material)], vec![0; cells])
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

    pub fn n_cells(&self) -> usize {
        self.width() * self.height()
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn extent(&self) -> (f64, f64) {
        (
            self.width() as f64 * self.cell_size,
            self.height() as f64 * self.cell_size,
        )
    }

    pub fn materials(&self) -> impl Iterator<Item = (&str, &Material)> {
        self.material_names.iter().map(String::as_str).zip(&self.materials)
    }

    pub fn material_id(&self, name: &str) -> Option<usize> {
        self.material_names.iter().position(|n| n == name)
    }

    pub fn material_name(&self, id: usize) -> &str {
        &self.material_names[id]
    }

    pub fn cell_material_ids(&self) -> &[usize] {
        &self.cell_material
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x < self.width() && y < self.height()
    }

    pub fn check_cell(&self, x: usize, y: usize) -> Result<()> {
        if self.contains(x, y) {
            Ok(())
        } else {
            Err(Error::CellOutOfGrid {
                x,
                y,
                width: self.width(),
                height: self.height(),
            })
        }
    }

    pub fn cell_index(&self, x: usize, y: usize) -> usize {
        y * self.width() + x
    }

    pub fn cell_coords(&self, index: usize) -> (usize, usize) {
        (index % self.width(), index / self.width())
    }

    pub fn material_at(&self, x: usize, y: usize) -> Result<&Material> {
        self.check_cell(x, y)?;
        Ok(&self.materials[self.cell_material[self.cell_index(x, y)]])
    }

    pub(crate) fn material_at_index(&self, index: usize) -> &Material {
        &self.materials[self.cell_material[index]]
    }

    /// Neighbour reached by moving from `(x, y)` in `dir`, with reflective
    /// walls: a move leaving the grid goes the opposite way instead.
    pub fn reflected_neighbor(&self, x: usize, y: usize, dir: Direction) -> (usize, usize) {
        let step = |d: Direction| {
            let (dx, dy) = d.delta();
            let nx = x as isize + dx;
            let ny = y as isize + dy;
            if nx < 0 || ny < 0 || nx >= self.width() as isize || ny >= self.height() as isize {
                None
            } else {
                Some((nx as usize, ny as usize))
            }
        };
        step(dir)
            .or_else(|| step(dir.opposite()))
            .expect("grid is at least two cells wide on each axis")
    }

    pub fn cell_probabilities(&self, x: usize, y: usize) -> Result<CellProbabilities> {
        let m = self.material_at(x, y)?;
        Ok(probabilities_of(m))
    }

    pub(crate) fn cell_probabilities_at_index(&self, index: usize) -> CellProbabilities {
        probabilities_of(self.material_at_index(index))
    }
}

fn probabilities_of(m: &Material) -> CellProbabilities {
    let denom = m.sigma_a + m.sigma_s;
    let p_a = m.sigma_a / denom;
    let p_s = m.sigma_s / denom;
    CellProbabilities {
        p_a,
        p_s_dir: [p_s / 4.0; 4],
    }
}

/// Two-material bypass layout: an obstacle block over the central half of
/// both axes, surrounded by an arm channel. Both materials have unit total
/// cross section; the obstacle absorbs 90 %, the arms scatter 90 %.
pub fn build_bypass_geometry(n_x: usize, n_y: usize) -> Result<GridGeometry> {
    let cell_size = BYPASS_DOMAIN_CM / (1usize << n_x.min(24)) as f64;
    build_bypass_geometry_with(n_x, n_y, cell_size, bypass_arm(), bypass_obstacle())
}

pub fn bypass_arm() -> Material {
    Material::with_scattering(1.0, 0.9)
}

pub fn bypass_obstacle() -> Material {
    Material::with_scattering(1.0, 0.1)
}

pub fn build_bypass_geometry_with(
    n_x: usize,
    n_y: usize,
    cell_size: f64,
    arm: Material,
    obstacle: Material,
) -> Result<GridGeometry> {
    if n_x < 2 || n_y < 2 {
        return Err(Error::Geometry(format!(
            "bypass layout needs at least 4x4 cells (n_x = {n_x}, n_y = {n_y})"
        )));
    }
    let cells = bypass_cell_map(n_x, n_y);
    GridGeometry::new(
        n_x,
        n_y,
        cell_size,
        vec![(ARM.into(), arm), (OBSTACLE.into(), obstacle)],
        cells,
    )
}

fn bypass_cell_map(n_x: usize, n_y: usize) -> Vec<usize> {
    let (w, h) = (1usize << n_x, 1usize << n_y);
    let xs = w / 4..3 * w / 4;
    let ys = h / 4..3 * h / 4;
    (0..h)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .map(|(x, y)| usize::from(xs.contains(&x) && ys.contains(&y)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceSpec {
    Point { x: usize, y: usize },
    /// Cells with non-negative weights; duplicates are summed.
    Weighted(Vec<((usize, usize), f64)>),
}

impl SourceSpec {
    pub fn point(x: usize, y: usize) -> Self {
        SourceSpec::Point { x, y }
    }

    pub fn validate(&self, geometry: &GridGeometry) -> Result<()> {
        match self {
            SourceSpec::Point { x, y } => geometry.check_cell(*x, *y),
            SourceSpec::Weighted(cells) => {
                if cells.is_empty() {
                    return Err(Error::Source("weighted source has no cells".into()));
                }
                let mut total = 0.0;
                for &((x, y), w) in cells {
                    geometry.check_cell(x, y)?;
                    if !(w >= 0.0) || !w.is_finite() {
                        return Err(Error::Source(format!("weight {w} at ({x}, {y}) must be non-negative")));
                    }
                    total += w;
                }
                if total <= 0.0 {
                    return Err(Error::Source("total source weight is zero".into()));
                }
                Ok(())
            }
        }
    }

    /// Normalised source density over flat cell indices.
    pub fn distribution(&self, geometry: &GridGeometry) -> Result<Vec<f64>> {
        self.validate(geometry)?;
        let mut d = vec![0.0; geometry.n_cells()];
        match self {
            SourceSpec::Point { x, y } => d[geometry.cell_index(*x, *y)] = 1.0,
            SourceSpec::Weighted(cells) => {
                let total: f64 = cells.iter().map(|(_, w)| w).sum();
                for &((x, y), w) in cells {
                    d[geometry.cell_index(x, y)] += w / total;
                }
            }
        }
        Ok(d)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DetectorRegion {
    cells: BTreeSet<(usize, usize)>,
}

impl DetectorRegion {
    pub fn new(cells: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let cells: BTreeSet<_> = cells.into_iter().collect();
        if cells.is_empty() {
            return Err(Error::Detector("detector region is empty".into()));
        }
        Ok(Self { cells })
    }

    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.cells.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.cells.contains(&(x, y))
    }

    pub fn validate(&self, geometry: &GridGeometry) -> Result<()> {
        self.cells.iter().try_for_each(|&(x, y)| geometry.check_cell(x, y))
    }
}

/// Geometry, source and detector parsed from one configuration document.
#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    pub geometry: GridGeometry,
    pub source: SourceSpec,
    pub detector: DetectorRegion,
}

/// Bypass layout with the source in the bottom-left arm corner and the
/// detector in the opposite corner.
pub fn bypass_problem(n_x: usize, n_y: usize) -> Result<Problem> {
    let geometry = build_bypass_geometry(n_x, n_y)?;
    let detector = DetectorRegion::new([(geometry.width() - 1, geometry.height() - 1)])?;
    Ok(Problem {
        geometry,
        source: SourceSpec::point(0, 0),
        detector,
    })
}

// ---------------------------------------------------------------------------
// Configuration schema
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub grid: GridConfig,
    pub materials: std::collections::BTreeMap<String, Material>,
    pub layout: LayoutConfig,
    pub source: SourceConfig,
    pub detector: DetectorConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n_x: usize,
    pub n_y: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell_size: Option<f64>,
}

/// Either the named `bypass` preset (materials `arm` and `obstacle`) or an
/// explicit map with one row of material names per `y`, bottom row first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<Vec<Vec<String>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SourceConfig {
    Point { cell: [usize; 2] },
    Weighted { cells: Vec<WeightedCell> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedCell {
    pub cell: [usize; 2],
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorConfig {
    pub cells: Vec<[usize; 2]>,
}

/// Supported config encodings.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConfigFormat {
    Toml,
    Json,
}

impl ConfigFormat {
    pub fn from_path(path: &std::path::Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => ConfigFormat::Json,
            _ => ConfigFormat::Toml,
        }
    }
}

impl GeometryConfig {
    pub fn parse(text: &str, format: ConfigFormat) -> Result<Self> {
        Ok(match format {
            ConfigFormat::Toml => toml::from_str(text)?,
            ConfigFormat::Json => serde_json::from_str(text)?,
        })
    }

    pub fn to_text(&self, format: ConfigFormat) -> Result<String> {
        Ok(match format {
            ConfigFormat::Toml => toml::to_string(self)?,
            ConfigFormat::Json => serde_json::to_string_pretty(self)? + "\n",
        })
    }

    /// Validates and builds the domain objects.
    pub fn build(&self) -> Result<Problem> {
        let GridConfig { n_x, n_y, cell_size } = self.grid;
        let materials: Vec<(String, Material)> = self
            .materials
            .iter()
            .map(|(k, v)| (k.clone(), *v))
            .collect();
        for (name, m) in &materials {
            m.validate(name)?;
        }
        let geometry = match (&self.layout.preset, &self.layout.rows) {
            (Some(preset), None) if preset == "bypass" => {
                for required in [ARM, OBSTACLE] {
                    if !self.materials.contains_key(required) {
                        return Err(Error::Config(format!(
                            "bypass preset requires a material named `{required}`"
                        )));
                    }
                }
                if n_x < 2 || n_y < 2 {
                    return Err(Error::Geometry(format!(
                        "bypass layout needs at least 4x4 cells (n_x = {n_x}, n_y = {n_y})"
                    )));
                }
                let cell_size =
                    cell_size.unwrap_or(BYPASS_DOMAIN_CM / (1usize << n_x.min(24)) as f64);
                let map = bypass_cell_map(n_x, n_y);
                let arm_id = materials.iter().position(|(n, _)| n == ARM).unwrap();
                let obs_id = materials.iter().position(|(n, _)| n == OBSTACLE).unwrap();
                let cells = map
                    .into_iter()
                    .map(|m| if m == 1 { obs_id } else { arm_id })
                    .collect();
                GridGeometry::new(n_x, n_y, cell_size, materials, cells)?
            }
            (Some(preset), None) => {
                return Err(Error::Config(format!("unknown layout preset `{preset}`")))
            }
            (None, Some(rows)) => {
                let (w, h) = (1usize << n_x.min(24), 1usize << n_y.min(24));
                if rows.len() != h {
                    return Err(Error::Geometry(format!(
                        "layout has {} rows, grid needs {h}",
                        rows.len()
                    )));
                }
                let mut cells = Vec::with_capacity(w * h);
                for (y, row) in rows.iter().enumerate() {
                    if row.len() != w {
                        return Err(Error::Geometry(format!(
                            "layout row {y} has {} cells, grid needs {w}",
                            row.len()
                        )));
                    }
                    for (x, name) in row.iter().enumerate() {
                        let id = materials.iter().position(|(n, _)| n == name).ok_or_else(|| {
                            Error::Geometry(format!(
                                "cell ({x}, {y}) refers to undefined material `{name}`"
                            ))
                        })?;
                        cells.push(id);
                    }
                }
                GridGeometry::new(n_x, n_y, cell_size.unwrap_or(1.0), materials, cells)?
            }
            _ => {
                return Err(Error::Config(
                    "layout needs exactly one of `preset` or `rows`".into(),
                ))
            }
        };
        let source = match &self.source {
            SourceConfig::Point { cell } => SourceSpec::point(cell[0], cell[1]),
            SourceConfig::Weighted { cells } => SourceSpec::Weighted(
                cells.iter().map(|c| ((c.cell[0], c.cell[1]), c.weight)).collect(),
            ),
        };
        source.validate(&geometry)?;
        let detector = DetectorRegion::new(self.detector.cells.iter().map(|c| (c[0], c[1])))?;
        detector.validate(&geometry)?;
        Ok(Problem {
            geometry,
            source,
            detector,
        })
    }

    /// Config describing `problem` with an explicit cell map.
    pub fn from_problem(problem: &Problem) -> Self {
        let g = &problem.geometry;
        let rows = (0..g.height())
            .map(|y| {
                (0..g.width())
                    .map(|x| g.material_name(g.cell_material[g.cell_index(x, y)]).to_string())
                    .collect()
            })
            .collect();
        let source = match &problem.source {
            SourceSpec::Point { x, y } => SourceConfig::Point { cell: [*x, *y] },
            SourceSpec::Weighted(cells) => SourceConfig::Weighted {
                cells: cells
                    .iter()
                    .map(|&((x, y), weight)| WeightedCell { cell: [x, y], weight })
                    .collect(),
            },
        };
        GeometryConfig {
            grid: GridConfig {
                n_x: g.n_x,
                n_y: g.n_y,
                cell_size: Some(g.cell_size),
            },
            materials: g.materials().map(|(n, m)| (n.to_string(), *m)).collect(),
            layout: LayoutConfig {
                preset: None,
                rows: Some(rows),
            },
            source,
            detector: DetectorConfig {
                cells: problem.detector.cells().map(|(x, y)| [x, y]).collect(),
            },
        }
    }
}

pub fn load_geometry(text: &str, format: ConfigFormat) -> Result<Problem> {
    GeometryConfig::parse(text, format)?.build()
}

pub fn save_geometry(problem: &Problem, format: ConfigFormat) -> Result<String> {
    GeometryConfig::from_problem(problem).to_text(format)
}
