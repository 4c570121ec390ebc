//! Partially observed curves, datasets, and the long-format CSV exchange.
//!
//! The CSV layout is one row per observed `(curve, t)` pair:
//!
//! ```text
//! curve_id,group,t,value
//! c1,A,3.0,1.25
//! ```
//!
//! An absent row, or a row with an empty `value`, marks the point as
//! unobserved for that curve. The grid is the sorted union of every `t` in
//! the file, rescaled affinely onto `[0, 1]`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Sentinel stored in `values` where a curve is unobserved.
pub const MISSING: f64 = f64::NAN;

/// Group label used when none is given.
pub const DEFAULT_GROUP: &str = "0";

/// One curve observed on a subset of the grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartialCurve {
    pub id: String,
    pub group: String,
    values: Vec<f64>,
    mask: Vec<bool>,
}

impl PartialCurve {
    /// Builds a curve; values under a zero mask are replaced by the sentinel.
    pub fn new(id: impl Into<String>, group: impl Into<String>, values: Vec<f64>, mask: Vec<bool>) -> Result<Self> {
        let id = id.into();
        if values.len() != mask.len() {
            return Err(Error::InvalidDataset(format!(
                "curve {id}: {} values but {} mask entries",
                values.len(),
                mask.len()
            )));
        }
        if !mask.iter().any(|&m| m) {
            return Err(Error::InvalidDataset(format!("curve {id} is observed nowhere")));
        }
        let values = values
            .into_iter()
            .zip(&mask)
            .map(|(v, &m)| if m { v } else { MISSING })
            .collect();
        let mut group = group.into();
        if group.is_empty() {
            group = DEFAULT_GROUP.to_string();
        }
        Ok(Self { id, group, values, mask })
    }

    /// Fully observed curve.
    pub fn complete(id: impl Into<String>, group: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        let mask = vec![true; values.len()];
        Self::new(id, group, values, mask)
    }

    pub fn len(&self) -> usize {
        self.mask.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mask.is_empty()
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Raw values, with the sentinel at unobserved points.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at `j` when observed.
    pub fn get(&self, j: usize) -> Option<f64> {
        self.mask[j].then(|| self.values[j])
    }

    pub fn observed_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Same curve with every observed value transformed by `f(j, value)`.
    pub fn map_values<F: Fn(usize, f64) -> f64>(&self, f: F) -> Self {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(j, &v)| if self.mask[j] { f(j, v) } else { MISSING })
            .collect();
        Self {
            id: self.id.clone(),
            group: self.group.clone(),
            values,
            mask: self.mask.clone(),
        }
    }

    /// Bitwise equality of ids, groups, masks and observed values.
    pub fn same_as(&self, other: &Self) -> bool {
        self.id == other.id
            && self.group == other.group
            && self.mask == other.mask
            && self
                .values
                .iter()
                .zip(&other.values)
                .zip(&self.mask)
                .all(|((a, b), &m)| !m || a.to_bits() == b.to_bits())
    }
}

/// Curves sharing one grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Dataset {
    grid: Grid,
    curves: Vec<PartialCurve>,
}

impl Dataset {
    pub fn new(grid: Grid, curves: Vec<PartialCurve>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(curves.len());
        for c in &curves {
            if c.len() != grid.len() {
                return Err(Error::InvalidDataset(format!(
                    "curve {} has {} points, grid has {}",
                    c.id,
                    c.len(),
                    grid.len()
                )));
            }
            if !seen.insert(c.id.as_str()) {
                return Err(Error::InvalidDataset(format!("duplicate curve id {}", c.id)));
            }
        }
        Ok(Self { grid, curves })
    }

    /// Dataset from value rows and matching masks; ids are `c0, c1, ...`.
    pub fn from_rows(grid: Grid, values: Vec<Vec<f64>>, masks: Vec<Vec<bool>>) -> Result<Self> {
        if values.len() != masks.len() {
            return Err(Error::InvalidDataset("values and masks differ in length".into()));
        }
        let curves = values
            .into_iter()
            .zip(masks)
            .enumerate()
            .map(|(i, (v, m))| PartialCurve::new(format!("c{i}"), DEFAULT_GROUP, v, m))
            .collect::<Result<Vec<_>>>()?;
        Self::new(grid, curves)
    }

    /// Builds a dataset without re-checking id uniqueness; used for
    /// bootstrap resamples, where curves repeat by construction.
    pub(crate) fn from_resample(grid: Grid, curves: Vec<PartialCurve>) -> Self {
        Self { grid, curves }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn curves(&self) -> &[PartialCurve] {
        &self.curves
    }

    pub fn n_curves(&self) -> usize {
        self.curves.len()
    }

    /// Number of curves observed at grid point `j`.
    pub fn n_observed(&self, j: usize) -> usize {
        self.curves.iter().filter(|c| c.mask[j]).count()
    }

    /// Observed values at grid point `j`.
    pub fn observed_at(&self, j: usize) -> Vec<f64> {
        self.curves.iter().filter_map(|c| c.get(j)).collect()
    }

    /// Mask matrix, one row per curve.
    pub fn masks(&self) -> Vec<Vec<bool>> {
        self.curves.iter().map(|c| c.mask.clone()).collect()
    }

    /// Group labels in sorted order.
    pub fn groups(&self) -> Vec<String> {
        let mut g: Vec<String> = self.curves.iter().map(|c| c.group.clone()).collect();
        g.sort();
        g.dedup();
        g
    }

    /// Splits into one dataset per group label, sorted by label.
    pub fn split_by_group(&self) -> Vec<(String, Dataset)> {
        let mut by: BTreeMap<&str, Vec<PartialCurve>> = BTreeMap::new();
        for c in &self.curves {
            by.entry(c.group.as_str()).or_default().push(c.clone());
        }
        by.into_iter()
            .map(|(g, curves)| {
                (
                    g.to_string(),
                    Dataset {
                        grid: self.grid.clone(),
                        curves,
                    },
                )
            })
            .collect()
    }

    /// Same dataset with every observed value transformed by `f(j, value)`.
    pub fn map_values<F: Fn(usize, f64) -> f64>(&self, f: F) -> Self {
        Self {
            grid: self.grid.clone(),
            curves: self.curves.iter().map(|c| c.map_values(&f)).collect(),
        }
    }

    /// Same dataset with every curve relabelled into `group`.
    pub fn with_group(mut self, group: &str) -> Self {
        for c in &mut self.curves {
            c.group = group.to_string();
        }
        self
    }

    /// Concatenates datasets on a common grid.
    pub fn concat(parts: &[Dataset]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidDataset("nothing to concatenate".into()))?;
        let mut curves = Vec::new();
        for p in parts {
            if p.grid != first.grid {
                return Err(Error::InvalidDataset("datasets live on different grids".into()));
            }
            curves.extend(p.curves.iter().cloned());
        }
        Self::new(first.grid.clone(), curves)
    }

    /// Checks that every observed value is finite.
    pub fn check_finite(&self) -> Result<()> {
        for c in &self.curves {
            for j in 0..c.len() {
                if let Some(v) = c.get(j) {
                    if !v.is_finite() {
                        return Err(Error::NonFinite {
                            index: j,
                            t: self.grid.points()[j],
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Column layout options for [`load_csv_with`].
#[derive(Debug, Clone)]
pub struct CsvOptions {
    /// Header name of the column holding group labels.
    pub group_column: String,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            group_column: "group".into(),
        }
    }
}

/// Reads a dataset in the `curve_id,group,t,value` long format.
pub fn load_csv(path: &Path) -> Result<Dataset> {
    load_csv_with(path, &CsvOptions::default())
}

pub fn load_csv_with(path: &Path, opts: &CsvOptions) -> Result<Dataset> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_csv(&text, opts)
}

struct Row {
    curve: usize,
    t: f64,
    value: Option<f64>,
}

/// Parses CSV text in the long format.
pub fn parse_csv(text: &str, opts: &CsvOptions) -> Result<Dataset> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "empty file".into(),
    })?;
    let cols: Vec<&str> = header.trim_start_matches('\u{feff}').split(',').map(str::trim).collect();
    let find = |name: &str| {
        cols.iter().position(|c| *c == name).ok_or_else(|| Error::Parse {
            line: 1,
            message: format!("header must contain `{name}` (expected curve_id,group,t,value)"),
        })
    };
    let id_col = find("curve_id")?;
    let group_col = find(&opts.group_column)?;
    let t_col = find("t")?;
    let value_col = find("value")?;

    let mut ids: Vec<String> = Vec::new();
    let mut groups: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut rows = Vec::new();
    let mut pairs: HashSet<(usize, u64)> = HashSet::new();

    for (ln, line) in lines {
        let line_no = ln + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != cols.len() {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected {} fields, found {}", cols.len(), fields.len()),
            });
        }
        let id = fields[id_col];
        if id.is_empty() {
            return Err(Error::Parse {
                line: line_no,
                message: "empty curve_id".into(),
            });
        }
        let group = match fields[group_col] {
            "" => DEFAULT_GROUP,
            g => g,
        };
        let t: f64 = fields[t_col].parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("non-numeric t `{}`", fields[t_col]),
        })?;
        if !t.is_finite() {
            return Err(Error::Parse {
                line: line_no,
                message: format!("non-finite t `{}`", fields[t_col]),
            });
        }
        let value = match fields[value_col] {
            "" => None,
            s => s.parse::<f64>().ok().filter(|v| v.is_finite()),
        };
        let curve = match index.get(id) {
            Some(&i) => {
                if groups[i] != group {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("curve {id} changes group from {} to {group}", groups[i]),
                    });
                }
                i
            }
            None => {
                index.insert(id.to_string(), ids.len());
                ids.push(id.to_string());
                groups.push(group.to_string());
                ids.len() - 1
            }
        };
        // -0.0 and 0.0 are the same grid point
        let key = (t + 0.0).to_bits();
        if !pairs.insert((curve, key)) {
            return Err(Error::Parse {
                line: line_no,
                message: format!("duplicate row for curve {id} at t = {t}"),
            });
        }
        rows.push(Row { curve, t, value });
    }

    let mut ts: Vec<f64> = rows.iter().map(|r| r.t + 0.0).collect();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    if ts.len() < 2 {
        return Err(Error::Parse {
            line: 1,
            message: format!("need at least 2 distinct t values, found {}", ts.len()),
        });
    }
    let grid = Grid::from_source(&ts)?;
    let slot: HashMap<u64, usize> = ts.iter().enumerate().map(|(j, t)| (t.to_bits(), j)).collect();

    let m = ts.len();
    let mut values = vec![vec![MISSING; m]; ids.len()];
    let mut masks = vec![vec![false; m]; ids.len()];
    for r in rows {
        if let Some(v) = r.value {
            let j = slot[&(r.t + 0.0).to_bits()];
            values[r.curve][j] = v;
            masks[r.curve][j] = true;
        }
    }
    let mut curves = Vec::with_capacity(ids.len());
    for ((id, group), (v, mk)) in ids.into_iter().zip(groups).zip(values.into_iter().zip(masks)) {
        if !mk.iter().any(|&b| b) {
            return Err(Error::InvalidDataset(format!("curve {id} has no observed value")));
        }
        curves.push(PartialCurve::new(id, group, v, mk)?);
    }
    Dataset::new(grid, curves)
}

/// Formats `x` with 12 significant digits, C `%.12g` style.
pub fn format_sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.11e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{:.*}", decimals, x);
        trim_zeros(&s)
    } else {
        format!("{}e{}", trim_zeros(mantissa), exp)
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// Serializes a dataset in the long format.
///
/// Observed points emit one row each. A grid point observed by no curve
/// emits a single empty-value row so the grid survives a reload.
pub fn to_csv_string(dataset: &Dataset) -> String {
    let grid = dataset.grid();
    let src = grid.source_points();
    let mut out = String::from("curve_id,group,t,value\n");
    let mut covered = vec![false; grid.len()];
    for c in dataset.curves() {
        for (j, cov) in covered.iter_mut().enumerate() {
            if let Some(v) = c.get(j) {
                *cov = true;
                let _ = writeln!(out, "{},{},{},{}", c.id, c.group, format_sig12(src[j]), format_sig12(v));
            }
        }
    }
    if let Some(first) = dataset.curves().first() {
        for (j, _) in covered.iter().enumerate().filter(|(_, c)| !**c) {
            let _ = writeln!(out, "{},{},{},", first.id, first.group, format_sig12(src[j]));
        }
    }
    out
}

pub fn save_csv(dataset: &Dataset, path: &Path) -> Result<()> {
    fs::write(path, to_csv_string(dataset)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
