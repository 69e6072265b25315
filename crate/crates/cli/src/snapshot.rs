//! Field snapshots.
//!
//! Binary layout, all little-endian:
//!
//! | field      | type                    |
//! |------------|-------------------------|
//! | magic      | 4 bytes `PRCF`          |
//! | version    | u32, currently 1        |
//! | dim        | u32                     |
//! | points     | 3 x u32 (1 on unused axes) |
//! | lengths    | 3 x f64 (0 on unused axes) |
//! | time       | f64                     |
//! | ncomp      | u32                     |
//! | names      | ncomp x (u32 byte length, UTF-8 bytes) |
//! | values     | ncomp x N x f64, x fastest, components in name order |
//!
//! The CSV form carries the same header as `# key value` comment lines,
//! followed by a row `index,<names>` and one row per grid point.

use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use proca_core::{GridSpec, ProcaError, ScalarField};

use crate::error::CliError;

const MAGIC: &[u8; 4] = b"PRCF";
const VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnapshotFormat {
    Binary,
    Csv,
}

impl SnapshotFormat {
    pub fn name(self) -> &'static str {
        match self {
            SnapshotFormat::Binary => "binary",
            SnapshotFormat::Csv => "csv",
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            SnapshotFormat::Binary => "bin",
            SnapshotFormat::Csv => "csv",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub dim: usize,
    pub points: [usize; 3],
    pub lengths: [f64; 3],
    pub t: f64,
    pub components: Vec<(String, Vec<f64>)>,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Core(ProcaError::Snapshot(msg.into()))
}

impl Snapshot {
    pub fn new(grid: &GridSpec, t: f64, fields: Vec<(&str, &ScalarField)>) -> Self {
        let mut points = [1; 3];
        let mut lengths = [0.0; 3];
        let dim = grid.dim();
        points[..dim].copy_from_slice(grid.points());
        lengths[..dim].copy_from_slice(grid.lengths());
        Snapshot {
            dim: grid.dim(),
            points,
            lengths,
            t,
            components: fields
                .into_iter()
                .map(|(n, f)| (n.to_string(), f.values().to_vec()))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Component `name` as a field on `grid`, which must match the header.
    pub fn field(&self, name: &str, grid: &GridSpec) -> Result<ScalarField, CliError> {
        let same_shape = grid.dim() == self.dim
            && (0..self.dim).all(|a| {
                grid.points()[a] == self.points[a]
                    && (grid.lengths()[a] - self.lengths[a]).abs() <= 1e-12 * self.lengths[a]
            });
        if !same_shape {
            return Err(bad(format!(
                "snapshot grid {:?} x {:?} does not match the configured grid",
                &self.points[..self.dim],
                &self.lengths[..self.dim]
            )));
        }
        let values = self
            .components
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.clone())
            .ok_or_else(|| bad(format!("snapshot has no component {name}")))?;
        Ok(ScalarField::from_values(grid, values)?)
    }

    pub fn write(&self, path: &Path, format: SnapshotFormat) -> Result<(), CliError> {
        let mut out = io::BufWriter::new(fs::File::create(path)?);
        match format {
            SnapshotFormat::Binary => self.write_binary(&mut out)?,
            SnapshotFormat::Csv => self.write_csv(&mut out)?,
        }
        out.flush()?;
        Ok(())
    }

    fn write_binary(&self, w: &mut impl Write) -> io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(self.dim as u32).to_le_bytes())?;
        for p in self.points {
            w.write_all(&(p as u32).to_le_bytes())?;
        }
        for l in self.lengths {
            w.write_all(&l.to_le_bytes())?;
        }
        w.write_all(&self.t.to_le_bytes())?;
        w.write_all(&(self.components.len() as u32).to_le_bytes())?;
        for (name, _) in &self.components {
            w.write_all(&(name.len() as u32).to_le_bytes())?;
            w.write_all(name.as_bytes())?;
        }
        for (_, values) in &self.components {
            for v in values {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    fn write_csv(&self, w: &mut impl Write) -> io::Result<()> {
        writeln!(w, "# proca-snapshot {VERSION}")?;
        writeln!(w, "# dim {}", self.dim)?;
        writeln!(w, "# points {} {} {}", self.points[0], self.points[1], self.points[2])?;
        writeln!(w, "# lengths {} {} {}", self.lengths[0], self.lengths[1], self.lengths[2])?;
        writeln!(w, "# t {}", self.t)?;
        let names: Vec<&str> = self.components.iter().map(|(n, _)| n.as_str()).collect();
        writeln!(w, "index,{}", names.join(","))?;
        for i in 0..self.len() {
            write!(w, "{i}")?;
            for (_, values) in &self.components {
                write!(w, ",{}", values[i])?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// Reads either format, detected from the leading bytes.
    pub fn read(path: &Path) -> Result<Snapshot, CliError> {
        let bytes = fs::read(path)?;
        if bytes.starts_with(MAGIC) {
            Self::read_binary(&bytes)
        } else {
            Self::read_csv(BufReader::new(bytes.as_slice()))
        }
    }

    fn read_binary(bytes: &[u8]) -> Result<Snapshot, CliError> {
        let mut pos = 4;
        let mut take = |n: usize| -> Result<&[u8], CliError> {
            let s = bytes
                .get(pos..pos + n)
                .ok_or_else(|| bad("truncated snapshot"))?;
            pos += n;
            Ok(s)
        };
        let u32_at = |s: &[u8]| u32::from_le_bytes(s.try_into().expect("4 bytes")) as usize;
        let f64_at = |s: &[u8]| f64::from_le_bytes(s.try_into().expect("8 bytes"));
        let version = u32_at(take(4)?);
        if version != VERSION as usize {
            return Err(bad(format!("unsupported snapshot version {version}")));
        }
        let dim = u32_at(take(4)?);
        let mut points = [0; 3];
        for p in &mut points {
            *p = u32_at(take(4)?);
        }
        let mut lengths = [0.0; 3];
        for l in &mut lengths {
            *l = f64_at(take(8)?);
        }
        let t = f64_at(take(8)?);
        let ncomp = u32_at(take(4)?);
        let mut names = Vec::with_capacity(ncomp);
        for _ in 0..ncomp {
            let len = u32_at(take(4)?);
            let name = std::str::from_utf8(take(len)?)
                .map_err(|_| bad("component name is not UTF-8"))?
                .to_string();
            names.push(name);
        }
        let n: usize = points.iter().product();
        let mut components = Vec::with_capacity(ncomp);
        for name in names {
            let raw = take(8 * n)?;
            components.push((name, raw.chunks_exact(8).map(f64_at).collect()));
        }
        Ok(Snapshot {
            dim,
            points,
            lengths,
            t,
            components,
        })
    }

    fn read_csv(r: impl BufRead) -> Result<Snapshot, CliError> {
        let mut header = std::collections::HashMap::new();
        let mut names: Vec<String> = Vec::new();
        let mut columns: Vec<Vec<f64>> = Vec::new();
        for line in r.lines() {
            let line = line?;
            if let Some(rest) = line.strip_prefix("# ") {
                if let Some((k, v)) = rest.split_once(' ') {
                    header.insert(k.to_string(), v.to_string());
                }
            } else if names.is_empty() {
                names = line.split(',').skip(1).map(str::to_string).collect();
                columns = vec![Vec::new(); names.len()];
            } else if !line.is_empty() {
                for (col, v) in columns.iter_mut().zip(line.split(',').skip(1)) {
                    col.push(v.parse().map_err(|_| bad(format!("bad value {v:?}")))?);
                }
            }
        }
        let get = |k: &str| header.get(k).ok_or_else(|| bad(format!("missing header {k}")));
        let parse3 = |k: &str| -> Result<Vec<f64>, CliError> {
            get(k)?
                .split_whitespace()
                .map(|v| v.parse::<f64>().map_err(|_| bad(format!("bad header {k}"))))
                .collect()
        };
        let p = parse3("points")?;
        let l = parse3("lengths")?;
        if p.len() != 3 || l.len() != 3 {
            return Err(bad("points and lengths need three entries"));
        }
        let snap = Snapshot {
            dim: get("dim")?.parse().map_err(|_| bad("bad header dim"))?,
            points: [p[0] as usize, p[1] as usize, p[2] as usize],
            lengths: [l[0], l[1], l[2]],
            t: get("t")?.parse().map_err(|_| bad("bad header t"))?,
            components: names.into_iter().zip(columns).collect(),
        };
        if snap.components.iter().any(|(_, v)| v.len() != snap.len()) {
            return Err(bad("row count does not match the header"));
        }
        Ok(snap)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proca_core::StencilOrder;

    fn sample() -> (GridSpec, Snapshot) {
        let grid = GridSpec::new(&[8, 10], &[1.0, 2.5], StencilOrder::Second).unwrap();
        let a = ScalarField::from_fn(&grid, |x| x[0].sin() + 0.1 * x[1]);
        let b = ScalarField::from_fn(&grid, |x| 1.0 / 3.0 + x[1] * x[0]);
        let snap = Snapshot::new(&grid, 0.125, vec![("ax", &a), ("dax", &b)]);
        (grid, snap)
    }

    #[test]
    fn round_trips_both_formats() {
        let dir = tempfile::tempdir().unwrap();
        let (grid, snap) = sample();
        for format in [SnapshotFormat::Binary, SnapshotFormat::Csv] {
            let path = dir.path().join(format!("s.{}", format.extension()));
            snap.write(&path, format).unwrap();
            let back = Snapshot::read(&path).unwrap();
            assert_eq!(back, snap);
            assert_eq!(back.field("dax", &grid).unwrap().values(), snap.components[1].1.as_slice());
        }
    }

    #[test]
    fn binary_header_layout() {
        let (_, snap) = sample();
        let mut bytes = Vec::new();
        snap.write_binary(&mut bytes).unwrap();
        assert_eq!(&bytes[..4], b"PRCF");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 2);
        assert_eq!(u32::from_le_bytes(bytes[16..20].try_into().unwrap()), 10);
        assert_eq!(f64::from_le_bytes(bytes[32..40].try_into().unwrap()), 2.5);
        let header = 4 + 4 + 4 + 12 + 24 + 8 + 4 + (4 + 2) + (4 + 3);
        assert_eq!(bytes.len(), header + 2 * 80 * 8);
    }

    #[test]
    fn rejects_mismatch_and_truncation() {
        let (_, snap) = sample();
        let other = GridSpec::new(&[8, 12], &[1.0, 2.5], StencilOrder::Second).unwrap();
        assert!(snap.field("ax", &other).is_err());
        let grid = GridSpec::new(&[8, 10], &[1.0, 2.5], StencilOrder::Second).unwrap();
        assert!(snap.field("phi", &grid).is_err());
        let mut bytes = Vec::new();
        snap.write_binary(&mut bytes).unwrap();
        bytes.truncate(bytes.len() - 3);
        assert!(Snapshot::read_binary(&bytes).is_err());
    }
}
