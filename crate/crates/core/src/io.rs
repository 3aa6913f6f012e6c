//! Binary and CSV serialization.
//!
//! Binary layouts are little-endian throughout:
//!
//! * grid function: `"FLGF"`, version `u32`, dim `u32`, levels `u32`,
//!   extent `f64`, then the `N^dim` samples as `f64`;
//! * half-space field: `"FLHF"`, version, the grid header, `K` (`u32`, index
//!   of the last height), `K + 1` heights, then the slices in height order;
//! * Lipschitz graph: `"FLLG"`, version, `M` (`f64`), smoothness class
//!   (`u32`), then an embedded grid-function record for `φ`.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::extension::HalfSpaceField;
use crate::fractal::{BoxDimension, PointSet};
use crate::grid::{Grid, GridFunction};
use crate::lipschitz::LipschitzGraph;

pub const FORMAT_VERSION: u32 = 1;

fn format_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Format(msg.into()))
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

fn read_f64s(r: &mut impl Read, n: usize) -> Result<Vec<f64>> {
    let mut buf = vec![0u8; n * 8];
    r.read_exact(&mut buf)?;
    Ok(buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

fn write_f64s(w: &mut impl Write, v: &[f64]) -> Result<()> {
    for x in v {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

fn expect_magic(r: &mut impl Read, magic: &[u8; 4]) -> Result<()> {
    let mut m = [0u8; 4];
    r.read_exact(&mut m)?;
    if &m != magic {
        return format_err(format!(
            "bad magic {:?}, expected {:?}",
            String::from_utf8_lossy(&m),
            String::from_utf8_lossy(magic)
        ));
    }
    let v = read_u32(r)?;
    if v != FORMAT_VERSION {
        return format_err(format!("unsupported version {v}"));
    }
    Ok(())
}

fn write_grid_header(w: &mut impl Write, g: &Grid) -> Result<()> {
    w.write_all(&(g.dim() as u32).to_le_bytes())?;
    w.write_all(&g.levels().to_le_bytes())?;
    w.write_all(&g.extent().to_le_bytes())?;
    Ok(())
}

fn read_grid_header(r: &mut impl Read) -> Result<Grid> {
    let dim = read_u32(r)?;
    let levels = read_u32(r)?;
    let extent = read_f64(r)?;
    Grid::new(dim as usize, levels, extent).map_err(|e| Error::Format(format!("invalid grid header: {e}")))
}

pub fn write_grid_function(w: &mut impl Write, f: &GridFunction) -> Result<()> {
    w.write_all(b"FLGF")?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    write_grid_header(w, f.grid())?;
    write_f64s(w, f.samples())
}

pub fn read_grid_function(r: &mut impl Read) -> Result<GridFunction> {
    expect_magic(r, b"FLGF")?;
    let g = read_grid_header(r)?;
    let s = read_f64s(r, g.len())?;
    GridFunction::new(g, s)
}

pub fn write_field(w: &mut impl Write, u: &HalfSpaceField) -> Result<()> {
    w.write_all(b"FLHF")?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    write_grid_header(w, u.grid())?;
    w.write_all(&((u.heights().len() - 1) as u32).to_le_bytes())?;
    write_f64s(w, u.heights())?;
    write_f64s(w, u.values())
}

/// Reads a half-space field; the field kind is not stored.
pub fn read_field(r: &mut impl Read) -> Result<HalfSpaceField> {
    expect_magic(r, b"FLHF")?;
    let g = read_grid_header(r)?;
    let k = read_u32(r)? as usize;
    if k > 4096 {
        return format_err(format!("implausible height count {}", k + 1));
    }
    let heights = read_f64s(r, k + 1)?;
    let values = read_f64s(r, (k + 1) * g.len())?;
    HalfSpaceField::new(g, heights, values)
}

pub fn write_graph(w: &mut impl Write, lg: &LipschitzGraph) -> Result<()> {
    w.write_all(b"FLLG")?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&lg.lipschitz_constant().to_le_bytes())?;
    w.write_all(&lg.smooth_class().to_le_bytes())?;
    write_grid_function(w, lg.phi())
}

/// Reads a Lipschitz graph, re-certifying the stored constant.
pub fn read_graph(r: &mut impl Read) -> Result<LipschitzGraph> {
    expect_magic(r, b"FLLG")?;
    let m = read_f64(r)?;
    let k = read_u32(r)?;
    let phi = read_grid_function(r)?;
    LipschitzGraph::with_constant(phi, m, k)
}

/// CSV with header `i,x,value` (1D) or `i,j,x,y,value` (2D).
pub fn write_grid_csv(w: &mut impl Write, f: &GridFunction) -> Result<()> {
    let g = f.grid();
    if g.dim() == 1 {
        writeln!(w, "i,x,value")?;
    } else {
        writeln!(w, "i,j,x,y,value")?;
    }
    for (idx, v) in f.samples().iter().enumerate() {
        let ij = g.unflatten(idx);
        let x = g.coords(idx);
        if g.dim() == 1 {
            writeln!(w, "{},{},{}", ij[0], x[0], v)?;
        } else {
            writeln!(w, "{},{},{},{},{}", ij[0], ij[1], x[0], x[1], v)?;
        }
    }
    Ok(())
}

/// Reads the CSV layout of [`write_grid_csv`] onto `grid`.
pub fn read_grid_csv(r: impl BufRead, grid: Grid) -> Result<GridFunction> {
    let mut lines = r.lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    let cols = if grid.dim() == 1 { 3 } else { 5 };
    if header.split(',').count() != cols {
        return format_err(format!("unexpected CSV header {header:?}"));
    }
    let mut s = vec![f64::NAN; grid.len()];
    for (ln, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != cols {
            return format_err(format!("line {}: expected {cols} fields", ln + 2));
        }
        let parse_idx = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|e| Error::Format(format!("line {}: {e}", ln + 2)))
        };
        let ij = if grid.dim() == 1 {
            [parse_idx(parts[0])?, 0]
        } else {
            [parse_idx(parts[0])?, parse_idx(parts[1])?]
        };
        if ij[0] >= grid.n() || ij[1] >= grid.n() {
            return format_err(format!("line {}: index out of range", ln + 2));
        }
        let v: f64 = parts[cols - 1]
            .trim()
            .parse()
            .map_err(|e| Error::Format(format!("line {}: {e}", ln + 2)))?;
        s[grid.flatten(ij)] = v;
    }
    if let Some(i) = s.iter().position(|v| v.is_nan()) {
        return format_err(format!("sample {i} missing from CSV"));
    }
    GridFunction::new(grid, s)
}

/// One coordinate tuple per line.
pub fn write_point_set(w: &mut impl Write, set: &PointSet) -> Result<()> {
    for p in &set.points {
        if set.grid.dim() == 1 {
            writeln!(w, "{}", p[0])?;
        } else {
            writeln!(w, "{},{}", p[0], p[1])?;
        }
    }
    Ok(())
}

pub fn read_point_set(r: impl BufRead, grid: Grid) -> Result<PointSet> {
    let mut pts = Vec::new();
    for (ln, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let v: Vec<f64> = line
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Format(format!("line {}: {e}", ln + 1)))?;
        if v.len() != grid.dim() {
            return format_err(format!("line {}: expected {} coordinates", ln + 1, grid.dim()));
        }
        pts.push([v[0], v.get(1).copied().unwrap_or(0.0)]);
    }
    PointSet::new(grid, pts)
}

/// Rows `scale,count` with `scale = L 2^{-m}`.
pub fn write_box_counts(w: &mut impl Write, grid: &Grid, d: &BoxDimension) -> Result<()> {
    writeln!(w, "scale,count")?;
    for &(m, c) in &d.counts {
        writeln!(w, "{},{}", grid.extent() / 2f64.powi(m as i32), c)?;
    }
    Ok(())
}

fn with_path<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Io(io) => Error::Io(io::Error::new(io.kind(), format!("{}: {io}", path.display()))),
        Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Saves to `path`, as CSV when the extension is `.csv` and binary otherwise.
pub fn save_grid_function(path: &Path, f: &GridFunction) -> Result<()> {
    with_path(path, (|| {
        let mut w = BufWriter::new(File::create(path)?);
        if path.extension().is_some_and(|e| e == "csv") {
            write_grid_csv(&mut w, f)?;
        } else {
            write_grid_function(&mut w, f)?;
        }
        w.flush()?;
        Ok(())
    })())
}

/// Loads a binary grid function. CSV input needs the grid, see
/// [`load_grid_function_as`].
pub fn load_grid_function(path: &Path) -> Result<GridFunction> {
    with_path(path, (|| read_grid_function(&mut BufReader::new(File::open(path)?)))())
}

/// Loads binary or CSV (by extension) input; CSV is placed on `grid`.
pub fn load_grid_function_as(path: &Path, grid: Grid) -> Result<GridFunction> {
    if path.extension().is_some_and(|e| e == "csv") {
        with_path(path, (|| read_grid_csv(BufReader::new(File::open(path)?), grid))())
    } else {
        load_grid_function(path)
    }
}

pub fn save_field(path: &Path, u: &HalfSpaceField) -> Result<()> {
    with_path(path, (|| {
        let mut w = BufWriter::new(File::create(path)?);
        write_field(&mut w, u)?;
        w.flush()?;
        Ok(())
    })())
}

pub fn load_field(path: &Path) -> Result<HalfSpaceField> {
    with_path(path, (|| read_field(&mut BufReader::new(File::open(path)?)))())
}

pub fn save_graph(path: &Path, lg: &LipschitzGraph) -> Result<()> {
    with_path(path, (|| {
        let mut w = BufWriter::new(File::create(path)?);
        write_graph(&mut w, lg)?;
        w.flush()?;
        Ok(())
    })())
}

pub fn load_graph(path: &Path) -> Result<LipschitzGraph> {
    with_path(path, (|| read_graph(&mut BufReader::new(File::open(path)?)))())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extension::{dyadic_heights, poisson_extend};
    use crate::grid::make_grid;
    use crate::lipschitz::tent_profile;

    #[test]
    fn binary_round_trips() {
        let g = make_grid(2, 4, 2.0).unwrap();
        let f = GridFunction::from_fn(g, |x| x[0] - 3.0 * x[1]).unwrap();
        let mut buf = Vec::new();
        write_grid_function(&mut buf, &f).unwrap();
        assert_eq!(&buf[..4], b"FLGF");
        assert_eq!(buf.len(), 4 + 4 + 4 + 4 + 8 + 8 * 256);
        assert_eq!(read_grid_function(&mut buf.as_slice()).unwrap(), f);

        let u = poisson_extend(&f, &dyadic_heights(1.0, 3)).unwrap();
        let mut buf = Vec::new();
        write_field(&mut buf, &u).unwrap();
        let v = read_field(&mut buf.as_slice()).unwrap();
        assert_eq!(v.values(), u.values());
        assert_eq!(v.heights(), u.heights());

        let g1 = make_grid(1, 6, 1.0).unwrap();
        let lg = LipschitzGraph::new(tent_profile(&g1, 2.0), 1);
        let mut buf = Vec::new();
        write_graph(&mut buf, &lg).unwrap();
        assert_eq!(read_graph(&mut buf.as_slice()).unwrap(), lg);
    }

    #[test]
    fn rejects_corrupt_input() {
        let g = make_grid(1, 3, 1.0).unwrap();
        let mut buf = Vec::new();
        write_grid_function(&mut buf, &GridFunction::zeros(g)).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(read_grid_function(&mut bad.as_slice()), Err(Error::Format(_))));
        let short = &buf[..buf.len() - 3];
        assert!(read_grid_function(&mut &short[..]).is_err());
        assert!(read_field(&mut buf.as_slice()).is_err());
    }

    #[test]
    fn csv_round_trip() {
        for dim in [1, 2] {
            let g = make_grid(dim, 3, 1.0).unwrap();
            let f = GridFunction::from_fn(g, |x| x.iter().sum::<f64>().sin()).unwrap();
            let mut buf = Vec::new();
            write_grid_csv(&mut buf, &f).unwrap();
            let back = read_grid_csv(buf.as_slice(), g).unwrap();
            assert_eq!(back, f);
        }
        let g = make_grid(1, 3, 1.0).unwrap();
        assert!(read_grid_csv("i,x,value\n0,0,1\n".as_bytes(), g).is_err());
    }

    #[test]
    fn point_set_and_counts() {
        let g = make_grid(2, 5, 1.0).unwrap();
        let set = PointSet::new(g, vec![[0.1, 0.2], [0.5, 0.75]]).unwrap();
        let mut buf = Vec::new();
        write_point_set(&mut buf, &set).unwrap();
        assert_eq!(read_point_set(buf.as_slice(), g).unwrap(), set);
        let d = crate::fractal::box_dimension(&set, (1, 3)).unwrap();
        let mut out = Vec::new();
        write_box_counts(&mut out, &g, &d).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("scale,count\n0.5,2\n"));
    }

    #[test]
    fn files_carry_path_context() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("missing.flgf");
        let e = load_grid_function(&p).unwrap_err().to_string();
        assert!(e.contains("missing.flgf"));
        let g = make_grid(1, 4, 1.0).unwrap();
        let f = GridFunction::from_fn(g, |x| x[0]).unwrap();
        let csv = dir.path().join("f.csv");
        save_grid_function(&csv, &f).unwrap();
        assert_eq!(load_grid_function_as(&csv, g).unwrap(), f);
        let bin = dir.path().join("f.flgf");
        save_grid_function(&bin, &f).unwrap();
        assert_eq!(load_grid_function(&bin).unwrap(), f);
    }
}
