//! Grid file formats.
//!
//! PFM: ASCII header `Pf` (one channel) or `PF` (three channels), then
//! `width height`, then a scale line whose sign gives the byte order
//! (negative is little-endian), then 32-bit floats stored bottom row first.
//! Values are widened to `f64` on read and narrowed on write; non-finite
//! pixels read back as invalid.
//!
//! CSV: one line per grid row, `.` as decimal separator and `nan` for
//! invalid pixels.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::align::PointMap;
use crate::error::{Error, Result};
use crate::grid::{DepthGrid, GridKind, ValidityMask};

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

struct PfmHeader {
    channels: usize,
    width: usize,
    height: usize,
    little_endian: bool,
}

/// Reads the three header lines. Tokens may be split across lines in any
/// way, as long as the scale ends with a single newline before the data.
fn read_pfm_header<R: BufRead>(reader: &mut R) -> Result<PfmHeader> {
    let mut tokens: Vec<String> = Vec::with_capacity(4);
    let mut line = String::new();
    while tokens.len() < 4 {
        line.clear();
        if reader.read_line(&mut line)? == 0 {
            return Err(parse_err("truncated PFM header"));
        }
        tokens.extend(line.split_whitespace().map(str::to_owned));
    }
    if tokens.len() != 4 {
        return Err(parse_err("malformed PFM header"));
    }
    let channels = match tokens[0].as_str() {
        "Pf" => 1,
        "PF" => 3,
        other => return Err(parse_err(format!("unknown PFM magic `{other}`"))),
    };
    let dim = |s: &str| -> Result<usize> {
        s.parse::<usize>()
            .ok()
            .filter(|&d| d > 0)
            .ok_or_else(|| parse_err(format!("bad PFM dimension `{s}`")))
    };
    let width = dim(&tokens[1])?;
    let height = dim(&tokens[2])?;
    let scale: f64 = tokens[3]
        .parse()
        .map_err(|_| parse_err(format!("bad PFM scale `{}`", tokens[3])))?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(parse_err("PFM scale must be finite and non-zero"));
    }
    Ok(PfmHeader {
        channels,
        width,
        height,
        little_endian: scale < 0.0,
    })
}

/// Decodes the float payload into top-row-first order.
fn read_pfm_payload<R: Read>(reader: &mut R, h: &PfmHeader) -> Result<Vec<f32>> {
    let row_len = h.width * h.channels;
    let mut raw = vec![0u8; row_len * h.height * 4];
    reader
        .read_exact(&mut raw)
        .map_err(|_| parse_err("truncated PFM data"))?;
    let mut out = vec![0f32; row_len * h.height];
    for (file_row, chunk) in raw.chunks_exact(row_len * 4).enumerate() {
        let y = h.height - 1 - file_row;
        for (i, b) in chunk.chunks_exact(4).enumerate() {
            let bytes = [b[0], b[1], b[2], b[3]];
            out[y * row_len + i] = if h.little_endian {
                f32::from_le_bytes(bytes)
            } else {
                f32::from_be_bytes(bytes)
            };
        }
    }
    Ok(out)
}

fn write_pfm_payload<W: Write>(
    w: &mut W,
    magic: &str,
    width: usize,
    height: usize,
    channels: usize,
    top_first: &[f32],
) -> Result<()> {
    write!(w, "{magic}\n{width} {height}\n-1.0\n")?;
    let row_len = width * channels;
    let mut buf = Vec::with_capacity(top_first.len() * 4);
    for y in (0..height).rev() {
        for v in &top_first[y * row_len..(y + 1) * row_len] {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

/// Reads a single-channel PFM. Pixels that are not finite come back invalid.
pub fn read_pfm<R: Read>(reader: R, kind: GridKind) -> Result<(DepthGrid, ValidityMask)> {
    let mut reader = BufReader::new(reader);
    let header = read_pfm_header(&mut reader)?;
    if header.channels != 1 {
        return Err(parse_err("expected single-channel `Pf` file"));
    }
    let data = read_pfm_payload(&mut reader, &header)?;
    let grid = DepthGrid::from_vec(
        header.width,
        header.height,
        data.into_iter().map(f64::from).collect(),
        kind,
    )?;
    let mask = ValidityMask::finite(&grid);
    Ok((grid, mask))
}

/// Writes a single-channel little-endian PFM. Invalid pixels are written as
/// NaN when a mask is given.
pub fn write_pfm<W: Write>(mut w: W, grid: &DepthGrid, mask: Option<&ValidityMask>) -> Result<()> {
    if let Some(m) = mask {
        grid.require_mask(m)?;
    }
    let data: Vec<f32> = grid
        .values()
        .iter()
        .enumerate()
        .map(|(i, &v)| match mask {
            Some(m) if !m.get(i) => f32::NAN,
            _ => v as f32,
        })
        .collect();
    write_pfm_payload(&mut w, "Pf", grid.width(), grid.height(), 1, &data)?;
    w.flush()?;
    Ok(())
}

/// Reads a three-channel `PF` file as an xyz point map.
pub fn read_pfm_pointmap<R: Read>(reader: R) -> Result<(PointMap, ValidityMask)> {
    let mut reader = BufReader::new(reader);
    let header = read_pfm_header(&mut reader)?;
    if header.channels != 3 {
        return Err(parse_err(
            "expected three-channel `PF` file for a point map",
        ));
    }
    let data = read_pfm_payload(&mut reader, &header)?;
    let xyz: Vec<[f64; 3]> = data
        .chunks_exact(3)
        .map(|c| [c[0] as f64, c[1] as f64, c[2] as f64])
        .collect();
    let bits = xyz
        .iter()
        .map(|p| p.iter().all(|v| v.is_finite()))
        .collect();
    let mask = ValidityMask::from_bits(header.width, header.height, bits)?;
    Ok((PointMap::new(header.width, header.height, xyz)?, mask))
}

pub fn write_pfm_pointmap<W: Write>(mut w: W, pm: &PointMap) -> Result<()> {
    let data: Vec<f32> = pm
        .xyz()
        .iter()
        .flat_map(|p| p.iter().map(|&v| v as f32))
        .collect();
    write_pfm_payload(&mut w, "PF", pm.width(), pm.height(), 3, &data)?;
    w.flush()?;
    Ok(())
}

/// Reads a CSV grid; `nan` cells (any case) and blank lines are handled,
/// and all rows must have the same number of cells.
pub fn read_csv_grid<R: Read>(reader: R, kind: GridKind) -> Result<(DepthGrid, ValidityMask)> {
    let reader = BufReader::new(reader);
    let mut width = None;
    let mut values = Vec::new();
    let mut height = 0;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut n = 0;
        for cell in line.split(',') {
            let cell = cell.trim();
            let v = if cell.eq_ignore_ascii_case("nan") {
                f64::NAN
            } else {
                cell.parse::<f64>()
                    .map_err(|_| parse_err(format!("line {}: cannot parse `{cell}`", lineno + 1)))?
            };
            values.push(v);
            n += 1;
        }
        match width {
            None => width = Some(n),
            Some(w) if w != n => {
                return Err(parse_err(format!(
                    "line {}: expected {w} cells, found {n}",
                    lineno + 1
                )))
            }
            _ => {}
        }
        height += 1;
    }
    let width = width.ok_or_else(|| parse_err("empty CSV grid"))?;
    let grid = DepthGrid::from_vec(width, height, values, kind)?;
    let mask = ValidityMask::finite(&grid);
    Ok((grid, mask))
}

pub fn write_csv_grid<W: Write>(
    mut w: W,
    grid: &DepthGrid,
    mask: Option<&ValidityMask>,
) -> Result<()> {
    if let Some(m) = mask {
        grid.require_mask(m)?;
    }
    let width = grid.width();
    let mut out = String::new();
    for (i, &v) in grid.values().iter().enumerate() {
        let valid = mask.is_none_or(|m| m.get(i)) && v.is_finite();
        if valid {
            out.push_str(&format!("{v}"));
        } else {
            out.push_str("nan");
        }
        out.push(if (i + 1) % width == 0 { '\n' } else { ',' });
    }
    w.write_all(out.as_bytes())?;
    w.flush()?;
    Ok(())
}

fn is_pfm(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("pfm"))
}

/// Loads a grid, choosing the format from the extension (`.pfm`, anything
/// else is CSV).
pub fn load_grid(path: impl AsRef<Path>, kind: GridKind) -> Result<(DepthGrid, ValidityMask)> {
    let path = path.as_ref();
    let file = fs::File::open(path)?;
    if is_pfm(path) {
        read_pfm(file, kind)
    } else {
        read_csv_grid(file, kind)
    }
}

pub fn save_grid(
    path: impl AsRef<Path>,
    grid: &DepthGrid,
    mask: Option<&ValidityMask>,
) -> Result<()> {
    let path = path.as_ref();
    let file = std::io::BufWriter::new(fs::File::create(path)?);
    if is_pfm(path) {
        write_pfm(file, grid, mask)
    } else {
        write_csv_grid(file, grid, mask)
    }
}

/// Loads a mask file: any finite non-zero pixel is valid.
pub fn load_mask(path: impl AsRef<Path>) -> Result<ValidityMask> {
    let (grid, finite) = load_grid(path, GridKind::Generic)?;
    let bits = grid
        .values()
        .iter()
        .zip(finite.bits())
        .map(|(&v, &ok)| ok && v != 0.0)
        .collect();
    ValidityMask::from_bits(grid.width(), grid.height(), bits)
}

pub fn load_pointmap(path: impl AsRef<Path>) -> Result<(PointMap, ValidityMask)> {
    read_pfm_pointmap(fs::File::open(path)?)
}
