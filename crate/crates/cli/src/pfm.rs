//! Portable float map reader/writer.
//!
//! Header: "Pf" (1 channel) or "PF" (3 channels), then "<cols> <rows>", then
//! the scale line. We always write "-1.0" (little-endian float32 payload) and
//! accept positive scales (big-endian) on read. Scanlines are stored bottom
//! to top per the format; pixels of a 3-channel file are interleaved RGB,
//! carrying (n1, n2, n3) for normal maps.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use gradshop_core::{NormalMap, SurfaceGrid, NZ_MIN_DEFAULT};

use crate::errors::{CliError, CliResult};

fn read_header_line(reader: &mut impl BufRead, path: &Path) -> CliResult<String> {
    let mut line = String::new();
    let n = reader
        .read_line(&mut line)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    if n == 0 {
        return Err(CliError::usage(format!(
            "{}: truncated PFM header",
            path.display()
        )));
    }
    Ok(line.trim().to_string())
}

struct RawPfm {
    cols: usize,
    rows: usize,
    channels: usize,
    /// Top-to-bottom row-major, channels interleaved.
    data: Vec<f32>,
}

fn read_raw(path: &Path) -> CliResult<RawPfm> {
    let file = File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut reader = BufReader::new(file);

    let magic = read_header_line(&mut reader, path)?;
    let channels = match magic.as_str() {
        "Pf" => 1,
        "PF" => 3,
        other => {
            return Err(CliError::usage(format!(
                "{}: not a PFM file (magic {other:?})",
                path.display()
            )))
        }
    };
    let dims = read_header_line(&mut reader, path)?;
    let parts: Vec<&str> = dims.split_whitespace().collect();
    if parts.len() != 2 {
        return Err(CliError::usage(format!(
            "{}: malformed PFM dimension line {dims:?}",
            path.display()
        )));
    }
    let cols: usize = parts[0]
        .parse()
        .map_err(|_| CliError::usage(format!("{}: bad width {:?}", path.display(), parts[0])))?;
    let rows: usize = parts[1]
        .parse()
        .map_err(|_| CliError::usage(format!("{}: bad height {:?}", path.display(), parts[1])))?;
    if rows == 0 || cols == 0 {
        return Err(CliError::usage(format!(
            "{}: empty image {cols}x{rows}",
            path.display()
        )));
    }
    let scale_line = read_header_line(&mut reader, path)?;
    let scale: f32 = scale_line.parse().map_err(|_| {
        CliError::usage(format!(
            "{}: bad PFM scale line {scale_line:?}",
            path.display()
        ))
    })?;
    let little_endian = scale < 0.0;

    let total = rows * cols * channels;
    let mut buf = vec![0u8; total * 4];
    reader
        .read_exact(&mut buf)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;

    let mut bottom_up = Vec::with_capacity(total);
    for chunk in buf.chunks_exact(4) {
        let bytes = [chunk[0], chunk[1], chunk[2], chunk[3]];
        bottom_up.push(if little_endian {
            f32::from_le_bytes(bytes)
        } else {
            f32::from_be_bytes(bytes)
        });
    }
    // flip to top-to-bottom
    let mut data = vec![0.0f32; total];
    let row_len = cols * channels;
    for r in 0..rows {
        let src = &bottom_up[(rows - 1 - r) * row_len..(rows - r) * row_len];
        data[r * row_len..(r + 1) * row_len].copy_from_slice(src);
    }
    Ok(RawPfm {
        cols,
        rows,
        channels,
        data,
    })
}

fn write_raw(path: &Path, raw: &RawPfm) -> CliResult<()> {
    let file =
        File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    let magic = if raw.channels == 1 { "Pf" } else { "PF" };
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    write!(w, "{magic}\n{} {}\n-1.0\n", raw.cols, raw.rows).map_err(io)?;
    let row_len = raw.cols * raw.channels;
    for r in (0..raw.rows).rev() {
        for v in &raw.data[r * row_len..(r + 1) * row_len] {
            w.write_all(&v.to_le_bytes()).map_err(io)?;
        }
    }
    w.flush().map_err(io)?;
    Ok(())
}

pub fn read_grid(path: &Path) -> CliResult<SurfaceGrid<f64>> {
    let raw = read_raw(path)?;
    if raw.channels != 1 {
        return Err(CliError::usage(format!(
            "{}: expected a 1-channel PFM, found {} channels",
            path.display(),
            raw.channels
        )));
    }
    let values: Vec<f64> = raw.data.iter().map(|&v| v as f64).collect();
    Ok(SurfaceGrid::new(raw.rows, raw.cols, values)?)
}

pub fn write_grid(path: &Path, grid: &SurfaceGrid<f64>) -> CliResult<()> {
    let raw = RawPfm {
        cols: grid.cols(),
        rows: grid.rows(),
        channels: 1,
        data: grid.values().iter().map(|&v| v as f32).collect(),
    };
    write_raw(path, &raw)
}

pub fn read_normals(path: &Path) -> CliResult<NormalMap<f64>> {
    let raw = read_raw(path)?;
    if raw.channels != 3 {
        return Err(CliError::usage(format!(
            "{}: expected a 3-channel PFM, found {} channels",
            path.display(),
            raw.channels
        )));
    }
    let vectors: Vec<[f64; 3]> = raw
        .data
        .chunks_exact(3)
        .map(|c| [c[0] as f64, c[1] as f64, c[2] as f64])
        .collect();
    Ok(NormalMap::new(raw.rows, raw.cols, vectors, NZ_MIN_DEFAULT)?)
}

pub fn write_normals(path: &Path, nmap: &NormalMap<f64>) -> CliResult<()> {
    let (rows, cols) = nmap.dims();
    let mut data = Vec::with_capacity(rows * cols * 3);
    for i in 0..rows {
        for j in 0..cols {
            let n = nmap.normal(i, j);
            data.push(n[0] as f32);
            data.push(n[1] as f32);
            data.push(n[2] as f32);
        }
    }
    write_raw(
        path,
        &RawPfm {
            cols,
            rows,
            channels: 3,
            data,
        },
    )
}
