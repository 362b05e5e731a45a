//! Reading and writing data files.
//!
//! * CSV matrices: one sample per row, comma separated; lines starting with
//!   `#` are ignored. Rows are transposed into columns on load.
//! * BIN matrices: ASCII `ASCM`, `u32` version 1, `u64` rows, `u64` cols, then
//!   `rows * cols` little-endian `f64` values in column-major order.
//! * Label files: one integer per line, `-1` for unlabeled.
//! * IDX image files (big-endian, magic `0x00000803`) and directories of
//!   binary PGM (`P5`) images. Pixels are scaled to `[0, 1]`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use byteorder::{BigEndian, LittleEndian, ReadBytesExt, WriteBytesExt};
use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::augment::ImageGeometry;
use crate::error::{Error, Result};
use crate::model::DataMatrix;

const BIN_MAGIC: &[u8; 4] = b"ASCM";
const BIN_VERSION: u32 = 1;
const IDX_IMAGES: u32 = 0x0000_0803;
const IDX_LABELS: u32 = 0x0000_0801;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    Csv,
    Bin,
}

impl MatrixFormat {
    /// Guesses the format from the file extension (`.bin` or anything else as CSV).
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("bin") => MatrixFormat::Bin,
            _ => MatrixFormat::Csv,
        }
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

/// Reads a raw `d x n` matrix without the shape checks of [`DataMatrix`].
pub fn read_matrix(path: &Path, format: MatrixFormat) -> Result<DMatrix<f64>> {
    match format {
        MatrixFormat::Csv => read_csv(path),
        MatrixFormat::Bin => read_bin(path),
    }
}

pub fn load_matrix(path: &Path, format: MatrixFormat) -> Result<DataMatrix> {
    DataMatrix::new(read_matrix(path, format)?)
}

fn read_csv(path: &Path) -> Result<DMatrix<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(open(path)?);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::parse(path, format!("line {line}"), e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let mut row = Vec::with_capacity(record.len());
        for (field, text) in record.iter().enumerate() {
            let loc = || format!("line {line}, field {}", field + 1);
            let v: f64 = text.parse().map_err(|_| Error::parse(path, loc(), format!("not a number: {text:?}")))?;
            if !v.is_finite() {
                return Err(Error::NonFinite { path: path.into(), location: loc() });
            }
            row.push(v);
        }
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::parse(
                    path,
                    format!("line {line}"),
                    format!("expected {} fields, found {}", first.len(), row.len()),
                ));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::parse(path, "end of file", "no data rows"));
    }
    let d = rows[0].len();
    Ok(DMatrix::from_fn(d, rows.len(), |i, j| rows[j][i]))
}

fn read_bin(path: &Path) -> Result<DMatrix<f64>> {
    let mut r = open(path)?;
    let truncated = |e: std::io::Error| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            Error::Truncated { path: path.into() }
        } else {
            Error::io(path, e)
        }
    };
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(truncated)?;
    if &magic != BIN_MAGIC {
        return Err(Error::MagicMismatch { path: path.into(), found: u32::from_be_bytes(magic) });
    }
    let version = r.read_u32::<LittleEndian>().map_err(truncated)?;
    if version != BIN_VERSION {
        return Err(Error::parse(path, "offset 4", format!("unsupported version {version}")));
    }
    let rows = r.read_u64::<LittleEndian>().map_err(truncated)? as usize;
    let cols = r.read_u64::<LittleEndian>().map_err(truncated)? as usize;
    let count = rows.checked_mul(cols).ok_or_else(|| Error::parse(path, "offset 8", "matrix too large"))?;
    let mut data = vec![0.0f64; count];
    r.read_f64_into::<LittleEndian>(&mut data).map_err(truncated)?;
    if let Some(k) = data.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { path: path.into(), location: format!("entry ({}, {})", k % rows, k / rows) });
    }
    Ok(DMatrix::from_vec(rows, cols, data))
}

pub fn write_matrix(path: &Path, m: &DMatrix<f64>, format: MatrixFormat) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    match format {
        MatrixFormat::Csv => {
            for col in m.column_iter() {
                let line: Vec<String> = col.iter().map(|v| format!("{v:?}")).collect();
                writeln!(w, "{}", line.join(",")).map_err(io)?;
            }
        }
        MatrixFormat::Bin => {
            w.write_all(BIN_MAGIC).map_err(io)?;
            w.write_u32::<LittleEndian>(BIN_VERSION).map_err(io)?;
            w.write_u64::<LittleEndian>(m.nrows() as u64).map_err(io)?;
            w.write_u64::<LittleEndian>(m.ncols() as u64).map_err(io)?;
            for &v in m.iter() {
                w.write_f64::<LittleEndian>(v).map_err(io)?;
            }
        }
    }
    w.flush().map_err(io)
}

/// Reads one label per line; `-1` means unlabeled. With `p` given, values
/// must be below `p`.
pub fn load_labels(path: &Path, p: Option<usize>) -> Result<Vec<Option<usize>>> {
    let mut text = String::new();
    open(path)?.read_to_string(&mut text).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let loc = || format!("line {}", k + 1);
        let v: i64 = line.parse().map_err(|_| Error::parse(path, loc(), format!("not an integer: {line:?}")))?;
        match v {
            -1 => out.push(None),
            v if v >= 0 => {
                if let Some(p) = p {
                    if v as usize >= p {
                        return Err(Error::parse(path, loc(), format!("label {v} out of range for {p} clusters")));
                    }
                }
                out.push(Some(v as usize));
            }
            _ => return Err(Error::parse(path, loc(), format!("negative label {v}"))),
        }
    }
    if out.is_empty() {
        return Err(Error::parse(path, "end of file", "no labels"));
    }
    Ok(out)
}

pub fn write_labels(path: &Path, labels: &[Option<usize>]) -> Result<()> {
    let mut w = create(path)?;
    for l in labels {
        match l {
            Some(v) => writeln!(w, "{v}"),
            None => writeln!(w, "-1"),
        }
        .map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_idx_header(path: &Path, r: &mut impl Read, expected: u32) -> Result<Vec<usize>> {
    let magic = r.read_u32::<BigEndian>().map_err(|_| Error::Truncated { path: path.into() })?;
    if magic != expected {
        return Err(Error::MagicMismatch { path: path.into(), found: magic });
    }
    let ndims = (magic & 0xff) as usize;
    (0..ndims)
        .map(|_| r.read_u32::<BigEndian>().map(|v| v as usize).map_err(|_| Error::Truncated { path: path.into() }))
        .collect()
}

/// Loads an IDX image file; each image becomes one row-major column.
pub fn load_idx(path: &Path) -> Result<(DataMatrix, ImageGeometry)> {
    let mut r = open(path)?;
    let dims = read_idx_header(path, &mut r, IDX_IMAGES)?;
    let (n, h, w) = (dims[0], dims[1], dims[2]);
    let geom = ImageGeometry::new(h, w)?;
    let mut bytes = vec![0u8; n * h * w];
    r.read_exact(&mut bytes).map_err(|_| Error::Truncated { path: path.into() })?;
    let m = DMatrix::from_fn(h * w, n, |i, j| bytes[j * h * w + i] as f64 / 255.0);
    Ok((DataMatrix::new(m)?, geom))
}

/// Loads an IDX label file (magic `0x00000801`).
pub fn load_idx_labels(path: &Path) -> Result<Vec<usize>> {
    let mut r = open(path)?;
    let dims = read_idx_header(path, &mut r, IDX_LABELS)?;
    let mut bytes = vec![0u8; dims[0]];
    r.read_exact(&mut bytes).map_err(|_| Error::Truncated { path: path.into() })?;
    Ok(bytes.into_iter().map(usize::from).collect())
}

/// A decoded grayscale image with values in `[0, 1]`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Gray {
    pub height: usize,
    pub width: usize,
    pub pixels: Vec<f64>,
}

/// Parses a binary PGM (`P5`) file.
pub fn read_pgm(path: &Path) -> Result<Gray> {
    let mut data = Vec::new();
    open(path)?.read_to_end(&mut data).map_err(|e| Error::io(path, e))?;
    let mut pos = 0;
    let token = |pos: &mut usize| -> Result<String> {
        loop {
            while *pos < data.len() && data[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
            if *pos < data.len() && data[*pos] == b'#' {
                while *pos < data.len() && data[*pos] != b'\n' {
                    *pos += 1;
                }
                continue;
            }
            break;
        }
        let start = *pos;
        while *pos < data.len() && !data[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if start == *pos {
            return Err(Error::parse(path, format!("byte {start}"), "unexpected end of header"));
        }
        Ok(String::from_utf8_lossy(&data[start..*pos]).into_owned())
    };
    let magic = token(&mut pos)?;
    if magic != "P5" {
        return Err(Error::parse(path, "byte 0", format!("expected P5, found {magic:?}")));
    }
    let number = |pos: &mut usize, what: &str| -> Result<usize> {
        let t = token(pos)?;
        t.parse::<usize>()
            .ok()
            .filter(|&v| v > 0)
            .ok_or_else(|| Error::parse(path, format!("byte {pos}"), format!("invalid {what} {t:?}")))
    };
    let width = number(&mut pos, "width")?;
    let height = number(&mut pos, "height")?;
    let maxval = number(&mut pos, "maxval")?;
    if maxval > 65535 {
        return Err(Error::parse(path, format!("byte {pos}"), format!("maxval {maxval} too large")));
    }
    pos += 1; // single whitespace byte before the raster
    let bytes_per = if maxval > 255 { 2 } else { 1 };
    let need = width * height * bytes_per;
    if data.len() < pos + need {
        return Err(Error::Truncated { path: path.into() });
    }
    let raster = &data[pos..pos + need];
    let pixels = (0..width * height)
        .map(|k| {
            let v = if bytes_per == 1 {
                raster[k] as f64
            } else {
                u16::from_be_bytes([raster[2 * k], raster[2 * k + 1]]) as f64
            };
            v / maxval as f64
        })
        .collect();
    Ok(Gray { height, width, pixels })
}

/// Resizes to `target`: area pooling when both sides shrink by integer
/// factors, bilinear (pixel-centre aligned, edge clamped) otherwise.
pub fn resize(img: &Gray, target: ImageGeometry) -> Vec<f64> {
    let (h, w) = (img.height, img.width);
    let (th, tw) = (target.height, target.width);
    if h % th == 0 && w % tw == 0 {
        let (fy, fx) = (h / th, w / tw);
        let area = (fy * fx) as f64;
        return (0..th * tw)
            .map(|k| {
                let (r, c) = (k / tw, k % tw);
                let mut s = 0.0;
                for y in r * fy..(r + 1) * fy {
                    for x in c * fx..(c + 1) * fx {
                        s += img.pixels[y * w + x];
                    }
                }
                s / area
            })
            .collect();
    }
    let sy = h as f64 / th as f64;
    let sx = w as f64 / tw as f64;
    let at = |y: usize, x: usize| img.pixels[y * w + x];
    (0..th * tw)
        .map(|k| {
            let (r, c) = (k / tw, k % tw);
            let y = ((r as f64 + 0.5) * sy - 0.5).clamp(0.0, (h - 1) as f64);
            let x = ((c as f64 + 0.5) * sx - 0.5).clamp(0.0, (w - 1) as f64);
            let (y0, x0) = (y.floor() as usize, x.floor() as usize);
            let (y1, x1) = ((y0 + 1).min(h - 1), (x0 + 1).min(w - 1));
            let (fy, fx) = (y - y0 as f64, x - x0 as f64);
            (1.0 - fy) * ((1.0 - fx) * at(y0, x0) + fx * at(y0, x1)) + fy * ((1.0 - fx) * at(y1, x0) + fx * at(y1, x1))
        })
        .collect()
}

/// Loads every `.pgm` file of a directory in lexicographic order, resized to `target`.
pub fn load_pgm_dir(dir: &Path, target: ImageGeometry) -> Result<(DataMatrix, ImageGeometry)> {
    let files = pgm_files(dir)?;
    if files.is_empty() {
        return Err(Error::parse(dir, "directory", "no .pgm files found"));
    }
    let cols: Vec<Vec<f64>> = files
        .par_iter()
        .map(|f| read_pgm(f).map(|img| resize(&img, target)))
        .collect::<Result<_>>()?;
    let m = DMatrix::from_fn(target.pixels(), cols.len(), |i, j| cols[j][i]);
    Ok((DataMatrix::new(m)?, target))
}

/// Sorted `.pgm` file names of a directory, matching the column order of [`load_pgm_dir`].
pub fn pgm_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().and_then(|e| e.to_str()).is_some_and(|e| e.eq_ignore_ascii_case("pgm")))
        .collect();
    files.sort();
    Ok(files)
}
