//! Artifact serialization: CSV matrices, binary PGM images, and chain
//! checkpoints (a metadata JSON next to per-parameter CSV matrices).
//!
//! The CSV dialect is deliberately tiny: a `nrows,ncols` header line
//! followed by one comma-separated row per line, values printed with
//! Rust's shortest-roundtrip float formatting so re-reading reproduces
//! the bits exactly.

use std::fs;
use std::io::{BufWriter, Write as _};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::sampler::GibbsOutput;
use crate::{Error, Result};

/// Writes a row-major matrix as CSV with a `nrows,ncols` header line.
pub fn write_matrix_csv(path: &Path, data: &[f64], nrows: usize, ncols: usize) -> Result<()> {
    assert_eq!(data.len(), nrows * ncols, "matrix shape mismatch");
    let file = fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{nrows},{ncols}")?;
    for row in data.chunks(ncols.max(1)) {
        let mut first = true;
        for v in row {
            if !first {
                write!(w, ",")?;
            }
            write!(w, "{v}")?;
            first = false;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a vector as a single-column CSV matrix.
pub fn write_vector_csv(path: &Path, data: &[f64]) -> Result<()> {
    write_matrix_csv(path, data, data.len(), 1)
}

/// Reads a matrix written by [`write_matrix_csv`]; returns row-major
/// data with its shape.
pub fn read_matrix_csv(path: &Path) -> Result<(Vec<f64>, usize, usize)> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::invalid(format!("{}: empty CSV", path.display())))?;
    let (r, c) = header
        .split_once(',')
        .ok_or_else(|| Error::invalid(format!("{}: malformed CSV header", path.display())))?;
    let nrows: usize = r
        .trim()
        .parse()
        .map_err(|_| Error::invalid(format!("{}: bad row count {r:?}", path.display())))?;
    let ncols: usize = c
        .trim()
        .parse()
        .map_err(|_| Error::invalid(format!("{}: bad column count {c:?}", path.display())))?;
    let mut data = Vec::with_capacity(nrows * ncols);
    for (i, line) in lines.enumerate() {
        if line.is_empty() && i >= nrows {
            continue;
        }
        for field in line.split(',') {
            let v: f64 = field.trim().parse().map_err(|_| {
                Error::invalid(format!("{}: bad value {field:?} on data row {i}", path.display()))
            })?;
            data.push(v);
        }
    }
    if data.len() != nrows * ncols {
        return Err(Error::invalid(format!(
            "{}: header says {}x{} but found {} values",
            path.display(),
            nrows,
            ncols,
            data.len()
        )));
    }
    Ok((data, nrows, ncols))
}

/// Reads a single-column CSV vector.
pub fn read_vector_csv(path: &Path) -> Result<Vec<f64>> {
    let (data, _, ncols) = read_matrix_csv(path)?;
    if ncols != 1 {
        return Err(Error::invalid(format!(
            "{}: expected a single-column vector, got {ncols} columns",
            path.display()
        )));
    }
    Ok(data)
}

/// Reorders a column-major matrix (entry `(r, c)` at `x[c*nrows + r]`)
/// into row-major order for export.
pub fn column_major_to_rows(x: &[f64], nrows: usize, ncols: usize) -> Vec<f64> {
    assert_eq!(x.len(), nrows * ncols, "matrix shape mismatch");
    let mut out = vec![0.0; nrows * ncols];
    for r in 0..nrows {
        for c in 0..ncols {
            out[r * ncols + c] = x[c * nrows + r];
        }
    }
    out
}

/// Writes a binary (P5) PGM image from row-major pixel intensities.
///
/// Pixels map to `round(255 * clamp(v, 0, max) / max)`; `max` is recorded
/// in a header comment so the scaling can be undone.
pub fn write_pgm(path: &Path, pixels: &[f64], width: usize, height: usize, max: f64) -> Result<()> {
    assert_eq!(pixels.len(), width * height, "image shape mismatch");
    if !(max > 0.0) {
        return Err(Error::invalid("PGM normalization constant must be positive"));
    }
    let file = fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    write!(w, "P5\n# max={max}\n{width} {height}\n255\n")?;
    let bytes: Vec<u8> = pixels
        .iter()
        .map(|&v| (255.0 * v.clamp(0.0, max) / max).round() as u8)
        .collect();
    w.write_all(&bytes)?;
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct ChainMeta {
    version: u32,
    unknowns: usize,
    n_samples: usize,
    has_samples: bool,
    cgls_nonconverged: usize,
}

/// Persists a chain store into `dir` as `meta.json` plus per-parameter
/// CSV matrices. Creates the directory if needed.
pub fn save_chain(dir: &Path, out: &GibbsOutput) -> Result<()> {
    fs::create_dir_all(dir)?;
    let meta = ChainMeta {
        version: 1,
        unknowns: out.x_mean.len(),
        n_samples: out.n_samples(),
        has_samples: out.x_samples.is_some(),
        cgls_nonconverged: out.cgls_nonconverged,
    };
    let meta_text = serde_json::to_string_pretty(&meta)
        .map_err(|e| Error::invalid(format!("metadata encoding failed: {e}")))?;
    fs::write(dir.join("meta.json"), meta_text)?;
    write_vector_csv(&dir.join("x_mean.csv"), &out.x_mean)?;
    write_vector_csv(&dir.join("x_std.csv"), &out.x_std)?;
    write_vector_csv(&dir.join("w_mean.csv"), &out.w_mean)?;
    write_vector_csv(&dir.join("chain_sigma2.csv"), &out.sigma2_chain)?;
    write_vector_csv(&dir.join("chain_tau2.csv"), &out.tau2_chain)?;
    let iters: Vec<f64> = out.cgls_iterations.iter().map(|&v| v as f64).collect();
    write_vector_csv(&dir.join("cgls_iters.csv"), &iters)?;
    if let Some(samples) = &out.x_samples {
        let d = out.x_mean.len();
        let mut flat = Vec::with_capacity(samples.len() * d);
        for s in samples {
            flat.extend_from_slice(s);
        }
        write_matrix_csv(&dir.join("x_samples.csv"), &flat, samples.len(), d)?;
    }
    Ok(())
}

/// Restores a chain store written by [`save_chain`].
pub fn load_chain(dir: &Path) -> Result<GibbsOutput> {
    let meta_text = fs::read_to_string(dir.join("meta.json"))?;
    let meta: ChainMeta = serde_json::from_str(&meta_text)
        .map_err(|e| Error::invalid(format!("metadata decoding failed: {e}")))?;
    if meta.version != 1 {
        return Err(Error::invalid(format!("unsupported checkpoint version {}", meta.version)));
    }
    let x_mean = read_vector_csv(&dir.join("x_mean.csv"))?;
    let x_std = read_vector_csv(&dir.join("x_std.csv"))?;
    let w_mean = read_vector_csv(&dir.join("w_mean.csv"))?;
    let sigma2_chain = read_vector_csv(&dir.join("chain_sigma2.csv"))?;
    let tau2_chain = read_vector_csv(&dir.join("chain_tau2.csv"))?;
    let iters = read_vector_csv(&dir.join("cgls_iters.csv"))?;
    let cgls_iterations: Vec<usize> = iters.iter().map(|&v| v as usize).collect();
    if x_mean.len() != meta.unknowns {
        return Err(Error::invalid("checkpoint metadata disagrees with x_mean length"));
    }
    let x_samples = if meta.has_samples {
        let (flat, nrows, ncols) = read_matrix_csv(&dir.join("x_samples.csv"))?;
        if nrows != meta.n_samples || ncols != meta.unknowns {
            return Err(Error::invalid("checkpoint sample matrix has unexpected shape"));
        }
        Some(flat.chunks(ncols).map(|r| r.to_vec()).collect())
    } else {
        None
    };
    Ok(GibbsOutput {
        x_samples,
        x_mean,
        x_std,
        w_mean,
        sigma2_chain,
        tau2_chain,
        cgls_iterations,
        cgls_nonconverged: meta.cgls_nonconverged,
    })
}
