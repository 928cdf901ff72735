//! WLKW weight container.
//!
//! Layout, all integers little-endian:
//!
//! | field        | size                          |
//! |--------------|-------------------------------|
//! | magic        | 4 bytes, `"WLKW"`             |
//! | version      | u16, currently 1              |
//! | layer count  | u32                           |
//! | per layer    | fan_in u32, units u32         |
//! | precision    | u8, 32 or 64 (value width)    |
//! | per layer    | units × fan_in weights row-major by unit, then units biases |
//! | provenance   | u32 length + UTF-8 bytes      |
//!
//! Files are written to a temporary sibling and atomically renamed, so a
//! reader never observes a partial file. `load(save(x)) == x` bit-exact at
//! 64-bit precision; 32-bit storage round-trips the stored `f32` values.

use std::fs;
use std::path::Path;

use wleak_core::nn::{LayerSpec, Network};
use wleak_core::Matrix;

use crate::{Error, Result};

pub const MAGIC: [u8; 4] = *b"WLKW";
pub const VERSION: u16 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    F32,
    F64,
}

impl Precision {
    /// Stored bytes per value.
    pub fn width(self) -> usize {
        match self {
            Precision::F32 => 4,
            Precision::F64 => 8,
        }
    }

    fn flag(self) -> u8 {
        match self {
            Precision::F32 => 32,
            Precision::F64 => 64,
        }
    }

    fn from_flag(flag: u8, path: &Path) -> Result<Precision> {
        match flag {
            32 => Ok(Precision::F32),
            64 => Ok(Precision::F64),
            other => Err(Error::WeightFormat {
                path: path.to_path_buf(),
                message: format!("unknown precision flag {other}"),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightFile {
    pub layers: Vec<(Matrix, Vec<f64>)>,
    pub precision: Precision,
    pub provenance: String,
}

/// Exact file size implied by the layout above.
pub fn expected_size(dims: &[(usize, usize)], precision: Precision, provenance_len: usize) -> u64 {
    let header = 4 + 2 + 4 + 8 * dims.len() + 1;
    let data: usize = dims
        .iter()
        .map(|&(fan_in, units)| (units * fan_in + units) * precision.width())
        .sum();
    (header + data + 4 + provenance_len) as u64
}

pub fn save(
    path: &Path,
    layers: &[(&Matrix, &[f64])],
    provenance: &str,
    precision: Precision,
) -> Result<()> {
    let err = |message: String| Error::WeightFormat {
        path: path.to_path_buf(),
        message,
    };
    if layers.is_empty() {
        return Err(err("no layers to save".into()));
    }
    for (i, (w, b)) in layers.iter().enumerate() {
        if b.len() != w.rows() {
            return Err(err(format!(
                "layer {i}: {} biases for {} units",
                b.len(),
                w.rows()
            )));
        }
        if w.rows() > u32::MAX as usize || w.cols() > u32::MAX as usize {
            return Err(err(format!("layer {i}: dimension overflows u32")));
        }
    }
    if layers.len() > u32::MAX as usize || provenance.len() > u32::MAX as usize {
        return Err(err("layer count or provenance overflows u32".into()));
    }

    let dims: Vec<(usize, usize)> = layers.iter().map(|(w, _)| (w.cols(), w.rows())).collect();
    let mut buf = Vec::with_capacity(expected_size(&dims, precision, provenance.len()) as usize);
    buf.extend_from_slice(&MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(layers.len() as u32).to_le_bytes());
    for &(fan_in, units) in &dims {
        buf.extend_from_slice(&(fan_in as u32).to_le_bytes());
        buf.extend_from_slice(&(units as u32).to_le_bytes());
    }
    buf.push(precision.flag());
    for (w, b) in layers {
        for &v in w.data().iter().chain(b.iter()) {
            match precision {
                Precision::F32 => buf.extend_from_slice(&(v as f32).to_le_bytes()),
                Precision::F64 => buf.extend_from_slice(&v.to_le_bytes()),
            }
        }
    }
    buf.extend_from_slice(&(provenance.len() as u32).to_le_bytes());
    buf.extend_from_slice(provenance.as_bytes());

    write_atomic(path, &buf)
}

pub fn load(path: &Path) -> Result<WeightFile> {
    let err = |message: String| Error::WeightFormat {
        path: path.to_path_buf(),
        message,
    };
    let buf = fs::read(path).map_err(|source| Error::Io {
        context: "reading weight file",
        path: path.to_path_buf(),
        source,
    })?;
    let mut at = 0usize;
    let mut take = |n: usize, what: &str| -> Result<&[u8]> {
        if at + n > buf.len() {
            return Err(err(format!(
                "truncated: needed {n} bytes for {what} at offset {at}, file has {}",
                buf.len()
            )));
        }
        let slice = &buf[at..at + n];
        at += n;
        Ok(slice)
    };

    if take(4, "magic")? != MAGIC {
        return Err(err("bad magic bytes".into()));
    }
    let version = u16::from_le_bytes(take(2, "version")?.try_into().expect("2 bytes"));
    if version != VERSION {
        return Err(err(format!("unsupported version {version}")));
    }
    let layer_count =
        u32::from_le_bytes(take(4, "layer count")?.try_into().expect("4 bytes")) as usize;
    if layer_count == 0 {
        return Err(err("zero layers".into()));
    }
    let mut dims = Vec::with_capacity(layer_count);
    for i in 0..layer_count {
        let fan_in =
            u32::from_le_bytes(take(4, "fan_in")?.try_into().expect("4 bytes")) as usize;
        let units = u32::from_le_bytes(take(4, "units")?.try_into().expect("4 bytes")) as usize;
        if fan_in == 0 || units == 0 {
            return Err(err(format!("layer {i}: zero dimension")));
        }
        dims.push((fan_in, units));
    }
    let precision = Precision::from_flag(take(1, "precision")?[0], path)?;

    let mut layers = Vec::with_capacity(layer_count);
    for &(fan_in, units) in &dims {
        let values = units * fan_in + units;
        let bytes = take(values * precision.width(), "layer data")?;
        let mut flat = Vec::with_capacity(values);
        match precision {
            Precision::F32 => {
                for c in bytes.chunks_exact(4) {
                    flat.push(f64::from(f32::from_le_bytes(c.try_into().expect("4 bytes"))));
                }
            }
            Precision::F64 => {
                for c in bytes.chunks_exact(8) {
                    flat.push(f64::from_le_bytes(c.try_into().expect("8 bytes")));
                }
            }
        }
        let biases = flat.split_off(units * fan_in);
        let weights = Matrix::from_vec(units, fan_in, flat)?;
        layers.push((weights, biases));
    }

    let provenance_len =
        u32::from_le_bytes(take(4, "provenance length")?.try_into().expect("4 bytes")) as usize;
    let provenance = String::from_utf8(take(provenance_len, "provenance")?.to_vec())
        .map_err(|_| err("provenance is not UTF-8".into()))?;
    if at != buf.len() {
        return Err(err(format!("{} trailing bytes", buf.len() - at)));
    }

    Ok(WeightFile {
        layers,
        precision,
        provenance,
    })
}

/// Saves a network's layers at 64-bit precision.
pub fn save_network(path: &Path, network: &Network, provenance: &str) -> Result<()> {
    let layers: Vec<(&Matrix, &[f64])> = network
        .weights()
        .iter()
        .zip(network.biases())
        .map(|(w, b)| (w, b.as_slice()))
        .collect();
    save(path, &layers, provenance, Precision::F64)
}

/// Loads a network saved by [`save_network`], checking shapes against the
/// expected layer specs.
pub fn load_network(path: &Path, specs: Vec<LayerSpec>) -> Result<(Network, String)> {
    let file = load(path)?;
    let (weights, biases): (Vec<Matrix>, Vec<Vec<f64>>) = file.layers.into_iter().unzip();
    let network = Network::from_parts(specs, weights, biases).map_err(|e| Error::WeightFormat {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    Ok((network, file.provenance))
}

/// Writes via a temporary sibling file and an atomic rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|source| Error::Io {
                context: "creating directory",
                path: parent.to_path_buf(),
                source,
            })?;
        }
    }
    let mut name = path.file_name().map(|n| n.to_os_string()).ok_or_else(|| {
        Error::Io {
            context: "resolving file name of",
            path: path.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::InvalidInput, "no file name"),
        }
    })?;
    name.push(".tmp");
    let tmp = path.with_file_name(name);
    fs::write(&tmp, bytes).map_err(|source| Error::Io {
        context: "writing",
        path: tmp.clone(),
        source,
    })?;
    fs::rename(&tmp, path).map_err(|source| Error::Io {
        context: "renaming into place",
        path: path.to_path_buf(),
        source,
    })
}
