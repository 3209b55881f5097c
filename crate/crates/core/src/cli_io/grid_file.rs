//! The `.bsg` sampled-grid format.
//!
//! One line of JSON header, a newline, then `N_r·N_theta·N_z·3` little-endian
//! `f64` values `(v_r, v_θ, v_z)` with flat index `((i·N_theta) + j)·N_z + k`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::SampledGrid;
use crate::geometry::TubeChart;

pub const MAGIC: &str = "BSG1";
pub const FRAME: &str = "orthonormal-cylindrical";
pub const ENCODING: &str = "f64-le";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BsgHeader {
    pub magic: String,
    #[serde(rename = "N_r")]
    pub n_r: usize,
    #[serde(rename = "N_theta")]
    pub n_theta: usize,
    #[serde(rename = "N_z")]
    pub n_z: usize,
    #[serde(rename = "R")]
    pub radius: f64,
    #[serde(rename = "L")]
    pub length: f64,
    pub frame: String,
    pub encoding: String,
}

impl BsgHeader {
    pub fn for_grid(grid: &SampledGrid) -> Self {
        BsgHeader {
            magic: MAGIC.into(),
            n_r: grid.n_r,
            n_theta: grid.n_theta,
            n_z: grid.n_z,
            radius: grid.chart.radius(),
            length: grid.chart.length(),
            frame: FRAME.into(),
            encoding: ENCODING.into(),
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |what: &str, got: &str, want: &str| Err(Error::Data(format!("header {what} is `{got}`, expected `{want}`")));
        if self.magic != MAGIC {
            return bad("magic", &self.magic, MAGIC);
        }
        if self.frame != FRAME {
            return bad("frame", &self.frame, FRAME);
        }
        if self.encoding != ENCODING {
            return bad("encoding", &self.encoding, ENCODING);
        }
        Ok(())
    }
}

pub fn write_grid(path: &Path, grid: &SampledGrid) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut w, &BsgHeader::for_grid(grid))?;
    w.write_all(b"\n")?;
    for v in grid.values() {
        for c in v {
            w.write_all(&c.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn open_with_header(path: &Path) -> Result<(BufReader<File>, BsgHeader)> {
    let file = File::open(path).map_err(|e| Error::InvalidInput(format!("cannot open grid {}: {e}", path.display())))?;
    let mut r = BufReader::new(file);
    let mut line = Vec::new();
    r.read_until(b'\n', &mut line)?;
    if line.last() != Some(&b'\n') {
        return Err(Error::Data("missing header line".into()));
    }
    let header: BsgHeader =
        serde_json::from_slice(&line[..line.len() - 1]).map_err(|e| Error::Data(format!("malformed header: {e}")))?;
    header.validate()?;
    Ok((r, header))
}

/// Header only; the payload is not read.
pub fn read_header(path: &Path) -> Result<BsgHeader> {
    open_with_header(path).map(|(_, h)| h)
}

pub fn read_grid(path: &Path) -> Result<SampledGrid> {
    let (mut r, header) = open_with_header(path)?;
    let count = header
        .n_r
        .checked_mul(header.n_theta)
        .and_then(|n| n.checked_mul(header.n_z))
        .ok_or_else(|| Error::Data("lattice size overflows".into()))?;
    let mut payload = Vec::new();
    r.read_to_end(&mut payload)?;
    if payload.len() != count * 24 {
        return Err(Error::Data(format!(
            "shape mismatch: header implies {} payload bytes, file has {}",
            count * 24,
            payload.len()
        )));
    }
    let values = payload
        .chunks_exact(24)
        .map(|c| {
            let f = |o: usize| f64::from_le_bytes(c[o..o + 8].try_into().expect("8-byte slice"));
            [f(0), f(8), f(16)]
        })
        .collect();
    let chart = TubeChart::new(header.radius, header.length).map_err(|e| Error::Data(format!("header chart: {e}")))?;
    SampledGrid::new((header.n_r, header.n_theta, header.n_z), chart, values)
}
