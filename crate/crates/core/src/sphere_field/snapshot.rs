//! Field snapshots: a header line `nlat nlon lmax` followed by the node
//! values in storage order (colatitude rows, longitude fastest), either as
//! text (one row per line) or as raw little-endian `f64`.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{ScalarField, SphericalGrid};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SnapshotFormat {
    #[default]
    Text,
    Binary,
}

fn io(e: std::io::Error) -> Error {
    Error::Snapshot(e.to_string())
}

pub fn write_snapshot<W: Write>(field: &ScalarField, mut out: W, format: SnapshotFormat) -> Result<()> {
    let g = field.grid();
    writeln!(out, "{} {} {}", g.nlat(), g.nlon(), g.lmax()).map_err(io)?;
    match format {
        SnapshotFormat::Text => {
            for row in field.values().chunks(g.nlon()) {
                let line: Vec<String> = row.iter().map(|v| format!("{v:.17e}")).collect();
                writeln!(out, "{}", line.join(" ")).map_err(io)?;
            }
        }
        SnapshotFormat::Binary => {
            for v in field.values() {
                out.write_all(&v.to_le_bytes()).map_err(io)?;
            }
        }
    }
    out.flush().map_err(io)
}

/// Reads a snapshot, building a fresh grid from its header.
pub fn read_snapshot<R: BufRead>(mut input: R, format: SnapshotFormat) -> Result<ScalarField> {
    let mut header = String::new();
    input.read_line(&mut header).map_err(io)?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|s| s.parse::<usize>().map_err(|e| Error::Snapshot(format!("bad header {header:?}: {e}"))))
        .collect::<Result<_>>()?;
    let [nlat, nlon, lmax] = dims[..] else {
        return Err(Error::Snapshot(format!("header must be `nlat nlon lmax`, got {header:?}")));
    };
    let grid = SphericalGrid::with_lmax(nlat, nlon, lmax)?;
    let n = nlat * nlon;
    let values = match format {
        SnapshotFormat::Text => {
            let mut body = String::new();
            input.read_to_string(&mut body).map_err(io)?;
            body.split_whitespace()
                .map(|s| s.parse::<f64>().map_err(|e| Error::Snapshot(format!("bad value {s:?}: {e}"))))
                .collect::<Result<Vec<f64>>>()?
        }
        SnapshotFormat::Binary => {
            let mut bytes = Vec::new();
            input.read_to_end(&mut bytes).map_err(io)?;
            if bytes.len() != 8 * n {
                return Err(Error::Snapshot(format!("expected {} bytes of data, found {}", 8 * n, bytes.len())));
            }
            bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect()
        }
    };
    ScalarField::new(grid, values)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn snapshot_roundtrip_is_exact(seed in any::<u64>(), binary in any::<bool>()) {
            let g = SphericalGrid::new(6, 12).unwrap();
            let f = crate::sphere_field::synthesize_random(&g, seed, 4, 1.0).unwrap();
            let format = if binary { SnapshotFormat::Binary } else { SnapshotFormat::Text };
            let mut buf = Vec::new();
            write_snapshot(&f, &mut buf, format).unwrap();
            let back = read_snapshot(&buf[..], format).unwrap();
            prop_assert_eq!(back.values(), f.values());
            prop_assert_eq!(back.grid().lmax(), 5);
        }
    }

    #[test]
    fn rejects_truncated_binary() {
        let g = SphericalGrid::new(2, 4).unwrap();
        let f = ScalarField::constant(&g, 1.0);
        let mut buf = Vec::new();
        write_snapshot(&f, &mut buf, SnapshotFormat::Binary).unwrap();
        buf.pop();
        assert!(read_snapshot(&buf[..], SnapshotFormat::Binary).is_err());
    }

    #[test]
    fn rejects_bad_header() {
        assert!(read_snapshot(&b"4 8\n1 2 3\n"[..], SnapshotFormat::Text).is_err());
    }
}
