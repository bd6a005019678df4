//! Parameter files: one JSON header line describing the shapes, then every
//! value as a little-endian `f64` in [`EncoderParams::flat`] order.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{EncoderKind, EncoderParams, Matrix};

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("bad checkpoint header: {0}")]
    Header(#[from] serde_json::Error),
    #[error("checkpoint holds {found} values, header promises {expected}")]
    Length { expected: usize, found: usize },
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    kind: EncoderKind,
    vocab: usize,
    dim: usize,
    layers: Vec<(usize, usize)>,
    biases: Vec<usize>,
    version: u64,
}

pub fn save_params<W: Write>(params: &EncoderParams, mut out: W) -> Result<(), CheckpointError> {
    let header = Header {
        kind: params.kind,
        vocab: params.vocab(),
        dim: params.dim(),
        layers: params.layers.iter().map(|l| (l.rows, l.cols)).collect(),
        biases: params.biases.iter().map(Vec::len).collect(),
        version: params.version,
    };
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n")?;
    for v in params.flat() {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn load_params<R: BufRead>(mut input: R) -> Result<EncoderParams, CheckpointError> {
    let mut line = String::new();
    input.read_line(&mut line)?;
    let h: Header = serde_json::from_str(line.trim_end())?;
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    let expected = h.vocab * h.dim + h.layers.iter().map(|(r, c)| r * c).sum::<usize>() + h.biases.iter().sum::<usize>();
    if bytes.len() != expected * 8 {
        return Err(CheckpointError::Length { expected, found: bytes.len() / 8 });
    }
    let mut values = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")));
    let mut take = |n: usize| values.by_ref().take(n).collect::<Vec<f64>>();
    let token_table = Matrix { rows: h.vocab, cols: h.dim, data: take(h.vocab * h.dim) };
    let layers = h.layers.iter().map(|&(rows, cols)| Matrix { rows, cols, data: take(rows * cols) }).collect();
    let biases = h.biases.iter().map(|&n| take(n)).collect();
    Ok(EncoderParams { kind: h.kind, token_table, layers, biases, version: h.version })
}

#[cfg(test)]
mod tests {
    use super::super::EncoderConfig;
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        for kind in EncoderKind::ALL {
            let p = EncoderParams::init(&EncoderConfig { kind, dim: 4, vocab: 10, depth: 2 }, 3);
            let mut buf = Vec::new();
            save_params(&p, &mut buf).unwrap();
            assert_eq!(load_params(&buf[..]).unwrap(), p);
        }
    }

    #[test]
    fn truncated_file_is_rejected() {
        let p = EncoderParams::init(&EncoderConfig { kind: EncoderKind::Bow, dim: 2, vocab: 3, depth: 1 }, 0);
        let mut buf = Vec::new();
        save_params(&p, &mut buf).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(matches!(load_params(&buf[..]), Err(CheckpointError::Length { .. })));
    }
}
