//! Flat binary checkpoints.
//!
//! Layout: magic `FSNN`, then little-endian `u32` version, `num_features` and
//! `num_actions`, then every parameter as a little-endian `f64` in layer order
//! (layer 1 weights, layer 1 bias, layer 2 weights, ...). Weights are stored
//! row-major as `inputs × outputs`.

use std::path::Path;

use super::{Dense, Mlp, HIDDEN_WIDTH};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"FSNN";
const VERSION: u32 = 1;
const HEADER_LEN: usize = 16;

pub fn save_checkpoint(net: &Mlp) -> Result<Vec<u8>> {
    let layers = net.layers();
    let standard = layers.len() == 3
        && layers[0].outputs == HIDDEN_WIDTH
        && layers[1].inputs == HIDDEN_WIDTH
        && layers[1].outputs == HIDDEN_WIDTH;
    if !standard {
        return Err(Error::Checkpoint(
            "only the standard three-layer network can be serialized".into(),
        ));
    }
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * net.param_count());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(net.num_inputs() as u32).to_le_bytes());
    out.extend_from_slice(&(net.num_outputs() as u32).to_le_bytes());
    for layer in layers {
        for p in layer.weights.iter().chain(&layer.bias) {
            out.extend_from_slice(&p.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn load_checkpoint(bytes: &[u8]) -> Result<Mlp> {
    if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
        return Err(Error::Checkpoint("not a checkpoint (bad magic)".into()));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap()) as usize;
    let version = word(4) as u32;
    if version != VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let (num_features, num_actions) = (word(8), word(12));
    let widths = [num_features, HIDDEN_WIDTH, HIDDEN_WIDTH, num_actions];
    let expected: usize = widths.windows(2).map(|w| w[0] * w[1] + w[1]).sum();
    let body = &bytes[HEADER_LEN..];
    if num_features == 0 || num_actions == 0 || body.len() != 8 * expected {
        return Err(Error::Checkpoint(format!(
            "body holds {} bytes, expected {} for a {num_features}→{num_actions} network",
            body.len(),
            8 * expected
        )));
    }
    let mut values = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    let mut take = |n: usize| values.by_ref().take(n).collect::<Vec<f64>>();
    let layers = widths
        .windows(2)
        .map(|w| {
            let weights = take(w[0] * w[1]);
            let bias = take(w[1]);
            Dense::new(w[0], w[1], weights, bias)
        })
        .collect::<Result<Vec<_>>>()?;
    let net = Mlp::from_layers(layers)?;
    if !net.is_finite() {
        return Err(Error::Checkpoint("non-finite parameter".into()));
    }
    Ok(net)
}

pub fn write_checkpoint(path: &Path, net: &Mlp) -> Result<()> {
    std::fs::write(path, save_checkpoint(net)?).map_err(|e| Error::io(path, e))
}

pub fn read_checkpoint(path: &Path) -> Result<Mlp> {
    let bytes = std::fs::read(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::MissingFile(path.to_path_buf())
        } else {
            Error::io(path, e)
        }
    })?;
    load_checkpoint(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::init_mlp;

    #[test]
    fn roundtrip_is_exact() {
        let net = init_mlp(11, 3, 4).unwrap();
        let bytes = save_checkpoint(&net).unwrap();
        assert_eq!(bytes.len(), 16 + 8 * 18_435);
        assert_eq!(&bytes[..4], b"FSNN");
        assert_eq!(load_checkpoint(&bytes).unwrap(), net);
    }

    #[test]
    fn corrupt_checkpoints_rejected() {
        let net = init_mlp(5, 3, 4).unwrap();
        let bytes = save_checkpoint(&net).unwrap();
        assert!(load_checkpoint(&bytes[..bytes.len() - 8]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(load_checkpoint(&bad).is_err());
        let mut bad = bytes;
        bad[4] = 9;
        assert!(load_checkpoint(&bad).is_err());
    }
}
