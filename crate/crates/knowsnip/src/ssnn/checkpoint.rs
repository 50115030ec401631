//! Binary checkpoint format.
//!
//! Layout: magic bytes `SSNN`, format version (u32), the configuration echo,
//! the domain ids (length-prefixed UTF-8), then every parameter as a
//! little-endian f64 in declared layer order (cnn1, cnn2, dense, heads in
//! domain order). Loading a saved model reproduces it bit-exactly.

use std::fs;
use std::io::{Cursor, Read};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::error::{Error, Result};
use crate::netops::Pooling;

use super::{build, SsnnConfig, SsnnModel};

const MAGIC: &[u8; 4] = b"SSNN";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Serializes a model to the checkpoint byte format.
pub fn model_to_bytes(model: &SsnnModel) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.write_u32::<LittleEndian>(CHECKPOINT_VERSION).unwrap();

    let c = &model.config;
    for count in [
        c.embed_dim,
        c.cnn1_kernels,
        c.cnn1_width,
        c.min_sentence_tokens,
        c.cnn2_kernels,
        c.cnn2_width,
        c.dense_nodes,
        c.batch_size,
        c.epochs,
    ] {
        out.write_u64::<LittleEndian>(count as u64).unwrap();
    }
    out.push(match c.pooling {
        Pooling::Average => 0,
        Pooling::Max1 => 1,
    });
    out.write_f64::<LittleEndian>(c.learning_rate).unwrap();
    out.write_u64::<LittleEndian>(c.seed).unwrap();

    out.write_u64::<LittleEndian>(model.domain_ids.len() as u64).unwrap();
    for domain in &model.domain_ids {
        let bytes = domain.as_bytes();
        out.write_u64::<LittleEndian>(bytes.len() as u64).unwrap();
        out.extend_from_slice(bytes);
    }

    let params = model.params_vec();
    out.write_u64::<LittleEndian>(params.len() as u64).unwrap();
    for p in params {
        out.write_f64::<LittleEndian>(p).unwrap();
    }
    out
}

/// Parses a checkpoint; `source` only labels error messages.
pub fn model_from_bytes(bytes: &[u8], source: impl AsRef<Path>) -> Result<SsnnModel> {
    let path = source.as_ref();
    let fail = |message: &str| Error::Checkpoint {
        path: path.to_path_buf(),
        message: message.to_string(),
    };

    let mut cur = Cursor::new(bytes);
    let mut magic = [0u8; 4];
    cur.read_exact(&mut magic).map_err(|_| fail("truncated header"))?;
    if &magic != MAGIC {
        return Err(fail("bad magic bytes (not an SSNN checkpoint)"));
    }
    let version = cur
        .read_u32::<LittleEndian>()
        .map_err(|_| fail("truncated header"))?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::CheckpointVersion {
            path: path.to_path_buf(),
            found: version,
            expected: CHECKPOINT_VERSION,
        });
    }

    let mut counts = [0usize; 9];
    for slot in counts.iter_mut() {
        *slot = cur
            .read_u64::<LittleEndian>()
            .map_err(|_| fail("truncated config"))? as usize;
    }
    let pooling = match cur.read_u8().map_err(|_| fail("truncated config"))? {
        0 => Pooling::Average,
        1 => Pooling::Max1,
        other => return Err(fail(&format!("unknown pooling tag {other}"))),
    };
    let learning_rate = cur
        .read_f64::<LittleEndian>()
        .map_err(|_| fail("truncated config"))?;
    let seed = cur
        .read_u64::<LittleEndian>()
        .map_err(|_| fail("truncated config"))?;
    let config = SsnnConfig {
        embed_dim: counts[0],
        cnn1_kernels: counts[1],
        cnn1_width: counts[2],
        min_sentence_tokens: counts[3],
        cnn2_kernels: counts[4],
        cnn2_width: counts[5],
        dense_nodes: counts[6],
        pooling,
        learning_rate,
        batch_size: counts[7],
        epochs: counts[8],
        seed,
    };

    let domain_count = cur
        .read_u64::<LittleEndian>()
        .map_err(|_| fail("truncated domain list"))? as usize;
    let mut domains = Vec::with_capacity(domain_count);
    for _ in 0..domain_count {
        let len = cur
            .read_u64::<LittleEndian>()
            .map_err(|_| fail("truncated domain list"))? as usize;
        let mut raw = vec![0u8; len];
        cur.read_exact(&mut raw).map_err(|_| fail("truncated domain list"))?;
        domains.push(String::from_utf8(raw).map_err(|_| fail("domain id is not UTF-8"))?);
    }

    let mut model = build(&config, &domains)?;
    let declared = cur
        .read_u64::<LittleEndian>()
        .map_err(|_| fail("truncated parameters"))? as usize;
    let expected = model.params_vec().len();
    if declared != expected {
        return Err(fail(&format!(
            "parameter count {declared} does not match the declared config (expected {expected})"
        )));
    }
    let mut params = Vec::with_capacity(declared);
    for _ in 0..declared {
        params.push(
            cur.read_f64::<LittleEndian>()
                .map_err(|_| fail("truncated parameters"))?,
        );
    }
    if cur.position() != bytes.len() as u64 {
        return Err(fail("trailing bytes after parameters"));
    }
    model.set_params_vec(&params)?;
    Ok(model)
}

pub fn save_model(model: &SsnnModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, model_to_bytes(model)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<SsnnModel> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    model_from_bytes(&bytes, path)
}
