//! Binary checkpoint format, all integers and floats little-endian:
//!
//! ```text
//! magic "CORDRCKP" | version u32
//! dim u64 | conv steps u64 | vocab u64 | node kinds u64
//! seed u64 | step u64 | temperature f64
//! lr f64 | beta1 f64 | beta2 f64 | epsilon f64 | adam step u64 | operator mask u32
//! parameter tensors, then Adam first moments, then second moments (f64 each,
//!   order type_emb, token_emb, w_t, w_l, w_r, bias)
//! crc32 of everything above, u32
//! ```

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use super::ContrastiveError;
use crate::encoder::{EncoderConfig, EncoderParams};
use crate::numerics::{AdamConfig, OptState};
use crate::syntax::NodeKind;
use crate::transform::OperatorTag;

pub const MAGIC: &[u8; 8] = b"CORDRCKP";
pub const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 4 + 8 * 4 + 8 * 3 + 8 * 4 + 8 + 4;

/// Encoder weights, optimizer state and run metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub params: EncoderParams,
    pub optimizer: OptState,
    pub seed: u64,
    pub step: u64,
    pub temperature: f64,
    pub ops: BTreeSet<OperatorTag>,
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let c = self.params.config;
        let a = self.optimizer.config;
        let mut out = Vec::with_capacity(HEADER_LEN + 24 * self.params.parameter_count() + 4);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        for x in [c.dim, c.steps, c.vocab, NodeKind::COUNT] {
            out.extend_from_slice(&(x as u64).to_le_bytes());
        }
        out.extend_from_slice(&self.seed.to_le_bytes());
        out.extend_from_slice(&self.step.to_le_bytes());
        out.extend_from_slice(&self.temperature.to_le_bytes());
        for x in [a.learning_rate, a.beta1, a.beta2, a.epsilon] {
            out.extend_from_slice(&x.to_le_bytes());
        }
        out.extend_from_slice(&self.optimizer.step.to_le_bytes());
        out.extend_from_slice(&OperatorTag::set_to_mask(&self.ops).to_le_bytes());
        let tensors = self.params.tensors();
        let moments = self.optimizer.first_moment.iter().chain(&self.optimizer.second_moment).map(Vec::as_slice);
        for tensor in tensors.into_iter().chain(moments) {
            for x in tensor {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        let crc = crc32fast::hash(&out);
        out.extend_from_slice(&crc.to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ContrastiveError> {
        let corrupt = |why: &str| ContrastiveError::CorruptCheckpoint(why.to_string());
        if bytes.len() < 12 {
            return Err(corrupt("truncated header"));
        }
        if &bytes[..8] != MAGIC {
            return Err(corrupt("bad magic bytes"));
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
        if version != FORMAT_VERSION {
            return Err(ContrastiveError::FormatVersionMismatch { found: version, expected: FORMAT_VERSION });
        }
        if bytes.len() < HEADER_LEN + 4 {
            return Err(corrupt("truncated header"));
        }
        let (body, trailer) = bytes.split_at(bytes.len() - 4);
        if crc32fast::hash(body) != u32::from_le_bytes(trailer.try_into().expect("4 bytes")) {
            return Err(corrupt("checksum mismatch"));
        }
        let mut r = Reader { bytes: body, pos: 12 };
        let dim = r.u64() as usize;
        let steps = r.u64() as usize;
        let vocab = r.u64() as usize;
        if r.u64() as usize != NodeKind::COUNT {
            return Err(corrupt("node kind count differs"));
        }
        let seed = r.u64();
        let step = r.u64();
        let temperature = r.f64();
        let adam = AdamConfig { learning_rate: r.f64(), beta1: r.f64(), beta2: r.f64(), epsilon: r.f64() };
        let adam_step = r.u64();
        let ops = OperatorTag::set_from_mask(r.u32());

        let config = EncoderConfig { dim, steps, vocab };
        // (kinds + vocab + 3d) rows of width d, plus the bias.
        let per_tensor = dim
            .checked_mul(3)
            .and_then(|x| x.checked_add(NodeKind::COUNT + vocab))
            .and_then(|rows| rows.checked_mul(dim))
            .and_then(|x| x.checked_add(dim));
        let expected = per_tensor.and_then(|n| n.checked_mul(24)).and_then(|n| n.checked_add(HEADER_LEN));
        if expected != Some(body.len()) {
            return Err(corrupt("tensor section length does not match header"));
        }
        let mut params = EncoderParams::zeros(config);
        for tensor in params.tensors_mut() {
            tensor.iter_mut().for_each(|x| *x = r.f64());
        }
        let lengths = params.tensor_lengths();
        let mut optimizer = OptState::new(adam, &lengths);
        optimizer.step = adam_step;
        for moment in optimizer.first_moment.iter_mut().chain(optimizer.second_moment.iter_mut()) {
            moment.iter_mut().for_each(|x| *x = r.f64());
        }
        Ok(Checkpoint { params, optimizer, seed, step, temperature, ops })
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take<const N: usize>(&mut self) -> [u8; N] {
        let out = self.bytes[self.pos..self.pos + N].try_into().expect("length checked");
        self.pos += N;
        out
    }

    fn u32(&mut self) -> u32 {
        u32::from_le_bytes(self.take())
    }

    fn u64(&mut self) -> u64 {
        u64::from_le_bytes(self.take())
    }

    fn f64(&mut self) -> f64 {
        f64::from_le_bytes(self.take())
    }
}

pub fn save_checkpoint(path: &Path, checkpoint: &Checkpoint) -> Result<(), ContrastiveError> {
    fs::write(path, checkpoint.to_bytes())?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint, ContrastiveError> {
    Checkpoint::from_bytes(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contrastive::{initial_checkpoint, TrainConfig};

    fn sample() -> Checkpoint {
        let config = TrainConfig { encoder: EncoderConfig { dim: 4, steps: 2, vocab: 8 }, ..TrainConfig::default() };
        let mut ckpt = initial_checkpoint(&config);
        ckpt.step = 7;
        ckpt.optimizer.step = 7;
        ckpt.optimizer.first_moment[2][1] = -0.25;
        ckpt.optimizer.second_moment[5][3] = 1e-300;
        ckpt.ops = [OperatorTag::VR, OperatorTag::SF].into();
        ckpt
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.ckpt");
        let ckpt = sample();
        save_checkpoint(&path, &ckpt).unwrap();
        let loaded = load_checkpoint(&path).unwrap();
        assert_eq!(loaded, ckpt);
        assert_eq!(loaded.to_bytes(), ckpt.to_bytes());
    }

    #[test]
    fn truncation_is_corrupt() {
        let bytes = sample().to_bytes();
        for cut in [bytes.len() - 1, bytes.len() / 2, 20, 5] {
            assert!(matches!(Checkpoint::from_bytes(&bytes[..cut]), Err(ContrastiveError::CorruptCheckpoint(_))), "cut {cut}");
        }
    }

    #[test]
    fn flipped_byte_is_corrupt() {
        let mut bytes = sample().to_bytes();
        let mid = bytes.len() / 2;
        bytes[mid] ^= 0x40;
        assert!(matches!(Checkpoint::from_bytes(&bytes), Err(ContrastiveError::CorruptCheckpoint(_))));
    }

    #[test]
    fn other_version_is_rejected() {
        let mut bytes = sample().to_bytes();
        bytes[8..12].copy_from_slice(&2u32.to_le_bytes());
        assert!(matches!(
            Checkpoint::from_bytes(&bytes),
            Err(ContrastiveError::FormatVersionMismatch { found: 2, expected: 1 })
        ));
    }
}
