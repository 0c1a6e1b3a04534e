//! Versioned little-endian binary encoding of [`ModelState`].
//!
//! Layout (all integers little-endian):
//!
//! | offset | size | field                               |
//! |--------|------|-------------------------------------|
//! | 0      | 4    | magic `OFLS`                        |
//! | 4      | 2    | format version (1)                  |
//! | 6      | 1    | scalar width in bytes (4 or 8)      |
//! | 7      | 1    | reserved, zero                      |
//! | 8      | 4    | model length `n`                    |
//! | 12     | 8    | number of global syncs              |
//! | 20     | n·w  | current parameters                  |
//! |        | n·w  | last sync snapshot                  |
//! |        | n·w  | previous sync snapshot              |
//! |        | n·8  | per-index last sync round           |

use crate::error::{Error, Result};
use crate::model::{ModelState, ParameterVector};
use crate::scalar::Scalar;

pub const MAGIC: [u8; 4] = *b"OFLS";
pub const VERSION: u16 = 1;
const HEADER: usize = 20;

/// Bytes per parameter value on the wire (an `f32` payload).
pub const VALUE_BYTES: usize = 4;

/// Size of a sparse message: the values plus the index set, sent as a bitmap
/// over the model or as `u32` indices, whichever is smaller.
pub fn sparse_wire_bytes(count: usize, model_len: usize) -> usize {
    count * VALUE_BYTES + (count * 4).min(model_len.div_ceil(8))
}

/// Size of a full model sent without indices.
pub fn dense_wire_bytes(model_len: usize) -> usize {
    model_len * VALUE_BYTES
}

pub fn encode_model<T: Scalar>(m: &ModelState<T>) -> Vec<u8> {
    let n = m.len();
    let mut out = Vec::with_capacity(HEADER + n * (3 * T::BYTES as usize + 8));
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(T::BYTES);
    out.push(0);
    out.extend_from_slice(&(n as u32).to_le_bytes());
    out.extend_from_slice(&m.global_syncs().to_le_bytes());
    for v in [m.current(), m.last_sync(), m.prev_sync()] {
        for x in v.as_slice() {
            x.write_le(&mut out);
        }
    }
    for r in m.last_sync_rounds() {
        out.extend_from_slice(&r.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::Decode {
                offset: self.pos,
                reason: format!("truncated {what}: need {n} bytes, {} remain", self.bytes.len() - self.pos),
            });
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
}

pub fn decode_model<T: Scalar>(bytes: &[u8]) -> Result<ModelState<T>> {
    let mut r = Reader { bytes, pos: 0 };
    let bad = |offset: usize, reason: String| Error::Decode { offset, reason };

    if r.take(4, "magic")? != MAGIC {
        return Err(bad(0, "bad magic".into()));
    }
    let version = u16::from_le_bytes(r.take(2, "version")?.try_into().unwrap());
    if version != VERSION {
        return Err(bad(4, format!("unsupported version {version}")));
    }
    let width = r.take(1, "scalar width")?[0];
    if width != T::BYTES {
        return Err(bad(6, format!("scalar width {width} does not match requested {}", T::BYTES)));
    }
    r.take(1, "reserved")?;
    let n = u32::from_le_bytes(r.take(4, "length")?.try_into().unwrap()) as usize;
    if n == 0 || !n.is_power_of_two() {
        return Err(bad(8, format!("model length {n} is not a positive power of two")));
    }
    let syncs = u64::from_le_bytes(r.take(8, "sync count")?.try_into().unwrap());

    let vector = |r: &mut Reader<'_>, what: &str| -> Result<ParameterVector<T>> {
        let start = r.pos;
        let raw = r.take(n * width as usize, what)?;
        let values = raw.chunks_exact(width as usize).map(T::read_le).collect();
        ParameterVector::new(values).map_err(|e| match e {
            Error::NonFinite { index } => bad(start + index * width as usize, format!("non-finite value in {what}")),
            other => other,
        })
    };
    let current = vector(&mut r, "current")?;
    let last = vector(&mut r, "last_sync")?;
    let prev = vector(&mut r, "prev_sync")?;
    let rounds =
        r.take(n * 8, "sync rounds")?.chunks_exact(8).map(|c| u64::from_le_bytes(c.try_into().unwrap())).collect();
    if r.pos != bytes.len() {
        return Err(bad(r.pos, "trailing bytes".into()));
    }
    ModelState::from_parts(current, last, prev, rounds, syncs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn state(values: Vec<f64>) -> ModelState<f64> {
        let mut m = ModelState::new(ParameterVector::new(values).unwrap());
        let n = m.len();
        let idx: Vec<usize> = (0..n).step_by(2).collect();
        let vals: Vec<f64> = idx.iter().map(|&i| i as f64 * 0.5).collect();
        m.apply_sync(&idx, &vals, 7, true).unwrap();
        m
    }

    proptest! {
        #[test]
        fn round_trip(exp in 0u32..7, seed in proptest::collection::vec(-1e6f64..1e6, 64)) {
            let n = 1usize << exp;
            let m = state(seed[..n].to_vec());
            prop_assert_eq!(decode_model::<f64>(&encode_model(&m)).unwrap(), m);
        }
    }

    #[test]
    fn wire_sizes() {
        assert_eq!(sparse_wire_bytes(7, 64), 28 + 8);
        assert_eq!(sparse_wire_bytes(1, 64), 4 + 4);
        assert_eq!(sparse_wire_bytes(0, 64), 0);
        assert_eq!(dense_wire_bytes(64), 256);
    }

    #[test]
    fn f32_round_trip() {
        let m = ModelState::new(ParameterVector::new(vec![1.5f32, -2.0]).unwrap());
        assert_eq!(decode_model::<f32>(&encode_model(&m)).unwrap(), m);
    }

    #[test]
    fn truncated_payload_names_offset() {
        let bytes = encode_model(&state(vec![1.0, 2.0, 3.0, 4.0]));
        let err = decode_model::<f64>(&bytes[..bytes.len() - 3]).unwrap_err();
        match err {
            Error::Decode { offset, .. } => assert_eq!(offset, HEADER + 3 * 4 * 8),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(decode_model::<f64>(&bytes[..2]), Err(Error::Decode { offset: 0, .. })));
    }

    #[test]
    fn wrong_width_and_magic_rejected() {
        let bytes = encode_model(&state(vec![1.0, 2.0]));
        assert!(matches!(decode_model::<f32>(&bytes), Err(Error::Decode { offset: 6, .. })));
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(decode_model::<f64>(&bad), Err(Error::Decode { offset: 0, .. })));
    }
}
