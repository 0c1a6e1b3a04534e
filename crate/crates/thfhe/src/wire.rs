//! Versioned little-endian ciphertext format.
//!
//! ```text
//! magic "OFLC" | version u16 | space u8 | level u8 | period u32 | scale_bits u32
//! | session u64 | coefficient width u8 | (count u32, count × width bytes) × 2
//! ```
//! The coefficient width is the byte length of the level's modulus.

use crate::backend::Space;
use crate::bigint::U256;
use crate::error::{Error, Result};
use crate::ring::Poly;
use crate::scheme::Ciphertext;

pub const MAGIC: &[u8; 4] = b"OFLC";
pub const VERSION: u16 = 1;

pub(crate) fn space_tag(space: Space) -> u8 {
    match space {
        Space::Eval => 0,
        Space::Dec => 1,
    }
}

pub(crate) fn space_from_tag(tag: u8, offset: usize) -> Result<Space> {
    match tag {
        0 => Ok(Space::Eval),
        1 => Ok(Space::Dec),
        t => Err(Error::Decode { offset, reason: format!("unknown space tag {t}") }),
    }
}

pub fn encode_ciphertext(ct: &Ciphertext) -> Vec<u8> {
    let max_bits = ct.c1.0.iter().chain(&ct.c2.0).map(U256::bit_len).max().unwrap_or(0);
    let width = max_bits.div_ceil(8).max(1) as usize;
    let mut out = Vec::with_capacity(32 + 2 * (4 + width * ct.c1.len()));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(space_tag(ct.space));
    out.push(ct.level as u8);
    out.extend_from_slice(&(ct.period as u32).to_le_bytes());
    out.extend_from_slice(&ct.scale_bits.to_le_bytes());
    out.extend_from_slice(&ct.session.to_le_bytes());
    out.push(width as u8);
    for poly in [&ct.c1, &ct.c2] {
        out.extend_from_slice(&(poly.len() as u32).to_le_bytes());
        for c in &poly.0 {
            out.extend_from_slice(&c.to_le_bytes()[..width]);
        }
    }
    out
}

pub(crate) struct Reader<'a> {
    pub bytes: &'a [u8],
    pub pos: usize,
}

impl<'a> Reader<'a> {
    pub fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::Decode { offset: self.pos, reason: format!("truncated {what}") });
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    pub fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    pub fn u16(&mut self, what: &str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().unwrap()))
    }

    pub fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    pub fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    pub fn header(&mut self, magic: &[u8; 4]) -> Result<()> {
        if self.take(4, "magic")? != magic {
            return Err(Error::Decode { offset: 0, reason: "bad magic".into() });
        }
        let at = self.pos;
        let v = self.u16("version")?;
        if v != VERSION {
            return Err(Error::Decode { offset: at, reason: format!("unsupported version {v}") });
        }
        Ok(())
    }

    pub fn finish(&self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(Error::Decode { offset: self.pos, reason: "trailing bytes".into() });
        }
        Ok(())
    }
}

pub fn decode_ciphertext(bytes: &[u8]) -> Result<Ciphertext> {
    let mut r = Reader { bytes, pos: 0 };
    r.header(MAGIC)?;
    let at = r.pos;
    let space = space_from_tag(r.u8("space")?, at)?;
    let level = r.u8("level")? as u32;
    let period = r.u32("period")? as usize;
    let scale_bits = r.u32("scale")?;
    let session = r.u64("session")?;
    let at = r.pos;
    let width = r.u8("width")? as usize;
    if width == 0 || width > 32 {
        return Err(Error::Decode { offset: at, reason: format!("coefficient width {width}") });
    }
    let mut polys = Vec::with_capacity(2);
    for _ in 0..2 {
        let count = r.u32("coefficient count")? as usize;
        let raw = r.take(count * width, "coefficients")?;
        polys.push(Poly(raw.chunks_exact(width).map(U256::from_le_slice).collect()));
    }
    r.finish()?;
    let c2 = polys.pop().unwrap();
    let c1 = polys.pop().unwrap();
    if c1.len() != c2.len() {
        return Err(Error::Decode { offset: bytes.len(), reason: "component lengths differ".into() });
    }
    Ok(Ciphertext { c1, c2, level, space, period, scale_bits, session })
}
