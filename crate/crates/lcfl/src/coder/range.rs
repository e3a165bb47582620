//! Carry-free range coder.
//!
//! State is a 48-bit window: `low + range <= 2^48` is maintained after every
//! operation, so a symbol update can never carry out of the window and bytes
//! are emitted only once their value is final. When the interval straddles a
//! top-byte boundary and gets too small, it is clamped to the part below the
//! boundary (always a shrink, never a widen), which settles the byte at a
//! tiny worst-case rate cost. Totals are capped at 2^16 while `range` is at
//! least 2^32 whenever a symbol is coded, so per-symbol precision loss is
//! below 2^-16.

use crate::error::{Error, Result};

const WINDOW: u64 = 1 << 48;
const TOP_SHIFT: u32 = 40;
const LOW_MASK: u64 = (1 << TOP_SHIFT) - 1;
const NORM_MIN: u64 = 1 << 32;

/// Maximum cumulative frequency total accepted per symbol.
pub const MAX_TOTAL: u32 = 1 << 16;

pub struct RangeEncoder {
    low: u64,
    range: u64,
    bytes: Vec<u8>,
}

impl Default for RangeEncoder {
    fn default() -> Self {
        Self::new()
    }
}

impl RangeEncoder {
    pub fn new() -> Self {
        RangeEncoder {
            low: 0,
            range: WINDOW,
            bytes: Vec::new(),
        }
    }

    /// Bytes emitted so far; the finished stream adds a small tail.
    pub fn bytes_written(&self) -> usize {
        self.bytes.len()
    }

    /// Narrows the interval to the symbol spanning cumulative frequencies
    /// [start, start + size) of total. The last symbol absorbs the division
    /// residue.
    pub fn encode(&mut self, start: u32, size: u32, total: u32) {
        debug_assert!(size > 0 && start + size <= total && total <= MAX_TOTAL);
        debug_assert!(self.range >= NORM_MIN);
        let rt = self.range / u64::from(total);
        self.low += u64::from(start) * rt;
        self.range = if start + size == total {
            self.range - u64::from(start) * rt
        } else {
            u64::from(size) * rt
        };
        self.normalize();
    }

    /// One bit at probability 1/2; costs exactly one coded bit.
    pub fn encode_bit_raw(&mut self, bit: bool) {
        self.encode(u32::from(bit), 1, 2);
    }

    fn emit_byte(&mut self) {
        self.bytes.push((self.low >> TOP_SHIFT) as u8);
        self.low = (self.low & LOW_MASK) << 8;
        self.range <<= 8;
    }

    fn normalize(&mut self) {
        loop {
            if (self.low >> TOP_SHIFT) == ((self.low + self.range - 1) >> TOP_SHIFT) {
                self.emit_byte();
            } else if self.range < NORM_MIN {
                // Straddling a boundary with a small interval: keep the part
                // below the boundary so the top byte settles.
                self.range = (((self.low >> TOP_SHIFT) + 1) << TOP_SHIFT) - self.low;
            } else {
                break;
            }
        }
    }

    /// Flushes the final interval. The chosen code value has forty trailing
    /// zero bits, which is what the decoder pads with after the payload.
    pub fn finish(mut self) -> Vec<u8> {
        while self.range <= (1 << TOP_SHIFT) {
            if (self.low >> TOP_SHIFT) == ((self.low + self.range - 1) >> TOP_SHIFT) {
                self.emit_byte();
            } else {
                self.range = (((self.low >> TOP_SHIFT) + 1) << TOP_SHIFT) - self.low;
            }
        }
        self.low += 1 << TOP_SHIFT;
        self.bytes.push((self.low >> TOP_SHIFT) as u8);
        self.bytes
    }
}

pub struct RangeDecoder<'a> {
    data: &'a [u8],
    pos: usize,
    low: u64,
    range: u64,
    code: u64,
}

impl<'a> RangeDecoder<'a> {
    pub fn new(data: &'a [u8]) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::decode(0, "empty range-coded stream"));
        }
        let mut dec = RangeDecoder {
            data,
            pos: 0,
            low: 0,
            range: WINDOW,
            code: 0,
        };
        for _ in 0..6 {
            dec.code = (dec.code << 8) | u64::from(dec.next_byte());
        }
        Ok(dec)
    }

    /// Byte position reached in the payload, for error reporting.
    pub fn position(&self) -> usize {
        self.pos
    }

    fn next_byte(&mut self) -> u8 {
        // Reads past the payload return the zero padding the encoder's
        // finish() implies.
        let b = self.data.get(self.pos).copied().unwrap_or(0);
        self.pos += 1;
        b
    }

    /// The cumulative-frequency value the next symbol covers. Pair with
    /// [`RangeDecoder::update`] once the symbol is identified.
    pub fn decode_value(&mut self, total: u32) -> Result<u32> {
        debug_assert!(total <= MAX_TOTAL);
        debug_assert!(self.range >= NORM_MIN);
        let rt = self.range / u64::from(total);
        if self.code < self.low {
            return Err(Error::decode(self.pos, "corrupt stream: code below interval"));
        }
        let dv = (self.code - self.low) / rt;
        Ok(dv.min(u64::from(total) - 1) as u32)
    }

    /// Mirrors [`RangeEncoder::encode`] for the identified symbol.
    pub fn update(&mut self, start: u32, size: u32, total: u32) {
        let rt = self.range / u64::from(total);
        self.low += u64::from(start) * rt;
        self.range = if start + size == total {
            self.range - u64::from(start) * rt
        } else {
            u64::from(size) * rt
        };
        self.normalize();
    }

    pub fn decode_bit_raw(&mut self) -> Result<bool> {
        let dv = self.decode_value(2)?;
        self.update(dv, 1, 2);
        Ok(dv == 1)
    }

    fn consume_byte(&mut self) {
        let b = self.next_byte();
        self.code = ((self.code & LOW_MASK) << 8) | u64::from(b);
        self.low = (self.low & LOW_MASK) << 8;
        self.range <<= 8;
    }

    fn normalize(&mut self) {
        loop {
            if (self.low >> TOP_SHIFT) == ((self.low + self.range - 1) >> TOP_SHIFT) {
                self.consume_byte();
            } else if self.range < NORM_MIN {
                self.range = (((self.low >> TOP_SHIFT) + 1) << TOP_SHIFT) - self.low;
            } else {
                break;
            }
        }
    }
}
