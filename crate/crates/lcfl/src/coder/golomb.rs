//! Exp-Golomb side codes: prefix-free, self-delimiting integers.
//!
//! The raw variant spends exactly one coded bit per prefix/suffix bit; the
//! adaptive variant routes the prefix through a shared binary model, which
//! pays off for pulse magnitudes whose distribution is far from flat.
//! Signed values code the magnitude followed by one sign bit when nonzero,
//! so +k and -k always cost the same.

use crate::error::{Error, Result};

use super::model::SymbolModel;
use super::range::{RangeDecoder, RangeEncoder};

/// Guard against corrupt streams producing absurd prefix lengths.
const MAX_PREFIX: u32 = 48;

pub fn encode_golomb_unsigned(enc: &mut RangeEncoder, value: u64) {
    let n = value + 1;
    let bits = 63 - n.leading_zeros();
    for _ in 0..bits {
        enc.encode_bit_raw(false);
    }
    for i in (0..=bits).rev() {
        enc.encode_bit_raw((n >> i) & 1 == 1);
    }
}

pub fn decode_golomb_unsigned(dec: &mut RangeDecoder) -> Result<u64> {
    let mut bits = 0u32;
    while !dec.decode_bit_raw()? {
        bits += 1;
        if bits > MAX_PREFIX {
            return Err(Error::decode(dec.position(), "golomb prefix too long"));
        }
    }
    let mut n = 1u64;
    for _ in 0..bits {
        n = (n << 1) | u64::from(dec.decode_bit_raw()?);
    }
    Ok(n - 1)
}

pub fn encode_golomb_signed(enc: &mut RangeEncoder, value: i64) {
    encode_golomb_unsigned(enc, value.unsigned_abs());
    if value != 0 {
        enc.encode_bit_raw(value < 0);
    }
}

pub fn decode_golomb_signed(dec: &mut RangeDecoder) -> Result<i64> {
    let magnitude = decode_golomb_unsigned(dec)?;
    if magnitude == 0 {
        return Ok(0);
    }
    let negative = dec.decode_bit_raw()?;
    let signed = magnitude as i64;
    Ok(if negative { -signed } else { signed })
}

/// Signed variant of [`encode_golomb_adaptive`].
pub fn encode_golomb_signed_adaptive(
    enc: &mut RangeEncoder,
    prefix_model: &mut SymbolModel,
    value: i64,
) -> Result<()> {
    encode_golomb_adaptive(enc, prefix_model, value.unsigned_abs())?;
    if value != 0 {
        enc.encode_bit_raw(value < 0);
    }
    Ok(())
}

pub fn decode_golomb_signed_adaptive(
    dec: &mut RangeDecoder,
    prefix_model: &mut SymbolModel,
) -> Result<i64> {
    let magnitude = decode_golomb_adaptive(dec, prefix_model)?;
    if magnitude == 0 {
        return Ok(0);
    }
    let negative = dec.decode_bit_raw()?;
    let signed = magnitude as i64;
    Ok(if negative { -signed } else { signed })
}

/// Exp-Golomb with the prefix run coded through an adaptive binary model;
/// suffix bits stay raw.
pub fn encode_golomb_adaptive(
    enc: &mut RangeEncoder,
    prefix_model: &mut SymbolModel,
    value: u64,
) -> Result<()> {
    let n = value + 1;
    let bits = 63 - n.leading_zeros();
    for _ in 0..bits {
        prefix_model.encode_bit(enc, true)?;
    }
    prefix_model.encode_bit(enc, false)?;
    for i in (0..bits).rev() {
        enc.encode_bit_raw((n >> i) & 1 == 1);
    }
    Ok(())
}

pub fn decode_golomb_adaptive(
    dec: &mut RangeDecoder,
    prefix_model: &mut SymbolModel,
) -> Result<u64> {
    let mut bits = 0u32;
    while prefix_model.decode_bit(dec)? {
        bits += 1;
        if bits > MAX_PREFIX {
            return Err(Error::decode(dec.position(), "golomb prefix too long"));
        }
    }
    let mut n = 1u64;
    for _ in 0..bits {
        n = (n << 1) | u64::from(dec.decode_bit_raw()?);
    }
    Ok(n - 1)
}
