//! Entropy coding: a carry-free range coder with adaptive frequency models,
//! exp-Golomb side codes, and the `LCFL` container framing.
//!
//! Rate accounting is exact and per-plane: each plane is coded into its own
//! range-coder payload, so a plane's rate is simply the bit length of its
//! payload and changing how one plane is coded can never move bits into
//! another.

mod golomb;
mod model;
mod range;

pub use golomb::{
    decode_golomb_adaptive, decode_golomb_signed, decode_golomb_signed_adaptive,
    decode_golomb_unsigned, encode_golomb_adaptive, encode_golomb_signed,
    encode_golomb_signed_adaptive, encode_golomb_unsigned,
};
pub use model::SymbolModel;
pub use range::{RangeDecoder, RangeEncoder};

use crate::error::{Error, Result};

/// A finished coded payload. `bit_length` is the exact number of coded bits:
/// the decoder consumes exactly these bits (the container adds no padding).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bitstream {
    pub bytes: Vec<u8>,
    pub bit_length: u64,
}

impl Bitstream {
    pub fn from_bytes(bytes: Vec<u8>) -> Self {
        let bit_length = bytes.len() as u64 * 8;
        Bitstream { bytes, bit_length }
    }
}

/// Chroma subsampling of a coded image.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsampling {
    S444,
    S420,
}

/// Chroma AC coding mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChromaMode {
    None,
    FdCfl,
    PvqCfl,
}

impl ChromaMode {
    pub fn label(self) -> &'static str {
        match self {
            ChromaMode::None => "none",
            ChromaMode::FdCfl => "fd-cfl",
            ChromaMode::PvqCfl => "pvq-cfl",
        }
    }
}

/// Everything the decoder needs before reading plane payloads.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContainerHeader {
    pub width: u32,
    pub height: u32,
    pub subsampling: Subsampling,
    pub block_size: u8,
    pub chroma_mode: ChromaMode,
    pub q_gain: f64,
}

const MAGIC: &[u8; 4] = b"LCFL";
const VERSION: u8 = 1;

/// Serializes the header and the three plane payloads. All multi-byte
/// fields are big-endian; `q_gain` is the IEEE-754 binary64 bit pattern.
pub fn write_container(header: &ContainerHeader, planes: &[Bitstream; 3]) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&header.width.to_be_bytes());
    out.extend_from_slice(&header.height.to_be_bytes());
    out.push(match header.subsampling {
        Subsampling::S444 => 0,
        Subsampling::S420 => 1,
    });
    out.push(header.block_size);
    out.push(match header.chroma_mode {
        ChromaMode::None => 0,
        ChromaMode::FdCfl => 1,
        ChromaMode::PvqCfl => 2,
    });
    out.extend_from_slice(&header.q_gain.to_be_bytes());
    for plane in planes {
        out.extend_from_slice(&(plane.bytes.len() as u32).to_be_bytes());
        out.extend_from_slice(&plane.bytes);
    }
    out
}

/// Parses a container, returning the header and the three plane payloads.
pub fn read_container(data: &[u8]) -> Result<(ContainerHeader, [Bitstream; 3])> {
    let need = |pos: usize, len: usize| -> Result<()> {
        if pos + len > data.len() {
            Err(Error::decode(pos, "container truncated"))
        } else {
            Ok(())
        }
    };
    need(0, 4)?;
    if &data[0..4] != MAGIC {
        return Err(Error::decode(0, "bad magic, not an LCFL stream"));
    }
    need(4, 1)?;
    if data[4] != VERSION {
        return Err(Error::decode(4, format!("unsupported version {}", data[4])));
    }
    need(5, 8)?;
    let width = u32::from_be_bytes(data[5..9].try_into().unwrap());
    let height = u32::from_be_bytes(data[9..13].try_into().unwrap());
    need(13, 3)?;
    let subsampling = match data[13] {
        0 => Subsampling::S444,
        1 => Subsampling::S420,
        other => return Err(Error::decode(13, format!("unknown subsampling tag {other}"))),
    };
    let block_size = data[14];
    let chroma_mode = match data[15] {
        0 => ChromaMode::None,
        1 => ChromaMode::FdCfl,
        2 => ChromaMode::PvqCfl,
        other => return Err(Error::decode(15, format!("unknown chroma mode tag {other}"))),
    };
    need(16, 8)?;
    let q_gain = f64::from_be_bytes(data[16..24].try_into().unwrap());
    if !q_gain.is_finite() || q_gain <= 0.0 {
        return Err(Error::decode(16, format!("invalid q_gain {q_gain}")));
    }
    let mut pos = 24usize;
    let mut planes = Vec::with_capacity(3);
    for _ in 0..3 {
        need(pos, 4)?;
        let len = u32::from_be_bytes(data[pos..pos + 4].try_into().unwrap()) as usize;
        pos += 4;
        need(pos, len)?;
        planes.push(Bitstream::from_bytes(data[pos..pos + len].to_vec()));
        pos += len;
    }
    if pos != data.len() {
        return Err(Error::decode(pos, "trailing bytes after plane payloads"));
    }
    let header = ContainerHeader {
        width,
        height,
        subsampling,
        block_size,
        chroma_mode,
        q_gain,
    };
    Ok((header, [planes.remove(0), planes.remove(0), planes.remove(0)]))
}

/// Convenience wrapper: encode one symbol through an adaptive model.
pub fn encode_symbol(enc: &mut RangeEncoder, model: &mut SymbolModel, symbol: usize) -> Result<()> {
    model.encode(enc, symbol)
}

/// Convenience wrapper: decode one symbol through an adaptive model.
pub fn decode_symbol(dec: &mut RangeDecoder, model: &mut SymbolModel) -> Result<usize> {
    model.decode(dec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn container_round_trips_bit_exactly() {
        let header = ContainerHeader {
            width: 129,
            height: 64,
            subsampling: Subsampling::S420,
            block_size: 8,
            chroma_mode: ChromaMode::PvqCfl,
            q_gain: 2.75,
        };
        let planes = [
            Bitstream::from_bytes(vec![1, 2, 3]),
            Bitstream::from_bytes(vec![]),
            Bitstream::from_bytes(vec![250; 77]),
        ];
        let bytes = write_container(&header, &planes);
        let (h2, p2) = read_container(&bytes).unwrap();
        assert_eq!(h2, header);
        assert_eq!(p2, planes);
        let bytes2 = write_container(&h2, &p2);
        assert_eq!(bytes, bytes2);
    }

    #[test]
    fn container_rejects_corruption() {
        let header = ContainerHeader {
            width: 16,
            height: 16,
            subsampling: Subsampling::S444,
            block_size: 4,
            chroma_mode: ChromaMode::None,
            q_gain: 1.0,
        };
        let planes = [
            Bitstream::from_bytes(vec![9; 4]),
            Bitstream::from_bytes(vec![9; 4]),
            Bitstream::from_bytes(vec![9; 4]),
        ];
        let bytes = write_container(&header, &planes);
        assert!(read_container(&bytes[..bytes.len() - 3]).is_err());
        let mut bad_magic = bytes.clone();
        bad_magic[0] = b'X';
        assert!(read_container(&bad_magic).is_err());
        let mut bad_mode = bytes.clone();
        bad_mode[15] = 9;
        assert!(read_container(&bad_mode).is_err());
        let mut trailing = bytes;
        trailing.push(0);
        assert!(read_container(&trailing).is_err());
    }
}
