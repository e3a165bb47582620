//! PPM/PGM and single-frame Y4M ingestion and output, 8-bit only.

use std::fs;
use std::path::Path;

use crate::coder::Subsampling;
use crate::error::{Error, Result};
use crate::plane::PixelPlane;

use super::color::{self, RgbImage};
use super::Frame;

/// A decoded input file, before conversion to the encoder's colorspace.
#[derive(Debug, Clone)]
pub enum LoadedImage {
    Rgb(RgbImage),
    Gray { width: usize, height: usize, samples: Vec<u8> },
    Ycbcr(Frame),
}

impl LoadedImage {
    /// Converts to a frame at the requested subsampling. Grayscale input
    /// gets neutral chroma; 4:2:0 input requested as 4:4:4 is upsampled by
    /// duplication.
    pub fn into_frame(self, target: Subsampling) -> Result<Frame> {
        let full = match self {
            LoadedImage::Rgb(img) => color::rgb_to_ycbcr(&img),
            LoadedImage::Gray { width, height, samples } => {
                let y = PixelPlane::from_u8(width, height, &samples)?;
                let mut cb = PixelPlane::new(width, height);
                let mut cr = PixelPlane::new(width, height);
                cb.shift(128.0);
                cr.shift(128.0);
                Frame {
                    y,
                    cb,
                    cr,
                    subsampling: Subsampling::S444,
                }
            }
            LoadedImage::Ycbcr(frame) => match (frame.subsampling, target) {
                (Subsampling::S420, Subsampling::S420) => return Ok(frame),
                (Subsampling::S420, Subsampling::S444) => color::upsample_420(&frame),
                _ => frame,
            },
        };
        match target {
            Subsampling::S444 => Ok(full),
            Subsampling::S420 => color::downsample_420(&full),
        }
    }
}

/// Reads a PPM (P6), PGM (P5) or single-frame Y4M file, sniffing by magic.
pub fn read_image(path: &Path) -> Result<LoadedImage> {
    let data = fs::read(path)?;
    if data.starts_with(b"P6") {
        read_ppm(&data).map(LoadedImage::Rgb)
    } else if data.starts_with(b"P5") {
        let (width, height, samples) = read_pnm_gray(&data)?;
        Ok(LoadedImage::Gray { width, height, samples })
    } else if data.starts_with(b"YUV4MPEG2") {
        read_y4m(&data).map(LoadedImage::Ycbcr)
    } else {
        Err(Error::Format(format!(
            "{}: not a P5/P6 PNM or Y4M file",
            path.display()
        )))
    }
}

/// Skips PNM whitespace and `#` comments, returning the next token.
fn pnm_token<'a>(data: &'a [u8], pos: &mut usize) -> Result<&'a [u8]> {
    let err = || Error::Format("truncated PNM header".to_string());
    loop {
        while *pos < data.len() && data[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos >= data.len() {
            return Err(err());
        }
        if data[*pos] == b'#' {
            while *pos < data.len() && data[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        let start = *pos;
        while *pos < data.len() && !data[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        return Ok(&data[start..*pos]);
    }
}

fn pnm_number(data: &[u8], pos: &mut usize) -> Result<usize> {
    let tok = pnm_token(data, pos)?;
    std::str::from_utf8(tok)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Format("bad number in PNM header".to_string()))
}

fn read_pnm_payload(data: &[u8], magic: &[u8], channels: usize) -> Result<(usize, usize, Vec<u8>)> {
    let mut pos = 0usize;
    if pnm_token(data, &mut pos)? != magic {
        return Err(Error::Format("unexpected PNM magic".to_string()));
    }
    let width = pnm_number(data, &mut pos)?;
    let height = pnm_number(data, &mut pos)?;
    let maxval = pnm_number(data, &mut pos)?;
    if maxval != 255 {
        return Err(Error::Format(format!("only maxval 255 supported, got {maxval}")));
    }
    // Exactly one whitespace byte separates header and payload.
    pos += 1;
    let need = width * height * channels;
    if data.len() < pos + need {
        return Err(Error::Format("PNM payload truncated".to_string()));
    }
    Ok((width, height, data[pos..pos + need].to_vec()))
}

pub fn read_ppm(data: &[u8]) -> Result<RgbImage> {
    let (width, height, payload) = read_pnm_payload(data, b"P6", 3)?;
    RgbImage::new(width, height, payload)
}

fn read_pnm_gray(data: &[u8]) -> Result<(usize, usize, Vec<u8>)> {
    read_pnm_payload(data, b"P5", 1)
}

pub fn write_ppm(img: &RgbImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.data);
    out
}

pub fn write_pgm(width: usize, height: usize, samples: &[u8]) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(samples);
    out
}

/// Single-frame Y4M: C420 (and its jpeg/mpeg2 siting aliases, treated
/// identically) or C444.
pub fn read_y4m(data: &[u8]) -> Result<Frame> {
    let header_end = data
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::Format("missing Y4M header terminator".to_string()))?;
    let header = std::str::from_utf8(&data[..header_end])
        .map_err(|_| Error::Format("Y4M header is not ASCII".to_string()))?;
    let mut width = None;
    let mut height = None;
    let mut subsampling = Subsampling::S420;
    for field in header.split(' ').skip(1) {
        match field.chars().next() {
            Some('W') => width = field[1..].parse::<usize>().ok(),
            Some('H') => height = field[1..].parse::<usize>().ok(),
            Some('C') => {
                subsampling = match &field[1..] {
                    "420" | "420jpeg" | "420mpeg2" | "420paldv" => Subsampling::S420,
                    "444" => Subsampling::S444,
                    other => {
                        return Err(Error::Format(format!("unsupported Y4M colorspace C{other}")))
                    }
                }
            }
            _ => {}
        }
    }
    let (width, height) = match (width, height) {
        (Some(w), Some(h)) if w > 0 && h > 0 => (w, h),
        _ => return Err(Error::Format("Y4M header missing dimensions".to_string())),
    };
    let mut pos = header_end + 1;
    let frame_end = data[pos..]
        .iter()
        .position(|&b| b == b'\n')
        .map(|i| pos + i)
        .ok_or_else(|| Error::Format("missing Y4M FRAME marker".to_string()))?;
    if !data[pos..].starts_with(b"FRAME") {
        return Err(Error::Format("expected FRAME marker".to_string()));
    }
    pos = frame_end + 1;
    let (cw, ch) = match subsampling {
        Subsampling::S444 => (width, height),
        Subsampling::S420 => {
            if width % 2 != 0 || height % 2 != 0 {
                return Err(Error::Format("C420 needs even dimensions".to_string()));
            }
            (width / 2, height / 2)
        }
    };
    let need = width * height + 2 * cw * ch;
    if data.len() < pos + need {
        return Err(Error::Format("Y4M frame payload truncated".to_string()));
    }
    let y = PixelPlane::from_u8(width, height, &data[pos..pos + width * height])?;
    pos += width * height;
    let cb = PixelPlane::from_u8(cw, ch, &data[pos..pos + cw * ch])?;
    pos += cw * ch;
    let cr = PixelPlane::from_u8(cw, ch, &data[pos..pos + cw * ch])?;
    Ok(Frame {
        y,
        cb,
        cr,
        subsampling,
    })
}

pub fn write_y4m(frame: &Frame) -> Vec<u8> {
    let colorspace = match frame.subsampling {
        Subsampling::S444 => "C444",
        Subsampling::S420 => "C420jpeg",
    };
    let mut out = format!(
        "YUV4MPEG2 W{} H{} F25:1 Ip A1:1 {colorspace}\nFRAME\n",
        frame.y.width(),
        frame.y.height()
    )
    .into_bytes();
    out.extend_from_slice(&frame.y.to_u8());
    out.extend_from_slice(&frame.cb.to_u8());
    out.extend_from_slice(&frame.cr.to_u8());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ppm_round_trip_with_comments() {
        let img = RgbImage::new(2, 2, vec![1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12]).unwrap();
        let bytes = write_ppm(&img);
        assert_eq!(read_ppm(&bytes).unwrap(), img);
        let commented = b"P6 # a comment\n# another\n2 2\n255\n".to_vec();
        let mut data = commented;
        data.extend_from_slice(&img.data);
        assert_eq!(read_ppm(&data).unwrap(), img);
    }

    #[test]
    fn pgm_parses() {
        let bytes = write_pgm(3, 1, &[9, 8, 7]);
        let (w, h, s) = read_pnm_gray(&bytes).unwrap();
        assert_eq!((w, h), (3, 1));
        assert_eq!(s, vec![9, 8, 7]);
    }

    #[test]
    fn y4m_round_trip_both_colorspaces() {
        let frame444 = Frame {
            y: PixelPlane::from_u8(4, 2, &[10, 20, 30, 40, 50, 60, 70, 80]).unwrap(),
            cb: PixelPlane::from_u8(4, 2, &[1, 2, 3, 4, 5, 6, 7, 8]).unwrap(),
            cr: PixelPlane::from_u8(4, 2, &[9, 9, 9, 9, 8, 8, 8, 8]).unwrap(),
            subsampling: Subsampling::S444,
        };
        let bytes = write_y4m(&frame444);
        assert_eq!(read_y4m(&bytes).unwrap(), frame444);

        let frame420 = Frame {
            y: frame444.y.clone(),
            cb: PixelPlane::from_u8(2, 1, &[100, 110]).unwrap(),
            cr: PixelPlane::from_u8(2, 1, &[120, 130]).unwrap(),
            subsampling: Subsampling::S420,
        };
        let bytes = write_y4m(&frame420);
        assert_eq!(read_y4m(&bytes).unwrap(), frame420);
    }

    #[test]
    fn malformed_inputs_error() {
        assert!(read_ppm(b"P6\n2 2\n65535\n").is_err());
        assert!(read_ppm(b"P6\n2 2\n255\nxx").is_err());
        assert!(read_y4m(b"YUV4MPEG2 W4 H2 C999\nFRAME\n").is_err());
        assert!(read_y4m(b"YUV4MPEG2 W4 H2 C444\nFRAME\n____").is_err());
    }

    #[test]
    fn gray_becomes_neutral_chroma_frame() {
        let img = LoadedImage::Gray {
            width: 2,
            height: 2,
            samples: vec![5, 6, 7, 8],
        };
        let frame = img.into_frame(Subsampling::S444).unwrap();
        assert!(frame.cb.samples().iter().all(|&v| v == 128.0));
        assert_eq!(frame.y.get(1, 1), 8.0);
    }
}
