//! RIFF/WAVE reading (PCM 16/24/32-bit integer, 32-bit float) and writing.

use std::path::Path;

use crate::error::{Error, Result};

use super::ImpulseResponse;

const FORMAT_PCM: u16 = 1;
const FORMAT_FLOAT: u16 = 3;
const FORMAT_EXTENSIBLE: u16 = 0xFFFE;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SampleFormat {
    Pcm16,
    Pcm24,
    Pcm32,
    Float32,
}

impl SampleFormat {
    fn bytes(self) -> usize {
        match self {
            Self::Pcm16 => 2,
            Self::Pcm24 => 3,
            Self::Pcm32 | Self::Float32 => 4,
        }
    }
}

fn parse_err(offset: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        offset: offset as u64,
        message: message.into(),
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(parse_err(
                self.pos,
                format!("unexpected end of file reading {what} ({n} bytes needed, {} left)", self.bytes.len() - self.pos),
            ));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u16(&mut self, what: &str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().unwrap()))
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }
}

struct Fmt {
    format: SampleFormat,
    channels: usize,
    sample_rate: u32,
}

fn parse_fmt(c: &mut Cursor, start: usize, len: usize) -> Result<Fmt> {
    if len < 16 {
        return Err(parse_err(start, format!("fmt chunk too short ({len} bytes)")));
    }
    let mut tag = c.u16("format tag")?;
    let channels = c.u16("channel count")? as usize;
    let sample_rate = c.u32("sample rate")?;
    let _byte_rate = c.u32("byte rate")?;
    let block_align = c.u16("block align")? as usize;
    let bits = c.u16("bits per sample")?;
    if tag == FORMAT_EXTENSIBLE {
        if len < 40 {
            return Err(parse_err(start, "extensible fmt chunk too short"));
        }
        c.take(8, "extension header")?;
        tag = c.u16("sub-format")?;
        c.take(14, "sub-format GUID")?;
        c.take(len - 40, "fmt padding")?;
    } else {
        c.take(len - 16, "fmt extension")?;
    }
    let format = match (tag, bits) {
        (FORMAT_PCM, 16) => SampleFormat::Pcm16,
        (FORMAT_PCM, 24) => SampleFormat::Pcm24,
        (FORMAT_PCM, 32) => SampleFormat::Pcm32,
        (FORMAT_FLOAT, 32) => SampleFormat::Float32,
        _ => {
            return Err(Error::Unsupported(format!(
                "WAV codec with format tag {tag} and {bits} bits per sample"
            )))
        }
    };
    if channels == 0 || sample_rate == 0 {
        return Err(parse_err(start, "zero channels or zero sample rate"));
    }
    if block_align != channels * format.bytes() {
        return Err(parse_err(start, format!("block align {block_align} inconsistent with format")));
    }
    Ok(Fmt {
        format,
        channels,
        sample_rate,
    })
}

fn decode(format: SampleFormat, b: &[u8]) -> f64 {
    match format {
        SampleFormat::Pcm16 => i16::from_le_bytes([b[0], b[1]]) as f64 / 32768.0,
        SampleFormat::Pcm24 => (i32::from_le_bytes([0, b[0], b[1], b[2]]) >> 8) as f64 / 8_388_608.0,
        SampleFormat::Pcm32 => i32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64 / 2_147_483_648.0,
        SampleFormat::Float32 => f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
    }
}

/// Parses a WAV file image into one impulse response per channel.
pub fn parse_wav(bytes: &[u8]) -> Result<Vec<ImpulseResponse>> {
    let mut c = Cursor { bytes, pos: 0 };
    if c.take(4, "RIFF tag")? != b"RIFF" {
        return Err(parse_err(0, "missing RIFF tag"));
    }
    let _riff_len = c.u32("RIFF size")?;
    if c.take(4, "WAVE tag")? != b"WAVE" {
        return Err(parse_err(8, "missing WAVE tag"));
    }
    let mut fmt = None;
    loop {
        let chunk_at = c.pos;
        if chunk_at == bytes.len() {
            return Err(parse_err(chunk_at, "no data chunk"));
        }
        let id: [u8; 4] = c.take(4, "chunk id")?.try_into().unwrap();
        let len = c.u32("chunk size")? as usize;
        match &id {
            b"fmt " => fmt = Some(parse_fmt(&mut c, chunk_at, len)?),
            b"data" => {
                let f = fmt.ok_or_else(|| parse_err(chunk_at, "data chunk before fmt chunk"))?;
                let data = c.take(len, "sample data")?;
                let frame = f.channels * f.format.bytes();
                if data.is_empty() {
                    return Err(parse_err(chunk_at, "zero-length data chunk"));
                }
                if data.len() % frame != 0 {
                    return Err(parse_err(chunk_at + 8 + data.len(), "data length is not a whole number of frames"));
                }
                let frames = data.len() / frame;
                let w = f.format.bytes();
                return (0..f.channels)
                    .map(|ch| {
                        let samples = (0..frames)
                            .map(|i| decode(f.format, &data[i * frame + ch * w..]))
                            .collect();
                        ImpulseResponse::new(samples, f.sample_rate as f64, ch)
                    })
                    .collect();
            }
            _ => {
                c.take(len, "unknown chunk")?;
            }
        }
        if len % 2 == 1 && c.pos < bytes.len() {
            c.take(1, "chunk pad byte")?;
        }
    }
}

pub fn read_wav(path: &Path) -> Result<Vec<ImpulseResponse>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_wav(&bytes)
}

/// Encodes channels of equal length; samples are clipped to `[-1, 1]` for
/// integer formats.
pub fn encode_wav(channels: &[Vec<f64>], sample_rate: u32, format: SampleFormat) -> Result<Vec<u8>> {
    let frames = channels.first().map_or(0, Vec::len);
    if channels.is_empty() || frames == 0 || channels.iter().any(|c| c.len() != frames) {
        return Err(Error::invalid("need at least one non-empty channel, all of equal length"));
    }
    let w = format.bytes();
    let data_len = frames * channels.len() * w;
    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&((36 + data_len) as u32).to_le_bytes());
    out.extend_from_slice(b"WAVEfmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    let tag = if format == SampleFormat::Float32 { FORMAT_FLOAT } else { FORMAT_PCM };
    out.extend_from_slice(&tag.to_le_bytes());
    out.extend_from_slice(&(channels.len() as u16).to_le_bytes());
    out.extend_from_slice(&sample_rate.to_le_bytes());
    out.extend_from_slice(&(sample_rate * (channels.len() * w) as u32).to_le_bytes());
    out.extend_from_slice(&((channels.len() * w) as u16).to_le_bytes());
    out.extend_from_slice(&((w * 8) as u16).to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    let quant = |x: f64, full: f64| (x.clamp(-1.0, 1.0) * full).round().clamp(-full, full - 1.0) as i64;
    for i in 0..frames {
        for ch in channels {
            let x = ch[i];
            match format {
                SampleFormat::Pcm16 => out.extend_from_slice(&(quant(x, 32768.0) as i16).to_le_bytes()),
                SampleFormat::Pcm24 => out.extend_from_slice(&(quant(x, 8_388_608.0) as i32).to_le_bytes()[..3]),
                SampleFormat::Pcm32 => out.extend_from_slice(&(quant(x, 2_147_483_648.0) as i32).to_le_bytes()),
                SampleFormat::Float32 => out.extend_from_slice(&(x as f32).to_le_bytes()),
            }
        }
    }
    Ok(out)
}

pub fn write_wav(path: &Path, channels: &[Vec<f64>], sample_rate: u32, format: SampleFormat) -> Result<()> {
    std::fs::write(path, encode_wav(channels, sample_rate, format)?).map_err(|e| Error::io(path, e))
}
