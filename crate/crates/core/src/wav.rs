//! WAV (RIFF) reading and writing. Accepts 16-bit PCM and 32-bit float.

use std::io::{Read, Seek, Write};
use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use crate::error::{Error, Result};
use crate::pipeline::AudioBuffer;

/// Sample encoding of written files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WavEncoding {
    #[default]
    Pcm16,
    Float32,
}

pub fn read_wav(path: impl AsRef<Path>) -> Result<AudioBuffer> {
    let path = path.as_ref();
    let reader = WavReader::open(path).map_err(|e| match e {
        hound::Error::IoError(io) => Error::Io(io),
        other => Error::Format(format!("{}: {other}", path.display())),
    })?;
    decode(reader)
}

pub fn read_wav_bytes(bytes: &[u8]) -> Result<AudioBuffer> {
    let reader = WavReader::new(std::io::Cursor::new(bytes))
        .map_err(|e| Error::Format(format!("not a readable WAV stream: {e}")))?;
    decode(reader)
}

fn decode<R: Read>(reader: WavReader<R>) -> Result<AudioBuffer> {
    let spec = reader.spec();
    let channels = spec.channels as usize;
    if channels == 0 {
        return Err(Error::Format("WAV declares zero channels".into()));
    }
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) => reader
            .into_samples::<i16>()
            .map(|s| s.map(|v| v as f64 / 32768.0))
            .collect::<std::result::Result<_, _>>()?,
        (SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>()?,
        (fmt, bits) => {
            return Err(Error::Format(format!(
                "{bits}-bit {fmt:?} samples; expected 16-bit PCM or 32-bit float"
            )))
        }
    };
    let frames = interleaved.len() / channels;
    let mut out = vec![Vec::with_capacity(frames); channels];
    for frame in interleaved.chunks_exact(channels) {
        for (ch, v) in out.iter_mut().zip(frame) {
            ch.push(*v);
        }
    }
    Ok(AudioBuffer {
        sample_rate: spec.sample_rate,
        channels: out,
    })
}

pub fn write_wav(path: impl AsRef<Path>, audio: &AudioBuffer, encoding: WavEncoding) -> Result<()> {
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    encode(file, audio, encoding)
}

pub fn write_wav_bytes(audio: &AudioBuffer, encoding: WavEncoding) -> Result<Vec<u8>> {
    let mut cursor = std::io::Cursor::new(Vec::new());
    encode(&mut cursor, audio, encoding)?;
    Ok(cursor.into_inner())
}

fn encode<W: Write + Seek>(sink: W, audio: &AudioBuffer, encoding: WavEncoding) -> Result<()> {
    let n_ch = audio.channels.len();
    if n_ch == 0 || audio.channels.iter().any(|c| c.len() != audio.len()) {
        return Err(Error::Input("channels must be non-empty and of equal length".into()));
    }
    let (bits, fmt) = match encoding {
        WavEncoding::Pcm16 => (16, SampleFormat::Int),
        WavEncoding::Float32 => (32, SampleFormat::Float),
    };
    let spec = WavSpec {
        channels: n_ch as u16,
        sample_rate: audio.sample_rate,
        bits_per_sample: bits,
        sample_format: fmt,
    };
    let mut w = WavWriter::new(sink, spec)?;
    for i in 0..audio.len() {
        for ch in &audio.channels {
            match encoding {
                WavEncoding::Pcm16 => w.write_sample(to_pcm16(ch[i]))?,
                WavEncoding::Float32 => w.write_sample(ch[i] as f32)?,
            }
        }
    }
    w.finalize()?;
    Ok(())
}

fn to_pcm16(x: f64) -> i16 {
    (x.clamp(-1.0, 1.0) * 32767.0).round() as i16
}
