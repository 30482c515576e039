//! JSON control messages and the binary audio chunk layout.

use dualmic_core::pipeline::FrameTelemetry;
use dualmic_core::EnhanceConfig;
use serde::{Deserialize, Serialize};

/// Bytes before the sample payload: frame index (u32), hop (u16), flags (u16).
pub const CHUNK_HEADER_LEN: usize = 8;
/// Flag bit set when the detector reported speech for the chunk's frame.
pub const FLAG_VAD: u16 = 1;

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ClientMessage {
    Open(Box<OpenRequest>),
    SetWeight(f64),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpenRequest {
    pub demo: Option<String>,
    pub upload: Option<String>,
    pub config: Option<EnhanceConfig>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Session {
        session_id: String,
        source: String,
        sample_rate: u32,
        hop: usize,
        weight: f64,
        samples: usize,
    },
    Ack {
        weight: f64,
        applies_at: u64,
    },
    Telemetry(FrameTelemetry),
    Error {
        error: String,
        detail: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        weight: Option<f64>,
    },
}

impl ServerMessage {
    pub fn error(error: &str, detail: impl Into<String>) -> Self {
        ServerMessage::Error {
            error: error.into(),
            detail: detail.into(),
            weight: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("server messages serialize")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DemoInfo {
    pub name: String,
    pub noise: String,
    pub theta: f64,
    pub snr_db: f64,
    pub seconds: f64,
}

/// Encodes one chunk: header, then noisy and enhanced samples as f32 LE,
/// both clamped to `[-1, 1]`.
pub fn encode_chunk(frame: u32, flags: u16, noisy: &[f64], enhanced: &[f64]) -> Vec<u8> {
    debug_assert_eq!(noisy.len(), enhanced.len());
    let hop = noisy.len();
    let mut out = Vec::with_capacity(CHUNK_HEADER_LEN + 8 * hop);
    out.extend_from_slice(&frame.to_le_bytes());
    out.extend_from_slice(&(hop as u16).to_le_bytes());
    out.extend_from_slice(&flags.to_le_bytes());
    for v in noisy.iter().chain(enhanced) {
        out.extend_from_slice(&(v.clamp(-1.0, 1.0) as f32).to_le_bytes());
    }
    out
}

/// Parsed form of [`encode_chunk`].
#[derive(Debug, Clone, PartialEq)]
pub struct Chunk {
    pub frame: u32,
    pub flags: u16,
    pub noisy: Vec<f32>,
    pub enhanced: Vec<f32>,
}

pub fn decode_chunk(bytes: &[u8]) -> Option<Chunk> {
    let header = bytes.get(..CHUNK_HEADER_LEN)?;
    let frame = u32::from_le_bytes(header[0..4].try_into().ok()?);
    let hop = u16::from_le_bytes(header[4..6].try_into().ok()?) as usize;
    let flags = u16::from_le_bytes(header[6..8].try_into().ok()?);
    let body = &bytes[CHUNK_HEADER_LEN..];
    if body.len() != 8 * hop {
        return None;
    }
    let samples: Vec<f32> = body
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .collect();
    Some(Chunk {
        frame,
        flags,
        noisy: samples[..hop].to_vec(),
        enhanced: samples[hop..].to_vec(),
    })
}
