//! One enhancement engine per WebSocket connection, clocked at the hop rate.

use std::sync::Arc;
use std::time::Duration;

use axum::extract::ws::{Message, WebSocket};
use dualmic_core::combiner::WeightHandle;
use dualmic_core::{AudioBuffer, EnhanceConfig, StreamEnhancer};
use tokio::time::{interval, Interval, MissedTickBehavior};
use uuid::Uuid;

use crate::protocol::{encode_chunk, ClientMessage, OpenRequest, ServerMessage, FLAG_VAD};
use crate::AppState;

pub struct Session {
    pub id: Uuid,
    source: String,
    audio: Arc<AudioBuffer>,
    stream: StreamEnhancer,
    weight: WeightHandle,
    pos: usize,
    chunk: u32,
    prev_noisy: Vec<f64>,
    period: Duration,
}

impl Session {
    pub fn open(req: OpenRequest, state: &AppState) -> Result<Self, ServerMessage> {
        let (source, audio) = match (&req.demo, &req.upload) {
            (Some(name), None) => {
                let demo = state
                    .demo(name)
                    .ok_or_else(|| ServerMessage::error("unknown_demo", format!("no demo named `{name}`")))?;
                (format!("demo:{name}"), demo.audio.clone())
            }
            (None, Some(id)) => {
                let audio = state
                    .upload(id)
                    .ok_or_else(|| ServerMessage::error("unknown_upload", format!("no upload `{id}`")))?;
                (format!("upload:{id}"), audio)
            }
            _ => {
                return Err(ServerMessage::error(
                    "bad_request",
                    "open needs exactly one of `demo` or `upload`",
                ))
            }
        };
        let cfg = req.config.unwrap_or_default();
        if cfg.stft.sample_rate != audio.sample_rate {
            return Err(ServerMessage::error(
                "sample_rate",
                format!("source is {} Hz, config expects {} Hz", audio.sample_rate, cfg.stft.sample_rate),
            ));
        }
        if audio.check_stereo(cfg.stft.sample_rate).is_err() || audio.len() < cfg.stft.hop {
            return Err(ServerMessage::error("format", "source must be stereo and at least one hop long"));
        }
        Self::with_config(source, audio, cfg)
    }

    fn with_config(source: String, audio: Arc<AudioBuffer>, cfg: EnhanceConfig) -> Result<Self, ServerMessage> {
        let period = Duration::from_secs_f64(cfg.stft.hop as f64 / cfg.stft.sample_rate as f64);
        let stream = StreamEnhancer::new(cfg).map_err(|e| ServerMessage::error("config", e.to_string()))?;
        let hop = stream.hop();
        Ok(Self {
            id: Uuid::new_v4(),
            source,
            audio,
            weight: stream.engine().weight_handle(),
            stream,
            pos: 0,
            chunk: 0,
            prev_noisy: vec![0.0; hop],
            period,
        })
    }

    pub fn info(&self) -> ServerMessage {
        ServerMessage::Session {
            session_id: self.id.to_string(),
            source: self.source.clone(),
            sample_rate: self.audio.sample_rate,
            hop: self.stream.hop(),
            weight: self.weight.get(),
            samples: self.audio.len(),
        }
    }

    pub fn set_weight(&self, w: f64) -> ServerMessage {
        match self.weight.set(w) {
            Ok(()) => ServerMessage::Ack {
                weight: w,
                applies_at: self.stream.engine().frame_index(),
            },
            Err(e) => ServerMessage::Error {
                error: "weight".into(),
                detail: e.to_string(),
                weight: Some(self.weight.get()),
            },
        }
    }

    /// Advances one hop of the looped source. Returns the binary chunk and
    /// the telemetry of the frame just processed.
    pub fn step(&mut self) -> (Vec<u8>, Option<ServerMessage>) {
        let hop = self.stream.hop();
        let len = self.audio.len();
        let take = |ch: &[f64], pos: usize| (0..hop).map(|i| ch[(pos + i) % len]).collect::<Vec<f64>>();
        let ch1 = take(&self.audio.channels[0], self.pos);
        let ch2 = take(&self.audio.channels[1], self.pos);
        self.pos = (self.pos + hop) % len;
        let enhanced = self
            .stream
            .push(&ch1, &ch2)
            .expect("hop-sized chunks of a validated source");
        // Enhanced output lags one hop; send the matching noisy hop.
        let noisy = std::mem::replace(&mut self.prev_noisy, ch1);
        let telemetry = self.stream.engine().last_telemetry().copied();
        let flags = match telemetry {
            Some(t) if t.vad => FLAG_VAD,
            _ => 0,
        };
        let bytes = encode_chunk(self.chunk, flags, &noisy, &enhanced);
        self.chunk = self.chunk.wrapping_add(1);
        (bytes, telemetry.map(ServerMessage::Telemetry))
    }
}

fn parse(text: &str) -> Result<ClientMessage, ServerMessage> {
    serde_json::from_str(text).map_err(|e| ServerMessage::error("bad_request", e.to_string()))
}

fn clock(period: Duration) -> Interval {
    let mut t = interval(period);
    t.set_missed_tick_behavior(MissedTickBehavior::Burst);
    t
}

async fn send(socket: &mut WebSocket, msg: &ServerMessage) -> bool {
    socket.send(Message::Text(msg.to_json().into())).await.is_ok()
}

pub async fn run(mut socket: WebSocket, state: AppState) {
    let mut session: Option<Session> = None;
    let mut ticker = clock(Duration::from_millis(10));
    loop {
        tokio::select! {
            msg = socket.recv() => {
                let text = match msg {
                    Some(Ok(Message::Text(t))) => t,
                    Some(Ok(Message::Close(_))) | Some(Err(_)) | None => break,
                    Some(Ok(_)) => continue,
                };
                let reply = match (parse(text.as_str()), &session) {
                    (Err(e), _) => e,
                    (Ok(ClientMessage::Open(_)), Some(_)) => {
                        ServerMessage::error("already_open", "this connection already has a session")
                    }
                    (Ok(ClientMessage::Open(req)), None) => match Session::open(*req, &state) {
                        Ok(s) => {
                            ticker = clock(s.period);
                            let info = s.info();
                            tracing::info!(id = %s.id, source = %s.source, "session opened");
                            session = Some(s);
                            info
                        }
                        Err(e) => e,
                    },
                    (Ok(ClientMessage::SetWeight(w)), Some(s)) => s.set_weight(w),
                    (Ok(ClientMessage::SetWeight(_)), None) => {
                        ServerMessage::error("no_session", "open a session first")
                    }
                };
                if !send(&mut socket, &reply).await {
                    break;
                }
            }
            _ = ticker.tick(), if session.is_some() => {
                let Some(s) = session.as_mut() else { continue };
                let (bytes, telemetry) = s.step();
                if socket.send(Message::Binary(bytes.into())).await.is_err() {
                    break;
                }
                if let Some(t) = telemetry {
                    if !send(&mut socket, &t).await {
                        break;
                    }
                }
            }
        }
    }
    if let Some(s) = session {
        tracing::info!(id = %s.id, "session closed");
    }
}
