use std::thread;
use std::time::{Duration, Instant};

use super::endpoint::{Endpoint, Stream};
use super::wire::{read_frame, write_frame, Message, WireError, PROTOCOL_VERSION};
use super::BridgeError;
use crate::engine::{ModelInfo, NextStateProvider, ProviderError};

pub const DEFAULT_CONNECT_TIMEOUT: Duration = Duration::from_secs(10);

/// Next-state provider backed by a remote server.
pub struct RemoteProvider {
    stream: Stream,
    endpoint: Endpoint,
    info: Option<ModelInfo>,
    calls: Vec<u64>,
}

pub fn connect(endpoint: &Endpoint) -> Result<RemoteProvider, BridgeError> {
    connect_with_timeout(endpoint, DEFAULT_CONNECT_TIMEOUT)
}

/// Retries until the server accepts or `timeout` elapses.
pub fn connect_with_timeout(endpoint: &Endpoint, timeout: Duration) -> Result<RemoteProvider, BridgeError> {
    let deadline = Instant::now() + timeout;
    loop {
        match endpoint.connect() {
            Ok(stream) => {
                return Ok(RemoteProvider {
                    stream,
                    endpoint: endpoint.clone(),
                    info: None,
                    calls: Vec::new(),
                })
            }
            Err(e) if Instant::now() >= deadline => {
                return Err(BridgeError::ConnectTimeout {
                    endpoint: endpoint.to_string(),
                    last: e.to_string(),
                })
            }
            Err(_) => thread::sleep(Duration::from_millis(20)),
        }
    }
}

fn wire_to_provider(e: WireError) -> ProviderError {
    match e {
        WireError::Io(e) => ProviderError::Transport(e.to_string()),
        other => ProviderError::Protocol(other.to_string()),
    }
}

impl RemoteProvider {
    pub fn endpoint(&self) -> &Endpoint {
        &self.endpoint
    }

    fn exchange(&mut self, msg: &Message) -> Result<Message, ProviderError> {
        write_frame(&mut self.stream, msg).map_err(wire_to_provider)?;
        match read_frame(&mut self.stream).map_err(wire_to_provider)? {
            None => Err(ProviderError::Transport("server closed the connection".into())),
            Some(Message::Error { message }) => Err(ProviderError::Remote(message)),
            Some(reply) => Ok(reply),
        }
    }

    /// Asks the server to shut down.
    pub fn terminate(mut self) -> Result<(), ProviderError> {
        write_frame(&mut self.stream, &Message::Term).map_err(wire_to_provider)
    }
}

fn to_bool(m: Vec<Vec<u8>>, what: &str) -> Result<Vec<Vec<bool>>, ProviderError> {
    m.into_iter()
        .map(|row| {
            row.into_iter()
                .map(|b| match b {
                    0 => Ok(false),
                    1 => Ok(true),
                    other => Err(ProviderError::Protocol(format!("{what} entry {other} is not 0 or 1"))),
                })
                .collect()
        })
        .collect()
}

impl NextStateProvider for RemoteProvider {
    fn init(&mut self) -> Result<ModelInfo, ProviderError> {
        let reply = self.exchange(&Message::InitReq {
            protocol: PROTOCOL_VERSION,
        })?;
        let Message::InitResp {
            protocol,
            variables,
            groups,
            rm,
            wm,
            initial,
        } = reply
        else {
            return Err(ProviderError::Protocol(format!(
                "expected INIT_RESP, got {}",
                reply.kind()
            )));
        };
        if protocol != PROTOCOL_VERSION {
            return Err(ProviderError::Protocol(format!(
                "server protocol {protocol}, client speaks {PROTOCOL_VERSION}"
            )));
        }
        let info = ModelInfo {
            variables,
            groups,
            rm: to_bool(rm, "read matrix")?,
            wm: to_bool(wm, "write matrix")?,
            initial,
        };
        info.validate().map_err(ProviderError::Protocol)?;
        self.calls = vec![0; info.num_groups()];
        self.info = Some(info.clone());
        Ok(info)
    }

    fn next_state(&mut self, group: usize, src: &[u32]) -> Result<Vec<Vec<u32>>, ProviderError> {
        let info = self
            .info
            .as_ref()
            .ok_or_else(|| ProviderError::Protocol("next_state before init".into()))?;
        if group >= info.num_groups() {
            return Err(ProviderError::UnknownGroup(group));
        }
        let (rm, wm) = (info.rm[group].clone(), info.wm[group].clone());
        let mut values = src.iter();
        let state: Vec<Option<u32>> = rm
            .iter()
            .map(|&r| if r { values.next().copied() } else { None })
            .collect();
        if values.next().is_some() || rm.iter().filter(|&&r| r).count() != src.len() {
            return Err(ProviderError::Protocol(
                "source length does not match read matrix".into(),
            ));
        }
        self.calls[group] += 1;
        let reply = self.exchange(&Message::NextReq { group, state })?;
        let Message::NextResp { successors } = reply else {
            return Err(ProviderError::Protocol(format!(
                "expected NEXT_RESP, got {}",
                reply.kind()
            )));
        };
        let mut out = Vec::with_capacity(successors.len());
        for t in successors {
            if t.len() != wm.len() {
                return Err(ProviderError::Protocol("successor of wrong length".into()));
            }
            out.push(t.iter().zip(&wm).filter(|(_, &w)| w).map(|(&v, _)| v).collect());
        }
        out.sort();
        out.dedup();
        Ok(out)
    }

    fn calls(&self) -> &[u64] {
        &self.calls
    }
}
