use std::io;

use super::endpoint::{Endpoint, Listener, Stream};
use super::wire::{read_frame, write_frame, Message, WireError, PROTOCOL_VERSION};
use super::BridgeError;
use crate::depmatrix::{build_matrices, DependencyMatrices};
use crate::model::ElaboratedMachine;
use crate::semantics::successors;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ServeStats {
    pub connections: u64,
    pub init_requests: u64,
    pub next_requests: u64,
}

/// Exposes a machine as a next-state provider to one client at a time.
pub struct Server {
    em: ElaboratedMachine,
    dm: DependencyMatrices,
    listener: Listener,
}

enum Flow {
    Continue,
    Close,
    Stop,
}

fn bits(m: &[Vec<bool>]) -> Vec<Vec<u8>> {
    m.iter().map(|r| r.iter().map(|&b| b as u8).collect()).collect()
}

impl Server {
    pub fn bind(em: ElaboratedMachine, endpoint: &Endpoint) -> Result<Server, BridgeError> {
        let dm = build_matrices(&em);
        let listener = endpoint.bind().map_err(|e| BridgeError::Bind {
            endpoint: endpoint.to_string(),
            source: e,
        })?;
        Ok(Server { em, dm, listener })
    }

    /// The bound address (with the actual port for `tcp:…:0`).
    pub fn local_endpoint(&self) -> io::Result<Endpoint> {
        self.listener.local_endpoint()
    }

    /// Serves connections until a client sends TERM.
    pub fn run(self) -> Result<ServeStats, BridgeError> {
        let mut stats = ServeStats::default();
        loop {
            let mut stream = self.listener.accept()?;
            stats.connections += 1;
            if self.session(&mut stream, &mut stats) {
                return Ok(stats);
            }
        }
    }

    /// Returns true when the server should stop.
    fn session(&self, stream: &mut Stream, stats: &mut ServeStats) -> bool {
        loop {
            let flow = match read_frame(stream) {
                Ok(None) | Err(WireError::Io(_)) => Flow::Close,
                Err(e) => {
                    let _ = write_frame(stream, &Message::Error { message: e.to_string() });
                    Flow::Close
                }
                Ok(Some(msg)) => {
                    let (reply, flow) = self.handle(msg, stats);
                    if let Some(r) = reply {
                        if write_frame(stream, &r).is_err() {
                            return false;
                        }
                    }
                    flow
                }
            };
            match flow {
                Flow::Continue => {}
                Flow::Close => return false,
                Flow::Stop => return true,
            }
        }
    }

    fn handle(&self, msg: Message, stats: &mut ServeStats) -> (Option<Message>, Flow) {
        let error = |message: String| (Some(Message::Error { message }), Flow::Continue);
        match msg {
            Message::InitReq { protocol } => {
                stats.init_requests += 1;
                if protocol != PROTOCOL_VERSION {
                    return error(format!(
                        "unsupported protocol {protocol}, server speaks {PROTOCOL_VERSION}"
                    ));
                }
                let info = crate::engine::ModelInfo::from_machine(&self.em, &self.dm);
                let reply = Message::InitResp {
                    protocol: PROTOCOL_VERSION,
                    variables: info.variables,
                    groups: info.groups,
                    rm: bits(&info.rm),
                    wm: bits(&info.wm),
                    initial: info.initial,
                };
                (Some(reply), Flow::Continue)
            }
            Message::NextReq { group, state } => {
                stats.next_requests += 1;
                if group >= self.em.num_groups() {
                    return error(format!("unknown group {group}"));
                }
                if state.len() != self.em.num_vars() {
                    return error(format!(
                        "state of length {} for {} variables",
                        state.len(),
                        self.em.num_vars()
                    ));
                }
                let mut full = Vec::with_capacity(state.len());
                for (v, x) in self.em.variables.iter().zip(&state) {
                    let x = x.unwrap_or(0);
                    if x as u64 >= v.domain.size() {
                        return error(format!("value index {x} out of range for '{}'", v.name));
                    }
                    full.push(x);
                }
                match successors(&self.em, group, &full) {
                    Ok(ts) => (
                        Some(Message::NextResp {
                            successors: ts.into_iter().map(|t| t.into_inner()).collect(),
                        }),
                        Flow::Continue,
                    ),
                    Err(e) => error(e.to_string()),
                }
            }
            Message::Term => (None, Flow::Stop),
            other => error(format!("unexpected {} from client", other.kind())),
        }
    }
}

/// Binds `endpoint` and serves until TERM.
pub fn serve(em: ElaboratedMachine, endpoint: &Endpoint) -> Result<ServeStats, BridgeError> {
    Server::bind(em, endpoint)?.run()
}
