use std::io::{self, Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::VariableDecl;

pub const PROTOCOL_VERSION: u32 = 1;

/// Frames larger than this are treated as malformed.
pub const MAX_FRAME: u32 = 64 << 20;

/// One protocol message. Serialized as an object whose `kind` field names
/// the variant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE", deny_unknown_fields)]
pub enum Message {
    InitReq {
        protocol: u32,
    },
    InitResp {
        protocol: u32,
        variables: Vec<VariableDecl>,
        groups: Vec<String>,
        rm: Vec<Vec<u8>>,
        wm: Vec<Vec<u8>>,
        initial: Vec<Vec<u32>>,
    },
    NextReq {
        group: usize,
        /// Value indices; `None` at positions the group does not read.
        state: Vec<Option<u32>>,
    },
    NextResp {
        successors: Vec<Vec<u32>>,
    },
    Term,
    Error {
        message: String,
    },
}

impl Message {
    pub fn kind(&self) -> &'static str {
        match self {
            Message::InitReq { .. } => "INIT_REQ",
            Message::InitResp { .. } => "INIT_RESP",
            Message::NextReq { .. } => "NEXT_REQ",
            Message::NextResp { .. } => "NEXT_RESP",
            Message::Term => "TERM",
            Message::Error { .. } => "ERROR",
        }
    }
}

/// Byte encoding of one variable's value index: minimal big-endian, empty for 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Chunk(pub Vec<u8>);

impl Chunk {
    pub fn from_index(index: u32) -> Chunk {
        let bytes = index.to_be_bytes();
        let skip = bytes.iter().take_while(|&&b| b == 0).count();
        Chunk(bytes[skip..].to_vec())
    }

    /// `None` for non-canonical or oversized encodings.
    pub fn to_index(&self) -> Option<u32> {
        if self.0.len() > 4 || self.0.first() == Some(&0) {
            return None;
        }
        Some(self.0.iter().fold(0u32, |acc, &b| (acc << 8) | b as u32))
    }
}

#[derive(Debug, Error)]
pub enum WireError {
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("malformed frame: {0}")]
    Malformed(String),
    #[error("frame of {0} bytes exceeds the limit")]
    TooLarge(u32),
}

pub fn encode(msg: &Message) -> Vec<u8> {
    let body = serde_json::to_vec(msg).expect("message serializes");
    let mut out = Vec::with_capacity(body.len() + 4);
    out.extend_from_slice(&(body.len() as u32).to_be_bytes());
    out.extend_from_slice(&body);
    out
}

pub fn decode_body(body: &[u8]) -> Result<Message, WireError> {
    serde_json::from_slice(body).map_err(|e| WireError::Malformed(e.to_string()))
}

pub fn write_frame(w: &mut impl Write, msg: &Message) -> Result<(), WireError> {
    w.write_all(&encode(msg))?;
    w.flush()?;
    Ok(())
}

/// Reads one frame; `Ok(None)` on a clean end of stream before a frame starts.
pub fn read_frame(r: &mut impl Read) -> Result<Option<Message>, WireError> {
    let mut len = [0u8; 4];
    let mut got = 0;
    while got < 4 {
        match r.read(&mut len[got..]) {
            Ok(0) if got == 0 => return Ok(None),
            Ok(0) => return Err(WireError::Malformed("truncated length prefix".into())),
            Ok(k) => got += k,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    let len = u32::from_be_bytes(len);
    if len > MAX_FRAME {
        return Err(WireError::TooLarge(len));
    }
    let mut body = vec![0u8; len as usize];
    r.read_exact(&mut body).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => WireError::Malformed("truncated body".into()),
        _ => WireError::Io(e),
    })?;
    decode_body(&body).map(Some)
}
