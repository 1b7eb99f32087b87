use std::fmt;
use std::io::{self, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::os::unix::net::{UnixListener, UnixStream};
use std::path::PathBuf;
use std::str::FromStr;

pub const ENDPOINT_ENV: &str = "REACH_ENDPOINT";

/// `ipc:<path>` (local stream socket) or `tcp:<host>:<port>`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Endpoint {
    Ipc(PathBuf),
    Tcp { host: String, port: u16 },
}

impl FromStr for Endpoint {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if let Some(path) = s.strip_prefix("ipc:") {
            if path.is_empty() {
                return Err("ipc endpoint needs a path".into());
            }
            return Ok(Endpoint::Ipc(PathBuf::from(path)));
        }
        if let Some(rest) = s.strip_prefix("tcp:") {
            let (host, port) = rest
                .rsplit_once(':')
                .ok_or_else(|| format!("tcp endpoint '{s}' needs host:port"))?;
            if host.is_empty() {
                return Err(format!("tcp endpoint '{s}' has an empty host"));
            }
            let port = port.parse().map_err(|_| format!("invalid port in endpoint '{s}'"))?;
            return Ok(Endpoint::Tcp {
                host: host.to_string(),
                port,
            });
        }
        Err(format!("endpoint '{s}' must start with ipc: or tcp:"))
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::Ipc(p) => write!(f, "ipc:{}", p.display()),
            Endpoint::Tcp { host, port } => write!(f, "tcp:{host}:{port}"),
        }
    }
}

impl Endpoint {
    /// The endpoint named by `REACH_ENDPOINT`, if set.
    pub fn from_env() -> Option<Result<Endpoint, String>> {
        std::env::var(ENDPOINT_ENV).ok().map(|s| s.parse())
    }

    pub(crate) fn connect(&self) -> io::Result<Stream> {
        Ok(match self {
            Endpoint::Ipc(p) => Stream::Unix(UnixStream::connect(p)?),
            Endpoint::Tcp { host, port } => {
                let s = TcpStream::connect((host.as_str(), *port))?;
                s.set_nodelay(true)?;
                Stream::Tcp(s)
            }
        })
    }

    pub(crate) fn bind(&self) -> io::Result<Listener> {
        Ok(match self {
            Endpoint::Ipc(p) => Listener::Unix(UnixListener::bind(p)?, p.clone()),
            Endpoint::Tcp { host, port } => Listener::Tcp(TcpListener::bind((host.as_str(), *port))?),
        })
    }
}

pub(crate) enum Stream {
    Unix(UnixStream),
    Tcp(TcpStream),
}

impl Read for Stream {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        match self {
            Stream::Unix(s) => s.read(buf),
            Stream::Tcp(s) => s.read(buf),
        }
    }
}

impl Write for Stream {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        match self {
            Stream::Unix(s) => s.write(buf),
            Stream::Tcp(s) => s.write(buf),
        }
    }

    fn flush(&mut self) -> io::Result<()> {
        match self {
            Stream::Unix(s) => s.flush(),
            Stream::Tcp(s) => s.flush(),
        }
    }
}

pub(crate) enum Listener {
    Unix(UnixListener, PathBuf),
    Tcp(TcpListener),
}

impl Listener {
    pub(crate) fn accept(&self) -> io::Result<Stream> {
        Ok(match self {
            Listener::Unix(l, _) => Stream::Unix(l.accept()?.0),
            Listener::Tcp(l) => {
                let s = l.accept()?.0;
                s.set_nodelay(true)?;
                Stream::Tcp(s)
            }
        })
    }

    pub(crate) fn local_endpoint(&self) -> io::Result<Endpoint> {
        Ok(match self {
            Listener::Unix(_, p) => Endpoint::Ipc(p.clone()),
            Listener::Tcp(l) => {
                let a = l.local_addr()?;
                Endpoint::Tcp {
                    host: a.ip().to_string(),
                    port: a.port(),
                }
            }
        })
    }
}

impl Drop for Listener {
    fn drop(&mut self) {
        if let Listener::Unix(_, p) = self {
            let _ = std::fs::remove_file(p);
        }
    }
}
