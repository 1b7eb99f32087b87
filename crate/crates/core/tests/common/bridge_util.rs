//! Bridge fixtures: in-thread servers, a frame-level conformance proxy and
//! a random message generator.

use std::net::{TcpListener, TcpStream};
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use reach_core::bridge::wire::{read_frame, write_frame};
use reach_core::bridge::{connect, Endpoint, Message, ServeStats, Server};
use reach_core::engine::{reach, symbolic_deadlocks, NextStateProvider, Strategy, Summary, VariableDecl};
use reach_core::ldd::LddStore;
use reach_core::model::{Domain, ElaboratedMachine};

pub fn temp_socket(tag: &str) -> PathBuf {
    let p = std::env::temp_dir().join(format!("reach-{tag}-{}.sock", std::process::id()));
    let _ = std::fs::remove_file(&p);
    p
}

/// Starts a server on `ep` in a thread; returns the bound endpoint.
pub fn spawn_server(em: ElaboratedMachine, ep: &Endpoint) -> (Endpoint, JoinHandle<ServeStats>) {
    let server = Server::bind(em, ep).expect("bind");
    let bound = server.local_endpoint().expect("local endpoint");
    (bound, thread::spawn(move || server.run().expect("serve")))
}

/// Machine-format summary of one run, timing removed.
pub fn summary_json(provider: &mut dyn NextStateProvider, strategy: Strategy) -> String {
    let mut store = LddStore::default();
    let report = reach(provider, &mut store, strategy).expect("reach");
    let dead = symbolic_deadlocks(&mut store, &report).expect("deadlocks");
    let mut s = Summary::from_report(&report, &store);
    s.deadlocks = Some(store.sat_count(dead));
    s.deadlock_witnesses = store.enumerate_first(dead, 10);
    s.without_timing().to_machine()
}

#[derive(Default, Debug)]
pub struct ProxyLog {
    pub kinds: Vec<&'static str>,
    /// Requests sent before the previous answer was delivered.
    pub pipelined: usize,
}

/// A TCP proxy that relays frames one request at a time and records them.
/// With `cut_after = Some(k)` it drops both connections after relaying `k`
/// NEXT_REQ answers, as if the server had died.
pub fn spawn_proxy(upstream: Endpoint, cut_after: Option<usize>) -> (Endpoint, Arc<Mutex<ProxyLog>>, JoinHandle<()>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let port = listener.local_addr().unwrap().port();
    let log = Arc::new(Mutex::new(ProxyLog::default()));
    let log2 = log.clone();
    let h = thread::spawn(move || {
        let (mut client, _) = listener.accept().unwrap();
        let mut server: Box<dyn ReadWrite> = match &upstream {
            Endpoint::Tcp { host, port } => Box::new(TcpStream::connect((host.as_str(), *port)).unwrap()),
            Endpoint::Ipc(p) => Box::new(std::os::unix::net::UnixStream::connect(p).unwrap()),
        };
        let mut answered = 0;
        while let Ok(Some(req)) = read_frame(&mut client) {
            let kind = req.kind();
            log2.lock().unwrap().kinds.push(kind);
            if cut_after.is_some_and(|k| kind == "NEXT_REQ" && answered >= k) {
                return;
            }
            write_frame(&mut server, &req).unwrap();
            if kind == "TERM" {
                return;
            }
            let Ok(Some(resp)) = read_frame(&mut server) else {
                return;
            };
            client.set_nonblocking(true).unwrap();
            let mut probe = [0u8; 1];
            if client.peek(&mut probe).is_ok_and(|n| n > 0) {
                log2.lock().unwrap().pipelined += 1;
            }
            client.set_nonblocking(false).unwrap();
            write_frame(&mut client, &resp).unwrap();
            if kind == "NEXT_REQ" {
                answered += 1;
            }
        }
    });
    (
        Endpoint::Tcp {
            host: "127.0.0.1".into(),
            port,
        },
        log,
        h,
    )
}

pub trait ReadWrite: std::io::Read + std::io::Write + Send {}
impl<T: std::io::Read + std::io::Write + Send> ReadWrite for T {}

/// Runs the symbolic engine remotely through a conformance proxy, then
/// stops the server. Returns the summary, the proxy log and server stats.
pub fn remote_run(em: &ElaboratedMachine, ep: &Endpoint, strategy: Strategy) -> (String, ProxyLog, ServeStats) {
    let (bound, server) = spawn_server(em.clone(), ep);
    let (proxy_ep, log, proxy) = spawn_proxy(bound, None);
    let mut remote = connect(&proxy_ep).expect("connect");
    let json = summary_json(&mut remote, strategy);
    remote.terminate().unwrap();
    proxy.join().unwrap();
    let stats = server.join().unwrap();
    let log = std::mem::take(&mut *log.lock().unwrap());
    (json, log, stats)
}

fn random_domain(rng: &mut ChaCha8Rng) -> Domain {
    match rng.gen_range(0..3) {
        0 => Domain::Bool,
        1 => {
            let lo = rng.gen_range(-5..5);
            Domain::IntRange {
                lo,
                hi: lo + rng.gen_range(0..10),
            }
        }
        _ => Domain::Enum {
            name: random_text(rng),
            labels: (0..rng.gen_range(1..4)).map(|_| random_text(rng)).collect(),
        },
    }
}

fn random_text(rng: &mut ChaCha8Rng) -> String {
    const ALPHABET: &[char] = &['a', 'Z', '_', '0', ' ', '"', '\\', '\n', 'é', '∧', '{', '}'];
    (0..rng.gen_range(0..12))
        .map(|_| ALPHABET[rng.gen_range(0..ALPHABET.len())])
        .collect()
}

fn random_matrix(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Vec<Vec<u8>> {
    (0..m).map(|_| (0..n).map(|_| rng.gen_range(0..2)).collect()).collect()
}

fn random_vectors(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<u32>> {
    (0..rng.gen_range(0..5))
        .map(|_| (0..n).map(|_| rng.gen_range(0..u32::MAX)).collect())
        .collect()
}

pub fn random_message(rng: &mut ChaCha8Rng) -> Message {
    let n = rng.gen_range(0..6);
    match rng.gen_range(0..6) {
        0 => Message::InitReq { protocol: rng.gen() },
        1 => {
            let m = rng.gen_range(0..5);
            Message::InitResp {
                protocol: rng.gen(),
                variables: (0..n)
                    .map(|_| VariableDecl {
                        name: random_text(rng),
                        domain: random_domain(rng),
                    })
                    .collect(),
                groups: (0..m).map(|_| random_text(rng)).collect(),
                rm: random_matrix(rng, m, n),
                wm: random_matrix(rng, m, n),
                initial: random_vectors(rng, n),
            }
        }
        2 => Message::NextReq {
            group: rng.gen_range(0..1000),
            state: (0..n).map(|_| rng.gen_bool(0.7).then(|| rng.gen())).collect(),
        },
        3 => Message::NextResp {
            successors: random_vectors(rng, n),
        },
        4 => Message::Term,
        _ => Message::Error {
            message: random_text(rng),
        },
    }
}
