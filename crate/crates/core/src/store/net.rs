//! In-memory store server and its client over a small binary protocol.
//!
//! A client opens a TCP connection and sends the magic `QCC1`, then any
//! number of requests `[op:u8][len:u32][body]`, each answered by
//! `[status:u8][len:u32][body]` (lengths big-endian).
//!
//! | op | request body | reply |
//! |----|--------------|-------|
//! | GET 1 | hash, kind:u8, n_qubits:u32, interior:u32 | 0 + record, or 1 |
//! | PUTNX 2 | record | 0 inserted, 1 already present |
//! | STATS 3 | empty | 0 + six u64 counters |
//! | DUMP 4 | empty | 0 + records sorted by id |
//! | PING 5 | empty | 0 + `PONG` |
//!
//! Status 2 carries an error message; the server closes the connection
//! after a malformed request.

use std::io::{self, BufReader, BufWriter, Read, Write};
use std::net::{Shutdown, SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

use crate::identity::{CacheKey, PayloadKind, HASH_LEN};

use super::{record, CacheEntry, CacheStats, MemoryStore, PutOutcome, Store, StoreError};

const MAGIC: &[u8; 4] = b"QCC1";
const MAX_FRAME: u32 = 1 << 30;

const OP_GET: u8 = 1;
const OP_PUTNX: u8 = 2;
const OP_STATS: u8 = 3;
const OP_DUMP: u8 = 4;
const OP_PING: u8 = 5;

const ST_OK: u8 = 0;
const ST_NO: u8 = 1;
const ST_ERR: u8 = 2;

fn read_frame(r: &mut impl Read) -> io::Result<(u8, Vec<u8>)> {
    let mut head = [0u8; 5];
    r.read_exact(&mut head)?;
    let len = u32::from_be_bytes(head[1..].try_into().expect("4 bytes"));
    if len > MAX_FRAME {
        return Err(io::Error::new(
            io::ErrorKind::InvalidData,
            format!("frame of {len} bytes"),
        ));
    }
    let mut body = vec![0u8; len as usize];
    r.read_exact(&mut body)?;
    Ok((head[0], body))
}

fn write_frame(w: &mut impl Write, code: u8, body: &[u8]) -> io::Result<()> {
    w.write_all(&[code])?;
    w.write_all(&(body.len() as u32).to_be_bytes())?;
    w.write_all(body)?;
    w.flush()
}

fn encode_key(key: &CacheKey) -> Vec<u8> {
    let mut b = Vec::with_capacity(HASH_LEN + 9);
    b.extend_from_slice(key.hash.as_bytes());
    b.push(key.payload_kind.code());
    b.extend_from_slice(&key.n_qubits.to_be_bytes());
    b.extend_from_slice(&key.interior_spiders.to_be_bytes());
    b
}

fn decode_key(b: &[u8]) -> Option<CacheKey> {
    if b.len() != HASH_LEN + 9 {
        return None;
    }
    let key = CacheKey {
        hash: std::str::from_utf8(&b[..HASH_LEN]).ok()?.to_string(),
        payload_kind: PayloadKind::from_code(b[HASH_LEN])?,
        n_qubits: u32::from_be_bytes(b[HASH_LEN + 1..HASH_LEN + 5].try_into().ok()?),
        interior_spiders: u32::from_be_bytes(b[HASH_LEN + 5..].try_into().ok()?),
    };
    key.is_well_formed().then_some(key)
}

/// Listening server. State lives in memory and is lost when it stops.
pub struct Server {
    listener: TcpListener,
    store: Arc<MemoryStore>,
}

impl Server {
    pub fn bind(addr: impl ToSocketAddrs) -> io::Result<Server> {
        Ok(Server {
            listener: TcpListener::bind(addr)?,
            store: Arc::new(MemoryStore::new()),
        })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    /// Serves until the process exits.
    pub fn run(self) -> io::Result<()> {
        let stop = Arc::new(AtomicBool::new(false));
        let conns = Arc::new(Mutex::new(Vec::new()));
        self.accept_loop(&stop, &conns)
    }

    /// Serves on a background thread.
    pub fn spawn(self) -> io::Result<ServerHandle> {
        let addr = self.local_addr()?;
        let stop = Arc::new(AtomicBool::new(false));
        let conns = Arc::new(Mutex::new(Vec::new()));
        let (s, c) = (Arc::clone(&stop), Arc::clone(&conns));
        let thread = std::thread::Builder::new()
            .name("qcache-server".into())
            .spawn(move || {
                if let Err(e) = self.accept_loop(&s, &c) {
                    log::error!("server: {e}");
                }
            })?;
        Ok(ServerHandle {
            addr,
            stop,
            conns,
            thread: Some(thread),
        })
    }

    fn accept_loop(&self, stop: &AtomicBool, conns: &Mutex<Vec<TcpStream>>) -> io::Result<()> {
        for stream in self.listener.incoming() {
            if stop.load(Ordering::SeqCst) {
                break;
            }
            let stream = match stream {
                Ok(s) => s,
                Err(e) => {
                    log::warn!("accept: {e}");
                    continue;
                }
            };
            if let Ok(clone) = stream.try_clone() {
                conns.lock().expect("connection list").push(clone);
            }
            let store = Arc::clone(&self.store);
            std::thread::spawn(move || {
                let peer = stream.peer_addr().ok();
                if let Err(e) = serve_connection(stream, &store) {
                    if e.kind() != io::ErrorKind::UnexpectedEof {
                        log::debug!("connection {peer:?}: {e}");
                    }
                }
            });
        }
        Ok(())
    }
}

fn serve_connection(stream: TcpStream, store: &MemoryStore) -> io::Result<()> {
    stream.set_nodelay(true)?;
    let mut r = BufReader::new(stream.try_clone()?);
    let mut w = BufWriter::new(stream);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        write_frame(&mut w, ST_ERR, b"bad magic")?;
        return Ok(());
    }
    loop {
        let (op, body) = read_frame(&mut r)?;
        let reply = handle(op, &body, store);
        match reply {
            Ok((status, out)) => write_frame(&mut w, status, &out)?,
            Err(msg) => {
                write_frame(&mut w, ST_ERR, msg.as_bytes())?;
                return Ok(());
            }
        }
    }
}

fn handle(op: u8, body: &[u8], store: &MemoryStore) -> Result<(u8, Vec<u8>), String> {
    match op {
        OP_GET => {
            let key = decode_key(body).ok_or("malformed GET key")?;
            match store.get(&key).map_err(|e| e.to_string())? {
                Some(e) => Ok((ST_OK, record::encode(&e))),
                None => Ok((ST_NO, Vec::new())),
            }
        }
        OP_PUTNX => {
            let (entry, n) = record::decode(body).map_err(|e| e.to_string())?;
            if n != body.len() {
                return Err("trailing bytes after record".into());
            }
            match store.put_if_absent(entry).map_err(|e| e.to_string())? {
                PutOutcome::Inserted => Ok((ST_OK, Vec::new())),
                PutOutcome::AlreadyPresent => Ok((ST_NO, Vec::new())),
            }
        }
        OP_STATS => {
            let words = store.stats().map_err(|e| e.to_string())?.to_words();
            Ok((ST_OK, words.iter().flat_map(|w| w.to_be_bytes()).collect()))
        }
        OP_DUMP => {
            let mut out = Vec::new();
            for e in store.entries().map_err(|e| e.to_string())? {
                record::encode_into(&e, &mut out);
            }
            Ok((ST_OK, out))
        }
        OP_PING => Ok((ST_OK, b"PONG".to_vec())),
        other => Err(format!("unknown opcode {other}")),
    }
}

/// A server running on a background thread.
pub struct ServerHandle {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    conns: Arc<Mutex<Vec<TcpStream>>>,
    thread: Option<JoinHandle<()>>,
}

impl ServerHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// Stops accepting, drops every open connection and discards the data.
    pub fn shutdown(mut self) {
        self.stop_now();
    }

    fn stop_now(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        // Wake the accept loop.
        let _ = TcpStream::connect(self.addr);
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
        for c in self.conns.lock().expect("connection list").drain(..) {
            let _ = c.shutdown(Shutdown::Both);
        }
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        if self.thread.is_some() {
            self.stop_now();
        }
    }
}

/// Client handle; keeps a small pool of open connections.
pub struct NetworkedStore {
    addr: String,
    timeout: Duration,
    pool: Mutex<Vec<TcpStream>>,
}

impl NetworkedStore {
    pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(10);

    /// Connects once to check the server answers `PING`.
    pub fn connect(addr: impl Into<String>) -> Result<NetworkedStore, StoreError> {
        NetworkedStore::connect_with_timeout(addr, NetworkedStore::DEFAULT_TIMEOUT)
    }

    pub fn connect_with_timeout(
        addr: impl Into<String>,
        timeout: Duration,
    ) -> Result<NetworkedStore, StoreError> {
        let s = NetworkedStore {
            addr: addr.into(),
            timeout,
            pool: Mutex::new(Vec::new()),
        };
        s.ping()?;
        Ok(s)
    }

    pub fn addr(&self) -> &str {
        &self.addr
    }

    pub fn ping(&self) -> Result<(), StoreError> {
        let (status, body) = self.request(OP_PING, &[])?;
        if status != ST_OK || body != b"PONG" {
            return Err(StoreError::Protocol("unexpected PING reply".into()));
        }
        Ok(())
    }

    fn classify(&self, e: io::Error) -> StoreError {
        match e.kind() {
            io::ErrorKind::ConnectionRefused => StoreError::Refused(self.addr.clone()),
            io::ErrorKind::TimedOut | io::ErrorKind::WouldBlock => {
                StoreError::Timeout(self.addr.clone())
            }
            io::ErrorKind::UnexpectedEof
            | io::ErrorKind::ConnectionReset
            | io::ErrorKind::ConnectionAborted
            | io::ErrorKind::BrokenPipe
            | io::ErrorKind::InvalidData => StoreError::Protocol(format!("{}: {e}", self.addr)),
            _ => StoreError::Io(e),
        }
    }

    fn open(&self) -> Result<TcpStream, StoreError> {
        let addrs: Vec<SocketAddr> = self
            .addr
            .to_socket_addrs()
            .map_err(|e| self.classify(e))?
            .collect();
        let mut last = io::Error::new(io::ErrorKind::InvalidInput, "address resolved to nothing");
        for a in addrs {
            match TcpStream::connect_timeout(&a, self.timeout) {
                Ok(mut s) => {
                    s.set_read_timeout(Some(self.timeout))
                        .map_err(StoreError::Io)?;
                    s.set_write_timeout(Some(self.timeout))
                        .map_err(StoreError::Io)?;
                    s.set_nodelay(true).map_err(StoreError::Io)?;
                    s.write_all(MAGIC).map_err(|e| self.classify(e))?;
                    return Ok(s);
                }
                Err(e) => last = e,
            }
        }
        Err(self.classify(last))
    }

    fn exchange(&self, s: &mut TcpStream, op: u8, body: &[u8]) -> io::Result<(u8, Vec<u8>)> {
        let mut w = BufWriter::new(&*s);
        write_frame(&mut w, op, body)?;
        drop(w);
        read_frame(s)
    }

    fn request(&self, op: u8, body: &[u8]) -> Result<(u8, Vec<u8>), StoreError> {
        let pooled = self.pool.lock().expect("pool lock").pop();
        let reused = pooled.is_some();
        let mut s = match pooled {
            Some(s) => s,
            None => self.open()?,
        };
        let result = match self.exchange(&mut s, op, body) {
            // A pooled connection may have been closed by a restarted
            // server; try once more on a fresh one.
            Err(e)
                if reused
                    && matches!(
                        e.kind(),
                        io::ErrorKind::UnexpectedEof
                            | io::ErrorKind::ConnectionReset
                            | io::ErrorKind::BrokenPipe
                    ) =>
            {
                s = self.open()?;
                self.exchange(&mut s, op, body)
            }
            other => other,
        };
        let (status, reply) = result.map_err(|e| self.classify(e))?;
        if status == ST_ERR {
            return Err(StoreError::Server(
                String::from_utf8_lossy(&reply).into_owned(),
            ));
        }
        if status != ST_OK && status != ST_NO {
            return Err(StoreError::Protocol(format!("status byte {status}")));
        }
        self.pool.lock().expect("pool lock").push(s);
        Ok((status, reply))
    }
}

impl Store for NetworkedStore {
    fn get(&self, key: &CacheKey) -> Result<Option<CacheEntry>, StoreError> {
        let (status, body) = self.request(OP_GET, &encode_key(key))?;
        if status == ST_NO {
            return Ok(None);
        }
        let (e, n) =
            record::decode(&body).map_err(|e| StoreError::Protocol(format!("GET reply: {e}")))?;
        if n != body.len() || e.key.hash != key.hash {
            return Err(StoreError::Protocol(
                "GET reply does not match the request".into(),
            ));
        }
        Ok(Some(e))
    }

    fn put_if_absent(&self, entry: CacheEntry) -> Result<PutOutcome, StoreError> {
        entry.validate()?;
        let (status, _) = self.request(OP_PUTNX, &record::encode(&entry))?;
        Ok(if status == ST_OK {
            PutOutcome::Inserted
        } else {
            PutOutcome::AlreadyPresent
        })
    }

    fn stats(&self) -> Result<CacheStats, StoreError> {
        let (_, body) = self.request(OP_STATS, &[])?;
        if body.len() != 48 {
            return Err(StoreError::Protocol(format!(
                "STATS reply of {} bytes",
                body.len()
            )));
        }
        let mut w = [0u64; 6];
        for (i, ch) in body.chunks_exact(8).enumerate() {
            w[i] = u64::from_be_bytes(ch.try_into().expect("8 bytes"));
        }
        Ok(CacheStats::from_words(w))
    }

    fn entries(&self) -> Result<Vec<CacheEntry>, StoreError> {
        let (_, body) = self.request(OP_DUMP, &[])?;
        let mut out = Vec::new();
        let mut pos = 0;
        while pos < body.len() {
            let (e, n) = record::decode(&body[pos..])
                .map_err(|e| StoreError::Protocol(format!("DUMP reply: {e}")))?;
            out.push(e);
            pos += n;
        }
        Ok(out)
    }

    fn backend(&self) -> &'static str {
        "networked"
    }
}
