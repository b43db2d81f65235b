//! Line-oriented fetch protocol, one request per connection.
//!
//! ```text
//! client: GET <64 lowercase hex>\n
//! server: OK <decimal length>\n<length raw bytes>
//!       | MISSING\n
//!       | ERR <message>\n
//! ```

use std::io::{self, BufRead, BufReader, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use super::{CasError, CasStore, DEFAULT_MAX_CONTENT};
use crate::digest::{fingerprint, Digest};

pub const DEFAULT_PORT: u16 = 7747;

const MAX_LINE: u64 = 128;
const IO_TIMEOUT: Duration = Duration::from_secs(10);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Request {
    pub digest: Digest,
}

impl Request {
    pub fn encode(&self) -> Vec<u8> {
        format!("GET {}\n", self.digest.to_hex()).into_bytes()
    }

    /// Parses a request line including its trailing newline.
    pub fn parse(line: &[u8]) -> Result<Self, String> {
        let text = std::str::from_utf8(line).map_err(|_| "request is not UTF-8".to_string())?;
        let body = text
            .strip_suffix('\n')
            .ok_or_else(|| "request must end with a newline".to_string())?;
        let hex = body
            .strip_prefix("GET ")
            .ok_or_else(|| "unknown command".to_string())?;
        if hex.len() != 64 || !hex.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f')) {
            return Err("digest must be 64 lowercase hex characters".to_string());
        }
        let digest = Digest::parse(hex).map_err(|e| e.to_string())?;
        Ok(Self { digest })
    }
}

fn read_line<R: BufRead>(reader: R) -> io::Result<Vec<u8>> {
    let mut line = Vec::new();
    reader.take(MAX_LINE).read_until(b'\n', &mut line)?;
    Ok(line)
}

/// Serves a [`CasStore`] over TCP, one thread per connection.
pub struct CasServer {
    listener: TcpListener,
    store: Arc<CasStore>,
}

impl CasServer {
    pub fn bind<A: ToSocketAddrs>(addr: A, store: CasStore) -> io::Result<Self> {
        Ok(Self {
            listener: TcpListener::bind(addr)?,
            store: Arc::new(store),
        })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    /// Accepts connections until the listener fails.
    pub fn serve(self) -> io::Result<()> {
        for stream in self.listener.incoming() {
            let stream = stream?;
            let store = Arc::clone(&self.store);
            thread::spawn(move || {
                let _ = handle_connection(stream, &store);
            });
        }
        Ok(())
    }

    /// Runs [`CasServer::serve`] on a background thread.
    pub fn spawn(self) -> io::Result<(SocketAddr, thread::JoinHandle<io::Result<()>>)> {
        let addr = self.local_addr()?;
        Ok((addr, thread::spawn(move || self.serve())))
    }
}

fn handle_connection(stream: TcpStream, store: &CasStore) -> io::Result<()> {
    stream.set_read_timeout(Some(IO_TIMEOUT))?;
    let mut reader = BufReader::new(stream.try_clone()?);
    let line = read_line(&mut reader)?;
    let mut out = stream;
    let request = match Request::parse(&line) {
        Ok(r) => r,
        Err(msg) => return out.write_all(format!("ERR {msg}\n").as_bytes()),
    };
    match store.get(&request.digest) {
        Ok(Some(content)) => {
            out.write_all(format!("OK {}\n", content.len()).as_bytes())?;
            out.write_all(&content)?;
        }
        Ok(None) => out.write_all(b"MISSING\n")?,
        Err(CasError::Integrity(_)) => out.write_all(b"ERR stored entry failed integrity check\n")?,
        Err(_) => out.write_all(b"ERR storage failure\n")?,
    }
    out.flush()
}

/// Fetches `digest` from a remote store and verifies the content.
pub fn fetch(endpoint: &str, digest: &Digest) -> Result<Option<Vec<u8>>, CasError> {
    RemoteCas::new(endpoint).fetch(digest)
}

/// Client for a remote store at `host:port`.
#[derive(Debug, Clone)]
pub struct RemoteCas {
    endpoint: String,
    max_content: usize,
}

impl RemoteCas {
    pub fn new(endpoint: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            max_content: DEFAULT_MAX_CONTENT,
        }
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    pub fn fetch(&self, digest: &Digest) -> Result<Option<Vec<u8>>, CasError> {
        let mut stream = TcpStream::connect(&self.endpoint).map_err(CasError::Transport)?;
        stream.set_read_timeout(Some(IO_TIMEOUT)).map_err(CasError::Transport)?;
        stream
            .write_all(&Request { digest: *digest }.encode())
            .map_err(CasError::Transport)?;
        let mut reader = BufReader::new(stream);
        let header = read_line(&mut reader).map_err(CasError::Transport)?;
        let header = std::str::from_utf8(&header)
            .ok()
            .and_then(|h| h.strip_suffix('\n'))
            .ok_or_else(|| CasError::Protocol("malformed response header".into()))?;

        if header == "MISSING" {
            return Ok(None);
        }
        if let Some(msg) = header.strip_prefix("ERR ") {
            return Err(CasError::Remote(msg.to_string()));
        }
        let len: usize = header
            .strip_prefix("OK ")
            .and_then(|n| n.parse().ok())
            .ok_or_else(|| CasError::Protocol(format!("unexpected response {header:?}")))?;
        if len > self.max_content {
            return Err(CasError::TooLarge {
                size: len,
                max: self.max_content,
            });
        }
        let mut content = vec![0u8; len];
        reader.read_exact(&mut content).map_err(CasError::Transport)?;
        if fingerprint(&content) != *digest {
            return Err(CasError::Integrity(*digest));
        }
        Ok(Some(content))
    }
}
