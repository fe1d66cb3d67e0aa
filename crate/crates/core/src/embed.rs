//! Text embedding providers.
//!
//! Every provider maps a text to a fixed-width vector. The built-in
//! [`HashingEmbedder`] is a seeded bag-of-words feature hasher; the
//! [`ProcessEmbedder`] talks line-delimited JSON to an external encoder.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

pub const EMBEDDING_DIM: usize = 768;
pub const MAX_TOKENS: usize = 512;

#[derive(Debug, thiserror::Error)]
pub enum EmbedError {
    #[error("embedding process: {0}")]
    Io(#[from] std::io::Error),
    #[error("embedding process returned malformed output: {0}")]
    Protocol(String),
    #[error("expected {expected} dimensions, provider returned {got}")]
    Dimension { expected: usize, got: usize },
}

pub type Result<T, E = EmbedError> = std::result::Result<T, E>;

/// Text to fixed-width vector. Implementations must be deterministic.
pub trait EmbeddingProvider: Send + Sync {
    /// Stable identifier, recorded next to cached embeddings.
    fn name(&self) -> String;

    fn dim(&self) -> usize {
        EMBEDDING_DIM
    }

    fn embed(&self, text: &str) -> Result<Vec<f32>>;

    fn embed_all(&self, texts: &[&str]) -> Result<Vec<Vec<f32>>> {
        texts.iter().map(|t| self.embed(t)).collect()
    }
}

/// Lowercased alphanumeric tokens, at most [`MAX_TOKENS`].
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .take(MAX_TOKENS)
        .map(str::to_lowercase)
        .collect()
}

fn fnv1a(seed: u64, bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in seed.to_le_bytes().iter().chain(bytes) {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Seeded feature hashing: each token is a signed unit vector on one
/// hashed coordinate; a text is the L2-normalised mean of its tokens.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HashingEmbedder {
    pub seed: u64,
    pub dim: usize,
}

impl Default for HashingEmbedder {
    fn default() -> Self {
        HashingEmbedder {
            seed: 0,
            dim: EMBEDDING_DIM,
        }
    }
}

impl HashingEmbedder {
    pub fn new(seed: u64) -> Self {
        HashingEmbedder {
            seed,
            dim: EMBEDDING_DIM,
        }
    }

    /// Coordinate and sign of a token.
    pub fn slot(&self, token: &str) -> (usize, f32) {
        let h = fnv1a(self.seed, token.as_bytes());
        let sign = if h >> 63 == 1 { -1.0 } else { 1.0 };
        ((h % self.dim as u64) as usize, sign)
    }
}

impl EmbeddingProvider for HashingEmbedder {
    fn name(&self) -> String {
        format!("hashing-fnv1a-{}d-seed{}", self.dim, self.seed)
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, text: &str) -> Result<Vec<f32>> {
        let tokens = tokenize(text);
        let mut v = vec![0.0f32; self.dim];
        if tokens.is_empty() {
            log::warn!("empty text embedded as the zero vector");
            return Ok(v);
        }
        for t in &tokens {
            let (i, s) = self.slot(t);
            v[i] += s;
        }
        let n = tokens.len() as f32;
        v.iter_mut().for_each(|x| *x /= n);
        normalize(&mut v);
        Ok(v)
    }
}

/// Scales `v` to unit length; zero vectors are left unchanged.
pub fn normalize(v: &mut [f32]) {
    let norm = v.iter().map(|x| f64::from(*x).powi(2)).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x = (f64::from(*x) / norm) as f32);
    }
}

pub fn cosine(a: &[f32], b: &[f32]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| f64::from(*x) * f64::from(*y)).sum();
    let na: f64 = a.iter().map(|x| f64::from(*x).powi(2)).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| f64::from(*x).powi(2)).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Component-wise mean of equally sized vectors.
pub fn mean_vector<'a>(vectors: impl IntoIterator<Item = &'a [f32]>, dim: usize) -> Vec<f32> {
    let mut sum = vec![0.0f64; dim];
    let mut n = 0usize;
    for v in vectors {
        for (s, x) in sum.iter_mut().zip(v) {
            *s += f64::from(*x);
        }
        n += 1;
    }
    sum.into_iter().map(|s| if n == 0 { 0.0 } else { (s / n as f64) as f32 }).collect()
}

#[derive(Serialize)]
struct ProcessRequest<'a> {
    text: &'a str,
}

#[derive(Deserialize)]
struct ProcessResponse {
    embedding: Vec<f32>,
}

struct ProcessIo {
    _child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

/// External encoder speaking line-delimited JSON over stdin/stdout:
/// one `{"text": ...}` request per line, answered by one
/// `{"embedding": [...]}` line.
pub struct ProcessEmbedder {
    command: String,
    dim: usize,
    io: Mutex<ProcessIo>,
}

impl ProcessEmbedder {
    pub fn spawn(program: &str, args: &[String], dim: usize) -> Result<Self> {
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()?;
        let stdin = child.stdin.take().ok_or_else(|| EmbedError::Protocol("no stdin".into()))?;
        let stdout = child.stdout.take().ok_or_else(|| EmbedError::Protocol("no stdout".into()))?;
        Ok(ProcessEmbedder {
            command: std::iter::once(program).chain(args.iter().map(String::as_str)).collect::<Vec<_>>().join(" "),
            dim,
            io: Mutex::new(ProcessIo {
                _child: child,
                stdin,
                stdout: BufReader::new(stdout),
            }),
        })
    }
}

impl EmbeddingProvider for ProcessEmbedder {
    fn name(&self) -> String {
        format!("process:{}", self.command)
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, text: &str) -> Result<Vec<f32>> {
        let mut io = self.io.lock().unwrap_or_else(|e| e.into_inner());
        let tokens = tokenize(text);
        let text = tokens.join(" ");
        let mut line = serde_json::to_string(&ProcessRequest { text: &text })
            .map_err(|e| EmbedError::Protocol(e.to_string()))?;
        line.push('\n');
        io.stdin.write_all(line.as_bytes())?;
        io.stdin.flush()?;
        let mut reply = String::new();
        if io.stdout.read_line(&mut reply)? == 0 {
            return Err(EmbedError::Protocol("process closed its output".into()));
        }
        let resp: ProcessResponse =
            serde_json::from_str(reply.trim_end()).map_err(|e| EmbedError::Protocol(e.to_string()))?;
        if resp.embedding.len() != self.dim {
            return Err(EmbedError::Dimension {
                expected: self.dim,
                got: resp.embedding.len(),
            });
        }
        if resp.embedding.iter().any(|x| !x.is_finite()) {
            return Err(EmbedError::Protocol("non-finite component".into()));
        }
        Ok(resp.embedding)
    }
}
