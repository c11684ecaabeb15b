//! Message delivery between roles.
//!
//! [`InProcess`] hands envelopes over directly. [`ByteStream`] serializes each
//! envelope with the JSON codec and frames it as a 4-byte big-endian length
//! followed by the payload.

use std::collections::VecDeque;
use std::io::{self, Read, Write};
use std::sync::{Arc, Mutex, PoisonError};

use crate::codec;
use crate::error::Result;

use super::Envelope;

/// Largest accepted frame payload.
pub const MAX_FRAME: usize = 64 << 20;

/// Reliable, ordered delivery of one envelope to its addressee.
pub trait Transport {
    /// Returns the envelope as the receiving role sees it.
    fn deliver(&mut self, envelope: Envelope) -> Result<Envelope>;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct InProcess;

impl Transport for InProcess {
    fn deliver(&mut self, envelope: Envelope) -> Result<Envelope> {
        Ok(envelope)
    }
}

pub fn write_frame<W: Write>(w: &mut W, payload: &[u8]) -> io::Result<()> {
    let len = u32::try_from(payload.len())
        .ok()
        .filter(|&n| n as usize <= MAX_FRAME)
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "frame too large"))?;
    w.write_all(&len.to_be_bytes())?;
    w.write_all(payload)?;
    w.flush()
}

pub fn read_frame<R: Read>(r: &mut R) -> io::Result<Vec<u8>> {
    let mut len = [0u8; 4];
    r.read_exact(&mut len)?;
    let len = u32::from_be_bytes(len) as usize;
    if len > MAX_FRAME {
        return Err(io::Error::new(
            io::ErrorKind::InvalidData,
            "frame too large",
        ));
    }
    let mut payload = vec![0u8; len];
    r.read_exact(&mut payload)?;
    Ok(payload)
}

/// Delivers envelopes over a byte stream: written to `writer`, read back
/// from `reader` on the receiving end.
pub struct ByteStream<W, R> {
    writer: W,
    reader: R,
    bytes_sent: u64,
}

impl<W: Write, R: Read> ByteStream<W, R> {
    pub fn new(writer: W, reader: R) -> Self {
        ByteStream {
            writer,
            reader,
            bytes_sent: 0,
        }
    }

    /// Total framed bytes written so far, length prefixes included.
    pub fn bytes_sent(&self) -> u64 {
        self.bytes_sent
    }
}

impl ByteStream<MemoryPipe, MemoryPipe> {
    /// Both ends on an in-memory pipe.
    pub fn loopback() -> Self {
        let pipe = MemoryPipe::default();
        ByteStream::new(pipe.clone(), pipe)
    }
}

impl<W: Write, R: Read> Transport for ByteStream<W, R> {
    fn deliver(&mut self, envelope: Envelope) -> Result<Envelope> {
        let payload = codec::encode_envelope(&envelope);
        write_frame(&mut self.writer, &payload)?;
        self.bytes_sent += 4 + payload.len() as u64;
        let received = read_frame(&mut self.reader)?;
        codec::decode_envelope(&received)
    }
}

/// Unbounded in-memory byte pipe; clones share the buffer.
#[derive(Clone, Debug, Default)]
pub struct MemoryPipe {
    buf: Arc<Mutex<VecDeque<u8>>>,
}

impl Write for MemoryPipe {
    fn write(&mut self, data: &[u8]) -> io::Result<usize> {
        self.buf
            .lock()
            .unwrap_or_else(PoisonError::into_inner)
            .extend(data);
        Ok(data.len())
    }

    fn flush(&mut self) -> io::Result<()> {
        Ok(())
    }
}

impl Read for MemoryPipe {
    fn read(&mut self, out: &mut [u8]) -> io::Result<usize> {
        let mut buf = self.buf.lock().unwrap_or_else(PoisonError::into_inner);
        let n = out.len().min(buf.len());
        for (dst, src) in out.iter_mut().zip(buf.drain(..n)) {
            *dst = src;
        }
        Ok(n)
    }
}
