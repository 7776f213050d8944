//! Binary time-tag files.
//!
//! A 16-byte header (`"TBE1"`, version `u16`, record count `u64`, two
//! reserved zero bytes) followed by 9-byte records: channel code `u8` and
//! timestamp `u64` in picoseconds. All integers are little-endian.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use timebin_core::simulator::{Channel, EventRecord};

use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"TBE1";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 16;
pub const RECORD_LEN: usize = 9;

pub fn encode_header(count: u64) -> [u8; HEADER_LEN] {
    let mut h = [0u8; HEADER_LEN];
    h[..4].copy_from_slice(&MAGIC);
    h[4..6].copy_from_slice(&VERSION.to_le_bytes());
    h[6..14].copy_from_slice(&count.to_le_bytes());
    h
}

pub fn encode_record(rec: &EventRecord) -> [u8; RECORD_LEN] {
    let mut r = [0u8; RECORD_LEN];
    r[0] = rec.channel.code();
    r[1..].copy_from_slice(&rec.timestamp.to_le_bytes());
    r
}

pub fn write_events<W: Write>(mut w: W, events: &[EventRecord]) -> io::Result<()> {
    w.write_all(&encode_header(events.len() as u64))?;
    for e in events {
        w.write_all(&encode_record(e))?;
    }
    w.flush()
}

pub fn write_file(path: &Path, events: &[EventRecord]) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    write_events(BufWriter::with_capacity(1 << 16, f), events).map_err(|e| Error::io(path, e))
}

/// Streaming reader over the records of a time-tag file.
pub struct TagReader<R> {
    inner: R,
    remaining: u64,
    count: u64,
}

impl<R: Read> TagReader<R> {
    pub fn new(mut inner: R) -> io::Result<Self> {
        let mut h = [0u8; HEADER_LEN];
        inner.read_exact(&mut h)?;
        if h[..4] != MAGIC {
            return Err(io::Error::new(io::ErrorKind::InvalidData, "bad magic, not a TBE1 time-tag file"));
        }
        let version = u16::from_le_bytes([h[4], h[5]]);
        if version != VERSION {
            return Err(io::Error::new(io::ErrorKind::InvalidData, format!("unsupported version {version}")));
        }
        let count = u64::from_le_bytes(h[6..14].try_into().unwrap());
        Ok(Self { inner, remaining: count, count })
    }

    /// Record count from the header.
    pub fn record_count(&self) -> u64 {
        self.count
    }

    fn next_record(&mut self) -> io::Result<EventRecord> {
        let mut r = [0u8; RECORD_LEN];
        self.inner.read_exact(&mut r)?;
        let channel = Channel::from_code(r[0])
            .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidData, format!("unknown channel code {}", r[0])))?;
        Ok(EventRecord::new(channel, u64::from_le_bytes(r[1..].try_into().unwrap())))
    }
}

impl<R: Read> Iterator for TagReader<R> {
    type Item = io::Result<EventRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let rec = self.next_record();
        if rec.is_err() {
            self.remaining = 0;
        }
        Some(rec)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (0, usize::try_from(self.remaining).ok())
    }
}

pub fn open(path: &Path) -> Result<TagReader<BufReader<File>>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    TagReader::new(BufReader::with_capacity(1 << 16, f)).map_err(|e| Error::format(path, e.to_string()))
}

pub fn read_file(path: &Path) -> Result<Vec<EventRecord>> {
    let reader = open(path)?;
    let mut out = Vec::with_capacity(reader.record_count().min(1 << 28) as usize);
    for rec in reader {
        out.push(rec.map_err(|e| Error::format(path, e.to_string()))?);
    }
    Ok(out)
}

/// Feeds every record of `path` to `sink`, stopping at the first error.
pub fn for_each_record(path: &Path, mut sink: impl FnMut(EventRecord)) -> Result<u64> {
    let mut n = 0;
    for rec in open(path)? {
        sink(rec.map_err(|e| Error::format(path, e.to_string()))?);
        n += 1;
    }
    Ok(n)
}
