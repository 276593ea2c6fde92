//! Checkpoints of long generator runs and the append-only row log.
//!
//! Checkpoint layout (all integers little-endian):
//!
//! ```text
//! header   8 bytes   b"LXCK" + u32 format version
//! record*            u32 tag, u64 payload length, payload
//! trailer  8 bytes   xxh3-64 of every preceding byte
//! ```
//!
//! Records: 1 params, 2 cursor, 3 live rows, 4 column weights, 5 detector
//! (version 2 only). Version 1 files have no detector record and load with
//! no detector state.

use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, BufWriter, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;
use xxhash_rust::xxh3::xxh3_64;

use crate::generator::{Generator, Params};
use crate::period::{DefiningMatrix, DetectorCursor, SavedState, WindowEntry};
use crate::row::{chain_hash, RowParseError, SparseRow};

pub const MAGIC: [u8; 4] = *b"LXCK";
pub const FORMAT_VERSION: u32 = 2;

const TAG_PARAMS: u32 = 1;
const TAG_CURSOR: u32 = 2;
const TAG_LIVE_ROWS: u32 = 3;
const TAG_COL_WEIGHTS: u32 = 4;
const TAG_DETECTOR: u32 = 5;

#[derive(Debug, Error)]
pub enum PersistError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("not a checkpoint file (bad magic)")]
    BadMagic,
    #[error("unsupported checkpoint format version {0} (this build reads 1..={FORMAT_VERSION})")]
    UnsupportedVersion(u32),
    #[error("checkpoint is truncated")]
    Truncated,
    #[error("checkpoint checksum mismatch")]
    ChecksumMismatch,
    #[error("corrupt checkpoint: {0}")]
    Corrupt(String),
    #[error("row log line {line}: {source}")]
    LogParse { line: u64, source: RowParseError },
    #[error("row log is out of sequence at line {line}: expected row {expected}, found {found}")]
    LogSequence { line: u64, expected: u64, found: u64 },
    #[error("row log holds {have} rows, {want} needed")]
    LogShort { have: u64, want: u64 },
    #[error("row log hash {log:#018x} disagrees with checkpoint hash {checkpoint:#018x}")]
    LogHashMismatch { log: u64, checkpoint: u64 },
}

/// Generator state plus detector cursors, between two rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Checkpoint {
    pub generator: Generator,
    pub detector: Option<DetectorCursor>,
    /// Byte length of the row log when this checkpoint was taken.
    pub log_offset: u64,
}

impl Checkpoint {
    pub fn new(generator: Generator, detector: Option<DetectorCursor>) -> Self {
        Checkpoint {
            generator,
            detector,
            log_offset: 0,
        }
    }

    pub fn with_log_offset(mut self, offset: u64) -> Self {
        self.log_offset = offset;
        self
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        self.encode(FORMAT_VERSION)
    }

    pub(crate) fn encode(&self, version: u32) -> Vec<u8> {
        let g = &self.generator;
        let mut out = Vec::new();
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&version.to_le_bytes());

        let mut p = Enc::default();
        let params = g.params();
        p.u8(params.order().is_some() as u8);
        p.u32(params.order().unwrap_or(0));
        p.u32(params.row_cap());
        p.u32(params.col_cap());
        record(&mut out, TAG_PARAMS, &p.0);

        let mut c = Enc::default();
        c.u64(g.next_k());
        c.u64(g.frontier());
        c.u64(g.rows_emitted());
        c.u64(g.running_hash());
        c.u64(self.log_offset);
        record(&mut out, TAG_CURSOR, &c.0);

        let mut r = Enc::default();
        r.u64(g.live_rows().len() as u64);
        for row in g.live_rows() {
            r.u64(row.index);
            r.u32(row.ones.len() as u32);
            for &j in &row.ones {
                r.u64(j);
            }
        }
        record(&mut out, TAG_LIVE_ROWS, &r.0);

        let weights = g.column_weights();
        let mut w = Enc::default();
        w.u64(weights.len() as u64);
        for (col, weight) in weights {
            w.u64(col);
            w.u16(weight as u16);
        }
        record(&mut out, TAG_COL_WEIGHTS, &w.0);

        if version >= 2 {
            if let Some(det) = &self.detector {
                let mut e = Enc::default();
                e.u8(DetectorCursor::ALGORITHM_TAG);
                e.u64(det.window_capacity);
                e.u64(det.brent_power);
                e.u64(det.brent_lam);
                e.u64(det.steps);
                match &det.brent_saved {
                    None => e.u8(0),
                    Some(saved) => {
                        e.u8(1);
                        e.u128(saved.hash);
                        let m = &saved.matrix;
                        e.u32(m.d());
                        e.u32(m.b());
                        e.u64(m.anchor_k());
                        e.u64(m.anchor_l());
                        e.u64(m.cells().len() as u64);
                        for &(i, j) in m.cells() {
                            e.u32(i);
                            e.u32(j);
                        }
                    }
                }
                e.u64(det.window.len() as u64);
                for entry in &det.window {
                    e.u128(entry.hash);
                    e.u64(entry.k);
                    e.u64(entry.l);
                }
                record(&mut out, TAG_DETECTOR, &e.0);
            }
        }

        let sum = xxh3_64(&out);
        out.extend_from_slice(&sum.to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, PersistError> {
        if bytes.len() < 16 {
            return Err(if bytes.len() >= 4 && bytes[..4] != MAGIC {
                PersistError::BadMagic
            } else {
                PersistError::Truncated
            });
        }
        if bytes[..4] != MAGIC {
            return Err(PersistError::BadMagic);
        }
        let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
        if version == 0 || version > FORMAT_VERSION {
            return Err(PersistError::UnsupportedVersion(version));
        }
        let (body, trailer) = bytes.split_at(bytes.len() - 8);
        let stored = u64::from_le_bytes(trailer.try_into().unwrap());
        if xxh3_64(body) != stored {
            // A cut-off file fails here as well; tell the two apart by
            // whether the record framing runs past the end.
            return Err(if framing_overruns(&body[8..]) {
                PersistError::Truncated
            } else {
                PersistError::ChecksumMismatch
            });
        }

        let mut params = None;
        let mut cursor = None;
        let mut live = None;
        let mut weights = None;
        let mut detector = None;
        let mut dec = Dec(&body[8..]);
        while !dec.0.is_empty() {
            let tag = dec.u32()?;
            let len = dec.u64()? as usize;
            let payload = dec.take(len)?;
            let mut p = Dec(payload);
            match tag {
                TAG_PARAMS => {
                    let is_order = p.u8()?;
                    let order = p.u32()?;
                    let row_cap = p.u32()?;
                    let col_cap = p.u32()?;
                    let parsed = if is_order == 1 {
                        let params = Params::new(order as u64).map_err(|e| corrupt(e.to_string()))?;
                        if params.row_cap() != row_cap || params.col_cap() != col_cap {
                            return Err(corrupt("caps disagree with the order"));
                        }
                        params
                    } else {
                        Params::naive(row_cap as u64, col_cap as u64).map_err(|e| corrupt(e.to_string()))?
                    };
                    params = Some(parsed);
                }
                TAG_CURSOR => {
                    cursor = Some((p.u64()?, p.u64()?, p.u64()?, p.u64()?, p.u64()?));
                }
                TAG_LIVE_ROWS => {
                    let count = p.u64()?;
                    let mut rows = Vec::new();
                    for _ in 0..count {
                        let index = p.u64()?;
                        let len = p.u32()?;
                        let mut ones = Vec::with_capacity(len.min(1024) as usize);
                        for _ in 0..len {
                            ones.push(p.u64()?);
                        }
                        rows.push(SparseRow { index, ones });
                    }
                    live = Some(rows);
                }
                TAG_COL_WEIGHTS => {
                    let count = p.u64()?;
                    let mut w = Vec::new();
                    for _ in 0..count {
                        w.push((p.u64()?, p.u16()? as u32));
                    }
                    weights = Some(w);
                }
                TAG_DETECTOR if version >= 2 => {
                    detector = Some(decode_detector(&mut p)?);
                }
                other => return Err(corrupt(format!("unknown record tag {other}"))),
            }
            if !p.0.is_empty() {
                return Err(corrupt(format!("record {tag} has trailing bytes")));
            }
        }

        let params = params.ok_or_else(|| corrupt("missing params record"))?;
        let (next_k, frontier, rows_emitted, running_hash, log_offset) =
            cursor.ok_or_else(|| corrupt("missing cursor record"))?;
        let live = live.ok_or_else(|| corrupt("missing live-rows record"))?;
        let weights = weights.ok_or_else(|| corrupt("missing column-weights record"))?;
        let generator = Generator::from_parts(
            params,
            next_k,
            frontier,
            live,
            &weights,
            rows_emitted,
            running_hash,
        )
        .map_err(corrupt)?;
        Ok(Checkpoint {
            generator,
            detector,
            log_offset,
        })
    }
}

fn decode_detector(p: &mut Dec<'_>) -> Result<DetectorCursor, PersistError> {
    let tag = p.u8()?;
    if tag != DetectorCursor::ALGORITHM_TAG {
        return Err(corrupt(format!("unknown detector algorithm tag {tag}")));
    }
    let window_capacity = p.u64()?;
    let brent_power = p.u64()?;
    let brent_lam = p.u64()?;
    let steps = p.u64()?;
    let saved = match p.u8()? {
        0 => None,
        1 => {
            let hash = p.u128()?;
            let d = p.u32()?;
            let b = p.u32()?;
            let anchor_k = p.u64()?;
            let anchor_l = p.u64()?;
            let n = p.u64()?;
            let mut cells = Vec::with_capacity(n.min(1 << 20) as usize);
            for _ in 0..n {
                cells.push((p.u32()?, p.u32()?));
            }
            let matrix = DefiningMatrix::from_parts(d, b, cells, anchor_k, anchor_l);
            if matrix.content_hash() != hash {
                return Err(corrupt("saved defining matrix does not match its hash"));
            }
            Some(SavedState { hash, matrix })
        }
        other => return Err(corrupt(format!("bad saved-state flag {other}"))),
    };
    let len = p.u64()?;
    let mut window = Vec::with_capacity(len.min(1 << 20) as usize);
    for _ in 0..len {
        window.push(WindowEntry {
            hash: p.u128()?,
            k: p.u64()?,
            l: p.u64()?,
        });
    }
    Ok(DetectorCursor::from_parts(
        window_capacity,
        window,
        brent_power,
        brent_lam,
        saved,
        steps,
    ))
}

fn corrupt(msg: impl Into<String>) -> PersistError {
    PersistError::Corrupt(msg.into())
}

fn record(out: &mut Vec<u8>, tag: u32, payload: &[u8]) {
    out.extend_from_slice(&tag.to_le_bytes());
    out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
    out.extend_from_slice(payload);
}

fn framing_overruns(mut body: &[u8]) -> bool {
    while !body.is_empty() {
        if body.len() < 12 {
            return true;
        }
        let len = u64::from_le_bytes(body[4..12].try_into().unwrap());
        let rest = &body[12..];
        if (rest.len() as u64) < len {
            return true;
        }
        body = &rest[len as usize..];
    }
    false
}

#[derive(Default)]
struct Enc(Vec<u8>);

impl Enc {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u16(&mut self, v: u16) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u128(&mut self, v: u128) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
}

struct Dec<'a>(&'a [u8]);

impl<'a> Dec<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], PersistError> {
        if self.0.len() < n {
            return Err(PersistError::Truncated);
        }
        let (head, tail) = self.0.split_at(n);
        self.0 = tail;
        Ok(head)
    }
    fn u8(&mut self) -> Result<u8, PersistError> {
        Ok(self.take(1)?[0])
    }
    fn u16(&mut self) -> Result<u16, PersistError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }
    fn u32(&mut self) -> Result<u32, PersistError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64, PersistError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn u128(&mut self) -> Result<u128, PersistError> {
        Ok(u128::from_le_bytes(self.take(16)?.try_into().unwrap()))
    }
}

/// Writes `checkpoint` to `dest` atomically (temp file, fsync, rename) and
/// returns the number of bytes written.
pub fn save_checkpoint(checkpoint: &Checkpoint, dest: &Path) -> Result<u64, PersistError> {
    let bytes = checkpoint.to_bytes();
    let tmp = temp_path(dest);
    let result = (|| {
        let mut f = File::create(&tmp)?;
        f.write_all(&bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, dest)?;
        if let Some(dir) = dest.parent().filter(|d| !d.as_os_str().is_empty()) {
            // directory fsync is not supported everywhere
            let _ = File::open(dir).and_then(|d| d.sync_all());
        }
        Ok::<_, io::Error>(())
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(e.into());
    }
    Ok(bytes.len() as u64)
}

fn temp_path(dest: &Path) -> PathBuf {
    let name = dest
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "checkpoint".into());
    dest.with_file_name(format!(".{name}.tmp-{}", std::process::id()))
}

pub fn load_checkpoint(src: &Path) -> Result<Checkpoint, PersistError> {
    Checkpoint::from_bytes(&fs::read(src)?)
}

/// Appends rows to a row log, tracking the byte offset.
pub struct RowLogWriter {
    out: BufWriter<File>,
    offset: u64,
}

impl RowLogWriter {
    pub fn create(path: &Path) -> Result<Self, PersistError> {
        Ok(RowLogWriter {
            out: BufWriter::new(File::create(path)?),
            offset: 0,
        })
    }

    /// Reopens a log, dropping anything written after `offset`.
    pub fn resume(path: &Path, offset: u64) -> Result<Self, PersistError> {
        let mut f = OpenOptions::new().read(true).write(true).open(path)?;
        let len = f.metadata()?.len();
        if len < offset {
            return Err(PersistError::LogShort {
                have: len,
                want: offset,
            });
        }
        f.set_len(offset)?;
        f.seek(SeekFrom::Start(offset))?;
        Ok(RowLogWriter {
            out: BufWriter::new(f),
            offset,
        })
    }

    pub fn append(&mut self, row: &SparseRow) -> Result<(), PersistError> {
        let line = row.to_log_line();
        self.out.write_all(line.as_bytes())?;
        self.out.write_all(b"\n")?;
        self.offset += line.len() as u64 + 1;
        Ok(())
    }

    /// Flushes and fsyncs; returns the durable byte offset.
    pub fn sync(&mut self) -> Result<u64, PersistError> {
        self.out.flush()?;
        self.out.get_ref().sync_data()?;
        Ok(self.offset)
    }

    pub fn offset(&self) -> u64 {
        self.offset
    }
}

/// Iterates the rows of a log, checking that indices run 1, 2, 3, ...
pub fn read_row_log(path: &Path) -> Result<impl Iterator<Item = Result<SparseRow, PersistError>>, PersistError> {
    let reader = BufReader::new(File::open(path)?);
    let mut expected = 1u64;
    Ok(reader.lines().map(move |line| {
        let line_no = expected;
        let line = line?;
        let row: SparseRow = line
            .parse()
            .map_err(|source| PersistError::LogParse { line: line_no, source })?;
        if row.index != expected {
            return Err(PersistError::LogSequence {
                line: line_no,
                expected,
                found: row.index,
            });
        }
        expected += 1;
        Ok(row)
    }))
}

/// Rows `start ..= start + count - 1` of a log.
pub fn read_row_range(path: &Path, start: u64, count: u64) -> Result<Vec<SparseRow>, PersistError> {
    let mut out = Vec::with_capacity(count as usize);
    for row in read_row_log(path)? {
        let row = row?;
        if row.index >= start + count {
            break;
        }
        if row.index >= start {
            out.push(row);
        }
    }
    if (out.len() as u64) < count {
        return Err(PersistError::LogShort {
            have: (start + out.len() as u64).saturating_sub(1),
            want: start + count - 1,
        });
    }
    Ok(out)
}

/// Hash chain over the first `rows` rows of a log.
pub fn replay_hash(path: &Path, rows: u64) -> Result<u64, PersistError> {
    let mut h = 0;
    let mut seen = 0;
    for row in read_row_log(path)?.take(rows as usize) {
        h = chain_hash(h, &row?);
        seen += 1;
    }
    if seen < rows {
        return Err(PersistError::LogShort { have: seen, want: rows });
    }
    Ok(h)
}

/// Checks that a log's prefix reproduces the checkpoint's running hash.
pub fn verify_log(checkpoint: &Checkpoint, path: &Path) -> Result<(), PersistError> {
    let g = &checkpoint.generator;
    let log = replay_hash(path, g.rows_emitted())?;
    if log != g.running_hash() {
        return Err(PersistError::LogHashMismatch {
            log,
            checkpoint: g.running_hash(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(rows: u64, with_detector: bool) -> Checkpoint {
        let mut g = Generator::new(3).unwrap();
        let mut det = DetectorCursor::new(8);
        for _ in 0..rows {
            g.next_row();
            if with_detector {
                det.observe(&g);
            }
        }
        Checkpoint::new(g, with_detector.then_some(det)).with_log_offset(1234)
    }

    #[test]
    fn round_trip() {
        for det in [false, true] {
            let ck = sample(40, det);
            assert_eq!(Checkpoint::from_bytes(&ck.to_bytes()).unwrap(), ck);
        }
    }

    #[test]
    fn header_layout() {
        let bytes = sample(5, true).to_bytes();
        assert_eq!(&bytes[..4], b"LXCK");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), FORMAT_VERSION);
    }

    #[test]
    fn version_one_migrates_without_detector() {
        let ck = sample(40, true);
        let v1 = ck.encode(1);
        assert_eq!(u32::from_le_bytes(v1[4..8].try_into().unwrap()), 1);
        let loaded = Checkpoint::from_bytes(&v1).unwrap();
        assert_eq!(loaded.detector, None);
        assert_eq!(loaded.generator, ck.generator);
        assert_eq!(loaded.log_offset, ck.log_offset);
        // the migrated generator keeps producing the same rows
        let mut a = loaded.generator;
        let mut b = ck.generator.clone();
        for _ in 0..50 {
            assert_eq!(a.next_row(), b.next_row());
        }
    }

    #[test]
    fn future_version_rejected() {
        let mut bytes = sample(5, false).to_bytes();
        bytes[4..8].copy_from_slice(&3u32.to_le_bytes());
        let n = bytes.len();
        let sum = xxh3_64(&bytes[..n - 8]);
        bytes[n - 8..].copy_from_slice(&sum.to_le_bytes());
        assert!(matches!(
            Checkpoint::from_bytes(&bytes),
            Err(PersistError::UnsupportedVersion(3))
        ));
    }

    #[test]
    fn damage_detected() {
        let bytes = sample(30, true).to_bytes();
        for cut in [0, 3, 10, bytes.len() / 2, bytes.len() - 1] {
            assert!(
                matches!(
                    Checkpoint::from_bytes(&bytes[..cut]),
                    Err(PersistError::Truncated)
                ),
                "cut at {cut}"
            );
        }
        let mut flipped = bytes.clone();
        let last_payload_byte = flipped.len() - 9;
        flipped[last_payload_byte] ^= 1;
        assert!(matches!(
            Checkpoint::from_bytes(&flipped),
            Err(PersistError::ChecksumMismatch)
        ));
        let mut magic = bytes;
        magic[0] = b'X';
        assert!(matches!(Checkpoint::from_bytes(&magic), Err(PersistError::BadMagic)));
    }
}
