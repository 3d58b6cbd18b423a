//! Append-only archive of evaluated individuals.
//!
//! # Byte layout
//!
//! Archive file (`*.mca`):
//!
//! | bytes | content                                   |
//! |-------|-------------------------------------------|
//! | 7     | magic `MCARCH\0`                          |
//! | 1     | format version (`1`)                      |
//! | ...   | frames                                    |
//!
//! Each frame is a little-endian `u32` payload length, a little-endian `u32`
//! CRC-32 of the payload, and the payload: one [`ArchiveRecord`] as JSON,
//! raw-deflate compressed.
//!
//! Sidecar index (`*.mca.idx`): magic `MCIDX\0\0`, version byte, then per
//! record a `u64` frame offset, a `u64` individual id, a `u16` run-id length
//! and the run-id bytes, all little-endian. The index is derived data; it is
//! rebuilt from the archive whenever it is missing or stale.
//!
//! A reader only looks at the bytes present when it opened the file and stops
//! at an incomplete trailing frame, so it always sees a consistent prefix of
//! what the single writer has appended.

use std::collections::{HashMap, HashSet};
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufReader, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use flate2::read::DeflateDecoder;
use flate2::write::DeflateEncoder;
use flate2::Compression;
use metacell_core::cppn::Genome;
use metacell_core::design::{DesignReport, FailureKind};
use metacell_core::geometry::GroupTag;
use metacell_core::homogenization::{BaseMaterial, ElasticTensor, Objective};
use serde::{Deserialize, Serialize};

use crate::genome_io::GenomeRecord;
use crate::{Error, Result};

const MAGIC: &[u8; 7] = b"MCARCH\0";
const INDEX_MAGIC: &[u8; 7] = b"MCIDX\0\0";
pub const ARCHIVE_VERSION: u8 = 1;
const HEADER_LEN: u64 = 8;
const FRAME_HEADER_LEN: u64 = 8;
/// Frames larger than this are treated as corruption of the length field.
const MAX_FRAME: u32 = 64 << 20;

/// Homogenized properties of a feasible design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorRecord {
    pub c: [[f64; 3]; 3],
    pub e: f64,
    pub nu: f64,
}

impl From<&ElasticTensor> for TensorRecord {
    fn from(t: &ElasticTensor) -> Self {
        TensorRecord { c: t.c, e: t.e_avg, nu: t.nu_avg }
    }
}

/// One evaluated individual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchiveRecord {
    pub run_id: String,
    pub generation: u64,
    pub id: u64,
    pub genome: GenomeRecord,
    pub symmetry: GroupTag,
    pub resolution: usize,
    pub threshold: f64,
    pub material: BaseMaterial,
    pub objectives: Vec<Objective>,
    pub cv: f64,
    /// Minimized objective vector; absent when the evaluation failed.
    pub fitness: Option<Vec<f64>>,
    pub tensor: Option<TensorRecord>,
    pub volume_fraction: Option<f64>,
    pub failure: Option<FailureKind>,
}

impl ArchiveRecord {
    pub fn genome(&self) -> Result<Genome> {
        self.genome.clone().try_into()
    }

    pub fn feasible(&self) -> bool {
        self.cv == 0.0 && self.fitness.is_some()
    }

    pub(crate) fn set_detail(&mut self, detail: &DesignReport) {
        self.tensor = detail.tensor.as_ref().map(TensorRecord::from);
        self.volume_fraction = detail.volume_fraction;
        self.failure = detail.failure;
    }

    fn validate(&self) -> Result<()> {
        self.genome()?;
        if !(self.cv >= 0.0) {
            return Err(Error::CorruptRecord { offset: 0, reason: format!("negative cv {}", self.cv) });
        }
        if self.run_id.len() > u16::MAX as usize {
            return Err(Error::CorruptRecord { offset: 0, reason: "run id too long".into() });
        }
        Ok(())
    }
}

fn encode(record: &ArchiveRecord) -> Result<Vec<u8>> {
    let json = serde_json::to_vec(record)?;
    let mut enc = DeflateEncoder::new(Vec::with_capacity(json.len() / 3), Compression::default());
    enc.write_all(&json).expect("writing to memory");
    let payload = enc.finish().expect("writing to memory");
    let mut frame = Vec::with_capacity(payload.len() + FRAME_HEADER_LEN as usize);
    frame.extend_from_slice(&(payload.len() as u32).to_le_bytes());
    frame.extend_from_slice(&crc32fast::hash(&payload).to_le_bytes());
    frame.extend_from_slice(&payload);
    Ok(frame)
}

fn decode(payload: &[u8], offset: u64) -> Result<ArchiveRecord> {
    let corrupt = |reason: String| Error::CorruptRecord { offset, reason };
    let mut json = Vec::new();
    DeflateDecoder::new(payload).read_to_end(&mut json).map_err(|e| corrupt(e.to_string()))?;
    let record: ArchiveRecord = serde_json::from_slice(&json).map_err(|e| corrupt(e.to_string()))?;
    record.validate().map_err(|e| corrupt(e.to_string()))?;
    Ok(record)
}

pub fn index_path(archive: &Path) -> PathBuf {
    let mut s = archive.as_os_str().to_owned();
    s.push(".idx");
    PathBuf::from(s)
}

/// Appends records to an archive. There must be at most one writer per file.
#[derive(Debug)]
pub struct ArchiveWriter {
    path: PathBuf,
    file: File,
    index: File,
    keys: HashSet<(String, u64)>,
    committed: u64,
    records: usize,
    bytes: u64,
}

impl ArchiveWriter {
    /// Starts a new archive. An existing file is replaced only with `force`.
    pub fn create(path: &Path, force: bool) -> Result<Self> {
        if path.exists() && !force {
            return Err(Error::AlreadyExists(path.into()));
        }
        let mut file = File::create(path).map_err(Error::io(path))?;
        file.write_all(MAGIC).and_then(|_| file.write_all(&[ARCHIVE_VERSION])).map_err(Error::io(path))?;
        let index = new_index(&index_path(path))?;
        Ok(ArchiveWriter {
            path: path.into(),
            file,
            index,
            keys: HashSet::new(),
            committed: HEADER_LEN,
            records: 0,
            bytes: 0,
        })
    }

    /// Reopens an archive for appending. A torn trailing frame is cut off and
    /// the index is rebuilt.
    pub fn open_append(path: &Path) -> Result<Self> {
        let reader = ArchiveReader::open(path)?;
        let mut keys = HashSet::new();
        let mut entries = Vec::new();
        let mut scan = reader.scan()?;
        for (offset, rec) in (&mut scan).flatten() {
            entries.push((offset, rec.id, rec.run_id.clone()));
            keys.insert((rec.run_id, rec.id));
        }
        let end = scan.position();
        let file = OpenOptions::new().write(true).open(path).map_err(Error::io(path))?;
        file.set_len(end).map_err(Error::io(path))?;
        let mut file = file;
        file.seek(SeekFrom::End(0)).map_err(Error::io(path))?;
        let mut index = new_index(&index_path(path))?;
        let mut buf = Vec::new();
        for (offset, id, run) in &entries {
            push_index_entry(&mut buf, *offset, *id, run);
        }
        index.write_all(&buf).map_err(Error::io(index_path(path)))?;
        let records = entries.len();
        Ok(ArchiveWriter { path: path.into(), file, index, keys, committed: end, records, bytes: end - HEADER_LEN })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn len(&self) -> usize {
        self.records
    }

    pub fn is_empty(&self) -> bool {
        self.records == 0
    }

    /// Total frame bytes written.
    pub fn bytes(&self) -> u64 {
        self.bytes
    }

    pub fn contains(&self, run_id: &str, id: u64) -> bool {
        self.keys.contains(&(run_id.to_string(), id))
    }

    /// Appends one record. On an IO error the file is rolled back to the
    /// last complete frame, so the call can be retried.
    pub fn append(&mut self, record: &ArchiveRecord) -> Result<()> {
        let key = (record.run_id.clone(), record.id);
        if self.keys.contains(&key) {
            return Err(Error::DuplicateKey { run: key.0, id: key.1 });
        }
        record.validate()?;
        let frame = encode(record)?;
        let offset = self.committed;
        if let Err(e) = self.file.write_all(&frame) {
            self.rollback();
            return Err(Error::Io { path: self.path.clone(), source: e });
        }
        let mut entry = Vec::new();
        push_index_entry(&mut entry, offset, record.id, &record.run_id);
        if let Err(e) = self.index.write_all(&entry) {
            self.rollback();
            return Err(Error::Io { path: index_path(&self.path), source: e });
        }
        self.committed += frame.len() as u64;
        self.bytes += frame.len() as u64;
        self.records += 1;
        self.keys.insert(key);
        Ok(())
    }

    fn rollback(&mut self) {
        // Best effort: a failed truncate leaves a torn frame that readers skip.
        let _ = self.file.set_len(self.committed);
        let _ = self.file.seek(SeekFrom::Start(self.committed));
    }

    /// Flushes both files to stable storage.
    pub fn sync(&mut self) -> Result<()> {
        self.file.sync_data().map_err(Error::io(&self.path))?;
        self.index.sync_data().map_err(Error::io(index_path(&self.path)))
    }
}

fn new_index(path: &Path) -> Result<File> {
    let mut f = File::create(path).map_err(Error::io(path))?;
    f.write_all(INDEX_MAGIC).and_then(|_| f.write_all(&[ARCHIVE_VERSION])).map_err(Error::io(path))?;
    Ok(f)
}

fn push_index_entry(buf: &mut Vec<u8>, offset: u64, id: u64, run: &str) {
    buf.extend_from_slice(&offset.to_le_bytes());
    buf.extend_from_slice(&id.to_le_bytes());
    buf.extend_from_slice(&(run.len() as u16).to_le_bytes());
    buf.extend_from_slice(run.as_bytes());
}

/// Read access to an archive, limited to the bytes present at `open`.
#[derive(Debug, Clone)]
pub struct ArchiveReader {
    path: PathBuf,
    len: u64,
}

impl ArchiveReader {
    pub fn open(path: &Path) -> Result<Self> {
        let mut f = File::open(path).map_err(Error::io(path))?;
        let len = f.metadata().map_err(Error::io(path))?.len();
        let mut header = [0u8; HEADER_LEN as usize];
        if f.read_exact(&mut header).is_err() || &header[..7] != MAGIC {
            return Err(Error::ArchiveHeader(0));
        }
        if header[7] != ARCHIVE_VERSION {
            return Err(Error::ArchiveHeader(header[7]));
        }
        Ok(ArchiveReader { path: path.into(), len })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Iterates over `(frame offset, record)`. Corrupt frames are reported
    /// as errors and skipped; iteration ends at the first incomplete frame.
    pub fn scan(&self) -> Result<Scan> {
        let mut f = File::open(&self.path).map_err(Error::io(&self.path))?;
        f.seek(SeekFrom::Start(HEADER_LEN)).map_err(Error::io(&self.path))?;
        Ok(Scan { reader: BufReader::new(f), pos: HEADER_LEN, end: self.len, truncated: false, done: false })
    }

    /// All readable records plus the number of corrupt frames.
    pub fn read_all(&self) -> Result<ScanSummary> {
        let mut scan = self.scan()?;
        let mut records = Vec::new();
        let mut corrupt = 0;
        for item in &mut scan {
            match item {
                Ok((_, r)) => records.push(r),
                Err(Error::CorruptRecord { offset, reason }) => {
                    log::warn!("{}: skipping corrupt record at byte {offset}: {reason}", self.path.display());
                    corrupt += 1;
                }
                Err(e) => return Err(e),
            }
        }
        Ok(ScanSummary { records, corrupt, truncated_tail: scan.truncated })
    }

    /// Frame offsets by `(run id, individual id)`, from the sidecar index
    /// when it is consistent with the archive, else from a scan.
    pub fn index(&self) -> Result<HashMap<(String, u64), u64>> {
        if let Some(map) = self.read_index() {
            return Ok(map);
        }
        let mut map = HashMap::new();
        for (offset, rec) in self.scan()?.flatten() {
            map.insert((rec.run_id, rec.id), offset);
        }
        Ok(map)
    }

    fn read_index(&self) -> Option<HashMap<(String, u64), u64>> {
        let bytes = fs::read(index_path(&self.path)).ok()?;
        if bytes.len() < 8 || &bytes[..7] != INDEX_MAGIC || bytes[7] != ARCHIVE_VERSION {
            return None;
        }
        let mut map = HashMap::new();
        let mut rest = &bytes[8..];
        while !rest.is_empty() {
            if rest.len() < 18 {
                return None;
            }
            let offset = u64::from_le_bytes(rest[..8].try_into().ok()?);
            let id = u64::from_le_bytes(rest[8..16].try_into().ok()?);
            let n = u16::from_le_bytes(rest[16..18].try_into().ok()?) as usize;
            let run = std::str::from_utf8(rest.get(18..18 + n)?).ok()?.to_string();
            rest = &rest[18 + n..];
            if offset + FRAME_HEADER_LEN > self.len {
                return None;
            }
            map.insert((run, id), offset);
        }
        Some(map)
    }

    /// Reads the record starting at `offset`.
    pub fn read_at(&self, offset: u64) -> Result<ArchiveRecord> {
        let mut f = File::open(&self.path).map_err(Error::io(&self.path))?;
        f.seek(SeekFrom::Start(offset)).map_err(Error::io(&self.path))?;
        let mut scan = Scan { reader: BufReader::new(f), pos: offset, end: self.len, truncated: false, done: false };
        match scan.next() {
            Some(r) => r.map(|(_, rec)| rec),
            None => Err(Error::CorruptRecord { offset, reason: "no complete frame".into() }),
        }
    }

    /// Looks a record up through the index.
    pub fn get(&self, run_id: &str, id: u64) -> Result<Option<ArchiveRecord>> {
        match self.index()?.get(&(run_id.to_string(), id)) {
            Some(&offset) => {
                let rec = self.read_at(offset)?;
                Ok((rec.run_id == run_id && rec.id == id).then_some(rec))
            }
            None => Ok(None),
        }
    }
}

/// Result of [`ArchiveReader::read_all`].
#[derive(Debug, Clone)]
pub struct ScanSummary {
    pub records: Vec<ArchiveRecord>,
    pub corrupt: usize,
    pub truncated_tail: bool,
}

/// Iterator returned by [`ArchiveReader::scan`].
pub struct Scan {
    reader: BufReader<File>,
    pos: u64,
    end: u64,
    truncated: bool,
    done: bool,
}

impl Scan {
    /// Byte offset just past the last complete frame read so far.
    pub fn position(&self) -> u64 {
        self.pos
    }

    /// Whether iteration stopped at an incomplete frame.
    pub fn truncated(&self) -> bool {
        self.truncated
    }

    fn read_frame(&mut self) -> io::Result<Option<(u64, u32, u32, Vec<u8>)>> {
        if self.pos + FRAME_HEADER_LEN > self.end {
            return Ok(None);
        }
        let mut head = [0u8; FRAME_HEADER_LEN as usize];
        self.reader.read_exact(&mut head)?;
        let len = u32::from_le_bytes(head[..4].try_into().unwrap());
        let crc = u32::from_le_bytes(head[4..].try_into().unwrap());
        if len > MAX_FRAME || self.pos + FRAME_HEADER_LEN + len as u64 > self.end {
            return Ok(None);
        }
        let mut payload = vec![0u8; len as usize];
        self.reader.read_exact(&mut payload)?;
        let offset = self.pos;
        self.pos += FRAME_HEADER_LEN + len as u64;
        Ok(Some((offset, len, crc, payload)))
    }
}

impl Iterator for Scan {
    type Item = Result<(u64, ArchiveRecord)>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        match self.read_frame() {
            Ok(Some((offset, _, crc, payload))) => {
                if crc32fast::hash(&payload) != crc {
                    return Some(Err(Error::CorruptRecord { offset, reason: "checksum mismatch".into() }));
                }
                Some(decode(&payload, offset).map(|r| (offset, r)))
            }
            Ok(None) => {
                self.done = true;
                self.truncated = self.pos < self.end;
                None
            }
            Err(e) => {
                self.done = true;
                self.truncated = true;
                Some(Err(Error::Io { path: PathBuf::new(), source: e }))
            }
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use metacell_core::cppn::{initial_genome, InnovationRegistry, MutationRates};
    use metacell_core::homogenization::Property;
    use metacell_core::rng::{stream, Purpose};

    pub(crate) fn record(id: u64, fitness: Option<Vec<f64>>) -> ArchiveRecord {
        let mut reg = InnovationRegistry::new();
        let mut rng = stream(1, Purpose::Auxiliary, 0, id);
        let g = initial_genome(id, &mut reg, &MutationRates::default(), &mut rng);
        ArchiveRecord {
            run_id: "t".into(),
            generation: 0,
            id,
            genome: GenomeRecord::from(&g),
            symmetry: GroupTag::P4,
            resolution: 21,
            threshold: 0.5,
            material: BaseMaterial::default(),
            objectives: vec![Objective::maximize(Property::E), Objective::minimize(Property::Nu)],
            cv: if fitness.is_some() { 0.0 } else { 2.0 },
            fitness,
            tensor: None,
            volume_fraction: None,
            failure: None,
        }
    }

    #[test]
    fn append_then_scan() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.mca");
        let mut w = ArchiveWriter::create(&path, false).unwrap();
        for id in 0..5 {
            w.append(&record(id, Some(vec![id as f64, 1.0]))).unwrap();
        }
        w.sync().unwrap();
        let r = ArchiveReader::open(&path).unwrap();
        let all = r.read_all().unwrap();
        assert_eq!(all.records.len(), 5);
        assert_eq!(all.records[3], record(3, Some(vec![3.0, 1.0])));
        assert_eq!(r.get("t", 4).unwrap().unwrap().id, 4);
        assert!(r.get("t", 9).unwrap().is_none());
    }

    #[test]
    fn duplicate_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.mca");
        let mut w = ArchiveWriter::create(&path, false).unwrap();
        w.append(&record(1, None)).unwrap();
        assert!(matches!(w.append(&record(1, None)), Err(Error::DuplicateKey { id: 1, .. })));
        let mut other_run = record(1, None);
        other_run.run_id = "u".into();
        w.append(&other_run).unwrap();
        drop(w);
        let mut w = ArchiveWriter::open_append(&path).unwrap();
        assert!(matches!(w.append(&record(1, None)), Err(Error::DuplicateKey { .. })));
        assert_eq!(w.len(), 2);
    }

    #[test]
    fn existing_archive_needs_force() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.mca");
        ArchiveWriter::create(&path, false).unwrap();
        assert!(matches!(ArchiveWriter::create(&path, false), Err(Error::AlreadyExists(_))));
        ArchiveWriter::create(&path, true).unwrap();
    }

    #[test]
    fn readers_see_a_prefix_of_a_torn_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.mca");
        let mut w = ArchiveWriter::create(&path, false).unwrap();
        for id in 0..3 {
            w.append(&record(id, None)).unwrap();
        }
        drop(w);
        let full = fs::metadata(&path).unwrap().len();
        let f = OpenOptions::new().write(true).open(&path).unwrap();
        f.set_len(full - 5).unwrap();
        let all = ArchiveReader::open(&path).unwrap().read_all().unwrap();
        assert_eq!(all.records.len(), 2);
        assert!(all.truncated_tail);

        let mut w = ArchiveWriter::open_append(&path).unwrap();
        w.append(&record(2, None)).unwrap();
        drop(w);
        let all = ArchiveReader::open(&path).unwrap().read_all().unwrap();
        assert_eq!(all.records.iter().map(|r| r.id).collect::<Vec<_>>(), vec![0, 1, 2]);
        assert!(!all.truncated_tail);
    }

    #[test]
    fn corrupt_frames_are_skipped_and_counted() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.mca");
        let mut w = ArchiveWriter::create(&path, false).unwrap();
        for id in 0..3 {
            w.append(&record(id, None)).unwrap();
        }
        drop(w);
        let mut bytes = fs::read(&path).unwrap();
        let second = ArchiveReader::open(&path).unwrap().index().unwrap()[&("t".to_string(), 1)] as usize;
        bytes[second + 12] ^= 0xff;
        fs::write(&path, bytes).unwrap();
        let all = ArchiveReader::open(&path).unwrap().read_all().unwrap();
        assert_eq!(all.corrupt, 1);
        assert_eq!(all.records.iter().map(|r| r.id).collect::<Vec<_>>(), vec![0, 2]);
    }

    #[test]
    fn stale_index_falls_back_to_a_scan() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.mca");
        let mut w = ArchiveWriter::create(&path, false).unwrap();
        w.append(&record(7, None)).unwrap();
        drop(w);
        fs::write(index_path(&path), b"garbage").unwrap();
        assert_eq!(ArchiveReader::open(&path).unwrap().get("t", 7).unwrap().unwrap().id, 7);
    }

    #[test]
    fn bad_magic_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.mca");
        fs::write(&path, b"NOTANARCHIVE").unwrap();
        assert!(matches!(ArchiveReader::open(&path), Err(Error::ArchiveHeader(_))));
    }
}
