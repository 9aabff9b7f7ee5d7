//! VAEF: a minimal little-endian container for `rows × cols` binary32 matrices.
//!
//! ```text
//! offset  size  field
//!      0     4  magic "VAEF"
//!      4     2  version (u16 LE) = 1
//!      6     1  dtype code = 1 (IEEE-754 binary32)
//!      7     1  reserved = 0
//!      8     4  rows (u32 LE)
//!     12     4  cols (u32 LE)
//!     16     …  rows × cols f32 LE, row-major; nothing may follow
//! ```

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::sync::Mutex;

use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"VAEF";
pub const VERSION: u16 = 1;
pub const DTYPE_F32: u8 = 1;
pub const HEADER_LEN: usize = 16;

/// Embedding widths produced by the reference encoders (textual/sentence, audio).
pub const PAPER_WIDTHS: [usize; 2] = [768, 1024];

/// Dense row-major `rows × cols` matrix of finite `f32` values.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f32>,
}

impl EmbeddingMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f32>) -> Result<Self> {
        if cols == 0 {
            return Err(Error::DimensionMismatch("embedding width must be positive".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: i / cols,
                col: i % cols,
            });
        }
        Ok(EmbeddingMatrix { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f32]>>(cols: usize, rows: &[R]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} values, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn empty(cols: usize) -> Self {
        assert!(cols > 0);
        EmbeddingMatrix {
            rows: 0,
            cols,
            data: Vec::new(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl ExactSizeIterator<Item = &[f32]> + '_ {
        self.data.chunks_exact(self.cols).take(self.rows)
    }

    /// Copies the listed rows, in order, into a new dense matrix.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        EmbeddingMatrix {
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }
}

pub fn write_embedding_file(m: &EmbeddingMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * m.data.len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(DTYPE_F32);
    out.push(0);
    out.extend_from_slice(&(m.rows as u32).to_le_bytes());
    out.extend_from_slice(&(m.cols as u32).to_le_bytes());
    for v in &m.data {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Reads a per-command embedding matrix, warning about non-standard widths.
pub fn read_embedding_file(bytes: &[u8]) -> Result<EmbeddingMatrix> {
    let m = read_matrix_file(bytes)?;
    if !PAPER_WIDTHS.contains(&m.cols) {
        warn_width(m.cols);
    }
    Ok(m)
}

/// Reads any VAEF matrix, such as a design matrix, without width expectations.
pub fn read_matrix_file(bytes: &[u8]) -> Result<EmbeddingMatrix> {
    if bytes.len() >= 4 && bytes[..4] != MAGIC {
        return Err(Error::BadMagic {
            found: bytes[..4].try_into().unwrap(),
        });
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::TruncatedHeader(bytes.len()));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    if bytes[6] != DTYPE_F32 {
        return Err(Error::UnsupportedDtype(bytes[6]));
    }
    if bytes[7] != 0 {
        return Err(Error::BadReserved(bytes[7]));
    }
    let rows = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    if cols == 0 {
        return Err(Error::DimensionMismatch("VAEF header declares zero columns".into()));
    }

    let payload = &bytes[HEADER_LEN..];
    let expected = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| Error::DimensionMismatch(format!("{rows}x{cols} overflows")))?;
    if payload.len() < expected {
        return Err(Error::TruncatedPayload {
            expected,
            found: payload.len(),
        });
    }
    if payload.len() > expected {
        return Err(Error::TrailingBytes(payload.len() - expected));
    }
    let data = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    EmbeddingMatrix::new(rows, cols, data)
}

/// Warns once per process for each unusual width.
fn warn_width(cols: usize) {
    static SEEN: Mutex<BTreeSet<usize>> = Mutex::new(BTreeSet::new());
    let mut seen = SEEN.lock().unwrap_or_else(|e| e.into_inner());
    if seen.insert(cols) {
        log::warn!("embedding width {cols} is not one of {PAPER_WIDTHS:?}");
    }
}

pub fn read_embedding_path(path: &Path) -> Result<EmbeddingMatrix> {
    let bytes = fs::read(path).map_err(|e| Error::from(e).at(path))?;
    read_embedding_file(&bytes).map_err(|e| e.at(path))
}

pub fn read_matrix_path(path: &Path) -> Result<EmbeddingMatrix> {
    let bytes = fs::read(path).map_err(|e| Error::from(e).at(path))?;
    read_matrix_file(&bytes).map_err(|e| e.at(path))
}

pub fn write_embedding_path(path: &Path, m: &EmbeddingMatrix) -> Result<()> {
    fs::write(path, write_embedding_file(m)).map_err(|e| Error::from(e).at(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn header(rows: u32, cols: u32) -> Vec<u8> {
        let mut h = b"VAEF".to_vec();
        h.extend_from_slice(&1u16.to_le_bytes());
        h.extend_from_slice(&[1, 0]);
        h.extend_from_slice(&rows.to_le_bytes());
        h.extend_from_slice(&cols.to_le_bytes());
        h
    }

    #[test]
    fn empty_matrix_is_header_only() {
        let bytes = write_embedding_file(&EmbeddingMatrix::empty(768));
        assert_eq!(bytes.len(), 16);
        assert_eq!(bytes, header(0, 768));
        assert_eq!(read_embedding_file(&bytes).unwrap().rows(), 0);
    }

    #[test]
    fn one_by_two_layout() {
        let m = EmbeddingMatrix::new(1, 2, vec![1.0, 2.0]).unwrap();
        let bytes = write_embedding_file(&m);
        let mut expected = header(1, 2);
        // 1.0f32 = 0x3F800000, 2.0f32 = 0x40000000, little-endian
        expected.extend_from_slice(&[0x00, 0x00, 0x80, 0x3F, 0x00, 0x00, 0x00, 0x40]);
        assert_eq!(bytes, expected);
        assert_eq!(bytes.len(), 24);
    }

    #[test]
    fn truncated_payload() {
        let mut bytes = header(2, 3);
        for v in [1.0f32, 2.0, 3.0, 4.0, 5.0] {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        assert!(matches!(
            read_embedding_file(&bytes),
            Err(Error::TruncatedPayload { expected: 24, found: 20 })
        ));
    }

    #[test]
    fn distinct_header_errors() {
        let mut bad = header(0, 4);
        bad[..4].copy_from_slice(b"XXXX");
        assert!(matches!(read_embedding_file(&bad), Err(Error::BadMagic { .. })));

        let mut v2 = header(0, 4);
        v2[4] = 2;
        assert!(matches!(read_embedding_file(&v2), Err(Error::UnsupportedVersion(2))));

        let mut f64_code = header(0, 4);
        f64_code[6] = 2;
        assert!(matches!(read_embedding_file(&f64_code), Err(Error::UnsupportedDtype(2))));

        assert!(matches!(read_embedding_file(b"VAEF\x01"), Err(Error::TruncatedHeader(5))));

        let mut trailing = header(0, 4);
        trailing.push(0);
        assert!(matches!(read_embedding_file(&trailing), Err(Error::TrailingBytes(1))));
    }

    #[test]
    fn non_finite_rejected() {
        let mut bytes = header(1, 2);
        bytes.extend_from_slice(&1.0f32.to_le_bytes());
        bytes.extend_from_slice(&f32::NAN.to_le_bytes());
        assert!(matches!(
            read_embedding_file(&bytes),
            Err(Error::NonFinite { row: 0, col: 1 })
        ));
        assert!(EmbeddingMatrix::new(1, 1, vec![f32::INFINITY]).is_err());
    }

    #[test]
    fn select_rows_copies_in_order() {
        let m = EmbeddingMatrix::from_rows(2, &[[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]).unwrap();
        let s = m.select_rows(&[2, 0]);
        assert_eq!(s.data(), &[5.0, 6.0, 1.0, 2.0]);
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(rows in 0usize..6, cols in 1usize..6, seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let data: Vec<f32> = (0..rows * cols)
                .map(|_| f32::from_bits(rng.random::<u32>()))
                .map(|v| if v.is_finite() { v } else { 0.5 })
                .collect();
            let m = EmbeddingMatrix::new(rows, cols, data).unwrap();
            let back = read_embedding_file(&write_embedding_file(&m)).unwrap();
            let bits = |m: &EmbeddingMatrix| m.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
            prop_assert_eq!((back.rows(), back.cols()), (rows, cols));
            prop_assert_eq!(bits(&back), bits(&m));
        }
    }
}
