//! Shot records and their persisted form.
//!
//! A batch persists as two files: `<stem>.meta` with key-value metadata and
//! hashes, and `<stem>.bits` holding the measurement-flip matrix packed
//! eight shots per byte, one column per measurement, each column padded to
//! a whole byte (shot `s` of column `m` lives at byte `m * ceil(shots/8) +
//! s/8`, bit `s % 8`, least-significant bit first). Population probes, when
//! present, append `<stem>.pop` with one level label byte per (shot, qubit).

use crate::{Error, Result};
use std::io::{Read, Write};
use std::path::Path;

/// Measurement bits for one shot, relative to the noiseless reference run.
#[derive(Clone, Debug)]
pub struct ShotRecord {
    pub seed: u64,
    /// Flip bit per measurement slot, in record order.
    pub flips: Vec<bool>,
    /// Level label per qubit at the probe point (probe circuits only).
    pub population: Option<Vec<u8>>,
    /// Leakage-injection draws that converted this shot's qubits: (cycle, qubit).
    pub injected_flags: Vec<(u16, u16)>,
}

/// Dense shot-major bit matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    words_per_row: usize,
    words: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> BitMatrix {
        let words_per_row = n_cols.div_ceil(64);
        BitMatrix {
            n_rows,
            n_cols,
            words_per_row,
            words: vec![0; words_per_row * n_rows],
        }
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        let w = self.words[row * self.words_per_row + col / 64];
        (w >> (col % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        let w = &mut self.words[row * self.words_per_row + col / 64];
        if value {
            *w |= 1 << (col % 64);
        } else {
            *w &= !(1 << (col % 64));
        }
    }

    pub fn row_words(&self, row: usize) -> &[u64] {
        &self.words[row * self.words_per_row..(row + 1) * self.words_per_row]
    }

    /// Mutable row chunks for parallel filling.
    pub(crate) fn par_rows(&mut self) -> rayon::slice::ChunksMut<'_, u64> {
        use rayon::prelude::*;
        self.words.par_chunks_mut(self.words_per_row)
    }

    /// Column-major packed bytes, eight shots (rows) per byte.
    fn to_packed_columns(&self) -> Vec<u8> {
        let bytes_per_col = self.n_rows.div_ceil(8);
        let mut out = vec![0u8; bytes_per_col * self.n_cols];
        for col in 0..self.n_cols {
            let base = col * bytes_per_col;
            for row in 0..self.n_rows {
                if self.get(row, col) {
                    out[base + row / 8] |= 1 << (row % 8);
                }
            }
        }
        out
    }

    fn from_packed_columns(bytes: &[u8], n_rows: usize, n_cols: usize) -> Result<BitMatrix> {
        let bytes_per_col = n_rows.div_ceil(8);
        if bytes.len() != bytes_per_col * n_cols {
            return Err(Error::Parse(format!(
                "bit file holds {} bytes, expected {}",
                bytes.len(),
                bytes_per_col * n_cols
            )));
        }
        let mut m = BitMatrix::zeros(n_rows, n_cols);
        for col in 0..n_cols {
            let base = col * bytes_per_col;
            for row in 0..n_rows {
                if (bytes[base + row / 8] >> (row % 8)) & 1 == 1 {
                    m.set(row, col, true);
                }
            }
        }
        Ok(m)
    }
}

/// A batch of shots with provenance metadata.
#[derive(Clone, Debug)]
pub struct RecordSet {
    pub circuit_hash: String,
    pub params_hash: String,
    pub n_shots: usize,
    pub base_seed: u64,
    /// Measurement slots per shot (the full plan, including probe slots).
    pub n_measurements: usize,
    pub flips: BitMatrix,
    /// Probe level labels, shot-major, `n_qubits` per shot.
    pub population: Option<(usize, Vec<u8>)>,
    /// Total leakage-injection conversions per qubit across all shots.
    pub injected_counts: Vec<u64>,
    pub code_version: String,
}

impl RecordSet {
    /// Fraction of shots with the flip bit set at `col`.
    pub fn column_mean(&self, col: usize) -> f64 {
        let mut count = 0u64;
        for row in 0..self.n_shots {
            count += self.flips.get(row, col) as u64;
        }
        count as f64 / self.n_shots as f64
    }

    pub fn meta_string(&self) -> String {
        let mut s = String::new();
        s.push_str("lqec-records v1\n");
        s.push_str(&format!("circuit_hash {}\n", self.circuit_hash));
        s.push_str(&format!("params_hash {}\n", self.params_hash));
        s.push_str(&format!("n_shots {}\n", self.n_shots));
        s.push_str(&format!("base_seed {}\n", self.base_seed));
        s.push_str(&format!("n_measurements {}\n", self.n_measurements));
        s.push_str(&format!(
            "population {}\n",
            match &self.population {
                Some((nq, _)) => nq.to_string(),
                None => "0".to_string(),
            }
        ));
        let counts: Vec<String> = self.injected_counts.iter().map(u64::to_string).collect();
        s.push_str(&format!("injected_counts {}\n", counts.join(",")));
        s.push_str(&format!("code_version {}\n", self.code_version));
        s
    }

    /// Write `<stem>.meta`, `<stem>.bits`, and optionally `<stem>.pop`.
    pub fn save(&self, stem: &Path) -> Result<()> {
        std::fs::write(stem.with_extension("meta"), self.meta_string())?;
        let mut f = std::fs::File::create(stem.with_extension("bits"))?;
        f.write_all(&self.flips.to_packed_columns())?;
        if let Some((_, pop)) = &self.population {
            std::fs::write(stem.with_extension("pop"), pop)?;
        }
        Ok(())
    }

    pub fn load(stem: &Path) -> Result<RecordSet> {
        let meta = std::fs::read_to_string(stem.with_extension("meta"))?;
        let mut lines = meta.lines();
        if lines.next() != Some("lqec-records v1") {
            return Err(Error::Parse("bad records header".into()));
        }
        let mut fields = std::collections::HashMap::new();
        for line in lines {
            if let Some((k, v)) = line.split_once(' ') {
                fields.insert(k.to_string(), v.to_string());
            }
        }
        let get = |k: &str| -> Result<String> {
            fields
                .get(k)
                .cloned()
                .ok_or_else(|| Error::Parse(format!("records meta missing `{k}`")))
        };
        let n_shots: usize = get("n_shots")?
            .parse()
            .map_err(|_| Error::Parse("bad n_shots".into()))?;
        let n_measurements: usize = get("n_measurements")?
            .parse()
            .map_err(|_| Error::Parse("bad n_measurements".into()))?;
        let pop_qubits: usize = get("population")?
            .parse()
            .map_err(|_| Error::Parse("bad population".into()))?;
        let mut bits = Vec::new();
        std::fs::File::open(stem.with_extension("bits"))?.read_to_end(&mut bits)?;
        let flips = BitMatrix::from_packed_columns(&bits, n_shots, n_measurements)?;
        let population = if pop_qubits > 0 {
            let pop = std::fs::read(stem.with_extension("pop"))?;
            if pop.len() != pop_qubits * n_shots {
                return Err(Error::Parse("population file size mismatch".into()));
            }
            Some((pop_qubits, pop))
        } else {
            None
        };
        let injected_counts = {
            let raw = get("injected_counts")?;
            if raw.is_empty() {
                vec![]
            } else {
                raw.split(',')
                    .map(|x| x.parse().map_err(|_| Error::Parse("bad injected_counts".into())))
                    .collect::<Result<_>>()?
            }
        };
        Ok(RecordSet {
            circuit_hash: get("circuit_hash")?,
            params_hash: get("params_hash")?,
            n_shots,
            base_seed: get("base_seed")?
                .parse()
                .map_err(|_| Error::Parse("bad base_seed".into()))?,
            n_measurements,
            flips,
            population,
            injected_counts,
            code_version: get("code_version")?,
        })
    }

    /// CSV export for small sets: one row per shot, one column per slot.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("shot");
        for m in 0..self.n_measurements {
            s.push_str(&format!(",m{m}"));
        }
        s.push('\n');
        for row in 0..self.n_shots {
            s.push_str(&row.to_string());
            for col in 0..self.n_measurements {
                s.push_str(if self.flips.get(row, col) { ",1" } else { ",0" });
            }
            s.push('\n');
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bit_matrix_round_trips_through_packed_columns() {
        let mut m = BitMatrix::zeros(13, 70);
        for (r, c) in [(0, 0), (7, 69), (8, 64), (12, 1), (5, 33)] {
            m.set(r, c, true);
        }
        let packed = m.to_packed_columns();
        assert_eq!(packed.len(), 2 * 70);
        let back = BitMatrix::from_packed_columns(&packed, 13, 70).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn record_set_persists_byte_exactly() {
        let dir = std::env::temp_dir().join(format!("lqec-rec-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let mut flips = BitMatrix::zeros(9, 5);
        flips.set(2, 3, true);
        flips.set(8, 0, true);
        let rs = RecordSet {
            circuit_hash: "aabbccdd00112233".into(),
            params_hash: "ffeeddcc00112233".into(),
            n_shots: 9,
            base_seed: 77,
            n_measurements: 5,
            flips,
            population: Some((2, vec![0u8; 18])),
            injected_counts: vec![1, 0, 4],
            code_version: "test".into(),
        };
        let stem = dir.join("batch");
        rs.save(&stem).unwrap();
        let back = RecordSet::load(&stem).unwrap();
        assert_eq!(back.meta_string(), rs.meta_string());
        assert_eq!(back.flips, rs.flips);
        assert_eq!(back.population, rs.population);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
