//! Constant-modulus sequence sets.
//!
//! A set holds `L` phase sequences of length `M`. Only the phases are
//! stored; the complex elements `e^{j phase}` are derived on demand, so
//! every element has modulus exactly one, including after a round trip
//! through the JSON file format.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// A set of `L` unit-modulus sequences of common length `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceSet {
    num_sequences: usize,
    length: usize,
    /// Row-major `L x M` phases in radians.
    phases: Vec<f64>,
}

impl SequenceSet {
    /// Builds a set from per-sequence phase rows (radians).
    ///
    /// Requires at least one sequence, length at least two, and equal row
    /// lengths.
    pub fn from_phase_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let l = rows.len();
        if l == 0 {
            return Err(Error::argument("sequence set needs at least one sequence"));
        }
        let m = rows[0].len();
        if m < 2 {
            return Err(Error::argument("sequence length must be at least 2"));
        }
        let mut phases = Vec::with_capacity(l * m);
        for row in &rows {
            if row.len() != m {
                return Err(Error::argument("all sequences must have the same length"));
            }
            if row.iter().any(|p| !p.is_finite()) {
                return Err(Error::argument("phases must be finite"));
            }
            phases.extend_from_slice(row);
        }
        Ok(SequenceSet {
            num_sequences: l,
            length: m,
            phases,
        })
    }

    /// Builds a set from a flat row-major phase buffer.
    pub fn from_flat_phases(l: usize, m: usize, phases: Vec<f64>) -> Result<Self> {
        if l == 0 || m < 2 {
            return Err(Error::argument("need L >= 1 and M >= 2"));
        }
        if phases.len() != l * m {
            return Err(Error::argument("phase buffer has wrong length"));
        }
        if phases.iter().any(|p| !p.is_finite()) {
            return Err(Error::argument("phases must be finite"));
        }
        Ok(SequenceSet {
            num_sequences: l,
            length: m,
            phases,
        })
    }

    /// Draws a random-phase set: phases `2*pi*u` with `u` uniform on [0,1),
    /// reproducible per seed.
    pub fn random(l: usize, m: usize, seed: u64) -> Result<Self> {
        if l == 0 || m < 2 {
            return Err(Error::argument("need L >= 1 and M >= 2"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phases = (0..l * m)
            .map(|_| 2.0 * std::f64::consts::PI * rng.gen::<f64>())
            .collect();
        Ok(SequenceSet {
            num_sequences: l,
            length: m,
            phases,
        })
    }

    pub fn num_sequences(&self) -> usize {
        self.num_sequences
    }

    pub fn length(&self) -> usize {
        self.length
    }

    /// Stacked dimension `M * L`.
    pub fn stacked_len(&self) -> usize {
        self.num_sequences * self.length
    }

    /// Phase of element `m` of sequence `i` (both zero-based).
    pub fn phase(&self, i: usize, m: usize) -> f64 {
        self.phases[i * self.length + m]
    }

    /// Complex element `e^{j phase}` of sequence `i` at position `m`.
    pub fn element(&self, i: usize, m: usize) -> Complex64 {
        Complex64::from_polar(1.0, self.phase(i, m))
    }

    /// One sequence as a complex vector.
    pub fn sequence(&self, i: usize) -> Vec<Complex64> {
        (0..self.length).map(|m| self.element(i, m)).collect()
    }

    /// All sequences stacked into one `ML` vector, sequence 0 first.
    pub fn stacked(&self) -> Vec<Complex64> {
        self.phases
            .iter()
            .map(|&p| Complex64::from_polar(1.0, p))
            .collect()
    }

    /// Phase rows, one per sequence.
    pub fn phase_rows(&self) -> Vec<Vec<f64>> {
        (0..self.num_sequences)
            .map(|i| self.phases[i * self.length..(i + 1) * self.length].to_vec())
            .collect()
    }
}
