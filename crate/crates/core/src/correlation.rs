//! Aperiodic auto/cross-correlations and the sidelobe metrics built on them.
//!
//! For sequences `s_i`, `s_j` of length `M` the aperiodic cross-correlation
//! at lag `k >= 0` is
//!
//! ```text
//! r_ij(k) = sum_{m=0}^{M-1-k} conj(s_i[m]) * s_j[m+k],      r_ij(-k) = conj(r_ji(k)).
//! ```
//!
//! The peak sidelobe level (PSL) is the largest `|r_ij(k)|` over the
//! constrained lag set: all nonzero lags of every autocorrelation and all
//! lags `0..M-1` of every cross-correlation. The integrated sidelobe level
//! (ISL) is the sum of `|r_ij(k)|^2` over the same set.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::sequence::SequenceSet;

/// One penalized correlation entry: pair `(i, j)` at lag `k`.
///
/// Indices are zero-based. Autocorrelation entries (`i == j`) carry lags
/// `1..=M-1`, cross entries carry `0..=M-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LagConstraint {
    pub i: usize,
    pub j: usize,
    pub k: usize,
}

/// The full ordered set of penalized `(i, j, k)` triples.
///
/// Enumeration is deterministic: pairs `(i, j)` row-major, lags ascending.
/// Its size is `L*(M-1) + L*(L-1)*M`.
#[derive(Debug, Clone)]
pub struct LagConstraintSet {
    num_sequences: usize,
    length: usize,
    constraints: Vec<LagConstraint>,
}

impl LagConstraintSet {
    /// Enumerates every penalized lag for an `(L, M)` sequence set.
    pub fn full(l: usize, m: usize) -> Result<Self> {
        if l == 0 || m < 2 {
            return Err(Error::argument("need L >= 1 and M >= 2"));
        }
        let mut constraints = Vec::with_capacity(l * (m - 1) + l * (l - 1) * m);
        for i in 0..l {
            for j in 0..l {
                let k_lo = if i == j { 1 } else { 0 };
                for k in k_lo..m {
                    constraints.push(LagConstraint { i, j, k });
                }
            }
        }
        Ok(LagConstraintSet {
            num_sequences: l,
            length: m,
            constraints,
        })
    }

    /// Builds a set from explicit triples, validating index ranges and the
    /// lag rule. Intended for reduced test instances.
    pub fn from_constraints(l: usize, m: usize, constraints: Vec<LagConstraint>) -> Result<Self> {
        if l == 0 || m < 2 {
            return Err(Error::argument("need L >= 1 and M >= 2"));
        }
        for c in &constraints {
            let bad_index = c.i >= l || c.j >= l || c.k >= m;
            let bad_lag = c.i == c.j && c.k == 0;
            if bad_index || bad_lag {
                return Err(Error::argument(format!(
                    "inadmissible constraint ({}, {}, {})",
                    c.i, c.j, c.k
                )));
            }
        }
        Ok(LagConstraintSet {
            num_sequences: l,
            length: m,
            constraints,
        })
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn num_sequences(&self) -> usize {
        self.num_sequences
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn constraints(&self) -> &[LagConstraint] {
        &self.constraints
    }

    pub fn iter(&self) -> impl Iterator<Item = &LagConstraint> {
        self.constraints.iter()
    }
}

/// All correlation values of a set, over every ordered pair and lag
/// `-(M-1)..=M-1`.
///
/// Satisfies `value(i, j, k) == conj(value(j, i, -k))` exactly: only one
/// representative per mirrored pair is computed and the other is filled by
/// conjugation.
#[derive(Debug, Clone)]
pub struct CorrelationTable {
    num_sequences: usize,
    length: usize,
    /// Per ordered pair `(i, j)`, values for lags `-(M-1)..=M-1`.
    values: Vec<Complex64>,
}

impl CorrelationTable {
    fn zeros(l: usize, m: usize) -> Self {
        CorrelationTable {
            num_sequences: l,
            length: m,
            values: vec![Complex64::new(0.0, 0.0); l * l * (2 * m - 1)],
        }
    }

    fn idx(&self, i: usize, j: usize, k: isize) -> usize {
        let m = self.length as isize;
        debug_assert!(i < self.num_sequences && j < self.num_sequences);
        debug_assert!(k.abs() < m);
        (i * self.num_sequences + j) * (2 * self.length - 1) + (k + m - 1) as usize
    }

    /// Correlation `r_ij(k)`; panics if an index or lag is out of range.
    pub fn value(&self, i: usize, j: usize, k: isize) -> Complex64 {
        self.values[self.idx(i, j, k)]
    }

    fn set(&mut self, i: usize, j: usize, k: isize, v: Complex64) {
        let at = self.idx(i, j, k);
        self.values[at] = v;
    }

    pub fn num_sequences(&self) -> usize {
        self.num_sequences
    }

    pub fn length(&self) -> usize {
        self.length
    }
}

/// Direct evaluation of a single correlation value.
///
/// `k < 0` is evaluated through the mirror identity.
pub fn correlate_brute(set: &SequenceSet, i: usize, j: usize, k: isize) -> Result<Complex64> {
    let l = set.num_sequences();
    let m = set.length() as isize;
    if i >= l || j >= l {
        return Err(Error::argument(format!(
            "sequence index out of range: ({i}, {j}) with L = {l}"
        )));
    }
    if k.abs() >= m {
        return Err(Error::argument(format!(
            "lag {k} out of range for M = {m}"
        )));
    }
    if k < 0 {
        return Ok(correlate_brute(set, j, i, -k)?.conj());
    }
    let k = k as usize;
    let m = set.length();
    let mut acc = Complex64::new(0.0, 0.0);
    for pos in 0..m - k {
        acc += set.element(i, pos).conj() * set.element(j, pos + k);
    }
    Ok(acc)
}

/// Computes the full correlation table through zero-padded FFTs.
///
/// Transforms each sequence once, then forms one inverse transform per
/// unordered pair; the `(j, i)` side of each pair comes from the mirror
/// identity rather than another transform. Transform length is the next
/// power of two at or above `2M - 1`.
pub fn correlate_all_fft(set: &SequenceSet) -> CorrelationTable {
    let l = set.num_sequences();
    let m = set.length();
    let n = (2 * m - 1).next_power_of_two();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);

    let spectra: Vec<Vec<Complex64>> = (0..l)
        .map(|i| {
            let mut buf = vec![Complex64::new(0.0, 0.0); n];
            for (pos, slot) in buf.iter_mut().enumerate().take(m) {
                *slot = set.element(i, pos);
            }
            fwd.process(&mut buf);
            buf
        })
        .collect();

    let mut table = CorrelationTable::zeros(l, m);
    let scale = 1.0 / n as f64;
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..l {
        for j in i..l {
            for f in 0..n {
                buf[f] = spectra[i][f].conj() * spectra[j][f];
            }
            inv.process(&mut buf);
            // buf[k] holds r_ij(k) for k >= 0, buf[n-k] holds r_ij(-k).
            for k in 0..m as isize {
                table.set(i, j, k, buf[k as usize] * scale);
            }
            for k in 1..m as isize {
                table.set(i, j, -k, buf[n - k as usize] * scale);
            }
            // Mirror side filled by conjugation so the identity holds exactly.
            if i != j {
                for k in -(m as isize - 1)..m as isize {
                    let v = table.value(i, j, -k).conj();
                    table.set(j, i, k, v);
                }
            } else {
                for k in 1..m as isize {
                    let v = table.value(i, i, k).conj();
                    table.set(i, i, -k, v);
                }
            }
        }
    }
    table
}

/// Peak sidelobe level with its first-attaining constraint.
///
/// Ties are broken by enumeration order of the constraint set.
pub fn psl_argmax(table: &CorrelationTable, k_set: &LagConstraintSet) -> Result<(f64, LagConstraint)> {
    if k_set.is_empty() {
        return Err(Error::argument("empty lag constraint set"));
    }
    let mut best = f64::NEG_INFINITY;
    let mut arg = k_set.constraints()[0];
    for c in k_set.iter() {
        let mag = table.value(c.i, c.j, c.k as isize).norm();
        if mag > best {
            best = mag;
            arg = *c;
        }
    }
    Ok((best, arg))
}

/// Peak sidelobe level over the constrained lag set.
pub fn psl(table: &CorrelationTable, k_set: &LagConstraintSet) -> Result<f64> {
    psl_argmax(table, k_set).map(|(v, _)| v)
}

/// Integrated sidelobe level: sum of squared magnitudes over the set.
pub fn isl(table: &CorrelationTable, k_set: &LagConstraintSet) -> Result<f64> {
    if k_set.is_empty() {
        return Err(Error::argument("empty lag constraint set"));
    }
    Ok(k_set
        .iter()
        .map(|c| table.value(c.i, c.j, c.k as isize).norm_sqr())
        .sum())
}
