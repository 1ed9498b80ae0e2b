//! Colocated MIMO radar angle-range imaging simulator.
//!
//! A sequence set probes a far-field scene of point reflectors on a
//! `Q x P` range-angle grid. Received data are synthesized per range bin
//! by delaying the zero-padded probing matrix, range compression applies a
//! per-bin matched filter, and the reflectivity image is estimated either
//! by least squares or by an adaptive (Capon) weighting of the compressed
//! snapshots.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::sequence::SequenceSet;

/// Transmit/receive uniform linear array geometry, spacings in wavelengths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry {
    pub num_tx: usize,
    pub num_rx: usize,
    pub tx_spacing: f64,
    pub rx_spacing: f64,
}

impl Default for ArrayGeometry {
    /// Four transmitters at two-wavelength spacing, four receivers at
    /// half-wavelength spacing.
    fn default() -> Self {
        ArrayGeometry {
            num_tx: 4,
            num_rx: 4,
            tx_spacing: 2.0,
            rx_spacing: 0.5,
        }
    }
}

impl ArrayGeometry {
    pub fn with_num_tx(num_tx: usize) -> Self {
        ArrayGeometry {
            num_tx,
            ..ArrayGeometry::default()
        }
    }
}

/// Reflectivities on a range-angle grid plus the noise level.
#[derive(Debug, Clone, PartialEq)]
pub struct RadarScene {
    /// `Q x P` complex reflectivities.
    pub beta: DMatrix<Complex64>,
    /// Scan angles in degrees, one per image column.
    pub theta_deg: Vec<f64>,
    /// Per-sample complex noise variance.
    pub sigma2: f64,
}

impl RadarScene {
    pub fn new(beta: DMatrix<Complex64>, theta_deg: Vec<f64>, sigma2: f64) -> Result<Self> {
        if beta.nrows() == 0 || beta.ncols() == 0 {
            return Err(Error::argument("scene grid must be non-empty"));
        }
        if theta_deg.len() != beta.ncols() {
            return Err(Error::argument("angle grid does not match image width"));
        }
        if theta_deg.iter().any(|t| !t.is_finite() || t.abs() >= 90.0) {
            return Err(Error::argument("scan angles must lie strictly inside (-90, 90)"));
        }
        if !sigma2.is_finite() || sigma2 < 0.0 {
            return Err(Error::argument("noise variance must be finite and nonnegative"));
        }
        if beta.iter().any(|b| !b.re.is_finite() || !b.im.is_finite()) {
            return Err(Error::argument("reflectivities must be finite"));
        }
        Ok(RadarScene {
            beta,
            theta_deg,
            sigma2,
        })
    }

    /// Sparse random scene: each cell is occupied with probability
    /// `density` and occupied cells get unit-variance complex Gaussian
    /// reflectivities.
    pub fn random_sparse(
        q: usize,
        p: usize,
        theta_lo: f64,
        theta_hi: f64,
        density: f64,
        sigma2: f64,
        seed: u64,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&density) {
            return Err(Error::argument("density must lie in [0, 1]"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut beta = DMatrix::zeros(q, p);
        for r in 0..q {
            for c in 0..p {
                if rand::Rng::gen::<f64>(&mut rng) < density {
                    beta[(r, c)] = complex_gaussian(&mut rng, 1.0);
                }
            }
        }
        RadarScene::new(beta, linspace(theta_lo, theta_hi, p), sigma2)
    }

    /// Scene from an ASCII mask: `#` cells become reflectors with
    /// unit-variance complex Gaussian strengths, anything else is empty.
    pub fn from_mask(lines: &[String], sigma2: f64, seed: u64) -> Result<Self> {
        if lines.is_empty() {
            return Err(Error::argument("mask must have at least one row"));
        }
        let p = lines[0].chars().count();
        if p == 0 || lines.iter().any(|l| l.chars().count() != p) {
            return Err(Error::argument("mask rows must be non-empty and equal length"));
        }
        let q = lines.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut beta = DMatrix::zeros(q, p);
        for (r, line) in lines.iter().enumerate() {
            for (c, ch) in line.chars().enumerate() {
                if ch == '#' {
                    beta[(r, c)] = complex_gaussian(&mut rng, 1.0);
                }
            }
        }
        RadarScene::new(beta, linspace(-40.0, 40.0, p), sigma2)
    }

    pub fn num_range_bins(&self) -> usize {
        self.beta.nrows()
    }

    pub fn num_angles(&self) -> usize {
        self.beta.ncols()
    }
}

/// Received samples: `num_rx` rows, `M + Q - 1` columns.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedData {
    pub b_h: DMatrix<Complex64>,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

fn complex_gaussian(rng: &mut ChaCha8Rng, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(s * re, s * im)
}

/// Transmit and receive steering vectors toward `theta_deg`.
///
/// Element `n` of each vector is `exp(-j 2 pi spacing n sin(theta))` with
/// the array's spacing in wavelengths.
pub fn steering_vectors(
    geom: &ArrayGeometry,
    theta_deg: f64,
) -> (DVector<Complex64>, DVector<Complex64>) {
    let s = theta_deg.to_radians().sin();
    let tx = DVector::from_fn(geom.num_tx, |n, _| {
        Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * geom.tx_spacing * n as f64 * s)
    });
    let rx = DVector::from_fn(geom.num_rx, |n, _| {
        Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * geom.rx_spacing * n as f64 * s)
    });
    (tx, rx)
}

/// Zero-padded probing matrix: `(M + Q - 1) x L`, sequences in columns.
pub fn padded_probing_matrix(set: &SequenceSet, q_bins: usize) -> DMatrix<Complex64> {
    let m = set.length();
    let l = set.num_sequences();
    let n = m + q_bins - 1;
    DMatrix::from_fn(n, l, |row, col| {
        if row < m {
            set.element(col, row)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Synthesizes received data for a scene probed by `set`.
///
/// Each reflector at range bin `r` and angle `p` contributes its strength
/// times the receive steering vector times the transmitted mix delayed by
/// `r` samples; circular complex Gaussian noise of variance `sigma2` is
/// added per sample.
pub fn simulate_received(
    scene: &RadarScene,
    geom: &ArrayGeometry,
    set: &SequenceSet,
    noise_seed: u64,
) -> Result<ReceivedData> {
    if set.num_sequences() != geom.num_tx {
        return Err(Error::argument(format!(
            "sequence count {} does not match transmitter count {}",
            set.num_sequences(),
            geom.num_tx
        )));
    }
    let q_bins = scene.num_range_bins();
    let n = set.length() + q_bins - 1;
    let shat = padded_probing_matrix(set, q_bins);
    let mut b_h = DMatrix::zeros(geom.num_rx, n);

    for (p_idx, &theta) in scene.theta_deg.iter().enumerate() {
        let (d_p, c_p) = steering_vectors(geom, theta);
        // w[n] = sum_l d[l] * conj(shat[n, l]); the transmitted mix seen
        // from this angle.
        let w: Vec<Complex64> = (0..n)
            .map(|row| {
                (0..geom.num_tx)
                    .map(|l| d_p[l] * shat[(row, l)].conj())
                    .sum()
            })
            .collect();
        for r in 0..q_bins {
            let beta = scene.beta[(r, p_idx)];
            if beta == Complex64::new(0.0, 0.0) {
                continue;
            }
            // Right-multiplying by the lag-r shift delays the mix by r.
            for col in r..n {
                let wv = beta * w[col - r];
                for row in 0..geom.num_rx {
                    b_h[(row, col)] += c_p[row] * wv;
                }
            }
        }
    }

    if scene.sigma2 > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(noise_seed);
        for row in 0..geom.num_rx {
            for col in 0..n {
                b_h[(row, col)] += complex_gaussian(&mut rng, scene.sigma2);
            }
        }
    }
    Ok(ReceivedData { b_h })
}

/// Condition number of a Hermitian matrix through its real embedding.
fn hermitian_condition(g: &DMatrix<Complex64>) -> f64 {
    let n = g.nrows();
    let emb = DMatrix::from_fn(2 * n, 2 * n, |r, c| {
        let (rr, cc) = (r % n, c % n);
        match (r < n, c < n) {
            (true, true) | (false, false) => g[(rr, cc)].re,
            (true, false) => -g[(rr, cc)].im,
            (false, true) => g[(rr, cc)].im,
        }
    });
    let eig = emb.symmetric_eigen();
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for &v in eig.eigenvalues.iter() {
        lo = lo.min(v);
        hi = hi.max(v.abs());
    }
    if lo <= 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Range-compression filter for bin `q`: the delayed pseudo-inverse
/// columns of the padded probing matrix.
pub fn matched_filter(set: &SequenceSet, q_bins: usize, q: usize) -> Result<DMatrix<Complex64>> {
    if q >= q_bins {
        return Err(Error::argument(format!("range bin {q} out of {q_bins}")));
    }
    let shat = padded_probing_matrix(set, q_bins);
    let gram = shat.adjoint() * &shat;
    if hermitian_condition(&gram) > 1e12 {
        return Err(Error::numeric("probing matrix Gram is numerically singular"));
    }
    let gram_inv = gram
        .try_inverse()
        .ok_or_else(|| Error::numeric("probing matrix Gram is not invertible"))?;
    let base = shat * gram_inv;
    // Shift rows down by q: the adjoint lag operator delays the filter.
    let n = base.nrows();
    let mut out = DMatrix::zeros(n, base.ncols());
    for row in q..n {
        for col in 0..base.ncols() {
            out[(row, col)] = base[(row - q, col)];
        }
    }
    Ok(out)
}

/// Applies each bin's matched filter to the received data, yielding one
/// `num_rx x L` compressed snapshot matrix per range bin.
pub fn compress(
    received: &ReceivedData,
    set: &SequenceSet,
    q_bins: usize,
) -> Result<Vec<DMatrix<Complex64>>> {
    let shat = padded_probing_matrix(set, q_bins);
    let gram = shat.adjoint() * &shat;
    if hermitian_condition(&gram) > 1e12 {
        return Err(Error::numeric("probing matrix Gram is numerically singular"));
    }
    let gram_inv = gram
        .try_inverse()
        .ok_or_else(|| Error::numeric("probing matrix Gram is not invertible"))?;
    let base = shat * gram_inv;
    let n = base.nrows();
    let mut out = Vec::with_capacity(q_bins);
    for q in 0..q_bins {
        let mut filter = DMatrix::zeros(n, base.ncols());
        for row in q..n {
            for col in 0..base.ncols() {
                filter[(row, col)] = base[(row - q, col)];
            }
        }
        out.push(&received.b_h * filter);
    }
    Ok(out)
}

/// Least-squares reflectivity image from compressed snapshots.
pub fn estimate_ls(
    compressed: &[DMatrix<Complex64>],
    geom: &ArrayGeometry,
    theta_deg: &[f64],
) -> DMatrix<Complex64> {
    let q_bins = compressed.len();
    let p = theta_deg.len();
    let mut image = DMatrix::zeros(q_bins, p);
    for (p_idx, &theta) in theta_deg.iter().enumerate() {
        let (d_p, c_p) = steering_vectors(geom, theta);
        let den = c_p.norm_squared() * d_p.norm_squared();
        let d_conj = d_p.map(|z| z.conj());
        for (q, snap) in compressed.iter().enumerate() {
            let num = (c_p.adjoint() * snap * &d_conj)[(0, 0)];
            image[(q, p_idx)] = num / den;
        }
    }
    image
}

/// Per-bin sample covariance of the compressed snapshots with relative
/// diagonal loading.
pub fn bin_covariances(
    compressed: &[DMatrix<Complex64>],
    loading: f64,
) -> Vec<DMatrix<Complex64>> {
    compressed
        .iter()
        .map(|snap| {
            let mut v = snap * snap.adjoint();
            let n = v.nrows();
            let trace: f64 = (0..n).map(|i| v[(i, i)].re).sum();
            let delta = loading * trace / n as f64;
            for i in 0..n {
                v[(i, i)] += Complex64::new(delta, 0.0);
            }
            v
        })
        .collect()
}

/// Adaptive reflectivity image using explicit per-bin covariances.
pub fn estimate_capon_with_cov(
    compressed: &[DMatrix<Complex64>],
    covariances: &[DMatrix<Complex64>],
    geom: &ArrayGeometry,
    theta_deg: &[f64],
) -> Result<DMatrix<Complex64>> {
    if covariances.len() != compressed.len() {
        return Err(Error::argument("one covariance per range bin is required"));
    }
    let q_bins = compressed.len();
    let p = theta_deg.len();
    let mut image = DMatrix::zeros(q_bins, p);
    let mut inverses = Vec::with_capacity(q_bins);
    for v in covariances {
        let inv = v
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::numeric("bin covariance is numerically singular"))?;
        inverses.push(inv);
    }
    for (p_idx, &theta) in theta_deg.iter().enumerate() {
        let (d_p, c_p) = steering_vectors(geom, theta);
        let d_norm2 = d_p.norm_squared();
        let d_conj = d_p.map(|z| z.conj());
        for (q, snap) in compressed.iter().enumerate() {
            let vinv_c = &inverses[q] * &c_p;
            let num = (c_p.adjoint() * &inverses[q] * snap * &d_conj)[(0, 0)];
            let den = (c_p.adjoint() * vinv_c)[(0, 0)] * Complex64::new(d_norm2, 0.0);
            if den.norm() < 1e-300 {
                return Err(Error::numeric("adaptive denominator vanished"));
            }
            image[(q, p_idx)] = num / den;
        }
    }
    Ok(image)
}

/// Adaptive reflectivity image with default relative loading `1e-6`.
pub fn estimate_capon(
    compressed: &[DMatrix<Complex64>],
    geom: &ArrayGeometry,
    theta_deg: &[f64],
) -> Result<DMatrix<Complex64>> {
    let covs = bin_covariances(compressed, 1e-6);
    estimate_capon_with_cov(compressed, &covs, geom, theta_deg)
}

/// Mean squared error between two complex images of equal shape.
pub fn image_mse(estimate: &DMatrix<Complex64>, truth: &DMatrix<Complex64>) -> f64 {
    assert_eq!(estimate.shape(), truth.shape());
    let n = (estimate.nrows() * estimate.ncols()) as f64;
    estimate
        .iter()
        .zip(truth.iter())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        / n
}

/// Magnitude image for file output.
pub fn magnitude_image(image: &DMatrix<Complex64>) -> DMatrix<f64> {
    image.map(|z| z.norm())
}
