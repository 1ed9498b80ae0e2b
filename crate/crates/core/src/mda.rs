//! Exponentiated-gradient solver for the inner simplex maximization.
//!
//! The surrogate step reduces to `max_q min_x 4 x^T D q + q^T p` with `q`
//! on the probability simplex and every complex element of `x` confined to
//! the unit disc. For fixed `q` the minimizing `x` has a closed form that
//! lands on the unit circle elementwise, so the outer maximization is run
//! with multiplicative (mirror descent) updates on `q`, keeping the best
//! iterate seen.

use crate::error::{Error, Result};
use crate::surrogate::SurrogateSystem;

/// Step-size schedule for the multiplicative updates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepRule {
    /// `gamma0 / sqrt(m + 1)` at iteration `m`.
    InvSqrt,
    /// Fixed `gamma0`.
    Constant,
}

/// Inner-solver configuration.
///
/// The step size is normalized by the largest subgradient magnitude seen at
/// the first iteration, so `gamma0` is dimensionless.
#[derive(Debug, Clone)]
pub struct MdaConfig {
    pub max_inner_iters: usize,
    pub step_rule: StepRule,
    pub gamma0: f64,
    /// Relative-change tolerance on the inner objective.
    pub tol: f64,
    /// Subtract the largest exponent before exponentiation.
    pub stabilize: bool,
    /// Record the objective value at every iteration.
    pub collect_trace: bool,
}

impl Default for MdaConfig {
    fn default() -> Self {
        MdaConfig {
            max_inner_iters: 200,
            step_rule: StepRule::InvSqrt,
            gamma0: 1.0,
            tol: 1e-6,
            stabilize: true,
            collect_trace: false,
        }
    }
}

/// Nonnegative weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexPoint {
    weights: Vec<f64>,
}

impl SimplexPoint {
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::argument("simplex dimension must be positive"));
        }
        Ok(SimplexPoint {
            weights: vec![1.0 / n as f64; n],
        })
    }

    /// Normalizes nonnegative weights onto the simplex.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::argument("simplex dimension must be positive"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::argument("weights must be finite and nonnegative"));
        }
        let sum: f64 = weights.iter().sum();
        if sum <= 0.0 {
            return Err(Error::argument("weights must not all be zero"));
        }
        Ok(SimplexPoint {
            weights: weights.into_iter().map(|w| w / sum).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Checks nonnegativity exactly and the unit sum within `1e-12`.
    pub fn is_valid(&self) -> bool {
        self.weights.iter().all(|w| *w >= 0.0 && w.is_finite())
            && (self.weights.iter().sum::<f64>() - 1.0).abs() <= 1e-12
    }
}

/// Result of one inner solve: the best weights seen, the matching
/// unit-modulus minimizer, its objective value, and the iteration count.
#[derive(Debug, Clone)]
pub struct MdaResult {
    pub q: SimplexPoint,
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    /// Objective value per iteration when tracing was requested.
    pub trace: Vec<f64>,
}

/// Closed-form minimizer of `4 x^T D q` over per-element unit discs.
///
/// With `c = -D q`, each complex element of `x` is the unit vector along
/// its pair `(c[i], c[i + ML])`; pairs below `1e-14` in norm collapse to
/// phase zero.
pub fn inner_minimize_x(sys: &SurrogateSystem, q: &SimplexPoint) -> Vec<f64> {
    let mut c = vec![0.0; sys.dim()];
    sys.mat_vec(q.weights(), &mut c);
    for v in c.iter_mut() {
        *v = -*v;
    }
    minimize_from_direction(&c).0
}

/// Normalizes the pair structure of `c` onto unit circles, returning the
/// minimizer together with the sum of pair norms (used for the objective).
fn minimize_from_direction(c: &[f64]) -> (Vec<f64>, f64) {
    let ml = c.len() / 2;
    let mut x = vec![0.0; c.len()];
    let mut norm_sum = 0.0;
    for i in 0..ml {
        let re = c[i];
        let im = c[i + ml];
        let n = (re * re + im * im).sqrt();
        if n < 1e-14 {
            x[i] = 1.0;
            x[i + ml] = 0.0;
        } else {
            x[i] = re / n;
            x[i + ml] = im / n;
            norm_sum += n;
        }
    }
    (x, norm_sum)
}

/// Evaluates the inner objective at `q`: the minimizer `x(q)`, the value
/// `4 x^T D q + q^T p`, and the direction used to build `x`.
fn evaluate(sys: &SurrogateSystem, q: &[f64], c_buf: &mut [f64]) -> (Vec<f64>, f64) {
    sys.mat_vec(q, c_buf);
    for v in c_buf.iter_mut() {
        *v = -*v;
    }
    let (x, norm_sum) = minimize_from_direction(c_buf);
    let p_dot: f64 = sys.p.iter().zip(q.iter()).map(|(a, b)| a * b).sum();
    // 4 x^T D q = -4 x^T c = -4 * sum of pair norms.
    (x, -4.0 * norm_sum + p_dot)
}

/// One multiplicative update `q <- q .* exp(step * grad)`, renormalized.
fn exponentiated_update(q: &mut [f64], step: f64, grad: &[f64], stabilize: bool) {
    let shift = if stabilize {
        grad.iter().fold(f64::NEG_INFINITY, |acc, g| acc.max(step * g))
    } else {
        0.0
    };
    let mut sum = 0.0;
    for (w, g) in q.iter_mut().zip(grad.iter()) {
        *w *= (step * g - shift).exp();
        sum += *w;
    }
    if sum > 0.0 && sum.is_finite() {
        for w in q.iter_mut() {
            *w /= sum;
        }
    }
}

/// Runs the inner maximization and returns the best weights seen together
/// with the matching unit-modulus minimizer.
///
/// Starts from uniform weights. Stops after `max_inner_iters` updates or
/// when the relative change of the objective falls below `tol`. Before the
/// final direction product, weights below `1e-12 / |K|` are dropped.
pub fn mda_solve(sys: &SurrogateSystem, cfg: &MdaConfig) -> Result<MdaResult> {
    let n = sys.num_constraints();
    if n == 0 {
        return Err(Error::argument("surrogate system has no constraints"));
    }
    sys.validate_finite()?;

    let mut q = vec![1.0 / n as f64; n];
    let mut c_buf = vec![0.0; sys.dim()];
    let mut grad = vec![0.0; n];
    let mut trace = Vec::new();

    let mut best_g = f64::NEG_INFINITY;
    let mut best_q = q.clone();
    let mut g_prev: Option<f64> = None;
    let mut scale: Option<f64> = None;
    let mut iterations = 0;

    for m_it in 0..=cfg.max_inner_iters {
        let (x, g) = evaluate(sys, &q, &mut c_buf);
        if !g.is_finite() {
            return Err(Error::numeric("inner objective became non-finite"));
        }
        if cfg.collect_trace {
            trace.push(g);
        }
        if g > best_g {
            best_g = g;
            best_q.copy_from_slice(&q);
        }
        if m_it == cfg.max_inner_iters {
            break;
        }
        if let Some(prev) = g_prev {
            if (g - prev).abs() / prev.abs().max(1e-12) < cfg.tol {
                break;
            }
        }
        g_prev = Some(g);

        // Subgradient of the inner objective at q is 4 D^T x(q) + p.
        sys.mat_t_vec(&x, &mut grad);
        for (g_c, p_c) in grad.iter_mut().zip(sys.p.iter()) {
            *g_c = 4.0 * *g_c + p_c;
        }
        let sc = *scale.get_or_insert_with(|| {
            let m = grad.iter().fold(0.0f64, |acc, g| acc.max(g.abs()));
            if m > 0.0 {
                m
            } else {
                1.0
            }
        });
        let gamma = match cfg.step_rule {
            StepRule::InvSqrt => cfg.gamma0 / (sc * ((m_it + 1) as f64).sqrt()),
            StepRule::Constant => cfg.gamma0 / sc,
        };
        exponentiated_update(&mut q, gamma, &grad, cfg.stabilize);
        iterations = m_it + 1;
    }

    // Sparsify negligible weights before the final direction product.
    let threshold = 1e-12 / n as f64;
    for w in best_q.iter_mut() {
        if *w < threshold {
            *w = 0.0;
        }
    }
    let sum: f64 = best_q.iter().sum();
    if sum <= 0.0 || !sum.is_finite() {
        return Err(Error::numeric("simplex weights degenerated"));
    }
    for w in best_q.iter_mut() {
        *w /= sum;
    }
    let (x, objective) = evaluate(sys, &best_q, &mut c_buf);

    Ok(MdaResult {
        q: SimplexPoint { weights: best_q },
        x,
        objective,
        iterations,
        trace,
    })
}
