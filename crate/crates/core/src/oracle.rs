//! Numerical oracle for the closed-form temporal widths.
//!
//! The joint spectral amplitude is sampled on a grid, the dispersive
//! propagation is applied as a multiplicative quadratic phase in the
//! frequency domain, the result is Fourier-transformed to time, and the
//! widths are measured from the intensity: the marginal standard deviation
//! for the unheralded width, conditional slices at three heralding times for
//! the heralded width. Nothing here evaluates the closed forms under test.
//!
//! Two construction paths share that definition:
//! - [`joint_temporal_intensity`] materializes the dense 2-D intensity
//!   (default 1024 x 1024). Fine at desk scale, but a strongly dispersed
//!   photon can carry a time-bandwidth product far beyond any dense grid.
//! - [`empirical_widths_streamed`] factors the same construction into 1-D
//!   passes (per-column frequency-domain moments for the marginal, a
//!   Gaussian reduction of the heralding integral plus a long 1-D FFT for
//!   the conditional slice), reaching those regimes. The two paths are
//!   cross-checked against each other in the tests.

use crate::error::{Error, Result};
use crate::temporal::SourceParams;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

const EDGE_INTENSITY_LIMIT: f64 = 1e-12;
const SLICE_AGREEMENT: f64 = 1e-3;
const DENSE_POINT_LIMIT: usize = 4096;
const STREAMED_POINT_LIMIT: usize = 1 << 23;

/// Grid geometry: points and frequency span per axis, centered on zero
/// detuning. Spans are total widths in s^-1.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    pub n_a: usize,
    pub n_b: usize,
    pub span_a: f64,
    pub span_b: f64,
}

impl GridSpec {
    /// 256 points per axis is the smallest grid that measures widths
    /// reliably; smaller grids are accepted so that the aliasing detector
    /// can demonstrate failure cleanly.
    pub fn new(n_a: usize, n_b: usize, span_a: f64, span_b: f64) -> Result<Self> {
        for n in [n_a, n_b] {
            if !n.is_power_of_two() || n < 16 {
                return Err(Error::InvalidParameter(format!(
                    "grid points per axis must be a power of two >= 16, got {n}"
                )));
            }
        }
        if !(span_a > 0.0 && span_b > 0.0 && span_a.is_finite() && span_b.is_finite()) {
            return Err(Error::InvalidParameter(
                "grid spans must be finite and positive".into(),
            ));
        }
        Ok(Self {
            n_a,
            n_b,
            span_a,
            span_b,
        })
    }

    pub fn square(n: usize, span: f64) -> Result<Self> {
        Self::new(n, n, span, span)
    }

    /// Default geometry: 1024 points per axis, span 12x the larger Gaussian
    /// factor width.
    pub fn default_for(source: &SourceParams) -> Result<Self> {
        Self::square(1024, default_span(source))
    }

    /// Size each axis so that the dispersed state fits: the time window per
    /// axis must cover the envelope spread plus the maximum group delay
    /// across the band. Errors when that needs more than 4096 points.
    pub fn auto(source: &SourceParams, d_a: f64, d_b: f64) -> Result<Self> {
        let span = default_span(source);
        let n_for = |d: f64| -> Result<usize> {
            let t_need = time_window_bound(source, d, span);
            let raw = (t_need * span / (2.0 * std::f64::consts::PI)).ceil() as usize;
            let n = raw.next_power_of_two().max(256);
            if n > DENSE_POINT_LIMIT {
                return Err(Error::GridTooLarge {
                    required: n,
                    limit: DENSE_POINT_LIMIT,
                });
            }
            Ok(n)
        };
        Ok(Self {
            n_a: n_for(d_a)?,
            n_b: n_for(d_b)?,
            span_a: span,
            span_b: span,
        })
    }
}

/// Span rule: 12x the larger of the two Gaussian factor widths of the
/// spectral amplitude (anti-diagonal width sigma/sqrt2, diagonal sqrt2/tau_p).
pub fn default_span(source: &SourceParams) -> f64 {
    12.0 * (source.sigma / 2f64.sqrt()).max(2f64.sqrt() / source.tau_p)
}

/// Upper bound on the time extent of one arm: envelope spread plus maximal
/// group delay over the sampled band, with headroom. The envelope term needs
/// nine-plus standard deviations so that the edge cells sit below the 1e-12
/// aliasing threshold.
fn time_window_bound(source: &SourceParams, d: f64, span: f64) -> f64 {
    let tau_envelope = 1.0 / source.sigma + source.tau_p / 2.0;
    2.4 * (8.0 * tau_envelope + d.abs() * span)
}

/// Minimum span that still covers eight standard deviations of both Gaussian
/// factors of the spectral amplitude.
fn minimum_span(source: &SourceParams) -> f64 {
    4.0 * 2f64.sqrt() * source.sigma.max(2.0 / source.tau_p)
}

/// Joint temporal intensity on a centered grid, normalized to unit sum.
#[derive(Debug, Clone)]
pub struct JointIntensity {
    /// Arrival-time grid of arm A (rows), seconds.
    pub t_a: Vec<f64>,
    /// Arrival-time grid of arm B (columns), seconds.
    pub t_b: Vec<f64>,
    /// Row-major `[a][b]` non-negative intensity, summing to one.
    pub intensity: Vec<f64>,
}

impl JointIntensity {
    pub fn n_a(&self) -> usize {
        self.t_a.len()
    }

    pub fn n_b(&self) -> usize {
        self.t_b.len()
    }

    /// Marginal over the B axis (distribution of t_A).
    pub fn marginal_a(&self) -> Vec<f64> {
        let nb = self.n_b();
        self.intensity
            .chunks_exact(nb)
            .map(|row| row.iter().sum())
            .collect()
    }

    /// Marginal over the A axis (distribution of t_B).
    pub fn marginal_b(&self) -> Vec<f64> {
        let nb = self.n_b();
        let mut out = vec![0.0; nb];
        for row in self.intensity.chunks_exact(nb) {
            for (o, v) in out.iter_mut().zip(row) {
                *o += *v;
            }
        }
        out
    }
}

fn mean_and_std(grid: &[f64], weights: &[f64]) -> (f64, f64) {
    let w: f64 = weights.iter().sum();
    let mean: f64 = grid.iter().zip(weights).map(|(t, p)| t * p).sum::<f64>() / w;
    let var: f64 = grid
        .iter()
        .zip(weights)
        .map(|(t, p)| (t - mean) * (t - mean) * p)
        .sum::<f64>()
        / w;
    (mean, var.sqrt())
}

/// Build the joint temporal intensity: sample the spectral amplitude,
/// multiply the quadratic dispersion phases, 2-D FFT to time, take the
/// squared magnitude. Errors when the spans violate the eight-sigma
/// coverage rule or the result leaks into the grid edges.
pub fn joint_temporal_intensity(
    source: &SourceParams,
    d_a: f64,
    d_b: f64,
    grid: &GridSpec,
) -> Result<JointIntensity> {
    let min_span = minimum_span(source);
    if grid.span_a < min_span || grid.span_b < min_span {
        return Err(Error::InvalidParameter(format!(
            "span ({:.3e}, {:.3e}) below the eight-sigma coverage minimum {:.3e}",
            grid.span_a, grid.span_b, min_span
        )));
    }

    let (na, nb) = (grid.n_a, grid.n_b);
    let dnu_a = grid.span_a / na as f64;
    let dnu_b = grid.span_b / nb as f64;
    let nu_a: Vec<f64> = (0..na)
        .map(|j| (j as f64 - na as f64 / 2.0) * dnu_a)
        .collect();
    let nu_b: Vec<f64> = (0..nb)
        .map(|k| (k as f64 - nb as f64 / 2.0) * dnu_b)
        .collect();

    let s2 = source.sigma * source.sigma;
    let tp2 = source.tau_p * source.tau_p;
    let a_coef = 1.0 / s2 + tp2 / 4.0;
    let b_coef = tp2 / 4.0 - 1.0 / s2;

    // Per-axis unit-magnitude factors: dispersion phase and fftshift sign.
    // The real envelope exponent is evaluated jointly per cell; splitting it
    // into per-axis factors would underflow against the cross term.
    let row_factor: Vec<Complex64> = nu_a
        .iter()
        .enumerate()
        .map(|(j, &nu)| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            Complex64::from_polar(sign, d_a * nu * nu)
        })
        .collect();
    let col_factor: Vec<Complex64> = nu_b
        .iter()
        .enumerate()
        .map(|(k, &nu)| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            Complex64::from_polar(sign, d_b * nu * nu)
        })
        .collect();

    let mut field: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); na * nb];
    field
        .par_chunks_exact_mut(nb)
        .enumerate()
        .for_each(|(j, row)| {
            let rj = row_factor[j];
            let nu_aj = nu_a[j];
            for (k, cell) in row.iter_mut().enumerate() {
                let nu_bk = nu_b[k];
                let envelope = (-a_coef * (nu_aj * nu_aj + nu_bk * nu_bk)
                    - 2.0 * b_coef * nu_aj * nu_bk)
                    .exp();
                *cell = rj * col_factor[k] * envelope;
            }
        });

    fft_2d(&mut field, na, nb);

    let mut intensity: Vec<f64> = field.iter().map(|c| c.norm_sqr()).collect();
    let total: f64 = intensity.iter().sum();
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::Inconsistency("joint intensity has no mass".into()));
    }
    intensity.iter_mut().for_each(|v| *v /= total);

    check_edges(&intensity, na, nb)?;

    let dt_a = 2.0 * std::f64::consts::PI / grid.span_a;
    let dt_b = 2.0 * std::f64::consts::PI / grid.span_b;
    let t_a = (0..na)
        .map(|j| (j as f64 - na as f64 / 2.0) * dt_a)
        .collect();
    let t_b = (0..nb)
        .map(|k| (k as f64 - nb as f64 / 2.0) * dt_b)
        .collect();
    Ok(JointIntensity {
        t_a,
        t_b,
        intensity,
    })
}

fn check_edges(intensity: &[f64], na: usize, nb: usize) -> Result<()> {
    let peak = intensity.iter().copied().fold(0.0f64, f64::max);
    let mut edge = 0.0f64;
    for k in 0..nb {
        edge = edge.max(intensity[k]).max(intensity[(na - 1) * nb + k]);
    }
    for j in 0..na {
        edge = edge.max(intensity[j * nb]).max(intensity[j * nb + nb - 1]);
    }
    let ratio = edge / peak;
    if ratio > EDGE_INTENSITY_LIMIT {
        return Err(Error::GridAliasing { edge_ratio: ratio });
    }
    Ok(())
}

/// In-place 2-D FFT of a row-major `rows x cols` array.
fn fft_2d(data: &mut [Complex64], rows: usize, cols: usize) {
    let mut planner = FftPlanner::new();
    let fft_cols = planner.plan_fft_forward(cols);
    data.par_chunks_exact_mut(cols)
        .for_each(|row| fft_cols.process(row));

    let mut transposed: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); rows * cols];
    for j in 0..rows {
        for k in 0..cols {
            transposed[k * rows + j] = data[j * cols + k];
        }
    }
    let fft_rows = planner.plan_fft_forward(rows);
    transposed
        .par_chunks_exact_mut(rows)
        .for_each(|row| fft_rows.process(row));
    for k in 0..cols {
        for j in 0..rows {
            data[j * cols + k] = transposed[k * rows + j];
        }
    }
}

/// Widths measured from a joint intensity.
#[derive(Debug, Clone, Copy)]
pub struct EmpiricalWidths {
    /// Standard deviation of the t_A marginal.
    pub tau_a: f64,
    /// Conditional width at fixed t_B, averaged over the used slices.
    pub tau_ah: f64,
    /// How many of the three heralding-time slices carried enough mass.
    pub slices_used: usize,
}

/// Measure the marginal width and the conditional (heralded) width from a
/// dense joint intensity. The conditional slice is taken at the peak of the
/// t_B marginal and one marginal standard deviation to each side; the three
/// values must agree to 1e-3, which verifies that the heralded width does
/// not depend on the heralding time.
pub fn empirical_widths(ji: &JointIntensity) -> Result<EmpiricalWidths> {
    let (na, nb) = (ji.n_a(), ji.n_b());
    let p_a = ji.marginal_a();
    let (_, tau_a) = mean_and_std(&ji.t_a, &p_a);

    let p_b = ji.marginal_b();
    let (_, sigma_b) = mean_and_std(&ji.t_b, &p_b);
    let peak_idx = p_b
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.total_cmp(y.1))
        .map(|(i, _)| i)
        .unwrap();
    let dt_b = ji.t_b[1] - ji.t_b[0];
    let shift = (sigma_b / dt_b).round() as isize;

    let mut widths = Vec::new();
    for offset in [0isize, -shift, shift] {
        let idx = peak_idx as isize + offset;
        if idx < 0 || idx >= nb as isize {
            continue;
        }
        let idx = idx as usize;
        let slice: Vec<f64> = (0..na).map(|j| ji.intensity[j * nb + idx]).collect();
        let mass: f64 = slice.iter().sum();
        if mass < 1e-6 {
            continue; // too little mass to measure; skip the slice
        }
        let (_, w) = mean_and_std(&ji.t_a, &slice);
        widths.push(w);
    }
    if widths.is_empty() {
        return Err(Error::OracleInconsistent(
            "no heralding-time slice carries enough mass".into(),
        ));
    }
    for i in 0..widths.len() {
        for j in (i + 1)..widths.len() {
            let rel = (widths[i] / widths[j] - 1.0).abs();
            if rel > SLICE_AGREEMENT {
                return Err(Error::OracleInconsistent(format!(
                    "conditional width depends on the heralding time: slices differ by {rel:.2e}"
                )));
            }
        }
    }
    let tau_ah = widths.iter().sum::<f64>() / widths.len() as f64;
    Ok(EmpiricalWidths {
        tau_a,
        tau_ah,
        slices_used: widths.len(),
    })
}

/// Convolve the joint intensity with separable Gaussian jitter kernels
/// (detector response), renormalize, and re-check the edges.
pub fn convolve_jitter(
    ji: &JointIntensity,
    jitter_a: f64,
    jitter_b: f64,
) -> Result<JointIntensity> {
    let (na, nb) = (ji.n_a(), ji.n_b());
    let mut intensity = ji.intensity.clone();

    // Pixel-integrated Gaussian kernel: exact mass per cell even when the
    // jitter is comparable to the grid step.
    let kernel = |jitter: f64, dt: f64, n: usize| -> Result<Option<Vec<f64>>> {
        if jitter == 0.0 {
            return Ok(None);
        }
        let half = ((6.0 * jitter / dt).ceil() as usize).max(1);
        if 2 * half + 1 > n / 2 {
            return Err(Error::InvalidParameter(format!(
                "jitter {jitter:.3e} s too large for the grid window"
            )));
        }
        let cdf = |t: f64| 0.5 * (1.0 + libm::erf(t / (jitter * 2f64.sqrt())));
        let mut k: Vec<f64> = (0..=2 * half)
            .map(|i| {
                let t = (i as f64 - half as f64) * dt;
                cdf(t + 0.5 * dt) - cdf(t - 0.5 * dt)
            })
            .collect();
        let s: f64 = k.iter().sum();
        k.iter_mut().for_each(|v| *v /= s);
        Ok(Some(k))
    };

    if let Some(k) = kernel(jitter_a, ji.t_a[1] - ji.t_a[0], na)? {
        let half = k.len() / 2;
        let mut out = vec![0.0; na * nb];
        out.par_chunks_exact_mut(nb)
            .enumerate()
            .for_each(|(j, row)| {
                for (off, kv) in k.iter().enumerate() {
                    let src = j as isize + off as isize - half as isize;
                    if src >= 0 && (src as usize) < na {
                        let base = src as usize * nb;
                        for (b, r) in row.iter_mut().enumerate() {
                            *r += kv * intensity[base + b];
                        }
                    }
                }
            });
        intensity = out;
    }
    if let Some(k) = kernel(jitter_b, ji.t_b[1] - ji.t_b[0], nb)? {
        let half = k.len() / 2;
        let mut out = vec![0.0; na * nb];
        out.par_chunks_exact_mut(nb)
            .enumerate()
            .for_each(|(j, row)| {
                let base = j * nb;
                for (b, r) in row.iter_mut().enumerate() {
                    for (off, kv) in k.iter().enumerate() {
                        let src = b as isize + off as isize - half as isize;
                        if src >= 0 && (src as usize) < nb {
                            *r += kv * intensity[base + src as usize];
                        }
                    }
                }
            });
        intensity = out;
    }

    let total: f64 = intensity.iter().sum();
    intensity.iter_mut().for_each(|v| *v /= total);
    check_edges(&intensity, na, nb)?;
    Ok(JointIntensity {
        t_a: ji.t_a.clone(),
        t_b: ji.t_b.clone(),
        intensity,
    })
}

// ---------------------------------------------------------------------------
// Streamed construction
// ---------------------------------------------------------------------------

struct GaussianCoefs {
    a: f64,
    b: f64,
}

fn coefs(source: &SourceParams) -> GaussianCoefs {
    let s2 = source.sigma * source.sigma;
    let tp2 = source.tau_p * source.tau_p;
    GaussianCoefs {
        a: 1.0 / s2 + tp2 / 4.0,
        b: tp2 / 4.0 - 1.0 / s2,
    }
}

/// Marginal width of the arm with dispersion `d_own`, measured from the
/// sampled amplitude without materializing the 2-D grid.
///
/// Column by column in the other arm's frequency, the first and second time
/// moments of the dispersed field follow from frequency-domain quadrature of
/// the envelope and the phase gradient (the quadratic phases cancel inside
/// the integrands, so the sums stay smooth); the column results combine by
/// the law of total variance. The heralding arm's dispersion drops out of a
/// marginal exactly, so it takes no part here.
pub fn marginal_width_streamed(source: &SourceParams, d_own: f64) -> f64 {
    let GaussianCoefs { a, b } = coefs(source);
    const N_COLS: usize = 385;
    const N_ROWS: usize = 769;

    // Envelope of the squared amplitude along the other arm's axis.
    let var_col_axis = a / (4.0 * (a * a - b * b));
    let col_std = var_col_axis.sqrt();
    let col_span = 14.0 * col_std;

    // Within a column the amplitude is Gaussian with std 1/sqrt(2a),
    // centered at -(b/a) * nu_other.
    let row_std = 1.0 / (2.0 * a).sqrt();
    let row_half = 8.0 * row_std;

    // Completed-square exponent: amp = exp(-a dv^2 - q nu_c^2) with
    // dv = nu - center; both terms stay small, so no underflow against the
    // cross term is possible.
    let q = (a * a - b * b) / a;

    let mut w_sum = 0.0;
    let mut wm_sum = 0.0;
    let mut wm2_sum = 0.0;
    for ci in 0..N_COLS {
        let nu_c = (ci as f64 / (N_COLS - 1) as f64 - 0.5) * col_span;
        let center = -(b / a) * nu_c;
        let col_exponent = -q * nu_c * nu_c;
        let mut s0 = 0.0;
        let mut s1 = 0.0;
        let mut s2 = 0.0;
        for ri in 0..N_ROWS {
            let dv = (ri as f64 / (N_ROWS - 1) as f64 - 0.5) * 2.0 * row_half;
            let nu = center + dv;
            let amp = (col_exponent - a * dv * dv).exp();
            let amp2 = amp * amp;
            let d_amp = -2.0 * a * dv * amp;
            let phase_grad = 2.0 * d_own * nu;
            s0 += amp2;
            s1 += amp2 * phase_grad;
            s2 += d_amp * d_amp + amp2 * phase_grad * phase_grad;
        }
        if s0 == 0.0 {
            continue;
        }
        let mean = -s1 / s0;
        let m2 = s2 / s0;
        w_sum += s0;
        wm_sum += s0 * mean;
        wm2_sum += s0 * m2;
    }
    let mean_tot = wm_sum / w_sum;
    (wm2_sum / w_sum - mean_tot * mean_tot).sqrt()
}

/// Conditional (heralded) intensity slice at heralding time `t_b`:
/// the heralding-arm integral reduces to a complex Gaussian, the remaining
/// 1-D profile is FFT'd to time and its standard deviation measured.
fn conditional_slice_width(source: &SourceParams, d_a: f64, d_b: f64, t_b: f64) -> Result<f64> {
    let GaussianCoefs { a, b } = coefs(source);
    let p = Complex64::new(a, -d_b); // heralding-arm quadratic coefficient
    let inv4p = Complex64::new(0.25, 0.0) / p;

    // Envelope of the reduced profile: exp(q2 nu^2 + q1 nu) with q2 < 0.
    let q2 = -a + 4.0 * b * b * inv4p.re;
    let q1 = -4.0 * b * t_b * inv4p.im;
    if q2 >= 0.0 {
        return Err(Error::Inconsistency(
            "conditional envelope not decaying".into(),
        ));
    }
    let env_std = 1.0 / (-2.0 * q2).sqrt();
    let center = -q1 / (2.0 * q2);
    let span_nu = 18.0 * env_std;

    let mut n = 2048usize;
    loop {
        let dnu = span_nu / n as f64;
        let mut field: Vec<Complex64> = (0..n)
            .map(|j| {
                let nu = center + (j as f64 - n as f64 / 2.0) * dnu;
                let q = Complex64::new(2.0 * b * nu, t_b);
                let exponent = Complex64::new(-a * nu * nu, d_a * nu * nu) + q * q * inv4p;
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                sign * exponent.exp()
            })
            .collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut field);
        let intensity: Vec<f64> = field.iter().map(|c| c.norm_sqr()).collect();
        let total: f64 = intensity.iter().sum();
        let peak = intensity.iter().copied().fold(0.0f64, f64::max);
        let edge = intensity[0].max(intensity[n - 1]);
        if edge / peak <= EDGE_INTENSITY_LIMIT {
            let dt = 2.0 * std::f64::consts::PI / span_nu;
            let t: Vec<f64> = (0..n).map(|j| (j as f64 - n as f64 / 2.0) * dt).collect();
            let weights: Vec<f64> = intensity.iter().map(|v| v / total).collect();
            let (_, std) = mean_and_std(&t, &weights);
            return Ok(std);
        }
        if n >= STREAMED_POINT_LIMIT {
            return Err(Error::GridAliasing {
                edge_ratio: edge / peak,
            });
        }
        n *= 2;
    }
}

/// Streamed counterpart of [`empirical_widths`]: same measurement definition,
/// no dense grid, usable at any dispersion the parameter ranges produce.
pub fn empirical_widths_streamed(
    source: &SourceParams,
    d_a: f64,
    d_b: f64,
) -> Result<EmpiricalWidths> {
    let tau_a = marginal_width_streamed(source, d_a);
    let tau_b = marginal_width_streamed(source, d_b);
    let mut widths = Vec::with_capacity(3);
    for t_b in [0.0, -tau_b, tau_b] {
        widths.push(conditional_slice_width(source, d_a, d_b, t_b)?);
    }
    for i in 0..widths.len() {
        for j in (i + 1)..widths.len() {
            let rel = (widths[i] / widths[j] - 1.0).abs();
            if rel > SLICE_AGREEMENT {
                return Err(Error::OracleInconsistent(format!(
                    "streamed conditional width depends on heralding time ({rel:.2e})"
                )));
            }
        }
    }
    Ok(EmpiricalWidths {
        tau_a,
        tau_ah: widths.iter().sum::<f64>() / widths.len() as f64,
        slices_used: widths.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::temporal::{tau_heralded, tau_unheralded};
    use approx::assert_relative_eq;

    fn paper_optimum_source() -> SourceParams {
        let d: f64 = 1.15e-23;
        SourceParams::new((2.0 * d).sqrt(), (2.0 / d).sqrt()).unwrap()
    }

    #[test]
    fn zero_dispersion_matches_reductions() {
        let src = SourceParams::new(3e-12, 8e11).unwrap();
        let grid = GridSpec::default_for(&src).unwrap();
        let ji = joint_temporal_intensity(&src, 0.0, 0.0, &grid).unwrap();
        let w = empirical_widths(&ji).unwrap();
        let st = src.sigma * src.tau_p;
        let tau_a_expect = (4.0 + st * st).sqrt() / (2.0 * src.sigma);
        let tau_ah_expect = 2.0 * src.tau_p / (st * st + 4.0).sqrt();
        assert_relative_eq!(w.tau_a, tau_a_expect, max_relative = 1e-4);
        assert_relative_eq!(w.tau_ah, tau_ah_expect, max_relative = 1e-4);
        assert_eq!(w.slices_used, 3);
    }

    #[test]
    fn normalization_and_nonnegativity() {
        let src = SourceParams::new(2e-12, 5e11).unwrap();
        let grid = GridSpec::square(256, default_span(&src)).unwrap();
        let ji = joint_temporal_intensity(&src, -1e-24, -2e-24, &grid).unwrap();
        let sum: f64 = ji.intensity.iter().sum();
        assert!((sum - 1.0).abs() < 1e-9);
        assert!(ji.intensity.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn paper_constants_conditional_width() {
        let src = paper_optimum_source();
        let d = -1.15e-23;
        let grid = GridSpec::auto(&src, d, d).unwrap();
        let ji = joint_temporal_intensity(&src, d, d, &grid).unwrap();
        let w = empirical_widths(&ji).unwrap();
        assert_relative_eq!(w.tau_ah, 4.795_83e-12, max_relative = 1e-3);
        assert_relative_eq!(w.tau_a, tau_unheralded(&src, d), max_relative = 1e-3);
    }

    #[test]
    fn dispersion_sign_flip_leaves_widths_unchanged() {
        let src = SourceParams::new(1e-12, 1e12).unwrap();
        let (da, db) = (-1.15e-23, -3e-23);
        let grid = GridSpec::auto(&src, da, db).unwrap();
        let w1 = empirical_widths(&joint_temporal_intensity(&src, da, db, &grid).unwrap()).unwrap();
        let w2 =
            empirical_widths(&joint_temporal_intensity(&src, -da, -db, &grid).unwrap()).unwrap();
        assert_relative_eq!(w1.tau_a, w2.tau_a, max_relative = 1e-9);
        assert_relative_eq!(w1.tau_ah, w2.tau_ah, max_relative = 1e-9);
    }

    #[test]
    fn grid_refinement_converges() {
        let src = SourceParams::new(1e-12, 1e12).unwrap();
        let d = -3e-24;
        let span = default_span(&src);
        let coarse = empirical_widths(
            &joint_temporal_intensity(&src, d, d, &GridSpec::square(512, span).unwrap()).unwrap(),
        )
        .unwrap();
        let fine = empirical_widths(
            &joint_temporal_intensity(&src, d, d, &GridSpec::square(1024, span).unwrap()).unwrap(),
        )
        .unwrap();
        assert_relative_eq!(coarse.tau_a, fine.tau_a, max_relative = 1e-4);
        assert_relative_eq!(coarse.tau_ah, fine.tau_ah, max_relative = 1e-4);
    }

    #[test]
    fn marginal_is_independent_of_heralding_dispersion() {
        let src = SourceParams::new(1e-12, 1e12).unwrap();
        let d_a = -1.15e-23;
        let ws: Vec<f64> = [-1e-24, -1e-23, -3e-23]
            .iter()
            .map(|&d_b| {
                let grid = GridSpec::auto(&src, d_a, d_b).unwrap();
                empirical_widths(&joint_temporal_intensity(&src, d_a, d_b, &grid).unwrap())
                    .unwrap()
                    .tau_a
            })
            .collect();
        assert_relative_eq!(ws[0], ws[1], max_relative = 1e-4);
        assert_relative_eq!(ws[1], ws[2], max_relative = 1e-4);
    }

    #[test]
    fn undersized_grid_reports_aliasing() {
        // A 1 ns pump on a km of fiber cannot fit a 128-point window.
        let src = SourceParams::new(1e-9, 1e12).unwrap();
        let grid = GridSpec::square(128, default_span(&src)).unwrap();
        match joint_temporal_intensity(&src, -1.15e-23, -1.15e-23, &grid) {
            Err(Error::GridAliasing { .. }) => {}
            other => panic!("expected GridAliasing, got {other:?}"),
        }
    }

    #[test]
    fn synthetic_isotropic_gaussian_measures_its_own_width() {
        // Hand-built separable Gaussian: marginal and conditional widths all
        // equal the construction width.
        let n = 512;
        let target = 3.7e-12;
        let dt = target / 24.0;
        let t: Vec<f64> = (0..n).map(|j| (j as f64 - n as f64 / 2.0) * dt).collect();
        let mut intensity = vec![0.0; n * n];
        for j in 0..n {
            for k in 0..n {
                intensity[j * n + k] =
                    (-(t[j] * t[j] + t[k] * t[k]) / (2.0 * target * target)).exp();
            }
        }
        let total: f64 = intensity.iter().sum();
        intensity.iter_mut().for_each(|v| *v /= total);
        let ji = JointIntensity {
            t_a: t.clone(),
            t_b: t,
            intensity,
        };
        let w = empirical_widths(&ji).unwrap();
        assert_relative_eq!(w.tau_a, target, max_relative = 1e-6);
        assert_relative_eq!(w.tau_ah, target, max_relative = 1e-6);
    }

    #[test]
    fn streamed_matches_dense_at_desk_scale() {
        let cases = [
            (4.8e-12, 4.17e11, -1.15e-23, -1.15e-23),
            (1e-12, 1e12, -1.15e-23, -2.3e-23),
            (3e-13, 3e12, -1e-24, -5e-25),
            (2e-11, 1e11, -1e-22, -3e-23),
        ];
        for (tau_p, sigma, d_a, d_b) in cases {
            let src = SourceParams::new(tau_p, sigma).unwrap();
            let grid = GridSpec::auto(&src, d_a, d_b).unwrap();
            let dense = empirical_widths(&joint_temporal_intensity(&src, d_a, d_b, &grid).unwrap())
                .unwrap();
            let streamed = empirical_widths_streamed(&src, d_a, d_b).unwrap();
            assert_relative_eq!(dense.tau_a, streamed.tau_a, max_relative = 5e-4);
            assert_relative_eq!(dense.tau_ah, streamed.tau_ah, max_relative = 5e-4);
        }
    }

    #[test]
    fn streamed_matches_closed_forms_in_heavy_dispersion() {
        // A regime no dense grid reaches: 100 km arms with a wide crystal.
        let src = SourceParams::new(1e-9, 1e12).unwrap();
        let (d_a, d_b) = (-1.15e-21, -1.15e-21);
        assert!(GridSpec::auto(&src, d_a, d_b).is_err());
        let w = empirical_widths_streamed(&src, d_a, d_b).unwrap();
        assert_relative_eq!(w.tau_a, tau_unheralded(&src, d_a), max_relative = 1e-3);
        assert_relative_eq!(w.tau_ah, tau_heralded(&src, d_a, d_b), max_relative = 1e-3);
    }

    #[test]
    fn jitter_convolution_small_jitter_matches_quadrature() {
        let src = SourceParams::new(1e-12, 1e12).unwrap();
        let d = -1.15e-23;
        let grid = GridSpec::auto(&src, d, d).unwrap();
        let ji = joint_temporal_intensity(&src, d, d, &grid).unwrap();
        let base = empirical_widths(&ji).unwrap();
        let j_a = 0.05 * base.tau_a;
        let convolved = convolve_jitter(&ji, j_a, 0.0).unwrap();
        let w = empirical_widths(&convolved).unwrap();
        assert_relative_eq!(
            w.tau_a,
            (base.tau_a * base.tau_a + j_a * j_a).sqrt(),
            max_relative = 1e-4
        );
    }
}
