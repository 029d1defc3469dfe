//! Independent checks of the analytic noisy gates.
//!
//! Three routes that never touch the closed-form matrices:
//!
//! - Monte Carlo: draw the angle error and the axis, build the Rodrigues
//!   matrix, average. Samplers are exact, so deviations are purely
//!   statistical.
//! - Quadrature: integrate the rotation matrix against the noise densities
//!   with nested one-dimensional rules (periodic trapezoid in the angle error
//!   and the azimuth, Gauss–Legendre in the polar cosine).
//! - Central finite differences in θ.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channels::NoiseParams;
use crate::error::{Error, Result};
use crate::geometry::{align_axis_to_z, check_angle, rodrigues, GateSpec, LinearMap3, Vec3};
use crate::special::{bessel_i_scaled, Concentration};

/// Samples per RNG stream. Fixed, so the partition does not depend on the
/// number of worker threads.
const CHUNK: u64 = 1 << 14;

const QUADRATURE_START: usize = 64;
const QUADRATURE_MAX: usize = 1024;
const QUADRATURE_TOLERANCE: f64 = 1e-10;

/// One draw from the von Mises law with mean 0 and concentration `k > 0`,
/// returned in `(−π, π]`.
///
/// Best–Fisher rejection from a wrapped Cauchy envelope.
pub fn sample_von_mises<R: Rng + ?Sized>(k: f64, rng: &mut R) -> Result<f64> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::domain("von Mises concentration", format!("must be positive and finite, got {k}")));
    }
    let tau = 1.0 + (1.0 + 4.0 * k * k).sqrt();
    let rho = (tau - (2.0 * tau).sqrt()) / (2.0 * k);
    let r = (1.0 + rho * rho) / (2.0 * rho);
    loop {
        let u1: f64 = rng.random();
        let u2: f64 = rng.random();
        let z = (PI * u1).cos();
        let f = (1.0 + r * z) / (r + z);
        let c = k * (r - f);
        if c * (2.0 - c) - u2 > 0.0 || (c / u2).ln() + 1.0 - c >= 0.0 {
            let u3: f64 = rng.random();
            let angle = f.clamp(-1.0, 1.0).acos();
            return Ok(if u3 < 0.5 && angle < PI { -angle } else { angle });
        }
    }
}

/// One axis from the von Mises–Fisher law on the sphere centred on `ẑ`.
///
/// The polar cosine is drawn by exact inversion of its CDF,
/// `cos ϕ = 1 + ln(u + (1 − u)e^{−2k})/k`; the azimuth is uniform.
pub fn sample_vmf_axis<R: Rng + ?Sized>(k: f64, rng: &mut R) -> Result<Vec3> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::domain("von Mises-Fisher concentration", format!("must be positive and finite, got {k}")));
    }
    let u: f64 = rng.random();
    // w = 1 − cos ϕ ∈ [0, 2]
    let w = (-(u + (1.0 - u) * (-2.0 * k).exp()).ln() / k).clamp(0.0, 2.0);
    let sin_polar = (w * (2.0 - w)).sqrt();
    let azimuth = 2.0 * PI * rng.random::<f64>();
    Ok(Vec3::new(sin_polar * azimuth.cos(), sin_polar * azimuth.sin(), 1.0 - w))
}

fn sample_angle_error<R: Rng + ?Sized>(k: Concentration, rng: &mut R) -> f64 {
    match k.value() {
        None => 0.0,
        Some(k) if k == 0.0 => PI - 2.0 * PI * rng.random::<f64>(),
        Some(k) => sample_von_mises(k, rng).expect("positive concentration"),
    }
}

fn sample_axis<R: Rng + ?Sized>(k: Concentration, rng: &mut R) -> Vec3 {
    match k.value() {
        None => Vec3::Z,
        Some(k) if k == 0.0 => {
            let z = 1.0 - 2.0 * rng.random::<f64>();
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = 2.0 * PI * rng.random::<f64>();
            Vec3::new(r * phi.cos(), r * phi.sin(), z)
        }
        Some(k) => sample_vmf_axis(k, rng).expect("positive concentration"),
    }
}

/// Monte Carlo estimate of a noisy gate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean_map: LinearMap3,
    /// Per-entry standard error of the mean, row-major.
    pub stderr_map: [f64; 9],
    pub samples: u64,
    pub seed: u64,
}

impl McEstimate {
    /// Largest `|mean − reference|` over entries, measured in standard errors.
    /// An entry with zero standard error counts only if it differs by more
    /// than `round_off`.
    pub fn max_sigma_deviation(&self, reference: &LinearMap3, round_off: f64) -> f64 {
        self.mean_map
            .entries()
            .iter()
            .zip(reference.entries())
            .zip(self.stderr_map)
            .map(|((m, r), se)| {
                let d = (m - r).abs();
                if d <= round_off {
                    0.0
                } else if se == 0.0 {
                    f64::INFINITY
                } else {
                    (d - round_off) / se
                }
            })
            .fold(0.0, f64::max)
    }
}

/// Welford accumulator over the nine matrix entries.
#[derive(Clone, Copy)]
struct Moments {
    n: u64,
    mean: [f64; 9],
    m2: [f64; 9],
}

impl Moments {
    fn new() -> Self {
        Moments {
            n: 0,
            mean: [0.0; 9],
            m2: [0.0; 9],
        }
    }

    fn push(&mut self, x: [f64; 9]) {
        self.n += 1;
        let n = self.n as f64;
        for i in 0..9 {
            let d = x[i] - self.mean[i];
            self.mean[i] += d / n;
            self.m2[i] += d * (x[i] - self.mean[i]);
        }
    }

    fn merge(mut self, other: Moments) -> Self {
        if other.n == 0 {
            return self;
        }
        if self.n == 0 {
            return other;
        }
        let (na, nb) = (self.n as f64, other.n as f64);
        let n = na + nb;
        for i in 0..9 {
            let d = other.mean[i] - self.mean[i];
            self.mean[i] += d * nb / n;
            self.m2[i] += other.m2[i] + d * d * na * nb / n;
        }
        self.n += other.n;
        self
    }
}

/// Monte Carlo average of `R_n(θ + ε)` for a `ẑ` gate.
pub fn mc_noisy_rotation(theta: f64, params: NoiseParams, samples: u64, seed: u64) -> Result<McEstimate> {
    mc_noisy_gate(&GateSpec::about_z(theta)?, params, samples, seed)
}

/// Monte Carlo average for an arbitrary nominal axis: axes are drawn around
/// `ẑ` and carried onto the nominal axis by `R_nzᵀ`.
///
/// The sample range is cut into fixed chunks, each with its own ChaCha stream
/// derived from `seed`, and partial moments are merged in chunk order, so the
/// result is bit-identical for any thread count.
pub fn mc_noisy_gate(spec: &GateSpec, params: NoiseParams, samples: u64, seed: u64) -> Result<McEstimate> {
    if samples == 0 {
        return Err(Error::domain("samples", "need at least one sample"));
    }
    let theta = spec.theta();
    let back = align_axis_to_z(spec.axis())?.transpose();
    if params.is_noiseless() {
        return Ok(McEstimate {
            mean_map: rodrigues(spec.axis(), theta),
            stderr_map: [0.0; 9],
            samples,
            seed,
        });
    }
    let chunks = samples.div_ceil(CHUNK);
    let moments = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk);
            let len = CHUNK.min(samples - chunk * CHUNK);
            let mut acc = Moments::new();
            for _ in 0..len {
                let eps = sample_angle_error(params.k_dephase, &mut rng);
                let axis = back.apply(sample_axis(params.k_tilt, &mut rng));
                acc.push(rodrigues(axis, theta + eps).entries());
            }
            acc
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Moments::new(), Moments::merge);

    let n = moments.n as f64;
    let stderr_map = moments.m2.map(|m2| {
        if moments.n < 2 {
            f64::INFINITY
        } else {
            (m2.max(0.0) / (n - 1.0)).sqrt() / n.sqrt()
        }
    });
    Ok(McEstimate {
        mean_map: LinearMap3::from_entries(moments.mean),
        stderr_map,
        samples,
        seed,
    })
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = x;
        weights[i] = w;
        nodes[n - 1 - i] = -x;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Weighted nodes of the angle-error law.
fn angle_error_rule(k: Concentration, n: usize) -> Vec<(f64, f64)> {
    match k.value() {
        None => vec![(0.0, 1.0)],
        Some(k) => {
            // e^{k cos ε}/(2π I0(k)) = e^{k (cos ε − 1)}/(2π e^{−k} I0(k))
            let norm = 2.0 * PI * bessel_i_scaled(0, k).expect("k ≥ 0");
            let h = 2.0 * PI / n as f64;
            (0..n)
                .map(|i| {
                    let eps = -PI + i as f64 * h;
                    (eps, h * (k * (eps.cos() - 1.0)).exp() / norm)
                })
                .collect()
        }
    }
}

/// Weighted axes of the tilt law: Gauss–Legendre in `cos ϕ`, trapezoid in the
/// azimuth.
fn axis_rule(k: Concentration, n: usize) -> Vec<(Vec3, f64)> {
    let Some(k) = k.value() else {
        return vec![(Vec3::Z, 1.0)];
    };
    let (nodes, weights) = gauss_legendre(n);
    let h = 2.0 * PI / n as f64;
    let mut out = Vec::with_capacity(n * n);
    for (&u, &w) in nodes.iter().zip(&weights) {
        // k e^{k u}/(4π sinh k) per unit u and unit azimuth
        let density = if k == 0.0 {
            1.0 / (4.0 * PI)
        } else {
            k * (k * (u - 1.0)).exp() / (2.0 * PI * -(-2.0 * k).exp_m1())
        };
        let s = (1.0 - u * u).max(0.0).sqrt();
        for j in 0..n {
            let phi = j as f64 * h;
            out.push((Vec3::new(s * phi.cos(), s * phi.sin(), u), w * h * density));
        }
    }
    out
}

fn quadrature_at(theta: f64, params: NoiseParams, n: usize) -> LinearMap3 {
    let angles = angle_error_rule(params.k_dephase, n);
    let axes = axis_rule(params.k_tilt, n);
    angles
        .par_iter()
        .map(|&(eps, we)| {
            let mut acc = [0.0; 9];
            for &(axis, wa) in &axes {
                let r = rodrigues(axis, theta + eps).entries();
                for (a, v) in acc.iter_mut().zip(r) {
                    *a += we * wa * v;
                }
            }
            acc
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(LinearMap3::ZERO, |m, e| m + LinearMap3::from_entries(e))
}

/// Deterministic quadrature of the noise average of `R_n(θ + ε)` for a `ẑ`
/// gate.
///
/// Node counts per dimension start at 64 and double until no entry changes
/// by more than 1e-10, up to 1024.
pub fn quadrature_noisy_rotation(theta: f64, params: NoiseParams) -> Result<LinearMap3> {
    check_angle(theta)?;
    let mut n = QUADRATURE_START;
    let mut prev = quadrature_at(theta, params, n);
    loop {
        n *= 2;
        let next = quadrature_at(theta, params, n);
        let change = next.max_abs_diff(&prev);
        if change < QUADRATURE_TOLERANCE {
            return Ok(next);
        }
        if n >= QUADRATURE_MAX {
            return Err(Error::NoConvergence { change, nodes: n });
        }
        prev = next;
    }
}

/// Central difference `(b(θ + h) − b(θ − h)) / 2h`.
pub fn finite_difference_db<F>(curve: F, theta: f64, step: f64) -> Result<Vec3>
where
    F: Fn(f64) -> Result<Vec3>,
{
    if !(step > 0.0) {
        return Err(Error::domain("step", format!("must be positive, got {step}")));
    }
    check_angle(theta - step)?;
    check_angle(theta + step)?;
    let plus = curve(theta + step)?;
    let minus = curve(theta - step)?;
    Ok((plus - minus) * (0.5 / step))
}
