//! Evolution under repeated noisy gates and the quantum Fisher information of
//! the rotation angle.
//!
//! After `t` applications the Bloch vector is `b_t = Mᵗ b_0`, where `M` is the
//! noisy gate. Its derivative follows from the product rule,
//! `∂Mᵗ = Σ_j Mʲ M′ M^{t−1−j}`, which [`evolve`] accumulates in `O(t)` as
//! `db_{t+1} = M·db_t + M′·b_t`.

use serde::Serialize;

use crate::channels::{noisy_rotation, NoiseParams, TiltMoments};
use crate::error::{Error, Result};
use crate::geometry::{align_axis_to_z, check_angle, conjugate, BlochVector, GateSpec, LinearMap3, Vec3};
use crate::special::{bessel_ratio, Concentration};

/// Below this `1 − |b|²` a state counts as pure.
pub const PURITY_EPSILON: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TraceStep {
    pub t: usize,
    pub b: BlochVector,
    pub db: Vec3,
}

/// Bloch vectors `b_t` and their θ-derivatives for `t = 0..=t_max`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvolutionTrace {
    pub steps: Vec<TraceStep>,
}

/// Applies `map` repeatedly to `b0`, carrying the θ-derivative along.
///
/// `dmap` must be the entrywise θ-derivative of `map`.
pub fn evolve(
    map: &LinearMap3,
    dmap: &LinearMap3,
    b0: BlochVector,
    t_max: usize,
) -> Result<EvolutionTrace> {
    let mut steps = Vec::with_capacity(t_max + 1);
    let mut b = b0.vector();
    let mut db = Vec3::ZERO;
    steps.push(TraceStep { t: 0, b: b0, db });
    for t in 1..=t_max {
        db = map.apply(db) + dmap.apply(b);
        b = map.apply(b);
        steps.push(TraceStep {
            t,
            b: BlochVector::new(b)?,
            db,
        });
    }
    Ok(EvolutionTrace { steps })
}

/// θ-derivative of [`general_noisy_rotation_z`]. The noise coefficients do not
/// depend on θ.
pub fn map_derivative_z(theta: f64, params: NoiseParams) -> Result<LinearMap3> {
    check_angle(theta)?;
    let f = bessel_ratio(params.k_dephase);
    let (s, c) = theta.sin_cos();
    let (fs, fc) = (f * s, f * c);
    if params.k_tilt.is_infinite() {
        return Ok(LinearMap3::from_rows([
            [-fs, -fc, 0.0],
            [fc, -fs, 0.0],
            [0.0, 0.0, 0.0],
        ]));
    }
    let m = TiltMoments::new(params.k_tilt);
    let diag = -fs * (1.0 - m.a);
    Ok(LinearMap3::from_rows([
        [diag, -m.b * fc, 0.0],
        [m.b * fc, diag, 0.0],
        [0.0, 0.0, -fs * (1.0 - m.c)],
    ]))
}

/// θ-derivative of [`noisy_rotation`] for an arbitrary axis.
pub fn noisy_rotation_derivative(spec: &GateSpec, params: NoiseParams) -> Result<LinearMap3> {
    let dz = map_derivative_z(spec.theta(), params)?;
    conjugate(&dz, &align_axis_to_z(spec.axis())?)
}

/// QFI of a qubit from its Bloch vector `b` and derivative `db`:
/// `|db|² + (b·db)²/(1 − |b|²)` for mixed states, `|db|²` for pure ones.
///
/// The mixed term is dropped when `1 − |b|² < ε` and `|b·db| < √ε` with
/// `ε = 1e-9`, where it is numerically 0/0.
pub fn qfi_from_bloch(b: BlochVector, db: Vec3) -> f64 {
    let v = b.vector();
    let deficit = 1.0 - v.norm_sq();
    let overlap = v.dot(db);
    let motion = db.norm_sq();
    if deficit < PURITY_EPSILON && overlap.abs() < PURITY_EPSILON.sqrt() {
        return motion;
    }
    if deficit <= 0.0 {
        return motion;
    }
    motion + overlap * overlap / deficit
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QfiEntry {
    pub t: usize,
    pub qfi: f64,
    pub b: BlochVector,
    pub db: Vec3,
}

/// QFI as a function of the number of gate applications.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QfiSeries {
    pub entries: Vec<QfiEntry>,
    pub gate: GateSpec,
    pub noise: NoiseParams,
    pub initial: BlochVector,
}

impl QfiSeries {
    pub fn qfi_values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.qfi).collect()
    }

    /// Step with the largest QFI; ties resolve to the earliest step.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        let mut best_q = f64::NEG_INFINITY;
        for e in &self.entries {
            if e.qfi > best_q {
                best_q = e.qfi;
                best = e.t;
            }
        }
        best
    }
}

/// Evolves `b0` under the noisy gate for `t_max` steps and evaluates the QFI
/// at every step, starting with `H(0) = 0`.
pub fn qfi_curve(
    spec: &GateSpec,
    params: NoiseParams,
    b0: BlochVector,
    t_max: usize,
) -> Result<QfiSeries> {
    let map = noisy_rotation(spec, params)?;
    let dmap = noisy_rotation_derivative(spec, params)?;
    let trace = evolve(&map, &dmap, b0, t_max)?;
    let entries = trace
        .steps
        .into_iter()
        .map(|s| QfiEntry {
            t: s.t,
            qfi: qfi_from_bloch(s.b, s.db),
            b: s.b,
            db: s.db,
        })
        .collect();
    Ok(QfiSeries {
        entries,
        gate: *spec,
        noise: params,
        initial: b0,
    })
}

/// Splits `b0` into its components perpendicular and parallel to `axis`.
pub fn split_along_axis(b0: BlochVector, axis: Vec3) -> (BlochVector, BlochVector) {
    let v = b0.vector();
    let parallel = axis * v.dot(axis);
    let perpendicular = v - parallel;
    // both pieces are no longer than b0
    (
        BlochVector::new(perpendicular).expect("projection shrinks"),
        BlochVector::new(parallel).expect("projection shrinks"),
    )
}

/// Noise regimes with a closed-form QFI.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `|b0|² t² sin²α`.
    Noiseless,
    /// `F^{2t} t² |b0|² sin²α`, independent of θ.
    Dephasing,
    /// `k_tilt = 0`, no dephasing: the gate is `Z·𝟙` with `Z = (1 + 2 cos θ)/3`.
    UniformTilting,
    /// `k_tilt = 0` with dephasing: `Z = (1 + 2F cos θ)/3`.
    GeneralKtZero,
}

fn mismatch(regime: Regime, params: NoiseParams) -> Error {
    Error::domain(
        "regime",
        format!(
            "{regime:?} does not apply to k_dephase = {}, k_tilt = {}",
            params.k_dephase, params.k_tilt
        ),
    )
}

/// Closed-form QFI after `t` steps for a `ẑ` gate, initial radius `b0_norm`
/// and polar angle `alpha` measured from the rotation axis.
pub fn closed_form_qfi(
    regime: Regime,
    t: usize,
    theta: f64,
    params: NoiseParams,
    b0_norm: f64,
    alpha: f64,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&b0_norm) {
        return Err(Error::domain("radius", format!("must lie in [0, 1], got {b0_norm}")));
    }
    if !(0.0..=std::f64::consts::PI).contains(&alpha) {
        return Err(Error::domain("alpha", format!("must lie in [0, π], got {alpha}")));
    }
    let r2 = b0_norm * b0_norm;
    let tf = t as f64;
    match regime {
        Regime::Noiseless | Regime::Dephasing => {
            if regime == Regime::Noiseless && !params.is_noiseless() {
                return Err(mismatch(regime, params));
            }
            if !params.k_tilt.is_infinite() {
                return Err(mismatch(regime, params));
            }
            let f = bessel_ratio(params.k_dephase);
            let sa = alpha.sin();
            Ok(f.powi(2 * t as i32) * tf * tf * r2 * sa * sa)
        }
        Regime::UniformTilting | Regime::GeneralKtZero => {
            if !params.k_tilt.is_zero()
                || (regime == Regime::UniformTilting && !params.k_dephase.is_infinite())
            {
                return Err(mismatch(regime, params));
            }
            check_angle(theta)?;
            if t == 0 {
                return Ok(0.0);
            }
            Ok(isotropic_qfi(t, theta, bessel_ratio(params.k_dephase), r2))
        }
    }
}

/// QFI for a gate `Z(θ)·𝟙` with `Z = (1 + 2F cos θ)/3`:
/// `t² Z^{2t−2} Z′² r² / (1 − Z^{2t} r²)`.
fn isotropic_qfi(t: usize, theta: f64, f: f64, r2: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    let z = (1.0 + 2.0 * f * c) / 3.0;
    let dz = -2.0 * f * s / 3.0;
    let tf = t as f64;
    // 1 − F cos θ = (1 − F) + 2F sin²(θ/2), exact as θ → 0
    let half = (0.5 * theta).sin();
    let one_minus_fc = (1.0 - f) + 2.0 * f * half * half;
    let decay = if z == 0.0 {
        1.0
    } else {
        let log_abs_z = if z > 0.0 {
            (-2.0 * one_minus_fc / 3.0).ln_1p()
        } else {
            (-z).ln()
        };
        // 1 − Z^{2t}
        -(2.0 * tf * log_abs_z).exp_m1()
    };
    let denominator = (1.0 - r2) + r2 * decay;
    let zpow = if t == 1 { 1.0 } else { z.powi(2 * t as i32 - 2) };
    tf * tf * zpow * dz * dz * r2 / denominator
}

/// Optimal number of dephased gate applications.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OptimalSteps {
    /// `−1/ln F`.
    pub t_real: f64,
    /// The neighbouring integer with the larger QFI.
    pub t_int: usize,
}

/// Maximiser of `F^{2t} t²` over positive integers `t`.
pub fn optimal_steps_dephasing(k_dephase: Concentration) -> Result<OptimalSteps> {
    if k_dephase.is_infinite() {
        return Err(Error::UnboundedSteps);
    }
    if k_dephase.is_zero() {
        return Err(Error::NoInformation);
    }
    let f = bessel_ratio(k_dephase);
    let t_real = -1.0 / f.ln();
    let score = |t: usize| 2.0 * (t as f64) * f.ln() + 2.0 * (t as f64).ln();
    let lo = (t_real.floor() as usize).max(1);
    let hi = (t_real.ceil() as usize).max(1);
    let t_int = if score(hi) > score(lo) { hi } else { lo };
    Ok(OptimalSteps { t_real, t_int })
}

/// Classical Fisher information of a projective measurement along `meas_axis`:
/// `(m·db)² / (1 − (m·b)²)`.
pub fn classical_fi_projective(meas_axis: Vec3, b: BlochVector, db: Vec3) -> Result<f64> {
    if (meas_axis.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::domain("measurement axis", "must be a unit vector"));
    }
    let p = meas_axis.dot(b.vector());
    let dp = meas_axis.dot(db);
    let denominator = 1.0 - p * p;
    if denominator <= 0.0 {
        if dp == 0.0 {
            return Ok(0.0);
        }
        return Err(Error::UndefinedFisher);
    }
    Ok(dp * dp / denominator)
}
