//! Oracle-versus-analytic checks behind `bloch-qfi validate`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channels::{general_noisy_rotation_z, NoiseParams};
use crate::error::Result;
use crate::geometry::{align_axis_to_z, bloch_from_angles, BlochVector, GateSpec, Vec3};
use crate::metrology::{closed_form_qfi, evolve, map_derivative_z, qfi_curve, Regime};
use crate::oracle::{finite_difference_db, mc_noisy_rotation, quadrature_noisy_rotation};
use crate::special::Concentration;

pub const DEFAULT_SEED: u64 = 0x5eed;
pub const DEFAULT_SAMPLES: u64 = 1_000_000;

/// Base tolerances, multiplied by the tolerance scale.
pub const MC_SIGMAS: f64 = 5.0;
pub const MC_ROUND_OFF: f64 = 1e-12;
pub const QUADRATURE_TOL: f64 = 1e-8;
pub const GRADIENT_TOL: f64 = 1e-5;
pub const FD_STEP: f64 = 1e-6;
pub const INVARIANCE_TOL: f64 = 1e-9;
pub const NOISELESS_TOL: f64 = 1e-9;
pub const CLOSED_FORM_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub unit: &'static str,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.max_deviation < self.tolerance
    }
}

fn k(v: f64) -> Concentration {
    Concentration::new(v).expect("valid concentration")
}

/// θ ∈ {π/8, π/4, π/2} × k_D ∈ {1, 3, ∞} × k_T ∈ {1, 7, ∞}, without the
/// noiseless corner.
pub fn oracle_grid() -> Vec<(f64, NoiseParams)> {
    let mut grid = Vec::new();
    for theta in [PI / 8.0, PI / 4.0, PI / 2.0] {
        for kd in [1.0, 3.0, f64::INFINITY] {
            for kt in [1.0, 7.0, f64::INFINITY] {
                let params = NoiseParams::new(k(kd), k(kt));
                if !params.is_noiseless() {
                    grid.push((theta, params));
                }
            }
        }
    }
    grid
}

fn max(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(0.0, f64::max)
}

/// Largest Monte Carlo deviation from the closed-form map, in standard errors.
pub fn mc_deviation(samples: u64, seed: u64) -> Result<f64> {
    let devs = oracle_grid()
        .into_iter()
        .enumerate()
        .map(|(i, (theta, params))| {
            let est = mc_noisy_rotation(theta, params, samples, seed.wrapping_add(i as u64))?;
            let exact = general_noisy_rotation_z(theta, params)?;
            Ok(est.max_sigma_deviation(&exact, MC_ROUND_OFF))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(max(devs.into_iter()))
}

/// Largest entrywise gap between quadrature and the closed-form map.
pub fn quadrature_deviation() -> Result<f64> {
    let devs = oracle_grid()
        .par_iter()
        .map(|&(theta, params)| {
            let q = quadrature_noisy_rotation(theta, params)?;
            Ok(q.max_abs_diff(&general_noisy_rotation_z(theta, params)?))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(max(devs.into_iter()))
}

/// Largest relative gap `|fd − db| / |db|` between the propagated derivative
/// and central differences at `t ∈ {1, 5, 20}`.
pub fn gradient_deviation() -> Result<f64> {
    let b0 = bloch_from_angles(1.0, 1.0, 0.3)?;
    let mut worst: f64 = 0.0;
    for (theta, params) in oracle_grid() {
        let map = general_noisy_rotation_z(theta, params)?;
        let dmap = map_derivative_z(theta, params)?;
        let trace = evolve(&map, &dmap, b0, 20)?;
        for t in [1usize, 5, 20] {
            let curve = |th: f64| -> Result<Vec3> {
                let m = general_noisy_rotation_z(th, params)?;
                let tr = evolve(&m, &dmap, b0, t)?;
                Ok(tr.steps[t].b.vector())
            };
            let fd = finite_difference_db(curve, theta, FD_STEP)?;
            let db = trace.steps[t].db;
            worst = worst.max((fd - db).norm() / db.norm());
        }
    }
    Ok(worst)
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    let u: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..2.0 * PI);
    let s = (1.0 - u * u).max(0.0).sqrt();
    Vec3::new(s * phi.cos(), s * phi.sin(), u)
}

fn random_concentration(rng: &mut ChaCha8Rng) -> Concentration {
    const CHOICES: [f64; 7] = [0.0, 0.5, 1.0, 3.0, 10.0, 50.0, f64::INFINITY];
    k(CHOICES[rng.random_range(0..CHOICES.len())])
}

/// Random gate, noise and initial state for the rotation-invariance check.
pub fn random_case(rng: &mut ChaCha8Rng) -> (GateSpec, NoiseParams, BlochVector) {
    let axis = random_unit(rng);
    let theta = rng.random_range(0.05..2.0 * PI - 0.05);
    let params = NoiseParams::new(random_concentration(rng), random_concentration(rng));
    let radius = if rng.random_bool(0.5) {
        1.0
    } else {
        rng.random_range(0.0..0.95)
    };
    let b0 = BlochVector::new(random_unit(rng) * radius).expect("inside the ball");
    (GateSpec::new(axis, theta).expect("unit axis"), params, b0)
}

/// Largest gap between the general-axis QFI curve and the `ẑ` curve on the
/// rotated initial vector, relative for values above 1.
pub fn invariance_deviation(cases: usize, seed: u64, t_max: usize) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let (spec, params, b0) = random_case(&mut rng);
        let general = qfi_curve(&spec, params, b0, t_max)?;
        let r = align_axis_to_z(spec.axis())?;
        let rotated = BlochVector::new(r.apply(b0.vector()))?;
        let aligned = qfi_curve(&GateSpec::about_z(spec.theta())?, params, rotated, t_max)?;
        for (a, b) in general.entries.iter().zip(&aligned.entries) {
            worst = worst.max((a.qfi - b.qfi).abs() / b.qfi.abs().max(1.0));
        }
    }
    Ok(worst)
}

/// Largest `|H(t) − t²|` for a noiseless equatorial state, `t ≤ 100`.
pub fn noiseless_deviation() -> Result<f64> {
    let b0 = BlochVector::new(Vec3::X)?;
    let mut worst: f64 = 0.0;
    for theta in [PI / 8.0, PI / 4.0, PI / 2.0] {
        let curve = qfi_curve(&GateSpec::about_z(theta)?, NoiseParams::NOISELESS, b0, 100)?;
        for e in &curve.entries {
            let t = e.t as f64;
            worst = worst.max((e.qfi - t * t).abs());
        }
    }
    Ok(worst)
}

fn relative(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        ((a - b) / b).abs()
    }
}

/// Largest relative gap between the generic pipeline and the closed forms for
/// dephasing (`t ≤ 200`) and isotropic tilting (`t ≤ 100`).
pub fn closed_form_deviation() -> Result<f64> {
    let mut worst: f64 = 0.0;
    let mut compare = |regime: Regime, theta: f64, params: NoiseParams, radius: f64, alpha: f64, t_max: usize| -> Result<()> {
        let b0 = bloch_from_angles(radius, alpha, 0.0)?;
        let curve = qfi_curve(&GateSpec::about_z(theta)?, params, b0, t_max)?;
        for e in curve.entries.iter().skip(1) {
            let exact = closed_form_qfi(regime, e.t, theta, params, radius, alpha)?;
            worst = worst.max(relative(e.qfi, exact));
        }
        Ok(())
    };
    for kd in [0.5, 1.0, 3.0, 10.0] {
        for alpha in [PI / 4.0, PI / 2.0] {
            compare(Regime::Dephasing, PI / 4.0, NoiseParams::dephasing(k(kd)), 1.0, alpha, 200)?;
        }
    }
    for theta in [PI / 8.0, PI / 4.0, PI / 2.0, 2.5] {
        for radius in [1.0, 0.7] {
            compare(Regime::UniformTilting, theta, NoiseParams::tilting(k(0.0)), radius, PI / 3.0, 100)?;
            for kd in [0.5, 3.0] {
                let params = NoiseParams::new(k(kd), k(0.0));
                compare(Regime::GeneralKtZero, theta, params, radius, PI / 3.0, 100)?;
            }
        }
    }
    Ok(worst)
}

/// Runs every suite. `scale` multiplies each tolerance; 0 fails everything.
pub fn run_all(samples: u64, seed: u64, scale: f64) -> Result<Vec<CheckOutcome>> {
    Ok(vec![
        CheckOutcome {
            name: "mc-vs-analytic",
            max_deviation: mc_deviation(samples, seed)?,
            tolerance: MC_SIGMAS * scale,
            unit: "stderr",
        },
        CheckOutcome {
            name: "quadrature-vs-analytic",
            max_deviation: quadrature_deviation()?,
            tolerance: QUADRATURE_TOL * scale,
            unit: "abs",
        },
        CheckOutcome {
            name: "finite-difference",
            max_deviation: gradient_deviation()?,
            tolerance: GRADIENT_TOL * scale,
            unit: "rel",
        },
        CheckOutcome {
            name: "rotation-invariance",
            max_deviation: invariance_deviation(100, seed, 30)?,
            tolerance: INVARIANCE_TOL * scale,
            unit: "rel",
        },
        CheckOutcome {
            name: "closed-form-noiseless",
            max_deviation: noiseless_deviation()?,
            tolerance: NOISELESS_TOL * scale,
            unit: "abs",
        },
        CheckOutcome {
            name: "closed-form-noisy",
            max_deviation: closed_form_deviation()?,
            tolerance: CLOSED_FORM_TOL * scale,
            unit: "rel",
        },
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_has_24_points() {
        assert_eq!(oracle_grid().len(), 24);
    }

    #[test]
    fn cheap_suites_pass() {
        assert!(quadrature_deviation().unwrap() < QUADRATURE_TOL);
        assert!(gradient_deviation().unwrap() < GRADIENT_TOL);
        assert!(invariance_deviation(20, 1, 20).unwrap() < INVARIANCE_TOL);
        assert!(noiseless_deviation().unwrap() < NOISELESS_TOL);
        assert!(closed_form_deviation().unwrap() < CLOSED_FORM_TOL);
    }

    #[test]
    fn zero_scale_fails_everything() {
        let outcomes = run_all(200, 3, 0.0).unwrap();
        assert!(outcomes.iter().all(|o| !o.passed()));
    }
}
