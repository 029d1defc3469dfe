//! Noise-averaged rotation matrices.
//!
//! A noisy gate applies `R_n(θ + ε)` where the angle error `ε` is von Mises
//! with concentration `k_dephase` and the axis `n` is von Mises–Fisher around
//! the nominal axis with concentration `k_tilt`. Averaging over both gives a
//! single contraction of the Bloch ball. For the `ẑ` axis it reads
//!
//! ```text
//! ⎡ Fc + A(1 − Fc)   −B·Fs            0              ⎤
//! ⎢ B·Fs             Fc + A(1 − Fc)   0              ⎥
//! ⎣ 0                0                Fc + C(1 − Fc) ⎦
//! ```
//!
//! with `Fc = F cos θ`, `Fs = F sin θ`, `F = I1(k_D)/I0(k_D)` and `A`, `B`, `C`
//! the second and first moments of the tilted axis (see [`TiltMoments`]).
//! Other axes follow by a change of basis.

use serde::Serialize;

use crate::error::Result;
use crate::geometry::{align_axis_to_z, check_angle, conjugate, GateSpec, LinearMap3};
use crate::special::{bessel_ratio, coth, Concentration};

/// Below this `k_tilt` the moments come from their power series.
const TILT_SERIES_LIMIT: f64 = 1.0;

/// Concentrations of the dephasing and tilting noise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseParams {
    pub k_dephase: Concentration,
    pub k_tilt: Concentration,
}

impl NoiseParams {
    pub const NOISELESS: NoiseParams = NoiseParams {
        k_dephase: Concentration::INFINITE,
        k_tilt: Concentration::INFINITE,
    };

    pub fn new(k_dephase: Concentration, k_tilt: Concentration) -> Self {
        NoiseParams { k_dephase, k_tilt }
    }

    pub fn dephasing(k: Concentration) -> Self {
        NoiseParams::new(k, Concentration::INFINITE)
    }

    pub fn tilting(k: Concentration) -> Self {
        NoiseParams::new(Concentration::INFINITE, k)
    }

    pub fn is_noiseless(&self) -> bool {
        self.k_dephase.is_infinite() && self.k_tilt.is_infinite()
    }
}

impl Serialize for NoiseParams {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("NoiseParams", 2)?;
        st.serialize_field("k_dephase", &self.k_dephase.to_string())?;
        st.serialize_field("k_tilt", &self.k_tilt.to_string())?;
        st.end()
    }
}

/// Axis moments of the von Mises–Fisher law centred on `ẑ`:
/// `A = E[n_x²] = E[n_y²]`, `B = E[n_z]`, `C = E[n_z²]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TiltMoments {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl TiltMoments {
    pub fn new(k_tilt: Concentration) -> Self {
        let k = match k_tilt.value() {
            None => return TiltMoments { a: 0.0, b: 1.0, c: 1.0 },
            Some(k) if k == 0.0 => {
                return TiltMoments {
                    a: 1.0 / 3.0,
                    b: 0.0,
                    c: 1.0 / 3.0,
                }
            }
            Some(k) => k,
        };
        if k < TILT_SERIES_LIMIT {
            // k·cosh k − sinh k = Σ_{n≥1} 2n k^{2n+1}/(2n+1)!, all terms positive,
            // so A = Σ 2n k^{2n−1}/(2n+1)! / sinh k has no cancellation.
            let k2 = k * k;
            let mut term = k / 3.0;
            let mut sum = term;
            let mut n = 1.0;
            while term > f64::EPSILON * 0.25 * sum {
                term *= k2 / (2.0 * n * (2.0 * n + 3.0));
                sum += term;
                n += 1.0;
            }
            let a = sum / k.sinh();
            return TiltMoments {
                a,
                b: k * a,
                c: 1.0 - 2.0 * a,
            };
        }
        let b = coth(k).expect("k is positive") - 1.0 / k;
        let a = b / k;
        TiltMoments {
            a,
            b,
            c: 1.0 - 2.0 * a,
        }
    }
}

fn block_matrix(fc: f64, fs: f64, m: TiltMoments) -> LinearMap3 {
    let diag = fc + m.a * (1.0 - fc);
    LinearMap3::from_rows([
        [diag, -m.b * fs, 0.0],
        [m.b * fs, diag, 0.0],
        [0.0, 0.0, fc + m.c * (1.0 - fc)],
    ])
}

/// Rotation about `ẑ` with a von Mises distributed angle error.
pub fn dephased_rotation_z(theta: f64, k_dephase: Concentration) -> Result<LinearMap3> {
    check_angle(theta)?;
    let f = bessel_ratio(k_dephase);
    let (s, c) = theta.sin_cos();
    Ok(LinearMap3::from_rows([
        [f * c, -f * s, 0.0],
        [f * s, f * c, 0.0],
        [0.0, 0.0, 1.0],
    ]))
}

/// Rotation by `theta` about an axis drawn from a von Mises–Fisher law around `ẑ`.
pub fn tilted_rotation_z(theta: f64, k_tilt: Concentration) -> Result<LinearMap3> {
    general_noisy_rotation_z(theta, NoiseParams::tilting(k_tilt))
}

/// Fully random axis: `((1 + 2 cos θ)/3)·𝟙`.
pub fn uniform_tilting(theta: f64) -> Result<LinearMap3> {
    check_angle(theta)?;
    let z = (1.0 + 2.0 * theta.cos()) / 3.0;
    Ok(LinearMap3::diagonal(z, z, z))
}

/// Rotation about `ẑ` with both angle and axis noise.
pub fn general_noisy_rotation_z(theta: f64, params: NoiseParams) -> Result<LinearMap3> {
    check_angle(theta)?;
    if params.k_tilt.is_infinite() {
        return dephased_rotation_z(theta, params.k_dephase);
    }
    if params.k_tilt.is_zero() && params.k_dephase.is_infinite() {
        return uniform_tilting(theta);
    }
    let f = bessel_ratio(params.k_dephase);
    let (s, c) = theta.sin_cos();
    Ok(block_matrix(f * c, f * s, TiltMoments::new(params.k_tilt)))
}

/// The noisy gate for an arbitrary axis, `R_nzᵀ · R̃_z(θ) · R_nz`.
pub fn noisy_rotation(spec: &GateSpec, params: NoiseParams) -> Result<LinearMap3> {
    let z_map = general_noisy_rotation_z(spec.theta(), params)?;
    conjugate(&z_map, &align_axis_to_z(spec.axis())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{axis_rotation, rodrigues, Vec3};
    use std::f64::consts::PI;

    fn k(v: f64) -> Concentration {
        Concentration::new(v).unwrap()
    }

    fn rot_z(theta: f64) -> LinearMap3 {
        axis_rotation(&GateSpec::about_z(theta).unwrap())
    }

    /// Moments by direct quadrature of the polar density `k e^{k u}/(2 sinh k)`
    /// on `u = cos ϕ ∈ [−1, 1]` with composite Simpson.
    fn moments_oracle(kt: f64) -> (f64, f64, f64) {
        let n = 20_000;
        let h = 2.0 / n as f64;
        let mut acc = [0.0; 3];
        for i in 0..=n {
            let u = -1.0 + i as f64 * h;
            let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            let p = kt * (kt * (u - 1.0)).exp() / (1.0 - (-2.0 * kt).exp());
            acc[0] += w * p * (1.0 - u * u) / 2.0;
            acc[1] += w * p * u;
            acc[2] += w * p * u * u;
        }
        let s = h / 3.0;
        (acc[0] * s, acc[1] * s, acc[2] * s)
    }

    #[test]
    fn tilt_moments_match_quadrature() {
        for &kt in &[1e-3, 0.3, 0.99, 1.0, 1.01, 3.0, 7.0, 25.0] {
            let m = TiltMoments::new(k(kt));
            let (a, b, c) = moments_oracle(kt);
            assert!((m.a - a).abs() < 1e-12, "A at {kt}: {} vs {a}", m.a);
            assert!((m.b - b).abs() < 1e-12, "B at {kt}");
            assert!((m.c - c).abs() < 1e-12, "C at {kt}");
        }
    }

    #[test]
    fn tilt_moments_small_k_expansion() {
        for &kt in &[1e-6, 1e-4, 1e-2] {
            let m = TiltMoments::new(k(kt));
            let k2 = kt * kt;
            assert!((m.a - (1.0 / 3.0 - k2 / 45.0)).abs() < 1e-15 + k2 * k2);
            assert!((m.b - (kt / 3.0 - kt * k2 / 45.0)).abs() < 1e-15 + kt * k2 * k2);
            assert!((m.c - (1.0 / 3.0 + 2.0 * k2 / 45.0)).abs() < 1e-15 + k2 * k2);
        }
    }

    #[test]
    fn tilt_moments_continuous_at_series_seam() {
        let below = TiltMoments::new(k(TILT_SERIES_LIMIT * (1.0 - 1e-15)));
        let at = TiltMoments::new(k(TILT_SERIES_LIMIT));
        assert!((below.a - at.a).abs() < 1e-14);
        assert!((below.b - at.b).abs() < 1e-14);
        assert!((below.c - at.c).abs() < 1e-14);
    }

    #[test]
    fn dephased_examples() {
        let theta = 1.1;
        assert_eq!(dephased_rotation_z(theta, Concentration::INFINITE).unwrap(), rot_z(theta));

        let m = dephased_rotation_z(theta, Concentration::ZERO).unwrap();
        let out = m.apply(Vec3::new(0.3, -0.4, 0.5));
        assert_eq!(out, Vec3::new(0.0, 0.0, 0.5));

        let m = dephased_rotation_z(PI / 4.0, k(3.0)).unwrap();
        let f = 0.8099852939565;
        let want = LinearMap3::from_rows([
            [f * (PI / 4.0).cos(), -f * (PI / 4.0).sin(), 0.0],
            [f * (PI / 4.0).sin(), f * (PI / 4.0).cos(), 0.0],
            [0.0, 0.0, 1.0],
        ]);
        assert!(m.max_abs_diff(&want) < 1e-12);
        assert_eq!(m.apply(Vec3::Z), Vec3::Z);

        assert!(dephased_rotation_z(0.0, k(1.0)).is_err());
    }

    #[test]
    fn tilted_examples() {
        let theta = 2.3;
        assert_eq!(tilted_rotation_z(theta, Concentration::INFINITE).unwrap(), rot_z(theta));

        let z = (1.0 + 2.0 * theta.cos()) / 3.0;
        let near_uniform = tilted_rotation_z(theta, k(1e-6)).unwrap();
        assert!(near_uniform.max_abs_diff(&LinearMap3::diagonal(z, z, z)) < 1e-5);

        assert_eq!(
            tilted_rotation_z(theta, Concentration::ZERO).unwrap(),
            uniform_tilting(theta).unwrap()
        );

        for &t in &[PI / 8.0, PI / 4.0, PI / 2.0] {
            let sharp = tilted_rotation_z(t, k(1e3)).unwrap();
            assert!(sharp.max_abs_diff(&rot_z(t)) < 2e-3);
        }
        assert!(tilted_rotation_z(2.0 * PI, k(1.0)).is_err());
    }

    #[test]
    fn uniform_tilting_examples() {
        let third = uniform_tilting(PI / 2.0).unwrap();
        assert!(third.max_abs_diff(&LinearMap3::diagonal(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)) < 1e-15);
        let zero = uniform_tilting(2.0 * PI / 3.0).unwrap();
        assert!(zero.max_abs_diff(&LinearMap3::ZERO) < 1e-15);
        let quarter = uniform_tilting(PI / 4.0).unwrap();
        let v = (1.0 + 2f64.sqrt()) / 3.0;
        assert!((quarter.get(0, 0) - v).abs() < 1e-15);
        assert!((v - 0.804738).abs() < 1e-6);
    }

    #[test]
    fn general_degenerates_under_sentinels() {
        for &theta in &[0.3, PI / 4.0, 2.0, 5.5] {
            assert_eq!(
                general_noisy_rotation_z(theta, NoiseParams::NOISELESS).unwrap(),
                rot_z(theta)
            );
            for &kv in &[0.0, 0.5, 3.0, 7.0, 40.0] {
                assert_eq!(
                    general_noisy_rotation_z(theta, NoiseParams::tilting(k(kv))).unwrap(),
                    tilted_rotation_z(theta, k(kv)).unwrap()
                );
                assert_eq!(
                    general_noisy_rotation_z(theta, NoiseParams::dephasing(k(kv))).unwrap(),
                    dephased_rotation_z(theta, k(kv)).unwrap()
                );
            }
        }
    }

    #[test]
    fn general_uniform_tilt_with_dephasing() {
        let theta: f64 = 0.9;
        let f = bessel_ratio(k(2.0));
        let z = (1.0 + 2.0 * f * theta.cos()) / 3.0;
        let m = general_noisy_rotation_z(theta, NoiseParams::new(k(2.0), Concentration::ZERO)).unwrap();
        assert!(m.max_abs_diff(&LinearMap3::diagonal(z, z, z)) < 1e-15);
    }

    #[test]
    fn noisy_rotation_examples() {
        let params = NoiseParams::new(k(3.0), k(7.0));
        let z_spec = GateSpec::about_z(0.8).unwrap();
        assert_eq!(
            noisy_rotation(&z_spec, params).unwrap(),
            general_noisy_rotation_z(0.8, params).unwrap()
        );
        let x_spec = GateSpec::new(Vec3::X, 0.8).unwrap();
        let m = noisy_rotation(&x_spec, NoiseParams::NOISELESS).unwrap();
        assert!(m.max_abs_diff(&rodrigues(Vec3::X, 0.8)) < 1e-15);
    }

    #[test]
    fn noisy_maps_are_contractions_and_axially_symmetric() {
        let ks = [0.0, 0.2, 1.0, 3.0, 7.0, 50.0, f64::INFINITY];
        for &theta in &[0.1, PI / 4.0, PI / 2.0, 2.0, PI, 4.5, 6.2] {
            for &kd in &ks {
                for &kt in &ks {
                    let params = NoiseParams::new(k(kd), k(kt));
                    let m = general_noisy_rotation_z(theta, params).unwrap();
                    assert!(m.singular_values()[0] <= 1.0 + 1e-12, "θ={theta} kd={kd} kt={kt}");
                    for &phi in &[0.4, 1.7, 3.9] {
                        let r = rodrigues(Vec3::Z, phi);
                        assert!(m.compose(&r).max_abs_diff(&r.compose(&m)) < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn purity_loss_grows_as_dephasing_concentration_falls() {
        // With tilting the diagonal A + F cos θ (1 − A) only grows with F for
        // cos θ ≥ 0; under pure dephasing |M·b| = F for any angle.
        let ks = [100.0, 30.0, 10.0, 3.0, 1.0, 0.3, 0.0];
        for &theta in &[0.3, PI / 4.0, PI / 2.0] {
            for &phi in &[0.0f64, 1.0, 2.0] {
                let b = Vec3::new(phi.cos(), phi.sin(), 0.0);
                let mut prev = f64::INFINITY;
                let mut prev_dephased = f64::INFINITY;
                for &kd in &ks {
                    let m = dephased_rotation_z(theta + 2.0, k(kd)).unwrap();
                    let n = m.apply(b).norm();
                    assert!(n <= prev_dephased + 1e-15);
                    prev_dephased = n;
                    let m = general_noisy_rotation_z(theta, NoiseParams::new(k(kd), k(5.0))).unwrap();
                    let n = m.apply(b).norm();
                    assert!(n <= prev + 1e-15);
                    prev = n;
                }
            }
        }
    }
}
