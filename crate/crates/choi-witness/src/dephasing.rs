//! Closed forms for the pure dephasing channel.
//!
//! The channel is `d rho/dt = gamma(t) (sigma_z rho sigma_z - rho)` with
//! `gamma(t) = 2 lambda gamma0 sinh(tg/2) / (g cosh(tg/2) + lambda sinh(tg/2))`
//! and `g = sqrt(lambda^2 - 2 gamma0 lambda)`. For `lambda < 2 gamma0` the
//! argument `g` is imaginary and everything is evaluated in the equivalent
//! trigonometric form with `Omega = sqrt(2 gamma0 lambda - lambda^2)`, which
//! keeps all arithmetic real and makes the denominator poles explicit.
//!
//! The coherence-decay exponent of the intermediate map's Choi matrix is
//! `chi = -4 gamma0 eps lambda / (lambda + g coth(tg/2))`, algebraically
//! equal to `-2 gamma(t) eps`; both routes are implemented and the identity
//! is used as a cross-check in tests.

use num_complex::Complex64;

use crate::choi::{ChoiMatrix, LindbladGenerator};
use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;

/// Default radius around a rate pole excluded from time-grid scans.
pub const DEFAULT_POLE_EXCLUSION: f64 = 0.05;

/// Evaluation closer than this to a pole is rejected outright.
pub const POLE_REJECTION_RADIUS: f64 = 1e-9;

/// Damping regime of the dephasing rate, fixed by `(gamma0, lambda)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `lambda >= 2 gamma0`: real `g`, `gamma(t) >= 0` for all `t >= 0`.
    Overdamped,
    /// `lambda < 2 gamma0`: imaginary `g`, oscillatory rate with poles.
    Oscillatory,
}

/// Parameters `(gamma0, lambda, epsilon)` of the dephasing channel; all
/// strictly positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DephasingParams {
    gamma0: f64,
    lambda: f64,
    epsilon: f64,
}

impl DephasingParams {
    pub fn new(gamma0: f64, lambda: f64, epsilon: f64) -> Result<Self> {
        for (name, value) in [("gamma0", gamma0), ("lambda", lambda), ("epsilon", epsilon)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::NonPositive { name, value });
            }
        }
        Ok(Self { gamma0, lambda, epsilon })
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn regime(&self) -> Regime {
        if self.lambda >= 2.0 * self.gamma0 {
            Regime::Overdamped
        } else {
            Regime::Oscillatory
        }
    }

    /// `g = sqrt(lambda^2 - 2 gamma0 lambda)`, only meaningful overdamped.
    fn g(&self) -> f64 {
        (self.lambda * (self.lambda - 2.0 * self.gamma0)).max(0.0).sqrt()
    }

    /// `Omega = sqrt(2 gamma0 lambda - lambda^2)`, only meaningful oscillatory.
    fn omega(&self) -> f64 {
        (self.lambda * (2.0 * self.gamma0 - self.lambda)).max(0.0).sqrt()
    }

    /// Dephasing rate without pole checks; diverges to +-inf at the poles.
    fn gamma_unchecked(&self, t: f64) -> f64 {
        let (g0, l) = (self.gamma0, self.lambda);
        match self.regime() {
            Regime::Overdamped => {
                let g = self.g();
                if g == 0.0 {
                    // critical point lambda = 2 gamma0: the tg/2 -> 0 limit
                    2.0 * l * g0 * t / (2.0 + l * t)
                } else {
                    let th = (t * g / 2.0).tanh();
                    2.0 * l * g0 * th / (g + l * th)
                }
            }
            Regime::Oscillatory => {
                let om = self.omega();
                let v = t * om / 2.0;
                2.0 * l * g0 * v.sin() / (om * v.cos() + l * v.sin())
            }
        }
    }

    /// The rate `gamma(t)` for `t >= 0`, rejecting evaluation within
    /// [`POLE_REJECTION_RADIUS`] of a pole.
    pub fn gamma(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(self.gamma_unchecked(t))
    }

    /// The Choi coherence exponent `chi(t)` in its printed closed form.
    pub fn chi(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        let (g0, l, e) = (self.gamma0, self.lambda, self.epsilon);
        let g_coth = match self.regime() {
            Regime::Overdamped => {
                let g = self.g();
                if g == 0.0 {
                    2.0 / t // tg/2 -> 0 limit of g coth(tg/2)
                } else {
                    g / (t * g / 2.0).tanh()
                }
            }
            Regime::Oscillatory => {
                let om = self.omega();
                let v = t * om / 2.0;
                om * v.cos() / v.sin()
            }
        };
        Ok(-4.0 * g0 * e * l / (l + g_coth) + 0.0)
    }

    /// The 4x4 Choi matrix of the intermediate dephasing map: 1/2 on the
    /// corner diagonal, `e^chi / 2` on the anti-corners.
    pub fn choi(&self, t: f64) -> Result<ChoiMatrix> {
        let half_exp = 0.5 * self.chi(t)?.exp();
        let mut m = ComplexMatrix::zeros(4);
        m.set(0, 0, Complex64::new(0.5, 0.0));
        m.set(3, 3, Complex64::new(0.5, 0.0));
        m.set(0, 3, Complex64::new(half_exp, 0.0));
        m.set(3, 0, Complex64::new(half_exp, 0.0));
        ChoiMatrix::new(2, m)
    }

    /// Linear entropy of the Choi matrix, `(1/3)(2 - 2 e^{2 chi})`.
    ///
    /// Negative exactly where `gamma(t)` is negative.
    pub fn linear_entropy(&self, t: f64) -> Result<f64> {
        let chi = self.chi(t)?;
        Ok(-(2.0 / 3.0) * (2.0 * chi).exp_m1() + 0.0)
    }

    /// Closed-form sum-uncertainty quantity `Q = 5/4 - e^{2 chi}`.
    pub fn sur_q(&self, t: f64) -> Result<f64> {
        let chi = self.chi(t)?;
        Ok(0.25 - (2.0 * chi).exp_m1())
    }

    /// All rate poles in `(0, t_max]`: solutions of
    /// `Omega cos(t Omega/2) + lambda sin(t Omega/2) = 0`, i.e.
    /// `t_k = (2/Omega)(k pi - atan(Omega/lambda))`. Empty when overdamped.
    pub fn pole_locations(&self, t_max: f64) -> Vec<f64> {
        if self.regime() == Regime::Overdamped || !(t_max > 0.0) {
            return Vec::new();
        }
        let om = self.omega();
        let offset = (om / self.lambda).atan();
        let mut poles = Vec::new();
        let mut k = 1usize;
        loop {
            let t = 2.0 * (k as f64 * std::f64::consts::PI - offset) / om;
            if t > t_max {
                break;
            }
            poles.push(t);
            k += 1;
        }
        poles
    }

    /// Nearest pole to `t` and its distance, if any pole exists.
    pub fn nearest_pole(&self, t: f64) -> Option<(f64, f64)> {
        if self.regime() == Regime::Overdamped {
            return None;
        }
        let om = self.omega();
        let offset = (om / self.lambda).atan();
        let pi = std::f64::consts::PI;
        let k_real = (t * om / 2.0 + offset) / pi;
        let mut best: Option<(f64, f64)> = None;
        for k in [k_real.floor(), k_real.ceil()] {
            if k < 1.0 {
                continue;
            }
            let pole = 2.0 * (k * pi - offset) / om;
            let dist = (t - pole).abs();
            if best.map_or(true, |(_, d)| dist < d) {
                best = Some((pole, dist));
            }
        }
        // below the first pole the floor/ceil candidates can both clamp away
        if best.is_none() {
            let pole = 2.0 * (pi - offset) / om;
            best = Some((pole, (t - pole).abs()));
        }
        best
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(t >= 0.0) {
            return Err(Error::InvalidInput(format!("time must be >= 0, got {t}")));
        }
        if let Some((pole, dist)) = self.nearest_pole(t) {
            if dist < POLE_REJECTION_RADIUS {
                return Err(Error::PoleProximity { t, pole, dist });
            }
        }
        Ok(())
    }

    /// The Lindblad generator of this channel: no Hamiltonian, single jump
    /// operator `sigma_z` with rate `gamma(t)`.
    pub fn generator(&self) -> LindbladGenerator {
        let params = *self;
        LindbladGenerator::new(
            2,
            |_| ComplexMatrix::zeros(2),
            vec![(Box::new(move |t| params.gamma_unchecked(t)), ComplexMatrix::pauli_z())],
        )
        .expect("sigma_z is 2x2")
    }
}
