//! Entropy and uncertainty-relation witnesses, plus the accumulated
//! non-Markovianity measures and the time-grid scan.
//!
//! The witnesses accept any Hermitian unit-trace matrix. On genuine states
//! they are nonnegative; a negative value certifies that the input is
//! indefinite, which for a Choi matrix of an intermediate map means the
//! dynamics is non-Markovian.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::choi::{choi_from_superop, intermediate_map, DEFAULT_SUBSTEPS};
use crate::dephasing::DephasingParams;
use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;

/// Eigenvalues at or above `-PSD_TOLERANCE` count as nonnegative; genuine
/// CP-violations at the paper's parameters are O(1e-3), seven orders above
/// this numerical-noise floor.
pub const PSD_TOLERANCE: f64 = 1e-10;

/// Linear entropy `S_l(m) = d/(d-1) (1 - Tr(m^2))` for a Hermitian
/// unit-trace matrix of dimension `d >= 2`.
///
/// May be negative when `m` is indefinite; that is the witness.
pub fn linear_entropy(m: &ComplexMatrix, tol: f64) -> Result<f64> {
    check_state_like(m, tol)?;
    let d = m.dim() as f64;
    let purity = m.trace_product(m)?.re;
    Ok(d / (d - 1.0) * (1.0 - purity))
}

/// Renyi entropy `S_alpha(m) = log2(Tr(m^alpha)) / (1 - alpha)`.
///
/// Any real order in `(0,1) or (1,inf)` is accepted for positive
/// semidefinite input (eigenvalues within `tol` of zero are clamped);
/// indefinite input requires an integer order `>= 2`, since fractional
/// powers of negative eigenvalues are undefined.
pub fn renyi_entropy(m: &ComplexMatrix, alpha: f64, tol: f64) -> Result<f64> {
    if !alpha.is_finite() || alpha <= 0.0 || alpha == 1.0 {
        return Err(Error::InvalidRenyiOrder {
            alpha,
            reason: "order must lie in (0,1) or (1,inf)",
        });
    }
    check_state_like(m, tol)?;
    let es = m.hermitian_eigen(tol)?;
    let indefinite = es.eigenvalues[0] < -tol;
    let is_integer = alpha.fract() == 0.0;
    if indefinite && !(is_integer && alpha >= 2.0) {
        return Err(Error::InvalidRenyiOrder {
            alpha,
            reason: "indefinite matrix admits only integer orders >= 2",
        });
    }
    let trace_power: f64 = if is_integer {
        let n = alpha as i32;
        es.eigenvalues.iter().map(|l| l.powi(n)).sum()
    } else {
        es.eigenvalues.iter().map(|l| l.max(0.0).powf(alpha)).sum()
    };
    if trace_power <= 0.0 {
        return Err(Error::LogUndefined { value: trace_power });
    }
    Ok(trace_power.log2() / (1.0 - alpha))
}

fn check_state_like(m: &ComplexMatrix, tol: f64) -> Result<()> {
    if m.dim() < 2 {
        return Err(Error::InvalidInput("entropy requires dimension >= 2".into()));
    }
    let dev = m.hermiticity_deviation();
    if dev > tol {
        return Err(Error::NotHermitian { deviation: dev, tol });
    }
    let trace = m.trace();
    if (trace - Complex64::new(1.0, 0.0)).norm() > tol {
        return Err(Error::NotUnitTrace { trace: trace.re, tol });
    }
    Ok(())
}

/// A Hermitian observable, validated at construction.
#[derive(Debug, Clone)]
pub struct Observable {
    matrix: ComplexMatrix,
}

impl Observable {
    pub fn new(matrix: ComplexMatrix, tol: f64) -> Result<Self> {
        let dev = matrix.hermiticity_deviation();
        if dev > tol {
            return Err(Error::NotHermitian { deviation: dev, tol });
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

/// Sum-form uncertainty quantity
/// `Q = Var(A) + Var(B) - sqrt(|<[A,B]>|^2 + |<{A-<A>, B-<B>}>|^2)`.
///
/// Nonnegative on every genuine state; expectations are plain traces, so on
/// an indefinite unit-trace matrix `Q` (and even the variances) may go
/// negative, which is the uncertainty-relation witness.
pub fn sur_q(a: &Observable, b: &Observable, rho: &ComplexMatrix) -> Result<f64> {
    let (var_a, var_b, cross_sq) = sur_terms(a, b, rho)?;
    Ok(var_a + var_b - cross_sq.sqrt())
}

/// Product-form gap `Var(A) Var(B) - |<[A,B]>|^2/4 - |<{A-<A>,B-<B>}>|^2/4`.
pub fn sur_product_gap(a: &Observable, b: &Observable, rho: &ComplexMatrix) -> Result<f64> {
    let (var_a, var_b, cross_sq) = sur_terms(a, b, rho)?;
    Ok(var_a * var_b - 0.25 * cross_sq)
}

fn sur_terms(a: &Observable, b: &Observable, rho: &ComplexMatrix) -> Result<(f64, f64, f64)> {
    let am = a.matrix();
    let bm = b.matrix();
    for o in [am, bm] {
        if o.dim() != rho.dim() {
            return Err(Error::DimensionMismatch { expected: rho.dim(), got: o.dim() });
        }
    }
    let mean_a = rho.trace_product(am)?.re;
    let mean_b = rho.trace_product(bm)?.re;
    let var_a = rho.trace_product(&(am * am))?.re - mean_a * mean_a;
    let var_b = rho.trace_product(&(bm * bm))?.re - mean_b * mean_b;

    let ab = am.matmul(bm)?;
    let ba = bm.matmul(am)?;
    let commutator = rho.trace_product(&(&ab - &ba))?;
    // <{A - <A>, B - <B>}> = <AB + BA> - 2 <A><B>
    let anticommutator =
        rho.trace_product(&(&ab + &ba))? - Complex64::new(2.0 * mean_a * mean_b, 0.0);
    Ok((var_a, var_b, commutator.norm_sqr() + anticommutator.norm_sqr()))
}

/// How a scan evaluates the per-time-point Choi matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanMode {
    /// Closed-form Choi matrix only.
    ClosedForm,
    /// RK4-propagated intermediate map only.
    Numerical,
    /// Closed-form values, plus the max elementwise gap to the RK4 result.
    Both,
}

/// One time point of a witness scan.
#[derive(Debug, Clone)]
pub struct WitnessSample {
    pub t: f64,
    /// Dephasing rate gamma(t).
    pub gamma: f64,
    pub linear_entropy: f64,
    /// Renyi entropies keyed by integer order.
    pub renyi: BTreeMap<u32, f64>,
    /// Closed-form sum-uncertainty quantity.
    pub q: f64,
    /// Choi eigenvalues, ascending.
    pub choi_eigenvalues: [f64; 4],
    /// `Both` mode only: max elementwise |closed form - RK4|.
    pub rk4_discrepancy: Option<f64>,
}

/// Scan output: samples in grid order, plus the grid points that fell inside
/// a pole exclusion zone and were skipped.
#[derive(Debug, Clone)]
pub struct ScanResult {
    pub samples: Vec<WitnessSample>,
    pub skipped: Vec<f64>,
}

/// Evaluates every witness on the dephasing channel over `t_grid`.
///
/// Grid points within `pole_exclusion` of a rate pole are skipped and
/// reported in [`ScanResult::skipped`] rather than failing the scan.
pub fn witness_scan(
    p: &DephasingParams,
    t_grid: &[f64],
    orders: &[u32],
    mode: ScanMode,
    pole_exclusion: f64,
) -> Result<ScanResult> {
    if !(pole_exclusion >= 0.0 && pole_exclusion.is_finite()) {
        return Err(Error::NonPositive { name: "pole_exclusion", value: pole_exclusion });
    }
    for &order in orders {
        if order < 2 {
            return Err(Error::InvalidRenyiOrder {
                alpha: order as f64,
                reason: "scan orders must be integers >= 2",
            });
        }
    }
    let generator = match mode {
        ScanMode::ClosedForm => None,
        _ => Some(p.generator()),
    };
    let mut samples = Vec::with_capacity(t_grid.len());
    let mut skipped = Vec::new();
    for &t in t_grid {
        if !(t >= 0.0) {
            return Err(Error::InvalidInput(format!("grid time must be >= 0, got {t}")));
        }
        if let Some((_, dist)) = p.nearest_pole(t) {
            if dist <= pole_exclusion {
                skipped.push(t);
                continue;
            }
        }
        let gamma = match p.gamma(t) {
            Ok(g) => g,
            Err(Error::PoleProximity { .. }) => {
                skipped.push(t);
                continue;
            }
            Err(e) => return Err(e),
        };
        let closed = p.choi(t)?;
        let numerical = generator
            .as_ref()
            .map(|g| intermediate_map(g, t, p.epsilon(), DEFAULT_SUBSTEPS))
            .transpose()?
            .map(|s| choi_from_superop(&s));

        let (witness_matrix, rk4_discrepancy) = match mode {
            ScanMode::ClosedForm => (closed.matrix().clone(), None),
            ScanMode::Numerical => {
                (numerical.as_ref().expect("generator built").symmetrized(), None)
            }
            ScanMode::Both => {
                let gap = closed
                    .matrix()
                    .max_abs_diff(numerical.as_ref().expect("generator built").matrix());
                (closed.matrix().clone(), Some(gap))
            }
        };

        let es = witness_matrix.hermitian_eigen(1e-9)?;
        let choi_eigenvalues = [
            es.eigenvalues[0],
            es.eigenvalues[1],
            es.eigenvalues[2],
            es.eigenvalues[3],
        ];
        let linear = linear_entropy(&witness_matrix, 1e-9)?;
        let mut renyi = BTreeMap::new();
        for &order in orders {
            renyi.insert(order, renyi_entropy(&witness_matrix, order as f64, 1e-9)?);
        }
        samples.push(WitnessSample {
            t,
            gamma,
            linear_entropy: linear,
            renyi,
            q: p.sur_q(t)?,
            choi_eigenvalues,
            rk4_discrepancy,
        });
    }
    Ok(ScanResult { samples, skipped })
}

/// Accumulated linear-entropy measure
/// `N_S(t0) = integral of max(0, -S_l(C(t))) over [0, t0]`,
/// by the trapezoidal rule on a uniform grid with pole-excluded points
/// skipped. Nondecreasing in `t0`.
pub fn measure_ns(
    p: &DephasingParams,
    t0: f64,
    grid_step: f64,
    pole_exclusion: f64,
) -> Result<f64> {
    trapezoid_negative_part(p, t0, grid_step, pole_exclusion, |p, t| p.linear_entropy(t))
}

/// Accumulated rate measure `N_e(t0) = integral of max(0, -2 gamma(t))`,
/// with the same grid and pole handling as [`measure_ns`].
pub fn measure_ne(
    p: &DephasingParams,
    t0: f64,
    grid_step: f64,
    pole_exclusion: f64,
) -> Result<f64> {
    trapezoid_negative_part(p, t0, grid_step, pole_exclusion, |p, t| p.gamma(t).map(|g| 2.0 * g))
}

fn trapezoid_negative_part(
    p: &DephasingParams,
    t0: f64,
    grid_step: f64,
    pole_exclusion: f64,
    f: impl Fn(&DephasingParams, f64) -> Result<f64>,
) -> Result<f64> {
    if !(t0 > 0.0 && t0.is_finite()) {
        return Err(Error::NonPositive { name: "t0", value: t0 });
    }
    if !(grid_step > 0.0 && grid_step.is_finite()) {
        return Err(Error::NonPositive { name: "grid_step", value: grid_step });
    }
    let n = (t0 / grid_step + 1e-9).floor() as usize;
    let value_at = |k: usize| -> Option<f64> {
        let t = k as f64 * grid_step;
        if let Some((_, dist)) = p.nearest_pole(t) {
            if dist <= pole_exclusion {
                return None;
            }
        }
        f(p, t).ok().map(|v| (-v).max(0.0))
    };
    let mut total = 0.0;
    let mut prev = value_at(0);
    for k in 1..=n {
        let current = value_at(k);
        if let (Some(a), Some(b)) = (prev, current) {
            total += 0.5 * (a + b) * grid_step;
        }
        prev = current;
    }
    Ok(total)
}
