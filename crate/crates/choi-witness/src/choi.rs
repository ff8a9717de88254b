//! Intermediate evolution maps, their Choi matrices, and random CPTP maps.
//!
//! The intermediate map `L(t, t+eps)` of a time-local master equation is
//! built by propagating every matrix-unit initial condition with fixed-step
//! RK4 and assembling the resulting superoperator column by column.
//! Vectorization is column-stacking, so `vec(A X B) = (B^T kron A) vec(X)`
//! and a Kraus channel has superoperator `sum_k conj(K_k) kron K_k`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;

/// Default number of RK4 substeps over `[t, t+eps]`.
pub const DEFAULT_SUBSTEPS: usize = 16;

/// A linear map on `d x d` operators, stored as a `d^2 x d^2` matrix acting
/// on column-stacked vectorizations.
#[derive(Debug, Clone)]
pub struct Superoperator {
    dim: usize,
    matrix: ComplexMatrix,
}

impl Superoperator {
    pub fn identity(dim: usize) -> Self {
        Self { dim, matrix: ComplexMatrix::identity(dim * dim) }
    }

    pub fn from_matrix(dim: usize, matrix: ComplexMatrix) -> Result<Self> {
        if matrix.dim() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, got: matrix.dim() });
        }
        Ok(Self { dim, matrix })
    }

    /// Superoperator of the Kraus channel `rho -> sum_k K_k rho K_k^dagger`.
    pub fn from_kraus(kraus: &[ComplexMatrix]) -> Result<Self> {
        let dim = kraus
            .first()
            .ok_or_else(|| Error::InvalidInput("at least one Kraus operator required".into()))?
            .dim();
        let mut matrix = ComplexMatrix::zeros(dim * dim);
        for k in kraus {
            if k.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: k.dim() });
            }
            matrix = &matrix + &k.conj().kron(k);
        }
        Ok(Self { dim, matrix })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Apply the map to an operator.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: rho.dim() });
        }
        let d = self.dim;
        let v = vec_column_stack(rho);
        let mut out = vec![Complex64::new(0.0, 0.0); d * d];
        for (col, &x) in v.iter().enumerate() {
            if x == Complex64::new(0.0, 0.0) {
                continue;
            }
            for row in 0..d * d {
                out[row] += self.matrix.get(row, col) * x;
            }
        }
        unvec_column_stack(d, &out)
    }

    /// Composition `self . inner` (apply `inner` first).
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        if inner.dim != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: inner.dim });
        }
        Ok(Self { dim: self.dim, matrix: self.matrix.matmul(&inner.matrix)? })
    }

    /// Checks `Tr(L(E_ij)) = delta_ij` on all matrix units.
    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        let d = self.dim;
        for i in 0..d {
            for j in 0..d {
                let out = self.apply(&matrix_unit(d, i, j)).expect("dims match");
                let target = if i == j { 1.0 } else { 0.0 };
                if (out.trace() - target).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Checks `L(X^dagger) = L(X)^dagger` on all matrix units.
    pub fn is_hermiticity_preserving(&self, tol: f64) -> bool {
        let d = self.dim;
        for i in 0..d {
            for j in 0..d {
                let a = self.apply(&matrix_unit(d, i, j)).expect("dims match").dagger();
                let b = self.apply(&matrix_unit(d, j, i)).expect("dims match");
                if a.max_abs_diff(&b) > tol {
                    return false;
                }
            }
        }
        true
    }
}

/// Column-stacked vectorization: `vec(X)[i + j*d] = X[i][j]`.
pub fn vec_column_stack(m: &ComplexMatrix) -> Vec<Complex64> {
    let d = m.dim();
    let mut v = vec![Complex64::new(0.0, 0.0); d * d];
    for j in 0..d {
        for i in 0..d {
            v[i + j * d] = m.get(i, j);
        }
    }
    v
}

pub fn unvec_column_stack(dim: usize, v: &[Complex64]) -> Result<ComplexMatrix> {
    if v.len() != dim * dim {
        return Err(Error::DimensionMismatch { expected: dim * dim, got: v.len() });
    }
    let mut m = ComplexMatrix::zeros(dim);
    for j in 0..dim {
        for i in 0..dim {
            m.set(i, j, v[i + j * dim]);
        }
    }
    Ok(m)
}

fn matrix_unit(d: usize, i: usize, j: usize) -> ComplexMatrix {
    let mut e = ComplexMatrix::zeros(d);
    e.set(i, j, Complex64::new(1.0, 0.0));
    e
}

/// Time-local Lindblad generator: a Hamiltonian plus jump operators whose
/// rates may go negative (that is exactly the non-Markovian window).
pub struct LindbladGenerator {
    dim: usize,
    hamiltonian: Box<dyn Fn(f64) -> ComplexMatrix + Send + Sync>,
    jumps: Vec<Jump>,
}

struct Jump {
    rate: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    operator: ComplexMatrix,
    operator_dag: ComplexMatrix,
    dag_times_op: ComplexMatrix,
}

impl LindbladGenerator {
    pub fn new(
        dim: usize,
        hamiltonian: impl Fn(f64) -> ComplexMatrix + Send + Sync + 'static,
        jumps: Vec<(Box<dyn Fn(f64) -> f64 + Send + Sync>, ComplexMatrix)>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("generator dimension must be positive".into()));
        }
        let jumps = jumps
            .into_iter()
            .map(|(rate, operator)| {
                if operator.dim() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, got: operator.dim() });
                }
                let operator_dag = operator.dagger();
                let dag_times_op = operator_dag.matmul(&operator)?;
                Ok(Jump { rate, operator, operator_dag, dag_times_op })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { dim, hamiltonian: Box::new(hamiltonian), jumps })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// Right-hand side of the master equation:
/// `-i[H, rho] + sum_k gamma_k(t) (L_k rho L_k^dag - 1/2 {L_k^dag L_k, rho})`.
pub fn lindblad_action(g: &LindbladGenerator, t: f64, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    if rho.dim() != g.dim {
        return Err(Error::DimensionMismatch { expected: g.dim, got: rho.dim() });
    }
    let h = (g.hamiltonian)(t);
    if h.dim() != g.dim {
        return Err(Error::DimensionMismatch { expected: g.dim, got: h.dim() });
    }
    let minus_i = Complex64::new(0.0, -1.0);
    let mut out = (&(&h * rho) - &(rho * &h)).scale(minus_i);
    for jump in &g.jumps {
        let rate = (jump.rate)(t);
        if rate == 0.0 {
            continue;
        }
        let sandwich = &(&jump.operator * rho) * &jump.operator_dag;
        let anti = &(&jump.dag_times_op * rho) + &(rho * &jump.dag_times_op);
        let term = &sandwich - &anti.scale_re(0.5);
        out = &out + &term.scale_re(rate);
    }
    Ok(out)
}

fn rk4_propagate(
    g: &LindbladGenerator,
    t0: f64,
    eps: f64,
    steps: usize,
    rho0: ComplexMatrix,
) -> Result<ComplexMatrix> {
    let h = eps / steps as f64;
    let mut rho = rho0;
    for k in 0..steps {
        let t = t0 + k as f64 * h;
        let k1 = lindblad_action(g, t, &rho)?;
        let k2 = lindblad_action(g, t + 0.5 * h, &(&rho + &k1.scale_re(0.5 * h)))?;
        let k3 = lindblad_action(g, t + 0.5 * h, &(&rho + &k2.scale_re(0.5 * h)))?;
        let k4 = lindblad_action(g, t + h, &(&rho + &k3.scale_re(h)))?;
        let incr = &(&k1 + &k4) + &(&k2 + &k3).scale_re(2.0);
        rho = &rho + &incr.scale_re(h / 6.0);
    }
    Ok(rho)
}

/// The intermediate map `L(t, t+eps)` of a time-local generator, obtained by
/// RK4-propagating every matrix unit over `[t, t+eps]` in `steps` substeps.
///
/// Callers must keep rate poles out of the interval; the integrator itself
/// does not check for them.
pub fn intermediate_map(
    g: &LindbladGenerator,
    t: f64,
    eps: f64,
    steps: usize,
) -> Result<Superoperator> {
    if !(eps > 0.0) {
        return Err(Error::NonPositive { name: "eps", value: eps });
    }
    if steps == 0 {
        return Err(Error::InvalidInput("steps must be >= 1".into()));
    }
    let d = g.dim;
    let mut matrix = ComplexMatrix::zeros(d * d);
    for j in 0..d {
        for i in 0..d {
            let propagated = rk4_propagate(g, t, eps, steps, matrix_unit(d, i, j))?;
            let col = vec_column_stack(&propagated);
            for (row, &value) in col.iter().enumerate() {
                matrix.set(row, i + j * d, value);
            }
        }
    }
    Superoperator::from_matrix(d, matrix)
}

/// Choi matrix of a map: unit trace, Hermitian for Hermiticity-preserving
/// maps, and positive semidefinite exactly when the map is completely
/// positive. Negativity of its spectrum is the non-Markovianity signal, so
/// positivity is deliberately not enforced here.
#[derive(Debug, Clone)]
pub struct ChoiMatrix {
    system_dim: usize,
    matrix: ComplexMatrix,
}

impl ChoiMatrix {
    pub fn new(system_dim: usize, matrix: ComplexMatrix) -> Result<Self> {
        if matrix.dim() != system_dim * system_dim {
            return Err(Error::DimensionMismatch {
                expected: system_dim * system_dim,
                got: matrix.dim(),
            });
        }
        Ok(Self { system_dim, matrix })
    }

    pub fn system_dim(&self) -> usize {
        self.system_dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// `(M + M^dagger)/2`; removes the O(1e-12) asymmetry left by numerical
    /// propagation before an eigendecomposition.
    pub fn symmetrized(&self) -> ComplexMatrix {
        self.matrix.hermitian_part()
    }

    /// Ascending eigenvalues of the symmetrized Choi matrix.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let es = self.symmetrized().hermitian_eigen(1e-9)?;
        Ok(es.eigenvalues)
    }
}

/// Projector onto the maximally entangled state `1/sqrt(d) sum_i |ii>`.
pub fn max_entangled_state(d: usize) -> Result<ComplexMatrix> {
    if d < 2 {
        return Err(Error::InvalidInput(format!(
            "maximally entangled state needs dimension >= 2, got {d}"
        )));
    }
    let inv_d = Complex64::new(1.0 / d as f64, 0.0);
    let mut m = ComplexMatrix::zeros(d * d);
    for i in 0..d {
        for j in 0..d {
            m.set(i * d + i, j * d + j, inv_d);
        }
    }
    Ok(m)
}

/// `Choi(L) = [I kron L](|psi><psi|)`, assembled as blocks
/// `(1/d) L(E_ij)` at block position `(i, j)`.
pub fn choi_from_superop(s: &Superoperator) -> ChoiMatrix {
    let d = s.dim();
    let inv_d = 1.0 / d as f64;
    let mut matrix = ComplexMatrix::zeros(d * d);
    for i in 0..d {
        for j in 0..d {
            let block = s.apply(&matrix_unit(d, i, j)).expect("dims match");
            for k in 0..d {
                for l in 0..d {
                    matrix.set(i * d + k, j * d + l, block.get(k, l) * inv_d);
                }
            }
        }
    }
    ChoiMatrix { system_dim: d, matrix }
}

/// Seeded random CPTP map with `kraus_count` Kraus operators.
///
/// Draws standard-normal complex Ginibre matrices, normalizes the set with
/// `S^{-1/2}` where `S = sum_k K_k^dag K_k`, and redraws in the (measure
/// zero) event that `S` is near-singular. ChaCha12 keyed by `seed`, so draws
/// are reproducible within one build.
pub fn random_cptp(d: usize, kraus_count: usize, seed: u64) -> Result<Superoperator> {
    if d == 0 {
        return Err(Error::InvalidInput("system dimension must be positive".into()));
    }
    if kraus_count == 0 || kraus_count > d * d {
        return Err(Error::InvalidInput(format!(
            "kraus_count must be in 1..={}, got {kraus_count}",
            d * d
        )));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    loop {
        let kraus: Vec<ComplexMatrix> = (0..kraus_count)
            .map(|_| {
                let entries = (0..d * d)
                    .map(|_| {
                        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
                    })
                    .collect();
                ComplexMatrix::from_entries(d, entries).expect("entry count matches")
            })
            .collect();

        let mut s = ComplexMatrix::zeros(d);
        for k in &kraus {
            s = &s + &(&k.dagger() * k);
        }
        let es = s.hermitian_eigen(1e-9)?;
        if es.eigenvalues.iter().any(|&l| l < 1e-12) {
            continue; // near-singular normalization; redraw
        }
        let mut inv_sqrt = ComplexMatrix::zeros(d);
        for (m, &lam) in es.eigenvalues.iter().enumerate() {
            let w = 1.0 / lam.sqrt();
            for i in 0..d {
                for j in 0..d {
                    let add = es.eigenvectors.get(i, m)
                        * es.eigenvectors.get(j, m).conj()
                        * w;
                    inv_sqrt.set(i, j, inv_sqrt.get(i, j) + add);
                }
            }
        }
        let normalized: Vec<ComplexMatrix> = kraus.iter().map(|k| k * &inv_sqrt).collect();
        return Superoperator::from_kraus(&normalized);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dephasing::DephasingParams;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn max_entangled_state_qubit_entries() {
        let m = max_entangled_state(2).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if (i == 0 || i == 3) && (j == 0 || j == 3) { 0.5 } else { 0.0 };
                assert_eq!(m.get(i, j), c(expect, 0.0), "entry ({i},{j})");
            }
        }
        assert_eq!(m.trace(), c(1.0, 0.0));
    }

    #[test]
    fn max_entangled_state_is_rank_one_projector() {
        let m = max_entangled_state(3).unwrap();
        assert_eq!(m.trace(), c(1.0, 0.0));
        let es = m.hermitian_eigen(1e-12).unwrap();
        let ones = es.eigenvalues.iter().filter(|&&l| (l - 1.0).abs() < 1e-12).count();
        let zeros = es.eigenvalues.iter().filter(|&&l| l.abs() < 1e-12).count();
        assert_eq!((ones, zeros), (1, 8));
    }

    #[test]
    fn max_entangled_state_rejects_small_dims() {
        assert!(max_entangled_state(1).is_err());
        assert!(max_entangled_state(0).is_err());
    }

    #[test]
    fn choi_of_identity_is_max_entangled() {
        let choi = choi_from_superop(&Superoperator::identity(2));
        let target = max_entangled_state(2).unwrap();
        assert!(choi.matrix().max_abs_diff(&target) < 1e-12);
    }

    #[test]
    fn choi_of_depolarizing_is_maximally_mixed() {
        // rho -> I/2 via the Pauli Kraus set {sigma_i / 2}
        let kraus = vec![
            ComplexMatrix::identity(2).scale_re(0.5),
            ComplexMatrix::pauli_x().scale_re(0.5),
            ComplexMatrix::pauli_y().scale_re(0.5),
            ComplexMatrix::pauli_z().scale_re(0.5),
        ];
        let s = Superoperator::from_kraus(&kraus).unwrap();
        let choi = choi_from_superop(&s);
        let target = ComplexMatrix::identity(4).scale_re(0.25);
        assert!(choi.matrix().max_abs_diff(&target) < 1e-15);
    }

    #[test]
    fn lindblad_action_dephasing_fixed_point() {
        let g = DephasingParams::new(1.0, 1.0, 1e-4).unwrap().generator();
        let rho = ComplexMatrix::identity(2).scale_re(0.5);
        let out = lindblad_action(&g, 0.7, &rho).unwrap();
        assert!(out.max_abs_diff(&ComplexMatrix::zeros(2)) < 1e-15);
    }

    #[test]
    fn lindblad_action_dephasing_decays_coherences() {
        // at t = pi the rate is exactly 2; |+><+| maps to [[0, -2], [-2, 0]]
        let g = DephasingParams::new(1.0, 1.0, 1e-4).unwrap().generator();
        let plus = ComplexMatrix::from_real(2, &[0.5, 0.5, 0.5, 0.5]).unwrap();
        let out = lindblad_action(&g, std::f64::consts::PI, &plus).unwrap();
        let target = ComplexMatrix::from_real(2, &[0.0, -2.0, -2.0, 0.0]).unwrap();
        assert!(out.max_abs_diff(&target) < 1e-12);
    }

    #[test]
    fn lindblad_action_is_traceless() {
        let g = DephasingParams::new(0.8, 1.7, 1e-4).unwrap().generator();
        let rho = ComplexMatrix::from_entries(
            2,
            vec![c(0.6, 0.0), c(0.2, 0.3), c(0.2, -0.3), c(0.4, 0.0)],
        )
        .unwrap();
        let out = lindblad_action(&g, 1.3, &rho).unwrap();
        assert!(out.trace().norm() < 1e-12);
    }

    #[test]
    fn lindblad_action_rejects_dimension_mismatch() {
        let g = DephasingParams::new(1.0, 1.0, 1e-4).unwrap().generator();
        let rho = ComplexMatrix::identity(3);
        assert!(matches!(lindblad_action(&g, 0.0, &rho), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn intermediate_map_of_zero_generator_is_identity() {
        let g = LindbladGenerator::new(2, |_| ComplexMatrix::zeros(2), vec![]).unwrap();
        let s = intermediate_map(&g, 0.3, 1e-2, 4).unwrap();
        assert!(s.matrix().max_abs_diff(Superoperator::identity(2).matrix()) < 1e-15);
    }

    #[test]
    fn intermediate_map_preserves_populations_under_dephasing() {
        let g = DephasingParams::new(1.0, 1.0, 1e-4).unwrap().generator();
        let s = intermediate_map(&g, 2.0, 1e-4, 16).unwrap();
        for i in 0..2 {
            let e = matrix_unit(2, i, i);
            assert!(s.apply(&e).unwrap().max_abs_diff(&e) < 1e-12);
        }
    }

    #[test]
    fn intermediate_map_is_tp_and_hp() {
        let g = DephasingParams::new(1.0, 1.0, 1e-4).unwrap().generator();
        let s = intermediate_map(&g, 4.8, 1e-4, 16).unwrap();
        assert!(s.is_trace_preserving(1e-10));
        assert!(s.is_hermiticity_preserving(1e-10));
    }

    #[test]
    fn intermediate_map_rejects_bad_arguments() {
        let g = DephasingParams::new(1.0, 1.0, 1e-4).unwrap().generator();
        assert!(intermediate_map(&g, 0.0, 0.0, 16).is_err());
        assert!(intermediate_map(&g, 0.0, -1.0, 16).is_err());
        assert!(intermediate_map(&g, 0.0, 1e-4, 0).is_err());
    }

    #[test]
    fn intermediate_maps_compose_for_time_local_generators() {
        let p = DephasingParams::new(1.0, 1.0, 1e-4).unwrap();
        let g = p.generator();
        let t = 1.1;
        let eps = 1e-4;
        let whole = intermediate_map(&g, t, 2.0 * eps, 32).unwrap();
        let first = intermediate_map(&g, t, eps, 16).unwrap();
        let second = intermediate_map(&g, t + eps, eps, 16).unwrap();
        let composed = second.compose(&first).unwrap();
        assert!(whole.matrix().max_abs_diff(composed.matrix()) < 1e-9);
    }

    #[test]
    fn random_cptp_is_reproducible_and_seed_sensitive() {
        let a = random_cptp(2, 3, 7).unwrap();
        let b = random_cptp(2, 3, 7).unwrap();
        let c = random_cptp(2, 3, 8).unwrap();
        assert_eq!(a.matrix().max_abs_diff(b.matrix()), 0.0);
        assert!(a.matrix().max_abs_diff(c.matrix()) > 1e-3);
    }

    #[test]
    fn random_cptp_is_trace_preserving() {
        for seed in 0..8 {
            let s = random_cptp(2, (seed as usize % 4) + 1, seed).unwrap();
            assert!(s.is_trace_preserving(1e-10));
        }
    }

    #[test]
    fn random_cptp_single_kraus_is_unitary_channel() {
        let s = random_cptp(2, 1, 11).unwrap();
        let choi = choi_from_superop(&s);
        let eig = choi.eigenvalues().unwrap();
        // rank-1 pure Choi state
        assert!(eig[..3].iter().all(|l| l.abs() < 1e-9), "{eig:?}");
        assert!((eig[3] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn random_cptp_choi_spectrum_in_unit_interval() {
        for seed in 0..16 {
            let s = random_cptp(2, (seed as usize % 4) + 1, 1000 + seed).unwrap();
            let choi = choi_from_superop(&s);
            assert!((choi.matrix().trace().re - 1.0).abs() < 1e-9);
            let eig = choi.eigenvalues().unwrap();
            assert!(eig.iter().all(|&l| (-1e-10..=1.0 + 1e-10).contains(&l)), "{eig:?}");
        }
    }

    #[test]
    fn random_cptp_rejects_bad_kraus_count() {
        assert!(random_cptp(2, 0, 1).is_err());
        assert!(random_cptp(2, 5, 1).is_err());
    }

    #[test]
    fn vec_unvec_roundtrip() {
        let m = ComplexMatrix::from_entries(
            2,
            vec![c(1.0, 2.0), c(3.0, 4.0), c(5.0, 6.0), c(7.0, 8.0)],
        )
        .unwrap();
        let v = vec_column_stack(&m);
        assert_eq!(v[0], c(1.0, 2.0)); // (0,0)
        assert_eq!(v[1], c(5.0, 6.0)); // (1,0): columns stack first
        assert_eq!(unvec_column_stack(2, &v).unwrap(), m);
    }

    #[test]
    fn kraus_superop_matches_direct_application() {
        // vec(K X K^dag) = (conj(K) kron K) vec(X) under column stacking
        let k = ComplexMatrix::from_entries(
            2,
            vec![c(0.3, 0.1), c(-0.2, 0.4), c(0.9, 0.0), c(0.0, -0.5)],
        )
        .unwrap();
        let s = Superoperator::from_kraus(std::slice::from_ref(&k)).unwrap();
        let x = ComplexMatrix::from_entries(
            2,
            vec![c(0.2, 0.0), c(0.1, -0.7), c(0.4, 0.3), c(-0.6, 0.0)],
        )
        .unwrap();
        let direct = &(&k * &x) * &k.dagger();
        assert!(s.apply(&x).unwrap().max_abs_diff(&direct) < 1e-15);
    }
}
