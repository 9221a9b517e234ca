//! Complex linear-algebra primitives, the built-in Hamiltonian families, and
//! exact unitary propagation on a uniform time grid.
//!
//! Propagation applies the exact per-step unitary `exp(-i*dt*H(t_mid)/hbar)`
//! obtained from a Hermitian eigendecomposition of the midpoint-evaluated
//! Hamiltonian. All built-in families are piecewise constant in time, so the
//! stepper is exact for them (up to roundoff); for a smooth `H(t)` the scheme
//! is the exponential midpoint rule with `O(dt^2)` global error.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Hermiticity tolerance for matrices supplied from outside.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Trace tolerance for density matrices.
pub const TRACE_TOL: f64 = 1e-12;
/// Most negative admissible density-matrix eigenvalue.
pub const EIGENVALUE_FLOOR: f64 = -1e-10;
/// Largest supported Hilbert-space dimension.
pub const MAX_DIM: usize = 64;

#[inline]
pub fn cx(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[cx(0., 0.), cx(1., 0.), cx(1., 0.), cx(0., 0.)])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[cx(0., 0.), cx(0., -1.), cx(0., 1.), cx(0., 0.)])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[cx(1., 0.), cx(0., 0.), cx(0., 0.), cx(-1., 0.)])
}

/// Kronecker product, row-major index convention: `(i, a) -> i * dim_b + a`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub(crate) fn max_abs_entry(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub(crate) fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    if m.nrows() != m.ncols() {
        return false;
    }
    let scale = max_abs_entry(m).max(1.0);
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            if (m[(i, j)] - m[(j, i)].conj()).norm() > tol * scale {
                return false;
            }
        }
    }
    true
}

fn check_hermitian_input(m: &CMatrix, what: &str) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::Shape(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.nrows() < 2 || m.nrows() > MAX_DIM {
        return Err(Error::Shape(format!(
            "{what} dimension must lie in [2, {MAX_DIM}], got {}",
            m.nrows()
        )));
    }
    if !is_hermitian(m, HERMITICITY_TOL) {
        return Err(Error::Model(format!("{what} is not Hermitian within {HERMITICITY_TOL:e}")));
    }
    Ok(())
}

/// Hermitian eigendecomposition with the failure path mapped to [`Error::Numerics`].
pub(crate) fn hermitian_eigen(m: &CMatrix) -> Result<SymmetricEigen<C64, nalgebra::Dyn>> {
    SymmetricEigen::try_new(m.clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerics("Hermitian eigendecomposition did not converge".into()))
}

/// Spectral norm (largest |eigenvalue|) of a Hermitian matrix.
pub(crate) fn spectral_norm(m: &CMatrix) -> Result<f64> {
    let eig = hermitian_eigen(m)?;
    Ok(eig.eigenvalues.iter().fold(0.0, |acc, &e| acc.max(e.abs())))
}

/// A unit-norm complex state vector of dimension >= 2.
///
/// Construction renormalizes, so the 2-norm is 1 within 1e-12 afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: CVector,
}

impl PureState {
    pub fn new(amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() < 2 || amplitudes.len() > MAX_DIM {
            return Err(Error::Shape(format!(
                "state dimension must lie in [2, {MAX_DIM}], got {}",
                amplitudes.len()
            )));
        }
        let norm = amplitudes.norm();
        if !norm.is_finite() || norm < 1e-12 {
            return Err(Error::Model(format!(
                "state vector norm {norm:.3e} cannot be normalized"
            )));
        }
        Ok(Self {
            amplitudes: amplitudes / cx(norm, 0.),
        })
    }

    pub fn from_slice(components: &[C64]) -> Result<Self> {
        Self::new(CVector::from_row_slice(components))
    }

    /// Computational basis state `|k>` of the given dimension.
    pub fn basis_state(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::Shape(format!("basis index {k} out of range for dimension {dim}")));
        }
        let mut v = CVector::zeros(dim);
        v[k] = cx(1., 0.);
        Self::new(v)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    /// Inner product `<self|other>` (conjugate-linear in `self`).
    pub fn overlap(&self, other: &Self) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }
}

/// A d x d density matrix: Hermitian, unit trace, positive semidefinite
/// within the documented tolerances.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        check_hermitian_input(&matrix, "density matrix")?;
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(Error::Model(format!(
                "density matrix trace {trace} differs from 1 beyond {TRACE_TOL:e}"
            )));
        }
        let eig = hermitian_eigen(&matrix)?;
        if let Some(bad) = eig.eigenvalues.iter().find(|&&e| e < EIGENVALUE_FLOOR) {
            return Err(Error::Model(format!(
                "density matrix has negative eigenvalue {bad:.3e}"
            )));
        }
        Ok(Self { matrix })
    }

    pub fn from_pure(state: &PureState) -> Self {
        let v = state.amplitudes();
        // |psi><psi| of a unit vector always passes validation
        Self {
            matrix: v * v.adjoint(),
        }
    }

    /// Mixture `sum_k p_k |k><k|` over computational basis states.
    pub fn from_diagonal(populations: &[f64]) -> Result<Self> {
        let d = populations.len();
        let m = CMatrix::from_fn(d, d, |i, j| {
            if i == j {
                cx(populations[i], 0.)
            } else {
                cx(0., 0.)
            }
        });
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Eigenvalues and eigenvectors sorted by descending eigenvalue, with the
    /// first nonzero component of each eigenvector made real and positive.
    pub fn sorted_eigensystem(&self) -> Result<(Vec<f64>, Vec<CVector>)> {
        let eig = hermitian_eigen(&self.matrix)?;
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&a, &b| {
            eig.eigenvalues[b]
                .partial_cmp(&eig.eigenvalues[a])
                .expect("eigenvalues are finite")
        });
        let mut values = Vec::with_capacity(self.dim());
        let mut vectors = Vec::with_capacity(self.dim());
        for &k in &order {
            values.push(eig.eigenvalues[k]);
            let mut v: CVector = eig.eigenvectors.column(k).into_owned();
            if let Some(lead) = v.iter().find(|z| z.norm() > 1e-12).copied() {
                let phase = lead / cx(lead.norm(), 0.);
                v /= phase;
            }
            vectors.push(v);
        }
        Ok((values, vectors))
    }
}

/// The closed set of time-dependence families supported by the crate.
///
/// Every family is piecewise constant: `Quench` switches its kick term on for
/// `t > 0`, the others do not depend on time at all. The 2 x 2
/// `JaynesCummingsBlock` lives in the joint basis `[|e,n>, |g,n+1>]` of one
/// excitation exchanged between atom and cavity mode.
#[derive(Debug, Clone, PartialEq)]
pub enum HamiltonianFamily {
    Constant {
        h0: CMatrix,
    },
    Quench {
        base: CMatrix,
        kick: CMatrix,
    },
    /// Effective two-level drive `(eps_bar/2) sigma_z + a_bar sigma_x`, with
    /// `eps_bar` and `a_bar` in energy units.
    RwaDrive {
        eps_bar: f64,
        a_bar: f64,
    },
    /// Single-excitation block `hbar*omega*(n + 1/2) I + hbar*lambda*sqrt(n+1) sigma_x`;
    /// `omega` and `lambda` are angular frequencies.
    JaynesCummingsBlock {
        omega: f64,
        lambda: f64,
        n_photons: u32,
    },
}

/// A Hamiltonian family together with the action scale `hbar` (default 1).
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianModel {
    family: HamiltonianFamily,
    hbar: f64,
}

impl HamiltonianModel {
    pub fn constant(h0: CMatrix, hbar: f64) -> Result<Self> {
        check_hermitian_input(&h0, "constant Hamiltonian")?;
        Self::with_family(HamiltonianFamily::Constant { h0 }, hbar)
    }

    pub fn quench(base: CMatrix, kick: CMatrix, hbar: f64) -> Result<Self> {
        check_hermitian_input(&base, "quench base Hamiltonian")?;
        check_hermitian_input(&kick, "quench kick Hamiltonian")?;
        if base.nrows() != kick.nrows() {
            return Err(Error::Shape(format!(
                "quench base ({0}x{0}) and kick ({1}x{1}) dimensions differ",
                base.nrows(),
                kick.nrows()
            )));
        }
        Self::with_family(HamiltonianFamily::Quench { base, kick }, hbar)
    }

    pub fn rwa_drive(eps_bar: f64, a_bar: f64, hbar: f64) -> Result<Self> {
        if !eps_bar.is_finite() || !a_bar.is_finite() {
            return Err(Error::Model("RWA drive parameters must be finite".into()));
        }
        Self::with_family(HamiltonianFamily::RwaDrive { eps_bar, a_bar }, hbar)
    }

    pub fn jaynes_cummings_block(omega: f64, lambda: f64, n_photons: u32, hbar: f64) -> Result<Self> {
        if !omega.is_finite() || !lambda.is_finite() {
            return Err(Error::Model("Jaynes-Cummings parameters must be finite".into()));
        }
        Self::with_family(
            HamiltonianFamily::JaynesCummingsBlock {
                omega,
                lambda,
                n_photons,
            },
            hbar,
        )
    }

    fn with_family(family: HamiltonianFamily, hbar: f64) -> Result<Self> {
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::Model(format!("hbar must be positive, got {hbar}")));
        }
        Ok(Self { family, hbar })
    }

    pub fn family(&self) -> &HamiltonianFamily {
        &self.family
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn dim(&self) -> usize {
        match &self.family {
            HamiltonianFamily::Constant { h0 } => h0.nrows(),
            HamiltonianFamily::Quench { base, .. } => base.nrows(),
            HamiltonianFamily::RwaDrive { .. } | HamiltonianFamily::JaynesCummingsBlock { .. } => 2,
        }
    }

    /// The Hamiltonian matrix at time `t >= 0`.
    ///
    /// A `Quench` evaluates to its base term at exactly `t = 0` and to
    /// base + kick for `t > 0`.
    pub fn evaluate(&self, t: f64) -> Result<CMatrix> {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::Domain(format!("Hamiltonian requested at invalid time {t}")));
        }
        Ok(match &self.family {
            HamiltonianFamily::Quench { base, .. } if t == 0.0 => base.clone(),
            _ => self.evaluate_dyn(t),
        })
    }

    /// The generator actually used for dynamics at time `t`: identical to
    /// [`Self::evaluate`] except that `t = 0` carries the `t -> 0+` limit, so
    /// a quench kick is already active on the first sample.
    pub fn evaluate_dyn(&self, _t: f64) -> CMatrix {
        match &self.family {
            HamiltonianFamily::Constant { h0 } => h0.clone(),
            HamiltonianFamily::Quench { base, kick } => base + kick,
            HamiltonianFamily::RwaDrive { eps_bar, a_bar } => {
                pauli_z() * cx(eps_bar / 2.0, 0.) + pauli_x() * cx(*a_bar, 0.)
            }
            HamiltonianFamily::JaynesCummingsBlock {
                omega,
                lambda,
                n_photons,
            } => {
                let n = f64::from(*n_photons);
                let diag = self.hbar * omega * (n + 0.5);
                let coupling = self.hbar * lambda * (n + 1.0).sqrt();
                CMatrix::identity(2, 2) * cx(diag, 0.) + pauli_x() * cx(coupling, 0.)
            }
        }
    }

    /// Upper bound on the spectral norm of `H(t)` over `t >= 0`.
    pub fn spectral_norm_bound(&self) -> Result<f64> {
        match &self.family {
            HamiltonianFamily::Constant { h0 } => spectral_norm(h0),
            HamiltonianFamily::Quench { base, kick } => {
                Ok(spectral_norm(base)?.max(spectral_norm(&(base + kick))?))
            }
            HamiltonianFamily::RwaDrive { eps_bar, a_bar } => {
                Ok(((eps_bar / 2.0).powi(2) + a_bar.powi(2)).sqrt())
            }
            HamiltonianFamily::JaynesCummingsBlock {
                omega,
                lambda,
                n_photons,
            } => {
                let n = f64::from(*n_photons);
                let diag = self.hbar * omega * (n + 0.5);
                let coupling = self.hbar * lambda * (n + 1.0).sqrt();
                Ok(diag.abs() + coupling.abs())
            }
        }
    }

    /// Lift the model to the joint space `H_S (x) I_A` with an ancilla of
    /// dimension `d_a`, preserving the quench switching behaviour.
    pub fn tensor_identity(&self, d_a: usize) -> Result<Self> {
        if d_a == 0 {
            return Err(Error::Shape("ancilla dimension must be positive".into()));
        }
        let joint_dim = self.dim() * d_a;
        if joint_dim > MAX_DIM {
            return Err(Error::Shape(format!(
                "joint dimension {joint_dim} exceeds the supported maximum {MAX_DIM}"
            )));
        }
        if d_a == 1 {
            return Ok(self.clone());
        }
        let eye = CMatrix::identity(d_a, d_a);
        let family = match &self.family {
            HamiltonianFamily::Constant { h0 } => HamiltonianFamily::Constant { h0: kron(h0, &eye) },
            HamiltonianFamily::Quench { base, kick } => HamiltonianFamily::Quench {
                base: kron(base, &eye),
                kick: kron(kick, &eye),
            },
            HamiltonianFamily::RwaDrive { .. } | HamiltonianFamily::JaynesCummingsBlock { .. } => {
                HamiltonianFamily::Constant {
                    h0: kron(&self.evaluate_dyn(0.0), &eye),
                }
            }
        };
        Self::with_family(family, self.hbar)
    }
}

/// A uniformly sampled solution of the Schroedinger equation.
#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<PureState>,
    model: HamiltonianModel,
    step: f64,
}

impl Trajectory {
    /// Assemble a trajectory from raw parts.
    ///
    /// The grid must start at 0 and be uniformly spaced; the states must all
    /// share the model dimension. Intended for resampled or phase-adjusted
    /// copies of propagated trajectories; `propagate` is the normal entry point.
    pub fn from_parts(times: Vec<f64>, states: Vec<PureState>, model: HamiltonianModel) -> Result<Self> {
        if times.len() != states.len() {
            return Err(Error::Shape(format!(
                "{} grid times but {} states",
                times.len(),
                states.len()
            )));
        }
        if times.len() < 2 {
            return Err(Error::Shape("a trajectory needs at least two samples".into()));
        }
        if times[0] != 0.0 {
            return Err(Error::Model(format!("grid must start at t = 0, got {}", times[0])));
        }
        let step = times[1] - times[0];
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::Model(format!("grid spacing {step} is not positive")));
        }
        let scale = times[times.len() - 1].abs().max(1.0);
        for w in times.windows(2) {
            if ((w[1] - w[0]) - step).abs() > 1e-9 * scale {
                return Err(Error::Model("grid spacing is not uniform".into()));
            }
        }
        let dim = model.dim();
        if states.iter().any(|s| s.dim() != dim) {
            return Err(Error::Shape("state dimension differs from model dimension".into()));
        }
        Ok(Self {
            times,
            states,
            model,
            step,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[PureState] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &PureState {
        &self.states[i]
    }

    pub fn model(&self) -> &HamiltonianModel {
        &self.model
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn t_final(&self) -> f64 {
        *self.times.last().expect("trajectory is never empty")
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    pub fn initial(&self) -> &PureState {
        &self.states[0]
    }

    pub fn final_state(&self) -> &PureState {
        self.states.last().expect("trajectory is never empty")
    }

    /// `<psi(t_i)|H(t_i)|psi(t_i)>` on the grid (quench kick active at t = 0).
    pub fn expectation_profile(&self) -> Result<Vec<f64>> {
        self.times
            .iter()
            .zip(&self.states)
            .map(|(&t, s)| expectation(s, &self.model.evaluate_dyn(t)))
            .collect()
    }

    /// Energy fluctuation `Delta H(t_i)` on the grid.
    pub fn fluctuation_profile(&self) -> Result<Vec<f64>> {
        self.times
            .iter()
            .zip(&self.states)
            .map(|(&t, s)| energy_fluctuation(s, &self.model.evaluate_dyn(t)))
            .collect()
    }

    /// Largest deviation of any grid state from unit norm.
    pub fn max_norm_drift(&self) -> f64 {
        self.states
            .iter()
            .map(|s| (s.norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Minimum admissible number of steps for any propagation.
pub const MIN_STEPS: usize = 64;

fn resolution_requirement(norm_bound: f64, t_final: f64, hbar: f64) -> (usize, f64) {
    let load = norm_bound * t_final / (hbar * PI);
    let required = MIN_STEPS.max(16 * load.ceil() as usize);
    (required, load)
}

/// Exact midpoint-unitary stepper over an arbitrary generator function.
///
/// Consecutive equal midpoint matrices reuse the cached step unitary, so
/// piecewise-constant generators cost one eigendecomposition total.
fn propagate_states<F>(
    h_at: F,
    hbar: f64,
    initial: &PureState,
    dt: f64,
    n_steps: usize,
) -> Result<Vec<PureState>>
where
    F: Fn(f64) -> CMatrix,
{
    let mut states = Vec::with_capacity(n_steps + 1);
    states.push(initial.clone());
    let mut cached: Option<(CMatrix, CMatrix)> = None;
    let mut psi = initial.amplitudes().clone();
    for k in 0..n_steps {
        let t_mid = (k as f64 + 0.5) * dt;
        let h = h_at(t_mid);
        let reuse = cached.as_ref().is_some_and(|(hc, _)| hc == &h);
        if !reuse {
            let eig = hermitian_eigen(&h)?;
            let mut u = eig.eigenvectors.clone();
            for (mut col, &e) in u.column_iter_mut().zip(eig.eigenvalues.iter()) {
                let phase = cx(0., -e * dt / hbar).exp();
                col *= phase;
            }
            let u = u * eig.eigenvectors.adjoint();
            cached = Some((h, u));
        }
        let (_, u) = cached.as_ref().expect("cache was just filled");
        psi = u * psi;
        // project back onto unit norm so roundoff cannot accumulate
        let norm = psi.norm();
        psi /= cx(norm, 0.);
        states.push(PureState::new(psi.clone())?);
    }
    Ok(states)
}

/// Propagate `initial` under `model` from 0 to `t_final` in `n_steps` uniform
/// steps (rounded up to even so composite Simpson quadrature applies).
///
/// Requires `n_steps >= 64` and enough steps to resolve the fastest phase:
/// `n_steps >= 16 * ceil(|H|_max * t_final / (hbar * pi))`.
pub fn propagate(
    model: &HamiltonianModel,
    initial: &PureState,
    t_final: f64,
    n_steps: usize,
) -> Result<Trajectory> {
    if initial.dim() != model.dim() {
        return Err(Error::Shape(format!(
            "initial state dimension {} differs from model dimension {}",
            initial.dim(),
            model.dim()
        )));
    }
    if !(t_final.is_finite() && t_final > 0.0) {
        return Err(Error::Domain(format!("t_final must be positive, got {t_final}")));
    }
    let n = n_steps + n_steps % 2;
    let norm_bound = model.spectral_norm_bound()?;
    let (required, load) = resolution_requirement(norm_bound, t_final, model.hbar());
    if n_steps < required {
        return Err(Error::Resolution {
            given: n_steps,
            required,
            load,
        });
    }
    let dt = t_final / n as f64;
    let states = propagate_states(|t| model.evaluate_dyn(t), model.hbar(), initial, dt, n)?;
    let times: Vec<f64> = (0..=n).map(|i| i as f64 * dt).collect();
    Trajectory::from_parts(times, states, model.clone())
}

#[cfg(test)]
pub(crate) fn propagate_custom<F>(
    h_at: F,
    hbar: f64,
    initial: &PureState,
    t_final: f64,
    n_steps: usize,
) -> Result<Vec<PureState>>
where
    F: Fn(f64) -> CMatrix,
{
    propagate_states(h_at, hbar, initial, t_final / n_steps as f64, n_steps)
}

/// `<psi|M|psi>` for Hermitian `M`; the imaginary part must vanish within 1e-10.
pub fn expectation(state: &PureState, m: &CMatrix) -> Result<f64> {
    if m.nrows() != m.ncols() || m.nrows() != state.dim() {
        return Err(Error::Shape(format!(
            "operator is {}x{} but state dimension is {}",
            m.nrows(),
            m.ncols(),
            state.dim()
        )));
    }
    let value = state.amplitudes().dotc(&(m * state.amplitudes()));
    if value.im.abs() >= 1e-10 {
        return Err(Error::Numerics(format!(
            "expectation value {value} has non-negligible imaginary part; operator not Hermitian?"
        )));
    }
    Ok(value.re)
}

/// Energy fluctuation `sqrt(<H^2> - <H>^2)`, clamped to 0 when the variance
/// is a negative roundoff residue in `(-1e-12, 0)`.
pub fn energy_fluctuation(state: &PureState, h: &CMatrix) -> Result<f64> {
    let mean = expectation(state, h)?;
    let h_psi = h * state.amplitudes();
    let second = h_psi.dotc(&h_psi).re;
    let variance = second - mean * mean;
    if variance < -1e-12 {
        return Err(Error::Numerics(format!(
            "variance {variance:.3e} is negative beyond roundoff"
        )));
    }
    Ok(variance.max(0.0).sqrt())
}

/// Trace out the ancilla factor of a joint pure state on `d_s * d_a`
/// dimensions, index convention `(i, a) -> i * d_a + a`.
pub fn partial_trace_ancilla(joint: &PureState, d_s: usize, d_a: usize) -> Result<DensityMatrix> {
    if d_s < 2 || d_a < 1 || joint.dim() != d_s * d_a {
        return Err(Error::Shape(format!(
            "joint dimension {} does not factor as {d_s} x {d_a}",
            joint.dim()
        )));
    }
    let v = joint.amplitudes();
    let rho = CMatrix::from_fn(d_s, d_s, |i, j| {
        (0..d_a).map(|a| v[i * d_a + a] * v[j * d_a + a].conj()).sum()
    });
    DensityMatrix::new(rho)
}
