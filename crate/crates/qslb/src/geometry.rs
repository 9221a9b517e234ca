//! Gauge-invariant geometric quantities of a trajectory: Pancharatnam,
//! dynamical, and geometric phases, the reference section and horizontal
//! lift, the two curve lengths, and the Fubini-Study distances.
//!
//! All derivatives use second-order stencils on the uniform grid (central in
//! the interior, one-sided at the ends) and all length integrals use
//! composite Simpson quadrature, so every estimator converges as `O(dt^2)`
//! and is testable by step halving.

use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quantum::{cx, CVector, PureState, Trajectory};

/// Overlap modulus below which the reference section is declared singular.
pub const ORTHOGONALITY_CUTOFF: f64 = 1e-6;

/// Noise floor for the parallel-transport continuation at isolated
/// orthogonal grid points (see [`reference_section`]).
const PARALLEL_IMAG_TOL: f64 = 1e-9;

/// Wrap an angle into `(-pi, pi]`.
pub fn wrap_angle(x: f64) -> f64 {
    let r = x.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// Composite Simpson rule on a uniform grid; an odd interval count is closed
/// with the 3/8 rule on the final three intervals.
pub(crate) fn simpson(dx: f64, f: &[f64]) -> f64 {
    let n = f.len() - 1;
    assert!(n >= 2, "Simpson quadrature needs at least three samples");
    let even = if n % 2 == 0 { n } else { n - 3 };
    let mut sum = 0.0;
    if even >= 2 {
        sum += f[0] + f[even];
        for (i, &v) in f.iter().enumerate().take(even).skip(1) {
            sum += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
        }
        sum *= dx / 3.0;
    }
    if even < n {
        sum += 3.0 * dx / 8.0 * (f[n - 3] + 3.0 * f[n - 2] + 3.0 * f[n - 1] + f[n]);
    }
    sum
}

pub(crate) fn trapezoid(dx: f64, f: &[f64]) -> f64 {
    let inner: f64 = f[1..f.len() - 1].iter().sum();
    dx * (0.5 * (f[0] + f[f.len() - 1]) + inner)
}

/// Second-order derivative estimates of a sampled curve: central differences
/// in the interior, one-sided three-point stencils at the ends.
fn derivative_vectors(states: &[PureState], dx: f64) -> Vec<CVector> {
    let n = states.len();
    let s = |i: usize| states[i].amplitudes();
    let mut out = Vec::with_capacity(n);
    out.push((s(1) * cx(4.0, 0.) - s(2) - s(0) * cx(3.0, 0.)) / cx(2.0 * dx, 0.));
    for i in 1..n - 1 {
        out.push((s(i + 1) - s(i - 1)) / cx(2.0 * dx, 0.));
    }
    out.push((s(n - 1) * cx(3.0, 0.) - s(n - 2) * cx(4.0, 0.) + s(n - 3)) / cx(2.0 * dx, 0.));
    out
}

fn uniform_step(times: &[f64]) -> Result<f64> {
    if times.len() < 2 {
        return Err(Error::Shape("need at least two grid points".into()));
    }
    let dx = times[1] - times[0];
    if !(dx.is_finite() && dx > 0.0) {
        return Err(Error::Model(format!("grid spacing {dx} is not positive")));
    }
    let scale = times[times.len() - 1].abs().max(1.0);
    if times.windows(2).any(|w| ((w[1] - w[0]) - dx).abs() > 1e-9 * scale) {
        return Err(Error::Model("grid spacing is not uniform".into()));
    }
    Ok(dx)
}

/// Total length of a sampled curve, `integral |d psi/dt| dt`.
///
/// Needs at least 65 grid points so the `O(dt^2)` stencils have something to
/// work with; coarser inputs give [`Error::Resolution`].
pub fn curve_length(times: &[f64], states: &[PureState]) -> Result<f64> {
    if times.len() != states.len() {
        return Err(Error::Shape(format!(
            "{} grid times but {} states",
            times.len(),
            states.len()
        )));
    }
    if times.len() < 65 {
        return Err(Error::Resolution {
            given: times.len().saturating_sub(1),
            required: 64,
            load: f64::NAN,
        });
    }
    let dx = uniform_step(times)?;
    let speeds: Vec<f64> = derivative_vectors(states, dx).iter().map(|d| d.norm()).collect();
    Ok(simpson(dx, &speeds))
}

/// Relative phase `Arg <a|b>` between two non-orthogonal states, in `(-pi, pi]`.
pub fn pancharatnam_phase(a: &PureState, b: &PureState) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::Shape(format!(
            "state dimensions {} and {} differ",
            a.dim(),
            b.dim()
        )));
    }
    let z = a.overlap(b);
    if z.norm() <= ORTHOGONALITY_CUTOFF {
        return Err(Error::Orthogonality {
            t: f64::NAN,
            overlap: z.norm(),
        });
    }
    let arg = z.arg();
    Ok(if arg <= -PI { arg + 2.0 * PI } else { arg })
}

/// Bargmann half-distance `arccos |<a|b>|` in `[0, pi/2]`; half the geodesic
/// Fubini-Study distance between the two rays.
pub fn bargmann_half_distance(a: &PureState, b: &PureState) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::Shape(format!(
            "state dimensions {} and {} differ",
            a.dim(),
            b.dim()
        )));
    }
    Ok(a.overlap(b).norm().clamp(0.0, 1.0).acos())
}

/// The parallel-transported (horizontal) lift of a trajectory.
///
/// Satisfies `Im <psi_bar | d psi_bar/dt> = 0` at every grid point up to the
/// stencil error of the grid.
#[derive(Debug, Clone)]
pub struct HorizontalCurve {
    times: Vec<f64>,
    bar_states: Vec<PureState>,
    step: f64,
}

impl HorizontalCurve {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[PureState] {
        &self.bar_states
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Largest parallel-transport residual `|Im <psi_bar|d psi_bar/dt>|` over
    /// interior grid points (central differences).
    pub fn max_transport_residual(&self) -> f64 {
        let derivs = derivative_vectors(&self.bar_states, self.step);
        self.bar_states
            .iter()
            .zip(&derivs)
            .skip(1)
            .take(self.bar_states.len().saturating_sub(2))
            .map(|(s, d)| s.amplitudes().dotc(d).im.abs())
            .fold(0.0, f64::max)
    }
}

/// Accumulated local phase of the sampled curve. Increment `i` is
/// `Arg <psi_i | psi_{i+1}>`; for a Schroedinger trajectory this telescopes
/// the dynamical phase `-(1/hbar) integral <H> dt` to second order.
fn accumulated_local_phase(states: &[PureState]) -> Result<Vec<f64>> {
    let mut acc = Vec::with_capacity(states.len());
    acc.push(0.0);
    let mut total = 0.0;
    for w in states.windows(2) {
        let overlap = w[0].overlap(&w[1]);
        if overlap.norm() < 1e-12 {
            return Err(Error::Numerics(
                "consecutive trajectory samples are orthogonal; grid far too coarse".into(),
            ));
        }
        total += overlap.arg();
        acc.push(total);
    }
    Ok(acc)
}

/// Horizontal lift: counter-rotate each sample by the accumulated local
/// phase, so the lifted curve picks up no phase between neighbouring points.
///
/// The accumulated local phase equals the dynamical phase
/// `-(1/hbar) integral <psi|H|psi> dt` for Schroedinger trajectories (they
/// agree to `O(dt^2)`, see [`dynamical_phase`]), but is computed from the
/// curve itself so the lift transforms covariantly under gauge changes
/// `psi -> e^{i a(t)} psi`.
pub fn horizontal_lift(traj: &Trajectory) -> Result<HorizontalCurve> {
    let phases = accumulated_local_phase(traj.states())?;
    let bar_states = traj
        .states()
        .iter()
        .zip(&phases)
        .map(|(s, &theta)| {
            // e^{-i theta} undoes the local phase accumulated up to t_i
            PureState::new(s.amplitudes() * cx(0., -theta).exp())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HorizontalCurve {
        times: traj.times().to_vec(),
        bar_states,
        step: traj.step(),
    })
}

/// The reference section: the lift of the trajectory that stays in phase
/// with its initial point.
#[derive(Debug, Clone)]
pub struct ReferenceSection {
    times: Vec<f64>,
    chi_states: Vec<PureState>,
    overlap_moduli: Vec<f64>,
    step: f64,
    parallel_transport_continued: bool,
}

impl ReferenceSection {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[PureState] {
        &self.chi_states
    }

    /// `|<psi(0)|psi(t_i)>|` per grid point.
    pub fn overlap_moduli(&self) -> &[f64] {
        &self.overlap_moduli
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// True when isolated orthogonal grid points were crossed by continuity
    /// of an exactly parallel-transported curve.
    pub fn parallel_transport_continued(&self) -> bool {
        self.parallel_transport_continued
    }

    /// `-Im <chi | d chi/dt>` per grid point: the connection form along the
    /// section, whose integral is the geometric phase.
    fn connection_profile(&self) -> Vec<f64> {
        let derivs = derivative_vectors(&self.chi_states, self.step);
        self.chi_states
            .iter()
            .zip(&derivs)
            .map(|(s, d)| -s.amplitudes().dotc(d).im)
            .collect()
    }
}

/// Construct the reference section `chi(t) = (<psi(t)|psi(0)> / |...|) psi(t)`.
///
/// The phase factor is applied relative to the horizontal lift: with
/// `w(t) = <psi_bar(0)|psi_bar(t)>` the section is
/// `chi = (conj(w)/|w|) psi_bar`, which is algebraically identical to the
/// direct formula but lets an exactly parallel-transported curve (`w` real
/// and positive wherever it is resolvable) be continued through isolated
/// grid points of vanishing overlap, where the pointwise phase factor is
/// pure noise. Such points arise at the far turning point of resonant
/// two-level sweeps; anywhere else a sub-cutoff overlap is a genuine
/// singularity of the construction and yields [`Error::Orthogonality`]
/// naming the first offending grid time.
pub fn reference_section(traj: &Trajectory) -> Result<ReferenceSection> {
    let lift = horizontal_lift(traj)?;
    let w: Vec<C64> = lift.states().iter().map(|s| lift.states()[0].overlap(s)).collect();
    let moduli: Vec<f64> = w.iter().map(|z| z.norm()).collect();

    let singular = moduli.iter().any(|&m| m <= ORTHOGONALITY_CUTOFF);
    let (chi_states, continued) = if !singular {
        let chi = lift
            .states()
            .iter()
            .zip(&w)
            .map(|(s, z)| PureState::new(s.amplitudes() * (z.conj() / cx(z.norm(), 0.))))
            .collect::<Result<Vec<_>>>()?;
        (chi, false)
    } else {
        let parallel = w
            .iter()
            .zip(&moduli)
            .filter(|(_, &m)| m > ORTHOGONALITY_CUTOFF)
            .all(|(z, _)| z.re > 0.0 && z.im.abs() <= PARALLEL_IMAG_TOL);
        if !parallel {
            let (i, &m) = moduli
                .iter()
                .enumerate()
                .find(|(_, &m)| m <= ORTHOGONALITY_CUTOFF)
                .expect("a sub-cutoff modulus exists");
            return Err(Error::Orthogonality {
                t: traj.times()[i],
                overlap: m,
            });
        }
        // in-phase throughout: the section coincides with the horizontal lift
        (lift.states().to_vec(), true)
    };

    Ok(ReferenceSection {
        times: traj.times().to_vec(),
        chi_states,
        overlap_moduli: moduli,
        step: traj.step(),
        parallel_transport_continued: continued,
    })
}

/// Horizontal-curve length through the energy fluctuation,
/// `integral Delta H(t)/hbar dt`.
pub fn horizontal_length_via_fluctuation(traj: &Trajectory) -> Result<f64> {
    let profile = traj.fluctuation_profile()?;
    Ok(simpson(traj.step(), &profile) / traj.model().hbar())
}

/// Reference-section length through the identity
/// `|d chi|^2 = |d psi_bar|^2 + (Im <chi|d chi>)^2`, cross-validating the
/// direct finite-difference length.
pub fn reference_length_via_identity(traj: &Trajectory) -> Result<f64> {
    let section = reference_section(traj)?;
    let fluct = traj.fluctuation_profile()?;
    let hbar = traj.model().hbar();
    let connection = section.connection_profile();
    let integrand: Vec<f64> = fluct
        .iter()
        .zip(&connection)
        .map(|(&dh, &c)| ((dh / hbar).powi(2) + c * c).sqrt())
        .collect();
    Ok(simpson(traj.step(), &integrand))
}

/// Geometric phase `i integral <chi|d chi>` along the reference section,
/// oriented so that it equals total minus dynamical phase (mod 2 pi).
pub fn geometric_phase(traj: &Trajectory) -> Result<f64> {
    let section = reference_section(traj)?;
    Ok(trapezoid(section.step(), &section.connection_profile()))
}

/// Dynamical phase `-(1/hbar) integral <psi(t)|H(t)|psi(t)> dt` accumulated
/// by trapezoidal quadrature on the grid.
pub fn dynamical_phase(traj: &Trajectory) -> Result<f64> {
    let profile = traj.expectation_profile()?;
    Ok(-trapezoid(traj.step(), &profile) / traj.model().hbar())
}

pub(crate) fn time_averaged_fluctuation(traj: &Trajectory) -> Result<f64> {
    let profile = traj.fluctuation_profile()?;
    Ok(simpson(traj.step(), &profile) / traj.t_final())
}

/// The aggregated geometric quantities of one trajectory.
///
/// `phase_total` (and with it the decomposition check) exists only when the
/// endpoints are non-orthogonal; the lengths and the geometric phase are
/// defined regardless.
#[derive(Debug, Clone)]
pub struct GeometryReport {
    /// Bargmann half-distance between the endpoint states (rad).
    pub s0_half: f64,
    /// Length of the horizontal curve.
    pub l_horizontal: f64,
    /// Length of the reference section (direct finite-difference value).
    pub l_reference: f64,
    /// Pancharatnam phase between the endpoints, when defined (rad).
    pub phase_total: Option<f64>,
    /// Dynamical phase (rad).
    pub phase_dynamical: f64,
    /// Geometric phase from the connection form (rad).
    pub phase_geometric: f64,
    /// Time-averaged energy fluctuation.
    pub mean_fluctuation: f64,
}

/// Compute every geometric quantity of the trajectory in one pass.
pub fn geometry_report(traj: &Trajectory) -> Result<GeometryReport> {
    let section = reference_section(traj)?;
    let lift = horizontal_lift(traj)?;
    let s0_half = bargmann_half_distance(traj.initial(), traj.final_state())?;
    let l_horizontal = curve_length(lift.times(), lift.states())?;
    let l_reference = curve_length(section.times(), section.states())?;
    let phase_geometric = trapezoid(section.step(), &section.connection_profile());
    let phase_dynamical = dynamical_phase(traj)?;
    let phase_total = pancharatnam_phase(traj.initial(), traj.final_state()).ok();
    Ok(GeometryReport {
        s0_half,
        l_horizontal,
        l_reference,
        phase_total,
        phase_dynamical,
        phase_geometric,
        mean_fluctuation: time_averaged_fluctuation(traj)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{
        pauli_x, pauli_z, propagate, CMatrix, HamiltonianModel, PureState,
    };
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    const SPIN_T: f64 = PI / (2.0 * std::f64::consts::SQRT_2);

    fn spin_quench_traj(n_steps: usize) -> Trajectory {
        let model = HamiltonianModel::quench(pauli_z(), pauli_x(), 1.0).unwrap();
        let initial = PureState::basis_state(2, 0).unwrap();
        propagate(&model, &initial, SPIN_T, n_steps).unwrap()
    }

    fn jc_traj(t_final: f64) -> Trajectory {
        let model = HamiltonianModel::jaynes_cummings_block(1.0, 1.0, 0, 1.0).unwrap();
        let initial = PureState::basis_state(2, 1).unwrap();
        propagate(&model, &initial, t_final, 4096).unwrap()
    }

    fn stationary_traj() -> Trajectory {
        let model = HamiltonianModel::constant(pauli_z(), 1.0).unwrap();
        let initial = PureState::basis_state(2, 0).unwrap();
        propagate(&model, &initial, 2.0, 256).unwrap()
    }

    #[test]
    fn pancharatnam_examples() {
        let a = PureState::from_slice(&[cx(0.6, 0.2), cx(0.5, -0.3)]).unwrap();
        assert_abs_diff_eq!(pancharatnam_phase(&a, &a).unwrap(), 0.0, epsilon = 1e-12);

        let b = PureState::new(a.amplitudes() * cx(0., 0.3).exp()).unwrap();
        assert_abs_diff_eq!(pancharatnam_phase(&a, &b).unwrap(), 0.3, epsilon = 1e-12);

        // <0 | (|0> - i|1>)/sqrt(2)> = 1/sqrt(2), purely real
        let up = PureState::basis_state(2, 0).unwrap();
        let c = PureState::from_slice(&[cx(1., 0.), cx(0., -1.)]).unwrap();
        assert_abs_diff_eq!(pancharatnam_phase(&up, &c).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn pancharatnam_rejects_orthogonal_states() {
        let up = PureState::basis_state(2, 0).unwrap();
        let down = PureState::basis_state(2, 1).unwrap();
        assert!(matches!(
            pancharatnam_phase(&up, &down),
            Err(Error::Orthogonality { .. })
        ));
    }

    #[test]
    fn bargmann_examples() {
        let a = PureState::from_slice(&[cx(0.3, 0.4), cx(0.5, -0.1)]).unwrap();
        // arccos near 1 turns unit roundoff into ~1e-8
        assert_abs_diff_eq!(bargmann_half_distance(&a, &a).unwrap(), 0.0, epsilon = 1e-7);

        let up = PureState::basis_state(2, 0).unwrap();
        let down = PureState::basis_state(2, 1).unwrap();
        assert_abs_diff_eq!(bargmann_half_distance(&up, &down).unwrap(), FRAC_PI_2, epsilon = 1e-12);

        let plus = PureState::from_slice(&[cx(1., 0.), cx(1., 0.)]).unwrap();
        assert_abs_diff_eq!(bargmann_half_distance(&up, &plus).unwrap(), FRAC_PI_4, epsilon = 1e-12);
    }

    #[test]
    fn simpson_is_exact_on_cubics() {
        let n = 64;
        let dx = 0.75 / n as f64;
        let f: Vec<f64> = (0..=n)
            .map(|i| {
                let x = i as f64 * dx;
                1.0 + 2.0 * x - x * x + 0.5 * x * x * x
            })
            .collect();
        let antiderivative =
            |x: f64| x + x.powi(2) - x.powi(3) / 3.0 + x.powi(4) / 8.0;
        assert_abs_diff_eq!(simpson(dx, &f), antiderivative(0.75), epsilon = 1e-13);
        // an odd interval count goes through the 3/8 tail and stays exact
        assert_abs_diff_eq!(simpson(dx, &f[..n]), antiderivative(63.0 * dx), epsilon = 1e-13);
    }

    #[test]
    fn constant_sequence_has_zero_length() {
        let traj = stationary_traj();
        let l = curve_length(traj.times(), &vec![traj.initial().clone(); traj.len()]).unwrap();
        assert_abs_diff_eq!(l, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn curve_length_rejects_short_grids() {
        let traj = stationary_traj();
        assert!(matches!(
            curve_length(&traj.times()[..32], &traj.states()[..32]),
            Err(Error::Resolution { .. })
        ));
    }

    #[test]
    fn stationary_trajectory_has_trivial_geometry() {
        let traj = stationary_traj();
        let section = reference_section(&traj).unwrap();
        for chi in section.states() {
            assert!((traj.initial().overlap(chi) - cx(1., 0.)).norm() < 1e-10);
        }
        let lift = horizontal_lift(&traj).unwrap();
        for bar in lift.states() {
            assert!((traj.initial().overlap(bar) - cx(1., 0.)).norm() < 1e-10);
        }
        let report = geometry_report(&traj).unwrap();
        assert_abs_diff_eq!(report.s0_half, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(report.l_horizontal, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(report.l_reference, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(report.phase_geometric, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn spin_quench_reference_section_matches_the_closed_form() {
        let traj = spin_quench_traj(1024);
        let section = reference_section(&traj).unwrap();
        let omega = std::f64::consts::SQRT_2;
        let b = 1.0 / omega;
        for (&t, chi) in section.times().iter().zip(section.states()) {
            let (c, s) = ((omega * t).cos(), (omega * t).sin());
            let phase = cx(c, b * s) / cx((c * c + b * b * s * s).sqrt(), 0.);
            let psi = CVector::from_row_slice(&[cx(c, -b * s), cx(0., -b * s)]);
            let expected = psi * phase;
            let diff = (chi.amplitudes() - &expected).norm();
            assert!(diff < 1e-8, "closed-form mismatch {diff:.2e} at t = {t}");
        }
    }

    #[test]
    fn spin_quench_lengths_match_the_worked_values() {
        let traj = spin_quench_traj(4096);
        let lift = horizontal_lift(&traj).unwrap();
        let section = reference_section(&traj).unwrap();
        let l_bar = curve_length(lift.times(), lift.states()).unwrap();
        let l_chi = curve_length(section.times(), section.states()).unwrap();
        assert_abs_diff_eq!(l_bar, 1.1107, epsilon = 2e-3);
        assert_abs_diff_eq!(l_chi, 1.2526, epsilon = 2e-3);
        assert_abs_diff_eq!(
            horizontal_length_via_fluctuation(&traj).unwrap(),
            1.1107,
            epsilon = 2e-3
        );
        assert_abs_diff_eq!(reference_length_via_identity(&traj).unwrap(), 1.2526, epsilon = 2e-3);
    }

    #[test]
    fn reference_length_agrees_with_the_closed_form_integrand() {
        // the reference-section speed for the symmetric quench reduces to
        // sqrt(2 - 4 cos^2(sqrt(2) t) / (1 + cos^2(sqrt(2) t))^2)
        let integrand = |t: f64| {
            let c2 = (std::f64::consts::SQRT_2 * t).cos().powi(2);
            (2.0 - 4.0 * c2 / (1.0 + c2).powi(2)).sqrt()
        };
        let n = 1 << 16;
        let dx = SPIN_T / n as f64;
        let samples: Vec<f64> = (0..=n).map(|i| integrand(i as f64 * dx)).collect();
        let dense = simpson(dx, &samples);
        let traj = spin_quench_traj(4096);
        let section = reference_section(&traj).unwrap();
        let l_chi = curve_length(section.times(), section.states()).unwrap();
        assert_abs_diff_eq!(l_chi, dense, epsilon = 1e-6);
    }

    #[test]
    fn horizontal_length_of_rwa_drive_is_amplitude_times_horizon() {
        let model = HamiltonianModel::rwa_drive(2.0, 1.0, 1.0).unwrap();
        let initial = PureState::basis_state(2, 0).unwrap();
        let traj = propagate(&model, &initial, SPIN_T, 4096).unwrap();
        assert_abs_diff_eq!(
            horizontal_length_via_fluctuation(&traj).unwrap(),
            SPIN_T,
            epsilon = 2e-3
        );
    }

    #[test]
    fn eigenstate_trajectory_has_zero_fluctuation_length() {
        let traj = stationary_traj();
        // sqrt of a roundoff-sized variance leaves ~1e-8 per sample
        assert_abs_diff_eq!(
            horizontal_length_via_fluctuation(&traj).unwrap(),
            0.0,
            epsilon = 1e-7
        );
    }

    #[test]
    fn horizontal_lift_satisfies_parallel_transport() {
        for traj in [spin_quench_traj(4096), jc_traj(1.2)] {
            let lift = horizontal_lift(&traj).unwrap();
            assert!(
                lift.max_transport_residual() < 1e-6,
                "residual {:.2e}",
                lift.max_transport_residual()
            );
        }
    }

    #[test]
    fn jc_reference_section_equals_the_trajectory_before_the_flip() {
        let traj = jc_traj(1.2); // T < pi/2, overlap stays positive
        let section = reference_section(&traj).unwrap();
        assert!(!section.parallel_transport_continued());
        // chi should match psi up to the removed (constant-energy) phase;
        // check gauge-invariantly through the projector overlap
        for (chi, psi) in section.states().iter().zip(traj.states()) {
            assert!(chi.overlap(psi).norm() > 1.0 - 1e-10);
        }
        // and the curves' lengths all agree with the geodesic distance
        let report = geometry_report(&traj).unwrap();
        assert_abs_diff_eq!(report.l_reference, report.l_horizontal, epsilon = 1e-8);
        assert_abs_diff_eq!(report.l_reference, report.s0_half, epsilon = 1e-6);
    }

    #[test]
    fn jc_saturates_at_the_full_swap_through_the_continuation() {
        let traj = jc_traj(FRAC_PI_2);
        let section = reference_section(&traj).unwrap();
        assert!(section.parallel_transport_continued());
        let l_chi = curve_length(section.times(), section.states()).unwrap();
        let lift = horizontal_lift(&traj).unwrap();
        let l_bar = curve_length(lift.times(), lift.states()).unwrap();
        let s0 = bargmann_half_distance(traj.initial(), traj.final_state()).unwrap();
        assert_abs_diff_eq!(l_chi, FRAC_PI_2, epsilon = 1e-6);
        assert_abs_diff_eq!(l_bar, FRAC_PI_2, epsilon = 1e-6);
        assert_abs_diff_eq!(s0, FRAC_PI_2, epsilon = 1e-6);
        assert_abs_diff_eq!(reference_length_via_identity(&traj).unwrap(), FRAC_PI_2, epsilon = 1e-6);
    }

    #[test]
    fn orthogonality_error_names_the_first_offending_time() {
        // JC block with n = 3 swaps twice as fast; by T = pi/2 the overlap
        // crosses zero at t = pi/4 with a sign change, which is a genuine
        // singularity of the section
        let model = HamiltonianModel::jaynes_cummings_block(1.0, 1.0, 3, 1.0).unwrap();
        let initial = PureState::basis_state(2, 0).unwrap();
        let traj = propagate(&model, &initial, FRAC_PI_2, 4096).unwrap();
        match reference_section(&traj) {
            Err(Error::Orthogonality { t, .. }) => {
                assert_abs_diff_eq!(t, FRAC_PI_4, epsilon = 1e-3);
            }
            other => panic!("expected orthogonality error, got {other:?}"),
        }
    }

    #[test]
    fn phases_decompose_into_dynamical_plus_geometric() {
        for traj in [spin_quench_traj(4096), jc_traj(1.2)] {
            let total = pancharatnam_phase(traj.initial(), traj.final_state()).unwrap();
            let dynamical = dynamical_phase(&traj).unwrap();
            let geometric = geometric_phase(&traj).unwrap();
            let mismatch = wrap_angle(total - dynamical - geometric);
            assert!(
                mismatch.abs() < 1e-6,
                "phase decomposition off by {mismatch:.2e}"
            );
        }
    }

    #[test]
    fn jc_geometric_phase_vanishes() {
        let traj = jc_traj(1.2);
        assert_abs_diff_eq!(geometric_phase(&traj).unwrap(), 0.0, epsilon = 1e-8);
    }

    #[test]
    fn eigenstate_dynamical_phase_is_minus_energy_times_time() {
        let model = HamiltonianModel::constant(pauli_z() * cx(0.7, 0.), 1.0).unwrap();
        let initial = PureState::basis_state(2, 0).unwrap();
        let traj = propagate(&model, &initial, 2.0, 256).unwrap();
        assert_abs_diff_eq!(dynamical_phase(&traj).unwrap(), -0.7 * 2.0, epsilon = 1e-10);
    }

    #[test]
    fn jc_dynamical_phase_matches_the_conserved_energy() {
        let omega = 0.9;
        let n = 2u32;
        let model = HamiltonianModel::jaynes_cummings_block(omega, 1.0, n, 1.0).unwrap();
        let initial = PureState::basis_state(2, 1).unwrap();
        let t_final = 0.4;
        let traj = propagate(&model, &initial, t_final, 4096).unwrap();
        // <H> is conserved: check constancy, then the phase is -<H> T / hbar
        let profile = traj.expectation_profile().unwrap();
        let expected_mean = omega * (f64::from(n) + 0.5);
        for v in &profile {
            assert_abs_diff_eq!(*v, expected_mean, epsilon = 1e-10);
        }
        assert_abs_diff_eq!(
            dynamical_phase(&traj).unwrap(),
            -expected_mean * t_final,
            epsilon = 1e-8
        );
    }

    #[test]
    fn spin_quench_dynamical_phase_matches_a_dense_quadrature_oracle() {
        let traj = spin_quench_traj(512);
        let phase = dynamical_phase(&traj).unwrap();
        // oracle: trapezoid of the closed-form <H>(t) at 10x resolution
        let omega = std::f64::consts::SQRT_2;
        let mean_h = |t: f64| {
            let (c, s) = ((omega * t).cos(), (omega * t).sin());
            let psi = [cx(c, -s / omega), cx(0., -s / omega)];
            // <psi| (sz + sx) |psi>
            let h = pauli_z() + pauli_x();
            let mut acc = cx(0., 0.);
            for i in 0..2 {
                for j in 0..2 {
                    acc += psi[i].conj() * h[(i, j)] * psi[j];
                }
            }
            acc.re
        };
        let n = 5120;
        let dx = SPIN_T / n as f64;
        let samples: Vec<f64> = (0..=n).map(|i| mean_h(i as f64 * dx)).collect();
        let oracle = -trapezoid(dx, &samples);
        assert_abs_diff_eq!(phase, oracle, epsilon = 1e-6);
    }

    #[test]
    fn identity_route_tracks_the_direct_length() {
        for n in [512, 4096] {
            let traj = spin_quench_traj(n);
            let section = reference_section(&traj).unwrap();
            let direct = curve_length(section.times(), section.states()).unwrap();
            let identity = reference_length_via_identity(&traj).unwrap();
            assert!(
                (direct - identity).abs() / direct.max(1e-9) < 1e-4,
                "routes disagree: {direct} vs {identity}"
            );
        }
    }

    #[test]
    fn lengths_are_gauge_invariant() {
        let traj = spin_quench_traj(2048);
        let report = geometry_report(&traj).unwrap();
        // cubic phase profile with O(1) coefficients
        let alpha = |t: f64| 0.8 - 1.3 * t + 0.9 * t * t - 0.45 * t * t * t;
        let gauged_states: Vec<PureState> = traj
            .times()
            .iter()
            .zip(traj.states())
            .map(|(&t, s)| PureState::new(s.amplitudes() * cx(0., alpha(t)).exp()).unwrap())
            .collect();
        let gauged = Trajectory::from_parts(traj.times().to_vec(), gauged_states, traj.model().clone()).unwrap();
        let gauged_report = geometry_report(&gauged).unwrap();
        assert!((report.l_reference - gauged_report.l_reference).abs() < 1e-5);
        assert!((report.l_horizontal - gauged_report.l_horizontal).abs() < 1e-5);
        assert!(
            wrap_angle(report.phase_geometric - gauged_report.phase_geometric).abs() < 1e-5
        );
    }

    #[test]
    fn lengths_are_reparametrization_invariant() {
        // sample the closed-form quench curve uniformly in a warped parameter
        // s with t = s + 0.1 sin(s): same curve, different parametrization
        let omega = std::f64::consts::SQRT_2;
        let state_at = |t: f64| {
            let (c, s) = ((omega * t).cos(), (omega * t).sin());
            PureState::from_slice(&[cx(c, -s / omega), cx(0., -s / omega)]).unwrap()
        };
        let n = 4096;
        // pick s_max so that t(s_max) = SPIN_T via bisection
        let mut lo = 0.0;
        let mut hi = SPIN_T;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid + 0.1 * mid.sin() < SPIN_T {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let s_max = 0.5 * (lo + hi);
        let ds = s_max / n as f64;
        let times: Vec<f64> = (0..=n).map(|i| i as f64 * ds).collect();
        let warped: Vec<PureState> = times
            .iter()
            .map(|&s| state_at(s + 0.1 * s.sin()))
            .collect();
        let l_warped = curve_length(&times, &warped).unwrap();

        let dt = SPIN_T / n as f64;
        let plain_times: Vec<f64> = (0..=n).map(|i| i as f64 * dt).collect();
        let plain: Vec<PureState> = plain_times.iter().map(|&t| state_at(t)).collect();
        let l_plain = curve_length(&plain_times, &plain).unwrap();

        assert!(
            (l_warped - l_plain).abs() < 1e-4,
            "{l_warped} vs {l_plain}"
        );
    }

    #[test]
    fn ordering_holds_on_random_constant_models() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let mut h = CMatrix::zeros(2, 2);
            for i in 0..2 {
                for j in 0..2 {
                    h[(i, j)] = cx(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                }
            }
            let h = (&h + h.adjoint()) * cx(0.5, 0.);
            let model = HamiltonianModel::constant(h, 1.0).unwrap();
            let initial = PureState::from_slice(&[
                cx(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
                cx(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            ])
            .unwrap();
            let t_final = rng.random_range(0.3..3.0);
            let traj = propagate(&model, &initial, t_final, 2048).unwrap();
            match geometry_report(&traj) {
                Ok(report) => {
                    assert!(report.l_reference >= report.l_horizontal - 1e-6);
                    assert!(report.l_horizontal >= report.s0_half - 1e-6);
                }
                Err(Error::Orthogonality { .. }) => continue,
                Err(other) => panic!("unexpected error {other:?}"),
            }
        }
    }
}
