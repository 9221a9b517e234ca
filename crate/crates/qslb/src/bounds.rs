//! The two-sided bounds on evolution time: the speed-limit time from the
//! geodesic distance and the reverse speed-limit time from the
//! reference-section length, with the sandwich
//! `t_rqsl >= t_actual >= t_qsl` enforced as a theorem.

use crate::error::{Error, Result};
use crate::geometry::{
    bargmann_half_distance, curve_length, reference_section, time_averaged_fluctuation,
};
use crate::quantum::Trajectory;

/// Mean fluctuation below which the bounds degenerate to 0/0. The value
/// sits above the sqrt-of-roundoff noise floor of any computed fluctuation.
const DEGENERATE_FLUCTUATION: f64 = 1e-7;
/// Length/distance below which a degenerate trajectory counts as stationary
/// and both bounds are 0.
const STATIONARY_DISTANCE: f64 = 1e-6;

/// Relative slack allowed on the sandwich inequality before a violation is
/// treated as a numerics bug.
pub fn sandwich_slack(t_actual: f64) -> f64 {
    1e-6 * t_actual.max(1.0)
}

/// The computed bound triple for one trajectory.
#[derive(Debug, Clone)]
pub struct BoundReport {
    /// Trajectory horizon `T`.
    pub t_actual: f64,
    /// Lower bound on the evolution time.
    pub t_qsl: f64,
    /// Upper bound on the evolution time.
    pub t_rqsl: f64,
    /// Time-averaged energy fluctuation.
    pub mean_fluctuation: f64,
    /// Bargmann half-distance between the endpoints (rad).
    pub s0_half: f64,
    /// Reference-section length.
    pub l_reference: f64,
    /// True when upper and lower bound collapse onto the actual time.
    pub saturated: bool,
}

/// Time average `(1/T) integral Delta H(t) dt` of the energy fluctuation.
pub fn mean_fluctuation(traj: &Trajectory) -> Result<f64> {
    time_averaged_fluctuation(traj)
}

pub(crate) fn check_degenerate(fluctuation: f64, distance: f64) -> Result<Option<f64>> {
    if fluctuation >= DEGENERATE_FLUCTUATION {
        return Ok(None);
    }
    if distance < STATIONARY_DISTANCE {
        return Ok(Some(0.0));
    }
    Err(Error::Degenerate {
        fluctuation,
        distance,
    })
}

/// Speed-limit time `hbar * s0_half / mean_fluctuation`: the shortest time in
/// which the endpoint pair could have been connected.
pub fn qsl_time(traj: &Trajectory) -> Result<f64> {
    let fluct = mean_fluctuation(traj)?;
    let s0_half = bargmann_half_distance(traj.initial(), traj.final_state())?;
    if let Some(degenerate) = check_degenerate(fluct, s0_half)? {
        return Ok(degenerate);
    }
    Ok(traj.model().hbar() * s0_half / fluct)
}

/// Reverse speed-limit time `hbar * l(chi) / mean_fluctuation`: the longest
/// time the traversed path admits.
pub fn rqsl_time(traj: &Trajectory) -> Result<f64> {
    let fluct = mean_fluctuation(traj)?;
    let section = reference_section(traj)?;
    let l_reference = curve_length(section.times(), section.states())?;
    if let Some(degenerate) = check_degenerate(fluct, l_reference)? {
        return Ok(degenerate);
    }
    Ok(traj.model().hbar() * l_reference / fluct)
}

/// Assemble the full bound report and verify the sandwich inequality.
///
/// A breach beyond [`sandwich_slack`] raises [`Error::SandwichViolation`]
/// rather than returning a flagged report: the inequality is a theorem, so a
/// violation always indicates broken numerics.
pub fn bound_report(traj: &Trajectory) -> Result<BoundReport> {
    let fluct = mean_fluctuation(traj)?;
    let s0_half = bargmann_half_distance(traj.initial(), traj.final_state())?;
    let section = reference_section(traj)?;
    let l_reference = curve_length(section.times(), section.states())?;
    let t_actual = traj.t_final();

    let (t_qsl, t_rqsl) = match check_degenerate(fluct, l_reference.max(s0_half))? {
        Some(zero) => (zero, zero),
        None => (
            traj.model().hbar() * s0_half / fluct,
            traj.model().hbar() * l_reference / fluct,
        ),
    };

    let slack = sandwich_slack(t_actual);
    let stationary = t_qsl == 0.0 && t_rqsl == 0.0;
    if !stationary && (t_rqsl < t_actual - slack || t_actual < t_qsl - slack) {
        return Err(Error::SandwichViolation {
            quantity: "evolution time",
            lower: t_qsl,
            actual: t_actual,
            upper: t_rqsl,
            slack,
        });
    }

    Ok(BoundReport {
        t_actual,
        t_qsl,
        t_rqsl,
        mean_fluctuation: fluct,
        s0_half,
        l_reference,
        saturated: t_rqsl - t_qsl < slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{cx, pauli_x, pauli_z, propagate, CMatrix, HamiltonianModel, PureState};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    const SPIN_T: f64 = PI / (2.0 * std::f64::consts::SQRT_2);

    fn spin_quench_traj() -> Trajectory {
        let model = HamiltonianModel::quench(pauli_z(), pauli_x(), 1.0).unwrap();
        let initial = PureState::basis_state(2, 0).unwrap();
        propagate(&model, &initial, SPIN_T, 4096).unwrap()
    }

    fn jc_traj() -> Trajectory {
        let model = HamiltonianModel::jaynes_cummings_block(1.0, 1.0, 0, 1.0).unwrap();
        let initial = PureState::basis_state(2, 1).unwrap();
        propagate(&model, &initial, FRAC_PI_2, 4096).unwrap()
    }

    fn stationary_traj() -> Trajectory {
        let model = HamiltonianModel::constant(pauli_z(), 1.0).unwrap();
        let initial = PureState::basis_state(2, 0).unwrap();
        propagate(&model, &initial, 2.0, 256).unwrap()
    }

    #[test]
    fn mean_fluctuation_examples() {
        // constant model: equals the conserved pointwise value
        let h = pauli_z() * cx(0.4, 0.) + pauli_x() * cx(0.9, 0.);
        let model = HamiltonianModel::constant(h.clone(), 1.0).unwrap();
        let initial = PureState::from_slice(&[cx(0.8, 0.1), cx(0.3, -0.4)]).unwrap();
        let traj = propagate(&model, &initial, 1.7, 512).unwrap();
        let pointwise = crate::quantum::energy_fluctuation(&initial, &h).unwrap();
        assert_abs_diff_eq!(mean_fluctuation(&traj).unwrap(), pointwise, epsilon = 1e-8);

        // symmetric spin quench: Delta H = J2 = 1
        assert_abs_diff_eq!(mean_fluctuation(&spin_quench_traj()).unwrap(), 1.0, epsilon = 1e-10);

        // RWA drive: Delta H = a_bar
        let model = HamiltonianModel::rwa_drive(2.0, 1.0, 1.0).unwrap();
        let initial = PureState::basis_state(2, 0).unwrap();
        let traj = propagate(&model, &initial, SPIN_T, 4096).unwrap();
        assert_abs_diff_eq!(mean_fluctuation(&traj).unwrap(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn spin_quench_bounds_match_the_worked_values() {
        let report = bound_report(&spin_quench_traj()).unwrap();
        assert_abs_diff_eq!(report.t_qsl, 0.7853, epsilon = 1e-3);
        assert_abs_diff_eq!(report.t_actual, SPIN_T, epsilon = 1e-12);
        assert_abs_diff_eq!(report.t_rqsl, 1.2526, epsilon = 2e-3);
        assert!(!report.saturated);
    }

    #[test]
    fn jc_bounds_saturate() {
        let traj = jc_traj();
        assert_abs_diff_eq!(qsl_time(&traj).unwrap(), FRAC_PI_2, epsilon = 1e-6);
        assert_abs_diff_eq!(rqsl_time(&traj).unwrap(), FRAC_PI_2, epsilon = 1e-6);
        let report = bound_report(&traj).unwrap();
        assert!(report.saturated);
        assert_abs_diff_eq!(report.t_qsl, report.t_rqsl, epsilon = 1e-6);
        assert_abs_diff_eq!(report.t_actual, FRAC_PI_2, epsilon = 1e-12);
    }

    #[test]
    fn stationary_trajectory_gives_zero_bounds() {
        let traj = stationary_traj();
        assert_eq!(qsl_time(&traj).unwrap(), 0.0);
        assert_eq!(rqsl_time(&traj).unwrap(), 0.0);
        let report = bound_report(&traj).unwrap();
        assert_eq!(report.t_qsl, 0.0);
        assert_eq!(report.t_rqsl, 0.0);
    }

    #[test]
    fn scale_covariance_of_the_bounds() {
        let h = pauli_z() * cx(0.6, 0.) + pauli_x() * cx(0.8, 0.);
        let initial = PureState::from_slice(&[cx(0.7, 0.2), cx(0.4, -0.5)]).unwrap();
        let t_final = 1.3;
        let k = 2.7;

        let model = HamiltonianModel::constant(h.clone(), 1.0).unwrap();
        let traj = propagate(&model, &initial, t_final, 4096).unwrap();
        let report = bound_report(&traj).unwrap();

        let scaled_model = HamiltonianModel::constant(h * cx(k, 0.), 1.0).unwrap();
        let scaled = propagate(&scaled_model, &initial, t_final / k, 4096).unwrap();
        let scaled_report = bound_report(&scaled).unwrap();

        assert!(
            (report.t_qsl - k * scaled_report.t_qsl).abs() <= 1e-6 * report.t_qsl.max(1e-12)
        );
        assert!(
            (report.t_rqsl - k * scaled_report.t_rqsl).abs() <= 1e-6 * report.t_rqsl.max(1e-12)
        );
    }

    #[test]
    fn random_four_level_models_respect_the_sandwich() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let mut h = CMatrix::zeros(4, 4);
            for i in 0..4 {
                for j in 0..4 {
                    h[(i, j)] = cx(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
                }
            }
            let h = (&h + h.adjoint()) * cx(0.5, 0.);
            let model = HamiltonianModel::constant(h, 1.0).unwrap();
            let initial = PureState::new(crate::quantum::CVector::from_fn(4, |_, _| {
                cx(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            }))
            .unwrap();
            let t_final = rng.random_range(0.2..3.0);
            let traj = propagate(&model, &initial, t_final, 2048).unwrap();
            match bound_report(&traj) {
                Ok(report) => {
                    let slack = sandwich_slack(report.t_actual);
                    assert!(report.t_rqsl >= report.t_actual - slack);
                    assert!(report.t_actual >= report.t_qsl - slack);
                    // independent check at 4x resolution
                    let dense = propagate(&model, &initial, t_final, 8192).unwrap();
                    let dense_report = bound_report(&dense).unwrap();
                    assert!((report.t_qsl - dense_report.t_qsl).abs() < 1e-5 * report.t_qsl.max(1.0));
                    assert!(
                        (report.t_rqsl - dense_report.t_rqsl).abs()
                            < 1e-4 * report.t_rqsl.max(1.0)
                    );
                }
                Err(Error::Orthogonality { .. }) => continue,
                Err(other) => panic!("unexpected error {other:?}"),
            }
        }
    }
}
