//! Sweeps over the phase-register size, the data behind the accuracy and
//! estimator-error scaling plots.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::observables::{estimate_expectation, sample_expectation, ObservableSpec};
use crate::oracle::{expectation, fidelity, liouvillian_gap};
use crate::pauli::PauliAxis;
use crate::qpe::{
    error_probability_bound, run_with_ladder, simulated_error_probability, NessProblem, OracleMode,
    PostselectMode, PowerLadder, QpeConfig,
};

/// Estimates below this magnitude use absolute rather than relative error.
pub const RELATIVE_ERROR_FLOOR: f64 = 1e-12;
/// `|c_1|` below this marks rows whose estimates carry no steady-state signal.
pub const ZERO_OVERLAP_TOLERANCE: f64 = 1e-8;

/// Row status for a successful run, given the steady-state overlap.
pub fn overlap_status(problem: &NessProblem) -> Result<RowStatus> {
    let c1 = crate::qpe::c1_coefficient(problem)?;
    Ok(if c1.norm() < ZERO_OVERLAP_TOLERANCE { RowStatus::ZeroOverlap } else { RowStatus::Ok })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub ts: Vec<usize>,
    pub t0: f64,
    pub oracle: OracleMode,
    pub postselect: PostselectMode,
    /// Shots per Pauli string for the estimators; `None` for exact readout.
    pub shots: Option<u64>,
    pub seed: u64,
}

impl SweepSpec {
    pub fn exact(ts: impl IntoIterator<Item = usize>, t0: f64) -> Self {
        SweepSpec {
            ts: ts.into_iter().collect(),
            t0,
            oracle: OracleMode::Exact,
            postselect: PostselectMode::ExactProjection,
            shots: None,
            seed: 0,
        }
    }

    /// Postselection settings for row `t`: sampled rows draw from a stream
    /// keyed by the base seed and `t`, so rows are independent of order.
    fn row_config(&self, t: usize) -> QpeConfig {
        let postselect = match self.postselect {
            PostselectMode::Sampled { seed, max_attempts } => PostselectMode::Sampled {
                seed: row_seed(seed, t),
                max_attempts,
            },
            exact => exact,
        };
        QpeConfig { t, t0: self.t0, oracle: self.oracle, postselect }
    }
}

fn row_seed(seed: u64, t: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(t as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Ok,
    PostselectionFailure,
    DegenerateOutput,
    /// The prepared state has no weight on the steady state, so the
    /// estimator reads only finite-`t` residue.
    ZeroOverlap,
}

impl RowStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RowStatus::Ok => "ok",
            RowStatus::PostselectionFailure => "postselection_failure",
            RowStatus::DegenerateOutput => "degenerate_output",
            RowStatus::ZeroOverlap => "zero_overlap",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub t: usize,
    pub p0: f64,
    pub one_minus_f: f64,
    pub est_sigma_y: f64,
    pub est_sigma_z: f64,
    pub delta_sigma_y: f64,
    pub delta_sigma_z: f64,
    /// Weight of the postselected branch outside the null space.
    pub p_e: f64,
    pub p_e_bound: f64,
    pub attempts: usize,
    pub status: RowStatus,
}

impl SweepRow {
    fn failed(t: usize, status: RowStatus, attempts: usize) -> Self {
        SweepRow {
            t,
            p0: f64::NAN,
            one_minus_f: f64::NAN,
            est_sigma_y: f64::NAN,
            est_sigma_z: f64::NAN,
            delta_sigma_y: f64::NAN,
            delta_sigma_z: f64::NAN,
            p_e: f64::NAN,
            p_e_bound: f64::NAN,
            attempts,
            status,
        }
    }
}

/// `|est - exact| / |exact|`, or the absolute error when `exact` vanishes.
pub fn relative_error(est: f64, exact: f64) -> f64 {
    let err = (est - exact).abs();
    if exact.abs() > RELATIVE_ERROR_FLOOR {
        err / exact.abs()
    } else {
        err
    }
}

/// Oracle values the sweep compares against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Reference {
    pub sigma_y: f64,
    pub sigma_z: f64,
    pub gap: f64,
}

pub fn reference(problem: &NessProblem) -> Result<Reference> {
    let rho = &problem.ness()?.rho_ss;
    let y = ObservableSpec::site(problem.n_sys(), 0, PauliAxis::Y)?;
    let z = ObservableSpec::site(problem.n_sys(), 0, PauliAxis::Z)?;
    let eig = crate::linalg::GeneralEigen::new(problem.liouvillian().matrix())?;
    Ok(Reference {
        sigma_y: expectation(rho, &y.op().to_dense()),
        sigma_z: expectation(rho, &z.op().to_dense()),
        gap: liouvillian_gap(&eig.values),
    })
}

/// Runs every `t` in parallel; rows come back in the order of `spec.ts`.
///
/// Postselection failures and degenerate outputs become row statuses; any
/// other error aborts the sweep.
pub fn sweep_t(problem: &NessProblem, spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    let t_max = *spec.ts.iter().max().ok_or_else(|| Error::Config("empty t range".into()))?;
    let refs = reference(problem)?;
    let ladder = PowerLadder::build(problem, &spec.row_config(t_max))?;
    let y = ObservableSpec::site(problem.n_sys(), 0, PauliAxis::Y)?;
    let z = ObservableSpec::site(problem.n_sys(), 0, PauliAxis::Z)?;
    let rho_ss = &problem.ness()?.rho_ss;
    let success = overlap_status(problem)?;

    spec.ts
        .par_iter()
        .map(|&t| {
            let config = spec.row_config(t);
            let out = match run_with_ladder(problem, &config, &ladder) {
                Ok(o) => o,
                Err(Error::PostselectionFailure { attempts }) => {
                    return Ok(SweepRow::failed(t, RowStatus::PostselectionFailure, attempts))
                }
                Err(e) => return Err(e),
            };
            let estimate = |obs: &ObservableSpec, salt: u64| match spec.shots {
                None => estimate_expectation(&out.psi3, obs),
                Some(shots) => sample_expectation(&out.psi3, obs, shots, row_seed(spec.seed ^ salt, t)),
            };
            let (ey, ez) = match (estimate(&y, 1), estimate(&z, 2)) {
                (Ok(a), Ok(b)) => (a.value, b.value),
                (Err(Error::DegenerateOutput(_)), _) | (_, Err(Error::DegenerateOutput(_))) => {
                    return Ok(SweepRow::failed(t, RowStatus::DegenerateOutput, out.attempts))
                }
                (Err(e), _) | (_, Err(e)) => return Err(e),
            };
            Ok(SweepRow {
                t,
                p0: out.p0,
                one_minus_f: 1.0 - fidelity(&out.rho_estimate, rho_ss)?,
                est_sigma_y: ey,
                est_sigma_z: ez,
                delta_sigma_y: relative_error(ey, refs.sigma_y),
                delta_sigma_z: relative_error(ez, refs.sigma_z),
                p_e: simulated_error_probability(problem, &out)?,
                p_e_bound: if refs.gap > 0.0 { error_probability_bound(refs.gap, t) } else { f64::INFINITY },
                attempts: out.attempts,
                status: success,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::single_spin_model;

    #[test]
    fn rows_follow_requested_order() {
        let p = NessProblem::new(single_spin_model(1.0)).unwrap();
        let rows = sweep_t(&p, &SweepSpec::exact([6, 3, 4], 0.2)).unwrap();
        assert_eq!(rows.iter().map(|r| r.t).collect::<Vec<_>>(), vec![6, 3, 4]);
        assert!(rows.iter().all(|r| r.status == RowStatus::Ok && r.p0 > 0.5));
        assert!(rows[0].one_minus_f < 1e-3);
    }

    #[test]
    fn sampled_sweep_is_reproducible() {
        let p = NessProblem::new(single_spin_model(1.0)).unwrap();
        let spec = SweepSpec {
            postselect: PostselectMode::Sampled { seed: 3, max_attempts: 16 },
            shots: Some(500),
            seed: 3,
            ..SweepSpec::exact(3..=5, 0.2)
        };
        let a = sweep_t(&p, &spec).unwrap();
        let b = sweep_t(&p, &spec).unwrap();
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }

    #[test]
    fn pure_decay_has_no_overlap() {
        let p = NessProblem::new(single_spin_model(0.0)).unwrap();
        let rows = sweep_t(&p, &SweepSpec::exact([5], 0.2)).unwrap();
        assert_eq!(rows[0].status, RowStatus::ZeroOverlap);
    }

    #[test]
    fn relative_error_floor() {
        assert!((relative_error(1.1, 1.0) - 0.1).abs() < 1e-12);
        assert_eq!(relative_error(0.25, 0.0), 0.25);
    }
}
