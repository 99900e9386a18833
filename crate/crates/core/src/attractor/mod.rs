//! Absorbing ball, attractor clouds under the weak metric, energy
//! inequality and the comparison of tapered orbits with the untapered one.

mod absorbing;
mod agreement;
mod cloud;
mod energy;

pub use absorbing::{
    absorbing_bound, absorbing_bound_check, absorbing_radius, absorbing_radius_sq, entry_time, transient_time,
    AbsorbReport, AbsorbViolation, ABSORB_SLACK,
};
pub use agreement::{nse_agreement_threshold, AgreementReport, AgreementRow};
pub use cloud::{
    build_a_union, hausdorff_semidistance, positive_invariance_check, sample_attractor, semicontinuity_experiment,
    weak_metric, AttractorCloud, CloudLabel, CloudSample, Ensemble, InvarianceReport, SampleSchedule,
    SemicontinuityReport,
};
pub use energy::{
    calibrate_energy_tolerance, energy_functional, energy_inequality_check, EnergyCalibration, EnergyReport,
    ENERGY_TOL_SAFETY,
};
