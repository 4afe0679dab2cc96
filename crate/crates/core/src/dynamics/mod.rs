//! Orbits, basins, certificates and probes for the symmetric maps.

pub mod fixed;
pub mod orbit;
pub mod probe;
pub mod restrict;
pub mod survey;
pub mod verify;

pub use fixed::{find_fixed_points_dim1, refine_fixed_point, FixedPoint};
pub use orbit::{classify_basin, iterate, BasinLabel, CriticalSet, OrbitRecord};
pub use probe::{expansion_probe, probe_orbit, probe_orbit_dd, ExpansionProbeResult, ProbeParams};
pub use restrict::{restrict_map, restricted_critical_set, restricted_superattractors, Restriction};
pub use survey::{basin_survey, max_class_deviation, sample_point, BasinReport, SurveyParams};
pub use verify::{
    verify_critical_factorization, verify_invariant_form, verify_invariant_hyperplane, verify_superattracting,
    CriticalFactorization, Invariance, Superattraction,
};
