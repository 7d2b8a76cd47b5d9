//! Twisted L-values, Euler products, the diagonal factor `Z*` and the moment constants.

pub mod afe;
pub mod constants;
pub mod euler;
pub mod zseries;
pub mod zstar;

pub use afe::{
    disqualification, lprime_central, root_number, twist_character, validate_eta, AfeEvaluator,
    AfeOptions, AfeSums, EtaCheck, EtaDiagnostic, TwistedLValue,
};
pub use constants::{constant_c0, constant_c1, constants_report, C1Value, ConstantsReport};
pub use euler::{rankin_selberg_L_at, sym2_L_at, EulerValue};
pub use zseries::{z_local_factor, z_local_product, z_series_direct, ZSeriesParams, ZSeriesValue};
pub use zstar::{zstar_combined, zstar_components, zstar_local, zstar_qprime};
