pub mod cases;
pub mod certificate;
pub mod conditions;
pub mod growth;

pub use cases::{CaseId, CaseParams, CorollaryCase, StatedForm};
pub use certificate::{admissible_tau0, corollary_certificate, expected_k1_ratio, Certificate, CertificateOptions, Stage};
pub use conditions::{check_conditions, ConditionGrid, NumericVerdict, RegimeVerdict, SymbolicVerdict};
pub use growth::{compare_growth, parse_growth, AsymptoticSymbol, Comparison};
