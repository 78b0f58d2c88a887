//! Executable versions of the structural theorems about `(m,P)`-expansive
//! operators, one verifier per statement, plus a seeded suite runner.
//!
//! Every verifier returns a [`TheoremVerdict`]. `premises_met` says whether
//! the instance satisfies the hypothesis; `holds` is the evaluated
//! conclusion (for an equivalence, the conjunction of both implications).
//! A verdict with `premises_met && !holds` is a counterexample.
//!
//! Exact `≤ 0` premises only hold up to a tolerance `τ` in floating point,
//! and a premise that sits `τ` above zero can push a conclusion further out
//! than `τ`. Conclusions are therefore judged against bounds that carry the
//! premise's slack through the relevant identity, recorded in the witness.

mod suite;
mod thm10;
mod verifiers;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub use suite::{
    evaluate, read_quarantine, replay, run_suite, write_quarantine, Instance, Mode, QuarantineRecord, SuiteConfig,
    SuiteReport, SuiteRow, TheoremId, TheoremSummary, WeightSpec,
};
pub use thm10::{thm10_construct, Thm10Bundle};
pub use verifiers::{
    power_coefficients, spectral_constraints, verify_no_singular_expansive, verify_power_stability,
    verify_sandwich_isometry, verify_two_expansive_isometry, verify_unitary_nilpotent_structure,
    verify_weight_decomposition,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremVerdict {
    pub theorem_id: String,
    pub premises_met: bool,
    pub holds: bool,
    pub witness: Value,
}

impl TheoremVerdict {
    pub fn new(theorem_id: &str, premises_met: bool, holds: bool, witness: Value) -> Self {
        Self { theorem_id: theorem_id.to_string(), premises_met, holds, witness }
    }

    pub fn is_counterexample(&self) -> bool {
        self.premises_met && !self.holds
    }
}
