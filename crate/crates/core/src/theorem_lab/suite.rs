use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::verifiers::*;
use super::{thm10_construct, TheoremVerdict};
use crate::error::{OplabError, Result};
use crate::generators::{stream_id, Family, FixtureRng, GenSpec};
use crate::matrix_core::{ComplexMatrix, Tolerance};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremId {
    PowerStability,
    NoSingularExpansive,
    WeightDecomposition,
    TwoExpansiveIsometry,
    UnitaryNilpotentStructure,
    SandwichIsometry,
    SpectralConstraints,
    RangeKernelTransforms,
}

impl TheoremId {
    pub const ALL: [TheoremId; 8] = [
        TheoremId::PowerStability,
        TheoremId::NoSingularExpansive,
        TheoremId::WeightDecomposition,
        TheoremId::TwoExpansiveIsometry,
        TheoremId::UnitaryNilpotentStructure,
        TheoremId::SandwichIsometry,
        TheoremId::SpectralConstraints,
        TheoremId::RangeKernelTransforms,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TheoremId::PowerStability => "power_stability",
            TheoremId::NoSingularExpansive => "no_singular_expansive",
            TheoremId::WeightDecomposition => "weight_decomposition",
            TheoremId::TwoExpansiveIsometry => "two_expansive_isometry",
            TheoremId::UnitaryNilpotentStructure => "unitary_nilpotent_structure",
            TheoremId::SandwichIsometry => "sandwich_isometry",
            TheoremId::SpectralConstraints => "spectral_constraints",
            TheoremId::RangeKernelTransforms => "range_kernel_transforms",
        }
    }

    fn ordinal(self) -> u64 {
        Self::ALL.iter().position(|&t| t == self).expect("listed") as u64
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TheoremId {
    type Err = OplabError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| OplabError::Parse(format!("unknown theorem id {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Premise-certified fixture families.
    Verify,
    /// Broader random instances; many are vacuous.
    Fuzz,
}

/// How the weight `P` of an instance is obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightSpec {
    None,
    Identity,
    /// `T*ᵏ·Tᵏ`.
    Gram { power: u32 },
    /// The weight produced by the operator's family.
    Fixture,
    /// The family's weight plus `eps·(0 ⊕ I₂)` on the second block.
    FixtureShifted { eps: f64 },
    Generated { spec: GenSpec },
}

/// Everything needed to rebuild one verifier call.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub theorem: TheoremId,
    pub operator: GenSpec,
    pub weight: WeightSpec,
    pub m: u32,
    /// Power for the transform construction, `n_max` for power stability.
    pub n: u32,
}

impl Instance {
    /// Generates the input matrices by name (`t`, and `p`, `t1`, `t2` as needed).
    pub fn materialize(&self) -> Result<BTreeMap<String, ComplexMatrix>> {
        let fixture = self.operator.generate()?;
        let t = fixture.t;
        let dims = self.operator.family.dims();
        let d1 = dims[0];
        let d = t.rows();
        let p = match &self.weight {
            WeightSpec::None => None,
            WeightSpec::Identity => Some(ComplexMatrix::identity(d)),
            WeightSpec::Gram { power } => {
                let tk = t.pow(*power as usize);
                Some((tk.adjoint() * &tk).hermitian_part())
            }
            WeightSpec::Fixture => Some(
                fixture
                    .p
                    .clone()
                    .ok_or_else(|| OplabError::Generation("family provides no weight".into()))?,
            ),
            WeightSpec::FixtureShifted { eps } => {
                let base = fixture
                    .p
                    .clone()
                    .ok_or_else(|| OplabError::Generation("family provides no weight".into()))?;
                let shift = ComplexMatrix::zeros(d1, d1).direct_sum(&ComplexMatrix::identity(d - d1));
                Some(base + shift.scale(*eps))
            }
            WeightSpec::Generated { spec } => Some(spec.generate()?.t),
        };
        let mut inputs = BTreeMap::new();
        if self.theorem == TheoremId::WeightDecomposition {
            if dims.len() != 2 {
                return Err(OplabError::Generation("weight decomposition needs a two-block family".into()));
            }
            inputs.insert("t1".into(), t.submatrix(0, 0, d1, d1));
            inputs.insert("t2".into(), t.submatrix(d1, d1, d - d1, d - d1));
        }
        inputs.insert("t".into(), t);
        if let Some(p) = p {
            inputs.insert("p".into(), p);
        }
        Ok(inputs)
    }
}

fn input<'a>(inputs: &'a BTreeMap<String, ComplexMatrix>, name: &str) -> Result<&'a ComplexMatrix> {
    inputs.get(name).ok_or_else(|| OplabError::Parse(format!("missing input matrix {name:?}")))
}

/// Runs the verifier for `theorem` on named inputs.
pub fn evaluate(
    theorem: TheoremId,
    inputs: &BTreeMap<String, ComplexMatrix>,
    m: u32,
    n: u32,
    tol: &Tolerance,
) -> Result<TheoremVerdict> {
    let t = input(inputs, "t")?;
    match theorem {
        TheoremId::PowerStability => verify_power_stability(t, input(inputs, "p")?, m, n, tol),
        TheoremId::NoSingularExpansive => verify_no_singular_expansive(t, m, tol),
        TheoremId::WeightDecomposition => {
            verify_weight_decomposition(input(inputs, "t1")?, input(inputs, "t2")?, input(inputs, "p")?, m, tol)
        }
        TheoremId::TwoExpansiveIsometry => verify_two_expansive_isometry(t, input(inputs, "p")?, tol),
        TheoremId::UnitaryNilpotentStructure => verify_unitary_nilpotent_structure(t, tol),
        TheoremId::SandwichIsometry => verify_sandwich_isometry(t, input(inputs, "p")?, m, tol),
        TheoremId::SpectralConstraints => spectral_constraints(t, input(inputs, "p")?, m, tol),
        TheoremId::RangeKernelTransforms => Ok(thm10_construct(t, n as usize, m, tol)?.1),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Instances per theorem.
    pub count: usize,
    /// Upper bounds `(d1, d2)` on the two block sizes; single-block
    /// fixtures use dimension `d1 + d2`.
    pub dims: (usize, usize),
    pub theorems: Vec<TheoremId>,
    pub mode: Mode,
    pub tol: Tolerance,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            count: 20,
            dims: (4, 3),
            theorems: TheoremId::ALL.to_vec(),
            mode: Mode::Verify,
            tol: Tolerance::default(),
            threads: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteRow {
    pub theorem_id: TheoremId,
    pub seed: u64,
    pub stream: u64,
    pub dims: Vec<usize>,
    pub instance: Instance,
    pub premises_met: bool,
    pub holds: bool,
    pub witness: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SuiteRow {
    pub fn is_counterexample(&self) -> bool {
        self.error.is_none() && self.premises_met && !self.holds
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TheoremSummary {
    pub instances: usize,
    pub premises_met: usize,
    pub vacuous: usize,
    pub held: usize,
    pub counterexamples: usize,
    pub errors: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    /// Wall-clock time of the run; the only field that varies between
    /// identical invocations.
    pub generated_at_unix: u64,
    pub mode: Mode,
    pub seed: u64,
    pub count: usize,
    pub dims: (usize, usize),
    pub tolerance: Tolerance,
    pub summary: BTreeMap<TheoremId, TheoremSummary>,
    pub counterexamples: usize,
    pub errors: usize,
    /// Sorted by stream id.
    pub rows: Vec<SuiteRow>,
}

/// Replayable record of a premises-met failure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuarantineRecord {
    pub theorem_id: TheoremId,
    pub tolerance: Tolerance,
    pub seed: u64,
    pub stream: u64,
    pub instance: Instance,
    pub inputs: BTreeMap<String, ComplexMatrix>,
    pub witness: Value,
}

impl SuiteReport {
    /// Rebuilds the inputs of every counterexample row.
    pub fn quarantine(&self) -> Result<Vec<QuarantineRecord>> {
        self.rows
            .iter()
            .filter(|r| r.is_counterexample())
            .map(|r| {
                Ok(QuarantineRecord {
                    theorem_id: r.theorem_id,
                    tolerance: self.tolerance,
                    seed: r.seed,
                    stream: r.stream,
                    instance: r.instance.clone(),
                    inputs: r.instance.materialize()?,
                    witness: r.witness.clone(),
                })
            })
            .collect()
    }
}

/// Re-evaluates a quarantined instance from its stored matrices.
pub fn replay(record: &QuarantineRecord) -> Result<TheoremVerdict> {
    let i = &record.instance;
    evaluate(record.theorem_id, &record.inputs, i.m, i.n, &record.tolerance)
}

/// Writes the records as one JSON array. Callers funnel all records through
/// a single call, so concurrent runs never interleave writes to one file.
pub fn write_quarantine(path: &Path, records: &[QuarantineRecord]) -> Result<()> {
    let text = serde_json::to_string_pretty(records).map_err(|e| OplabError::Parse(e.to_string()))?;
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, text + "\n").map_err(|e| OplabError::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| OplabError::io(path, e))
}

pub fn read_quarantine(path: &Path) -> Result<Vec<QuarantineRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| OplabError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| OplabError::Parse(e.to_string()))
}

fn pick<T: Copy>(r: &mut FixtureRng, options: &[T]) -> T {
    options[r.int(0, options.len() - 1)]
}

/// Chooses the fixture for one instance. Slot 0 of the stream drives the
/// choices, slots 1 and 2 seed the operator and weight generators.
fn plan(theorem: TheoremId, mode: Mode, seed: u64, stream: u64, dims: (usize, usize)) -> Instance {
    let r = &mut FixtureRng::new(seed, stream);
    let d1 = r.int(1, dims.0);
    let d2 = r.int(1, dims.1);
    let dim = d1 + d2;
    let op = |family| GenSpec::new(seed, stream | 1, family);
    let psd = |r: &mut FixtureRng| WeightSpec::Generated {
        spec: GenSpec::new(seed, stream | 2, Family::Psd { dim, condition_cap: 10f64.powf(r.uniform(0.0, 3.0)) }),
    };
    let instance = |operator, weight, m, n| Instance { theorem, operator, weight, m, n };
    use TheoremId::*;

    match mode {
        Mode::Verify => match theorem {
            PowerStability => match r.int(0, 2) {
                0 => instance(op(Family::HaarUnitary { dim }), WeightSpec::Identity, r.int(1, 6) as u32, 5),
                1 => {
                    let scale = r.uniform(1.0, 2.0);
                    instance(op(Family::ScaledUnitary { dim, scale }), WeightSpec::Identity, pick(r, &[1, 3, 5]), 5)
                }
                _ => instance(op(Family::CoupledKernel { d1, d2 }), WeightSpec::Gram { power: 1 }, r.int(1, 4) as u32, 5),
            },
            NoSingularExpansive => {
                let m = r.int(1, 4) as u32;
                let family = match r.int(0, 3) {
                    0 => Family::Singular { dim, rank: r.int(0, dim - 1) },
                    1 => Family::Nilpotent { dim, index: r.int(1, dim) },
                    2 => Family::CoupledKernel { d1, d2 },
                    _ => Family::ObliqueDrazin { d1, d2 },
                };
                instance(op(family), WeightSpec::None, m, 1)
            }
            WeightDecomposition => {
                let m = r.int(1, 3) as u32;
                let weight = if r.int(0, 3) == 0 { WeightSpec::FixtureShifted { eps: 1e-3 } } else { WeightSpec::Fixture };
                instance(op(Family::DrazinPair { d1, d2, m }), weight, m, 1)
            }
            TwoExpansiveIsometry => match r.int(0, 3) {
                0 => instance(op(Family::DrazinPair { d1, d2, m: 2 }), WeightSpec::Fixture, 2, 1),
                1 => instance(op(Family::SimilarUnitary { dim, spread: 0.3 }), WeightSpec::Fixture, 2, 1),
                2 => instance(op(Family::HaarUnitary { dim }), WeightSpec::Identity, 2, 1),
                _ => instance(op(Family::UnitaryPlusZero { d1, d2 }), WeightSpec::Gram { power: 1 }, 2, 1),
            },
            UnitaryNilpotentStructure => {
                let family = match r.int(0, 2) {
                    0 => Family::HaarUnitary { dim },
                    1 => Family::UnitaryPlusZero { d1, d2 },
                    _ => Family::CoupledKernel { d1, d2 },
                };
                instance(op(family), WeightSpec::None, 2, 1)
            }
            SandwichIsometry => {
                let m = r.int(2, 3) as u32;
                match r.int(0, 3) {
                    0 => instance(op(Family::DrazinPair { d1, d2, m }), WeightSpec::Fixture, m, 1),
                    1 => instance(op(Family::SimilarUnitary { dim, spread: 0.3 }), WeightSpec::Fixture, m, 1),
                    2 => instance(op(Family::CoupledKernel { d1, d2 }), WeightSpec::Gram { power: 1 }, m, 1),
                    _ => instance(op(Family::HaarUnitary { dim }), WeightSpec::Identity, m, 1),
                }
            }
            SpectralConstraints => match r.int(0, 2) {
                0 => instance(op(Family::HaarUnitary { dim }), WeightSpec::Identity, pick(r, &[2, 4]), 1),
                1 => {
                    let m = pick(r, &[2, 4]);
                    instance(op(Family::SimilarUnitary { dim, spread: 0.3 }), WeightSpec::Fixture, m, 1)
                }
                _ => {
                    let m = pick(r, &[1, 3]);
                    instance(op(Family::ExpansiveInvertible { dim, m }), WeightSpec::Identity, m, 1)
                }
            },
            RangeKernelTransforms => {
                if r.int(0, 3) == 0 {
                    instance(op(Family::ExpansiveInvertible { dim, m: 1 }), WeightSpec::None, 1, 1)
                } else {
                    let (m, n) = (r.int(1, 4) as u32, r.int(1, 2) as u32);
                    instance(op(Family::CoupledKernel { d1, d2 }), WeightSpec::None, m, n)
                }
            }
        },
        Mode::Fuzz => {
            let families = [
                Family::Gaussian { dim, scale: r.uniform(0.5, 2.0) },
                Family::HaarUnitary { dim },
                Family::ScaledUnitary { dim, scale: r.uniform(0.8, 1.5) },
                Family::CoupledKernel { d1, d2 },
                Family::Singular { dim, rank: r.int(0, dim - 1) },
                Family::Nilpotent { dim, index: r.int(1, dim) },
                Family::SimilarUnitary { dim, spread: r.uniform(0.05, 0.5) },
                Family::ExpansiveInvertible { dim, m: 1 },
                Family::ObliqueDrazin { d1, d2 },
                Family::UnitaryPlusZero { d1, d2 },
            ];
            let family = families[r.int(0, families.len() - 1)].clone();
            let has_weight = matches!(family, Family::SimilarUnitary { .. });
            let mut weight = match r.int(0, if has_weight { 3 } else { 2 }) {
                0 => WeightSpec::Identity,
                1 => WeightSpec::Gram { power: r.int(1, 2) as u32 },
                2 => psd(r),
                _ => WeightSpec::Fixture,
            };
            let m = r.int(1, 4) as u32;
            match theorem {
                PowerStability => instance(op(family), weight, m, r.int(2, 5) as u32),
                NoSingularExpansive | UnitaryNilpotentStructure => instance(op(family), WeightSpec::None, m, 1),
                WeightDecomposition => {
                    let weight = match r.int(0, 3) {
                        0 => WeightSpec::Fixture,
                        1 => WeightSpec::FixtureShifted { eps: 10f64.powf(r.uniform(-6.0, -1.0)) },
                        2 => psd(r),
                        _ => WeightSpec::Identity,
                    };
                    let m = r.int(1, 4) as u32;
                    instance(op(Family::DrazinPair { d1, d2, m }), weight, m, 1)
                }
                TwoExpansiveIsometry => instance(op(family), weight, 2, 1),
                SandwichIsometry => instance(op(family), weight, r.int(2, 4) as u32, 1),
                SpectralConstraints => {
                    // The verifier needs an invertible weight.
                    if matches!(weight, WeightSpec::Gram { .. }) {
                        weight = WeightSpec::Identity;
                    }
                    instance(op(family), weight, m, 1)
                }
                RangeKernelTransforms => instance(op(family), WeightSpec::None, m, r.int(1, 2) as u32),
            }
        }
    }
}

fn run_one(theorem: TheoremId, index: u64, cfg: &SuiteConfig) -> SuiteRow {
    let stream = stream_id(theorem.ordinal(), index, 0);
    let instance = plan(theorem, cfg.mode, cfg.seed, stream, cfg.dims);
    let outcome = instance
        .materialize()
        .and_then(|inputs| evaluate(theorem, &inputs, instance.m, instance.n, &cfg.tol));
    let (premises_met, holds, witness, error) = match outcome {
        Ok(v) => (v.premises_met, v.holds, v.witness, None),
        Err(e) => (false, false, Value::Null, Some(e.to_string())),
    };
    SuiteRow {
        theorem_id: theorem,
        seed: cfg.seed,
        stream,
        dims: instance.operator.family.dims(),
        instance,
        premises_met,
        holds,
        witness,
        error,
    }
}

/// Runs `count` instances of every selected theorem, in parallel.
///
/// Rows depend only on `(seed, stream)`, so the report is identical for any
/// thread count apart from `generated_at_unix`.
pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    if cfg.dims.0 == 0 || cfg.dims.1 == 0 {
        return Err(OplabError::Precondition("both block dimensions must be at least 1".into()));
    }
    let jobs: Vec<(TheoremId, u64)> = cfg
        .theorems
        .iter()
        .flat_map(|&t| (0..cfg.count as u64).map(move |i| (t, i)))
        .collect();
    let work = || jobs.par_iter().map(|&(t, i)| run_one(t, i, cfg)).collect::<Vec<_>>();
    let mut rows = match cfg.threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| OplabError::Precondition(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };
    rows.sort_by_key(|r| r.stream);

    let mut summary: BTreeMap<TheoremId, TheoremSummary> = BTreeMap::new();
    for row in &rows {
        let s = summary.entry(row.theorem_id).or_default();
        s.instances += 1;
        if row.error.is_some() {
            s.errors += 1;
        } else if row.premises_met {
            s.premises_met += 1;
            if row.holds {
                s.held += 1;
            } else {
                s.counterexamples += 1;
            }
        } else {
            s.vacuous += 1;
        }
    }
    let generated_at_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    Ok(SuiteReport {
        generated_at_unix,
        mode: cfg.mode,
        seed: cfg.seed,
        count: cfg.count,
        dims: cfg.dims,
        tolerance: cfg.tol,
        counterexamples: summary.values().map(|s| s.counterexamples).sum(),
        errors: summary.values().map(|s| s.errors).sum(),
        summary,
        rows,
    })
}
