//! Exhaustive enumeration of Mukai vectors in a box, with verdicts and
//! canonical forms, in a fixed order that does not depend on parallelism.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::existence::{exists, Case, ExistenceVerdict, SurfaceContext};
use crate::io::{vector_to_json, verdict_to_json};
use crate::lattice::{MukaiVector, NSClass, NS_RANK};
use crate::reduction::{reduce, ReductionConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CensusBounds {
    pub r_max: i64,
    pub s_max: i64,
    pub coeff_bound: i64,
}

impl CensusBounds {
    pub fn new(r_max: i64, s_max: i64, coeff_bound: i64) -> Result<Self> {
        if r_max < 0 || s_max < 0 || coeff_bound < 0 {
            return Err(Error::Input("census bounds must be non-negative".into()));
        }
        Ok(CensusBounds {
            r_max,
            s_max,
            coeff_bound,
        })
    }

    fn classes_per_slice(&self) -> Result<u64> {
        let side = u64::try_from(2 * self.coeff_bound + 1).map_err(|_| Error::Overflow)?;
        side.checked_pow(NS_RANK as u32).ok_or(Error::Overflow)
    }

    /// The `index`-th class in lexicographic order, first coordinate most
    /// significant.
    fn class_at(&self, mut index: u64) -> NSClass {
        let side = (2 * self.coeff_bound + 1) as u64;
        let mut c = [0i64; NS_RANK];
        for slot in c.iter_mut().rev() {
            *slot = (index % side) as i64 - self.coeff_bound;
            index /= side;
        }
        NSClass::from_coords(c)
    }

    /// Parity-valid `(r, s)` pairs in census order.
    pub fn rank_s_pairs(&self) -> Vec<(i64, i64)> {
        let mut out = Vec::new();
        for r in 0..=self.r_max {
            for s in -self.s_max..=self.s_max {
                if (r - s).rem_euclid(2) == 0 {
                    out.push((r, s));
                }
            }
        }
        out
    }

    /// Every non-zero vector in order `r`, `s`, `c1`, `kappa`.
    pub fn vectors(&self) -> Result<impl Iterator<Item = MukaiVector> + '_> {
        let n = self.classes_per_slice()?;
        Ok(self.rank_s_pairs().into_iter().flat_map(move |(r, s)| {
            (0..n).flat_map(move |i| {
                let c1 = self.class_at(i);
                [false, true].into_iter().filter_map(move |k| {
                    let v = MukaiVector::new(r, c1.with_kappa(k), s).expect("parity checked");
                    (!v.is_zero()).then_some(v)
                })
            })
        }))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CanonicalSummary {
    pub vector: Value,
    pub ell: i64,
    pub steps: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CensusRow {
    pub vector: MukaiVector,
    pub ell: i64,
    pub square: i64,
    pub primitive: bool,
    pub verdict: ExistenceVerdict,
    pub canonical: Option<CanonicalSummary>,
    pub reduction_error: Option<String>,
}

impl CensusRow {
    pub fn to_json(&self) -> Value {
        let mut row = serde_json::json!({
            "vector": vector_to_json(&self.vector),
            "ell": self.ell,
            "square": self.square,
            "primitive": self.primitive,
            "verdict": verdict_to_json(&self.verdict),
        });
        if let Some(c) = &self.canonical {
            row["canonical"] = serde_json::to_value(c).expect("summary serializes");
        }
        if let Some(e) = &self.reduction_error {
            row["reduction_error"] = Value::String(e.clone());
        }
        row
    }
}

pub fn census_row(
    v: &MukaiVector,
    ctx: &SurfaceContext,
    cfg: &ReductionConfig,
) -> Result<CensusRow> {
    let verdict = exists(v, ctx)?;
    let primitive = v.is_primitive();
    let (canonical, reduction_error) = if primitive && v.r() > 0 {
        match reduce(v, cfg) {
            Ok(f) => (
                Some(CanonicalSummary {
                    vector: vector_to_json(&f.vector),
                    ell: f.ell,
                    steps: f.trace.steps.len(),
                }),
                None,
            ),
            Err(e @ Error::Internal(_)) => return Err(e),
            Err(e) => (None, Some(e.to_string())),
        }
    } else {
        (None, None)
    };
    Ok(CensusRow {
        vector: *v,
        ell: v.content()?,
        square: v.square()?,
        primitive,
        verdict,
        canonical,
        reduction_error,
    })
}

const CHUNK: usize = 4096;

/// Evaluate the census in parallel chunks and hand rows to `emit` in order.
pub fn run_census<F>(
    bounds: &CensusBounds,
    ctx: &SurfaceContext,
    cfg: &ReductionConfig,
    mut emit: F,
) -> Result<()>
where
    F: FnMut(&CensusRow) -> Result<()>,
{
    let mut iter = bounds.vectors()?;
    loop {
        let chunk: Vec<MukaiVector> = iter.by_ref().take(CHUNK).collect();
        if chunk.is_empty() {
            return Ok(());
        }
        let rows: Vec<CensusRow> = chunk
            .par_iter()
            .map(|v| census_row(v, ctx, cfg))
            .collect::<Result<_>>()?;
        for row in &rows {
            emit(row)?;
        }
    }
}

/// Sign of `⟨v²⟩`.
fn sign(x: i64) -> i8 {
    x.signum() as i8
}

/// Row counts keyed by `(ℓ, sign of ⟨v²⟩, case)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CensusSummary {
    pub counts: BTreeMap<(i64, i8, Case), u64>,
    pub rows: u64,
    pub reduction_errors: u64,
}

impl CensusSummary {
    pub fn add(&mut self, row: &CensusRow) {
        *self
            .counts
            .entry((row.ell, sign(row.square), row.verdict.matched_case))
            .or_default() += 1;
        self.rows += 1;
        self.reduction_errors += u64::from(row.reduction_error.is_some());
    }

    pub fn to_json(&self) -> Value {
        let groups: Vec<Value> = self
            .counts
            .iter()
            .map(|((ell, sg, case), n)| serde_json::json!({"ell": ell, "sign": sg, "case": case.label(), "count": n}))
            .collect();
        serde_json::json!({"rows": self.rows, "reduction_errors": self.reduction_errors, "groups": groups})
    }
}
