//! Isometries of the Mukai lattice used by the reduction: line-bundle twist,
//! the (−1)-reflection and the hyperbolic basis change, together with
//! replayable move traces.

use crate::error::{Error, Result};
use crate::lattice::{mul, sub, E8Vector, MukaiVector, NSClass, NS_RANK};

/// Coordinate bound below which moves use unchecked arithmetic.
const FAST: u64 = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MoveKind {
    /// Tensor by a line bundle of class `D`.
    Twist(NSClass),
    Reflect,
    /// Basis change `σ ↦ σ − ((η²)/2)f + η`, `f ↦ f`, `x ↦ x − (x, η)f`.
    HypChange(E8Vector),
}

/// `(⟨v²⟩, ℓ)` of the vector a move was applied to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Snapshot {
    pub square: i64,
    pub ell: i64,
}

impl Snapshot {
    pub fn of(v: &MukaiVector) -> Result<Snapshot> {
        Ok(Snapshot {
            square: v.square()?,
            ell: v.content()?,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Move {
    pub kind: MoveKind,
    pub before: Option<Snapshot>,
}

impl Move {
    pub fn bare(kind: MoveKind) -> Self {
        Move { kind, before: None }
    }

    pub fn apply(&self, v: &MukaiVector) -> Result<MukaiVector> {
        apply(&self.kind, v)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MoveTrace {
    pub initial: MukaiVector,
    pub steps: Vec<Move>,
    pub result: MukaiVector,
}

pub fn apply(kind: &MoveKind, v: &MukaiVector) -> Result<MukaiVector> {
    match kind {
        MoveKind::Twist(d) => twist(v, d),
        MoveKind::Reflect => reflect(v),
        MoveKind::HypChange(eta) => hyp_change(v, eta),
    }
}

/// `v·e^D = (r, c1 + rD, s − 2(c1, D) − r(D²))`.
///
/// The torsion bit becomes `kappa(v) + r·kappa(D)`.
pub fn twist(v: &MukaiVector, d: &NSClass) -> Result<MukaiVector> {
    let r = v.r();
    let shift = d.scaled(r)?;
    let c1 = v.c1().checked_add(&shift)?;
    let cross = mul(2, v.c1().pairing(d)?)?;
    let s = sub(sub(v.s(), cross)?, mul(r, d.square()?)?)?;
    MukaiVector::new(r, c1, s)
}

/// `(r, c1, s) ↦ (s, −c1, r)`, valid for `r, s > 0` and `(c1²) < 0`.
///
/// The determinant `L + (r/2)K_X` goes to `−(L + (s/2)K_X)`, so the torsion
/// bit moves by `(r + s)/2`.
pub fn reflect(v: &MukaiVector) -> Result<MukaiVector> {
    if v.r() <= 0 {
        return Err(Error::pre(format!(
            "reflect needs r > 0, got r = {}",
            v.r()
        )));
    }
    if v.s() <= 0 {
        return Err(Error::pre(format!(
            "reflect needs s > 0, got s = {}",
            v.s()
        )));
    }
    let c1_sq = v.c1().square()?;
    if c1_sq >= 0 {
        return Err(Error::pre(format!("reflect needs (c1²) < 0, got {c1_sq}")));
    }
    let flip = ((v.r() as i128 + v.s() as i128) / 2) % 2 == 1;
    let c1 = (-*v.c1()).with_kappa(v.kappa() ^ flip);
    MukaiVector::new(v.s(), c1, v.r())
}

/// The isometry `g_η` applied to `c1`; `r`, `s` and `kappa` are untouched.
pub fn hyp_change(v: &MukaiVector, eta: &E8Vector) -> Result<MukaiVector> {
    let c1 = hyp_image(v.c1(), eta)?;
    MukaiVector::new(v.r(), c1, v.s())
}

/// `g_η(d1σ + d2f + ξ) = d1σ + (d2 − d1(η²)/2 − (ξ, η))f + (ξ + d1η)`.
pub fn hyp_image(x: &NSClass, eta: &E8Vector) -> Result<NSClass> {
    let half_sq = eta.square()? / 2;
    let d2 = sub(sub(x.d2, mul(x.d1, half_sq)?)?, x.e.pairing(eta)?)?;
    let e = x.e.checked_add(&eta.scaled(x.d1)?)?;
    Ok(NSClass {
        d1: x.d1,
        d2,
        e,
        kappa: x.kappa,
    })
}

/// Matrix of `g_η` on the free lattice; column `j` is the image of basis vector `j`.
pub fn hyp_matrix(eta: &E8Vector) -> Result<[[i64; NS_RANK]; NS_RANK]> {
    let mut m = [[0; NS_RANK]; NS_RANK];
    for j in 0..NS_RANK {
        let mut b = [0; NS_RANK];
        b[j] = 1;
        let img = hyp_image(&NSClass::from_coords(b), eta)?.coords();
        for i in 0..NS_RANK {
            m[i][j] = img[i];
        }
    }
    Ok(m)
}

/// A move with its Gram-dependent data computed once, for applying the same
/// move to many vectors. Agrees with [`apply`] on every input.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PreparedMove {
    kind: MoveKind,
    /// `G·D` for a twist, `G·η` (E8 part) for a basis change.
    functional: [i64; NS_RANK],
    /// `(D²)` for a twist, `(η²)/2` for a basis change.
    square: i64,
    small: bool,
}

impl PreparedMove {
    pub fn new(kind: MoveKind) -> Result<Self> {
        let mut functional = [0; NS_RANK];
        let (square, small) = match &kind {
            MoveKind::Twist(d) => {
                functional[0] = d.d2;
                functional[1] = d.d1;
                functional[2..].copy_from_slice(&d.e.functional()?);
                (d.square()?, d.max_abs() < FAST)
            }
            MoveKind::HypChange(eta) => {
                functional[2..].copy_from_slice(&eta.functional()?);
                (eta.square()? / 2, eta.sup_norm() < FAST)
            }
            MoveKind::Reflect => (0, true),
        };
        Ok(PreparedMove {
            kind,
            functional,
            square,
            small,
        })
    }

    pub fn kind(&self) -> &MoveKind {
        &self.kind
    }

    pub fn apply(&self, v: &MukaiVector) -> Result<MukaiVector> {
        let (r, c) = (v.r(), v.c1());
        let fast = self.small
            && r.unsigned_abs() < FAST
            && v.s().unsigned_abs() < 1 << 40
            && c.max_abs() < FAST;
        if !fast {
            return apply(&self.kind, v);
        }
        // Under the bounds checked above nothing wraps, so wrapping ops are
        // exact and keep the loops free of overflow branches.
        let coords = c.coords();
        let dot = |from: usize| -> i64 {
            (from..NS_RANK).fold(0i64, |t, i| {
                t.wrapping_add(coords[i].wrapping_mul(self.functional[i]))
            })
        };
        let shifted = |base: &NSClass, k: i64, by: &E8Vector| {
            E8Vector(std::array::from_fn(|i| {
                base.e.0[i].wrapping_add(k.wrapping_mul(by.0[i]))
            }))
        };
        match &self.kind {
            MoveKind::Twist(d) => {
                let c1 = NSClass {
                    d1: c.d1.wrapping_add(r.wrapping_mul(d.d1)),
                    d2: c.d2.wrapping_add(r.wrapping_mul(d.d2)),
                    e: shifted(c, r, &d.e),
                    kappa: c.kappa ^ (r % 2 != 0 && d.kappa),
                };
                let s = v
                    .s()
                    .wrapping_sub(dot(0).wrapping_mul(2))
                    .wrapping_sub(r.wrapping_mul(self.square));
                Ok(MukaiVector::from_parts(r, c1, s))
            }
            MoveKind::HypChange(eta) => {
                let c1 = NSClass {
                    d1: c.d1,
                    d2: c
                        .d2
                        .wrapping_sub(c.d1.wrapping_mul(self.square))
                        .wrapping_sub(dot(2)),
                    e: shifted(c, c.d1, eta),
                    kappa: c.kappa,
                };
                Ok(MukaiVector::from_parts(r, c1, v.s()))
            }
            MoveKind::Reflect => reflect(v),
        }
    }
}

/// A rank-0 vector `(0, D, 0)` with `(D²) = ⟨v²⟩` and `(D, 2·fiber) = r`.
///
/// Only those two pairings are meaningful. The class itself is the fixed
/// choice `D = c1 + s·fiber`, which satisfies both because `(c1, fiber) = r/2`.
pub fn elliptic_shadow(v: &MukaiVector, fiber: &NSClass) -> Result<MukaiVector> {
    if v.r() <= 0 {
        return Err(Error::pre("elliptic shadow needs r > 0"));
    }
    if fiber.square()? != 0 {
        return Err(Error::pre("elliptic shadow needs an isotropic fiber class"));
    }
    if !fiber.is_primitive() {
        return Err(Error::pre("elliptic shadow needs a primitive fiber class"));
    }
    let half = v.c1().pairing(fiber)?;
    if v.r() % 2 != 0 || mul(2, half)? != v.r() {
        return Err(Error::pre(format!(
            "elliptic shadow needs (c1, f) = r/2, got (c1, f) = {half}, r = {}",
            v.r()
        )));
    }
    let d = v.c1().free().checked_add(&fiber.free().scaled(v.s())?)?;
    let out = MukaiVector::new(0, d, 0)?;
    debug_assert_eq!(d.square()?, v.square()?);
    Ok(out)
}

/// Accumulates moves while keeping the current vector.
#[derive(Clone, Debug)]
pub struct TraceBuilder {
    initial: MukaiVector,
    current: MukaiVector,
    steps: Vec<Move>,
}

impl TraceBuilder {
    pub fn new(v: MukaiVector) -> Self {
        TraceBuilder {
            initial: v,
            current: v,
            steps: Vec::new(),
        }
    }

    pub fn current(&self) -> &MukaiVector {
        &self.current
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn apply(&mut self, kind: MoveKind) -> Result<MukaiVector> {
        let before = Snapshot::of(&self.current)?;
        self.current = apply(&kind, &self.current)?;
        self.steps.push(Move {
            kind,
            before: Some(before),
        });
        Ok(self.current)
    }

    /// Twist, skipping the identity.
    pub fn twist(&mut self, d: NSClass) -> Result<MukaiVector> {
        if d.is_free_zero() && !d.kappa {
            return Ok(self.current);
        }
        self.apply(MoveKind::Twist(d))
    }

    pub fn twist_e8(&mut self, d: E8Vector) -> Result<MukaiVector> {
        self.twist(NSClass::from_e8(d))
    }

    pub fn reflect(&mut self) -> Result<MukaiVector> {
        self.apply(MoveKind::Reflect)
    }

    pub fn hyp_change(&mut self, eta: E8Vector) -> Result<MukaiVector> {
        self.apply(MoveKind::HypChange(eta))
    }

    pub fn finish(self) -> MoveTrace {
        MoveTrace {
            initial: self.initial,
            steps: self.steps,
            result: self.current,
        }
    }
}

fn invariants(v: &MukaiVector) -> Result<(i64, Option<i64>, bool)> {
    let ell = if v.is_zero() {
        None
    } else {
        Some(v.content()?)
    };
    Ok((v.square()?, ell, v.is_primitive()))
}

/// Re-apply every step, re-checking its precondition, the recorded snapshot
/// and conservation of `⟨v²⟩`, `ℓ` and primitivity.
pub fn replay(trace: &MoveTrace) -> Result<MukaiVector> {
    let mut v = trace.initial;
    let start = invariants(&v)?;
    for (index, step) in trace.steps.iter().enumerate() {
        if let Some(snap) = step.before {
            let now = Snapshot::of(&v).map_err(|e| Error::Trace {
                index,
                reason: e.to_string(),
            })?;
            if now != snap {
                return Err(Error::Trace {
                    index,
                    reason: format!(
                        "recorded (⟨v²⟩, ℓ) = ({}, {}) but recomputed ({}, {})",
                        snap.square, snap.ell, now.square, now.ell
                    ),
                });
            }
        }
        v = step.apply(&v).map_err(|e| Error::Trace {
            index,
            reason: e.to_string(),
        })?;
        let now = invariants(&v).map_err(|e| Error::Trace {
            index,
            reason: e.to_string(),
        })?;
        if now != start {
            return Err(Error::Trace {
                index,
                reason: format!("(⟨v²⟩, ℓ, primitive) changed from {start:?} to {now:?}"),
            });
        }
    }
    if v != trace.result {
        return Err(Error::Trace {
            index: trace.steps.len(),
            reason: format!("replay ends at {v} but the trace records {}", trace.result),
        });
    }
    Ok(v)
}

/// Sum of two twists, used by the group-law check.
pub fn compose_twists(d1: &NSClass, d2: &NSClass) -> Result<NSClass> {
    d1.checked_add(d2)
}
