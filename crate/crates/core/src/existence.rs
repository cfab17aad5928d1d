//! Non-emptiness of moduli of stable sheaves with a given Mukai vector on an
//! Enriques surface, for a generic polarization.
//!
//! The verdicts are lattice predicates only. Nodal-cycle data is taken on
//! trust: `(D²) = −2` is checked, effectivity and `|D + K_X| = ∅` are not.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{MukaiVector, NSClass};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurfaceContext {
    pub nodal: bool,
    pub ample: NSClass,
    /// Nodal cycles supplied by the caller, in priority order.
    pub nodal_cycles: Vec<NSClass>,
    /// The vector's torsion bit was not given and has been taken as 0.
    pub kappa_defaulted: bool,
}

impl Default for SurfaceContext {
    fn default() -> Self {
        SurfaceContext {
            nodal: false,
            ample: NSClass::new(1, 1, crate::lattice::E8Vector::ZERO),
            nodal_cycles: Vec::new(),
            kappa_defaulted: false,
        }
    }
}

impl SurfaceContext {
    pub fn unnodal() -> Self {
        SurfaceContext::default()
    }

    pub fn nodal(cycles: Vec<NSClass>) -> Self {
        SurfaceContext {
            nodal: true,
            nodal_cycles: cycles,
            ..SurfaceContext::default()
        }
    }

    fn check(&self) -> Result<()> {
        if self.ample.square()? <= 0 {
            return Err(Error::pre(format!(
                "ample class {} has (H²) ≤ 0",
                self.ample
            )));
        }
        for (i, d) in self.nodal_cycles.iter().enumerate() {
            let sq = d.square()?;
            if sq != -2 {
                return Err(Error::Input(format!(
                    "nodal cycle #{i} = {d} has (D²) = {sq}, expected −2"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Case {
    U1,
    U2,
    U3,
    #[serde(rename = "U_rank0_ineffective")]
    URank0Ineffective,
    N1,
    N2,
    N3,
    N4,
    #[serde(rename = "N4_fail")]
    N4Fail,
    NotPrimitive,
    ParityViolation,
    /// Decided and empty.
    #[serde(rename = "none")]
    Empty,
}

impl Case {
    pub fn nonempty(self) -> bool {
        matches!(
            self,
            Case::U1 | Case::U2 | Case::U3 | Case::N1 | Case::N2 | Case::N3 | Case::N4
        )
    }

    /// Whether the verdict is a decision rather than a lack of data.
    pub fn decided(self) -> bool {
        self != Case::N4Fail
    }

    pub fn label(self) -> &'static str {
        match self {
            Case::U1 => "U1",
            Case::U2 => "U2",
            Case::U3 => "U3",
            Case::URank0Ineffective => "U_rank0_ineffective",
            Case::N1 => "N1",
            Case::N2 => "N2",
            Case::N3 => "N3",
            Case::N4 => "N4",
            Case::N4Fail => "N4_fail",
            Case::NotPrimitive => "NotPrimitive",
            Case::ParityViolation => "ParityViolation",
            Case::Empty => "none",
        }
    }
}

/// `c1 ≡ target (mod 2)` on the free part together with the torsion-bit test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct KappaCheck {
    pub c1_congruent: bool,
    pub kappa_expected: bool,
    pub kappa_matches: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CycleMatch {
    pub index: usize,
    #[serde(rename = "D")]
    pub class: [i64; 10],
    #[serde(rename = "kappaD")]
    pub kappa: u8,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Certificate {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ell: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub square: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub effective: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa_check: Option<KappaCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodal_cycle: Option<CycleMatch>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExistenceVerdict {
    pub nonempty: bool,
    #[serde(rename = "case")]
    pub matched_case: Case,
    pub certificate: Certificate,
}

impl ExistenceVerdict {
    fn new(case: Case, certificate: Certificate) -> Self {
        ExistenceVerdict {
            nonempty: case.nonempty(),
            matched_case: case,
            certificate,
        }
    }

    /// Verdict for an `(r, s)` pair that is not a lattice vector at all.
    pub fn parity_violation(r: i64, s: i64) -> Self {
        let certificate = Certificate {
            notes: vec![format!("r = {r} and s = {s} differ mod 2")],
            ..Certificate::default()
        };
        ExistenceVerdict::new(Case::ParityViolation, certificate)
    }
}

fn congruence(c1: &NSClass, target: &NSClass, kappa_expected: bool, kappa: bool) -> KappaCheck {
    KappaCheck {
        c1_congruent: c1.free_congruent_mod_two(target),
        kappa_expected,
        kappa_matches: kappa == kappa_expected,
    }
}

fn half_rank_odd(r: i64) -> bool {
    (r / 2).rem_euclid(2) == 1
}

/// Cases shared by the nodal and unnodal predicates. `None` if none applies.
fn common_cases(
    v: &MukaiVector,
    ell: i64,
    square: i64,
    cert: &mut Certificate,
    labels: [Case; 3],
) -> Option<Case> {
    match (ell, square) {
        (1, sq) if sq >= -1 => Some(labels[0]),
        (2, sq) if sq >= 2 => Some(labels[1]),
        (2, 0) => {
            let check = congruence(v.c1(), &NSClass::ZERO, half_rank_odd(v.r()), v.kappa());
            cert.kappa_check = Some(check);
            (check.c1_congruent && check.kappa_matches).then_some(labels[2])
        }
        _ => None,
    }
}

fn prelude(
    v: &MukaiVector,
    ctx: &SurfaceContext,
) -> Result<std::result::Result<(i64, i64, Certificate), ExistenceVerdict>> {
    ctx.check()?;
    if v.r() < 0 {
        return Err(Error::NegativeRank(v.r()));
    }
    if !v.is_primitive() {
        return Ok(Err(ExistenceVerdict::new(
            Case::NotPrimitive,
            Certificate::default(),
        )));
    }
    let ell = v.content()?;
    let square = v.square()?;
    Ok(Ok((
        ell,
        square,
        Certificate {
            ell: Some(ell),
            square: Some(square),
            ..Certificate::default()
        },
    )))
}

fn kappa_note(ctx: &SurfaceContext, cert: &mut Certificate) {
    if ctx.kappa_defaulted && cert.kappa_check.is_some() {
        cert.notes.push(
            "kappa was not supplied; the K_X-sensitive branch was evaluated at kappa = 0".into(),
        );
    }
}

/// Non-emptiness on an unnodal surface.
pub fn exists_unnodal(v: &MukaiVector, ctx: &SurfaceContext) -> Result<ExistenceVerdict> {
    if ctx.nodal {
        return Err(Error::pre("exists_unnodal called with a nodal context"));
    }
    let (ell, square, mut cert) = match prelude(v, ctx)? {
        Ok(x) => x,
        Err(verdict) => return Ok(verdict),
    };
    if v.r() == 0 {
        let effective = v.c1().square()? >= 0 && v.c1().pairing(&ctx.ample)? > 0;
        cert.effective = Some(effective);
        if !effective {
            return Ok(ExistenceVerdict::new(Case::URank0Ineffective, cert));
        }
    }
    let case = common_cases(v, ell, square, &mut cert, [Case::U1, Case::U2, Case::U3])
        .unwrap_or(Case::Empty);
    kappa_note(ctx, &mut cert);
    Ok(ExistenceVerdict::new(case, cert))
}

/// Non-emptiness on a nodal surface with the caller's list of nodal cycles.
pub fn exists_nodal(v: &MukaiVector, ctx: &SurfaceContext) -> Result<ExistenceVerdict> {
    if !ctx.nodal {
        return Err(Error::pre("exists_nodal called with an unnodal context"));
    }
    let (ell, square, mut cert) = match prelude(v, ctx)? {
        Ok(x) => x,
        Err(verdict) => return Ok(verdict),
    };
    if v.r() == 0 {
        // Only positivity against H is required; (−2)-curves are effective.
        let effective = v.c1().pairing(&ctx.ample)? > 0;
        cert.effective = Some(effective);
        if !effective {
            return Ok(ExistenceVerdict::new(Case::URank0Ineffective, cert));
        }
    }
    if let Some(case) = common_cases(v, ell, square, &mut cert, [Case::N1, Case::N2, Case::N3]) {
        kappa_note(ctx, &mut cert);
        return Ok(ExistenceVerdict::new(case, cert));
    }
    if square != -2 {
        kappa_note(ctx, &mut cert);
        return Ok(ExistenceVerdict::new(Case::Empty, cert));
    }
    if ctx.nodal_cycles.is_empty() {
        cert.notes.push("no nodal data supplied".into());
        return Ok(ExistenceVerdict::new(Case::N4Fail, cert));
    }
    let mut first_check = None;
    for (index, d) in ctx.nodal_cycles.iter().enumerate() {
        let check = congruence(v.c1(), d, d.kappa ^ half_rank_odd(v.r()), v.kappa());
        first_check.get_or_insert(check);
        if check.c1_congruent && check.kappa_matches {
            cert.kappa_check = Some(check);
            cert.nodal_cycle = Some(CycleMatch {
                index,
                class: d.coords(),
                kappa: u8::from(d.kappa),
            });
            kappa_note(ctx, &mut cert);
            return Ok(ExistenceVerdict::new(Case::N4, cert));
        }
    }
    cert.kappa_check = first_check;
    kappa_note(ctx, &mut cert);
    Ok(ExistenceVerdict::new(Case::Empty, cert))
}

/// Dispatch on `ctx.nodal`.
pub fn exists(v: &MukaiVector, ctx: &SurfaceContext) -> Result<ExistenceVerdict> {
    if ctx.nodal {
        exists_nodal(v, ctx)
    } else {
        exists_unnodal(v, ctx)
    }
}

/// The rank-2 vector `(2, c1 + (r/2 − 1)K_X, r·s/2)` attached to an even-rank
/// vector with `⟨v²⟩ = −2`.
pub fn exceptional_shadow(v: &MukaiVector) -> Result<MukaiVector> {
    if v.r() <= 0 || v.r() % 2 != 0 {
        return Err(Error::pre(format!(
            "exceptional shadow needs even r > 0, got r = {}",
            v.r()
        )));
    }
    let sq = v.square()?;
    if sq != -2 {
        return Err(Error::pre(format!(
            "exceptional shadow needs ⟨v²⟩ = −2, got {sq}"
        )));
    }
    let kappa = v.kappa() ^ ((v.r() / 2 - 1) % 2 == 1);
    let s = crate::lattice::mul(v.r() / 2, v.s())?;
    MukaiVector::new(2, v.c1().with_kappa(kappa), s)
}

/// Whether `η` lies in the mod-2 class of some listed nodal cycle.
pub fn exceptional_eta_test(eta: &NSClass, r: i64, s: i64, ctx: &SurfaceContext) -> Result<bool> {
    if !ctx.nodal {
        return Err(Error::pre("exceptional_eta_test needs a nodal context"));
    }
    let sq = crate::lattice::add(eta.square()?, crate::lattice::mul(r, s)?)?;
    if sq != -2 {
        return Err(Error::pre(format!("(η²) + rs = {sq}, expected −2")));
    }
    ctx.check()?;
    Ok(ctx
        .nodal_cycles
        .iter()
        .any(|d| eta.free_congruent_mod_two(d)))
}
