//! Reduction of a primitive Mukai vector of positive rank to a rank-2 (even
//! rank) or rank-1 (odd rank) canonical form by twists, reflections and
//! hyperbolic basis changes.
//!
//! Every function drives a [`TraceBuilder`], so the output always carries the
//! full move chain and is re-verified by replay before it is returned.

use crate::error::{Error, Result};
use crate::lattice::{gcd, mul, sub, E8Vector, MukaiVector, NSClass};
use crate::moves::{replay, MoveTrace, TraceBuilder};
use crate::search::{
    content_twist_search, mod4_square_search, parity_pairing_search, s_enlarge_search,
    solve_pairing, DEFAULT_RADIUS,
};

pub const DEFAULT_STEP_CAP: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReductionConfig {
    pub search_radius: u32,
    /// Maximum number of rounds of the rank-lowering loop.
    pub step_cap: usize,
}

impl Default for ReductionConfig {
    fn default() -> Self {
        ReductionConfig {
            search_radius: DEFAULT_RADIUS,
            step_cap: DEFAULT_STEP_CAP,
        }
    }
}

/// Which isotropic basis vector carries the `(r/2)·b` part of `c1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    /// `c1 = m·f + ξ`
    Fiber,
    /// `c1 = m·σ + ξ`
    Section,
}

impl Orientation {
    /// Split `c1` into `(m, ξ)`, rejecting any component along the other
    /// hyperbolic vector.
    fn split(self, c1: &NSClass) -> Result<(i64, E8Vector)> {
        let (m, other) = match self {
            Orientation::Fiber => (c1.d2, c1.d1),
            Orientation::Section => (c1.d1, c1.d2),
        };
        if other != 0 {
            let name = if self == Orientation::Fiber {
                "σ"
            } else {
                "f"
            };
            return Err(Error::pre(format!("c1 = {c1} has a {name}-component")));
        }
        Ok((m, c1.e))
    }

    /// `σ − ((η²)/2)f + η`, or the same with `σ` and `f` exchanged. Isotropic,
    /// and pairs to 1 with the vector carrying `m`.
    fn isotropic_lift(self, eta: &E8Vector) -> Result<NSClass> {
        let half = -(eta.square()? / 2);
        Ok(match self {
            Orientation::Fiber => NSClass::new(1, half, *eta),
            Orientation::Section => NSClass::new(half, 1, *eta),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalForm {
    pub vector: MukaiVector,
    pub ell: i64,
    pub trace: MoveTrace,
}

impl CanonicalForm {
    /// Replay the trace and check the target shape against `initial`.
    pub fn verify(&self) -> Result<()> {
        let initial = self.trace.initial;
        let end = replay(&self.trace)?;
        if end != self.vector {
            return Err(Error::internal(format!(
                "trace ends at {end} but the canonical form is {}",
                self.vector
            )));
        }
        let square = initial.square()?;
        let ell = initial.content()?;
        let v = self.vector;
        let fail = |what: &str| {
            Err(Error::internal(format!(
                "canonical form {v} of {initial}: {what}"
            )))
        };
        if v.square()? != square || v.content()? != ell || ell != self.ell || !v.is_primitive() {
            return fail("invariants not conserved");
        }
        if initial.r() % 2 == 0 {
            if v.r() != 2 {
                return fail("rank is not 2");
            }
            match ell {
                2 if !v.c1().is_free_zero() => return fail("ℓ = 2 but c1 ≠ 0"),
                1 if !v.c1().is_primitive() => return fail("ℓ = 1 but c1 is not primitive"),
                1 | 2 => {}
                _ => return fail("content outside {1, 2}"),
            }
        } else if v.r() != 1 || !v.c1().is_free_zero() || v.kappa() || v.s() != square {
            return fail("odd rank must end at (1, 0, ⟨v²⟩)");
        }
        Ok(())
    }
}

fn check_positive_primitive(v: &MukaiVector) -> Result<()> {
    if v.r() <= 0 {
        return Err(Error::pre(format!(
            "reduction needs r > 0, got r = {}",
            v.r()
        )));
    }
    if !v.is_primitive() {
        return Err(Error::NotPrimitive);
    }
    Ok(())
}

fn check_even_shape(v: &MukaiVector, orient: Orientation) -> Result<(i64, E8Vector)> {
    check_positive_primitive(v)?;
    if v.r() % 2 != 0 {
        return Err(Error::pre(format!("needs even rank, got r = {}", v.r())));
    }
    let (m, xi) = orient.split(v.c1())?;
    let half = v.r() / 2;
    if m != 0 && m != half && m != -half {
        return Err(Error::pre(format!("coefficient {m} is not in {{0, ±r/2}}")));
    }
    Ok((m, xi))
}

fn finish(tb: TraceBuilder) -> Result<CanonicalForm> {
    let trace = tb.finish();
    let form = CanonicalForm {
        vector: trace.result,
        ell: trace.initial.content()?,
        trace,
    };
    form.verify()?;
    Ok(form)
}

/// Two twist/reflect rounds that make `ξ/ℓ` primitive and push the rank past
/// `max(⟨v²⟩, 0)`; the `m·u` part is carried along unchanged.
fn lift_rank(
    tb: &mut TraceBuilder,
    orient: Orientation,
    second_variant: bool,
    cfg: &ReductionConfig,
) -> Result<()> {
    let start = *tb.current();
    let (r, s) = (start.r(), start.s());
    let (_, xi) = orient.split(start.c1())?;
    let floor = start.square()?.max(0);
    let modulus = mul(2, start.content()?)?;
    let radius = cfg.search_radius;

    let p = gcd(r, xi.content());
    tb.twist(content_twist_search(r, &xi, s, p, floor, radius)?)?;
    let flipped = tb.reflect()?;
    let (_, neg_xi1) = orient.split(flipped.c1())?;
    let l = gcd(flipped.r(), p);
    tb.twist(content_twist_search(
        flipped.r(),
        &neg_xi1,
        flipped.s(),
        l,
        floor,
        radius,
    )?)?;
    let out = tb.reflect()?;

    let (_, xi_out) = orient.split(out.c1())?;
    if sub(out.r(), r)?.rem_euclid(modulus) != 0 || sub(out.s(), s)?.rem_euclid(modulus) != 0 {
        return Err(Error::internal(format!(
            "{out} breaks the mod {modulus} congruence with {start}"
        )));
    }
    if out.r() <= floor || xi_out.content() != l {
        return Err(Error::internal(format!(
            "normalization of {start} ended at {out}"
        )));
    }

    if second_variant {
        tb.twist(content_twist_search(
            out.r(),
            &xi_out,
            out.s(),
            l,
            floor,
            radius,
        )?)?;
        let out2 = tb.reflect()?;
        if sub(out2.r(), out.s())?.rem_euclid(modulus) != 0 || out2.r() <= floor {
            return Err(Error::internal(format!(
                "second normalization of {out} ended at {out2}"
            )));
        }
    }
    Ok(())
}

/// Normalize `v = (r, (r/2)b·f + ξ, s)` so that `ξ′/ℓ` is primitive and the
/// rank exceeds `⟨v²⟩`. With `second_variant` one more twist and reflection
/// swaps the roles of rank and `s`.
pub fn normalize_primitive_part(
    v: &MukaiVector,
    second_variant: bool,
    cfg: &ReductionConfig,
) -> Result<(MukaiVector, MoveTrace)> {
    check_even_shape(v, Orientation::Fiber)?;
    let mut tb = TraceBuilder::new(*v);
    lift_rank(&mut tb, Orientation::Fiber, second_variant, cfg)?;
    let trace = tb.finish();
    replay(&trace)?;
    Ok((trace.result, trace))
}

/// Twist by `k·D` with `D` isotropic and `(c1, D) = pairing`, then reflect.
fn drop_to_rank_two(
    tb: &mut TraceBuilder,
    orient: Orientation,
    pairing: i64,
    k: i64,
) -> Result<()> {
    let v = *tb.current();
    let (m, xi) = orient.split(v.c1())?;
    let eta = solve_pairing(&xi, sub(pairing, m)?)?;
    let d = orient.isotropic_lift(&eta)?;
    tb.twist(d.scaled(k)?)?;
    if tb.current().s() != 2 {
        return Err(Error::internal(format!(
            "landing twist left s = {}",
            tb.current().s()
        )));
    }
    tb.reflect()?;
    Ok(())
}

fn land(
    tb: &mut TraceBuilder,
    orient: Orientation,
    cfg: &ReductionConfig,
    depth: u8,
) -> Result<()> {
    let v = *tb.current();
    if v.r() == 2 {
        return Ok(());
    }
    let (m, _) = check_even_shape(&v, orient)?;
    let (r, s) = (v.r(), v.s());
    let ell = v.content()?;
    if r % 4 == 0 && s.rem_euclid(4) == 2 {
        lift_rank(tb, orient, false, cfg)?;
        let s1 = tb.current().s();
        // (c1, D) = s′/2 − 1 brings the s-slot to exactly 2.
        drop_to_rank_two(tb, orient, s1 / 2 - 1, 1)
    } else if r % 4 == 2 && m == 0 && ell == 2 {
        if depth > 0 {
            return Err(Error::internal(format!(
                "rank-2 landing of {v} did not reach the r ≡ 0 (mod 4) case"
            )));
        }
        lift_rank(tb, orient, true, cfg)?;
        land(tb, orient, cfg, depth + 1)
    } else {
        lift_rank(tb, orient, false, cfg)?;
        let s1 = tb.current().s();
        drop_to_rank_two(tb, orient, 1, s1 / 2 - 1)
    }
}

/// Make a rank-2 vector's `c1` zero (content 2) or primitive (content 1).
fn finish_rank2(tb: &mut TraceBuilder) -> Result<()> {
    let c1 = tb.current().c1().free();
    let g = c1.content();
    if g == 0 || g == 1 {
        return Ok(());
    }
    let unit = NSClass::from_coords(c1.coords().map(|x| x / g));
    let k = if g % 2 == 0 { g / 2 } else { (g - 1) / 2 };
    tb.twist(-unit.scaled(k)?)?;
    Ok(())
}

/// Land `v = (r, (r/2)b·f + ξ, s)` on a rank-2 canonical form.
pub fn land_rank2(v: &MukaiVector, cfg: &ReductionConfig) -> Result<CanonicalForm> {
    check_even_shape(v, Orientation::Fiber)?;
    let mut tb = TraceBuilder::new(*v);
    land(&mut tb, Orientation::Fiber, cfg, 0)?;
    finish_rank2(&mut tb)?;
    finish(tb)
}

/// Bring `d1` and then `d2` into `(−r/2, r/2]` with twists by multiples of
/// `σ` and `f`.
fn normalize_hyperbolic(tb: &mut TraceBuilder) -> Result<(i64, i64)> {
    let r = tb.current().r();
    let low = -((r - 1) / 2);
    let shift = |x: i64| -> Result<i64> {
        let target = sub(x, low)?.rem_euclid(r) + low;
        Ok(sub(target, x)? / r)
    };
    let k = shift(tb.current().c1().d1)?;
    tb.twist(NSClass::sigma().scaled(k)?)?;
    let k = shift(tb.current().c1().d2)?;
    tb.twist(NSClass::fiber().scaled(k)?)?;
    let c1 = tb.current().c1();
    Ok((c1.d1, c1.d2))
}

/// Strictly lower the rank using the coefficient `d` of `c1` along the
/// hyperbolic vector dual to `along`: enlarge `s`, reflect, twist by a
/// multiple of `along`, reflect back.
fn drop_rank(
    tb: &mut TraceBuilder,
    along: Orientation,
    d: i64,
    cfg: &ReductionConfig,
) -> Result<()> {
    let v = *tb.current();
    let r = v.r();
    let floor = v.square()?.max(0);
    tb.twist(s_enlarge_search(
        r,
        &v.c1().e,
        v.s(),
        floor,
        cfg.search_radius,
    )?)?;
    tb.reflect()?;
    // Smallest j ≥ 1 with 0 < r − 2j|d| ≤ 2|d|.
    let width = mul(2, d.abs())?;
    let j = (r + width - 1) / width - 1;
    let k = -d.signum() * j;
    let unit = match along {
        Orientation::Fiber => NSClass::fiber(),
        Orientation::Section => NSClass::sigma(),
    };
    tb.twist(unit.scaled(k)?)?;
    let w = tb.reflect()?;
    if w.r() <= 0 || w.r() >= r || w.r() > width {
        return Err(Error::internal(format!("rank drop from {v} produced {w}")));
    }
    Ok(())
}

/// `η` for the basis change applied when `d1 = d2 = r/2`.
fn balanced_eta(v: &MukaiVector, cfg: &ReductionConfig) -> Result<E8Vector> {
    let r = v.r();
    let xi = v.c1().e;
    let c = xi.content();
    let k = c % r;
    if c == 0 || k == 0 {
        return Ok(E8Vector::simple_root(1));
    }
    let unit = xi.divided(c)?;
    if k == r / 2 {
        mod4_square_search(&unit, cfg.search_radius)
    } else {
        parity_pairing_search(&unit, cfg.search_radius)
    }
}

fn round_guard(rounds: &mut usize, cfg: &ReductionConfig) -> Result<()> {
    *rounds += 1;
    if *rounds > cfg.step_cap {
        return Err(Error::StepCap(cfg.step_cap));
    }
    Ok(())
}

/// Reduce a primitive vector of even positive rank to `(2, ξ, s′)` with `ξ`
/// primitive (content 1) or `(2, 0, s′)` (content 2).
pub fn reduce_even(v: &MukaiVector, cfg: &ReductionConfig) -> Result<CanonicalForm> {
    check_positive_primitive(v)?;
    if v.r() % 2 != 0 {
        return Err(Error::pre(format!(
            "reduce_even needs even rank, got r = {}",
            v.r()
        )));
    }
    let mut tb = TraceBuilder::new(*v);
    let mut rounds = 0;
    loop {
        round_guard(&mut rounds, cfg)?;
        let r = tb.current().r();
        if r == 2 {
            finish_rank2(&mut tb)?;
            break;
        }
        let half = r / 2;
        let (d1, d2) = normalize_hyperbolic(&mut tb)?;
        if d1 != 0 && d1 != half {
            drop_rank(&mut tb, Orientation::Fiber, d1, cfg)?;
        } else if d2 != 0 && d2 != half {
            drop_rank(&mut tb, Orientation::Section, d2, cfg)?;
        } else if d1 == 0 {
            land(&mut tb, Orientation::Fiber, cfg, 0)?;
        } else if d2 == 0 {
            land(&mut tb, Orientation::Section, cfg, 0)?;
        } else {
            let eta = balanced_eta(tb.current(), cfg)?;
            let w = tb.hyp_change(-eta)?;
            if sub(w.c1().d2, half)?.rem_euclid(r) == 0 {
                return Err(Error::internal(format!(
                    "basis change by {eta:?} left {w} balanced"
                )));
            }
        }
    }
    finish(tb)
}

/// Reduce a primitive vector of odd positive rank to `(1, 0, ⟨v²⟩)`.
pub fn reduce_odd(v: &MukaiVector, cfg: &ReductionConfig) -> Result<CanonicalForm> {
    check_positive_primitive(v)?;
    if v.r() % 2 == 0 {
        return Err(Error::pre(format!(
            "reduce_odd needs odd rank, got r = {}",
            v.r()
        )));
    }
    let mut tb = TraceBuilder::new(*v);
    let mut rounds = 0;
    loop {
        round_guard(&mut rounds, cfg)?;
        if tb.current().r() == 1 {
            let c1 = *tb.current().c1();
            tb.twist(-c1)?;
            break;
        }
        let (d1, d2) = normalize_hyperbolic(&mut tb)?;
        if d1 != 0 {
            drop_rank(&mut tb, Orientation::Fiber, d1, cfg)?;
        } else if d2 != 0 {
            drop_rank(&mut tb, Orientation::Section, d2, cfg)?;
        } else {
            lift_rank(&mut tb, Orientation::Fiber, false, cfg)?;
            let s1 = tb.current().s();
            let k = (s1 - 1) / 2;
            let (_, xi) = Orientation::Fiber.split(tb.current().c1())?;
            let d = Orientation::Fiber.isotropic_lift(&solve_pairing(&xi, 1)?)?;
            tb.twist(d.scaled(k)?)?;
            if tb.current().s() != 1 {
                return Err(Error::internal(format!(
                    "odd landing twist left s = {}",
                    tb.current().s()
                )));
            }
            tb.reflect()?;
        }
    }
    finish(tb)
}

/// Dispatch on the parity of the rank.
pub fn reduce(v: &MukaiVector, cfg: &ReductionConfig) -> Result<CanonicalForm> {
    if v.r() % 2 == 0 {
        reduce_even(v, cfg)
    } else {
        reduce_odd(v, cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::NSClass;
    use proptest::prelude::*;

    fn mv(r: i64, c1: NSClass, s: i64) -> MukaiVector {
        MukaiVector::new(r, c1, s).unwrap()
    }

    fn a(i: usize) -> NSClass {
        NSClass::root(i)
    }

    fn sf() -> NSClass {
        NSClass::sigma().checked_add(&NSClass::fiber()).unwrap()
    }

    fn cfg() -> ReductionConfig {
        ReductionConfig::default()
    }

    #[test]
    fn normalize_examples() {
        let v = mv(2, a(1), 4);
        let (w, trace) = normalize_primitive_part(&v, false, &cfg()).unwrap();
        assert_eq!(replay(&trace).unwrap(), w);
        assert!(w.r() > 6 && w.r() % 2 == 0);
        assert!(w.c1().e.is_primitive());
        assert_eq!(w.square().unwrap(), 6);

        let (w2, trace2) = normalize_primitive_part(&v, true, &cfg()).unwrap();
        assert_eq!(replay(&trace2).unwrap(), w2);
        assert!(w2.r() > 6);
        assert_eq!((w2.s() - w.r()).rem_euclid(2), 0);

        assert!(matches!(
            normalize_primitive_part(&mv(2, NSClass::sigma(), 0), false, &cfg()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn land_rank2_examples() {
        let f = land_rank2(&mv(2, NSClass::ZERO, 0), &cfg()).unwrap();
        assert_eq!(f.vector, mv(2, NSClass::ZERO, 0));
        assert!(f.trace.steps.is_empty());
        // (2, 0, 2) is twice (1, 0, 1).
        assert_eq!(
            land_rank2(&mv(2, NSClass::ZERO, 2), &cfg()),
            Err(Error::NotPrimitive)
        );

        let c1 = NSClass::fiber()
            .scaled(2)
            .unwrap()
            .checked_add(&a(1).scaled(2).unwrap())
            .unwrap();
        let v = mv(4, c1, 2);
        let f = land_rank2(&v, &cfg()).unwrap();
        assert_eq!(f.ell, 2);
        assert_eq!(f.vector.r(), 2);
        assert!(f.vector.c1().is_free_zero());
        assert_eq!(f.vector.s(), 0);

        let f = land_rank2(&mv(4, a(1), 0), &cfg()).unwrap();
        assert_eq!(f.vector.r(), 2);
        assert!(f.vector.c1().is_primitive());
        assert_eq!(f.vector.c1().square().unwrap() + 2 * f.vector.s(), -2);

        assert!(land_rank2(&mv(4, NSClass::sigma(), 0), &cfg()).is_err());
    }

    #[test]
    fn reduce_even_examples() {
        let f = reduce_even(&mv(4, sf(), 0), &cfg()).unwrap();
        assert_eq!(f.vector.r(), 2);
        assert_eq!(f.vector.c1().square().unwrap() + 2 * f.vector.s(), 2);

        let v = mv(6, NSClass::new(3, 3, E8Vector::ZERO), 0);
        assert!(matches!(reduce_even(&v, &cfg()), Err(Error::NotPrimitive)));

        let f = reduce_even(&mv(2, NSClass::sigma(), 0), &cfg()).unwrap();
        assert_eq!(f.vector, mv(2, NSClass::sigma(), 0));
    }

    #[test]
    fn reduce_odd_examples() {
        let f = reduce_odd(&mv(1, NSClass::ZERO, 3), &cfg()).unwrap();
        assert_eq!(f.vector, mv(1, NSClass::ZERO, 3));
        assert!(f.trace.steps.is_empty());
        assert_eq!(
            reduce_odd(&mv(1, sf(), 1), &cfg()).unwrap().vector,
            mv(1, NSClass::ZERO, 3)
        );
        assert_eq!(
            reduce_odd(&mv(3, NSClass::sigma(), 1), &cfg())
                .unwrap()
                .vector,
            mv(1, NSClass::ZERO, 3)
        );
        let f = reduce_odd(&mv(1, a(2), 1).with_kappa(true), &cfg()).unwrap();
        assert_eq!(f.vector, mv(1, NSClass::ZERO, -1));
    }

    #[test]
    fn balanced_coefficients_use_the_basis_change() {
        // d1 = d2 = r/2 with ξ of each residue class mod r.
        for xi in [
            NSClass::ZERO,
            a(1),
            a(1).scaled(2).unwrap(),
            a(1).scaled(4).unwrap(),
        ] {
            let c1 = NSClass::new(2, 2, E8Vector::ZERO).checked_add(&xi).unwrap();
            for s in [-4, -2, 0, 2, 4] {
                let v = mv(4, c1, s);
                if !v.is_primitive() {
                    continue;
                }
                let f = reduce_even(&v, &cfg()).unwrap();
                assert!(
                    f.trace
                        .steps
                        .iter()
                        .any(|m| matches!(m.kind, crate::moves::MoveKind::HypChange(_))),
                    "{v}"
                );
            }
        }
    }

    #[test]
    fn limits_are_hard_errors() {
        let v = mv(
            8,
            NSClass::new(3, 1, E8Vector::ZERO)
                .checked_add(&a(2))
                .unwrap(),
            4,
        );
        let tight = ReductionConfig {
            search_radius: 6,
            step_cap: 1,
        };
        assert_eq!(reduce_even(&v, &tight), Err(Error::StepCap(1)));
        let blind = ReductionConfig {
            search_radius: 0,
            step_cap: 64,
        };
        assert!(matches!(
            reduce_even(&v, &blind),
            Err(Error::SearchBound { radius: 0, .. })
        ));
    }

    fn primitive_positive() -> impl Strategy<Value = MukaiVector> {
        (
            1i64..=10,
            prop::array::uniform10(-3i64..=3),
            any::<bool>(),
            -10i64..=10,
        )
            .prop_map(|(r, c, k, s)| {
                let s = if (r - s) % 2 == 0 { s } else { s + 1 };
                MukaiVector::new(r, NSClass::from_coords(c).with_kappa(k), s).unwrap()
            })
            .prop_filter("primitive", |v| v.is_primitive())
    }

    proptest! {
        #[test]
        fn reduction_conserves_invariants(v in primitive_positive()) {
            let f = reduce(&v, &cfg())?;
            f.verify()?;
            prop_assert_eq!(f.vector.square()?, v.square()?);
            prop_assert_eq!(f.ell, v.content()?);
        }
    }
}
