//! Bounded constructive searches inside `E8(−1)`.
//!
//! Candidates are visited shell by shell in increasing sup-norm. Inside a
//! shell each coordinate runs through `0, 1, −1, 2, −2, …` and the first
//! coordinate varies fastest, so the order is fixed and platform independent.

use crate::error::{Error, Result};
use crate::lattice::{gcd, gcd_all, mul, narrow, sub, E8Vector, NSClass};

pub const DEFAULT_RADIUS: u32 = 6;

fn zigzag(i: u32) -> i64 {
    let i = i as i64;
    if i % 2 == 1 {
        (i + 1) / 2
    } else {
        -i / 2
    }
}

/// Every vector of sup-norm at most `radius`, in search order.
#[derive(Clone, Debug)]
pub struct Shells {
    radius: u32,
    shell: u32,
    digits: [u32; 8],
    started: bool,
}

impl Shells {
    pub fn new(radius: u32) -> Self {
        Shells {
            radius,
            shell: 0,
            digits: [0; 8],
            started: false,
        }
    }

    fn on_shell(&self) -> bool {
        self.shell == 0 || self.digits.iter().any(|&d| d + 1 >= 2 * self.shell)
    }

    fn advance(&mut self) -> bool {
        let top = 2 * self.shell;
        for d in self.digits.iter_mut() {
            if *d < top {
                *d += 1;
                return true;
            }
            *d = 0;
        }
        false
    }
}

impl Iterator for Shells {
    type Item = E8Vector;

    fn next(&mut self) -> Option<E8Vector> {
        loop {
            if !self.started {
                self.started = true;
            } else if !self.advance() {
                if self.shell >= self.radius {
                    return None;
                }
                self.shell += 1;
                self.digits = [0; 8];
            }
            if self.on_shell() {
                return Some(E8Vector(self.digits.map(zigzag)));
            }
        }
    }
}

fn first_in_ball<F>(radius: u32, what: &'static str, mut accept: F) -> Result<E8Vector>
where
    F: FnMut(&E8Vector) -> Result<bool>,
{
    for x in Shells::new(radius) {
        match accept(&x) {
            Ok(true) => return Ok(x),
            Ok(false) => {}
            Err(e) => return Err(e),
        }
    }
    Err(Error::SearchBound { what, radius })
}

fn dot(a: &[i64; 8], b: &[i64; 8]) -> Result<i64> {
    let mut t: i128 = 0;
    for i in 0..8 {
        t += a[i] as i128 * b[i] as i128;
    }
    narrow(t)
}

/// Integer `x` with `c·x = gcd(c)` together with seven vectors spanning the
/// kernel of `c`, by a Euclid step on all entries at once: the entry of least
/// magnitude reduces every other entry, with the same column operations
/// applied to a unimodular transform. Rounding to the nearest quotient keeps
/// the transform small.
fn gcd_combination(c: &[i64; 8]) -> Result<([i128; 8], Vec<[i128; 8]>)> {
    let mut a = c.map(|x| x as i128);
    let mut u = [[0i128; 8]; 8];
    for (j, col) in u.iter_mut().enumerate() {
        col[j] = 1;
    }
    loop {
        let pivot = (0..8)
            .filter(|&j| a[j] != 0)
            .min_by_key(|&j| a[j].unsigned_abs());
        let Some(p) = pivot else {
            return Err(Error::internal("gcd_combination of the zero functional"));
        };
        let mut done = true;
        for j in 0..8 {
            if j == p || a[j] == 0 {
                continue;
            }
            let mut q = a[j].div_euclid(a[p]);
            if 2 * (a[j] - q * a[p]) > a[p].abs() {
                q += a[p].signum();
            }
            a[j] -= q * a[p];
            let col = u[p];
            for (x, y) in u[j].iter_mut().zip(col) {
                *x = x
                    .checked_sub(q.checked_mul(y).ok_or(Error::Overflow)?)
                    .ok_or(Error::Overflow)?;
            }
            done &= a[j] == 0;
        }
        if done {
            let x = u[p].map(|y| a[p].signum() * y);
            let kernel = (0..8).filter(|&j| j != p).map(|j| u[j]).collect();
            return Ok((x, kernel));
        }
    }
}

fn dot_wide(a: &[i128; 8], b: &[i128; 8]) -> Result<i128> {
    a.iter().zip(b).try_fold(0i128, |t, (x, y)| {
        x.checked_mul(*y)
            .and_then(|p| t.checked_add(p))
            .ok_or(Error::Overflow)
    })
}

/// Greedily subtract kernel vectors while that strictly shortens `x` in the
/// coordinate norm. Large pairing targets would otherwise give solutions
/// whose square overflows downstream.
fn shorten(x: &mut [i128; 8], kernel: &[[i128; 8]]) -> Result<()> {
    let mut changed = true;
    while changed {
        changed = false;
        for k in kernel {
            let kk = dot_wide(k, k)?;
            let xk = dot_wide(x, k)?;
            if kk == 0 || 2 * xk.abs() <= kk {
                continue;
            }
            let mu = (2 * xk + kk).div_euclid(2 * kk);
            for (xi, ki) in x.iter_mut().zip(k) {
                *xi -= mu * ki;
            }
            changed = true;
        }
    }
    Ok(())
}

/// `η` with `(ξ, η) = t`.
///
/// The functional `(ξ, ·)` has coefficients `Gξ` whose gcd is `content(ξ)`
/// because `G` is unimodular. A single coordinate is used when one of them
/// already attains the gcd; otherwise the coefficients are combined by
/// repeated extended gcd.
pub fn solve_pairing(xi: &E8Vector, t: i64) -> Result<E8Vector> {
    if xi.is_zero() {
        return Err(Error::pre("solve_pairing needs ξ ≠ 0"));
    }
    if t == 0 {
        return Ok(E8Vector::ZERO);
    }
    let coeffs = xi.functional()?;
    let g = gcd_all(coeffs);
    if t % g != 0 {
        return Err(Error::Unreachable(format!(
            "(ξ, η) = {t} but content(ξ) = {g}"
        )));
    }
    let scale = t / g;
    let mut eta = [0i64; 8];
    if let Some(j) = coeffs.iter().position(|c| c.abs() == g) {
        eta[j] = scale * coeffs[j].signum();
    } else {
        let (x, kernel) = gcd_combination(&coeffs)?;
        let mut sol = [0i128; 8];
        for (slot, y) in sol.iter_mut().zip(x) {
            *slot = y.checked_mul(scale as i128).ok_or(Error::Overflow)?;
        }
        shorten(&mut sol, &kernel)?;
        for (slot, y) in eta.iter_mut().zip(sol) {
            *slot = narrow(y)?;
        }
    }
    let eta = E8Vector(eta);
    if xi.pairing(&eta)? != t {
        return Err(Error::internal(format!(
            "solve_pairing produced (ξ, η) ≠ {t}"
        )));
    }
    Ok(eta)
}

/// `s − 2(ξ, D) − r(D²)`, the s-slot after twisting `(r, ξ, s)` by `D ∈ E8(−1)`.
pub fn twisted_s(r: i64, xi_functional: &[i64; 8], s: i64, d: &E8Vector) -> Result<i64> {
    let cross = mul(2, dot(xi_functional, &d.0)?)?;
    sub(sub(s, cross)?, mul(r, d.square()?)?)
}

fn content_after(r: i64, xi: &E8Vector, d: &E8Vector) -> Result<i64> {
    Ok(xi.checked_add(&d.scaled(r)?)?.content())
}

/// `D ∈ E8(−1)` with `content(ξ + rD) = p` and `s − 2(ξ, D) − r(D²) > floor`.
pub fn content_twist_search(
    r: i64,
    xi: &E8Vector,
    s: i64,
    p: i64,
    floor: i64,
    radius: u32,
) -> Result<NSClass> {
    if r <= 0 {
        return Err(Error::pre(format!(
            "content_twist_search needs r > 0, got {r}"
        )));
    }
    let expected = gcd(r, xi.content());
    if p != expected {
        return Err(Error::pre(format!(
            "content_twist_search needs p = gcd(r, content ξ) = {expected}, got {p}"
        )));
    }
    let f = xi.functional()?;
    let d = first_in_ball(radius, "content twist", |d| {
        Ok(twisted_s(r, &f, s, d)? > floor && content_after(r, xi, d)? == p)
    })?;
    if content_after(r, xi, &d)? != p || twisted_s(r, &f, s, &d)? <= floor {
        return Err(Error::internal(
            "content_twist_search result failed re-verification",
        ));
    }
    Ok(NSClass::from_e8(d))
}

/// `D ∈ E8(−1)` with `s − 2(ξ, D) − r(D²) > floor`; content is not constrained.
pub fn s_enlarge_search(r: i64, xi: &E8Vector, s: i64, floor: i64, radius: u32) -> Result<NSClass> {
    if r <= 0 {
        return Err(Error::pre(format!("s_enlarge_search needs r > 0, got {r}")));
    }
    let f = xi.functional()?;
    let d = first_in_ball(radius, "s enlargement", |d| {
        Ok(twisted_s(r, &f, s, d)? > floor)
    })?;
    if twisted_s(r, &f, s, &d)? <= floor {
        return Err(Error::internal(
            "s_enlarge_search result failed re-verification",
        ));
    }
    Ok(NSClass::from_e8(d))
}

/// `η` with `(η²) − 2(ξ, η) ≡ 2 (mod 4)`.
pub fn mod4_square_search(xi: &E8Vector, radius: u32) -> Result<E8Vector> {
    if xi.is_zero() {
        return Err(Error::pre("mod4_square_search needs ξ ≠ 0"));
    }
    let f = xi.functional()?;
    first_in_ball(radius, "mod-4 square", |eta| {
        let v = sub(eta.square()?, mul(2, dot(&f, &eta.0)?)?)?;
        Ok(v.rem_euclid(4) == 2)
    })
}

/// `η` with `(ξ, η) = −1` when `(η²)/2` is even and `+1` when it is odd.
pub fn parity_pairing_search(xi: &E8Vector, radius: u32) -> Result<E8Vector> {
    if !xi.is_primitive() {
        return Err(Error::pre("parity_pairing_search needs ξ primitive"));
    }
    let f = xi.functional()?;
    first_in_ball(radius, "parity pairing", |eta| {
        let want = if (eta.square()? / 2).rem_euclid(2) == 0 {
            -1
        } else {
            1
        };
        Ok(dot(&f, &eta.0)? == want)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn a(i: usize) -> E8Vector {
        E8Vector::simple_root(i)
    }

    #[test]
    fn shell_order_starts_as_expected() {
        let head: Vec<_> = Shells::new(1).take(4).collect();
        assert_eq!(head[0], E8Vector::ZERO);
        assert_eq!(head[1], a(1));
        assert_eq!(head[2], -a(1));
        assert_eq!(head[3], a(2));
    }

    #[test]
    fn shells_cover_the_ball_once() {
        let all: Vec<_> = Shells::new(1).collect();
        assert_eq!(all.len(), 6561);
        let set: BTreeSet<_> = all.iter().collect();
        assert_eq!(set.len(), all.len());
        let norms: Vec<_> = all.iter().map(|x| x.sup_norm()).collect();
        assert!(norms.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(Shells::new(2).count(), 390_625);
        assert_eq!(Shells::new(0).collect::<Vec<_>>(), vec![E8Vector::ZERO]);
    }

    #[test]
    fn solve_pairing_examples() {
        assert_eq!(solve_pairing(&a(1), 1).unwrap(), a(3));
        assert!(matches!(
            solve_pairing(&a(1).scaled(2).unwrap(), 1),
            Err(Error::Unreachable(_))
        ));
        assert_eq!(solve_pairing(&a(1), 0).unwrap(), E8Vector::ZERO);
        assert!(matches!(
            solve_pairing(&E8Vector::ZERO, 0),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn solve_pairing_needs_combination() {
        // Gξ has entries with gcd 1 but none of absolute value 1.
        let xi = Shells::new(2)
            .find(|x| {
                let f = x.functional().unwrap();
                gcd_all(f) == 1 && f.iter().all(|c| c.abs() != 1)
            })
            .unwrap();
        for t in [-7, 1, 5, 12] {
            assert_eq!(xi.pairing(&solve_pairing(&xi, t).unwrap()).unwrap(), t);
        }
    }

    #[test]
    fn content_twist_examples() {
        let d = content_twist_search(2, &a(1).scaled(2).unwrap(), 0, 2, -8, 6).unwrap();
        assert!(d.is_free_zero());

        let d = content_twist_search(2, &E8Vector::ZERO, 2, 2, 4, 6).unwrap();
        assert_eq!(d, NSClass::from_e8(a(1)));

        let d = content_twist_search(4, &a(1), 0, 1, 0, 6).unwrap();
        assert_eq!(d, NSClass::from_e8(a(2)));

        assert!(matches!(
            content_twist_search(4, &a(1), 0, 2, 0, 6),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            content_twist_search(4, &a(1), 0, 1, 10_000, 1),
            Err(Error::SearchBound { radius: 1, .. })
        ));
    }

    #[test]
    fn mod4_examples() {
        let eta = mod4_square_search(&a(1), 6).unwrap();
        assert_eq!(eta, a(1));
        let check =
            |x: &E8Vector| (x.square().unwrap() - 2 * a(1).pairing(x).unwrap()).rem_euclid(4);
        assert_eq!(check(&a(2)), 2);
        assert_eq!(check(&a(1)), 2);
        assert_ne!(check(&E8Vector::ZERO), 2);
    }

    #[test]
    fn parity_pairing_examples() {
        assert_eq!(parity_pairing_search(&a(1), 6).unwrap(), a(3));
        assert_eq!(parity_pairing_search(&a(3), 6).unwrap(), a(1));
        assert!(matches!(
            parity_pairing_search(&a(1), 0),
            Err(Error::SearchBound { radius: 0, .. })
        ));
        assert!(parity_pairing_search(&a(1).scaled(2).unwrap(), 6).is_err());
    }

    #[test]
    fn range_law_on_a_small_ball() {
        for xi in [
            a(1),
            a(1).scaled(2).unwrap(),
            E8Vector([2, 0, 4, 0, 0, 0, 0, -2]),
            E8Vector([1, 1, 0, 0, 0, 0, 0, 0]),
        ] {
            let c = xi.content();
            let f = xi.functional().unwrap();
            let values: BTreeSet<i64> =
                Shells::new(1).map(|eta| dot(&f, &eta.0).unwrap()).collect();
            assert!(values.iter().all(|v| v % c == 0));
            let (lo, hi) = (*values.first().unwrap(), *values.last().unwrap());
            let mut m = lo;
            while m <= hi {
                assert!(values.contains(&m), "{m} missing for {xi:?}");
                m += c;
            }
        }
    }

    fn arb_xi() -> impl Strategy<Value = E8Vector> {
        prop::array::uniform8(-5i64..=5)
            .prop_map(E8Vector)
            .prop_filter("nonzero", |x| !x.is_zero())
    }

    proptest! {
        #[test]
        fn solve_pairing_is_exact(xi in arb_xi(), k in -20i64..=20) {
            let t = k * xi.content();
            prop_assert_eq!(xi.pairing(&solve_pairing(&xi, t)?)?, t);
        }

        #[test]
        fn unreachable_targets_error(unit in arb_xi(), k in 2i64..=5, t in -50i64..=50) {
            let xi = unit.scaled(k)?;
            prop_assume!(t % xi.content() != 0);
            let unreachable = matches!(solve_pairing(&xi, t), Err(Error::Unreachable(_)));
            prop_assert!(unreachable);
        }

        #[test]
        fn searches_are_deterministic(xi in prop::array::uniform8(-2i64..=2).prop_map(E8Vector)) {
            prop_assume!(xi.is_primitive());
            prop_assert_eq!(parity_pairing_search(&xi, 3)?, parity_pairing_search(&xi, 3)?);
            prop_assert_eq!(mod4_square_search(&xi, 3)?, mod4_square_search(&xi, 3)?);
        }
    }
}
