//! Néron–Severi and Mukai lattice arithmetic for an Enriques surface.
//!
//! The free part of `NS(X)` is the even unimodular lattice `U ⊕ E8(−1)`.
//! Coordinates are `(d1, d2, e1..e8)` with respect to the hyperbolic pair
//! `σ, f` (`(σ²) = (f²) = 0`, `(σ, f) = 1`) followed by the Bourbaki simple
//! roots of `E8(−1)`. The 2-torsion canonical class `K_X` is carried as a
//! separate parity bit `kappa` that never enters a pairing.
//!
//! All arithmetic is on `i64` with every product and sum checked; anything
//! that would wrap surfaces as [`Error::Overflow`].

use std::fmt;
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};

/// Rank of the free Néron–Severi lattice.
pub const NS_RANK: usize = 10;

/// Edges of the E8 Dynkin diagram in Bourbaki numbering, 0-based:
/// 1–3, 2–4, 3–4, 4–5, 5–6, 6–7, 7–8.
pub const E8_EDGES: [(usize, usize); 7] = [(0, 2), (1, 3), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7)];

pub(crate) fn narrow(x: i128) -> Result<i64> {
    i64::try_from(x).map_err(|_| Error::Overflow)
}

pub(crate) fn add(a: i64, b: i64) -> Result<i64> {
    a.checked_add(b).ok_or(Error::Overflow)
}

pub(crate) fn sub(a: i64, b: i64) -> Result<i64> {
    a.checked_sub(b).ok_or(Error::Overflow)
}

pub(crate) fn mul(a: i64, b: i64) -> Result<i64> {
    a.checked_mul(b).ok_or(Error::Overflow)
}

fn wide_mul(a: i64, b: i64) -> i128 {
    a as i128 * b as i128
}

fn acc(total: i128, term: i128) -> Result<i128> {
    total.checked_add(term).ok_or(Error::Overflow)
}

/// Non-negative gcd; `gcd(0, 0) = 0`.
pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut x, mut y) = (a.unsigned_abs(), b.unsigned_abs());
    while y != 0 {
        (x, y) = (y, x % y);
    }
    // Only gcd(i64::MIN, 0) and gcd(i64::MIN, i64::MIN) exceed i64::MAX.
    i64::try_from(x).unwrap_or(i64::MAX)
}

pub fn gcd_all<I: IntoIterator<Item = i64>>(xs: I) -> i64 {
    xs.into_iter().fold(0, gcd)
}

/// An element of `E8(−1)` in simple-root coordinates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct E8Vector(pub [i64; 8]);

impl E8Vector {
    pub const ZERO: E8Vector = E8Vector([0; 8]);

    /// The simple root `α_i`, 1-based as in Bourbaki.
    pub fn simple_root(i: usize) -> Self {
        assert!((1..=8).contains(&i), "simple roots are α1..α8");
        let mut e = [0; 8];
        e[i - 1] = 1;
        E8Vector(e)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    pub fn pairing(&self, other: &E8Vector) -> Result<i64> {
        narrow(e8_pairing_wide(&self.0, &other.0)?)
    }

    pub fn square(&self) -> Result<i64> {
        self.pairing(self)
    }

    /// gcd of the coordinates; 0 for the zero vector.
    pub fn content(&self) -> i64 {
        gcd_all(self.0)
    }

    pub fn is_primitive(&self) -> bool {
        self.content() == 1
    }

    /// The linear functional `x ↦ (self, x)` as its 8 coefficients `G·self`.
    pub fn functional(&self) -> Result<[i64; 8]> {
        let mut out = [0; 8];
        for (j, slot) in out.iter_mut().enumerate() {
            *slot = self.pairing(&E8Vector::simple_root(j + 1))?;
        }
        Ok(out)
    }

    pub fn checked_add(&self, other: &E8Vector) -> Result<E8Vector> {
        let mut e = [0; 8];
        for i in 0..8 {
            e[i] = add(self.0[i], other.0[i])?;
        }
        Ok(E8Vector(e))
    }

    pub fn checked_sub(&self, other: &E8Vector) -> Result<E8Vector> {
        let mut e = [0; 8];
        for i in 0..8 {
            e[i] = sub(self.0[i], other.0[i])?;
        }
        Ok(E8Vector(e))
    }

    pub fn scaled(&self, k: i64) -> Result<E8Vector> {
        let mut e = [0; 8];
        for i in 0..8 {
            e[i] = mul(self.0[i], k)?;
        }
        Ok(E8Vector(e))
    }

    /// Exact division of every coordinate by `k`.
    pub fn divided(&self, k: i64) -> Result<E8Vector> {
        if k == 0 || self.0.iter().any(|x| x % k != 0) {
            return Err(Error::internal(format!("{self:?} is not divisible by {k}")));
        }
        Ok(E8Vector(self.0.map(|x| x / k)))
    }

    pub fn sup_norm(&self) -> u64 {
        self.0.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0)
    }
}

impl Neg for E8Vector {
    type Output = E8Vector;
    fn neg(self) -> E8Vector {
        E8Vector(self.0.map(|x| -x))
    }
}

/// Below this magnitude every pairing fits in `i64` without checks: products
/// stay under 2⁵² and there are fewer than 32 of them.
const SMALL: u64 = 1 << 26;

fn small(x: &[i64]) -> bool {
    x.iter().all(|v| v.unsigned_abs() < SMALL)
}

/// Wrapping ops are exact under the `SMALL` bound and let the loops vectorize.
fn e8_pairing_small(x: &[i64; 8], y: &[i64; 8]) -> i64 {
    let mut total = 0i64;
    for i in 0..8 {
        total = total.wrapping_sub(x[i].wrapping_mul(y[i]).wrapping_mul(2));
    }
    for &(i, j) in &E8_EDGES {
        total = total
            .wrapping_add(x[i].wrapping_mul(y[j]))
            .wrapping_add(x[j].wrapping_mul(y[i]));
    }
    total
}

fn e8_pairing_wide(x: &[i64; 8], y: &[i64; 8]) -> Result<i128> {
    if small(x) && small(y) {
        return Ok(e8_pairing_small(x, y) as i128);
    }
    let mut total = 0i128;
    for i in 0..8 {
        if x[i] != 0 && y[i] != 0 {
            total = acc(
                total,
                wide_mul(x[i], y[i])
                    .checked_mul(-2)
                    .ok_or(Error::Overflow)?,
            )?;
        }
    }
    for &(i, j) in &E8_EDGES {
        total = acc(total, wide_mul(x[i], y[j]))?;
        total = acc(total, wide_mul(x[j], y[i]))?;
    }
    Ok(total)
}

/// A class in `NS(X) = U ⊕ E8(−1) ⊕ ℤ/2·K_X`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NSClass {
    /// Coefficient of σ.
    pub d1: i64,
    /// Coefficient of f.
    pub d2: i64,
    pub e: E8Vector,
    /// Coefficient of the torsion class `K_X`.
    pub kappa: bool,
}

impl NSClass {
    pub const ZERO: NSClass = NSClass {
        d1: 0,
        d2: 0,
        e: E8Vector::ZERO,
        kappa: false,
    };

    pub fn new(d1: i64, d2: i64, e: E8Vector) -> Self {
        NSClass {
            d1,
            d2,
            e,
            kappa: false,
        }
    }

    pub fn from_coords(c: [i64; NS_RANK]) -> Self {
        let mut e = [0; 8];
        e.copy_from_slice(&c[2..]);
        NSClass::new(c[0], c[1], E8Vector(e))
    }

    pub fn with_kappa(mut self, kappa: bool) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn sigma() -> Self {
        NSClass::new(1, 0, E8Vector::ZERO)
    }

    pub fn fiber() -> Self {
        NSClass::new(0, 1, E8Vector::ZERO)
    }

    pub fn canonical() -> Self {
        NSClass::ZERO.with_kappa(true)
    }

    pub fn root(i: usize) -> Self {
        NSClass::from_e8(E8Vector::simple_root(i))
    }

    pub fn from_e8(e: E8Vector) -> Self {
        NSClass::new(0, 0, e)
    }

    pub fn coords(&self) -> [i64; NS_RANK] {
        let mut c = [0; NS_RANK];
        c[0] = self.d1;
        c[1] = self.d2;
        c[2..].copy_from_slice(&self.e.0);
        c
    }

    /// Intersection pairing of the free parts; torsion pairs to zero.
    pub fn pairing(&self, other: &NSClass) -> Result<i64> {
        if self.max_abs() < SMALL && other.max_abs() < SMALL {
            return Ok(e8_pairing_small(&self.e.0, &other.e.0)
                .wrapping_add(self.d1.wrapping_mul(other.d2))
                .wrapping_add(self.d2.wrapping_mul(other.d1)));
        }
        let mut total = e8_pairing_wide(&self.e.0, &other.e.0)?;
        total = acc(total, wide_mul(self.d1, other.d2))?;
        total = acc(total, wide_mul(self.d2, other.d1))?;
        narrow(total)
    }

    pub fn square(&self) -> Result<i64> {
        self.pairing(self)
    }

    /// Largest coordinate magnitude, for choosing unchecked fast paths.
    pub(crate) fn max_abs(&self) -> u64 {
        self.d1
            .unsigned_abs()
            .max(self.d2.unsigned_abs())
            .max(self.e.sup_norm())
    }

    /// gcd of the ten free coordinates; 0 for a torsion class.
    pub fn content(&self) -> i64 {
        gcd_all(self.coords())
    }

    pub fn is_primitive(&self) -> bool {
        self.content() == 1
    }

    /// The free part with `kappa` cleared.
    pub fn free(&self) -> NSClass {
        self.with_kappa(false)
    }

    pub fn is_free_zero(&self) -> bool {
        self.d1 == 0 && self.d2 == 0 && self.e.is_zero()
    }

    /// Free coordinates reduced mod 2, i.e. the class in `NS_f / 2·NS_f`.
    pub fn parity_class(&self) -> [u8; NS_RANK] {
        self.coords().map(|x| x.rem_euclid(2) as u8)
    }

    pub fn free_divisible_by_two(&self) -> bool {
        self.parity_class().iter().all(|&b| b == 0)
    }

    pub fn free_congruent_mod_two(&self, other: &NSClass) -> bool {
        self.parity_class() == other.parity_class()
    }

    pub fn checked_add(&self, other: &NSClass) -> Result<NSClass> {
        Ok(NSClass {
            d1: add(self.d1, other.d1)?,
            d2: add(self.d2, other.d2)?,
            e: self.e.checked_add(&other.e)?,
            kappa: self.kappa ^ other.kappa,
        })
    }

    pub fn checked_sub(&self, other: &NSClass) -> Result<NSClass> {
        Ok(NSClass {
            d1: sub(self.d1, other.d1)?,
            d2: sub(self.d2, other.d2)?,
            e: self.e.checked_sub(&other.e)?,
            kappa: self.kappa ^ other.kappa,
        })
    }

    /// `k·x`, including the torsion part (`k·K_X = (k mod 2)·K_X`).
    pub fn scaled(&self, k: i64) -> Result<NSClass> {
        Ok(NSClass {
            d1: mul(self.d1, k)?,
            d2: mul(self.d2, k)?,
            e: self.e.scaled(k)?,
            kappa: self.kappa && k.rem_euclid(2) == 1,
        })
    }
}

impl Neg for NSClass {
    type Output = NSClass;
    fn neg(self) -> NSClass {
        NSClass {
            d1: -self.d1,
            d2: -self.d2,
            e: -self.e,
            kappa: self.kappa,
        }
    }
}

impl fmt::Display for NSClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = self.coords();
        let parts: Vec<String> = c.iter().map(|x| x.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// The full 10×10 Gram matrix of `U ⊕ E8(−1)` in the fixed basis.
pub fn gram_matrix() -> [[i64; NS_RANK]; NS_RANK] {
    let mut g = [[0; NS_RANK]; NS_RANK];
    g[0][1] = 1;
    g[1][0] = 1;
    let e8 = e8_gram();
    for i in 0..8 {
        for j in 0..8 {
            g[i + 2][j + 2] = e8[i][j];
        }
    }
    g
}

/// The negated Cartan matrix of E8.
pub fn e8_gram() -> [[i64; 8]; 8] {
    let mut g = [[0; 8]; 8];
    for (i, row) in g.iter_mut().enumerate() {
        row[i] = -2;
    }
    for &(i, j) in &E8_EDGES {
        g[i][j] = 1;
        g[j][i] = 1;
    }
    g
}

/// Exact determinant by fraction-free (Bareiss) elimination.
pub fn determinant<const N: usize>(m: &[[i64; N]; N]) -> Result<i128> {
    let mut a: Vec<Vec<i128>> = m
        .iter()
        .map(|row| row.iter().map(|&x| x as i128).collect())
        .collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..N {
        if a[k][k] == 0 {
            match (k + 1..N).find(|&i| a[i][k] != 0) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return Ok(0),
            }
        }
        for i in k + 1..N {
            for j in k + 1..N {
                let num = a[i][j]
                    .checked_mul(a[k][k])
                    .and_then(|x| x.checked_sub(a[i][k].checked_mul(a[k][j])?))
                    .ok_or(Error::Overflow)?;
                a[i][j] = num / prev;
            }
        }
        prev = a[k][k];
    }
    Ok(sign * a[N - 1][N - 1])
}

/// Structural facts about the Gram matrix that everything else relies on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GramReport {
    pub det_free: i128,
    pub det_e8: i128,
    pub even_diagonal: bool,
    pub symmetric: bool,
}

impl GramReport {
    pub fn is_sound(&self) -> bool {
        self.det_free == -1 && self.det_e8 == 1 && self.even_diagonal && self.symmetric
    }
}

pub fn gram_report() -> Result<GramReport> {
    let g = gram_matrix();
    let even_diagonal = (0..NS_RANK).all(|i| g[i][i] % 2 == 0);
    let symmetric = (0..NS_RANK).all(|i| (0..NS_RANK).all(|j| g[i][j] == g[j][i]));
    Ok(GramReport {
        det_free: determinant(&g)?,
        det_e8: determinant(&e8_gram())?,
        even_diagonal,
        symmetric,
    })
}

/// Classification of a primitive vector by its content.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ContentClass {
    /// `gcd(r, c1, s)`; always 1 or 2 for a primitive vector.
    pub ell: i64,
    /// `(r + s) mod 4`, which must be 2 whenever `ell = 2`.
    pub r_plus_s_mod4: i64,
}

/// A Mukai vector `(r, c1, −s/2)`, stored as the integer triple `(r, c1, s)`.
///
/// `r ≡ s (mod 2)` is enforced at construction. The rank may be negative as
/// a lattice element; operations that need `r ≥ 0` check it themselves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MukaiVector {
    r: i64,
    c1: NSClass,
    s: i64,
}

impl MukaiVector {
    pub fn new(r: i64, c1: NSClass, s: i64) -> Result<Self> {
        if (r - s).rem_euclid(2) != 0 {
            return Err(Error::Parity { r, s });
        }
        Ok(MukaiVector { r, c1, s })
    }

    /// For moves, which preserve `r ≡ s (mod 2)` by construction.
    pub(crate) fn from_parts(r: i64, c1: NSClass, s: i64) -> Self {
        debug_assert!((r - s).rem_euclid(2) == 0);
        MukaiVector { r, c1, s }
    }

    /// Build from the χ-slot `a = −s/2` given as `numerator / 2`.
    pub fn from_half_a(r: i64, c1: NSClass, twice_a: i64) -> Result<Self> {
        MukaiVector::new(r, c1, twice_a.checked_neg().ok_or(Error::Overflow)?)
    }

    pub fn r(&self) -> i64 {
        self.r
    }

    pub fn c1(&self) -> &NSClass {
        &self.c1
    }

    pub fn s(&self) -> i64 {
        self.s
    }

    pub fn kappa(&self) -> bool {
        self.c1.kappa
    }

    pub fn with_kappa(mut self, kappa: bool) -> Self {
        self.c1.kappa = kappa;
        self
    }

    pub fn is_zero(&self) -> bool {
        self.r == 0 && self.s == 0 && self.c1.is_free_zero()
    }

    /// `⟨v, w⟩ = (c1, c1') + (r·s' + r'·s)/2`.
    pub fn pairing(&self, other: &MukaiVector) -> Result<i64> {
        let cross = acc(wide_mul(self.r, other.s), wide_mul(other.r, self.s))?;
        debug_assert!(cross % 2 == 0);
        let total = acc(self.c1.pairing(&other.c1)? as i128, cross / 2)?;
        narrow(total)
    }

    /// `⟨v²⟩ = (c1²) + r·s`.
    pub fn square(&self) -> Result<i64> {
        narrow(acc(self.c1.square()? as i128, wide_mul(self.r, self.s))?)
    }

    /// `gcd(r, c1, s)`.
    pub fn content(&self) -> Result<i64> {
        if self.is_zero() {
            return Err(Error::ZeroVector);
        }
        Ok(gcd(gcd(self.r, self.s), self.c1.content()))
    }

    /// Primitive in the Mukai lattice iff `gcd(r, c1, (r − s)/2) = 1`.
    pub fn is_primitive(&self) -> bool {
        let half = ((self.r as i128 - self.s as i128) / 2) as i64;
        gcd(gcd(self.r, half), self.c1.content()) == 1
    }

    pub fn classify_content(&self) -> Result<ContentClass> {
        if !self.is_primitive() {
            return Err(Error::NotPrimitive);
        }
        let ell = self.content()?;
        let r_plus_s_mod4 = ((self.r as i128 + self.s as i128).rem_euclid(4)) as i64;
        match ell {
            1 => {}
            2 => {
                let all_even =
                    self.r % 2 == 0 && self.s % 2 == 0 && self.c1.free_divisible_by_two();
                if !all_even || r_plus_s_mod4 != 2 {
                    return Err(Error::internal(format!(
                        "content 2 but r + s ≡ {r_plus_s_mod4} (mod 4) for {self}"
                    )));
                }
            }
            _ => {
                return Err(Error::internal(format!(
                    "primitive vector {self} has content {ell}"
                )));
            }
        }
        Ok(ContentClass { ell, r_plus_s_mod4 })
    }

    /// `Z(v) = ⟨e^{√−1·tH}, v⟩ = (r·t²(H²)/2 + s/2) + √−1·t·(H, c1)`.
    pub fn central_charge(
        &self,
        t: &BigRational,
        h: &NSClass,
    ) -> Result<(BigRational, BigRational)> {
        if !t.is_positive() {
            return Err(Error::pre("central charge needs t > 0"));
        }
        let h2 = h.square()?;
        if h2 <= 0 {
            return Err(Error::pre("central charge needs (H²) > 0"));
        }
        let two = BigRational::from_integer(BigInt::from(2));
        let re = BigRational::from_integer(BigInt::from(self.r))
            * t
            * t
            * BigRational::from_integer(BigInt::from(h2))
            / &two
            + BigRational::from_integer(BigInt::from(self.s)) / &two;
        let im = t * BigRational::from_integer(BigInt::from(h.pairing(&self.c1)?));
        debug_assert!(!re.denom().is_zero());
        Ok((re, im))
    }

    pub fn checked_add(&self, other: &MukaiVector) -> Result<MukaiVector> {
        MukaiVector::new(
            add(self.r, other.r)?,
            self.c1.checked_add(&other.c1)?,
            add(self.s, other.s)?,
        )
    }
}

impl fmt::Display for MukaiVector {
    /// `[r; d1,d2,e1..e8; s; kappa]`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}; {}; {}; {}]",
            self.r,
            self.c1,
            self.s,
            u8::from(self.c1.kappa)
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn a(i: usize) -> NSClass {
        NSClass::root(i)
    }

    fn mv(r: i64, c1: NSClass, s: i64) -> MukaiVector {
        MukaiVector::new(r, c1, s).unwrap()
    }

    #[test]
    fn gram_is_even_unimodular() {
        let rep = gram_report().unwrap();
        assert_eq!(rep.det_free, -1);
        assert_eq!(rep.det_e8, 1);
        assert!(rep.even_diagonal && rep.symmetric);
    }

    #[test]
    fn ns_pairing_examples() {
        let h = NSClass::sigma().checked_add(&NSClass::fiber()).unwrap();
        assert_eq!(h.square().unwrap(), 2);
        assert_eq!(a(1).square().unwrap(), -2);
        assert_eq!(a(1).pairing(&a(3)).unwrap(), 1);
        assert_eq!(a(1).pairing(&a(2)).unwrap(), 0);
        assert_eq!(a(2).pairing(&a(4)).unwrap(), 1);
    }

    #[test]
    fn pairing_matches_gram_matrix() {
        let g = gram_matrix();
        for i in 0..NS_RANK {
            for j in 0..NS_RANK {
                let mut x = [0; NS_RANK];
                let mut y = [0; NS_RANK];
                x[i] = 1;
                y[j] = 1;
                let p = NSClass::from_coords(x)
                    .pairing(&NSClass::from_coords(y))
                    .unwrap();
                assert_eq!(p, g[i][j], "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn mukai_pairing_examples() {
        let o = mv(1, NSClass::ZERO, -1);
        assert_eq!(o.pairing(&o).unwrap(), -1);
        assert_eq!(
            mv(2, NSClass::ZERO, 0)
                .pairing(&mv(0, NSClass::fiber(), 0))
                .unwrap(),
            0
        );
        let v = mv(2, a(1), 4);
        assert_eq!(v.pairing(&v).unwrap(), 6);
        assert_eq!(v.square().unwrap(), 6);
        assert_eq!(o.square().unwrap(), -1);
        assert_eq!(mv(2, NSClass::ZERO, 0).square().unwrap(), 0);
    }

    #[test]
    fn parity_is_enforced() {
        assert_eq!(
            MukaiVector::new(1, NSClass::ZERO, 0),
            Err(Error::Parity { r: 1, s: 0 })
        );
        assert!(MukaiVector::new(-3, NSClass::ZERO, 1).is_ok());
    }

    #[test]
    fn content_examples() {
        let sf = NSClass::sigma().checked_add(&NSClass::fiber()).unwrap();
        assert_eq!(mv(2, NSClass::ZERO, 0).content().unwrap(), 2);
        assert_eq!(mv(2, NSClass::sigma(), 0).content().unwrap(), 1);
        assert_eq!(mv(4, sf.scaled(2).unwrap(), 6).content().unwrap(), 2);
        assert_eq!(mv(0, NSClass::ZERO, 0).content(), Err(Error::ZeroVector));
    }

    #[test]
    fn primitivity_examples() {
        let sf = NSClass::sigma().checked_add(&NSClass::fiber()).unwrap();
        assert!(mv(2, NSClass::ZERO, 0).is_primitive());
        assert!(!mv(2, a(1).scaled(2).unwrap(), 2).is_primitive());
        assert!(mv(4, sf, 0).is_primitive());
        assert!(!mv(0, NSClass::ZERO, 0).is_primitive());
    }

    #[test]
    fn classify_examples() {
        let c = mv(2, NSClass::ZERO, 0).classify_content().unwrap();
        assert_eq!(
            c,
            ContentClass {
                ell: 2,
                r_plus_s_mod4: 2
            }
        );
        assert_eq!(
            mv(2, NSClass::sigma(), 0).classify_content().unwrap().ell,
            1
        );
        let c = mv(6, NSClass::sigma().scaled(2).unwrap(), 0)
            .classify_content()
            .unwrap();
        assert_eq!(
            c,
            ContentClass {
                ell: 2,
                r_plus_s_mod4: 2
            }
        );
        assert_eq!(
            mv(2, a(1).scaled(2).unwrap(), 2).classify_content(),
            Err(Error::NotPrimitive)
        );
    }

    #[test]
    fn central_charge_examples() {
        let h = NSClass::sigma().checked_add(&NSClass::fiber()).unwrap();
        let one = BigRational::from_integer(1.into());
        let q = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        assert_eq!(
            mv(2, NSClass::ZERO, 0).central_charge(&one, &h).unwrap(),
            (q(2, 1), q(0, 1))
        );
        assert_eq!(
            mv(0, NSClass::fiber(), 0).central_charge(&one, &h).unwrap(),
            (q(0, 1), q(1, 1))
        );
        assert_eq!(
            mv(1, NSClass::ZERO, -1).central_charge(&one, &h).unwrap(),
            (q(1, 2), q(0, 1))
        );
        assert!(mv(1, NSClass::ZERO, -1)
            .central_charge(&q(0, 1), &h)
            .is_err());
        assert!(mv(1, NSClass::ZERO, -1)
            .central_charge(&one, &NSClass::fiber())
            .is_err());
    }

    #[test]
    fn overflow_is_detected() {
        let big = NSClass::new(i64::MAX, i64::MAX, E8Vector::ZERO);
        assert_eq!(big.square(), Err(Error::Overflow));
        assert_eq!(big.scaled(2), Err(Error::Overflow));
        let v = mv(i64::MAX - 1, NSClass::ZERO, 4);
        assert_eq!(v.square(), Err(Error::Overflow));
    }

    #[test]
    fn display_is_bracket_form() {
        let v = mv(2, NSClass::ZERO, 0).with_kappa(true);
        assert_eq!(v.to_string(), "[2; 0,0,0,0,0,0,0,0,0,0; 0; 1]");
    }

    pub(crate) fn small_class() -> impl Strategy<Value = NSClass> {
        (prop::array::uniform10(-4i64..=4), any::<bool>())
            .prop_map(|(c, k)| NSClass::from_coords(c).with_kappa(k))
    }

    pub(crate) fn small_vector() -> impl Strategy<Value = MukaiVector> {
        (-6i64..=6, small_class(), -6i64..=6).prop_map(|(r, c1, s)| {
            let s = if (r - s) % 2 == 0 { s } else { s + 1 };
            MukaiVector::new(r, c1, s).unwrap()
        })
    }

    proptest! {
        #[test]
        fn mukai_pairing_symmetric_bilinear(u in small_vector(), v in small_vector(), w in small_vector(), k in -3i64..=3) {
            prop_assert_eq!(u.pairing(&v)?, v.pairing(&u)?);
            let vw = v.checked_add(&w)?;
            prop_assert_eq!(u.pairing(&vw)?, u.pairing(&v)? + u.pairing(&w)?);
            let kv = MukaiVector::new(k * v.r(), v.c1().scaled(k)?, k * v.s())?;
            prop_assert_eq!(u.pairing(&kv)?, k * u.pairing(&v)?);
            prop_assert_eq!(u.square()?, u.pairing(&u)?);
        }

        #[test]
        fn c1_square_is_even(v in small_vector()) {
            prop_assert_eq!((v.square()? - v.r() * v.s()).rem_euclid(2), 0);
        }

        #[test]
        fn central_charge_additive(v in small_vector(), w in small_vector(), n in 1i64..5, d in 1i64..5) {
            let h = NSClass::sigma().checked_add(&NSClass::fiber())?.checked_add(&NSClass::fiber())?;
            let t = BigRational::new(n.into(), d.into());
            let (vr, vi) = v.central_charge(&t, &h)?;
            let (wr, wi) = w.central_charge(&t, &h)?;
            let (sr, si) = v.checked_add(&w)?.central_charge(&t, &h)?;
            prop_assert_eq!(sr, vr + wr);
            prop_assert_eq!(si, vi + wi);
        }

        #[test]
        fn primitive_content_law(v in small_vector()) {
            if v.is_primitive() {
                let c = v.classify_content()?;
                prop_assert!(c.ell == 1 || c.ell == 2);
                if c.ell == 2 {
                    prop_assert_eq!(c.r_plus_s_mod4, 2);
                }
            }
        }
    }
}
