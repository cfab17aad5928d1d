//! Brute-force cross-check of the library against naive re-implementations.
//!
//! Nothing here calls the lattice arithmetic of [`crate::lattice`] or
//! [`crate::moves`]: the Gram matrix is rebuilt from the Dynkin diagram,
//! pairings are plain `xᵀGy` sums in `i128`, and trace steps are re-applied
//! from their defining formulas.

use rayon::prelude::*;
use serde::Serialize;

use crate::census::CensusBounds;
use crate::error::Result;
use crate::existence::{exists_unnodal, SurfaceContext};
use crate::lattice::MukaiVector;
use crate::moves::{MoveKind, MoveTrace};
use crate::reduction::{reduce, ReductionConfig};

type Gram = [[i128; 10]; 10];

/// `U ⊕ E8(−1)`: the E8 diagram is the chain 1–3–4–5–6–7–8 with 2 attached
/// to 4. With `perturb` one diagonal entry is deliberately wrong.
pub fn oracle_gram(perturb: bool) -> Gram {
    let mut g = [[0i128; 10]; 10];
    g[0][1] = 1;
    g[1][0] = 1;
    for i in 2..10 {
        g[i][i] = -2;
    }
    let chain = [1, 3, 4, 5, 6, 7, 8];
    let mut edges: Vec<(usize, usize)> = chain.windows(2).map(|w| (w[0], w[1])).collect();
    edges.push((2, 4));
    for (a, b) in edges {
        g[a + 1][b + 1] = 1;
        g[b + 1][a + 1] = 1;
    }
    if perturb {
        g[2][2] = -4;
    }
    g
}

fn pair(g: &Gram, x: &[i128; 10], y: &[i128; 10]) -> i128 {
    let mut t = 0;
    for i in 0..10 {
        for j in 0..10 {
            t += x[i] * g[i][j] * y[j];
        }
    }
    t
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Raw {
    r: i128,
    c: [i128; 10],
    s: i128,
    kappa: bool,
}

impl Raw {
    fn of(v: &MukaiVector) -> Raw {
        Raw {
            r: v.r() as i128,
            c: v.c1().coords().map(|x| x as i128),
            s: v.s() as i128,
            kappa: v.kappa(),
        }
    }

    fn square(&self, g: &Gram) -> i128 {
        pair(g, &self.c, &self.c) + self.r * self.s
    }

    fn content(&self) -> i128 {
        self.c
            .iter()
            .fold(gcd(self.r, self.s), |acc, &x| gcd(acc, x))
    }

    fn primitive(&self) -> bool {
        self.c
            .iter()
            .fold(gcd(self.r, (self.r - self.s) / 2), |acc, &x| gcd(acc, x))
            == 1
    }

    fn c_content(&self) -> i128 {
        self.c.iter().fold(0, |acc, &x| gcd(acc, x))
    }
}

fn step(g: &Gram, v: &Raw, kind: &MoveKind) -> std::result::Result<Raw, String> {
    match kind {
        MoveKind::Twist(d) => {
            let d10 = d.coords().map(|x| x as i128);
            let mut c = v.c;
            for i in 0..10 {
                c[i] += v.r * d10[i];
            }
            let s = v.s - 2 * pair(g, &v.c, &d10) - v.r * pair(g, &d10, &d10);
            Ok(Raw {
                r: v.r,
                c,
                s,
                kappa: v.kappa ^ (v.r % 2 != 0 && d.kappa),
            })
        }
        MoveKind::Reflect => {
            if v.r <= 0 || v.s <= 0 || pair(g, &v.c, &v.c) >= 0 {
                return Err("reflection applied outside r > 0, s > 0, (c1²) < 0".into());
            }
            Ok(Raw {
                r: v.s,
                c: v.c.map(|x| -x),
                s: v.r,
                kappa: v.kappa ^ (((v.r + v.s) / 2) % 2 != 0),
            })
        }
        MoveKind::HypChange(eta) => {
            let mut e10 = [0i128; 10];
            for i in 0..8 {
                e10[i + 2] = eta.0[i] as i128;
            }
            let mut xi = v.c;
            xi[0] = 0;
            xi[1] = 0;
            let d1 = v.c[0];
            let mut c = v.c;
            c[1] = v.c[1] - d1 * pair(g, &e10, &e10) / 2 - pair(g, &xi, &e10);
            for i in 2..10 {
                c[i] += d1 * e10[i];
            }
            Ok(Raw { c, ..*v })
        }
    }
}

/// Independent replay: invariants at every step, the recorded end, and the
/// canonical shape.
fn check_trace(g: &Gram, trace: &MoveTrace) -> std::result::Result<Raw, String> {
    let start = Raw::of(&trace.initial);
    let key = |x: &Raw| (x.square(g), x.content(), x.primitive());
    let want = key(&start);
    let mut cur = start;
    for (i, m) in trace.steps.iter().enumerate() {
        cur = step(g, &cur, &m.kind).map_err(|e| format!("step {i}: {e}"))?;
        if key(&cur) != want {
            return Err(format!(
                "step {i}: invariants changed from {want:?} to {:?}",
                key(&cur)
            ));
        }
    }
    if cur != Raw::of(&trace.result) {
        return Err("independent replay disagrees with the recorded end".into());
    }
    let (sq, ell, _) = want;
    let shape_ok = if start.r % 2 == 0 {
        cur.r == 2
            && match ell {
                2 => cur.c_content() == 0 && 2 * cur.s == sq,
                1 => cur.c_content() == 1 && pair(g, &cur.c, &cur.c) + 2 * cur.s == sq,
                _ => false,
            }
    } else {
        cur.r == 1 && cur.c_content() == 0 && !cur.kappa && cur.s == sq
    };
    if !shape_ok {
        return Err(format!(
            "canonical shape violated: ({}, {:?}, {})",
            cur.r, cur.c, cur.s
        ));
    }
    Ok(cur)
}

/// Unnodal verdict for the default polarization `σ + f`.
fn verdict(g: &Gram, v: &Raw) -> bool {
    if !v.primitive() {
        return false;
    }
    if v.r == 0 {
        let mut h = [0i128; 10];
        h[0] = 1;
        h[1] = 1;
        if pair(g, &v.c, &v.c) < 0 || pair(g, &v.c, &h) <= 0 {
            return false;
        }
    }
    let sq = v.square(g);
    match v.content() {
        1 => sq >= -1,
        2 => {
            sq >= 2
                || (sq == 0 && v.c.iter().all(|x| x % 2 == 0) && v.kappa == ((v.r / 2) % 2 != 0))
        }
        _ => false,
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct OracleReport {
    pub vectors: u64,
    pub primitive: u64,
    pub reduced: u64,
    pub violations: u64,
    /// The first violations, in enumeration order.
    pub examples: Vec<String>,
}

impl OracleReport {
    fn merge(mut self, other: OracleReport, keep: usize) -> OracleReport {
        self.vectors += other.vectors;
        self.primitive += other.primitive;
        self.reduced += other.reduced;
        self.violations += other.violations;
        for e in other.examples {
            if self.examples.len() < keep {
                self.examples.push(e);
            }
        }
        self
    }
}

#[derive(Clone, Copy, Debug)]
pub struct OracleOptions {
    pub bounds: CensusBounds,
    pub perturb_gram: bool,
    pub max_examples: usize,
}

fn check_vector(
    g: &Gram,
    v: &MukaiVector,
    cfg: &ReductionConfig,
    ctx: &SurfaceContext,
) -> Result<OracleReport> {
    let raw = Raw::of(v);
    let mut rep = OracleReport {
        vectors: 1,
        ..OracleReport::default()
    };
    let mut bad = |what: String| {
        rep.violations += 1;
        rep.examples.push(format!("{v}: {what}"));
    };
    let (sq, ell, prim) = (raw.square(g), raw.content(), raw.primitive());
    let core = (
        v.square().ok().map(i128::from),
        v.content().ok().map(i128::from),
        v.is_primitive(),
    );
    if core != (Some(sq), Some(ell), prim) {
        bad(format!(
            "library (⟨v²⟩, ℓ, primitive) = {core:?}, oracle ({sq}, {ell}, {prim})"
        ));
    }
    let expected = verdict(g, &raw);
    let got = exists_unnodal(v, ctx)?.nonempty;
    if got != expected {
        bad(format!("library verdict {got}, oracle {expected}"));
    }
    if prim {
        rep.primitive = 1;
        if v.r() > 0 {
            match reduce(v, cfg) {
                Ok(form) => {
                    rep.reduced = 1;
                    match check_trace(g, &form.trace) {
                        Ok(end) if verdict(g, &end) != expected => {
                            bad("canonical form changes the verdict".into())
                        }
                        Ok(_) => {}
                        Err(e) => bad(e),
                    }
                }
                Err(e) => bad(format!("reduction failed: {e}")),
            }
        }
    }
    Ok(rep)
}

/// Check every vector of the box, both torsion bits.
pub fn oracle_check(opts: &OracleOptions, cfg: &ReductionConfig) -> Result<OracleReport> {
    let g = oracle_gram(opts.perturb_gram);
    let ctx = SurfaceContext::unnodal();
    let vectors: Vec<MukaiVector> = opts.bounds.vectors()?.collect();
    let keep = opts.max_examples;
    vectors
        .par_iter()
        .map(|v| check_vector(&g, v, cfg, &ctx))
        .try_fold(OracleReport::default, |acc, r| Ok(acc.merge(r?, keep)))
        .try_reduce(OracleReport::default, |a, b| Ok(a.merge(b, keep)))
        .map(|mut rep| {
            rep.examples.sort();
            rep
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::gram_matrix;

    #[test]
    fn rebuilt_gram_agrees() {
        let g = oracle_gram(false);
        let lib = gram_matrix();
        for i in 0..10 {
            for j in 0..10 {
                assert_eq!(g[i][j], lib[i][j] as i128);
            }
        }
    }

    fn opts(perturb: bool) -> OracleOptions {
        OracleOptions {
            bounds: CensusBounds::new(4, 4, 0).unwrap(),
            perturb_gram: perturb,
            max_examples: 5,
        }
    }

    #[test]
    fn clean_run_has_no_violations() {
        let rep = oracle_check(&opts(false), &ReductionConfig::default()).unwrap();
        assert_eq!(rep.violations, 0, "{:?}", rep.examples);
        assert!(rep.reduced > 0);
    }

    #[test]
    fn perturbed_gram_is_caught() {
        let o = OracleOptions {
            bounds: CensusBounds::new(2, 2, 1).unwrap(),
            ..opts(true)
        };
        let rep = oracle_check(&o, &ReductionConfig::default()).unwrap();
        assert!(rep.violations > 0);
        assert!(rep.examples.len() <= 5);
    }
}
