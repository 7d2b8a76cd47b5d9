//! Trace of Frobenius for elliptic curves over prime fields.
//!
//! Three independent routes are provided: naive enumeration of affine points on the
//! general Weierstrass model, a Legendre-symbol sum over the short model, and a
//! baby-step giant-step order computation (Mestre's method, using the quadratic twist
//! to disambiguate) for large primes.

use std::collections::HashMap;

use crate::arith::{isqrt, kronecker, mod_pow, sqrt_mod, trial_factor};
use crate::error::{invalid, Result};

/// Primes at or above this bound use baby-step giant-step instead of a full character sum.
pub const BSGS_THRESHOLD: u64 = 2_000;

/// General Weierstrass model `y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Weierstrass {
    pub a1: i64,
    pub a2: i64,
    pub a3: i64,
    pub a4: i64,
    pub a6: i64,
}

impl Weierstrass {
    pub const fn new(a1: i64, a2: i64, a3: i64, a4: i64, a6: i64) -> Self {
        Self { a1, a2, a3, a4, a6 }
    }

    fn b_invariants(&self) -> (i128, i128, i128, i128) {
        let (a1, a2, a3, a4, a6) = (
            self.a1 as i128,
            self.a2 as i128,
            self.a3 as i128,
            self.a4 as i128,
            self.a6 as i128,
        );
        let b2 = a1 * a1 + 4 * a2;
        let b4 = 2 * a4 + a1 * a3;
        let b6 = a3 * a3 + 4 * a6;
        let b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4;
        (b2, b4, b6, b8)
    }

    pub fn c4(&self) -> i128 {
        let (b2, b4, _, _) = self.b_invariants();
        b2 * b2 - 24 * b4
    }

    pub fn c6(&self) -> i128 {
        let (b2, b4, b6, _) = self.b_invariants();
        -b2 * b2 * b2 + 36 * b2 * b4 - 216 * b6
    }

    pub fn discriminant(&self) -> i128 {
        let (b2, b4, b6, b8) = self.b_invariants();
        -b2 * b2 * b8 - 8 * b4 * b4 * b4 - 27 * b6 * b6 + 9 * b2 * b4 * b6
    }

    fn has_good_reduction(&self, p: u64) -> bool {
        self.discriminant() % p as i128 != 0
    }

    /// Short model coefficients `(A, B)` of `y^2 = x^3 + A x + B` reduced mod `p` (p >= 5).
    fn short_model_mod(&self, p: u64) -> (u64, u64) {
        let pp = p as i128;
        let a = (-27 * self.c4()).rem_euclid(pp) as u64;
        let b = (-54 * self.c6()).rem_euclid(pp) as u64;
        (a, b)
    }
}

/// Number of affine solutions over `F_p` by brute force over all `(x, y)`.
fn affine_count_naive(e: &Weierstrass, p: u64) -> u64 {
    let pp = p as i128;
    let r = |v: i64| (v as i128).rem_euclid(pp);
    let (a1, a2, a3, a4, a6) = (r(e.a1), r(e.a2), r(e.a3), r(e.a4), r(e.a6));
    let mut count = 0;
    for x in 0..pp {
        let rhs = (((x + a2) * x + a4) * x + a6).rem_euclid(pp);
        for y in 0..pp {
            if (y * y + a1 * x * y + a3 * y - rhs).rem_euclid(pp) == 0 {
                count += 1;
            }
        }
    }
    count
}

/// `a_p = p - #affine(F_p)` by exhaustive enumeration.
///
/// Valid for every prime, including `p = 2` and primes of bad reduction (where the
/// singular point is counted among the affine solutions).
pub fn ap_naive(e: &Weierstrass, p: u64) -> i64 {
    p as i64 - affine_count_naive(e, p) as i64
}

/// `a_p = -sum_x ((x^3 + A x + B)/p)` on the short model; requires `p >= 5`.
pub fn ap_legendre(e: &Weierstrass, p: u64) -> i64 {
    assert!(p >= 5, "short model needs p >= 5");
    let (a, b) = e.short_model_mod(p);
    let mut is_square = vec![false; p as usize];
    for y in 0..p {
        is_square[(y * y % p) as usize] = true;
    }
    let mut sum = 0i64;
    for x in 0..p {
        let f = ((x * x % p + a) % p * x % p + b) % p;
        if f != 0 {
            sum += if is_square[f as usize] { 1 } else { -1 };
        }
    }
    -sum
}

/// Trace of Frobenius at an odd prime of good reduction.
pub fn ap_point_count(e: &Weierstrass, p: u64) -> Result<i64> {
    if p == 2 {
        return invalid("p = 2 is not supported; all moduli are odd");
    }
    if !crate::arith::is_prime(p) {
        return invalid(format!("{p} is not prime"));
    }
    if !e.has_good_reduction(p) {
        return invalid(format!("p = {p} is a prime of bad reduction"));
    }
    Ok(if p == 3 {
        ap_naive(e, p)
    } else if p < BSGS_THRESHOLD {
        ap_legendre(e, p)
    } else {
        ap_bsgs(e, p)
    })
}

/// Local coefficient at a prime dividing the discriminant: +1 split multiplicative,
/// -1 non-split multiplicative, 0 additive. The model must be minimal at `p`.
pub fn ap_bad_prime(e: &Weierstrass, p: u64) -> Result<i64> {
    if p == 2 {
        return invalid("p = 2 is not supported; all moduli are odd");
    }
    if e.has_good_reduction(p) {
        return invalid(format!("p = {p} is a prime of good reduction"));
    }
    let pp = p as i128;
    if e.c4() % pp == 0 {
        return Ok(0);
    }
    let minus_c6 = (-e.c6()).rem_euclid(pp) as i64;
    Ok(kronecker(minus_c6, p as i64) as i64)
}

type Point = Option<(u64, u64)>;

struct ShortCurve {
    a: u64,
    b: u64,
    p: u64,
}

impl ShortCurve {
    fn mul_mod(&self, x: u64, y: u64) -> u64 {
        x * y % self.p
    }

    fn inv(&self, x: u64) -> u64 {
        let (mut t, mut new_t) = (0i64, 1i64);
        let (mut r, mut new_r) = (self.p as i64, x as i64);
        while new_r != 0 {
            let q = r / new_r;
            (t, new_t) = (new_t, t - q * new_t);
            (r, new_r) = (new_r, r - q * new_r);
        }
        debug_assert_eq!(r, 1);
        t.rem_euclid(self.p as i64) as u64
    }

    fn neg(&self, pt: Point) -> Point {
        pt.map(|(x, y)| (x, (self.p - y) % self.p))
    }

    fn add(&self, p1: Point, p2: Point) -> Point {
        let (Some((x1, y1)), Some((x2, y2))) = (p1, p2) else {
            return p1.or(p2);
        };
        let p = self.p;
        let lambda = if x1 == x2 {
            if (y1 + y2) % p == 0 {
                return None;
            }
            let num = (3 * self.mul_mod(x1, x1) + self.a) % p;
            self.mul_mod(num, self.inv(2 * y1 % p))
        } else {
            let num = (y2 + p - y1) % p;
            self.mul_mod(num, self.inv((x2 + p - x1) % p))
        };
        let x3 = (self.mul_mod(lambda, lambda) + 2 * p - x1 - x2) % p;
        let y3 = (self.mul_mod(lambda, (x1 + p - x3) % p) + p - y1) % p;
        Some((x3, y3))
    }

    fn mul(&self, mut k: u64, pt: Point) -> Point {
        let mut acc = None;
        let mut base = pt;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add(acc, base);
            }
            base = self.add(base, base);
            k >>= 1;
        }
        acc
    }

    /// Next point with x-coordinate at or after `*cursor`.
    fn next_point(&self, cursor: &mut u64) -> Point {
        let p = self.p;
        loop {
            let x = *cursor % p;
            *cursor += 1;
            let f = (self.mul_mod(self.mul_mod(x, x) + self.a, x) + self.b) % p;
            if let Some(y) = sqrt_mod(f, p) {
                return Some((x, y));
            }
        }
    }

    /// Exact order of `pt`, given that some multiple lies in `[low, high]`.
    fn order(&self, pt: Point, low: u64, high: u64) -> Option<u64> {
        let width = high - low;
        let s = isqrt(width) + 1;
        let mut baby: HashMap<(u64, u64), u64> = HashMap::with_capacity(s as usize);
        let mut cur = None;
        for j in 0..s {
            if let Some(c) = cur {
                baby.entry(c).or_insert(j);
            }
            cur = self.add(cur, pt);
        }
        let step = self.mul(s, pt);
        let mut t = self.mul(low, pt);
        let mut i = 0;
        let mut found = None;
        while i * s <= width {
            let j = match self.neg(t) {
                None => Some(0),
                Some(key) => baby.get(&key).copied(),
            };
            if let Some(j) = j {
                let m = low + i * s + j;
                if m <= high {
                    found = Some(m);
                    break;
                }
            }
            t = self.add(t, step);
            i += 1;
        }
        let mut m = found?;
        for (r, _) in trial_factor(m) {
            while m % r == 0 && self.mul(m / r, pt).is_none() {
                m /= r;
            }
        }
        Some(m)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / crate::arith::gcd(a, b) * b
}

/// Trace of Frobenius by baby-step giant-step on the curve and its quadratic twist.
///
/// Each point's exact order constrains `#E`; orders from the twist constrain
/// `2p + 2 - #E`. Points are drawn until a single group order in the Hasse interval
/// remains. Falls back to the character sum if that never happens.
pub fn ap_bsgs(e: &Weierstrass, p: u64) -> i64 {
    let (a, b) = e.short_model_mod(p);
    let curve = ShortCurve { a, b, p };
    let mut g = 2;
    while mod_pow(g, (p - 1) / 2, p) != p - 1 {
        g += 1;
    }
    let g2 = g * g % p;
    let twist = ShortCurve {
        a: a * g2 % p,
        b: b * (g2 * g % p) % p,
        p,
    };
    let s2 = isqrt(4 * p);
    let (low, high) = (p + 1 - s2, p + 1 + s2);
    let (mut l_e, mut l_t) = (1u64, 1u64);
    let (mut cur_e, mut cur_t) = (0u64, 0u64);
    for _ in 0..200 {
        for (which, c) in [(0, &curve), (1, &twist)] {
            let cursor = if which == 0 { &mut cur_e } else { &mut cur_t };
            let pt = c.next_point(cursor);
            let Some(ord) = c.order(pt, low, high) else {
                continue;
            };
            if which == 0 {
                l_e = lcm(l_e, ord);
            } else {
                l_t = lcm(l_t, ord);
            }
            let first = low.div_ceil(l_e) * l_e;
            let mut candidate = None;
            let mut count = 0;
            let mut n = first;
            while n <= high {
                if (2 * p + 2 - n) % l_t == 0 {
                    candidate = Some(n);
                    count += 1;
                    if count > 1 {
                        break;
                    }
                }
                n += l_e;
            }
            if count == 1 {
                return p as i64 + 1 - candidate.unwrap() as i64;
            }
        }
    }
    ap_legendre(e, p)
}
