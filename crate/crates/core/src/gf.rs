//! Arithmetic in one ambient finite field GF(p^N).
//!
//! Every subfield GF(p^d) with d | N lives inside the ambient field, so
//! values from different subfields mix freely. Elements are stored as the
//! integer `sum c_i p^(N-1-i)` of their coefficient vector `(c_0, .., c_{N-1})`
//! in the power basis of the modulus. Putting the constant coefficient in the
//! most significant digit makes integer order coincide with the canonical
//! (lexicographic, constant term first) order on coefficient vectors.
//!
//! Multiplication, inversion and powering go through exp/log tables built
//! once by walking the powers of the least primitive element.

use std::collections::BTreeSet;
use std::fmt;

use num_integer::Integer;
use thiserror::Error;

/// Hard cap on the ambient field size, in bits.
pub const MAX_FIELD_BITS: u32 = 24;

/// Default cap for the Kummer-type root scan.
pub const DEFAULT_SCAN_CAP: u64 = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GfError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("no extension degrees requested")]
    NoDegrees,
    #[error("ambient field GF({p}^{n}) exceeds the {cap}-bit cap")]
    AmbientTooLarge { p: u64, n: u64, cap: u32 },
    #[error("division by zero")]
    DivByZero,
    #[error("GF(p^{0}) is not a subfield of the ambient field")]
    NotASubfield(u32),
    #[error("polynomial is not additive: exponent {0} is not a power of p")]
    NotAdditive(u64),
}

/// An element of the ambient field. Only meaningful together with the
/// [`FieldCtx`] that produced it.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct FieldElem(u32);

impl FieldElem {
    pub const ZERO: FieldElem = FieldElem(0);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Raw index in canonical order.
    pub fn index(self) -> u32 {
        self.0
    }
}

/// Arithmetic operation selector for [`FieldCtx::arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// The ambient field GF(p^N) together with its arithmetic tables.
pub struct FieldCtx {
    p: u32,
    n: u32,
    size: u32,
    modulus: Vec<u32>,
    subfield_degrees: BTreeSet<u32>,
    /// `weights[i] = p^(N-1-i)`, the digit weight of coefficient `i`.
    weights: Vec<u32>,
    exp: Vec<u32>,
    log: Vec<u32>,
    one: FieldElem,
    scan_cap: u64,
}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldCtx")
            .field("p", &self.p)
            .field("n", &self.n)
            .field("modulus", &self.modulus)
            .finish()
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Dense polynomials over GF(p), constant term first. Used only while
/// building the ambient field.
mod fp_poly {
    pub fn trim(a: &mut Vec<u32>) {
        while a.last() == Some(&0) {
            a.pop();
        }
    }

    pub fn rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
        let mut r = a.to_vec();
        trim(&mut r);
        let dm = m.len() - 1;
        let lead_inv = inv_mod(m[dm], p);
        while r.len() > dm {
            let k = r.len() - 1;
            let factor = (r[k] as u64 * lead_inv as u64 % p as u64) as u32;
            if factor != 0 {
                for (i, &mc) in m.iter().enumerate() {
                    let idx = k - dm + i;
                    let sub = (factor as u64 * mc as u64 % p as u64) as u32;
                    r[idx] = (r[idx] + p - sub) % p;
                }
            }
            trim(&mut r);
        }
        r
    }

    pub fn mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x as u64 * y as u64) % p as u64;
            }
        }
        let mut v: Vec<u32> = out.into_iter().map(|c| c as u32).collect();
        trim(&mut v);
        v
    }

    pub fn mulmod(a: &[u32], b: &[u32], m: &[u32], p: u32) -> Vec<u32> {
        rem(&mul(a, b, p), m, p)
    }

    pub fn powmod(base: &[u32], mut e: u64, m: &[u32], p: u32) -> Vec<u32> {
        let mut result = vec![1u32];
        let mut b = rem(base, m, p);
        while e > 0 {
            if e & 1 == 1 {
                result = mulmod(&result, &b, m, p);
            }
            b = mulmod(&b, &b, m, p);
            e >>= 1;
        }
        result
    }

    pub fn sub(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        let len = a.len().max(b.len());
        let mut out = vec![0u32; len];
        for (i, o) in out.iter_mut().enumerate() {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            *o = (x + p - y) % p;
        }
        trim(&mut out);
        out
    }

    pub fn gcd(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        let mut a = a.to_vec();
        let mut b = b.to_vec();
        trim(&mut a);
        trim(&mut b);
        while !b.is_empty() {
            let r = rem(&a, &b, p);
            a = b;
            b = r;
        }
        a
    }

    pub fn inv_mod(a: u32, p: u32) -> u32 {
        let mut r = 1u64;
        let mut b = a as u64 % p as u64;
        let mut e = p as u64 - 2;
        while e > 0 {
            if e & 1 == 1 {
                r = r * b % p as u64;
            }
            b = b * b % p as u64;
            e >>= 1;
        }
        r as u32
    }
}

/// Checks irreducibility of a monic polynomial of degree `n` over GF(p):
/// it must share no factor with `t^(p^d) - t` for any `d <= n/2`.
pub fn is_irreducible(modulus: &[u32], p: u32) -> bool {
    let n = modulus.len() - 1;
    if n <= 1 {
        return n == 1;
    }
    let t = vec![0u32, 1];
    let mut frob = t.clone();
    for _ in 1..=n / 2 {
        frob = fp_poly::powmod(&frob, p as u64, modulus, p);
        let diff = fp_poly::sub(&frob, &t, p);
        let g = fp_poly::gcd(modulus, &diff, p);
        if g.len() > 1 {
            return false;
        }
    }
    true
}

impl FieldCtx {
    /// Builds GF(p^N) with `N = lcm(degrees)`, using the lexicographically
    /// least monic irreducible modulus (constant term compared first).
    pub fn build(p: u64, degrees: &[u32]) -> Result<FieldCtx, GfError> {
        Self::build_with_cap(p, degrees, DEFAULT_SCAN_CAP)
    }

    pub fn build_with_cap(p: u64, degrees: &[u32], scan_cap: u64) -> Result<FieldCtx, GfError> {
        if !is_prime(p) {
            return Err(GfError::NotPrime(p));
        }
        if degrees.is_empty() || degrees.contains(&0) {
            return Err(GfError::NoDegrees);
        }
        let n = degrees.iter().fold(1u64, |acc, &d| acc.lcm(&(d as u64)));
        let bits = (n as f64) * (p as f64).log2();
        if bits > MAX_FIELD_BITS as f64 + 1e-9 {
            return Err(GfError::AmbientTooLarge { p, n, cap: MAX_FIELD_BITS });
        }
        let p32 = p as u32;
        let n32 = n as u32;
        let size = p32.pow(n32);
        let weights: Vec<u32> = (0..n32).map(|i| p32.pow(n32 - 1 - i)).collect();

        let decode_vec = |k: u32| -> Vec<u32> { weights.iter().map(|&w| k / w % p32).collect() };

        let mut modulus = None;
        for k in 0..size {
            let mut m = decode_vec(k);
            m.push(1);
            if is_irreducible(&m, p32) {
                modulus = Some(m);
                break;
            }
        }
        let modulus = modulus.expect("an irreducible polynomial of every degree exists");

        let order = size as u64 - 1;
        let factors = prime_factors(order);
        let encode = |v: &[u32]| -> u32 {
            v.iter()
                .zip(weights.iter())
                .map(|(&c, &w)| c * w)
                .sum()
        };
        let mut generator = None;
        for k in 1..size {
            let g = decode_vec(k);
            let mut g_trim = g.clone();
            fp_poly::trim(&mut g_trim);
            let is_primitive = factors.iter().all(|&r| {
                let x = fp_poly::powmod(&g_trim, order / r, &modulus, p32);
                x != [1]
            });
            if is_primitive {
                generator = Some(g_trim);
                break;
            }
        }
        let generator = generator.expect("the multiplicative group is cyclic");

        let mut exp = Vec::with_capacity(order as usize);
        let mut log = vec![0u32; size as usize];
        let mut cur = vec![1u32];
        for i in 0..order as u32 {
            let mut padded = cur.clone();
            padded.resize(n32 as usize, 0);
            let idx = encode(&padded);
            exp.push(idx);
            log[idx as usize] = i;
            cur = fp_poly::mulmod(&cur, &generator, &modulus, p32);
        }
        let one = FieldElem(weights[0]);
        Ok(FieldCtx {
            p: p32,
            n: n32,
            size,
            modulus,
            subfield_degrees: degrees.iter().copied().collect(),
            weights,
            exp,
            log,
            one,
            scan_cap,
        })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// Ambient extension degree N.
    pub fn degree(&self) -> u32 {
        self.n
    }

    pub fn size(&self) -> u32 {
        self.size
    }

    /// Monic modulus, constant term first.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn subfield_degrees(&self) -> &BTreeSet<u32> {
        &self.subfield_degrees
    }

    pub fn scan_cap(&self) -> u64 {
        self.scan_cap
    }

    pub fn zero(&self) -> FieldElem {
        FieldElem::ZERO
    }

    pub fn one(&self) -> FieldElem {
        self.one
    }

    /// The residue class of `t`, i.e. the root of the modulus.
    pub fn generator_t(&self) -> FieldElem {
        if self.n == 1 {
            // modulus t: its root is 0
            FieldElem(self.modulus[0].wrapping_neg() % self.p * self.weights[0])
        } else {
            FieldElem(self.weights[1])
        }
    }

    /// Embeds an integer through GF(p).
    pub fn from_int(&self, v: i64) -> FieldElem {
        let r = v.rem_euclid(self.p as i64) as u32;
        FieldElem(r * self.weights[0])
    }

    pub fn from_index(&self, idx: u32) -> FieldElem {
        assert!(idx < self.size, "index outside the field");
        FieldElem(idx)
    }

    /// Coefficient vector, constant term first.
    pub fn coeffs(&self, e: FieldElem) -> Vec<u32> {
        self.weights.iter().map(|&w| e.0 / w % self.p).collect()
    }

    pub fn from_coeffs(&self, coeffs: &[u32]) -> FieldElem {
        assert_eq!(coeffs.len(), self.n as usize);
        FieldElem(
            coeffs
                .iter()
                .zip(self.weights.iter())
                .map(|(&c, &w)| (c % self.p) * w)
                .sum(),
        )
    }

    /// Returns the integer value if `e` lies in the prime field.
    pub fn as_prime_field(&self, e: FieldElem) -> Option<u32> {
        if e.0.is_multiple_of(self.weights[0]) {
            Some(e.0 / self.weights[0])
        } else {
            None
        }
    }

    #[inline]
    pub fn add(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        if self.p == 2 {
            return FieldElem(a.0 ^ b.0);
        }
        if self.n == 1 {
            return FieldElem((a.0 + b.0) % self.p);
        }
        let (mut x, mut y) = (a.0, b.0);
        let mut out = 0u32;
        let mut w = 1u32;
        for _ in 0..self.n {
            out += ((x % self.p + y % self.p) % self.p) * w;
            x /= self.p;
            y /= self.p;
            w *= self.p;
        }
        FieldElem(out)
    }

    #[inline]
    pub fn neg(&self, a: FieldElem) -> FieldElem {
        if self.p == 2 {
            return a;
        }
        if self.n == 1 {
            return FieldElem((self.p - a.0) % self.p);
        }
        let mut x = a.0;
        let mut out = 0u32;
        let mut w = 1u32;
        for _ in 0..self.n {
            out += ((self.p - x % self.p) % self.p) * w;
            x /= self.p;
            w *= self.p;
        }
        FieldElem(out)
    }

    #[inline]
    pub fn sub(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        if a.0 == 0 || b.0 == 0 {
            return FieldElem::ZERO;
        }
        let order = self.size - 1;
        let s = self.log[a.0 as usize] as u64 + self.log[b.0 as usize] as u64;
        FieldElem(self.exp[(s % order as u64) as usize])
    }

    pub fn inv(&self, a: FieldElem) -> Result<FieldElem, GfError> {
        if a.0 == 0 {
            return Err(GfError::DivByZero);
        }
        let order = self.size - 1;
        let l = self.log[a.0 as usize];
        Ok(FieldElem(self.exp[((order - l) % order) as usize]))
    }

    pub fn div(&self, a: FieldElem, b: FieldElem) -> Result<FieldElem, GfError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn arith(&self, a: FieldElem, b: FieldElem, op: ArithOp) -> Result<FieldElem, GfError> {
        Ok(match op {
            ArithOp::Add => self.add(a, b),
            ArithOp::Sub => self.sub(a, b),
            ArithOp::Mul => self.mul(a, b),
            ArithOp::Div => self.div(a, b)?,
        })
    }

    pub fn pow(&self, a: FieldElem, e: u64) -> FieldElem {
        if e == 0 {
            return self.one;
        }
        if a.0 == 0 {
            return FieldElem::ZERO;
        }
        let order = (self.size - 1) as u64;
        let l = self.log[a.0 as usize] as u64;
        let k = (l as u128 * (e % order) as u128 % order as u128) as usize;
        FieldElem(self.exp[k])
    }

    /// `e^(p^d)`.
    pub fn frobenius(&self, e: FieldElem, d: u32) -> FieldElem {
        let mut out = e;
        for _ in 0..d % self.n.max(1) {
            out = self.pow(out, self.p as u64);
        }
        out
    }

    /// Discrete logarithm with respect to the table generator.
    pub fn log(&self, a: FieldElem) -> Option<u32> {
        (a.0 != 0).then(|| self.log[a.0 as usize])
    }

    /// The multiplicative generator behind the tables.
    pub fn primitive_element(&self) -> FieldElem {
        FieldElem(self.exp.get(1).copied().unwrap_or(self.one.0))
    }

    pub fn is_subfield(&self, d: u32) -> bool {
        d > 0 && self.n.is_multiple_of(d)
    }

    fn check_subfield(&self, d: u32) -> Result<(), GfError> {
        if self.is_subfield(d) {
            Ok(())
        } else {
            Err(GfError::NotASubfield(d))
        }
    }

    /// `(p^N - 1) / (p^d - 1)`: log stride of the subfield GF(p^d).
    fn subfield_stride(&self, d: u32) -> u32 {
        (self.size - 1) / (self.p.pow(d) - 1)
    }

    pub fn in_subfield(&self, e: FieldElem, d: u32) -> bool {
        if e.0 == 0 {
            return true;
        }
        if !self.is_subfield(d) {
            return false;
        }
        self.log[e.0 as usize].is_multiple_of(self.subfield_stride(d))
    }

    /// All elements of GF(p^d), canonically sorted.
    pub fn subfield_elements(&self, d: u32) -> Result<Vec<FieldElem>, GfError> {
        self.check_subfield(d)?;
        let stride = self.subfield_stride(d) as usize;
        let mut out: Vec<FieldElem> = std::iter::once(FieldElem::ZERO)
            .chain(self.exp.iter().step_by(stride).map(|&i| FieldElem(i)))
            .collect();
        out.sort_unstable();
        Ok(out)
    }

    /// Smallest d such that `e` lies in GF(p^d).
    pub fn degree_of(&self, e: FieldElem) -> u32 {
        (1..=self.n)
            .filter(|d| self.n.is_multiple_of(*d))
            .find(|&d| self.in_subfield(e, d))
            .unwrap_or(self.n)
    }

    pub fn multiplicative_order(&self, e: FieldElem) -> Option<u64> {
        let l = self.log(e)? as u64;
        let order = (self.size - 1) as u64;
        Some(order / l.gcd(&order))
    }

    /// All `z` with `z^n = 1`, canonically sorted.
    pub fn roots_of_unity(&self, n: u64) -> Vec<FieldElem> {
        let order = (self.size - 1) as u64;
        let g = n.gcd(&order);
        let step = order / g;
        let mut out: Vec<FieldElem> = (0..g)
            .map(|k| FieldElem(self.exp[(k * step) as usize]))
            .collect();
        out.sort_unstable();
        out
    }

    /// Least element (canonical order) of exact multiplicative order `n`.
    pub fn primitive_root_of_unity(&self, n: u64) -> Option<FieldElem> {
        self.roots_of_unity(n)
            .into_iter()
            .find(|&z| self.multiplicative_order(z) == Some(n))
    }

    /// All `z` in the ambient field with `z^n = c`, canonically sorted.
    ///
    /// Roots are read off the exp/log tables, which are themselves the
    /// result of one exhaustive pass over the field; the scan cap bounds
    /// the field size this is permitted for.
    pub fn solve_power(&self, n: u64, c: FieldElem) -> Result<Vec<FieldElem>, GfError> {
        if self.size as u64 > self.scan_cap {
            return Err(GfError::AmbientTooLarge {
                p: self.p as u64,
                n: self.n as u64,
                cap: self.scan_cap.trailing_zeros(),
            });
        }
        if n == 0 {
            return Ok(if c == self.one {
                self.subfield_elements(self.n)?
            } else {
                Vec::new()
            });
        }
        if c.0 == 0 {
            return Ok(vec![FieldElem::ZERO]);
        }
        let order = (self.size - 1) as u64;
        let k = self.log[c.0 as usize] as u64;
        let g = n.gcd(&order);
        if !k.is_multiple_of(g) {
            return Ok(Vec::new());
        }
        // n/g * j = k/g  (mod order/g)
        let m = order / g;
        let a = (n / g) % m;
        let b = (k / g) % m;
        let j0 = if m == 1 { 0 } else { b * mod_inverse(a, m) % m };
        let mut out: Vec<FieldElem> = (0..g)
            .map(|t| FieldElem(self.exp[((j0 + t * m) % order) as usize]))
            .collect();
        out.sort_unstable();
        Ok(out)
    }

    /// Solutions of `z^n = c` lying in GF(p^d).
    pub fn solve_power_in(&self, n: u64, c: FieldElem, d: u32) -> Result<Vec<FieldElem>, GfError> {
        self.check_subfield(d)?;
        Ok(self
            .solve_power(n, c)?
            .into_iter()
            .filter(|&z| self.in_subfield(z, d))
            .collect())
    }

    /// Human-readable form: an integer for prime-field elements, otherwise
    /// a polynomial in `t` (constant term first).
    pub fn display(&self, e: FieldElem) -> String {
        if let Some(v) = self.as_prime_field(e) {
            return v.to_string();
        }
        let mut parts = Vec::new();
        for (i, c) in self.coeffs(e).into_iter().enumerate() {
            if c == 0 {
                continue;
            }
            let mono = match i {
                0 => String::new(),
                1 => "t".to_string(),
                _ => format!("t^{i}"),
            };
            parts.push(match (c, i) {
                (_, 0) => c.to_string(),
                (1, _) => mono,
                _ => format!("{c}*{mono}"),
            });
        }
        parts.join("+")
    }
}

fn mod_inverse(a: u64, m: u64) -> u64 {
    let (g, x, _) = ext_gcd(a as i128, m as i128);
    debug_assert_eq!(g, 1);
    x.rem_euclid(m as i128) as u64
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = ext_gcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

/// A GF(p)-linear map `y -> sum c_i y^(p^k_i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdditivePoly {
    pub terms: Vec<(FieldElem, u32)>,
}

impl AdditivePoly {
    pub fn new(terms: Vec<(FieldElem, u32)>) -> Self {
        AdditivePoly { terms }
    }

    /// Builds from `(coefficient, exponent)` pairs, rejecting exponents that
    /// are not powers of p.
    pub fn from_exponents(ctx: &FieldCtx, terms: &[(FieldElem, u64)]) -> Result<Self, GfError> {
        let mut out = Vec::new();
        for &(c, e) in terms {
            let mut k = 0u32;
            let mut v = 1u64;
            while v < e {
                v *= ctx.p as u64;
                k += 1;
            }
            if v != e {
                return Err(GfError::NotAdditive(e));
            }
            out.push((c, k));
        }
        Ok(AdditivePoly { terms: out })
    }

    pub fn eval(&self, ctx: &FieldCtx, y: FieldElem) -> FieldElem {
        self.terms.iter().fold(FieldElem::ZERO, |acc, &(c, k)| {
            ctx.add(acc, ctx.mul(c, ctx.pow(y, (ctx.p as u64).pow(k))))
        })
    }
}

/// Precomputed solver for `L(y) = c` with `y` restricted to GF(p^d).
///
/// The subfield is viewed as a d-dimensional GF(p)-space with basis
/// `1, b, .., b^(d-1)` for a primitive element `b`; `L` becomes an N x d
/// matrix over GF(p) which is row-reduced once.
#[derive(Clone, Debug)]
pub struct AdditiveSolver {
    p: u32,
    n: usize,
    /// Row operations recorded as a full N x N transform.
    transform: Vec<Vec<u32>>,
    /// `(row, column)` of each pivot in the reduced matrix.
    pivots: Vec<(usize, usize)>,
    basis: Vec<FieldElem>,
    /// Every element of the kernel of L on the subfield.
    kernel: Vec<FieldElem>,
}

impl AdditiveSolver {
    pub fn new(ctx: &FieldCtx, poly: &AdditivePoly, d: u32) -> Result<Self, GfError> {
        ctx.check_subfield(d)?;
        let p = ctx.p;
        let n = ctx.n as usize;
        let beta = ctx.pow(ctx.primitive_element(), ctx.subfield_stride(d) as u64);
        let basis: Vec<FieldElem> = (0..d).map(|j| ctx.pow(beta, j as u64)).collect();
        let cols: Vec<Vec<u32>> = basis.iter().map(|&b| ctx.coeffs(poly.eval(ctx, b))).collect();
        // Matrix a[row][col]
        let mut a: Vec<Vec<u32>> = (0..n)
            .map(|r| cols.iter().map(|c| c[r]).collect())
            .collect();
        let mut t: Vec<Vec<u32>> = (0..n)
            .map(|r| (0..n).map(|c| u32::from(r == c)).collect())
            .collect();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..d as usize {
            let Some(pr) = (row..n).find(|&r| a[r][col] != 0) else {
                continue;
            };
            a.swap(row, pr);
            t.swap(row, pr);
            let inv = fp_poly::inv_mod(a[row][col], p);
            scale_row(&mut a[row], inv, p);
            scale_row(&mut t[row], inv, p);
            for r in 0..n {
                if r != row && a[r][col] != 0 {
                    let f = a[r][col];
                    let (src_a, src_t) = (a[row].clone(), t[row].clone());
                    sub_scaled(&mut a[r], &src_a, f, p);
                    sub_scaled(&mut t[r], &src_t, f, p);
                }
            }
            pivots.push((row, col));
            row += 1;
        }
        let pivot_cols: BTreeSet<usize> = pivots.iter().map(|&(_, c)| c).collect();
        let free_cols: Vec<usize> = (0..d as usize).filter(|c| !pivot_cols.contains(c)).collect();
        // kernel basis vector for each free column
        let kernel_basis: Vec<FieldElem> = free_cols
            .iter()
            .map(|&fc| {
                let mut u = vec![0u32; d as usize];
                u[fc] = 1;
                for &(r, c) in &pivots {
                    u[c] = (p - a[r][fc]) % p;
                }
                combine(ctx, &basis, &u)
            })
            .collect();
        let mut kernel = vec![FieldElem::ZERO];
        for kb in kernel_basis {
            let mut next = Vec::with_capacity(kernel.len() * p as usize);
            for &k in &kernel {
                let mut m = FieldElem::ZERO;
                for _ in 0..p {
                    next.push(ctx.add(k, m));
                    m = ctx.add(m, kb);
                }
            }
            kernel = next;
        }
        kernel.sort_unstable();
        Ok(AdditiveSolver {
            p,
            n,
            transform: t,
            pivots,
            basis,
            kernel,
        })
    }

    pub fn kernel(&self) -> &[FieldElem] {
        &self.kernel
    }

    /// All `y` in the subfield with `L(y) = c`, canonically sorted.
    pub fn solve(&self, ctx: &FieldCtx, c: FieldElem) -> Vec<FieldElem> {
        let v = ctx.coeffs(c);
        let p = self.p as u64;
        let w: Vec<u32> = self
            .transform
            .iter()
            .map(|row| {
                (row.iter().zip(&v).map(|(&x, &y)| x as u64 * y as u64).sum::<u64>() % p) as u32
            })
            .collect();
        let rank = self.pivots.len();
        if w[rank..self.n].iter().any(|&x| x != 0) {
            return Vec::new();
        }
        let mut u = vec![0u32; self.basis.len()];
        for &(r, col) in &self.pivots {
            u[col] = w[r];
        }
        let particular = combine(ctx, &self.basis, &u);
        let mut out: Vec<FieldElem> = self.kernel.iter().map(|&k| ctx.add(particular, k)).collect();
        out.sort_unstable();
        out
    }
}

fn scale_row(row: &mut [u32], f: u32, p: u32) {
    for x in row.iter_mut() {
        *x = (*x as u64 * f as u64 % p as u64) as u32;
    }
}

fn sub_scaled(row: &mut [u32], src: &[u32], f: u32, p: u32) {
    for (x, &s) in row.iter_mut().zip(src) {
        let sub = (s as u64 * f as u64 % p as u64) as u32;
        *x = (*x + p - sub) % p;
    }
}

fn combine(ctx: &FieldCtx, basis: &[FieldElem], u: &[u32]) -> FieldElem {
    basis.iter().zip(u).fold(FieldElem::ZERO, |acc, (&b, &c)| {
        ctx.add(acc, ctx.mul(ctx.from_int(c as i64), b))
    })
}

/// One-shot form of [`AdditiveSolver::solve`].
pub fn solve_additive(
    ctx: &FieldCtx,
    poly: &AdditivePoly,
    c: FieldElem,
    d: u32,
) -> Result<Vec<FieldElem>, GfError> {
    Ok(AdditiveSolver::new(ctx, poly, d)?.solve(ctx, c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gf4() -> FieldCtx {
        FieldCtx::build(2, &[1, 2]).unwrap()
    }

    /// Schoolbook multiplication modulo t^2+t+1 on coefficient pairs.
    fn gf4_mul_oracle(a: [u32; 2], b: [u32; 2]) -> [u32; 2] {
        let c0 = a[0] * b[0];
        let c1 = a[0] * b[1] + a[1] * b[0];
        let c2 = a[1] * b[1];
        // t^2 = t + 1
        [(c0 + c2) % 2, (c1 + c2) % 2]
    }

    #[test]
    fn gf4_modulus_is_the_unique_irreducible_quadratic() {
        let mut irreducible = Vec::new();
        for c0 in 0..2 {
            for c1 in 0..2 {
                // no roots in GF(2) <=> irreducible for degree 2
                let has_root = (0..2).any(|x| (x * x + c1 * x + c0) % 2 == 0);
                if !has_root {
                    irreducible.push(vec![c0, c1, 1]);
                }
            }
        }
        assert_eq!(irreducible, vec![vec![1, 1, 1]]);
        let ctx = gf4();
        assert_eq!(ctx.degree(), 2);
        assert_eq!(ctx.modulus(), &[1, 1, 1]);
    }

    #[test]
    fn gf4_multiplication_table_matches_oracle() {
        let ctx = gf4();
        for a in 0..4u32 {
            for b in 0..4u32 {
                let av = [a >> 1 & 1, a & 1];
                let bv = [b >> 1 & 1, b & 1];
                let ea = ctx.from_coeffs(&av);
                let eb = ctx.from_coeffs(&bv);
                let expect = gf4_mul_oracle(av, bv);
                assert_eq!(ctx.coeffs(ctx.mul(ea, eb)), expect.to_vec());
            }
        }
        let g = ctx.generator_t();
        assert_eq!(ctx.mul(g, g), ctx.add(g, ctx.one()));
        assert_eq!(ctx.frobenius(g, 1), ctx.add(g, ctx.one()));
    }

    #[test]
    fn prime_field_and_lcm_degrees() {
        let ctx = FieldCtx::build(7, &[1]).unwrap();
        assert_eq!(ctx.degree(), 1);
        assert_eq!(ctx.modulus(), &[0, 1]);
        assert_eq!(FieldCtx::build(2, &[2, 3]).unwrap().degree(), 6);
        assert_eq!(FieldCtx::build(4, &[1]).unwrap_err(), GfError::NotPrime(4));
        assert!(matches!(
            FieldCtx::build(2, &[25]),
            Err(GfError::AmbientTooLarge { .. })
        ));
        assert_eq!(FieldCtx::build(3, &[]).unwrap_err(), GfError::NoDegrees);
    }

    #[test]
    fn basic_identities() {
        let ctx = FieldCtx::build(2, &[6]).unwrap();
        for e in ctx.subfield_elements(6).unwrap() {
            assert_eq!(ctx.add(e, e), FieldElem::ZERO);
            assert_eq!(ctx.mul(e, ctx.one()), e);
            assert_eq!(ctx.frobenius(e, 6), e);
        }
        assert_eq!(ctx.frobenius(FieldElem::ZERO, 3), FieldElem::ZERO);
        assert_eq!(ctx.inv(FieldElem::ZERO), Err(GfError::DivByZero));
        assert_eq!(
            ctx.arith(ctx.one(), FieldElem::ZERO, ArithOp::Div),
            Err(GfError::DivByZero)
        );
    }

    #[test]
    fn roots_of_unity_counts() {
        let ctx = gf4();
        assert_eq!(ctx.roots_of_unity(3).len(), 3);
        assert_eq!(ctx.roots_of_unity(1), vec![ctx.one()]);
        let ctx64 = FieldCtx::build(2, &[6]).unwrap();
        let r = ctx64.roots_of_unity(3);
        assert_eq!(r.len(), 3);
        for z in r {
            assert_eq!(ctx64.pow(z, 3), ctx64.one());
        }
        assert_eq!(ctx64.roots_of_unity(5), vec![ctx64.one()]);
    }

    #[test]
    fn power_roots() {
        let ctx = gf4();
        assert_eq!(ctx.solve_power(3, ctx.one()).unwrap().len(), 3);
        assert_eq!(ctx.solve_power(7, FieldElem::ZERO).unwrap(), vec![FieldElem::ZERO]);
        let ctx64 = FieldCtx::build(2, &[6]).unwrap();
        let c = ctx64.pow(ctx64.primitive_element(), 5 * 11);
        assert_eq!(ctx64.solve_power(5, c).unwrap().len(), 1);
        let capped = FieldCtx::build_with_cap(2, &[6], 32).unwrap();
        assert!(capped.solve_power(3, capped.one()).is_err());
    }

    #[test]
    fn additive_examples() {
        let ctx = gf4();
        // y^2 + y = 0 over GF(4)
        let l = AdditivePoly::new(vec![(ctx.one(), 1), (ctx.one(), 0)]);
        let sols = solve_additive(&ctx, &l, FieldElem::ZERO, 2).unwrap();
        assert_eq!(sols, vec![FieldElem::ZERO, ctx.one()]);
        // identity map
        let id = AdditivePoly::new(vec![(ctx.one(), 0)]);
        for c in ctx.subfield_elements(2).unwrap() {
            assert_eq!(solve_additive(&ctx, &id, c, 2).unwrap(), vec![c]);
        }
        // y^q + y over GF(q^2), q = 4: q or 0 solutions for c in GF(q)
        let ctx16 = FieldCtx::build(2, &[4]).unwrap();
        let l = AdditivePoly::new(vec![(ctx16.one(), 2), (ctx16.one(), 0)]);
        let solver = AdditiveSolver::new(&ctx16, &l, 4).unwrap();
        for c in ctx16.subfield_elements(2).unwrap() {
            let n = solver.solve(&ctx16, c).len();
            assert!(n == 4 || n == 0);
        }
        assert_eq!(
            AdditivePoly::from_exponents(&ctx16, &[(ctx16.one(), 6)]).unwrap_err(),
            GfError::NotAdditive(6)
        );
    }

    #[test]
    fn subfield_sizes_by_exhaustive_count() {
        for (p, n) in [(2u64, 12u32), (3, 6), (2, 6), (5, 4)] {
            let ctx = FieldCtx::build(p, &[n]).unwrap();
            let all: Vec<FieldElem> = (0..ctx.size()).map(|i| ctx.from_index(i)).collect();
            for d in (1..=n).filter(|d| n % d == 0) {
                let count = all
                    .iter()
                    .filter(|&&e| ctx.frobenius(e, d) == e)
                    .count();
                assert_eq!(count as u64, p.pow(d), "p={p} n={n} d={d}");
                assert_eq!(ctx.subfield_elements(d).unwrap().len(), count);
            }
        }
    }

    #[test]
    fn additive_solver_agrees_with_scan() {
        for (p, n) in [(2u64, 6u32), (3, 4), (2, 8), (3, 2), (5, 2)] {
            let ctx = FieldCtx::build(p, &[n]).unwrap();
            for d in (1..=n).filter(|d| n % d == 0) {
                let scope = ctx.subfield_elements(d).unwrap();
                let polys = [
                    vec![(ctx.one(), 1u32), (ctx.one(), 0)],
                    vec![(ctx.one(), d.min(2)), (ctx.neg(ctx.one()), 0)],
                    vec![(ctx.primitive_element(), 1), (ctx.from_int(2), 0)],
                ];
                for terms in polys {
                    let l = AdditivePoly::new(terms);
                    let solver = AdditiveSolver::new(&ctx, &l, d).unwrap();
                    for c in ctx.subfield_elements(n).unwrap().into_iter().step_by(3) {
                        let mut scan: Vec<FieldElem> = scope
                            .iter()
                            .copied()
                            .filter(|&y| l.eval(&ctx, y) == c)
                            .collect();
                        scan.sort_unstable();
                        assert_eq!(solver.solve(&ctx, c), scan);
                    }
                }
            }
        }
    }

    #[test]
    fn power_solver_agrees_with_scan() {
        for (p, n) in [(2u64, 6u32), (3, 4), (7, 2)] {
            let ctx = FieldCtx::build(p, &[n]).unwrap();
            let all = ctx.subfield_elements(n).unwrap();
            for e in [2u64, 3, 5, 6, 7, 9] {
                for &c in all.iter().step_by(5) {
                    let scan: Vec<FieldElem> =
                        all.iter().copied().filter(|&z| ctx.pow(z, e) == c).collect();
                    assert_eq!(ctx.solve_power(e, c).unwrap(), scan);
                }
            }
        }
    }

    #[test]
    fn irreducibility_test_matches_root_free_cubics() {
        // a cubic over GF(p) is irreducible iff it has no root in GF(p)
        for p in [2u32, 3, 5] {
            for c0 in 0..p {
                for c1 in 0..p {
                    for c2 in 0..p {
                        let m = vec![c0, c1, c2, 1];
                        let root = (0..p).any(|x| {
                            (c0 + c1 * x + c2 * x * x + x * x * x) % p == 0
                        });
                        assert_eq!(is_irreducible(&m, p), !root);
                    }
                }
            }
        }
    }

    fn ctx_strategy() -> impl Strategy<Value = (u64, u32)> {
        prop_oneof![Just((2u64, 8u32)), Just((3, 5)), Just((5, 3)), Just((7, 2))]
    }

    proptest! {
        #[test]
        fn field_axioms((p, n) in ctx_strategy(), a in 0u32.., b in 0u32.., c in 0u32..) {
            let ctx = FieldCtx::build(p, &[n]).unwrap();
            let s = ctx.size();
            let (a, b, c) = (ctx.from_index(a % s), ctx.from_index(b % s), ctx.from_index(c % s));
            prop_assert_eq!(ctx.add(ctx.add(a, b), c), ctx.add(a, ctx.add(b, c)));
            prop_assert_eq!(ctx.mul(ctx.mul(a, b), c), ctx.mul(a, ctx.mul(b, c)));
            prop_assert_eq!(ctx.mul(a, ctx.add(b, c)), ctx.add(ctx.mul(a, b), ctx.mul(a, c)));
            prop_assert_eq!(ctx.sub(ctx.add(a, b), b), a);
            if !b.is_zero() {
                prop_assert_eq!(ctx.mul(ctx.div(a, b).unwrap(), b), a);
            }
            prop_assert_eq!(ctx.frobenius(ctx.mul(a, b), 1), ctx.mul(ctx.frobenius(a, 1), ctx.frobenius(b, 1)));
            prop_assert_eq!(ctx.frobenius(ctx.add(a, b), 1), ctx.add(ctx.frobenius(a, 1), ctx.frobenius(b, 1)));
        }
    }
}
