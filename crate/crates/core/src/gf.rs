//! Exact arithmetic in prime fields `F_p` and their extensions `F_{p^k}`.
//!
//! Elements are plain values; every operation goes through the [`FieldCtx`]
//! describing the field. Extensions are always single-step quotients
//! `F_p[t]/(f)`. For each degree there is one canonical field (the
//! lexicographically least monic irreducible modulus), and canonical fields
//! are linked by a compatible system of embeddings, so that embedding along a
//! tower agrees with the direct embedding.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigUint;
use rand::Rng;
use thiserror::Error;

use crate::upoly::UPoly;

/// Largest extension degree an element can represent.
pub const MAX_DEGREE: usize = 12;

/// Default cap on extension degrees requested by root extraction and
/// splitting-field construction.
pub const DEFAULT_DEGREE_CAP: usize = 12;

/// Characteristics must stay below this so products of residues fit in `u64`
/// with room for accumulation.
const MAX_CHARACTERISTIC: u64 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("characteristic {0} is excluded (2 and 3 are not supported)")]
    ExcludedCharacteristic(u64),
    #[error("characteristic {0} is too large")]
    CharacteristicTooLarge(u64),
    #[error("polynomial is reducible")]
    Reducible,
    #[error("modulus must be monic of degree at least 1")]
    BadModulus,
    #[error("required extension degree {needed} exceeds cap {cap}")]
    DegreeOverflow { needed: usize, cap: usize },
    #[error("no embedding from {src} into {dst}")]
    NoEmbedding { src: String, dst: String },
    #[error("cannot parse field spec {0:?}")]
    BadSpec(String),
    #[error("cannot parse field element {0:?}")]
    BadElement(String),
    #[error("zero has no {0}-th root request in this form")]
    ZeroRoot(u64),
}

/// An element of some `F_{p^k}`, stored as its coordinates in the power
/// basis `1, t, ..., t^{k-1}`. Unused coordinates are zero.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct FieldElement {
    c: [u32; MAX_DEGREE],
}

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement { c: [0; MAX_DEGREE] };

    pub fn coeffs(&self) -> &[u32; MAX_DEGREE] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|&x| x == 0)
    }

    /// Residue of a prime-subfield element.
    pub fn as_prime(&self) -> Option<u32> {
        if self.c[1..].iter().all(|&x| x == 0) {
            Some(self.c[0])
        } else {
            None
        }
    }

    fn raw(x: u32) -> Self {
        let mut c = [0; MAX_DEGREE];
        c[0] = x;
        FieldElement { c }
    }
}

impl Ord for FieldElement {
    fn cmp(&self, other: &Self) -> Ordering {
        for i in (0..MAX_DEGREE).rev() {
            match self.c[i].cmp(&other.c[i]) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for FieldElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", format_element(self))
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", format_element(self))
    }
}

/// Element literal: a plain residue for prime-subfield elements, otherwise a
/// parenthesised polynomial in `t`, e.g. `(3+2t+t^2)`.
fn format_element(a: &FieldElement) -> String {
    if let Some(r) = a.as_prime() {
        return r.to_string();
    }
    let mut parts = Vec::new();
    for (i, &c) in a.c.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let s = match (i, c) {
            (0, c) => c.to_string(),
            (1, 1) => "t".to_string(),
            (1, c) => format!("{c}t"),
            (i, 1) => format!("t^{i}"),
            (i, c) => format!("{c}t^{i}"),
        };
        parts.push(s);
    }
    format!("({})", parts.join("+"))
}

struct Inner {
    p: u32,
    k: usize,
    /// Monic modulus, low degree first, length `k + 1`. For `k = 1` this is `t`.
    modulus: Vec<u32>,
    /// `(p - f_j) mod p` for `j < k`, the coefficients of `t^k` after reduction.
    neg_low: Vec<u32>,
    canonical: bool,
}

/// Description of a finite field `F_{p^k} = F_p[t]/(f)`. Cheap to clone.
#[derive(Clone)]
pub struct FieldCtx(Arc<Inner>);

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.p == other.0.p && self.0.modulus == other.0.modulus)
    }
}

impl Eq for FieldCtx {}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldCtx({})", self.spec())
    }
}

impl fmt::Display for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.spec())
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn check_characteristic(p: u64) -> Result<(), FieldError> {
    if !is_prime(p) {
        return Err(FieldError::NotPrime(p));
    }
    if p == 2 || p == 3 {
        return Err(FieldError::ExcludedCharacteristic(p));
    }
    if p >= MAX_CHARACTERISTIC {
        return Err(FieldError::CharacteristicTooLarge(p));
    }
    Ok(())
}

fn inv_mod(a: u64, p: u64) -> u64 {
    // extended Euclid on integers; a != 0 mod p
    let (mut r0, mut r1) = (p as i64, (a % p) as i64);
    let (mut s0, mut s1) = (0i64, 1i64);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    debug_assert_eq!(r0, 1);
    s0.rem_euclid(p as i64) as u64
}

/// Builds the prime field `F_p`.
pub fn make_prime_field(p: u64) -> Result<FieldCtx, FieldError> {
    FieldCtx::prime(p)
}

/// Extends `ctx` by a root of `f`, which must be irreducible over `ctx`.
///
/// Over a prime field the result is `F_p[t]/(f)` itself. Over a proper
/// extension the tower is flattened into the canonical field of the product
/// degree. Returns the new field together with the chosen root of `f`.
pub fn extend(ctx: &FieldCtx, f: &UPoly) -> Result<(FieldCtx, FieldElement), FieldError> {
    if f.degree().map_or(true, |d| d < 1) {
        return Err(FieldError::BadModulus);
    }
    if !f.is_irreducible(ctx) {
        return Err(FieldError::Reducible);
    }
    let m = f.degree().unwrap();
    if ctx.degree() == 1 {
        let lead = f.lead();
        let inv_lead = ctx.inv(&lead).expect("nonzero lead");
        let coeffs: Vec<u32> = f
            .coeffs()
            .iter()
            .map(|c| ctx.mul(c, &inv_lead).c[0])
            .collect();
        let ext = FieldCtx::with_modulus(ctx.p() as u64, &coeffs)?;
        let root = if m == 1 {
            ext.neg(&FieldElement::raw(coeffs[0]))
        } else {
            ext.gen()
        };
        return Ok((ext, root));
    }
    let n = ctx.degree() * m;
    if n > MAX_DEGREE {
        return Err(FieldError::DegreeOverflow {
            needed: n,
            cap: MAX_DEGREE,
        });
    }
    let ext = FieldCtx::canonical(ctx.p() as u64, n)?;
    let emb = Embedding::new(ctx, &ext)?;
    let fe = f.map_coeffs(|c| emb.apply(c));
    let roots = fe.roots(&ext);
    let root = roots.first().map(|r| r.0).ok_or(FieldError::Reducible)?;
    Ok((ext, root))
}

type CanonKey = (u32, usize);

fn canonical_cache() -> &'static Mutex<HashMap<CanonKey, FieldCtx>> {
    static CACHE: OnceLock<Mutex<HashMap<CanonKey, FieldCtx>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn subfield_cache() -> &'static Mutex<HashMap<CanonKey, Arc<BTreeMap<usize, FieldElement>>>> {
    static CACHE: OnceLock<Mutex<HashMap<CanonKey, Arc<BTreeMap<usize, FieldElement>>>>> =
        OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

impl FieldCtx {
    fn from_parts(p: u32, modulus: Vec<u32>, canonical: bool) -> FieldCtx {
        let k = modulus.len() - 1;
        let neg_low = modulus[..k].iter().map(|&f| (p - f % p) % p).collect();
        FieldCtx(Arc::new(Inner {
            p,
            k,
            modulus,
            neg_low,
            canonical,
        }))
    }

    /// The prime field `F_p`, `p >= 5`.
    pub fn prime(p: u64) -> Result<FieldCtx, FieldError> {
        check_characteristic(p)?;
        Ok(Self::from_parts(p as u32, vec![0, 1], true))
    }

    /// `F_p[t]/(f)` for a monic irreducible `f` given low degree first.
    pub fn with_modulus(p: u64, coeffs: &[u32]) -> Result<FieldCtx, FieldError> {
        check_characteristic(p)?;
        let mut c: Vec<u32> = coeffs.iter().map(|&x| (x as u64 % p) as u32).collect();
        while c.len() > 1 && *c.last().unwrap() == 0 {
            c.pop();
        }
        if c.len() < 2 || *c.last().unwrap() != 1 {
            return Err(FieldError::BadModulus);
        }
        if c.len() == 2 {
            return Self::prime(p);
        }
        if c.len() - 1 > MAX_DEGREE {
            return Err(FieldError::DegreeOverflow {
                needed: c.len() - 1,
                cap: MAX_DEGREE,
            });
        }
        let base = Self::prime(p)?;
        let f = UPoly::new(c.iter().map(|&x| FieldElement::raw(x)).collect());
        if !f.is_irreducible(&base) {
            return Err(FieldError::Reducible);
        }
        let canonical = Self::canonical(p, c.len() - 1)?.modulus() == &c[..];
        Ok(Self::from_parts(p as u32, c, canonical))
    }

    /// The canonical field of order `p^n`: modulus is the least monic
    /// irreducible of degree `n`, ordering coefficient vectors as base-`p`
    /// integers with the constant term least significant.
    pub fn canonical(p: u64, n: usize) -> Result<FieldCtx, FieldError> {
        check_characteristic(p)?;
        if n == 0 {
            return Err(FieldError::BadModulus);
        }
        if n > MAX_DEGREE {
            return Err(FieldError::DegreeOverflow {
                needed: n,
                cap: MAX_DEGREE,
            });
        }
        if n == 1 {
            return Self::prime(p);
        }
        let key = (p as u32, n);
        if let Some(f) = canonical_cache().lock().unwrap().get(&key) {
            return Ok(f.clone());
        }
        let base = Self::prime(p)?;
        let mut digits = vec![0u32; n];
        let modulus = loop {
            // increment base-p counter
            let mut i = 0;
            loop {
                digits[i] += 1;
                if digits[i] as u64 == p {
                    digits[i] = 0;
                    i += 1;
                } else {
                    break;
                }
            }
            if digits[0] == 0 {
                continue;
            }
            let mut c = digits.clone();
            c.push(1);
            let f = UPoly::new(c.iter().map(|&x| FieldElement::raw(x)).collect());
            if f.is_irreducible(&base) {
                break c;
            }
        };
        let ctx = Self::from_parts(p as u32, modulus, true);
        canonical_cache()
            .lock()
            .unwrap()
            .insert(key, ctx.clone());
        Ok(ctx)
    }

    /// Parses `"p"` or `"p^k/f0,f1,...,fk"` (modulus coefficients low to high).
    pub fn parse_spec(s: &str) -> Result<FieldCtx, FieldError> {
        let bad = || FieldError::BadSpec(s.to_string());
        let s = s.trim();
        match s.split_once('/') {
            None => {
                let p: u64 = s.parse().map_err(|_| bad())?;
                Self::prime(p)
            }
            Some((head, tail)) => {
                let (p, k) = head.split_once('^').ok_or_else(bad)?;
                let p: u64 = p.trim().parse().map_err(|_| bad())?;
                let k: usize = k.trim().parse().map_err(|_| bad())?;
                let coeffs: Vec<u32> = tail
                    .split(',')
                    .map(|x| x.trim().parse::<u32>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| bad())?;
                if coeffs.len() != k + 1 {
                    return Err(bad());
                }
                Self::with_modulus(p, &coeffs)
            }
        }
    }

    /// Field spec string, inverse of [`FieldCtx::parse_spec`].
    pub fn spec(&self) -> String {
        if self.0.k == 1 {
            return self.0.p.to_string();
        }
        let coeffs: Vec<String> = self.0.modulus.iter().map(|c| c.to_string()).collect();
        format!("{}^{}/{}", self.0.p, self.0.k, coeffs.join(","))
    }

    pub fn p(&self) -> u32 {
        self.0.p
    }

    pub fn degree(&self) -> usize {
        self.0.k
    }

    pub fn is_canonical(&self) -> bool {
        self.0.canonical
    }

    pub fn modulus(&self) -> &[u32] {
        &self.0.modulus
    }

    /// Number of elements, `p^k`.
    pub fn order(&self) -> BigUint {
        BigUint::from(self.0.p).pow(self.0.k as u32)
    }

    pub fn order_u128(&self) -> Option<u128> {
        (self.0.p as u128).checked_pow(self.0.k as u32)
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement::ZERO
    }

    pub fn one(&self) -> FieldElement {
        FieldElement::raw(1)
    }

    /// The class of `t`; for a prime field this is zero.
    pub fn gen(&self) -> FieldElement {
        if self.0.k == 1 {
            return FieldElement::ZERO;
        }
        let mut c = [0; MAX_DEGREE];
        c[1] = 1;
        FieldElement { c }
    }

    pub fn from_i64(&self, x: i64) -> FieldElement {
        FieldElement::raw(x.rem_euclid(self.0.p as i64) as u32)
    }

    pub fn from_u64(&self, x: u64) -> FieldElement {
        FieldElement::raw((x % self.0.p as u64) as u32)
    }

    /// Element with the given power-basis coordinates (reduced mod p).
    pub fn from_coeffs(&self, coeffs: &[u32]) -> FieldElement {
        assert!(coeffs.len() <= self.0.k, "too many coordinates");
        let mut c = [0; MAX_DEGREE];
        for (i, &x) in coeffs.iter().enumerate() {
            c[i] = x % self.0.p;
        }
        FieldElement { c }
    }

    /// Element number `idx` in base-`p` order (constant term least significant).
    pub fn element(&self, mut idx: u128) -> FieldElement {
        let p = self.0.p as u128;
        let mut c = [0; MAX_DEGREE];
        for slot in c.iter_mut().take(self.0.k) {
            *slot = (idx % p) as u32;
            idx /= p;
        }
        FieldElement { c }
    }

    pub fn index(&self, a: &FieldElement) -> u128 {
        let p = self.0.p as u128;
        a.c[..self.0.k]
            .iter()
            .rev()
            .fold(0u128, |acc, &x| acc * p + x as u128)
    }

    /// All elements in index order. Intended for small fields.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        let q = self.order_u128().expect("field too large to enumerate");
        (0..q).map(move |i| self.element(i))
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElement {
        let mut c = [0; MAX_DEGREE];
        for slot in c.iter_mut().take(self.0.k) {
            *slot = rng.gen_range(0..self.0.p);
        }
        FieldElement { c }
    }

    pub fn random_nonzero<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElement {
        loop {
            let a = self.random(rng);
            if !a.is_zero() {
                return a;
            }
        }
    }

    #[inline]
    pub fn add(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let p = self.0.p;
        let mut c = [0; MAX_DEGREE];
        for i in 0..self.0.k {
            let s = a.c[i] + b.c[i];
            c[i] = if s >= p { s - p } else { s };
        }
        FieldElement { c }
    }

    #[inline]
    pub fn sub(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let p = self.0.p;
        let mut c = [0; MAX_DEGREE];
        for i in 0..self.0.k {
            c[i] = if a.c[i] >= b.c[i] {
                a.c[i] - b.c[i]
            } else {
                a.c[i] + p - b.c[i]
            };
        }
        FieldElement { c }
    }

    #[inline]
    pub fn neg(&self, a: &FieldElement) -> FieldElement {
        let p = self.0.p;
        let mut c = [0; MAX_DEGREE];
        for i in 0..self.0.k {
            c[i] = if a.c[i] == 0 { 0 } else { p - a.c[i] };
        }
        FieldElement { c }
    }

    #[inline]
    pub fn mul(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let p = self.0.p as u64;
        let k = self.0.k;
        if k == 1 {
            return FieldElement::raw((a.c[0] as u64 * b.c[0] as u64 % p) as u32);
        }
        let mut r = [0u64; 2 * MAX_DEGREE - 1];
        for i in 0..k {
            let ai = a.c[i] as u64;
            if ai == 0 {
                continue;
            }
            for j in 0..k {
                r[i + j] += ai * b.c[j] as u64;
            }
        }
        let neg = &self.0.neg_low;
        for i in (k..2 * k - 1).rev() {
            let c = r[i] % p;
            if c == 0 {
                continue;
            }
            for j in 0..k {
                r[i - k + j] += c * neg[j] as u64;
            }
        }
        let mut c = [0; MAX_DEGREE];
        for i in 0..k {
            c[i] = (r[i] % p) as u32;
        }
        FieldElement { c }
    }

    /// Multiplication by a prime-field scalar.
    pub fn scale(&self, a: &FieldElement, s: u32) -> FieldElement {
        let p = self.0.p as u64;
        let mut c = [0; MAX_DEGREE];
        for i in 0..self.0.k {
            c[i] = (a.c[i] as u64 * s as u64 % p) as u32;
        }
        FieldElement { c }
    }

    pub fn inv(&self, a: &FieldElement) -> Option<FieldElement> {
        if a.is_zero() {
            return None;
        }
        let p = self.0.p as u64;
        let k = self.0.k;
        if k == 1 {
            return Some(FieldElement::raw(inv_mod(a.c[0] as u64, p) as u32));
        }
        // Extended Euclid in F_p[t]: keep s_i * a == r_i (mod f).
        const N: usize = MAX_DEGREE + 1;
        let mut r0 = [0u64; N];
        let mut r1 = [0u64; N];
        let mut s0 = [0u64; N];
        let mut s1 = [0u64; N];
        for (i, &m) in self.0.modulus.iter().enumerate() {
            r0[i] = m as u64;
        }
        for i in 0..k {
            r1[i] = a.c[i] as u64;
        }
        s1[0] = 1;
        let deg = |v: &[u64; N]| -> isize {
            for i in (0..N).rev() {
                if v[i] != 0 {
                    return i as isize;
                }
            }
            -1
        };
        let mut d0 = deg(&r0);
        let mut d1 = deg(&r1);
        while d1 > 0 {
            let inv_lead = inv_mod(r1[d1 as usize], p);
            while d0 >= d1 {
                let shift = (d0 - d1) as usize;
                let c = r0[d0 as usize] * inv_lead % p;
                let nc = p - c;
                for i in 0..=(d1 as usize) {
                    r0[i + shift] = (r0[i + shift] + nc * r1[i]) % p;
                }
                for i in 0..(N - shift) {
                    if s1[i] != 0 {
                        s0[i + shift] = (s0[i + shift] + nc * s1[i]) % p;
                    }
                }
                d0 = deg(&r0);
            }
            std::mem::swap(&mut r0, &mut r1);
            std::mem::swap(&mut s0, &mut s1);
            std::mem::swap(&mut d0, &mut d1);
        }
        debug_assert_eq!(d1, 0);
        let c = inv_mod(r1[0], p);
        let mut out = [0; MAX_DEGREE];
        for i in 0..k {
            out[i] = (s1[i] * c % p) as u32;
        }
        Some(FieldElement { c: out })
    }

    pub fn div(&self, a: &FieldElement, b: &FieldElement) -> Option<FieldElement> {
        self.inv(b).map(|bi| self.mul(a, &bi))
    }

    pub fn pow(&self, a: &FieldElement, mut e: u64) -> FieldElement {
        let mut base = *a;
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    pub fn pow_big(&self, a: &FieldElement, e: &BigUint) -> FieldElement {
        let mut acc = self.one();
        for i in (0..e.bits()).rev() {
            acc = self.mul(&acc, &acc);
            if e.bit(i) {
                acc = self.mul(&acc, a);
            }
        }
        acc
    }

    /// Absolute Frobenius `a -> a^p`.
    pub fn frobenius(&self, a: &FieldElement) -> FieldElement {
        self.pow(a, self.0.p as u64)
    }

    /// Inverse of the Frobenius, `a^{p^{k-1}}`.
    pub fn pth_root(&self, a: &FieldElement) -> FieldElement {
        let mut r = *a;
        for _ in 1..self.0.k {
            r = self.frobenius(&r);
        }
        r
    }

    /// Multiplicative order of a nonzero element.
    pub fn multiplicative_order(&self, a: &FieldElement) -> Option<BigUint> {
        if a.is_zero() {
            return None;
        }
        let q1 = self.order() - 1u32;
        let mut ord = q1.clone();
        for r in prime_factors_big(&q1) {
            while (&ord % &r) == BigUint::from(0u32) {
                let cand = &ord / &r;
                if self.pow_big(a, &cand) == self.one() {
                    ord = cand;
                } else {
                    break;
                }
            }
        }
        Some(ord)
    }

    /// Smallest `d` dividing the degree with `a` in the subfield `F_{p^d}`.
    pub fn element_degree(&self, a: &FieldElement) -> usize {
        let k = self.0.k;
        for d in 1..=k {
            if k % d != 0 {
                continue;
            }
            let mut r = *a;
            for _ in 0..d {
                r = self.frobenius(&r);
            }
            if r == *a {
                return d;
            }
        }
        k
    }

    /// Parses an element literal as produced by `Display`.
    pub fn parse_element(&self, s: &str) -> Result<FieldElement, FieldError> {
        let bad = || FieldError::BadElement(s.to_string());
        let s = s.trim();
        let inner = s
            .strip_prefix('(')
            .and_then(|x| x.strip_suffix(')'))
            .unwrap_or(s);
        let mut acc = self.zero();
        for term in split_signed_terms(inner) {
            let (neg, term) = match term.strip_prefix('-') {
                Some(t) => (true, t.trim()),
                None => (false, term.trim_start_matches('+').trim()),
            };
            if term.is_empty() {
                return Err(bad());
            }
            let (coef, pow) = if let Some(pos) = term.find('t') {
                let c = term[..pos].trim().trim_end_matches('*');
                let c: i64 = if c.is_empty() {
                    1
                } else {
                    c.parse().map_err(|_| bad())?
                };
                let rest = term[pos + 1..].trim();
                let e: u64 = if rest.is_empty() {
                    1
                } else {
                    rest.strip_prefix('^')
                        .ok_or_else(bad)?
                        .parse()
                        .map_err(|_| bad())?
                };
                (c, e)
            } else {
                (term.parse::<i64>().map_err(|_| bad())?, 0)
            };
            let v = self.mul(&self.from_i64(coef), &self.gen_or_zero_power(pow));
            acc = if neg { self.sub(&acc, &v) } else { self.add(&acc, &v) };
        }
        Ok(acc)
    }

    fn gen_or_zero_power(&self, e: u64) -> FieldElement {
        if e == 0 {
            self.one()
        } else {
            self.pow(&self.gen(), e)
        }
    }

    pub fn fmt_element(&self, a: &FieldElement) -> String {
        format_element(a)
    }
}

fn split_signed_terms(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for ch in s.chars() {
        if (ch == '+' || ch == '-') && !cur.trim().is_empty() && !cur.trim_end().ends_with('^') {
            out.push(cur.clone());
            cur.clear();
        }
        if !ch.is_whitespace() {
            cur.push(ch);
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

pub(crate) fn prime_factors_big(n: &BigUint) -> Vec<BigUint> {
    let mut n = n.clone();
    let mut out = Vec::new();
    let zero = BigUint::from(0u32);
    let one = BigUint::from(1u32);
    let mut d = BigUint::from(2u32);
    while &d * &d <= n {
        if (&n % &d) == zero {
            out.push(d.clone());
            while (&n % &d) == zero {
                n /= &d;
            }
        }
        d += 1u32;
    }
    if n > one {
        out.push(n);
    }
    out
}

pub(crate) fn prime_factors(mut n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
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

pub(crate) fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub(crate) fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// A field homomorphism `src -> dst`, stored as the images of the power basis.
#[derive(Clone, Debug)]
pub struct Embedding {
    src: FieldCtx,
    dst: FieldCtx,
    images: Vec<FieldElement>,
}

impl Embedding {
    /// The distinguished embedding. Between canonical fields these form a
    /// compatible system; other fields are routed through the canonical
    /// field of their degree.
    pub fn new(src: &FieldCtx, dst: &FieldCtx) -> Result<Embedding, FieldError> {
        let no = || FieldError::NoEmbedding {
            src: src.spec(),
            dst: dst.spec(),
        };
        if src.p() != dst.p() || dst.degree() % src.degree() != 0 {
            return Err(no());
        }
        if src == dst {
            return Ok(Self::from_gen_image(src, dst, src.gen()));
        }
        let p = src.p() as u64;
        let a = src.degree();
        let c = dst.degree();
        if a == 1 {
            return Ok(Self::from_gen_image(src, dst, dst.zero()));
        }
        // src -> canonical(a)
        let canon_a = FieldCtx::canonical(p, a)?;
        let to_canon_a = if *src == canon_a {
            None
        } else {
            let fa = UPoly::new(src.modulus().iter().map(|&x| FieldElement::raw(x)).collect());
            let roots = fa.roots(&canon_a);
            Some(Self::from_gen_image(src, &canon_a, roots[0].0))
        };
        // canonical(a) -> canonical(c)
        let canon_c = FieldCtx::canonical(p, c)?;
        let gen_img = if a == c {
            canon_c.gen()
        } else {
            let subs = subfield_generators(p, c)?;
            subs[&a]
        };
        let a_to_c = Self::from_gen_image(&canon_a, &canon_c, gen_img);
        // canonical(c) -> dst
        let c_to_dst = if *dst == canon_c {
            None
        } else {
            Some(Self::new(dst, &canon_c)?.inverse()?)
        };
        let mut images = Vec::with_capacity(a);
        let mut pw = src.one();
        for _ in 0..a {
            let mut v = pw;
            if let Some(e) = &to_canon_a {
                v = e.apply(&v);
            }
            v = a_to_c.apply(&v);
            if let Some(e) = &c_to_dst {
                v = e.apply(&v);
            }
            images.push(v);
            pw = src.mul(&pw, &src.gen());
        }
        Ok(Embedding {
            src: src.clone(),
            dst: dst.clone(),
            images,
        })
    }

    /// All `deg(src)` embeddings: the distinguished one followed by its
    /// compositions with powers of the Frobenius of `dst`.
    pub fn all(src: &FieldCtx, dst: &FieldCtx) -> Result<Vec<Embedding>, FieldError> {
        let base = Self::new(src, dst)?;
        let mut out = Vec::new();
        let mut g = base.apply(&src.gen());
        if src.degree() == 1 {
            return Ok(vec![base]);
        }
        for _ in 0..src.degree() {
            out.push(Self::from_gen_image(src, dst, g));
            g = dst.frobenius(&g);
        }
        Ok(out)
    }

    fn from_gen_image(src: &FieldCtx, dst: &FieldCtx, g: FieldElement) -> Embedding {
        let mut images = Vec::with_capacity(src.degree());
        let mut pw = dst.one();
        for _ in 0..src.degree() {
            images.push(pw);
            pw = dst.mul(&pw, &g);
        }
        Embedding {
            src: src.clone(),
            dst: dst.clone(),
            images,
        }
    }

    pub fn src(&self) -> &FieldCtx {
        &self.src
    }

    pub fn dst(&self) -> &FieldCtx {
        &self.dst
    }

    pub fn is_identity(&self) -> bool {
        self.src == self.dst && self.images.get(1).map_or(true, |g| *g == self.src.gen())
    }

    pub fn apply(&self, a: &FieldElement) -> FieldElement {
        if self.src == self.dst && self.is_identity() {
            return *a;
        }
        let mut acc = self.dst.zero();
        for (i, img) in self.images.iter().enumerate() {
            let c = a.c[i];
            if c != 0 {
                acc = self.dst.add(&acc, &self.dst.scale(img, c));
            }
        }
        acc
    }

    /// Preimage of an element lying in the image, if any.
    pub fn preimage(&self, b: &FieldElement) -> Option<FieldElement> {
        // Solve sum_i x_i images[i] = b over F_p.
        let a = self.src.degree();
        let c = self.dst.degree();
        let p = self.src.p() as u64;
        let mut rows: Vec<Vec<u64>> = (0..c)
            .map(|r| {
                let mut row: Vec<u64> = self.images.iter().map(|img| img.c[r] as u64).collect();
                row.push(b.c[r] as u64);
                row
            })
            .collect();
        let sol = solve_mod_p(&mut rows, a, p)?;
        let mut out = [0; MAX_DEGREE];
        for (i, v) in sol.into_iter().enumerate() {
            out[i] = v as u32;
        }
        Some(FieldElement { c: out })
    }

    fn inverse(&self) -> Result<Embedding, FieldError> {
        if self.src.degree() != self.dst.degree() {
            return Err(FieldError::NoEmbedding {
                src: self.dst.spec(),
                dst: self.src.spec(),
            });
        }
        let g = self
            .preimage(&self.dst.gen())
            .expect("isomorphism is surjective");
        Ok(Self::from_gen_image(&self.dst, &self.src, g))
    }
}

/// Solves an augmented system over F_p with `n` unknowns; `None` if inconsistent.
fn solve_mod_p(rows: &mut [Vec<u64>], n: usize, p: u64) -> Option<Vec<u64>> {
    let m = rows.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..n {
        let Some(piv) = (r..m).find(|&i| rows[i][col] % p != 0) else {
            continue;
        };
        rows.swap(r, piv);
        let inv = inv_mod(rows[r][col], p);
        for v in rows[r].iter_mut() {
            *v = *v * inv % p;
        }
        for i in 0..m {
            if i != r && rows[i][col] != 0 {
                let f = rows[i][col];
                for j in 0..=n {
                    rows[i][j] = (rows[i][j] + (p - f) * rows[r][j]) % p;
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    if rows[r..].iter().any(|row| row[n] % p != 0) {
        return None;
    }
    let mut x = vec![0u64; n];
    for (i, &col) in pivots.iter().enumerate() {
        x[col] = rows[i][n];
    }
    Some(x)
}

/// Images in `canonical(c)` of the generators of `canonical(b)` for every
/// proper divisor `1 < b < c`, chosen so that all embeddings compose.
fn subfield_generators(p: u64, c: usize) -> Result<Arc<BTreeMap<usize, FieldElement>>, FieldError> {
    let key = (p as u32, c);
    if let Some(m) = subfield_cache().lock().unwrap().get(&key) {
        return Ok(m.clone());
    }
    let canon_c = FieldCtx::canonical(p, c)?;
    let mut result: BTreeMap<usize, FieldElement> = BTreeMap::new();
    let mut maximal: Vec<usize> = prime_factors(c).into_iter().map(|r| c / r).filter(|&b| b > 1).collect();
    maximal.sort_unstable();
    for b in maximal {
        let canon_b = FieldCtx::canonical(p, b)?;
        let fb = UPoly::new(canon_b.modulus().iter().map(|&x| FieldElement::raw(x)).collect());
        let roots = fb.roots(&canon_c);
        let sub_b = subfield_generators(p, b)?;
        let mut chosen = None;
        for (r, _) in roots {
            let emb = Embedding::from_gen_image(&canon_b, &canon_c, r);
            let ok = sub_b
                .iter()
                .all(|(g, img)| result.get(g).map_or(true, |prev| emb.apply(img) == *prev));
            if ok {
                chosen = Some(emb);
                break;
            }
        }
        let emb = chosen.expect("a compatible embedding always exists");
        result.insert(b, emb.apply(&canon_b.gen()));
        for (g, img) in sub_b.iter() {
            result.entry(*g).or_insert_with(|| emb.apply(img));
        }
    }
    let arc = Arc::new(result);
    subfield_cache().lock().unwrap().insert(key, arc.clone());
    Ok(arc)
}

/// Finds `r` with `r^n = a` in the smallest extension of `ctx` containing one,
/// or, when `primitive` is set (and `a = 1`), an element of exact order `n`.
/// Among all candidates in that field the least one is returned.
pub fn find_nth_root(
    ctx: &FieldCtx,
    a: &FieldElement,
    n: u64,
    primitive: bool,
) -> Result<(FieldCtx, FieldElement), FieldError> {
    find_nth_root_capped(ctx, a, n, primitive, DEFAULT_DEGREE_CAP)
}

pub fn find_nth_root_capped(
    ctx: &FieldCtx,
    a: &FieldElement,
    n: u64,
    primitive: bool,
    cap: usize,
) -> Result<(FieldCtx, FieldElement), FieldError> {
    assert!(n >= 1);
    if a.is_zero() {
        if primitive {
            return Err(FieldError::ZeroRoot(n));
        }
        return Ok((ctx.clone(), ctx.zero()));
    }
    let p = ctx.p() as u64;
    let k = ctx.degree();
    if primitive && n % p == 0 {
        return Err(FieldError::ZeroRoot(n));
    }
    // x^n - a over ctx
    let mut coeffs = vec![ctx.zero(); n as usize + 1];
    coeffs[0] = ctx.neg(a);
    coeffs[n as usize] = ctx.one();
    let f = UPoly::new(coeffs);
    let accept = |field: &FieldCtx, r: &FieldElement| -> bool {
        if !primitive {
            return true;
        }
        let ord = field.multiplicative_order(r).unwrap();
        ord == BigUint::from(n)
    };
    // Try the field itself first.
    let roots: Vec<FieldElement> = f.roots(ctx).into_iter().map(|x| x.0).filter(|r| accept(ctx, r)).collect();
    if let Some(r) = roots.into_iter().min() {
        return Ok((ctx.clone(), r));
    }
    for m in 2.. {
        let total = k * m;
        if total > cap.min(MAX_DEGREE) {
            return Err(FieldError::DegreeOverflow { needed: total, cap });
        }
        let ext = FieldCtx::canonical(p, total)?;
        let emb = Embedding::new(ctx, &ext)?;
        let fe = f.map_coeffs(|c| emb.apply(c));
        let roots: Vec<FieldElement> = fe.roots(&ext).into_iter().map(|x| x.0).filter(|r| accept(&ext, r)).collect();
        if let Some(r) = roots.into_iter().min() {
            return Ok((ext, r));
        }
    }
    unreachable!()
}

/// Embeds `a` from `src` into `dst` along the distinguished embedding.
pub fn embed(src: &FieldCtx, dst: &FieldCtx, a: &FieldElement) -> Result<FieldElement, FieldError> {
    Ok(Embedding::new(src, dst)?.apply(a))
}

/// The canonical field of degree `lcm(deg a, deg b)`.
pub fn compositum(a: &FieldCtx, b: &FieldCtx) -> Result<FieldCtx, FieldError> {
    if a.p() != b.p() {
        return Err(FieldError::NoEmbedding {
            src: a.spec(),
            dst: b.spec(),
        });
    }
    if a == b {
        return Ok(a.clone());
    }
    FieldCtx::canonical(a.p() as u64, lcm(a.degree(), b.degree()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn prime_field_construction() {
        assert_eq!(make_prime_field(7).unwrap().order_u128(), Some(7));
        assert_eq!(make_prime_field(13).unwrap().degree(), 1);
        assert_eq!(make_prime_field(3), Err(FieldError::ExcludedCharacteristic(3)));
        assert_eq!(make_prime_field(2), Err(FieldError::ExcludedCharacteristic(2)));
        assert_eq!(make_prime_field(15), Err(FieldError::NotPrime(15)));
    }

    #[test]
    fn extend_examples() {
        let f13 = make_prime_field(13).unwrap();
        // squares mod 13 are {1,3,4,9,10,12}; 2 is not among them
        let squares: Vec<u64> = (1..13u64).map(|x| x * x % 13).collect();
        assert!(!squares.contains(&2));
        let t2m2 = UPoly::new(vec![f13.from_i64(-2), f13.zero(), f13.one()]);
        let (f169, r) = extend(&f13, &t2m2).unwrap();
        assert_eq!(f169.order_u128(), Some(169));
        assert_eq!(f169.mul(&r, &r), f169.from_i64(2));

        let f7 = make_prime_field(7).unwrap();
        let squares7: Vec<u64> = (1..7u64).map(|x| x * x % 7).collect();
        assert!(!squares7.contains(&6));
        let t2p1 = UPoly::new(vec![f7.one(), f7.zero(), f7.one()]);
        let (f49, _) = extend(&f7, &t2p1).unwrap();
        assert_eq!(f49.order_u128(), Some(49));

        let t2m1 = UPoly::new(vec![f13.from_i64(-1), f13.zero(), f13.one()]);
        assert_eq!(extend(&f13, &t2m1).unwrap_err(), FieldError::Reducible);
    }

    #[test]
    fn nth_root_examples() {
        let f31 = make_prime_field(31).unwrap();
        let (c, r) = find_nth_root(&f31, &f31.from_i64(7), 2, false).unwrap();
        assert_eq!(c, f31);
        assert_eq!(r, f31.from_i64(10));

        let f13 = make_prime_field(13).unwrap();
        let (c, r) = find_nth_root(&f13, &f13.one(), 4, true).unwrap();
        assert_eq!(c, f13);
        assert_eq!(r, f13.from_i64(5));

        let f17 = make_prime_field(17).unwrap();
        let (_, r) = find_nth_root(&f17, &f17.one(), 8, true).unwrap();
        assert_eq!(r, f17.from_i64(2));

        // sqrt(2) over F_13 needs F_169
        let (c, r) = find_nth_root(&f13, &f13.from_i64(2), 2, false).unwrap();
        assert_eq!(c.degree(), 2);
        assert_eq!(c.mul(&r, &r), c.from_i64(2));
    }

    #[test]
    fn degree_cap_is_enforced() {
        let f5 = make_prime_field(5).unwrap();
        // primitive 11th root of unity needs degree ord_11(5) = 5
        let err = find_nth_root_capped(&f5, &f5.one(), 11, true, 4).unwrap_err();
        assert!(matches!(err, FieldError::DegreeOverflow { .. }));
        let (c, r) = find_nth_root_capped(&f5, &f5.one(), 11, true, 8).unwrap();
        assert_eq!(c.degree(), 5);
        assert_eq!(c.pow(&r, 11), c.one());
    }

    #[test]
    fn embedding_examples() {
        let f13 = make_prime_field(13).unwrap();
        let f169 = FieldCtx::canonical(13, 2).unwrap();
        assert_eq!(embed(&f13, &f169, &f13.from_i64(5)).unwrap(), f169.from_i64(5));
        let f7 = make_prime_field(7).unwrap();
        assert_eq!(embed(&f7, &f7, &f7.from_i64(3)).unwrap(), f7.from_i64(3));

        let f49 = FieldCtx::canonical(7, 2).unwrap();
        let all = Embedding::all(&f49, &f49).unwrap();
        assert_eq!(all.len(), 2);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let a = f49.random(&mut rng);
            assert_eq!(all[0].apply(&a), a);
            assert_eq!(all[1].apply(&a), f49.pow(&a, 7));
        }
        assert!(Embedding::new(&f169, &FieldCtx::canonical(13, 3).unwrap()).is_err());
    }

    #[test]
    fn tower_compatibility() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (p, a, b, c) in [(5u64, 2, 4, 8), (7, 2, 6, 12), (11, 3, 6, 12), (13, 2, 4, 12)] {
            let fa = FieldCtx::canonical(p, a).unwrap();
            let fb = FieldCtx::canonical(p, b).unwrap();
            let fc = FieldCtx::canonical(p, c).unwrap();
            let ab = Embedding::new(&fa, &fb).unwrap();
            let bc = Embedding::new(&fb, &fc).unwrap();
            let ac = Embedding::new(&fa, &fc).unwrap();
            for _ in 0..10 {
                let x = fa.random(&mut rng);
                assert_eq!(bc.apply(&ab.apply(&x)), ac.apply(&x));
            }
        }
    }

    #[test]
    fn noncanonical_field_embeds_compatibly() {
        let f = FieldCtx::parse_spec("13^2/11,0,1").unwrap();
        assert_eq!(f.spec(), "13^2/11,0,1");
        let c4 = FieldCtx::canonical(13, 4).unwrap();
        let e = Embedding::new(&f, &c4).unwrap();
        let g = e.apply(&f.gen());
        assert_eq!(c4.mul(&g, &g), c4.from_i64(2));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let x = f.random(&mut rng);
            let y = f.random(&mut rng);
            assert_eq!(e.apply(&f.mul(&x, &y)), c4.mul(&e.apply(&x), &e.apply(&y)));
            assert_eq!(e.preimage(&e.apply(&x)), Some(x));
        }
    }

    #[test]
    fn element_literals_round_trip() {
        let f = FieldCtx::canonical(7, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let a = f.random(&mut rng);
            assert_eq!(f.parse_element(&a.to_string()).unwrap(), a);
        }
        assert_eq!(f.parse_element("-1").unwrap(), f.from_i64(6));
    }

    #[test]
    fn frobenius_fixes_after_k_steps() {
        let f = FieldCtx::canonical(11, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let a = f.random(&mut rng);
            let mut r = a;
            for _ in 0..5 {
                r = f.frobenius(&r);
            }
            assert_eq!(r, a);
            assert_eq!(f.pth_root(&f.frobenius(&a)), a);
        }
    }

    use proptest::prelude::*;

    proptest! {
        #[test]
        fn field_axioms(p_idx in 0usize..4, k in 1usize..7, seed in any::<u64>()) {
            let p = [5u64, 7, 13, 47][p_idx];
            let f = FieldCtx::canonical(p, k).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = f.random(&mut rng);
            let b = f.random(&mut rng);
            let c = f.random(&mut rng);
            prop_assert_eq!(f.mul(&a, &f.add(&b, &c)), f.add(&f.mul(&a, &b), &f.mul(&a, &c)));
            prop_assert_eq!(f.mul(&f.mul(&a, &b), &c), f.mul(&a, &f.mul(&b, &c)));
            prop_assert_eq!(f.sub(&f.add(&a, &b), &b), a);
            if !a.is_zero() {
                prop_assert_eq!(f.mul(&a, &f.inv(&a).unwrap()), f.one());
                let q1 = f.order() - 1u32;
                prop_assert_eq!(f.pow_big(&a, &q1), f.one());
            }
        }
    }
}
