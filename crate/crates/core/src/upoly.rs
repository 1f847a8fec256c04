//! Dense univariate polynomials over a [`FieldCtx`].
//!
//! Root finding is distinct-degree factorization followed by
//! Cantor–Zassenhaus equal-degree splitting. The splitting randomness is a
//! ChaCha stream seeded from the field and the polynomial, so results are
//! reproducible.

use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::gf::{lcm, prime_factors, Embedding, FieldCtx, FieldElement, FieldError, MAX_DEGREE};

/// Coefficients low degree first, trailing zeros trimmed.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct UPoly {
    c: Vec<FieldElement>,
}

impl UPoly {
    pub fn new(mut c: Vec<FieldElement>) -> UPoly {
        while c.last().map_or(false, |x| x.is_zero()) {
            c.pop();
        }
        UPoly { c }
    }

    pub fn zero() -> UPoly {
        UPoly { c: Vec::new() }
    }

    pub fn constant(a: FieldElement) -> UPoly {
        UPoly::new(vec![a])
    }

    pub fn one(ctx: &FieldCtx) -> UPoly {
        UPoly::constant(ctx.one())
    }

    pub fn x(ctx: &FieldCtx) -> UPoly {
        UPoly::new(vec![ctx.zero(), ctx.one()])
    }

    /// `t - a`
    pub fn linear(ctx: &FieldCtx, a: &FieldElement) -> UPoly {
        UPoly::new(vec![ctx.neg(a), ctx.one()])
    }

    pub fn from_i64s(ctx: &FieldCtx, c: &[i64]) -> UPoly {
        UPoly::new(c.iter().map(|&x| ctx.from_i64(x)).collect())
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.c
    }

    pub fn coeff(&self, i: usize) -> FieldElement {
        self.c.get(i).copied().unwrap_or(FieldElement::ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn lead(&self) -> FieldElement {
        self.c.last().copied().unwrap_or(FieldElement::ZERO)
    }

    pub fn is_constant(&self) -> bool {
        self.c.len() <= 1
    }

    pub fn map_coeffs(&self, f: impl Fn(&FieldElement) -> FieldElement) -> UPoly {
        UPoly::new(self.c.iter().map(f).collect())
    }

    pub fn embed(&self, e: &Embedding) -> UPoly {
        self.map_coeffs(|a| e.apply(a))
    }

    pub fn add(&self, ctx: &FieldCtx, o: &UPoly) -> UPoly {
        let n = self.c.len().max(o.c.len());
        UPoly::new((0..n).map(|i| ctx.add(&self.coeff(i), &o.coeff(i))).collect())
    }

    pub fn sub(&self, ctx: &FieldCtx, o: &UPoly) -> UPoly {
        let n = self.c.len().max(o.c.len());
        UPoly::new((0..n).map(|i| ctx.sub(&self.coeff(i), &o.coeff(i))).collect())
    }

    pub fn neg(&self, ctx: &FieldCtx) -> UPoly {
        self.map_coeffs(|a| ctx.neg(a))
    }

    pub fn scale(&self, ctx: &FieldCtx, s: &FieldElement) -> UPoly {
        self.map_coeffs(|a| ctx.mul(a, s))
    }

    pub fn mul(&self, ctx: &FieldCtx, o: &UPoly) -> UPoly {
        if self.is_zero() || o.is_zero() {
            return UPoly::zero();
        }
        let mut r = vec![ctx.zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                r[i + j] = ctx.add(&r[i + j], &ctx.mul(a, b));
            }
        }
        UPoly::new(r)
    }

    pub fn pow(&self, ctx: &FieldCtx, e: u32) -> UPoly {
        let mut acc = UPoly::one(ctx);
        for _ in 0..e {
            acc = acc.mul(ctx, self);
        }
        acc
    }

    /// Quotient and remainder; panics on division by zero.
    pub fn divrem(&self, ctx: &FieldCtx, d: &UPoly) -> (UPoly, UPoly) {
        let dd = d.degree().expect("division by zero polynomial");
        let inv = ctx.inv(&d.lead()).unwrap();
        let mut r = self.c.clone();
        if r.len() <= dd {
            return (UPoly::zero(), self.clone());
        }
        let mut q = vec![ctx.zero(); r.len() - dd];
        for i in (dd..r.len()).rev() {
            let c = ctx.mul(&r[i], &inv);
            if c.is_zero() {
                continue;
            }
            q[i - dd] = c;
            for j in 0..=dd {
                r[i - dd + j] = ctx.sub(&r[i - dd + j], &ctx.mul(&c, &d.c[j]));
            }
        }
        r.truncate(dd);
        (UPoly::new(q), UPoly::new(r))
    }

    pub fn rem(&self, ctx: &FieldCtx, d: &UPoly) -> UPoly {
        self.divrem(ctx, d).1
    }

    /// Exact quotient; `None` when `d` does not divide `self`.
    pub fn div_exact(&self, ctx: &FieldCtx, d: &UPoly) -> Option<UPoly> {
        let (q, r) = self.divrem(ctx, d);
        r.is_zero().then_some(q)
    }

    pub fn monic(&self, ctx: &FieldCtx) -> UPoly {
        if self.is_zero() {
            return UPoly::zero();
        }
        let inv = ctx.inv(&self.lead()).unwrap();
        self.scale(ctx, &inv)
    }

    /// Monic gcd; `gcd(0, 0) = 0`.
    pub fn gcd(&self, ctx: &FieldCtx, o: &UPoly) -> UPoly {
        let mut a = self.clone();
        let mut b = o.clone();
        while !b.is_zero() {
            let r = a.rem(ctx, &b);
            a = b;
            b = r;
        }
        a.monic(ctx)
    }

    pub fn lcm(&self, ctx: &FieldCtx, o: &UPoly) -> UPoly {
        if self.is_zero() || o.is_zero() {
            return UPoly::zero();
        }
        let g = self.gcd(ctx, o);
        self.mul(ctx, o).div_exact(ctx, &g).unwrap().monic(ctx)
    }

    pub fn derivative(&self, ctx: &FieldCtx) -> UPoly {
        UPoly::new(
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, a)| ctx.mul(a, &ctx.from_u64(i as u64)))
                .collect(),
        )
    }

    pub fn eval(&self, ctx: &FieldCtx, x: &FieldElement) -> FieldElement {
        self.c
            .iter()
            .rev()
            .fold(ctx.zero(), |acc, a| ctx.add(&ctx.mul(&acc, x), a))
    }

    pub fn mulmod(&self, ctx: &FieldCtx, o: &UPoly, m: &UPoly) -> UPoly {
        self.mul(ctx, o).rem(ctx, m)
    }

    /// `self^e mod m`.
    pub fn powmod(&self, ctx: &FieldCtx, e: &BigUint, m: &UPoly) -> UPoly {
        let base = self.rem(ctx, m);
        let mut acc = UPoly::one(ctx).rem(ctx, m);
        for i in (0..e.bits()).rev() {
            acc = acc.mulmod(ctx, &acc, m);
            if e.bit(i) {
                acc = acc.mulmod(ctx, &base, m);
            }
        }
        acc
    }

    /// Product of the distinct monic irreducible factors.
    pub fn radical(&self, ctx: &FieldCtx) -> UPoly {
        let f = self.monic(ctx);
        if f.is_constant() {
            return f;
        }
        let d = f.derivative(ctx);
        if d.is_zero() {
            // f(t) = g(t^p) = h(t)^p
            let p = ctx.p() as usize;
            let h = UPoly::new(f.c.iter().step_by(p).map(|a| ctx.pth_root(a)).collect());
            return h.radical(ctx);
        }
        let c = f.gcd(ctx, &d);
        let w = f.div_exact(ctx, &c).unwrap();
        w.lcm(ctx, &c.radical(ctx))
    }

    pub fn is_squarefree(&self, ctx: &FieldCtx) -> bool {
        self.radical(ctx).degree() == self.monic(ctx).degree()
    }

    /// Rabin's irreducibility test over `ctx`.
    pub fn is_irreducible(&self, ctx: &FieldCtx) -> bool {
        let Some(n) = self.degree() else {
            return false;
        };
        if n == 0 {
            return false;
        }
        if n == 1 {
            return true;
        }
        let f = self.monic(ctx);
        let q = ctx.order();
        let x = UPoly::x(ctx);
        // xq[i] = x^{q^i} mod f
        let mut xq = vec![x.rem(ctx, &f)];
        for i in 1..=n {
            let next = xq[i - 1].powmod(ctx, &q, &f);
            xq.push(next);
        }
        if xq[n] != x.rem(ctx, &f) {
            return false;
        }
        for r in prime_factors(n) {
            let g = xq[n / r].sub(ctx, &x).gcd(ctx, &f);
            if !g.is_constant() {
                return false;
            }
        }
        true
    }

    /// Distinct-degree factorization of a monic squarefree polynomial:
    /// pairs `(g_d, d)` where `g_d` is the product of its degree-`d` factors.
    pub fn distinct_degree(&self, ctx: &FieldCtx) -> Vec<(UPoly, usize)> {
        let mut f = self.monic(ctx);
        let q = ctx.order();
        let x = UPoly::x(ctx);
        let mut h = x.rem(ctx, &f);
        let mut out = Vec::new();
        let mut d = 0;
        while f.degree().unwrap_or(0) >= 2 * (d + 1) {
            d += 1;
            h = h.powmod(ctx, &q, &f);
            let g = h.sub(ctx, &x).gcd(ctx, &f);
            if !g.is_constant() {
                f = f.div_exact(ctx, &g).unwrap();
                h = h.rem(ctx, &f);
                out.push((g, d));
            }
        }
        if let Some(n) = f.degree() {
            if n >= 1 {
                out.push((f, n));
            }
        }
        out
    }

    /// Splits a monic squarefree product of degree-`d` irreducibles.
    pub fn equal_degree(&self, ctx: &FieldCtx, d: usize) -> Vec<UPoly> {
        let f = self.monic(ctx);
        let n = f.degree().unwrap_or(0);
        if n == 0 {
            return Vec::new();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed_for(ctx, &f));
        let exp = (ctx.order().pow(d as u32) - 1u32) / 2u32;
        let mut pending = vec![f];
        let mut done = Vec::new();
        while let Some(g) = pending.pop() {
            let m = g.degree().unwrap();
            if m == d {
                done.push(g);
                continue;
            }
            loop {
                let a = UPoly::new((0..m).map(|_| ctx.random(&mut rng)).collect());
                if a.is_constant() {
                    continue;
                }
                let b = a.powmod(ctx, &exp, &g).sub(ctx, &UPoly::one(ctx));
                let h = b.gcd(ctx, &g);
                let hd = h.degree().unwrap_or(0);
                if hd > 0 && hd < m {
                    let other = g.div_exact(ctx, &h).unwrap();
                    pending.push(h);
                    pending.push(other.monic(ctx));
                    break;
                }
            }
        }
        done.sort_by(|a, b| a.c.cmp(&b.c));
        done
    }

    /// Distinct monic irreducible factors, ordered by degree then coefficients.
    pub fn irreducible_factors(&self, ctx: &FieldCtx) -> Vec<UPoly> {
        let r = self.radical(ctx);
        if r.is_constant() {
            return Vec::new();
        }
        let mut out = Vec::new();
        for (g, d) in r.distinct_degree(ctx) {
            out.extend(g.equal_degree(ctx, d));
        }
        out.sort_by(|a, b| a.degree().cmp(&b.degree()).then_with(|| a.c.cmp(&b.c)));
        out
    }

    /// Roots lying in `ctx` with exact multiplicities, sorted by element.
    pub fn roots(&self, ctx: &FieldCtx) -> Vec<(FieldElement, u32)> {
        if self.degree().map_or(true, |d| d == 0) {
            return Vec::new();
        }
        let f = self.monic(ctx);
        let x = UPoly::x(ctx);
        let xq = x.powmod(ctx, &ctx.order(), &f);
        let g = xq.sub(ctx, &x).gcd(ctx, &f);
        if g.is_constant() {
            return Vec::new();
        }
        let mut out: Vec<(FieldElement, u32)> = g
            .equal_degree(ctx, 1)
            .into_iter()
            .map(|lin| {
                let r = ctx.neg(&lin.coeff(0));
                let mut m = 0;
                let mut rest = f.clone();
                let l = UPoly::linear(ctx, &r);
                while let Some(q) = rest.div_exact(ctx, &l) {
                    rest = q;
                    m += 1;
                }
                (r, m)
            })
            .collect();
        out.sort();
        out
    }

    /// Extends `ctx` until `self` splits and returns all roots there.
    pub fn splitting_roots(
        &self,
        ctx: &FieldCtx,
        cap: usize,
    ) -> Result<(FieldCtx, Vec<(FieldElement, u32)>), FieldError> {
        let d = self.splitting_degree(ctx);
        let n = ctx.degree() * d;
        if n > cap.min(MAX_DEGREE) {
            return Err(FieldError::DegreeOverflow { needed: n, cap });
        }
        if d == 1 {
            return Ok((ctx.clone(), self.roots(ctx)));
        }
        let ext = FieldCtx::canonical(ctx.p() as u64, n)?;
        let e = Embedding::new(ctx, &ext)?;
        let f = self.embed(&e);
        let roots = f.roots(&ext);
        Ok((ext, roots))
    }

    /// Degree over `ctx` of the splitting field.
    pub fn splitting_degree(&self, ctx: &FieldCtx) -> usize {
        let r = self.radical(ctx);
        if r.is_constant() {
            return 1;
        }
        r.distinct_degree(ctx)
            .iter()
            .fold(1, |acc, (_, d)| lcm(acc, *d))
    }

    pub fn to_string_with(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (i, a) in self.c.iter().enumerate().rev() {
            if a.is_zero() {
                continue;
            }
            parts.push(match i {
                0 => format!("{a}"),
                1 => format!("{a}*{var}"),
                _ => format!("{a}*{var}^{i}"),
            });
        }
        parts.join(" + ")
    }
}

/// FNV-1a over the field description and the coefficients.
fn seed_for(ctx: &FieldCtx, f: &UPoly) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    let mut eat = |x: u32| {
        for b in x.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
    };
    eat(ctx.p());
    eat(ctx.degree() as u32);
    for &m in ctx.modulus() {
        eat(m);
    }
    for a in &f.c {
        for &x in &a.coeffs()[..ctx.degree()] {
            eat(x);
        }
    }
    h
}
