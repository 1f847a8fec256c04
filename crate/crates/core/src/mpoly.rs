//! Homogeneous polynomials in `x, y, z` and elimination of `z`.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::gf::{Embedding, FieldCtx, FieldElement};
use crate::proj::{Mat3, ProjMap};
use crate::upoly::UPoly;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MpolyError {
    #[error("leading z-coefficient vanishes; change coordinates first")]
    LeadingCoefficientVanishes,
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("cannot parse polynomial: {0}")]
    Parse(String),
    #[error("polynomial is not homogeneous")]
    NotHomogeneous,
}

pub type Exp = (u32, u32, u32);

/// A form of fixed degree; only nonzero coefficients are stored.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct HomPoly {
    deg: u32,
    terms: BTreeMap<Exp, FieldElement>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `F ∘ M`
    Substitute,
    /// `F ∘ M⁻¹`, so that `V(result) = M(V(F))`
    Transform,
}

impl HomPoly {
    pub fn zero(deg: u32) -> HomPoly {
        HomPoly {
            deg,
            terms: BTreeMap::new(),
        }
    }

    pub fn monomial(c: FieldElement, e: Exp) -> HomPoly {
        let mut p = HomPoly::zero(e.0 + e.1 + e.2);
        if !c.is_zero() {
            p.terms.insert(e, c);
        }
        p
    }

    /// The variable with index `i` (0 = x, 1 = y, 2 = z).
    pub fn var(ctx: &FieldCtx, i: usize) -> HomPoly {
        let e = match i {
            0 => (1, 0, 0),
            1 => (0, 1, 0),
            _ => (0, 0, 1),
        };
        HomPoly::monomial(ctx.one(), e)
    }

    pub fn constant(c: FieldElement) -> HomPoly {
        HomPoly::monomial(c, (0, 0, 0))
    }

    /// Builds a form from integer coefficients.
    pub fn from_terms(ctx: &FieldCtx, deg: u32, terms: &[(i64, Exp)]) -> HomPoly {
        let mut p = HomPoly::zero(deg);
        for &(c, e) in terms {
            assert_eq!(e.0 + e.1 + e.2, deg, "inhomogeneous term");
            p.add_term(ctx, e, ctx.from_i64(c));
        }
        p
    }

    pub fn from_elements(ctx: &FieldCtx, deg: u32, terms: &[(FieldElement, Exp)]) -> HomPoly {
        let mut p = HomPoly::zero(deg);
        for &(c, e) in terms {
            assert_eq!(e.0 + e.1 + e.2, deg, "inhomogeneous term");
            p.add_term(ctx, e, c);
        }
        p
    }

    pub fn add_term(&mut self, ctx: &FieldCtx, e: Exp, c: FieldElement) {
        debug_assert_eq!(e.0 + e.1 + e.2, self.deg);
        let v = match self.terms.get(&e) {
            Some(old) => ctx.add(old, &c),
            None => c,
        };
        if v.is_zero() {
            self.terms.remove(&e);
        } else {
            self.terms.insert(e, v);
        }
    }

    pub fn degree(&self) -> u32 {
        self.deg
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &BTreeMap<Exp, FieldElement> {
        &self.terms
    }

    pub fn coeff(&self, e: Exp) -> FieldElement {
        self.terms.get(&e).copied().unwrap_or(FieldElement::ZERO)
    }

    pub fn map_coeffs(&self, f: impl Fn(&FieldElement) -> FieldElement) -> HomPoly {
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| (*e, f(c)))
            .filter(|(_, c)| !c.is_zero())
            .collect();
        HomPoly {
            deg: self.deg,
            terms,
        }
    }

    pub fn embed(&self, e: &Embedding) -> HomPoly {
        self.map_coeffs(|c| e.apply(c))
    }

    pub fn add(&self, ctx: &FieldCtx, o: &HomPoly) -> HomPoly {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        assert_eq!(self.deg, o.deg, "adding forms of different degree");
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(ctx, *e, *c);
        }
        r
    }

    pub fn sub(&self, ctx: &FieldCtx, o: &HomPoly) -> HomPoly {
        self.add(ctx, &o.neg(ctx))
    }

    pub fn neg(&self, ctx: &FieldCtx) -> HomPoly {
        self.map_coeffs(|c| ctx.neg(c))
    }

    pub fn scale(&self, ctx: &FieldCtx, s: &FieldElement) -> HomPoly {
        let mut r = self.map_coeffs(|c| ctx.mul(c, s));
        r.deg = self.deg;
        r
    }

    pub fn mul(&self, ctx: &FieldCtx, o: &HomPoly) -> HomPoly {
        let mut r = HomPoly::zero(self.deg + o.deg);
        for (a, ca) in &self.terms {
            for (b, cb) in &o.terms {
                r.add_term(ctx, (a.0 + b.0, a.1 + b.1, a.2 + b.2), ctx.mul(ca, cb));
            }
        }
        r
    }

    pub fn pow(&self, ctx: &FieldCtx, e: u32) -> HomPoly {
        let mut acc = HomPoly::constant(ctx.one());
        for _ in 0..e {
            acc = acc.mul(ctx, self);
        }
        acc
    }

    pub fn eval(&self, ctx: &FieldCtx, v: &[FieldElement; 3]) -> FieldElement {
        let mut pw: [Vec<FieldElement>; 3] = Default::default();
        for i in 0..3 {
            let mut acc = ctx.one();
            for _ in 0..=self.deg {
                pw[i].push(acc);
                acc = ctx.mul(&acc, &v[i]);
            }
        }
        let mut s = ctx.zero();
        for (e, c) in &self.terms {
            let m = ctx.mul(
                &ctx.mul(&pw[0][e.0 as usize], &pw[1][e.1 as usize]),
                &pw[2][e.2 as usize],
            );
            s = ctx.add(&s, &ctx.mul(c, &m));
        }
        s
    }

    /// Partial derivative with respect to variable `i`.
    pub fn partial(&self, ctx: &FieldCtx, i: usize) -> HomPoly {
        let mut r = HomPoly::zero(self.deg.saturating_sub(1));
        for (e, c) in &self.terms {
            let (k, ne) = match i {
                0 => (e.0, (e.0.wrapping_sub(1), e.1, e.2)),
                1 => (e.1, (e.0, e.1.wrapping_sub(1), e.2)),
                _ => (e.2, (e.0, e.1, e.2.wrapping_sub(1))),
            };
            if k == 0 {
                continue;
            }
            r.add_term(ctx, ne, ctx.mul(c, &ctx.from_u64(k as u64)));
        }
        r
    }

    pub fn gradient(&self, ctx: &FieldCtx) -> [HomPoly; 3] {
        [self.partial(ctx, 0), self.partial(ctx, 1), self.partial(ctx, 2)]
    }

    /// Determinant of the matrix of second partials, of degree `3(d-2)`.
    pub fn hessian(&self, ctx: &FieldCtx) -> HomPoly {
        assert!(self.deg >= 2, "hessian needs degree at least 2");
        let g = self.gradient(ctx);
        let h: Vec<Vec<HomPoly>> = (0..3)
            .map(|i| (0..3).map(|j| g[i].partial(ctx, j)).collect())
            .collect();
        let minor = |a: usize, b: usize, c: usize, d: usize| {
            h[1][a].mul(ctx, &h[2][b]).sub(ctx, &h[1][c].mul(ctx, &h[2][d]))
        };
        let t0 = h[0][0].mul(ctx, &minor(1, 2, 2, 1));
        let t1 = h[0][1].mul(ctx, &minor(0, 2, 2, 0));
        let t2 = h[0][2].mul(ctx, &minor(0, 1, 1, 0));
        let mut r = t0.sub(ctx, &t1).add(ctx, &t2);
        r.deg = 3 * (self.deg - 2);
        r
    }

    /// `F(M v)`: each variable is replaced by the corresponding row of `M`.
    pub fn substitute(&self, ctx: &FieldCtx, m: &Mat3) -> HomPoly {
        let lin: Vec<HomPoly> = (0..3)
            .map(|i| {
                let mut l = HomPoly::zero(1);
                l.add_term(ctx, (1, 0, 0), m[i][0]);
                l.add_term(ctx, (0, 1, 0), m[i][1]);
                l.add_term(ctx, (0, 0, 1), m[i][2]);
                l
            })
            .collect();
        let d = self.deg;
        let powers: Vec<Vec<HomPoly>> = lin
            .iter()
            .map(|l| {
                let mut v = vec![HomPoly::constant(ctx.one())];
                for k in 1..=d as usize {
                    let next = v[k - 1].mul(ctx, l);
                    v.push(next);
                }
                v
            })
            .collect();
        let mut r = HomPoly::zero(d);
        for (e, c) in &self.terms {
            let t = powers[0][e.0 as usize]
                .mul(ctx, &powers[1][e.1 as usize])
                .mul(ctx, &powers[2][e.2 as usize]);
            for (te, tc) in &t.terms {
                r.add_term(ctx, *te, ctx.mul(c, tc));
            }
        }
        r
    }

    pub fn apply_map(&self, ctx: &FieldCtx, m: &ProjMap, side: Side) -> Result<HomPoly, MpolyError> {
        let mat = m.matrix();
        match side {
            Side::Substitute => Ok(self.substitute(ctx, mat)),
            Side::Transform => {
                let inv = crate::proj::mat_inverse(ctx, mat).ok_or(MpolyError::SingularMatrix)?;
                Ok(self.substitute(ctx, &inv))
            }
        }
    }

    /// Scaled so the coefficient of the first stored monomial is 1.
    pub fn normalized(&self, ctx: &FieldCtx) -> HomPoly {
        match self.terms.values().next() {
            None => self.clone(),
            Some(c) => self.scale(ctx, &ctx.inv(c).unwrap()),
        }
    }

    pub fn proportional(&self, ctx: &FieldCtx, o: &HomPoly) -> bool {
        self.deg == o.deg && self.normalized(ctx) == o.normalized(ctx)
    }

    /// `F(x0, y0, z)` as a polynomial in `z`.
    pub fn fiber(&self, ctx: &FieldCtx, x0: &FieldElement, y0: &FieldElement) -> UPoly {
        let mut c = vec![ctx.zero(); self.deg as usize + 1];
        for (e, v) in &self.terms {
            let m = ctx.mul(&ctx.pow(x0, e.0 as u64), &ctx.pow(y0, e.1 as u64));
            c[e.2 as usize] = ctx.add(&c[e.2 as usize], &ctx.mul(v, &m));
        }
        UPoly::new(c)
    }

    /// `F(P + t Q)` as a polynomial in `t`.
    pub fn restrict_line(&self, ctx: &FieldCtx, p: &[FieldElement; 3], q: &[FieldElement; 3]) -> UPoly {
        let lin: Vec<UPoly> = (0..3).map(|i| UPoly::new(vec![p[i], q[i]])).collect();
        let d = self.deg as usize;
        let powers: Vec<Vec<UPoly>> = lin
            .iter()
            .map(|l| {
                let mut v = vec![UPoly::one(ctx)];
                for k in 1..=d {
                    let next = v[k - 1].mul(ctx, l);
                    v.push(next);
                }
                v
            })
            .collect();
        let mut r = UPoly::zero();
        for (e, c) in &self.terms {
            let t = powers[0][e.0 as usize]
                .mul(ctx, &powers[1][e.1 as usize])
                .mul(ctx, &powers[2][e.2 as usize]);
            r = r.add(ctx, &t.scale(ctx, c));
        }
        r
    }

    /// Highest power of `z` present, or `None` for the zero form.
    pub fn z_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.2).max()
    }

    /// Coefficient of `z^i` as a polynomial in `x` with `y = 1`.
    fn z_coeff_dehom(&self, ctx: &FieldCtx, i: u32) -> UPoly {
        let mut c = vec![ctx.zero(); (self.deg - i) as usize + 1];
        for (e, v) in &self.terms {
            if e.2 == i {
                c[e.0 as usize] = *v;
            }
        }
        UPoly::new(c)
    }

    /// Parses the text format, e.g. `1*x^4 + 3*x^2*y^2 - 2*z^4` or
    /// `(2+5t^3)*x*y^2*z`.
    pub fn parse(ctx: &FieldCtx, s: &str) -> Result<HomPoly, MpolyError> {
        let bad = |m: &str| MpolyError::Parse(format!("{m} in {s:?}"));
        let mut terms: Vec<(FieldElement, Exp)> = Vec::new();
        for (neg, term) in split_top_level(s) {
            let mut coef = ctx.one();
            let mut e = (0u32, 0u32, 0u32);
            for factor in term.split('*').map(str::trim) {
                if factor.is_empty() {
                    return Err(bad("empty factor"));
                }
                let first = factor.chars().next().unwrap();
                if matches!(first, 'x' | 'y' | 'z') {
                    let k: u32 = match factor[1..].trim().strip_prefix('^') {
                        Some(n) => n.trim().parse().map_err(|_| bad("bad exponent"))?,
                        None if factor.len() == 1 => 1,
                        None => return Err(bad("bad variable")),
                    };
                    match first {
                        'x' => e.0 += k,
                        'y' => e.1 += k,
                        _ => e.2 += k,
                    }
                } else {
                    let c = ctx
                        .parse_element(factor)
                        .map_err(|_| bad("bad coefficient"))?;
                    coef = ctx.mul(&coef, &c);
                }
            }
            if neg {
                coef = ctx.neg(&coef);
            }
            terms.push((coef, e));
        }
        let Some(&(_, e0)) = terms.first() else {
            return Err(bad("no terms"));
        };
        let deg = e0.0 + e0.1 + e0.2;
        if terms.iter().any(|(_, e)| e.0 + e.1 + e.2 != deg) {
            return Err(MpolyError::NotHomogeneous);
        }
        Ok(HomPoly::from_elements(ctx, deg, &terms))
    }
}

/// Splits on `+`/`-` outside parentheses; returns (negated, term).
fn split_top_level(s: &str) -> Vec<(bool, String)> {
    let mut out = Vec::new();
    let mut depth = 0;
    let mut cur = String::new();
    let mut neg = false;
    let mut prev_caret = false;
    for ch in s.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        if depth == 0 && (ch == '+' || ch == '-') && !prev_caret {
            if !cur.trim().is_empty() {
                out.push((neg, cur.trim().to_string()));
            }
            cur.clear();
            neg = ch == '-';
            continue;
        }
        if !ch.is_whitespace() {
            prev_caret = ch == '^';
        }
        cur.push(ch);
    }
    if !cur.trim().is_empty() {
        out.push((neg, cur.trim().to_string()));
    }
    out
}

impl fmt::Display for HomPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for (name, k) in [("x", e.0), ("y", e.1), ("z", e.2)] {
                match k {
                    0 => {}
                    1 => write!(f, "*{name}")?,
                    _ => write!(f, "*{name}^{k}")?,
                }
            }
        }
        Ok(())
    }
}

/// A binary form of degree `deg` in `x, y`, stored dehomogenized at `y = 1`.
/// Missing top degrees mean roots at `(1:0)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryForm {
    pub deg: usize,
    pub poly: UPoly,
}

impl BinaryForm {
    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    /// Multiplicity of the root `(1:0)`.
    pub fn infinity_multiplicity(&self) -> usize {
        match self.poly.degree() {
            None => self.deg,
            Some(d) => self.deg - d,
        }
    }

    pub fn coeff(&self, i: usize) -> FieldElement {
        self.poly.coeff(i)
    }
}

/// Sylvester resultant of `F` and `G` with respect to `z`.
///
/// The `z`-degrees actually present are used. The result is homogeneous of
/// degree `dF·n + dG·m − m·n` where `m, n` are the `z`-degrees; this is
/// `dF·dG` when both forms contain a pure power of `z`.
pub fn resultant_z(ctx: &FieldCtx, f: &HomPoly, g: &HomPoly) -> Result<BinaryForm, MpolyError> {
    let (Some(m), Some(n)) = (f.z_degree(), g.z_degree()) else {
        return Err(MpolyError::LeadingCoefficientVanishes);
    };
    if m + n == 0 {
        return Err(MpolyError::LeadingCoefficientVanishes);
    }
    let deg = (f.deg * n + g.deg * m - m * n) as usize;
    let fc: Vec<UPoly> = (0..=m).rev().map(|i| f.z_coeff_dehom(ctx, i)).collect();
    let gc: Vec<UPoly> = (0..=n).rev().map(|i| g.z_coeff_dehom(ctx, i)).collect();
    let size = (m + n) as usize;
    let mut mat = vec![vec![UPoly::zero(); size]; size];
    for r in 0..n as usize {
        for (j, c) in fc.iter().enumerate() {
            mat[r][r + j] = c.clone();
        }
    }
    for r in 0..m as usize {
        for (j, c) in gc.iter().enumerate() {
            mat[n as usize + r][r + j] = c.clone();
        }
    }
    let poly = bareiss_det(ctx, mat);
    Ok(BinaryForm { deg, poly })
}

/// Fraction-free determinant of a square matrix of polynomials.
pub fn bareiss_det(ctx: &FieldCtx, mut a: Vec<Vec<UPoly>>) -> UPoly {
    let n = a.len();
    if n == 0 {
        return UPoly::one(ctx);
    }
    let mut sign_neg = false;
    let mut prev = UPoly::one(ctx);
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let Some(piv) = (k + 1..n).find(|&i| !a[i][k].is_zero()) else {
                return UPoly::zero();
            };
            a.swap(k, piv);
            sign_neg = !sign_neg;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = a[i][j].mul(ctx, &a[k][k]).sub(ctx, &a[i][k].mul(ctx, &a[k][j]));
                a[i][j] = num.div_exact(ctx, &prev).expect("Bareiss division is exact");
            }
            a[i][k] = UPoly::zero();
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    if sign_neg {
        d.neg(ctx)
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::make_prime_field;

    #[test]
    fn hessian_examples() {
        let f7 = make_prime_field(7).unwrap();
        let fermat = HomPoly::parse(&f7, "x^4 + y^4 + z^4").unwrap();
        let h = fermat.hessian(&f7);
        assert_eq!(h, HomPoly::from_terms(&f7, 6, &[(1728, (2, 2, 2))]));

        let xyz = HomPoly::parse(&f7, "x*y*z").unwrap();
        assert_eq!(xyz.hessian(&f7), HomPoly::from_terms(&f7, 3, &[(2, (1, 1, 1))]));

        let z2 = HomPoly::parse(&f7, "z^2").unwrap();
        assert!(z2.hessian(&f7).is_zero());
    }

    #[test]
    fn resultant_examples() {
        let f = make_prime_field(11).unwrap();
        let a = HomPoly::parse(&f, "z^2 + x*y").unwrap();
        let b = HomPoly::parse(&f, "z - x").unwrap();
        let r = resultant_z(&f, &a, &b).unwrap();
        assert_eq!(r.deg, 2);
        assert_eq!(r.poly, UPoly::from_i64s(&f, &[0, 1, 1]));

        assert!(resultant_z(&f, &a, &a).unwrap().is_zero());

        let z = HomPoly::parse(&f, "z").unwrap();
        let x = HomPoly::parse(&f, "x").unwrap();
        let r = resultant_z(&f, &z, &x).unwrap();
        assert_eq!((r.deg, r.poly.clone()), (1, UPoly::from_i64s(&f, &[0, 1])));

        assert_eq!(resultant_z(&f, &x, &x), Err(MpolyError::LeadingCoefficientVanishes));
    }

    #[test]
    fn parse_round_trip() {
        let f = crate::gf::FieldCtx::canonical(13, 2).unwrap();
        let s = "1*x^4 + 1*y^4 + 1*z^4 + 3*x^2*y^2 + 3*x^2*z^2 + 3*y^2*z^2";
        let k = HomPoly::parse(&f, s).unwrap();
        assert_eq!(k.degree(), 4);
        assert_eq!(HomPoly::parse(&f, &k.to_string()).unwrap(), k);
        let g = HomPoly::parse(&f, "(2+5t)*x*y^2*z - 3*z^4").unwrap();
        assert_eq!(HomPoly::parse(&f, &g.to_string()).unwrap(), g);
        assert_eq!(g.coeff((0, 0, 4)), f.from_i64(10));
        assert!(HomPoly::parse(&f, "x^2 + y").is_err());
    }

    #[test]
    fn euler_relation() {
        let f = make_prime_field(13).unwrap();
        let k = HomPoly::parse(&f, "x^4 + 3*y^4 + 9*z^4 + 27*x^2*y^2 + 9*x^2*z^2 + 3*y^2*z^2 + 5*x*y*z^2").unwrap();
        let g = k.gradient(&f);
        let mut s = HomPoly::zero(4);
        for (i, gi) in g.iter().enumerate() {
            s = s.add(&f, &HomPoly::var(&f, i).mul(&f, gi));
        }
        assert_eq!(s, k.scale(&f, &f.from_i64(4)));
    }

    #[test]
    fn line_restriction() {
        let f = make_prime_field(7).unwrap();
        let c = HomPoly::parse(&f, "x^2 - y*z").unwrap();
        let p = [f.one(), f.one(), f.one()];
        let q = [f.zero(), f.one(), f.zero()];
        // (1)^2 - (1+t)(1) = -t
        assert_eq!(c.restrict_line(&f, &p, &q), UPoly::from_i64s(&f, &[0, -1]));
    }
}
