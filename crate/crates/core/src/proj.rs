//! Points, lines and collineations of the projective plane over a finite
//! field, with the small exact linear algebra they need.
//!
//! Lines are represented as points of the dual plane. A map `M` acts on
//! points by `P ↦ M P` and on lines by the cofactor matrix of `M`, which is
//! `M^{-T}` up to the scalar `det M`.

use std::fmt;

use thiserror::Error;

use crate::gf::{Embedding, FieldCtx, FieldElement};
use crate::mpoly::HomPoly;
use crate::upoly::UPoly;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProjError {
    #[error("three of the four frame points are collinear")]
    DegenerateFrame,
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("zero vector is not a projective point")]
    ZeroVector,
    #[error("conic is reducible")]
    ReducibleConic,
    #[error("base point is not on the conic")]
    BaseNotOnConic,
    #[error("two of the four points coincide")]
    DegeneratePoints,
    #[error("cannot parse {0:?}")]
    Parse(String),
}

pub type Vec3 = [FieldElement; 3];
pub type Mat3 = [[FieldElement; 3]; 3];

pub fn mat_identity(ctx: &FieldCtx) -> Mat3 {
    let mut m = [[ctx.zero(); 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = ctx.one();
    }
    m
}

pub fn mat_from_i64(ctx: &FieldCtx, a: [[i64; 3]; 3]) -> Mat3 {
    a.map(|row| row.map(|x| ctx.from_i64(x)))
}

pub fn mat_mul(ctx: &FieldCtx, a: &Mat3, b: &Mat3) -> Mat3 {
    let mut r = [[ctx.zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut s = ctx.zero();
            for k in 0..3 {
                s = ctx.add(&s, &ctx.mul(&a[i][k], &b[k][j]));
            }
            r[i][j] = s;
        }
    }
    r
}

pub fn mat_vec(ctx: &FieldCtx, a: &Mat3, v: &Vec3) -> Vec3 {
    let mut r = [ctx.zero(); 3];
    for i in 0..3 {
        for k in 0..3 {
            r[i] = ctx.add(&r[i], &ctx.mul(&a[i][k], &v[k]));
        }
    }
    r
}

pub fn mat_transpose(a: &Mat3) -> Mat3 {
    let mut r = *a;
    for i in 0..3 {
        for j in 0..3 {
            r[i][j] = a[j][i];
        }
    }
    r
}

/// Matrix of cofactors; `cof(M) = det(M) · M^{-T}`.
pub fn mat_cofactor(ctx: &FieldCtx, a: &Mat3) -> Mat3 {
    let mut r = [[ctx.zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (i1, i2) = ((i + 1) % 3, (i + 2) % 3);
            let (j1, j2) = ((j + 1) % 3, (j + 2) % 3);
            r[i][j] = ctx.sub(
                &ctx.mul(&a[i1][j1], &a[i2][j2]),
                &ctx.mul(&a[i1][j2], &a[i2][j1]),
            );
        }
    }
    r
}

pub fn mat_adjugate(ctx: &FieldCtx, a: &Mat3) -> Mat3 {
    mat_transpose(&mat_cofactor(ctx, a))
}

pub fn mat_det(ctx: &FieldCtx, a: &Mat3) -> FieldElement {
    let c = mat_cofactor(ctx, a);
    (0..3).fold(ctx.zero(), |s, j| ctx.add(&s, &ctx.mul(&a[0][j], &c[0][j])))
}

pub fn mat_inverse(ctx: &FieldCtx, a: &Mat3) -> Option<Mat3> {
    let d = ctx.inv(&mat_det(ctx, a))?;
    Some(mat_adjugate(ctx, a).map(|row| row.map(|x| ctx.mul(&x, &d))))
}

pub fn det3(ctx: &FieldCtx, a: &Vec3, b: &Vec3, c: &Vec3) -> FieldElement {
    mat_det(ctx, &[*a, *b, *c])
}

pub fn cross(ctx: &FieldCtx, a: &Vec3, b: &Vec3) -> Vec3 {
    [
        ctx.sub(&ctx.mul(&a[1], &b[2]), &ctx.mul(&a[2], &b[1])),
        ctx.sub(&ctx.mul(&a[2], &b[0]), &ctx.mul(&a[0], &b[2])),
        ctx.sub(&ctx.mul(&a[0], &b[1]), &ctx.mul(&a[1], &b[0])),
    ]
}

pub fn dot(ctx: &FieldCtx, a: &Vec3, b: &Vec3) -> FieldElement {
    (0..3).fold(ctx.zero(), |s, i| ctx.add(&s, &ctx.mul(&a[i], &b[i])))
}

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref(ctx: &FieldCtx, rows: &mut [Vec<FieldElement>]) -> Vec<usize> {
    let m = rows.len();
    let n = rows.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..n {
        if r == m {
            break;
        }
        let Some(piv) = (r..m).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, piv);
        let inv = ctx.inv(&rows[r][col]).unwrap();
        for v in rows[r].iter_mut() {
            *v = ctx.mul(v, &inv);
        }
        for i in 0..m {
            if i != r && !rows[i][col].is_zero() {
                let f = rows[i][col];
                for j in 0..n {
                    let t = ctx.mul(&f, &rows[r][j]);
                    rows[i][j] = ctx.sub(&rows[i][j], &t);
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    pivots
}

pub fn rank(ctx: &FieldCtx, rows: &[Vec<FieldElement>]) -> usize {
    let mut a = rows.to_vec();
    rref(ctx, &mut a).len()
}

/// Kernel basis of the matrix, one vector per free column in increasing
/// column order.
pub fn kernel(ctx: &FieldCtx, rows: &[Vec<FieldElement>], ncols: usize) -> Vec<Vec<FieldElement>> {
    let mut a = rows.to_vec();
    let pivots = rref(ctx, &mut a);
    let mut out = Vec::new();
    for free in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![ctx.zero(); ncols];
        v[free] = ctx.one();
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = ctx.neg(&a[r][free]);
        }
        out.push(v);
    }
    out
}

/// A point of `P²` (or of the dual plane), first nonzero coordinate 1.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProjPoint {
    c: Vec3,
}

impl ProjPoint {
    pub fn new(ctx: &FieldCtx, v: Vec3) -> Result<ProjPoint, ProjError> {
        let Some(lead) = v.iter().find(|x| !x.is_zero()) else {
            return Err(ProjError::ZeroVector);
        };
        let inv = ctx.inv(lead).unwrap();
        Ok(ProjPoint {
            c: v.map(|x| ctx.mul(&x, &inv)),
        })
    }

    pub fn from_i64(ctx: &FieldCtx, v: [i64; 3]) -> ProjPoint {
        Self::new(ctx, v.map(|x| ctx.from_i64(x))).expect("nonzero vector")
    }

    pub fn coords(&self) -> &Vec3 {
        &self.c
    }

    pub fn embed(&self, ctx: &FieldCtx, e: &Embedding) -> ProjPoint {
        Self::new(ctx, self.c.map(|x| e.apply(&x))).unwrap()
    }

    /// `P` lies on the line `L` (given in dual coordinates).
    pub fn incident(ctx: &FieldCtx, p: &ProjPoint, l: &ProjPoint) -> bool {
        dot(ctx, &p.c, &l.c).is_zero()
    }

    /// The line through two distinct points, or the meet of two lines.
    pub fn join(ctx: &FieldCtx, a: &ProjPoint, b: &ProjPoint) -> Option<ProjPoint> {
        Self::new(ctx, cross(ctx, &a.c, &b.c)).ok()
    }

    pub fn parse(ctx: &FieldCtx, s: &str) -> Result<ProjPoint, ProjError> {
        let bad = || ProjError::Parse(s.to_string());
        let t = s.trim();
        let t = t.strip_prefix("dual").unwrap_or(t).trim();
        let inner = t
            .strip_prefix('[')
            .and_then(|x| x.strip_suffix(']'))
            .ok_or_else(bad)?;
        let parts = split_commas(inner);
        if parts.len() != 3 {
            return Err(bad());
        }
        let mut v = [ctx.zero(); 3];
        for (i, p) in parts.iter().enumerate() {
            v[i] = ctx.parse_element(p).map_err(|_| bad())?;
        }
        Self::new(ctx, v)
    }
}

fn split_commas(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(cur.trim().to_string());
                cur.clear();
                continue;
            }
            _ => {}
        }
        cur.push(ch);
    }
    out.push(cur.trim().to_string());
    out
}

impl fmt::Display for ProjPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{},{}]", self.c[0], self.c[1], self.c[2])
    }
}

impl fmt::Debug for ProjPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Point,
    Line,
}

/// An element of `PGL₃`, first nonzero matrix entry (row-major) equal to 1.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProjMap {
    m: Mat3,
}

impl ProjMap {
    pub fn new(ctx: &FieldCtx, m: Mat3) -> Result<ProjMap, ProjError> {
        if mat_det(ctx, &m).is_zero() {
            return Err(ProjError::SingularMatrix);
        }
        let lead = m.iter().flatten().find(|x| !x.is_zero()).unwrap();
        let inv = ctx.inv(lead).unwrap();
        Ok(ProjMap {
            m: m.map(|row| row.map(|x| ctx.mul(&x, &inv))),
        })
    }

    pub fn identity(ctx: &FieldCtx) -> ProjMap {
        ProjMap {
            m: mat_identity(ctx),
        }
    }

    pub fn diagonal(ctx: &FieldCtx, d: Vec3) -> Result<ProjMap, ProjError> {
        let mut m = [[ctx.zero(); 3]; 3];
        for i in 0..3 {
            m[i][i] = d[i];
        }
        Self::new(ctx, m)
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.m
    }

    pub fn is_identity(&self, ctx: &FieldCtx) -> bool {
        self.m == mat_identity(ctx)
    }

    /// `self ∘ other`
    pub fn compose(&self, ctx: &FieldCtx, other: &ProjMap) -> ProjMap {
        Self::new(ctx, mat_mul(ctx, &self.m, &other.m)).unwrap()
    }

    pub fn inverse(&self, ctx: &FieldCtx) -> ProjMap {
        Self::new(ctx, mat_adjugate(ctx, &self.m)).unwrap()
    }

    pub fn apply_point(&self, ctx: &FieldCtx, p: &ProjPoint) -> ProjPoint {
        ProjPoint::new(ctx, mat_vec(ctx, &self.m, &p.c)).unwrap()
    }

    pub fn apply_line(&self, ctx: &FieldCtx, l: &ProjPoint) -> ProjPoint {
        ProjPoint::new(ctx, mat_vec(ctx, &mat_cofactor(ctx, &self.m), &l.c)).unwrap()
    }

    pub fn apply(&self, ctx: &FieldCtx, p: &ProjPoint, role: Role) -> ProjPoint {
        match role {
            Role::Point => self.apply_point(ctx, p),
            Role::Line => self.apply_line(ctx, p),
        }
    }

    /// The induced map on the dual plane.
    pub fn dual(&self, ctx: &FieldCtx) -> ProjMap {
        Self::new(ctx, mat_cofactor(ctx, &self.m)).unwrap()
    }

    pub fn embed(&self, ctx: &FieldCtx, e: &Embedding) -> ProjMap {
        Self::new(ctx, self.m.map(|row| row.map(|x| e.apply(&x)))).unwrap()
    }

    /// Order in the group, if at most `cap`.
    pub fn order(&self, ctx: &FieldCtx, cap: usize) -> Option<usize> {
        let mut g = *self;
        for k in 1..=cap {
            if g.is_identity(ctx) {
                return Some(k);
            }
            g = g.compose(ctx, self);
        }
        None
    }
}

impl fmt::Display for ProjMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .m
            .iter()
            .map(|r| format!("[{},{},{}]", r[0], r[1], r[2]))
            .collect();
        write!(f, "[{}]", rows.join(","))
    }
}

impl fmt::Debug for ProjMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

pub fn collinear(ctx: &FieldCtx, a: &ProjPoint, b: &ProjPoint, c: &ProjPoint) -> bool {
    det3(ctx, &a.c, &b.c, &c.c).is_zero()
}

pub fn in_general_position(ctx: &FieldCtx, q: &[ProjPoint; 4]) -> bool {
    (0..4).all(|skip| {
        let idx: Vec<usize> = (0..4).filter(|&i| i != skip).collect();
        !collinear(ctx, &q[idx[0]], &q[idx[1]], &q[idx[2]])
    })
}

/// Columns `λ_i p_i` sending `e_i ↦ p_i` and `[1,1,1] ↦ p_4`, up to scalar.
fn frame_matrix(ctx: &FieldCtx, q: &[ProjPoint; 4]) -> Mat3 {
    let (a, b, c, d) = (&q[0].c, &q[1].c, &q[2].c, &q[3].c);
    let l = [det3(ctx, d, b, c), det3(ctx, a, d, c), det3(ctx, a, b, d)];
    let cols = [a, b, c];
    let mut m = [[ctx.zero(); 3]; 3];
    for j in 0..3 {
        for i in 0..3 {
            m[i][j] = ctx.mul(&l[j], &cols[j][i]);
        }
    }
    m
}

/// The unique map sending `src[i] ↦ dst[i]`.
pub fn map_from_frames(
    ctx: &FieldCtx,
    src: &[ProjPoint; 4],
    dst: &[ProjPoint; 4],
) -> Result<ProjMap, ProjError> {
    if !in_general_position(ctx, src) || !in_general_position(ctx, dst) {
        return Err(ProjError::DegenerateFrame);
    }
    let a = frame_matrix(ctx, src);
    let b = frame_matrix(ctx, dst);
    ProjMap::new(ctx, mat_mul(ctx, &b, &mat_adjugate(ctx, &a)))
}

const CONIC_MONOMIALS: [(u32, u32, u32); 6] =
    [(2, 0, 0), (1, 1, 0), (1, 0, 1), (0, 2, 0), (0, 1, 1), (0, 0, 2)];

/// Rank of the conic evaluation matrix at the points, and a conic through
/// them when the rank is below 6.
pub fn conic_through(ctx: &FieldCtx, pts: &[ProjPoint]) -> (usize, Option<HomPoly>) {
    let rows: Vec<Vec<FieldElement>> = pts
        .iter()
        .map(|p| {
            CONIC_MONOMIALS
                .iter()
                .map(|e| HomPoly::monomial(ctx.one(), *e).eval(ctx, &p.c))
                .collect()
        })
        .collect();
    let r = rank(ctx, &rows);
    if r >= 6 {
        return (r, None);
    }
    let k = kernel(ctx, &rows, 6);
    let v = &k[0];
    let terms: Vec<(FieldElement, (u32, u32, u32))> =
        CONIC_MONOMIALS.iter().zip(v).map(|(e, c)| (*c, *e)).collect();
    (r, Some(HomPoly::from_elements(ctx, 2, &terms)))
}

/// Symmetric Gram matrix of a conic (needs `p ≠ 2`).
pub fn conic_matrix(ctx: &FieldCtx, c: &HomPoly) -> Mat3 {
    let half = ctx.inv(&ctx.from_i64(2)).unwrap();
    let h = |e| ctx.mul(&c.coeff(e), &half);
    let (a, d, f) = (c.coeff((2, 0, 0)), c.coeff((0, 2, 0)), c.coeff((0, 0, 2)));
    let (b, e, g) = (h((1, 1, 0)), h((1, 0, 1)), h((0, 1, 1)));
    [[a, b, e], [b, d, g], [e, g, f]]
}

pub fn conic_rank(ctx: &FieldCtx, c: &HomPoly) -> usize {
    let m = conic_matrix(ctx, c);
    rank(ctx, &m.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
}

/// A point of the projective line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum P1 {
    Finite(FieldElement),
    Infinity,
}

impl P1 {
    fn hom(&self, ctx: &FieldCtx) -> (FieldElement, FieldElement) {
        match self {
            P1::Finite(t) => (*t, ctx.one()),
            P1::Infinity => (ctx.one(), ctx.zero()),
        }
    }
}

/// Rational parametrization of a smooth conic by the pencil of lines
/// through a base point.
#[derive(Clone, Debug)]
pub struct ConicParam {
    pub conic: HomPoly,
    pub base: ProjPoint,
    /// Coordinates of the image point as quadratic polynomials in `t`.
    pub coords: [UPoly; 3],
    q0: usize,
    q1: usize,
    grad: Vec3,
}

pub fn parametrize_conic(ctx: &FieldCtx, c: &HomPoly, base: &ProjPoint) -> Result<ConicParam, ProjError> {
    if c.degree() != 2 || conic_rank(ctx, c) != 3 {
        return Err(ProjError::ReducibleConic);
    }
    if !c.eval(ctx, &base.c).is_zero() {
        return Err(ProjError::BaseNotOnConic);
    }
    let k = base.c.iter().position(|x| !x.is_zero()).unwrap();
    let (q0, q1) = match k {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let grad: Vec3 = [0, 1, 2].map(|i| c.partial(ctx, i).eval(ctx, &base.c));
    // R(t) = e_q0 + t e_q1
    let mut r: [UPoly; 3] = [UPoly::zero(), UPoly::zero(), UPoly::zero()];
    r[q0] = UPoly::one(ctx);
    r[q1] = UPoly::x(ctx);
    let c_r = c.restrict_line(ctx, &unit(ctx, q0), &unit(ctx, q1));
    let g_r = UPoly::new(vec![grad[q0], grad[q1]]);
    let coords = [0, 1, 2].map(|i| {
        UPoly::constant(base.c[i])
            .mul(ctx, &c_r)
            .sub(ctx, &g_r.mul(ctx, &r[i]))
    });
    Ok(ConicParam {
        conic: c.clone(),
        base: *base,
        coords,
        q0,
        q1,
        grad,
    })
}

fn unit(ctx: &FieldCtx, i: usize) -> Vec3 {
    let mut v = [ctx.zero(); 3];
    v[i] = ctx.one();
    v
}

impl ConicParam {
    pub fn point(&self, ctx: &FieldCtx, t: &P1) -> ProjPoint {
        let v = match t {
            P1::Finite(t) => self.coords.clone().map(|c| c.eval(ctx, t)),
            P1::Infinity => self.coords.clone().map(|c| c.coeff(2)),
        };
        ProjPoint::new(ctx, v).expect("parametrization has no base points")
    }

    /// The parameter of a point on the conic.
    pub fn parameter(&self, ctx: &FieldCtx, p: &ProjPoint) -> P1 {
        let (a, b) = if *p == self.base {
            // tangent line at the base meets the line x_k = 0
            (self.grad[self.q1], ctx.neg(&self.grad[self.q0]))
        } else {
            let k = 3 - self.q0 - self.q1;
            let (pk, bk) = (p.c[k], self.base.c[k]);
            let r: Vec3 = [0, 1, 2].map(|i| ctx.sub(&ctx.mul(&pk, &self.base.c[i]), &ctx.mul(&bk, &p.c[i])));
            (r[self.q0], r[self.q1])
        };
        if a.is_zero() {
            P1::Infinity
        } else {
            P1::Finite(ctx.div(&b, &a).unwrap())
        }
    }
}

fn bracket(ctx: &FieldCtx, a: &P1, b: &P1) -> FieldElement {
    let (a0, a1) = a.hom(ctx);
    let (b0, b1) = b.hom(ctx);
    ctx.sub(&ctx.mul(&a0, &b1), &ctx.mul(&a1, &b0))
}

/// Cross-ratio `[a,c][b,d] / ([a,d][b,c])`.
pub fn cross_ratio(ctx: &FieldCtx, q: &[P1; 4]) -> Result<FieldElement, ProjError> {
    for i in 0..4 {
        for j in i + 1..4 {
            if q[i] == q[j] {
                return Err(ProjError::DegeneratePoints);
            }
        }
    }
    let num = ctx.mul(&bracket(ctx, &q[0], &q[2]), &bracket(ctx, &q[1], &q[3]));
    let den = ctx.mul(&bracket(ctx, &q[0], &q[3]), &bracket(ctx, &q[1], &q[2]));
    Ok(ctx.div(&num, &den).unwrap())
}

/// `j = 256 (λ² − λ + 1)³ / (λ² (λ − 1)²)` of the double cover branched at
/// the four points.
pub fn j_from_four_points(ctx: &FieldCtx, q: &[P1; 4]) -> Result<FieldElement, ProjError> {
    let l = cross_ratio(ctx, q)?;
    Ok(j_from_lambda(ctx, &l))
}

pub fn j_from_lambda(ctx: &FieldCtx, l: &FieldElement) -> FieldElement {
    let one = ctx.one();
    let l2 = ctx.mul(l, l);
    let a = ctx.add(&ctx.sub(&l2, l), &one);
    let num = ctx.mul(&ctx.from_i64(256), &ctx.pow(&a, 3));
    let lm1 = ctx.sub(l, &one);
    let den = ctx.mul(&l2, &ctx.mul(&lm1, &lm1));
    ctx.div(&num, &den).expect("lambda is not 0 or 1")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::make_prime_field;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_map(ctx: &FieldCtx, rng: &mut ChaCha8Rng) -> ProjMap {
        loop {
            let m = [[0; 3]; 3].map(|r: [u8; 3]| r.map(|_| ctx.random(rng)));
            if let Ok(g) = ProjMap::new(ctx, m) {
                return g;
            }
        }
    }

    #[test]
    fn gamma13_sends_e1_to_e2() {
        let f = make_prime_field(13).unwrap();
        let third = f.inv(&f.from_i64(3)).unwrap();
        let mut m = [[f.zero(); 3]; 3];
        m[0][2] = f.one();
        m[1][0] = f.from_i64(3);
        m[2][1] = third;
        let g = ProjMap::new(&f, m).unwrap();
        assert_eq!(g.apply_point(&f, &ProjPoint::from_i64(&f, [1, 0, 0])), ProjPoint::from_i64(&f, [0, 1, 0]));
    }

    #[test]
    fn incidence_is_preserved() {
        let f = crate::gf::FieldCtx::canonical(11, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let m = random_map(&f, &mut rng);
            let p = ProjPoint::new(&f, [f.random(&mut rng), f.random(&mut rng), f.one()]).unwrap();
            let q = ProjPoint::new(&f, [f.one(), f.random(&mut rng), f.random(&mut rng)]).unwrap();
            let Some(l) = ProjPoint::join(&f, &p, &q) else { continue };
            assert!(ProjPoint::incident(&f, &p, &l));
            assert!(ProjPoint::incident(&f, &m.apply_point(&f, &p), &m.apply_line(&f, &l)));
        }
    }

    #[test]
    fn frames() {
        let f = make_prime_field(7).unwrap();
        let std = [[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1]].map(|v| ProjPoint::from_i64(&f, v));
        assert!(map_from_frames(&f, &std, &std).unwrap().is_identity(&f));
        let dst = [[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 2, 3]].map(|v| ProjPoint::from_i64(&f, v));
        let d = map_from_frames(&f, &std, &dst).unwrap();
        assert_eq!(d, ProjMap::diagonal(&f, [1, 2, 3].map(|x| f.from_i64(x))).unwrap());
        let back = map_from_frames(&f, &dst, &std).unwrap();
        assert!(d.compose(&f, &back).is_identity(&f));
        let bad = [[1, 0, 0], [0, 1, 0], [1, 1, 0], [1, 1, 1]].map(|v| ProjPoint::from_i64(&f, v));
        assert_eq!(map_from_frames(&f, &bad, &std), Err(ProjError::DegenerateFrame));
    }

    #[test]
    fn frame_transporter_is_unique_on_random_frames() {
        let f = make_prime_field(13).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..30 {
            let m = random_map(&f, &mut rng);
            let src = [[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1]].map(|v| ProjPoint::from_i64(&f, v));
            let dst = src.map(|p| m.apply_point(&f, &p));
            assert_eq!(map_from_frames(&f, &src, &dst).unwrap(), m);
        }
    }

    #[test]
    fn conic_through_five_points() {
        let f = make_prime_field(13).unwrap();
        let c = HomPoly::parse(&f, "x*y - z^2").unwrap();
        let pts: Vec<ProjPoint> = [0i64, 1, 2, 3, 4]
            .iter()
            .map(|&t| ProjPoint::from_i64(&f, [1, t * t, t]))
            .collect();
        let (r, q) = conic_through(&f, &pts);
        assert_eq!(r, 5);
        assert!(q.unwrap().proportional(&f, &c));
    }

    #[test]
    fn parametrization_identity() {
        let f = make_prime_field(13).unwrap();
        for (s, base) in [("x*y - z^2", [1, 0, 0]), ("3*x^2 + y^2 + z^2", [1, 1, 4])] {
            let c = HomPoly::parse(&f, s).unwrap();
            let b = ProjPoint::from_i64(&f, base);
            if !c.eval(&f, b.coords()).is_zero() {
                // 3 + 1 + 16 = 20 = 7 mod 13, pick a point by search instead
                let b2 = f
                    .elements()
                    .flat_map(|y| f.elements().map(move |z| (y, z)))
                    .map(|(y, z)| ProjPoint::new(&f, [f.one(), y, z]).unwrap())
                    .find(|p| c.eval(&f, p.coords()).is_zero())
                    .unwrap();
                check_param(&f, &c, &b2);
            } else {
                check_param(&f, &c, &b);
            }
        }
    }

    fn check_param(f: &FieldCtx, c: &HomPoly, b: &ProjPoint) {
        let par = parametrize_conic(f, c, b).unwrap();
        // C(param(t)) is identically zero as a polynomial in t
        let [x, y, z] = par.coords.clone();
        let mut acc = UPoly::zero();
        for (e, k) in c.terms() {
            let t = x.pow(f, e.0).mul(f, &y.pow(f, e.1)).mul(f, &z.pow(f, e.2));
            acc = acc.add(f, &t.scale(f, k));
        }
        assert!(acc.is_zero());
        let mut ts: Vec<P1> = f.elements().map(P1::Finite).collect();
        ts.push(P1::Infinity);
        let mut seen = std::collections::BTreeSet::new();
        for t in ts {
            let p = par.point(f, &t);
            assert!(c.eval(f, p.coords()).is_zero());
            assert_eq!(par.parameter(f, &p), t);
            seen.insert(p);
        }
        assert_eq!(seen.len(), 14);
    }

    #[test]
    fn j_examples() {
        let f = make_prime_field(13).unwrap();
        let fin = |x: i64| P1::Finite(f.from_i64(x));
        let harmonic = [fin(0), P1::Infinity, fin(1), fin(-1)];
        assert_eq!(cross_ratio(&f, &harmonic).unwrap(), f.from_i64(-1));
        assert_eq!(j_from_four_points(&f, &harmonic).unwrap(), f.from_i64(1728));
        // 4 is a primitive 6th root of unity mod 13: 16 - 4 + 1 = 13
        assert_eq!(j_from_lambda(&f, &f.from_i64(4)), f.zero());
        assert_eq!(j_from_four_points(&f, &[fin(0), fin(0), fin(1), fin(2)]), Err(ProjError::DegeneratePoints));
    }

    #[test]
    fn j_is_order_independent() {
        let f = make_prime_field(31).unwrap();
        let q = [P1::Finite(f.from_i64(3)), P1::Finite(f.from_i64(7)), P1::Infinity, P1::Finite(f.from_i64(20))];
        let j0 = j_from_four_points(&f, &q).unwrap();
        let mut idx = [0usize, 1, 2, 3];
        // Heap's algorithm over all 24 orderings
        let mut c = [0usize; 4];
        let mut i = 0;
        let mut count = 1;
        while i < 4 {
            if c[i] < i {
                if i % 2 == 0 { idx.swap(0, i) } else { idx.swap(c[i], i) }
                let perm = idx.map(|k| q[k]);
                assert_eq!(j_from_four_points(&f, &perm).unwrap(), j0);
                count += 1;
                c[i] += 1;
                i = 0;
            } else {
                c[i] = 0;
                i += 1;
            }
        }
        assert_eq!(count, 24);
    }
}
