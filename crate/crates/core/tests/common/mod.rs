//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use flexline::config::LineConfiguration;
use flexline::curve::PlaneQuartic;
use flexline::gf::{FieldCtx, FieldElement};
use flexline::proj::ProjPoint;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use rand_chacha::ChaCha8Rng;

const ZERO: u32 = u32::MAX;

/// Arithmetic by discrete logarithms, for exhaustive loops over small fields.
pub struct Zech {
    pub ctx: FieldCtx,
    m: u32,
    pow: Vec<FieldElement>,
    log: Vec<u32>,
    zech: Vec<u32>,
}

impl Zech {
    pub fn new(ctx: &FieldCtx) -> Zech {
        let q = ctx.order_u128().unwrap() as usize;
        let m = (q - 1) as u32;
        let g = ctx
            .elements()
            .find(|a| {
                if a.is_zero() {
                    return false;
                }
                let mut x = *a;
                let mut k = 1;
                while x != ctx.one() {
                    x = ctx.mul(&x, a);
                    k += 1;
                }
                k == m
            })
            .unwrap();
        let mut pow = Vec::with_capacity(m as usize);
        let mut log = vec![ZERO; q];
        let mut x = ctx.one();
        for i in 0..m {
            log[ctx.index(&x) as usize] = i;
            pow.push(x);
            x = ctx.mul(&x, &g);
        }
        let zech = (0..m)
            .map(|n| log[ctx.index(&ctx.add(&ctx.one(), &pow[n as usize])) as usize])
            .collect();
        Zech {
            ctx: ctx.clone(),
            m,
            pow,
            log,
            zech,
        }
    }

    pub fn to_log(&self, a: &FieldElement) -> u32 {
        self.log[self.ctx.index(a) as usize]
    }

    pub fn to_elem(&self, l: u32) -> FieldElement {
        if l == ZERO {
            self.ctx.zero()
        } else {
            self.pow[l as usize]
        }
    }

    /// All elements as logarithms, zero first.
    pub fn all(&self) -> impl Iterator<Item = u32> {
        std::iter::once(ZERO).chain(0..self.m)
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == ZERO || b == ZERO {
            return ZERO;
        }
        let s = a + b;
        if s >= self.m {
            s - self.m
        } else {
            s
        }
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        if a == ZERO {
            return b;
        }
        if b == ZERO {
            return a;
        }
        let d = if b >= a { b - a } else { b + self.m - a };
        let z = self.zech[d as usize];
        if z == ZERO {
            ZERO
        } else {
            self.mul(a, z)
        }
    }
}

fn mono(ctx: &FieldCtx, v: &[FieldElement; 3], e: (u32, u32, u32)) -> FieldElement {
    let mut r = ctx.one();
    for (x, k) in v.iter().zip([e.0, e.1, e.2]) {
        r = ctx.mul(&r, &ctx.pow(x, k as u64));
    }
    r
}

/// `F(v)` summed term by term.
pub fn eval(ctx: &FieldCtx, c: &PlaneQuartic, v: &[FieldElement; 3]) -> FieldElement {
    c.f.terms()
        .iter()
        .fold(ctx.zero(), |acc, (e, a)| ctx.add(&acc, &ctx.mul(a, &mono(ctx, v, *e))))
}

/// `∂F/∂x_i (v)` from the terms.
pub fn grad(ctx: &FieldCtx, c: &PlaneQuartic, v: &[FieldElement; 3]) -> [FieldElement; 3] {
    let mut g = [ctx.zero(); 3];
    for (e, a) in c.f.terms() {
        let ex = [e.0, e.1, e.2];
        for i in 0..3 {
            if ex[i] == 0 {
                continue;
            }
            let mut d = ex;
            d[i] -= 1;
            let t = ctx.mul(&ctx.mul(a, &ctx.from_u64(ex[i] as u64)), &mono(ctx, v, (d[0], d[1], d[2])));
            g[i] = ctx.add(&g[i], &t);
        }
    }
    g
}

/// Coefficients of a degree-4 polynomial from its values at five points.
fn interpolate(ctx: &FieldCtx, ts: &[FieldElement; 5], vals: &[FieldElement; 5]) -> [FieldElement; 5] {
    let mut out = [ctx.zero(); 5];
    for i in 0..5 {
        // basis polynomial prod_{j != i} (t - t_j) / (t_i - t_j)
        let mut basis = vec![ctx.one()];
        let mut denom = ctx.one();
        for j in 0..5 {
            if j == i {
                continue;
            }
            let mut next = vec![ctx.zero(); basis.len() + 1];
            for (k, b) in basis.iter().enumerate() {
                next[k + 1] = ctx.add(&next[k + 1], b);
                next[k] = ctx.sub(&next[k], &ctx.mul(b, &ts[j]));
            }
            basis = next;
            denom = ctx.mul(&denom, &ctx.sub(&ts[i], &ts[j]));
        }
        let s = ctx.div(&vals[i], &denom).unwrap();
        for k in 0..5 {
            out[k] = ctx.add(&out[k], &ctx.mul(&basis[k], &s));
        }
    }
    out
}

/// Order of vanishing of `F(P + tQ)` at `t = 0`, by interpolation.
pub fn contact(ctx: &FieldCtx, c: &PlaneQuartic, p: &[FieldElement; 3], q: &[FieldElement; 3]) -> u32 {
    let ts: [FieldElement; 5] = std::array::from_fn(|i| ctx.from_u64(i as u64));
    let vals = ts.map(|t| {
        let v: [FieldElement; 3] = std::array::from_fn(|i| ctx.add(&p[i], &ctx.mul(&t, &q[i])));
        eval(ctx, c, &v)
    });
    let co = interpolate(ctx, &ts, &vals);
    co.iter().position(|x| !x.is_zero()).map_or(5, |i| i as u32)
}

fn cross(ctx: &FieldCtx, a: &[FieldElement; 3], b: &[FieldElement; 3]) -> [FieldElement; 3] {
    [
        ctx.sub(&ctx.mul(&a[1], &b[2]), &ctx.mul(&a[2], &b[1])),
        ctx.sub(&ctx.mul(&a[2], &b[0]), &ctx.mul(&a[0], &b[2])),
        ctx.sub(&ctx.mul(&a[0], &b[1]), &ctx.mul(&a[1], &b[0])),
    ]
}

/// Flexes with their tangent lines and weights, found by testing every
/// point of `P²` over `c.ctx`.
pub fn exhaustive_flexes(c: &PlaneQuartic) -> BTreeSet<(ProjPoint, ProjPoint, u32)> {
    let ctx = &c.ctx;
    let z = Zech::new(ctx);
    let elems: Vec<u32> = z.all().collect();
    let mut on = Vec::new();
    // chart z = 1: F(x, y, 1) as a polynomial in y for each x
    for &xl in &elems {
        let x = z.to_elem(xl);
        let mut co = [ctx.zero(); 5];
        for (e, a) in c.f.terms() {
            let t = ctx.mul(a, &ctx.pow(&x, e.0 as u64));
            co[e.1 as usize] = ctx.add(&co[e.1 as usize], &t);
        }
        let cl = co.map(|a| z.to_log(&a));
        for &yl in &elems {
            let mut acc = cl[4];
            for k in (0..4).rev() {
                acc = z.add(z.mul(acc, yl), cl[k]);
            }
            if acc == ZERO {
                on.push([x, z.to_elem(yl), ctx.one()]);
            }
        }
    }
    for &xl in &elems {
        let v = [z.to_elem(xl), ctx.one(), ctx.zero()];
        if eval(ctx, c, &v).is_zero() {
            on.push(v);
        }
    }
    let v = [ctx.one(), ctx.zero(), ctx.zero()];
    if eval(ctx, c, &v).is_zero() {
        on.push(v);
    }
    let mut out = BTreeSet::new();
    for p in on {
        let l = grad(ctx, c, &p);
        assert!(l.iter().any(|x| !x.is_zero()), "singular point");
        // a second point on the tangent line
        let q = (0..3)
            .map(|i| {
                let mut e = [ctx.zero(); 3];
                e[i] = ctx.one();
                cross(ctx, &l, &e)
            })
            .find(|q| q.iter().any(|x| !x.is_zero()) && cross(ctx, q, &p).iter().any(|x| !x.is_zero()))
            .unwrap();
        let k = contact(ctx, c, &p, &q);
        if k >= 3 {
            out.insert((ProjPoint::new(ctx, p).unwrap(), ProjPoint::new(ctx, l).unwrap(), k - 2));
        }
    }
    out
}

/// 3×3 matrices over `ctx` as rows.
pub type M3 = [[FieldElement; 3]; 3];

pub fn det(ctx: &FieldCtx, m: &M3) -> FieldElement {
    let c = cross(ctx, &m[1], &m[2]);
    (0..3).fold(ctx.zero(), |acc, i| ctx.add(&acc, &ctx.mul(&m[0][i], &c[i])))
}

/// `det(M) · M^{-T}`, the action on line coordinates.
pub fn cofactor(ctx: &FieldCtx, m: &M3) -> M3 {
    let mut c = [[ctx.zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let r: Vec<usize> = (0..3).filter(|&k| k != i).collect();
            let s: Vec<usize> = (0..3).filter(|&k| k != j).collect();
            let minor = ctx.sub(
                &ctx.mul(&m[r[0]][s[0]], &m[r[1]][s[1]]),
                &ctx.mul(&m[r[0]][s[1]], &m[r[1]][s[0]]),
            );
            c[i][j] = if (i + j) % 2 == 0 { minor } else { ctx.neg(&minor) };
        }
    }
    c
}

pub fn apply(ctx: &FieldCtx, m: &M3, v: &[FieldElement; 3]) -> [FieldElement; 3] {
    std::array::from_fn(|i| (0..3).fold(ctx.zero(), |acc, j| ctx.add(&acc, &ctx.mul(&m[i][j], &v[j]))))
}

/// Scales so the first nonzero entry (row-major) is 1.
pub fn normalize(ctx: &FieldCtx, m: &M3) -> M3 {
    let lead = m.iter().flatten().find(|x| !x.is_zero()).unwrap();
    let inv = ctx.inv(lead).unwrap();
    m.map(|r| r.map(|x| ctx.mul(&x, &inv)))
}

fn projective_points(ctx: &FieldCtx) -> Vec<[FieldElement; 3]> {
    let els: Vec<FieldElement> = ctx.elements().collect();
    let mut v = Vec::new();
    for a in &els {
        for b in &els {
            v.push([ctx.one(), *a, *b]);
        }
    }
    for b in &els {
        v.push([ctx.zero(), ctx.one(), *b]);
    }
    v.push([ctx.zero(), ctx.zero(), ctx.one()]);
    v
}

/// Visits every element of `PGL₃(F_q)` once, as a normalized matrix
/// `[λ1 c1, λ2 c2, c3]` with the `c_i` normalized points.
pub fn pgl3_fold<T, I, V, R>(ctx: &FieldCtx, init: I, visit: V, merge: R) -> T
where
    T: Send,
    I: Fn() -> T + Sync + Send,
    V: Fn(&mut T, &M3) + Sync + Send,
    R: Fn(T, T) -> T + Sync + Send,
{
    let pts = projective_points(ctx);
    let units: Vec<FieldElement> = ctx.elements().filter(|a| !a.is_zero()).collect();
    pts.par_iter()
        .fold(&init, |mut acc, c1| {
            for c2 in &pts {
                for c3 in &pts {
                    let base = [
                        [c1[0], c2[0], c3[0]],
                        [c1[1], c2[1], c3[1]],
                        [c1[2], c2[2], c3[2]],
                    ];
                    if det(ctx, &base).is_zero() {
                        continue;
                    }
                    for l1 in &units {
                        for l2 in &units {
                            let m = base.map(|r| [ctx.mul(&r[0], l1), ctx.mul(&r[1], l2), r[2]]);
                            visit(&mut acc, &normalize(ctx, &m));
                        }
                    }
                }
            }
            acc
        })
        .reduce(&init, &merge)
}

fn carries(ctx: &FieldCtx, c: &M3, a: &[(ProjPoint, u32)], b: &LineConfiguration) -> bool {
    a.iter().all(|(l, w)| {
        let img = ProjPoint::new(ctx, apply(ctx, &c, l.coords())).unwrap();
        b.weight(&img) == *w
    })
}

/// For each pair, the maps carrying the first configuration onto the second
/// (acting on lines), found by trying every element of `PGL₃`.
pub fn brute_transporters(pairs: &[(LineConfiguration, LineConfiguration)]) -> Vec<BTreeSet<M3>> {
    let ctx = pairs[0].0.ctx.clone();
    let entries: Vec<Vec<(ProjPoint, u32)>> = pairs
        .iter()
        .map(|(a, _)| a.entries().iter().map(|(k, v)| (*k, *v)).collect())
        .collect();
    pgl3_fold(
        &ctx,
        || vec![BTreeSet::new(); pairs.len()],
        |acc, m| {
            let c = cofactor(&ctx, m);
            for (i, (_, b)) in pairs.iter().enumerate() {
                if carries(&ctx, &c, &entries[i], b) {
                    acc[i].insert(*m);
                }
            }
        },
        |mut x, y| {
            for (a, b) in x.iter_mut().zip(y) {
                a.extend(b);
            }
            x
        },
    )
}

pub fn random_config(ctx: &FieldCtx, rng: &mut ChaCha8Rng, n: usize) -> LineConfiguration {
    let mut c = LineConfiguration::new(ctx);
    // a frame first so the support is never degenerate
    for v in [[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1]] {
        c.add(ProjPoint::from_i64(ctx, v), rng.gen_range(1..=2));
    }
    while c.len() < n {
        let v = [ctx.random(rng), ctx.random(rng), ctx.random(rng)];
        if let Ok(p) = ProjPoint::new(ctx, v) {
            if c.weight(&p) == 0 {
                c.add(p, rng.gen_range(1..=2));
            }
        }
    }
    c
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
