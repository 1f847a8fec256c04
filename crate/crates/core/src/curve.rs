//! Smooth plane quartics and their inflection points.
//!
//! The inflection scheme is `V(F, Hess F)`. It is solved by a random change
//! of coordinates, elimination of `z` with a resultant, and lifting each
//! root of the resultant to a point by a gcd on the fiber.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::gf::{lcm, Embedding, FieldCtx, FieldElement, FieldError, MAX_DEGREE};
use crate::mpoly::{resultant_z, HomPoly, MpolyError};
use crate::proj::{cross, Mat3, ProjMap, ProjPoint, Vec3};
use crate::upoly::UPoly;

/// Coordinate changes tried per working field.
pub const RETRIES: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CurveError {
    #[error("the Hessian vanishes identically")]
    HessianVanishes,
    #[error("elimination stayed degenerate after all coordinate changes")]
    EliminationDegenerate,
    #[error("the gradient vanishes at {0}")]
    SingularPoint(String),
    #[error("the line is a component of the curve")]
    LineIsComponent,
    #[error("the point is not on the curve")]
    NotOnCurve,
    #[error("the point is not on the line")]
    NotOnLine,
    #[error("contact order {0} exceeds the degree")]
    ContactTooHigh(u32),
    #[error("the curve must have degree 4")]
    NotQuartic,
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Poly(#[from] MpolyError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlaneQuartic {
    pub ctx: FieldCtx,
    pub f: HomPoly,
    pub label: Option<String>,
}

/// One inflection point with its tangent line.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct FlexRecord {
    pub line: ProjPoint,
    pub point: ProjPoint,
    pub weight: u32,
    pub contact: u32,
    /// Local intersection multiplicity of `F` and `Hess F` at the point.
    pub hessian_multiplicity: u32,
}

/// A point where the two multiplicity notions disagree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlexAnomaly {
    pub point: ProjPoint,
    pub contact: u32,
    pub hessian_multiplicity: u32,
}

#[derive(Clone, Debug)]
pub struct InflectionScheme {
    /// Smallest canonical field containing the base field and all points.
    pub field: FieldCtx,
    pub records: Vec<FlexRecord>,
    pub anomalies: Vec<FlexAnomaly>,
}

impl InflectionScheme {
    pub fn total_weight(&self) -> u32 {
        self.records.iter().map(|r| r.weight).sum()
    }

    /// (hyperflexes, simple flexes)
    pub fn census(&self) -> (usize, usize) {
        let hyper = self.records.iter().filter(|r| r.weight == 2).count();
        let simple = self.records.iter().filter(|r| r.weight == 1).count();
        (hyper, simple)
    }
}

#[derive(Clone, Debug, Default)]
pub struct SchemeOptions {
    /// Replaces the seed derived from the coefficients.
    pub seed: Option<u64>,
}

impl PlaneQuartic {
    pub fn new(ctx: &FieldCtx, f: HomPoly) -> Result<PlaneQuartic, CurveError> {
        if f.degree() != 4 || f.is_zero() {
            return Err(CurveError::NotQuartic);
        }
        Ok(PlaneQuartic {
            ctx: ctx.clone(),
            f,
            label: None,
        })
    }

    pub fn with_label(mut self, label: &str) -> PlaneQuartic {
        self.label = Some(label.to_string());
        self
    }

    pub fn embed(&self, dst: &FieldCtx) -> Result<PlaneQuartic, CurveError> {
        let e = Embedding::new(&self.ctx, dst)?;
        Ok(PlaneQuartic {
            ctx: dst.clone(),
            f: self.f.embed(&e),
            label: self.label.clone(),
        })
    }

    /// The image `M(C)` of the curve.
    pub fn transform(&self, m: &ProjMap) -> PlaneQuartic {
        let inv = m.inverse(&self.ctx);
        PlaneQuartic {
            ctx: self.ctx.clone(),
            f: self.f.substitute(&self.ctx, inv.matrix()),
            label: self.label.clone(),
        }
    }

    pub fn contains(&self, p: &ProjPoint) -> bool {
        self.f.eval(&self.ctx, p.coords()).is_zero()
    }

    fn seed(&self) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325;
        let mut eat = |x: u64| {
            for b in x.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        };
        eat(self.ctx.p() as u64);
        for &m in self.ctx.modulus() {
            eat(m as u64);
        }
        for (e, c) in self.f.terms() {
            eat(((e.0 as u64) << 16) | ((e.1 as u64) << 8) | e.2 as u64);
            for &x in &c.coeffs()[..self.ctx.degree()] {
                eat(x as u64);
            }
        }
        h
    }

    /// Decides whether the partials have a common zero over the closure.
    pub fn is_smooth(&self) -> Result<bool, CurveError> {
        self.is_smooth_seeded(self.seed())
    }

    pub fn is_smooth_seeded(&self, seed: u64) -> Result<bool, CurveError> {
        for (rung, w) in working_fields(&self.ctx)?.iter().enumerate() {
            let e = Embedding::new(&self.ctx, w)?;
            let f = self.f.embed(&e);
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (0x5eed_0000 + rung as u64));
            for _ in 0..RETRIES {
                let m = random_invertible(w, &mut rng);
                let g = f.substitute(w, &m);
                if let Some(ans) = smooth_attempt(w, &g)? {
                    return Ok(ans);
                }
            }
        }
        Err(CurveError::EliminationDegenerate)
    }

    /// Dual coordinates of the tangent line at `p`.
    pub fn tangent_line(&self, p: &ProjPoint) -> Result<ProjPoint, CurveError> {
        if !self.contains(p) {
            return Err(CurveError::NotOnCurve);
        }
        tangent_at(&self.ctx, &self.f, p)
    }

    /// Order of vanishing at `p` of `F` restricted to the line `l`.
    pub fn contact_order(&self, l: &ProjPoint, p: &ProjPoint) -> Result<u32, CurveError> {
        if !self.contains(p) {
            return Err(CurveError::NotOnCurve);
        }
        if !ProjPoint::incident(&self.ctx, p, l) {
            return Err(CurveError::NotOnLine);
        }
        contact_at(&self.ctx, &self.f, l, p)
    }

    pub fn inflection_scheme(&self) -> Result<InflectionScheme, CurveError> {
        self.inflection_scheme_with(&SchemeOptions::default())
    }

    pub fn inflection_scheme_with(&self, opts: &SchemeOptions) -> Result<InflectionScheme, CurveError> {
        let base_h = self.f.hessian(&self.ctx);
        if base_h.is_zero() {
            return Err(CurveError::HessianVanishes);
        }
        let seed = opts.seed.unwrap_or_else(|| self.seed());
        let mut overflow = None;
        for (rung, w) in working_fields(&self.ctx)?.iter().enumerate() {
            let e = Embedding::new(&self.ctx, w)?;
            let f = self.f.embed(&e);
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(rung as u64 * 0x9e37_79b9));
            for _ in 0..RETRIES {
                let m = random_invertible(w, &mut rng);
                match scheme_attempt(w, &f, &m) {
                    Ok(Some((field, pts))) => return self.finish(&field, pts),
                    Ok(None) => continue,
                    Err(e @ CurveError::Field(FieldError::DegreeOverflow { .. })) => {
                        overflow.get_or_insert(e);
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
        }
        Err(overflow.unwrap_or(CurveError::EliminationDegenerate))
    }

    /// Tangents, contact orders, and descent to the smallest field.
    fn finish(
        &self,
        s: &FieldCtx,
        pts: Vec<(Vec3, u32)>,
    ) -> Result<InflectionScheme, CurveError> {
        let fs = self.f.embed(&Embedding::new(&self.ctx, s)?);
        let mut need = self.ctx.degree();
        let mut raw = Vec::new();
        for (v, mult) in pts {
            let p = ProjPoint::new(s, v).expect("lifted point is nonzero");
            let line = tangent_at(s, &fs, &p)?;
            let contact = contact_at(s, &fs, &line, &p)?;
            for c in p.coords().iter().chain(line.coords()) {
                need = lcm(need, s.element_degree(c));
            }
            raw.push((p, line, contact, mult));
        }
        let field = if need == self.ctx.degree() && Embedding::new(&self.ctx, s).is_ok() {
            self.ctx.clone()
        } else {
            FieldCtx::canonical(s.p() as u64, need)?
        };
        let down = Embedding::new(&field, s)?;
        let descend = |p: &ProjPoint| -> ProjPoint {
            let v = p.coords().map(|c| down.preimage(&c).expect("coordinate lies in the subfield"));
            ProjPoint::new(&field, v).unwrap()
        };
        let mut records = Vec::new();
        let mut anomalies = Vec::new();
        for (p, line, contact, mult) in raw {
            let point = descend(&p);
            if contact < 3 || contact - 2 != mult {
                anomalies.push(FlexAnomaly {
                    point,
                    contact,
                    hessian_multiplicity: mult,
                });
            }
            if contact >= 3 {
                records.push(FlexRecord {
                    line: descend(&line),
                    point,
                    weight: contact - 2,
                    contact,
                    hessian_multiplicity: mult,
                });
            }
        }
        records.sort();
        Ok(InflectionScheme {
            field,
            records,
            anomalies,
        })
    }
}

/// Fields in which coordinate changes are drawn: the base field, then
/// quadratic and quartic extensions for when small fields run out of
/// good projection centres.
fn working_fields(ctx: &FieldCtx) -> Result<Vec<FieldCtx>, FieldError> {
    let k = ctx.degree();
    let mut out = vec![ctx.clone()];
    for m in [2, 4] {
        let d = lcm(k, m);
        if d <= MAX_DEGREE && !out.iter().any(|f| f.degree() == d) {
            out.push(FieldCtx::canonical(ctx.p() as u64, d)?);
        }
    }
    Ok(out)
}

fn random_invertible(ctx: &FieldCtx, rng: &mut ChaCha8Rng) -> Mat3 {
    loop {
        let m = [[(); 3]; 3].map(|r| r.map(|_| ctx.random(rng)));
        if ProjMap::new(ctx, m).is_ok() {
            return m;
        }
    }
}

fn has_pure_z(g: &HomPoly) -> bool {
    !g.coeff((0, 0, g.degree())).is_zero()
}

/// `Some(answer)` or `None` when this coordinate frame is unusable.
fn smooth_attempt(w: &FieldCtx, g: &HomPoly) -> Result<Option<bool>, CurveError> {
    let [gx, gy, gz] = g.gradient(w);
    if !(has_pure_z(&gx) && has_pure_z(&gy) && has_pure_z(&gz)) {
        return Ok(None);
    }
    let r1 = resultant_z(w, &gx, &gy)?;
    let r2 = resultant_z(w, &gx, &gz)?;
    if r1.is_zero() || r2.is_zero() {
        return Ok(None);
    }
    let common = r1.poly.gcd(w, &r2.poly);
    let mut fibers: Vec<(FieldCtx, FieldElement, FieldElement)> = Vec::new();
    if r1.infinity_multiplicity() > 0 && r2.infinity_multiplicity() > 0 {
        fibers.push((w.clone(), w.one(), w.zero()));
    }
    if !common.is_constant() {
        let (s, roots) = match common.splitting_roots(w, MAX_DEGREE) {
            Ok(x) => x,
            Err(FieldError::DegreeOverflow { .. }) => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        for (x0, _) in roots {
            fibers.push((s.clone(), x0, s.one()));
        }
    }
    for (s, x0, y0) in fibers {
        let e = Embedding::new(w, &s)?;
        let (ex, ey, ez) = (gx.embed(&e), gy.embed(&e), gz.embed(&e));
        let d = ex
            .fiber(&s, &x0, &y0)
            .gcd(&s, &ey.fiber(&s, &x0, &y0))
            .gcd(&s, &ez.fiber(&s, &x0, &y0));
        if !d.is_constant() {
            return Ok(Some(false));
        }
    }
    Ok(Some(true))
}

type Lifted = (FieldCtx, Vec<(Vec3, u32)>);

/// One elimination pass in the frame `m`; points are returned in the
/// original coordinates.
fn scheme_attempt(w: &FieldCtx, f: &HomPoly, m: &Mat3) -> Result<Option<Lifted>, CurveError> {
    let g = f.substitute(w, m);
    let h = g.hessian(w);
    if !has_pure_z(&g) || !has_pure_z(&h) {
        return Ok(None);
    }
    let r = resultant_z(w, &g, &h)?;
    if r.is_zero() {
        return Ok(None);
    }
    let (s, roots) = r.poly.splitting_roots(w, MAX_DEGREE)?;
    let e = Embedding::new(w, &s)?;
    let (gs, hs) = (g.embed(&e), h.embed(&e));
    let ms = m.map(|row| row.map(|x| e.apply(&x)));
    let mut fibers: Vec<(FieldElement, FieldElement, u32)> =
        roots.into_iter().map(|(x0, k)| (x0, s.one(), k)).collect();
    let inf = r.infinity_multiplicity() as u32;
    if inf > 0 {
        fibers.push((s.one(), s.zero(), inf));
    }
    let mut out = Vec::with_capacity(fibers.len());
    for (x0, y0, mult) in fibers {
        let d = gs.fiber(&s, &x0, &y0).gcd(&s, &hs.fiber(&s, &x0, &y0));
        let rad = d.radical(&s);
        if rad.degree() != Some(1) {
            return Ok(None);
        }
        let z0 = s.neg(&rad.coeff(0));
        let v = crate::proj::mat_vec(&s, &ms, &[x0, y0, z0]);
        out.push((v, mult));
    }
    Ok(Some((s, out)))
}

fn tangent_at(ctx: &FieldCtx, f: &HomPoly, p: &ProjPoint) -> Result<ProjPoint, CurveError> {
    let g = [0, 1, 2].map(|i| f.partial(ctx, i).eval(ctx, p.coords()));
    ProjPoint::new(ctx, g).map_err(|_| CurveError::SingularPoint(p.to_string()))
}

fn contact_at(ctx: &FieldCtx, f: &HomPoly, l: &ProjPoint, p: &ProjPoint) -> Result<u32, CurveError> {
    // a second point on l, distinct from p
    let q = (0..3)
        .map(|i| {
            let mut e = [ctx.zero(); 3];
            e[i] = ctx.one();
            cross(ctx, l.coords(), &e)
        })
        .find(|v| !v.iter().all(|x| x.is_zero()) && !cross(ctx, v, p.coords()).iter().all(|x| x.is_zero()))
        .expect("a line has at least two points");
    let r: UPoly = f.restrict_line(ctx, p.coords(), &q);
    if r.is_zero() {
        return Err(CurveError::LineIsComponent);
    }
    let ord = r.coeffs().iter().position(|c| !c.is_zero()).unwrap() as u32;
    if ord > f.degree() {
        return Err(CurveError::ContactTooHigh(ord));
    }
    Ok(ord)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::{find_nth_root, make_prime_field};

    fn quartic(p: u64, s: &str) -> PlaneQuartic {
        let f = make_prime_field(p).unwrap();
        PlaneQuartic::new(&f, HomPoly::parse(&f, s).unwrap()).unwrap()
    }

    #[test]
    fn smoothness_examples() {
        assert!(quartic(7, "x^4 + y^4 + z^4").is_smooth().unwrap());
        let k = "x^4 + y^4 + z^4 + 3*x^2*y^2 + 3*x^2*z^2 + 3*y^2*z^2";
        assert!(!quartic(5, k).is_smooth().unwrap());
        assert!(quartic(7, k).is_smooth().unwrap());
        let v1 = "x^4 + y^4 - z^4 - 2*x^2*y^2 - 4*x*y*z^2";
        assert!(!quartic(11, v1).is_smooth().unwrap());
        assert!(!quartic(11, "x^4 + y^2*z^2").is_smooth().unwrap());
    }

    #[test]
    fn fermat_tangent() {
        let c = quartic(17, "x^4 + y^4 + z^4");
        let f = &c.ctx;
        let (_, eps) = find_nth_root(f, &f.one(), 8, true).unwrap();
        let p = ProjPoint::new(f, [f.zero(), f.one(), eps]).unwrap();
        let l = c.tangent_line(&p).unwrap();
        assert_eq!(l, ProjPoint::new(f, [f.zero(), f.one(), f.pow(&eps, 3)]).unwrap());
        assert_eq!(c.contact_order(&l, &p).unwrap(), 4);
    }

    #[test]
    fn secant_contact_is_one() {
        let c = quartic(13, "x^4 + y^4 + z^4 + 3*x^2*y^2 + 3*x^2*z^2 + 3*y^2*z^2");
        let f = &c.ctx;
        let p = ProjPoint::from_i64(f, [1, 1, 5]);
        assert!(c.contains(&p));
        let t = c.tangent_line(&p).unwrap();
        assert_eq!(t, ProjPoint::from_i64(f, [1, 1, 10]));
        let other = ProjPoint::join(f, &p, &ProjPoint::from_i64(f, [0, 0, 1])).unwrap();
        assert_ne!(other, t);
        assert_eq!(c.contact_order(&other, &p).unwrap(), 1);
    }

    #[test]
    fn fermat_scheme() {
        let c = quartic(17, "x^4 + y^4 + z^4");
        let s = c.inflection_scheme().unwrap();
        assert_eq!(s.field.degree(), 1);
        assert_eq!(s.census(), (12, 0));
        assert_eq!(s.total_weight(), 24);
        assert!(s.anomalies.is_empty());
        for r in &s.records {
            assert!(r.point.coords().iter().any(|x| x.is_zero()));
        }
    }

    #[test]
    fn k_scheme_at_13() {
        let c = quartic(13, "x^4 + y^4 + z^4 + 3*x^2*y^2 + 3*x^2*z^2 + 3*y^2*z^2");
        let s = c.inflection_scheme().unwrap();
        assert_eq!(s.census(), (12, 0));
        assert!(s.records.iter().any(|r| r.point == ProjPoint::from_i64(&s.field, [1, 1, 5])));
    }

    #[test]
    fn small_field_needs_extension_frames() {
        let c = quartic(5, "x^4 + y^4 + z^4");
        let s = c.inflection_scheme().unwrap();
        assert_eq!(s.census(), (12, 0));
        assert_eq!(s.total_weight(), 24);
    }
}
