//! The quartics with at least eight hyperflexes, a few companion curves,
//! named projective maps, and the expected results for each.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::curve::{CurveError, PlaneQuartic};
use crate::gf::{find_nth_root, Embedding, FieldCtx, FieldElement, FieldError};
use crate::mpoly::HomPoly;
use crate::proj::ProjMap;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("{id} is not admissible in characteristic {p}: {reason}")]
    InadmissibleCharacteristic { id: CurveId, p: u64, reason: &'static str },
    #[error("V_u is singular for u = {0}")]
    SingularParameter(i64),
    #[error("V_u needs a parameter u")]
    MissingParameter,
    #[error("unknown curve id {0:?}")]
    UnknownCurve(String),
    #[error("{0} is singular in characteristic {1}")]
    Singular(CurveId, u64),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Curve(#[from] CurveError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum CurveId {
    F,
    K,
    K1,
    K2,
    K3,
    Cplus,
    Cminus,
    V,
    Vu,
    Ec313a,
    Ec313b,
}

impl CurveId {
    pub const ALL: [CurveId; 11] = [
        CurveId::F,
        CurveId::K,
        CurveId::K1,
        CurveId::K2,
        CurveId::K3,
        CurveId::Cplus,
        CurveId::Cminus,
        CurveId::V,
        CurveId::Vu,
        CurveId::Ec313a,
        CurveId::Ec313b,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CurveId::F => "F",
            CurveId::K => "K",
            CurveId::K1 => "K1",
            CurveId::K2 => "K2",
            CurveId::K3 => "K3",
            CurveId::Cplus => "Cplus",
            CurveId::Cminus => "Cminus",
            CurveId::V => "V",
            CurveId::Vu => "Vu",
            CurveId::Ec313a => "Ec313a",
            CurveId::Ec313b => "Ec313b",
        }
    }
}

impl fmt::Display for CurveId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CurveId {
    type Err = CatalogError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CurveId::ALL
            .iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .copied()
            .ok_or_else(|| CatalogError::UnknownCurve(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CurveSpec {
    pub id: CurveId,
    pub p: u64,
    /// Residue in `[0, p)`; only for `Vu`.
    pub u: Option<u64>,
}

impl CurveSpec {
    pub fn new(id: CurveId, p: u64) -> CurveSpec {
        CurveSpec { id, p, u: None }
    }

    pub fn vu(p: u64, u: i64) -> CurveSpec {
        CurveSpec {
            id: CurveId::Vu,
            p,
            u: Some(u.rem_euclid(p as i64) as u64),
        }
    }

    pub fn label(&self) -> String {
        match (self.id, self.u) {
            (CurveId::Vu, Some(u)) => format!("Vu(u={u})"),
            (id, _) => id.to_string(),
        }
    }

    pub fn check_admissible(&self) -> Result<(), CatalogError> {
        let p = self.p;
        crate::gf::make_prime_field(p)?;
        let bad = |reason| {
            Err(CatalogError::InadmissibleCharacteristic {
                id: self.id,
                p,
                reason,
            })
        };
        match self.id {
            CurveId::K | CurveId::K1 if p == 5 => bad("K is singular in characteristic 5"),
            CurveId::Cplus | CurveId::Cminus if p == 7 => bad("C± need characteristic other than 7"),
            CurveId::V if p == 7 => bad("V is singular in characteristic 7"),
            CurveId::Vu => match self.u {
                None => Err(CatalogError::MissingParameter),
                Some(u) if u % p == 0 || u % p == 1 => Err(CatalogError::SingularParameter(u as i64)),
                Some(_) => Ok(()),
            },
            _ => Ok(()),
        }
    }
}

/// `√7` as the least square root in the smallest field containing one.
pub fn sqrt7(p: u64) -> Result<(FieldCtx, FieldElement), FieldError> {
    let f = crate::gf::make_prime_field(p)?;
    find_nth_root(&f, &f.from_i64(7), 2, false)
}

/// Builds the curve over the smallest field containing its coefficients.
pub fn build(spec: &CurveSpec) -> Result<PlaneQuartic, CatalogError> {
    spec.check_admissible()?;
    let p = spec.p;
    let fp = crate::gf::make_prime_field(p)?;
    let from = |ctx: &FieldCtx, s: &str| HomPoly::parse(ctx, s).expect("catalog equation parses");
    let (ctx, f) = match spec.id {
        CurveId::F => (fp.clone(), from(&fp, "x^4 + y^4 + z^4")),
        CurveId::K | CurveId::K1 => (
            fp.clone(),
            from(&fp, "x^4 + y^4 + z^4 + 3*x^2*y^2 + 3*x^2*z^2 + 3*y^2*z^2"),
        ),
        CurveId::K2 => (
            fp.clone(),
            from(&fp, "x^4 + 3*y^4 + 9*z^4 + 27*x^2*y^2 + 9*x^2*z^2 + 3*y^2*z^2"),
        ),
        CurveId::K3 => (
            fp.clone(),
            from(&fp, "x^4 + 9*y^4 + 3*z^4 + 9*x^2*y^2 + 27*x^2*z^2 + 3*y^2*z^2"),
        ),
        CurveId::Cplus | CurveId::Cminus => {
            let (ctx, mut r) = sqrt7(p)?;
            if spec.id == CurveId::Cminus {
                r = ctx.neg(&r);
            }
            (ctx.clone(), c_pm(&ctx, &r))
        }
        CurveId::V => (fp.clone(), from(&fp, "x^4 - 7*y^4 - z^4 - 42*x^2*y^2 + 12*x*y*z^2")),
        CurveId::Vu => {
            let u = spec.u.unwrap();
            let mut f = from(&fp, "y^4 - z^4 - 2*x^2*y^2 - 4*x*y*z^2");
            f.add_term(&fp, (4, 0, 0), fp.from_u64(u));
            (fp.clone(), f)
        }
        CurveId::Ec313a => (fp.clone(), from(&fp, "-x^4 + y^4 - z^4 - 2*x^2*y^2 - 4*x*y*z^2")),
        CurveId::Ec313b => (fp.clone(), from(&fp, "x^4 - y^4 - z^4 - 2*x^2*y^2 - 4*x*y*z^2")),
    };
    let c = PlaneQuartic::new(&ctx, f)?.with_label(&spec.label());
    if matches!(spec.id, CurveId::K2 | CurveId::K3) && !c.is_smooth()? {
        return Err(CatalogError::Singular(spec.id, p));
    }
    Ok(c)
}

/// `(21 ± 8r) z⁴ − 6(2 ± r) xyz² + (3 ± r)(x³ + y³) z − 3x²y²` with `r = ±√7`.
fn c_pm(ctx: &FieldCtx, r: &FieldElement) -> HomPoly {
    let lin = |a: i64, b: i64| ctx.add(&ctx.from_i64(a), &ctx.mul(&ctx.from_i64(b), r));
    let c_z4 = lin(21, 8);
    let c_xyz2 = ctx.mul(&ctx.from_i64(-6), &lin(2, 1));
    let c_cub = lin(3, 1);
    HomPoly::from_elements(
        ctx,
        4,
        &[
            (c_z4, (0, 0, 4)),
            (c_xyz2, (1, 1, 2)),
            (c_cub, (3, 0, 1)),
            (c_cub, (0, 3, 1)),
            (ctx.from_i64(-3), (2, 2, 0)),
        ],
    )
}

/// A map with what is expected of it.
#[derive(Clone, Debug)]
pub struct NamedMap {
    pub name: String,
    pub field: FieldCtx,
    pub map: ProjMap,
    /// `substitute(F, M) ∝ F`
    pub curve_automorphism: bool,
    /// stabilizes the configuration of inflection lines
    pub config_automorphism: bool,
    /// The curve this map carries the source curve onto, if another one.
    pub sends_to: Option<CurveId>,
}

fn map_of(ctx: &FieldCtx, rows: [[FieldElement; 3]; 3]) -> ProjMap {
    ProjMap::new(ctx, rows).expect("named maps are invertible")
}

/// `[x,y,z] ↦ [a x, b y, c z]`
fn diag(ctx: &FieldCtx, a: FieldElement, b: FieldElement, c: FieldElement) -> ProjMap {
    let z = ctx.zero();
    map_of(ctx, [[a, z, z], [z, b, z], [z, z, c]])
}

/// `[x,y,z] ↦ [a y, b x, c z]`
fn anti(ctx: &FieldCtx, a: FieldElement, b: FieldElement, c: FieldElement) -> ProjMap {
    let z = ctx.zero();
    map_of(ctx, [[z, a, z], [b, z, z], [z, z, c]])
}

/// `[x,y,z] ↦ [z, 3x, y/3]`
pub fn gamma13(ctx: &FieldCtx) -> ProjMap {
    let (o, z) = (ctx.one(), ctx.zero());
    let third = ctx.inv(&ctx.from_i64(3)).unwrap();
    map_of(ctx, [[z, z, o], [ctx.from_i64(3), z, z], [z, third, z]])
}

/// `[x,y,z] ↦ [z/2, i y, −2x]`
pub fn gamma7(ctx: &FieldCtx, i: &FieldElement) -> ProjMap {
    let z = ctx.zero();
    let half = ctx.inv(&ctx.from_i64(2)).unwrap();
    map_of(ctx, [[z, z, half], [z, *i, z], [ctx.from_i64(-2), z, z]])
}

pub fn swap_xy(ctx: &FieldCtx) -> ProjMap {
    anti(ctx, ctx.one(), ctx.one(), ctx.one())
}

/// Lifts `base` to the larger of `base` and `other`, which must be comparable.
fn widen(base: &FieldCtx, other: &FieldCtx) -> Result<FieldCtx, FieldError> {
    if other.degree() % base.degree() == 0 {
        Embedding::new(base, other)?;
        Ok(other.clone())
    } else {
        crate::gf::compositum(base, other)
    }
}

fn embed_to(src: &FieldCtx, dst: &FieldCtx, a: &FieldElement) -> FieldElement {
    Embedding::new(src, dst).unwrap().apply(a)
}

/// Roots `r` with `r^n = a` in a field containing `ctx`.
fn root_over(ctx: &FieldCtx, a: &FieldElement, n: u64, primitive: bool) -> Result<(FieldCtx, FieldElement), FieldError> {
    find_nth_root(ctx, a, n, primitive)
}

/// The classical named maps for this curve, each over the field it needs.
pub fn named_maps(spec: &CurveSpec) -> Result<Vec<NamedMap>, CatalogError> {
    let c = build(spec)?;
    let base = c.ctx.clone();
    let p = spec.p;
    let mut out = Vec::new();
    let push = |out: &mut Vec<NamedMap>, name: &str, field: &FieldCtx, map: ProjMap, curve: bool, config: bool, to: Option<CurveId>| {
        out.push(NamedMap {
            name: name.to_string(),
            field: field.clone(),
            map,
            curve_automorphism: curve,
            config_automorphism: config,
            sends_to: to,
        })
    };
    let one = base.one();
    match spec.id {
        CurveId::F => {
            push(&mut out, "swap", &base, swap_xy(&base), true, true, None);
            let z = base.zero();
            let cyc = map_of(&base, [[z, one, z], [z, z, one], [one, z, z]]);
            push(&mut out, "cycle", &base, cyc, true, true, None);
            let (fi, i) = root_over(&base, &base.from_i64(-1), 2, false)?;
            let d = diag(&fi, i, fi.one(), fi.one());
            push(&mut out, "diag(i,1,1)", &fi, d, true, true, None);
        }
        CurveId::K | CurveId::K1 | CurveId::K2 | CurveId::K3 => {
            if spec.id == CurveId::K || spec.id == CurveId::K1 {
                push(&mut out, "swap", &base, swap_xy(&base), true, true, None);
                let m1 = base.from_i64(-1);
                push(&mut out, "sign", &base, diag(&base, m1, one, one), true, true, None);
            }
            if p == 7 && spec.id == CurveId::K {
                let (fi, i) = root_over(&base, &base.from_i64(-1), 2, false)?;
                push(&mut out, "gamma7", &fi, gamma7(&fi, &i), false, false, None);
            }
            if p == 13 {
                let to = match spec.id {
                    CurveId::K | CurveId::K1 => CurveId::K2,
                    CurveId::K2 => CurveId::K3,
                    _ => CurveId::K1,
                };
                let to = if spec.id == CurveId::K { None } else { Some(to) };
                push(&mut out, "gamma13", &base, gamma13(&base), false, true, to);
            }
        }
        CurveId::Cplus | CurveId::Cminus => {
            let (fz, zeta) = root_over(&base, &base.one(), 3, true)?;
            let zi = fz.inv(&zeta).unwrap();
            push(&mut out, "rho_zeta", &fz, diag(&fz, zeta, zi, fz.one()), true, true, None);
            push(&mut out, "swap", &base, swap_xy(&base), true, true, None);
        }
        CurveId::V => {
            let (fi, i) = root_over(&base, &base.from_i64(-1), 2, false)?;
            let (fa, alpha) = root_over(&base, &base.from_i64(-7), 4, false)?;
            let w = widen(&fi, &fa)?;
            let i = embed_to(&fi, &w, &i);
            let alpha = embed_to(&fa, &w, &alpha);
            let mi = w.neg(&i);
            push(&mut out, "rho_i", &w, diag(&w, i, mi, w.one()), true, true, None);
            let ai = w.inv(&alpha).unwrap();
            push(&mut out, "sigma_alpha", &w, anti(&w, alpha, ai, w.one()), true, true, None);
        }
        CurveId::Vu | CurveId::Ec313a | CurveId::Ec313b => {
            let u = match spec.id {
                CurveId::Vu => base.from_u64(spec.u.unwrap()),
                CurveId::Ec313a => base.from_i64(-1),
                _ => base.one(),
            };
            let (fi, i) = root_over(&base, &base.from_i64(-1), 2, false)?;
            let mi = fi.neg(&i);
            push(&mut out, "rho_i", &fi, diag(&fi, i, mi, fi.one()), true, true, None);
            if spec.id != CurveId::Ec313b {
                let (fs, s) = root_over(&base, &u, 4, false)?;
                let si = fs.inv(&s).unwrap();
                push(&mut out, "sigma_s", &fs, anti(&fs, si, s, fs.one()), true, true, None);
            }
            let minus_one = u == base.from_i64(-1);
            if p == 13 && (spec.id == CurveId::Ec313a || (spec.id == CurveId::Vu && minus_one)) {
                push(&mut out, "swap", &base, swap_xy(&base), false, true, Some(CurveId::Ec313b));
            }
            if spec.id == CurveId::Ec313a {
                let (fe, eps) = root_over(&base, &base.one(), 8, true)?;
                let ei = fe.inv(&eps).unwrap();
                push(&mut out, "rho_eps", &fe, diag(&fe, eps, ei, fe.one()), false, p == 13, Some(CurveId::Ec313b));
            }
        }
    }
    Ok(out)
}

/// Where an expected value comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// Stated for this characteristic.
    Stated,
    /// Proved in characteristic 0 and expected to persist.
    CharZero,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpectedProfile {
    pub hyper: usize,
    pub simple: usize,
    pub config_order: usize,
    pub curve_order: usize,
    /// Some(true) if the support is covered by three lines.
    pub covered_by_three_lines: Option<bool>,
    /// Conic through the weight-2 lines; `Some(None)` means no conic.
    #[serde(skip)]
    pub hyper_conic: Option<Option<HomPoly>>,
    #[serde(skip)]
    pub simple_conic: Option<HomPoly>,
    pub provenance: Provenance,
}

pub fn expected_profile(spec: &CurveSpec) -> Result<ExpectedProfile, CatalogError> {
    spec.check_admissible()?;
    let p = spec.p;
    let fp = crate::gf::make_prime_field(p)?;
    let stated = matches!(p, 7 | 13);
    let provenance = if stated { Provenance::Stated } else { Provenance::CharZero };
    let parse = |s: &str| HomPoly::parse(&fp, s).unwrap();
    let mut e = ExpectedProfile {
        hyper: 8,
        simple: 8,
        config_order: 8,
        curve_order: 8,
        covered_by_three_lines: None,
        hyper_conic: None,
        simple_conic: None,
        provenance,
    };
    match spec.id {
        CurveId::F => {
            (e.hyper, e.simple, e.config_order, e.curve_order) = (12, 0, 96, 96);
            e.covered_by_three_lines = Some(true);
        }
        CurveId::K | CurveId::K1 | CurveId::K2 | CurveId::K3 => {
            (e.hyper, e.simple, e.curve_order) = (12, 0, 24);
            e.config_order = if p == 13 { 72 } else { 24 };
            e.covered_by_three_lines = Some(false);
        }
        CurveId::Cplus | CurveId::Cminus => {
            (e.hyper, e.simple, e.config_order, e.curve_order) = (9, 6, 6, 6);
        }
        CurveId::V => {
            e.hyper_conic = Some(None);
            e.simple_conic = Some(parse("x*y + z^2"));
        }
        CurveId::Vu | CurveId::Ec313a | CurveId::Ec313b => {
            let u = match spec.id {
                CurveId::Vu => fp.from_u64(spec.u.unwrap()),
                CurveId::Ec313a => fp.from_i64(-1),
                _ => fp.one(),
            };
            if p == 13 && (u == fp.from_i64(-1) || spec.id == CurveId::Ec313b) {
                e.config_order = 16;
            }
            if spec.id != CurveId::Ec313b {
                e.hyper_conic = Some(Some(parse("x*y + z^2")));
                // (27u + 5) z^2 + 32 xy
                let c = fp.add(&fp.mul(&fp.from_i64(27), &u), &fp.from_i64(5));
                e.simple_conic = Some(HomPoly::from_elements(
                    &fp,
                    2,
                    &[(c, (0, 0, 2)), (fp.from_i64(32), (1, 1, 0))],
                ));
            }
        }
    }
    Ok(e)
}
