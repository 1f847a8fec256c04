mod common;

use std::collections::BTreeSet;

use flexline::catalog::{self, CurveId, CurveSpec};
use flexline::config::{transporters, LineConfiguration};
use flexline::curve::PlaneQuartic;
use flexline::gf::{FieldCtx, FieldElement};
use flexline::proj::{ProjMap, ProjPoint};
use flexline::report::{scan_primes, vu_sample};
use flexline::upoly::UPoly;
use rand::Rng;
use rayon::prelude::*;

use common::*;

fn catalog_specs(max: u64) -> Vec<CurveSpec> {
    let mut out = Vec::new();
    for p in scan_primes(max) {
        for id in CurveId::ALL {
            if id != CurveId::Vu {
                out.push(CurveSpec::new(id, p));
            }
        }
        out.extend(vu_sample(p).into_iter().map(|u| CurveSpec::vu(p, u as i64)));
    }
    out
}

fn flex_set(c: &PlaneQuartic) -> (FieldCtx, BTreeSet<(ProjPoint, ProjPoint, u32)>) {
    let s = c.inflection_scheme().unwrap();
    let got = s.records.iter().map(|r| (r.point, r.line, r.weight)).collect();
    (s.field, got)
}

#[test]
fn zech_arithmetic_agrees_with_the_field() {
    for (p, n) in [(7, 1), (5, 3), (7, 2)] {
        let ctx = FieldCtx::canonical(p, n).unwrap();
        let z = Zech::new(&ctx);
        for a in ctx.elements() {
            for b in ctx.elements() {
                let (la, lb) = (z.to_log(&a), z.to_log(&b));
                assert_eq!(z.to_elem(z.add(la, lb)), ctx.add(&a, &b));
                assert_eq!(z.to_elem(z.mul(la, lb)), ctx.mul(&a, &b));
            }
        }
    }
}

#[test]
fn fermat_flexes_by_hand_at_17() {
    // x^4 + y^4 + z^4: the hyperflexes lie on the coordinate lines
    let c = catalog::build(&CurveSpec::new(CurveId::F, 17)).unwrap();
    let got = exhaustive_flexes(&c);
    assert_eq!(got.len(), 12);
    assert!(got.iter().all(|(p, _, w)| *w == 2 && p.coords().iter().any(|x| x.is_zero())));
}

/// Flex fields up to this size are checked here; the rest in the acceptance run.
const QUICK_LIMIT: u128 = 2500;

#[test]
fn flexes_match_exhaustive_search() {
    let specs = catalog_specs(47);
    let checked: Vec<u128> = specs
        .par_iter()
        .filter_map(|s| {
            let c = catalog::build(s).ok()?;
            let (field, got) = flex_set(&c);
            let q = field.order_u128().unwrap();
            if q > QUICK_LIMIT {
                return None;
            }
            let want = exhaustive_flexes(&c.embed(&field).unwrap());
            assert_eq!(got, want, "{}", s.label());
            assert_eq!(want.iter().map(|f| f.2).sum::<u32>(), 24, "{}", s.label());
            // the field is generated by the flex coordinates
            let deg = want
                .iter()
                .flat_map(|(p, l, _)| p.coords().iter().chain(l.coords().iter()).copied().collect::<Vec<_>>())
                .map(|x| field.element_degree(&x))
                .fold(1, lcm);
            assert_eq!(deg * c.ctx.degree() / gcd(deg, c.ctx.degree()), field.degree(), "{}", s.label());
            Some(q)
        })
        .collect();
    assert!(checked.len() > 150, "only {} curves checked", checked.len());
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

#[test]
fn random_ciani_quartics_match_exhaustive_search() {
    // x^4 + y^4 + z^4 + a x^2y^2 + b y^2z^2 + c z^2x^2 keeps the flex field small
    let mut r = rng(11);
    let mut done = 0;
    for p in [5u64, 7, 11].iter().cycle().take(200) {
        if done == 8 {
            break;
        }
        let ctx = FieldCtx::prime(*p).unwrap();
        let mut f = flexline::mpoly::HomPoly::parse(&ctx, "x^4 + y^4 + z^4").unwrap();
        for e in [(2, 2, 0), (0, 2, 2), (2, 0, 2)] {
            f.add_term(&ctx, e, ctx.random(&mut r));
        }
        let c = PlaneQuartic::new(&ctx, f).unwrap();
        if !c.is_smooth().unwrap() {
            continue;
        }
        let (field, got) = flex_set(&c);
        if field.order_u128().unwrap() > QUICK_LIMIT {
            continue;
        }
        assert_eq!(got, exhaustive_flexes(&c.embed(&field).unwrap()), "{}", c.f);
        done += 1;
    }
    assert_eq!(done, 8);
}

fn check_transporters(ctx: &FieldCtx, seed: u64, n: usize) {
    let mut r = rng(seed);
    let mut pairs: Vec<(LineConfiguration, LineConfiguration)> = Vec::new();
    for i in 0..n {
        let a = random_config(ctx, &mut r, 5 + i % 4);
        let m = loop {
            let m = std::array::from_fn(|_| std::array::from_fn(|_| ctx.random(&mut r)));
            if let Ok(m) = ProjMap::new(ctx, m) {
                break m;
            }
        };
        let moved = a.image(&m);
        let mut bumped = a.clone();
        let l = *a.entries().keys().nth(r.gen_range(0..a.len())).unwrap();
        bumped.add(l, 1);
        pairs.push((a.clone(), a.clone()));
        pairs.push((a.clone(), moved));
        pairs.push((a, bumped));
    }
    let found: Vec<BTreeSet<M3>> = pairs
        .iter()
        .map(|(a, b)| transporters(a, b).unwrap().iter().map(|m| *m.matrix()).collect())
        .collect();
    let brute = brute_transporters(&pairs);
    for (i, (f, b)) in found.iter().zip(&brute).enumerate() {
        assert_eq!(f, b, "pair {i} over {}", ctx.spec());
    }
    // the moved copies always have a transporter
    assert!(brute.iter().skip(1).step_by(3).all(|s| !s.is_empty()));
}

#[test]
fn pgl3_has_the_right_size() {
    let ctx = FieldCtx::prime(5).unwrap();
    let distinct = pgl3_fold(
        &ctx,
        BTreeSet::new,
        |acc, m| {
            acc.insert(*m);
        },
        |mut a, b| {
            a.extend(b);
            a
        },
    );
    // |GL3(F5)| / 4
    assert_eq!(distinct.len(), 124 * 120 * 100 / 4);
}

#[test]
fn transporters_match_brute_force_over_f5() {
    check_transporters(&FieldCtx::prime(5).unwrap(), 2, 10);
}

fn brute_roots(ctx: &FieldCtx, f: &UPoly) -> Vec<FieldElement> {
    let mut v: Vec<FieldElement> = ctx.elements().filter(|x| f.eval(ctx, x).is_zero()).collect();
    v.sort();
    v
}

#[test]
fn roots_match_brute_force() {
    let mut r = rng(5);
    for (p, n) in [(5, 1), (13, 1), (5, 2), (7, 3), (11, 2)] {
        let ctx = FieldCtx::canonical(p, n).unwrap();
        for _ in 0..40 {
            let deg = r.gen_range(1..=8);
            let mut c: Vec<FieldElement> = (0..deg).map(|_| ctx.random(&mut r)).collect();
            c.push(ctx.random_nonzero(&mut r));
            // plant a repeated root now and then
            let mut f = UPoly::new(c);
            if r.gen_bool(0.3) {
                let a = ctx.random(&mut r);
                f = f.mul(&ctx, &UPoly::linear(&ctx, &a).pow(&ctx, 2));
            }
            let mut got: Vec<FieldElement> = f.roots(&ctx).into_iter().map(|(x, _)| x).collect();
            got.sort();
            assert_eq!(got, brute_roots(&ctx, &f), "{}", ctx.spec());
        }
    }
}
