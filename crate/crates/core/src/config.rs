//! Weighted configurations of inflection lines, their transporters,
//! stabilizers and a few combinatorial signatures.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::curve::{InflectionScheme, PlaneQuartic, FlexRecord};
use crate::gf::{Embedding, FieldCtx, FieldError};
use crate::mpoly::HomPoly;
use crate::proj::{collinear, conic_through, in_general_position, map_from_frames, ProjMap, ProjPoint};

pub const GROUP_CAP: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("no four points of the support are in general position")]
    DegenerateConfiguration,
    #[error("stabilizer has more than {0} elements")]
    GroupTooLarge(usize),
    #[error("configurations live over different fields ({0} and {1})")]
    FieldMismatch(String, String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Inflection lines as points of the dual plane, with weights.
#[derive(Clone, Debug)]
pub struct LineConfiguration {
    pub ctx: FieldCtx,
    entries: BTreeMap<ProjPoint, u32>,
}

impl PartialEq for LineConfiguration {
    fn eq(&self, other: &Self) -> bool {
        self.ctx.spec() == other.ctx.spec() && self.entries == other.entries
    }
}

impl Eq for LineConfiguration {}

impl LineConfiguration {
    pub fn new(ctx: &FieldCtx) -> LineConfiguration {
        LineConfiguration {
            ctx: ctx.clone(),
            entries: BTreeMap::new(),
        }
    }

    pub fn add(&mut self, line: ProjPoint, weight: u32) {
        *self.entries.entry(line).or_insert(0) += weight;
    }

    pub fn from_records(ctx: &FieldCtx, records: &[FlexRecord]) -> LineConfiguration {
        let mut c = LineConfiguration::new(ctx);
        for r in records {
            c.add(r.line, r.weight);
        }
        c
    }

    pub fn from_flexes(scheme: &InflectionScheme) -> LineConfiguration {
        Self::from_records(&scheme.field, &scheme.records)
    }

    pub fn entries(&self) -> &BTreeMap<ProjPoint, u32> {
        &self.entries
    }

    pub fn support(&self) -> Vec<ProjPoint> {
        self.entries.keys().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn weight(&self, l: &ProjPoint) -> u32 {
        self.entries.get(l).copied().unwrap_or(0)
    }

    pub fn total_weight(&self) -> u32 {
        self.entries.values().sum()
    }

    pub fn with_weight(&self, w: u32) -> Vec<ProjPoint> {
        self.entries.iter().filter(|(_, &v)| v == w).map(|(k, _)| *k).collect()
    }

    /// weight → number of support points
    pub fn histogram(&self) -> BTreeMap<u32, usize> {
        let mut h = BTreeMap::new();
        for w in self.entries.values() {
            *h.entry(*w).or_insert(0) += 1;
        }
        h
    }

    pub fn embed(&self, dst: &FieldCtx) -> Result<LineConfiguration, ConfigError> {
        let e = Embedding::new(&self.ctx, dst)?;
        let mut c = LineConfiguration::new(dst);
        for (l, w) in &self.entries {
            c.add(l.embed(dst, &e), *w);
        }
        Ok(c)
    }

    /// The configuration of `M(C)` given that of `C`.
    pub fn image(&self, m: &ProjMap) -> LineConfiguration {
        let mut c = LineConfiguration::new(&self.ctx);
        for (l, w) in &self.entries {
            c.add(m.apply_line(&self.ctx, l), *w);
        }
        c
    }

    pub fn is_stabilized_by(&self, m: &ProjMap) -> bool {
        self.entries
            .iter()
            .all(|(l, w)| self.weight(&m.apply_line(&self.ctx, l)) == *w)
    }

    pub fn to_json(&self) -> Value {
        let pts: Vec<Value> = self
            .entries
            .iter()
            .map(|(l, w)| {
                let c: Vec<String> = l.coords().iter().map(|x| self.ctx.fmt_element(x)).collect();
                json!({"dual": c, "weight": w})
            })
            .collect();
        json!({"field": self.ctx.spec(), "points": pts})
    }
}

/// Lines through at least three support points, as sorted index sets.
fn rich_lines(ctx: &FieldCtx, pts: &[ProjPoint]) -> BTreeSet<Vec<usize>> {
    let n = pts.len();
    let mut out = BTreeSet::new();
    for i in 0..n {
        for j in i + 1..n {
            let on: Vec<usize> = (0..n)
                .filter(|&k| k == i || k == j || collinear(ctx, &pts[i], &pts[j], &pts[k]))
                .collect();
            if on.len() >= 3 && on[0] == i && on[1] == j {
                out.insert(on);
            }
        }
    }
    out
}

/// Per point: its weight and the (size, weight) of each rich line through it.
fn point_invariants(a: &LineConfiguration) -> Vec<(u32, Vec<(usize, u32)>)> {
    let pts = a.support();
    let ws: Vec<u32> = pts.iter().map(|p| a.weight(p)).collect();
    let mut inv: Vec<(u32, Vec<(usize, u32)>)> = ws.iter().map(|w| (*w, Vec::new())).collect();
    for line in rich_lines(&a.ctx, &pts) {
        let wsum = line.iter().map(|&k| ws[k]).sum();
        for &k in &line {
            inv[k].1.push((line.len(), wsum));
        }
    }
    for v in &mut inv {
        v.1.sort();
    }
    inv
}

fn check_fields(a: &LineConfiguration, b: &LineConfiguration) -> Result<(), ConfigError> {
    if a.ctx.spec() != b.ctx.spec() {
        return Err(ConfigError::FieldMismatch(a.ctx.spec(), b.ctx.spec()));
    }
    Ok(())
}

/// All `M` with `M·A = B`, weights included, where `M` acts on lines.
pub fn transporters(a: &LineConfiguration, b: &LineConfiguration) -> Result<Vec<ProjMap>, ConfigError> {
    check_fields(a, b)?;
    let ctx = &a.ctx;
    let pa = a.support();
    let pb = b.support();
    let ia = point_invariants(a);
    let ib = point_invariants(b);

    let frame = choose_frame(ctx, &pa, &ia, &ib).ok_or(ConfigError::DegenerateConfiguration)?;
    if a.histogram() != b.histogram() {
        return Ok(Vec::new());
    }
    let mut sa = ia.clone();
    let mut sb = ib.clone();
    sa.sort();
    sb.sort();
    if sa != sb {
        return Ok(Vec::new());
    }
    if conic_through(ctx, &a.with_weight(2)).0 != conic_through(ctx, &b.with_weight(2)).0 {
        return Ok(Vec::new());
    }

    let src = frame.map(|i| pa[i]);
    let cands: Vec<Vec<usize>> = frame
        .iter()
        .map(|&i| (0..pb.len()).filter(|&j| ib[j] == ia[i]).collect())
        .collect();
    let found: BTreeSet<ProjMap> = cands[0]
        .par_iter()
        .flat_map_iter(|&b0| {
            let mut out = Vec::new();
            for &b1 in &cands[1] {
                if b1 == b0 {
                    continue;
                }
                for &b2 in &cands[2] {
                    if b2 == b0 || b2 == b1 || collinear(ctx, &pb[b0], &pb[b1], &pb[b2]) {
                        continue;
                    }
                    for &b3 in &cands[3] {
                        if b3 == b0 || b3 == b1 || b3 == b2 {
                            continue;
                        }
                        let dst = [pb[b0], pb[b1], pb[b2], pb[b3]];
                        let Ok(d) = map_from_frames(ctx, &src, &dst) else {
                            continue;
                        };
                        let ok = a
                            .entries
                            .iter()
                            .all(|(l, w)| b.weight(&d.apply_point(ctx, l)) == *w);
                        if ok {
                            out.push(d.dual(ctx));
                        }
                    }
                }
            }
            out
        })
        .collect();
    Ok(found.into_iter().collect())
}

/// General-position frame minimizing the number of candidate images;
/// ties go to the lexicographically least.
fn choose_frame(
    ctx: &FieldCtx,
    pa: &[ProjPoint],
    ia: &[(u32, Vec<(usize, u32)>)],
    ib: &[(u32, Vec<(usize, u32)>)],
) -> Option<[usize; 4]> {
    let mut class: HashMap<&(u32, Vec<(usize, u32)>), usize> = HashMap::new();
    for v in ib {
        *class.entry(v).or_insert(0) += 1;
    }
    let size = |i: usize| class.get(&ia[i]).copied().unwrap_or(0);
    let n = pa.len();
    let mut best: Option<(usize, [usize; 4])> = None;
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                if collinear(ctx, &pa[i], &pa[j], &pa[k]) {
                    continue;
                }
                for l in k + 1..n {
                    let q = [pa[i], pa[j], pa[k], pa[l]];
                    if !in_general_position(ctx, &q) {
                        continue;
                    }
                    let cost = size(i) * size(j) * size(k) * size(l);
                    if best.map_or(true, |(c, _)| cost < c) {
                        best = Some((cost, [i, j, k, l]));
                    }
                }
            }
        }
    }
    best.map(|(_, f)| f)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GroupDescriptor {
    pub order: usize,
    pub abelian: bool,
    /// element order → count
    pub orders: BTreeMap<usize, usize>,
}

impl GroupDescriptor {
    /// Name of the group when the descriptor pins it down among the small
    /// groups that occur here.
    pub fn name(&self) -> Option<&'static str> {
        let h: Vec<(usize, usize)> = self.orders.iter().map(|(a, b)| (*a, *b)).collect();
        let known: [(&str, bool, &[(usize, usize)]); 6] = [
            ("trivial", true, &[(1, 1)]),
            ("C2", true, &[(1, 1), (2, 1)]),
            ("S3", false, &[(1, 1), (2, 3), (3, 2)]),
            ("D4", false, &[(1, 1), (2, 5), (4, 2)]),
            ("D8", false, &[(1, 1), (2, 9), (4, 2), (8, 4)]),
            ("S4", false, &[(1, 1), (2, 9), (3, 8), (4, 6)]),
        ];
        known
            .iter()
            .find(|(_, ab, hist)| *ab == self.abelian && h.as_slice() == *hist)
            .map(|(n, _, _)| *n)
    }
}

/// A finite subgroup of `PGL₃` given by its elements.
#[derive(Clone, Debug)]
pub struct ProjGroup {
    pub ctx: FieldCtx,
    pub elements: Vec<ProjMap>,
    pub descriptor: GroupDescriptor,
}

impl ProjGroup {
    /// Wraps a set of maps known to form a group.
    pub fn new(ctx: &FieldCtx, elements: impl IntoIterator<Item = ProjMap>) -> ProjGroup {
        let set: BTreeSet<ProjMap> = elements.into_iter().collect();
        let elements: Vec<ProjMap> = set.into_iter().collect();
        let order = elements.len();
        let mut orders = BTreeMap::new();
        for g in &elements {
            *orders.entry(g.order(ctx, order.max(1)).unwrap_or(0)).or_insert(0) += 1;
        }
        let gens = generators(ctx, &elements);
        let abelian = gens
            .iter()
            .all(|g| gens.iter().all(|h| g.compose(ctx, h) == h.compose(ctx, g)));
        ProjGroup {
            ctx: ctx.clone(),
            descriptor: GroupDescriptor { order, abelian, orders },
            elements,
        }
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, m: &ProjMap) -> bool {
        self.elements.binary_search(m).is_ok()
    }

    pub fn is_subgroup_of(&self, other: &ProjGroup) -> bool {
        self.elements.iter().all(|g| other.contains(g))
    }

    /// Full multiplication table check.
    pub fn is_closed(&self) -> bool {
        let ctx = &self.ctx;
        self.contains(&ProjMap::identity(ctx))
            && self.elements.iter().all(|g| {
                self.contains(&g.inverse(ctx)) && self.elements.iter().all(|h| self.contains(&g.compose(ctx, h)))
            })
    }
}

/// A greedy generating set.
pub fn generators(ctx: &FieldCtx, elements: &[ProjMap]) -> Vec<ProjMap> {
    let mut gens: Vec<ProjMap> = Vec::new();
    let mut span: BTreeSet<ProjMap> = BTreeSet::from([ProjMap::identity(ctx)]);
    for g in elements {
        if span.contains(g) {
            continue;
        }
        gens.push(*g);
        let mut frontier: Vec<ProjMap> = span.iter().copied().collect();
        while let Some(x) = frontier.pop() {
            for s in &gens {
                let y = x.compose(ctx, s);
                if span.insert(y) {
                    frontier.push(y);
                }
            }
        }
    }
    gens
}

pub fn automorphism_group(a: &LineConfiguration) -> Result<ProjGroup, ConfigError> {
    let maps = transporters(a, a)?;
    if maps.len() > GROUP_CAP {
        return Err(ConfigError::GroupTooLarge(GROUP_CAP));
    }
    Ok(ProjGroup::new(&a.ctx, maps))
}

/// Whether `F(Mv) = λ F(v)`.
pub fn preserves_form(ctx: &FieldCtx, f: &HomPoly, m: &ProjMap) -> bool {
    f.substitute(ctx, m.matrix()).proportional(ctx, f)
}

/// The elements of `g` that are automorphisms of the curve.
pub fn curve_automorphisms(c: &PlaneQuartic, g: &ProjGroup) -> Result<ProjGroup, ConfigError> {
    let f = c.embed(&g.ctx).map_err(|_| ConfigError::FieldMismatch(c.ctx.spec(), g.ctx.spec()))?.f;
    let keep: Vec<ProjMap> = g
        .elements
        .par_iter()
        .filter(|m| preserves_form(&g.ctx, &f, m))
        .copied()
        .collect();
    Ok(ProjGroup::new(&g.ctx, keep))
}

#[derive(Clone, Debug, Serialize)]
pub struct SupportSignature {
    /// Sizes of the maximal collinear subsets with at least three points,
    /// largest first.
    pub collinear: Vec<usize>,
    pub min_line_cover: usize,
    /// Rank of the conic evaluation matrix of the weight-2 points.
    pub hyper_conic_rank: usize,
    pub simple_conic_rank: usize,
    #[serde(skip)]
    pub hyper_conic: Option<HomPoly>,
    #[serde(skip)]
    pub simple_conic: Option<HomPoly>,
}

pub fn support_signature(a: &LineConfiguration) -> SupportSignature {
    let ctx = &a.ctx;
    let pts = a.support();
    let lines = rich_lines(ctx, &pts);
    let mut collinear: Vec<usize> = lines.iter().map(|l| l.len()).collect();
    collinear.sort_unstable_by(|x, y| y.cmp(x));
    let (hr, hc) = conic_through(ctx, &a.with_weight(2));
    let (sr, sc) = conic_through(ctx, &a.with_weight(1));
    SupportSignature {
        collinear,
        min_line_cover: min_line_cover(ctx, &pts),
        hyper_conic_rank: hr,
        simple_conic_rank: sr,
        hyper_conic: hc.filter(|_| hr == 5),
        simple_conic: sc.filter(|_| sr == 5),
    }
}

/// Fewest lines whose union contains all the points.
pub fn min_line_cover(ctx: &FieldCtx, pts: &[ProjPoint]) -> usize {
    let n = pts.len();
    if n == 0 {
        return 0;
    }
    // masks of the lines through each pair
    let mut masks: BTreeSet<u32> = BTreeSet::new();
    for i in 0..n {
        for j in i + 1..n {
            let m = (0..n)
                .filter(|&k| k == i || k == j || collinear(ctx, &pts[i], &pts[j], &pts[k]))
                .fold(0u32, |m, k| m | 1 << k);
            masks.insert(m);
        }
    }
    let masks: Vec<u32> = masks.into_iter().collect();
    let full = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let widest = masks.iter().map(|m| m.count_ones()).max().unwrap_or(1);
    (1..=n.div_ceil(2))
        .find(|&k| covers(&masks, widest, full, 0, k))
        .unwrap_or(n.div_ceil(2))
}

fn covers(masks: &[u32], widest: u32, full: u32, got: u32, left: usize) -> bool {
    if got == full {
        return true;
    }
    if (full & !got).count_ones() > widest * left as u32 {
        return false;
    }
    let first = (!got & full).trailing_zeros();
    let bit = 1u32 << first;
    // a line through only this point is never better than one through it and another
    let mut any = false;
    for &m in masks.iter().filter(|&&m| m & bit != 0) {
        any = true;
        if covers(masks, widest, full, got | m, left - 1) {
            return true;
        }
    }
    !any && covers(masks, widest, full, got | bit, left - 1)
}

/// How many of the flex points a map fixes.
pub fn fixed_flex_points(ctx: &FieldCtx, m: &ProjMap, records: &[FlexRecord]) -> usize {
    records
        .iter()
        .filter(|r| m.apply_point(ctx, &r.point) == r.point)
        .count()
}
