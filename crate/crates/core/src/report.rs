//! The verification commands behind the `flexline` binary.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use crate::catalog::{self, CatalogError, CurveId, CurveSpec, ExpectedProfile, Provenance};
use crate::config::{
    automorphism_group, curve_automorphisms, fixed_flex_points, preserves_form, support_signature,
    transporters, ConfigError, GroupDescriptor, LineConfiguration, ProjGroup, SupportSignature,
};
use crate::curve::{CurveError, InflectionScheme, PlaneQuartic, SchemeOptions};
use crate::gf::{compositum, is_prime, make_prime_field, Embedding, FieldCtx, FieldError};
use crate::mpoly::{resultant_z, HomPoly, MpolyError};
use crate::proj::{j_from_four_points, parametrize_conic, ProjError, ProjMap, ProjPoint, P1};
use crate::upoly::UPoly;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Proj(#[from] ProjError),
    #[error(transparent)]
    Poly(#[from] MpolyError),
    #[error("{0}")]
    Precondition(String),
}

impl ReportError {
    pub fn kind(&self) -> &'static str {
        match self {
            ReportError::Catalog(CatalogError::SingularParameter(_)) => "SingularParameter",
            ReportError::Catalog(CatalogError::InadmissibleCharacteristic { .. }) => "InadmissibleCharacteristic",
            ReportError::Catalog(_) => "Catalog",
            ReportError::Curve(_) => "Curve",
            ReportError::Config(ConfigError::DegenerateConfiguration) => "DegenerateConfiguration",
            ReportError::Config(ConfigError::GroupTooLarge(_)) => "GroupTooLarge",
            ReportError::Config(_) => "Config",
            ReportError::Field(_) => "Field",
            ReportError::Proj(_) => "Projective",
            ReportError::Poly(_) => "Polynomial",
            ReportError::Precondition(_) => "Precondition",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Finding,
    Fail,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Finding => "FINDING",
            Status::Fail => "FAIL",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub item: String,
    pub status: Status,
    pub expected: String,
    pub computed: String,
}

impl Check {
    fn hard(item: impl Into<String>, ok: bool, expected: impl ToString, computed: impl ToString) -> Check {
        Check {
            item: item.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            expected: expected.to_string(),
            computed: computed.to_string(),
        }
    }

    /// A mismatch against a char-0 expectation is a finding, not a failure.
    fn against(item: impl Into<String>, ok: bool, prov: Provenance, expected: impl ToString, computed: impl ToString) -> Check {
        let mut c = Check::hard(item, ok, expected, computed);
        if !ok && prov == Provenance::CharZero {
            c.status = Status::Finding;
        }
        c
    }

    fn finding(item: impl Into<String>, computed: impl ToString) -> Check {
        Check {
            item: item.into(),
            status: Status::Finding,
            expected: String::new(),
            computed: computed.to_string(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GroupSummary {
    pub order: usize,
    pub abelian: bool,
    pub element_orders: BTreeMap<usize, usize>,
    pub name: Option<&'static str>,
}

impl From<&GroupDescriptor> for GroupSummary {
    fn from(d: &GroupDescriptor) -> Self {
        GroupSummary {
            order: d.order,
            abelian: d.abelian,
            element_orders: d.orders.clone(),
            name: d.name(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SignatureSummary {
    pub collinear: Vec<usize>,
    pub min_line_cover: usize,
    pub hyper_conic_rank: usize,
    pub simple_conic_rank: usize,
    pub hyper_conic: Option<String>,
    pub simple_conic: Option<String>,
}

impl From<&SupportSignature> for SignatureSummary {
    fn from(s: &SupportSignature) -> Self {
        SignatureSummary {
            collinear: s.collinear.clone(),
            min_line_cover: s.min_line_cover,
            hyper_conic_rank: s.hyper_conic_rank,
            simple_conic_rank: s.simple_conic_rank,
            hyper_conic: s.hyper_conic.as_ref().map(|c| c.to_string()),
            simple_conic: s.simple_conic.as_ref().map(|c| c.to_string()),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FlexSummary {
    pub point: String,
    pub line: String,
    pub weight: u32,
    pub contact: u32,
}

/// Per-curve results as they appear in reports.
#[derive(Clone, Debug, Serialize)]
pub struct CurveReport {
    pub label: String,
    pub curve: CurveId,
    pub characteristic: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u: Option<u64>,
    pub equation: String,
    pub base_field: String,
    pub flex_field: String,
    pub smooth: bool,
    pub hyperflexes: usize,
    pub simple_flexes: usize,
    pub total_weight: u32,
    pub anomalies: usize,
    pub config_group: GroupSummary,
    pub curve_group: GroupSummary,
    pub signature: SignatureSummary,
    /// Most flex points fixed by a non-identity curve automorphism.
    pub max_fixed_flexes: usize,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flexes: Option<Vec<FlexSummary>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub configuration: Option<Value>,
}

/// Everything computed for one curve.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub spec: CurveSpec,
    pub curve: PlaneQuartic,
    pub scheme: InflectionScheme,
    pub config: LineConfiguration,
    pub config_group: ProjGroup,
    pub curve_group: ProjGroup,
    pub signature: SupportSignature,
    pub expected: ExpectedProfile,
    pub smooth: bool,
}

#[derive(Clone, Debug, Default)]
pub struct AnalyzeOptions {
    pub seed: Option<u64>,
    /// Work over this field instead of the curve's own.
    pub field: Option<FieldCtx>,
    /// Include flex records and the configuration in the report.
    pub details: bool,
    pub named_maps: bool,
}

pub fn analyze(spec: &CurveSpec, opts: &AnalyzeOptions) -> Result<Analysis, ReportError> {
    let mut curve = catalog::build(spec)?;
    if let Some(f) = &opts.field {
        curve = curve.embed(f)?;
    }
    let smooth = match opts.seed {
        Some(s) => curve.is_smooth_seeded(s)?,
        None => curve.is_smooth()?,
    };
    let scheme = curve.inflection_scheme_with(&SchemeOptions { seed: opts.seed })?;
    let config = LineConfiguration::from_flexes(&scheme);
    let config_group = automorphism_group(&config)?;
    let curve_group = curve_automorphisms(&curve, &config_group)?;
    let signature = support_signature(&config);
    let expected = catalog::expected_profile(spec)?;
    Ok(Analysis {
        spec: *spec,
        curve,
        scheme,
        config,
        config_group,
        curve_group,
        signature,
        expected,
        smooth,
    })
}

fn expected_group_name(order: usize) -> Option<&'static str> {
    match order {
        6 => Some("S3"),
        8 => Some("D4"),
        16 => Some("D8"),
        24 => Some("S4"),
        _ => None,
    }
}

impl Analysis {
    pub fn census(&self) -> (usize, usize) {
        self.scheme.census()
    }

    pub fn max_fixed_flexes(&self) -> usize {
        let ctx = &self.config_group.ctx;
        self.curve_group
            .elements
            .iter()
            .filter(|m| !m.is_identity(ctx))
            .map(|m| fixed_flex_points(ctx, m, &self.scheme.records))
            .max()
            .unwrap_or(0)
    }

    fn conic_check(&self, item: &str, computed: &Option<HomPoly>, rank: usize, want: &Option<HomPoly>) -> Check {
        let prov = self.expected.provenance;
        match want {
            None => Check::against(item, rank == 6, prov, "no conic (rank 6)", format!("rank {rank}")),
            Some(w) => {
                let ctx = &self.config.ctx;
                let w = w.embed(&Embedding::new(&make_prime_field(self.spec.p).unwrap(), ctx).unwrap());
                let ok = computed.as_ref().is_some_and(|c| c.proportional(ctx, &w));
                let got = computed.as_ref().map_or(format!("rank {rank}"), |c| c.to_string());
                Check::against(item, ok, prov, w.normalized(ctx), got)
            }
        }
    }

    pub fn checks(&self) -> Vec<Check> {
        let e = &self.expected;
        let prov = e.provenance;
        let (h, s) = self.census();
        let cfg = &self.config_group.descriptor;
        let cur = &self.curve_group.descriptor;
        let mut out = vec![
            Check::hard("smooth", self.smooth, true, self.smooth),
            Check::hard("total weight", self.scheme.total_weight() == 24, 24, self.scheme.total_weight()),
            Check::hard("flex multiplicities agree", self.scheme.anomalies.is_empty(), 0, self.scheme.anomalies.len()),
            Check::against("flex census", (h, s) == (e.hyper, e.simple), prov, format!("{}/{}", e.hyper, e.simple), format!("{h}/{s}")),
            Check::against("config group order", cfg.order == e.config_order, prov, e.config_order, cfg.order),
            Check::against("curve group order", cur.order == e.curve_order, prov, e.curve_order, cur.order),
            Check::hard(
                "curve group inside config group",
                self.curve_group.is_subgroup_of(&self.config_group),
                true,
                self.curve_group.is_subgroup_of(&self.config_group),
            ),
            Check::hard("non-identity automorphisms fix at most 5 flexes", self.max_fixed_flexes() <= 5, "<= 5", self.max_fixed_flexes()),
        ];
        for (what, d, want) in [("config group", cfg, e.config_order), ("curve group", cur, e.curve_order)] {
            if d.order == want {
                if let Some(name) = expected_group_name(want) {
                    let got = d.name().unwrap_or("unnamed");
                    out.push(Check::against(format!("{what} structure"), got == name, prov, name, got));
                }
            }
        }
        if cfg.order > cur.order && cur.order > 0 && cfg.order % cur.order == 0 {
            out.push(Check::finding("config group excess", format!("index {} excess", cfg.order / cur.order)));
        }
        let sig = &self.signature;
        if let Some(three) = e.covered_by_three_lines {
            let ok = (sig.min_line_cover <= 3) == three;
            let want = if three { "3" } else { "> 3" };
            out.push(Check::against("minimal line cover", ok, prov, want, sig.min_line_cover));
        }
        if let Some(want) = &e.hyper_conic {
            out.push(self.conic_check("weight-2 conic", &sig.hyper_conic, sig.hyper_conic_rank, want));
        }
        if let Some(want) = &e.simple_conic {
            let want = Some(want.clone());
            out.push(self.conic_check("weight-1 conic", &sig.simple_conic, sig.simple_conic_rank, &want));
        }
        out
    }

    /// Checks the flags attached to the named maps.
    pub fn named_map_checks(&self) -> Result<Vec<Check>, ReportError> {
        let mut out = Vec::new();
        for nm in catalog::named_maps(&self.spec)? {
            let item = format!("named map {}", nm.name);
            let Ok(l) = compositum(&self.config.ctx, &nm.field) else {
                out.push(Check::finding(item, "not checked: common field too large"));
                continue;
            };
            let m = nm.map.embed(&l, &Embedding::new(&nm.field, &l)?);
            let f = self.curve.embed(&l)?.f;
            let cfg = self.config.embed(&l)?;
            let curve_ok = preserves_form(&l, &f, &m);
            let config_ok = cfg.is_stabilized_by(&m);
            let flag = |b: bool| if b { "yes" } else { "no" };
            out.push(Check::hard(
                format!("{item} curve automorphism"),
                curve_ok == nm.curve_automorphism,
                flag(nm.curve_automorphism),
                flag(curve_ok),
            ));
            out.push(Check::hard(
                format!("{item} stabilizes configuration"),
                config_ok == nm.config_automorphism,
                flag(nm.config_automorphism),
                flag(config_ok),
            ));
        }
        Ok(out)
    }

    pub fn report(&self, details: bool) -> CurveReport {
        let (h, s) = self.census();
        let ctx = &self.scheme.field;
        let flexes = details.then(|| {
            self.scheme
                .records
                .iter()
                .map(|r| FlexSummary {
                    point: fmt_point(ctx, &r.point),
                    line: fmt_point(ctx, &r.line),
                    weight: r.weight,
                    contact: r.contact,
                })
                .collect()
        });
        CurveReport {
            label: self.spec.label(),
            curve: self.spec.id,
            characteristic: self.spec.p,
            u: self.spec.u,
            equation: self.curve.f.to_string(),
            base_field: self.curve.ctx.spec(),
            flex_field: ctx.spec(),
            smooth: self.smooth,
            hyperflexes: h,
            simple_flexes: s,
            total_weight: self.scheme.total_weight(),
            anomalies: self.scheme.anomalies.len(),
            config_group: (&self.config_group.descriptor).into(),
            curve_group: (&self.curve_group.descriptor).into(),
            signature: (&self.signature).into(),
            max_fixed_flexes: self.max_fixed_flexes(),
            checks: self.checks(),
            flexes,
            configuration: details.then(|| self.config.to_json()),
        }
    }
}

pub fn fmt_point(ctx: &FieldCtx, p: &ProjPoint) -> String {
    let c: Vec<String> = p.coords().iter().map(|x| ctx.fmt_element(x)).collect();
    format!("[{}]", c.join(","))
}

pub fn fmt_map(ctx: &FieldCtx, m: &ProjMap) -> String {
    let rows: Vec<String> = m
        .matrix()
        .iter()
        .map(|r| format!("[{}]", r.iter().map(|x| ctx.fmt_element(x)).collect::<Vec<_>>().join(",")))
        .collect();
    format!("[{}]", rows.join(","))
}

/// Pairwise equality of configurations and the classes it induces.
#[derive(Clone, Debug, Serialize)]
pub struct Equivalence {
    pub labels: Vec<String>,
    /// Row `i` has a `1` in column `j` when the configurations are equal.
    pub matrix: Vec<String>,
    pub classes: Vec<Vec<String>>,
    pub witnesses: Vec<Witness>,
}

/// A map `M` with `F_to(M v) ∝ F_from(v)`, i.e. carrying one curve onto the other.
#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub from: String,
    pub to: String,
    pub field: String,
    pub map: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanEntry {
    pub characteristic: u64,
    pub curves: usize,
    pub coincidences: Vec<Vec<String>>,
    pub fails: Vec<String>,
    pub findings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Scan {
    pub max: u64,
    pub primes: Vec<u64>,
    pub coincidence_primes: Vec<u64>,
    pub entries: Vec<ScanEntry>,
}

#[derive(Clone, Debug, Serialize)]
pub struct JReport {
    pub characteristic: u64,
    pub field: String,
    pub intersection: Vec<String>,
    pub base_point: String,
    pub parameters: Vec<String>,
    pub j: String,
    pub expected: String,
    /// Order of the extra automorphism group of the elliptic curve.
    pub extra_automorphisms: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ErrorInfo {
    pub kind: String,
    pub message: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub excluded: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub curves: Vec<CurveReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equivalence: Option<Equivalence>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scan: Option<Scan>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jcheck: Option<JReport>,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorInfo>,
}

impl Report {
    fn new(command: impl Into<String>) -> Report {
        Report {
            command: command.into(),
            field: None,
            excluded: Vec::new(),
            curves: Vec::new(),
            equivalence: None,
            scan: None,
            jcheck: None,
            checks: Vec::new(),
            notes: Vec::new(),
            error: None,
        }
    }

    pub fn from_error(command: impl Into<String>, e: &ReportError) -> Report {
        let mut r = Report::new(command);
        r.error = Some(ErrorInfo {
            kind: e.kind().to_string(),
            message: e.to_string(),
        });
        r
    }

    /// Every check, including the per-curve ones.
    pub fn all_checks(&self) -> impl Iterator<Item = (Option<&str>, &Check)> {
        self.curves
            .iter()
            .flat_map(|c| c.checks.iter().map(move |k| (Some(c.label.as_str()), k)))
            .chain(self.checks.iter().map(|k| (None, k)))
    }

    pub fn status(&self) -> Status {
        self.all_checks().map(|(_, c)| c.status).max().unwrap_or(Status::Pass)
    }

    /// 0 when nothing failed, 1 on a failed check, 2 on an error.
    pub fn exit_code(&self) -> i32 {
        if self.error.is_some() {
            2
        } else if self.status() == Status::Fail {
            1
        } else {
            0
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{}", self.command);
        if let Some(e) = &self.error {
            let _ = writeln!(s, "ERROR {}: {}", e.kind, e.message);
            return s;
        }
        if let Some(f) = &self.field {
            let _ = writeln!(s, "field {f}");
        }
        for x in &self.excluded {
            let _ = writeln!(s, "excluded {x}");
        }
        for c in &self.curves {
            let _ = writeln!(
                s,
                "{:<12} {:>2}/{:<2} config {:>3} curve {:>3} cover {} field {}",
                c.label,
                c.hyperflexes,
                c.simple_flexes,
                c.config_group.order,
                c.curve_group.order,
                c.signature.min_line_cover,
                c.flex_field
            );
            for k in c.checks.iter().filter(|k| k.status != Status::Pass) {
                let _ = writeln!(s, "  {}", fmt_check(k));
            }
        }
        if let Some(eq) = &self.equivalence {
            for cl in &eq.classes {
                let _ = writeln!(s, "class {{{}}}", cl.join(", "));
            }
            for w in &eq.witnesses {
                let _ = writeln!(s, "  {} -> {}: {}", w.from, w.to, w.map.as_deref().unwrap_or("none"));
            }
        }
        if let Some(sc) = &self.scan {
            for e in &sc.entries {
                let cl: Vec<String> = e.coincidences.iter().map(|c| format!("{{{}}}", c.join(","))).collect();
                let _ = writeln!(
                    s,
                    "p={:<3} curves {:>3}  fails {:>2}  findings {:>2}  classes {}",
                    e.characteristic,
                    e.curves,
                    e.fails.len(),
                    e.findings.len(),
                    if cl.is_empty() { "-".to_string() } else { cl.join(" ") }
                );
                if let Some(err) = &e.error {
                    let _ = writeln!(s, "  error: {err}");
                }
            }
            let _ = writeln!(s, "coincidence primes {:?}", sc.coincidence_primes);
        }
        if let Some(j) = &self.jcheck {
            let _ = writeln!(s, "j = {} (expected {}) over {}", j.j, j.expected, j.field);
        }
        for k in &self.checks {
            let _ = writeln!(s, "{}", fmt_check(k));
        }
        for n in &self.notes {
            let _ = writeln!(s, "note: {n}");
        }
        let _ = writeln!(s, "{}", self.status().as_str());
        s
    }
}

fn fmt_check(k: &Check) -> String {
    if k.expected.is_empty() {
        format!("{} {}: {}", k.status.as_str(), k.item, k.computed)
    } else {
        format!("{} {}: expected {}, got {}", k.status.as_str(), k.item, k.expected, k.computed)
    }
}

pub fn cmd_analyze(spec: &CurveSpec, opts: &AnalyzeOptions) -> Report {
    let command = format!("analyze --curve {} --char {}{}", spec.id, spec.p, spec.u.map_or(String::new(), |u| format!(" --u {u}")));
    let run = || -> Result<Report, ReportError> {
        let a = analyze(spec, opts)?;
        let mut r = Report::new(command.clone());
        r.field = Some(a.curve.ctx.spec());
        let mut cr = a.report(opts.details);
        if opts.named_maps {
            cr.checks.extend(a.named_map_checks()?);
        }
        r.curves.push(cr);
        Ok(r)
    };
    run().unwrap_or_else(|e| Report::from_error(command.clone(), &e))
}

/// The `u` values swept at `p`: all of them up to 37, else the first 36.
pub fn vu_sample(p: u64) -> Vec<u64> {
    (2..p.min(38)).collect()
}

#[derive(Clone, Debug, Default)]
pub struct TheoremOptions {
    /// Overrides [`vu_sample`].
    pub u_values: Option<Vec<u64>>,
    pub seed: Option<u64>,
}

/// The curves compared at `p`, with the inadmissible ones and the reason.
pub fn representatives(p: u64, u_values: &[u64]) -> (Vec<CurveSpec>, Vec<String>) {
    let mut ids = vec![CurveId::F];
    if p == 13 {
        ids.extend([CurveId::K1, CurveId::K2, CurveId::K3]);
    } else {
        ids.push(CurveId::K);
    }
    ids.extend([CurveId::Cplus, CurveId::Cminus, CurveId::V]);
    let mut specs: Vec<CurveSpec> = ids.iter().map(|&id| CurveSpec::new(id, p)).collect();
    specs.extend(u_values.iter().map(|&u| CurveSpec::vu(p, u as i64)));
    specs.extend([CurveSpec::new(CurveId::Ec313a, p), CurveSpec::new(CurveId::Ec313b, p)]);
    let mut keep = Vec::new();
    let mut excluded = Vec::new();
    let mut seen: Vec<HomPoly> = Vec::new();
    for s in specs {
        match catalog::build(&s) {
            Ok(c) => {
                // Ec313a is V_{-1}; keep whichever comes first
                if seen.contains(&c.f) {
                    continue;
                }
                seen.push(c.f);
                keep.push(s);
            }
            Err(e) => excluded.push(format!("{}: {e}", s.label())),
        }
    }
    (keep, excluded)
}

/// Runs the per-curve analyses for the theorem at `p`.
pub fn theorem_analyses(p: u64, opts: &TheoremOptions) -> Result<(Vec<Analysis>, Vec<String>), ReportError> {
    if !is_prime(p) || p < 5 {
        return Err(ReportError::Precondition(format!("characteristic must be a prime >= 5, got {p}")));
    }
    let us = opts.u_values.clone().unwrap_or_else(|| vu_sample(p));
    let (specs, excluded) = representatives(p, &us);
    if specs.len() < 2 {
        return Err(ReportError::Precondition(format!("fewer than two admissible curves in characteristic {p}")));
    }
    let aopts = AnalyzeOptions {
        seed: opts.seed,
        ..Default::default()
    };
    let analyses: Result<Vec<Analysis>, ReportError> = specs.par_iter().map(|s| analyze(s, &aopts)).collect();
    Ok((analyses?, excluded))
}

fn expected_classes(p: u64) -> Vec<Vec<String>> {
    if p == 13 {
        vec![
            vec!["K1".into(), "K2".into(), "K3".into()],
            vec!["Vu(u=12)".into(), "Ec313b".into()],
        ]
    } else {
        Vec::new()
    }
}

/// Equality classes of configurations, members in input order.
pub fn coincidences(analyses: &[Analysis]) -> (Vec<String>, Vec<Vec<usize>>) {
    let n = analyses.len();
    let mut rows = Vec::with_capacity(n);
    let mut class_of: Vec<Option<usize>> = vec![None; n];
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        let mut row = String::with_capacity(n);
        for j in 0..n {
            let eq = analyses[i].config == analyses[j].config;
            row.push(if eq { '1' } else { '0' });
            if eq && j < i && class_of[i].is_none() {
                let k = class_of[j].unwrap();
                classes[k].push(i);
                class_of[i] = Some(k);
            }
        }
        if class_of[i].is_none() {
            class_of[i] = Some(classes.len());
            classes.push(vec![i]);
        }
        rows.push(row);
    }
    (rows, classes.into_iter().filter(|c| c.len() > 1).collect())
}

/// A map in the common configuration group carrying curve `a` onto curve `b`.
pub fn curve_witness(a: &Analysis, b: &Analysis) -> Result<Option<ProjMap>, ReportError> {
    let ctx = &a.config.ctx;
    let ts = transporters(&a.config, &b.config)?;
    let fa = a.curve.embed(ctx)?.f;
    let fb = b.curve.embed(ctx)?.f;
    Ok(ts.into_iter().find(|m| fb.substitute(ctx, m.matrix()).proportional(ctx, &fa)))
}

pub fn cmd_theorem(p: u64, opts: &TheoremOptions) -> Report {
    let command = format!("theorem --char {p}");
    let run = || -> Result<Report, ReportError> {
        let (analyses, excluded) = theorem_analyses(p, opts)?;
        let mut r = Report::new(command.clone());
        r.field = Some(make_prime_field(p)?.spec());
        r.excluded = excluded;
        r.curves = analyses.iter().map(|a| a.report(false)).collect();
        let labels: Vec<String> = analyses.iter().map(|a| a.spec.label()).collect();
        let (matrix, classes) = coincidences(&analyses);
        let mut witnesses = Vec::new();
        for cl in &classes {
            let a = &analyses[cl[0]];
            for &j in &cl[1..] {
                let m = curve_witness(a, &analyses[j])?;
                witnesses.push(Witness {
                    from: labels[cl[0]].clone(),
                    to: labels[j].clone(),
                    field: a.config.ctx.spec(),
                    map: m.map(|m| fmt_map(&a.config.ctx, &m)),
                });
            }
        }
        let named: Vec<Vec<String>> = classes
            .iter()
            .map(|c| c.iter().map(|&i| labels[i].clone()).collect())
            .collect();
        let sorted = |mut v: Vec<Vec<String>>| {
            for c in &mut v {
                c.sort();
            }
            v.sort();
            v
        };
        let want = expected_classes(p);
        r.checks.push(Check::hard(
            "coincidence classes",
            sorted(named.clone()) == sorted(want.clone()),
            format!("{want:?}"),
            format!("{named:?}"),
        ));
        let missing = witnesses.iter().filter(|w| w.map.is_none()).count();
        r.checks.push(Check::hard("classes are projectively equivalent", missing == 0, 0, format!("{missing} without witness")));
        let symmetric = (0..matrix.len()).all(|i| {
            (0..matrix.len()).all(|j| matrix[i].as_bytes()[j] == matrix[j].as_bytes()[i]) && matrix[i].as_bytes()[i] == b'1'
        });
        r.checks.push(Check::hard("equality matrix symmetric with full diagonal", symmetric, true, symmetric));
        r.checks.push(separating_invariant(p, &analyses));
        if p == 13 {
            let v = 1215 + 190 - 1;
            r.notes.push(format!("1215u^2 - 190u - 1 at u = -1 is {v} = 2^2*3^3*13, which vanishes only in characteristic 13"));
        }
        r.notes.push("agreement across primes is evidence for characteristic 0, not a proof".into());
        r.equivalence = Some(Equivalence {
            labels,
            matrix,
            classes: named,
            witnesses,
        });
        Ok(r)
    };
    run().unwrap_or_else(|e| Report::from_error(command.clone(), &e))
}

/// The weight-1 conic `(27u+5) z² + 32 xy` tells the `V_u` apart.
fn separating_invariant(p: u64, analyses: &[Analysis]) -> Check {
    let fp = make_prime_field(p).unwrap();
    let mut seen: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    let mut off = Vec::new();
    for a in analyses.iter().filter(|a| a.spec.id == CurveId::Vu) {
        let u = a.spec.u.unwrap();
        let inv = fp.from_u64((27 * u + 5) % p);
        let key = fp.index(&inv) as u64;
        seen.entry(key).or_default().push(u);
        let ctx = &a.config.ctx;
        let want = HomPoly::from_elements(ctx, 2, &[(ctx.from_u64(27 * u + 5), (0, 0, 2)), (ctx.from_i64(32), (1, 1, 0))]);
        if !a.signature.simple_conic.as_ref().is_some_and(|c| c.proportional(ctx, &want)) {
            off.push(u);
        }
    }
    let clash: Vec<&Vec<u64>> = seen.values().filter(|v| v.len() > 1).collect();
    let computed = if off.is_empty() && clash.is_empty() {
        "distinct".to_string()
    } else {
        format!("conic differs for u in {off:?}; collisions {clash:?}")
    };
    let mut c = Check::hard("27u+5 separates the V_u", off.is_empty() && clash.is_empty(), "distinct", computed);
    if !off.is_empty() && clash.is_empty() && !matches!(p, 7 | 13) {
        c.status = Status::Finding;
    }
    c
}

/// Primes `5 ≤ p ≤ max`.
pub fn scan_primes(max: u64) -> Vec<u64> {
    (5..=max).filter(|&p| is_prime(p)).collect()
}

pub const SCAN_BOUND: u64 = 50;

pub fn cmd_scan(max: u64, opts: &TheoremOptions) -> Report {
    let command = format!("scan --max {max}");
    if max > SCAN_BOUND {
        let e = ReportError::Precondition(format!("--max is limited to {SCAN_BOUND}"));
        return Report::from_error(command, &e);
    }
    let primes = scan_primes(max);
    let entries: Vec<ScanEntry> = primes
        .par_iter()
        .map(|&p| {
            let r = cmd_theorem(p, opts);
            let pick = |st: Status| -> Vec<String> {
                r.all_checks()
                    .filter(|(_, c)| c.status == st)
                    .map(|(l, c)| match l {
                        Some(l) => format!("{l}: {} (expected {}, got {})", c.item, c.expected, c.computed),
                        None => format!("{} (expected {}, got {})", c.item, c.expected, c.computed),
                    })
                    .collect()
            };
            ScanEntry {
                characteristic: p,
                curves: r.curves.len(),
                coincidences: r.equivalence.as_ref().map(|e| e.classes.clone()).unwrap_or_default(),
                fails: pick(Status::Fail),
                findings: pick(Status::Finding),
                error: r.error.as_ref().map(|e| format!("{}: {}", e.kind, e.message)),
            }
        })
        .collect();
    let coincidence_primes: Vec<u64> = entries
        .iter()
        .filter(|e| !e.coincidences.is_empty())
        .map(|e| e.characteristic)
        .collect();
    let want: Vec<u64> = primes.iter().copied().filter(|&p| p == 13).collect();
    let mut r = Report::new(command);
    r.checks.push(Check::hard(
        "coincidence primes",
        coincidence_primes == want,
        format!("{want:?}"),
        format!("{coincidence_primes:?}"),
    ));
    for e in &entries {
        if let Some(err) = &e.error {
            r.checks.push(Check::hard(format!("theorem at {}", e.characteristic), false, "no error", err));
        } else {
            let st = if !e.fails.is_empty() {
                Status::Fail
            } else if !e.findings.is_empty() {
                Status::Finding
            } else {
                Status::Pass
            };
            r.checks.push(Check {
                item: format!("theorem at {}", e.characteristic),
                status: st,
                expected: "all checks pass".into(),
                computed: format!("{} fails, {} findings", e.fails.len(), e.findings.len()),
            });
        }
    }
    r.scan = Some(Scan {
        max,
        primes,
        coincidence_primes,
        entries,
    });
    r
}

/// `j(E)` for the double cover of `D₁ = {3x²+y²+z² = 0}` branched over `D₁ ∩ D₂`.
pub fn k_curve_j(p: u64) -> Result<JReport, ReportError> {
    if !is_prime(p) || p < 7 {
        return Err(ReportError::Precondition(format!("need a prime p > 5, got {p}")));
    }
    let fp = make_prime_field(p)?;
    let d1 = HomPoly::parse(&fp, "3*x^2 + y^2 + z^2")?;
    let d2 = HomPoly::parse(&fp, "x^2 + 3*y^2 + z^2")?;
    let points = conic_intersection(&fp, &d1, &d2)?;
    if points.len() != 4 {
        return Err(ReportError::Precondition(format!("D1 and D2 meet in {} points", points.len())));
    }
    let (l, pts) = points_over_common_field(&points)?;
    // origin above [1, 1, 2i]
    let base = *pts
        .iter()
        .find(|q| q.coords()[1] == l.one())
        .unwrap_or(&pts[0]);
    let d1l = d1.embed(&Embedding::new(&fp, &l)?);
    let param = parametrize_conic(&l, &d1l, &base)?;
    let ts: Vec<P1> = pts.iter().map(|q| param.parameter(&l, q)).collect();
    let j = j_from_four_points(&l, &[ts[0], ts[1], ts[2], ts[3]])?;
    let expected = fp.div(&fp.from_i64(35152), &fp.from_i64(9)).unwrap();
    let expected_l = Embedding::new(&fp, &l)?.apply(&expected);
    let extra = if j == l.zero() {
        3
    } else if j == l.from_i64(1728) {
        2
    } else {
        1
    };
    let fmt_p1 = |t: &P1| match t {
        P1::Finite(x) => l.fmt_element(x),
        P1::Infinity => "inf".to_string(),
    };
    Ok(JReport {
        characteristic: p,
        field: l.spec(),
        intersection: pts.iter().map(|q| fmt_point(&l, q)).collect(),
        base_point: fmt_point(&l, &base),
        parameters: ts.iter().map(fmt_p1).collect(),
        j: l.fmt_element(&j),
        expected: if expected_l == j { l.fmt_element(&j) } else { fp.fmt_element(&expected) },
        extra_automorphisms: extra,
    })
}

/// Points of `{F = G = 0}` with their fields, via the `z`-resultant.
fn conic_intersection(ctx: &FieldCtx, f: &HomPoly, g: &HomPoly) -> Result<Vec<(FieldCtx, ProjPoint)>, ReportError> {
    let r = resultant_z(ctx, f, g)?;
    let mut xs: Vec<(FieldCtx, [crate::gf::FieldElement; 2])> = Vec::new();
    if !r.poly.is_zero() {
        let (ext, roots) = r.poly.splitting_roots(ctx, crate::gf::MAX_DEGREE)?;
        for (t, _) in roots {
            xs.push((ext.clone(), [t, ext.one()]));
        }
    }
    if r.infinity_multiplicity() > 0 {
        xs.push((ctx.clone(), [ctx.one(), ctx.zero()]));
    }
    let mut out = Vec::new();
    for (k, [x0, y0]) in xs {
        let e = Embedding::new(ctx, &k)?;
        let (fk, gk) = (f.embed(&e), g.embed(&e));
        let h: UPoly = fk.fiber(&k, &x0, &y0).gcd(&k, &gk.fiber(&k, &x0, &y0));
        let (kz, zs) = h.splitting_roots(&k, crate::gf::MAX_DEGREE)?;
        let up = Embedding::new(&k, &kz)?;
        for (z, _) in zs {
            out.push((kz.clone(), ProjPoint::new(&kz, [up.apply(&x0), up.apply(&y0), z])?));
        }
    }
    Ok(out)
}

fn points_over_common_field(points: &[(FieldCtx, ProjPoint)]) -> Result<(FieldCtx, Vec<ProjPoint>), ReportError> {
    let mut l = points[0].0.clone();
    for (k, _) in &points[1..] {
        if k.spec() != l.spec() {
            l = compositum(&l, k)?;
        }
    }
    let mut pts: Vec<ProjPoint> = points
        .iter()
        .map(|(k, q)| Ok(q.embed(&l, &Embedding::new(k, &l)?)))
        .collect::<Result<_, ReportError>>()?;
    pts.sort();
    pts.dedup();
    Ok((l, pts))
}

pub fn cmd_jcheck(p: u64) -> Report {
    let command = format!("jcheck --char {p}");
    match k_curve_j(p) {
        Err(e) => Report::from_error(command, &e),
        Ok(j) => {
            let mut r = Report::new(command);
            r.field = Some(j.field.clone());
            r.checks.push(Check::hard("j = 35152/9", j.j == j.expected, &j.expected, &j.j));
            let special = match p {
                7 => Some(("j = 1728 in characteristic 7", (1728 % 7).to_string(), 2)),
                13 => Some(("j = 0 in characteristic 13", "0".to_string(), 3)),
                _ => None,
            };
            match special {
                Some((item, want, g)) => {
                    r.checks.push(Check::hard(item, j.j == want, &want, &j.j));
                    r.checks.push(Check::hard("extra automorphisms", j.extra_automorphisms == g, g, j.extra_automorphisms));
                }
                None => r.checks.push(Check::hard(
                    "j is neither 0 nor 1728",
                    j.extra_automorphisms == 1,
                    "neither",
                    &j.j,
                )),
            }
            r.jcheck = Some(j);
            r
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn j_examples() {
        assert_eq!(k_curve_j(7).unwrap().j, "6");
        assert_eq!(k_curve_j(13).unwrap().j, "0");
        let j = k_curve_j(11).unwrap();
        // 35152 = 7 (mod 11), 9^-1 = 5
        assert_eq!(j.j, "2");
        assert_eq!(j.extra_automorphisms, 1);
    }

    #[test]
    fn jcheck_rejects_small_primes() {
        assert_eq!(cmd_jcheck(5).exit_code(), 2);
    }

    #[test]
    fn singular_parameter_is_a_structured_error() {
        let r = cmd_analyze(&CurveSpec::vu(11, 1), &AnalyzeOptions::default());
        assert_eq!(r.exit_code(), 2);
        assert_eq!(r.error.unwrap().kind, "SingularParameter");
    }

    #[test]
    fn scan_below_five_is_empty() {
        let r = cmd_scan(4, &TheoremOptions::default());
        assert!(r.scan.as_ref().unwrap().primes.is_empty());
        assert_eq!(r.exit_code(), 0);
    }
}
