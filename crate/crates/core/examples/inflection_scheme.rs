//! Flexes of the Fermat quartic and of K.

use flexline::catalog::{build, CurveId, CurveSpec};
use flexline::report::fmt_point;

fn main() {
    let p: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(17);
    for id in [CurveId::F, CurveId::K] {
        let c = build(&CurveSpec::new(id, p)).unwrap();
        let s = c.inflection_scheme().unwrap();
        let (h, simple) = s.census();
        println!("{id} over F_{p}: {h} hyperflexes, {simple} simple flexes, field {}", s.field.spec());
        for r in &s.records {
            println!(
                "  point {:<24} line {:<24} contact {}",
                fmt_point(&s.field, &r.point),
                fmt_point(&s.field, &r.line),
                r.contact
            );
        }
    }
}
