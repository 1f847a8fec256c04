//! Checks the named maps against the curves and their configurations.

use flexline::catalog::{CurveId, CurveSpec};
use flexline::report::{analyze, AnalyzeOptions};

fn main() {
    for spec in [
        CurveSpec::new(CurveId::K, 7),
        CurveSpec::new(CurveId::K, 13),
        CurveSpec::new(CurveId::Cplus, 19),
        CurveSpec::vu(13, -1),
        CurveSpec::new(CurveId::Ec313a, 13),
    ] {
        let a = analyze(&spec, &AnalyzeOptions::default()).unwrap();
        for c in a.named_map_checks().unwrap() {
            println!("{:<10} {:<8} {} (expected {})", spec.label(), c.status.as_str(), c.item, c.expected);
        }
    }
}
