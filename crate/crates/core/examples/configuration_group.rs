//! The configuration group of K in characteristic 13 is three times its
//! automorphism group.

use flexline::catalog::{build, CurveId, CurveSpec};
use flexline::config::{automorphism_group, curve_automorphisms, support_signature, LineConfiguration};

fn main() {
    let p: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(13);
    for id in [CurveId::F, CurveId::K, CurveId::V] {
        let c = match build(&CurveSpec::new(id, p)) {
            Ok(c) => c,
            Err(e) => {
                println!("{id}: {e}");
                continue;
            }
        };
        let cfg = LineConfiguration::from_flexes(&c.inflection_scheme().unwrap());
        let g = automorphism_group(&cfg).unwrap();
        let h = curve_automorphisms(&c, &g).unwrap();
        let sig = support_signature(&cfg);
        println!(
            "{id}: config group {} {:?}, curve group {} {:?}, line cover {}, weight-2 conic rank {}",
            g.order(),
            g.descriptor.orders,
            h.order(),
            h.descriptor.name(),
            sig.min_line_cover,
            sig.hyper_conic_rank
        );
    }
}
