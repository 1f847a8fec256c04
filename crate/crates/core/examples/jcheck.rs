//! j-invariant of the elliptic curve behind K's automorphisms.

use flexline::report::k_curve_j;

fn main() {
    for p in [7, 11, 13, 17, 19, 23] {
        let j = k_curve_j(p).unwrap();
        println!(
            "p = {p:>2}: j = {:>2} (35152/9 = {:>2}), extra automorphisms {}, points {}",
            j.j,
            j.expected,
            j.extra_automorphisms,
            j.intersection.join(" ")
        );
    }
}
