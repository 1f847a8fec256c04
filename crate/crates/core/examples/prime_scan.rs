//! Looks for primes where two catalog curves share a configuration.

use flexline::report::{cmd_scan, TheoremOptions};

fn main() {
    let max: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(19);
    let r = cmd_scan(max, &TheoremOptions::default());
    let scan = r.scan.as_ref().unwrap();
    for e in &scan.entries {
        println!("p = {:>2}: {:>2} curves, classes {:?}", e.characteristic, e.curves, e.coincidences);
    }
    println!("primes with coincidences: {:?}", scan.coincidence_primes);
}
