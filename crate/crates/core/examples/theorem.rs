//! Which catalog curves share a configuration of inflection lines.

use flexline::report::{cmd_theorem, TheoremOptions};

fn main() {
    let p: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(13);
    let r = cmd_theorem(p, &TheoremOptions::default());
    print!("{}", r.to_text());
}
