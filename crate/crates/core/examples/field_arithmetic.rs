//! Extension fields, roots of unity and compatible embeddings.

use flexline::gf::{find_nth_root, make_prime_field, Embedding, FieldCtx};
use flexline::upoly::UPoly;

fn main() {
    let f13 = make_prime_field(13).unwrap();
    let (f169, i) = find_nth_root(&f13, &f13.from_i64(-1), 2, false).unwrap();
    println!("sqrt(-1) over {}: {}", f169.spec(), f169.fmt_element(&i));

    let f7 = make_prime_field(7).unwrap();
    let (f49, i7) = find_nth_root(&f7, &f7.from_i64(-1), 2, false).unwrap();
    println!("sqrt(-1) over {}: {}", f49.spec(), f49.fmt_element(&i7));

    // F_{7^2} sits inside F_{7^4} the same way whichever path is taken
    let f2401 = FieldCtx::canonical(7, 4).unwrap();
    let e = Embedding::new(&f49, &f2401).unwrap();
    let img = e.apply(&i7);
    println!("image in {}: {}", f2401.spec(), f2401.fmt_element(&img));
    assert_eq!(f2401.mul(&img, &img), f2401.from_i64(-1));

    let x4 = UPoly::from_i64s(&f7, &[1, 0, 0, 0, 1]);
    let (ext, roots) = x4.splitting_roots(&f7, 12).unwrap();
    let shown: Vec<String> = roots.iter().map(|(r, _)| ext.fmt_element(r)).collect();
    println!("roots of x^4 + 1 over {}: {}", ext.spec(), shown.join(", "));
}
