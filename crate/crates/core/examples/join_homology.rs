//! Betti numbers of the punctured join for small counts, with the existence verdict.

use singular_toda::regions::{existence_verdict, join_betti};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("M1 M2 M3   b0~ b1  verdict");
    for m1 in 1..=4 {
        for m2 in 1..=4 {
            for m3 in 0..=m1.min(m2) {
                let b = join_betti([m1, m2, m3])?;
                let v = existence_verdict([m1, m2, m3])?;
                println!("{m1:2} {m2:2} {m3:2}   {:3} {:2}  {v:?}", b.reduced_b0, b.b1);
            }
        }
    }
    Ok(())
}
