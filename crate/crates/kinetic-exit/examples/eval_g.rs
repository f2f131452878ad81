//! Tabulate the harmonic function g and check its defining properties:
//! the closed-form value at 0, the √z growth on the right, and the
//! super-exponential decay on the left.

use kinetic_exit::specfun::{continuation_splice_jump, g};

fn main() {
    println!("       z            g(z)");
    let mut z = -6.0;
    while z <= 6.0 + 1e-9 {
        println!("{z:>8.2}  {:>18.12e}", g(z));
        z += 1.0;
    }
    println!();
    println!("g(0)              = {:.15}  (exact 0.618391688566809)", g(0.0));
    println!("g(100)/sqrt(100)  = {:.6}   (-> 1 as z -> +inf)", g(100.0) / 10.0);
    println!("g(-8)             = {:.6e}    (~ (3/4) e^(-2*8^3/9) * 8^(-5/2))", g(-8.0));
    println!("table/series splice jump at z = -6: {:.3e}", continuation_splice_jump());
}
