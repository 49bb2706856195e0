//! Conventional hybrid NOMA (no backscatter) against the BackCom-assisted
//! scheme on the same channels. Without reflection, ordering the stronger
//! user second makes OMA optimal; ordering it first lets a hybrid point win.

use backcom_noma::two_user::{solve_conventional_two_user, solve_two_user, TwoUserInstance};

fn main() -> backcom_noma::Result<()> {
    let rate = 2.0;
    println!(
        "{:>8} {:>8} {:>12} {:>12} {:>12} {:>12}",
        "|h1|^2", "|h2|^2", "OMA", "conv", "pure NOMA", "BackCom"
    );
    for (h1, h2) in [(1.0, 4.0), (2.0, 2.0), (4.0, 1.0), (10.0, 1.0)] {
        let conv = solve_conventional_two_user(h1, h2, rate)?;
        // Same direct links, with a moderate reflected link for user 2.
        let backcom = solve_two_user(&TwoUserInstance::new(h2, h1, h2, rate)?)?;
        println!(
            "{h1:>8} {h2:>8} {:>12.6} {:>12.6} {:>12.6} {:>12.6}",
            conv.oma_total, conv.objective, conv.pure_noma_total, backcom.report.objective
        );
    }
    Ok(())
}
