//! Closed-form two-user solver: enumerate the six candidate solutions,
//! certify them against the KKT conditions and cross-check the winner with
//! the grid oracle.
//!
//! `cargo run --example two_user -- [gamma0 gamma1 gamma2 rate]`

use backcom_noma::two_user::{grid_oracle, solve_two_user, TwoUserInstance};

fn main() -> backcom_noma::Result<()> {
    let args: Vec<f64> = std::env::args()
        .skip(1)
        .map(|a| a.parse().expect("numeric argument"))
        .collect();
    let inst = match args.as_slice() {
        [g0, g1, g2, r] => TwoUserInstance::new(*g0, *g1, *g2, *r)?,
        _ => TwoUserInstance::new(1.0, 4.0, 1.0, std::f64::consts::LN_2)?,
    };
    println!("{inst:?}  eps = {:.6}  OMA total = {:.6}", inst.eps(), inst.oma_total());

    let sol = solve_two_user(&inst)?;
    println!(
        "\n{:<11} {:>10} {:>10} {:>10} {:>10}  feasible certified",
        "candidate", "p0", "p1", "p2", "total"
    );
    for c in &sol.candidates {
        println!(
            "{:<11} {:>10.6} {:>10.6} {:>10.6} {:>10.6}  {:<8} {}",
            c.kind.label(),
            c.p0,
            c.p1,
            c.p2,
            c.objective(),
            c.primal_feasible,
            c.kkt_certified
        );
    }
    println!(
        "\noptimal class: {}  total power {:.8}",
        sol.kind.label(),
        sol.report.objective
    );

    if let Some(g) = grid_oracle(&inst, 1_000_000) {
        println!(
            "grid oracle:   total {:.8} at ({:.5}, {:.5}, {:.5}), fine step {:.2e}",
            g.objective, g.p0, g.p1, g.p2, g.fine_step
        );
    }
    Ok(())
}
