//! Training cost of the polynomial model against conventional reservoirs.

use ngrc::baseline::{estimate_cost, reference_cost_rows, CostParams};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    for row in reference_cost_rows() {
        println!(
            "{:<14} {:<60} speedup {:>10.3e}  quoted {}",
            row.task,
            row.label,
            estimate_cost(&row.ng, &row.rc)?,
            row.quoted
        );
    }
    let ng = CostParams::ngrc(2.0, 400.0, 28.0, 21.0);
    let rc = CostParams::reservoir(1000.0, 1000.0, 100.0, 100.0, 0.01);
    println!(
        "multiplications: {:.3e} vs {:.3e}",
        ng.multiplications(),
        rc.multiplications()
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
