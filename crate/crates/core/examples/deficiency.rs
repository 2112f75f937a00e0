//! Deficiency indices of the half-line, extended and whole-line momentum
//! operators.

use qhalfline::operators::{deficiency_indices, OperatorSpec};

fn main() -> qhalfline::Result<()> {
    for spec in OperatorSpec::ALL {
        let r = deficiency_indices(spec, 1.0)?;
        println!(
            "{:>10}: (n+, n-) = ({}, {})  {}  {}",
            spec.name(),
            r.n_plus,
            r.n_minus,
            r.classification,
            r.extension_family().unwrap_or_default()
        );
    }
    Ok(())
}
