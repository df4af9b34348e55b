//! Singlet statistics as Bob's second direction rotates; |Δ| peaks at the
//! Cirel'son value 2√2 when S2' = −π/4. A product state stays classical.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};

use epr_game::probability::{check_embedding, chsh, try_factorize, BellRegime};
use epr_game::quantum::{product, quantum_joint_distribution, singlet, MeasurementSettings, Spin};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("{:>8}  {:>9}  regime", "S2'", "Δ");
    for k in -8..=0 {
        let b2 = k as f64 * FRAC_PI_4 / 4.0;
        let d = quantum_joint_distribution(
            &singlet(),
            &MeasurementSettings::new(0.0, FRAC_PI_2, FRAC_PI_4, b2),
        )?;
        let r = chsh(&d)?;
        assert!(check_embedding(&d, 1e-12).passes());
        println!(
            "{b2:>8.4}  {:>+9.5}  {:?}",
            r.delta,
            BellRegime::of(r.delta)
        );
    }
    println!("Cirel'son bound 2√2 = {:.5}", 2.0 * SQRT_2);

    let d = quantum_joint_distribution(
        &product(Spin::Up, Spin::Down),
        &MeasurementSettings::chsh_optimal(),
    )?;
    println!(
        "product |+−⟩: factorizable = {}, Δ = {:+.5}",
        try_factorize(&d, 1e-9)?.is_factorizable(),
        chsh(&d)?.delta
    );
    Ok(())
}
