//! Eight independent probabilities fix the other eight once normalization and
//! no-signaling are imposed.

use epr_game::probability::{
    check_locality, complete_from_independent, IndependentOctet, HIGH, MU_INDICES, UPSILON_INDICES,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let d = complete_from_independent(&IndependentOctet::new([HIGH; 8])?)?;
    for (m, u) in MU_INDICES.iter().zip(UPSILON_INDICES) {
        println!("p{m:<2} = {:.12}    p{u:<2} = {:.12}", d.p(*m), d.p(u));
    }
    println!("locality holds: {}", check_locality(&d, 1e-12).passes());

    match complete_from_independent(&IndependentOctet::new([1.0; 8])?) {
        Ok(_) => println!("unexpectedly admissible"),
        Err(e) => println!("all-ones octet: {e}"),
    }
    Ok(())
}
