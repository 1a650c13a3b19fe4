//! Exact brackets of the conserved operators and of the graded loop algebra.
use hidsym::algebra::{
    bracket, grade_absorb, graded_generators, jacobi_check, AlgebraElement, Generator, JkqTable, KacMoodyTable,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = AlgebraElement::gen;
    for (a, b) in [(Generator::J(1), Generator::J(2)), (Generator::K(1), Generator::K(2)), (Generator::Q(1), Generator::Q(2))] {
        println!("[{a}, {b}] = {}", bracket(&g(a), &g(b), &JkqTable)?);
    }
    println!("[B1_2, B2_2] = {}", bracket(&g(Generator::Bg(1, 1)), &g(Generator::Bg(2, 1)), &KacMoodyTable)?);
    let absorb = grade_absorb(10);
    println!("graded table equals the absorbed relations on {} pairs: {}", absorb.pairs, absorb.pass);
    let j = jacobi_check(&KacMoodyTable, &graded_generators(10), Some(10))?;
    println!("Jacobi identity on {} triples: {}", j.triples, j.pass);
    Ok(())
}
