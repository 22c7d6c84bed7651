use kinfrac_core::kernels::{KernelMachine, KernelParams};
use kinfrac_core::representation::*;
use kinfrac_core::grid::Axis;
use rand::SeedableRng;
use std::time::Instant;
fn main() {
    let machine = KernelMachine::new(KernelParams::new(1.0, 2.0, 0.5).unwrap()).unwrap();
    let pair = manufacture_bessel(0.5).unwrap();
    println!("structural residual: {:.3e}", pair.structural_residual);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let points = sample_points(&pair, &mut rng, 4);
    let t0 = Instant::now();
    let dsf = dsf_grid_for_pair(&pair,
        Axis::new(-2.5, 1.5, 56), Axis::new(-4.0, 4.0, 72), Axis::new(-24.0, 24.0, 256)).unwrap();
    println!("dsf grid built in {:?}", t0.elapsed());
    for tau in [1.0] {
        let t0 = Instant::now();
        let rep = representation_residual(&machine, &pair, Some(&dsf), tau, &points).unwrap();
        for p in &rep.points {
            println!("z=({:.2},{:.2},{:.2}): left={:+.6e} src={:+.6e} vel={:+.6e} rel={:.4}",
                p.t, p.x, p.v, p.left, p.right_source, p.right_velocity, p.relative_residual);
        }
        println!("tau={tau}: max rel resid {:.4} ({:?})", rep.max_relative_residual, t0.elapsed());
    }
}
