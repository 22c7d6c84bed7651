use kinfrac_core::geometry::PhasePoint;
use kinfrac_core::grid::Axis;
use kinfrac_core::kernels::{KernelMachine, KernelParams};
use kinfrac_core::quad::Rule1d;
use kinfrac_core::representation::*;

fn main() {
    let machine = KernelMachine::new(KernelParams::new(1.0, 2.0, 0.5).unwrap()).unwrap();
    let pair = manufacture_bessel(0.5).unwrap();
    let z = PhasePoint::d1(-0.02, 0.34, 0.51);
    let dsf = dsf_grid_for_pair(&pair,
        Axis::new(-2.5, 1.5, 56), Axis::new(-6.5, 6.5, 120), Axis::new(-40.0, 40.0, 400)).unwrap();
    // reference values from the trajectory route (computed in probe_perr):
    // r=0.05: src 4.53574e-2 vel 3.23505e-3 ; r=0.2: src 3.76144e-2 vel 7.24668e-3
    for (r, src_ex, vel_ex) in [(0.05f64, 4.53574e-2, 3.23505e-3), (0.2, 3.76144e-2, 7.24668e-3)] {
        for (nl, ny) in [(10usize, 8usize), (14, 12), (20, 16)] {
            let rr = Rule1d { nodes: vec![r], weights: vec![1.0] };
            let table = build_bessel_table_with_rule(&machine, r, &rr, nl, ny);
            let (src, vel) = bessel_rhs(&machine, &table,
                &|t, x, v| pair.bessel_source(t, x, v),
                &|t, x, v| dsf.eval(t, x, v).unwrap_or(0.0), &z);
            println!("r={r} ({nl},{ny}): src {:+.3}% vel {:+.3}%",
                100.0*(src/src_ex - 1.0), 100.0*(vel/vel_ex - 1.0));
        }
    }
}
