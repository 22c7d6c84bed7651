use kinfrac_core::geometry::PhasePoint;
use kinfrac_core::grid::Axis;
use kinfrac_core::kernels::{KernelMachine, KernelParams};
use kinfrac_core::quad::Rule1d;
use kinfrac_core::representation::*;
use kinfrac_core::traj::{trajectory_eval, trajectory_velocity_rate, TrajectoryParams};

fn main() {
    let machine = KernelMachine::new(KernelParams::new(1.0, 2.0, 0.5).unwrap()).unwrap();
    let pair = manufacture_bessel(0.5).unwrap();
    let z = PhasePoint::d1(-0.02, 0.34, 0.51);
    let dsf = dsf_grid_for_pair(&pair,
        Axis::new(-2.5, 1.5, 56), Axis::new(-6.5, 6.5, 120), Axis::new(-40.0, 40.0, 400)).unwrap();

    for r in [0.05f64, 0.1, 0.2, 0.3, 0.5, 0.7] {
        // exact via trajectory route
        let n = 32;
        let rm0 = Rule1d::gauss(-2.0, -1.0, n);
        let rb = Rule1d::gauss(-1.0, 1.0, n);
        let (mut src_ex, mut vel_ex) = (0.0, 0.0);
        let hv = 1e-5;
        for (&m0, &w0) in rm0.nodes.iter().zip(&rm0.weights) {
            for (&m1, &w1) in rb.nodes.iter().zip(&rb.weights) {
                for (&m2, &w2) in rb.nodes.iter().zip(&rb.weights) {
                    let psi = machine.psi.eval(m0, m1, m2);
                    if psi == 0.0 { continue; }
                    let p = TrajectoryParams::new(1.0, 2.0, m0, vec![m1], vec![m2]).unwrap();
                    let g = trajectory_eval(&p, r, &z).unwrap();
                    let wgt = w0 * w1 * w2 * psi;
                    src_ex -= wgt * m0 * pair.transport_rhs(g.t, g.x[0], g.v[0]);
                    let rate = trajectory_velocity_rate(&p, r).unwrap()[0];
                    let gr = (pair.f(g.t, g.x[0], g.v[0] + hv) - pair.f(g.t, g.x[0], g.v[0] - hv)) / (2.0 * hv);
                    vel_ex -= wgt * rate * gr;
                }
            }
        }
        // production route: single-r table
        let rr = Rule1d { nodes: vec![r], weights: vec![1.0] };
        let table = build_bessel_table_with_rule(&machine, r, &rr, 10, 8);
        let (src, vel) = bessel_rhs(&machine, &table,
            &|t, x, v| pair.bessel_source(t, x, v),
            &|t, x, v| dsf.eval(t, x, v).unwrap_or(0.0), &z);
        println!("r={r}: src {src:+.5e} vs {src_ex:+.5e} ({:+.3}%)  vel {vel:+.5e} vs {vel_ex:+.5e} ({:+.3}%)",
            100.0*(src/src_ex - 1.0), 100.0*(vel/vel_ex - 1.0));
    }
}
