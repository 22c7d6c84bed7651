use kinfrac_core::geometry::PhasePoint;
use kinfrac_core::kernels::{KernelMachine, KernelParams};
use kinfrac_core::quad::Rule1d;
use kinfrac_core::representation::*;
use kinfrac_core::traj::{trajectory_eval, trajectory_velocity_rate, TrajectoryParams};

fn main() {
    let machine = KernelMachine::new(KernelParams::new(1.0, 2.0, 0.5).unwrap()).unwrap();
    let pair = manufacture_bessel(0.5).unwrap();
    let z = PhasePoint::d1(-0.02, 0.34, 0.51);
    let tau = 1.0;
    let f_fn = |t: f64, x: f64, v: f64| pair.f(t, x, v);
    let left = pair.f(z.t, z.x[0], z.v[0])
        - mollify_trajectory_route(&machine, tau, &f_fn, &z, 24).unwrap();

    // golden RHS: -int_0^tau d/dr T_{K_r} f dr via the trajectory identity:
    // d/dr f(gamma) = alpha m0 r^{a-1} (transport rhs)(gamma) + gammadot_v . grad_v f(gamma)
    let nodes = 20;
    let rm0 = Rule1d::gauss(-2.0, -1.0, nodes);
    let rb = Rule1d::gauss(-1.0, 1.0, nodes);
    let rr = Rule1d::log_gauss(tau * (0.5f64).powf(14.0), tau, 28, 3);
    let mut golden_src = 0.0;
    let mut golden_vel = 0.0;
    let hv = 1e-5;
    for (&r, &wr) in rr.nodes.iter().zip(&rr.weights) {
        for (&m0, &w0) in rm0.nodes.iter().zip(&rm0.weights) {
            for (&m1, &w1) in rb.nodes.iter().zip(&rb.weights) {
                for (&m2, &w2) in rb.nodes.iter().zip(&rb.weights) {
                    let psi = machine.psi.eval(m0, m1, m2);
                    if psi == 0.0 { continue; }
                    let p = TrajectoryParams::new(1.0, 2.0, m0, vec![m1], vec![m2]).unwrap();
                    let g = trajectory_eval(&p, r, &z).unwrap();
                    let wgt = wr * w0 * w1 * w2 * psi;
                    golden_src -= wgt * m0 * pair.transport_rhs(g.t, g.x[0], g.v[0]);
                    let rate = trajectory_velocity_rate(&p, r).unwrap()[0];
                    let gradv = (pair.f(g.t, g.x[0], g.v[0] + hv) - pair.f(g.t, g.x[0], g.v[0] - hv)) / (2.0 * hv);
                    golden_vel -= wgt * rate * gradv;
                }
            }
        }
    }
    println!("left           = {left:+.6e}");
    println!("golden source  = {golden_src:+.6e}");
    println!("golden velocity= {golden_vel:+.6e}");
    println!("golden total   = {:+.6e}  rel dev {:.4}", golden_src + golden_vel,
        ((golden_src + golden_vel) - left).abs() / left.abs());
}
