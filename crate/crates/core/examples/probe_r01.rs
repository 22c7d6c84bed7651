use kinfrac_core::geometry::PhasePoint;
use kinfrac_core::kernels::{KernelMachine, KernelParams};
use kinfrac_core::quad::Rule1d;
use kinfrac_core::representation::*;
use kinfrac_core::traj::{trajectory_eval, TrajectoryParams};

fn main() {
    let machine = KernelMachine::new(KernelParams::new(1.0, 2.0, 0.5).unwrap()).unwrap();
    let pair = manufacture_bessel(0.5).unwrap();
    let z = PhasePoint::d1(-0.02, 0.34, 0.51);
    for r in [0.1f64, 0.2, 0.4] {
        // exact trajectory route with heavy nodes
        let n = 36;
        let rm0 = Rule1d::gauss(-2.0, -1.0, n);
        let rb = Rule1d::gauss(-1.0, 1.0, n);
        let mut a2 = 0.0;
        for (&m0, &w0) in rm0.nodes.iter().zip(&rm0.weights) {
            for (&m1, &w1) in rb.nodes.iter().zip(&rb.weights) {
                for (&m2, &w2) in rb.nodes.iter().zip(&rb.weights) {
                    let psi = machine.psi.eval(m0, m1, m2);
                    if psi == 0.0 { continue; }
                    let p = TrajectoryParams::new(1.0, 2.0, m0, vec![m1], vec![m2]).unwrap();
                    let g = trajectory_eval(&p, r, &z).unwrap();
                    a2 -= w0 * w1 * w2 * psi * m0 * pair.transport_rhs(g.t, g.x[0], g.v[0]);
                }
            }
        }
        // d_sigma_phi pointwise route (PV, stretched frame) at production-ish nodes
        let q = machine.capital_q();
        let rl = Rule1d::gauss(-2.0, -1.0, 10);
        let core = machine.eta_radius + 2.0;
        let mut eta_rule = Rule1d::gauss(-core, core, 48);
        let tail = Rule1d::log_gauss(core, 2048.0, 14, 3);
        for (&e, &we) in tail.nodes.iter().zip(&tail.weights) {
            eta_rule.nodes.push(e); eta_rule.weights.push(we);
            eta_rule.nodes.push(-e); eta_rule.weights.push(we);
        }
        let mut a1pv = 0.0;
        for (&lam, &wl) in rl.nodes.iter().zip(&rl.weights) {
            let ry = machine.ybar_rule(r, lam, 8);
            for (&yb, &wy) in ry.nodes.iter().zip(&ry.weights) {
                let s = lam * r;
                let y = yb * r * r;
                let pref_g = -r.powf(-q - 0.5) * lam;
                for (&eta, &we) in eta_rule.nodes.iter().zip(&eta_rule.weights) {
                    let src = pair.bessel_source(z.t + s, z.x[0] + y + s * z.v[0], z.v[0] + eta * r);
                    if src == 0.0 { continue; }
                    a1pv += wl * wy * we * r.powf(q) * pref_g
                        * machine.d_sigma_phi(r, lam, yb, eta) * src;
                }
            }
        }
        println!("r={r}: trajectory(exact)={a2:+.7e}  kernel(PV-route)={a1pv:+.7e}  ratio={:.5}", a1pv/a2);
    }
}
