use kinfrac_core::geometry::PhasePoint;
use kinfrac_core::kernels::{KernelMachine, KernelParams};
use kinfrac_core::quad::Rule1d;
use kinfrac_core::representation::*;
use kinfrac_core::traj::{trajectory_eval, TrajectoryParams};

fn main() {
    let machine = KernelMachine::new(KernelParams::new(1.0, 2.0, 0.5).unwrap()).unwrap();
    let pair = manufacture_bessel(0.5).unwrap();
    let z = PhasePoint::d1(0.3, 0.1, 0.2);

    for r in [0.4, 1.0] {
        // A2: trajectory route for the source term:
        // -int alpha m0 r^{alpha-1} (D^sigma S0)(gamma^m(r;z)) psi(m) dm
        let nodes = 24;
        let rm0 = Rule1d::gauss(-2.0, -1.0, nodes);
        let rb = Rule1d::gauss(-1.0, 1.0, nodes);
        let mut a2 = 0.0;
        for (&m0, &w0) in rm0.nodes.iter().zip(&rm0.weights) {
            for (&m1, &w1) in rb.nodes.iter().zip(&rb.weights) {
                for (&m2, &w2) in rb.nodes.iter().zip(&rb.weights) {
                    let psi = machine.psi.eval(m0, m1, m2);
                    if psi == 0.0 { continue; }
                    let p = TrajectoryParams::new(1.0, 2.0, m0, vec![m1], vec![m2]).unwrap();
                    let g = trajectory_eval(&p, r, &z).unwrap();
                    a2 -= w0 * w1 * w2 * psi * m0 * (pair.transport_rhs(g.t, g.x[0], g.v[0]));
                }
            }
        }
        // A1: kernel-side: int S0(z o (s,y,w)) G_r(s,y,w) d(s,y,w), rescaled coords
        let rl = Rule1d::gauss(-2.0, -1.0, 12);
        let ry = Rule1d::gauss(-3.0, 3.0, 24);
        let core = machine.eta_radius + 2.0;
        let mut eta_rule = Rule1d::gauss(-core, core, 48);
        let tail = Rule1d::log_gauss(core, 2048.0, 14, 3);
        for (&e, &we) in tail.nodes.iter().zip(&tail.weights) {
            eta_rule.nodes.push(e); eta_rule.weights.push(we);
            eta_rule.nodes.push(-e); eta_rule.weights.push(we);
        }
        let q = machine.capital_q();
        let (ra, rbao, rbo) = (r.powf(1.0), r.powf(1.0), r.powf(2.0));
        let mut a1 = 0.0;
        let mut b1 = 0.0;
        for (&lam, &wl) in rl.nodes.iter().zip(&rl.weights) {
            for (&yb, &wy) in ry.nodes.iter().zip(&ry.weights) {
                let g_line = machine.d_phi_line(r, lam, yb, 256.0, 4096);
                let gv_line = machine.i_psi_line(r, lam, yb, 256.0, 4096);
                let s = lam * ra;
                let y = yb * rbo;
                let pref_g = -1.0 * 1.0 * r.powf(1.0 - 1.0 - q - 0.5) * lam;
                let pref_gv = r.powf(-1.0 - q + 0.5);
                for (&eta, &we) in eta_rule.nodes.iter().zip(&eta_rule.weights) {
                    let w = eta * rbao;
                    let tp = z.t + s; let xp = z.x[0] + y + s * z.v[0]; let vp = z.v[0] + w;
                    a1 += wl * wy * we * r.powf(q) * pref_g * g_line.eval(eta) * pair.bessel_source(tp, xp, vp);
                    // D^sigma f via direct pv quadrature on analytic f (slow but exact-ish)
                    let dsf = kinfrac_core::fourier1d::pv_frac_derivative(
                        &|vv| pair.f(tp, xp, vv), (-97.0, 97.0), 0.5, vp);
                    b1 += wl * wy * we * r.powf(q) * pref_gv * gv_line.eval(eta) * dsf;
                }
            }
        }
        // B2: T_{L_r} f by compact quadrature with slice-adapted support
        let ((s_lo, s_hi), y_rad, _) = machine.support_box(r);
        let rs = Rule1d::gauss(s_lo, s_hi, 20);
        let ryy = Rule1d::gauss(-y_rad, y_rad, 28);
        let mut b2 = 0.0;
        for (&s, &ws) in rs.nodes.iter().zip(&rs.weights) {
            for (&y, &wy) in ryy.nodes.iter().zip(&ryy.weights) {
                let (lam, yb, _) = machine.rescaled(r, s, y, 0.0);
                if let Some((lo, hi)) = machine.eta_support(r, lam, yb) {
                    let rw = Rule1d::gauss(lo * rbao, hi * rbao, 32);
                    for (&w, &ww) in rw.nodes.iter().zip(&rw.weights) {
                        b2 += ws * wy * ww * machine.eval_l(r, s, y, w)
                            * pair.f(z.t + s, z.x[0] + y + s * z.v[0], z.v[0] + w);
                    }
                }
            }
        }
        println!("r={r}: source term: kernel-route={a1:+.6e} trajectory-route={a2:+.6e} ratio={:.4}", a1/a2);
        println!("r={r}: velocity term: Gv-route={b1:+.6e} T_L f route={b2:+.6e} ratio={:.4}", b1/b2);
    }
}
