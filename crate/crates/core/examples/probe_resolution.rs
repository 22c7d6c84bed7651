use kinfrac_core::geometry::PhasePoint;
use kinfrac_core::kernels::{KernelMachine, KernelParams};
use kinfrac_core::quad::Rule1d;
use kinfrac_core::representation::*;

fn term(machine: &KernelMachine, pair: &StructuralPair, z: &PhasePoint, r: f64,
        nl: usize, ny: usize, ne_core: usize, tail_panels: usize, tail_per: usize) -> f64 {
    let q = machine.capital_q();
    let rl = Rule1d::gauss(-2.0, -1.0, nl);
    let core = machine.eta_radius + 2.0;
    let mut eta_rule = Rule1d::gauss(-core, core, ne_core);
    let tail = Rule1d::log_gauss(core, 2048.0, tail_panels, tail_per);
    for (&e, &we) in tail.nodes.iter().zip(&tail.weights) {
        eta_rule.nodes.push(e); eta_rule.weights.push(we);
        eta_rule.nodes.push(-e); eta_rule.weights.push(we);
    }
    let mut a1 = 0.0;
    for (&lam, &wl) in rl.nodes.iter().zip(&rl.weights) {
        let ry = machine.ybar_rule(r, lam, ny);
        for (&yb, &wy) in ry.nodes.iter().zip(&ry.weights) {
            let g_line = machine.d_phi_line(r, lam, yb, 256.0, 4096);
            let s = lam * r;
            let y = yb * r * r;
            let pref_g = -r.powf(-q - 0.5) * lam;
            for (&eta, &we) in eta_rule.nodes.iter().zip(&eta_rule.weights) {
                a1 += wl * wy * we * r.powf(q) * pref_g * g_line.eval(eta)
                    * pair.bessel_source(z.t + s, z.x[0] + y + s * z.v[0], z.v[0] + eta * r);
            }
        }
    }
    a1
}

fn main() {
    let machine = KernelMachine::new(KernelParams::new(1.0, 2.0, 0.5).unwrap()).unwrap();
    let pair = manufacture_bessel(0.5).unwrap();
    let z = PhasePoint::d1(-0.02, 0.34, 0.51);
    let r = 0.1;
    println!("vary eta-core: {:+.7e} {:+.7e} {:+.7e}",
        term(&machine, &pair, &z, r, 10, 8, 48, 14, 3),
        term(&machine, &pair, &z, r, 10, 8, 96, 14, 3),
        term(&machine, &pair, &z, r, 10, 8, 160, 14, 3));
    println!("vary tails:    {:+.7e} {:+.7e}",
        term(&machine, &pair, &z, r, 10, 8, 96, 28, 4),
        term(&machine, &pair, &z, r, 10, 8, 96, 40, 6));
    println!("vary lambda:   {:+.7e} {:+.7e}",
        term(&machine, &pair, &z, r, 16, 8, 96, 28, 4),
        term(&machine, &pair, &z, r, 24, 8, 96, 28, 4));
    println!("vary ybar:     {:+.7e} {:+.7e}",
        term(&machine, &pair, &z, r, 16, 12, 96, 28, 4),
        term(&machine, &pair, &z, r, 16, 16, 96, 28, 4));
}
