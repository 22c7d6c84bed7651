use kinfrac_core::kernels::{KernelMachine, KernelParams};

fn main() {
    let machine = KernelMachine::new(KernelParams::new(1.0, 2.0, 0.5).unwrap()).unwrap();
    let r = 0.05f64;
    let lambda = -1.5;
    for ybar in [0.2f64, 2.0, 2.9] {
        let Some((c, a)) = machine.slice_frame(r, lambda, ybar) else { println!("ybar={ybar}: empty"); continue };
        println!("ybar={ybar}: frame center={c:.4} half-width={a:.4}");
        let line = machine.d_phi_line(r, lambda, ybar, 256.0, 4096);
        for eta in [c, c + 0.5*a, c + 2.0*a, c + 8.0*a, -6.0, 6.0, 20.0, 45.0] {
            let lv = line.eval(eta);
            let pv = machine.d_sigma_phi(r, lambda, ybar, eta);
            let denom = pv.abs().max(1e-12);
            println!("  eta={eta:+.3}: line={lv:+.5e} pv={pv:+.5e} rel={:+.4}", (lv-pv)/denom);
        }
    }
}
