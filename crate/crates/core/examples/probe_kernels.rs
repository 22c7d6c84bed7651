use kinfrac_core::kernels::*;
use kinfrac_core::quad::dyadic_grid;
use std::time::Instant;
fn main() {
    let m = KernelMachine::new(KernelParams::new(1.0, 2.0, 0.5).unwrap()).unwrap();
    let grid = dyadic_grid(1.0, -6, 6);
    let thetas = [1.0, 2.0, f64::INFINITY];
    for kind in [KernelKind::BesselG, KernelKind::BesselGv] {
        let t0 = Instant::now();
        let sweeps = kernel_norm_scaling_multi(&m, kind, &thetas, &grid).unwrap();
        for s in &sweeps {
            println!("{kind:?}: slope={:.4} expect={:.4} r2={:.6}", s.fit.slope, s.expected_slope, s.fit.r2);
        }
        println!("  ({:?})", t0.elapsed());
    }
    for kind in [KernelKind::BesselGv, KernelKind::BesselG] {
        let theta = 8.0/7.0;
        let t0 = Instant::now();
        let mut norms = vec![];
        for k in -3..=3 {
            let tau = (k as f64).exp2();
            let samples = integrated_kernel_samples(&m, kind, tau, 11, 3);
            let wn = weak_quasinorm_from_samples(&samples, theta).unwrap();
            norms.push(wn);
        }
        let max = norms.iter().cloned().fold(f64::MIN, f64::max);
        let min = norms.iter().cloned().fold(f64::MAX, f64::min);
        println!("{kind:?} weak-L^{theta:.4}: ratio={:.3} norms={norms:?} ({:?})", max/min, t0.elapsed());
    }
    for k in [-2i32, 0, 2] {
        let tau = (k as f64).exp2();
        let samples = integrated_kernel_samples(&m, KernelKind::KTau, tau, 11, 3);
        let total: f64 = samples.iter().map(|(v, vol)| v * vol).sum();
        println!("int_0^tau K_r dr L1 mass at tau=2^{k}: {total:.5}");
    }
}
