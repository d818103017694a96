use slag_toric::slag::*;
use slag_toric::Execution;
fn main() {
    let t = std::time::Instant::now();
    for n in [2, 3] {
        for variant in [FibrationVariant::Affine, FibrationVariant::Proper] {
            for (name, p) in [("flat", TorusInvariantPotential::flat(n)), ("quad", TorusInvariantPotential::quadratic(n, 0.5))] {
                let cfg = VerifyConfig { variant, ..VerifyConfig::default() };
                let r = certify_fibers(&p, &cfg, Execution::Parallel).unwrap();
                println!("{n} {variant:?} {name}: pts={} omega={:.2e} imO={:.2e} drift={:.1e} crit={} rej={}", r.points, r.max_omega, r.max_im_omega, r.max_fiber_drift, r.critical_points, r.rejected_samples);
                for corr in [Corruption::WrongPhase, Corruption::DropPhi1] {
                    let cfg = VerifyConfig { variant, corruption: corr, ..VerifyConfig::default() };
                    let r = certify_fibers(&p, &cfg, Execution::Parallel).unwrap();
                    println!("    {corr:?}: omega={:.2e} imO={:.2e} pts={}", r.max_omega, r.max_im_omega, r.points);
                }
            }
        }
    }
    println!("elapsed {:?}", t.elapsed());
    for variant in [FibrationVariant::Affine, FibrationVariant::Proper] {
        let p = TorusInvariantPotential::quadratic(3, 0.5);
        for h in [4e-3, 2e-3, 1e-3, 5e-4, 2.5e-4] {
            let cfg = VerifyConfig { variant, h_fd: h, fibers: 4, points_per_fiber: 20, ..VerifyConfig::default() };
            let r = certify_fibers(&p, &cfg, Execution::Parallel).unwrap();
            println!("{variant:?} h={h:e}: omega={:.3e} imO={:.3e}", r.max_omega, r.max_im_omega);
        }
    }
}
