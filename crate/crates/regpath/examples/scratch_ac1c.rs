// Scratch: seed-1 worst-residual point anatomy.
use regpath::baselines::spectral_norm_ata;
use regpath::*;

fn main() {
    let seed = 1u64;
    let (a, b, _) = random_lasso_instance(20, 10, 3, 0.01, seed);
    let w = 0.1;
    let l = spectral_norm_ata(&a, 200, 0);
    let p = LassoProblem::new(a.clone(), b.clone(), w);
    let mut theta0 = ParamVector::zeros(10);
    for _ in 0..2000 {
        let g = p.grad_f1(&theta0, BatchSpec::Full).unwrap();
        theta0 = theta0.axpy(-1.0 / l, &g);
    }
    let range = theta0.max_abs();
    let pilot_eta = range / (w * 7.0 * 20.0);
    let run = |eta: f64| {
        let mut cfg = ContinuationConfig::new(40, 0.9 / l, LegDirection::Both);
        cfg.seed = seed;
        cfg.init_iters = 50_000;
        cfg.corrector_iters = 50_000;
        cfg.direction_tol = Some(1e-12);
        cfg.predictor_iters = 7;
        cfg.adam = AdamConfig::with_lr(0.02);
        cfg.both_split = Some((36, 3));
        cfg.shrink_iters = Some(7);
        cfg.shrink_eta = Some(eta);
        continuation_run(&p, &theta0, &cfg).unwrap()
    };
    let pilot = run(pilot_eta);
    let k0 = pilot.points().iter().position(|pt| pt.g2 == 0.0).unwrap_or(36);
    let arch = run(pilot_eta * k0 as f64 / 34.0);

    let mut worst = (0.0, 0usize);
    for pt in arch.points() {
        let r = criticality_residual(&p, &pt.theta).unwrap();
        if r > worst.0 { worst = (r, pt.index); }
    }
    let pt = &arch.points()[worst.1];
    println!("worst res {:.3e} at idx {} g2 {:.5}", worst.0, worst.1, pt.g2);
    println!("theta {:?}", pt.theta.as_slice());
    let scfg = SolverConfig::new(0.9 / l, 200_000, 10).with_direction_tol(1e-12);
    let out = mpg_solve(&p, &pt.theta, &scfg, BatchMode::Full).unwrap();
    println!("fresh corrector: iters {} converged {} -> res {:.3e}", out.iterations, out.converged,
        criticality_residual(&p, &out.theta).unwrap());
    for r in out.trace.rows().iter().rev().take(3) {
        println!("  iter {} norm_d {:.3e} lambda {:.6}", r.iter, r.norm_d, r.lambda_star);
    }
    println!("h = {:.5}", 0.9 / l);
}
