// Scratch: localize seed-0 hypervolume loss by g2 band.
use regpath::baselines::{ista_oracle_from, spectral_norm_ata};
use regpath::*;

fn main() {
    let seed = 0u64;
    let (a, b, _) = random_lasso_instance(20, 10, 3, 0.01, seed);
    let w = 0.1;
    let l = spectral_norm_ata(&a, 200, 0);
    let p = LassoProblem::new(a.clone(), b.clone(), w);
    let lambda_max = a.t_matvec(&b).max_abs();

    let mut or50: Vec<(f64, f64)> = Vec::new();
    let mut warm: Option<ParamVector> = None;
    for j in (0..50usize).rev() {
        let mu = lambda_max * j as f64 / 49.0;
        let t = ista_oracle_from(&a, &b, mu, None, 1e-10, warm.as_ref()).unwrap();
        warm = Some(t.clone());
        or50.push((p.eval_g2(&t), p.eval_f1(&t, BatchSpec::Full).unwrap()));
    }

    let mut theta0 = ParamVector::zeros(10);
    for _ in 0..2000 {
        let g = p.grad_f1(&theta0, BatchSpec::Full).unwrap();
        theta0 = theta0.axpy(-1.0 / l, &g);
    }
    let range = theta0.max_abs();
    let mut cfg = ContinuationConfig::new(40, 0.9 / l, LegDirection::Both);
    cfg.seed = seed;
    cfg.init_iters = 50_000;
    cfg.corrector_iters = 50_000;
    cfg.direction_tol = Some(1e-10);
    cfg.predictor_iters = 7;
    cfg.adam = AdamConfig::with_lr(0.02);
    cfg.both_split = Some((34, 5));
    cfg.shrink_iters = Some(7);
    cfg.shrink_eta = Some(range / (w * 7.0 * 30.0));
    let arch = continuation_run(&p, &theta0, &cfg).unwrap();

    println!("lambda_max {lambda_max:.3} range {range:.3}");
    println!("-- oracle (g2, f1) --");
    for (g2, f1) in &or50 { print!("({g2:.4},{f1:.3}) "); }
    println!("\n-- cm (g2, f1) label --");
    for (pt, lab) in arch.iter() {
        print!("({:.4},{:.3},{}) ", pt.g2, pt.f1_train, lab.label().chars().next().unwrap());
    }
    println!();
    // worst residual point
    let mut worst = (0.0, 0usize);
    for pt in arch.points() {
        let r = criticality_residual(&p, &pt.theta).unwrap();
        if r > worst.0 { worst = (r, pt.index); }
    }
    println!("worst residual {:.3e} at index {} (g2 {:.4})", worst.0, worst.1, arch.points()[worst.1].g2);
}
