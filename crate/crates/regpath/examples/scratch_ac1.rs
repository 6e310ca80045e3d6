// Scratch: pilot-calibrated shrink schedule + floor-level corrector tolerance.
use regpath::baselines::{ista_oracle_from, spectral_norm_ata};
use regpath::*;

fn oracle_front_mu(a: &Matrix, b: &[f64], w: f64, n_grid: usize) -> FrontArchive {
    let p = LassoProblem::new(a.clone(), b.to_vec(), w);
    let lambda_max = a.t_matvec(b).max_abs();
    let mut front = FrontArchive::new();
    let mut warm: Option<ParamVector> = None;
    for j in (0..n_grid).rev() {
        let mu = lambda_max * j as f64 / (n_grid - 1) as f64;
        let t = ista_oracle_from(a, b, mu, None, 1e-10, warm.as_ref()).unwrap();
        warm = Some(t.clone());
        front.push(evaluate(&p, &t, 0).unwrap(), Direction::WeightedSum);
    }
    front
}

fn cm_run(p: &LassoProblem, theta0: &ParamVector, l: f64, seed: u64, shrink_eta: f64) -> FrontArchive {
    let mut cfg = ContinuationConfig::new(40, 0.9 / l, LegDirection::Both);
    cfg.seed = seed;
    cfg.init_iters = 50_000;
    cfg.corrector_iters = 50_000;
    cfg.direction_tol = Some(1e-12);
    cfg.predictor_iters = 7;
    cfg.adam = AdamConfig::with_lr(0.02);
    cfg.both_split = Some((36, 3));
    cfg.shrink_iters = Some(7);
    cfg.shrink_eta = Some(shrink_eta);
    continuation_run(p, theta0, &cfg).unwrap()
}

fn main() {
    let t0 = std::time::Instant::now();
    for seed in 0..5u64 {
        let (a, b, _) = random_lasso_instance(20, 10, 3, 0.01, seed);
        let w = 0.1;
        let l = spectral_norm_ata(&a, 200, 0);
        let or50 = oracle_front_mu(&a, &b, w, 50);
        let or500 = oracle_front_mu(&a, &b, w, 500);

        let p = LassoProblem::new(a.clone(), b.clone(), w);
        let mut theta0 = ParamVector::zeros(10);
        for _ in 0..2000 {
            let g = p.grad_f1(&theta0, BatchSpec::Full).unwrap();
            theta0 = theta0.axpy(-1.0 / l, &g);
        }
        let range = theta0.max_abs();

        // pilot: aggressive shrink, measure how many active steps reach zero
        let pilot_eta = range / (w * 7.0 * 20.0);
        let pilot = cm_run(&p, &theta0, l, seed, pilot_eta);
        let k0 = pilot
            .points()
            .iter()
            .position(|pt| pt.g2 == 0.0)
            .unwrap_or(36);
        // rescale so the calibrated run spends ~34 of its 36 steps shrinking
        let eta = pilot_eta * k0 as f64 / 34.0;
        let arch = cm_run(&p, &theta0, l, seed, eta);

        let reference = ReferencePoint::shared(&[&arch, &or50, &or500]).unwrap();
        let hv_cm = hypervolume_2d(&arch, &reference).unwrap();
        let hv50 = hypervolume_2d(&or50, &reference).unwrap();
        let hv500 = hypervolume_2d(&or500, &reference).unwrap();
        let mut worst_res = 0.0_f64;
        for pt in arch.points() {
            worst_res = worst_res.max(criticality_residual(&p, &pt.theta).unwrap());
        }
        let min_g2 = arch.points().iter().map(|p| p.g2).fold(f64::INFINITY, f64::min);
        println!(
            "seed {seed}: k0 {k0} | or50 defect {:.4}% | cm vs or50 {:.4}% | res {worst_res:.2e} min_g2 {min_g2:.1e}",
            100.0 * (hv500 - hv50) / hv500,
            100.0 * (hv_cm - hv50).abs() / hv50,
        );
    }
    println!("elapsed {:?}", t0.elapsed());
}
