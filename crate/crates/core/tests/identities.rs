use qwork_core::propagation::propagate;
use qwork_core::random::{random_protocol, seeded};
use qwork_core::work::{exp_average, mean_work, WorkAnalysis};

fn analyse(seed: u64) -> WorkAnalysis {
    let mut rng = seeded(seed);
    let p = random_protocol(&mut rng, 2..=8, 0.1..=5.0);
    let u = propagate(&p.model, &p.schedule, 200, 1.0).unwrap();
    WorkAnalysis::new(p.beta, &p.h0, &p.h_tau, &u.unitary).unwrap()
}

#[test]
fn random_batch_identities() {
    let mut worst = [0.0_f64; 6];
    for seed in 0..60 {
        let a = analyse(seed);
        let beta = a.beta();
        let j = a.jarzynski_report();
        let m = a.modified_jarzynski_report();
        let b = a.bounds_report();
        let f = a.first_law_report().unwrap();
        let mf_identity = (exp_average(a.mf(), beta) * a.initial().z() / a.pseudo_gibbs().z_tilde() - 1.0).abs();
        let jensen = -exp_average(a.mf(), beta).ln() / beta - mean_work(a.mf());
        for (slot, v) in worst.iter_mut().zip([
            j.jarzynski_residual,
            m.residual,
            m.closed_form_residual,
            f.residual,
            mf_identity,
            jensen,
        ]) {
            *slot = slot.max(v);
        }
        assert!(b.slack19 >= -1e-9, "seed {seed}: slack {}", b.slack19);
        assert!((b.slack19 - b.slack21).abs() < 1e-12);
        assert!(m.s_rel >= -1e-12);
        assert!(a.measurement_entropy_change().unwrap() >= -1e-10);
        assert!(a.mf_values().len() == a.initial().spectrum().dim());
        assert!(a.ttm().atoms().len() <= a.initial().spectrum().dim().pow(2));
    }
    println!("worst residuals {worst:?}");
    assert!(worst[0] <= 1e-10);
    assert!(worst[1] <= 1e-10);
    assert!(worst[2] <= 1e-8);
    assert!(worst[3] <= 1e-10);
    assert!(worst[4] <= 1e-10);
    assert!(worst[5] <= 1e-9);
}

#[test]
fn column_sums_match_final_populations() {
    let a = analyse(4242);
    let spec = a.final_equilibrium().spectrum();
    let cols = a.joint().column_marginals();
    for (level, col) in cols.iter().enumerate() {
        let pi = spec.projector(level);
        let pop = qwork_core::linalg::trace_of_product(pi.as_matrix(), a.rho_tau().as_matrix()).re;
        assert!((col - pop).abs() < 1e-12, "level {level}: {col} vs {pop}");
    }
}

#[test]
fn row_marginals_are_thermal() {
    let a = analyse(7);
    let spec = a.initial().spectrum();
    for (level, row) in a.joint().row_marginals().iter().enumerate() {
        let expected = a.initial().occupations()[level] * spec.multiplicities()[level] as f64;
        assert!((row - expected).abs() < 1e-12);
    }
    assert!((a.joint().total() - 1.0).abs() < 1e-12);
}
