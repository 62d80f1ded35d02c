use std::time::Instant;

use qwork_core::hamiltonians::{HamiltonianModel, ScheduleShape};
use qwork_core::oscillator::{
    delta_f, fock_cross_check, ln_partition_function, qstar_from_dynamics, OscillatorParams, OscillatorSpec,
};
use qwork_core::thermo::gibbs;

#[test]
fn smoothstep_ramp_matches_closed_forms() {
    let spec = OscillatorSpec::with_ramp(OscillatorParams::fig1(), ScheduleShape::Smoothstep, 1.5).unwrap();
    let start = Instant::now();
    let r = fock_cross_check(&spec, 120, 2000, 1000, 10).unwrap();
    println!(
        "Q* {} rel dev {:e} occ dev {:e} tail {:e} defect {:e} Z~ {} vs {} ({:?})",
        r.qstar.qstar,
        r.mean_work_relative_deviation,
        r.max_occupation_deviation,
        r.tail_occupancy,
        r.unitarity_defect,
        r.z_tilde_numeric,
        r.z_tilde_analytic,
        start.elapsed()
    );
    assert!(r.qstar.qstar > 1.0);
    assert!(r.trusted);
    assert!(r.unitarity_defect <= 1e-9);
    assert!(r.mean_work_relative_deviation <= 1e-3);
    assert!((r.numeric_mean_work_ttm - r.numeric_mean_work_mf).abs() < 1e-9);
    assert!(r.max_occupation_deviation <= 1e-3);
    assert!((r.z_tilde_numeric - r.z_tilde_analytic).abs() <= 1e-4);
}

#[test]
fn free_energy_change_matches_truncated_partition_functions() {
    let p = OscillatorParams::fig1();
    let model = HamiltonianModel::parametric_oscillator(100, 1.0, 1.0, 1.0).unwrap();
    let z0 = gibbs(&model.evaluate(1.0).unwrap(), 1.0).unwrap();
    let zt = gibbs(&model.evaluate(2.0).unwrap(), 1.0).unwrap();
    let numeric = -(zt.ln_z() - z0.ln_z());
    assert!((numeric - delta_f(&p)).abs() < 1e-6);
    assert!((z0.ln_z() - ln_partition_function(1.0, 1.0, 1.0)).abs() < 1e-6);
}

#[test]
fn qstar_approaches_both_limits() {
    let p = OscillatorParams::fig2();
    let fast = OscillatorSpec::with_ramp(p, ScheduleShape::Linear, 1e-4).unwrap();
    let slow = OscillatorSpec::with_ramp(p, ScheduleShape::Linear, 200.0).unwrap();
    let qf = qstar_from_dynamics(&fast, 100).unwrap().qstar;
    let qs = qstar_from_dynamics(&slow, 1000).unwrap().qstar;
    assert!((qf - 1.25).abs() < 1e-6);
    assert!((1.0 - 1e-9..1.0 + 1e-3).contains(&qs));
}
