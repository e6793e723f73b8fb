mod common;

use common::*;
use dirac_kernel::evolution::*;
use dirac_kernel::free::{free_kernel, free_step};
use dirac_kernel::linalg::{SpinMatrix, C64};
use dirac_kernel::packet::{gaussian_packet, PacketSpec};
use dirac_kernel::potential::{GaugeFunction, Potential};
use dirac_kernel::spinor::{Grid, Representation, SpinorField};
use dirac_kernel::Error;
use rand::Rng;

fn packet(n: usize, dx: f64, width: f64, p: f64) -> SpinorField {
    let grid = Grid::new(1, n, dx).unwrap();
    let rep = Representation::dirac(1).unwrap();
    gaussian_packet(&grid, &rep, &PacketSpec::new(1, width, 1.0).momentum(&[p])).unwrap()
}

fn plane_wave() -> Potential {
    Potential::PlaneWave {
        amplitude: 0.6,
        wave_vector: [0.7, 0.0, 0.0],
        omega: 1.1,
        polarization: [1.0, 0.0, 0.0],
        phase: 0.0,
    }
}

#[test]
fn interaction_hamiltonian_is_hermitian() {
    let mut r = rng(10);
    for d in [1, 3] {
        for rep in representations(d) {
            for _ in 0..200 {
                let a = random_vec(&mut r, d, 3.0);
                let h = interaction_hamiltonian(&rep, r.gen_range(-3.0..3.0), &a, r.gen_range(-2.0..2.0)).unwrap();
                assert!(h.max_diff(&h.adjoint()) < 1e-15);
            }
        }
    }
    let rep = Representation::dirac(3).unwrap();
    let h = interaction_hamiltonian(&rep, 0.0, &[1.0, 0.0, 0.0], 1.0).unwrap();
    let ev = eigenvalues(&h);
    assert!((ev[0] + 1.0).abs() < 1e-14 && (ev[3] - 1.0).abs() < 1e-14);
}

#[test]
fn interaction_phase_matches_matrix_exponential() {
    let mut r = rng(11);
    let reps: Vec<Representation> = [1, 3].into_iter().flat_map(representations).collect();
    for i in 0..1000 {
        let rep = &reps[i % reps.len()];
        let d = rep.spatial_dim();
        // include tiny |eA| dt to exercise the series branch
        let scale = if i % 4 == 0 { 1e-8 } else { 3.0 };
        let a = random_vec(&mut r, d, scale);
        let a0 = r.gen_range(-3.0..3.0);
        let e = r.gen_range(-2.0..2.0);
        let dt = r.gen_range(1e-3..1.5);
        let u = interaction_phase(rep, a0, &a, e, dt).unwrap();
        let oracle = expm_minus_i(&interaction_hamiltonian(rep, a0, &a, e).unwrap(), dt);
        assert!(na_max_diff(&oracle, &u) < 1e-12);
        assert!(u.unitarity_residual() < 1e-13);
    }
}

#[test]
fn doubled_half_turn_is_minus_identity() {
    let rep = Representation::dirac(3).unwrap();
    let a = [0.0, 0.6, 0.8];
    let u = interaction_phase(&rep, 0.0, &a, 1.0, std::f64::consts::FRAC_PI_2).unwrap();
    assert!(u.max_diff(&rep.alpha_dot(&a).scale(C64::new(0.0, 1.0))) < 1e-15);
    assert!((u * u).max_diff(&SpinMatrix::identity(4).scale_real(-1.0)) < 1e-15);
}

#[test]
fn zero_potential_equals_free_evolution() {
    let psi = packet(256, 0.1, 1.0, 1.0);
    for scheme in [SplitScheme::lie(0.05), SplitScheme::strang(0.05)] {
        let out = evolve(&psi, &Potential::Zero, 0.0, 2.0, scheme, 1.0, 1.0).unwrap();
        let free = free_step(&psi, 2.0, 1.0).unwrap();
        assert!(out.final_state.max_diff(&free) < 1e-13);
        assert_eq!(out.steps, 40);
    }
}

#[test]
fn constant_scalar_potential_is_a_global_phase() {
    let psi = packet(256, 0.1, 1.0, 0.5);
    let (v, e, t) = (0.8, -0.7, 3.0);
    let pot = Potential::uniform(v, &[0.0]);
    for scheme in [SplitScheme::lie(0.1), SplitScheme::strang(0.1)] {
        let out = evolve(&psi, &pot, 0.5, 0.5 + t, scheme, 1.0, e).unwrap();
        let mut want = free_step(&psi, t, 1.0).unwrap();
        want.scale(C64::from_polar(1.0, -e * v * t));
        assert!(out.final_state.max_diff(&want) < 1e-10);
    }
}

#[test]
fn unitarity_per_step_and_long_run() {
    let psi = packet(512, 0.1, 1.0, 1.0);
    let n0 = psi.norm();
    let out = evolve(&psi, &plane_wave(), 0.0, 5.0, SplitScheme::strang(5e-4), 1.0, 1.0).unwrap();
    assert_eq!(out.norm_log.len(), 10_000);
    let mut prev = n0;
    for n in &out.norm_log {
        assert!((n - prev).abs() < 1e-13);
        prev = *n;
    }
    assert!(out.norm_drift(n0) < 1e-10);
}

fn order(scheme: fn(f64) -> SplitScheme, pot: &Potential) -> f64 {
    let psi = packet(256, 0.1, 1.0, 1.0);
    let run = |dt: f64| evolve(&psi, pot, 0.0, 1.6, scheme(dt), 1.0, 1.0).unwrap().final_state;
    self_convergence_order(&run(0.1), &run(0.05), &run(0.025))
}

#[test]
fn splitting_orders() {
    for pot in [Potential::constant_electric(&[0.5]), plane_wave()] {
        let lie = order(SplitScheme::lie, &pot);
        let strang = order(SplitScheme::strang, &pot);
        assert!((0.9..=1.1).contains(&lie), "lie {lie}");
        assert!((1.9..=2.1).contains(&strang), "strang {strang}");
    }
}

#[test]
fn gauge_covariance_converges_at_scheme_order() {
    let psi = packet(256, 0.1, 1.0, 0.5);
    let field = [0.4];
    let pot = Potential::constant_electric(&field);
    let gauge = GaugeFunction::electric_to_temporal(&field);
    for (scheme, lo) in [(SplitScheme::lie as fn(f64) -> SplitScheme, 0.9), (SplitScheme::strang, 1.9)] {
        let dts = [0.08, 0.04, 0.02];
        let diffs: Vec<f64> = dts
            .iter()
            .map(|dt| gauge_covariance_difference(&psi, &pot, &gauge, 0.0, 1.6, scheme(*dt), 1.0, 1.0).unwrap())
            .collect();
        let slope = loglog_slope(&dts, &diffs);
        assert!(slope >= lo, "{slope} {diffs:?}");
    }
}

#[test]
fn same_slicing_composition_is_exact() {
    let psi = packet(256, 0.1, 1.0, 1.0);
    let pot = plane_wave();
    for scheme in [SplitScheme::lie(0.05), SplitScheme::strang(0.05)] {
        let half = evolve(&psi, &pot, 0.0, 1.0, scheme, 1.0, 1.0).unwrap().final_state;
        let two = evolve(&half, &pot, 1.0, 2.0, scheme, 1.0, 1.0).unwrap().final_state;
        let direct = evolve(&psi, &pot, 0.0, 2.0, scheme, 1.0, 1.0).unwrap().final_state;
        assert!(two.max_diff(&direct) < 1e-12);
    }
}

#[test]
fn interacting_kernel_examples() {
    let grid = Grid::new(1, 128, 0.1).unwrap();
    let rep = Representation::dirac(1).unwrap();
    let scheme = SplitScheme::strang(0.05);
    let k0 = interacting_kernel(&grid, &rep, &Potential::Zero, 0.0, 1.0, scheme, 1.0, 1.0).unwrap();
    assert!(k0.max_diff(&free_kernel(&grid, &rep, 1.0, 1.0).unwrap()) < 1e-12);
    // time-dependent but spatially uniform pulse: kernels are convolutions
    let pulse = Potential::GaussianPulse {
        amplitude: 0.7,
        wave_vector: [0.0; 3],
        omega: 1.3,
        polarization: [1.0, 0.0, 0.0],
        center_time: 0.8,
        duration: 0.5,
    };
    let first = interacting_kernel(&grid, &rep, &pulse, 0.0, 0.6, scheme, 1.0, 1.0).unwrap();
    let second = interacting_kernel(&grid, &rep, &pulse, 0.6, 1.2, scheme, 1.0, 1.0).unwrap();
    let direct = interacting_kernel(&grid, &rep, &pulse, 0.0, 1.2, scheme, 1.0, 1.0).unwrap();
    assert!(second.compose(&first).unwrap().max_diff(&direct) < 1e-12);
    assert!(matches!(
        interacting_kernel(&grid, &rep, &pulse, 1.0, 0.5, scheme, 1.0, 1.0),
        Err(Error::Domain(_))
    ));
}

#[test]
fn gauge_covariance_of_kernels() {
    let grid = Grid::new(1, 128, 0.1).unwrap();
    let rep = Representation::dirac(1).unwrap();
    let pot = Potential::uniform(0.3, &[0.5]);
    let gauge = GaugeFunction { c_t: 0.4, c_x: [0.0; 3], ..Default::default() };
    let scheme = SplitScheme::strang(0.05);
    let k = interacting_kernel(&grid, &rep, &pot, 0.0, 1.0, scheme, 1.0, 0.8).unwrap();
    let kg = interacting_kernel(&grid, &rep, &pot.gauge_transform(gauge.clone()), 0.0, 1.0, scheme, 1.0, 0.8).unwrap();
    let conj = phase_conjugate_kernel(&k, &gauge, 0.0, 1.0, 0.8).unwrap();
    assert!(conj.max_diff(&kg) < 1e-12);
}

#[test]
fn evolve_rejects_bad_configuration() {
    let psi = packet(256, 0.1, 1.0, 1.0);
    assert!(matches!(
        evolve(&psi, &Potential::Zero, 0.0, 1.0, SplitScheme::lie(0.3), 1.0, 1.0),
        Err(Error::Configuration(_))
    ));
    // packet support plus span exceeds half the box
    assert!(matches!(
        evolve(&psi, &Potential::Zero, 0.0, 8.0, SplitScheme::lie(0.5), 1.0, 1.0),
        Err(Error::Scenario(_))
    ));
}

#[test]
fn generator_relation() {
    let psi = packet(256, 0.1, 1.0, 1.0);
    let ladder = [1e-2, 3e-3, 1e-3, 3e-4, 1e-4];
    let free = generator_residual(&psi, &Potential::Zero, 0.0, 1.0, 1.0, &ladder).unwrap();
    assert!((0.9..=1.1).contains(&free.slope), "{}", free.slope);
    assert!(!free.resolution_warning);
    let pot = Potential::constant_electric(&[0.5]);
    let table = generator_residual(&psi, &pot, 0.3, 1.0, 1.0, &ladder).unwrap();
    assert!((0.9..=1.1).contains(&table.slope), "{}", table.slope);
    // interaction part scales linearly with the coupling
    let es = [0.1, 0.2, 0.4];
    let r: Vec<f64> = es
        .iter()
        .map(|e| generator_residual(&psi, &pot, 0.3, 1.0, *e, &ladder[..2]).unwrap().interaction_residuals[1])
        .collect();
    let c = es.iter().zip(&r).map(|(e, v)| e * v).sum::<f64>() / es.iter().map(|e| e * e).sum::<f64>();
    for (e, v) in es.iter().zip(&r) {
        assert!((v - c * e).abs() <= 0.05 * v, "{r:?}");
    }
    let rough = SpinorField::from_data(
        *psi.grid(),
        psi.rep().clone(),
        random_field(&mut rng(12), *psi.grid(), psi.rep().clone()).into_data(),
    )
    .unwrap();
    assert!(generator_residual(&rough, &pot, 0.0, 1.0, 1.0, &ladder).unwrap().resolution_warning);
}

#[test]
fn duhamel_identity() {
    let psi = packet(256, 0.1, 1.0, 1.0);
    assert!(duhamel_residual(&psi, &Potential::Zero, 1.0, 1.0, 1.0, 0.05).unwrap() < 1e-12);

    // commuting scalar potential: the residual is the midpoint-rule error of
    // the integral of exp(-i e V s), whose leading term is (eV)^2 dt^2 |exp(-ieVt) - 1| / 24
    let (v, e, t) = (0.2, 1.0, 1.0);
    let pot = Potential::uniform(v, &[0.0]);
    for dt in [0.1, 0.05] {
        let got = duhamel_residual(&psi, &pot, t, 1.0, e, dt).unwrap();
        let ev = e * v;
        let leading = ev * ev * dt * dt * (C64::from_polar(1.0, -ev * t) - 1.0).norm() / 24.0 * psi.norm();
        assert!(got <= 2.0 * leading && got >= 0.5 * leading, "{got} {leading}");
    }

    let pot = Potential::constant_electric(&[0.5]);
    let dts = [0.04, 0.02, 0.01];
    let res: Vec<f64> = dts.iter().map(|dt| duhamel_residual(&psi, &pot, 0.8, 1.0, 1.0, *dt).unwrap()).collect();
    let slope = loglog_slope(&dts, &res);
    assert!((0.9..=1.1).contains(&slope), "{slope} {res:?}");
}
