use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix2, Vector3};
use num_complex::Complex64;
use pmde_core::pmd::{
    cascade_response, extract_pmd_fd, launch_group_delay, output_sop_derivative, psp_pair,
    total_pmd_analytic, Referral,
};
use pmde_core::polarization::{jones_to_rotation, stokes_of};
use pmde_core::{
    DgdSection, FrequencyGrid, JonesMatrix, JonesVector, Retarder, RotationMatrix, StokesVector,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const OMEGA0: f64 = TAU * 193.4e12;

fn random_axis(rng: &mut ChaCha8Rng) -> StokesVector {
    loop {
        let v = StokesVector::new(
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        );
        if let Some(u) = v.normalized() {
            return u;
        }
    }
}

fn random_retarder(rng: &mut ChaCha8Rng) -> Retarder {
    Retarder::new(random_axis(rng), rng.random_range(0.0..TAU)).unwrap()
}

fn random_instance(rng: &mut ChaCha8Rng, n: usize) -> (Vec<DgdSection>, Vec<Retarder>) {
    let sections = (0..n)
        .map(|_| DgdSection::new(rng.random_range(0.0..=125.0), random_axis(rng)).unwrap())
        .collect();
    let retarders = (0..=n).map(|_| random_retarder(rng)).collect();
    (sections, retarders)
}

fn random_unitary(rng: &mut ChaCha8Rng) -> JonesMatrix {
    let r = random_retarder(rng);
    r.jones().with_phase(rng.random_range(-PI..PI))
}

#[test]
fn analytic_pmd_matches_finite_difference_extraction() {
    let mut rng = ChaCha8Rng::seed_from_u64(20240601);
    let grid = FrequencyGrid::with_step(OMEGA0, TAU * 1e6, 5).unwrap();
    let mut worst = 0.0f64;
    for i in 0..100 {
        let n = [1, 2, 4, 8][i % 4];
        let (sections, retarders) = random_instance(&mut rng, n);
        let analytic = total_pmd_analytic(&sections, &retarders, OMEGA0).unwrap();
        let resp = cascade_response(&sections, &retarders, &grid).unwrap();
        let fd = extract_pmd_fd(&resp, &grid, 2, Referral::Input).unwrap();
        let diff = (analytic - fd).as_vector().amax();
        worst = worst.max(diff);
        assert!(diff < 1e-4, "instance {i} (N={n}): {diff:e} ps");
    }
    eprintln!("worst componentwise deviation {worst:e} ps");
}

#[test]
fn output_referred_extraction_is_rotated_input_vector() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let grid = FrequencyGrid::with_step(OMEGA0, TAU * 1e6, 5).unwrap();
    for _ in 0..20 {
        let (sections, retarders) = random_instance(&mut rng, 4);
        let resp = cascade_response(&sections, &retarders, &grid).unwrap();
        let input = extract_pmd_fd(&resp, &grid, 2, Referral::Input).unwrap();
        let output = extract_pmd_fd(&resp, &grid, 2, Referral::Output).unwrap();
        let r = jones_to_rotation(&resp[2]).unwrap();
        assert!((input.rotated(&r) - output).as_vector().amax() < 1e-9);
    }
}

#[test]
fn rotation_map_is_a_homomorphism() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let a = random_unitary(&mut rng);
        let b = random_unitary(&mut rng);
        let ab = jones_to_rotation(&(a * b)).unwrap();
        let prod = jones_to_rotation(&a).unwrap() * jones_to_rotation(&b).unwrap();
        assert!((ab.matrix() - prod.matrix()).amax() < 1e-9);
    }
}

#[test]
fn rotations_preserve_angles_between_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..500 {
        let r = jones_to_rotation(&random_unitary(&mut rng)).unwrap();
        let (p, q) = (random_axis(&mut rng), random_axis(&mut rng));
        assert!((r.apply(&p).angle_to(&r.apply(&q)) - p.angle_to(&q)).abs() < 1e-9);
    }
}

#[test]
fn jones_action_matches_stokes_rotation() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let j = random_unitary(&mut rng);
        let r = jones_to_rotation(&j).unwrap();
        let v = JonesVector::new(
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)),
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)),
        )
        .normalized()
        .unwrap();
        let lhs = stokes_of(&j.apply(&v));
        let rhs = r.apply(&stokes_of(&v));
        assert!((lhs.as_vector() - rhs.as_vector()).amax() < 1e-10);
    }
}

#[test]
fn composed_retarders_rebuild_from_axis_and_angle() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..500 {
        let r = random_retarder(&mut rng).rotation() * random_retarder(&mut rng).rotation();
        assert!(r.orthogonality_residual() < 1e-12);
        let rebuilt = Retarder::from_rotation(&r).rotation();
        assert!((rebuilt.matrix() - r.matrix()).amax() < 1e-9);
    }
}

#[test]
fn non_unitary_matrix_is_rejected() {
    let m = Matrix2::new(
        Complex64::new(1.0, 0.0),
        Complex64::new(0.1, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0, 0.0),
    );
    assert!(jones_to_rotation(&JonesMatrix::from_matrix(m)).is_err());
}

#[test]
fn pmd_length_never_exceeds_sum_of_dgds() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..500 {
        let n = rng.random_range(1..10);
        let (sections, retarders) = random_instance(&mut rng, n);
        let total: f64 = sections.iter().map(DgdSection::dgd_ps).sum();
        let dgd = total_pmd_analytic(&sections, &retarders, OMEGA0).unwrap().dgd();
        assert!(dgd <= total * (1.0 + 1e-12));
    }
}

#[test]
fn aligned_sections_reach_sum_of_dgds() {
    let axis = StokesVector::new(0.2, -0.4, 0.7).normalized().unwrap();
    let sections: Vec<DgdSection> = [3.0, 17.0, 40.0, 0.5]
        .iter()
        .map(|t| DgdSection::new(*t, axis).unwrap())
        .collect();
    let mut retarders = vec![Retarder::identity(); 5];
    retarders[0] = Retarder::new(StokesVector::horizontal(), 1.3).unwrap();
    let dgd = total_pmd_analytic(&sections, &retarders, OMEGA0).unwrap().dgd();
    assert!((dgd - 60.5).abs() < 1e-9);
}

#[test]
fn common_rotation_of_all_elements_rotates_pmd_vector() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let q = random_retarder(&mut rng).rotation();
        let (sections, retarders) = random_instance(&mut rng, 6);
        let rotated_sections: Vec<DgdSection> = sections
            .iter()
            .map(|s| DgdSection::new(s.dgd_ps(), q.apply(&s.psp_axis())).unwrap())
            .collect();
        let rotated_retarders: Vec<Retarder> = retarders
            .iter()
            .map(|r| Retarder::new(q.apply(&r.axis()), r.retardation()).unwrap())
            .collect();
        let a = total_pmd_analytic(&sections, &retarders, OMEGA0).unwrap();
        let b = total_pmd_analytic(&rotated_sections, &rotated_retarders, OMEGA0).unwrap();
        assert!((a.rotated(&q) - b).as_vector().amax() < 1e-9);
        assert!((a.dgd() - b.dgd()).abs() < 1e-9);
    }
}

#[test]
fn commensurate_sections_give_periodic_pmd_vector() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let sections = vec![
        DgdSection::new(10.0, random_axis(&mut rng)).unwrap(),
        DgdSection::new(20.0, random_axis(&mut rng)).unwrap(),
    ];
    let retarders: Vec<Retarder> = (0..3).map(|_| random_retarder(&mut rng)).collect();
    // Both section rotations repeat after ω advances by 2π / 10 ps.
    let period = TAU / 10e-12;
    for k in 0..20 {
        let omega = OMEGA0 + k as f64 * period / 20.0;
        let a = total_pmd_analytic(&sections, &retarders, omega).unwrap();
        let b = total_pmd_analytic(&sections, &retarders, omega + period).unwrap();
        let c = total_pmd_analytic(&sections, &retarders, omega + 3.0 * period).unwrap();
        assert!((a - b).as_vector().amax() < 1e-8);
        assert!((a - c).as_vector().amax() < 1e-8);
    }
    let a = total_pmd_analytic(&sections, &retarders, OMEGA0).unwrap();
    let half = total_pmd_analytic(&sections, &retarders, OMEGA0 + 0.37 * period).unwrap();
    assert!((a - half).as_vector().amax() > 1e-3);
}

#[test]
fn principal_states_have_stationary_output_and_extreme_delays() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let grid = FrequencyGrid::with_step(OMEGA0, TAU * 1e6, 5).unwrap();
    for _ in 0..20 {
        let (sections, retarders) = random_instance(&mut rng, 1);
        let tau = sections[0].dgd_ps();
        if tau < 1.0 {
            continue;
        }
        let resp = cascade_response(&sections, &retarders, &grid).unwrap();
        let omega = extract_pmd_fd(&resp, &grid, 2, Referral::Input).unwrap();
        let psp = psp_pair(&omega).unwrap();
        let slow = JonesVector::from_stokes(&psp.slow).unwrap();
        let fast = JonesVector::from_stokes(&psp.fast).unwrap();
        let delay = launch_group_delay(&resp, &grid, &slow, 2).unwrap()
            - launch_group_delay(&resp, &grid, &fast, 2).unwrap();
        assert!((delay - tau).abs() < 1e-3, "{delay} vs {tau}");
        let other = JonesVector::from_stokes(&random_axis(&mut rng)).unwrap();
        let still = output_sop_derivative(&resp, &grid, &slow, 2).unwrap();
        let moving = output_sop_derivative(&resp, &grid, &other, 2).unwrap();
        assert!(still < 1e-4 * moving, "{still} vs {moving}");
    }
}

#[test]
fn rotation_matrix_rodrigues_agrees_with_quaternion_route() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..200 {
        let axis = random_axis(&mut rng);
        let angle = rng.random_range(-10.0..10.0);
        let r = RotationMatrix::from_axis_angle(&axis, angle);
        let q = nalgebra::UnitQuaternion::from_axis_angle(
            &nalgebra::Unit::new_normalize(*axis.as_vector()),
            angle,
        );
        let v = Vector3::new(0.3, -0.2, 0.9);
        assert!((r.apply_vector(&v) - q * v).amax() < 1e-12);
    }
}
