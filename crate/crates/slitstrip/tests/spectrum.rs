use nalgebra::DVector;
use proptest::prelude::*;
use slitstrip::clifford::{realify, InducedRotation};
use slitstrip::discrete_cx::{lambda_from_omega, solve_omega, EigenBasis, Extremity, SlitData, OMEGA_RATIO};
use slitstrip::geometry::StripGeometry;
use std::f64::consts::PI;

#[test]
fn rotation_spectrum_matches_the_root_equation() {
    for w in 1..=16 {
        let b = EigenBasis::new(w).unwrap();
        for (j, &lam) in b.lambda.iter().enumerate() {
            let want = lambda_from_omega(solve_omega(2 * j as i32 + 1, w).unwrap());
            assert!((lam - want).abs() < 1e-10 * want, "w={w} k={}/2", 2 * j + 1);
        }
    }
}

#[test]
fn eigenfunctions_are_translation_eigenvectors() {
    for w in 1..=16 {
        let b = EigenBasis::new(w).unwrap();
        let p = InducedRotation::new(w).unwrap().matrix();
        for (j, &lam) in b.lambda.iter().enumerate() {
            let k2 = 2 * j as i32 + 1;
            for (sign, mu) in [(1, lam), (-1, 1.0 / lam)] {
                let v = DVector::from_vec(realify(b.get(sign * k2)));
                let r = (&p * &v - &v * (1.0 / mu)).amax().min((&p * &v - &v * mu).amax());
                assert!(r < 1e-10 * lam, "w={w} k2={}", sign * k2);
            }
        }
    }
}

#[test]
fn slit_inner_products_hit_their_targets() {
    for (a, b) in [(-1, 1), (-2, 1), (-3, 4), (-5, 5)] {
        let d = SlitData::new(StripGeometry::new(a, b).unwrap()).unwrap();
        for e in [Extremity::Top, Extremity::Left, Extremity::Right] {
            let w = d.width_of(e) as i32;
            for k2 in (1..2 * w).step_by(2) {
                for kp in (1..2 * w).step_by(2) {
                    let sgn = if e == Extremity::Top { 1 } else { -1 };
                    let want = if kp == k2 { 1.0 } else { 0.0 };
                    assert!((d.ip(e, sgn * kp, e, k2).unwrap() - want).abs() < 1e-10, "{e:?} {k2} {kp}");
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn roots_lie_in_their_brackets(w in 1usize..200, j in 0usize..200) {
        prop_assume!(j < w);
        let k2 = 2 * j as i32 + 1;
        let om = solve_omega(k2, w).unwrap();
        let k = k2 as f64 / 2.0;
        prop_assert!(om > (k - 0.5) * PI / w as f64 && om < k * PI / w as f64);
        let wf = w as f64;
        let ratio = ((wf + 0.5) * om).cos() / ((wf - 0.5) * om).cos();
        prop_assert!((ratio - OMEGA_RATIO).abs() < 1e-9);
    }
}

#[test]
fn boundary_values_carry_the_fixed_phase() {
    for w in 1..=16 {
        let b = EigenBasis::new(w).unwrap();
        assert!(b.phase_defect < 1e-12, "w={w}: {:e}", b.phase_defect);
    }
}
