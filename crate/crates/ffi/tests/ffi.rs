use std::ffi::CStr;
use std::ptr;

use betacount_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(bc_last_error_message()) }.to_string_lossy().into_owned()
}

fn golden() -> *mut BcBeta {
    let mut beta = ptr::null_mut();
    assert_eq!(unsafe { bc_beta_new_quadratic(1, 1, &mut beta) }, BcStatus::Ok);
    beta
}

#[test]
fn golden_count_fixture() {
    unsafe {
        let beta = golden();
        let mut x = ptr::null_mut();
        assert_eq!(bc_point_from_parts(beta, 1, 1, 0, 1, &mut x), BcStatus::Ok);
        let (mut count, mut near) = (0u64, true);
        assert_eq!(bc_count_prefixes(beta, x, 2, &mut count, &mut near), BcStatus::Ok);
        assert_eq!((count, near), (3, false));
        assert!((bc_beta_value(beta) - 1.618_033_988_749_895).abs() < 1e-15);
        bc_point_free(x);
        bc_beta_free(beta);
    }
}

#[test]
fn float_count_matches_library() {
    unsafe {
        let mut beta = ptr::null_mut();
        assert_eq!(bc_beta_new_float(1.7, 1e-10, &mut beta), BcStatus::Ok);
        let mut x = ptr::null_mut();
        assert_eq!(bc_point_from_f64(beta, 0.8, &mut x), BcStatus::Ok);
        let (mut count, mut near) = (0u64, false);
        assert_eq!(bc_count_prefixes(beta, x, 16, &mut count, &mut near), BcStatus::Ok);
        let b = betacount::FloatBeta::new(1.7).unwrap();
        let direct = betacount::counting::count_prefixes(&0.8, 16, &b, &Default::default()).unwrap();
        assert_eq!(u64::try_from(&direct.count).unwrap(), count);
        bc_point_free(x);
        bc_beta_free(beta);
    }
}

#[test]
fn errors_map_to_status_codes() {
    unsafe {
        let mut beta = ptr::null_mut();
        assert_eq!(bc_beta_new_float(2.5, 1e-10, &mut beta), BcStatus::OutOfRange);
        assert!(beta.is_null());
        assert!(last_error().starts_with("OutOfRange"));
        assert_eq!(bc_beta_new_quadratic(1, 2, &mut beta), BcStatus::InvalidPolynomial);
        assert_eq!(bc_beta_new_float(1.5, 1e-10, ptr::null_mut()), BcStatus::NullPointer);

        let golden = golden();
        let mut float = ptr::null_mut();
        bc_beta_new_float(1.5, 1e-10, &mut float);
        let mut x = ptr::null_mut();
        bc_point_from_f64(float, 0.5, &mut x);
        let (mut c, mut near) = (0u64, false);
        assert_eq!(bc_count_prefixes(golden, x, 3, &mut c, &mut near), BcStatus::BackendMismatch);
        assert_eq!(bc_count_prefixes(float, x, 31, &mut c, &mut near), BcStatus::DepthExceeded);
        assert_eq!(bc_count_prefixes(float, ptr::null(), 3, &mut c, &mut near), BcStatus::NullPointer);
        assert!(last_error().contains("x is null"));

        let mut far = ptr::null_mut();
        bc_point_from_f64(float, 5.0, &mut far);
        assert_eq!(bc_count_prefixes(float, far, 3, &mut c, &mut near), BcStatus::PointOutsideInterval);
        assert_eq!(bc_point_from_parts(golden, 1, 0, 0, 1, &mut far), BcStatus::InvalidParams);
        bc_point_free(far);
        bc_point_free(x);
        bc_beta_free(float);
        bc_beta_free(golden);
        bc_beta_free(ptr::null_mut());
    }
}

#[test]
fn density_pieces() {
    unsafe {
        let beta = golden();
        let mut d = ptr::null_mut();
        assert_eq!(bc_density_new(beta, 1, &mut d), BcStatus::Ok);
        assert_eq!(bc_density_piece_count(d), 3);
        let (mut l, mut r, mut v) = (0.0, 0.0, 0.0);
        let mut values = Vec::new();
        for i in 0..3 {
            assert_eq!(bc_density_piece(d, i, &mut l, &mut r, &mut v), BcStatus::Ok);
            values.push(v);
        }
        assert_eq!(values, vec![0.5, 1.0, 0.5]);
        assert_eq!(bc_density_integral(d), 1.0);
        assert_eq!(bc_density_piece(d, 3, &mut l, &mut r, &mut v), BcStatus::InvalidParams);
        bc_density_free(d);
        bc_beta_free(beta);
    }
}

#[test]
fn entropy_and_simulation() {
    unsafe {
        let beta = golden();
        let (mut h, mut atoms) = (0.0, 0u64);
        assert_eq!(bc_garsia_entropy(beta, 3, &mut h, &mut atoms), BcStatus::Ok);
        assert_eq!(atoms, 7);
        assert!((h - 2.75 * std::f64::consts::LN_2).abs() < 1e-12);

        let (mut a, mut se_a, mut b, mut se_b) = (0.0, 0.0, 0.0, 0.0);
        assert_eq!(bc_estimate_mu_s(beta, 32, 1000, 100, 7, &mut a, &mut se_a), BcStatus::Ok);
        assert_eq!(bc_estimate_mu_s(beta, 32, 1000, 100, 7, &mut b, &mut se_b), BcStatus::Ok);
        assert_eq!((a, se_a), (b, se_b));
        assert!(a > 0.0 && a < 1.0);
        assert_eq!(bc_estimate_mu_s(beta, 1, 1000, 100, 7, &mut a, &mut se_a), BcStatus::InvalidParams);
        bc_beta_free(beta);
    }
}

#[test]
fn header_declares_every_export() {
    let header = include_str!("../include/betacount.h");
    for name in [
        "bc_last_error_message",
        "bc_beta_new_float",
        "bc_beta_new_quadratic",
        "bc_beta_free",
        "bc_beta_value",
        "bc_point_from_f64",
        "bc_point_from_parts",
        "bc_point_free",
        "bc_point_to_f64",
        "bc_count_prefixes",
        "bc_density_new",
        "bc_density_free",
        "bc_density_piece_count",
        "bc_density_piece",
        "bc_density_integral",
        "bc_garsia_entropy",
        "bc_estimate_mu_s",
        "typedef struct BcBeta BcBeta;",
        "BC_STATUS_PANIC = 12",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
