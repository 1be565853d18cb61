use num_complex::Complex64;
use qbcharge::analysis::{CriticalCriterion, SweepAxis};
use qbcharge::model::BellKind;
use qbcharge_py::convert;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[test]
fn matrix_round_trip() {
    let rows = vec![vec![c(0.25), Complex64::new(0.1, -0.2)], vec![Complex64::new(0.1, 0.2), c(0.75)]];
    let m = convert::matrix_from_rows(&rows).unwrap();
    assert_eq!(m.rows(), 2);
    assert_eq!(convert::matrix_to_rows(&m), rows);
}

#[test]
fn ragged_or_empty_matrices_are_rejected() {
    assert!(convert::matrix_from_rows(&[]).is_err());
    let ragged = vec![vec![c(1.0), c(0.0)], vec![c(0.0)]];
    let e = convert::matrix_from_rows(&ragged).unwrap_err();
    assert_eq!(e.category(), "numerics");
    assert!(convert::matrix_from_rows(&[vec![c(1.0), c(0.0)]]).is_err());
}

#[test]
fn names_parse() {
    assert_eq!(convert::bell_kind("psi-minus").unwrap(), BellKind::PsiMinus);
    assert!(convert::bell_kind("psi").is_err());
    assert_eq!(convert::axis("R").unwrap(), SweepAxis::R);
    assert_eq!(convert::axis("m").unwrap(), SweepAxis::Cells);
    assert!(convert::axis("lambda").is_err());
    assert_eq!(
        convert::criterion("more-chargers-win", 1).unwrap(),
        CriticalCriterion::MoreChargersWin { baseline_n: 1 }
    );
    assert!(convert::criterion("bigger", 1).is_err());
}

#[test]
fn settings_are_checked() {
    let s = convert::settings(Some(1e-3), None, 2).unwrap();
    assert_eq!((s.dt, s.t_max, s.record_stride), (Some(1e-3), None, 2));
    assert!(convert::settings(None, None, 0).is_err());
    assert!(convert::settings(Some(-1.0), None, 1).is_err());
    assert!(convert::settings(None, Some(f64::NAN), 1).is_err());
}
