//! Plain conversions between Python-facing values and core types.

use num_complex::Complex64;
use qbcharge::analysis::{CriticalCriterion, IntegratorSettings, SweepAxis};
use qbcharge::model::BellKind;
use qbcharge::{ComplexMatrix, Error, Result};

pub fn matrix_from_rows(rows: &[Vec<Complex64>]) -> Result<ComplexMatrix> {
    let dim = rows.len();
    if dim == 0 || rows.iter().any(|r| r.len() != dim) {
        return Err(Error::Dimension(format!(
            "expected a non-empty square matrix, got {} rows",
            dim
        )));
    }
    Ok(ComplexMatrix::from_rows(rows))
}

pub fn matrix_to_rows(m: &ComplexMatrix) -> Vec<Vec<Complex64>> {
    m.to_rows()
}

pub fn bell_kind(name: &str) -> Result<BellKind> {
    match name {
        "psi-plus" => Ok(BellKind::PsiPlus),
        "psi-minus" => Ok(BellKind::PsiMinus),
        "phi-plus" => Ok(BellKind::PhiPlus),
        "phi-minus" => Ok(BellKind::PhiMinus),
        other => Err(Error::config(
            "kind",
            format!("unknown Bell kind `{other}` (psi-plus, psi-minus, phi-plus, phi-minus)"),
        )),
    }
}

pub fn axis(name: &str) -> Result<SweepAxis> {
    SweepAxis::parse(name)
        .ok_or_else(|| Error::config("axis", format!("unknown axis `{name}` (R, c1, e1, n, m)")))
}

pub fn criterion(name: &str, baseline_n: usize) -> Result<CriticalCriterion> {
    match name {
        "exceeds-initial" => Ok(CriticalCriterion::ExceedsInitial),
        "more-chargers-win" => Ok(CriticalCriterion::MoreChargersWin { baseline_n }),
        other => Err(Error::config(
            "criterion",
            format!("unknown criterion `{other}` (exceeds-initial, more-chargers-win)"),
        )),
    }
}

pub fn settings(dt: Option<f64>, t_max: Option<f64>, record_stride: usize) -> Result<IntegratorSettings> {
    if record_stride == 0 {
        return Err(Error::config("record_stride", "must be at least 1"));
    }
    for (key, v) in [("dt", dt), ("t_max", t_max)] {
        if let Some(x) = v {
            if !(x.is_finite() && x > 0.0) {
                return Err(Error::config(key, format!("must be positive, got {x}")));
            }
        }
    }
    Ok(IntegratorSettings {
        dt,
        t_max,
        record_stride,
    })
}
