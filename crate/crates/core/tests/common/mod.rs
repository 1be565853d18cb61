#![allow(dead_code)]

use std::io::Write;

use qbcharge::numkernel::{eig_hermitian, ComplexMatrix, C64};
use rand::Rng;

pub fn ginibre(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

/// Random full-rank density matrix.
pub fn random_state(rng: &mut impl Rng, dim: usize) -> ComplexMatrix {
    let g = ginibre(rng, dim, dim);
    let rho = g.matmul(&g.dagger());
    let tr = rho.trace().re;
    rho.scale(C64::new(1.0 / tr, 0.0))
}

pub fn random_pure_state(rng: &mut impl Rng, dim: usize) -> ComplexMatrix {
    let ket: Vec<C64> = (0..dim)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let norm: f64 = ket.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let ket: Vec<C64> = ket.iter().map(|z| z / norm).collect();
    ComplexMatrix::outer(&ket)
}

pub fn random_hermitian(rng: &mut impl Rng, dim: usize) -> ComplexMatrix {
    let g = ginibre(rng, dim, dim);
    g.add(&g.dagger()).scale(C64::new(0.5, 0.0))
}

/// `exp(i h)` for a random Hermitian `h`.
pub fn random_unitary(rng: &mut impl Rng, dim: usize) -> ComplexMatrix {
    let (vals, vecs) = eig_hermitian(&random_hermitian(rng, dim).scale(C64::new(3.0, 0.0))).unwrap();
    let mut diag = ComplexMatrix::zeros(dim, dim);
    for (i, v) in vals.iter().enumerate() {
        diag[(i, i)] = C64::from_polar(1.0, *v);
    }
    diag.conjugate_by(&vecs)
}

/// Print a verdict line past the test harness's output capture.
pub fn verdict(label: &str, outcome: &Result<String, String>) {
    let line = match outcome {
        Ok(detail) => format!("PASS  {label}: {detail}"),
        Err(detail) => format!("FAIL  {label}: {detail}"),
    };
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "{line}");
}

pub fn conclude(label: &str, outcome: Result<String, String>) {
    verdict(label, &outcome);
    if let Err(detail) = outcome {
        panic!("{label}: {detail}");
    }
}

pub fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}
