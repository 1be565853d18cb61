//! Closed-form dynamics for one charger in `sqrt(c1)|1> + sqrt(1-c1)|0>` and an
//! `m`-cell battery starting in `|0...0>`.
//!
//! Only the single-excitation sector moves. Its bright-mode amplitude is
//! `p(t) = e^{-lambda t/2} (cosh(zeta t/2) + (lambda/zeta) sinh(zeta t/2))`
//! with `zeta = lambda sqrt(1 - 2(m+1)R^2)`, and the charger and each cell
//! carry `nu1 = (p + m)/(m + 1)` and `nu2 = (p - 1)/(m + 1)`.
//!
//! Times are `lambda t`, energies are in units of `omega0`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numkernel::{ComplexMatrix, C64};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SingleChargerParams {
    pub c1: f64,
    pub m_cells: usize,
    pub r: f64,
}

/// Charging time from the closed form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ChargingTime {
    /// First maximum of `|nu2|` at `lambda t = 2 pi / |zeta/lambda|`.
    Finite(f64),
    /// Weak coupling: `|nu2|` grows monotonically towards `1/(m+1)`.
    Unbounded,
}

impl SingleChargerParams {
    pub fn new(c1: f64, m_cells: usize, r: f64) -> Self {
        Self { c1, m_cells, r }
    }

    fn m(&self) -> f64 {
        self.m_cells as f64
    }

    /// `2(m+1)R^2`; the regime boundary sits at 1.
    pub fn coupling_index(&self) -> f64 {
        2.0 * (self.m() + 1.0) * self.r * self.r
    }

    /// `zeta / lambda` on the principal branch: real below the boundary,
    /// positive imaginary above it.
    pub fn zeta(&self) -> Complex64 {
        Complex64::new(1.0 - self.coupling_index(), 0.0).sqrt()
    }

    pub fn p_of_t(&self, t: f64) -> f64 {
        let z = self.zeta();
        if z.norm() == 0.0 {
            return (-0.5 * t).exp() * (1.0 + 0.5 * t);
        }
        let grow = ((z - 1.0) * (0.5 * t)).exp();
        let shrink = ((-z - 1.0) * (0.5 * t)).exp();
        let value = 0.5 * ((1.0 + 1.0 / z) * grow + (1.0 - 1.0 / z) * shrink);
        debug_assert!(value.im.abs() <= 1e-12 * value.norm().max(1.0));
        value.re
    }

    pub fn nu_coefficients(&self, t: f64) -> (f64, f64) {
        let p = self.p_of_t(t);
        let m = self.m();
        ((p + m) / (m + 1.0), (p - 1.0) / (m + 1.0))
    }

    fn nu2_sq(&self, t: f64) -> f64 {
        let (_, nu2) = self.nu_coefficients(t);
        nu2 * nu2
    }

    /// `m`-cell battery state `|xi><xi| + c1 (1 - m nu2^2) |0><0|`.
    pub fn battery_state(&self, t: f64) -> ComplexMatrix {
        let (_, nu2) = self.nu_coefficients(t);
        battery_state_for(self.c1, self.m_cells, nu2)
    }

    pub fn ergotropy_mcell(&self, t: f64) -> f64 {
        mcell_ergotropy_for(self.c1, self.m(), self.nu2_sq(t))
    }

    pub fn ergotropy_cell(&self, t: f64) -> f64 {
        mcell_ergotropy_for(self.c1, 1.0, self.nu2_sq(t))
    }

    pub fn charging_time(&self) -> Result<ChargingTime> {
        let x = self.coupling_index();
        if x == 1.0 {
            return Err(Error::DegenerateZeta);
        }
        if x > 1.0 {
            Ok(ChargingTime::Finite(std::f64::consts::TAU / (x - 1.0).sqrt()))
        } else {
            Ok(ChargingTime::Unbounded)
        }
    }

    /// `(E(rho_ba), E(rho_ba,l))` at the charging time, or in the
    /// `t -> infinity` limit (`nu2 = -1/(m+1)`) for weak coupling.
    pub fn charged_ergotropies(&self) -> Result<(f64, f64)> {
        let nu2_sq = match self.charging_time()? {
            ChargingTime::Finite(t) => self.nu2_sq(t),
            ChargingTime::Unbounded => (1.0 / (self.m() + 1.0)).powi(2),
        };
        Ok((
            mcell_ergotropy_for(self.c1, self.m(), nu2_sq),
            mcell_ergotropy_for(self.c1, 1.0, nu2_sq),
        ))
    }
}

fn mcell_ergotropy_for(c1: f64, m: f64, nu2_sq: f64) -> f64 {
    let radicand = 1.0 + 4.0 * m * c1 * c1 * nu2_sq * (m * nu2_sq - 1.0);
    m * c1 * nu2_sq + 0.5 * radicand.max(0.0).sqrt() - 0.5
}

/// Battery state for a given `nu2`, basis index bit `m-1-l` set for cell `l`.
pub fn battery_state_for(c1: f64, m_cells: usize, nu2: f64) -> ComplexMatrix {
    let dim = 1usize << m_cells;
    let mut xi = vec![C64::new(0.0, 0.0); dim];
    xi[0] = C64::new((1.0 - c1).sqrt(), 0.0);
    for l in 0..m_cells {
        xi[1 << (m_cells - 1 - l)] = C64::new(c1.sqrt() * nu2, 0.0);
    }
    let mut rho = ComplexMatrix::outer(&xi);
    rho[(0, 0)] += C64::new(c1 * (1.0 - m_cells as f64 * nu2 * nu2), 0.0);
    rho
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ergotropy;
    use crate::model::register_hamiltonian;

    #[test]
    fn p_starts_at_one() {
        for r in [0.1, 0.5, 1.0, 20.0] {
            assert!((SingleChargerParams::new(1.0, 1, r).p_of_t(0.0) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn decoupled_p_is_constant() {
        let params = SingleChargerParams::new(1.0, 2, 0.0);
        for t in [0.1, 1.0, 5.0, 20.0] {
            assert!((params.p_of_t(t) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn p_at_zero_window_threshold() {
        // |nu2|^2 = 1/2 for m = 1 means p = 1 - sqrt(2)
        let params = SingleChargerParams::new(1.0, 1, 20.0);
        let p = params.p_of_t(0.1023);
        assert!((p - (1.0 - 2f64.sqrt())).abs() < 2e-3, "p = {p}");
    }

    #[test]
    fn p_continuous_across_boundary() {
        // m = 1: boundary at R = 1/2
        let below = SingleChargerParams::new(1.0, 1, 0.5 - 1e-7).p_of_t(3.0);
        let at = SingleChargerParams::new(1.0, 1, 0.5).p_of_t(3.0);
        let above = SingleChargerParams::new(1.0, 1, 0.5 + 1e-7).p_of_t(3.0);
        assert!((below - at).abs() < 1e-5 && (above - at).abs() < 1e-5);
        assert!((at - (-1.5f64).exp() * 2.5).abs() < 1e-14);
    }

    #[test]
    fn nu_limits() {
        let params = SingleChargerParams::new(1.0, 3, 0.1);
        let (nu1, nu2) = params.nu_coefficients(0.0);
        assert!((nu1 - 1.0).abs() < 1e-15 && nu2.abs() < 1e-15);
        let (_, nu2) = params.nu_coefficients(2000.0);
        assert!((nu2 + 0.25).abs() < 1e-10);
        let (_, nu2) = SingleChargerParams::new(1.0, 1, 0.1).nu_coefficients(4000.0);
        assert!((nu2.abs() - 0.5).abs() < 1e-10);
    }

    #[test]
    fn nu_identity() {
        for m in 1..=4 {
            let params = SingleChargerParams::new(0.6, m, 3.0);
            for k in 0..50 {
                let t = 0.03 * k as f64;
                let (nu1, nu2) = params.nu_coefficients(t);
                assert!((nu1 + m as f64 * nu2 - params.p_of_t(t)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn battery_state_shapes() {
        let params = SingleChargerParams::new(0.7, 2, 5.0);
        let ground = params.battery_state(0.0);
        assert!((ground[(0, 0)].re - 1.0).abs() < 1e-15);
        assert!((ground.trace().re - 1.0).abs() < 1e-15);
        let t = 0.4;
        let rho = params.battery_state(t);
        assert!((rho.trace().re - 1.0).abs() < 1e-14);
        // excited charger, single cell: diag{1 - nu2^2, nu2^2}
        let params = SingleChargerParams::new(1.0, 1, 5.0);
        let (_, nu2) = params.nu_coefficients(t);
        let expected = ComplexMatrix::from_real_diag(&[1.0 - nu2 * nu2, nu2 * nu2]);
        assert!(params.battery_state(t).max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn r10_charged_ergotropy() {
        let params = SingleChargerParams::new(1.0, 1, 10.0);
        let ChargingTime::Finite(t) = params.charging_time().unwrap() else {
            panic!("strong regime expected");
        };
        let (_, nu2) = params.nu_coefficients(t);
        assert!((nu2 * nu2 - 0.85976).abs() < 1e-5);
        assert!((params.ergotropy_mcell(t) - 0.7195).abs() < 1e-4);
    }

    #[test]
    fn single_cell_forms_agree() {
        let params = SingleChargerParams::new(0.45, 1, 7.0);
        for k in 0..20 {
            let t = 0.05 * k as f64;
            assert_eq!(params.ergotropy_mcell(t), params.ergotropy_cell(t));
        }
        assert_eq!(SingleChargerParams::new(0.45, 3, 7.0).ergotropy_cell(0.0), 0.0);
    }

    #[test]
    fn closed_form_matches_generic_ergotropy() {
        let mut checked = 0;
        for &c1 in &[0.2, 0.55, 0.8, 1.0] {
            for m in 1..=3 {
                for &t in &[0.05, 0.13, 0.31, 0.9, 1.7] {
                    let params = SingleChargerParams::new(c1, m, 20.0);
                    let rho = params.battery_state(t);
                    let h = register_hamiltonian(m, 1.0);
                    let generic = ergotropy::ergotropy(&rho, &h).unwrap();
                    assert!(
                        (generic - params.ergotropy_mcell(t)).abs() < 1e-10,
                        "c1={c1} m={m} t={t}"
                    );
                    checked += 1;
                }
            }
        }
        assert!(checked >= 20);
    }

    #[test]
    fn charging_times() {
        let t = |r: f64| match SingleChargerParams::new(1.0, 1, r).charging_time().unwrap() {
            ChargingTime::Finite(t) => t,
            ChargingTime::Unbounded => f64::INFINITY,
        };
        assert!((t(100.0) - 0.031416).abs() < 1e-6);
        assert!((t(20.0) - 0.15713).abs() < 1e-5);
        assert_eq!(t(0.1), f64::INFINITY);
        assert!(matches!(
            SingleChargerParams::new(1.0, 1, 0.5).charging_time(),
            Err(Error::DegenerateZeta)
        ));
    }

    #[test]
    fn charging_time_independent_of_c1() {
        let a = SingleChargerParams::new(0.2, 2, 9.0).charging_time().unwrap();
        let b = SingleChargerParams::new(0.9, 2, 9.0).charging_time().unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn strong_coupling_scaling() {
        let pi = std::f64::consts::PI;
        for m in 1..=4 {
            let mut last = f64::INFINITY;
            for r in [20.0, 100.0, 1000.0] {
                let params = SingleChargerParams::new(1.0, m, r);
                let ChargingTime::Finite(t) = params.charging_time().unwrap() else {
                    unreachable!()
                };
                let gap = (t.ln() + 0.5 * ((m + 1) as f64).ln() - (2f64.sqrt() * pi / r).ln()).abs();
                assert!(gap < last);
                last = gap;
            }
            assert!(last < 1e-6);
        }
    }

    #[test]
    fn maximum_at_charging_time() {
        for m in 1..=3 {
            for &c1 in &[0.3, 0.8, 1.0] {
                let params = SingleChargerParams::new(c1, m, 6.0);
                let ChargingTime::Finite(tbar) = params.charging_time().unwrap() else {
                    unreachable!()
                };
                let peak = params.ergotropy_mcell(tbar);
                for k in 0..=200 {
                    let t = tbar * k as f64 / 200.0;
                    assert!(params.ergotropy_mcell(t) <= peak + 1e-12);
                }
            }
        }
    }

    #[test]
    fn full_transfer_at_large_coupling() {
        for &c1 in &[0.3, 0.7, 1.0] {
            let (e, _) = SingleChargerParams::new(c1, 1, 1e4).charged_ergotropies().unwrap();
            assert!((e - c1).abs() < 1e-3);
        }
    }

    #[test]
    fn joint_cells_beat_independent_cells() {
        for m in 2..=4 {
            let (joint, cell) = SingleChargerParams::new(0.8, m, 20.0)
                .charged_ergotropies()
                .unwrap();
            assert!(joint > m as f64 * cell, "m={m}: {joint} vs {cell}");
        }
    }
}
