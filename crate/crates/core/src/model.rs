//! Charger/battery register, pseudomode operators, and initial states.
//!
//! Units: energies in `omega0`, rates in `lambda`. The register layout is
//! `[charger 1 .. charger n, cell 1 .. cell m, pseudomode]`; qubit basis
//! index 0 is the ground state `|0>` and index 1 the excited state `|1>`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::{kron_all, kron_vec, ComplexMatrix, HilbertLayout, C64, ONE, ZERO};

#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    pub n_chargers: usize,
    pub m_cells: usize,
    pub omega0: f64,
    /// Coupling ratio `R = sqrt(2) Omega / lambda`.
    pub ratio: f64,
    /// Lorentzian half-width `lambda`; also the inverse time unit.
    pub lambda: f64,
    /// Highest pseudomode Fock state kept.
    pub ncut: usize,
}

impl ModelSpec {
    /// Model in natural units (`omega0 = lambda = 1`) at coupling ratio `r`,
    /// truncated at `n + m` photons.
    pub fn new(n_chargers: usize, m_cells: usize, r: f64) -> Result<Self> {
        let spec = Self {
            n_chargers,
            m_cells,
            omega0: 1.0,
            ratio: r,
            lambda: 1.0,
            ncut: n_chargers + m_cells,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn r(&self) -> f64 {
        self.ratio
    }

    pub fn set_r(&mut self, r: f64) {
        self.ratio = r;
    }

    /// Effective qubit-pseudomode coupling `Omega`.
    pub fn coupling(&self) -> f64 {
        self.ratio * self.lambda / std::f64::consts::SQRT_2
    }

    pub fn with_ncut(mut self, ncut: usize) -> Result<Self> {
        self.ncut = ncut;
        self.validate()?;
        Ok(self)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_chargers + self.m_cells
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_chargers == 0 || self.m_cells == 0 {
            return Err(Error::InvalidModel(
                "need at least one charger and one battery cell".into(),
            ));
        }
        if !(self.omega0.is_finite() && self.omega0 > 0.0) {
            return Err(Error::InvalidModel(format!("omega0 = {}", self.omega0)));
        }
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::InvalidModel(format!("lambda = {}", self.lambda)));
        }
        if !(self.ratio.is_finite() && self.ratio >= 0.0) {
            return Err(Error::InvalidModel(format!("R = {}", self.ratio)));
        }
        if self.ncut < self.n_qubits() {
            return Err(Error::InvalidModel(format!(
                "ncut = {} is below n + m = {}; the truncation would not be exact",
                self.ncut,
                self.n_qubits()
            )));
        }
        Ok(())
    }

    /// Layout of the extended register (qubits then pseudomode).
    pub fn layout(&self) -> HilbertLayout {
        let mut dims = vec![2; self.n_qubits()];
        dims.push(self.ncut + 1);
        HilbertLayout::new(dims).expect("validated spec")
    }

    pub fn qubit_dim(&self) -> usize {
        1 << self.n_qubits()
    }

    pub fn charger_factors(&self) -> Vec<usize> {
        (0..self.n_chargers).collect()
    }

    pub fn battery_factors(&self) -> Vec<usize> {
        (self.n_chargers..self.n_qubits()).collect()
    }

    pub fn pseudomode_factor(&self) -> usize {
        self.n_qubits()
    }
}

/// `omega0 * (number of excited qubits)` on a register of `k` qubits.
pub fn register_hamiltonian(k: usize, omega0: f64) -> ComplexMatrix {
    let diag: Vec<f64> = (0..1usize << k)
        .map(|i| omega0 * i.count_ones() as f64)
        .collect();
    ComplexMatrix::from_real_diag(&diag)
}

/// Free Hamiltonians of the qubit register and its two parts.
#[derive(Clone, Debug)]
pub struct SystemHamiltonians {
    pub system: ComplexMatrix,
    pub chargers: ComplexMatrix,
    pub battery: ComplexMatrix,
    pub cell: ComplexMatrix,
}

pub fn build_system_hamiltonian(spec: &ModelSpec) -> SystemHamiltonians {
    SystemHamiltonians {
        system: register_hamiltonian(spec.n_qubits(), spec.omega0),
        chargers: register_hamiltonian(spec.n_chargers, spec.omega0),
        battery: register_hamiltonian(spec.m_cells, spec.omega0),
        cell: register_hamiltonian(1, spec.omega0),
    }
}

fn sigma_plus() -> ComplexMatrix {
    // |1><0|
    ComplexMatrix::from_rows(&[vec![ZERO, ZERO], vec![ONE, ZERO]])
}

fn ladder(ncut: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(ncut + 1, ncut + 1, |i, j| {
        if j == i + 1 {
            C64::new((j as f64).sqrt(), 0.0)
        } else {
            ZERO
        }
    })
}

/// Embed a single-factor operator into the extended register.
fn embed(spec: &ModelSpec, factor: usize, op: &ComplexMatrix) -> ComplexMatrix {
    let layout = spec.layout();
    let factors: Vec<ComplexMatrix> = layout
        .dims()
        .iter()
        .enumerate()
        .map(|(k, &d)| {
            if k == factor {
                op.clone()
            } else {
                ComplexMatrix::identity(d)
            }
        })
        .collect();
    kron_all(factors.iter())
}

/// Pseudomode annihilation operator `a` on the extended register.
pub fn build_annihilation(spec: &ModelSpec) -> ComplexMatrix {
    embed(spec, spec.pseudomode_factor(), &ladder(spec.ncut))
}

/// `V = Omega * sum_i sigma_i^+ a + h.c.` on the extended register.
pub fn build_interaction(spec: &ModelSpec) -> ComplexMatrix {
    let a = build_annihilation(spec);
    let dim = a.rows();
    let mut v = ComplexMatrix::zeros(dim, dim);
    for q in 0..spec.n_qubits() {
        let raise = embed(spec, q, &sigma_plus());
        let term = raise.matmul(&a);
        v.axpy(C64::new(spec.coupling(), 0.0), &term);
    }
    let vd = v.dagger();
    v.add(&vd)
}

/// Total excitation number `sum_i sigma_i^+ sigma_i^- + a^dag a` (diagonal).
pub fn build_excitation_number(spec: &ModelSpec) -> ComplexMatrix {
    let layout = spec.layout();
    let diag: Vec<f64> = (0..layout.total())
        .map(|i| layout.digits(i).iter().sum::<usize>() as f64)
        .collect();
    ComplexMatrix::from_real_diag(&diag)
}

/// Bell-like two-charger preparations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BellKind {
    /// `sqrt(c1)|10> + sqrt(1-c1)|01>`
    PsiPlus,
    /// `sqrt(c1)|10> - sqrt(1-c1)|01>`
    PsiMinus,
    /// `sqrt(c1)|11> + sqrt(1-c1)|00>`
    PhiPlus,
    /// `sqrt(c1)|11> - sqrt(1-c1)|00>`
    PhiMinus,
}

/// Initial charger/battery preparation. The pseudomode always starts in vacuum.
#[derive(Clone, Debug, PartialEq)]
pub enum Scenario {
    /// Chargers in `sqrt(c_i)|1> + sqrt(1-c_i)|0>`, battery in the ground state.
    Product { c: Vec<f64> },
    /// Chargers fully excited, first cell in `sqrt(e1)|1> + sqrt(1-e1)|0>`.
    Residual { e1: f64 },
    /// Two correlated chargers, battery in the ground state.
    Bell { kind: BellKind, c1: f64 },
    /// Each charger in `diag{1-c1, c1}` (excited weight `c1`), battery in the ground state.
    MixedCharger { c1: f64 },
    /// Chargers fully excited, first cell in `diag{1-e1, e1}`.
    MixedBattery { e1: f64 },
}

impl Scenario {
    pub fn label(&self) -> &'static str {
        match self {
            Scenario::Product { .. } => "scenario-i",
            Scenario::Residual { .. } => "scenario-ii",
            Scenario::Bell { kind, .. } => match kind {
                BellKind::PsiPlus => "bell-psi-plus",
                BellKind::PsiMinus => "bell-psi-minus",
                BellKind::PhiPlus => "bell-phi-plus",
                BellKind::PhiMinus => "bell-phi-minus",
            },
            Scenario::MixedCharger { .. } => "mixed-charger",
            Scenario::MixedBattery { .. } => "mixed-battery",
        }
    }

    pub fn validate(&self, spec: &ModelSpec) -> Result<()> {
        let unit = |name: &str, x: f64| -> Result<()> {
            if (0.0..=1.0).contains(&x) {
                Ok(())
            } else {
                Err(Error::IncompatibleScenario(format!("{name} = {x} outside [0, 1]")))
            }
        };
        match self {
            Scenario::Product { c } => {
                if c.len() != spec.n_chargers {
                    return Err(Error::IncompatibleScenario(format!(
                        "{} charger coefficients for {} chargers",
                        c.len(),
                        spec.n_chargers
                    )));
                }
                c.iter().try_for_each(|&x| unit("c", x))
            }
            Scenario::Residual { e1 } | Scenario::MixedBattery { e1 } => unit("e1", *e1),
            Scenario::Bell { c1, .. } => {
                if spec.n_chargers != 2 {
                    return Err(Error::IncompatibleScenario(format!(
                        "Bell-like chargers need n = 2, got n = {}",
                        spec.n_chargers
                    )));
                }
                unit("c1", *c1)
            }
            Scenario::MixedCharger { c1 } => unit("c1", *c1),
        }
    }
}

fn qubit_ket(excited_weight: f64) -> Vec<C64> {
    vec![
        C64::new((1.0 - excited_weight).sqrt(), 0.0),
        C64::new(excited_weight.sqrt(), 0.0),
    ]
}

fn mixed_qubit(excited_weight: f64) -> ComplexMatrix {
    ComplexMatrix::from_real_diag(&[1.0 - excited_weight, excited_weight])
}

fn ground(dim: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(dim, dim);
    m[(0, 0)] = ONE;
    m
}

/// Qubit-register state `rho_ch ⊗ rho_ba` without the pseudomode.
pub fn build_register_state(spec: &ModelSpec, scen: &Scenario) -> Result<ComplexMatrix> {
    spec.validate()?;
    scen.validate(spec)?;
    let excited = qubit_ket(1.0);
    let vacuum_cells = |k: usize| ground(1 << k);
    let state = match scen {
        Scenario::Product { c } => {
            let ket = c
                .iter()
                .fold(vec![ONE], |acc, &ci| kron_vec(&acc, &qubit_ket(ci)));
            kron_all([&ComplexMatrix::outer(&ket), &vacuum_cells(spec.m_cells)])
        }
        Scenario::Residual { e1 } => {
            let mut ket = vec![ONE];
            for _ in 0..spec.n_chargers {
                ket = kron_vec(&ket, &excited);
            }
            ket = kron_vec(&ket, &qubit_ket(*e1));
            let mut rho = ComplexMatrix::outer(&ket);
            if spec.m_cells > 1 {
                rho = kron_all([&rho, &vacuum_cells(spec.m_cells - 1)]);
            }
            rho
        }
        Scenario::Bell { kind, c1 } => {
            let a = C64::new(c1.sqrt(), 0.0);
            let b = C64::new((1.0 - c1).sqrt(), 0.0);
            // two-charger basis order |00>, |01>, |10>, |11>
            let ket = match kind {
                BellKind::PsiPlus => vec![ZERO, b, a, ZERO],
                BellKind::PsiMinus => vec![ZERO, -b, a, ZERO],
                BellKind::PhiPlus => vec![b, ZERO, ZERO, a],
                BellKind::PhiMinus => vec![-b, ZERO, ZERO, a],
            };
            kron_all([&ComplexMatrix::outer(&ket), &vacuum_cells(spec.m_cells)])
        }
        Scenario::MixedCharger { c1 } => {
            let chargers: Vec<ComplexMatrix> =
                (0..spec.n_chargers).map(|_| mixed_qubit(*c1)).collect();
            kron_all(chargers.iter().chain([&vacuum_cells(spec.m_cells)]))
        }
        Scenario::MixedBattery { e1 } => {
            let mut factors: Vec<ComplexMatrix> =
                (0..spec.n_chargers).map(|_| mixed_qubit(1.0)).collect();
            factors.push(mixed_qubit(*e1));
            if spec.m_cells > 1 {
                factors.push(vacuum_cells(spec.m_cells - 1));
            }
            kron_all(factors.iter())
        }
    };
    Ok(state)
}

/// Extended-register initial state with the pseudomode in vacuum.
pub fn build_initial_state(spec: &ModelSpec, scen: &Scenario) -> Result<ComplexMatrix> {
    let register = build_register_state(spec, scen)?;
    Ok(kron_all([&register, &ground(spec.ncut + 1)]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ergotropy;
    use crate::numkernel::{eigvals_hermitian, partial_trace};

    #[test]
    fn system_hamiltonian_single_pair() {
        let spec = ModelSpec::new(1, 1, 20.0).unwrap();
        let h = build_system_hamiltonian(&spec);
        assert_eq!(h.system, ComplexMatrix::from_real_diag(&[0.0, 1.0, 1.0, 2.0]));
        assert_eq!(h.battery[(1, 1)], ONE);
    }

    #[test]
    fn system_hamiltonian_trace_counts_excitations() {
        for n_qubits in 1..=5 {
            let h = register_hamiltonian(n_qubits, 1.0);
            let expected = (n_qubits * (1 << (n_qubits - 1))) as f64;
            assert_eq!(h.trace().re, expected);
        }
    }

    #[test]
    fn interaction_single_qubit_single_photon() {
        // n + m = 1 is not a valid charger/battery model, so check the
        // elementary matrix element on the smallest valid register instead:
        // |0 0, 1> -> Omega |1 0, 0> + Omega |0 1, 0>
        let spec = ModelSpec::new(1, 1, 2.0).unwrap();
        let v = build_interaction(&spec);
        let layout = spec.layout();
        let idx = |q1: usize, q2: usize, k: usize| (q1 * 2 + q2) * layout.dims()[2] + k;
        let omega = spec.coupling();
        assert!((v[(idx(1, 0, 0), idx(0, 0, 1))].re - omega).abs() < 1e-15);
        assert!((v[(idx(0, 1, 0), idx(0, 0, 1))].re - omega).abs() < 1e-15);
        // bosonic factor sqrt(2) from |.., 2> to |.., 1>
        assert!((v[(idx(1, 0, 1), idx(0, 0, 2))].re - omega * 2f64.sqrt()).abs() < 1e-14);
        assert_eq!(v.hermiticity_defect(), 0.0);
    }

    #[test]
    fn interaction_conserves_excitations() {
        let spec = ModelSpec::new(2, 1, 3.0).unwrap();
        let v = build_interaction(&spec);
        let n = build_excitation_number(&spec);
        assert!(v.commutator(&n).max_abs() <= 1e-12);
    }

    #[test]
    fn ncut_below_total_is_rejected() {
        let spec = ModelSpec::new(2, 1, 1.0).unwrap();
        assert!(spec.clone().with_ncut(2).is_err());
        assert!(spec.with_ncut(5).is_ok());
        assert!(ModelSpec::new(0, 1, 1.0).is_err());
        assert!(ModelSpec::new(1, 1, -1.0).is_err());
    }

    #[test]
    fn excited_charger_initial_state() {
        let spec = ModelSpec::new(1, 1, 1.0).unwrap();
        let rho = build_initial_state(&spec, &Scenario::Product { c: vec![1.0] }).unwrap();
        // |1> ⊗ |0> ⊗ |vac>: index (1*2 + 0)*3 + 0 = 6
        assert_eq!(rho[(6, 6)], ONE);
        assert!((rho.trace().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn psi_minus_is_decoherence_free_at_half() {
        let spec = ModelSpec::new(2, 1, 1.0).unwrap();
        let scen = Scenario::Bell {
            kind: BellKind::PsiMinus,
            c1: 0.5,
        };
        let rho = build_initial_state(&spec, &scen).unwrap();
        let ch = partial_trace(&rho, &spec.layout(), &spec.charger_factors()).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let singlet = ComplexMatrix::outer(&[ZERO, C64::new(-h, 0.0), C64::new(h, 0.0), ZERO]);
        assert!(ch.max_abs_diff(&singlet) < 1e-15);
    }

    #[test]
    fn residual_battery_ergotropy() {
        let spec = ModelSpec::new(1, 1, 1.0).unwrap();
        let rho = build_initial_state(&spec, &Scenario::Residual { e1: 0.3 }).unwrap();
        let ba = partial_trace(&rho, &spec.layout(), &spec.battery_factors()).unwrap();
        let h = build_system_hamiltonian(&spec);
        assert!((ergotropy::ergotropy(&ba, &h.battery).unwrap() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn initial_energies_and_ergotropy() {
        let cases: Vec<(ModelSpec, Scenario, f64)> = vec![
            (
                ModelSpec::new(2, 1, 1.0).unwrap(),
                Scenario::Product { c: vec![0.3, 0.8] },
                1.1,
            ),
            (ModelSpec::new(2, 2, 1.0).unwrap(), Scenario::Residual { e1: 0.4 }, 2.4),
            (
                ModelSpec::new(2, 1, 1.0).unwrap(),
                Scenario::Bell {
                    kind: BellKind::PsiPlus,
                    c1: 0.83,
                },
                1.0,
            ),
            (
                ModelSpec::new(2, 1, 1.0).unwrap(),
                Scenario::Bell {
                    kind: BellKind::PsiMinus,
                    c1: 0.21,
                },
                1.0,
            ),
            (ModelSpec::new(1, 1, 1.0).unwrap(), Scenario::MixedBattery { e1: 0.4 }, 1.4),
        ];
        for (spec, scen, expected) in cases {
            let reg = build_register_state(&spec, &scen).unwrap();
            let h = build_system_hamiltonian(&spec);
            let e = ergotropy::mean_energy(&reg, &h.system).unwrap();
            assert!((e - expected).abs() < 1e-12, "{scen:?}: {e}");
            let rho = build_initial_state(&spec, &scen).unwrap();
            assert!((rho.trace().re - 1.0).abs() < 1e-12);
            assert!(eigvals_hermitian(&rho).unwrap()[0] >= -1e-12);
        }
    }

    #[test]
    fn empty_batteries_start_with_zero_ergotropy() {
        let spec = ModelSpec::new(1, 1, 1.0).unwrap();
        let h = build_system_hamiltonian(&spec);
        for scen in [
            Scenario::Product { c: vec![0.7] },
            Scenario::MixedBattery { e1: 0.5 },
            Scenario::MixedBattery { e1: 0.2 },
        ] {
            let rho = build_initial_state(&spec, &scen).unwrap();
            let ba = partial_trace(&rho, &spec.layout(), &spec.battery_factors()).unwrap();
            assert_eq!(ergotropy::ergotropy(&ba, &h.battery).unwrap(), 0.0);
        }
    }

    #[test]
    fn incompatible_scenarios() {
        let spec = ModelSpec::new(1, 1, 1.0).unwrap();
        let bell = Scenario::Bell {
            kind: BellKind::PhiPlus,
            c1: 0.5,
        };
        assert!(matches!(
            build_initial_state(&spec, &bell),
            Err(Error::IncompatibleScenario(_))
        ));
        let short = Scenario::Product { c: vec![] };
        assert!(build_initial_state(&spec, &short).is_err());
        let range = Scenario::Residual { e1: 1.5 };
        assert!(build_initial_state(&spec, &range).is_err());
    }
}
