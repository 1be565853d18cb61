//! Pseudomode master-equation integration.
//!
//! The extended state obeys
//! `d rho/dt = -i[V, rho] + lambda (2 a rho a^dag - a^dag a rho - rho a^dag a)`
//! in the interaction picture. Time is measured as the dimensionless `lambda t`
//! throughout, so the stepper integrates the generator divided by `lambda`.

use crate::ergotropy::{self, ErgotropyBreakdown};
use crate::error::{Error, Result};
use crate::model::{self, ModelSpec, Scenario, SystemHamiltonians};
use crate::numkernel::{eig_hermitian, partial_trace, ComplexMatrix, SparseMatrix, C64};

/// Full-register trace drift tolerated before a run is aborted.
pub const TRACE_TOL: f64 = 1e-7;
/// Weak-coupling horizon in units of `1/lambda`.
pub const WEAK_HORIZON: f64 = 30.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig {
    /// Step in units of `1/lambda`.
    pub dt: f64,
    /// Horizon in units of `1/lambda`.
    pub t_max: f64,
    pub record_stride: usize,
}

impl IntegratorConfig {
    /// `dt = 0.002 / max(1, R)` over the default horizon, recording every step.
    pub fn default_for(spec: &ModelSpec) -> Self {
        Self {
            dt: default_dt(spec),
            t_max: default_horizon(spec),
            record_stride: 1,
        }
    }

    pub fn validate(&self, spec: &ModelSpec) -> Result<()> {
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return Err(Error::InvalidModel(format!("t_max = {}", self.t_max)));
        }
        if self.record_stride == 0 {
            return Err(Error::InvalidModel("record_stride must be positive".into()));
        }
        let limit = stability_limit(spec);
        if !(self.dt > 0.0) || self.dt > limit {
            return Err(Error::StepSize {
                dt: self.dt,
                limit,
            });
        }
        Ok(())
    }
}

pub fn default_dt(spec: &ModelSpec) -> f64 {
    0.002 / spec.r().max(1.0)
}

/// Largest accepted step: `0.01 / max(1, R sqrt(n + m))`.
pub fn stability_limit(spec: &ModelSpec) -> f64 {
    0.01 / (spec.r() * (spec.n_qubits() as f64).sqrt()).max(1.0)
}

/// Three periods `2 pi / sqrt(2R^2 - 1)` of the slowest (single-qubit)
/// vacuum Rabi oscillation, capped at [`WEAK_HORIZON`]. The cap also applies
/// when `2(n+m)R^2 <= 1` or `2R^2 <= 1`.
pub fn default_horizon(spec: &ModelSpec) -> f64 {
    let r = spec.r();
    let collective = 2.0 * spec.n_qubits() as f64 * r * r;
    let single = 2.0 * r * r;
    if collective > 1.0 && single > 1.0 {
        (3.0 * std::f64::consts::TAU / (single - 1.0).sqrt()).min(WEAK_HORIZON)
    } else {
        WEAK_HORIZON
    }
}

/// Dense right-hand side of the master equation in physical time.
pub fn lindblad_rhs(
    rho: &ComplexMatrix,
    v: &ComplexMatrix,
    lambda: f64,
    a: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    let d = rho.rows();
    for (name, m) in [("rho", rho), ("V", v), ("a", a)] {
        if m.rows() != d || m.cols() != d {
            return Err(Error::Dimension(format!(
                "{name} is {}x{}, expected {d}x{d}",
                m.rows(),
                m.cols()
            )));
        }
    }
    let minus_i = C64::new(0.0, -1.0);
    let ad = a.dagger();
    let n = ad.matmul(a);
    let mut out = v.commutator(rho).scale(minus_i);
    let jump = a.matmul(rho).matmul(&ad).scale(C64::new(2.0, 0.0));
    let anti = n.matmul(rho).add(&rho.matmul(&n));
    out.axpy(C64::new(lambda, 0.0), &jump.sub(&anti));
    Ok(out)
}

/// Sparse generator in `lambda t` units, precomputed once per model.
#[derive(Clone, Debug)]
pub struct Generator {
    v: SparseMatrix,
    a: SparseMatrix,
    number: Vec<f64>,
    dim: usize,
}

impl Generator {
    pub fn new(spec: &ModelSpec) -> Self {
        let v = model::build_interaction(spec).scale(C64::new(1.0 / spec.lambda, 0.0));
        let a = model::build_annihilation(spec);
        let number = a.dagger().matmul(&a).diag_real();
        Self {
            dim: v.rows(),
            v: SparseMatrix::from_dense(&v),
            a: SparseMatrix::from_dense(&a),
            number,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `out = L[rho]`; `scratch` must be `dim x dim`.
    pub fn apply(&self, rho: &ComplexMatrix, out: &mut ComplexMatrix, scratch: &mut ComplexMatrix) {
        let d = self.dim;
        // scratch = V rho; for Hermitian rho, rho V = scratch^dag
        self.v.mul_dense_into(rho, scratch);
        let minus_i = C64::new(0.0, -1.0);
        {
            let s = scratch.as_slice();
            let r = rho.as_slice();
            let o = out.as_mut_slice();
            for i in 0..d {
                let ni = self.number[i];
                for j in 0..d {
                    let comm = s[i * d + j] - s[j * d + i].conj();
                    o[i * d + j] = minus_i * comm - r[i * d + j] * (ni + self.number[j]);
                }
            }
        }
        self.a.sandwich_add(rho, C64::new(2.0, 0.0), out);
    }

    /// `<a^dag a>`
    pub fn occupation(&self, rho: &ComplexMatrix) -> f64 {
        self.number
            .iter()
            .enumerate()
            .map(|(i, n)| n * rho[(i, i)].re)
            .sum()
    }
}

/// Recorded reduced states and observables of one run.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub spec: ModelSpec,
    pub config: IntegratorConfig,
    /// `lambda t` at each record.
    pub times: Vec<f64>,
    pub battery_states: Vec<ComplexMatrix>,
    pub charger_states: Vec<ComplexMatrix>,
    /// Battery ergotropy breakdown against `H_ba`.
    pub battery: Vec<ErgotropyBreakdown>,
    /// Charger ergotropy breakdown against `H_ch`.
    pub charger: Vec<ErgotropyBreakdown>,
    pub pseudomode_occupation: Vec<f64>,
    /// `<sum sigma^+ sigma^- + a^dag a>` on the full register.
    pub excitation_number: Vec<f64>,
    pub trace_deviation: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn battery_ergotropy(&self) -> Vec<f64> {
        self.battery.iter().map(|b| b.total).collect()
    }

    pub fn hamiltonians(&self) -> SystemHamiltonians {
        model::build_system_hamiltonian(&self.spec)
    }

    /// Reduced state of battery cell `l` (0-based) at record `k`.
    pub fn cell_state(&self, k: usize, l: usize) -> Result<ComplexMatrix> {
        let layout = crate::numkernel::HilbertLayout::qubits(self.spec.m_cells)?;
        partial_trace(&self.battery_states[k], &layout, &[l])
    }
}

fn checked_breakdown(
    state: &ComplexMatrix,
    h: &ComplexMatrix,
    subsystem: &'static str,
    time: f64,
) -> Result<ErgotropyBreakdown> {
    ergotropy::breakdown(state, h).map_err(|e| match e {
        Error::NotPhysical { min_eigenvalue, .. } => Error::PositivityBreach {
            subsystem,
            time,
            min_eigenvalue,
        },
        other => other,
    })
}

/// Integrate from the scenario's initial state with fixed-step RK4.
pub fn evolve(spec: &ModelSpec, scen: &Scenario, cfg: &IntegratorConfig) -> Result<Trajectory> {
    let rho0 = model::build_initial_state(spec, scen)?;
    evolve_from(spec, rho0, cfg)
}

/// Integrate from an arbitrary extended-register state.
pub fn evolve_from(
    spec: &ModelSpec,
    rho0: ComplexMatrix,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    spec.validate()?;
    cfg.validate(spec)?;
    let generator = Generator::new(spec);
    let d = generator.dim();
    if rho0.rows() != d || rho0.cols() != d {
        return Err(Error::Dimension(format!(
            "initial state is {}x{}, register dimension is {d}",
            rho0.rows(),
            rho0.cols()
        )));
    }
    let layout = spec.layout();
    let hams = model::build_system_hamiltonian(spec);
    let chargers = spec.charger_factors();
    let battery = spec.battery_factors();
    let excitations = model::build_excitation_number(spec).diag_real();

    let steps = (cfg.t_max / cfg.dt - 1e-9).ceil().max(1.0) as usize;
    let h = cfg.t_max / steps as f64;
    let capacity = steps / cfg.record_stride + 2;

    let mut traj = Trajectory {
        spec: spec.clone(),
        config: *cfg,
        times: Vec::with_capacity(capacity),
        battery_states: Vec::with_capacity(capacity),
        charger_states: Vec::with_capacity(capacity),
        battery: Vec::with_capacity(capacity),
        charger: Vec::with_capacity(capacity),
        pseudomode_occupation: Vec::with_capacity(capacity),
        excitation_number: Vec::with_capacity(capacity),
        trace_deviation: Vec::with_capacity(capacity),
    };

    let mut record = |rho: &ComplexMatrix, time: f64| -> Result<()> {
        let deviation = (rho.trace() - C64::new(1.0, 0.0)).norm();
        if deviation > TRACE_TOL {
            return Err(Error::TraceDrift { time, deviation });
        }
        let rho_ba = partial_trace(rho, &layout, &battery)?;
        let rho_ch = partial_trace(rho, &layout, &chargers)?;
        traj.battery
            .push(checked_breakdown(&rho_ba, &hams.battery, "battery", time)?);
        traj.charger
            .push(checked_breakdown(&rho_ch, &hams.chargers, "charger", time)?);
        traj.battery_states.push(rho_ba);
        traj.charger_states.push(rho_ch);
        traj.times.push(time);
        traj.pseudomode_occupation.push(generator.occupation(rho));
        traj.excitation_number.push(
            excitations
                .iter()
                .enumerate()
                .map(|(i, n)| n * rho[(i, i)].re)
                .sum(),
        );
        traj.trace_deviation.push(deviation);
        Ok(())
    };

    let mut rho = rho0;
    record(&rho, 0.0)?;

    let zeros = || ComplexMatrix::zeros(d, d);
    let (mut k1, mut k2, mut k3, mut k4) = (zeros(), zeros(), zeros(), zeros());
    let (mut stage, mut scratch) = (zeros(), zeros());
    let half = C64::new(0.5 * h, 0.0);
    let full = C64::new(h, 0.0);
    let sixth = C64::new(h / 6.0, 0.0);
    let third = C64::new(h / 3.0, 0.0);

    for step in 1..=steps {
        generator.apply(&rho, &mut k1, &mut scratch);

        stage.as_mut_slice().copy_from_slice(rho.as_slice());
        stage.axpy(half, &k1);
        generator.apply(&stage, &mut k2, &mut scratch);

        stage.as_mut_slice().copy_from_slice(rho.as_slice());
        stage.axpy(half, &k2);
        generator.apply(&stage, &mut k3, &mut scratch);

        stage.as_mut_slice().copy_from_slice(rho.as_slice());
        stage.axpy(full, &k3);
        generator.apply(&stage, &mut k4, &mut scratch);

        rho.axpy(sixth, &k1);
        rho.axpy(third, &k2);
        rho.axpy(third, &k3);
        rho.axpy(sixth, &k4);

        if step % cfg.record_stride == 0 || step == steps {
            record(&rho, step as f64 * h)?;
        }
    }
    Ok(traj)
}

/// Whether conjugating `state` by `exp(-i h t)` leaves its ergotropy
/// breakdown against `h` unchanged to 1e-10.
///
/// Recorded states live in the interaction picture; this confirms the
/// Schrödinger-picture state carries the same ergotropy.
pub fn rotating_frame_invariant(state: &ComplexMatrix, h: &ComplexMatrix, t: f64) -> Result<bool> {
    let (energies, basis) = eig_hermitian(h)?;
    let phases: Vec<C64> = energies
        .iter()
        .map(|&e| C64::from_polar(1.0, -e * t))
        .collect();
    let mut diag = ComplexMatrix::zeros(phases.len(), phases.len());
    for (i, p) in phases.iter().enumerate() {
        diag[(i, i)] = *p;
    }
    let u = basis.matmul(&diag).matmul(&basis.dagger());
    let rotated = state.conjugate_by(&u);
    let before = ergotropy::breakdown(state, h)?;
    let after = ergotropy::breakdown(&rotated, h)?;
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-10;
    Ok(close(before.total, after.total)
        && close(before.incoherent, after.incoherent)
        && close(before.coherent, after.coherent)
        && close(before.mean_energy, after.mean_energy))
}
