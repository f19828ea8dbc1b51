//! Concurrence over a (field intensity × τ) grid.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::dynamics::{
    closed_form_fock, closed_form_product, closed_form_werner, EffectivePropagator, EvolutionRoute,
    ExactPropagator, PhotonStatistics, PreparedState, EFFECTIVE_TAIL_TOL, EXACT_PADDING,
};
use crate::entanglement::{concurrence, concurrence_mixed};
use crate::error::{Error, Result};
use crate::linalg::{trace_distance, ComplexMatrix};
use crate::model::{HilbertIndex, SystemParams};
use crate::states::{werner_state, BellState, FieldSpec, QubitState, TwoQubitState};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Scenario {
    /// Product initial state `ψ⊗φ`.
    PurePure(QubitState, QubitState),
    Werner {
        gamma: f64,
        bell: BellState,
    },
}

impl Scenario {
    pub fn initial_atoms(&self) -> Result<TwoQubitState> {
        match *self {
            Scenario::PurePure(psi, phi) => Ok(TwoQubitState::product(&psi, &phi)),
            Scenario::Werner { gamma, bell } => werner_state(gamma, bell),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FieldFamily {
    Fock,
    Coherent,
    Thermal,
}

impl FieldFamily {
    fn check(self, intensity: f64) -> Result<()> {
        if !(intensity.is_finite() && intensity >= 0.0) {
            return Err(Error::InvalidField(format!(
                "intensity must be finite and non-negative, got {intensity}"
            )));
        }
        if self == FieldFamily::Fock && intensity.fract() != 0.0 {
            return Err(Error::InvalidField(format!(
                "Fock intensity must be an integer, got {intensity}"
            )));
        }
        Ok(())
    }

    /// Field with mean photon number `intensity` (real `α` for coherent fields).
    pub fn field(self, intensity: f64) -> Result<FieldSpec> {
        self.check(intensity)?;
        Ok(match self {
            FieldFamily::Fock => FieldSpec::fock(intensity as usize),
            FieldFamily::Coherent => FieldSpec::coherent(C64::new(intensity.sqrt(), 0.0)),
            FieldFamily::Thermal => FieldSpec::thermal(intensity),
        })
    }

    pub fn statistics(self, intensity: f64) -> Result<PhotonStatistics> {
        self.check(intensity)?;
        Ok(match self {
            FieldFamily::Fock => PhotonStatistics::Fock(intensity as usize),
            FieldFamily::Coherent => PhotonStatistics::Coherent { mean_n: intensity },
            FieldFamily::Thermal => PhotonStatistics::Thermal { mean_n: intensity },
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanSpec {
    pub scenario: Scenario,
    pub field_kind: FieldFamily,
    /// Mean photon numbers, ascending.
    pub intensity_axis: Vec<f64>,
    /// Dimensionless times τ = 2g²t/Δ, ascending.
    pub tau_axis: Vec<f64>,
    pub params: SystemParams,
    /// `None` selects the closed form for identical atoms and the effective route otherwise.
    pub route: Option<EvolutionRoute>,
}

fn check_axis(name: &str, axis: &[f64]) -> Result<()> {
    if axis.is_empty() {
        return Err(Error::InvalidScan(format!("{name} axis is empty")));
    }
    if axis.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidScan(format!(
            "{name} axis has a non-finite entry"
        )));
    }
    if axis.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidScan(format!(
            "{name} axis is not sorted ascending"
        )));
    }
    Ok(())
}

impl ScanSpec {
    pub fn validate(&self) -> Result<()> {
        check_axis("intensity", &self.intensity_axis)?;
        check_axis("tau", &self.tau_axis)?;
        for &x in &self.intensity_axis {
            self.field_kind.check(x)?;
        }
        self.scenario.initial_atoms()?;
        self.resolved_route()?.check(&self.params)
    }

    pub fn resolved_route(&self) -> Result<EvolutionRoute> {
        Ok(self.route.unwrap_or(if self.params.is_identical() {
            EvolutionRoute::ClosedForm
        } else {
            EvolutionRoute::EffectiveNumeric
        }))
    }

    pub fn rows(&self) -> usize {
        self.intensity_axis.len()
    }

    pub fn cols(&self) -> usize {
        self.tau_axis.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanResult {
    pub spec: ScanSpec,
    /// Row-major: row = intensity, column = τ.
    pub values: Vec<f64>,
    /// Route that produced each cell, in the same layout.
    pub provenance: Vec<EvolutionRoute>,
}

impl ScanResult {
    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.spec.cols() + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let c = self.spec.cols();
        &self.values[row * c..(row + 1) * c]
    }
}

#[derive(Clone, Debug)]
enum Engine {
    Closed {
        scenario: Scenario,
        stats: PhotonStatistics,
    },
    Effective(EffectivePropagator),
    Exact(Box<(ExactPropagator, PreparedState)>),
}

/// Reduced state and concurrence at one field intensity, any τ.
///
/// Construction does the expensive work (one spectral decomposition for the
/// exact route); evaluation at each τ is cheap and read-only.
#[derive(Clone, Debug)]
pub struct PointEvaluator {
    params: SystemParams,
    route: EvolutionRoute,
    engine: Engine,
}

impl PointEvaluator {
    pub fn new(
        scenario: Scenario,
        family: FieldFamily,
        intensity: f64,
        params: SystemParams,
        route: EvolutionRoute,
    ) -> Result<Self> {
        route.check(&params)?;
        let engine = match route {
            EvolutionRoute::ClosedForm => Engine::Closed {
                scenario,
                stats: family.statistics(intensity)?,
            },
            EvolutionRoute::EffectiveNumeric => Engine::Effective(EffectivePropagator::new(
                &params,
                &scenario.initial_atoms()?,
                &family.field(intensity)?.with_tail_below(EFFECTIVE_TAIL_TOL),
            )?),
            EvolutionRoute::Exact => {
                let field = family.field(intensity)?;
                let h = HilbertIndex::new(field.n_max + EXACT_PADDING);
                let prop = ExactPropagator::new(&params, h)?;
                let prepared = prop.prepare_state(&scenario.initial_atoms()?, &field)?;
                Engine::Exact(Box::new((prop, prepared)))
            }
        };
        Ok(Self {
            params,
            route,
            engine,
        })
    }

    pub fn route(&self) -> EvolutionRoute {
        self.route
    }

    pub fn state_at(&self, tau: f64) -> Result<TwoQubitState> {
        let t = self.params.time_from_tau(tau);
        match &self.engine {
            Engine::Closed { scenario, stats } => match (*scenario, *stats) {
                (Scenario::PurePure(psi, phi), PhotonStatistics::Fock(n)) => {
                    closed_form_fock(&psi, &phi, n, &self.params, t)
                }
                (Scenario::PurePure(psi, phi), stats) => {
                    closed_form_product(&psi, &phi, stats, &self.params, t)
                }
                (Scenario::Werner { gamma, bell }, stats) => {
                    closed_form_werner(gamma, bell, stats, &self.params, t)
                }
            },
            Engine::Effective(prop) => Ok(TwoQubitState::Mixed(prop.reduced_at(t))),
            Engine::Exact(b) => Ok(TwoQubitState::Mixed(b.0.reduced_at(&b.1, t))),
        }
    }

    pub fn density_at(&self, tau: f64) -> Result<ComplexMatrix> {
        Ok(self.state_at(tau)?.density())
    }

    pub fn concurrence_at(&self, tau: f64) -> Result<f64> {
        concurrence(&self.state_at(tau)?)
    }
}

fn scan_row(spec: &ScanSpec, route: EvolutionRoute, row: usize) -> Result<Vec<f64>> {
    let cell = |col: usize, e: Error| Error::Cell {
        row,
        col,
        source: Box::new(e),
    };
    let eval = PointEvaluator::new(
        spec.scenario,
        spec.field_kind,
        spec.intensity_axis[row],
        spec.params,
        route,
    )
    .map_err(|e| cell(0, e))?;
    spec.tau_axis
        .iter()
        .enumerate()
        .map(|(col, &tau)| eval.concurrence_at(tau).map_err(|e| cell(col, e)))
        .collect()
}

fn gather(
    spec: &ScanSpec,
    route: EvolutionRoute,
    rows: Vec<Result<Vec<f64>>>,
) -> Result<ScanResult> {
    let mut values = Vec::with_capacity(spec.rows() * spec.cols());
    for r in rows {
        values.extend(r?);
    }
    Ok(ScanResult {
        spec: spec.clone(),
        provenance: vec![route; values.len()],
        values,
    })
}

/// Evaluates every cell, intensity rows in parallel.
///
/// The first failing cell in row-major order aborts the scan.
pub fn run_scan(spec: &ScanSpec) -> Result<ScanResult> {
    spec.validate()?;
    let route = spec.resolved_route()?;
    let rows = (0..spec.rows())
        .into_par_iter()
        .map(|row| scan_row(spec, route, row))
        .collect();
    gather(spec, route, rows)
}

/// Single-threaded [`run_scan`].
pub fn run_scan_sequential(spec: &ScanSpec) -> Result<ScanResult> {
    spec.validate()?;
    let route = spec.resolved_route()?;
    let rows = (0..spec.rows())
        .map(|row| scan_row(spec, route, row))
        .collect();
    gather(spec, route, rows)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub tol: f64,
    pub max_trace_distance: f64,
    pub max_concurrence_diff: f64,
    /// (row, col) of the largest trace distance.
    pub worst_cell: (usize, usize),
    /// Cells whose trace distance exceeds `tol`.
    pub failures: usize,
    pub cells: usize,
}

impl ValidationReport {
    /// Pass iff every cell is within `tol` in trace distance.
    ///
    /// The concurrence difference is reported but not judged: concurrence is
    /// not contractive in trace distance and can differ by more than `tol`.
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Compares the exact route with the closed form on every cell of `spec`.
pub fn validation_sweep(spec: &ScanSpec, tol: f64) -> Result<ValidationReport> {
    let closed_spec = ScanSpec {
        route: Some(EvolutionRoute::ClosedForm),
        ..spec.clone()
    };
    closed_spec.validate()?;
    let rows: Vec<Result<Vec<(f64, f64)>>> = (0..spec.rows())
        .into_par_iter()
        .map(|row| {
            let x = spec.intensity_axis[row];
            let exact = PointEvaluator::new(
                spec.scenario,
                spec.field_kind,
                x,
                spec.params,
                EvolutionRoute::Exact,
            )?;
            let closed = PointEvaluator::new(
                spec.scenario,
                spec.field_kind,
                x,
                spec.params,
                EvolutionRoute::ClosedForm,
            )?;
            spec.tau_axis
                .iter()
                .map(|&tau| {
                    let a = exact.density_at(tau)?;
                    let b = closed.density_at(tau)?;
                    let dc = (concurrence_mixed(&a)? - concurrence_mixed(&b)?).abs();
                    Ok((trace_distance(&a, &b)?, dc))
                })
                .collect()
        })
        .collect();
    let mut report = ValidationReport {
        tol,
        max_trace_distance: 0.0,
        max_concurrence_diff: 0.0,
        worst_cell: (0, 0),
        failures: 0,
        cells: 0,
    };
    for (row, r) in rows.into_iter().enumerate() {
        for (col, (td, dc)) in r?.into_iter().enumerate() {
            report.cells += 1;
            if td > tol {
                report.failures += 1;
            }
            if td > report.max_trace_distance {
                report.max_trace_distance = td;
                report.worst_cell = (row, col);
            }
            report.max_concurrence_diff = report.max_concurrence_diff.max(dc);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entanglement::linspace;
    use crate::states::theta_state;
    use std::f64::consts::PI;

    fn theta_pair() -> Scenario {
        Scenario::PurePure(theta_state(0.0), theta_state(0.0))
    }

    fn spec(scenario: Scenario, field_kind: FieldFamily, intensities: Vec<f64>) -> ScanSpec {
        ScanSpec {
            scenario,
            field_kind,
            intensity_axis: intensities,
            tau_axis: linspace(0.0, 4.0 * PI, 81).unwrap(),
            params: SystemParams::with_ratio(0.01, 0.1).unwrap(),
            route: None,
        }
    }

    #[test]
    fn vacuum_row_is_half_angle_sine() {
        let s = spec(theta_pair(), FieldFamily::Coherent, vec![0.0, 5.0, 10.0]);
        let r = run_scan(&s).unwrap();
        for (col, tau) in s.tau_axis.iter().enumerate() {
            assert!((r.value(0, col) - (tau / 2.0).sin().abs()).abs() < 1e-12);
        }
        assert!(r
            .provenance
            .iter()
            .all(|&x| x == EvolutionRoute::ClosedForm));
        assert!(r.values.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn werner_thermal_vacuum_row_is_constant() {
        let w = Scenario::Werner {
            gamma: 9.0 / 11.0,
            bell: BellState::PhiPlus,
        };
        let r = run_scan(&spec(w, FieldFamily::Thermal, vec![0.0, 3.0])).unwrap();
        assert!(r.row(0).iter().all(|v| (v - 8.0 / 11.0).abs() < 1e-10));
    }

    #[test]
    fn werner_fock_scan_is_constant() {
        for gamma in [0.2, 9.0 / 11.0] {
            let w = Scenario::Werner {
                gamma,
                bell: BellState::PhiMinus,
            };
            let r = run_scan(&spec(w, FieldFamily::Fock, vec![0.0, 1.0, 4.0])).unwrap();
            let expected = ((3.0 * gamma - 1.0) / 2.0).max(0.0);
            assert!(r.values.iter().all(|v| (v - expected).abs() < 1e-10));
        }
    }

    #[test]
    fn parallel_and_sequential_scans_are_identical() {
        let s = spec(theta_pair(), FieldFamily::Thermal, vec![0.0, 0.5, 2.0, 8.0]);
        let a = run_scan(&s).unwrap();
        let b = run_scan_sequential(&s).unwrap();
        assert_eq!(a.values.len(), 4 * 81);
        let bits = |r: &ScanResult| r.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn spec_validation() {
        let mut s = spec(theta_pair(), FieldFamily::Fock, vec![0.0, 1.5]);
        assert!(matches!(run_scan(&s), Err(Error::InvalidField(_))));
        s.intensity_axis = vec![2.0, 1.0];
        assert!(matches!(run_scan(&s), Err(Error::InvalidScan(_))));
        s.intensity_axis = vec![];
        assert!(matches!(run_scan(&s), Err(Error::InvalidScan(_))));
        s.intensity_axis = vec![1.0];
        s.tau_axis = vec![];
        assert!(matches!(run_scan(&s), Err(Error::InvalidScan(_))));
        s.tau_axis = vec![0.0];
        s.params = SystemParams::new(1.0, 1.1, 1.2, 0.001, 0.001).unwrap();
        s.route = Some(EvolutionRoute::ClosedForm);
        assert_eq!(run_scan(&s).unwrap_err(), Error::NotIdenticalAtoms);
        s.route = None;
        assert_eq!(
            run_scan(&s).unwrap().provenance,
            vec![EvolutionRoute::EffectiveNumeric]
        );
    }

    #[test]
    fn cell_errors_carry_coordinates() {
        let mut s = spec(theta_pair(), FieldFamily::Coherent, vec![0.0, 30000.0]);
        s.route = Some(EvolutionRoute::Exact);
        s.tau_axis = vec![0.0, 1.0];
        match run_scan(&s) {
            Err(Error::Cell { row, col, source }) => {
                assert_eq!((row, col), (1, 0));
                assert!(matches!(*source, Error::ExactTooLarge { .. }));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn free_evolution_validates_to_round_off() {
        let mut s = spec(
            Scenario::PurePure(theta_state(0.3), theta_state(1.2)),
            FieldFamily::Thermal,
            vec![0.0, 0.5],
        );
        s.params = SystemParams::new(1.0, 1.1, 1.1, 0.0, 0.0).unwrap();
        s.tau_axis = linspace(0.0, 2.0 * PI, 11).unwrap();
        let r = validation_sweep(&s, 1e-12).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn dispersive_validation_passes() {
        let mut s = spec(theta_pair(), FieldFamily::Fock, vec![0.0, 1.0, 2.0]);
        s.tau_axis = linspace(0.0, 2.0 * PI, 50).unwrap();
        let r = validation_sweep(&s, 5e-3).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.cells, 150);
    }

    #[test]
    fn non_dispersive_validation_fails() {
        let mut s = spec(theta_pair(), FieldFamily::Fock, vec![0.0, 1.0, 2.0]);
        s.params = SystemParams::with_ratio(0.1, 0.1).unwrap();
        s.tau_axis = linspace(0.0, 2.0 * PI, 50).unwrap();
        let r = validation_sweep(&s, 5e-3).unwrap();
        assert!(!r.passed());
        assert!(r.max_trace_distance > 5e-3);
    }
}
