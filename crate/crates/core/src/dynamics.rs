//! Time evolution of the atom pair by three routes:
//!
//! * [`EvolutionRoute::Exact`]: spectral propagation of the full truncated
//!   Hamiltonian followed by the partial trace over the mode.
//! * [`EvolutionRoute::EffectiveNumeric`]: exponentiation of the effective
//!   Hamiltonian, one 4×4 block per Fock level.
//! * [`EvolutionRoute::ClosedForm`]: reduced density matrices assembled from
//!   the dressed-state phases and the photon-number overlap factor
//!   `F(φ) = Σₙ pₙ e^{inφ}`, which collapses to `e^{−|α|²(1−e^{iφ})}` for a
//!   coherent field and `1/(1 + ⟨n⟩(1 − e^{iφ}))` for a thermal one.
//!
//! All reduced states are expressed in the frame co-rotating with `ωN̂`
//! (`N̂` commutes with the Hamiltonian, so this only removes the local
//! free precession at the mode frequency).

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, partial_trace_mode, ComplexMatrix, EigenDecomposition, ZERO};
use crate::model::{
    build_effective_block, build_excitation_number, build_full_hamiltonian, HilbertIndex,
    SystemParams,
};
use crate::states::{
    initial_components, BellState, FieldKind, FieldSpec, QubitState, TwoQubitState,
};

/// Truncation tail the effective route aims for.
///
/// Levels are only 4×4 blocks, so the effective route can afford to keep the
/// photon distribution to round-off where the exact route cannot.
pub const EFFECTIVE_TAIL_TOL: f64 = 1e-15;

/// Largest Fock truncation the exact route accepts (matrix dimension 2052).
pub const EXACT_N_MAX_LIMIT: usize = 512;

/// Extra Fock levels the exact route keeps above the field truncation.
///
/// Two atomic excitations can be deposited in the mode, so a Fock field at
/// level `n` never leaves `0..=n + 2` under the excitation-conserving dynamics.
pub const EXACT_PADDING: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EvolutionRoute {
    Exact,
    EffectiveNumeric,
    ClosedForm,
}

impl EvolutionRoute {
    pub fn check(self, p: &SystemParams) -> Result<()> {
        match self {
            EvolutionRoute::ClosedForm if !p.is_identical() => Err(Error::NotIdenticalAtoms),
            _ => Ok(()),
        }
    }
}

/// `e^{−|α|²(1 − e^{iφ})}`.
pub fn coherent_overlap(mean_n: f64, phi: f64) -> C64 {
    let z = C64::new(1.0, 0.0) - C64::from_polar(1.0, phi);
    (-z * mean_n).exp()
}

/// `1/(1 + ⟨n⟩(1 − e^{iφ}))`.
pub fn thermal_overlap(mean_n: f64, phi: f64) -> C64 {
    let z = C64::new(1.0, 0.0) - C64::from_polar(1.0, phi);
    C64::new(1.0, 0.0) / (C64::new(1.0, 0.0) + z * mean_n)
}

/// Photon-number statistics of the initial field, as seen by the dressed dynamics.
///
/// The effective propagator is diagonal in `n`, so only the photon-number
/// distribution of the field enters the reduced atomic state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PhotonStatistics {
    Fock(usize),
    Coherent { mean_n: f64 },
    Thermal { mean_n: f64 },
}

impl PhotonStatistics {
    pub fn from_field(kind: FieldKind) -> Self {
        match kind {
            FieldKind::Fock(n) => PhotonStatistics::Fock(n),
            FieldKind::Coherent(alpha) => PhotonStatistics::Coherent {
                mean_n: alpha.norm_sqr(),
            },
            FieldKind::Thermal(mean_n) => PhotonStatistics::Thermal { mean_n },
        }
    }

    /// `F(φ) = Σₙ pₙ e^{inφ}`.
    pub fn overlap(&self, phi: f64) -> C64 {
        match *self {
            PhotonStatistics::Fock(n) => C64::from_polar(1.0, n as f64 * phi),
            PhotonStatistics::Coherent { mean_n } => coherent_overlap(mean_n, phi),
            PhotonStatistics::Thermal { mean_n } => thermal_overlap(mean_n, phi),
        }
    }
}

/// Phases the effective propagator of identical atoms puts on the dressed
/// states `|00⟩, |ψ⁺⟩, |ψ⁻⟩, |11⟩` at Fock level `n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DressedPhases {
    pub ground: C64,
    pub psi_plus: C64,
    pub psi_minus: C64,
    pub excited: C64,
}

impl DressedPhases {
    /// The propagator as a 4×4 matrix in `{|00⟩, |01⟩, |10⟩, |11⟩}`.
    pub fn matrix(&self) -> ComplexMatrix {
        let sym = (self.psi_plus + self.psi_minus) * 0.5;
        let anti = (self.psi_plus - self.psi_minus) * 0.5;
        let mut m = ComplexMatrix::zeros(4, 4);
        m[(0, 0)] = self.ground;
        m[(1, 1)] = sym;
        m[(2, 2)] = sym;
        m[(1, 2)] = anti;
        m[(2, 1)] = anti;
        m[(3, 3)] = self.excited;
        m
    }
}

/// Dressed-basis phases for identical atoms at Fock level `n` and time `t`.
pub fn dressed_propagator(p: &SystemParams, n: usize, t: f64) -> Result<DressedPhases> {
    let (g, delta) = p.identical_coupling()?;
    let chi = g * g / delta;
    let level = delta + chi * (2 * n + 1) as f64;
    Ok(DressedPhases {
        ground: C64::from_polar(1.0, level * t),
        psi_plus: C64::from_polar(1.0, -chi * t),
        psi_minus: C64::from_polar(1.0, chi * t),
        excited: C64::from_polar(1.0, -level * t),
    })
}

/// Coefficients `(L₀, L₁)` of the `{|01⟩, |10⟩}` component at time `t`.
fn exchange_amplitudes(psi: &QubitState, phi: &QubitState, chi_t: f64) -> (C64, C64) {
    let (c, s) = (chi_t.cos(), chi_t.sin());
    let i = C64::new(0.0, 1.0);
    let c01 = psi.amp0() * phi.amp1();
    let c10 = psi.amp1() * phi.amp0();
    (c01 * c - i * c10 * s, c10 * c - i * c01 * s)
}

/// Pure two-atom state at time `t` for product initial state `ψ⊗φ` and Fock field `|n⟩`.
pub fn closed_form_fock(
    psi: &QubitState,
    phi: &QubitState,
    n: usize,
    p: &SystemParams,
    t: f64,
) -> Result<TwoQubitState> {
    let (g, delta) = p.identical_coupling()?;
    let chi = g * g / delta;
    let level = delta + chi * (2 * n + 1) as f64;
    let (l0, l1) = exchange_amplitudes(psi, phi, chi * t);
    Ok(TwoQubitState::Pure([
        psi.amp0() * phi.amp0() * C64::from_polar(1.0, level * t),
        l0,
        l1,
        psi.amp1() * phi.amp1() * C64::from_polar(1.0, -level * t),
    ]))
}

/// Reduced state for `ψ⊗φ` and any diagonal photon statistics.
///
/// With `|φₙ⟩ = e^{iΘₙt}c₀₀|00⟩ + |L⟩ + e^{−iΘₙt}c₁₁|11⟩` and
/// `Θₙ = Ω + 2nχ` (`χ = g²/Δ`, `Ω = Δ + χ`), the reduced state is
/// `Σₙ pₙ|φₙ⟩⟨φₙ|`; every coherence is a phase `e^{ikΩt}` times `F(2kχt)`.
pub fn closed_form_product(
    psi: &QubitState,
    phi: &QubitState,
    stats: PhotonStatistics,
    p: &SystemParams,
    t: f64,
) -> Result<TwoQubitState> {
    let (g, delta) = p.identical_coupling()?;
    let chi = g * g / delta;
    let big_omega = delta + chi;
    let c00 = psi.amp0() * phi.amp0();
    let c11 = psi.amp1() * phi.amp1();
    let (l0, l1) = exchange_amplitudes(psi, phi, chi * t);
    let f1 = C64::from_polar(1.0, big_omega * t) * stats.overlap(2.0 * chi * t);
    let f2 = C64::from_polar(1.0, 2.0 * big_omega * t) * stats.overlap(4.0 * chi * t);

    let mut rho = ComplexMatrix::zeros(4, 4);
    rho[(0, 0)] = C64::new(c00.norm_sqr(), 0.0);
    rho[(3, 3)] = C64::new(c11.norm_sqr(), 0.0);
    let l = [l0, l1];
    for (a, la) in l.iter().enumerate() {
        for (b, lb) in l.iter().enumerate() {
            rho[(1 + a, 1 + b)] = la * lb.conj();
        }
        rho[(0, 1 + a)] = c00 * la.conj() * f1;
        rho[(1 + a, 3)] = la * c11.conj() * f1;
    }
    rho[(0, 3)] = c00 * c11.conj() * f2;
    for i in 0..4 {
        for j in (i + 1)..4 {
            rho[(j, i)] = rho[(i, j)].conj();
        }
    }
    Ok(TwoQubitState::Mixed(rho))
}

/// Reduced state for `ψ⊗φ` and a coherent field `|α⟩`.
pub fn closed_form_coherent(
    psi: &QubitState,
    phi: &QubitState,
    alpha: C64,
    p: &SystemParams,
    t: f64,
) -> Result<TwoQubitState> {
    closed_form_product(
        psi,
        phi,
        PhotonStatistics::Coherent {
            mean_n: alpha.norm_sqr(),
        },
        p,
        t,
    )
}

/// Reduced state for `ψ⊗φ` and a thermal field with mean occupation `mean_n`.
pub fn closed_form_thermal(
    psi: &QubitState,
    phi: &QubitState,
    mean_n: f64,
    p: &SystemParams,
    t: f64,
) -> Result<TwoQubitState> {
    closed_form_product(psi, phi, PhotonStatistics::Thermal { mean_n }, p, t)
}

/// Reduced state for a Werner initial state and any diagonal photon statistics.
///
/// For `X = φ±` only the `|00⟩⟨11|` coherence evolves; `ψ±` Werner states are stationary.
pub fn closed_form_werner(
    gamma: f64,
    x: BellState,
    stats: PhotonStatistics,
    p: &SystemParams,
    t: f64,
) -> Result<TwoQubitState> {
    let (g, delta) = p.identical_coupling()?;
    let initial = crate::states::werner_state(gamma, x)?;
    if !x.is_phi() {
        return Ok(initial);
    }
    let chi = g * g / delta;
    let big_omega = delta + chi;
    let TwoQubitState::Mixed(mut rho) = initial else {
        unreachable!("Werner states are mixed")
    };
    let coherence =
        C64::from_polar(0.5 * gamma * x.sign(), 2.0 * big_omega * t) * stats.overlap(4.0 * chi * t);
    rho[(0, 3)] = coherence;
    rho[(3, 0)] = coherence.conj();
    Ok(TwoQubitState::Mixed(rho))
}

pub fn closed_form_werner_coherent(
    gamma: f64,
    x: BellState,
    alpha: C64,
    p: &SystemParams,
    t: f64,
) -> Result<TwoQubitState> {
    closed_form_werner(
        gamma,
        x,
        PhotonStatistics::Coherent {
            mean_n: alpha.norm_sqr(),
        },
        p,
        t,
    )
}

pub fn closed_form_werner_thermal(
    gamma: f64,
    x: BellState,
    mean_n: f64,
    p: &SystemParams,
    t: f64,
) -> Result<TwoQubitState> {
    closed_form_werner(gamma, x, PhotonStatistics::Thermal { mean_n }, p, t)
}

/// Exact propagator in the `ωN̂` frame with a cached spectral decomposition.
///
/// Immutable after construction and safe to share between threads.
#[derive(Clone, Debug)]
pub struct ExactPropagator {
    hilbert: HilbertIndex,
    eig: EigenDecomposition,
}

/// Initial state projected onto the eigenbasis of an [`ExactPropagator`].
#[derive(Clone, Debug)]
pub struct PreparedState {
    weights: Vec<f64>,
    coefficients: Vec<Vec<C64>>,
}

impl ExactPropagator {
    pub fn new(p: &SystemParams, h: HilbertIndex) -> Result<Self> {
        if h.n_max > EXACT_N_MAX_LIMIT {
            return Err(Error::ExactTooLarge {
                n_max: h.n_max,
                limit: EXACT_N_MAX_LIMIT,
            });
        }
        let full = build_full_hamiltonian(p, h);
        let rotating = &full - &build_excitation_number(h).scale_real(p.omega);
        Ok(Self {
            hilbert: h,
            eig: hermitian_eig(&rotating)?,
        })
    }

    pub fn hilbert(&self) -> HilbertIndex {
        self.hilbert
    }

    /// Propagator `e^{−i(H − ωN̂)t}` on the full space.
    pub fn unitary(&self, t: f64) -> ComplexMatrix {
        self.eig.exp_i(t)
    }

    /// Projects weighted pure components onto the eigenbasis.
    pub fn prepare(&self, components: &[(f64, Vec<C64>)]) -> Result<PreparedState> {
        let dim = self.hilbert.total_dim();
        let v_adj = self.eig.eigenvectors.adjoint();
        let mut weights = Vec::with_capacity(components.len());
        let mut coefficients = Vec::with_capacity(components.len());
        for (w, v) in components {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: format!("{dim}"),
                    got: format!("{}", v.len()),
                });
            }
            weights.push(*w);
            coefficients.push(v_adj.apply(v));
        }
        Ok(PreparedState {
            weights,
            coefficients,
        })
    }

    pub fn prepare_state(&self, atoms: &TwoQubitState, field: &FieldSpec) -> Result<PreparedState> {
        self.prepare(&initial_components(atoms, field, self.hilbert)?)
    }

    /// Reduced two-atom state at time `t`.
    pub fn reduced_at(&self, state: &PreparedState, t: f64) -> ComplexMatrix {
        let d = self.hilbert.mode_dim();
        let v = &self.eig.eigenvectors;
        let phases: Vec<C64> = self
            .eig
            .eigenvalues
            .iter()
            .map(|&l| C64::from_polar(1.0, -l * t))
            .collect();
        let mut red = ComplexMatrix::zeros(4, 4);
        for (w, c) in state.weights.iter().zip(&state.coefficients) {
            let evolved: Vec<C64> = c.iter().zip(&phases).map(|(x, ph)| x * ph).collect();
            let psi = v.apply(&evolved);
            for i in 0..4 {
                for j in i..4 {
                    let mut acc = ZERO;
                    for n in 0..d {
                        acc += psi[i * d + n] * psi[j * d + n].conj();
                    }
                    red[(i, j)] += acc * *w;
                }
            }
        }
        for i in 0..4 {
            for j in (i + 1)..4 {
                red[(j, i)] = red[(i, j)].conj();
            }
        }
        red
    }
}

/// Full state `U ρ₀ U†` with `U = e^{−i(H − ωN̂)t}`.
pub fn evolve_exact_full(
    rho0: &ComplexMatrix,
    p: &SystemParams,
    h: HilbertIndex,
    t: f64,
) -> Result<ComplexMatrix> {
    check_full_dim(rho0, h)?;
    let u = ExactPropagator::new(p, h)?.unitary(t);
    Ok(&(&u * rho0) * &u.adjoint())
}

/// Reduced two-atom state after exact evolution of the full density `rho0`.
pub fn evolve_exact(
    rho0: &ComplexMatrix,
    p: &SystemParams,
    h: HilbertIndex,
    t: f64,
) -> Result<ComplexMatrix> {
    partial_trace_mode(&evolve_exact_full(rho0, p, h, t)?, h.mode_dim())
}

fn check_full_dim(rho0: &ComplexMatrix, h: HilbertIndex) -> Result<()> {
    let dim = h.total_dim();
    if rho0.nrows() != dim || rho0.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: format!("{dim}×{dim}"),
            got: format!("{}×{}", rho0.nrows(), rho0.ncols()),
        });
    }
    Ok(())
}

/// Effective-Hamiltonian propagator: one cached 4×4 eigendecomposition per
/// occupied Fock level.
#[derive(Clone, Debug)]
pub struct EffectivePropagator {
    levels: Vec<(f64, EigenDecomposition)>,
    atoms: ComplexMatrix,
}

impl EffectivePropagator {
    pub fn new(p: &SystemParams, atoms: &TwoQubitState, field: &FieldSpec) -> Result<Self> {
        atoms.validate(crate::states::DENSITY_TOL)?;
        let probs = field.photon_distribution()?;
        let mut levels = Vec::new();
        for (n, &w) in probs.iter().enumerate() {
            if w > 0.0 {
                levels.push((w, hermitian_eig(&build_effective_block(p, n))?));
            }
        }
        Ok(Self {
            levels,
            atoms: atoms.density(),
        })
    }

    /// `Σₙ pₙ Uₙ(t) ρ_atoms Uₙ(t)†`.
    pub fn reduced_at(&self, t: f64) -> ComplexMatrix {
        let mut red = ComplexMatrix::zeros(4, 4);
        for (w, eig) in &self.levels {
            let u = eig.exp_i(t);
            let term = &(&u * &self.atoms) * &u.adjoint();
            red = &red + &term.scale_real(*w);
        }
        red
    }
}

/// Reduced state after evolution under the effective Hamiltonian.
pub fn evolve_effective(
    atoms: &TwoQubitState,
    field: &FieldSpec,
    p: &SystemParams,
    t: f64,
) -> Result<ComplexMatrix> {
    Ok(EffectivePropagator::new(p, atoms, field)?.reduced_at(t))
}

/// Reduced state after exponentiating the effective Hamiltonian on the whole
/// truncated space.
pub fn evolve_effective_full(
    rho0: &ComplexMatrix,
    p: &SystemParams,
    h: HilbertIndex,
    t: f64,
) -> Result<ComplexMatrix> {
    check_full_dim(rho0, h)?;
    let h_eff = crate::model::build_effective_hamiltonian(p, h);
    let u = crate::linalg::matrix_exp_i(&h_eff, t)?;
    partial_trace_mode(&(&(&u * rho0) * &u.adjoint()), h.mode_dim())
}
