//! System parameters and the operators of the two-atom, one-mode model.
//!
//! Basis states are `|i_a⟩|i_b⟩|n⟩` with atom a slowest and the Fock index
//! fastest, `σ_z|1⟩ = +|1⟩` and `σ_+ = |1⟩⟨0|`.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{self, annihilation, kron, pauli, ComplexMatrix};

/// `is_dispersive` accepts `max|ε_j|·√max(⟨n⟩, 1)` below this value.
pub const DISPERSIVE_THRESHOLD: f64 = 0.1;

/// Mode frequency, atomic transition frequencies and couplings (ħ = 1).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SystemParams {
    pub omega: f64,
    pub omega_a: f64,
    pub omega_b: f64,
    pub g_a: f64,
    pub g_b: f64,
}

impl SystemParams {
    pub fn new(omega: f64, omega_a: f64, omega_b: f64, g_a: f64, g_b: f64) -> Result<Self> {
        let p = Self {
            omega,
            omega_a,
            omega_b,
            g_a,
            g_b,
        };
        if p.delta_a() == 0.0 {
            return Err(Error::Resonant { atom: 'a' });
        }
        if p.delta_b() == 0.0 {
            return Err(Error::Resonant { atom: 'b' });
        }
        Ok(p)
    }

    /// Identical atoms with detuning `delta` and coupling `g` to a mode at `omega`.
    pub fn identical(omega: f64, delta: f64, g: f64) -> Result<Self> {
        Self::new(omega, omega + delta, omega + delta, g, g)
    }

    /// Identical atoms at `g/Δ = ratio`, with `ω = 1`.
    pub fn with_ratio(ratio: f64, delta: f64) -> Result<Self> {
        Self::identical(1.0, delta, ratio * delta)
    }

    pub fn delta_a(&self) -> f64 {
        self.omega_a - self.omega
    }

    pub fn delta_b(&self) -> f64 {
        self.omega_b - self.omega
    }

    pub fn eps_a(&self) -> f64 {
        self.g_a / self.delta_a()
    }

    pub fn eps_b(&self) -> f64 {
        self.g_b / self.delta_b()
    }

    /// Validity of the first-order small rotation at mean photon number `mean_n`.
    pub fn is_dispersive(&self, mean_n: f64) -> bool {
        let eps = self.eps_a().abs().max(self.eps_b().abs());
        eps * mean_n.max(1.0).sqrt() < DISPERSIVE_THRESHOLD
    }

    pub fn is_identical(&self) -> bool {
        self.g_a == self.g_b && self.omega_a == self.omega_b
    }

    /// `(g, Δ)` of identical atoms.
    pub fn identical_coupling(&self) -> Result<(f64, f64)> {
        if self.is_identical() {
            Ok((self.g_a, self.delta_a()))
        } else {
            Err(Error::NotIdenticalAtoms)
        }
    }

    /// Rate `g_a²/Δ_a` of the dimensionless clock `τ = 2(g_a²/Δ_a)·t`.
    ///
    /// Uncoupled atoms fall back to `|Δ_a|` so that a τ grid still maps to times.
    fn clock_rate(&self) -> f64 {
        let chi = self.g_a * self.g_a / self.delta_a();
        if chi == 0.0 {
            self.delta_a().abs()
        } else {
            chi.abs()
        }
    }

    pub fn time_from_tau(&self, tau: f64) -> f64 {
        tau / (2.0 * self.clock_rate())
    }

    pub fn tau_from_time(&self, t: f64) -> f64 {
        2.0 * self.clock_rate() * t
    }
}

/// Truncated product basis `|i_a⟩|i_b⟩|n⟩`, `n = 0..=n_max`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct HilbertIndex {
    pub n_max: usize,
}

impl HilbertIndex {
    pub fn new(n_max: usize) -> Self {
        Self { n_max }
    }

    pub fn mode_dim(&self) -> usize {
        self.n_max + 1
    }

    pub fn total_dim(&self) -> usize {
        4 * self.mode_dim()
    }

    pub fn index(&self, i_a: usize, i_b: usize, n: usize) -> usize {
        debug_assert!(i_a < 2 && i_b < 2 && n <= self.n_max);
        (i_a * 2 + i_b) * self.mode_dim() + n
    }

    /// Inverse of [`HilbertIndex::index`].
    pub fn decompose(&self, idx: usize) -> (usize, usize, usize) {
        let atoms = idx / self.mode_dim();
        (atoms / 2, atoms % 2, idx % self.mode_dim())
    }
}

/// Local operators lifted to the full space.
struct Ops {
    sz_a: ComplexMatrix,
    sz_b: ComplexMatrix,
    sp_a: ComplexMatrix,
    sp_b: ComplexMatrix,
    sm_b: ComplexMatrix,
    b: ComplexMatrix,
    num: ComplexMatrix,
}

impl Ops {
    fn new(h: HilbertIndex) -> Self {
        let i2 = pauli::identity();
        let im = ComplexMatrix::identity(h.mode_dim());
        let on_a = |op: &ComplexMatrix| kron(&kron(op, &i2), &im);
        let on_b = |op: &ComplexMatrix| kron(&kron(&i2, op), &im);
        let b_mode = annihilation(h.mode_dim());
        let num_mode = &b_mode.adjoint() * &b_mode;
        let i4 = ComplexMatrix::identity(4);
        Self {
            sz_a: on_a(&pauli::sigma_z()),
            sz_b: on_b(&pauli::sigma_z()),
            sp_a: on_a(&pauli::sigma_plus()),
            sp_b: on_b(&pauli::sigma_plus()),
            sm_b: on_b(&pauli::sigma_minus()),
            b: kron(&i4, &b_mode),
            num: kron(&i4, &num_mode),
        }
    }

    /// `g_a(σ_+^a b + h.c.) + g_b(σ_+^b b + h.c.)`.
    fn coupling(&self, g_a: f64, g_b: f64) -> ComplexMatrix {
        let half =
            &(&self.sp_a * &self.b).scale_real(g_a) + &(&self.sp_b * &self.b).scale_real(g_b);
        &half + &half.adjoint()
    }
}

/// `ω_a σ_z^a/2 + ω_b σ_z^b/2 + ω b†b + g_a(σ_+^a b + h.c.) + g_b(σ_+^b b + h.c.)`.
pub fn build_full_hamiltonian(p: &SystemParams, h: HilbertIndex) -> ComplexMatrix {
    let ops = Ops::new(h);
    let free = &(&ops.sz_a.scale_real(0.5 * p.omega_a) + &ops.sz_b.scale_real(0.5 * p.omega_b))
        + &ops.num.scale_real(p.omega);
    &free + &ops.coupling(p.g_a, p.g_b)
}

/// `H − ωN̂`: detuned free terms plus the couplings.
pub fn build_interaction_hamiltonian(p: &SystemParams, h: HilbertIndex) -> ComplexMatrix {
    let ops = Ops::new(h);
    let free = &ops.sz_a.scale_real(0.5 * p.delta_a()) + &ops.sz_b.scale_real(0.5 * p.delta_b());
    &free + &ops.coupling(p.g_a, p.g_b)
}

/// `N̂ = (σ_z^a + σ_z^b)/2 + b†b`.
pub fn build_excitation_number(h: HilbertIndex) -> ComplexMatrix {
    let diag: Vec<f64> = (0..h.total_dim())
        .map(|idx| {
            let (i_a, i_b, n) = h.decompose(idx);
            (i_a as f64 - 0.5) + (i_b as f64 - 0.5) + n as f64
        })
        .collect();
    ComplexMatrix::from_real_diagonal(&diag)
}

/// Effective dispersive Hamiltonian: renormalized free terms, Stark shifts
/// `(b†b + ½)(g_a²/Δ_a σ_z^a + g_b²/Δ_b σ_z^b)` and the exchange term
/// `(g_a g_b/2)(1/Δ_a + 1/Δ_b)(σ_+^a σ_−^b + h.c.)`.
pub fn build_effective_hamiltonian(p: &SystemParams, h: HilbertIndex) -> ComplexMatrix {
    let ops = Ops::new(h);
    let (da, db) = (p.delta_a(), p.delta_b());
    let free = &ops.sz_a.scale_real(0.5 * da) + &ops.sz_b.scale_real(0.5 * db);
    let stark_atoms =
        &ops.sz_a.scale_real(p.g_a * p.g_a / da) + &ops.sz_b.scale_real(p.g_b * p.g_b / db);
    let num_half = &ops.num + &ComplexMatrix::identity(h.total_dim()).scale_real(0.5);
    let stark = &num_half * &stark_atoms;
    let exchange_half =
        (&ops.sp_a * &ops.sm_b).scale_real(0.5 * p.g_a * p.g_b * (1.0 / da + 1.0 / db));
    let exchange = &exchange_half + &exchange_half.adjoint();
    &(&free + &stark) + &exchange
}

/// The 4×4 block of the effective Hamiltonian on `{|00,n⟩, |01,n⟩, |10,n⟩, |11,n⟩}`.
///
/// The effective Hamiltonian conserves the photon number, so these blocks
/// make up the whole operator.
pub fn build_effective_block(p: &SystemParams, n: usize) -> ComplexMatrix {
    let (da, db) = (p.delta_a(), p.delta_b());
    let stark = n as f64 + 0.5;
    let (ka, kb) = (p.g_a * p.g_a / da, p.g_b * p.g_b / db);
    let level = |za: f64, zb: f64| za * (0.5 * da + stark * ka) + zb * (0.5 * db + stark * kb);
    let exchange = 0.5 * p.g_a * p.g_b * (1.0 / da + 1.0 / db);
    let mut m = ComplexMatrix::from_real_diagonal(&[
        level(-1.0, -1.0),
        level(-1.0, 1.0),
        level(1.0, -1.0),
        level(1.0, 1.0),
    ]);
    m[(1, 2)] = C64::new(exchange, 0.0);
    m[(2, 1)] = C64::new(exchange, 0.0);
    m
}

/// Empirical constant of the regression bound `C·max|ε_j|²·(n_max + 1)`
/// on [`verify_small_rotation`] (3× the largest observed ratio).
pub const SMALL_ROTATION_BOUND_C: f64 = 1.42;

pub fn small_rotation_bound(p: &SystemParams, h: HilbertIndex) -> f64 {
    let eps = p.eps_a().abs().max(p.eps_b().abs());
    SMALL_ROTATION_BOUND_C * eps * eps * h.mode_dim() as f64
}

/// Projector onto basis states below the top Fock level.
fn interior_projector(h: HilbertIndex) -> ComplexMatrix {
    let diag: Vec<f64> = (0..h.total_dim())
        .map(|idx| {
            if h.decompose(idx).2 < h.n_max {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    ComplexMatrix::from_real_diagonal(&diag)
}

/// Relative residual `‖P(R H_int R† − H_eff)P‖_F / ‖P H_eff P‖_F` of the
/// first-order small rotation `R = exp[ε_a(σ_+^a b − h.c.) + ε_b(σ_+^b b − h.c.)]`,
/// with `P` removing the top Fock level.
///
/// The residual is O(ε²): it contains the c-number shift `g_a²/2Δ_a + g_b²/2Δ_b`
/// that the effective Hamiltonian omits, plus third-order terms.
pub fn verify_small_rotation(p: &SystemParams, h: HilbertIndex) -> Result<f64> {
    let ops = Ops::new(h);
    let half_a = (&ops.sp_a * &ops.b).scale_real(p.eps_a());
    let half_b = (&ops.sp_b * &ops.b).scale_real(p.eps_b());
    let lowering = &half_a + &half_b;
    // Anti-Hermitian generator G; R = e^G = exp(−i·K) with Hermitian K = iG.
    let generator = &lowering - &lowering.adjoint();
    let k = generator.scale(C64::new(0.0, 1.0));
    let r = linalg::matrix_exp_i(&k, 1.0)?;
    let h_int = build_interaction_hamiltonian(p, h);
    let h_eff = build_effective_hamiltonian(p, h);
    let rotated = &(&r * &h_int) * &r.adjoint();
    let proj = interior_projector(h);
    let diff = &(&proj * &(&rotated - &h_eff)) * &proj;
    let reference = &(&proj * &h_eff) * &proj;
    let norm = reference.frobenius_norm();
    if norm == 0.0 {
        return Ok(diff.frobenius_norm());
    }
    Ok(diff.frobenius_norm() / norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_eig;

    fn uncoupled() -> SystemParams {
        SystemParams::new(1.0, 1.3, 0.7, 0.0, 0.0).unwrap()
    }

    fn generic() -> SystemParams {
        SystemParams::new(1.0, 1.2, 0.9, 0.013, 0.021).unwrap()
    }

    #[test]
    fn resonance_is_rejected() {
        assert_eq!(
            SystemParams::new(1.0, 1.0, 1.1, 0.1, 0.1).unwrap_err(),
            Error::Resonant { atom: 'a' }
        );
        assert_eq!(
            SystemParams::new(1.0, 1.1, 1.0, 0.1, 0.1).unwrap_err(),
            Error::Resonant { atom: 'b' }
        );
    }

    #[test]
    fn derived_quantities() {
        let p = SystemParams::with_ratio(0.01, 0.1).unwrap();
        assert!(p.is_identical());
        assert!((p.eps_a() - 0.01).abs() < 1e-15);
        assert!(p.is_dispersive(10.0));
        assert!(!p.is_dispersive(101.0));
        assert!(!generic().is_identical());
        assert_eq!(
            generic().identical_coupling(),
            Err(Error::NotIdenticalAtoms)
        );
        let t = p.time_from_tau(std::f64::consts::PI);
        assert!((p.tau_from_time(t) - std::f64::consts::PI).abs() < 1e-12);
        // τ = π ⇔ t = πΔ/(2g²)
        assert!((t - std::f64::consts::PI * 0.1 / (2.0 * 1e-6)).abs() < 1e-6);
    }

    #[test]
    fn index_is_bijective() {
        let h = HilbertIndex::new(3);
        let mut seen = vec![false; h.total_dim()];
        for i_a in 0..2 {
            for i_b in 0..2 {
                for n in 0..=3 {
                    let idx = h.index(i_a, i_b, n);
                    assert!(!seen[idx]);
                    seen[idx] = true;
                    assert_eq!(h.decompose(idx), (i_a, i_b, n));
                }
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn uncoupled_spectrum_is_enumerable() {
        let p = uncoupled();
        let h = HilbertIndex::new(2);
        let ham = build_full_hamiltonian(&p, h);
        let mut expected = Vec::new();
        for sa in [-1.0, 1.0] {
            for sb in [-1.0, 1.0] {
                for n in 0..=2 {
                    expected.push(sa * p.omega_a / 2.0 + sb * p.omega_b / 2.0 + n as f64 * p.omega);
                }
            }
        }
        expected.sort_by(f64::total_cmp);
        let eig = hermitian_eig(&ham).unwrap();
        for (got, want) in eig.eigenvalues.iter().zip(&expected) {
            assert!((got - want).abs() < 1e-12);
        }
        // Uncoupled H is diagonal.
        for i in 0..h.total_dim() {
            for j in 0..h.total_dim() {
                if i != j {
                    assert_eq!(ham[(i, j)], C64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn builders_are_exactly_hermitian() {
        let p = generic();
        let h = HilbertIndex::new(4);
        for m in [
            build_full_hamiltonian(&p, h),
            build_interaction_hamiltonian(&p, h),
            build_effective_hamiltonian(&p, h),
            build_excitation_number(h),
        ] {
            assert!(m == m.adjoint());
        }
    }

    #[test]
    fn excitation_number_is_conserved() {
        let p = generic();
        let h = HilbertIndex::new(5);
        let n_op = build_excitation_number(h);
        let ham = build_full_hamiltonian(&p, h);
        let comm = ham.commutator(&n_op);
        let proj = interior_projector(h);
        let interior = &(&proj * &comm) * &proj;
        assert!(interior.frobenius_norm() <= 1e-12 * ham.frobenius_norm());
        let h_eff = build_effective_hamiltonian(&p, h);
        assert_eq!(h_eff.commutator(&n_op).frobenius_norm(), 0.0);
    }

    #[test]
    fn excitation_number_entries() {
        let h = HilbertIndex::new(3);
        let n_op = build_excitation_number(h);
        assert_eq!(n_op[(h.index(1, 1, 0), h.index(1, 1, 0))].re, 1.0);
        assert_eq!(n_op[(h.index(0, 0, 3), h.index(0, 0, 3))].re, 2.0);
    }

    #[test]
    fn full_splits_into_omega_n_plus_interaction() {
        let p = generic();
        let h = HilbertIndex::new(4);
        let lhs = build_full_hamiltonian(&p, h);
        let rhs =
            &build_excitation_number(h).scale_real(p.omega) + &build_interaction_hamiltonian(&p, h);
        assert!((&lhs - &rhs).frobenius_norm() <= 1e-12);
    }

    #[test]
    fn interaction_hamiltonian_edge_cases() {
        // Δ_a = Δ_b = 0 is rejected by SystemParams, so assemble the zero case directly.
        let p = SystemParams {
            omega: 1.0,
            omega_a: 1.0,
            omega_b: 1.0,
            g_a: 0.0,
            g_b: 0.0,
        };
        let h = HilbertIndex::new(3);
        assert_eq!(build_interaction_hamiltonian(&p, h).frobenius_norm(), 0.0);

        let p = generic();
        let h_int = build_interaction_hamiltonian(&p, h);
        for n in 0..3 {
            let elem = h_int[(h.index(1, 0, n), h.index(0, 0, n + 1))];
            assert!((elem.re - p.g_a * ((n + 1) as f64).sqrt()).abs() < 1e-15);
            assert_eq!(elem.im, 0.0);
        }
    }

    #[test]
    fn effective_uncoupled_is_free() {
        let p = uncoupled();
        let h = HilbertIndex::new(3);
        let h_eff = build_effective_hamiltonian(&p, h);
        let h_int = build_interaction_hamiltonian(&p, h);
        assert_eq!(h_eff, h_int);
    }

    #[test]
    fn effective_blocks_match_full_builder() {
        let p = generic();
        let h = HilbertIndex::new(5);
        let h_eff = build_effective_hamiltonian(&p, h);
        for n in 0..=5 {
            let block = build_effective_block(&p, n);
            for i in 0..4 {
                for j in 0..4 {
                    let full = h_eff[(i * h.mode_dim() + n, j * h.mode_dim() + n)];
                    assert!((full - block[(i, j)]).norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn effective_vacuum_diagonal_entry() {
        let p = generic();
        let h = HilbertIndex::new(4);
        let h_eff = build_effective_hamiltonian(&p, h);
        let (da, db) = (p.delta_a(), p.delta_b());
        for n in 0..=4 {
            let want =
                -da / 2.0 - db / 2.0 - (n as f64 + 0.5) * (p.g_a * p.g_a / da + p.g_b * p.g_b / db);
            let got = h_eff[(h.index(0, 0, n), h.index(0, 0, n))];
            assert!((got.re - want).abs() < 1e-15);
        }
    }

    #[test]
    fn effective_bell_eigenvectors_for_identical_atoms() {
        let p = SystemParams::with_ratio(0.05, 0.2).unwrap();
        let (g, delta) = p.identical_coupling().unwrap();
        let h = HilbertIndex::new(3);
        let h_eff = build_effective_hamiltonian(&p, h);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for n in 0..=3 {
            for (sign, shift) in [(1.0, g * g / delta), (-1.0, -g * g / delta)] {
                let mut v = vec![C64::new(0.0, 0.0); h.total_dim()];
                v[h.index(0, 1, n)] = C64::new(s, 0.0);
                v[h.index(1, 0, n)] = C64::new(sign * s, 0.0);
                let hv = h_eff.apply(&v);
                for (x, y) in hv.iter().zip(&v) {
                    assert!((x - y * shift).norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn effective_is_block_diagonal_for_identical_atoms() {
        let p = SystemParams::with_ratio(0.05, 0.2).unwrap();
        let h = HilbertIndex::new(3);
        let h_eff = build_effective_hamiltonian(&p, h);
        for i in 0..h.total_dim() {
            for j in 0..h.total_dim() {
                let (ia, ib, n) = h.decompose(i);
                let (ja, jb, m) = h.decompose(j);
                let same_block = n == m && (ia + ib == ja + jb);
                if !same_block {
                    assert_eq!(h_eff[(i, j)].norm(), 0.0);
                }
            }
        }
    }

    #[test]
    fn small_rotation_within_regression_bound() {
        for eps in [0.005, 0.01, 0.02] {
            for n_max in [2, 4, 6] {
                let h = HilbertIndex::new(n_max);
                for p in [
                    SystemParams::with_ratio(eps, 0.1).unwrap(),
                    SystemParams::new(1.0, 1.1, 0.85, eps * 0.1, -eps * 0.15).unwrap(),
                ] {
                    let res = verify_small_rotation(&p, h).unwrap();
                    let bound = small_rotation_bound(&p, h);
                    assert!(res <= bound, "ε={eps} n_max={n_max}: {res:e} > {bound:e}");
                }
            }
        }
    }

    #[test]
    fn small_rotation_trivial_when_uncoupled() {
        let res = verify_small_rotation(&uncoupled(), HilbertIndex::new(4)).unwrap();
        assert!(res < 1e-14, "{res}");
    }

    #[test]
    fn small_rotation_residual_scales_quadratically() {
        let h = HilbertIndex::new(4);
        let r1 = verify_small_rotation(&SystemParams::with_ratio(0.01, 0.1).unwrap(), h).unwrap();
        let r2 = verify_small_rotation(&SystemParams::with_ratio(0.02, 0.1).unwrap(), h).unwrap();
        // Observed r1 = 1.415e-4; frozen at 3×.
        assert!(r1 <= 4.3e-4, "{r1}");
        assert!(r1 <= 1e-2);
        let ratio = r2 / r1;
        assert!((2.0..=6.0).contains(&ratio), "ratio {ratio}");
    }
}
