//! Initial states: single-qubit and two-qubit atomic states, Werner mixtures
//! and truncated field states.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{density_spectrum, kron, ComplexMatrix, ZERO};
use crate::model::HilbertIndex;

/// Maximum probability mass a field truncation may discard.
pub const TAIL_TOL: f64 = 1e-8;
/// Normalization tolerance for pure states.
pub const NORM_TOL: f64 = 1e-12;
/// Validity tolerance for density matrices.
pub const DENSITY_TOL: f64 = 1e-10;

/// Pure state `amp0|0⟩ + amp1|1⟩` of one atom.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitState {
    amp0: C64,
    amp1: C64,
}

impl QubitState {
    pub fn new(amp0: C64, amp1: C64) -> Result<Self> {
        let norm_sqr = amp0.norm_sqr() + amp1.norm_sqr();
        if (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(Self { amp0, amp1 })
    }

    /// Normalizes an arbitrary nonzero pair of amplitudes.
    pub fn normalized(amp0: C64, amp1: C64) -> Result<Self> {
        let norm = (amp0.norm_sqr() + amp1.norm_sqr()).sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized {
                norm_sqr: norm * norm,
            });
        }
        Ok(Self {
            amp0: amp0 / norm,
            amp1: amp1 / norm,
        })
    }

    pub fn zero() -> Self {
        Self {
            amp0: C64::new(1.0, 0.0),
            amp1: ZERO,
        }
    }

    pub fn one() -> Self {
        Self {
            amp0: ZERO,
            amp1: C64::new(1.0, 0.0),
        }
    }

    /// `(|0⟩ + e^{iθ}|1⟩)/√2`.
    pub fn theta(theta: f64) -> Self {
        Self {
            amp0: C64::new(FRAC_1_SQRT_2, 0.0),
            amp1: C64::from_polar(FRAC_1_SQRT_2, theta),
        }
    }

    /// `⟨0|ψ⟩`.
    pub fn amp0(&self) -> C64 {
        self.amp0
    }

    /// `⟨1|ψ⟩`.
    pub fn amp1(&self) -> C64 {
        self.amp1
    }

    pub fn amplitudes(&self) -> [C64; 2] {
        [self.amp0, self.amp1]
    }
}

/// The four Bell states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BellState {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellState {
    /// Amplitudes in `{|00⟩, |01⟩, |10⟩, |11⟩}` (first label is atom a).
    pub fn amplitudes(self) -> [C64; 4] {
        let s = C64::new(FRAC_1_SQRT_2, 0.0);
        match self {
            BellState::PhiPlus => [s, ZERO, ZERO, s],
            BellState::PhiMinus => [s, ZERO, ZERO, -s],
            BellState::PsiPlus => [ZERO, s, s, ZERO],
            BellState::PsiMinus => [ZERO, s, -s, ZERO],
        }
    }

    /// `+1` for `φ⁺`/`ψ⁺`, `−1` for `φ⁻`/`ψ⁻`.
    pub fn sign(self) -> f64 {
        match self {
            BellState::PhiPlus | BellState::PsiPlus => 1.0,
            BellState::PhiMinus | BellState::PsiMinus => -1.0,
        }
    }

    pub fn is_phi(self) -> bool {
        matches!(self, BellState::PhiPlus | BellState::PhiMinus)
    }
}

/// State of the atom pair.
#[derive(Clone, Debug, PartialEq)]
pub enum TwoQubitState {
    /// Amplitudes in `{|00⟩, |01⟩, |10⟩, |11⟩}`.
    Pure([C64; 4]),
    /// 4×4 density matrix in the same basis.
    Mixed(ComplexMatrix),
}

impl TwoQubitState {
    pub fn product(psi: &QubitState, phi: &QubitState) -> Self {
        TwoQubitState::Pure([
            psi.amp0 * phi.amp0,
            psi.amp0 * phi.amp1,
            psi.amp1 * phi.amp0,
            psi.amp1 * phi.amp1,
        ])
    }

    pub fn density(&self) -> ComplexMatrix {
        match self {
            TwoQubitState::Pure(amps) => ComplexMatrix::projector(amps),
            TwoQubitState::Mixed(rho) => rho.clone(),
        }
    }

    /// Checks normalization (pure) or density validity (mixed) within `tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        match self {
            TwoQubitState::Pure(amps) => {
                let norm_sqr: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
                if (norm_sqr - 1.0).abs() > tol {
                    return Err(Error::NotNormalized { norm_sqr });
                }
                Ok(())
            }
            TwoQubitState::Mixed(rho) => {
                if rho.nrows() != 4 || rho.ncols() != 4 {
                    return Err(Error::DimensionMismatch {
                        expected: "4×4".into(),
                        got: format!("{}×{}", rho.nrows(), rho.ncols()),
                    });
                }
                if rho.is_density(tol) {
                    Ok(())
                } else {
                    Err(Error::NotDensity(format!(
                        "trace {:.3e}, hermiticity residual {:.3e}",
                        rho.trace(),
                        crate::linalg::hermiticity_residual(rho)
                    )))
                }
            }
        }
    }

    /// Decomposition into weighted pure states.
    pub fn components(&self) -> Result<Vec<(f64, [C64; 4])>> {
        match self {
            TwoQubitState::Pure(amps) => Ok(vec![(1.0, *amps)]),
            TwoQubitState::Mixed(rho) => {
                let eig = density_spectrum(rho)?;
                Ok(eig
                    .eigenvalues
                    .iter()
                    .enumerate()
                    .filter(|(_, &w)| w > 0.0)
                    .map(|(k, &w)| {
                        let v = &eig.eigenvectors;
                        (w, [v[(0, k)], v[(1, k)], v[(2, k)], v[(3, k)]])
                    })
                    .collect())
            }
        }
    }
}

pub fn theta_state(theta: f64) -> QubitState {
    QubitState::theta(theta)
}

pub fn bell_state(which: BellState) -> TwoQubitState {
    TwoQubitState::Pure(which.amplitudes())
}

/// `(1 − γ)/4·I + γ|X⟩⟨X|`.
pub fn werner_state(gamma: f64, x: BellState) -> Result<TwoQubitState> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::GammaOutOfRange(gamma));
    }
    let noise = ComplexMatrix::identity(4).scale_real((1.0 - gamma) / 4.0);
    let bell = ComplexMatrix::projector(&x.amplitudes()).scale_real(gamma);
    Ok(TwoQubitState::Mixed(&noise + &bell))
}

/// Initial field state family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FieldKind {
    Fock(usize),
    Coherent(C64),
    /// Mean photon number ⟨n⟩.
    Thermal(f64),
}

/// Field state truncated to Fock levels `0..=n_max`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldSpec {
    pub kind: FieldKind,
    pub n_max: usize,
}

impl FieldSpec {
    pub fn fock(n: usize) -> Self {
        Self {
            kind: FieldKind::Fock(n),
            n_max: n,
        }
    }

    /// Coherent state with the default truncation `⌈|α|² + 8|α| + 10⌉`.
    pub fn coherent(alpha: C64) -> Self {
        let a = alpha.norm();
        Self {
            kind: FieldKind::Coherent(alpha),
            n_max: (a * a + 8.0 * a + 10.0).ceil() as usize,
        }
    }

    /// Thermal state with the default truncation `⌈20(⟨n⟩ + 1)⌉`.
    pub fn thermal(mean_n: f64) -> Self {
        Self {
            kind: FieldKind::Thermal(mean_n),
            n_max: (20.0 * (mean_n.max(0.0) + 1.0)).ceil() as usize,
        }
    }

    pub fn with_n_max(mut self, n_max: usize) -> Self {
        self.n_max = n_max;
        self
    }

    pub fn mode_dim(&self) -> usize {
        self.n_max + 1
    }

    /// Raises `n_max` until the discarded probability is below `tol`.
    ///
    /// Never lowers the current truncation.
    pub fn with_tail_below(self, tol: f64) -> Self {
        let needed = match self.kind {
            FieldKind::Fock(n) => n,
            FieldKind::Thermal(mean_n) if mean_n > 0.0 => {
                // The tail beyond n_max is q^{n_max + 1}.
                let q = mean_n / (1.0 + mean_n);
                (tol.ln() / q.ln()).ceil().max(1.0) as usize - 1
            }
            FieldKind::Coherent(alpha) if alpha.norm_sqr() > 0.0 => {
                // Past the mean the Poisson tail is bounded by a geometric series.
                let m = alpha.norm_sqr();
                let ln_m = m.ln();
                let mut ln_p = -m;
                let mut n = 0usize;
                loop {
                    let ratio = m / (n + 2) as f64;
                    if ratio < 1.0
                        && (ln_p + ln_m - ((n + 1) as f64).ln()).exp() / (1.0 - ratio) < tol
                    {
                        break n;
                    }
                    n += 1;
                    ln_p += ln_m - (n as f64).ln();
                }
            }
            _ => 0,
        };
        self.with_n_max(self.n_max.max(needed))
    }

    /// Untruncated mean photon number.
    pub fn mean_photon_number(&self) -> f64 {
        match self.kind {
            FieldKind::Fock(n) => n as f64,
            FieldKind::Coherent(alpha) => alpha.norm_sqr(),
            FieldKind::Thermal(mean_n) => mean_n,
        }
    }

    /// Photon-number probabilities of the truncated, renormalized state.
    pub fn photon_distribution(&self) -> Result<Vec<f64>> {
        let dim = self.mode_dim();
        let raw: Vec<f64> = match self.kind {
            FieldKind::Fock(n) => {
                if n > self.n_max {
                    return Err(Error::InvalidField(format!(
                        "Fock level {n} above truncation {}",
                        self.n_max
                    )));
                }
                let mut p = vec![0.0; dim];
                p[n] = 1.0;
                p
            }
            FieldKind::Coherent(alpha) => poisson_weights(alpha.norm_sqr(), dim),
            FieldKind::Thermal(mean_n) => {
                if !(mean_n >= 0.0) || !mean_n.is_finite() {
                    return Err(Error::InvalidField(format!(
                        "thermal mean {mean_n} must be ≥ 0"
                    )));
                }
                let q = mean_n / (1.0 + mean_n);
                let mut p = Vec::with_capacity(dim);
                let mut w = 1.0 / (1.0 + mean_n);
                for _ in 0..dim {
                    p.push(w);
                    w *= q;
                }
                p
            }
        };
        renormalize(raw, self.n_max)
    }

    /// Amplitudes of the truncated coherent state, if the field is coherent.
    pub fn coherent_amplitudes(&self) -> Result<Option<Vec<C64>>> {
        let FieldKind::Coherent(alpha) = self.kind else {
            return Ok(None);
        };
        let probs = self.photon_distribution()?;
        let phase = alpha.arg();
        Ok(Some(
            probs
                .iter()
                .enumerate()
                .map(|(n, &p)| C64::from_polar(p.sqrt(), n as f64 * phase))
                .collect(),
        ))
    }

    /// Decomposition of the field density into weighted pure states.
    pub fn components(&self) -> Result<Vec<(f64, Vec<C64>)>> {
        let dim = self.mode_dim();
        if let Some(amps) = self.coherent_amplitudes()? {
            return Ok(vec![(1.0, amps)]);
        }
        let probs = self.photon_distribution()?;
        Ok(probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(n, &p)| {
                let mut v = vec![ZERO; dim];
                v[n] = C64::new(1.0, 0.0);
                (p, v)
            })
            .collect())
    }
}

/// Poisson weights `e^{−m} mⁿ/n!` for `n < dim`, evaluated in log space.
fn poisson_weights(mean: f64, dim: usize) -> Vec<f64> {
    if mean == 0.0 {
        let mut p = vec![0.0; dim];
        p[0] = 1.0;
        return p;
    }
    let ln_mean = mean.ln();
    let mut ln_fact = 0.0;
    (0..dim)
        .map(|n| {
            if n > 0 {
                ln_fact += (n as f64).ln();
            }
            (-mean + n as f64 * ln_mean - ln_fact).exp()
        })
        .collect()
}

fn renormalize(mut p: Vec<f64>, n_max: usize) -> Result<Vec<f64>> {
    let kept: f64 = p.iter().sum();
    let tail = (1.0 - kept).max(0.0);
    if tail > TAIL_TOL {
        return Err(Error::TruncationTooSmall {
            n_max,
            tail,
            tol: TAIL_TOL,
        });
    }
    p.iter_mut().for_each(|w| *w /= kept);
    Ok(p)
}

/// `(n_max + 1)`-dimensional density matrix of the truncated field.
pub fn field_density(spec: &FieldSpec) -> Result<ComplexMatrix> {
    if let Some(amps) = spec.coherent_amplitudes()? {
        return Ok(ComplexMatrix::projector(&amps));
    }
    Ok(ComplexMatrix::from_real_diagonal(
        &spec.photon_distribution()?,
    ))
}

/// Mean thermal occupation `1/(e^{ω/kT} − 1)`; `kT ≤ 0` is the zero-temperature limit.
pub fn mean_photon_from_temperature(omega: f64, k_t: f64) -> f64 {
    if k_t <= 0.0 {
        return 0.0;
    }
    1.0 / (omega / k_t).exp_m1()
}

/// Embeds a field density into the mode space of `h`, padding with empty levels.
fn padded_field(field: &FieldSpec, h: HilbertIndex) -> Result<ComplexMatrix> {
    if h.n_max < field.n_max {
        return Err(Error::DimensionMismatch {
            expected: format!("mode truncation ≥ {}", field.n_max),
            got: format!("{}", h.n_max),
        });
    }
    let small = field_density(field)?;
    let mut out = ComplexMatrix::zeros(h.mode_dim(), h.mode_dim());
    for i in 0..small.nrows() {
        for j in 0..small.ncols() {
            out[(i, j)] = small[(i, j)];
        }
    }
    Ok(out)
}

/// `ρ_atoms ⊗ ρ_field` on the space of `h`.
pub fn compose_initial(
    atoms: &TwoQubitState,
    field: &FieldSpec,
    h: HilbertIndex,
) -> Result<ComplexMatrix> {
    atoms.validate(DENSITY_TOL)?;
    Ok(kron(&atoms.density(), &padded_field(field, h)?))
}

/// `ρ_atoms ⊗ ρ_field` as a mixture of pure product vectors on the space of `h`.
pub fn initial_components(
    atoms: &TwoQubitState,
    field: &FieldSpec,
    h: HilbertIndex,
) -> Result<Vec<(f64, Vec<C64>)>> {
    atoms.validate(DENSITY_TOL)?;
    if h.n_max < field.n_max {
        return Err(Error::DimensionMismatch {
            expected: format!("mode truncation ≥ {}", field.n_max),
            got: format!("{}", h.n_max),
        });
    }
    let atom_parts = atoms.components()?;
    let field_parts = field.components()?;
    let mut out = Vec::with_capacity(atom_parts.len() * field_parts.len());
    for (wa, va) in &atom_parts {
        for (wf, vf) in &field_parts {
            let mut v = vec![ZERO; h.total_dim()];
            for (i, a) in va.iter().enumerate() {
                for (n, f) in vf.iter().enumerate() {
                    v[i * h.mode_dim() + n] = a * f;
                }
            }
            out.push((wa * wf, v));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{partial_trace_mode, pauli};
    use std::f64::consts::{LN_2, PI};

    fn is_eigenstate(op: &ComplexMatrix, q: &QubitState, eigenvalue: C64) -> bool {
        let out = op.apply(&q.amplitudes());
        out.iter()
            .zip(q.amplitudes())
            .all(|(x, y)| (x - y * eigenvalue).norm() < 1e-14)
    }

    #[test]
    fn theta_states_are_equatorial() {
        assert!(is_eigenstate(
            &pauli::sigma_x(),
            &theta_state(0.0),
            C64::new(1.0, 0.0)
        ));
        assert!(is_eigenstate(
            &pauli::sigma_x(),
            &theta_state(PI),
            C64::new(-1.0, 0.0)
        ));
        // σ_y in the {|0⟩,|1⟩} basis with σ_+ = |1⟩⟨0|: (|0⟩ + i|1⟩)/√2 is an eigenvector.
        let sy = pauli::sigma_y();
        let q = theta_state(PI / 2.0);
        let out = sy.apply(&q.amplitudes());
        let ratio = out[0] / q.amp0();
        assert!((ratio.norm() - 1.0).abs() < 1e-14);
        assert!((out[1] - q.amp1() * ratio).norm() < 1e-14);
    }

    #[test]
    fn qubit_normalization_enforced() {
        assert!(QubitState::new(C64::new(1.0, 0.0), C64::new(1.0, 0.0)).is_err());
        let q = QubitState::normalized(C64::new(3.0, 0.0), C64::new(0.0, 4.0)).unwrap();
        assert!((q.amp0().re - 0.6).abs() < 1e-15);
        assert!(QubitState::normalized(ZERO, ZERO).is_err());
    }

    #[test]
    fn bell_amplitudes() {
        let s = FRAC_1_SQRT_2;
        let psi_plus = BellState::PsiPlus.amplitudes();
        assert_eq!(psi_plus.map(|z| z.re), [0.0, s, s, 0.0]);
        let phi_minus = BellState::PhiMinus.amplitudes();
        assert_eq!(phi_minus.map(|z| z.re), [s, 0.0, 0.0, -s]);
    }

    #[test]
    fn werner_limits_and_range() {
        let w0 = werner_state(0.0, BellState::PhiPlus).unwrap().density();
        assert!((&w0 - &ComplexMatrix::identity(4).scale_real(0.25)).frobenius_norm() < 1e-15);
        let w1 = werner_state(1.0, BellState::PsiMinus).unwrap().density();
        let proj = ComplexMatrix::projector(&BellState::PsiMinus.amplitudes());
        assert!((&w1 - &proj).frobenius_norm() < 1e-15);
        assert_eq!(
            werner_state(1.2, BellState::PhiPlus).unwrap_err(),
            Error::GammaOutOfRange(1.2)
        );
        assert!(werner_state(-0.1, BellState::PhiPlus).is_err());
        for g in [0.0, 0.3, 9.0 / 11.0, 1.0] {
            assert!(werner_state(g, BellState::PhiMinus)
                .unwrap()
                .validate(DENSITY_TOL)
                .is_ok());
        }
    }

    #[test]
    fn fock_vacuum_density() {
        let rho = field_density(&FieldSpec::fock(0)).unwrap();
        assert_eq!(rho, ComplexMatrix::from_real_diagonal(&[1.0]));
        let err = FieldSpec::fock(5)
            .with_n_max(3)
            .photon_distribution()
            .unwrap_err();
        assert!(matches!(err, Error::InvalidField(_)));
    }

    #[test]
    fn coherent_mean_photon_number() {
        let spec = FieldSpec::coherent(C64::new(2.0, 0.0)).with_n_max(30);
        let p = spec.photon_distribution().unwrap();
        let mean: f64 = p.iter().enumerate().map(|(n, w)| n as f64 * w).sum();
        assert!((mean - 4.0).abs() < 1e-6);
        let rho = field_density(&spec).unwrap();
        assert!(rho.is_density(DENSITY_TOL));
    }

    #[test]
    fn coherent_truncation_too_small() {
        let err = FieldSpec::coherent(C64::new(3.0, 0.0))
            .with_n_max(5)
            .photon_distribution()
            .unwrap_err();
        assert!(matches!(err, Error::TruncationTooSmall { .. }));
    }

    #[test]
    fn deep_truncation_reaches_requested_tail() {
        for field in [
            FieldSpec::thermal(0.3),
            FieldSpec::thermal(40.0),
            FieldSpec::coherent(C64::new(0.5, 0.0)),
            FieldSpec::coherent(C64::new(6.0, 2.0)),
        ] {
            let deep = field.with_tail_below(1e-15);
            assert!(deep.n_max >= field.n_max);
            let m = field.mean_photon_number();
            // Oracle: tail mass summed directly far past the truncation.
            let wide = field.with_n_max(deep.n_max + 400);
            let p = wide.photon_distribution().unwrap();
            let tail: f64 = p[deep.n_max + 1..].iter().sum();
            assert!(tail < 1.2e-15, "{m} {tail}");
        }
        assert_eq!(
            FieldSpec::fock(3).with_tail_below(1e-15),
            FieldSpec::fock(3)
        );
        assert_eq!(FieldSpec::thermal(0.0).with_tail_below(1e-15).n_max, 20);
    }

    #[test]
    fn default_truncations_meet_tail_tolerance() {
        for mean in [0.0, 0.5, 1.0, 3.0, 10.0, 20.0, 100.0, 400.0] {
            FieldSpec::coherent(C64::new(f64::sqrt(mean), 0.0))
                .photon_distribution()
                .unwrap();
            FieldSpec::thermal(mean).photon_distribution().unwrap();
        }
    }

    #[test]
    fn thermal_geometric_weights() {
        let p = FieldSpec::thermal(1.0).photon_distribution().unwrap();
        assert!((p[0] - 0.5).abs() < 1e-12);
        assert!((p[1] - 0.25).abs() < 1e-12);
        let vac = FieldSpec::thermal(0.0).photon_distribution().unwrap();
        assert_eq!(vac[0], 1.0);
        assert!(vac[1..].iter().all(|&w| w == 0.0));
        assert!(FieldSpec::thermal(-1.0).photon_distribution().is_err());
    }

    #[test]
    fn temperature_to_occupation() {
        assert_eq!(mean_photon_from_temperature(1.0, 1e-4), 0.0);
        assert!((mean_photon_from_temperature(LN_2, 1.0) - 1.0).abs() < 1e-12);
        assert!((mean_photon_from_temperature(1.5f64.ln(), 1.0) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn compose_and_trace_round_trip() {
        let atoms = TwoQubitState::product(&theta_state(0.0), &theta_state(0.0));
        let h = HilbertIndex::new(0);
        let rho = compose_initial(&atoms, &FieldSpec::fock(0), h).unwrap();
        assert!((rho.trace().re - 1.0).abs() < 1e-15);
        assert!((crate::linalg::purity(&rho) - 1.0).abs() < 1e-14);

        let werner = werner_state(0.6, BellState::PhiPlus).unwrap();
        let field = FieldSpec::thermal(0.5);
        let h = HilbertIndex::new(field.n_max + 2);
        let rho = compose_initial(&werner, &field, h).unwrap();
        assert!(rho.is_density(DENSITY_TOL));
        let back = partial_trace_mode(&rho, h.mode_dim()).unwrap();
        assert!((&back - &werner.density()).frobenius_norm() < 1e-12);
    }

    #[test]
    fn compose_rejects_small_space() {
        let atoms = bell_state(BellState::PhiPlus);
        let err = compose_initial(&atoms, &FieldSpec::fock(3), HilbertIndex::new(2)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn components_reassemble_the_density() {
        let atoms = werner_state(0.7, BellState::PhiMinus).unwrap();
        for field in [
            FieldSpec::fock(2),
            FieldSpec::coherent(C64::from_polar(1.2, 0.4)),
            FieldSpec::thermal(0.5),
        ] {
            let h = HilbertIndex::new(field.n_max + 2);
            let parts = initial_components(&atoms, &field, h).unwrap();
            let mut rho = ComplexMatrix::zeros(h.total_dim(), h.total_dim());
            for (w, v) in &parts {
                rho = &rho + &ComplexMatrix::projector(v).scale_real(*w);
            }
            let direct = compose_initial(&atoms, &field, h).unwrap();
            assert!((&rho - &direct).frobenius_norm() < 1e-12);
        }
    }
}
