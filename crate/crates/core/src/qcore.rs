//! Complex linear algebra on the four-dimensional single-photon two-qubit space.
//!
//! One photon carries two qubits: its polarization (control, `V = 0`, `H = 1`)
//! and its spatial mode (target, `l`/`u = 0`, `r`/`d = 1`). Amplitudes are
//! stored in the fixed basis order `b = 2 * pol + spatial`:
//!
//! | index | ket        |
//! |-------|------------|
//! | 0     | `|V, l/u⟩` |
//! | 1     | `|V, r/d⟩` |
//! | 2     | `|H, l/u⟩` |
//! | 3     | `|H, r/d⟩` |
//!
//! Input labels (`l`, `r`) and output labels (`u`, `d`) share indices; the
//! relabeling across the Sagnac loop is bookkeeping only.

use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type C64 = Complex64;

/// Hilbert-space dimension.
pub const DIM: usize = 4;

/// Tolerance for algebraic identities (unitarity, norm preservation).
pub const ALGEBRA_TOL: f64 = 1e-12;

/// Tolerance for validating caller-supplied states.
pub const INPUT_TOL: f64 = 1e-9;

/// A 2×2 complex matrix acting on a single qubit (Jones matrix or spatial-mode operator).
pub type Mat2 = [[C64; 2]; 2];

pub const MAT2_IDENTITY: Mat2 = [
    [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
    [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QError {
    #[error("non-finite amplitude at index {index}")]
    NonFinite { index: usize },
    #[error("state is not normalized (squared norm {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },
    #[error("cannot normalize a zero vector")]
    ZeroNorm,
    #[error("matrix is not unitary (max |U U† - I| entry {deviation:e})")]
    NotUnitary { deviation: f64 },
    #[error("probabilities ({p_v}, {p_h}) do not form a distribution")]
    BadProbabilities { p_v: f64, p_h: f64 },
}

/// Polarization qubit value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pol {
    V = 0,
    H = 1,
}

/// Spatial-mode qubit value. `Near` is `l` on the input side and `u` on the
/// output side; `Far` is `r` / `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Spatial {
    Near = 0,
    Far = 1,
}

#[inline]
pub const fn basis_index(pol: Pol, spatial: Spatial) -> usize {
    2 * pol as usize + spatial as usize
}

/// Amplitudes of the photon's joint polarization/spatial state.
///
/// Construction only checks finiteness; normalization is checked by the
/// operations that need it (see [`pol_marginal`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector {
    amps: [C64; DIM],
}

impl StateVector {
    pub fn new(amps: [C64; DIM]) -> Result<Self, QError> {
        for (index, a) in amps.iter().enumerate() {
            if !(a.re.is_finite() && a.im.is_finite()) {
                return Err(QError::NonFinite { index });
            }
        }
        Ok(Self { amps })
    }

    /// Builds a state and rescales it to unit norm.
    pub fn normalized(amps: [C64; DIM]) -> Result<Self, QError> {
        Self::new(amps)?.normalize()
    }

    pub fn basis(index: usize) -> Self {
        assert!(index < DIM, "basis index {index} out of range");
        let mut amps = [C64::new(0.0, 0.0); DIM];
        amps[index] = C64::new(1.0, 0.0);
        Self { amps }
    }

    pub fn ket(pol: Pol, spatial: Spatial) -> Self {
        Self::basis(basis_index(pol, spatial))
    }

    /// Product state `pol ⊗ spatial` of two single-qubit kets.
    pub fn product(pol: [C64; 2], spatial: [C64; 2]) -> Result<Self, QError> {
        Self::new([
            pol[0] * spatial[0],
            pol[0] * spatial[1],
            pol[1] * spatial[0],
            pol[1] * spatial[1],
        ])
    }

    pub fn amps(&self) -> &[C64; DIM] {
        &self.amps
    }

    pub fn amp(&self, index: usize) -> C64 {
        self.amps[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    pub fn normalize(self) -> Result<Self, QError> {
        let n = self.norm_sqr().sqrt();
        if n == 0.0 {
            return Err(QError::ZeroNorm);
        }
        Ok(Self {
            amps: self.amps.map(|a| a / n),
        })
    }

    /// Inner product ⟨self|other⟩.
    pub fn inner(&self, other: &Self) -> C64 {
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|⟨self|other⟩|`; equals 1 for normalized states equal up to global phase.
    pub fn overlap(&self, other: &Self) -> f64 {
        self.inner(other).norm()
    }

    pub fn equal_up_to_phase(&self, other: &Self, tol: f64) -> bool {
        (1.0 - self.overlap(other)).abs() <= tol
    }

    pub fn with_global_phase(&self, theta: f64) -> Self {
        let ph = C64::from_polar(1.0, theta);
        Self {
            amps: self.amps.map(|a| a * ph),
        }
    }
}

impl fmt::Display for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const LABELS: [&str; DIM] = ["V,u", "V,d", "H,u", "H,d"];
        for (i, (a, label)) in self.amps.iter().zip(LABELS).enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({:+.6}{:+.6}i)|{label}⟩", a.re, a.im)?;
        }
        Ok(())
    }
}

/// A 4×4 unitary on the joint space. Unitarity is checked on construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unitary4 {
    m: [[C64; DIM]; DIM],
}

impl Unitary4 {
    pub fn new(m: [[C64; DIM]; DIM]) -> Result<Self, QError> {
        for row in &m {
            for (index, a) in row.iter().enumerate() {
                if !(a.re.is_finite() && a.im.is_finite()) {
                    return Err(QError::NonFinite { index });
                }
            }
        }
        let deviation = unitarity_deviation(&m);
        if deviation > ALGEBRA_TOL {
            return Err(QError::NotUnitary { deviation });
        }
        Ok(Self { m })
    }

    pub fn identity() -> Self {
        Self::from_permutation([0, 1, 2, 3])
    }

    /// Permutation matrix sending basis state `i` to basis state `dest[i]`.
    ///
    /// Panics if `dest` is not a permutation of `0..4`.
    pub fn from_permutation(dest: [usize; DIM]) -> Self {
        let mut seen = [false; DIM];
        for &d in &dest {
            assert!(d < DIM && !seen[d], "not a permutation: {dest:?}");
            seen[d] = true;
        }
        let mut m = [[C64::new(0.0, 0.0); DIM]; DIM];
        for (src, &d) in dest.iter().enumerate() {
            m[d][src] = C64::new(1.0, 0.0);
        }
        Self { m }
    }

    pub fn matrix(&self) -> &[[C64; DIM]; DIM] {
        &self.m
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.m[row][col]
    }

    pub fn adjoint(&self) -> Self {
        let mut m = [[C64::new(0.0, 0.0); DIM]; DIM];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = self.m[c][r].conj();
            }
        }
        Self { m }
    }

    /// `self · s`.
    pub fn apply(&self, s: &StateVector) -> StateVector {
        let mut amps = [C64::new(0.0, 0.0); DIM];
        for (r, out) in amps.iter_mut().enumerate() {
            *out = (0..DIM).map(|c| self.m[r][c] * s.amps[c]).sum();
        }
        StateVector { amps }
    }

    /// `self · first`, i.e. `first` acts before `self`.
    pub fn after(&self, first: &Self) -> Self {
        Self {
            m: matmul(&self.m, &first.m),
        }
    }

    /// Largest elementwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.m
            .iter()
            .flatten()
            .zip(other.m.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }

    /// Exact 0/1 entries with a single 1 in every row and column.
    pub fn is_permutation(&self) -> bool {
        let zero = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let entries_ok = self.m.iter().flatten().all(|&a| a == zero || a == one);
        let rows_ok = self
            .m
            .iter()
            .all(|row| row.iter().filter(|&&a| a == one).count() == 1);
        let cols_ok = (0..DIM).all(|c| (0..DIM).filter(|&r| self.m[r][c] == one).count() == 1);
        entries_ok && rows_ok && cols_ok
    }

    /// For a permutation matrix, the destination of each basis state.
    pub fn permutation(&self) -> Option<[usize; DIM]> {
        if !self.is_permutation() {
            return None;
        }
        let mut dest = [0; DIM];
        for (src, d) in dest.iter_mut().enumerate() {
            *d = (0..DIM)
                .find(|&r| self.m[r][src] == C64::new(1.0, 0.0))
                .expect("permutation column");
        }
        Some(dest)
    }
}

impl Mul for Unitary4 {
    type Output = Unitary4;

    fn mul(self, rhs: Unitary4) -> Unitary4 {
        self.after(&rhs)
    }
}

impl Mul<StateVector> for Unitary4 {
    type Output = StateVector;

    fn mul(self, rhs: StateVector) -> StateVector {
        self.apply(&rhs)
    }
}

fn matmul(a: &[[C64; DIM]; DIM], b: &[[C64; DIM]; DIM]) -> [[C64; DIM]; DIM] {
    let mut out = [[C64::new(0.0, 0.0); DIM]; DIM];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = (0..DIM).map(|k| a[r][k] * b[k][c]).sum();
        }
    }
    out
}

fn unitarity_deviation(m: &[[C64; DIM]; DIM]) -> f64 {
    let mut worst: f64 = 0.0;
    for r in 0..DIM {
        for c in 0..DIM {
            let dot: C64 = (0..DIM).map(|k| m[r][k] * m[c][k].conj()).sum();
            let expect = if r == c { 1.0 } else { 0.0 };
            worst = worst.max((dot - expect).norm());
        }
    }
    worst
}

fn mat2_unitarity_deviation(m: &Mat2) -> f64 {
    let mut worst: f64 = 0.0;
    for r in 0..2 {
        for c in 0..2 {
            let dot = m[r][0] * m[c][0].conj() + m[r][1] * m[c][1].conj();
            let expect = if r == c { 1.0 } else { 0.0 };
            worst = worst.max((dot - expect).norm());
        }
    }
    worst
}

/// Lifts single-qubit factors to the joint space as `pol_op ⊗ spat_op`.
/// A missing factor is the identity.
pub fn tensor_lift(pol_op: Option<&Mat2>, spat_op: Option<&Mat2>) -> Result<Unitary4, QError> {
    let p = pol_op.unwrap_or(&MAT2_IDENTITY);
    let s = spat_op.unwrap_or(&MAT2_IDENTITY);
    for f in [p, s] {
        if f.iter()
            .flatten()
            .any(|a| !(a.re.is_finite() && a.im.is_finite()))
        {
            return Err(QError::NonFinite { index: 0 });
        }
        let deviation = mat2_unitarity_deviation(f);
        if deviation > ALGEBRA_TOL {
            return Err(QError::NotUnitary { deviation });
        }
    }
    let mut m = [[C64::new(0.0, 0.0); DIM]; DIM];
    for (r, row) in m.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = p[r / 2][c / 2] * s[r % 2][c % 2];
        }
    }
    Unitary4::new(m)
}

/// `u · s`. Finiteness of `s` is guaranteed by [`StateVector`] construction.
pub fn apply_unitary(u: &Unitary4, s: &StateVector) -> StateVector {
    u.apply(s)
}

/// Matrix product `u_last · u_first`.
pub fn compose(u_last: &Unitary4, u_first: &Unitary4) -> Result<Unitary4, QError> {
    Unitary4::new(matmul(&u_last.m, &u_first.m))
}

/// Polarization detection probabilities. With the detection PBS, `H` goes to
/// detector D₁ and `V` to detector D₂.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolProbs {
    pub p_v: f64,
    pub p_h: f64,
}

impl PolProbs {
    pub fn new(p_v: f64, p_h: f64) -> Result<Self, QError> {
        let in_range = |p: f64| (-ALGEBRA_TOL..=1.0 + ALGEBRA_TOL).contains(&p);
        if !(in_range(p_v) && in_range(p_h) && (p_v + p_h - 1.0).abs() <= ALGEBRA_TOL) {
            return Err(QError::BadProbabilities { p_v, p_h });
        }
        Ok(Self { p_v, p_h })
    }

    /// Probability of a D₁ click (H).
    pub fn d1(&self) -> f64 {
        self.p_h
    }

    /// Probability of a D₂ click (V).
    pub fn d2(&self) -> f64 {
        self.p_v
    }
}

/// Marginal polarization distribution, summed over both spatial modes.
pub fn pol_marginal(s: &StateVector) -> Result<PolProbs, QError> {
    let norm_sqr = s.norm_sqr();
    if (norm_sqr - 1.0).abs() > INPUT_TOL {
        return Err(QError::NotNormalized { norm_sqr });
    }
    let a = s.amps();
    let p_v = a[0].norm_sqr() + a[1].norm_sqr();
    let p_h = a[2].norm_sqr() + a[3].norm_sqr();
    // Renormalize away the sub-INPUT_TOL drift so the pair sums to 1 tightly.
    Ok(PolProbs {
        p_v: p_v / norm_sqr,
        p_h: p_h / norm_sqr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn cnot() -> Unitary4 {
        Unitary4::from_permutation([0, 1, 3, 2])
    }

    fn x_pol() -> Mat2 {
        [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]]
    }

    fn hadamard() -> Mat2 {
        let h = FRAC_1_SQRT_2;
        [[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]]
    }

    #[test]
    fn identity_leaves_state_alone() {
        let s =
            StateVector::normalized([c(0.3, 0.1), c(-0.2, 0.5), c(0.0, 0.7), c(0.4, 0.0)]).unwrap();
        assert_eq!(apply_unitary(&Unitary4::identity(), &s), s);
    }

    #[test]
    fn cnot_fixes_uniform_state() {
        let s = StateVector::new([c(0.5, 0.0); 4]).unwrap();
        assert_eq!(apply_unitary(&cnot(), &s), s);
    }

    #[test]
    fn cnot_sends_h_l_to_h_d() {
        let out = apply_unitary(&cnot(), &StateVector::ket(Pol::H, Spatial::Near));
        assert_eq!(out, StateVector::ket(Pol::H, Spatial::Far));
        assert_eq!(out, StateVector::basis(3));
    }

    #[test]
    fn non_finite_amplitude_rejected() {
        let err = StateVector::new([c(f64::NAN, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(err, Err(QError::NonFinite { index: 0 }));
        let err = StateVector::new([c(0.0, 0.0), c(0.0, f64::INFINITY), c(0.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(err, Err(QError::NonFinite { index: 1 }));
    }

    #[test]
    fn tensor_lift_of_nothing_is_identity() {
        assert_eq!(tensor_lift(None, None).unwrap(), Unitary4::identity());
    }

    #[test]
    fn tensor_lift_pol_flip_swaps_halves() {
        let u = tensor_lift(Some(&x_pol()), None).unwrap();
        assert_eq!(u.permutation(), Some([2, 3, 0, 1]));
    }

    #[test]
    fn tensor_lift_rejects_non_unitary() {
        let bad: Mat2 = [[c(1.0, 0.0), c(1.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]];
        assert!(matches!(
            tensor_lift(Some(&bad), None),
            Err(QError::NotUnitary { .. })
        ));
        assert!(matches!(
            tensor_lift(None, Some(&bad)),
            Err(QError::NotUnitary { .. })
        ));
    }

    #[test]
    fn hadamard_on_polarization_collapses_diagonal_pol() {
        // (|V⟩+|H⟩)(|u⟩+e^{iφ}|d⟩)/2  →  |V⟩(|u⟩+e^{iφ}|d⟩)/√2
        let phi = 0.73;
        let e = C64::from_polar(1.0, phi);
        let s = StateVector::new([c(0.5, 0.0), e * 0.5, c(0.5, 0.0), e * 0.5]).unwrap();
        let h = tensor_lift(Some(&hadamard()), None).unwrap();
        let out = apply_unitary(&h, &s);
        let expect = StateVector::new([
            c(FRAC_1_SQRT_2, 0.0),
            e * FRAC_1_SQRT_2,
            c(0.0, 0.0),
            c(0.0, 0.0),
        ])
        .unwrap();
        assert!(out.equal_up_to_phase(&expect, 1e-12));
    }

    #[test]
    fn cnot_is_involution_and_identity_is_neutral() {
        assert_eq!(compose(&cnot(), &cnot()).unwrap(), Unitary4::identity());
        let u = tensor_lift(Some(&hadamard()), None).unwrap();
        assert_eq!(compose(&Unitary4::identity(), &u).unwrap(), u);
    }

    #[test]
    fn conjugated_cnot_matches_zero_controlled_not() {
        // Independent oracle: explicit triple-loop products on raw arrays.
        fn naive(a: &[[C64; 4]; 4], b: &[[C64; 4]; 4]) -> [[C64; 4]; 4] {
            let mut out = [[c(0.0, 0.0); 4]; 4];
            for i in 0..4 {
                for j in 0..4 {
                    let mut acc = c(0.0, 0.0);
                    for k in 0..4 {
                        acc += a[i][k] * b[k][j];
                    }
                    out[i][j] = acc;
                }
            }
            out
        }
        let x = tensor_lift(Some(&x_pol()), None).unwrap();
        let expect = naive(x.matrix(), &naive(cnot().matrix(), x.matrix()));
        // |V,l⟩→|V,d⟩, |V,r⟩→|V,u⟩, H unchanged.
        let zcnot = Unitary4::from_permutation([1, 0, 2, 3]);
        assert_eq!(&expect, zcnot.matrix());

        let got = compose(&x, &compose(&cnot(), &x).unwrap()).unwrap();
        assert!(got.approx_eq(&zcnot, 1e-12));
    }

    #[test]
    fn marginals_of_reference_states() {
        let h = FRAC_1_SQRT_2;
        let v_minus = StateVector::new([c(h, 0.0), c(-h, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        let p = pol_marginal(&v_minus).unwrap();
        assert_eq!((p.p_v, p.p_h), (1.0, 0.0));

        let h_minus = StateVector::new([c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0), c(-h, 0.0)]).unwrap();
        let p = pol_marginal(&h_minus).unwrap();
        assert!((p.p_v - 0.0).abs() < 1e-15 && (p.p_h - 1.0).abs() < 1e-15);

        let uniform = StateVector::new([c(0.5, 0.0); 4]).unwrap();
        let p = pol_marginal(&uniform).unwrap();
        assert_eq!((p.p_v, p.p_h), (0.5, 0.5));
    }

    #[test]
    fn marginal_rejects_unnormalized() {
        let s = StateVector::new([c(1.0, 0.0); 4]).unwrap();
        assert!(matches!(
            pol_marginal(&s),
            Err(QError::NotNormalized { .. })
        ));
    }

    #[test]
    fn unitary_constructor_rejects_scaled_identity() {
        let mut m = *Unitary4::identity().matrix();
        m[0][0] = c(1.0 + 1e-6, 0.0);
        assert!(matches!(Unitary4::new(m), Err(QError::NotUnitary { .. })));
    }

    #[test]
    fn phase_product_overlap() {
        let s =
            StateVector::normalized([c(1.0, 0.0), c(0.0, 1.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let t = s.with_global_phase(PI / 3.0);
        assert!(s.equal_up_to_phase(&t, 1e-12));
        assert!(s != t);
    }
}
