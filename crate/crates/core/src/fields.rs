//! Classical two-mode field amplitudes and the linear-optics transfer
//! matrices that act on them.

use num_complex::Complex64;

pub type ComplexAmplitude = Complex64;

/// Field amplitudes at the two ports of a stage: `a` is the upper port,
/// `b` the lower.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldPair {
    pub a: ComplexAmplitude,
    pub b: ComplexAmplitude,
}

impl FieldPair {
    pub fn new(a: ComplexAmplitude, b: ComplexAmplitude) -> Self {
        FieldPair { a, b }
    }

    /// Sum of the port intensities |a|^2 + |b|^2.
    pub fn total_intensity(&self) -> f64 {
        self.a.norm_sqr() + self.b.norm_sqr()
    }
}

/// 2x2 complex transfer matrix, row-major: `m[row][col]`.
///
/// All builders return unitary matrices; global phases are kept as
/// written rather than stripped, since intensities never see them.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoModeTransfer {
    pub m: [[ComplexAmplitude; 2]; 2],
}

/// |amplitude|^2.
pub fn intensity(a: ComplexAmplitude) -> f64 {
    a.norm_sqr()
}

/// Balanced splitter, (1/sqrt 2) [[1, i], [i, 1]]: the cross path picks
/// up the pi/2 reflection phase.
pub fn beam_splitter() -> TwoModeTransfer {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let d = Complex64::new(s, 0.0);
    let x = Complex64::new(0.0, s);
    TwoModeTransfer { m: [[d, x], [x, d]] }
}

/// Relative phase on the lower arm: diag(1, e^{i phi}).
pub fn phase_shifter(phi: f64) -> TwoModeTransfer {
    assert!(phi.is_finite());
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    TwoModeTransfer {
        m: [[one, zero], [zero, Complex64::from_polar(1.0, phi)]],
    }
}

/// Splitter, phase phi on the lower arm, splitter again, expanded:
///
/// (1/2) [[1 - e^{i phi},     i(1 + e^{i phi})],
///        [i(1 + e^{i phi}), -(1 - e^{i phi})]]
pub fn mzi_transfer(phi: f64) -> TwoModeTransfer {
    assert!(phi.is_finite());
    let e = Complex64::from_polar(1.0, phi);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let half = 0.5;
    let diag = (one - e) * half;
    let cross = i * (one + e) * half;
    TwoModeTransfer {
        m: [[diag, cross], [cross, -diag]],
    }
}

/// Matrix product `outer * inner`: `inner` acts on the fields first.
pub fn compose(outer: &TwoModeTransfer, inner: &TwoModeTransfer) -> TwoModeTransfer {
    let a = &outer.m;
    let b = &inner.m;
    let mut m = [[Complex64::new(0.0, 0.0); 2]; 2];
    for (row, m_row) in m.iter_mut().enumerate() {
        for (col, cell) in m_row.iter_mut().enumerate() {
            *cell = a[row][0] * b[0][col] + a[row][1] * b[1][col];
        }
    }
    TwoModeTransfer { m }
}

/// Applies the transfer matrix to a field pair.
pub fn apply(t: &TwoModeTransfer, f: &FieldPair) -> FieldPair {
    FieldPair {
        a: t.m[0][0] * f.a + t.m[0][1] * f.b,
        b: t.m[1][0] * f.a + t.m[1][1] * f.b,
    }
}
