//! Fast Walsh-Hadamard transform over `F_2^n`.

use num_complex::Complex64;

use crate::prob::ProbVector;

/// Unnormalized in-place transform: `out[S] = Σ_x v[x] (-1)^{|S ∩ x|}`.
///
/// Panics if the length is not a power of two.
pub fn fwht_in_place(values: &mut [f64]) {
    let len = values.len();
    assert!(len.is_power_of_two(), "transform length {len} is not a power of two");
    let mut h = 1;
    while h < len {
        for block in values.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
}

/// Complex variant of [`fwht_in_place`].
pub fn fwht_complex_in_place(values: &mut [Complex64]) {
    let len = values.len();
    assert!(len.is_power_of_two(), "transform length {len} is not a power of two");
    let mut h = 1;
    while h < len {
        for block in values.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
}

/// Fourier characters `P̂(S) = Σ_x p(x) χ_S(x)`, indexed by subset mask.
pub fn walsh_hadamard(p: &ProbVector) -> Vec<f64> {
    let mut out = p.values().to_vec();
    fwht_in_place(&mut out);
    out
}

/// Recovers `p(x) = 2^{-n} Σ_S P̂(S) χ_S(x)`.
pub fn inverse_walsh_hadamard(spectrum: &[f64]) -> Vec<f64> {
    let mut out = spectrum.to_vec();
    fwht_in_place(&mut out);
    let scale = 1.0 / out.len() as f64;
    out.iter_mut().for_each(|v| *v *= scale);
    out
}
