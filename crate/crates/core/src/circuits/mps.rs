//! Random open-boundary matrix product states with exact sampling.
//!
//! Site `i` (0-based) carries qubit `i + 1`, i.e. bit `i` of the outcome
//! index. Tensors are stored row-major as `[left][physical][right]`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::bits::{check_qubits, BitString};
use crate::error::{check_same_n, domain, Error, Result};
use crate::prob::ProbVector;
use crate::rng::RandomStream;
use crate::samples::SampleSet;

#[derive(Clone, Debug, PartialEq)]
pub struct SiteTensor {
    pub left: usize,
    pub right: usize,
    data: Vec<Complex64>,
}

impl SiteTensor {
    pub fn new(left: usize, right: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != left * 2 * right || left == 0 || right == 0 {
            return Err(Error::Dimension(format!("site tensor {left}x2x{right} given {} entries", data.len())));
        }
        Ok(Self { left, right, data })
    }

    #[inline]
    pub fn get(&self, l: usize, s: usize, r: usize) -> Complex64 {
        self.data[(l * 2 + s) * self.right + r]
    }

    /// Matrix `A^s` applied to a right vector: `out[l] = Σ_r A[l][s][r] v[r]`.
    fn apply_right(&self, s: usize, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.left)
            .map(|l| {
                let row = &self.data[(l * 2 + s) * self.right..(l * 2 + s + 1) * self.right];
                row.iter().zip(v).map(|(a, b)| a * b).sum()
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MpsState {
    n: u32,
    chi: usize,
    sites: Vec<SiteTensor>,
    canonical: bool,
}

/// Bond dimensions `D_0..=D_n` for a maximal-rank MPS capped at `chi`.
pub fn bond_dimensions(n: u32, chi: usize) -> Vec<usize> {
    (0..=n)
        .map(|i| {
            let left = 1usize.checked_shl(i).unwrap_or(usize::MAX);
            let right = 1usize.checked_shl(n - i).unwrap_or(usize::MAX);
            chi.min(left).min(right)
        })
        .collect()
}

impl MpsState {
    /// Wraps raw site tensors; call [`MpsState::canonicalize`] before sampling.
    pub fn from_sites(sites: Vec<SiteTensor>, chi: usize) -> Result<Self> {
        let n = sites.len() as u32;
        check_qubits(n)?;
        if sites[0].left != 1 || sites[sites.len() - 1].right != 1 {
            return Err(Error::Dimension("boundary bond dimensions must be 1".into()));
        }
        for w in sites.windows(2) {
            if w[0].right != w[1].left {
                return Err(Error::Dimension(format!("bond mismatch {} vs {}", w[0].right, w[1].left)));
            }
        }
        if sites.iter().any(|s| s.left > chi || s.right > chi) {
            return domain(format!("bond dimension exceeds chi = {chi}"));
        }
        Ok(Self { n, chi, sites, canonical: false })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn chi(&self) -> usize {
        self.chi
    }

    pub fn sites(&self) -> &[SiteTensor] {
        &self.sites
    }

    pub fn is_canonical(&self) -> bool {
        self.canonical
    }

    /// Left-canonical form by successive QR, then unit norm.
    pub fn canonicalize(&mut self) {
        let last = self.sites.len() - 1;
        for i in 0..last {
            let site = &self.sites[i];
            let (rows, cols) = (site.left * 2, site.right);
            let m = DMatrix::from_fn(rows, cols, |r, c| site.data[r * cols + c]);
            let qr = m.qr();
            let (q, r) = (qr.q(), qr.r());
            let k = q.ncols();
            let mut data = vec![Complex64::new(0.0, 0.0); rows * k];
            for row in 0..rows {
                for c in 0..k {
                    data[row * k + c] = q[(row, c)];
                }
            }
            self.sites[i] = SiteTensor { left: site.left, right: k, data };
            let next = &self.sites[i + 1];
            let width = 2 * next.right;
            let mut merged = vec![Complex64::new(0.0, 0.0); k * width];
            for a in 0..k {
                for c in 0..next.left {
                    let rac = r[(a, c)];
                    if rac == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    for j in 0..width {
                        merged[a * width + j] += rac * next.data[c * width + j];
                    }
                }
            }
            self.sites[i + 1] = SiteTensor { left: k, right: next.right, data: merged };
        }
        let tail = &mut self.sites[last];
        let norm = tail.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        tail.data.iter_mut().for_each(|z| *z /= norm);
        self.canonical = true;
    }

    /// `⟨x|ψ⟩` by left-to-right contraction.
    pub fn amplitude(&self, x: u64) -> Complex64 {
        let mut v = vec![Complex64::new(1.0, 0.0)];
        for (i, site) in self.sites.iter().enumerate() {
            let s = ((x >> i) & 1) as usize;
            v = (0..site.right).map(|r| (0..site.left).map(|l| v[l] * site.get(l, s, r)).sum()).collect();
        }
        v[0]
    }

    /// All `2^n` amplitudes, indexed by outcome.
    pub fn dense_amplitudes(&self) -> Vec<Complex64> {
        // env[z * D + b]: partial contraction over the first i sites
        let mut env = vec![Complex64::new(1.0, 0.0)];
        let mut prefix = 1usize;
        for site in &self.sites {
            let (dl, dr) = (site.left, site.right);
            let mut next = vec![Complex64::new(0.0, 0.0); 2 * prefix * dr];
            for s in 0..2 {
                for z in 0..prefix {
                    let out = &mut next[(z + s * prefix) * dr..(z + s * prefix + 1) * dr];
                    for l in 0..dl {
                        let e = env[z * dl + l];
                        let row = &site.data[(l * 2 + s) * dr..(l * 2 + s + 1) * dr];
                        for (o, a) in out.iter_mut().zip(row) {
                            *o += e * a;
                        }
                    }
                }
            }
            env = next;
            prefix *= 2;
        }
        env
    }

    pub fn prob_vector(&self) -> Result<ProbVector> {
        let probs = self.dense_amplitudes().iter().map(|a| a.norm_sqr()).collect();
        ProbVector::from_weights(probs, self.n)
    }
}

/// Site tensors with i.i.d. standard complex Gaussian entries, left-canonicalized.
pub fn random_mps(n: u32, chi: usize, stream: &RandomStream) -> Result<MpsState> {
    check_qubits(n)?;
    if chi == 0 {
        return domain("bond dimension must be at least 1");
    }
    let dims = bond_dimensions(n, chi);
    let mut rng = stream.rng();
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let sites = dims
        .windows(2)
        .map(|w| {
            let data = (0..w[0] * 2 * w[1])
                .map(|_| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    Complex64::new(re * scale, im * scale)
                })
                .collect();
            SiteTensor::new(w[0], w[1], data)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut state = MpsState::from_sites(sites, chi)?;
    state.canonicalize();
    Ok(state)
}

pub fn mps_probability(state: &MpsState, x: BitString) -> Result<f64> {
    check_same_n(state.n, x.n())?;
    if !state.canonical {
        return domain("state must be canonicalized first");
    }
    Ok(state.amplitude(x.bits()).norm_sqr())
}

/// Exact sequential sampling from the last site backwards.
///
/// In left-canonical form the sites to the left of the cut contract to the
/// identity, so the marginal of `x_k..x_n` is `‖A_k^{x_k} ⋯ A_n^{x_n}‖²`.
pub fn mps_sample(state: &MpsState, stream: &RandomStream, count: usize) -> Result<SampleSet> {
    if !state.canonical {
        return domain("state must be canonicalized first");
    }
    let mut rng = stream.rng();
    let outcomes = (0..count)
        .map(|_| {
            let mut v = vec![Complex64::new(1.0, 0.0)];
            let mut x = 0u64;
            for (i, site) in state.sites.iter().enumerate().rev() {
                let w0 = site.apply_right(0, &v);
                let w1 = site.apply_right(1, &v);
                let p0: f64 = w0.iter().map(|z| z.norm_sqr()).sum();
                let p1: f64 = w1.iter().map(|z| z.norm_sqr()).sum();
                let (bit, mut w, pw) = if rng.random::<f64>() * (p0 + p1) < p0 { (0, w0, p0) } else { (1, w1, p1) };
                let norm = pw.sqrt();
                w.iter_mut().for_each(|z| *z /= norm);
                v = w;
                x |= (bit as u64) << i;
            }
            x
        })
        .collect();
    Ok(SampleSet::from_outcomes(state.n, outcomes)?.with_provenance(format!("mps-chi{}", state.chi), *stream))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::sample_product;
    use crate::families::{product_prob_vector, ProductParams};
    use crate::rng::derive_stream;

    #[test]
    fn bond_dims() {
        assert_eq!(bond_dimensions(6, 6), vec![1, 2, 4, 6, 4, 2, 1]);
        assert_eq!(bond_dimensions(4, 1), vec![1; 5]);
    }

    #[test]
    fn norm_after_canonicalization() {
        for (n, chi) in [(3u32, 2usize), (6, 6), (8, 3)] {
            let s = random_mps(n, chi, &derive_stream(1, n as u64)).unwrap();
            let total: f64 = s.dense_amplitudes().iter().map(|a| a.norm_sqr()).sum();
            assert!((total - 1.0).abs() < 1e-10, "n={n}: {total}");
        }
    }

    #[test]
    fn left_canonical_isometries() {
        let s = random_mps(7, 5, &derive_stream(2, 0)).unwrap();
        for site in &s.sites()[..6] {
            for a in 0..site.right {
                for b in 0..site.right {
                    let g: Complex64 = (0..site.left)
                        .flat_map(|l| (0..2).map(move |p| (l, p)))
                        .map(|(l, p)| site.get(l, p, a).conj() * site.get(l, p, b))
                        .sum();
                    let expect = if a == b { 1.0 } else { 0.0 };
                    assert!((g - expect).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn bond_one_is_a_product_state() {
        let s = random_mps(5, 1, &derive_stream(3, 0)).unwrap();
        let p = s.prob_vector().unwrap();
        let a: Vec<f64> = s
            .sites()
            .iter()
            .map(|t| t.get(0, 0, 0).norm_sqr() / (t.get(0, 0, 0).norm_sqr() + t.get(0, 1, 0).norm_sqr()))
            .collect();
        let q = product_prob_vector(&ProductParams::new(a).unwrap());
        for (x, y) in p.values().iter().zip(q.values()) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn pointwise_probability_matches_dense() {
        for n in 1..=8u32 {
            let s = random_mps(n, n as usize, &derive_stream(4, n as u64)).unwrap();
            let dense = s.prob_vector().unwrap();
            let mut total = 0.0;
            for x in 0..1u64 << n {
                let p = mps_probability(&s, BitString::new(x, n).unwrap()).unwrap();
                assert!((p - dense.get(x as usize)).abs() < 1e-10);
                total += p;
            }
            assert!((total - 1.0).abs() < 1e-10);
        }
        let big = random_mps(10, 4, &derive_stream(4, 99)).unwrap();
        let total: f64 = (0..1u64 << 10).map(|x| mps_probability(&big, BitString::new(x, 10).unwrap()).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn sampler_goodness_of_fit() {
        let s = random_mps(6, 6, &derive_stream(5, 0)).unwrap();
        let p = s.prob_vector().unwrap();
        let draws = 100_000;
        let samples = mps_sample(&s, &derive_stream(5, 1), draws).unwrap();
        let counts = samples.counts();
        // pool cells with expected count < 5
        let (mut chi2, mut dof, mut pooled_e, mut pooled_o) = (0.0, 0usize, 0.0, 0.0);
        for (&c, &pr) in counts.iter().zip(p.values()) {
            let e = pr * draws as f64;
            if e < 5.0 {
                pooled_e += e;
                pooled_o += c as f64;
            } else {
                chi2 += (c as f64 - e).powi(2) / e;
                dof += 1;
            }
        }
        if pooled_e > 0.0 {
            chi2 += (pooled_o - pooled_e).powi(2) / pooled_e;
            dof += 1;
        }
        let k = (dof - 1) as f64;
        // Wilson-Hilferty 1% upper quantile
        let crit = k * (1.0 - 2.0 / (9.0 * k) + 2.326 * (2.0 / (9.0 * k)).sqrt()).powi(3);
        assert!(chi2 < crit, "chi2 {chi2} dof {k} crit {crit}");
        let again = mps_sample(&s, &derive_stream(5, 1), draws).unwrap();
        assert_eq!(samples, again);
    }

    #[test]
    fn bond_one_sampling_matches_product_sampler_statistics() {
        let s = random_mps(3, 1, &derive_stream(6, 0)).unwrap();
        let a: Vec<f64> = s.sites().iter().map(|t| t.get(0, 0, 0).norm_sqr()).collect();
        let params = ProductParams::new(a).unwrap();
        let draws = 50_000;
        let m = mps_sample(&s, &derive_stream(6, 1), draws).unwrap().counts();
        let q = sample_product(&params, &derive_stream(6, 2), draws).counts();
        // two-sample chi-square homogeneity, 7 dof, 1% critical 18.475
        let chi2: f64 = m
            .iter()
            .zip(&q)
            .filter(|(a, b)| **a + **b > 0)
            .map(|(&a, &b)| (a as f64 - b as f64).powi(2) / (a + b) as f64)
            .sum();
        assert!(chi2 < 18.475, "chi2 {chi2}");
    }

    #[test]
    fn requires_canonical_state() {
        let data = vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)];
        let raw = MpsState::from_sites(vec![SiteTensor::new(1, 1, data).unwrap()], 1).unwrap();
        assert!(mps_probability(&raw, BitString::new(0, 1).unwrap()).is_err());
        let mut fixed = raw.clone();
        fixed.canonicalize();
        assert!((mps_probability(&fixed, BitString::new(0, 1).unwrap()).unwrap() - 0.5).abs() < 1e-15);
        assert!(random_mps(3, 0, &derive_stream(0, 0)).is_err());
    }
}
