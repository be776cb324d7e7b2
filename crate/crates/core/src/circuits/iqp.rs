use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::STATEVECTOR_CAP;
use crate::bits::{check_qubits, SubsetMask};
use crate::error::{domain, Error, Result};
use crate::families::{product_prob_vector, random_k_subset, scatter, ProductParams};
use crate::prob::ProbVector;
use crate::rng::RandomStream;
use crate::walsh::fwht_complex_in_place;

/// A diagonal generator `exp(i θ Z_S)` acting on one or two qubits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IqpGate {
    /// 1-based qubit labels.
    pub qubits: Vec<u32>,
    pub theta: f64,
}

/// Hadamard layer, diagonal gates of weight at most two, Hadamard layer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCircuit")]
pub struct IqpCircuit {
    n: u32,
    gates: Vec<IqpGate>,
}

#[derive(Deserialize)]
struct RawCircuit {
    n: u32,
    gates: Vec<IqpGate>,
}

impl TryFrom<RawCircuit> for IqpCircuit {
    type Error = Error;

    fn try_from(raw: RawCircuit) -> Result<Self> {
        IqpCircuit::new(raw.n, raw.gates)
    }
}

impl IqpCircuit {
    pub fn new(n: u32, gates: Vec<IqpGate>) -> Result<Self> {
        check_qubits(n)?;
        for g in &gates {
            let mask = SubsetMask::from_qubits(&g.qubits, n)?;
            if mask.is_empty() || mask.weight() > 2 || mask.weight() as usize != g.qubits.len() {
                return domain(format!("gate on qubits {:?} must act on one or two distinct qubits", g.qubits));
            }
            if !g.theta.is_finite() {
                return domain("gate angle must be finite");
            }
        }
        Ok(Self { n, gates })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn gates(&self) -> &[IqpGate] {
        &self.gates
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("circuit serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Per-qubit and per-pair angle totals.
    fn coefficients(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.n as usize;
        let mut lin = vec![0.0; n];
        let mut quad = vec![0.0; n * n];
        for g in &self.gates {
            match g.qubits.as_slice() {
                [a] => lin[*a as usize - 1] += g.theta,
                [a, b] => {
                    let (i, j) = (*a as usize - 1, *b as usize - 1);
                    quad[i * n + j] += g.theta;
                    quad[j * n + i] += g.theta;
                }
                _ => unreachable!("validated gate weight"),
            }
        }
        (lin, quad)
    }

    /// Phase `φ(z) = Σ_g θ_g Π_{i∈S_g} (−1)^{z_i}` for every basis state,
    /// walked in Gray-code order so each step costs `O(n)`.
    pub fn phases(&self) -> Vec<f64> {
        let n = self.n as usize;
        let (lin, quad) = self.coefficients();
        let mut phases = vec![0.0; 1usize << n];
        let mut signs = vec![1.0f64; n];
        let mut phi: f64 = lin.iter().sum::<f64>() + quad.iter().sum::<f64>() / 2.0;
        phases[0] = phi;
        let mut z = 0usize;
        for k in 1..1usize << n {
            let b = k.trailing_zeros() as usize;
            let field: f64 = lin[b] + (0..n).filter(|&j| j != b).map(|j| quad[b * n + j] * signs[j]).sum::<f64>();
            phi -= 2.0 * signs[b] * field;
            signs[b] = -signs[b];
            z ^= 1 << b;
            phases[z] = phi;
        }
        phases
    }
}

/// All singletons (optional) and all unordered pairs, angles uniform on `[0, 2π)`.
pub fn random_iqp_circuit(n: u32, stream: &RandomStream, include_singletons: bool) -> Result<IqpCircuit> {
    check_qubits(n)?;
    let mut rng = stream.rng();
    let mut gates = Vec::with_capacity((n + n * (n - 1) / 2) as usize);
    if include_singletons {
        for i in 1..=n {
            gates.push(IqpGate { qubits: vec![i], theta: rng.random::<f64>() * TAU });
        }
    }
    for i in 1..=n {
        for j in i + 1..=n {
            gates.push(IqpGate { qubits: vec![i, j], theta: rng.random::<f64>() * TAU });
        }
    }
    IqpCircuit::new(n, gates)
}

/// Output distribution `|⟨x| H D(θ) H |0⟩|²`.
pub fn iqp_prob_vector(circuit: &IqpCircuit) -> Result<ProbVector> {
    let n = circuit.n;
    if n > STATEVECTOR_CAP {
        return Err(Error::Resource(format!("IQP simulation is capped at {STATEVECTOR_CAP} qubits, got {n}")));
    }
    let mut amps: Vec<Complex64> = circuit.phases().into_iter().map(|phi| Complex64::from_polar(1.0, phi)).collect();
    fwht_complex_in_place(&mut amps);
    let scale = 1.0 / amps.len() as f64;
    let probs: Vec<f64> = amps.iter().map(|a| (a * scale).norm_sqr()).collect();
    ProbVector::from_weights(probs, n)
}

/// How product-IQP angles are drawn.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AngleLaw {
    /// `θ = 2 arccos √u`, so `cos²(θ/2)` is uniform on `[0, 1]`.
    #[default]
    UniformWeight,
    /// `θ` uniform on `[0, 2π)`.
    UniformAngle,
}

pub fn random_product_angles(n: u32, stream: &RandomStream, law: AngleLaw) -> Result<Vec<f64>> {
    check_qubits(n)?;
    let mut rng = stream.rng();
    Ok((0..n)
        .map(|_| match law {
            AngleLaw::UniformWeight => 2.0 * rng.random::<f64>().sqrt().acos(),
            AngleLaw::UniformAngle => rng.random::<f64>() * TAU,
        })
        .collect())
}

/// `p_θ(x) = Π_i |⟨x_i| R_x(θ_i) |0⟩|²`.
pub fn iqp_product_prob_vector(thetas: &[f64]) -> Result<ProbVector> {
    let a = thetas.iter().map(|t| (t / 2.0).cos().powi(2).clamp(0.0, 1.0)).collect();
    Ok(product_prob_vector(&ProductParams::new(a)?))
}

/// IQP distribution on `⌈log₂ n⌉` qubits scattered over random `n`-bit outcomes.
pub fn peaked_iqp_prob_vector(n: u32, stream: &RandomStream) -> Result<ProbVector> {
    if n < 2 {
        return domain("peaked IQP needs n >= 2");
    }
    check_qubits(n)?;
    let m = peaked_iqp_register(n);
    let inner = iqp_prob_vector(&random_iqp_circuit(m, &stream.child(0), true)?)?;
    let mut rng = stream.child(1).rng();
    let support = random_k_subset(1usize << n, inner.len(), &mut rng);
    Ok(scatter(n, &support, inner.values()))
}

/// `⌈log₂ n⌉`.
pub fn peaked_iqp_register(n: u32) -> u32 {
    (n as usize).next_power_of_two().trailing_zeros().max(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_stream;
    use rand::seq::SliceRandom;
    use std::f64::consts::PI;

    #[test]
    fn product_angle_examples() {
        let p = iqp_product_prob_vector(&[0.0; 3]).unwrap();
        assert!((p.get(0) - 1.0).abs() < 1e-15);
        let p = iqp_product_prob_vector(&[PI; 3]).unwrap();
        assert!((p.get(7) - 1.0).abs() < 1e-15);
        let p = iqp_product_prob_vector(&[PI / 2.0]).unwrap();
        assert!((p.get(0) - 0.5).abs() < 1e-15 && (p.get(1) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn gate_counts() {
        let s = derive_stream(1, 0);
        assert_eq!(random_iqp_circuit(3, &s, true).unwrap().gates().len(), 6);
        assert_eq!(random_iqp_circuit(1, &s, true).unwrap().gates().len(), 1);
        assert_eq!(random_iqp_circuit(4, &s, false).unwrap().gates().len(), 6);
    }

    #[test]
    fn angles_uniform_ks() {
        let mut thetas: Vec<f64> = (0..400)
            .flat_map(|t| random_iqp_circuit(5, &derive_stream(2, t), true).unwrap().gates.into_iter().map(|g| g.theta))
            .collect();
        thetas.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let m = thetas.len() as f64;
        let d = thetas
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = x / TAU;
                (f - i as f64 / m).abs().max(((i + 1) as f64 / m - f).abs())
            })
            .fold(0.0, f64::max);
        assert!(d < 1.628 / m.sqrt(), "KS {d}");
    }

    #[test]
    fn zero_angles_identity() {
        let c = IqpCircuit::new(
            3,
            vec![IqpGate { qubits: vec![1, 2], theta: 0.0 }, IqpGate { qubits: vec![3], theta: 0.0 }],
        )
        .unwrap();
        let p = iqp_prob_vector(&c).unwrap();
        assert!((p.get(0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn single_qubit_matches_matrix_algebra() {
        // H diag(e^{iθ}, e^{-iθ}) H |0> = (cos θ, i sin θ)
        for theta in [0.1, 0.7, 1.3, 2.9, 4.4] {
            let c = IqpCircuit::new(1, vec![IqpGate { qubits: vec![1], theta }]).unwrap();
            let p = iqp_prob_vector(&c).unwrap();
            assert!((p.get(1) - theta.sin().powi(2)).abs() < 1e-14);
        }
    }

    fn brute_force(c: &IqpCircuit) -> Vec<f64> {
        let n = c.n() as usize;
        let big_n = 1usize << n;
        let phase = |z: usize| -> f64 {
            c.gates()
                .iter()
                .map(|g| {
                    g.theta
                        * g.qubits.iter().map(|&q| if (z >> (q - 1)) & 1 == 1 { -1.0 } else { 1.0 }).product::<f64>()
                })
                .sum()
        };
        (0..big_n)
            .map(|x| {
                let amp: Complex64 = (0..big_n)
                    .map(|z| {
                        let sign = if (x & z).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                        Complex64::from_polar(sign, phase(z))
                    })
                    .sum();
                (amp / big_n as f64).norm_sqr()
            })
            .collect()
    }

    #[test]
    fn matches_brute_force_simulation() {
        for n in 1..=6 {
            let c = random_iqp_circuit(n, &derive_stream(3, n as u64), true).unwrap();
            let fast = iqp_prob_vector(&c).unwrap();
            for (a, b) in fast.values().iter().zip(brute_force(&c)) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn normalized_for_random_circuits() {
        for t in 0..100u64 {
            let n = 1 + (t % 10) as u32;
            let c = random_iqp_circuit(n, &derive_stream(4, t), true).unwrap();
            let raw: f64 = c.phases().len() as f64;
            assert_eq!(raw as usize, 1 << n);
            assert!(iqp_prob_vector(&c).is_ok());
        }
    }

    #[test]
    fn gate_order_invariance() {
        let c = random_iqp_circuit(7, &derive_stream(5, 0), true).unwrap();
        let p = iqp_prob_vector(&c).unwrap();
        let mut rng = derive_stream(5, 1).rng();
        for _ in 0..5 {
            let mut gates = c.gates().to_vec();
            gates.shuffle(&mut rng);
            let q = iqp_prob_vector(&IqpCircuit::new(7, gates).unwrap()).unwrap();
            for (a, b) in p.values().iter().zip(q.values()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_bad_gates_and_large_registers() {
        assert!(IqpCircuit::new(3, vec![IqpGate { qubits: vec![1, 2, 3], theta: 0.1 }]).is_err());
        assert!(IqpCircuit::new(3, vec![IqpGate { qubits: vec![2, 2], theta: 0.1 }]).is_err());
        assert!(IqpCircuit::new(3, vec![IqpGate { qubits: vec![], theta: 0.1 }]).is_err());
        assert!(IqpCircuit::new(3, vec![IqpGate { qubits: vec![4], theta: 0.1 }]).is_err());
        let big = IqpCircuit::new(17, vec![]).unwrap();
        assert!(matches!(iqp_prob_vector(&big), Err(Error::Resource(_))));
    }

    #[test]
    fn json_round_trip() {
        let c = random_iqp_circuit(3, &derive_stream(6, 0), true).unwrap();
        let text = c.to_json();
        assert!(text.starts_with("{\"n\":3,\"gates\":[{\"qubits\":[1],\"theta\":"));
        assert_eq!(IqpCircuit::from_json(&text).unwrap(), c);
        assert!(IqpCircuit::from_json("{\"n\":2,\"gates\":[{\"qubits\":[1,2,2],\"theta\":1.0}]}").is_err());
    }

    #[test]
    fn peaked_support() {
        assert_eq!(peaked_iqp_register(2), 1);
        assert_eq!(peaked_iqp_register(8), 3);
        assert_eq!(peaked_iqp_register(9), 4);
        for n in 2..=12u32 {
            let p = peaked_iqp_prob_vector(n, &derive_stream(7, n as u64)).unwrap();
            assert!(p.support_size() <= 1 << peaked_iqp_register(n));
        }
        let p = peaked_iqp_prob_vector(8, &derive_stream(7, 100)).unwrap();
        assert!(p.support_size() <= 8 && p.len() == 256);
        assert!(peaked_iqp_prob_vector(1, &derive_stream(7, 0)).is_err());
    }

    #[test]
    fn peaked_masses_are_the_small_register_distribution() {
        let s = derive_stream(8, 0);
        let p = peaked_iqp_prob_vector(8, &s).unwrap();
        let inner = iqp_prob_vector(&random_iqp_circuit(3, &s.child(0), true).unwrap()).unwrap();
        let mut a: Vec<f64> = p.values().iter().copied().filter(|&v| v > 0.0).collect();
        let mut b: Vec<f64> = inner.values().iter().copied().filter(|&v| v > 0.0).collect();
        a.sort_by(|x, y| x.partial_cmp(y).unwrap());
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert_eq!(a, b);
    }
}
