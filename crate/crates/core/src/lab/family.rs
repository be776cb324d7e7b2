//! Named distribution families that the experiments draw instances from.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::bits::{check_qubits, MAX_QUBITS};
use crate::circuits::{
    iqp_prob_vector, iqp_product_prob_vector, peaked_iqp_prob_vector, random_iqp_circuit, random_mps,
    random_product_angles, AngleLaw, STATEVECTOR_CAP,
};
use crate::error::{domain, Error, Result};
use crate::families::{
    peaked_prob_vector, product_prob_vector, pseudo_indep_prob_vector, random_product_instance, PeakedParams,
    PseudoIndepParams, Underlying,
};
use crate::prob::ProbVector;
use crate::rng::RandomStream;

/// A random ensemble of distributions over `n`-bit outcomes.
///
/// The text form (`"product"`, `"pareto:2"`, `"peaked:16"`, `"mps:1"`, ...)
/// is what the command line and manifests use.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum FamilySpec {
    /// Product distribution with `a_i` i.i.d. uniform.
    Product,
    /// Single-qubit rotations followed by measurement.
    IqpProduct(AngleLaw),
    /// Normalized i.i.d. draws from an underlying law.
    PseudoIndep(Underlying),
    /// Normalized draws on a random support of size `k` (default `2^{⌈log₂ n⌉}`).
    Peaked {
        k: Option<usize>,
        underlying: Underlying,
    },
    /// Random IQP circuit with all weight-2 gates and, optionally, weight-1 gates.
    Iqp {
        singletons: bool,
    },
    /// IQP on `⌈log₂ n⌉` qubits embedded into random `n`-bit outcomes.
    PeakedIqp,
    /// Random MPS with bond dimension `chi` (`None` means `chi = n`).
    Mps {
        chi: Option<usize>,
    },
    Uniform,
    /// Point mass on a uniformly random outcome.
    PointMass,
}

impl FamilySpec {
    pub fn dirichlet() -> Self {
        FamilySpec::PseudoIndep(Underlying::exponential())
    }

    pub fn pareto(alpha: f64) -> Self {
        FamilySpec::PseudoIndep(Underlying::Pareto { alpha })
    }

    /// Largest `n` this family can be instantiated at.
    pub fn max_qubits(&self) -> u32 {
        match self {
            FamilySpec::Iqp { .. } | FamilySpec::Mps { .. } => STATEVECTOR_CAP,
            _ => MAX_QUBITS,
        }
    }

    pub fn min_qubits(&self) -> u32 {
        match self {
            FamilySpec::PeakedIqp => 2,
            _ => 1,
        }
    }

    /// Checks parameters and the qubit range for `n`.
    pub fn check(&self, n: u32) -> Result<()> {
        check_qubits(n)?;
        if n > self.max_qubits() {
            return Err(Error::Resource(format!("family {self} is capped at {} qubits, got {n}", self.max_qubits())));
        }
        if n < self.min_qubits() {
            return domain(format!("family {self} needs at least {} qubits, got {n}", self.min_qubits()));
        }
        match self {
            FamilySpec::PseudoIndep(u) => u.validate(),
            FamilySpec::Peaked { k, underlying } => {
                PeakedParams::new(n, k.unwrap_or_else(|| PeakedParams::default_support(n)), *underlying).map(|_| ())
            }
            FamilySpec::Mps { chi: Some(0) } => domain("bond dimension must be at least 1"),
            _ => Ok(()),
        }
    }

    /// Draws one instance from the stream.
    pub fn instance(&self, n: u32, stream: &RandomStream) -> Result<ProbVector> {
        self.check(n)?;
        match *self {
            FamilySpec::Product => Ok(product_prob_vector(&random_product_instance(n, stream)?)),
            FamilySpec::IqpProduct(law) => iqp_product_prob_vector(&random_product_angles(n, stream, law)?),
            FamilySpec::PseudoIndep(u) => Ok(pseudo_indep_prob_vector(&PseudoIndepParams::new(n, u)?, stream)),
            FamilySpec::Peaked { k, underlying } => {
                let k = k.unwrap_or_else(|| PeakedParams::default_support(n));
                peaked_prob_vector(&PeakedParams::new(n, k, underlying)?, stream)
            }
            FamilySpec::Iqp { singletons } => iqp_prob_vector(&random_iqp_circuit(n, stream, singletons)?),
            FamilySpec::PeakedIqp => peaked_iqp_prob_vector(n, stream),
            FamilySpec::Mps { chi } => random_mps(n, chi.unwrap_or(n as usize), stream)?.prob_vector(),
            FamilySpec::Uniform => ProbVector::uniform(n),
            FamilySpec::PointMass => {
                let x = stream.rng().random_range(0..1usize << n);
                ProbVector::point_mass(n, x)
            }
        }
    }

    /// `p(x)` of a fresh instance at outcome `x`, equal in law to
    /// `instance(n, stream).get(x)`.
    ///
    /// Product-type families and Gamma-based pseudo-independent families
    /// avoid building the full vector; the Gamma path draws the marginal as
    /// `G₁ / (G₁ + G_rest)` and so does not reproduce `instance` draw for draw.
    pub fn marginal(&self, n: u32, x: u64, stream: &RandomStream) -> Result<f64> {
        self.check(n)?;
        match *self {
            FamilySpec::Product => Ok(random_product_instance(n, stream)?.probability(x)),
            FamilySpec::IqpProduct(law) => {
                let thetas = random_product_angles(n, stream, law)?;
                Ok(thetas.iter().enumerate().fold(1.0, |acc, (i, t)| {
                    let a = (t / 2.0).cos().powi(2);
                    acc * if (x >> i) & 1 == 0 { a } else { 1.0 - a }
                }))
            }
            FamilySpec::PseudoIndep(Underlying::Gamma { shape }) => {
                let mut rng = stream.rng();
                let rest_shape = shape * ((1u64 << n) - 1) as f64;
                let one = Gamma::new(shape, 1.0).map_err(|e| Error::Domain(e.to_string()))?;
                let rest = Gamma::new(rest_shape, 1.0).map_err(|e| Error::Domain(e.to_string()))?;
                loop {
                    let (a, b) = (one.sample(&mut rng), rest.sample(&mut rng));
                    if a + b > 0.0 {
                        return Ok(a / (a + b));
                    }
                }
            }
            FamilySpec::Uniform => Ok(1.0 / (1u64 << n) as f64),
            _ => Ok(self.instance(n, stream)?.get(x as usize)),
        }
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilySpec::Product => write!(f, "product"),
            FamilySpec::IqpProduct(AngleLaw::UniformWeight) => write!(f, "iqp-product"),
            FamilySpec::IqpProduct(AngleLaw::UniformAngle) => write!(f, "iqp-product-angle"),
            FamilySpec::PseudoIndep(u) => write!(f, "{}", underlying_label(u)),
            FamilySpec::Peaked { k, underlying } => {
                write!(f, "peaked")?;
                if let Some(k) = k {
                    write!(f, ":{k}")?;
                }
                if *underlying != Underlying::exponential() {
                    write!(f, "/{}", underlying_label(underlying))?;
                }
                Ok(())
            }
            FamilySpec::Iqp { singletons: true } => write!(f, "iqp"),
            FamilySpec::Iqp { singletons: false } => write!(f, "iqp-pairs"),
            FamilySpec::PeakedIqp => write!(f, "peaked-iqp"),
            FamilySpec::Mps { chi: None } => write!(f, "mps"),
            FamilySpec::Mps { chi: Some(c) } => write!(f, "mps:{c}"),
            FamilySpec::Uniform => write!(f, "uniform"),
            FamilySpec::PointMass => write!(f, "point-mass"),
        }
    }
}

fn underlying_label(u: &Underlying) -> String {
    match *u {
        Underlying::Gamma { shape: 1.0 } => "dirichlet".into(),
        Underlying::Gamma { shape } => format!("gamma:{shape}"),
        Underlying::Pareto { alpha } => format!("pareto:{alpha}"),
        Underlying::Constant { value } => format!("constant:{value}"),
    }
}

fn parse_number<T: FromStr>(text: &str, what: &str) -> Result<T> {
    text.parse().map_err(|_| Error::Domain(format!("invalid {what} '{text}'")))
}

fn parse_underlying(text: &str) -> Result<Underlying> {
    let (name, arg) = match text.split_once(':') {
        Some((a, b)) => (a, Some(b)),
        None => (text, None),
    };
    let u = match (name, arg) {
        ("dirichlet", None) => Underlying::exponential(),
        ("gamma", Some(s)) => Underlying::Gamma { shape: parse_number(s, "gamma shape")? },
        ("pareto", None) => Underlying::Pareto { alpha: 2.0 },
        ("pareto", Some(a)) => Underlying::Pareto { alpha: parse_number(a, "pareto alpha")? },
        ("constant", Some(v)) => Underlying::Constant { value: parse_number(v, "constant value")? },
        _ => return domain(format!("unknown underlying law '{text}'")),
    };
    u.validate()?;
    Ok(u)
}

impl FromStr for FamilySpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let text = text.trim();
        Ok(match text {
            "product" => FamilySpec::Product,
            "iqp-product" => FamilySpec::IqpProduct(AngleLaw::UniformWeight),
            "iqp-product-angle" => FamilySpec::IqpProduct(AngleLaw::UniformAngle),
            "iqp" => FamilySpec::Iqp { singletons: true },
            "iqp-pairs" => FamilySpec::Iqp { singletons: false },
            "peaked-iqp" => FamilySpec::PeakedIqp,
            "mps" => FamilySpec::Mps { chi: None },
            "uniform" => FamilySpec::Uniform,
            "point-mass" => FamilySpec::PointMass,
            _ if text.starts_with("mps:") => FamilySpec::Mps { chi: Some(parse_number(&text[4..], "bond dimension")?) },
            _ if text == "peaked" || text.starts_with("peaked:") || text.starts_with("peaked/") => {
                let rest = &text["peaked".len()..];
                let (k_part, law_part) = match rest.split_once('/') {
                    Some((k, law)) => (k, Some(law)),
                    None => (rest, None),
                };
                let k = match k_part.strip_prefix(':') {
                    Some(k) => Some(parse_number(k, "support size")?),
                    None if k_part.is_empty() => None,
                    None => return domain(format!("unknown family '{text}'")),
                };
                let underlying = law_part.map(parse_underlying).transpose()?.unwrap_or_else(Underlying::exponential);
                FamilySpec::Peaked { k, underlying }
            }
            _ => FamilySpec::PseudoIndep(
                parse_underlying(text).map_err(|_| Error::Domain(format!("unknown family '{text}'")))?,
            ),
        })
    }
}

impl From<FamilySpec> for String {
    fn from(f: FamilySpec) -> String {
        f.to_string()
    }
}

impl TryFrom<String> for FamilySpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_stream;

    #[test]
    fn labels_round_trip() {
        for text in [
            "product",
            "iqp-product",
            "iqp-product-angle",
            "dirichlet",
            "gamma:0.5",
            "pareto:2",
            "pareto:1.5",
            "peaked",
            "peaked:16",
            "peaked:16/pareto:3",
            "iqp",
            "iqp-pairs",
            "peaked-iqp",
            "mps",
            "mps:1",
            "uniform",
            "point-mass",
        ] {
            let f: FamilySpec = text.parse().unwrap();
            assert_eq!(f.to_string(), text);
        }
        assert_eq!("pareto".parse::<FamilySpec>().unwrap(), FamilySpec::pareto(2.0));
        for bad in ["nope", "pareto:-1", "peaked:x", "mps:z", "gamma"] {
            assert!(bad.parse::<FamilySpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn caps() {
        assert!(matches!(FamilySpec::Iqp { singletons: true }.check(17), Err(Error::Resource(_))));
        assert!(FamilySpec::PeakedIqp.check(1).is_err());
        assert!(FamilySpec::Peaked { k: Some(100), underlying: Underlying::exponential() }.check(4).is_err());
        assert!(FamilySpec::Product.check(20).is_ok());
    }

    #[test]
    fn every_family_builds_a_distribution() {
        let all = [
            "product",
            "iqp-product",
            "dirichlet",
            "pareto:2",
            "peaked",
            "iqp",
            "iqp-pairs",
            "peaked-iqp",
            "mps",
            "mps:1",
            "uniform",
            "point-mass",
        ];
        for text in all {
            let f: FamilySpec = text.parse().unwrap();
            for n in 2..=6 {
                let p = f.instance(n, &derive_stream(1, n as u64)).unwrap();
                assert_eq!(p.n(), n);
            }
        }
    }

    #[test]
    fn marginal_matches_instance_where_exact() {
        for text in ["product", "iqp-product", "iqp", "mps:2", "uniform"] {
            let f: FamilySpec = text.parse().unwrap();
            let s = derive_stream(9, 3);
            let p = f.instance(5, &s).unwrap();
            for x in [0u64, 7, 31] {
                assert!((f.marginal(5, x, &s).unwrap() - p.get(x as usize)).abs() < 1e-15, "{text}");
            }
        }
    }

    #[test]
    fn gamma_marginal_has_beta_mean() {
        let f = FamilySpec::dirichlet();
        let trials = 20_000;
        let mean: f64 =
            (0..trials).map(|t| f.marginal(4, 0, &derive_stream(2, t)).unwrap()).sum::<f64>() / trials as f64;
        // Beta(1, 15) has mean 1/16 and standard deviation about 0.06.
        assert!((mean - 1.0 / 16.0).abs() < 4.0 * 0.0587 / (trials as f64).sqrt());
    }
}
