//! Finite samples of `n`-bit outcomes and their text file format.
//!
//! One outcome per line as `0`/`1` characters, most-significant qubit first.
//! Blank lines are ignored.

use std::io::{BufRead, Write};
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand_distr::Distribution;

use crate::bits::{check_qubits, BitString};
use crate::error::{Error, Result};
use crate::prob::ProbVector;
use crate::rng::RandomStream;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Provenance {
    pub family: String,
    pub stream: RandomStream,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleSet {
    n: u32,
    outcomes: Vec<u64>,
    provenance: Option<Provenance>,
}

impl SampleSet {
    pub fn from_outcomes(n: u32, outcomes: Vec<u64>) -> Result<Self> {
        check_qubits(n)?;
        if let Some(bad) = outcomes.iter().find(|&&x| x >> n != 0) {
            return Err(Error::Domain(format!("outcome {bad} does not fit in {n} qubits")));
        }
        Ok(Self { n, outcomes, provenance: None })
    }

    pub fn with_provenance(mut self, family: impl Into<String>, stream: RandomStream) -> Self {
        self.provenance = Some(Provenance { family: family.into(), stream });
        self
    }

    /// Draws `count` i.i.d. outcomes from `p`.
    pub fn draw(p: &ProbVector, stream: &RandomStream, count: usize) -> Self {
        let dist = WeightedIndex::new(p.values()).expect("validated distribution has positive mass");
        let mut rng = stream.rng();
        let outcomes = (0..count).map(|_| dist.sample(&mut rng) as u64).collect();
        Self { n: p.n(), outcomes, provenance: None }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn outcomes(&self) -> &[u64] {
        &self.outcomes
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    pub fn bitstring(&self, i: usize) -> BitString {
        BitString::new(self.outcomes[i], self.n).expect("outcomes validated on construction")
    }

    /// Histogram over all `2^n` outcomes.
    pub fn counts(&self) -> Vec<u64> {
        let mut c = vec![0u64; 1usize << self.n];
        for &x in &self.outcomes {
            c[x as usize] += 1;
        }
        c
    }

    pub fn parse<R: BufRead>(reader: R) -> Result<Self> {
        let mut n = None;
        let mut outcomes = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let lineno = i + 1;
            let line = line?;
            let text = line.trim();
            if text.is_empty() {
                continue;
            }
            let bits = BitString::parse(text).map_err(|e| Error::Parse { line: lineno, msg: e.to_string() })?;
            match n {
                None => n = Some(bits.n()),
                Some(m) if m != bits.n() => {
                    return Err(Error::Parse { line: lineno, msg: format!("expected {m} bits, found {}", bits.n()) })
                }
                _ => {}
            }
            outcomes.push(bits.bits());
        }
        let n = n.ok_or(Error::Parse { line: 0, msg: "no samples".into() })?;
        Self::from_outcomes(n, outcomes)
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::parse(std::io::BufReader::new(f))
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        for i in 0..self.len() {
            writeln!(w, "{}", self.bitstring(i).to_bit_string())?;
        }
        Ok(())
    }

    pub fn write_file(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(f);
        self.write(&mut w)?;
        w.flush()?;
        Ok(())
    }
}
