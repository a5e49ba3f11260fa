//! Deterministic benchmark circuit generators.
//!
//! Every generator is a pure function of its arguments; the seeded families
//! draw from a ChaCha8 stream so output is identical across platforms.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::Circuit;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BenchError {
    #[error("{family} needs at least {min} qubits, got {n}")]
    TooSmall { family: Family, n: usize, min: usize },
    #[error("{family} needs an even qubit count, got {n}")]
    Odd { family: Family, n: usize },
    #[error("unknown benchmark family '{0}' (expected ca, da, qaoa, qft, qv or rnd)")]
    UnknownFamily(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Cuccaro ripple-carry adder.
    Ca,
    /// Draper QFT adder.
    Da,
    Qaoa,
    Qft,
    /// Quantum volume.
    Qv,
    /// Uniformly random two-qubit gates.
    Rnd,
}

impl Family {
    pub const ALL: [Family; 6] = [Family::Ca, Family::Da, Family::Qaoa, Family::Qft, Family::Qv, Family::Rnd];

    pub fn name(self) -> &'static str {
        match self {
            Family::Ca => "ca",
            Family::Da => "da",
            Family::Qaoa => "qaoa",
            Family::Qft => "qft",
            Family::Qv => "qv",
            Family::Rnd => "rnd",
        }
    }

    /// Whether the family draws random numbers.
    pub fn is_seeded(self) -> bool {
        matches!(self, Family::Qv | Family::Rnd)
    }

    fn min_qubits(self) -> usize {
        match self {
            Family::Ca => 4,
            _ => 2,
        }
    }

    fn needs_even(self) -> bool {
        matches!(self, Family::Ca | Family::Da | Family::Qv)
    }

    /// Largest valid register size not above `n`, if any.
    pub fn fit_qubits(self, n: usize) -> Option<usize> {
        let n = if self.needs_even() { n & !1 } else { n };
        (n >= self.min_qubits()).then_some(n)
    }

    pub fn check_qubits(self, n: usize) -> Result<(), BenchError> {
        if n < self.min_qubits() {
            return Err(BenchError::TooSmall { family: self, n, min: self.min_qubits() });
        }
        if self.needs_even() && n % 2 == 1 {
            return Err(BenchError::Odd { family: self, n });
        }
        Ok(())
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ca" | "cuccaro" => Ok(Family::Ca),
            "da" | "draper" => Ok(Family::Da),
            "qaoa" => Ok(Family::Qaoa),
            "qft" => Ok(Family::Qft),
            "qv" => Ok(Family::Qv),
            "rnd" | "rc" | "random" => Ok(Family::Rnd),
            _ => Err(BenchError::UnknownFamily(s.to_string())),
        }
    }
}

/// Two-qubit gates of the random family at 64 qubits; other sizes scale
/// linearly.
pub const RND_GATES_AT_64: usize = 991;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchmarkSpec {
    pub family: Family,
    pub n_qubits: usize,
    /// QV rounds; defaults to `n_qubits`.
    pub rounds: Option<usize>,
    /// RND two-qubit gate budget; defaults to `991 * n / 64`.
    pub gates: Option<usize>,
    /// Seed for QV and RND (0 when absent).
    pub seed: Option<u64>,
}

impl BenchmarkSpec {
    pub fn new(family: Family, n_qubits: usize) -> Self {
        BenchmarkSpec { family, n_qubits, rounds: None, gates: None, seed: None }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_rounds(mut self, rounds: usize) -> Self {
        self.rounds = Some(rounds);
        self
    }

    pub fn with_gates(mut self, gates: usize) -> Self {
        self.gates = Some(gates);
        self
    }

    pub fn rounds(&self) -> usize {
        self.rounds.unwrap_or(self.n_qubits)
    }

    pub fn gates(&self) -> usize {
        self.gates.unwrap_or((RND_GATES_AT_64 * self.n_qubits + 32) / 64)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    /// Benchmark label without the seed, e.g. `qft-64` or `rnd-64-g991`.
    pub fn label(&self) -> String {
        match self.family {
            Family::Qv => format!("qv-{}-r{}", self.n_qubits, self.rounds()),
            Family::Rnd => format!("rnd-{}-g{}", self.n_qubits, self.gates()),
            f => format!("{f}-{}", self.n_qubits),
        }
    }

    /// Stable identifier including the seed for seeded families, e.g.
    /// `qft-64` or `rnd-64-g991-s3`.
    pub fn id(&self) -> String {
        if self.family.is_seeded() {
            format!("{}-s{}", self.label(), self.seed())
        } else {
            self.label()
        }
    }

    pub fn generate(&self) -> Result<Circuit, BenchError> {
        let n = self.n_qubits;
        self.family.check_qubits(n)?;
        Ok(match self.family {
            Family::Ca => gen_cuccaro(n)?,
            Family::Da => gen_draper(n)?,
            Family::Qaoa => gen_qaoa(n),
            Family::Qft => gen_qft(n),
            Family::Qv => gen_qv(n, self.rounds(), self.seed())?,
            Family::Rnd => gen_random(n, self.gates(), self.seed()),
        })
    }
}

/// Textbook QFT without the final qubit reversal: a Hadamard on each qubit
/// followed by controlled phases to every later qubit.
pub fn gen_qft(n: usize) -> Circuit {
    let mut c = Circuit::new(n);
    for i in 0..n {
        c.push1("h", i);
        for j in i + 1..n {
            c.push2("cp", i, j);
        }
    }
    c
}

/// One QAOA layer on the complete graph. ZZ terms are emitted in the same
/// pair order as [`gen_qft`], so both circuits slice identically.
pub fn gen_qaoa(n: usize) -> Circuit {
    let mut c = Circuit::new(n);
    for i in 0..n {
        c.push1("h", i);
    }
    for i in 0..n {
        for j in i + 1..n {
            c.push2("rzz", i, j);
        }
    }
    for i in 0..n {
        c.push1("rx", i);
    }
    c
}

/// Quantum volume: each round pairs the qubits by a random perfect matching
/// and applies a three-CNOT SU(4) skeleton to every pair.
pub fn gen_qv(n: usize, rounds: usize, seed: u64) -> Result<Circuit, BenchError> {
    Family::Qv.check_qubits(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = Circuit::new(n);
    let mut perm: Vec<usize> = (0..n).collect();
    for _ in 0..rounds {
        perm.shuffle(&mut rng);
        for pair in perm.chunks_exact(2) {
            let (a, b) = (pair[0], pair[1]);
            for _ in 0..3 {
                c.push1("u3", a).push1("u3", b).push2("cx", a, b);
            }
            c.push1("u3", a).push1("u3", b);
        }
    }
    Ok(c)
}

/// Toffoli as six CNOTs plus single-qubit Clifford+T gates.
fn ccx(c: &mut Circuit, a: usize, b: usize, t: usize) {
    c.push1("h", t)
        .push2("cx", b, t)
        .push1("tdg", t)
        .push2("cx", a, t)
        .push1("t", t)
        .push2("cx", b, t)
        .push1("tdg", t)
        .push2("cx", a, t)
        .push1("t", b)
        .push1("t", t)
        .push1("h", t)
        .push2("cx", a, b)
        .push1("t", a)
        .push1("tdg", b)
        .push2("cx", a, b);
}

fn maj(c: &mut Circuit, x: usize, y: usize, z: usize) {
    c.push2("cx", z, y).push2("cx", z, x);
    ccx(c, x, y, z);
}

fn uma(c: &mut Circuit, x: usize, y: usize, z: usize) {
    ccx(c, x, y, z);
    c.push2("cx", z, x).push2("cx", x, y);
}

/// Cuccaro ripple-carry adder on `n = 2k + 2` qubits: carry-in `q0`,
/// interleaved operands `b_i = q(2i+1)`, `a_i = q(2i+2)`, carry-out
/// `q(2k+1)`. Yields `16k + 1` two-qubit gates.
pub fn gen_cuccaro(n: usize) -> Result<Circuit, BenchError> {
    Family::Ca.check_qubits(n)?;
    let k = (n - 2) / 2;
    let b = |i: usize| 2 * i + 1;
    let a = |i: usize| 2 * i + 2;
    let mut c = Circuit::new(n);
    maj(&mut c, 0, b(0), a(0));
    for i in 1..k {
        maj(&mut c, a(i - 1), b(i), a(i));
    }
    c.push2("cx", a(k - 1), n - 1);
    for i in (1..k).rev() {
        uma(&mut c, a(i - 1), b(i), a(i));
    }
    uma(&mut c, 0, b(0), a(0));
    Ok(c)
}

/// Draper adder on `n = 2k` qubits (`a = q0..k`, `b = qk..2k`): QFT on `b`,
/// controlled phases from every `a_j` onto every `b_i` with `j <= i`, then
/// the inverse QFT. Yields `k(k-1) + k(k+1)/2` two-qubit gates.
pub fn gen_draper(n: usize) -> Result<Circuit, BenchError> {
    Family::Da.check_qubits(n)?;
    let k = n / 2;
    let b = |i: usize| k + i;
    let mut c = Circuit::new(n);
    for i in 0..k {
        c.push1("h", b(i));
        for j in i + 1..k {
            c.push2("cp", b(j), b(i));
        }
    }
    for i in 0..k {
        for j in 0..=i {
            c.push2("cp", j, b(i));
        }
    }
    for i in (0..k).rev() {
        for j in (i + 1..k).rev() {
            c.push2("cp", b(j), b(i));
        }
        c.push1("h", b(i));
    }
    Ok(c)
}

/// `gates` two-qubit gates on uniformly random distinct pairs.
pub fn gen_random(n: usize, gates: usize, seed: u64) -> Circuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = Circuit::new(n);
    for _ in 0..gates {
        let a = rng.random_range(0..n);
        let mut b = rng.random_range(0..n - 1);
        if b >= a {
            b += 1;
        }
        c.push2("cx", a, b);
    }
    c
}
