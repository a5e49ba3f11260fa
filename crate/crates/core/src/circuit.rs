//! Circuit intermediate representation.
//!
//! A [`Circuit`] is an ordered list of one- and two-qubit gates over `n`
//! logical qubits. Three derived structures feed the rest of the pipeline:
//!
//! * [`SliceList`]: ASAP layering of the two-qubit gates,
//! * [`InteractionGraph`]: pair -> number of two-qubit gates,
//! * [`DependencyGraph`]: per-qubit program-order edges between gates.
//!
//! Gate labels are opaque; only operand arity matters downstream.

use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::cmp::Reverse;
use std::fmt;

use thiserror::Error;

/// Logical qubit index, dense in `0..n_qubits`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
pub struct QubitId(pub usize);

impl QubitId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for QubitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Operands {
    One(QubitId),
    Two(QubitId, QubitId),
}

impl Operands {
    pub fn qubits(&self) -> impl Iterator<Item = QubitId> {
        let (a, b) = match *self {
            Operands::One(q) => (q, None),
            Operands::Two(a, b) => (a, Some(b)),
        };
        std::iter::once(a).chain(b)
    }

    pub fn contains(&self, q: QubitId) -> bool {
        match *self {
            Operands::One(a) => a == q,
            Operands::Two(a, b) => a == q || b == q,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gate {
    pub label: String,
    pub operands: Operands,
    /// Position in program order.
    pub index: usize,
}

impl Gate {
    pub fn is_two_qubit(&self) -> bool {
        matches!(self.operands, Operands::Two(..))
    }

    /// Operand pair for two-qubit gates.
    pub fn pair(&self) -> Option<(QubitId, QubitId)> {
        match self.operands {
            Operands::Two(a, b) => Some((a, b)),
            Operands::One(_) => None,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CircuitError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: qubit {qubit} out of range for {n_qubits} declared qubits")]
    QubitOutOfRange { line: usize, qubit: usize, n_qubits: usize },
    #[error("line {line}: two-qubit gate `{label}` has duplicate operand {qubit}")]
    DuplicateOperand { line: usize, label: String, qubit: usize },
    #[error("missing qubit declaration")]
    MissingDeclaration,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Circuit { n_qubits, gates: Vec::new() }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn two_qubit_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_two_qubit()).count()
    }

    /// Appends a single-qubit gate. Panics on an out-of-range operand.
    pub fn push1(&mut self, label: &str, q: usize) -> &mut Self {
        self.try_push(label, Operands::One(QubitId(q)))
            .expect("invalid single-qubit gate");
        self
    }

    /// Appends a two-qubit gate. Panics on invalid operands.
    pub fn push2(&mut self, label: &str, a: usize, b: usize) -> &mut Self {
        self.try_push(label, Operands::Two(QubitId(a), QubitId(b)))
            .expect("invalid two-qubit gate");
        self
    }

    pub fn try_push(&mut self, label: &str, operands: Operands) -> Result<(), CircuitError> {
        let line = self.gates.len() + 1;
        for q in operands.qubits() {
            if q.0 >= self.n_qubits {
                return Err(CircuitError::QubitOutOfRange { line, qubit: q.0, n_qubits: self.n_qubits });
            }
        }
        if let Operands::Two(a, b) = operands {
            if a == b {
                return Err(CircuitError::DuplicateOperand { line, label: label.to_string(), qubit: a.0 });
            }
        }
        let index = self.gates.len();
        self.gates.push(Gate { label: label.to_string(), operands, index });
        Ok(())
    }

    /// Line-oriented text form accepted by [`parse_circuit`].
    pub fn to_text(&self) -> String {
        let mut out = format!("qubits {}\n", self.n_qubits);
        for g in &self.gates {
            match g.operands {
                Operands::One(q) => out.push_str(&format!("{} {}\n", g.label, q.0)),
                Operands::Two(a, b) => out.push_str(&format!("{} {} {}\n", g.label, a.0, b.0)),
            }
        }
        out
    }
}

/// Parses either the native line format or the supported OpenQASM 2.0 subset.
///
/// Native format: the first non-comment line is `qubits <N>`, followed by
/// one gate per line (`<label> <q>` or `<label> <q1> <q2>`); `#` starts a
/// comment.
pub fn parse_circuit(text: &str) -> Result<Circuit, CircuitError> {
    let looks_like_qasm = text
        .lines()
        .map(|l| l.trim())
        .find(|l| !l.is_empty() && !l.starts_with('#') && !l.starts_with("//"))
        .map(|l| l.starts_with("OPENQASM") || l.starts_with("qreg") || l.starts_with("include"))
        .unwrap_or(false);
    if looks_like_qasm {
        parse_qasm(text)
    } else {
        parse_native(text)
    }
}

fn parse_native(text: &str) -> Result<Circuit, CircuitError> {
    let mut circuit: Option<Circuit> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = body.split_whitespace().collect();
        let Some(c) = circuit.as_mut() else {
            if tokens.len() != 2 || tokens[0] != "qubits" {
                return Err(CircuitError::Syntax { line, msg: "expected `qubits <N>`".into() });
            }
            let n = parse_index(tokens[1], line)?;
            circuit = Some(Circuit::new(n));
            continue;
        };
        let label = tokens[0];
        let operands = match tokens.len() {
            2 => Operands::One(QubitId(parse_index(tokens[1], line)?)),
            3 => Operands::Two(
                QubitId(parse_index(tokens[1], line)?),
                QubitId(parse_index(tokens[2], line)?),
            ),
            _ => {
                return Err(CircuitError::Syntax {
                    line,
                    msg: format!("gate `{label}` needs one or two qubit operands"),
                })
            }
        };
        c.try_push(label, operands).map_err(|e| with_line(e, line))?;
    }
    circuit.ok_or(CircuitError::MissingDeclaration)
}

fn parse_index(tok: &str, line: usize) -> Result<usize, CircuitError> {
    tok.parse::<usize>()
        .map_err(|_| CircuitError::Syntax { line, msg: format!("invalid qubit index `{tok}`") })
}

fn with_line(e: CircuitError, line: usize) -> CircuitError {
    match e {
        CircuitError::QubitOutOfRange { qubit, n_qubits, .. } => {
            CircuitError::QubitOutOfRange { line, qubit, n_qubits }
        }
        CircuitError::DuplicateOperand { label, qubit, .. } => {
            CircuitError::DuplicateOperand { line, label, qubit }
        }
        other => other,
    }
}

/// OpenQASM 2.0 subset: `qreg` declarations (several registers are laid out
/// back to back), named gates with one or two qubit arguments, optional
/// parenthesised parameters (ignored). `barrier`, `measure`, `creg`, `reset`
/// and `include` are skipped.
fn parse_qasm(text: &str) -> Result<Circuit, CircuitError> {
    let mut registers: Vec<(String, usize, usize)> = Vec::new();
    let mut pending: Vec<(usize, String, Vec<usize>)> = Vec::new();
    let mut total = 0usize;

    // statements may span lines; track the line each one starts on
    let mut stmt = String::new();
    let mut stmt_line = 1;
    let mut statements = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let body = raw.split("//").next().unwrap_or("");
        for ch in body.chars() {
            if stmt.trim().is_empty() {
                stmt_line = i + 1;
            }
            if ch == ';' {
                statements.push((stmt_line, std::mem::take(&mut stmt)));
            } else {
                stmt.push(ch);
            }
        }
        stmt.push(' ');
    }
    if !stmt.trim().is_empty() {
        return Err(CircuitError::Syntax { line: stmt_line, msg: "missing `;`".into() });
    }

    for (line, s) in statements {
        let s = s.trim();
        if s.is_empty() {
            continue;
        }
        let (head, rest) = split_head(s);
        match head {
            "OPENQASM" | "include" | "creg" | "barrier" | "measure" | "reset" => continue,
            "qreg" => {
                let (name, size) = parse_reg_ref(rest, line)?;
                let size = size.ok_or_else(|| CircuitError::Syntax {
                    line,
                    msg: "qreg needs a size".into(),
                })?;
                registers.push((name, total, size));
                total += size;
            }
            _ => {
                let name = head.split('(').next().unwrap_or(head).to_string();
                let mut qubits = Vec::new();
                for arg in rest.split(',') {
                    let (reg, idx) = parse_reg_ref(arg, line)?;
                    let idx = idx.ok_or_else(|| CircuitError::Syntax {
                        line,
                        msg: "whole-register gate arguments are not supported".into(),
                    })?;
                    let &(_, offset, size) = registers
                        .iter()
                        .find(|(n, _, _)| *n == reg)
                        .ok_or_else(|| CircuitError::Syntax { line, msg: format!("unknown register `{reg}`") })?;
                    if idx >= size {
                        return Err(CircuitError::QubitOutOfRange { line, qubit: idx, n_qubits: size });
                    }
                    qubits.push(offset + idx);
                }
                if qubits.is_empty() || qubits.len() > 2 {
                    return Err(CircuitError::Syntax {
                        line,
                        msg: format!("gate `{name}` must act on one or two qubits"),
                    });
                }
                pending.push((line, name, qubits));
            }
        }
    }

    let mut circuit = Circuit::new(total);
    for (line, name, qs) in pending {
        let operands = if qs.len() == 1 {
            Operands::One(QubitId(qs[0]))
        } else {
            Operands::Two(QubitId(qs[0]), QubitId(qs[1]))
        };
        circuit.try_push(&name, operands).map_err(|e| with_line(e, line))?;
    }
    Ok(circuit)
}

/// Splits `cx q[0],q[1]` into (`cx`, `q[0],q[1]`), keeping a parenthesised
/// parameter list attached to the head.
fn split_head(s: &str) -> (&str, &str) {
    let mut depth = 0i32;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            c if c.is_whitespace() && depth == 0 => return (&s[..i], s[i..].trim()),
            _ => {}
        }
    }
    (s, "")
}

fn parse_reg_ref(s: &str, line: usize) -> Result<(String, Option<usize>), CircuitError> {
    let s = s.trim();
    match s.find('[') {
        None => Ok((s.to_string(), None)),
        Some(open) => {
            let close = s.rfind(']').ok_or_else(|| CircuitError::Syntax {
                line,
                msg: format!("unterminated index in `{s}`"),
            })?;
            let idx = s[open + 1..close]
                .trim()
                .parse::<usize>()
                .map_err(|_| CircuitError::Syntax { line, msg: format!("bad index in `{s}`") })?;
            Ok((s[..open].trim().to_string(), Some(idx)))
        }
    }
}

/// ASAP layers of two-qubit gates. Each slice holds gate indices.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SliceList {
    pub slices: Vec<Vec<usize>>,
}

impl SliceList {
    pub fn len(&self) -> usize {
        self.slices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slices.is_empty()
    }

    pub fn gate_count(&self) -> usize {
        self.slices.iter().map(Vec::len).sum()
    }

    pub fn mean_gates_per_slice(&self) -> f64 {
        if self.slices.is_empty() {
            0.0
        } else {
            self.gate_count() as f64 / self.slices.len() as f64
        }
    }
}

/// Greedy ASAP layering over two-qubit gates only: a gate lands in the slice
/// right after the latest slice holding either operand.
pub fn compute_slices(c: &Circuit) -> SliceList {
    let mut next_free = vec![0usize; c.n_qubits()];
    let mut slices: Vec<Vec<usize>> = Vec::new();
    for g in c.gates() {
        let Some((a, b)) = g.pair() else { continue };
        let s = next_free[a.0].max(next_free[b.0]);
        if s == slices.len() {
            slices.push(Vec::new());
        }
        slices[s].push(g.index);
        next_free[a.0] = s + 1;
        next_free[b.0] = s + 1;
    }
    SliceList { slices }
}

/// Unordered qubit pair, stored with the smaller index first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QubitPair(pub QubitId, pub QubitId);

impl QubitPair {
    pub fn new(a: QubitId, b: QubitId) -> Self {
        if a <= b {
            QubitPair(a, b)
        } else {
            QubitPair(b, a)
        }
    }

    pub fn contains(&self, q: QubitId) -> bool {
        self.0 == q || self.1 == q
    }

    /// The other member of the pair. `q` must be a member.
    pub fn partner(&self, q: QubitId) -> QubitId {
        if self.0 == q {
            self.1
        } else {
            self.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct InteractionGraph {
    n_qubits: usize,
    edges: BTreeMap<QubitPair, u32>,
}

impl InteractionGraph {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn weight(&self, a: QubitId, b: QubitId) -> u32 {
        self.edges.get(&QubitPair::new(a, b)).copied().unwrap_or(0)
    }

    /// Edges in lexicographic pair order.
    pub fn edges(&self) -> impl Iterator<Item = (QubitPair, u32)> + '_ {
        self.edges.iter().map(|(p, w)| (*p, *w))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Number of distinct partners of each qubit.
    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n_qubits];
        for p in self.edges.keys() {
            d[p.0 .0] += 1;
            d[p.1 .0] += 1;
        }
        d
    }

    /// Total two-qubit gates touching each qubit.
    pub fn incident_weights(&self) -> Vec<u64> {
        let mut w = vec![0u64; self.n_qubits];
        for (p, &c) in &self.edges {
            w[p.0 .0] += c as u64;
            w[p.1 .0] += c as u64;
        }
        w
    }

    pub fn total_weight(&self) -> u64 {
        self.edges.values().map(|&w| w as u64).sum()
    }
}

pub fn interaction_graph(c: &Circuit) -> InteractionGraph {
    let mut edges = BTreeMap::new();
    for g in c.gates() {
        if let Some((a, b)) = g.pair() {
            *edges.entry(QubitPair::new(a, b)).or_insert(0) += 1;
        }
    }
    InteractionGraph { n_qubits: c.n_qubits(), edges }
}

/// Gate dependency DAG. Nodes are gate indices of the source circuit; an
/// edge `g -> h` means `h` is the next gate after `g` on some shared qubit.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DependencyGraph {
    successors: Vec<Vec<usize>>,
    predecessors: Vec<Vec<usize>>,
}

impl DependencyGraph {
    pub fn len(&self) -> usize {
        self.successors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.successors.is_empty()
    }

    pub fn successors(&self, g: usize) -> &[usize] {
        &self.successors[g]
    }

    pub fn predecessors(&self, g: usize) -> &[usize] {
        &self.predecessors[g]
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.successors
            .iter()
            .enumerate()
            .flat_map(|(g, s)| s.iter().map(move |&h| (g, h)))
    }

    /// Kahn's algorithm, always releasing the lowest ready index first.
    /// Returns `None` if the graph has a cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let mut indeg: Vec<usize> = self.predecessors.iter().map(Vec::len).collect();
        let mut heap: BinaryHeap<Reverse<usize>> =
            (0..self.len()).filter(|&g| indeg[g] == 0).map(Reverse).collect();
        let mut order = Vec::with_capacity(self.len());
        while let Some(Reverse(g)) = heap.pop() {
            order.push(g);
            for &h in &self.successors[g] {
                indeg[h] -= 1;
                if indeg[h] == 0 {
                    heap.push(Reverse(h));
                }
            }
        }
        (order.len() == self.len()).then_some(order)
    }
}

pub fn dependency_graph(c: &Circuit) -> DependencyGraph {
    let n = c.len();
    let mut last_on: Vec<Option<usize>> = vec![None; c.n_qubits()];
    let mut succ: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    let mut pred: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for g in c.gates() {
        for q in g.operands.qubits() {
            if let Some(p) = last_on[q.0] {
                succ[p].insert(g.index);
                pred[g.index].insert(p);
            }
            last_on[q.0] = Some(g.index);
        }
    }
    DependencyGraph {
        successors: succ.into_iter().map(|s| s.into_iter().collect()).collect(),
        predecessors: pred.into_iter().map(|s| s.into_iter().collect()).collect(),
    }
}
