//! Gate lists and the plain-text circuit format (`NAME q1 [q2]`, `#` comments).

use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gate {
    I(usize),
    X(usize),
    Y(usize),
    Z(usize),
    H(usize),
    S(usize),
    Sdg(usize),
    /// Order-3 Clifford cycling X -> Y -> Z -> X under conjugation.
    U0(usize),
    U0dg(usize),
    Cnot(usize, usize),
    Cz(usize, usize),
    Swap(usize, usize),
    T(usize),
    Tdg(usize),
    Ccz(usize, usize, usize),
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        use Gate::*;
        match *self {
            I(q) | X(q) | Y(q) | Z(q) | H(q) | S(q) | Sdg(q) | U0(q) | U0dg(q) | T(q) | Tdg(q) => vec![q],
            Cnot(a, b) | Cz(a, b) | Swap(a, b) => vec![a, b],
            Ccz(a, b, c) => vec![a, b, c],
        }
    }

    pub fn arity(&self) -> usize {
        self.qubits().len()
    }

    pub fn is_clifford(&self) -> bool {
        !matches!(self, Gate::T(_) | Gate::Tdg(_) | Gate::Ccz(..))
    }

    pub fn name(&self) -> &'static str {
        use Gate::*;
        match self {
            I(_) => "I",
            X(_) => "X",
            Y(_) => "Y",
            Z(_) => "Z",
            H(_) => "H",
            S(_) => "S",
            Sdg(_) => "SDG",
            U0(_) => "U0",
            U0dg(_) => "U0DG",
            Cnot(..) => "CNOT",
            Cz(..) => "CZ",
            Swap(..) => "SWAP",
            T(_) => "T",
            Tdg(_) => "TDG",
            Ccz(..) => "CCZ",
        }
    }

    pub fn inverse(&self) -> Gate {
        use Gate::*;
        match *self {
            S(q) => Sdg(q),
            Sdg(q) => S(q),
            U0(q) => U0dg(q),
            U0dg(q) => U0(q),
            T(q) => Tdg(q),
            Tdg(q) => T(q),
            g => g,
        }
    }

    /// Same gate acting on `map[q]` instead of `q`.
    pub fn remap(&self, map: &[usize]) -> Gate {
        use Gate::*;
        match *self {
            I(q) => I(map[q]),
            X(q) => X(map[q]),
            Y(q) => Y(map[q]),
            Z(q) => Z(map[q]),
            H(q) => H(map[q]),
            S(q) => S(map[q]),
            Sdg(q) => Sdg(map[q]),
            U0(q) => U0(map[q]),
            U0dg(q) => U0dg(map[q]),
            T(q) => T(map[q]),
            Tdg(q) => Tdg(map[q]),
            Cnot(a, b) => Cnot(map[a], map[b]),
            Cz(a, b) => Cz(map[a], map[b]),
            Swap(a, b) => Swap(map[a], map[b]),
            Ccz(a, b, c) => Ccz(map[a], map[b], map[c]),
        }
    }

    pub fn parse(name: &str, qs: &[usize]) -> Result<Gate> {
        use Gate::*;
        let upper = name.to_ascii_uppercase();
        let one = |f: fn(usize) -> Gate| -> Result<Gate> {
            match qs {
                [q] => Ok(f(*q)),
                _ => Err(Error::InvalidArgument(format!("{name} takes one qubit"))),
            }
        };
        let two = |f: fn(usize, usize) -> Gate| -> Result<Gate> {
            match qs {
                [a, b] if a != b => Ok(f(*a, *b)),
                _ => Err(Error::InvalidArgument(format!("{name} takes two distinct qubits"))),
            }
        };
        match upper.as_str() {
            "I" | "ID" => one(I),
            "X" => one(X),
            "Y" => one(Y),
            "Z" => one(Z),
            "H" => one(H),
            "S" => one(S),
            "SDG" | "S†" | "SDAG" => one(Sdg),
            "U0" | "U₀" => one(U0),
            "U0DG" | "U0†" | "U₀†" | "U0DAG" => one(U0dg),
            "T" => one(T),
            "TDG" | "T†" | "TDAG" => one(Tdg),
            "CNOT" | "CX" => two(Cnot),
            "CZ" => two(Cz),
            "SWAP" => two(Swap),
            "CCZ" => match qs {
                [a, b, c] if a != b && b != c && a != c => Ok(Ccz(*a, *b, *c)),
                _ => Err(Error::InvalidArgument("CCZ takes three distinct qubits".into())),
            },
            _ => Err(Error::UnknownGate(name.to_string())),
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())?;
        for q in self.qubits() {
            write!(f, " {q}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Circuit {
    pub n: usize,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n: usize) -> Self {
        Circuit { n, gates: Vec::new() }
    }

    pub fn from_gates(n: usize, gates: Vec<Gate>) -> Result<Self> {
        let c = Circuit { n, gates };
        c.validate()?;
        Ok(c)
    }

    pub fn push(&mut self, g: Gate) -> &mut Self {
        self.gates.push(g);
        self
    }

    pub fn extend(&mut self, other: &Circuit) {
        self.gates.extend_from_slice(&other.gates);
    }

    pub fn validate(&self) -> Result<()> {
        for g in &self.gates {
            for q in g.qubits() {
                if q >= self.n {
                    return Err(Error::QubitOutOfRange { index: q, n: self.n });
                }
            }
        }
        Ok(())
    }

    pub fn inverse(&self) -> Circuit {
        Circuit { n: self.n, gates: self.gates.iter().rev().map(Gate::inverse).collect() }
    }

    pub fn is_clifford(&self) -> bool {
        self.gates.iter().all(Gate::is_clifford)
    }

    pub fn two_qubit_count(&self) -> usize {
        self.gates.iter().filter(|g| g.arity() == 2).count()
    }

    /// Parses the text format. `n` is inferred from the largest index unless
    /// a `QUBITS k` header line is present.
    pub fn parse(text: &str) -> Result<Circuit> {
        let mut gates = Vec::new();
        let mut declared = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let name = parts.next().unwrap();
            let mut qs = Vec::new();
            for tok in parts {
                let q = tok.parse::<usize>().map_err(|_| Error::Parse {
                    line: i + 1,
                    msg: format!("bad qubit index `{tok}`"),
                })?;
                qs.push(q);
            }
            if name.eq_ignore_ascii_case("QUBITS") {
                match qs.as_slice() {
                    [k] => declared = Some(*k),
                    _ => return Err(Error::Parse { line: i + 1, msg: "QUBITS takes one count".into() }),
                }
                continue;
            }
            let g = Gate::parse(name, &qs).map_err(|e| match e {
                Error::UnknownGate(_) => e,
                other => Error::Parse { line: i + 1, msg: other.to_string() },
            })?;
            gates.push(g);
        }
        let used = gates.iter().flat_map(|g| g.qubits()).max().map_or(0, |m| m + 1);
        let n = declared.unwrap_or(used);
        Circuit::from_gates(n, gates)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("QUBITS {}\n", self.n);
        for g in &self.gates {
            s.push_str(&g.to_string());
            s.push('\n');
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        let c = Circuit::parse("# bell\nH 0\nCNOT 0 1 # entangle\n\n").unwrap();
        assert_eq!(c.n, 2);
        assert_eq!(c.gates, vec![Gate::H(0), Gate::Cnot(0, 1)]);
        let again = Circuit::parse(&c.to_text()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(Circuit::parse("FOO 0"), Err(Error::UnknownGate(_))));
        assert!(matches!(Circuit::parse("CNOT 0 0"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(Circuit::parse("QUBITS 1\nH 3"), Err(Error::QubitOutOfRange { .. })));
        assert!(matches!(Circuit::parse("H x"), Err(Error::Parse { .. })));
    }
}
