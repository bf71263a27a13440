use std::collections::BTreeMap;

use super::{quantize_phase, Circuit, CircuitError, Gate, GateKind, Phase};

pub(super) fn to_text(c: &Circuit) -> String {
    let mut out = format!("qubits {}\n", c.n_qubits());
    if let Some(label) = c.label() {
        out.push_str(&format!("label {label}\n"));
    }
    for g in c.gates() {
        out.push_str(&g.to_string());
        out.push('\n');
    }
    out
}

fn parse_err(line: usize, message: impl Into<String>) -> CircuitError {
    CircuitError::Parse {
        line,
        message: message.into(),
    }
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

pub(super) fn parse_text(src: &str) -> Result<Circuit, CircuitError> {
    let mut circuit: Option<Circuit> = None;
    for (idx, raw) in src.lines().enumerate() {
        let lineno = idx + 1;
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let head = parts.next().unwrap_or_default();
        let rest: Vec<&str> = parts.collect();

        if head.eq_ignore_ascii_case("qubits") {
            if circuit.is_some() {
                return Err(parse_err(lineno, "duplicate `qubits` header"));
            }
            let [n] = rest[..] else {
                return Err(parse_err(lineno, "expected `qubits N`"));
            };
            let n: usize = n
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad qubit count {n:?}")))?;
            circuit = Some(Circuit::new(n).map_err(|e| parse_err(lineno, e.to_string()))?);
            continue;
        }
        let Some(c) = circuit.as_mut() else {
            return Err(parse_err(
                lineno,
                "missing `qubits N` header before first gate",
            ));
        };
        if head.eq_ignore_ascii_case("label") {
            let label = line[head.len()..].trim();
            *c = std::mem::replace(c, Circuit::new(1).expect("nonzero"))
                .with_label(label.to_string());
            continue;
        }

        let kind: GateKind = head
            .parse()
            .map_err(|e: CircuitError| parse_err(lineno, e.to_string()))?;
        let (qs, param) = match rest[..] {
            [qs] => (qs, None),
            [qs, p] => (qs, Some(p)),
            _ => {
                return Err(parse_err(
                    lineno,
                    format!("expected `{kind} q0[,q1] [num/den]`"),
                ))
            }
        };
        let qubits = qs
            .split(',')
            .map(|q| {
                q.trim()
                    .parse::<usize>()
                    .map_err(|_| parse_err(lineno, format!("bad qubit index {q:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let param = param
            .map(|p| p.parse::<Phase>())
            .transpose()
            .map_err(|e| parse_err(lineno, e.to_string()))?;
        let gate = Gate::new(kind, &qubits, param).map_err(|e| parse_err(lineno, e.to_string()))?;
        c.push(gate).map_err(|e| parse_err(lineno, e.to_string()))?;
    }
    circuit.ok_or_else(|| parse_err(src.lines().count().max(1), "missing `qubits N` header"))
}

/// Imports a minimal OpenQASM 2 subset: `qreg` declarations (concatenated in
/// declaration order), the gates `h x y z s sdg t tdg rx ry rz cx cz swap`
/// (plus `rzz`), with angle expressions over `pi`, numbers, `+ - * /` and
/// parentheses. `OPENQASM`, `include`, `creg` and `barrier` lines are ignored.
pub fn parse_qasm(src: &str) -> Result<Circuit, CircuitError> {
    let mut registers: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    let mut n_qubits = 0usize;
    let mut pending: Vec<(usize, GateKind, Vec<usize>, Option<Phase>)> = Vec::new();

    for (idx, raw) in src.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.split("//").next().unwrap_or("").trim();
        for stmt in line.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let lower = stmt.to_ascii_lowercase();
            if lower.starts_with("openqasm")
                || lower.starts_with("include")
                || lower.starts_with("creg")
                || lower.starts_with("barrier")
            {
                continue;
            }
            if let Some(decl) = lower.strip_prefix("qreg") {
                let (name, size) = parse_register_ref(decl.trim(), lineno)?;
                if registers.contains_key(&name) {
                    return Err(parse_err(lineno, format!("register {name} declared twice")));
                }
                registers.insert(name, (n_qubits, size));
                n_qubits += size;
                continue;
            }
            if lower.starts_with("measure") || lower.starts_with("reset") || lower.starts_with("if")
            {
                return Err(parse_err(lineno, format!("unsupported statement {stmt:?}")));
            }

            let (head, operands) = split_head(stmt);
            let (name, arg) = match head.split_once('(') {
                Some((n, a)) => {
                    let a = a
                        .strip_suffix(')')
                        .ok_or_else(|| parse_err(lineno, "unbalanced parenthesis"))?;
                    (n.trim(), Some(a))
                }
                None => (head.trim(), None),
            };
            let kind = match name.to_ascii_lowercase().as_str() {
                "u1" | "p" => GateKind::RZ,
                other => other
                    .parse::<GateKind>()
                    .map_err(|e| parse_err(lineno, e.to_string()))?,
            };
            let param = arg
                .map(|a| {
                    let theta = eval_angle(a).map_err(|m| parse_err(lineno, m))?;
                    quantize_phase(theta).map_err(|e| parse_err(lineno, e.to_string()))
                })
                .transpose()?;
            let qubits = operands
                .split(',')
                .map(|op| {
                    let (reg, index) = parse_register_ref(op.trim(), lineno)?;
                    let &(offset, size) = registers
                        .get(&reg)
                        .ok_or_else(|| parse_err(lineno, format!("unknown register {reg}")))?;
                    if index >= size {
                        return Err(parse_err(lineno, format!("{reg}[{index}] out of range")));
                    }
                    Ok(offset + index)
                })
                .collect::<Result<Vec<_>, _>>()?;
            pending.push((lineno, kind, qubits, param));
        }
    }

    let mut c = Circuit::new(n_qubits).map_err(|_| parse_err(1, "no qreg declared"))?;
    for (lineno, kind, qubits, param) in pending {
        let gate = Gate::new(kind, &qubits, param).map_err(|e| parse_err(lineno, e.to_string()))?;
        c.push(gate).map_err(|e| parse_err(lineno, e.to_string()))?;
    }
    Ok(c)
}

fn split_head(stmt: &str) -> (&str, &str) {
    // The head may contain spaces inside its parenthesized argument.
    let mut depth = 0i32;
    for (i, ch) in stmt.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            c if c.is_whitespace() && depth == 0 => return (&stmt[..i], stmt[i..].trim()),
            _ => {}
        }
    }
    (stmt, "")
}

fn parse_register_ref(s: &str, lineno: usize) -> Result<(String, usize), CircuitError> {
    let bad = || parse_err(lineno, format!("expected `name[index]`, got {s:?}"));
    let (name, rest) = s.split_once('[').ok_or_else(bad)?;
    let index = rest.strip_suffix(']').ok_or_else(bad)?;
    let index = index.trim().parse().map_err(|_| bad())?;
    Ok((name.trim().to_string(), index))
}

/// Evaluates an angle expression such as `-3*pi/4` or `0.5 + pi/(2*2)`.
fn eval_angle(src: &str) -> Result<f64, String> {
    let tokens = tokenize(src)?;
    let mut p = ExprParser { tokens, pos: 0 };
    let v = p.expr()?;
    if p.pos != p.tokens.len() {
        return Err(format!("trailing input in angle {src:?}"));
    }
    Ok(v)
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<Tok>, String> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if "+-*/()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len()
                && (chars[i].is_ascii_digit()
                    || chars[i] == '.'
                    || chars[i] == 'e'
                    || chars[i] == 'E'
                    || ((chars[i] == '-' || chars[i] == '+') && matches!(chars[i - 1], 'e' | 'E')))
            {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            out.push(Tok::Num(
                text.parse().map_err(|_| format!("bad number {text:?}"))?,
            ));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            match word.as_str() {
                "pi" => out.push(Tok::Num(std::f64::consts::PI)),
                _ => return Err(format!("unknown identifier {word:?}")),
            }
        } else {
            return Err(format!("unexpected character {c:?}"));
        }
    }
    Ok(out)
}

struct ExprParser {
    tokens: Vec<Tok>,
    pos: usize,
}

impl ExprParser {
    fn peek_op(&self) -> Option<char> {
        match self.tokens.get(self.pos) {
            Some(Tok::Op(c)) => Some(*c),
            _ => None,
        }
    }

    fn expr(&mut self) -> Result<f64, String> {
        let mut v = self.term()?;
        while let Some(op @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.term()?;
            v = if op == '+' { v + rhs } else { v - rhs };
        }
        Ok(v)
    }

    fn term(&mut self) -> Result<f64, String> {
        let mut v = self.unary()?;
        while let Some(op @ ('*' | '/')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.unary()?;
            v = if op == '*' { v * rhs } else { v / rhs };
        }
        Ok(v)
    }

    fn unary(&mut self) -> Result<f64, String> {
        match self.peek_op() {
            Some('-') => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<f64, String> {
        match self.tokens.get(self.pos).cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(v)
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek_op() != Some(')') {
                    return Err("expected `)`".into());
                }
                self.pos += 1;
                Ok(v)
            }
            other => Err(format!("unexpected token {other:?}")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let src = "qubits 3\nlabel demo\nH 0\nRZ 1 -1/4\nCX 0,2\nRZZ 1,2 3/8\n";
        let c = parse_text(src).unwrap();
        assert_eq!(c.label(), Some("demo"));
        assert_eq!(c.len(), 4);
        assert_eq!(c.to_text(), src);
        assert_eq!(parse_text(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn text_comments_and_blank_lines() {
        let c = parse_text("# bell\n\nqubits 2  # two wires\nh 0\ncnot 0,1\n").unwrap();
        assert_eq!(c.gates(), &[Gate::h(0), Gate::cx(0, 1)]);
    }

    #[test]
    fn text_errors_name_the_line() {
        let err = parse_text("qubits 2\nH 0\nFOO 1\n").unwrap_err();
        assert!(matches!(err, CircuitError::Parse { line: 3, .. }), "{err}");
        let err = parse_text("qubits 2\nCX 0,2\n").unwrap_err();
        assert!(matches!(err, CircuitError::Parse { line: 2, .. }));
        let err = parse_text("qubits 2\nRZ 0\n").unwrap_err();
        assert!(matches!(err, CircuitError::Parse { line: 2, .. }));
        let err = parse_text("H 0\n").unwrap_err();
        assert!(matches!(err, CircuitError::Parse { line: 1, .. }));
        let err = parse_text("qubits 1\nRZ 0 1/3\n").unwrap_err();
        assert!(matches!(err, CircuitError::Parse { line: 2, .. }));
    }

    #[test]
    fn qasm_subset() {
        let src = r#"OPENQASM 2.0;
include "qelib1.inc";
qreg a[2];
qreg b[1];
creg c[3];
h a[0];
rz(-pi/4) b[0];
rx( 2*pi / (4) ) a[1]; cx a[0],b[0];
barrier a[0],a[1];
swap a[1], b[0];
"#;
        let c = parse_qasm(src).unwrap();
        assert_eq!(c.n_qubits(), 3);
        assert_eq!(
            c.gates(),
            &[
                Gate::h(0),
                Gate::rz(2, Phase::MINUS_QUARTER_PI),
                Gate::rx(1, Phase::HALF_PI),
                Gate::cx(0, 2),
                Gate::swap(1, 2),
            ]
        );
    }

    #[test]
    fn qasm_rejects_measurement_and_bad_refs() {
        assert!(parse_qasm("qreg q[1];\nmeasure q[0] -> c[0];").is_err());
        let err = parse_qasm("qreg q[1];\nh q[1];").unwrap_err();
        assert!(matches!(err, CircuitError::Parse { line: 2, .. }));
        assert!(parse_qasm("qreg q[2];\nrz(pi/) q[0];").is_err());
    }

    #[test]
    fn angle_expressions() {
        let pi = std::f64::consts::PI;
        assert_eq!(eval_angle("pi").unwrap(), pi);
        assert_eq!(eval_angle("-pi/2").unwrap(), -pi / 2.0);
        assert_eq!(eval_angle("1.5e-1*2").unwrap(), 0.3);
        assert_eq!(eval_angle("(1+1)*pi/-4").unwrap(), -pi / 2.0);
        assert!(eval_angle("tau").is_err());
    }
}
