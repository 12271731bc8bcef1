//! Running an external SMT-LIB v2 solver and reading its answer.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::time::Duration;

use wait_timeout::ChildExt;

use super::SmtError;

/// How to start the solver.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverConfig {
    /// Command line; the problem is written to its stdin.
    pub command: String,
    pub timeout: Duration,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { command: "z3 -in".into(), timeout: Duration::from_secs(60) }
    }
}

impl SolverConfig {
    pub fn new(command: impl Into<String>) -> Self {
        SolverConfig { command: command.into(), ..Default::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Value {
    Bool(bool),
    Int(i64),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Model {
    values: HashMap<String, Value>,
}

impl Model {
    pub fn get(&self, name: &str) -> Option<Value> {
        self.values.get(name).copied()
    }

    pub fn bool(&self, name: &str) -> Result<bool, SmtError> {
        match self.get(name) {
            Some(Value::Bool(b)) => Ok(b),
            _ => Err(SmtError::Unparsable(format!("no Bool value for {name}"))),
        }
    }

    pub fn int(&self, name: &str) -> Result<i64, SmtError> {
        match self.get(name) {
            Some(Value::Int(n)) => Ok(n),
            _ => Err(SmtError::Unparsable(format!("no Int value for {name}"))),
        }
    }

    pub fn insert(&mut self, name: impl Into<String>, v: Value) {
        self.values.insert(name.into(), v);
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolverResult {
    Sat(Model),
    Unsat,
}

/// Runs the solver on `input`.
pub fn solve(input: &str, cfg: &SolverConfig) -> Result<SolverResult, SmtError> {
    let argv = shlex::split(&cfg.command)
        .filter(|a| !a.is_empty())
        .ok_or_else(|| SmtError::Spawn(format!("cannot parse solver command {:?}", cfg.command)))?;
    let mut child = Command::new(&argv[0])
        .args(&argv[1..])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| SmtError::Spawn(format!("{}: {e}", argv[0])))?;

    let mut stdout = child.stdout.take().expect("piped stdout");
    let reader = std::thread::spawn(move || {
        let mut s = String::new();
        stdout.read_to_string(&mut s).map(|_| s)
    });
    let mut stderr = child.stderr.take().expect("piped stderr");
    let err_reader = std::thread::spawn(move || {
        let mut s = String::new();
        let _ = stderr.read_to_string(&mut s);
        s
    });
    {
        let mut stdin = child.stdin.take().expect("piped stdin");
        // A solver that exits early closes the pipe; its output decides.
        let _ = stdin.write_all(input.as_bytes());
    }

    let status = match child.wait_timeout(cfg.timeout).map_err(|e| SmtError::Spawn(e.to_string()))? {
        Some(s) => s,
        None => {
            let _ = child.kill();
            let _ = child.wait();
            return Err(SmtError::Timeout(cfg.timeout));
        }
    };
    let out = reader.join().expect("reader thread").map_err(|e| SmtError::Spawn(e.to_string()))?;
    let err = err_reader.join().unwrap_or_default();
    match parse_output(&out) {
        Ok(r) => Ok(r),
        Err(SmtError::Unparsable(_)) if !status.success() => Err(SmtError::Crash {
            status: status.code(),
            stderr: if err.trim().is_empty() { out } else { err },
        }),
        Err(e) => Err(e),
    }
}

/// Reads `sat`/`unsat`/`unknown` from the first line. After `unsat`, the error
/// a solver prints for `(get-model)` is ignored.
pub fn parse_output(out: &str) -> Result<SolverResult, SmtError> {
    let mut lines = out.lines().skip_while(|l| l.trim().is_empty());
    let first = lines.next().map(str::trim).unwrap_or("");
    match first {
        "unsat" => Ok(SolverResult::Unsat),
        "unknown" => Err(SmtError::Unknown),
        "sat" => {
            let rest: Vec<&str> = lines.collect();
            parse_model(&rest.join("\n")).map(SolverResult::Sat)
        }
        other => Err(SmtError::Unparsable(format!("unexpected solver output {other:?}"))),
    }
}

/// Parses a `(get-model)` answer: a list of `(define-fun name () Sort value)`.
pub fn parse_model(text: &str) -> Result<Model, SmtError> {
    let bad = |m: String| SmtError::Unparsable(m);
    let v = lexpr::from_str(text).map_err(|e| bad(format!("model: {e}")))?;
    let mut items: Vec<&lexpr::Value> = v.list_iter().ok_or_else(|| bad("model is not a list".into()))?.collect();
    // Older solvers wrap the list as `(model ...)`.
    if items.first().and_then(|x| x.as_symbol()) == Some("model") {
        items.remove(0);
    }
    let mut values = HashMap::new();
    for item in items {
        let parts: Vec<&lexpr::Value> = item.list_iter().ok_or_else(|| bad(format!("bad entry {item}")))?.collect();
        if parts.len() != 5 || parts[0].as_symbol() != Some("define-fun") {
            return Err(bad(format!("bad entry {item}")));
        }
        let name = parts[1].as_symbol().ok_or_else(|| bad(format!("bad name in {item}")))?;
        if !parts[2].is_null() && parts[2].list_iter().is_none_or(|mut l| l.next().is_some()) {
            // Function definitions are not ours.
            continue;
        }
        let value = match parts[3].as_symbol() {
            Some("Bool") => Value::Bool(match parts[4].as_symbol() {
                Some("true") => true,
                Some("false") => false,
                _ => return Err(bad(format!("bad Bool in {item}"))),
            }),
            Some("Int") => Value::Int(parse_int(parts[4]).ok_or_else(|| bad(format!("bad Int in {item}")))?),
            _ => continue,
        };
        values.insert(name.to_string(), value);
    }
    Ok(Model { values })
}

fn parse_int(v: &lexpr::Value) -> Option<i64> {
    if let Some(n) = v.as_i64() {
        return Some(n);
    }
    let parts: Vec<&lexpr::Value> = v.list_iter()?.collect();
    match parts.as_slice() {
        [op, x] if op.as_symbol() == Some("-") => parse_int(x).map(|n| -n),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_models() {
        let out = "sat\n(\n  (define-fun x () Int\n    (- 1))\n  (define-fun b () Bool\n    false)\n  (define-fun y () Int 7)\n)\n";
        let SolverResult::Sat(m) = parse_output(out).unwrap() else { panic!() };
        assert_eq!(m.int("x").unwrap(), -1);
        assert_eq!(m.int("y").unwrap(), 7);
        assert!(!m.bool("b").unwrap());
        assert!(m.bool("x").is_err());
    }

    #[test]
    fn unsat_ignores_model_error() {
        let out = "unsat\n(error \"line 7 column 10: model is not available\")\n";
        assert_eq!(parse_output(out).unwrap(), SolverResult::Unsat);
    }

    #[test]
    fn malformed_output() {
        assert!(matches!(parse_output("hello"), Err(SmtError::Unparsable(_))));
        assert!(matches!(parse_output(""), Err(SmtError::Unparsable(_))));
        assert!(matches!(parse_output("sat\n((define-fun x Int))"), Err(SmtError::Unparsable(_))));
        assert!(matches!(parse_output("sat\n((("), Err(SmtError::Unparsable(_))));
        assert!(matches!(parse_output("unknown\n"), Err(SmtError::Unknown)));
    }

    #[test]
    fn missing_solver() {
        let cfg = SolverConfig::new("/nonexistent/solver-binary -in");
        assert!(matches!(solve("(check-sat)", &cfg), Err(SmtError::Spawn(_))));
        assert!(matches!(solve("", &SolverConfig::new("")), Err(SmtError::Spawn(_))));
    }

    #[test]
    fn crashing_solver() {
        let cfg = SolverConfig::new("sh -c 'cat >/dev/null; echo boom >&2; exit 3'");
        assert!(matches!(solve("(check-sat)", &cfg), Err(SmtError::Crash { status: Some(3), .. })));
    }

    #[test]
    fn slow_solver_times_out() {
        let cfg = SolverConfig { command: "sleep 5".into(), timeout: Duration::from_millis(200) };
        assert!(matches!(solve("(check-sat)", &cfg), Err(SmtError::Timeout(_))));
    }
}
