use serde_json::{json, Value};

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Solver(fermisurf::Error),
    Io(String),
    Check(String),
}

impl From<fermisurf::Error> for CliError {
    fn from(e: fermisurf::Error) -> Self {
        CliError::Solver(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            _ => EXIT_SOLVER,
        }
    }

    /// Structured report written to standard error.
    pub fn to_json(&self, command: &str) -> Value {
        let (kind, detail) = match self {
            CliError::Config(m) => ("config", json!({ "message": m })),
            CliError::Io(m) => ("io", json!({ "message": m })),
            CliError::Check(m) => ("check", json!({ "message": m })),
            CliError::Solver(e) => ("solver", solver_detail(e)),
        };
        json!({ "error": { "kind": kind, "command": command, "detail": detail } })
    }
}

fn solver_detail(e: &fermisurf::Error) -> Value {
    use fermisurf::Error as E;
    let variant = match e {
        E::Contract(_) => "contract",
        E::NoConvergence { .. } => "no_convergence",
        E::Bracket(_) => "bracket",
        E::Unbound(_) => "unbound",
        E::XcCondition(_) => "xc_condition",
        E::Diagnostic(_) => "diagnostic",
        E::Snapshot(_) => "snapshot",
        E::Io(_) => "io",
    };
    let mut v = json!({ "variant": variant, "message": e.to_string() });
    if let E::NoConvergence {
        solver,
        iterations,
        residual,
        ..
    } = e
    {
        v["solver"] = json!(solver);
        v["iterations"] = json!(iterations);
        v["residual"] = json!(residual);
    }
    v
}
