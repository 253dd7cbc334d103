use serde::Serialize;
use serde_json::{json, Value};

/// Exit status classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Parse,
    Precondition,
    Numerical,
}

impl ErrorKind {
    pub fn exit_code(self) -> u8 {
        match self {
            ErrorKind::Parse => 2,
            ErrorKind::Precondition => 3,
            ErrorKind::Numerical => 4,
        }
    }
}

/// Machine-readable error, printed to stderr as `{module, message, context}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CliError {
    pub module: String,
    pub message: String,
    pub context: Value,
    #[serde(skip)]
    pub kind: ErrorKind,
}

impl CliError {
    pub fn parse(message: impl Into<String>, context: Value) -> Self {
        Self {
            module: "cli".into(),
            message: message.into(),
            context,
            kind: ErrorKind::Parse,
        }
    }

    pub fn field(field: &str, message: impl Into<String>) -> Self {
        Self::parse(message, json!({ "field": field }))
    }

    /// Wraps a library error raised by `module`.
    pub fn core(module: &str, err: markovgeom::Error, context: Value) -> Self {
        use markovgeom::Error as E;
        let kind = match err {
            E::NonFinite { .. } | E::ConvergenceFailure => ErrorKind::Numerical,
            _ => ErrorKind::Precondition,
        };
        let mut context = match context {
            Value::Object(m) => m,
            Value::Null => Default::default(),
            other => {
                let mut m = serde_json::Map::new();
                m.insert("detail".into(), other);
                m
            }
        };
        match &err {
            E::NotHermitian { norm, .. }
            | E::NotUnitary { norm }
            | E::NotIdentifiable { norm } => {
                context.insert("norm".into(), json!(norm));
            }
            E::NotErgodic {
                zero_eigen_count,
                min_stationary_eigenvalue,
            } => {
                context.insert("zero_eigen_count".into(), json!(zero_eigen_count));
                context.insert(
                    "min_stationary_eigenvalue".into(),
                    json!(min_stationary_eigenvalue),
                );
            }
            _ => {}
        }
        Self {
            module: module.into(),
            message: err.to_string(),
            context: Value::Object(context),
            kind,
        }
    }

    pub fn exit_code(&self) -> u8 {
        self.kind.exit_code()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("error object serializes")
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.module, self.message)
    }
}

impl std::error::Error for CliError {}
