use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

/// Failure of the front end itself: bad invocation or unreadable input.
#[derive(Debug)]
pub struct Usage(pub String);

pub enum Failure {
    Usage(Usage),
    Domain(liftgap::Error),
}

impl From<liftgap::Error> for Failure {
    fn from(e: liftgap::Error) -> Self {
        Failure::Domain(e)
    }
}

impl From<Usage> for Failure {
    fn from(e: Usage) -> Self {
        Failure::Usage(e)
    }
}

pub fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(Usage(msg.into()))
}

/// What went into a run, embedded in every JSON result.
pub struct Manifest {
    command: String,
    parameters: Map<String, Value>,
    seed: Option<u64>,
    inputs: Vec<(String, String)>,
    outputs: Vec<String>,
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        Manifest { command: command.into(), parameters: Map::new(), seed: None, inputs: Vec::new(), outputs: Vec::new() }
    }

    pub fn param(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.parameters.insert(key.into(), value.into());
        self
    }

    pub fn seed(&mut self, seed: u64) -> &mut Self {
        self.seed = Some(seed);
        self
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    /// Read a file, or standard input for `None` / `-`.
    pub fn read(&mut self, path: Option<&Path>) -> Result<String, Failure> {
        let (label, bytes) = match path {
            Some(p) if p != Path::new("-") => {
                let bytes = fs::read(p).map_err(|e| usage(format!("cannot read {}: {e}", p.display())))?;
                (p.display().to_string(), bytes)
            }
            _ => {
                let mut buf = Vec::new();
                std::io::stdin().read_to_end(&mut buf).map_err(|e| usage(format!("cannot read standard input: {e}")))?;
                ("-".to_string(), buf)
            }
        };
        self.inputs.push((label, hex::encode(Sha256::digest(&bytes))));
        String::from_utf8(bytes).map_err(|_| usage("input is not UTF-8"))
    }

    pub fn to_value(&self) -> Value {
        let inputs: Vec<Value> = self.inputs.iter().map(|(p, h)| json!({"path": p, "sha256": h})).collect();
        json!({
            "command": self.command,
            "parameters": Value::Object(self.parameters.clone()),
            "seed": self.seed,
            "inputs": inputs,
            "version": env!("CARGO_PKG_VERSION"),
            "outputs": self.outputs,
        })
    }
}

/// Parse a JSON string produced by the library into a value.
pub fn embedded(text: &str) -> Value {
    serde_json::from_str(text).expect("library JSON is valid")
}

/// Print `result` with the manifest merged in; keys come out sorted.
pub fn emit(mut result: Value, manifest: &Manifest) {
    if let Value::Object(map) = &mut result {
        map.insert("manifest".into(), manifest.to_value());
    }
    println!("{}", serde_json::to_string(&result).expect("serializable"));
}

pub fn write_file(dir: &Path, name: &str, body: &str, manifest: &mut Manifest) -> Result<PathBuf, Failure> {
    fs::create_dir_all(dir).map_err(|e| usage(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, body).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
    manifest.output(&path);
    Ok(path)
}

pub fn error_line(f: &Failure) -> String {
    let v = match f {
        Failure::Usage(Usage(msg)) => json!({"error": "usage", "message": msg}),
        Failure::Domain(e) => {
            let mut v = json!({"error": e.kind(), "message": e.to_string()});
            if let liftgap::Error::Exhausted { best, .. } = e {
                v["best"] = embedded(&best.to_json());
            }
            v
        }
    };
    serde_json::to_string(&v).expect("serializable")
}
