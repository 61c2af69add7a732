use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use chaintail::tailcalc::{ConstantRegistry, ConstantsUsed};
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

/// Everything that went into a run and lands in each artifact's metadata.
pub struct Context {
    pub registry: ConstantRegistry,
    pub out: PathBuf,
    fit: Option<String>,
    inputs: BTreeMap<String, String>,
}

#[derive(Serialize)]
struct Meta<'a> {
    command: &'a str,
    version: &'static str,
    config_hash: String,
    seed: Option<u64>,
    constants: ConstantsUsed,
    fitted: bool,
}

#[derive(Serialize)]
struct Artifact<'a, T: Serialize> {
    meta: Meta<'a>,
    #[serde(flatten)]
    result: &'a T,
}

impl Context {
    pub fn new(out: PathBuf, fit: Option<&Path>) -> Result<Self, String> {
        let (registry, fit) = match fit {
            Some(path) => {
                let text = read(path)?;
                let reg = ConstantRegistry::from_json(&text).map_err(|e| format!("{}: {e}", path.display()))?;
                (reg, Some(text))
            }
            None => (ConstantRegistry::default(), None),
        };
        Ok(Self { registry, out, fit, inputs: BTreeMap::new() })
    }

    /// Reads an input file and records its contents for the config hash.
    pub fn input(&mut self, path: &Path) -> Result<String, String> {
        let text = read(path)?;
        self.inputs.insert(path.display().to_string(), text.clone());
        Ok(text)
    }

    pub fn input_bytes(&mut self, path: &Path) -> Result<Vec<u8>, String> {
        let bytes = fs::read(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        self.inputs.insert(path.display().to_string(), hex::encode(Sha256::digest(&bytes)));
        Ok(bytes)
    }

    /// Adds constants from an experiment config on top of `--fit`.
    pub fn extra_constants(&mut self, extra: &BTreeMap<String, f64>) -> Result<(), String> {
        for (k, &v) in extra {
            self.registry.set(k.clone(), v).map_err(|e| e.to_string())?;
        }
        Ok(())
    }

    fn hash<A: Serialize>(&self, args: &A) -> String {
        let doc = json!({
            "args": args,
            "fit": self.fit,
            "inputs": self.inputs,
            "constants": self.registry.snapshot(),
        });
        let bytes = serde_json::to_vec(&doc).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }

    /// Writes `<out>/<name>.json` and returns the text.
    pub fn write_json<A: Serialize, T: Serialize>(
        &self,
        name: &str,
        args: &A,
        seed: Option<u64>,
        fitted: bool,
        result: &T,
    ) -> Result<String, String> {
        let artifact = Artifact {
            meta: Meta {
                command: name,
                version: env!("CARGO_PKG_VERSION"),
                config_hash: self.hash(args),
                seed,
                constants: self.registry.snapshot(),
                fitted,
            },
            result,
        };
        let mut text = serde_json::to_string_pretty(&artifact).map_err(|e| e.to_string())?;
        text.push('\n');
        self.write(&format!("{name}.json"), &text)?;
        Ok(text)
    }

    pub fn write_csv(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), String> {
        let mut text = header.join(",");
        text.push('\n');
        for row in rows {
            text.push_str(&row.join(","));
            text.push('\n');
        }
        self.write(&format!("{name}.csv"), &text)
    }

    fn write(&self, file: &str, text: &str) -> Result<(), String> {
        fs::create_dir_all(&self.out).map_err(|e| format!("cannot create {}: {e}", self.out.display()))?;
        let path = self.out.join(file);
        fs::write(&path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
    }
}

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

/// Parses a JSON file into `T`, prefixing errors with the path.
pub fn parse<T: serde::de::DeserializeOwned>(path: &Path, text: &str) -> Result<T, String> {
    serde_json::from_str(text).map_err(|e| format!("{}: {e}", path.display()))
}
